//! Regenerates the JSON inputs under `fixtures/`:
//! `cargo run -p hilbund-cli --example write_fixtures`.

use std::path::Path;

use hilbund_cli::fixtures;

fn main() {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures");
    for (name, text) in fixtures::all() {
        std::fs::write(dir.join(name), text).expect("fixture directory is writable");
    }
}
