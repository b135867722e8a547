use clap::Parser;

fn main() {
    let cli = hilbund_cli::Cli::parse();
    std::process::exit(hilbund_cli::run(cli));
}
