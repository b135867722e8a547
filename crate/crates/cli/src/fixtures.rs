//! Input documents for the shipped fixtures, one per command scenario.

use serde_json::{json, Value};

use hilbund::bundle::fixtures;
use hilbund::geometry::SymmetricBody;

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("fixtures serialize");
    s.push('\n');
    s
}

fn body(b: &SymmetricBody) -> Value {
    serde_json::to_value(b).expect("bodies serialize")
}

fn bundle(b: &hilbund::bundle::Bundle) -> Value {
    serde_json::to_value(b).expect("bundles serialize")
}

/// `(file name, contents)` pairs.
pub fn all() -> Vec<(&'static str, String)> {
    let cube = SymmetricBody::cube(3);
    let approach: Vec<String> = (1..=7).rev().map(|k| format!("x{k}")).collect();
    // x0 = 0, x = 1, then 2^-2, …, 2^-21 approaching x0.
    let mut line = vec![vec![0.0], vec![1.0]];
    line.extend((2..22).map(|k| vec![0.5f64.powi(k)]));
    let terms: Vec<Vec<usize>> = (2..22).map(|i| vec![i]).collect();
    vec![
        ("mvee_cube.json", pretty(&json!({ "body": body(&cube) }))),
        (
            "mvee_cube_slice.json",
            pretty(&json!({ "body": body(&cube), "slice": [[1.0, 1.0, 0.0], [0.0, 0.0, 1.0]] })),
        ),
        ("mvee_square.json", pretty(&json!({ "body": body(&SymmetricBody::cube(2)) }))),
        (
            "john_random.json",
            pretty(&json!({ "random": { "dims": [2, 3, 4, 5], "count": 200 } })),
        ),
        ("bundle_122.json", pretty(&bundle(&fixtures::jump_path_122()))),
        (
            "renorm_refined.json",
            pretty(&json!({
                "bundle": bundle(&fixtures::refined_jump_path()),
                "nets": [{ "limit": "x0", "approach": approach }],
                "probe_sections": ["s1", "s2"],
            })),
        ),
        ("bundle_square.json", pretty(&bundle(&fixtures::homogeneous_square(4)))),
        (
            "hyper_z2.json",
            pretty(&json!({ "Z": { "points": ["z1", "z2"], "dist": [[0.0, 1.0], [1.0, 0.0]] }, "n": 2 })),
        ),
        (
            "roundtrip_x2_z2.json",
            pretty(&json!({
                "X": { "points": ["a", "b"], "dist": [[0.0, 1.0], [1.0, 0.0]] },
                "Z": { "points": ["z1", "z2"], "dist": [[0.0, 1.0], [1.0, 0.0]] },
                "n": 2,
                "cover": {
                    "Y": { "points": ["y1", "y2", "y3"], "dist": [[0.0, 1.0, 1.0], [1.0, 0.0, 1.0], [1.0, 1.0, 0.0]] },
                    "X": { "points": ["a", "b"], "dist": [[0.0, 1.0], [1.0, 0.0]] },
                    "proj": [0, 0, 1],
                    "anchor": [0, 1, 1],
                },
            })),
        ),
        (
            "slice_barycentric.json",
            pretty(&json!({
                "selection": { "barycentric": { "points": [[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], "n": 3 } },
                "slices": [{ "x": 2, "A": [0, 1] }, { "x": 1, "A": [0] }],
                "exhaustive": true,
            })),
        ),
        (
            "slice_nearest_net.json",
            pretty(&json!({
                "selection": { "nearest_point": { "points": line, "n": 2, "target": [0.3] } },
                "nets": [{ "x0": 0, "terms": terms }],
                "x": 1,
            })),
        ),
    ]
}
