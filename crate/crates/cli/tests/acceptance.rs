//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero on any
//! failure so that `cargo test` reports it.

use std::path::{Path, PathBuf};
use std::process::Command as Process;
use std::time::{Duration, Instant};

use hilbund::bundle::fixtures as bundles;
use hilbund::hyperspace::{
    check_singleton_continuity, roundtrip_check, slice_selection, subsets_up_to, ConvexSelection, FiniteMetricSpace,
    SingletonNet, SubsetPoint, DEFAULT_ENUMERATION_CAP,
};
use hilbund::linalg::{Matrix, Vector};
use hilbund::renorming::{build_renorming, select, verify_lsc, Net};
use hilbund::seminorm::{eval, l2_hull_membership, lp_combine, HilbertNorm, Seminorm};
use hilbund_cli::{execute, Command, Settings};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn fixture(name: &str) -> String {
    std::fs::read_to_string(fixture_path(name)).expect("fixture exists")
}

fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

fn run(cmd: Command, name: &str, settings: &Settings) -> Value {
    execute(cmd, &fixture(name), settings)
        .unwrap_or_else(|e| panic!("{} on {name}: {e}", cmd.name()))
        .results
}

fn matrix(v: &Value) -> Vec<Vec<f64>> {
    serde_json::from_value(v.clone()).expect("matrix")
}

fn cube_loewner() -> Outcome {
    let start = Instant::now();
    let r = run(Command::Mvee, "mvee_cube.json", &Settings::default());
    let elapsed = start.elapsed();
    let g = matrix(&r["gram"]);
    let mut err = 0.0f64;
    for (i, row) in g.iter().enumerate() {
        for (j, x) in row.iter().enumerate() {
            let want = if i == j { 1.0 / 3.0 } else { 0.0 };
            err = err.max((x - want).abs());
        }
    }
    outcome(
        err <= 1e-5 && elapsed < Duration::from_secs(1),
        format!("max |Q − I/3| = {err:.2e}, {:.3}s", elapsed.as_secs_f64()),
    )
}

fn slice_eccentricity() -> Outcome {
    let r = run(Command::Mvee, "mvee_cube_slice.json", &Settings::default());
    let s = &r["slice"];
    let axes: Vec<f64> = serde_json::from_value(s["semi_axes"].clone()).unwrap();
    let ecc = s["eccentricity"].as_f64().unwrap();
    let contained = s["contained_in_outer"].as_bool().unwrap();
    let witness = s["witness_norm"].as_f64().unwrap_or(0.0);
    // The outer ellipsoid is the circumscribed ball of radius √3.
    let outer = matrix(&r["gram"]);
    let ball_err = (0..3)
        .flat_map(|i| (0..3).map(move |j| (i, j)))
        .map(|(i, j)| (outer[i][j] - if i == j { 1.0 / 3.0 } else { 0.0 }).abs())
        .fold(0.0, f64::max);
    let pass = (axes[0] - 2.0).abs() <= 1e-5
        && (axes[1] - 2f64.sqrt()).abs() <= 1e-5
        && (ecc - 0.5f64.sqrt()).abs() <= 1e-6
        && !contained
        && witness >= 2.0 - 1e-6
        && ball_err <= 1e-5;
    outcome(
        pass,
        format!(
            "semi-axes ({:.8}, {:.8}), eccentricity {ecc:.10}, contained {contained}, witness norm {witness:.8}",
            axes[0], axes[1]
        ),
    )
}

fn john_bound() -> Outcome {
    let start = Instant::now();
    let settings = Settings {
        seed: 20_240_601,
        ..Settings::default()
    };
    let r = run(Command::John, "john_random.json", &settings);
    let elapsed = start.elapsed();
    let summary = r["summary"].as_array().unwrap();
    let mut pass = elapsed < Duration::from_secs(60) && summary.len() == 4;
    let mut worst = Vec::new();
    for s in summary {
        let dim = s["dim"].as_u64().unwrap() as f64;
        let max = s["max_distortion"].as_f64().unwrap();
        pass &= s["count"].as_u64() == Some(200) && max <= dim.sqrt() + 1e-3;
        worst.push(format!("d={dim}: {max:.6}"));
    }
    outcome(pass, format!("{} in {:.2}s", worst.join(", "), elapsed.as_secs_f64()))
}

fn random_seminorm(rng: &mut ChaCha8Rng, dim: usize) -> Seminorm {
    if rng.random_bool(0.5) {
        let a = Matrix::from_fn(dim, dim, |_, _| rng.random_range(-1.0..1.0));
        Seminorm::Hilbert(HilbertNorm::new(&a * a.transpose() + Matrix::identity(dim, dim) * 0.1).unwrap())
    } else {
        Seminorm::BodyGauge(bundles::random_symmetric_polytope(dim, dim + 2, rng))
    }
}

fn barycentric_axioms() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    let mut closure_ok = true;
    let cases = 10_000;
    for _ in 0..cases {
        let dim = rng.random_range(2..=4);
        let p = [1.0, 2.0, 3.0][rng.random_range(0..3)];
        let lambda: f64 = rng.random();
        let s = random_seminorm(&mut rng, dim);
        let t = random_seminorm(&mut rng, dim);
        let v = Vector::from_fn(dim, |_, _| rng.random_range(-2.0..2.0));
        let e = |x: &Seminorm| eval(x, &v).unwrap();
        let sv = e(&s);
        let tv = e(&t);
        let scale = 1.0 + sv.max(tv);
        let idem = (e(&lp_combine(p, lambda, &s, &s).unwrap()) - sv).abs();
        let end1 = (e(&lp_combine(p, 1.0, &s, &t).unwrap()) - sv).abs();
        let end0 = (e(&lp_combine(p, 0.0, &s, &t).unwrap()) - tv).abs();
        let skew = (e(&lp_combine(p, lambda, &s, &t).unwrap()) - e(&lp_combine(p, 1.0 - lambda, &t, &s).unwrap())).abs();
        // Independent evaluation of the defining formula.
        let formula = (lambda * sv.powf(p) + (1.0 - lambda) * tv.powf(p)).powf(1.0 / p);
        let def = (e(&lp_combine(p, lambda, &s, &t).unwrap()) - formula).abs();
        worst = worst.max([idem, end1, end0, skew, def].into_iter().fold(0.0, f64::max) / scale);
        if let (Seminorm::Hilbert(a), Seminorm::Hilbert(b)) = (&s, &t) {
            match lp_combine(2.0, lambda, &s, &t).unwrap() {
                Seminorm::Hilbert(h) => {
                    let want = a.gram() * lambda + b.gram() * (1.0 - lambda);
                    closure_ok &= (h.gram() - &want).amax() <= 1e-9 * (1.0 + want.amax());
                }
                _ => closure_ok = false,
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst <= 1e-9 && closure_ok && elapsed < Duration::from_secs(10),
        format!("{cases} cases, worst relative error {worst:.2e}, Gram closure {closure_ok}, {:.2}s", elapsed.as_secs_f64()),
    )
}

fn renorming_pipeline() -> Outcome {
    let start = Instant::now();
    let b = bundles::refined_jump_path();
    let cfg = Settings::default().mvee(b.ambient_dim());
    let r = build_renorming(&b, &cfg).expect("renorming builds");
    let nonempty = r
        .per_vertex
        .values()
        .all(|v| !v.norms.is_empty() && v.norms.generators().iter().all(|g| g.is_full_rank()));
    let endpoints = vec!["x0".to_string(), "x8".to_string()];
    let strata_ok = r.strata.strata == vec![endpoints, b.base().vertices().to_vec()];
    let net = Net {
        limit: "x0".into(),
        approach: (1..=7).rev().map(|k| format!("x{k}")).collect(),
    };
    let lsc = verify_lsc(&r, &b, &[net], &["s1".into(), "s2".into()], 1e-2, &cfg).expect("lsc runs");
    let gaps: Vec<f64> = lsc.records[0].witnesses.iter().map(|w| w.gap).collect();
    let decreasing = gaps.windows(2).all(|w| w[1] <= w[0]);
    let sel = select(&r, &b, None).expect("selection runs");
    let certified = sel.choice.iter().all(|(id, c)| {
        let n = c.gram.len();
        let q = HilbertNorm::new(hilbund::linalg::rows_to_matrix(&c.gram, n)).unwrap();
        l2_hull_membership(&q, r.norms(id).unwrap(), 1e-9).unwrap().member
    });
    // The same pipeline through the command-line layer.
    let cli = run(Command::RenormVerify, "renorm_refined.json", &Settings::default());
    let cli_sel = run(Command::RenormSelect, "renorm_refined.json", &Settings::default());
    let elapsed = start.elapsed();
    let pass = nonempty
        && r.distortion_sup.is_finite()
        && strata_ok
        && lsc.pass
        && decreasing
        && certified
        && sel.modulus.is_finite()
        && cli["pass"] == Value::Bool(true)
        && cli_sel["all_members"] == Value::Bool(true)
        && elapsed < Duration::from_secs(30);
    outcome(
        pass,
        format!(
            "strata ok {strata_ok}, distortion_sup {:.6}, tail gap {:.3e}, decreasing {decreasing}, selection certified {certified}, modulus {:.4}, {:.2}s",
            r.distortion_sup,
            lsc.records[0].tail_gap,
            sel.modulus,
            elapsed.as_secs_f64()
        ),
    )
}

fn homogeneous_case() -> Outcome {
    let b = bundles::homogeneous_square(6);
    let r = build_renorming(&b, &Settings::default().mvee(2)).unwrap();
    let mut err = 0.0f64;
    let mut singletons = true;
    for v in r.per_vertex.values() {
        singletons &= v.norms.len() == 1;
        let g = v.norms.generators()[0].gram();
        err = err.max((g - Matrix::identity(2, 2) * 0.5).amax());
    }
    let sup_err = (r.distortion_sup - 2f64.sqrt()).abs();
    outcome(
        singletons && err <= 1e-5 && sup_err <= 1e-3,
        format!("singletons {singletons}, max |Q − I/2| = {err:.2e}, distortion_sup {:.8}", r.distortion_sup),
    )
}

fn binomial(n: usize, k: usize) -> u128 {
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

fn representability() -> Outcome {
    let start = Instant::now();
    let mut runs = 0;
    let mut failures = Vec::new();
    for x in 1..=3usize {
        for z in 1..=4usize {
            for n in 1..=3usize {
                let xs = FiniteMetricSpace::discrete((0..x).map(|i| format!("x{i}"))).unwrap();
                let zs = FiniteMetricSpace::euclidean(&(0..z).map(|i| vec![i as f64, (i * i) as f64]).collect::<Vec<_>>())
                    .unwrap();
                let r = roundtrip_check(&xs, &zs, n, DEFAULT_ENUMERATION_CAP).expect("under the cap");
                let per_point: u128 = (1..=n.min(z)).map(|k| binomial(z, k)).sum();
                let expected = per_point.pow(x as u32) as usize;
                runs += 1;
                if !(r.pass && r.maps == expected && r.cover_classes == expected && r.map_failures == 0 && r.cover_failures == 0) {
                    failures.push(format!("(|X|={x}, |Z|={z}, n={n})"));
                }
            }
        }
    }
    let elapsed = start.elapsed();
    outcome(
        failures.is_empty() && elapsed < Duration::from_secs(60),
        if failures.is_empty() {
            format!("{runs} configurations, counts equal, {:.2}s", elapsed.as_secs_f64())
        } else {
            format!("failed at {}", failures.join(", "))
        },
    )
}

fn random_point(rng: &mut ChaCha8Rng) -> Vector {
    Vector::from_fn(2, |_, _| rng.random_range(-1.0..1.0))
}

/// A uniformly random unit vector in the plane.
fn direction(rng: &mut ChaCha8Rng) -> Vector {
    let t = rng.random_range(0.0..std::f64::consts::TAU);
    Vector::from_row_slice(&[t.cos(), t.sin()])
}

fn slicing_lemma() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst_residual = 0.0f64;
    let mut radius_ok = true;
    // Part (1) and the reconstruction identity on random certified selections.
    for _ in 0..1000 {
        let x0 = random_point(&mut rng);
        let mut pts = vec![x0.clone(), random_point(&mut rng), random_point(&mut rng)];
        let mut terms = Vec::new();
        for k in 1..=5 {
            let h = 0.5f64.powi(k);
            pts.push(&x0 + direction(&mut rng) * h);
            pts.push(&x0 + direction(&mut rng) * h);
            terms.push(SubsetPoint::new(vec![pts.len() - 2, pts.len() - 1]).unwrap());
        }
        let size = pts.len();
        let sel = ConvexSelection::random(pts, 3, &mut rng).unwrap();
        for a in subsets_up_to(size, 2) {
            for x in (0..size).filter(|x| !a.contains(*x)) {
                worst_residual = worst_residual.max(slice_selection(&sel, x, &a).unwrap().residual);
            }
        }
        let report = check_singleton_continuity(&sel, &[SingletonNet { x0: 0, terms }], None, 0.5).unwrap();
        let rec = &report.records[0];
        radius_ok &= rec.gaps.iter().zip(&rec.radii).all(|(g, r)| *g <= r + 1e-12);
    }
    // Part (2) on seeded nets, with the continuous nearest-point selection.
    let mut part2 = 0;
    for seed in 0..100u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(1000 + seed);
        let x0 = random_point(&mut rng);
        let x = random_point(&mut rng);
        let target = random_point(&mut rng) * 2.0;
        let mut pts = vec![x0.clone(), x];
        let mut terms = Vec::new();
        for k in 1..=20 {
            let h = 0.5f64.powi(k);
            pts.push(&x0 + direction(&mut rng) * h);
            pts.push(&x0 + direction(&mut rng) * h);
            terms.push(SubsetPoint::new(vec![pts.len() - 2, pts.len() - 1]).unwrap());
        }
        let sel = ConvexSelection::nearest_point(pts, 3, &target).unwrap();
        let report = check_singleton_continuity(&sel, &[SingletonNet { x0: 0, terms }], Some(1), 1e-5).unwrap();
        let rec = &report.records[0];
        radius_ok &= rec.gaps.iter().zip(&rec.radii).all(|(g, r)| *g <= r + 1e-12);
        if rec.slice_pass == Some(true) && rec.singleton_pass {
            part2 += 1;
        }
    }
    let elapsed = start.elapsed();
    outcome(
        worst_residual <= 1e-12 && radius_ok && part2 == 100,
        format!(
            "worst residual {worst_residual:.2e}, gaps within radius {radius_ok}, part (2) {part2}/100 nets, {:.2}s",
            elapsed.as_secs_f64()
        ),
    )
}

fn determinism() -> Outcome {
    let exe = env!("CARGO_BIN_EXE_hilbund");
    let dir = tempfile::tempdir().unwrap();
    // (command, input, draws a figure)
    let cases = [
        ("mvee", "mvee_cube.json", false),
        ("mvee", "mvee_cube_slice.json", true),
        ("mvee", "mvee_square.json", true),
        ("john", "john_random.json", false),
        ("renorm-build", "bundle_122.json", true),
        ("renorm-build", "renorm_refined.json", true),
        ("renorm-verify", "renorm_refined.json", false),
        ("renorm-select", "renorm_refined.json", true),
        ("renorm-build", "bundle_square.json", true),
        ("hyper-build", "hyper_z2.json", false),
        ("hyper-roundtrip", "roundtrip_x2_z2.json", false),
        ("hyper-slice", "slice_barycentric.json", false),
        ("hyper-slice", "slice_nearest_net.json", false),
    ];
    let mut differing = Vec::new();
    for (k, (cmd, input, draws)) in cases.iter().enumerate() {
        let mut outputs = Vec::new();
        for round in 0..2 {
            let out = dir.path().join(format!("{k}-{round}.json"));
            let svg = dir.path().join(format!("{k}-{round}.svg"));
            let mut process = Process::new(exe);
            process
                .args([*cmd, "--no-timings", "--seed", "7"])
                .arg("--input")
                .arg(fixture_path(input))
                .arg("--output")
                .arg(&out)
                .env("HILBUND_THREADS", if round == 0 { "1" } else { "4" });
            if *draws {
                process.arg("--svg").arg(&svg);
            }
            let status = process.status().expect("binary runs");
            let report = std::fs::read(&out).unwrap_or_default();
            let figure = std::fs::read(&svg).unwrap_or_default();
            outputs.push((status.code(), report, figure));
        }
        if outputs[0] != outputs[1] || outputs[0].0 != Some(0) || outputs[0].2.is_empty() == *draws {
            differing.push(format!("{cmd} {input}"));
        }
    }
    outcome(
        differing.is_empty(),
        if differing.is_empty() {
            format!("{} fixtures byte-identical across runs (1 and 4 threads)", cases.len())
        } else {
            format!("differs: {}", differing.join(", "))
        },
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("cube Löwner ellipsoid", cube_loewner),
        ("diagonal slice eccentricity", slice_eccentricity),
        ("John bound on random polytopes", john_bound),
        ("ℓ^p barycentric axioms", barycentric_axioms),
        ("renorming pipeline", renorming_pipeline),
        ("homogeneous square bundle", homogeneous_case),
        ("representability round trips", representability),
        ("slicing lemma", slicing_lemma),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let result = std::panic::catch_unwind(check).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            outcome(false, format!("panicked: {msg}"))
        });
        let tag = if result.pass { "PASS" } else { "FAIL" };
        if !result.pass {
            failed += 1;
        }
        println!("{tag} [{}] {name}: {}", k + 1, result.detail);
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
