//! The subcommands: parse the input document, run the computation, and
//! return the results payload plus an optional figure.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use hilbund::bundle::{self, fixtures, Bundle};
use hilbund::geometry::{convex_hull_points, Ellipsoid, Subspace, SymmetricBody};
use hilbund::hyperspace::{
    build_hyperspace, build_incidence, check_singleton_continuity, cover_to_map, map_to_cover, roundtrip_check,
    slice_selection, AnchoredCover, ConvexSelection, FiniteMetricSpace, SingletonNet, SubsetPoint,
};
use hilbund::linalg::{self, Matrix, Vector};
use hilbund::loewner::{john_check, mvee_points_detailed};
use hilbund::renorming::{build_renorming, select, verify_lsc, Net, Renorming};
use hilbund::seminorm::{l2_hull_membership, HilbertNorm};

use crate::config::Settings;
use crate::error::CliError;
use crate::svg::{Panel, Style};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::Subcommand)]
pub enum Command {
    /// Löwner ellipsoid of a point set or body, optionally of a slice.
    Mvee,
    /// John-bound certificates for bodies.
    John,
    /// Multi-valued Hilbert renorming of a bundle.
    RenormBuild,
    /// Lower-semicontinuity witnesses along nets.
    RenormVerify,
    /// Continuous-selection surrogate over the base graph.
    RenormSelect,
    /// The hyperspace Z_[n] and its incidence space.
    HyperBuild,
    /// Maps X → Z_[n] versus anchored covers, exhaustively.
    HyperRoundtrip,
    /// Slices of a convex selection and continuity at singletons.
    HyperSlice,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Mvee,
        Command::John,
        Command::RenormBuild,
        Command::RenormVerify,
        Command::RenormSelect,
        Command::HyperBuild,
        Command::HyperRoundtrip,
        Command::HyperSlice,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Command::Mvee => "mvee",
            Command::John => "john",
            Command::RenormBuild => "renorm-build",
            Command::RenormVerify => "renorm-verify",
            Command::RenormSelect => "renorm-select",
            Command::HyperBuild => "hyper-build",
            Command::HyperRoundtrip => "hyper-roundtrip",
            Command::HyperSlice => "hyper-slice",
        }
    }
}

pub struct Outcome {
    pub results: Value,
    /// Panels for `--svg`; `None` when nothing is two-dimensional.
    pub figure: Option<Vec<Panel>>,
}

pub fn execute(cmd: Command, input: &str, s: &Settings) -> Result<Outcome, CliError> {
    match cmd {
        Command::Mvee => mvee(input, s),
        Command::John => john(input, s),
        Command::RenormBuild => renorm_build(input, s),
        Command::RenormVerify => renorm_verify(input, s),
        Command::RenormSelect => renorm_select(input, s),
        Command::HyperBuild => hyper_build(input),
        Command::HyperRoundtrip => hyper_roundtrip(input, s),
        Command::HyperSlice => hyper_slice(input, s),
    }
}

fn to_value<T: Serialize>(x: &T) -> Result<Value, CliError> {
    serde_json::to_value(x).map_err(|e| CliError::Failure(format!("serializing results: {e}")))
}

fn invalid(msg: impl Into<String>) -> CliError {
    CliError::Validation(vec![msg.into()])
}

fn rows(m: &Matrix) -> Vec<Vec<f64>> {
    linalg::matrix_to_rows(m)
}

fn figure(panels: Vec<Panel>) -> Option<Vec<Panel>> {
    (!panels.is_empty()).then_some(panels)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct MveeInput {
    #[serde(default)]
    points: Option<Vec<Vec<f64>>>,
    #[serde(default)]
    body: Option<SymmetricBody>,
    /// Spanning vectors of a subspace; the body is cut by it.
    #[serde(default)]
    slice: Option<Vec<Vec<f64>>>,
}

fn mvee(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp: MveeInput = serde_json::from_str(input)?;
    let (points, body) = match (inp.points, inp.body) {
        (Some(p), None) => {
            let d = p.first().map(Vec::len).unwrap_or(0);
            if d == 0 || p.iter().any(|q| q.len() != d) {
                return Err(invalid("points must be nonempty and of one dimension"));
            }
            (p.into_iter().map(Vector::from_vec).collect::<Vec<_>>(), None)
        }
        (None, Some(b)) => (b.vertices().to_vec(), Some(b)),
        _ => return Err(invalid("give exactly one of `points` and `body`")),
    };
    let d = points[0].len();
    let sol = mvee_points_detailed(&points, &s.mvee(d))?;
    let m = sol.ellipsoid.metrics();
    let mut results = json!({
        "dim": d,
        "gram": rows(sol.ellipsoid.gram()),
        "semi_axes": m.semi_axes,
        "eccentricity": m.eccentricity,
        "iterations": sol.iterations,
        "gap": sol.gap,
    });
    if let Some(b) = &body {
        let cert = john_check(b, &sol.ellipsoid)?;
        results["john"] = json!({ "distortion": cert.distortion, "john_bound": cert.john_bound });
    }
    let mut panels = Vec::new();
    if d == 2 {
        let mut sym = points.clone();
        sym.extend(points.iter().map(|p| -p));
        let hull = convex_hull_points(&sym)?;
        let vs: Vec<Vec<f64>> = hull.vertices().iter().map(|v| v.iter().copied().collect()).collect();
        panels.push(
            Panel::new("Löwner ellipse")
                .body(&vs, Style::Body)
                .ellipse(sol.ellipsoid.gram(), Style::Ellipse),
        );
    }
    if let Some(span) = inp.slice {
        let b = body.as_ref().ok_or_else(|| invalid("`slice` needs a `body`"))?;
        let vectors: Vec<Vector> = span.into_iter().map(Vector::from_vec).collect();
        let sub = Subspace::span(d, &vectors)?;
        if sub.is_empty() {
            return Err(invalid("the slice spans the zero subspace"));
        }
        let ortho = Subspace::new(d, sub.orthonormal_basis().column_iter().map(|c| c.into_owned()).collect())?;
        let k = ortho.rank();
        let cut = b.intersect_subspace(&ortho)?;
        let inner = mvee_points_detailed(cut.vertices(), &s.mvee(k))?;
        let containment = sol.ellipsoid.contains_embedded(&ortho, &inner.ellipsoid, s.tol_or(1e-9))?;
        let wn = containment.witness.as_ref().map(|w| w.iter().map(|x| x * x).sum::<f64>().sqrt());
        let im = inner.ellipsoid.metrics();
        let cut_vertices: Vec<Vec<f64>> = cut.vertices().iter().map(|v| v.iter().copied().collect()).collect();
        results["slice"] = json!({
            "rank": k,
            "basis": ortho.basis_vectors().iter().map(|v| v.iter().copied().collect::<Vec<_>>()).collect::<Vec<_>>(),
            "vertices": cut_vertices,
            "gram": rows(inner.ellipsoid.gram()),
            "semi_axes": im.semi_axes,
            "eccentricity": im.eccentricity,
            "iterations": inner.iterations,
            "contained_in_outer": containment.contained,
            "excess": containment.excess,
            "witness": containment.witness,
            "witness_norm": wn,
        });
        if k == 2 {
            let outer = sol.ellipsoid.restrict(&ortho)?;
            panels.push(
                Panel::new("slice")
                    .body(&cut_vertices, Style::Body)
                    .ellipse(inner.ellipsoid.gram(), Style::Ellipse)
                    .ellipse(outer.gram(), Style::Outer),
            );
        }
    }
    Ok(Outcome {
        results,
        figure: figure(panels),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RandomBodies {
    dims: Vec<usize>,
    count: usize,
    /// Gaussian samples per body (before symmetrization); default `dim + 4`.
    #[serde(default)]
    points: Option<usize>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct JohnInput {
    #[serde(default)]
    body: Option<SymmetricBody>,
    /// Checks this ellipsoid instead of computing the Löwner ellipsoid.
    #[serde(default)]
    ellipsoid: Option<Ellipsoid>,
    #[serde(default)]
    bodies: Option<Vec<SymmetricBody>>,
    #[serde(default)]
    random: Option<RandomBodies>,
}

#[derive(Serialize)]
struct JohnCase {
    dim: usize,
    distortion: f64,
    john_bound: f64,
    within: bool,
    gram: Vec<Vec<f64>>,
}

#[derive(Serialize)]
struct JohnSummary {
    dim: usize,
    count: usize,
    max_distortion: f64,
    john_bound: f64,
    within: bool,
}

fn john(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp: JohnInput = serde_json::from_str(input)?;
    let slack = s.tol_or(1e-3);
    let case = |b: &SymmetricBody, e: &Ellipsoid| -> Result<JohnCase, CliError> {
        let cert = john_check(b, e)?;
        Ok(JohnCase {
            dim: b.dim(),
            distortion: cert.distortion,
            john_bound: cert.john_bound,
            within: cert.distortion <= cert.john_bound + slack,
            gram: rows(e.gram()),
        })
    };
    let loewner = |b: &SymmetricBody| -> Result<Ellipsoid, CliError> {
        Ok(mvee_points_detailed(b.vertices(), &s.mvee(b.dim()))?.ellipsoid)
    };
    let (bodies, explicit) = match (inp.body, inp.bodies, inp.random) {
        (Some(b), None, None) => (vec![b], true),
        (None, Some(bs), None) if !bs.is_empty() => (bs, true),
        (None, None, Some(r)) => {
            if r.dims.contains(&0) || r.count == 0 {
                return Err(invalid("random bodies need positive dims and count"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(s.seed);
            let mut bs = Vec::with_capacity(r.dims.len() * r.count);
            for &d in &r.dims {
                for _ in 0..r.count {
                    bs.push(fixtures::random_symmetric_polytope(d, r.points.unwrap_or(d + 4), &mut rng));
                }
            }
            (bs, false)
        }
        _ => return Err(invalid("give exactly one of `body`, `bodies` and `random`")),
    };
    if inp.ellipsoid.is_some() && bodies.len() != 1 {
        return Err(invalid("`ellipsoid` goes with a single `body`"));
    }
    let cases: Vec<JohnCase> = match &inp.ellipsoid {
        Some(e) => vec![case(&bodies[0], e)?],
        None => bodies
            .par_iter()
            .map(|b| case(b, &loewner(b)?))
            .collect::<Result<_, _>>()?,
    };
    let mut summary: Vec<JohnSummary> = Vec::new();
    for c in &cases {
        match summary.iter_mut().find(|x| x.dim == c.dim) {
            Some(x) => {
                x.count += 1;
                x.max_distortion = x.max_distortion.max(c.distortion);
                x.within &= c.within;
            }
            None => summary.push(JohnSummary {
                dim: c.dim,
                count: 1,
                max_distortion: c.distortion,
                john_bound: c.john_bound,
                within: c.within,
            }),
        }
    }
    let pass = cases.iter().all(|c| c.within);
    let mut panels = Vec::new();
    if explicit && bodies.len() == 1 && bodies[0].dim() == 2 {
        let vs: Vec<Vec<f64>> = bodies[0].vertices().iter().map(|v| v.iter().copied().collect()).collect();
        let g = linalg::rows_to_matrix(&cases[0].gram, 2);
        panels.push(Panel::new("John check").body(&vs, Style::Body).ellipse(&g, Style::Ellipse));
    }
    let results = json!({
        "slack": slack,
        "cases": if explicit { to_value(&cases)? } else { Value::Null },
        "summary": to_value(&summary)?,
        "pass": pass,
    });
    Ok(Outcome {
        results,
        figure: figure(panels),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RenormInput {
    bundle: Bundle,
    #[serde(default)]
    nets: Vec<Net>,
    #[serde(default)]
    probe_sections: Vec<String>,
    #[serde(default)]
    root: Option<String>,
}

/// Accepts either `{"bundle": …, …}` or a bare bundle document.
fn renorm_input(input: &str) -> Result<RenormInput, CliError> {
    let v: Value = serde_json::from_str(input)?;
    if v.get("bundle").is_some() {
        Ok(serde_json::from_value(v)?)
    } else {
        Ok(RenormInput {
            bundle: serde_json::from_value(v)?,
            nets: Vec::new(),
            probe_sections: Vec::new(),
            root: None,
        })
    }
}

fn fiber_panels(b: &Bundle, title: impl Fn(&str) -> String, grams: impl Fn(&str) -> Vec<Matrix>) -> Vec<Panel> {
    let mut panels = Vec::new();
    for (i, id) in b.base().vertices().iter().enumerate() {
        let fiber = b.fiber(i);
        let Some(ball) = fiber.ball.as_ref().filter(|_| fiber.rank() == 2) else {
            continue;
        };
        let vs: Vec<Vec<f64>> = ball.vertices().iter().map(|v| v.iter().copied().collect()).collect();
        let mut panel = Panel::new(title(id)).body(&vs, Style::Body);
        for g in grams(id) {
            panel = panel.ellipse(&g, Style::Ellipse);
        }
        panels.push(panel);
    }
    panels
}

fn build(inp: &RenormInput, s: &Settings) -> Result<Renorming, CliError> {
    Ok(build_renorming(&inp.bundle, &s.mvee(inp.bundle.ambient_dim()))?)
}

fn renorm_build(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp = renorm_input(input)?;
    let diagnostics = bundle::validate(&inp.bundle)?;
    let r = build(&inp, s)?;
    let panels = fiber_panels(&inp.bundle, |id| format!("K({id})"), |id| {
        r.per_vertex[id].norms.generators().iter().map(|g| g.gram().clone()).collect()
    });
    let results = json!({
        "diagnostics": to_value(&diagnostics)?,
        "renorming": to_value(&r)?,
        "within_bound": r.within_bound(),
    });
    Ok(Outcome {
        results,
        figure: figure(panels),
    })
}

fn renorm_verify(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp = renorm_input(input)?;
    if inp.nets.is_empty() {
        return Err(invalid("renorm-verify needs at least one net"));
    }
    let r = build(&inp, s)?;
    let cfg = s.mvee(inp.bundle.ambient_dim());
    let lsc = verify_lsc(&r, &inp.bundle, &inp.nets, &inp.probe_sections, s.tol_or(1e-2), &cfg)?;
    let results = json!({
        "strata": to_value(&r.strata)?,
        "distortion_sup": r.distortion_sup,
        "lsc": to_value(&lsc)?,
        "pass": lsc.pass,
    });
    Ok(Outcome { results, figure: None })
}

fn renorm_select(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp = renorm_input(input)?;
    let r = build(&inp, s)?;
    let sel = select(&r, &inp.bundle, inp.root.as_deref())?;
    let tol = s.tol_or(1e-9);
    let mut memberships = serde_json::Map::new();
    for (id, choice) in &sel.choice {
        let n = choice.gram.len();
        let q = HilbertNorm::new(linalg::rows_to_matrix(&choice.gram, n))?;
        let m = l2_hull_membership(&q, r.norms(id)?, tol)?;
        memberships.insert(id.clone(), json!({ "member": m.member, "residual": m.residual }));
    }
    let all = memberships.values().all(|m| m["member"] == Value::Bool(true));
    let panels = fiber_panels(&inp.bundle, |id| format!("choice at {id}"), |id| {
        let g = &sel.choice[id].gram;
        vec![linalg::rows_to_matrix(g, g.len())]
    });
    let results = json!({
        "selection": to_value(&sel)?,
        "memberships": memberships,
        "all_members": all,
        "modulus": sel.modulus,
    });
    Ok(Outcome {
        results,
        figure: figure(panels),
    })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct HyperInput {
    #[serde(rename = "Z")]
    z: FiniteMetricSpace,
    n: usize,
}

fn check_n(n: usize) -> Result<(), CliError> {
    if n == 0 {
        Err(invalid("n must be at least 1"))
    } else {
        Ok(())
    }
}

fn hyper_build(input: &str) -> Result<Outcome, CliError> {
    let inp: HyperInput = serde_json::from_str(input)?;
    check_n(inp.n)?;
    let h = build_hyperspace(&inp.z, inp.n)?;
    let inc = build_incidence(&inp.z, inp.n)?;
    let results = json!({
        "hyperspace": to_value(&h)?,
        "incidence": {
            "pairs": inc.pairs,
            "space": to_value(&inc.space)?,
            "fiber_sizes": inc.fiber_sizes(),
        },
    });
    Ok(Outcome { results, figure: None })
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RoundtripInput {
    #[serde(rename = "X")]
    x: FiniteMetricSpace,
    #[serde(rename = "Z")]
    z: FiniteMetricSpace,
    n: usize,
    /// Also convert this cover to its classifying map.
    #[serde(default)]
    cover: Option<AnchoredCover>,
    /// Also pull the universal cover back along this map.
    #[serde(default)]
    map: Option<Vec<SubsetPoint>>,
}

fn hyper_roundtrip(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp: RoundtripInput = serde_json::from_str(input)?;
    check_n(inp.n)?;
    let report = roundtrip_check(&inp.x, &inp.z, inp.n, u128::from(s.cap))?;
    let mut results = json!({ "report": to_value(&report)?, "pass": report.pass });
    if let Some(c) = &inp.cover {
        if c.base() != &inp.x {
            return Err(invalid("the cover's base must equal X"));
        }
        results["cover_map"] = to_value(&cover_to_map(c, &inp.z, inp.n)?)?;
    }
    if let Some(g) = &inp.map {
        results["map_cover"] = to_value(&map_to_cover(g, &inp.x, &inp.z, inp.n)?)?;
    }
    Ok(Outcome { results, figure: None })
}

#[derive(Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
enum SelectionSpec {
    Explicit(ConvexSelection),
    Barycentric { points: Vec<Vec<f64>>, n: usize },
    NearestPoint { points: Vec<Vec<f64>>, n: usize, target: Vec<f64> },
    /// Uniform simplex coefficients drawn with `--seed`.
    Random { points: Vec<Vec<f64>>, n: usize },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceQuery {
    x: usize,
    #[serde(rename = "A")]
    a: SubsetPoint,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct SliceInput {
    selection: SelectionSpec,
    #[serde(default)]
    slices: Vec<SliceQuery>,
    /// Slice every `A ∪ {x}` in the domain and report the worst residual.
    #[serde(default)]
    exhaustive: bool,
    #[serde(default)]
    nets: Vec<SingletonNet>,
    #[serde(default)]
    x: Option<usize>,
}

fn vectors(points: Vec<Vec<f64>>) -> Vec<Vector> {
    points.into_iter().map(Vector::from_vec).collect()
}

fn hyper_slice(input: &str, s: &Settings) -> Result<Outcome, CliError> {
    let inp: SliceInput = serde_json::from_str(input)?;
    let sel = match inp.selection {
        SelectionSpec::Explicit(sel) => sel,
        SelectionSpec::Barycentric { points, n } => ConvexSelection::barycentric(vectors(points), n)?,
        SelectionSpec::NearestPoint { points, n, target } => {
            ConvexSelection::nearest_point(vectors(points), n, &Vector::from_vec(target))?
        }
        SelectionSpec::Random { points, n } => {
            ConvexSelection::random(vectors(points), n, &mut ChaCha8Rng::seed_from_u64(s.seed))?
        }
    };
    let slices = inp
        .slices
        .iter()
        .map(|q| slice_selection(&sel, q.x, &q.a))
        .collect::<Result<Vec<_>, _>>()?;
    let mut results = json!({
        "selection": to_value(&sel)?,
        "slices": to_value(&slices)?,
    });
    if inp.exhaustive {
        let (mut count, mut worst) = (0usize, 0.0f64);
        for u in sel.domain().filter(|u| u.len() >= 2).cloned().collect::<Vec<_>>() {
            for &x in u.members() {
                let a = SubsetPoint::new(u.members().iter().copied().filter(|&m| m != x).collect())?;
                worst = worst.max(slice_selection(&sel, x, &a)?.residual);
                count += 1;
            }
        }
        results["exhaustive"] = json!({ "count": count, "max_residual": worst });
    }
    if !inp.nets.is_empty() {
        let report = check_singleton_continuity(&sel, &inp.nets, inp.x, s.tol_or(1e-6))?;
        results["continuity"] = to_value(&report)?;
    }
    Ok(Outcome { results, figure: None })
}
