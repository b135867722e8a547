//! Convex selections `φ: X_[n] → ℝ^d` with `φ(A) ∈ co(A)`, the slice
//! decomposition `φ(A ∪ {x}) = f_x(A)·x + (1 − f_x(A))·φ_x(A)`, and
//! continuity checks at singletons.

use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Distribution, Exp1};
use serde::{Deserialize, Serialize};

use super::{subsets_up_to, SubsetPoint};
use crate::error::{Error, Result};
use crate::linalg::{self, Vector};

/// Slack on the simplex constraints of stored coefficients.
pub const COEFF_TOL: f64 = 1e-12;
/// Below this, `1 − f_x` is treated as zero and `φ_x` falls back to the
/// barycenter.
pub const UNIT_TOL: f64 = 1e-15;

/// A convex selection on subsets of a finite point set in `ℝ^d`, stored as
/// barycentric coefficients over the members of each subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SelectionRepr", into = "SelectionRepr")]
pub struct ConvexSelection {
    points: Vec<Vector>,
    n: usize,
    phi: BTreeMap<SubsetPoint, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct PhiEntry {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    point: Option<Vec<f64>>,
    coeffs: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SelectionRepr {
    ambient_dim: usize,
    n: usize,
    points: Vec<Vec<f64>>,
    /// Keyed by comma-separated member indices, e.g. `"0,2"`.
    phi: BTreeMap<String, PhiEntry>,
}

fn subset_key(a: &SubsetPoint) -> String {
    a.members().iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn parse_key(key: &str) -> Result<SubsetPoint> {
    let members = key
        .split(',')
        .map(|s| s.trim().parse::<usize>())
        .collect::<std::result::Result<Vec<_>, _>>()
        .map_err(|_| Error::InvalidInput(format!("bad subset key {key:?}")))?;
    SubsetPoint::new(members)
}

impl TryFrom<SelectionRepr> for ConvexSelection {
    type Error = Error;
    fn try_from(r: SelectionRepr) -> Result<Self> {
        if r.points.iter().any(|p| p.len() != r.ambient_dim) {
            return Err(Error::InvalidInput(format!("every point needs {} coordinates", r.ambient_dim)));
        }
        let mut sel = ConvexSelection::new(r.points.into_iter().map(Vector::from_vec).collect(), r.n)?;
        for (key, entry) in r.phi {
            let a = parse_key(&key)?;
            sel.insert(a.clone(), entry.coeffs)?;
            if let Some(p) = entry.point {
                let stored = sel.value(&a).expect("just inserted");
                let gap = (Vector::from_vec(p) - stored).amax();
                if !(gap <= COEFF_TOL) {
                    return Err(Error::Certificate(format!(
                        "point of φ({key}) differs from its coefficients by {gap:.3e}"
                    )));
                }
            }
        }
        Ok(sel)
    }
}

impl From<ConvexSelection> for SelectionRepr {
    fn from(s: ConvexSelection) -> Self {
        let phi = s
            .phi
            .iter()
            .map(|(a, c)| {
                let point = s.value(a).map(|v| v.iter().copied().collect());
                (subset_key(a), PhiEntry { point, coeffs: c.clone() })
            })
            .collect();
        SelectionRepr {
            ambient_dim: s.ambient_dim(),
            n: s.n,
            points: s.points.iter().map(|p| p.iter().copied().collect()).collect(),
            phi,
        }
    }
}

impl ConvexSelection {
    /// An empty selection over `points`; fill it with [`insert`](Self::insert).
    pub fn new(points: Vec<Vector>, n: usize) -> Result<Self> {
        if n == 0 || points.is_empty() {
            return Err(Error::InvalidInput("need at least one point and n ≥ 1".into()));
        }
        let d = points[0].len();
        if points.iter().any(|p| p.len() != d) {
            return Err(Error::InvalidInput("points have different dimensions".into()));
        }
        Ok(ConvexSelection {
            points,
            n,
            phi: BTreeMap::new(),
        })
    }

    pub fn insert(&mut self, a: SubsetPoint, coeffs: Vec<f64>) -> Result<()> {
        if a.len() > self.n || a.members().iter().any(|&m| m >= self.points.len()) {
            return Err(Error::InvalidInput(format!("{{{}}} is not in X_[{}]", subset_key(&a), self.n)));
        }
        if coeffs.len() != a.len() {
            return Err(Error::Certificate(format!("φ({}) needs {} coefficients", subset_key(&a), a.len())));
        }
        let sum: f64 = coeffs.iter().sum();
        if coeffs.iter().any(|c| !(*c >= -COEFF_TOL)) || !((sum - 1.0).abs() <= COEFF_TOL) {
            return Err(Error::Certificate(format!(
                "coefficients of φ({}) are not in the simplex",
                subset_key(&a)
            )));
        }
        self.phi.insert(a, coeffs);
        Ok(())
    }

    /// `φ(A)` = barycenter of `A` on every subset.
    pub fn barycentric(points: Vec<Vector>, n: usize) -> Result<Self> {
        let mut sel = ConvexSelection::new(points, n)?;
        for a in subsets_up_to(sel.points.len(), n) {
            let k = a.len();
            sel.insert(a, vec![1.0 / k as f64; k])?;
        }
        Ok(sel)
    }

    /// `φ(A)` = nearest point of `co(A)` to `c`. This selection is continuous
    /// for the Hausdorff metric.
    pub fn nearest_point(points: Vec<Vector>, n: usize, c: &Vector) -> Result<Self> {
        let mut sel = ConvexSelection::new(points, n)?;
        if c.len() != sel.ambient_dim() {
            return Err(Error::Dimension {
                expected: sel.ambient_dim(),
                found: c.len(),
            });
        }
        for a in subsets_up_to(sel.points.len(), n) {
            let coeffs = nearest_coefficients(&sel.points, &a, c);
            sel.insert(a, coeffs)?;
        }
        Ok(sel)
    }

    /// Coefficients drawn uniformly from each simplex.
    pub fn random<R: Rng + ?Sized>(points: Vec<Vector>, n: usize, rng: &mut R) -> Result<Self> {
        let mut sel = ConvexSelection::new(points, n)?;
        for a in subsets_up_to(sel.points.len(), n) {
            let raw: Vec<f64> = (0..a.len()).map(|_| Exp1.sample(rng)).collect();
            let total: f64 = raw.iter().sum();
            sel.insert(a, raw.into_iter().map(|w: f64| w / total).collect())?;
        }
        Ok(sel)
    }

    pub fn points(&self) -> &[Vector] {
        &self.points
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ambient_dim(&self) -> usize {
        self.points[0].len()
    }

    pub fn domain(&self) -> impl Iterator<Item = &SubsetPoint> {
        self.phi.keys()
    }

    pub fn coefficients(&self, a: &SubsetPoint) -> Option<&[f64]> {
        self.phi.get(a).map(Vec::as_slice)
    }

    pub fn value(&self, a: &SubsetPoint) -> Option<Vector> {
        let c = self.phi.get(a)?;
        Some(combine(&self.points, a.members(), c))
    }

    /// Hausdorff distance between `A` and `B` for the Euclidean metric.
    pub fn hausdorff(&self, a: &SubsetPoint, b: &SubsetPoint) -> f64 {
        let one_way = |p: &SubsetPoint, q: &SubsetPoint| {
            p.members()
                .iter()
                .map(|&i| {
                    q.members()
                        .iter()
                        .map(|&j| (&self.points[i] - &self.points[j]).norm())
                        .fold(f64::INFINITY, f64::min)
                })
                .fold(0.0, f64::max)
        };
        one_way(a, b).max(one_way(b, a))
    }
}

fn combine(points: &[Vector], members: &[usize], coeffs: &[f64]) -> Vector {
    let mut v = Vector::zeros(points[0].len());
    for (&m, &c) in members.iter().zip(coeffs) {
        v += &points[m] * c;
    }
    v
}

/// Coefficients of the projection of `c` onto `co(A)`, found by trying every
/// affinely independent subset of `A`. Among faces within `1e-14` of the
/// best distance the first one (by size, then lexicographically) wins.
fn nearest_coefficients(points: &[Vector], a: &SubsetPoint, c: &Vector) -> Vec<f64> {
    let members = a.members();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for face in subsets_up_to(members.len(), members.len()) {
        let idx: Vec<usize> = face.members().iter().map(|&k| members[k]).collect();
        let base = &points[idx[0]];
        let dirs: Vec<Vector> = idx[1..].iter().map(|&i| &points[i] - base).collect();
        let d = linalg::columns_to_matrix(base.len(), &dirs);
        if linalg::rank(&d, linalg::RANK_TOL) < dirs.len() {
            continue;
        }
        let (mu, _) = if dirs.is_empty() {
            (Vector::zeros(0), 0.0)
        } else {
            linalg::coordinates_in(&d, &(c - base))
        };
        let lead = 1.0 - mu.sum();
        if lead < -1e-12 || mu.iter().any(|m| *m < -1e-12) {
            continue;
        }
        let mut local = vec![0.0; members.len()];
        local[face.members()[0]] = lead.max(0.0);
        for (k, &m) in face.members()[1..].iter().enumerate() {
            local[m] = mu[k].max(0.0);
        }
        let total: f64 = local.iter().sum();
        local.iter_mut().for_each(|v| *v /= total);
        let dist = (combine(points, members, &local) - c).norm();
        if best.as_ref().is_none_or(|(b, _)| dist < b - 1e-14) {
            best = Some((dist, local));
        }
    }
    best.expect("singleton faces are always feasible").1
}

/// The decomposition of `φ(A ∪ {x})` through `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceResult {
    pub f_x: f64,
    pub phi_x: Vec<f64>,
    /// Convex coefficients of `φ_x(A)` over the members of `A`.
    pub coeffs: Vec<f64>,
    /// `‖f_x·x + (1 − f_x)·φ_x − φ(A ∪ {x})‖_∞`.
    pub residual: f64,
}

pub fn slice_selection(sel: &ConvexSelection, x: usize, a: &SubsetPoint) -> Result<SliceResult> {
    if x >= sel.points.len() {
        return Err(Error::InvalidInput(format!("point {x} is outside X")));
    }
    if a.contains(x) {
        return Err(Error::InvalidInput(format!("{{{}}} already contains {x}", subset_key(a))));
    }
    let union = a.with(x);
    let coeffs = sel
        .phi
        .get(&union)
        .ok_or_else(|| Error::Certificate(format!("no coefficients stored for φ({{{}}})", subset_key(&union))))?;
    let pos = union.members().iter().position(|&m| m == x).expect("x is a member");
    let f_x = coeffs[pos].clamp(0.0, 1.0);
    let rest: Vec<f64> = coeffs
        .iter()
        .enumerate()
        .filter(|&(k, _)| k != pos)
        .map(|(_, &c)| c.max(0.0))
        .collect();
    let local = if 1.0 - f_x <= UNIT_TOL {
        vec![1.0 / a.len() as f64; a.len()]
    } else {
        let total: f64 = rest.iter().sum();
        rest.iter().map(|c| c / total).collect()
    };
    let phi_x = combine(&sel.points, a.members(), &local);
    let target = combine(&sel.points, union.members(), coeffs);
    let rebuilt = &sel.points[x] * f_x + &phi_x * (1.0 - f_x);
    Ok(SliceResult {
        f_x,
        phi_x: phi_x.iter().copied().collect(),
        coeffs: local,
        residual: (rebuilt - target).amax(),
    })
}

/// A sequence of subsets converging to `{x0}` in the Hausdorff metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingletonNet {
    pub x0: usize,
    pub terms: Vec<SubsetPoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityRecord {
    pub x0: usize,
    /// Hausdorff distance from each term to `{x0}`.
    pub radii: Vec<f64>,
    /// `‖φ(A_m) − x0‖`.
    pub gaps: Vec<f64>,
    pub singleton_pass: bool,
    pub x: Option<usize>,
    pub f_x: Vec<f64>,
    /// `f_x({x0})`, the coefficient of `x` in `φ({x0, x})`.
    pub f_x_limit: Option<f64>,
    pub slice_pass: Option<bool>,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContinuityReport {
    pub tol: f64,
    pub records: Vec<ContinuityRecord>,
    pub pass: bool,
}

/// Checks `φ(A_m) → x0` along each net, with `‖φ(A_m) − x0‖` bounded by the
/// Hausdorff radius of `A_m`, and, when `x` is given, `f_x(A_m) → f_x({x0})`.
pub fn check_singleton_continuity(
    sel: &ConvexSelection,
    nets: &[SingletonNet],
    x: Option<usize>,
    tol: f64,
) -> Result<ContinuityReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("tol must be positive".into()));
    }
    let mut records = Vec::with_capacity(nets.len());
    for (k, net) in nets.iter().enumerate() {
        if net.x0 >= sel.points.len() {
            return Err(Error::Net(format!("net {k}: x0 is outside X")));
        }
        if net.terms.is_empty() {
            return Err(Error::Net(format!("net {k} is empty")));
        }
        let limit = SubsetPoint::singleton(net.x0);
        let radii: Vec<f64> = net.terms.iter().map(|a| sel.hausdorff(a, &limit)).collect();
        if radii.windows(2).any(|w| w[1] > w[0] + 1e-15) {
            return Err(Error::Net(format!("net {k}: Hausdorff radii increase")));
        }
        let tail = *radii.last().expect("nonempty");
        if tail > tol {
            return Err(Error::Net(format!("net {k}: tail radius {tail:.3e} exceeds tol")));
        }
        let gaps = net
            .terms
            .iter()
            .map(|a| {
                sel.value(a)
                    .map(|v| (v - &sel.points[net.x0]).norm())
                    .ok_or_else(|| Error::Certificate(format!("φ({{{}}}) is not defined", subset_key(a))))
            })
            .collect::<Result<Vec<_>>>()?;
        let singleton_pass =
            gaps.iter().zip(&radii).all(|(g, r)| *g <= r + 1e-12) && *gaps.last().expect("nonempty") <= tol;

        let (f_x, f_x_limit, slice_pass) = match x {
            None => (Vec::new(), None, None),
            Some(x) => {
                if x == net.x0 {
                    return Err(Error::InvalidInput("the slice point must differ from x0".into()));
                }
                if let Some(a) = net.terms.iter().find(|a| a.contains(x)) {
                    return Err(Error::Net(format!("net {k}: term {{{}}} contains x", subset_key(a))));
                }
                let values = net
                    .terms
                    .iter()
                    .map(|a| slice_selection(sel, x, a).map(|s| s.f_x))
                    .collect::<Result<Vec<_>>>()?;
                let at_limit = slice_selection(sel, x, &limit)?.f_x;
                let ok = (values.last().expect("nonempty") - at_limit).abs() <= tol;
                (values, Some(at_limit), Some(ok))
            }
        };
        let pass = singleton_pass && slice_pass.unwrap_or(true);
        records.push(ContinuityRecord {
            x0: net.x0,
            radii,
            gaps,
            singleton_pass,
            x,
            f_x,
            f_x_limit,
            slice_pass,
            pass,
        });
    }
    let pass = records.iter().all(|r| r.pass);
    Ok(ContinuityReport { tol, records, pass })
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;

    fn v(xs: &[f64]) -> Vector {
        Vector::from_row_slice(xs)
    }

    fn s(m: &[usize]) -> SubsetPoint {
        SubsetPoint::new(m.to_vec()).unwrap()
    }

    #[test]
    fn slice_examples() {
        let pts = vec![v(&[0.0, 0.0]), v(&[2.0, 0.0]), v(&[0.0, 2.0])];
        let bary = ConvexSelection::barycentric(pts.clone(), 3).unwrap();
        // φ({a,b,x}) barycentric: f_x = 1/3, φ_x = midpoint of a, b.
        let r = slice_selection(&bary, 2, &s(&[0, 1])).unwrap();
        assert!((r.f_x - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.phi_x[0] - 1.0).abs() < 1e-15 && r.phi_x[1].abs() < 1e-15);
        assert!(r.residual <= 1e-12);
        // φ({a,x}) midpoint: f_x = 1/2, φ_x = a.
        let r = slice_selection(&bary, 1, &s(&[0])).unwrap();
        assert_eq!(r.f_x, 0.5);
        assert_eq!(r.phi_x, vec![0.0, 0.0]);

        let mut sel = ConvexSelection::new(pts, 3).unwrap();
        sel.insert(s(&[0, 1, 2]), vec![0.0, 0.0, 1.0]).unwrap();
        let r = slice_selection(&sel, 2, &s(&[0, 1])).unwrap();
        assert_eq!(r.f_x, 1.0);
        assert_eq!(r.coeffs, vec![0.5, 0.5]);
        assert!(r.residual <= 1e-12);
    }

    #[test]
    fn missing_certificate() {
        let sel = ConvexSelection::new(vec![v(&[0.0]), v(&[1.0])], 2).unwrap();
        assert!(matches!(slice_selection(&sel, 1, &s(&[0])), Err(Error::Certificate(_))));
    }

    #[test]
    fn bad_coefficients_rejected() {
        let mut sel = ConvexSelection::new(vec![v(&[0.0]), v(&[1.0])], 2).unwrap();
        assert!(sel.insert(s(&[0, 1]), vec![0.7, 0.7]).is_err());
        assert!(sel.insert(s(&[0, 1]), vec![1.5, -0.5]).is_err());
        assert!(sel.insert(s(&[0, 1]), vec![1.0]).is_err());
    }

    #[test]
    fn nearest_point_projects() {
        let pts = vec![v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[1.0, 1.0])];
        let sel = ConvexSelection::nearest_point(pts, 3, &v(&[0.0, 0.0])).unwrap();
        let p = sel.value(&s(&[0, 1, 2])).unwrap();
        assert!((p - v(&[0.5, 0.5])).amax() < 1e-14);
        assert_eq!(sel.coefficients(&s(&[0, 1, 2])).unwrap()[2], 0.0);
        let p = sel.value(&s(&[0, 2])).unwrap();
        assert!((p - v(&[1.0, 0.0])).amax() < 1e-14);
    }

    #[test]
    fn json_roundtrip() {
        let pts = vec![v(&[0.0, 0.0]), v(&[2.0, 0.0]), v(&[0.0, 2.0])];
        let sel = ConvexSelection::barycentric(pts, 2).unwrap();
        let text = serde_json::to_string(&sel).unwrap();
        assert!(text.contains("\"0,2\""));
        let back: ConvexSelection = serde_json::from_str(&text).unwrap();
        assert_eq!(back, sel);
        let tampered = text.replace("\"point\":[1.0,0.0]", "\"point\":[1.0,0.5]");
        assert_ne!(tampered, text);
        assert!(serde_json::from_str::<ConvexSelection>(&tampered).is_err());
    }

    /// Points `x0 = 0`, `x = 1`, and `x0 + 2^{-m}` on the line.
    pub(crate) fn line_points(m: usize) -> Vec<Vector> {
        let mut pts = vec![v(&[0.0]), v(&[1.0])];
        pts.extend((1..=m).map(|k| v(&[0.5f64.powi(k as i32 + 1)])));
        pts
    }

    fn approach(m: usize) -> SingletonNet {
        SingletonNet {
            x0: 0,
            terms: (2..m + 2).map(SubsetPoint::singleton).collect(),
        }
    }

    #[test]
    fn singleton_continuity_holds_for_nearest_point() {
        let sel = ConvexSelection::nearest_point(line_points(20), 2, &v(&[0.3])).unwrap();
        let report = check_singleton_continuity(&sel, &[approach(20)], Some(1), 1e-5).unwrap();
        assert!(report.pass, "{report:?}");
        let rec = &report.records[0];
        assert!((rec.f_x_limit.unwrap() - 0.3).abs() < 1e-14);
    }

    /// φ({x', x}) = x' for x' ≠ x0 near x0, while φ({x0, x}) is the midpoint:
    /// singleton continuity still holds but `f_x` jumps from 0 to 1/2.
    pub(crate) fn jumping_slice_selection(m: usize) -> ConvexSelection {
        let mut sel = ConvexSelection::barycentric(line_points(m), 2).unwrap();
        for k in 2..m + 2 {
            sel.insert(s(&[1, k]), vec![0.0, 1.0]).unwrap();
        }
        sel
    }

    #[test]
    fn counterexample_is_flagged() {
        let sel = jumping_slice_selection(20);
        let report = check_singleton_continuity(&sel, &[approach(20)], Some(1), 1e-5).unwrap();
        let rec = &report.records[0];
        assert!(rec.singleton_pass);
        assert_eq!(rec.slice_pass, Some(false));
        assert_eq!(rec.f_x_limit, Some(0.5));
        assert!(rec.f_x.iter().all(|f| *f == 0.0));
        assert!(!report.pass);
    }

    #[test]
    fn bad_nets_rejected() {
        let sel = ConvexSelection::barycentric(line_points(5), 2).unwrap();
        let mut net = approach(5);
        net.terms.reverse();
        assert!(matches!(check_singleton_continuity(&sel, &[net], None, 1e-1), Err(Error::Net(_))));
        assert!(matches!(check_singleton_continuity(&sel, &[approach(5)], None, 1e-9), Err(Error::Net(_))));
        assert!(check_singleton_continuity(&sel, &[approach(5)], Some(0), 1e-1).is_err());
    }

    #[test]
    fn pair_nets_converge_within_radius() {
        // A_m = {x0 ± 2^{-m}} in the plane.
        let mut pts = vec![v(&[0.0, 0.0]), v(&[5.0, 1.0])];
        let mut terms = Vec::new();
        for m in 1..=12 {
            let h = 0.5f64.powi(m);
            pts.push(v(&[h, h]));
            pts.push(v(&[-h, -h]));
            terms.push(s(&[pts.len() - 2, pts.len() - 1]));
        }
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        use rand::SeedableRng;
        let sel = ConvexSelection::random(pts, 2, &mut rng).unwrap();
        let report = check_singleton_continuity(&sel, &[SingletonNet { x0: 0, terms }], None, 1e-3).unwrap();
        assert!(report.pass);
        for (g, r) in report.records[0].gaps.iter().zip(&report.records[0].radii) {
            assert!(*g <= r + 1e-12);
        }
    }
}
