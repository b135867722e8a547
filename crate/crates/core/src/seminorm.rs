//! Seminorms on `R^d`, the ℓ^p convex structure on them, finitely generated
//! ℓ²-convex sets of Hilbert norms, and identity-map distortion.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{Ellipsoid, SymmetricBody, SYMMETRY_TOL};
use crate::linalg::{self, Matrix, Vector};
use crate::lp::LinearProgram;
use crate::qp;

/// Eigenvalues below `−PSD_TOL` reject a Gram matrix.
pub const PSD_TOL: f64 = 1e-12;
/// Smallest eigenvalue above which a Hilbert seminorm counts as a norm.
pub const FULL_RANK_TOL: f64 = 1e-10;

/// Hilbert seminorm `v ↦ √(vᵀQv)` for a positive-semidefinite `Q`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "HilbertRepr", into = "HilbertRepr")]
pub struct HilbertNorm {
    gram: Matrix,
    full_rank: bool,
}

#[derive(Serialize, Deserialize)]
struct HilbertRepr {
    gram: Vec<Vec<f64>>,
}

impl TryFrom<HilbertRepr> for HilbertNorm {
    type Error = Error;
    fn try_from(r: HilbertRepr) -> Result<Self> {
        let n = r.gram.len();
        if r.gram.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("Gram matrix must be square".into()));
        }
        HilbertNorm::new(linalg::rows_to_matrix(&r.gram, n))
    }
}

impl From<HilbertNorm> for HilbertRepr {
    fn from(h: HilbertNorm) -> Self {
        HilbertRepr {
            gram: linalg::matrix_to_rows(&h.gram),
        }
    }
}

impl HilbertNorm {
    pub fn new(gram: Matrix) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
            return Err(Error::InvalidInput("Gram matrix must be square and non-empty".into()));
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Gram matrix has non-finite entries".into()));
        }
        let scale = gram.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        let asym = linalg::max_asymmetry(&gram);
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput(format!("Gram matrix is not symmetric (off by {asym:.3e})")));
        }
        let gram = linalg::symmetrize(&gram);
        let min = linalg::sym_eigen(&gram).0[0];
        if min < -PSD_TOL {
            return Err(Error::DegenerateNorm(format!("Gram matrix has negative eigenvalue {min:.3e}")));
        }
        Ok(HilbertNorm {
            gram,
            full_rank: min > FULL_RANK_TOL,
        })
    }

    pub fn identity(dim: usize) -> Self {
        HilbertNorm {
            gram: Matrix::identity(dim, dim),
            full_rank: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn is_full_rank(&self) -> bool {
        self.full_rank
    }

    pub fn eval(&self, v: &Vector) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok((v.transpose() * &self.gram * v)[0].max(0.0).sqrt())
    }

    /// The unit ball, when this is a norm.
    pub fn ellipsoid(&self) -> Result<Ellipsoid> {
        if !self.full_rank {
            return Err(Error::DegenerateNorm("seminorm has no bounded unit ball".into()));
        }
        Ellipsoid::new(self.gram.clone())
    }
}

impl From<&Ellipsoid> for HilbertNorm {
    fn from(e: &Ellipsoid) -> Self {
        HilbertNorm {
            gram: e.gram().clone(),
            full_rank: true,
        }
    }
}

impl From<Ellipsoid> for HilbertNorm {
    fn from(e: Ellipsoid) -> Self {
        HilbertNorm::from(&e)
    }
}

/// A seminorm built from Hilbert seminorms and polytope gauges by ℓ^p
/// combinations.
#[derive(Debug, Clone, PartialEq)]
pub enum Seminorm {
    Hilbert(HilbertNorm),
    BodyGauge(SymmetricBody),
    LpMix {
        p: f64,
        lambda: f64,
        left: Box<Seminorm>,
        right: Box<Seminorm>,
    },
}

impl Seminorm {
    pub fn dim(&self) -> usize {
        match self {
            Seminorm::Hilbert(h) => h.dim(),
            Seminorm::BodyGauge(b) => b.dim(),
            Seminorm::LpMix { left, .. } => left.dim(),
        }
    }

    pub fn eval(&self, v: &Vector) -> Result<f64> {
        eval(self, v)
    }
}

impl From<HilbertNorm> for Seminorm {
    fn from(h: HilbertNorm) -> Self {
        Seminorm::Hilbert(h)
    }
}

impl From<SymmetricBody> for Seminorm {
    fn from(b: SymmetricBody) -> Self {
        Seminorm::BodyGauge(b)
    }
}

/// `v ↦ (λ·left(v)^p + (1−λ)·right(v)^p)^{1/p}`.
///
/// Two Hilbert seminorms at `p = 2` combine to the Hilbert seminorm with
/// Gram `λQ_left + (1−λ)Q_right`; the endpoints `λ = 1` and `λ = 0` return
/// the corresponding side unchanged.
pub fn lp_combine(p: f64, lambda: f64, left: &Seminorm, right: &Seminorm) -> Result<Seminorm> {
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::InvalidInput(format!("exponent {p} must be a finite real ≥ 1")));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidInput(format!("weight {lambda} must lie in [0, 1]")));
    }
    check_dim(left.dim(), right.dim())?;
    if lambda == 1.0 {
        return Ok(left.clone());
    }
    if lambda == 0.0 {
        return Ok(right.clone());
    }
    if let (2.0, Seminorm::Hilbert(a), Seminorm::Hilbert(b)) = (p, left, right) {
        let gram = a.gram() * lambda + b.gram() * (1.0 - lambda);
        return Ok(Seminorm::Hilbert(HilbertNorm::new(gram)?));
    }
    Ok(Seminorm::LpMix {
        p,
        lambda,
        left: Box::new(left.clone()),
        right: Box::new(right.clone()),
    })
}

pub fn eval(s: &Seminorm, v: &Vector) -> Result<f64> {
    check_dim(s.dim(), v.len())?;
    match s {
        Seminorm::Hilbert(h) => h.eval(v),
        Seminorm::BodyGauge(b) => b.gauge(v),
        Seminorm::LpMix { p, lambda, left, right } => {
            let a = eval(left, v)?;
            let b = eval(right, v)?;
            if a == b {
                return Ok(a);
            }
            Ok((lambda * a.powf(*p) + (1.0 - lambda) * b.powf(*p)).powf(1.0 / p))
        }
    }
}

/// The ℓ²-convex hull of finitely many Hilbert norms, stored by its
/// generators: `{Σ λ_i Q_i : λ in the simplex}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "NormSetRepr", into = "NormSetRepr")]
pub struct HilbertNormSet {
    generators: Vec<HilbertNorm>,
}

#[derive(Serialize, Deserialize)]
struct NormSetRepr {
    generators: Vec<HilbertNorm>,
}

impl TryFrom<NormSetRepr> for HilbertNormSet {
    type Error = Error;
    fn try_from(r: NormSetRepr) -> Result<Self> {
        HilbertNormSet::new(r.generators)
    }
}

impl From<HilbertNormSet> for NormSetRepr {
    fn from(s: HilbertNormSet) -> Self {
        NormSetRepr {
            generators: s.generators,
        }
    }
}

impl HilbertNormSet {
    pub fn new(generators: Vec<HilbertNorm>) -> Result<Self> {
        let first = generators
            .first()
            .ok_or_else(|| Error::InvalidInput("a norm set needs at least one generator".into()))?;
        let dim = first.dim();
        for g in &generators {
            check_dim(dim, g.dim())?;
            if !g.is_full_rank() {
                return Err(Error::DegenerateNorm("norm set generators must be full rank".into()));
            }
        }
        Ok(HilbertNormSet { generators })
    }

    pub fn singleton(q: HilbertNorm) -> Result<Self> {
        Self::new(vec![q])
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    pub fn generators(&self) -> &[HilbertNorm] {
        &self.generators
    }

    pub fn len(&self) -> usize {
        self.generators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.generators.is_empty()
    }

    /// `Σ λ_i Q_i`; `coefficients` must lie in the simplex.
    pub fn combination(&self, coefficients: &[f64]) -> Result<HilbertNorm> {
        check_dim(self.len(), coefficients.len())?;
        if coefficients.iter().any(|&c| c < -1e-12) || (coefficients.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(Error::Certificate("coefficients are not in the simplex".into()));
        }
        let d = self.dim();
        let mut gram = Matrix::zeros(d, d);
        for (g, &c) in self.generators.iter().zip(coefficients) {
            gram += g.gram() * c.max(0.0);
        }
        HilbertNorm::new(gram)
    }

    pub fn barycenter(&self) -> HilbertNorm {
        let w = vec![1.0 / self.len() as f64; self.len()];
        self.combination(&w).expect("barycenter of full-rank generators")
    }

    /// Coefficients of the member nearest to `target` in Frobenius norm.
    pub fn nearest(&self, target: &Matrix) -> Result<Vec<f64>> {
        check_dim(self.dim(), target.nrows())?;
        let m = self.len();
        let h = Matrix::from_fn(m, m, |i, j| {
            linalg::frobenius_inner(self.generators[i].gram(), self.generators[j].gram())
        });
        let b = Vector::from_fn(m, |i, _| linalg::frobenius_inner(self.generators[i].gram(), target));
        Ok(qp::simplex_qp(&h, &b, 20_000, 1e-16).iter().copied().collect())
    }
}

/// Separating functional for a Gram matrix outside a norm set:
/// `⟨Y, Q⟩ − max_i ⟨Y, Q_i⟩ = margin > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Separator {
    pub functional: Vec<Vec<f64>>,
    pub margin: f64,
}

/// Result of an ℓ²-hull membership query.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Membership {
    pub member: bool,
    /// Simplex coefficients of the best combination found.
    pub coefficients: Vec<f64>,
    /// Largest entrywise residual of that combination.
    pub residual: f64,
    pub separator: Option<Separator>,
}

/// Decides `Q ∈ {Σ λ_i Q_i}` up to entrywise `tol` by a linear program that
/// minimizes the largest entrywise residual over the simplex.
pub fn l2_hull_membership(q: &HilbertNorm, k: &HilbertNormSet, tol: f64) -> Result<Membership> {
    check_dim(k.dim(), q.dim())?;
    let m = k.len();
    for (i, g) in k.generators().iter().enumerate() {
        let r = linalg::max_abs_diff(g.gram(), q.gram());
        if r <= tol {
            let mut coefficients = vec![0.0; m];
            coefficients[i] = 1.0;
            return Ok(Membership {
                member: true,
                coefficients,
                residual: r,
                separator: None,
            });
        }
    }

    // Variables: λ (m), then per upper-triangular entry e⁺, e⁻, slack w, then t.
    let d = q.dim();
    let entries: Vec<(usize, usize)> = (0..d).flat_map(|r| (r..d).map(move |c| (r, c))).collect();
    let ne = entries.len();
    let nvar = m + 3 * ne + 1;
    let t_idx = nvar - 1;
    let mut cost = vec![0.0; nvar];
    cost[t_idx] = 1.0;
    let mut lp = LinearProgram::new(cost);
    for (e, &(r, c)) in entries.iter().enumerate() {
        let mut row = vec![0.0; nvar];
        for (i, g) in k.generators().iter().enumerate() {
            row[i] = g.gram()[(r, c)];
        }
        row[m + 3 * e] = 1.0;
        row[m + 3 * e + 1] = -1.0;
        lp.add_eq(row, q.gram()[(r, c)]);
        let mut bound = vec![0.0; nvar];
        bound[m + 3 * e] = 1.0;
        bound[m + 3 * e + 1] = 1.0;
        bound[m + 3 * e + 2] = 1.0;
        bound[t_idx] = -1.0;
        lp.add_eq(bound, 0.0);
    }
    let mut simplex = vec![0.0; nvar];
    simplex[..m].iter_mut().for_each(|x| *x = 1.0);
    lp.add_eq(simplex, 1.0);
    let sol = lp
        .solve()?
        .optimal()
        .ok_or_else(|| Error::Internal("membership program has no optimum".into()))?;

    let mut coefficients: Vec<f64> = sol.x[..m].iter().map(|x| x.max(0.0)).collect();
    let total: f64 = coefficients.iter().sum();
    coefficients.iter_mut().for_each(|x| *x /= total);
    let residual = linalg::max_abs_diff(&combine(k, &coefficients), q.gram());
    if residual <= tol {
        return Ok(Membership {
            member: true,
            coefficients,
            residual,
            separator: None,
        });
    }
    let nearest = k.nearest(q.gram())?;
    let p_star = combine(k, &nearest);
    let y = q.gram() - &p_star;
    let inside = k
        .generators()
        .iter()
        .map(|g| linalg::frobenius_inner(&y, g.gram()))
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(Membership {
        member: false,
        coefficients,
        residual,
        separator: Some(Separator {
            functional: linalg::matrix_to_rows(&y),
            margin: linalg::frobenius_inner(&y, q.gram()) - inside,
        }),
    })
}

fn combine(k: &HilbertNormSet, coefficients: &[f64]) -> Matrix {
    let d = k.dim();
    let mut gram = Matrix::zeros(d, d);
    for (g, &c) in k.generators().iter().zip(coefficients) {
        gram += g.gram() * c;
    }
    gram
}

/// Probe directions for distortion estimates between seminorms that have
/// no closed-form extremes.
#[derive(Debug, Clone, PartialEq)]
pub enum Probe {
    /// Vertices and facet normals of a body.
    Body(SymmetricBody),
    /// Seeded Gaussian directions plus the coordinate axes and diagonals.
    Samples { count: usize, seed: u64 },
}

/// `α = max a(v)/b(v)` and `β = max b(v)/a(v)`, so that
/// `b(v)/β ≤ a(v) ≤ α·b(v)`; `distortion = α·β`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistortionReport {
    pub lower_scale: f64,
    pub upper_scale: f64,
    pub distortion: f64,
}

impl DistortionReport {
    fn new(alpha: f64, beta: f64) -> Self {
        DistortionReport {
            lower_scale: alpha,
            upper_scale: beta,
            distortion: alpha * beta,
        }
    }

    fn swapped(self) -> Self {
        DistortionReport::new(self.upper_scale, self.lower_scale)
    }
}

fn require_norm(s: &Seminorm) -> Result<()> {
    if let Seminorm::Hilbert(h) = s {
        if !h.is_full_rank() {
            return Err(Error::DegenerateNorm("Hilbert seminorm is not full rank".into()));
        }
    }
    Ok(())
}

/// Largest ratio `gauge_body(v) / hilbert(v)` and its reciprocal partner.
fn body_vs_hilbert(body: &SymmetricBody, h: &HilbertNorm) -> Result<DistortionReport> {
    let inv = linalg::spd_inverse(h.gram()).ok_or_else(|| Error::DegenerateNorm("singular Gram".into()))?;
    // max over the Hilbert unit sphere of the gauge = max facet support.
    let alpha = body
        .facets()?
        .iter()
        .map(|n| (n.transpose() * &inv * n)[0])
        .fold(0.0f64, f64::max)
        .sqrt();
    // max over the body of the Hilbert norm is attained at a vertex.
    let mut beta = 0.0f64;
    for v in body.vertices() {
        beta = beta.max(h.eval(v)?);
    }
    Ok(DistortionReport::new(alpha, beta))
}

fn probe_directions(dim: usize, probe: &Probe) -> Result<Vec<Vector>> {
    let mut out = Vec::new();
    match probe {
        Probe::Body(b) => {
            check_dim(dim, b.dim())?;
            out.extend(b.vertices().iter().cloned());
            out.extend(b.facets()?.iter().cloned());
        }
        Probe::Samples { count, seed } => {
            for i in 0..dim {
                let mut e = Vector::zeros(dim);
                e[i] = 1.0;
                out.push(e.clone());
                for j in i + 1..dim {
                    let mut f = e.clone();
                    f[j] = 1.0;
                    out.push(f.clone());
                    f[j] = -1.0;
                    out.push(f);
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            for _ in 0..*count {
                out.push(Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng)));
            }
        }
    }
    Ok(out)
}

/// Identity-map distortion between two norms on the same space.
///
/// Exact for Hilbert/Hilbert (generalized eigenvalues), polytope/Hilbert
/// (vertices and facet normals) and polytope/polytope (vertices) pairs;
/// anything involving an ℓ^p mixture is evaluated on `probe` directions.
pub fn distortion(a: &Seminorm, b: &Seminorm, probe: &Probe) -> Result<DistortionReport> {
    check_dim(a.dim(), b.dim())?;
    require_norm(a)?;
    require_norm(b)?;
    match (a, b) {
        (Seminorm::Hilbert(x), Seminorm::Hilbert(y)) => {
            let alpha = linalg::max_generalized_eigen(x.gram(), y.gram())?.0.max(0.0).sqrt();
            let beta = linalg::max_generalized_eigen(y.gram(), x.gram())?.0.max(0.0).sqrt();
            Ok(DistortionReport::new(alpha, beta))
        }
        (Seminorm::BodyGauge(k), Seminorm::Hilbert(h)) => body_vs_hilbert(k, h),
        (Seminorm::Hilbert(h), Seminorm::BodyGauge(k)) => Ok(body_vs_hilbert(k, h)?.swapped()),
        (Seminorm::BodyGauge(ka), Seminorm::BodyGauge(kb)) => {
            let mut alpha = 0.0f64;
            for v in kb.vertices() {
                alpha = alpha.max(ka.gauge(v)?);
            }
            let mut beta = 0.0f64;
            for v in ka.vertices() {
                beta = beta.max(kb.gauge(v)?);
            }
            Ok(DistortionReport::new(alpha, beta))
        }
        _ => {
            let mut alpha = 0.0f64;
            let mut beta = 0.0f64;
            for v in probe_directions(a.dim(), probe)? {
                let (x, y) = (eval(a, &v)?, eval(b, &v)?);
                if x <= 0.0 || y <= 0.0 {
                    if x.max(y) > 0.0 {
                        return Err(Error::DegenerateNorm("a seminorm vanishes on a probe direction".into()));
                    }
                    continue;
                }
                alpha = alpha.max(x / y);
                beta = beta.max(y / x);
            }
            if alpha == 0.0 {
                return Err(Error::DegenerateNorm("no usable probe directions".into()));
            }
            Ok(DistortionReport::new(alpha, beta))
        }
    }
}
