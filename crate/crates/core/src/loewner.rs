//! Minimum-volume enclosing (Löwner) ellipsoids of origin-symmetric sets.
//!
//! The solver works on the dual problem
//!
//! ```text
//! maximize  log det X(u),   X(u) = Σ u_i p_i p_iᵀ,   u in the simplex,
//! ```
//!
//! whose optimum gives the centred ellipsoid `{x : xᵀ (d·X)⁻¹ x ≤ 1}`.
//! Because every set here is symmetric about the origin, no centre variable
//! is needed and `p` and `−p` are the same constraint. Iterations are
//! Khachiyan coordinate ascent steps combined with Wolfe–Atwood away steps;
//! the loop stops once `max_i p_iᵀX⁻¹p_i ≤ d(1 + ε)`, and the returned
//! ellipsoid is rescaled so that it encloses every point exactly.
//!
//! Hulls mixing polytopes with ellipsoids are handled by a cutting-plane
//! loop: ellipsoid generators are seeded with boundary points and then
//! refined with the most-violating point from a generalized eigenproblem
//! until the containment oracle agrees.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{gauge_of_points, Ellipsoid, Shape, Subspace, SymmetricBody};
use crate::linalg::{self, Matrix, Vector, RANK_TOL};

/// Solver settings. `epsilon` is the relative optimality gap of the dual
/// iteration; `oracle_tol` is the containment slack of the cutting-plane
/// loop.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MveeConfig {
    pub epsilon: f64,
    pub max_iter: usize,
    pub oracle_tol: f64,
}

impl MveeConfig {
    pub const DEFAULT_EPSILON: f64 = 1e-6;
    pub const DEFAULT_ORACLE_TOL: f64 = 1e-8;

    /// Defaults for ambient dimension `dim`: `epsilon = 1e-6`,
    /// `max_iter = 100·dim²`, `oracle_tol = 1e-8`.
    pub fn for_dim(dim: usize) -> Self {
        MveeConfig {
            epsilon: Self::DEFAULT_EPSILON,
            max_iter: 100 * dim.max(1) * dim.max(1),
            oracle_tol: Self::DEFAULT_ORACLE_TOL,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.epsilon > 0.0 && self.epsilon <= 0.1) {
            return Err(Error::InvalidInput(format!("epsilon {} must lie in (0, 0.1]", self.epsilon)));
        }
        if !(self.oracle_tol > 0.0 && self.oracle_tol <= self.epsilon) {
            return Err(Error::InvalidInput(format!(
                "oracle_tol {} must be positive and at most epsilon",
                self.oracle_tol
            )));
        }
        if self.max_iter == 0 {
            return Err(Error::InvalidInput("max_iter must be positive".into()));
        }
        Ok(())
    }
}

/// Löwner ellipsoid together with the John-type distortion it certifies.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoewnerCertificate {
    pub ellipsoid: Ellipsoid,
    /// `α·β` with `β = inf{t : body ⊆ t·E}` and `α = inf{t : E ⊆ t·body}`.
    pub distortion: f64,
    pub john_bound: f64,
    pub iterations: usize,
    pub achieved_gap: f64,
}

impl LoewnerCertificate {
    pub fn within_john_bound(&self, slack: f64) -> bool {
        self.distortion <= self.john_bound * (1.0 + slack)
    }
}

/// Ellipsoid plus solver diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct MveeSolution {
    pub ellipsoid: Ellipsoid,
    pub iterations: usize,
    /// `max_i p_iᵀX⁻¹p_i / d − 1` at termination.
    pub gap: f64,
}

struct DualState {
    dim: usize,
    points: Vec<Vector>,
    weights: Vec<f64>,
}

impl DualState {
    fn moment(&self) -> Matrix {
        let mut x = Matrix::zeros(self.dim, self.dim);
        for (p, &u) in self.points.iter().zip(&self.weights) {
            if u > 0.0 {
                x.ger(u, p, p, 1.0);
            }
        }
        linalg::symmetrize(&x)
    }

    fn leverages(&self, x_inv: &Matrix) -> Vec<f64> {
        self.points.iter().map(|p| (p.transpose() * x_inv * p)[0]).collect()
    }

    /// Runs the ascent until the gap criterion holds. Returns
    /// `(X⁻¹, κ, iterations, converged)` where κ is the largest leverage.
    fn solve(&mut self, cfg: &MveeConfig) -> Result<(Matrix, f64, usize, bool)> {
        let d = self.dim as f64;
        let mut iterations = 0;
        loop {
            let x = self.moment();
            let x_inv = linalg::spd_inverse(&x)
                .ok_or_else(|| Error::DegenerateBody("moment matrix became singular".into()))?;
            let g = self.leverages(&x_inv);
            let (j, kappa) = g
                .iter()
                .enumerate()
                .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc });
            if kappa <= d * (1.0 + cfg.epsilon) {
                return Ok((x_inv, kappa, iterations, true));
            }
            if iterations >= cfg.max_iter {
                return Ok((x_inv, kappa, iterations, false));
            }
            // Away candidate: smallest leverage among points carrying weight.
            let away = g
                .iter()
                .enumerate()
                .filter(|(i, _)| self.weights[*i] > 0.0)
                .fold((usize::MAX, f64::INFINITY), |acc, (i, &v)| if v < acc.1 { (i, v) } else { acc });
            let toward_gain = kappa - d;
            let away_gain = d - away.1;
            if away.0 != usize::MAX && away_gain > toward_gain && self.weights[away.0] < 1.0 {
                let k = away.0;
                let uk = self.weights[k];
                let floor = -uk / (1.0 - uk);
                let alpha = if away.1 <= 1.0 {
                    floor
                } else {
                    ((away.1 - d) / (d * (away.1 - 1.0))).max(floor)
                };
                self.step(k, alpha);
                if alpha == floor {
                    self.weights[k] = 0.0;
                }
            } else {
                let alpha = (kappa - d) / (d * (kappa - 1.0));
                self.step(j, alpha);
            }
            iterations += 1;
        }
    }

    fn step(&mut self, k: usize, alpha: f64) {
        for u in self.weights.iter_mut() {
            *u *= 1.0 - alpha;
        }
        self.weights[k] += alpha;
        if self.weights[k] < 0.0 {
            self.weights[k] = 0.0;
        }
    }
}

fn prepare_points(points: &[Vector]) -> Result<(usize, Vec<Vector>)> {
    let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::DegenerateBody("no points".into()))?;
    let mut kept: Vec<Vector> = Vec::with_capacity(points.len());
    for p in points {
        check_dim(dim, p.len())?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if p.norm() == 0.0 {
            continue;
        }
        // p and −p impose the same constraint.
        let dup = kept.iter().any(|q| {
            let s = (q - p).norm().min((q + p).norm());
            s <= 1e-12 * (1.0 + p.norm())
        });
        if !dup {
            kept.push(p.clone());
        }
    }
    let mat = linalg::columns_to_matrix(dim, &kept);
    if dim == 0 || linalg::rank(&mat, RANK_TOL) < dim {
        return Err(Error::DegenerateBody(format!("points do not span R^{dim}")));
    }
    Ok((dim, kept))
}

fn ellipsoid_from(x_inv: &Matrix, kappa: f64) -> Result<Ellipsoid> {
    // Q = (d X)⁻¹ · d/κ, so every point satisfies pᵀQp ≤ 1.
    Ellipsoid::new(linalg::symmetrize(&(x_inv / kappa)))
}

/// Löwner ellipsoid of the symmetric hull of `points`, with diagnostics.
pub fn mvee_points_detailed(points: &[Vector], cfg: &MveeConfig) -> Result<MveeSolution> {
    cfg.validate()?;
    let (dim, pts) = prepare_points(points)?;
    let n = pts.len();
    let mut state = DualState {
        dim,
        points: pts,
        weights: vec![1.0 / n as f64; n],
    };
    let (x_inv, kappa, iterations, converged) = state.solve(cfg)?;
    let ellipsoid = ellipsoid_from(&x_inv, kappa)?;
    let gap = kappa / dim as f64 - 1.0;
    if !converged {
        return Err(Error::Convergence {
            iterations,
            gap,
            best: Box::new(ellipsoid),
        });
    }
    Ok(MveeSolution {
        ellipsoid,
        iterations,
        gap,
    })
}

/// Minimum-volume origin-centred ellipsoid containing `points` (and their
/// negatives), to relative volume accuracy `(1 + ε)^dim`.
pub fn mvee_points(points: &[Vector], cfg: &MveeConfig) -> Result<Ellipsoid> {
    mvee_points_detailed(points, cfg).map(|s| s.ellipsoid)
}

/// A generator of a convex hull, optionally living in a lower-dimensional
/// subspace: its coordinates are then those of `frame`'s basis.
#[derive(Debug, Clone, PartialEq)]
pub struct HullGenerator {
    pub shape: Shape,
    pub frame: Option<Subspace>,
}

impl HullGenerator {
    pub fn body(body: SymmetricBody) -> Self {
        HullGenerator {
            shape: Shape::Body(body),
            frame: None,
        }
    }

    pub fn ellipsoid(e: Ellipsoid) -> Self {
        HullGenerator {
            shape: Shape::Ellipsoid(e),
            frame: None,
        }
    }

    pub fn embedded(shape: Shape, frame: Subspace) -> Self {
        HullGenerator {
            shape,
            frame: Some(frame),
        }
    }

    fn ambient_dim(&self) -> usize {
        self.frame.as_ref().map_or(self.shape.dim(), |f| f.ambient_dim())
    }

    fn lift(&self, v: &Vector) -> Vector {
        self.frame.as_ref().map_or_else(|| v.clone(), |f| f.embed(v))
    }

    fn basis(&self) -> Matrix {
        let d = self.shape.dim();
        self.frame.as_ref().map_or_else(|| Matrix::identity(d, d), |f| f.basis().clone())
    }
}

/// Boundary points `L⁻ᵀ e_i` and `L⁻ᵀ (e_i ± e_j)/√2` of `{yᵀGy ≤ 1}`,
/// where `G = LLᵀ`. The first group alone already has the ellipsoid as its
/// Löwner ellipsoid.
fn ellipsoid_seed(e: &Ellipsoid) -> Result<Vec<Vector>> {
    let n = e.dim();
    let chol = e
        .gram()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::DegenerateEllipsoid("generator Gram is not positive definite".into()))?;
    let lt_inv = chol
        .l()
        .transpose()
        .try_inverse()
        .ok_or_else(|| Error::DegenerateEllipsoid("singular Cholesky factor".into()))?;
    let mut out = Vec::new();
    for i in 0..n {
        out.push(lt_inv.column(i).into_owned());
    }
    let h = 0.5f64.sqrt();
    for i in 0..n {
        for j in i + 1..n {
            out.push((lt_inv.column(i) + lt_inv.column(j)) * h);
            out.push((lt_inv.column(i) - lt_inv.column(j)) * h);
        }
    }
    Ok(out)
}

const MAX_CUT_ROUNDS: usize = 200;

/// Löwner ellipsoid of the convex hull of the union of the generators.
pub fn loewner_hull(generators: &[HullGenerator], cfg: &MveeConfig) -> Result<Ellipsoid> {
    cfg.validate()?;
    let dim = generators
        .first()
        .map(HullGenerator::ambient_dim)
        .ok_or_else(|| Error::InvalidInput("loewner_hull needs at least one generator".into()))?;
    let mut points: Vec<Vector> = Vec::new();
    for g in generators {
        check_dim(dim, g.ambient_dim())?;
        if let Some(f) = &g.frame {
            check_dim(f.rank(), g.shape.dim())?;
        }
        match &g.shape {
            Shape::Body(b) => points.extend(b.vertices().iter().map(|v| g.lift(v))),
            Shape::Ellipsoid(e) => points.extend(ellipsoid_seed(e)?.iter().map(|v| g.lift(v))),
        }
    }
    let (dim_checked, pts) = prepare_points(&points)?;
    debug_assert_eq!(dim_checked, dim);
    let n = pts.len();
    let mut state = DualState {
        dim,
        points: pts,
        weights: vec![1.0 / n as f64; n],
    };
    let mut total_iterations = 0;
    for _ in 0..MAX_CUT_ROUNDS {
        let (x_inv, kappa, iterations, converged) = state.solve(cfg)?;
        total_iterations += iterations;
        let current = ellipsoid_from(&x_inv, kappa)?;
        if !converged {
            return Err(Error::Convergence {
                iterations: total_iterations,
                gap: kappa / dim as f64 - 1.0,
                best: Box::new(current),
            });
        }
        let mut worst = 1.0f64;
        let mut cuts: Vec<Vector> = Vec::new();
        for g in generators {
            if let Shape::Ellipsoid(e) = &g.shape {
                let b = g.basis();
                let restricted = linalg::symmetrize(&(b.transpose() * current.gram() * &b));
                let (lambda, y) = linalg::max_generalized_eigen(&restricted, e.gram())?;
                worst = worst.max(lambda);
                if lambda > 1.0 + cfg.oracle_tol {
                    cuts.push(g.lift(&y));
                }
            }
        }
        if cuts.is_empty() {
            return Ok(current);
        }
        for c in cuts {
            state.points.push(c);
            state.weights.push(0.0);
        }
        if state.points.len() > 20_000 {
            break;
        }
        let _ = worst;
    }
    // Out of rounds: enlarge the last iterate until it contains everything.
    let (x_inv, kappa, iterations, _) = state.solve(cfg)?;
    let current = ellipsoid_from(&x_inv, kappa)?;
    let mut worst = 1.0f64;
    for g in generators {
        if let Shape::Ellipsoid(e) = &g.shape {
            let b = g.basis();
            let restricted = linalg::symmetrize(&(b.transpose() * current.gram() * &b));
            worst = worst.max(linalg::max_generalized_eigen(&restricted, e.gram())?.0);
        }
    }
    let enlarged = Ellipsoid::new(current.gram() / worst)?;
    if worst <= 1.0 + cfg.epsilon {
        Ok(enlarged)
    } else {
        Err(Error::Convergence {
            iterations: total_iterations + iterations,
            gap: worst - 1.0,
            best: Box::new(enlarged),
        })
    }
}

/// Distortion between a body and an enclosing ellipsoid.
///
/// `β = max_v √(vᵀQv)` over vertices and `α = max_n √(nᵀQ⁻¹n)` over facet
/// normals; both maxima are exact for polytope/ellipsoid pairs.
pub fn john_check(body: &SymmetricBody, ell: &Ellipsoid) -> Result<LoewnerCertificate> {
    check_dim(body.dim(), ell.dim())?;
    let beta = body.vertices().iter().map(|v| ell.quad(v)).fold(0.0f64, f64::max).sqrt();
    if beta > 1.0 + 1e-9 {
        return Err(Error::NotEnclosing { excess: beta });
    }
    let inv = ell.inverse_gram()?;
    let alpha = body
        .facets()?
        .iter()
        .map(|n| (n.transpose() * &inv * n)[0])
        .fold(0.0f64, f64::max)
        .sqrt();
    Ok(LoewnerCertificate {
        ellipsoid: ell.clone(),
        distortion: alpha * beta,
        john_bound: (body.dim() as f64).sqrt(),
        iterations: 0,
        achieved_gap: 0.0,
    })
}

/// Löwner ellipsoid of a body together with its John certificate. Fails if
/// the distortion exceeds `√dim·(1 + ε)`.
pub fn loewner_certificate(body: &SymmetricBody, cfg: &MveeConfig) -> Result<LoewnerCertificate> {
    let sol = mvee_points_detailed(body.vertices(), cfg)?;
    let mut cert = john_check(body, &sol.ellipsoid)?;
    cert.iterations = sol.iterations;
    cert.achieved_gap = sol.gap;
    if !cert.within_john_bound(cfg.epsilon) {
        return Err(Error::Internal(format!(
            "Löwner distortion {} exceeds the John bound {}",
            cert.distortion, cert.john_bound
        )));
    }
    Ok(cert)
}

/// Certificates for many bodies, computed in parallel; order is preserved.
pub fn loewner_certificates(bodies: &[SymmetricBody], cfg: &MveeConfig) -> Vec<Result<LoewnerCertificate>> {
    bodies.par_iter().map(|b| loewner_certificate(b, cfg)).collect()
}

/// Smallest `C` with `C · co(slice ∪ (S⊥ ∩ body)) ⊇ body`, where `S⊥` is
/// taken with respect to `q_ref`. Evaluated as the largest hull gauge over
/// the vertices of `body`.
pub fn slice_constant(body: &SymmetricBody, s: &Subspace, q_ref: &Ellipsoid) -> Result<f64> {
    check_dim(body.dim(), s.ambient_dim())?;
    check_dim(body.dim(), q_ref.dim())?;
    if s.is_empty() {
        return Err(Error::InvalidInput("slice constant of the zero subspace".into()));
    }
    let mut points = body.intersect_subspace(s)?.embedded_vertices(s)?;
    let perp = s.orthogonal_complement(q_ref)?;
    if !perp.is_empty() {
        points.extend(body.intersect_subspace(&perp)?.embedded_vertices(&perp)?);
    }
    let mut worst = 0.0f64;
    for v in body.vertices() {
        worst = worst.max(gauge_of_points(&points, v)?);
    }
    Ok(worst)
}
