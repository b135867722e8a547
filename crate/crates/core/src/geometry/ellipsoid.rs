use serde::{Deserialize, Serialize};

use super::{Subspace, SymmetricBody};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, Vector};

/// Eigenvalue floor below which a Gram matrix counts as singular.
pub const EIGEN_FLOOR: f64 = 1e-12;
/// Entrywise symmetry tolerance for Gram matrices.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Origin-centred ellipsoid `{v : vᵀQv ≤ 1}` for a symmetric
/// positive-definite Gram matrix `Q`; equivalently the Hilbert norm
/// `v ↦ √(vᵀQv)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EllipsoidRepr", into = "EllipsoidRepr")]
pub struct Ellipsoid {
    gram: Matrix,
}

#[derive(Serialize, Deserialize)]
pub(crate) struct EllipsoidRepr {
    gram: Vec<Vec<f64>>,
}

impl TryFrom<EllipsoidRepr> for Ellipsoid {
    type Error = Error;
    fn try_from(r: EllipsoidRepr) -> Result<Self> {
        let n = r.gram.len();
        if r.gram.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidInput("Gram matrix must be square".into()));
        }
        Ellipsoid::new(linalg::rows_to_matrix(&r.gram, n))
    }
}

impl From<Ellipsoid> for EllipsoidRepr {
    fn from(e: Ellipsoid) -> Self {
        EllipsoidRepr {
            gram: linalg::matrix_to_rows(&e.gram),
        }
    }
}

/// Semi-axes (descending) and, in the plane, the eccentricity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EllipseMetrics {
    pub semi_axes: Vec<f64>,
    pub eccentricity: Option<f64>,
}

/// Either kind of origin-symmetric convex set the crate computes with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Shape {
    Body(SymmetricBody),
    Ellipsoid(Ellipsoid),
}

impl Shape {
    pub fn dim(&self) -> usize {
        match self {
            Shape::Body(b) => b.dim(),
            Shape::Ellipsoid(e) => e.dim(),
        }
    }
}

/// Outcome of a containment test. `excess` is the largest value of the
/// outer quadratic form over the inner set (≤ 1 means contained).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Containment {
    pub contained: bool,
    pub excess: f64,
    pub witness: Option<Vec<f64>>,
}

impl Ellipsoid {
    pub fn new(gram: Matrix) -> Result<Self> {
        if gram.nrows() != gram.ncols() || gram.nrows() == 0 {
            return Err(Error::InvalidInput("Gram matrix must be square and non-empty".into()));
        }
        if gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("Gram matrix has non-finite entries".into()));
        }
        let asym = linalg::max_asymmetry(&gram);
        let scale = gram.iter().fold(1.0f64, |a, x| a.max(x.abs()));
        if asym > SYMMETRY_TOL * scale {
            return Err(Error::InvalidInput(format!("Gram matrix is not symmetric (off by {asym:.3e})")));
        }
        let gram = linalg::symmetrize(&gram);
        let (vals, _) = linalg::sym_eigen(&gram);
        if vals[0] <= EIGEN_FLOOR {
            return Err(Error::DegenerateEllipsoid(format!(
                "smallest eigenvalue {:.3e} is below the floor {EIGEN_FLOOR:e}",
                vals[0]
            )));
        }
        Ok(Ellipsoid { gram })
    }

    pub fn identity(dim: usize) -> Self {
        Ellipsoid {
            gram: Matrix::identity(dim, dim),
        }
    }

    /// Euclidean ball of the given radius.
    pub fn ball(dim: usize, radius: f64) -> Result<Self> {
        Ellipsoid::new(Matrix::identity(dim, dim) / (radius * radius))
    }

    /// Axis-aligned ellipsoid with the given semi-axes.
    pub fn axis_aligned(semi_axes: &[f64]) -> Result<Self> {
        let diag = Vector::from_iterator(semi_axes.len(), semi_axes.iter().map(|a| 1.0 / (a * a)));
        Ellipsoid::new(Matrix::from_diagonal(&diag))
    }

    pub fn dim(&self) -> usize {
        self.gram.nrows()
    }

    pub fn gram(&self) -> &Matrix {
        &self.gram
    }

    pub fn into_gram(self) -> Matrix {
        self.gram
    }

    /// The attached Hilbert norm `√(vᵀQv)`.
    pub fn norm(&self, v: &Vector) -> Result<f64> {
        check_dim(self.dim(), v.len())?;
        Ok(self.quad(v).max(0.0).sqrt())
    }

    pub(crate) fn quad(&self, v: &Vector) -> f64 {
        (v.transpose() * &self.gram * v)[0]
    }

    pub fn inverse_gram(&self) -> Result<Matrix> {
        linalg::spd_inverse(&self.gram).ok_or_else(|| Error::DegenerateEllipsoid("Gram matrix is not invertible".into()))
    }

    /// Support function `h(u) = √(uᵀQ⁻¹u)`.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        check_dim(self.dim(), u.len())?;
        if u.iter().all(|x| *x == 0.0) {
            return Ok(0.0);
        }
        let inv = self.inverse_gram()?;
        Ok((u.transpose() * inv * u)[0].max(0.0).sqrt())
    }

    /// Semi-axes `1/√λ` in descending order; eccentricity `√(1 − (b/a)²)`
    /// in dimension 2.
    pub fn metrics(&self) -> EllipseMetrics {
        let (vals, _) = linalg::sym_eigen(&self.gram);
        let semi_axes: Vec<f64> = vals.iter().map(|l| 1.0 / l.sqrt()).collect();
        let eccentricity = (self.dim() == 2).then(|| {
            let (a, b) = (semi_axes[0], semi_axes[1]);
            (1.0 - (b / a).powi(2)).max(0.0).sqrt()
        });
        EllipseMetrics { semi_axes, eccentricity }
    }

    /// `log det Q`; volume is proportional to `exp(−½ log det Q)`.
    pub fn log_det(&self) -> f64 {
        let (vals, _) = linalg::sym_eigen(&self.gram);
        vals.iter().map(|l| l.ln()).sum()
    }

    /// Restriction of the quadratic form to a subspace, in the subspace's
    /// basis coordinates: `BᵀQB`.
    pub fn restrict(&self, s: &Subspace) -> Result<Ellipsoid> {
        check_dim(self.dim(), s.ambient_dim())?;
        if s.is_empty() {
            return Err(Error::DegenerateEllipsoid("restriction to the empty subspace".into()));
        }
        let b = s.basis();
        Ellipsoid::new(linalg::symmetrize(&(b.transpose() * &self.gram * b)))
    }

    /// Same ellipsoid after the change of coordinates `old = T · new`.
    pub fn pull_back(&self, t: &Matrix) -> Result<Ellipsoid> {
        Ellipsoid::new(linalg::symmetrize(&(t.transpose() * &self.gram * t)))
    }

    /// Scales the ellipsoid by `factor` (the set `factor · E`).
    pub fn scaled(&self, factor: f64) -> Ellipsoid {
        Ellipsoid {
            gram: &self.gram / (factor * factor),
        }
    }

    /// Containment of a polytope or ellipsoid in `self`, with slack `tol`
    /// on the quadratic form.
    pub fn contains(&self, inner: &Shape, tol: f64) -> Result<Containment> {
        check_dim(self.dim(), inner.dim())?;
        let (excess, witness) = match inner {
            Shape::Body(body) => body
                .vertices()
                .iter()
                .map(|v| (self.quad(v), v.clone()))
                .fold((f64::NEG_INFINITY, None), |acc, (q, v)| if q > acc.0 { (q, Some(v)) } else { acc }),
            Shape::Ellipsoid(e) => {
                let (lambda, y) = linalg::max_generalized_eigen(&self.gram, e.gram())?;
                (lambda, Some(y))
            }
        };
        let contained = excess <= 1.0 + tol;
        Ok(Containment {
            contained,
            excess,
            witness: if contained { None } else { witness.map(|w| w.iter().cloned().collect()) },
        })
    }

    /// Containment of an ellipsoid that lives inside `frame` (given in the
    /// frame's coordinates); the witness is returned in ambient coordinates.
    pub fn contains_embedded(&self, frame: &Subspace, inner: &Ellipsoid, tol: f64) -> Result<Containment> {
        let restricted = self.restrict(frame)?;
        let mut c = restricted.contains(&Shape::Ellipsoid(inner.clone()), tol)?;
        if let Some(w) = c.witness.take() {
            let ambient = frame.embed(&Vector::from_vec(w));
            c.witness = Some(ambient.iter().cloned().collect());
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn support_examples() {
        let i2 = Ellipsoid::identity(2);
        assert_relative_eq!(i2.support(&v(&[3.0, 4.0])).unwrap(), 5.0, epsilon = 1e-12);
        assert_eq!(i2.support(&v(&[0.0, 0.0])).unwrap(), 0.0);
        let e = Ellipsoid::axis_aligned(&[2.0, 2f64.sqrt()]).unwrap();
        assert_relative_eq!(e.support(&v(&[1.0, 0.0])).unwrap(), 2.0, epsilon = 1e-12);
    }

    #[test]
    fn metrics_examples() {
        let m = Ellipsoid::axis_aligned(&[2.0, 2f64.sqrt()]).unwrap().metrics();
        assert_relative_eq!(m.semi_axes[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(m.semi_axes[1], 2f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(m.eccentricity.unwrap(), 0.5f64.sqrt(), epsilon = 1e-12);

        let m = Ellipsoid::identity(2).metrics();
        assert_eq!(m.semi_axes, vec![1.0, 1.0]);
        assert_eq!(m.eccentricity, Some(0.0));

        let q = Matrix::from_diagonal(&v(&[1.0, 4.0]));
        let m = Ellipsoid::new(q).unwrap().metrics();
        assert_relative_eq!(m.semi_axes[0], 1.0, epsilon = 1e-12);
        assert_relative_eq!(m.semi_axes[1], 0.5, epsilon = 1e-12);
        assert_relative_eq!(m.eccentricity.unwrap(), 3f64.sqrt() / 2.0, epsilon = 1e-12);
        assert_eq!(Ellipsoid::identity(3).metrics().eccentricity, None);
    }

    #[test]
    fn rejects_bad_grams() {
        assert!(matches!(
            Ellipsoid::new(Matrix::from_diagonal(&v(&[1.0, 0.0]))),
            Err(Error::DegenerateEllipsoid(_))
        ));
        assert!(Ellipsoid::new(Matrix::from_row_slice(2, 2, &[1.0, 0.1, 0.0, 1.0])).is_err());
    }

    #[test]
    fn self_containment() {
        let q = Ellipsoid::new(Matrix::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0])).unwrap();
        let c = q.contains(&Shape::Ellipsoid(q.clone()), 1e-9).unwrap();
        assert!(c.contained);
        assert_relative_eq!(c.excess, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn cube_fits_in_circumscribed_ball() {
        let ball = Ellipsoid::ball(3, 3f64.sqrt()).unwrap();
        let c = ball.contains(&Shape::Body(SymmetricBody::cube(3)), 1e-9).unwrap();
        assert!(c.contained);
        assert_relative_eq!(c.excess, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn diagonal_slice_ellipse_escapes_the_ball() {
        let ball = Ellipsoid::ball(3, 3f64.sqrt()).unwrap();
        let h = 0.5f64.sqrt();
        let plane = Subspace::new(3, vec![v(&[h, h, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        let ellipse = Ellipsoid::axis_aligned(&[2.0, 2f64.sqrt()]).unwrap();
        let c = ball.contains_embedded(&plane, &ellipse, 1e-9).unwrap();
        assert!(!c.contained);
        let w = Vector::from_vec(c.witness.unwrap());
        assert_relative_eq!(w.norm(), 2.0, epsilon = 1e-9);
    }
}
