use serde::{Deserialize, Serialize};

use super::Ellipsoid;
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Matrix, Vector, RANK_TOL};

/// A linear subspace given by a basis of linearly independent columns.
///
/// Rank 0 is allowed and acts as the distinguished empty subspace (e.g. the
/// complement of the full space); operations that consume a subspace say what
/// they do with it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SubspaceRepr", into = "SubspaceRepr")]
pub struct Subspace {
    ambient_dim: usize,
    basis: Matrix,
}

#[derive(Serialize, Deserialize)]
struct SubspaceRepr {
    ambient_dim: usize,
    basis: Vec<Vec<f64>>,
}

impl TryFrom<SubspaceRepr> for Subspace {
    type Error = Error;
    fn try_from(r: SubspaceRepr) -> Result<Self> {
        let cols = r.basis.into_iter().map(Vector::from_vec).collect();
        Subspace::new(r.ambient_dim, cols)
    }
}

impl From<Subspace> for SubspaceRepr {
    fn from(s: Subspace) -> Self {
        SubspaceRepr {
            ambient_dim: s.ambient_dim,
            basis: s.basis.column_iter().map(|c| c.iter().cloned().collect()).collect(),
        }
    }
}

impl Subspace {
    pub fn new(ambient_dim: usize, columns: Vec<Vector>) -> Result<Self> {
        if ambient_dim == 0 {
            return Err(Error::InvalidInput("ambient dimension must be positive".into()));
        }
        for c in &columns {
            check_dim(ambient_dim, c.len())?;
        }
        let basis = linalg::columns_to_matrix(ambient_dim, &columns);
        if linalg::rank(&basis, RANK_TOL) != columns.len() {
            return Err(Error::InvalidInput("subspace basis is linearly dependent".into()));
        }
        Ok(Subspace { ambient_dim, basis })
    }

    pub(crate) fn from_matrix(basis: Matrix) -> Self {
        Subspace {
            ambient_dim: basis.nrows(),
            basis,
        }
    }

    /// The rank-0 sentinel.
    pub fn empty(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::zeros(ambient_dim, 0),
        }
    }

    pub fn full(ambient_dim: usize) -> Self {
        Subspace {
            ambient_dim,
            basis: Matrix::identity(ambient_dim, ambient_dim),
        }
    }

    /// Span of arbitrary vectors, keeping the first linearly independent ones
    /// (in order) as the basis.
    pub fn span(ambient_dim: usize, vectors: &[Vector]) -> Result<Self> {
        let mut kept: Vec<Vector> = Vec::new();
        let mut rank = 0;
        for v in vectors {
            check_dim(ambient_dim, v.len())?;
            let mut trial = kept.clone();
            trial.push(v.clone());
            let r = linalg::rank(&linalg::columns_to_matrix(ambient_dim, &trial), RANK_TOL);
            if r > rank {
                rank = r;
                kept = trial;
            }
        }
        Ok(Subspace {
            ambient_dim,
            basis: linalg::columns_to_matrix(ambient_dim, &kept),
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    pub fn is_empty(&self) -> bool {
        self.rank() == 0
    }

    pub fn is_full(&self) -> bool {
        self.rank() == self.ambient_dim
    }

    /// Basis vectors as columns (`ambient_dim × rank`).
    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn basis_vectors(&self) -> Vec<Vector> {
        self.basis.column_iter().map(|c| c.into_owned()).collect()
    }

    /// Euclidean-orthonormal basis of the same subspace.
    pub fn orthonormal_basis(&self) -> Matrix {
        linalg::orthonormal_columns(&self.basis, RANK_TOL)
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix {
        let u = self.orthonormal_basis();
        &u * u.transpose()
    }

    /// Maps subspace coordinates to ambient coordinates.
    pub fn embed(&self, coords: &Vector) -> Vector {
        &self.basis * coords
    }

    /// Subspace coordinates of `v` and the residual of the projection.
    pub fn coordinates(&self, v: &Vector) -> (Vector, f64) {
        linalg::coordinates_in(&self.basis, v)
    }

    pub fn contains_vector(&self, v: &Vector, tol: f64) -> bool {
        let (_, res) = self.coordinates(v);
        res <= tol * (1.0 + v.norm())
    }

    /// Equality as subspaces: same rank and all principal angles below `tol`.
    pub fn same_as(&self, other: &Subspace, tol: f64) -> bool {
        if self.ambient_dim != other.ambient_dim || self.rank() != other.rank() {
            return false;
        }
        // ‖P₁ − P₂‖₂ is the sine of the largest principal angle.
        let diff = self.projector() - other.projector();
        let sv = diff.svd(false, false).singular_values;
        sv.iter().all(|&s| s <= tol)
    }

    pub fn is_subspace_of(&self, other: &Subspace, tol: f64) -> bool {
        self.basis_vectors().iter().all(|v| other.contains_vector(v, tol))
    }

    /// Intersection of two subspaces of the same ambient space, with a
    /// Euclidean-orthonormal basis.
    pub fn intersection(&self, other: &Subspace) -> Result<Subspace> {
        check_dim(self.ambient_dim, other.ambient_dim)?;
        if self.is_empty() || other.is_empty() {
            return Ok(Subspace::empty(self.ambient_dim));
        }
        let (a, b) = (self.orthonormal_basis(), other.orthonormal_basis());
        let mut stacked = Matrix::zeros(self.ambient_dim, a.ncols() + b.ncols());
        stacked.columns_mut(0, a.ncols()).copy_from(&a);
        stacked.columns_mut(a.ncols(), b.ncols()).copy_from(&(-&b));
        let kernel = linalg::null_space(&stacked, RANK_TOL);
        let vectors = &a * kernel.rows(0, a.ncols());
        Ok(Subspace::from_matrix(linalg::orthonormal_columns(&vectors, RANK_TOL)))
    }

    /// `S⊥ = {v : uᵀQv = 0 for all u in S}` with respect to the inner
    /// product of `q`, with a `q`-orthonormal basis. The full space yields
    /// the empty sentinel.
    pub fn orthogonal_complement(&self, q: &Ellipsoid) -> Result<Subspace> {
        check_dim(self.ambient_dim, q.dim())?;
        let n = self.ambient_dim;
        if self.is_full() {
            return Ok(Subspace::empty(n));
        }
        if self.is_empty() {
            return Ok(Subspace::from_matrix(q_orthonormalize(&Matrix::identity(n, n), q.gram())));
        }
        let constraint = self.basis.transpose() * q.gram();
        let kernel = linalg::null_space(&constraint, RANK_TOL);
        Ok(Subspace::from_matrix(q_orthonormalize(&kernel, q.gram())))
    }

    /// Re-expresses the same subspace in the coordinates of `frame`: the
    /// result lives in `R^{frame.rank()}`. Requires `self ⊆ frame`.
    pub fn in_frame(&self, frame: &Subspace) -> Result<Subspace> {
        check_dim(frame.ambient_dim, self.ambient_dim)?;
        let mut cols = Vec::with_capacity(self.rank());
        for v in self.basis_vectors() {
            let (c, res) = frame.coordinates(&v);
            if res > 1e-9 * (1.0 + v.norm()) {
                return Err(Error::InvalidInput("subspace is not contained in the frame".into()));
            }
            cols.push(c);
        }
        Ok(Subspace::from_matrix(linalg::columns_to_matrix(frame.rank(), &cols)))
    }

    /// Composes coordinate maps: `self` lives in the coordinates of `outer`;
    /// the result is the same subspace expressed in `outer`'s ambient space.
    pub fn lift_through(&self, outer: &Subspace) -> Result<Subspace> {
        check_dim(outer.rank(), self.ambient_dim)?;
        Ok(Subspace::from_matrix(outer.basis() * &self.basis))
    }
}

/// Gram-Schmidt in the inner product `⟨u, v⟩ = uᵀQv`, dropping dependent
/// columns; the largest-magnitude entry of each output column is positive.
fn q_orthonormalize(columns: &Matrix, q: &Matrix) -> Matrix {
    let mut kept: Vec<Vector> = Vec::new();
    for j in 0..columns.ncols() {
        let mut v = columns.column(j).into_owned();
        for _ in 0..2 {
            for b in &kept {
                let c = (b.transpose() * q * &v)[0];
                v -= b * c;
            }
        }
        let n2 = (v.transpose() * q * &v)[0];
        if n2 > 1e-20 {
            let mut v = v / n2.sqrt();
            let lead = (0..v.len()).fold(0, |k, i| if v[i].abs() > v[k].abs() + 1e-12 { i } else { k });
            if v[lead] < 0.0 {
                v.neg_mut();
            }
            kept.push(v);
        }
    }
    linalg::columns_to_matrix(columns.nrows(), &kept)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn euclidean_complement_of_axis() {
        let s = Subspace::new(2, vec![v(&[1.0, 0.0])]).unwrap();
        let c = s.orthogonal_complement(&Ellipsoid::identity(2)).unwrap();
        assert_eq!(c.rank(), 1);
        let b = c.basis().column(0);
        assert!(b[0].abs() < 1e-12 && (b[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn skewed_complement_solves_the_constraint() {
        let q = Ellipsoid::new(Matrix::from_row_slice(2, 2, &[1.0, 0.5, 0.5, 1.0])).unwrap();
        let s = Subspace::new(2, vec![v(&[1.0, 0.0])]).unwrap();
        let c = s.orthogonal_complement(&q).unwrap();
        let b = c.basis().column(0).into_owned();
        // Parallel to (−0.5, 1).
        assert!((b[0] / b[1] + 0.5).abs() < 1e-12);
        // Q-unit length.
        assert!(((b.transpose() * q.gram() * &b)[0] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn complement_of_full_space_is_the_sentinel() {
        let c = Subspace::full(3).orthogonal_complement(&Ellipsoid::identity(3)).unwrap();
        assert!(c.is_empty());
        assert_eq!(c.ambient_dim(), 3);
    }

    #[test]
    fn equality_ignores_basis_choice() {
        let a = Subspace::new(3, vec![v(&[1.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        let b = Subspace::new(3, vec![v(&[2.0, 2.0, 1.0]), v(&[1.0, 1.0, -3.0])]).unwrap();
        assert!(a.same_as(&b, 1e-10));
        assert!(!a.same_as(&Subspace::full(3), 1e-10));
    }

    #[test]
    fn intersection_of_planes() {
        let a = Subspace::new(3, vec![v(&[1.0, 0.0, 0.0]), v(&[0.0, 1.0, 0.0])]).unwrap();
        let b = Subspace::new(3, vec![v(&[0.0, 1.0, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        let i = a.intersection(&b).unwrap();
        assert_eq!(i.rank(), 1);
        assert!(i.same_as(&Subspace::new(3, vec![v(&[0.0, 1.0, 0.0])]).unwrap(), 1e-10));
    }

    #[test]
    fn dependent_basis_rejected_and_span_picks_independent() {
        assert!(Subspace::new(2, vec![v(&[1.0, 0.0]), v(&[2.0, 0.0])]).is_err());
        let s = Subspace::span(2, &[v(&[1.0, 0.0]), v(&[2.0, 0.0]), v(&[0.0, 3.0])]).unwrap();
        assert_eq!(s.rank(), 2);
        assert_eq!(s.basis().column(1)[1], 3.0);
    }
}
