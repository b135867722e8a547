use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::{dd, Subspace};
use crate::error::{check_dim, Error, Result};
use crate::linalg::{self, Vector, RANK_TOL};
use crate::lp::{LinearProgram, LpOutcome};

/// Tolerance for merging points and deciding facet tightness.
pub const MERGE_TOL: f64 = 1e-9;
/// Largest ambient dimension for polytope work.
pub const MAX_DIM: usize = 8;

/// Origin-symmetric, full-dimensional convex polytope stored by its
/// irredundant vertex list. It is the unit ball of the gauge norm
/// `‖v‖ = inf{t > 0 : v ∈ t·body}`.
///
/// The facet description `{x : ⟨n, x⟩ ≤ 1}` is computed on first use and
/// cached.
#[derive(Debug, Serialize, Deserialize)]
#[serde(try_from = "BodyRepr", into = "BodyRepr")]
pub struct SymmetricBody {
    dim: usize,
    vertices: Vec<Vector>,
    facets: OnceLock<Vec<Vector>>,
}

#[derive(Serialize, Deserialize)]
struct BodyRepr {
    dim: usize,
    vertices: Vec<Vec<f64>>,
}

impl TryFrom<BodyRepr> for SymmetricBody {
    type Error = Error;
    fn try_from(r: BodyRepr) -> Result<Self> {
        let vs: Vec<Vector> = r.vertices.into_iter().map(Vector::from_vec).collect();
        for v in &vs {
            check_dim(r.dim, v.len())?;
        }
        SymmetricBody::new(vs)
    }
}

impl From<SymmetricBody> for BodyRepr {
    fn from(b: SymmetricBody) -> Self {
        BodyRepr {
            dim: b.dim,
            vertices: b.vertices.iter().map(|v| v.iter().cloned().collect()).collect(),
        }
    }
}

impl Clone for SymmetricBody {
    fn clone(&self) -> Self {
        let facets = OnceLock::new();
        if let Some(f) = self.facets.get() {
            let _ = facets.set(f.clone());
        }
        SymmetricBody {
            dim: self.dim,
            vertices: self.vertices.clone(),
            facets,
        }
    }
}

impl PartialEq for SymmetricBody {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.vertices == other.vertices
    }
}

fn close(a: &Vector, b: &Vector) -> bool {
    a.iter().zip(b.iter()).all(|(x, y)| (x - y).abs() <= MERGE_TOL * (1.0 + x.abs().max(y.abs())))
}

fn to_rows(points: &[Vector]) -> Vec<Vec<f64>> {
    points.iter().map(|p| p.iter().cloned().collect()).collect()
}

impl SymmetricBody {
    /// Validates the vertex list: symmetric, full-dimensional, irredundant.
    pub fn new(vertices: Vec<Vector>) -> Result<Self> {
        let count = vertices.len();
        let body = convex_hull_points(&vertices)?;
        if body.vertices.len() != count {
            return Err(Error::DegenerateBody(format!(
                "vertex list is redundant: {} of {count} points are extreme",
                body.vertices.len()
            )));
        }
        Ok(body)
    }

    /// The cube `[-1, 1]^dim`.
    pub fn cube(dim: usize) -> Self {
        let vertices = (0..1usize << dim)
            .map(|mask| Vector::from_iterator(dim, (0..dim).map(|k| if mask >> k & 1 == 1 { 1.0 } else { -1.0 })))
            .collect();
        Self::trusted(dim, vertices)
    }

    /// The cross-polytope (ℓ¹ unit ball) with vertices `±e_i`.
    pub fn cross_polytope(dim: usize) -> Self {
        let mut vertices = Vec::with_capacity(2 * dim);
        for k in 0..dim {
            let mut e = Vector::zeros(dim);
            e[k] = 1.0;
            vertices.push(e.clone());
            vertices.push(-e);
        }
        Self::trusted(dim, vertices)
    }

    /// The segment `[-r, r]` in dimension 1.
    pub fn segment(half_length: f64) -> Self {
        Self::trusted(1, vec![Vector::from_element(1, half_length), Vector::from_element(1, -half_length)])
    }

    /// Axis-aligned box with the given half-side lengths.
    pub fn boxed(half_sides: &[f64]) -> Self {
        let cube = Self::cube(half_sides.len());
        let vertices = cube
            .vertices
            .iter()
            .map(|v| v.component_mul(&Vector::from_row_slice(half_sides)))
            .collect();
        Self::trusted(half_sides.len(), vertices)
    }

    pub(crate) fn trusted(dim: usize, vertices: Vec<Vector>) -> Self {
        SymmetricBody {
            dim,
            vertices,
            facets: OnceLock::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn vertices(&self) -> &[Vector] {
        &self.vertices
    }

    /// Outer facet normals `n` with `body = {x : ⟨n, x⟩ ≤ 1 for all n}`.
    pub fn facets(&self) -> Result<&[Vector]> {
        if let Some(f) = self.facets.get() {
            return Ok(f);
        }
        let normals = dd::polytope_vertices(&to_rows(&self.vertices), self.dim)?;
        let normals: Vec<Vector> = normals.into_iter().map(Vector::from_vec).collect();
        Ok(self.facets.get_or_init(|| normals))
    }

    /// Minkowski functional, computed as the optimal value of
    /// `min Σλ  s.t.  Σ λ_i v_i = x, λ ≥ 0` over the vertices.
    pub fn gauge(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        gauge_of_points(&self.vertices, x)
    }

    /// The same functional from the facet description: `max_n ⟨n, x⟩`.
    pub fn gauge_via_facets(&self, x: &Vector) -> Result<f64> {
        check_dim(self.dim, x.len())?;
        Ok(self.facets()?.iter().map(|n| n.dot(x)).fold(0.0f64, f64::max))
    }

    /// Support function `h(u) = max_v ⟨u, v⟩` over the vertices.
    pub fn support(&self, u: &Vector) -> Result<f64> {
        check_dim(self.dim, u.len())?;
        Ok(self.vertices.iter().map(|v| v.dot(u)).fold(0.0f64, f64::max))
    }

    /// `body ∩ span(S)` in the coordinates of `S`'s basis.
    ///
    /// Restricts each facet inequality to the subspace and enumerates the
    /// vertices of the resulting polytope.
    pub fn intersect_subspace(&self, s: &Subspace) -> Result<SymmetricBody> {
        check_dim(self.dim, s.ambient_dim())?;
        if s.is_empty() {
            return Err(Error::InvalidInput("cannot slice by the empty subspace".into()));
        }
        let b = s.basis();
        let restricted: Vec<Vec<f64>> = self
            .facets()?
            .iter()
            .map(|n| (b.transpose() * n).iter().cloned().collect())
            .collect();
        let verts = dd::polytope_vertices(&restricted, s.rank())
            .map_err(|e| Error::Internal(format!("slice of a symmetric body has empty interior: {e}")))?;
        let verts: Vec<Vector> = verts.into_iter().map(Vector::from_vec).collect();
        convex_hull_points(&verts)
    }

    /// Image of the vertices under an injective linear map given by the
    /// columns of `s` (subspace coordinates to ambient coordinates).
    pub fn embedded_vertices(&self, s: &Subspace) -> Result<Vec<Vector>> {
        check_dim(self.dim, s.rank())?;
        Ok(self.vertices.iter().map(|v| s.embed(v)).collect())
    }
}

/// Gauge of `x` with respect to the convex hull of a symmetric spanning
/// point set (not necessarily irredundant).
pub(crate) fn gauge_of_points(points: &[Vector], x: &Vector) -> Result<f64> {
    if x.iter().all(|c| *c == 0.0) {
        return Ok(0.0);
    }
    let n = points.len();
    let mut lp = LinearProgram::new(vec![1.0; n]);
    for k in 0..x.len() {
        lp.add_eq(points.iter().map(|p| p[k]).collect(), x[k]);
    }
    match lp.solve()? {
        LpOutcome::Optimal(sol) => Ok(sol.objective),
        LpOutcome::Infeasible => Err(Error::DegenerateBody("point outside the span of the body".into())),
        LpOutcome::Unbounded => Err(Error::Internal("gauge program is unbounded".into())),
    }
}

/// Irredundant vertex description of the convex hull of a symmetric,
/// spanning point set. Points within the merge tolerance are identified and
/// non-extreme points (including those on edges or faces) are dropped; the
/// survivors keep their input order.
pub fn convex_hull_points(points: &[Vector]) -> Result<SymmetricBody> {
    let dim = points.first().map(|p| p.len()).ok_or_else(|| Error::DegenerateBody("empty point set".into()))?;
    if dim == 0 {
        return Err(Error::DegenerateBody("zero-dimensional points".into()));
    }
    if dim > MAX_DIM {
        return Err(Error::InvalidInput(format!("dimension {dim} exceeds the cap of {MAX_DIM}")));
    }
    let mut merged: Vec<Vector> = Vec::new();
    for p in points {
        check_dim(dim, p.len())?;
        if p.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidInput("non-finite coordinate".into()));
        }
        if p.norm() <= MERGE_TOL {
            continue;
        }
        if !merged.iter().any(|q| close(q, p)) {
            merged.push(p.clone());
        }
    }
    for p in &merged {
        let neg = -p;
        if !merged.iter().any(|q| close(q, &neg)) {
            return Err(Error::DegenerateBody("point set is not symmetric under negation".into()));
        }
    }
    let mat = linalg::columns_to_matrix(dim, &merged);
    if linalg::rank(&mat, RANK_TOL) < dim {
        return Err(Error::DegenerateBody(format!("points do not span R^{dim}")));
    }
    let normals: Vec<Vector> = dd::polytope_vertices(&to_rows(&merged), dim)?
        .into_iter()
        .map(Vector::from_vec)
        .collect();
    let vertices: Vec<Vector> = merged
        .into_iter()
        .filter(|p| {
            let tight: Vec<Vector> = normals
                .iter()
                .filter(|n| (n.dot(p) - 1.0).abs() <= MERGE_TOL * (1.0 + p.norm() * n.norm()))
                .cloned()
                .collect();
            !tight.is_empty() && linalg::rank(&linalg::columns_to_matrix(dim, &tight), 1e-9) == dim
        })
        .collect();
    let body = SymmetricBody::trusted(dim, vertices);
    let _ = body.facets.set(normals);
    Ok(body)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn v(x: &[f64]) -> Vector {
        Vector::from_row_slice(x)
    }

    #[test]
    fn gauge_examples() {
        let l1 = SymmetricBody::cross_polytope(2);
        assert_relative_eq!(l1.gauge(&v(&[1.0, 1.0])).unwrap(), 2.0, epsilon = 1e-12);
        assert_eq!(l1.gauge(&v(&[0.0, 0.0])).unwrap(), 0.0);
        let cube = SymmetricBody::cube(2);
        assert_relative_eq!(cube.gauge(&v(&[0.5, -1.0])).unwrap(), 1.0, epsilon = 1e-12);
        assert!(matches!(cube.gauge(&v(&[1.0])), Err(Error::Dimension { .. })));
    }

    #[test]
    fn support_examples() {
        assert_relative_eq!(SymmetricBody::cube(3).support(&v(&[1.0, 1.0, 1.0])).unwrap(), 3.0);
        assert_eq!(SymmetricBody::cube(3).support(&v(&[0.0, 0.0, 0.0])).unwrap(), 0.0);
        assert_relative_eq!(SymmetricBody::cross_polytope(2).support(&v(&[1.0, 1.0])).unwrap(), 1.0);
    }

    #[test]
    fn hull_drops_edge_midpoints() {
        let pts = vec![
            v(&[1.0, 0.0]),
            v(&[-1.0, 0.0]),
            v(&[0.0, 1.0]),
            v(&[0.0, -1.0]),
            v(&[0.5, 0.5]),
            v(&[-0.5, -0.5]),
        ];
        let body = convex_hull_points(&pts).unwrap();
        assert_eq!(body.vertices().len(), 4);
        assert!(body.vertices().iter().all(|p| p.iter().any(|x| x.abs() == 1.0)));
    }

    #[test]
    fn hull_of_segment_and_interior_points() {
        let seg = convex_hull_points(&[v(&[1.0]), v(&[-1.0])]).unwrap();
        assert_eq!(seg.vertices().len(), 2);

        let mut pts: Vec<Vector> = SymmetricBody::cube(3).vertices().to_vec();
        for k in 0..12 {
            let a = k as f64 * 0.7;
            let p = v(&[a.cos() * 0.5 * a.sin(), a.sin() * 0.5 * a.sin(), 0.5 * a.cos()]);
            pts.push(p.clone());
            pts.push(-p);
        }
        let body = convex_hull_points(&pts).unwrap();
        assert_eq!(body.vertices().len(), 8);
    }

    #[test]
    fn hull_rejects_degenerate_input() {
        assert!(convex_hull_points(&[v(&[1.0, 0.0]), v(&[-1.0, 0.0])]).is_err());
        assert!(convex_hull_points(&[v(&[1.0, 0.0]), v(&[0.0, 1.0]), v(&[-1.0, 0.0])]).is_err());
        assert!(SymmetricBody::new(vec![v(&[1.0]), v(&[-1.0]), v(&[0.5]), v(&[-0.5])]).is_err());
    }

    #[test]
    fn diagonal_slice_of_cube_is_a_rectangle() {
        let h = 0.5f64.sqrt();
        let s = Subspace::new(3, vec![v(&[h, h, 0.0]), v(&[0.0, 0.0, 1.0])]).unwrap();
        let slice = SymmetricBody::cube(3).intersect_subspace(&s).unwrap();
        assert_eq!(slice.dim(), 2);
        assert_eq!(slice.vertices().len(), 4);
        for p in slice.vertices() {
            assert_relative_eq!(p[0].abs(), 2f64.sqrt(), epsilon = 1e-12);
            assert_relative_eq!(p[1].abs(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn full_and_axis_slices() {
        let body = SymmetricBody::cross_polytope(3);
        let same = body.intersect_subspace(&Subspace::full(3)).unwrap();
        assert_eq!(same.vertices().len(), 6);
        for p in body.vertices() {
            assert!(same.vertices().iter().any(|q| (q - p).norm() < 1e-12));
        }
        let axis = Subspace::new(3, vec![v(&[1.0, 0.0, 0.0])]).unwrap();
        let seg = body.intersect_subspace(&axis).unwrap();
        assert_eq!(seg.dim(), 1);
        let mut ends: Vec<f64> = seg.vertices().iter().map(|p| p[0]).collect();
        ends.sort_by(f64::total_cmp);
        assert_relative_eq!(ends[0], -1.0, epsilon = 1e-12);
        assert_relative_eq!(ends[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn facets_of_cube() {
        let f = SymmetricBody::cube(3).facets().unwrap().to_vec();
        assert_eq!(f.len(), 6);
    }
}
