//! A single-valued choice from a multi-valued renorming.
//!
//! Vertices are visited breadth-first from a root. The root takes the
//! barycenter of its generators; every later vertex takes the member of its
//! norm set nearest, in Frobenius norm, to its parent's choice, both
//! restricted to the intersection of the two fibers.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::Renorming;
use crate::bundle::Bundle;
use crate::error::{Error, Result};
use crate::geometry::Subspace;
use crate::linalg::{self, Matrix};
use crate::qp;
use crate::seminorm::{HilbertNorm, HilbertNormSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectedNorm {
    pub gram: Vec<Vec<f64>>,
    /// Simplex coefficients over the generators of the vertex's norm set.
    pub coefficients: Vec<f64>,
    /// The vertex whose choice this one was fitted to (none at the root).
    pub parent: Option<String>,
}

/// Comparison of the choices at the two ends of an edge.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EdgeComparison {
    pub a: String,
    pub b: String,
    pub common_dim: usize,
    /// Frobenius distance of the two choices on the common subspace.
    pub distance: f64,
    /// Frobenius norm of the larger fiber's choice on the Euclidean
    /// complement of the common subspace.
    pub complement: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub root: String,
    pub choice: BTreeMap<String, SelectedNorm>,
    pub edges: Vec<EdgeComparison>,
    /// Largest `distance / length` over the edges.
    pub modulus: f64,
}

/// Restriction of a fiber Gram to an ambient subspace `u ⊆ fiber`:
/// `(B⁺U)ᵀ G (B⁺U)`.
fn restrict(fiber: &Subspace, gram: &Matrix, u: &Matrix) -> Matrix {
    let cols: Vec<_> = u.column_iter().map(|c| fiber.coordinates(&c.into_owned()).0).collect();
    let c = linalg::columns_to_matrix(fiber.rank(), &cols);
    linalg::symmetrize(&(c.transpose() * gram * c))
}

/// Nearest member of `set` to `target` on the subspace `u`.
fn fit(set: &HilbertNormSet, fiber: &Subspace, u: &Matrix, target: &Matrix) -> Result<Vec<f64>> {
    let restricted: Vec<HilbertNorm> = set
        .generators()
        .iter()
        .map(|g| HilbertNorm::new(restrict(fiber, g.gram(), u)))
        .collect::<Result<_>>()?;
    let m = restricted.len();
    let h = Matrix::from_fn(m, m, |i, j| linalg::frobenius_inner(restricted[i].gram(), restricted[j].gram()));
    let b = linalg::Vector::from_fn(m, |i, _| linalg::frobenius_inner(restricted[i].gram(), target));
    Ok(qp::simplex_qp(&h, &b, 20_000, 1e-16).iter().copied().collect())
}

/// Breadth-first selection from `root` (default: the first vertex in id
/// order). Deterministic for a given renorming.
pub fn select(renorming: &Renorming, bundle: &Bundle, root: Option<&str>) -> Result<Selection> {
    let g = bundle.base();
    let root_idx = match root {
        Some(r) => g.require(r)?,
        None => 0,
    };
    let order = g.bfs_order(root_idx);
    let mut parent = vec![usize::MAX; g.len()];
    for &i in &order {
        for &j in g.neighbors(i) {
            if parent[j] == usize::MAX && j != root_idx {
                parent[j] = i;
            }
        }
    }
    let mut grams: Vec<Option<Matrix>> = vec![None; g.len()];
    let mut choice = BTreeMap::new();
    for &i in &order {
        let id = &g.vertices()[i];
        let set = renorming.norms(id)?;
        let coefficients = if i == root_idx {
            vec![1.0 / set.len() as f64; set.len()]
        } else {
            let p = parent[i];
            let (fp, fi) = (&bundle.fiber(p).basis, &bundle.fiber(i).basis);
            let common = fp.intersection(fi)?;
            if common.is_empty() {
                vec![1.0 / set.len() as f64; set.len()]
            } else {
                let u = common.basis().clone();
                let parent_gram = grams[p].as_ref().ok_or_else(|| Error::Internal("parent not chosen".into()))?;
                let target = restrict(fp, parent_gram, &u);
                fit(set, fi, &u, &target)?
            }
        };
        let chosen = set.combination(&coefficients)?;
        grams[i] = Some(chosen.gram().clone());
        choice.insert(
            id.clone(),
            SelectedNorm {
                gram: linalg::matrix_to_rows(chosen.gram()),
                coefficients,
                parent: (i != root_idx).then(|| g.vertices()[parent[i]].clone()),
            },
        );
    }

    let mut edges = Vec::new();
    let mut modulus = 0.0f64;
    for e in g.edges() {
        let (i, j) = (g.require(&e.a)?, g.require(&e.b)?);
        let (fi, fj) = (&bundle.fiber(i).basis, &bundle.fiber(j).basis);
        let (gi, gj) = (grams[i].as_ref().expect("all chosen"), grams[j].as_ref().expect("all chosen"));
        let common = fi.intersection(fj)?;
        let distance = if common.is_empty() {
            0.0
        } else {
            let u = common.basis();
            (restrict(fi, gi, u) - restrict(fj, gj, u)).norm()
        };
        let (big, big_gram) = if fi.rank() >= fj.rank() { (fi, gi) } else { (fj, gj) };
        let complement = if common.rank() == big.rank() {
            0.0
        } else {
            let p = if common.is_empty() { Matrix::zeros(big.ambient_dim(), big.ambient_dim()) } else { common.projector() };
            let rest = (big.projector() - p) * big.orthonormal_basis();
            let w = linalg::orthonormal_columns(&rest, linalg::RANK_TOL);
            restrict(big, big_gram, &w).norm()
        };
        let ratio = distance / e.length;
        modulus = modulus.max(ratio);
        edges.push(EdgeComparison {
            a: e.a.clone(),
            b: e.b.clone(),
            common_dim: common.rank(),
            distance,
            complement,
            ratio,
        });
    }
    Ok(Selection {
        root: g.vertices()[root_idx].clone(),
        choice,
        edges,
        modulus,
    })
}
