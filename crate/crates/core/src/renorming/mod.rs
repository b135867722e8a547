//! Multi-valued Hilbert renormings of a discrete bundle.
//!
//! Each vertex `x` of depth `k` receives a finite set of Hilbert norms on its
//! fiber. At depth 0 the set is the Löwner ellipsoid of the fiber ball. At
//! depth `k ≥ 1`, every section-generated slice `S` of the fiber contributes
//! the Löwner ellipsoids of `co(K ∪ (S⊥ ∩ ball))`, where `K` runs over the
//! depth-`(k−1)` construction applied to the slice body and `S⊥` is taken in
//! the inner product of the fiber's own Löwner ellipsoid.
//!
//! Gram matrices are always in the coordinates of the fiber basis.

mod lsc;
mod select;

pub use lsc::{verify_lsc, LscReport, Net, NetRecord, WitnessStep};
pub use select::{select, EdgeComparison, SelectedNorm, Selection};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::bundle::{self, Bundle, Stratification};
use crate::error::{Error, Result};
use crate::geometry::{Ellipsoid, Shape, Subspace, SymmetricBody};
use crate::linalg::{self, Vector};
use crate::loewner::{loewner_hull, mvee_points, slice_constant, HullGenerator, MveeConfig};
use crate::seminorm::{distortion, HilbertNorm, HilbertNormSet, Probe, Seminorm};

/// Generators closer than this (entrywise) are merged.
pub const GENERATOR_MERGE_TOL: f64 = 1e-9;
const MAX_SLICE_VECTORS: usize = 16;

/// The norm set at one vertex with its certificates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexRenorming {
    pub depth: usize,
    pub fiber_dim: usize,
    pub norms: HilbertNormSet,
    /// Largest identity distortion between the fiber norm and a generator.
    pub distortion: f64,
    /// Largest slice constant over the section-generated slices.
    pub slice_constant: f64,
    /// `dim · slice_constant`, the bound the distortion must respect.
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Renorming {
    pub per_vertex: BTreeMap<String, VertexRenorming>,
    pub distortion_sup: f64,
    pub distortion_bound: f64,
    pub strata: Stratification,
}

impl Renorming {
    pub fn norms(&self, vertex: &str) -> Result<&HilbertNormSet> {
        self.per_vertex
            .get(vertex)
            .map(|v| &v.norms)
            .ok_or_else(|| Error::InvalidInput(format!("no norm set at vertex {vertex}")))
    }

    pub fn within_bound(&self) -> bool {
        self.distortion_sup <= self.distortion_bound * (1.0 + 1e-9)
    }
}

struct Builder<'a> {
    ball: &'a SymmetricBody,
    vectors: Vec<Vector>,
    cfg: MveeConfig,
    memo: Vec<(usize, Subspace, Vec<Ellipsoid>)>,
}

impl<'a> Builder<'a> {
    fn new(ball: &'a SymmetricBody, vectors: Vec<Vector>, cfg: MveeConfig) -> Result<Self> {
        let vectors: Vec<Vector> = vectors.into_iter().filter(|v| v.norm() > 1e-12).collect();
        if vectors.len() > MAX_SLICE_VECTORS {
            return Err(Error::InvalidInput(format!(
                "{} section values at one vertex is too many for slice recursion (limit {MAX_SLICE_VECTORS})",
                vectors.len()
            )));
        }
        Ok(Builder {
            ball,
            vectors,
            cfg,
            memo: Vec::new(),
        })
    }

    fn body(&self, s: &Subspace) -> Result<SymmetricBody> {
        if s.is_full() {
            Ok(self.ball.clone())
        } else {
            self.ball.intersect_subspace(s)
        }
    }

    /// Section-generated subspaces of `s`, by rank; `s` itself comes last.
    fn slices_within(&self, s: &Subspace) -> Result<Vec<Subspace>> {
        let inside: Vec<&Vector> = self
            .vectors
            .iter()
            .filter(|v| s.contains_vector(v, bundle::FIBER_TOL))
            .collect();
        let mut found: Vec<Subspace> = Vec::new();
        for mask in 1u32..(1u32 << inside.len()) {
            let chosen: Vec<Vector> = (0..inside.len())
                .filter(|k| mask >> k & 1 == 1)
                .map(|k| inside[k].clone())
                .collect();
            let t = Subspace::span(s.ambient_dim(), &chosen)?;
            if t.rank() == s.rank() || t.is_empty() {
                continue;
            }
            if !found.iter().any(|u| u.same_as(&t, bundle::SLICE_TOL)) {
                found.push(t);
            }
        }
        found.sort_by_key(Subspace::rank);
        found.push(s.clone());
        Ok(found)
    }

    /// Generators for the slice `s` at recursion level `k`, as Grams in the
    /// coordinates of `s`'s basis.
    fn generators(&mut self, s: &Subspace, k: usize) -> Result<Vec<Ellipsoid>> {
        if let Some((_, old, gens)) = self.memo.iter().find(|(l, t, _)| *l == k && t.same_as(s, bundle::SLICE_TOL)) {
            if old.basis() == s.basis() {
                return Ok(gens.clone());
            }
            // Change of basis: new coordinates c' map to old ones by T = B⁺B'.
            let t = linalg::columns_to_matrix(
                s.rank(),
                &s.basis_vectors().iter().map(|v| old.coordinates(v).0).collect::<Vec<_>>(),
            );
            return gens.iter().map(|g| g.pull_back(&t)).collect();
        }
        let body = self.body(s)?;
        let own = mvee_points(body.vertices(), &self.cfg)?;
        let out = if k == 0 {
            vec![own]
        } else {
            let mut out: Vec<Ellipsoid> = Vec::new();
            for t in self.slices_within(s)? {
                let inner = self.generators(&t, k - 1)?;
                if t.rank() == s.rank() {
                    for g in inner {
                        push_distinct(&mut out, g);
                    }
                    continue;
                }
                let t_local = t.in_frame(s)?;
                let perp = t_local.orthogonal_complement(&own)?;
                let perp_body = body.intersect_subspace(&perp)?;
                for g in inner {
                    let hull = loewner_hull(
                        &[
                            HullGenerator::embedded(Shape::Ellipsoid(g), t_local.clone()),
                            HullGenerator::embedded(Shape::Body(perp_body.clone()), perp.clone()),
                        ],
                        &self.cfg,
                    )?;
                    push_distinct(&mut out, hull);
                }
            }
            out
        };
        self.memo.push((k, s.clone(), out.clone()));
        Ok(out)
    }
}

fn push_distinct(out: &mut Vec<Ellipsoid>, e: Ellipsoid) {
    if !out
        .iter()
        .any(|f| linalg::max_abs_diff(f.gram(), e.gram()) <= GENERATOR_MERGE_TOL)
    {
        out.push(e);
    }
}

fn fiber_parts(bundle: &Bundle, x: &str) -> Result<(usize, SymmetricBody, Vec<Vector>)> {
    let i = bundle
        .base()
        .index(x)
        .ok_or_else(|| Error::InvalidInput(format!("unknown vertex {x}")))?;
    let fiber = bundle.fiber(i);
    let ball = fiber.ball()?.clone();
    let coords = bundle
        .section_values(i)
        .iter()
        .map(|v| fiber.basis.coordinates(v).0)
        .collect();
    Ok((i, ball, coords))
}

fn into_set(gens: Vec<Ellipsoid>) -> Result<HilbertNormSet> {
    if gens.is_empty() {
        return Err(Error::Internal("slice recursion produced no generators".into()));
    }
    HilbertNormSet::new(gens.into_iter().map(HilbertNorm::from).collect())
}

/// The singleton `{K^L(ball_x)}`.
pub fn build_k0(bundle: &Bundle, x: &str, cfg: &MveeConfig) -> Result<HilbertNormSet> {
    let (_, ball, _) = fiber_parts(bundle, x)?;
    into_set(vec![mvee_points(ball.vertices(), cfg)?])
}

/// The depth-`k` norm set at `x`.
pub fn build_kk(bundle: &Bundle, x: &str, k: usize, cfg: &MveeConfig) -> Result<HilbertNormSet> {
    let (_, ball, coords) = fiber_parts(bundle, x)?;
    let mut builder = Builder::new(&ball, coords, *cfg)?;
    into_set(builder.generators(&Subspace::full(ball.dim()), k)?)
}

fn vertex_certificate(bundle: &Bundle, x: &str, depth: usize, cfg: &MveeConfig) -> Result<VertexRenorming> {
    let (_, ball, coords) = fiber_parts(bundle, x)?;
    let norms = build_kk(bundle, x, depth, cfg)?;
    let gauge = Seminorm::BodyGauge(ball.clone());
    let probe = Probe::Body(ball.clone());
    let mut worst = 0.0f64;
    for q in norms.generators() {
        worst = worst.max(distortion(&gauge, &Seminorm::Hilbert(q.clone()), &probe)?.distortion);
    }
    let own = mvee_points(ball.vertices(), cfg)?;
    let builder = Builder::new(&ball, coords, *cfg)?;
    let mut c_max = 1.0f64;
    for s in builder.slices_within(&Subspace::full(ball.dim()))? {
        if !s.is_full() {
            c_max = c_max.max(slice_constant(&ball, &s, &own)?);
        }
    }
    Ok(VertexRenorming {
        depth,
        fiber_dim: ball.dim(),
        norms,
        distortion: worst,
        slice_constant: c_max,
        bound: ball.dim() as f64 * c_max,
    })
}

/// Stratifies the base and builds the norm set at every vertex, stratum by
/// stratum (vertices of one stratum in parallel).
pub fn build_renorming(bundle: &Bundle, cfg: &MveeConfig) -> Result<Renorming> {
    bundle::validate(bundle)?;
    let strata = bundle::stratify(bundle)?;
    let mut per_vertex = BTreeMap::new();
    for level in 0..strata.levels() {
        let fresh: Vec<&String> = strata.strata[level]
            .iter()
            .filter(|v| strata.depth[*v] == level)
            .collect();
        let built: Vec<Result<(String, VertexRenorming)>> = fresh
            .par_iter()
            .map(|v| Ok(((*v).clone(), vertex_certificate(bundle, v, level, cfg)?)))
            .collect();
        for b in built {
            let (k, v) = b?;
            per_vertex.insert(k, v);
        }
    }
    let distortion_sup = per_vertex.values().map(|v| v.distortion).fold(0.0f64, f64::max);
    let distortion_bound = per_vertex.values().map(|v| v.bound).fold(0.0f64, f64::max);
    if !distortion_sup.is_finite() {
        return Err(Error::Internal("distortion supremum is not finite".into()));
    }
    Ok(Renorming {
        per_vertex,
        distortion_sup,
        distortion_bound,
        strata,
    })
}
