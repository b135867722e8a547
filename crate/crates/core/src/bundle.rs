//! Discrete bundles of finite-dimensional normed spaces over a finite graph.
//!
//! A [`Bundle`] sits inside a trivial bundle `R^D`: each vertex carries a
//! fiber (a subspace of `R^D` spanned by the section values there) with a
//! polytope unit ball written in the fiber's basis coordinates.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{check_dim, Error, Result};
use crate::geometry::{convex_hull_points, Subspace, SymmetricBody, MAX_DIM};
use crate::linalg::Vector;

/// Residual above which a section value is taken to leave its fiber.
pub const FIBER_TOL: f64 = 1e-10;
/// Principal-angle tolerance for identifying slices.
pub const SLICE_TOL: f64 = 1e-10;
const MAX_SECTIONS_FOR_SLICES: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub a: String,
    pub b: String,
    pub length: f64,
}

/// Connected simple graph with positive edge lengths. Vertices are kept in
/// sorted id order and edges with `a < b`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct BaseGraph {
    vertices: Vec<String>,
    edges: Vec<Edge>,
    adjacency: Vec<Vec<usize>>,
}

impl BaseGraph {
    pub fn new(vertices: Vec<String>, edges: Vec<Edge>) -> Result<Self> {
        let mut problems = Vec::new();
        let mut ids = vertices.clone();
        ids.sort();
        ids.dedup();
        if ids.len() != vertices.len() {
            problems.push("duplicate vertex ids".to_string());
        }
        if ids.is_empty() {
            problems.push("base graph has no vertices".to_string());
        }
        let index: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut adjacency = vec![Vec::new(); ids.len()];
        let mut canonical = Vec::with_capacity(edges.len());
        let mut seen = BTreeSet::new();
        for e in edges {
            let (Some(&i), Some(&j)) = (index.get(e.a.as_str()), index.get(e.b.as_str())) else {
                problems.push(format!("edge {}–{} names an unknown vertex", e.a, e.b));
                continue;
            };
            if i == j {
                problems.push(format!("self-loop at {}", e.a));
                continue;
            }
            if !(e.length.is_finite() && e.length > 0.0) {
                problems.push(format!("edge {}–{} has non-positive length", e.a, e.b));
                continue;
            }
            let (i, j) = (i.min(j), i.max(j));
            if !seen.insert((i, j)) {
                problems.push(format!("duplicate edge {}–{}", ids[i], ids[j]));
                continue;
            }
            adjacency[i].push(j);
            adjacency[j].push(i);
            canonical.push(Edge {
                a: ids[i].clone(),
                b: ids[j].clone(),
                length: e.length,
            });
        }
        canonical.sort_by(|x, y| (&x.a, &x.b).cmp(&(&y.a, &y.b)));
        adjacency.iter_mut().for_each(|n| n.sort_unstable());
        let graph = BaseGraph {
            vertices: ids,
            edges: canonical,
            adjacency,
        };
        if problems.is_empty() && !graph.is_connected() {
            problems.push("base graph is not connected".to_string());
        }
        if problems.is_empty() {
            Ok(graph)
        } else {
            Err(Error::Validation(problems))
        }
    }

    fn is_connected(&self) -> bool {
        let order = self.bfs_order(0);
        order.len() == self.vertices.len()
    }

    pub fn vertices(&self) -> &[String] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.vertices.binary_search_by(|v| v.as_str().cmp(id)).ok()
    }

    pub(crate) fn require(&self, id: &str) -> Result<usize> {
        self.index(id)
            .ok_or_else(|| Error::InvalidInput(format!("unknown vertex {id}")))
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adjacency[i]
    }

    pub fn edge_length(&self, i: usize, j: usize) -> Option<f64> {
        let (a, b) = (&self.vertices[i.min(j)], &self.vertices[i.max(j)]);
        self.edges.iter().find(|e| &e.a == a && &e.b == b).map(|e| e.length)
    }

    /// Breadth-first order from `root`, visiting neighbors in sorted order.
    pub fn bfs_order(&self, root: usize) -> Vec<usize> {
        let mut seen = vec![false; self.len()];
        let mut order = Vec::with_capacity(self.len());
        let mut queue = VecDeque::from([root]);
        seen[root] = true;
        while let Some(i) = queue.pop_front() {
            order.push(i);
            for &j in &self.adjacency[i] {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        order
    }
}

/// A section of the ambient trivial bundle: one vector per base vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Section {
    pub id: String,
    pub values: BTreeMap<String, Vec<f64>>,
}

impl Section {
    pub fn value(&self, vertex: &str) -> Option<Vector> {
        self.values.get(vertex).map(|v| Vector::from_row_slice(v))
    }
}

/// The fiber over one vertex: a subspace of `R^D` and a unit ball in the
/// coordinates of its basis. Rank-0 fibers have no ball.
#[derive(Debug, Clone, PartialEq)]
pub struct Fiber {
    pub basis: Subspace,
    pub ball: Option<SymmetricBody>,
}

impl Fiber {
    pub fn rank(&self) -> usize {
        self.basis.rank()
    }

    pub fn ball(&self) -> Result<&SymmetricBody> {
        self.ball
            .as_ref()
            .ok_or_else(|| Error::InvalidInput("rank-0 fiber has no unit ball".into()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Bundle {
    ambient_dim: usize,
    base: BaseGraph,
    fibers: Vec<Fiber>,
    sections: Vec<Section>,
}

#[derive(Serialize, Deserialize)]
struct VertexRepr {
    id: String,
    ball_vertices: Vec<Vec<f64>>,
    fiber_basis: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct BundleRepr {
    ambient_dim: usize,
    vertices: Vec<VertexRepr>,
    edges: Vec<Edge>,
    sections: Vec<Section>,
}

impl Serialize for Bundle {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let vertices = self
            .base
            .vertices()
            .iter()
            .zip(&self.fibers)
            .map(|(id, f)| VertexRepr {
                id: id.clone(),
                ball_vertices: f
                    .ball
                    .as_ref()
                    .map(|b| b.vertices().iter().map(|v| v.iter().copied().collect()).collect())
                    .unwrap_or_default(),
                fiber_basis: f.basis.basis_vectors().iter().map(|v| v.iter().copied().collect()).collect(),
            })
            .collect();
        BundleRepr {
            ambient_dim: self.ambient_dim,
            vertices,
            edges: self.base.edges().to_vec(),
            sections: self.sections.clone(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for Bundle {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = BundleRepr::deserialize(d)?;
        Bundle::from_repr(r).map_err(serde::de::Error::custom)
    }
}

impl Bundle {
    fn from_repr(r: BundleRepr) -> Result<Self> {
        let d = r.ambient_dim;
        let mut fibers = BTreeMap::new();
        let mut ids = Vec::new();
        for v in r.vertices {
            let basis = Subspace::new(d, v.fiber_basis.into_iter().map(Vector::from_vec).collect())
                .map_err(|e| Error::Validation(vec![format!("vertex {}: {e}", v.id)]))?;
            let ball = if v.ball_vertices.is_empty() {
                None
            } else {
                Some(
                    SymmetricBody::new(v.ball_vertices.into_iter().map(Vector::from_vec).collect())
                        .map_err(|e| Error::Validation(vec![format!("vertex {}: {e}", v.id)]))?,
                )
            };
            ids.push(v.id.clone());
            fibers.insert(v.id, Fiber { basis, ball });
        }
        let base = BaseGraph::new(ids, r.edges)?;
        Bundle::new(d, base, fibers, r.sections)
    }

    /// Assembles a bundle, checking only that the pieces fit together
    /// (every vertex has a fiber, every section a value of length `D` at
    /// every vertex). Use [`validate`] for the full invariants.
    pub fn new(
        ambient_dim: usize,
        base: BaseGraph,
        mut fibers: BTreeMap<String, Fiber>,
        sections: Vec<Section>,
    ) -> Result<Self> {
        if ambient_dim == 0 || ambient_dim > MAX_DIM {
            return Err(Error::InvalidInput(format!("ambient dimension must be in 1..={MAX_DIM}")));
        }
        let mut problems = Vec::new();
        let mut ordered = Vec::with_capacity(base.len());
        for id in base.vertices() {
            match fibers.remove(id) {
                Some(f) => {
                    if f.basis.ambient_dim() != ambient_dim {
                        problems.push(format!("vertex {id}: fiber basis lives in the wrong dimension"));
                    }
                    ordered.push(f);
                }
                None => problems.push(format!("vertex {id} has no fiber")),
            }
        }
        let mut section_ids = BTreeSet::new();
        for s in &sections {
            if !section_ids.insert(s.id.as_str()) {
                problems.push(format!("duplicate section id {}", s.id));
            }
            for id in base.vertices() {
                match s.values.get(id) {
                    Some(v) if v.len() == ambient_dim && v.iter().all(|x| x.is_finite()) => {}
                    Some(_) => problems.push(format!("section {} at {id}: wrong length or non-finite value", s.id)),
                    None => problems.push(format!("section {} has no value at {id}", s.id)),
                }
            }
            for id in s.values.keys() {
                if base.index(id).is_none() {
                    problems.push(format!("section {} names unknown vertex {id}", s.id));
                }
            }
        }
        if !problems.is_empty() {
            return Err(Error::Validation(problems));
        }
        Ok(Bundle {
            ambient_dim,
            base,
            fibers: ordered,
            sections,
        })
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn base(&self) -> &BaseGraph {
        &self.base
    }

    pub fn sections(&self) -> &[Section] {
        &self.sections
    }

    pub fn fiber(&self, i: usize) -> &Fiber {
        &self.fibers[i]
    }

    pub fn fiber_of(&self, id: &str) -> Result<&Fiber> {
        Ok(&self.fibers[self.base.require(id)?])
    }

    pub fn fiber_dims(&self) -> Vec<usize> {
        self.fibers.iter().map(Fiber::rank).collect()
    }

    /// Section values at vertex `i`, in section order.
    pub fn section_values(&self, i: usize) -> Vec<Vector> {
        let id = &self.base.vertices()[i];
        self.sections.iter().map(|s| s.value(id).expect("checked at construction")).collect()
    }
}

/// Per-vertex findings of [`validate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub fiber_dims: BTreeMap<String, usize>,
    /// Largest change of a section's fiber norm along each edge, divided by
    /// the edge length, keyed `"a–b"`.
    pub edge_variation: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
}

/// Checks every bundle invariant and reports fiber dimensions.
pub fn validate(bundle: &Bundle) -> Result<Diagnostics> {
    let mut problems = Vec::new();
    let mut fiber_dims = BTreeMap::new();
    for (i, id) in bundle.base.vertices().iter().enumerate() {
        let fiber = &bundle.fibers[i];
        let values = bundle.section_values(i);
        fiber_dims.insert(id.clone(), fiber.rank());
        let span = Subspace::span(bundle.ambient_dim, &values)?;
        for (s, v) in bundle.sections.iter().zip(&values) {
            let residual = fiber.basis.coordinates(v).1;
            if residual > FIBER_TOL * v.norm().max(1.0) {
                problems.push(format!(
                    "vertex {id}: section {} leaves the fiber (residual {residual:.3e})",
                    s.id
                ));
            }
        }
        if span.rank() != fiber.rank() {
            problems.push(format!(
                "vertex {id}: sections span rank {} but the fiber basis has rank {}",
                span.rank(),
                fiber.rank()
            ));
        }
        match (&fiber.ball, fiber.rank()) {
            (None, 0) => problems.push(format!("vertex {id}: rank-0 fiber; apply augment_trivial first")),
            (None, r) => problems.push(format!("vertex {id}: rank-{r} fiber has no unit ball")),
            (Some(b), r) if b.dim() != r => {
                problems.push(format!("vertex {id}: unit ball has dimension {} but the fiber rank is {r}", b.dim()))
            }
            _ => {}
        }
    }
    if !problems.is_empty() {
        return Err(Error::Validation(problems));
    }
    let mut edge_variation = BTreeMap::new();
    let mut warnings = Vec::new();
    for e in bundle.base.edges() {
        let (i, j) = (bundle.base.require(&e.a)?, bundle.base.require(&e.b)?);
        let mut worst = 0.0f64;
        for s in &bundle.sections {
            let a = fiber_norm(bundle, i, &s.value(&e.a).expect("checked"))?;
            let b = fiber_norm(bundle, j, &s.value(&e.b).expect("checked"))?;
            worst = worst.max((a - b).abs() / e.length);
        }
        edge_variation.insert(format!("{}–{}", e.a, e.b), worst);
        if bundle.fibers[i].rank() != bundle.fibers[j].rank() {
            warnings.push(format!(
                "fiber dimension jumps from {} to {} along {}–{}",
                bundle.fibers[i].rank(),
                bundle.fibers[j].rank(),
                e.a,
                e.b
            ));
        }
    }
    Ok(Diagnostics {
        fiber_dims,
        edge_variation,
        warnings,
    })
}

fn fiber_norm(bundle: &Bundle, i: usize, v: &Vector) -> Result<f64> {
    let fiber = &bundle.fibers[i];
    let (coords, residual) = fiber.basis.coordinates(v);
    if residual > FIBER_TOL * v.norm().max(1.0) {
        return Err(Error::Section {
            vertex: bundle.base.vertices()[i].clone(),
            residual,
        });
    }
    match &fiber.ball {
        Some(b) => b.gauge(&coords),
        None => Ok(0.0),
    }
}

/// Direct sum with a rank-1 trivial bundle: one more ambient coordinate, a
/// constant section along it, and each ball replaced by its hull with the
/// segment `±e_new`.
pub fn augment_trivial(bundle: &Bundle) -> Result<Bundle> {
    let d = bundle.ambient_dim + 1;
    let pad = |v: &Vector, len: usize| Vector::from_fn(len, |k, _| if k < v.len() { v[k] } else { 0.0 });
    let mut fibers = BTreeMap::new();
    for (id, f) in bundle.base.vertices().iter().zip(&bundle.fibers) {
        let r = f.rank();
        let mut columns: Vec<Vector> = f.basis.basis_vectors().iter().map(|c| pad(c, d)).collect();
        let mut e = Vector::zeros(d);
        e[d - 1] = 1.0;
        columns.push(e);
        let basis = Subspace::new(d, columns)?;
        let ball = match &f.ball {
            None => SymmetricBody::segment(1.0),
            Some(b) => {
                let mut pts: Vec<Vector> = b.vertices().iter().map(|v| pad(v, r + 1)).collect();
                let mut top = Vector::zeros(r + 1);
                top[r] = 1.0;
                pts.push(-&top);
                pts.push(top);
                convex_hull_points(&pts)?
            }
        };
        fibers.insert(id.clone(), Fiber { basis, ball: Some(ball) });
    }
    let mut sections: Vec<Section> = bundle
        .sections
        .iter()
        .map(|s| Section {
            id: s.id.clone(),
            values: s
                .values
                .iter()
                .map(|(k, v)| {
                    let mut w = v.clone();
                    w.push(0.0);
                    (k.clone(), w)
                })
                .collect(),
        })
        .collect();
    let mut id = "trivial".to_string();
    while sections.iter().any(|s| s.id == id) {
        id.push('\'');
    }
    let mut unit = vec![0.0; d];
    unit[d - 1] = 1.0;
    sections.push(Section {
        id,
        values: bundle.base.vertices().iter().map(|v| (v.clone(), unit.clone())).collect(),
    });
    Bundle::new(d, bundle.base.clone(), fibers, sections)
}

/// Nested vertex sets `X_0 ⊆ X_1 ⊆ … ⊆ X_K = all` and each vertex's depth.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Stratification {
    pub strata: Vec<Vec<String>>,
    pub depth: BTreeMap<String, usize>,
}

impl Stratification {
    pub fn levels(&self) -> usize {
        self.strata.len()
    }

    pub fn depth_of(&self, id: &str) -> Option<usize> {
        self.depth.get(id).copied()
    }
}

/// Stratifies the base by locally minimal fiber dimension, with the closed
/// star of a vertex as its neighbourhood: `x ∈ X_0` when no neighbour has a
/// smaller fiber, and `x ∈ X_k` when every neighbour is in `X_{k−1}` or has a
/// fiber at least as large.
pub fn stratify(bundle: &Bundle) -> Result<Stratification> {
    let g = &bundle.base;
    let dims = bundle.fiber_dims();
    let n = g.len();
    let mut member = vec![false; n];
    let mut depth = vec![usize::MAX; n];
    let mut strata = Vec::new();
    let distinct: BTreeSet<usize> = dims.iter().copied().collect();
    for k in 0..=distinct.len() {
        let next: Vec<bool> = (0..n)
            .map(|i| {
                member[i]
                    || g.neighbors(i)
                        .iter()
                        .all(|&j| (k > 0 && member[j]) || dims[j] >= dims[i])
            })
            .collect();
        for i in 0..n {
            if next[i] && depth[i] == usize::MAX {
                depth[i] = k;
            }
        }
        member = next;
        strata.push((0..n).filter(|&i| member[i]).map(|i| g.vertices()[i].clone()).collect::<Vec<_>>());
        if member.iter().all(|&m| m) {
            return Ok(Stratification {
                strata,
                depth: (0..n).map(|i| (g.vertices()[i].clone(), depth[i])).collect(),
            });
        }
    }
    Err(Error::Internal("stratification did not terminate".into()))
}

/// Spans of the nonempty subsets of the section values at `vertex` with rank
/// at most `max_rank`, deduplicated, ordered by rank and then by subset; the
/// full fiber is always present (last).
pub fn enumerate_slices(bundle: &Bundle, vertex: &str, max_rank: usize) -> Result<Vec<Subspace>> {
    let i = bundle.base.require(vertex)?;
    let values = bundle.section_values(i);
    let m = values.len();
    if m > MAX_SECTIONS_FOR_SLICES {
        return Err(Error::InvalidInput(format!(
            "{m} sections is too many for slice enumeration (limit {MAX_SECTIONS_FOR_SLICES})"
        )));
    }
    let d = bundle.ambient_dim;
    let full = Subspace::span(d, &values)?;
    let mut found: Vec<Subspace> = Vec::new();
    for mask in 1u32..(1u32 << m) {
        let chosen: Vec<Vector> = (0..m).filter(|k| mask >> k & 1 == 1).map(|k| values[k].clone()).collect();
        let s = Subspace::span(d, &chosen)?;
        if s.is_empty() || s.rank() > max_rank || s.rank() == full.rank() {
            continue;
        }
        if !found.iter().any(|t| t.same_as(&s, SLICE_TOL)) {
            found.push(s);
        }
    }
    found.sort_by_key(Subspace::rank);
    if !full.is_empty() {
        found.push(full);
    }
    Ok(found)
}

/// Fiber norms of a section at every vertex and their supremum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProfile {
    pub values: BTreeMap<String, f64>,
    pub sup: f64,
}

pub fn section_norm_profile(bundle: &Bundle, s: &Section) -> Result<NormProfile> {
    let mut values = BTreeMap::new();
    let mut sup = 0.0f64;
    let mut worst: Option<(String, f64)> = None;
    for (i, id) in bundle.base.vertices().iter().enumerate() {
        let v = s
            .value(id)
            .ok_or_else(|| Error::InvalidInput(format!("section {} has no value at {id}", s.id)))?;
        check_dim(bundle.ambient_dim, v.len())?;
        let (_, residual) = bundle.fibers[i].basis.coordinates(&v);
        if residual > FIBER_TOL * v.norm().max(1.0) && worst.as_ref().is_none_or(|w| residual > w.1) {
            worst = Some((id.clone(), residual));
        }
        if worst.is_none() {
            let x = fiber_norm(bundle, i, &v)?;
            sup = sup.max(x);
            values.insert(id.clone(), x);
        }
    }
    if let Some((vertex, residual)) = worst {
        return Err(Error::Section { vertex, residual });
    }
    Ok(NormProfile { values, sup })
}

/// Ready-made bundles used by tests, examples and the command line.
pub mod fixtures {
    use super::*;
    use rand::Rng;
    use rand_distr::StandardNormal;

    type Named = (String, Box<dyn Fn(usize) -> Vec<f64>>);

    fn unit(d: usize, k: usize) -> Vec<f64> {
        let mut e = vec![0.0; d];
        e[k] = 1.0;
        e
    }

    /// Fiber spanned by the nonzero coordinate axes among the section
    /// values, with the cube of that dimension as its ball.
    fn cube_fiber(d: usize, values: &[Vec<f64>]) -> Fiber {
        let axes: Vec<Vector> = (0..d)
            .filter(|&k| values.iter().any(|v| v[k] != 0.0))
            .map(|k| Vector::from_vec(unit(d, k)))
            .collect();
        let r = axes.len();
        Fiber {
            basis: Subspace::new(d, axes).expect("coordinate axes are independent"),
            ball: (r > 0).then(|| SymmetricBody::cube(r)),
        }
    }

    fn assemble(
        d: usize,
        ids: &[String],
        edges: Vec<Edge>,
        sections: Vec<Named>,
    ) -> Bundle {
        let base = BaseGraph::new(ids.to_vec(), edges).expect("fixture graph is valid");
        let secs: Vec<Section> = sections
            .iter()
            .map(|(name, f)| Section {
                id: name.clone(),
                values: ids.iter().enumerate().map(|(i, id)| (id.clone(), f(i))).collect(),
            })
            .collect();
        let fibers = ids
            .iter()
            .enumerate()
            .map(|(i, id)| {
                let vals: Vec<Vec<f64>> = sections.iter().map(|(_, f)| f(i)).collect();
                (id.clone(), cube_fiber(d, &vals))
            })
            .collect();
        Bundle::new(d, base, fibers, secs).expect("fixture bundle is valid")
    }

    fn path_edges(ids: &[String], ts: &[f64]) -> Vec<Edge> {
        (1..ids.len())
            .map(|k| Edge {
                a: ids[k - 1].clone(),
                b: ids[k].clone(),
                length: (ts[k] - ts[k - 1]).abs().max(f64::MIN_POSITIVE),
            })
            .collect()
    }

    fn ids(prefix: &str, n: usize) -> Vec<String> {
        let width = (n.max(2) - 1).to_string().len();
        (0..n).map(|k| format!("{prefix}{k:0width$}")).collect()
    }

    /// Sections `e_1` and `t·e_2` over the given parameter values; the
    /// fiber is the segment where `t = 0` and the square elsewhere. Edges
    /// join consecutive parameters, with length `|Δt|`.
    pub fn jump_path(ts: &[f64]) -> Bundle {
        let names = ids("x", ts.len());
        let edges = path_edges(&names, ts);
        jump_bundle(&names, ts, edges)
    }

    fn jump_bundle(names: &[String], ts: &[f64], edges: Vec<Edge>) -> Bundle {
        let t1 = ts.to_vec();
        assemble(
            2,
            names,
            edges,
            vec![
                ("s1".to_string(), Box::new(|_| vec![1.0, 0.0])),
                ("s2".to_string(), Box::new(move |i| vec![0.0, t1[i]])),
            ],
        )
    }

    /// Fiber dimensions (1, 2, 2) over `t ∈ {0, 1/2, 1}`.
    pub fn jump_path_122() -> Bundle {
        jump_path(&[0.0, 0.5, 1.0])
    }

    /// Parameters `0, 2⁻⁷, 2⁻⁶, …, 2⁻¹, 1` of [`refined_jump_path`].
    pub fn refined_parameters() -> Vec<f64> {
        let mut ts = vec![0.0];
        ts.extend((1..=8).map(|k| 2f64.powi(k - 8)));
        ts
    }

    /// The (1, 2, 2) jump bundle on nine vertices `x0 … x8` at dyadic
    /// parameters accumulating at `t = 0`. Besides the path edges, `x0` is
    /// joined to every `x_k` with `t < 1`, so that each of those vertices
    /// sees the degenerate fiber in its closed star.
    pub fn refined_jump_path() -> Bundle {
        let ts = refined_parameters();
        let names = ids("x", ts.len());
        let mut edges = path_edges(&names, &ts);
        for k in 2..ts.len() - 1 {
            edges.push(Edge {
                a: names[0].clone(),
                b: names[k].clone(),
                length: ts[k],
            });
        }
        jump_bundle(&names, &ts, edges)
    }

    /// Constant sections `e_1, e_2` with square fibers on a path of `n`
    /// vertices with unit edges.
    pub fn homogeneous_square(n: usize) -> Bundle {
        let names = ids("v", n);
        let ts: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let edges = path_edges(&names, &ts);
        assemble(
            2,
            &names,
            edges,
            vec![("s1".to_string(), Box::new(|_| vec![1.0, 0.0])), ("s2".to_string(), Box::new(|_| vec![0.0, 1.0]))],
        )
    }

    /// Constant coordinate sections in dimension `dim` with cube fibers on a
    /// path of `n` vertices.
    pub fn trivial_cube(dim: usize, n: usize) -> Bundle {
        let names = ids("v", n);
        let ts: Vec<f64> = (0..n).map(|k| k as f64).collect();
        let edges = path_edges(&names, &ts);
        let sections: Vec<Named> = (0..dim)
            .map(|k| (format!("s{}", k + 1), Box::new(move |_| unit(dim, k)) as Box<dyn Fn(usize) -> Vec<f64>>))
            .collect();
        assemble(dim, &names, edges, sections)
    }

    /// Fiber dimensions (1, 2, 3) over `t ∈ {0, 1/2, 1}`: sections `e_1`,
    /// `t·e_2`, `max(0, 2t − 1)·e_3`, cube fibers.
    pub fn dims_123() -> Bundle {
        let ts = [0.0, 0.5, 1.0];
        let names = ids("x", 3);
        let edges = path_edges(&names, &ts);
        assemble(
            3,
            &names,
            edges,
            vec![
                ("s1".to_string(), Box::new(|_| vec![1.0, 0.0, 0.0])),
                ("s2".to_string(), Box::new(move |i| vec![0.0, ts[i], 0.0])),
                ("s3".to_string(), Box::new(move |i| vec![0.0, 0.0, (2.0 * ts[i] - 1.0).max(0.0)])),
            ],
        )
    }

    /// Symmetric hull of `points` Gaussian samples (and their negatives) in
    /// `R^dim`; retries until the sample spans.
    pub fn random_symmetric_polytope<R: Rng>(dim: usize, points: usize, rng: &mut R) -> SymmetricBody {
        loop {
            let mut pts = Vec::with_capacity(2 * points);
            for _ in 0..points.max(dim) {
                let p = Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal));
                pts.push(-&p);
                pts.push(p);
            }
            if let Ok(b) = convex_hull_points(&pts) {
                return b;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn validate_examples() {
        let d = validate(&trivial_cube(2, 3)).unwrap();
        assert_eq!(d.fiber_dims.values().copied().collect::<Vec<_>>(), vec![2, 2, 2]);
        let d = validate(&jump_path_122()).unwrap();
        assert_eq!(d.fiber_dims.values().copied().collect::<Vec<_>>(), vec![1, 2, 2]);
        assert!(!d.warnings.is_empty());
    }

    #[test]
    fn rank_zero_fiber_needs_augmentation() {
        let b = jump_path(&[0.0, 1.0]);
        // Drop s1 so the fiber over t = 0 is zero-dimensional.
        let mut json = serde_json::to_value(&b).unwrap();
        json["sections"].as_array_mut().unwrap().remove(0);
        json["vertices"][0]["fiber_basis"] = serde_json::json!([]);
        json["vertices"][0]["ball_vertices"] = serde_json::json!([]);
        json["vertices"][1]["fiber_basis"] = serde_json::json!([[0.0, 1.0]]);
        json["vertices"][1]["ball_vertices"] = serde_json::json!([[1.0], [-1.0]]);
        let degenerate: Bundle = serde_json::from_value(json).unwrap();
        assert!(matches!(validate(&degenerate), Err(Error::Validation(_))));
        let fixed = augment_trivial(&degenerate).unwrap();
        validate(&fixed).unwrap();
        assert_eq!(fixed.fiber_dims(), vec![1, 2]);
        assert_eq!(fixed.fiber(0).ball.as_ref().unwrap().vertices().len(), 2);
    }

    #[test]
    fn augmentation_gives_bipyramid() {
        let b = augment_trivial(&trivial_cube(2, 3)).unwrap();
        validate(&b).unwrap();
        assert_eq!(b.fiber_dims(), vec![3, 3, 3]);
        let ball = b.fiber(0).ball.as_ref().unwrap();
        assert_eq!(ball.vertices().len(), 6);
        assert_eq!(ball.facets().unwrap().len(), 8);
        let twice = augment_trivial(&b).unwrap();
        assert_eq!(twice.fiber_dims(), vec![4, 4, 4]);
    }

    #[test]
    fn stratify_examples() {
        let s = stratify(&trivial_cube(2, 4)).unwrap();
        assert_eq!(s.levels(), 1);
        let s = stratify(&jump_path_122()).unwrap();
        assert_eq!(s.strata, vec![vec!["x0", "x2"], vec!["x0", "x1", "x2"]]);
        let s = stratify(&dims_123()).unwrap();
        assert_eq!(s.strata, vec![vec!["x0"], vec!["x0", "x1"], vec!["x0", "x1", "x2"]]);
        let s = stratify(&refined_jump_path()).unwrap();
        assert_eq!(s.strata[0], vec!["x0", "x8"]);
        assert_eq!(s.strata.len(), 2);
    }

    #[test]
    fn slice_examples() {
        let b = trivial_cube(2, 1);
        assert_eq!(enumerate_slices(&b, "v0", 2).unwrap().len(), 3);
        let b = trivial_cube(3, 1);
        assert_eq!(enumerate_slices(&b, "v0", 3).unwrap().len(), 7);
        assert_eq!(enumerate_slices(&b, "v0", 1).unwrap().len(), 4);
        let b = jump_path_122();
        // At t = 0 both sections lie on the same line as the fiber.
        assert_eq!(enumerate_slices(&b, "x0", 2).unwrap().len(), 1);
    }

    #[test]
    fn norm_profile_examples() {
        let b = jump_path_122();
        let p = section_norm_profile(&b, &b.sections()[1]).unwrap();
        assert_eq!(p.values.values().copied().collect::<Vec<_>>(), vec![0.0, 0.5, 1.0]);
        assert_relative_eq!(p.sup, 1.0);
        let stray = Section {
            id: "stray".into(),
            values: b.base().vertices().iter().map(|v| (v.clone(), vec![0.0, 1.0])).collect(),
        };
        assert!(matches!(section_norm_profile(&b, &stray), Err(Error::Section { .. })));
    }

    #[test]
    fn json_round_trip() {
        let b = refined_jump_path();
        let text = serde_json::to_string(&b).unwrap();
        let back: Bundle = serde_json::from_str(&text).unwrap();
        assert_eq!(back, b);
    }
}
