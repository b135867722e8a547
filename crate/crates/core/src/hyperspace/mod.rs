//! Finite hyperspaces `Z_[n]` under the Hausdorff metric, the incidence
//! space `Z⊆_[n]`, anchored branched covers, and convex selections.

mod cover;
mod selection;

pub use cover::{
    cover_to_map, isomorphism, map_to_cover, roundtrip_check, AnchoredCover, RoundtripReport, DEFAULT_ENUMERATION_CAP,
};
pub use selection::{
    check_singleton_continuity, slice_selection, ConvexSelection, ContinuityRecord, ContinuityReport, SingletonNet,
    SliceResult,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack for the triangle inequality.
pub const TRIANGLE_TOL: f64 = 1e-12;

/// A finite metric space with string point ids.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceRepr", into = "SpaceRepr")]
pub struct FiniteMetricSpace {
    points: Vec<String>,
    dist: Vec<Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SpaceRepr {
    points: Vec<String>,
    dist: Vec<Vec<f64>>,
}

impl TryFrom<SpaceRepr> for FiniteMetricSpace {
    type Error = Error;
    fn try_from(r: SpaceRepr) -> Result<Self> {
        FiniteMetricSpace::new(r.points, r.dist)
    }
}

impl From<FiniteMetricSpace> for SpaceRepr {
    fn from(s: FiniteMetricSpace) -> Self {
        SpaceRepr {
            points: s.points,
            dist: s.dist,
        }
    }
}

impl FiniteMetricSpace {
    pub fn new(points: Vec<String>, dist: Vec<Vec<f64>>) -> Result<Self> {
        let n = points.len();
        let mut problems = Vec::new();
        let mut ids = points.clone();
        ids.sort();
        ids.dedup();
        if ids.len() != n {
            problems.push("duplicate point ids".to_string());
        }
        if dist.len() != n || dist.iter().any(|r| r.len() != n) {
            return Err(Error::Validation(vec![format!("distance matrix must be {n}×{n}")]));
        }
        for i in 0..n {
            if dist[i][i] != 0.0 {
                problems.push(format!("d({0}, {0}) ≠ 0", points[i]));
            }
            for j in 0..n {
                let d = dist[i][j];
                if !d.is_finite() || d < 0.0 {
                    problems.push(format!("d({}, {}) is not a non-negative real", points[i], points[j]));
                } else if i != j && d == 0.0 {
                    problems.push(format!("distinct points {} and {} are at distance 0", points[i], points[j]));
                }
                if d != dist[j][i] {
                    problems.push(format!("d({}, {}) ≠ d({1}, {0})", points[i], points[j]));
                }
            }
        }
        if problems.is_empty() {
            'outer: for i in 0..n {
                for j in 0..n {
                    for k in 0..n {
                        if dist[i][k] > dist[i][j] + dist[j][k] + TRIANGLE_TOL {
                            problems.push(format!(
                                "triangle inequality fails for {}, {}, {}",
                                points[i], points[j], points[k]
                            ));
                            break 'outer;
                        }
                    }
                }
            }
        }
        if problems.is_empty() {
            Ok(FiniteMetricSpace { points, dist })
        } else {
            Err(Error::Validation(problems))
        }
    }

    /// The discrete metric (all distances 1).
    pub fn discrete<S: Into<String>>(ids: impl IntoIterator<Item = S>) -> Result<Self> {
        let points: Vec<String> = ids.into_iter().map(Into::into).collect();
        let n = points.len();
        let dist = (0..n)
            .map(|i| (0..n).map(|j| if i == j { 0.0 } else { 1.0 }).collect())
            .collect();
        Self::new(points, dist)
    }

    /// Points of `R^d` with the Euclidean metric, named `p0, p1, …`.
    pub fn euclidean(coords: &[Vec<f64>]) -> Result<Self> {
        let n = coords.len();
        let dist = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| {
                        coords[i]
                            .iter()
                            .zip(&coords[j])
                            .map(|(a, b)| (a - b) * (a - b))
                            .sum::<f64>()
                            .sqrt()
                    })
                    .collect()
            })
            .collect();
        Self::new((0..n).map(|i| format!("p{i}")).collect(), dist)
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn dist(&self, i: usize, j: usize) -> f64 {
        self.dist[i][j]
    }

    pub fn matrix(&self) -> &[Vec<f64>] {
        &self.dist
    }

    pub fn index(&self, id: &str) -> Option<usize> {
        self.points.iter().position(|p| p == id)
    }
}

/// A nonempty subset of a finite space, as sorted point indices.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct SubsetPoint {
    members: Vec<usize>,
}

impl TryFrom<Vec<usize>> for SubsetPoint {
    type Error = Error;
    fn try_from(v: Vec<usize>) -> Result<Self> {
        SubsetPoint::new(v)
    }
}

impl From<SubsetPoint> for Vec<usize> {
    fn from(s: SubsetPoint) -> Self {
        s.members
    }
}

impl SubsetPoint {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        members.sort_unstable();
        let len = members.len();
        members.dedup();
        if members.len() != len {
            return Err(Error::InvalidInput("subset lists a point twice".into()));
        }
        if members.is_empty() {
            return Err(Error::InvalidInput("subsets must be nonempty".into()));
        }
        Ok(SubsetPoint { members })
    }

    pub fn singleton(i: usize) -> Self {
        SubsetPoint { members: vec![i] }
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn with(&self, i: usize) -> SubsetPoint {
        let mut m = self.members.clone();
        if !self.contains(i) {
            m.push(i);
            m.sort_unstable();
        }
        SubsetPoint { members: m }
    }

    /// `{a,b,…}` with the ids of `space`.
    pub fn label(&self, space: &FiniteMetricSpace) -> String {
        let names: Vec<&str> = self.members.iter().map(|&i| space.points()[i].as_str()).collect();
        format!("{{{}}}", names.join(","))
    }
}

/// Hausdorff distance between two subsets of `z`.
pub fn hausdorff(z: &FiniteMetricSpace, a: &SubsetPoint, b: &SubsetPoint) -> f64 {
    let directed = |x: &SubsetPoint, y: &SubsetPoint| {
        x.members()
            .iter()
            .map(|&i| y.members().iter().map(|&j| z.dist(i, j)).fold(f64::INFINITY, f64::min))
            .fold(0.0f64, f64::max)
    };
    directed(a, b).max(directed(b, a))
}

/// All nonempty subsets of `{0, …, len−1}` with at most `n` elements,
/// ordered by size and then lexicographically.
pub fn subsets_up_to(len: usize, n: usize) -> Vec<SubsetPoint> {
    let mut out = Vec::new();
    for size in 1..=n.min(len) {
        let mut idx: Vec<usize> = (0..size).collect();
        loop {
            out.push(SubsetPoint { members: idx.clone() });
            let mut k = size;
            while k > 0 && idx[k - 1] == len - size + k - 1 {
                k -= 1;
            }
            if k == 0 {
                break;
            }
            idx[k - 1] += 1;
            for j in k..size {
                idx[j] = idx[j - 1] + 1;
            }
        }
    }
    out
}

/// `Z_[n]` with its subsets and the Hausdorff metric.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperspace {
    pub n: usize,
    pub subsets: Vec<SubsetPoint>,
    pub space: FiniteMetricSpace,
}

impl Hyperspace {
    pub fn position(&self, a: &SubsetPoint) -> Option<usize> {
        self.subsets.binary_search_by(|s| (s.len(), s.members()).cmp(&(a.len(), a.members()))).ok()
    }
}

pub fn build_hyperspace(z: &FiniteMetricSpace, n: usize) -> Result<Hyperspace> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if z.is_empty() {
        return Err(Error::InvalidInput("Z must be nonempty".into()));
    }
    let subsets = subsets_up_to(z.len(), n);
    let dist = subsets
        .iter()
        .map(|a| subsets.iter().map(|b| hausdorff(z, a, b)).collect())
        .collect();
    let space = FiniteMetricSpace::new(subsets.iter().map(|s| s.label(z)).collect(), dist)?;
    Ok(Hyperspace { n, subsets, space })
}

/// `Z⊆_[n] = {(z, A) : z ∈ A}` with the max metric and its projection to
/// `Z_[n]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Incidence {
    pub hyperspace: Hyperspace,
    /// `(point of Z, index into hyperspace.subsets)`.
    pub pairs: Vec<(usize, usize)>,
    pub space: FiniteMetricSpace,
}

impl Incidence {
    /// `π_Z`, as an index into the hyperspace subsets.
    pub fn projection(&self, k: usize) -> usize {
        self.pairs[k].1
    }

    /// Cardinality of every fiber of `π_Z`, by hyperspace index.
    pub fn fiber_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.hyperspace.subsets.len()];
        for &(_, a) in &self.pairs {
            sizes[a] += 1;
        }
        sizes
    }
}

pub fn build_incidence(z: &FiniteMetricSpace, n: usize) -> Result<Incidence> {
    let hyperspace = build_hyperspace(z, n)?;
    let pairs: Vec<(usize, usize)> = hyperspace
        .subsets
        .iter()
        .enumerate()
        .flat_map(|(k, a)| a.members().iter().map(move |&p| (p, k)))
        .collect();
    let dist = pairs
        .iter()
        .map(|&(p, a)| {
            pairs
                .iter()
                .map(|&(q, b)| z.dist(p, q).max(hyperspace.space.dist(a, b)))
                .collect()
        })
        .collect();
    let labels = pairs
        .iter()
        .map(|&(p, a)| format!("({},{})", z.points()[p], hyperspace.space.points()[a]))
        .collect();
    let space = FiniteMetricSpace::new(labels, dist)?;
    let inc = Incidence {
        hyperspace,
        pairs,
        space,
    };
    for (k, &size) in inc.fiber_sizes().iter().enumerate() {
        if size != inc.hyperspace.subsets[k].len() || size > n {
            return Err(Error::Internal("incidence fiber has the wrong cardinality".into()));
        }
    }
    Ok(inc)
}
