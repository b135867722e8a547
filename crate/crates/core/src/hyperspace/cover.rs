//! Anchored branched covers of a finite space and their correspondence with
//! maps into the hyperspace.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hausdorff, subsets_up_to, FiniteMetricSpace, SubsetPoint};
use crate::error::{Error, Result};

pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

/// A surjection `proj: Y → X` with an anchor `Y → Z` injective on fibers.
/// `proj` and `anchor` hold point indices, one entry per point of `Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CoverRepr", into = "CoverRepr")]
pub struct AnchoredCover {
    total: FiniteMetricSpace,
    base: FiniteMetricSpace,
    proj: Vec<usize>,
    anchor: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CoverRepr {
    #[serde(rename = "Y")]
    total: FiniteMetricSpace,
    #[serde(rename = "X")]
    base: FiniteMetricSpace,
    proj: Vec<usize>,
    anchor: Vec<usize>,
}

impl TryFrom<CoverRepr> for AnchoredCover {
    type Error = Error;
    fn try_from(r: CoverRepr) -> Result<Self> {
        AnchoredCover::new(r.total, r.base, r.proj, r.anchor)
    }
}

impl From<AnchoredCover> for CoverRepr {
    fn from(c: AnchoredCover) -> Self {
        CoverRepr {
            total: c.total,
            base: c.base,
            proj: c.proj,
            anchor: c.anchor,
        }
    }
}

impl AnchoredCover {
    /// Checks shapes and surjectivity; fiber-injectivity of the anchor is
    /// checked by [`cover_to_map`], which reports the colliding pair.
    pub fn new(total: FiniteMetricSpace, base: FiniteMetricSpace, proj: Vec<usize>, anchor: Vec<usize>) -> Result<Self> {
        if proj.len() != total.len() || anchor.len() != total.len() {
            return Err(Error::InvalidInput("proj and anchor need one entry per point of Y".into()));
        }
        let mut hit = vec![false; base.len()];
        for &x in &proj {
            *hit.get_mut(x)
                .ok_or_else(|| Error::InvalidInput(format!("proj names point {x} outside X")))? = true;
        }
        if let Some(x) = hit.iter().position(|h| !h) {
            return Err(Error::InvalidInput(format!("proj misses {}", base.points()[x])));
        }
        Ok(AnchoredCover {
            total,
            base,
            proj,
            anchor,
        })
    }

    pub fn total(&self) -> &FiniteMetricSpace {
        &self.total
    }

    pub fn base(&self) -> &FiniteMetricSpace {
        &self.base
    }

    pub fn proj(&self) -> &[usize] {
        &self.proj
    }

    pub fn anchor(&self) -> &[usize] {
        &self.anchor
    }

    pub fn fiber(&self, x: usize) -> Vec<usize> {
        (0..self.proj.len()).filter(|&y| self.proj[y] == x).collect()
    }
}

/// `g(x) = anchor(proj⁻¹(x))`.
pub fn cover_to_map(cover: &AnchoredCover, z: &FiniteMetricSpace, n: usize) -> Result<Vec<SubsetPoint>> {
    let mut g = Vec::with_capacity(cover.base.len());
    for x in 0..cover.base.len() {
        let fiber = cover.fiber(x);
        if fiber.len() > n {
            return Err(Error::InvalidInput(format!(
                "fiber over {} has {} points, more than n = {n}",
                cover.base.points()[x],
                fiber.len()
            )));
        }
        let mut seen: BTreeMap<usize, usize> = BTreeMap::new();
        for &y in &fiber {
            let a = cover.anchor[y];
            if a >= z.len() {
                return Err(Error::InvalidInput(format!("anchor names point {a} outside Z")));
            }
            if let Some(&other) = seen.get(&a) {
                return Err(Error::Anchor {
                    base: cover.base.points()[x].clone(),
                    first: cover.total.points()[other].clone(),
                    second: cover.total.points()[y].clone(),
                    target: z.points()[a].clone(),
                });
            }
            seen.insert(a, y);
        }
        g.push(SubsetPoint::new(seen.into_keys().collect())?);
    }
    Ok(g)
}

/// The pullback of `Z⊆_[n] → Z_[n]` along `g`: points `(x, (z, g(x)))` for
/// `z ∈ g(x)`, ordered by `x` and then `z`, with the max metric.
pub fn map_to_cover(g: &[SubsetPoint], x: &FiniteMetricSpace, z: &FiniteMetricSpace, n: usize) -> Result<AnchoredCover> {
    if g.len() != x.len() {
        return Err(Error::InvalidInput("the map needs one value per point of X".into()));
    }
    let mut proj = Vec::new();
    let mut anchor = Vec::new();
    let mut labels = Vec::new();
    for (i, a) in g.iter().enumerate() {
        if a.len() > n || a.members().iter().any(|&m| m >= z.len()) {
            return Err(Error::InvalidInput(format!("value at {} is not a point of Z_[{n}]", x.points()[i])));
        }
        for &m in a.members() {
            proj.push(i);
            anchor.push(m);
            labels.push(format!("({},({},{}))", x.points()[i], z.points()[m], a.label(z)));
        }
    }
    let k = proj.len();
    let dist = (0..k)
        .map(|p| {
            (0..k)
                .map(|q| {
                    x.dist(proj[p], proj[q])
                        .max(z.dist(anchor[p], anchor[q]))
                        .max(hausdorff(z, &g[proj[p]], &g[proj[q]]))
                })
                .collect()
        })
        .collect();
    AnchoredCover::new(FiniteMetricSpace::new(labels, dist)?, x.clone(), proj, anchor)
}

/// The bijection `Y₁ → Y₂` commuting with `proj` and `anchor`, if any.
pub fn isomorphism(c1: &AnchoredCover, c2: &AnchoredCover) -> Option<Vec<usize>> {
    if c1.total.len() != c2.total.len() || c1.base != c2.base {
        return None;
    }
    let mut map = Vec::with_capacity(c1.total.len());
    let mut used = vec![false; c2.total.len()];
    for y in 0..c1.total.len() {
        let matches: Vec<usize> = (0..c2.total.len())
            .filter(|&w| c2.proj[w] == c1.proj[y] && c2.anchor[w] == c1.anchor[y])
            .collect();
        match matches.as_slice() {
            [w] if !used[*w] => {
                used[*w] = true;
                map.push(*w);
            }
            _ => return None,
        }
    }
    Some(map)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundtripReport {
    pub x_points: usize,
    pub z_points: usize,
    pub n: usize,
    pub maps: usize,
    pub labeled_covers: usize,
    pub cover_classes: usize,
    /// Maps `g` with `cover_to_map(map_to_cover(g)) ≠ g`.
    pub map_failures: usize,
    /// Covers not isomorphic to `map_to_cover(cover_to_map(c))`.
    pub cover_failures: usize,
    pub pass: bool,
}

fn checked_power(base: u128, exp: usize) -> u128 {
    (0..exp).fold(1u128, |acc, _| acc.saturating_mul(base))
}

/// Ordered tuples of distinct points of `Z`, of length 1 to `n`.
fn injective_tuples(z: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut current = Vec::new();
    fn grow(z: usize, n: usize, current: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if !current.is_empty() {
            out.push(current.clone());
        }
        if current.len() == n {
            return;
        }
        for p in 0..z {
            if !current.contains(&p) {
                current.push(p);
                grow(z, n, current, out);
                current.pop();
            }
        }
    }
    grow(z, n, &mut current, &mut out);
    out
}

/// Decodes `index` in mixed radix `radix` (least significant digit first).
fn digits(mut index: usize, radix: usize, len: usize) -> Vec<usize> {
    (0..len)
        .map(|_| {
            let d = index % radix;
            index /= radix;
            d
        })
        .collect()
}

/// Cover with fiber over `x_i` given by the anchor tuple `tuples[i]`; fiber
/// points are labelled by position, so reordering a tuple yields an
/// isomorphic but differently labelled cover.
fn labeled_cover(x: &FiniteMetricSpace, z: &FiniteMetricSpace, tuples: &[&Vec<usize>]) -> Result<AnchoredCover> {
    let mut proj = Vec::new();
    let mut anchor = Vec::new();
    let mut labels = Vec::new();
    for (i, t) in tuples.iter().enumerate() {
        for (k, &a) in t.iter().enumerate() {
            proj.push(i);
            anchor.push(a);
            labels.push(format!("{}#{k}", x.points()[i]));
        }
    }
    let m = proj.len();
    let dist = (0..m)
        .map(|p| {
            (0..m)
                .map(|q| x.dist(proj[p], proj[q]).max(z.dist(anchor[p], anchor[q])))
                .collect()
        })
        .collect();
    AnchoredCover::new(FiniteMetricSpace::new(labels, dist)?, x.clone(), proj, anchor)
}

/// Enumerates every map `X → Z_[n]` and every labelled anchored cover,
/// groups covers into isomorphism classes, and checks both round trips.
pub fn roundtrip_check(x: &FiniteMetricSpace, z: &FiniteMetricSpace, n: usize, cap: u128) -> Result<RoundtripReport> {
    if n == 0 || x.is_empty() || z.is_empty() {
        return Err(Error::InvalidInput("X and Z must be nonempty and n ≥ 1".into()));
    }
    let subsets = subsets_up_to(z.len(), n);
    let tuples = injective_tuples(z.len(), n);
    let maps_needed = checked_power(subsets.len() as u128, x.len());
    let covers_needed = checked_power(tuples.len() as u128, x.len());
    let needed = maps_needed.max(covers_needed);
    if needed > cap {
        return Err(Error::EnumerationCap { needed, cap });
    }
    let (maps, labeled) = (maps_needed as usize, covers_needed as usize);

    let map_failures: usize = (0..maps)
        .into_par_iter()
        .map(|index| -> Result<usize> {
            let g: Vec<SubsetPoint> = digits(index, subsets.len(), x.len())
                .into_iter()
                .map(|d| subsets[d].clone())
                .collect();
            let back = cover_to_map(&map_to_cover(&g, x, z, n)?, z, n)?;
            Ok(usize::from(back != g))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .sum();

    let per_cover: Vec<(Vec<SubsetPoint>, usize, bool)> = (0..labeled)
        .into_par_iter()
        .map(|index| -> Result<(Vec<SubsetPoint>, usize, bool)> {
            let choice: Vec<&Vec<usize>> = digits(index, tuples.len(), x.len()).into_iter().map(|d| &tuples[d]).collect();
            let c = labeled_cover(x, z, &choice)?;
            let g = cover_to_map(&c, z, n)?;
            let back = map_to_cover(&g, x, z, n)?;
            let ok = isomorphism(&c, &back).is_some_and(|iso| {
                iso.iter()
                    .enumerate()
                    .all(|(y, &w)| back.proj[w] == c.proj[y] && back.anchor[w] == c.anchor[y])
            });
            Ok((g, index, ok))
        })
        .collect::<Result<_>>()?;

    let mut cover_failures = per_cover.iter().filter(|(_, _, ok)| !ok).count();
    let mut classes: BTreeMap<Vec<SubsetPoint>, Vec<usize>> = BTreeMap::new();
    for (g, index, _) in per_cover {
        let reps = classes.entry(g).or_default();
        let choice: Vec<&Vec<usize>> = digits(index, tuples.len(), x.len()).into_iter().map(|d| &tuples[d]).collect();
        let c = labeled_cover(x, z, &choice)?;
        let mut placed = false;
        for &r in reps.iter() {
            let rchoice: Vec<&Vec<usize>> = digits(r, tuples.len(), x.len()).into_iter().map(|d| &tuples[d]).collect();
            if isomorphism(&c, &labeled_cover(x, z, &rchoice)?).is_some() {
                placed = true;
                break;
            }
        }
        if !placed {
            if !reps.is_empty() {
                // Same map but no isomorphism: the correspondence is broken.
                cover_failures += 1;
            }
            reps.push(index);
        }
    }
    let cover_classes: usize = classes.values().map(Vec::len).sum();
    let pass = map_failures == 0 && cover_failures == 0 && cover_classes == maps && classes.len() == maps;
    Ok(RoundtripReport {
        x_points: x.len(),
        z_points: z.len(),
        n,
        maps,
        labeled_covers: labeled,
        cover_classes,
        map_failures,
        cover_failures,
        pass,
    })
}
