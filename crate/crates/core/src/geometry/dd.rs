//! Vertex enumeration for bounded polytopes `{y : ⟨a_i, y⟩ ≤ 1}` containing
//! the origin in their interior, by the double-description method on the
//! homogenized cone `{(y, t) : t − ⟨a_i, y⟩ ≥ 0, t ≥ 0}`.
//!
//! Floating point throughout; zero tests use a 1e-9 tolerance on unit-norm
//! rows and rays, and adjacency is decided combinatorially so degenerate
//! (non-simple) polytopes are handled.

use crate::error::{Error, Result};

const ZERO_TOL: f64 = 1e-9;

#[derive(Clone)]
struct Ray {
    coords: Vec<f64>,
    // Indices (into the processed-row list) of constraints tight at this ray.
    tight: Bits,
}

#[derive(Clone, PartialEq, Eq)]
struct Bits(Vec<u64>);

impl Bits {
    fn new(len: usize) -> Self {
        Bits(vec![0; len.div_ceil(64)])
    }
    fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }
    fn and(&self, other: &Bits) -> Bits {
        Bits(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }
    fn count(&self) -> usize {
        self.0.iter().map(|w| w.count_ones() as usize).sum()
    }
    fn contains(&self, other: &Bits) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a & b == *b)
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let n = dot(v, v).sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

/// Picks `dim` linearly independent rows greedily (in order) and returns
/// their indices, or `None` if the rows do not span.
fn independent_rows(rows: &[Vec<f64>], dim: usize) -> Option<Vec<usize>> {
    let mut chosen = Vec::new();
    let mut reduced: Vec<Vec<f64>> = Vec::new();
    for (i, row) in rows.iter().enumerate() {
        let mut v = row.clone();
        for _ in 0..2 {
            for q in &reduced {
                let c = dot(q, &v);
                v.iter_mut().zip(q).for_each(|(x, y)| *x -= c * y);
            }
        }
        let n = dot(&v, &v).sqrt();
        if n > 1e-7 {
            v.iter_mut().for_each(|x| *x /= n);
            reduced.push(v);
            chosen.push(i);
            if chosen.len() == dim {
                return Some(chosen);
            }
        }
    }
    None
}

fn invert(m: &[Vec<f64>]) -> Option<Vec<Vec<f64>>> {
    let n = m.len();
    let mat = nalgebra::DMatrix::from_fn(n, n, |i, j| m[i][j]);
    let inv = mat.try_inverse()?;
    Some((0..n).map(|j| (0..n).map(|i| inv[(i, j)]).collect()).collect())
}

/// Vertices of `{y ∈ R^dim : ⟨a, y⟩ ≤ 1 for a in normals}`.
///
/// The polytope must be bounded with the origin in its interior; zero rows
/// are ignored. Vertices come out in a deterministic order.
pub fn polytope_vertices(normals: &[Vec<f64>], dim: usize) -> Result<Vec<Vec<f64>>> {
    let width = dim + 1;
    // Homogenized rows r with r·(y, t) ≥ 0; normalized to unit length.
    let mut rows: Vec<Vec<f64>> = Vec::with_capacity(normals.len() + 1);
    let mut t_row = vec![0.0; width];
    t_row[dim] = 1.0;
    rows.push(t_row);
    for a in normals {
        if a.len() != dim {
            return Err(Error::Dimension {
                expected: dim,
                found: a.len(),
            });
        }
        if dot(a, a).sqrt() <= 1e-14 {
            continue;
        }
        let mut r: Vec<f64> = a.iter().map(|x| -x).collect();
        r.push(1.0);
        normalize(&mut r);
        if !rows.iter().any(|q| q.iter().zip(&r).all(|(x, y)| (x - y).abs() < 1e-12)) {
            rows.push(r);
        }
    }

    let start = independent_rows(&rows, width)
        .ok_or_else(|| Error::DegenerateBody("constraints do not bound a full-dimensional polytope".into()))?;
    let init: Vec<Vec<f64>> = start.iter().map(|&i| rows[i].clone()).collect();
    let inv = invert(&init).ok_or_else(|| Error::Internal("singular initial basis in vertex enumeration".into()))?;

    // Processing order: the initial rows first, then the rest in input order.
    let mut order = start.clone();
    order.extend((0..rows.len()).filter(|i| !start.contains(i)));
    let total = order.len();

    let mut rays: Vec<Ray> = inv
        .into_iter()
        .enumerate()
        .map(|(k, mut coords)| {
            normalize(&mut coords);
            let mut tight = Bits::new(total);
            for j in 0..width {
                if j != k {
                    tight.set(j);
                }
            }
            Ray { coords, tight }
        })
        .collect();

    for (step, &ri) in order.iter().enumerate().skip(width) {
        let row = &rows[ri];
        let values: Vec<f64> = rays.iter().map(|r| dot(row, &r.coords)).collect();
        let pos: Vec<usize> = (0..rays.len()).filter(|&k| values[k] > ZERO_TOL).collect();
        let neg: Vec<usize> = (0..rays.len()).filter(|&k| values[k] < -ZERO_TOL).collect();
        if neg.is_empty() {
            for (k, r) in rays.iter_mut().enumerate() {
                if values[k].abs() <= ZERO_TOL {
                    r.tight.set(step);
                }
            }
            continue;
        }
        let mut next: Vec<Ray> = Vec::with_capacity(rays.len() + pos.len() * neg.len());
        for (k, r) in rays.iter().enumerate() {
            if values[k] >= -ZERO_TOL {
                let mut r = r.clone();
                if values[k] <= ZERO_TOL {
                    r.tight.set(step);
                }
                next.push(r);
            }
        }
        for &p in &pos {
            for &q in &neg {
                let common = rays[p].tight.and(&rays[q].tight);
                if common.count() + 2 < width {
                    continue;
                }
                let blocked = rays
                    .iter()
                    .enumerate()
                    .any(|(k, r)| k != p && k != q && r.tight.contains(&common));
                if blocked {
                    continue;
                }
                let (vp, vq) = (values[p], values[q]);
                let mut coords: Vec<f64> = rays[q]
                    .coords
                    .iter()
                    .zip(&rays[p].coords)
                    .map(|(xq, xp)| vp * xq - vq * xp)
                    .collect();
                normalize(&mut coords);
                let mut tight = common;
                tight.set(step);
                next.push(Ray { coords, tight });
            }
        }
        rays = next;
    }

    let mut out: Vec<Vec<f64>> = Vec::with_capacity(rays.len());
    for r in rays {
        let t = r.coords[dim];
        if t <= ZERO_TOL {
            return Err(Error::DegenerateBody("polytope is unbounded".into()));
        }
        let v: Vec<f64> = r.coords[..dim].iter().map(|x| x / t).collect();
        if !out.iter().any(|w| w.iter().zip(&v).all(|(a, b)| (a - b).abs() <= 1e-9 * (1.0 + a.abs()))) {
            out.push(v);
        }
    }
    out.sort_by(|a, b| {
        a.iter()
            .zip(b)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(out)
}
