//! Discrete lower-semicontinuity checks.
//!
//! For a net `x_m → x` the witness at `x_m` is built from the sections whose
//! values form a basis of the limit fiber: their span `S_m` at `x_m` is a
//! slice, and the depth-1 generator `K^L(co(K^L(S_m) ∪ (S_m⊥ ∩ ball)))` is
//! checked to lie in `K(x_m)` and compared with the target norm on probe
//! sections.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::Renorming;
use crate::bundle::{self, Bundle};
use crate::error::{Error, Result};
use crate::geometry::{Shape, Subspace};
use crate::linalg::{self, Vector, RANK_TOL};
use crate::loewner::{loewner_hull, mvee_points, HullGenerator, MveeConfig};
use crate::seminorm::{l2_hull_membership, HilbertNorm};

/// Entrywise slack for witness membership in `K(x_m)`.
pub const WITNESS_MEMBERSHIP_TOL: f64 = 1e-7;

/// A net `approach[0], approach[1], … → limit`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Net {
    pub limit: String,
    pub approach: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessStep {
    pub vertex: String,
    pub gram: Vec<Vec<f64>>,
    pub member: bool,
    pub gap: f64,
}

/// One (net, target generator) pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NetRecord {
    pub limit: String,
    pub approaching: Vec<String>,
    pub target: usize,
    pub target_gram: Vec<Vec<f64>>,
    pub basis_sections: Vec<String>,
    pub witnesses: Vec<WitnessStep>,
    pub tail_gap: f64,
    pub monotone: bool,
    pub pass: bool,
    pub diagnostics: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LscReport {
    pub tol: f64,
    pub records: Vec<NetRecord>,
    pub pass: bool,
}

fn check_net(renorming: &Renorming, bundle: &Bundle, net: &Net) -> Result<()> {
    let g = bundle.base();
    let limit = g
        .index(&net.limit)
        .ok_or_else(|| Error::Net(format!("unknown limit vertex {}", net.limit)))?;
    if net.approach.is_empty() {
        return Err(Error::Net(format!("net towards {} has no terms", net.limit)));
    }
    let depth = |v: &str| {
        renorming
            .strata
            .depth_of(v)
            .ok_or_else(|| Error::Net(format!("vertex {v} is not stratified")))
    };
    let limit_depth = depth(&net.limit)?;
    let mut closer = limit;
    for v in net.approach.iter().rev() {
        let i = g.index(v).ok_or_else(|| Error::Net(format!("unknown vertex {v}")))?;
        if i == limit {
            return Err(Error::Net(format!("net towards {} contains its limit", net.limit)));
        }
        if depth(v)? < limit_depth {
            return Err(Error::Net(format!(
                "{v} (depth {}) lies in a lower stratum than the limit {} (depth {limit_depth})",
                depth(v)?,
                net.limit
            )));
        }
        if !g.neighbors(limit).contains(&i) && !g.neighbors(closer).contains(&i) {
            return Err(Error::Net(format!(
                "{v} is adjacent neither to the limit nor to the next term of the net"
            )));
        }
        closer = i;
    }
    Ok(())
}

/// Fiber norm of an ambient vector under a Gram in fiber coordinates.
fn norm_at(bundle: &Bundle, vertex: &str, gram: &HilbertNorm, v: &Vector) -> Result<f64> {
    let fiber = bundle.fiber_of(vertex)?;
    let (c, residual) = fiber.basis.coordinates(v);
    if residual > bundle::FIBER_TOL * v.norm().max(1.0) {
        return Err(Error::Section {
            vertex: vertex.to_string(),
            residual,
        });
    }
    gram.eval(&c)
}

fn run_net(
    renorming: &Renorming,
    bundle: &Bundle,
    net: &Net,
    probes: &[usize],
    tol: f64,
    cfg: &MveeConfig,
) -> Result<Vec<NetRecord>> {
    let sections = bundle.sections();
    let limit_idx = bundle.base().require(&net.limit)?;
    let limit_values = bundle.section_values(limit_idx);
    // Sections, in index order, whose limit values form a basis.
    let mut chosen: Vec<usize> = Vec::new();
    let mut rank = 0;
    for (k, v) in limit_values.iter().enumerate() {
        let mut trial: Vec<Vector> = chosen.iter().map(|&j| limit_values[j].clone()).collect();
        trial.push(v.clone());
        let r = linalg::rank(&linalg::columns_to_matrix(bundle.ambient_dim(), &trial), RANK_TOL);
        if r > rank {
            rank = r;
            chosen.push(k);
        }
    }
    let targets = renorming.norms(&net.limit)?;
    let mut records = Vec::with_capacity(targets.len());
    for (t_idx, target) in targets.generators().iter().enumerate() {
        let mut witnesses = Vec::new();
        let mut diagnostics = Vec::new();
        for v in &net.approach {
            let i = bundle.base().require(v)?;
            let fiber = bundle.fiber(i);
            let ball = fiber.ball()?;
            let values = bundle.section_values(i);
            let span_vectors: Vec<Vector> = chosen
                .iter()
                .map(|&j| fiber.basis.coordinates(&values[j]).0)
                .collect();
            let s = Subspace::span(ball.dim(), &span_vectors)?;
            if s.rank() < chosen.len() {
                diagnostics.push(format!(
                    "sections spanning the limit fiber are dependent at {v}; the net is too coarse"
                ));
                continue;
            }
            let own = mvee_points(ball.vertices(), cfg)?;
            let q = if s.is_full() {
                own
            } else {
                let slice = ball.intersect_subspace(&s)?;
                let inner = mvee_points(slice.vertices(), cfg)?;
                let perp = s.orthogonal_complement(&own)?;
                let perp_body = ball.intersect_subspace(&perp)?;
                loewner_hull(
                    &[
                        HullGenerator::embedded(Shape::Ellipsoid(inner), s.clone()),
                        HullGenerator::embedded(Shape::Body(perp_body), perp),
                    ],
                    cfg,
                )?
            };
            let q = HilbertNorm::from(q);
            let member = l2_hull_membership(&q, renorming.norms(v)?, WITNESS_MEMBERSHIP_TOL)?.member;
            if !member {
                diagnostics.push(format!("witness at {v} is not a member of the norm set there"));
            }
            let mut gap = 0.0f64;
            for &p in probes {
                let here = norm_at(bundle, v, &q, &values[p])?;
                let there = norm_at(bundle, &net.limit, target, &limit_values[p])?;
                gap = gap.max((here - there).abs());
            }
            witnesses.push(WitnessStep {
                vertex: v.clone(),
                gram: linalg::matrix_to_rows(q.gram()),
                member,
                gap,
            });
        }
        let complete = witnesses.len() == net.approach.len();
        let tail_gap = witnesses.last().map_or(f64::INFINITY, |w| w.gap);
        let monotone = witnesses.windows(2).all(|w| w[1].gap <= w[0].gap + 1e-12);
        let all_members = witnesses.iter().all(|w| w.member);
        records.push(NetRecord {
            limit: net.limit.clone(),
            approaching: net.approach.clone(),
            target: t_idx,
            target_gram: linalg::matrix_to_rows(target.gram()),
            basis_sections: chosen.iter().map(|&j| sections[j].id.clone()).collect(),
            witnesses,
            tail_gap,
            monotone,
            pass: complete && all_members && tail_gap <= tol,
            diagnostics,
        });
    }
    Ok(records)
}

/// Builds witness sequences for every net and every generator at its limit.
/// `probe_sections` names the sections to compare on; empty means all.
/// A record passes when every witness is a member of its norm set and the
/// gap at the last net term is at most `tol`; the monotone trend is
/// reported alongside.
pub fn verify_lsc(
    renorming: &Renorming,
    bundle: &Bundle,
    nets: &[Net],
    probe_sections: &[String],
    tol: f64,
    cfg: &MveeConfig,
) -> Result<LscReport> {
    let probes: Vec<usize> = if probe_sections.is_empty() {
        (0..bundle.sections().len()).collect()
    } else {
        probe_sections
            .iter()
            .map(|id| {
                bundle
                    .sections()
                    .iter()
                    .position(|s| &s.id == id)
                    .ok_or_else(|| Error::InvalidInput(format!("unknown probe section {id}")))
            })
            .collect::<Result<_>>()?
    };
    for net in nets {
        check_net(renorming, bundle, net)?;
    }
    let per_net: Vec<Result<Vec<NetRecord>>> = nets
        .par_iter()
        .map(|net| run_net(renorming, bundle, net, &probes, tol, cfg))
        .collect();
    let mut records = Vec::new();
    for r in per_net {
        records.extend(r?);
    }
    let pass = records.iter().all(|r| r.pass);
    Ok(LscReport { tol, records, pass })
}
