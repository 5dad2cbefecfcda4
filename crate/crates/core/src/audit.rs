//! End-to-end audit of the intersection-number bound on a partition.
//!
//! For a partition with regularity `η_min`, every point lies in at most
//! `N = (1/η_min)(2eπ/d)^{d/2}` leaves. The audit checks the three pieces
//! that bound rests on:
//!
//! 1. the observed maximum valence over registry vertices is `<= N`;
//! 2. at each (leaf, vertex) pair the estimated solid-angle fraction is at
//!    least `ρ(leaf)(d/2eπ)^{d/2}` minus three standard errors;
//! 3. at each registry vertex the fractions of the incident leaves sum to 1
//!    (interior vertices) or at most 1 (boundary vertices), within four
//!    combined standard errors.
//!
//! Every cone at a registry vertex is sampled with a seed derived from
//! `(mc.seed, vertex id)`. Incident cones at one vertex therefore see the
//! same directions, so a correct tiling gives a fraction sum of exactly 1.

use std::collections::BTreeMap;

use rand::seq::index;
use rayon::prelude::*;

use crate::cone::{self, FractionEstimate, MonteCarloConfig, VertexCone};
use crate::error::Result;
use crate::geometry::{Point, DEFAULT_MEMBERSHIP_TOL};
use crate::partition::{NodeId, Partition, VertexId};
use crate::sampling;

/// Audited (leaf, vertex) pairs above which a seeded subsample is drawn.
pub const DEFAULT_PAIR_CAP: usize = 10_000;

/// Standard errors allowed below the per-simplex bound.
pub const VERTEX_CHECK_SIGMAS: f64 = 3.0;

/// Combined standard errors allowed in the fraction-sum check.
pub const DECOMPOSITION_SIGMAS: f64 = 4.0;

const SUBSAMPLE_KEY: u64 = 0x7375_6273_616d_706c;

/// How much of the partition to audit.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AuditOptions {
    /// Audit every pair and every vertex regardless of size.
    pub full_audit: bool,
    pub pair_cap: usize,
}

impl Default for AuditOptions {
    fn default() -> Self {
        Self {
            full_audit: false,
            pair_cap: DEFAULT_PAIR_CAP,
        }
    }
}

/// Per-(leaf, vertex) angle check.
#[derive(Clone, Debug, PartialEq)]
pub struct VertexCheck {
    pub leaf: NodeId,
    pub vertex: VertexId,
    pub estimate: FractionEstimate,
    /// `ρ(leaf)(d/2eπ)^{d/2}`.
    pub required_bound: f64,
    /// `η_min(d/2eπ)^{d/2}`.
    pub uniform_bound: f64,
}

impl VertexCheck {
    pub fn passes(&self) -> bool {
        self.estimate.fraction >= self.required_bound - VERTEX_CHECK_SIGMAS * self.estimate.stderr
    }

    pub fn passes_uniform(&self) -> bool {
        self.estimate.fraction >= self.uniform_bound - VERTEX_CHECK_SIGMAS * self.estimate.stderr
    }
}

/// Fraction sum at one registry vertex.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionCheck {
    pub vertex: VertexId,
    pub point: Point,
    pub interior: bool,
    pub incident: Vec<NodeId>,
    pub fraction_sum: f64,
    pub combined_stderr: f64,
}

impl DecompositionCheck {
    pub fn passes(&self) -> bool {
        let slack = DECOMPOSITION_SIGMAS * self.combined_stderr;
        if self.interior {
            (self.fraction_sum - 1.0).abs() <= slack
        } else {
            self.fraction_sum <= 1.0 + slack
        }
    }
}

/// Outcome of [`verify_theorem`].
#[derive(Clone, Debug, PartialEq)]
pub struct TheoremReport {
    pub d: usize,
    pub eta_min: f64,
    /// `N(η_min, d)`.
    pub theoretical_bound: f64,
    pub max_observed_valence: usize,
    pub witness: (VertexId, Point),
    pub per_vertex_checks: Vec<VertexCheck>,
    pub decomposition_checks: Vec<DecompositionCheck>,
    /// All (leaf, vertex) pairs, audited or not.
    pub total_pairs: usize,
    pub mc: MonteCarloConfig,
}

impl TheoremReport {
    pub fn valence_within_bound(&self) -> bool {
        self.max_observed_valence as f64 <= self.theoretical_bound
    }

    pub fn vertex_violations(&self) -> usize {
        self.per_vertex_checks.iter().filter(|c| !c.passes()).count()
    }

    pub fn decomposition_violations(&self) -> usize {
        self.decomposition_checks.iter().filter(|c| !c.passes()).count()
    }

    pub fn passes(&self) -> bool {
        self.valence_within_bound() && self.vertex_violations() == 0 && self.decomposition_violations() == 0
    }
}

/// [`verify_theorem_with`] using the default subsample cap.
pub fn verify_theorem(p: &Partition, mc: &MonteCarloConfig) -> Result<TheoremReport> {
    verify_theorem_with(p, mc, &AuditOptions::default())
}

/// Audit `p` with Monte-Carlo settings `mc`.
///
/// Above `opts.pair_cap` (leaf, vertex) pairs, a seeded uniform subsample of
/// that many pairs is checked, and registry vertices for the fraction-sum
/// check are subsampled to the same budget of cones.
pub fn verify_theorem_with(p: &Partition, mc: &MonteCarloConfig, opts: &AuditOptions) -> Result<TheoremReport> {
    let d = p.dim();
    let eta_min = p.min_regularity()?;
    let theoretical_bound = cone::max_intersection_bound(eta_min, d)?;
    let tol = DEFAULT_MEMBERSHIP_TOL;

    let incident = p.registry_valences(tol)?;
    let (witness_id, max_observed_valence) = incident
        .iter()
        .enumerate()
        .fold((0, 0), |best, (id, leaves)| if leaves.len() > best.1 { (id, leaves.len()) } else { best });

    let pairs: Vec<(NodeId, VertexId)> = p
        .leaves()
        .flat_map(|n| n.vertex_ids.iter().map(move |&v| (n.id, v)))
        .collect();
    let total_pairs = pairs.len();
    let mut sub_rng = sampling::rng(sampling::derive_seed(mc.seed(), SUBSAMPLE_KEY), 0);
    let audited_pairs: Vec<(NodeId, VertexId)> = if opts.full_audit || total_pairs <= opts.pair_cap {
        pairs
    } else {
        let mut picks = index::sample(&mut sub_rng, total_pairs, opts.pair_cap).into_vec();
        picks.sort_unstable();
        picks.into_iter().map(|i| pairs[i]).collect()
    };

    let incident_cones: usize = incident.iter().map(Vec::len).sum();
    let audited_vertices: Vec<VertexId> = if opts.full_audit || incident_cones <= opts.pair_cap {
        (0..incident.len()).collect()
    } else {
        let mean = incident_cones as f64 / incident.len() as f64;
        let keep = ((opts.pair_cap as f64 / mean) as usize).clamp(1, incident.len());
        let mut picks = index::sample(&mut sub_rng, incident.len(), keep).into_vec();
        picks.sort_unstable();
        picks
    };

    // Every cone needed by either check, keyed by (leaf, vertex).
    let mut keys: Vec<(NodeId, VertexId)> = audited_pairs.clone();
    for &v in &audited_vertices {
        keys.extend(incident[v].iter().map(|&leaf| (leaf, v)));
    }
    keys.sort_unstable();
    keys.dedup();

    let estimates: BTreeMap<(NodeId, VertexId), FractionEstimate> = keys
        .par_iter()
        .map(|&(leaf, v)| {
            let node = p.node(leaf);
            let cone = match node.vertex_ids.iter().position(|&x| x == v) {
                Some(j) => VertexCone::at_vertex(&node.simplex, j)?,
                None => VertexCone::at_point(&node.simplex, p.registry().get(v), tol)?,
            };
            let cone_mc = mc.with_seed(sampling::derive_seed(mc.seed(), v as u64));
            Ok(((leaf, v), cone.solid_angle_fraction(&cone_mc)))
        })
        .collect::<Result<_>>()?;

    let uniform_bound = cone::per_simplex_angle_bound(eta_min, d);
    let per_vertex_checks = audited_pairs
        .iter()
        .map(|&(leaf, vertex)| VertexCheck {
            leaf,
            vertex,
            estimate: estimates[&(leaf, vertex)],
            required_bound: cone::per_simplex_angle_bound(p.node(leaf).simplex.regularity_ratio(), d),
            uniform_bound,
        })
        .collect();

    let decomposition_checks = audited_vertices
        .iter()
        .map(|&v| {
            let point = p.registry().get(v).clone();
            let ests: Vec<&FractionEstimate> = incident[v].iter().map(|&leaf| &estimates[&(leaf, v)]).collect();
            DecompositionCheck {
                vertex: v,
                interior: p.is_interior_point(&point, tol),
                point,
                incident: incident[v].clone(),
                fraction_sum: ests.iter().map(|e| e.fraction).sum(),
                combined_stderr: ests.iter().map(|e| e.stderr * e.stderr).sum::<f64>().sqrt(),
            }
        })
        .collect();

    Ok(TheoremReport {
        d,
        eta_min,
        theoretical_bound,
        max_observed_valence,
        witness: (witness_id, p.registry().get(witness_id).clone()),
        per_vertex_checks,
        decomposition_checks,
        total_pairs,
        mc: *mc,
    })
}
