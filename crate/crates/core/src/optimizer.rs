//! Simplicial branch-and-bound for Lipschitz objectives.
//!
//! Each leaf of the partition carries the bound `min f(vertices) - L h`,
//! valid because any two points of a simplex are at most its longest edge
//! `h` apart. The leaf with the smallest bound is bisected along its longest
//! edge; only the new midpoint needs an evaluation, since vertex values are
//! cached by registry id.

use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::geometry::Point;
use crate::partition::{NodeId, Partition, VertexId};

/// A function on R^d with an asserted Lipschitz constant on the domain.
pub trait Objective {
    fn evaluate(&self, x: &[f64]) -> f64;

    fn lipschitz(&self) -> f64;
}

/// Closure-backed objective.
pub struct FnObjective<F> {
    f: F,
    lipschitz: f64,
}

impl<F: Fn(&[f64]) -> f64> FnObjective<F> {
    pub fn new(f: F, lipschitz: f64) -> Self {
        Self { f, lipschitz }
    }
}

impl<F: Fn(&[f64]) -> f64> Objective for FnObjective<F> {
    fn evaluate(&self, x: &[f64]) -> f64 {
        (self.f)(x)
    }

    fn lipschitz(&self) -> f64 {
        self.lipschitz
    }
}

/// Objectives available from the command line, defined on `[0,1]^d`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BuiltinObjective {
    /// `|x|^2`.
    Sphere,
    /// `|x - (0.3, ..., 0.3)|^2`.
    ShiftedSphere,
    /// `sum_i c_i x_i` with `c = (1, -1, 1, ...)`.
    Linear,
    /// The constant 7.
    Constant,
}

impl FromStr for BuiltinObjective {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sphere" => Ok(Self::Sphere),
            "shifted-sphere" => Ok(Self::ShiftedSphere),
            "linear" => Ok(Self::Linear),
            "constant" => Ok(Self::Constant),
            other => Err(Error::InvalidArgument(format!(
                "unknown objective {other:?} (expected sphere, shifted-sphere, linear or constant)"
            ))),
        }
    }
}

pub const SHIFTED_SPHERE_CENTER: f64 = 0.3;

impl BuiltinObjective {
    /// Bind to dimension `d`.
    pub fn in_dim(self, d: usize) -> Builtin {
        Builtin { kind: self, d }
    }
}

/// A [`BuiltinObjective`] bound to a dimension.
#[derive(Clone, Copy, Debug)]
pub struct Builtin {
    kind: BuiltinObjective,
    d: usize,
}

impl Builtin {
    /// Known minimum value over `[0,1]^d`.
    pub fn minimum(&self) -> f64 {
        match self.kind {
            BuiltinObjective::Sphere | BuiltinObjective::ShiftedSphere => 0.0,
            BuiltinObjective::Linear => -((self.d / 2) as f64),
            BuiltinObjective::Constant => 7.0,
        }
    }
}

fn linear_coeff(i: usize) -> f64 {
    if i.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

impl Objective for Builtin {
    fn evaluate(&self, x: &[f64]) -> f64 {
        match self.kind {
            BuiltinObjective::Sphere => x.iter().map(|v| v * v).sum(),
            BuiltinObjective::ShiftedSphere => x
                .iter()
                .map(|v| (v - SHIFTED_SPHERE_CENTER) * (v - SHIFTED_SPHERE_CENTER))
                .sum(),
            BuiltinObjective::Linear => x.iter().enumerate().map(|(i, v)| linear_coeff(i) * v).sum(),
            BuiltinObjective::Constant => 7.0,
        }
    }

    fn lipschitz(&self) -> f64 {
        let d = self.d as f64;
        match self.kind {
            // |grad| = 2|x - c| <= 2 sqrt(d) on the unit cube; 4 in the plane.
            BuiltinObjective::Sphere | BuiltinObjective::ShiftedSphere => 2.0 * d.sqrt().max(2.0),
            BuiltinObjective::Linear => d.sqrt(),
            BuiltinObjective::Constant => 0.0,
        }
    }
}

/// `min(vertex_values) - L h`.
pub fn simplex_lower_bound(vertex_values: &[f64], d: usize, lipschitz: f64, h: f64) -> Result<f64> {
    if vertex_values.len() != d + 1 {
        return Err(Error::ArityError {
            expected: d + 1,
            found: vertex_values.len(),
        });
    }
    if !(lipschitz >= 0.0) {
        return Err(Error::InvalidArgument(format!("Lipschitz constant must be >= 0, got {lipschitz}")));
    }
    if !(h > 0.0) {
        return Err(Error::InvalidArgument(format!("diameter must be > 0, got {h}")));
    }
    let min = vertex_values.iter().copied().fold(f64::INFINITY, f64::min);
    Ok(min - lipschitz * h)
}

/// One line of the optimizer trace.
#[derive(Clone, Debug, PartialEq)]
pub struct TraceRow {
    pub iteration: usize,
    /// Leaf at the top of the queue (popped next unless the run stops).
    pub node_id: NodeId,
    /// Its bound, which is the global lower bound.
    pub lower_bound: f64,
    pub incumbent: f64,
    pub gap: f64,
    /// Smallest regularity ratio over all simplices created so far.
    pub eta_min: f64,
}

#[derive(Clone, Debug)]
pub struct OptimizeResult {
    pub incumbent: Point,
    pub value: f64,
    pub global_lower_bound: f64,
    /// `value - global_lower_bound`.
    pub gap: f64,
    pub converged: bool,
    pub leaves_explored: usize,
    pub evaluations: usize,
    pub trace: Vec<TraceRow>,
    pub partition: Partition,
}

#[derive(Clone, Copy, Debug)]
struct Queued {
    bound: f64,
    node: NodeId,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    // Reversed: BinaryHeap pops the smallest bound, then the smallest id.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then(other.node.cmp(&self.node))
    }
}

struct Search<'a, O: ?Sized> {
    f: &'a O,
    partition: Partition,
    values: HashMap<VertexId, f64>,
    incumbent: (VertexId, f64),
    eta_min: f64,
}

impl<O: Objective + ?Sized> Search<'_, O> {
    fn value(&mut self, v: VertexId) -> f64 {
        if let Some(&x) = self.values.get(&v) {
            return x;
        }
        let x = self.f.evaluate(self.partition.registry().get(v).coords());
        self.values.insert(v, x);
        if x < self.incumbent.1 || (x == self.incumbent.1 && v < self.incumbent.0) {
            self.incumbent = (v, x);
        }
        x
    }

    fn bound(&mut self, node: NodeId) -> f64 {
        let ids = self.partition.node(node).vertex_ids.clone();
        let min = ids.into_iter().map(|v| self.value(v)).fold(f64::INFINITY, f64::min);
        let h = self.partition.node(node).simplex.longest_edge().length;
        min - self.f.lipschitz() * h
    }
}

/// Minimize `f` over the union of the leaves of `roots`.
///
/// Stops once `incumbent - global_lower_bound <= tol` or `budget` distinct
/// vertices have been evaluated.
pub fn optimize<O: Objective + ?Sized>(f: &O, roots: Partition, budget: usize, tol: f64) -> Result<OptimizeResult> {
    let d = roots.dim();
    let leaves: Vec<NodeId> = roots.leaves().map(|n| n.id).collect();
    if leaves.is_empty() {
        return Err(Error::EmptyPartition);
    }
    let required = (d + 1) * leaves.len();
    if budget < required {
        return Err(Error::BudgetTooSmall { budget, required });
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("tolerance must be > 0, got {tol}")));
    }
    if !(f.lipschitz() >= 0.0) {
        return Err(Error::InvalidArgument("Lipschitz constant must be >= 0".into()));
    }

    let eta_min = roots.min_regularity_all_nodes()?;
    let mut s = Search {
        f,
        partition: roots,
        values: HashMap::new(),
        incumbent: (usize::MAX, f64::INFINITY),
        eta_min,
    };
    let mut heap = BinaryHeap::new();
    for id in leaves {
        let bound = s.bound(id);
        heap.push(Queued { bound, node: id });
    }

    let mut trace = Vec::new();
    let mut explored = 0;
    let (global_lower_bound, converged) = loop {
        let top = *heap.peek().expect("queue holds every leaf");
        let gap = s.incumbent.1 - top.bound;
        trace.push(TraceRow {
            iteration: explored,
            node_id: top.node,
            lower_bound: top.bound,
            incumbent: s.incumbent.1,
            gap,
            eta_min: s.eta_min,
        });
        if gap <= tol {
            break (top.bound, true);
        }
        if s.values.len() >= budget {
            break (top.bound, false);
        }
        heap.pop();
        let (a, b) = s.partition.bisect_leaf(top.node)?;
        explored += 1;
        for child in [a, b] {
            s.eta_min = s.eta_min.min(s.partition.node(child).simplex.regularity_ratio());
            // The parent's bound also holds on the child.
            let bound = s.bound(child).max(top.bound);
            heap.push(Queued { bound, node: child });
        }
    };

    let (vid, value) = s.incumbent;
    Ok(OptimizeResult {
        incumbent: s.partition.registry().get(vid).clone(),
        value,
        global_lower_bound,
        gap: value - global_lower_bound,
        converged,
        leaves_explored: explored,
        evaluations: s.values.len(),
        trace,
        partition: s.partition,
    })
}
