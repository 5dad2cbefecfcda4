//! Refinement forests of simplices.
//!
//! A [`Partition`] keeps every simplex ever created as a node: roots have no
//! parent, a bisected node has exactly two children, and the current
//! partition is the set of leaves. Vertices live in a registry that merges
//! points closer than `1e-9 * h_root` so midpoints computed from different
//! parents share one id.

use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use crate::geometry::{Point, Simplex, DEFAULT_MEMBERSHIP_TOL};

pub type NodeId = usize;
pub type VertexId = usize;

/// Registry merge tolerance relative to the longest root edge.
pub const VERTEX_MERGE_REL: f64 = 1e-9;

/// Split a simplex at the midpoint `m` of its canonical longest edge `(u, w)`.
///
/// The first child keeps `u` (with `w` replaced by `m`), the second keeps `w`
/// (with `u` replaced by `m`). Vertex slots are otherwise preserved.
pub fn bisect_longest_edge(s: &Simplex) -> Result<(Simplex, Simplex)> {
    let (u, w) = s.longest_edge().edge;
    let m = s.vertex(u).midpoint(s.vertex(w));
    let mut first = s.vertices().to_vec();
    first[w] = m.clone();
    let mut second = s.vertices().to_vec();
    second[u] = m;
    Ok((Simplex::new(first)?, Simplex::new(second)?))
}

/// Which leaves a refinement round bisects.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum RefineStrategy {
    /// Every current leaf, in node-id order.
    BisectAllLeaves,
    /// The single leaf of largest volume (smallest id on ties).
    BisectLargestLeaf,
}

impl std::str::FromStr for RefineStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bisect-all-leaves" => Ok(Self::BisectAllLeaves),
            "bisect-largest-leaf" => Ok(Self::BisectLargestLeaf),
            other => Err(Error::InvalidArgument(format!("unknown strategy {other:?}"))),
        }
    }
}

/// One simplex of the refinement forest.
#[derive(Clone, Debug, PartialEq)]
pub struct Node {
    pub id: NodeId,
    pub parent: Option<NodeId>,
    pub children: Vec<NodeId>,
    pub generation: u32,
    pub vertex_ids: Vec<VertexId>,
    pub simplex: Simplex,
}

impl Node {
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
}

/// Deduplicated vertex list with a hashed grid index.
#[derive(Clone, Debug)]
pub struct VertexRegistry {
    points: Vec<Point>,
    tol: f64,
    cell: f64,
    index: HashMap<Vec<i64>, Vec<VertexId>>,
}

impl VertexRegistry {
    pub fn new(tol: f64) -> Self {
        let tol = if tol > 0.0 { tol } else { f64::MIN_POSITIVE };
        Self {
            points: Vec::new(),
            tol,
            cell: 4.0 * tol,
            index: HashMap::new(),
        }
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn get(&self, id: VertexId) -> &Point {
        &self.points[id]
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    fn key(&self, p: &[f64]) -> Vec<i64> {
        p.iter().map(|x| (x / self.cell).floor() as i64).collect()
    }

    /// Id of a registered point within tolerance (max-norm) of `p`.
    pub fn find(&self, p: &Point) -> Option<VertexId> {
        // Each coordinate has at most two candidate cells.
        let lo = self.key(&p.coords().iter().map(|x| x - self.tol).collect::<Vec<_>>());
        let hi = self.key(&p.coords().iter().map(|x| x + self.tol).collect::<Vec<_>>());
        let d = lo.len();
        let mut key = lo.clone();
        let combos = 1usize << d;
        for mask in 0..combos {
            if (0..d).any(|i| mask >> i & 1 == 1 && lo[i] == hi[i]) {
                continue;
            }
            for i in 0..d {
                key[i] = if mask >> i & 1 == 1 { hi[i] } else { lo[i] };
            }
            if let Some(ids) = self.index.get(&key) {
                for &id in ids {
                    let q = &self.points[id];
                    let close = q
                        .coords()
                        .iter()
                        .zip(p.coords())
                        .all(|(a, b)| (a - b).abs() <= self.tol);
                    if close {
                        return Some(id);
                    }
                }
            }
        }
        None
    }

    /// Register `p`, returning the id of an existing match if there is one.
    pub fn insert(&mut self, p: Point) -> VertexId {
        if let Some(id) = self.find(&p) {
            return id;
        }
        self.push(p)
    }

    /// Append without deduplication.
    fn push(&mut self, p: Point) -> VertexId {
        let id = self.points.len();
        self.index.entry(self.key(p.coords())).or_default().push(id);
        self.points.push(p);
        id
    }
}

/// Refinement forest over a set of root simplices.
#[derive(Clone, Debug)]
pub struct Partition {
    dim: usize,
    nodes: Vec<Node>,
    registry: VertexRegistry,
}

impl PartialEq for Partition {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim
            && self.nodes == other.nodes
            && self.registry.points == other.registry.points
    }
}

impl Partition {
    /// Partition whose roots are `roots`; an empty list is allowed.
    pub fn from_roots(dim: usize, roots: Vec<Simplex>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        if let Some(s) = roots.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: s.dim(),
            });
        }
        let h = roots
            .iter()
            .map(|s| s.longest_edge().length)
            .fold(0.0, f64::max);
        let mut p = Self {
            dim,
            nodes: Vec::with_capacity(roots.len()),
            registry: VertexRegistry::new(VERTEX_MERGE_REL * h),
        };
        for mut s in roots {
            let id = p.nodes.len();
            let vertex_ids = s
                .vertices()
                .iter()
                .map(|v| p.registry.insert(v.clone()))
                .collect();
            s.set_id(format!("n{id}"));
            p.nodes.push(Node {
                id,
                parent: None,
                children: Vec::new(),
                generation: 0,
                vertex_ids,
                simplex: s,
            });
        }
        Ok(p)
    }

    /// Kuhn triangulation of `[0,1]^d`: one path simplex per coordinate
    /// permutation, in lexicographic permutation order.
    pub fn kuhn(d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        let roots = permutations(d)
            .into_iter()
            .map(|perm| {
                let mut x = vec![0.0; d];
                let mut vs = vec![Point::origin(d)];
                for axis in perm {
                    x[axis] = 1.0;
                    vs.push(Point::new(x.clone())?);
                }
                Simplex::new(vs)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_roots(d, roots)
    }

    /// Rebuild from raw parts, checking structural consistency.
    pub(crate) fn from_parts(
        dim: usize,
        vertices: Vec<Point>,
        nodes: Vec<(NodeId, Option<NodeId>, u32, Vec<VertexId>, Vec<NodeId>)>,
    ) -> Result<Self> {
        if dim < 2 {
            return Err(Error::UnsupportedDimension(dim));
        }
        let bad = |msg: String| Err(Error::InvalidPartition(msg));
        if let Some(v) = vertices.iter().find(|v| v.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.dim(),
            });
        }
        let mut built = Vec::with_capacity(nodes.len());
        for (pos, (id, parent, generation, vertex_ids, children)) in nodes.into_iter().enumerate() {
            if id != pos {
                return bad(format!("node ids must be 0..n in order; found {id} at {pos}"));
            }
            if let Some(&v) = vertex_ids.iter().find(|&&v| v >= vertices.len()) {
                return bad(format!("node {id} references unknown vertex {v}"));
            }
            let pts = vertex_ids.iter().map(|&v| vertices[v].clone()).collect();
            let simplex = Simplex::with_id(format!("n{id}"), pts)?;
            built.push(Node {
                id,
                parent,
                children,
                generation,
                vertex_ids,
                simplex,
            });
        }
        let n = built.len();
        for node in &built {
            if let Some(p) = node.parent {
                if p >= n || !built[p].children.contains(&node.id) {
                    return bad(format!("node {} has inconsistent parent {p}", node.id));
                }
                if node.generation != built[p].generation + 1 {
                    return bad(format!("node {} has inconsistent generation", node.id));
                }
            } else if node.generation != 0 {
                return bad(format!("root {} must have generation 0", node.id));
            }
            for &c in &node.children {
                if c >= n || built[c].parent != Some(node.id) {
                    return bad(format!("node {} has inconsistent child {c}", node.id));
                }
            }
        }
        let h = built
            .iter()
            .filter(|n| n.parent.is_none())
            .map(|n| n.simplex.longest_edge().length)
            .fold(0.0, f64::max);
        let mut registry = VertexRegistry::new(VERTEX_MERGE_REL * h);
        for v in vertices {
            registry.push(v);
        }
        Ok(Self {
            dim,
            nodes: built,
            registry,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id]
    }

    pub fn registry(&self) -> &VertexRegistry {
        &self.registry
    }

    pub fn roots(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.parent.is_none())
    }

    /// Current partition, in node-id order.
    pub fn leaves(&self) -> impl Iterator<Item = &Node> {
        self.nodes.iter().filter(|n| n.is_leaf())
    }

    pub fn leaf_count(&self) -> usize {
        self.leaves().count()
    }

    pub fn leaf_volume(&self) -> f64 {
        self.leaves().map(|n| n.simplex.volume()).sum()
    }

    pub fn root_volume(&self) -> f64 {
        self.roots().map(|n| n.simplex.volume()).sum()
    }

    /// Bisect leaf `id` along its longest edge and return the child ids.
    pub fn bisect_leaf(&mut self, id: NodeId) -> Result<(NodeId, NodeId)> {
        let node = &self.nodes[id];
        if !node.is_leaf() {
            return Err(Error::InvalidArgument(format!("node {id} is not a leaf")));
        }
        let (u, w) = node.simplex.longest_edge().edge;
        let mid = node.simplex.vertex(u).midpoint(node.simplex.vertex(w));
        let generation = node.generation + 1;
        let parent_ids = node.vertex_ids.clone();

        let m = self.registry.insert(mid);
        let first_id = self.nodes.len();
        let second_id = first_id + 1;
        for (child_id, replaced) in [(first_id, w), (second_id, u)] {
            let mut vertex_ids = parent_ids.clone();
            vertex_ids[replaced] = m;
            let pts = vertex_ids
                .iter()
                .map(|&v| self.registry.get(v).clone())
                .collect();
            let simplex = Simplex::with_id(format!("n{child_id}"), pts)?;
            self.nodes.push(Node {
                id: child_id,
                parent: Some(id),
                children: Vec::new(),
                generation,
                vertex_ids,
                simplex,
            });
        }
        self.nodes[id].children = vec![first_id, second_id];
        Ok((first_id, second_id))
    }

    /// Apply `steps` rounds of `strategy`.
    pub fn refine(&mut self, steps: usize, strategy: RefineStrategy) -> Result<()> {
        for _ in 0..steps {
            match strategy {
                RefineStrategy::BisectAllLeaves => {
                    let ids: Vec<NodeId> = self.leaves().map(|n| n.id).collect();
                    for id in ids {
                        self.bisect_leaf(id)?;
                    }
                }
                RefineStrategy::BisectLargestLeaf => {
                    let target = self
                        .leaves()
                        .max_by(|a, b| {
                            a.simplex
                                .volume()
                                .total_cmp(&b.simplex.volume())
                                .then(b.id.cmp(&a.id))
                        })
                        .map(|n| n.id);
                    if let Some(id) = target {
                        self.bisect_leaf(id)?;
                    }
                }
            }
        }
        Ok(())
    }

    /// Consuming form of [`Partition::refine`].
    pub fn refined(mut self, steps: usize, strategy: RefineStrategy) -> Result<Self> {
        self.refine(steps, strategy)?;
        Ok(self)
    }

    /// `η_min`: the smallest regularity ratio over the leaves.
    pub fn min_regularity(&self) -> Result<f64> {
        self.leaves()
            .map(|n| n.simplex.regularity_ratio())
            .reduce(f64::min)
            .ok_or(Error::EmptyPartition)
    }

    /// Smallest regularity ratio over every node ever created.
    pub fn min_regularity_all_nodes(&self) -> Result<f64> {
        self.nodes
            .iter()
            .map(|n| n.simplex.regularity_ratio())
            .reduce(f64::min)
            .ok_or(Error::EmptyPartition)
    }

    /// Whether `p` lies in some root simplex.
    pub fn domain_contains(&self, p: &Point, tol: f64) -> bool {
        self.roots().any(|r| r.simplex.contains(p, tol))
    }

    /// Leaves containing `p`, found by descending from the roots.
    pub fn incident_leaves(&self, p: &Point, tol: f64) -> Result<Vec<NodeId>> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        // Internal nodes are only a filter; a loose tolerance avoids pruning
        // a leaf that accepts p near a shared facet.
        let prune_tol = (tol * 1e4).max(1e-6);
        let mut out = Vec::new();
        let mut stack: Vec<NodeId> = self.roots().map(|n| n.id).collect();
        stack.reverse();
        while let Some(id) = stack.pop() {
            let node = &self.nodes[id];
            if node.is_leaf() {
                if node.simplex.contains(p, tol) {
                    out.push(id);
                }
            } else if node.simplex.contains(p, prune_tol) {
                stack.extend(node.children.iter().rev());
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Number of leaves containing `p`.
    pub fn vertex_valence(&self, p: &Point, tol: f64) -> Result<usize> {
        if p.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: p.dim(),
            });
        }
        if !self.domain_contains(p, tol) {
            return Err(Error::PointOutsideDomain);
        }
        Ok(self.incident_leaves(p, tol)?.len())
    }

    /// Valence of every registry vertex, indexed by vertex id.
    pub fn registry_valences(&self, tol: f64) -> Result<Vec<Vec<NodeId>>> {
        self.registry
            .points()
            .iter()
            .map(|p| self.incident_leaves(p, tol))
            .collect()
    }

    /// Registry vertex of largest valence (smallest id on ties).
    pub fn max_valence(&self) -> Result<(VertexId, Point, usize)> {
        if self.leaf_count() == 0 {
            return Err(Error::EmptyPartition);
        }
        let mut best: Option<(VertexId, usize)> = None;
        for (id, p) in self.registry.points().iter().enumerate() {
            let count = self.incident_leaves(p, DEFAULT_MEMBERSHIP_TOL)?.len();
            if best.is_none_or(|(_, c)| count > c) {
                best = Some((id, count));
            }
        }
        let (id, count) = best.ok_or(Error::EmptyPartition)?;
        Ok((id, self.registry.get(id).clone(), count))
    }

    /// For each generation `g`, the largest number of generation-`g` nodes
    /// sharing a registry vertex. Nodes of one generation have disjoint
    /// interiors, so each entry is a valence count over simplices that
    /// existed at some point during refinement.
    pub fn max_valence_by_generation(&self) -> Vec<usize> {
        let mut by_gen: BTreeMap<u32, Vec<&Node>> = BTreeMap::new();
        for n in &self.nodes {
            by_gen.entry(n.generation).or_default().push(n);
        }
        let max_gen = by_gen.keys().next_back().copied().unwrap_or(0) as usize;
        let mut out = vec![0; if self.nodes.is_empty() { 0 } else { max_gen + 1 }];
        for (g, nodes) in by_gen {
            let boxes: Vec<(Vec<f64>, Vec<f64>)> = nodes.iter().map(|n| bounding_box(&n.simplex)).collect();
            let slack = 1e-6 * self.registry.tolerance() / VERTEX_MERGE_REL;
            for p in self.registry.points() {
                let count = nodes
                    .iter()
                    .zip(&boxes)
                    .filter(|(_, (lo, hi))| {
                        p.coords()
                            .iter()
                            .zip(lo.iter().zip(hi))
                            .all(|(x, (l, h))| *x >= l - slack && *x <= h + slack)
                    })
                    .filter(|(n, _)| n.simplex.contains(p, DEFAULT_MEMBERSHIP_TOL))
                    .count();
                out[g as usize] = out[g as usize].max(count);
            }
        }
        out
    }

    /// Whether `p` is in the domain and off its boundary. A root facet is on
    /// the boundary when no other root shares its vertex ids.
    pub fn is_interior_point(&self, p: &Point, tol: f64) -> bool {
        let mut facet_count: HashMap<Vec<VertexId>, usize> = HashMap::new();
        for r in self.roots() {
            for skip in 0..r.vertex_ids.len() {
                *facet_count.entry(facet_key(&r.vertex_ids, skip)).or_default() += 1;
            }
        }
        let mut inside = false;
        for r in self.roots() {
            let Ok((bary, contained)) = r.simplex.barycentric(p, tol) else {
                return false;
            };
            if !contained {
                continue;
            }
            inside = true;
            for (i, &l) in bary.weights().iter().enumerate() {
                if l <= tol && facet_count[&facet_key(&r.vertex_ids, i)] == 1 {
                    return false;
                }
            }
        }
        inside
    }
}

fn facet_key(ids: &[VertexId], skip: usize) -> Vec<VertexId> {
    let mut k: Vec<VertexId> = ids
        .iter()
        .enumerate()
        .filter(|&(i, _)| i != skip)
        .map(|(_, &v)| v)
        .collect();
    k.sort_unstable();
    k
}

fn bounding_box(s: &Simplex) -> (Vec<f64>, Vec<f64>) {
    let d = s.dim();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for v in s.vertices() {
        for (k, &x) in v.coords().iter().enumerate() {
            lo[k] = lo[k].min(x);
            hi[k] = hi[k].max(x);
        }
    }
    (lo, hi)
}

/// All permutations of `0..n` in lexicographic order.
fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn rec(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                rec(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::with_capacity(n), &mut vec![false; n], &mut out);
    out
}
