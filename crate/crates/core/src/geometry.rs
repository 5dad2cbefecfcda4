//! Points and simplices in R^d: volume, longest edge, regularity ratio,
//! barycentric membership and the canonical fixtures.
//!
//! A [`Simplex`] is validated on construction: all vertices share one
//! dimension `d >= 2`, there are exactly `d + 1` of them, and the volume
//! exceeds `1e-12 * h^d` where `h` is the longest edge. The LU factors of
//! the edge matrix are kept with the simplex so membership queries reuse
//! them.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::Lu;
use crate::sampling;

/// Relative degeneracy threshold: a simplex needs `vol > DEGENERACY_RATIO * h^d`.
pub const DEGENERACY_RATIO: f64 = 1e-12;

/// Default barycentric membership tolerance.
pub const DEFAULT_MEMBERSHIP_TOL: f64 = 1e-9;

/// Squared edge lengths within this relative gap of the maximum count as tied.
const EDGE_TIE_REL: f64 = 1e-12;

/// A point with finite coordinates.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct Point(Vec<f64>);

impl Point {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::UnsupportedDimension(0));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFiniteCoordinate);
        }
        Ok(Self(coords))
    }

    pub fn origin(d: usize) -> Self {
        Self(vec![0.0; d])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.0
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.0
    }

    pub fn distance(&self, other: &Point) -> f64 {
        distance(&self.0, &other.0)
    }

    pub fn midpoint(&self, other: &Point) -> Point {
        Point(
            self.0
                .iter()
                .zip(&other.0)
                .map(|(a, b)| 0.5 * (a + b))
                .collect(),
        )
    }
}

impl TryFrom<Vec<f64>> for Point {
    type Error = Error;

    fn try_from(coords: Vec<f64>) -> Result<Self> {
        Point::new(coords)
    }
}

impl From<Point> for Vec<f64> {
    fn from(p: Point) -> Self {
        p.0
    }
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

pub(crate) fn distance(a: &[f64], b: &[f64]) -> f64 {
    squared_distance(a, b).sqrt()
}

/// Barycentric weights of a point with respect to a simplex.
#[derive(Clone, Debug, PartialEq)]
pub struct BarycentricCoords(Vec<f64>);

impl BarycentricCoords {
    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn min_weight(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Longest edge of a simplex: its length and the canonical vertex pair.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LongestEdge {
    pub length: f64,
    /// Local vertex indices `(i, j)` with `i < j`; the lexicographically
    /// smallest pair among all edges tied for the maximum.
    pub edge: (usize, usize),
}

/// Which fixture [`Simplex::canonical`] builds.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SimplexKind {
    /// `{0, e_1, ..., e_d}`.
    UnitCorner,
    /// All edges of length 1, centroid at the origin.
    Regular,
}

/// A nondegenerate simplex of `d + 1` vertices in R^d.
#[derive(Clone, Debug)]
pub struct Simplex {
    id: String,
    vertices: Vec<Point>,
    volume: f64,
    // Columns are v_i - v_0 for i = 1..=d.
    edge_lu: Lu,
}

impl PartialEq for Simplex {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.vertices == other.vertices
    }
}

impl Simplex {
    /// Validate `vertices` and build a simplex with an empty id.
    pub fn new(vertices: Vec<Point>) -> Result<Self> {
        Self::with_id(String::new(), vertices)
    }

    pub fn with_id(id: impl Into<String>, vertices: Vec<Point>) -> Result<Self> {
        let first = vertices.first().ok_or(Error::ArityError {
            expected: 3,
            found: 0,
        })?;
        let d = first.dim();
        if let Some(bad) = vertices.iter().find(|p| p.dim() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: bad.dim(),
            });
        }
        if d < 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        if vertices.len() != d + 1 {
            return Err(Error::ArityError {
                expected: d + 1,
                found: vertices.len(),
            });
        }

        let edge_lu = Lu::new(d, &edge_matrix(&vertices));
        let volume = edge_lu.determinant().abs() / factorial(d);
        let h = max_squared_edge(&vertices).sqrt();
        let threshold = DEGENERACY_RATIO * h.powi(d as i32);
        if edge_lu.is_singular() || !(volume > threshold) {
            return Err(Error::DegenerateSimplex { volume, threshold });
        }
        Ok(Self {
            id: id.into(),
            vertices,
            volume,
            edge_lu,
        })
    }

    /// Build one of the standard fixtures in dimension `d`.
    pub fn canonical(kind: SimplexKind, d: usize) -> Result<Self> {
        if d < 2 {
            return Err(Error::UnsupportedDimension(d));
        }
        let vertices = match kind {
            SimplexKind::UnitCorner => {
                let mut vs = vec![Point::origin(d)];
                vs.extend((0..d).map(|i| {
                    let mut c = vec![0.0; d];
                    c[i] = 1.0;
                    Point(c)
                }));
                vs
            }
            SimplexKind::Regular => regular_vertices(d),
        };
        let name = match kind {
            SimplexKind::UnitCorner => "unit-corner",
            SimplexKind::Regular => "regular",
        };
        Self::with_id(format!("{name}-{d}"), vertices)
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn set_id(&mut self, id: impl Into<String>) {
        self.id = id.into();
    }

    pub fn dim(&self) -> usize {
        self.vertices.len() - 1
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn vertex(&self, i: usize) -> &Point {
        &self.vertices[i]
    }

    /// `|det(E)| / d!`, cached at construction.
    pub fn volume(&self) -> f64 {
        self.volume
    }

    pub fn longest_edge(&self) -> LongestEdge {
        let max_sq = max_squared_edge(&self.vertices);
        let cutoff = max_sq * (1.0 - EDGE_TIE_REL);
        let n = self.vertices.len();
        let edge = (0..n)
            .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
            .find(|&(i, j)| {
                squared_distance(self.vertices[i].coords(), self.vertices[j].coords()) >= cutoff
            })
            .expect("a simplex has at least one edge");
        LongestEdge {
            length: max_sq.sqrt(),
            edge,
        }
    }

    /// `vol(S) / h(S)^d`.
    pub fn regularity_ratio(&self) -> f64 {
        // h^d from h^2 so even dimensions avoid the sqrt round trip.
        let d = self.dim();
        let h2 = max_squared_edge(&self.vertices);
        let mut hd = h2.powi((d / 2) as i32);
        if d % 2 == 1 {
            hd *= h2.sqrt();
        }
        self.volume / hd
    }

    pub fn centroid(&self) -> Point {
        let d = self.dim();
        let mut c = vec![0.0; d];
        for v in &self.vertices {
            for (acc, x) in c.iter_mut().zip(v.coords()) {
                *acc += x;
            }
        }
        let scale = 1.0 / (d + 1) as f64;
        c.iter_mut().for_each(|x| *x *= scale);
        Point(c)
    }

    /// Barycentric coordinates of `p`, and whether every weight is `>= -tol`.
    pub fn barycentric(&self, p: &Point, tol: f64) -> Result<(BarycentricCoords, bool)> {
        if p.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: p.dim(),
            });
        }
        let w = self.barycentric_weights(p.coords());
        let inside = w.iter().all(|&l| l >= -tol);
        Ok((BarycentricCoords(w), inside))
    }

    pub(crate) fn barycentric_weights(&self, p: &[f64]) -> Vec<f64> {
        let d = self.dim();
        let v0 = self.vertices[0].coords();
        let rhs: Vec<f64> = p.iter().zip(v0).map(|(a, b)| a - b).collect();
        let mut w = vec![0.0; d + 1];
        self.edge_lu.solve_into(&rhs, &mut w[1..]);
        w[0] = 1.0 - w[1..].iter().sum::<f64>();
        w
    }

    /// Membership with tolerance on the barycentric weights.
    pub fn contains(&self, p: &Point, tol: f64) -> bool {
        p.dim() == self.dim() && self.barycentric_weights(p.coords()).iter().all(|&l| l >= -tol)
    }

    /// Point with the given barycentric weights.
    pub fn point_at(&self, weights: &[f64]) -> Point {
        let mut c = vec![0.0; self.dim()];
        for (v, &w) in self.vertices.iter().zip(weights) {
            for (acc, x) in c.iter_mut().zip(v.coords()) {
                *acc += w * x;
            }
        }
        Point(c)
    }

    /// Uniform sample from the simplex via Dirichlet(1, ..., 1) weights.
    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        let w = sampling::dirichlet_ones(rng, self.vertices.len());
        self.point_at(&w)
    }

    /// Maximum pairwise distance over the vertices plus `samples` uniform
    /// interior points. Deterministic given `seed`.
    pub fn diameter_oracle(&self, samples: usize, seed: u64) -> f64 {
        self.diameter_oracle_witness(samples, seed).0
    }

    /// Like [`Simplex::diameter_oracle`], also returning the indices of the
    /// maximizing pair. Indices `< d + 1` are the vertices.
    pub fn diameter_oracle_witness(&self, samples: usize, seed: u64) -> (f64, usize, usize) {
        let mut rng = sampling::rng(seed, 0);
        let mut pts: Vec<Point> = self.vertices.clone();
        pts.extend((0..samples).map(|_| self.sample_uniform(&mut rng)));
        farthest_pair(&pts)
    }
}

/// Exact farthest pair of a point set.
///
/// Every pair is bounded by `r_a + r_b` (radii about the centroid), so a scan
/// in decreasing radius order stops once that bound cannot beat the current
/// best. The result equals the all-pairs scan.
pub fn farthest_pair(pts: &[Point]) -> (f64, usize, usize) {
    assert!(pts.len() >= 2, "need at least two points");
    let d = pts[0].dim();
    let mut c = vec![0.0; d];
    for p in pts {
        for (acc, x) in c.iter_mut().zip(p.coords()) {
            *acc += x;
        }
    }
    c.iter_mut().for_each(|x| *x /= pts.len() as f64);
    let mut order: Vec<(f64, usize)> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| (distance(p.coords(), &c), i))
        .collect();
    order.sort_by(|a, b| b.0.total_cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut best = (-1.0_f64, 0, 1);
    for (ai, &(ra, a)) in order.iter().enumerate() {
        if ra + order[0].0 < best.0 {
            break;
        }
        for &(rb, b) in &order[..ai] {
            if ra + rb < best.0 {
                break;
            }
            let dist = pts[a].distance(&pts[b]);
            let pair = (a.min(b), a.max(b));
            if dist > best.0 || (dist == best.0 && pair < (best.1, best.2)) {
                best = (dist, pair.0, pair.1);
            }
        }
    }
    best
}

fn edge_matrix(vertices: &[Point]) -> Vec<f64> {
    let d = vertices.len() - 1;
    let v0 = vertices[0].coords();
    let mut e = vec![0.0; d * d];
    for (c, v) in vertices[1..].iter().enumerate() {
        for r in 0..d {
            e[r * d + c] = v.coords()[r] - v0[r];
        }
    }
    e
}

fn max_squared_edge(vertices: &[Point]) -> f64 {
    let mut m = 0.0_f64;
    for (i, a) in vertices.iter().enumerate() {
        for b in &vertices[i + 1..] {
            m = m.max(squared_distance(a.coords(), b.coords()));
        }
    }
    m
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|k| k as f64).product()
}

// e_i / sqrt(2) for i < d, then a * (1, ..., 1) at unit distance from each,
// shifted so the centroid sits at the origin.
fn regular_vertices(d: usize) -> Vec<Point> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let a = (1.0 - ((d + 1) as f64).sqrt()) / (d as f64) * s;
    let mut vs: Vec<Vec<f64>> = (0..d)
        .map(|i| {
            let mut c = vec![0.0; d];
            c[i] = s;
            c
        })
        .collect();
    vs.push(vec![a; d]);
    let mut centroid = vec![0.0; d];
    for v in &vs {
        for (acc, x) in centroid.iter_mut().zip(v) {
            *acc += x / (d + 1) as f64;
        }
    }
    vs.into_iter()
        .map(|v| Point(v.iter().zip(&centroid).map(|(x, c)| x - c).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn right_triangle() -> Simplex {
        Simplex::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0])]).unwrap()
    }

    #[test]
    fn make_simplex_cases() {
        assert_eq!(right_triangle().dim(), 2);
        let collinear = Simplex::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[2.0, 0.0])]);
        assert!(matches!(collinear, Err(Error::DegenerateSimplex { .. })));
        let mixed = Simplex::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0]), pt(&[0.0, 1.0, 0.0])]);
        assert_eq!(
            mixed.unwrap_err(),
            Error::DimensionMismatch {
                expected: 2,
                found: 3
            }
        );
    }

    #[test]
    fn arity_and_dimension_errors() {
        let two = Simplex::new(vec![pt(&[0.0, 0.0]), pt(&[1.0, 0.0])]);
        assert!(matches!(two, Err(Error::ArityError { expected: 3, found: 2 })));
        let line = Simplex::new(vec![pt(&[0.0]), pt(&[1.0])]);
        assert_eq!(line.unwrap_err(), Error::UnsupportedDimension(1));
        assert_eq!(Point::new(vec![f64::NAN, 0.0]), Err(Error::NonFiniteCoordinate));
    }

    #[test]
    fn near_degenerate_is_scale_free() {
        // Sliver with ratio ~1e-13: rejected at every scale.
        for scale in [1e-6, 1.0, 1e6] {
            let s = Simplex::new(vec![
                pt(&[0.0, 0.0]),
                pt(&[scale, 0.0]),
                pt(&[0.5 * scale, 2e-13 * scale]),
            ]);
            assert!(matches!(s, Err(Error::DegenerateSimplex { .. })), "scale {scale}");
        }
    }

    #[test]
    fn volumes() {
        assert!((right_triangle().volume() - 0.5).abs() < 1e-15);
        let corner3 = Simplex::canonical(SimplexKind::UnitCorner, 3).unwrap();
        assert!((corner3.volume() - 1.0 / 6.0).abs() < 1e-15);
        let reg3 = Simplex::canonical(SimplexKind::Regular, 3).unwrap();
        // Cayley-Menger value 1/(6 sqrt 2), evaluated at 30 digits.
        assert!((reg3.volume() - 0.117851130197757920733).abs() < 1e-12);
    }

    #[test]
    fn longest_edges() {
        let le = right_triangle().longest_edge();
        assert!((le.length - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(le.edge, (1, 2));
        for d in 2..=7 {
            let le = Simplex::canonical(SimplexKind::Regular, d).unwrap().longest_edge();
            assert!((le.length - 1.0).abs() < 1e-12);
            assert_eq!(le.edge, (0, 1));
        }
        let t345 = Simplex::new(vec![pt(&[0.0, 0.0]), pt(&[3.0, 0.0]), pt(&[0.0, 4.0])]).unwrap();
        assert_eq!(t345.longest_edge(), LongestEdge { length: 5.0, edge: (1, 2) });
    }

    #[test]
    fn regularity_ratios() {
        let eq = Simplex::canonical(SimplexKind::Regular, 2).unwrap();
        assert!((eq.regularity_ratio() - 3f64.sqrt() / 4.0).abs() < 1e-12);
        assert!((right_triangle().regularity_ratio() - 0.25).abs() < 1e-15);
        let corner3 = Simplex::canonical(SimplexKind::UnitCorner, 3).unwrap();
        assert!((corner3.regularity_ratio() - 0.0589255650988789603667).abs() < 1e-12);
    }

    #[test]
    fn barycentric_examples() {
        let s = right_triangle();
        let (b, inside) = s.barycentric(&pt(&[0.0, 0.0]), 1e-9).unwrap();
        assert!(inside);
        assert_eq!(b.weights(), &[1.0, 0.0, 0.0]);

        let (b, inside) = s.barycentric(&s.centroid(), 1e-9).unwrap();
        assert!(inside);
        for w in b.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }

        let (b, inside) = s.barycentric(&pt(&[1.0, 1.0]), 1e-9).unwrap();
        assert!(!inside);
        assert_eq!(b.weights(), &[-1.0, 1.0, 1.0]);

        assert!(s.barycentric(&pt(&[0.0, 0.0, 0.0]), 1e-9).is_err());
    }

    #[test]
    fn canonical_fixtures() {
        let c2 = Simplex::canonical(SimplexKind::UnitCorner, 2).unwrap();
        assert_eq!(c2.vertices(), right_triangle().vertices());
        for d in [2, 5, 8] {
            let r = Simplex::canonical(SimplexKind::Regular, d).unwrap();
            let vs = r.vertices();
            for i in 0..=d {
                for j in i + 1..=d {
                    assert!((vs[i].distance(&vs[j]) - 1.0).abs() < 1e-12, "d={d} ({i},{j})");
                }
            }
            assert!(r.centroid().coords().iter().all(|x| x.abs() < 1e-14));
        }
        assert_eq!(
            Simplex::canonical(SimplexKind::Regular, 1).unwrap_err(),
            Error::UnsupportedDimension(1)
        );
    }

    #[test]
    fn diameter_oracle_hits_vertices() {
        let s = right_triangle();
        for samples in [2, 100, 5000] {
            let (dia, i, j) = s.diameter_oracle_witness(samples, 7);
            assert!((dia - 2f64.sqrt()).abs() < 1e-9);
            assert_eq!((i, j), (1, 2));
        }
        let reg = Simplex::canonical(SimplexKind::Regular, 3).unwrap();
        assert!((reg.diameter_oracle(10_000, 42) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn farthest_pair_matches_all_pairs() {
        let mut rng = sampling::rng(3, 0);
        let pts: Vec<Point> = (0..300)
            .map(|_| pt(&[rng.random::<f64>(), rng.random::<f64>(), rng.random::<f64>()]))
            .collect();
        let mut brute = 0.0_f64;
        for a in &pts {
            for b in &pts {
                brute = brute.max(a.distance(b));
            }
        }
        assert_eq!(farthest_pair(&pts).0, brute);
    }
}
