//! Tangent cones of simplices, Monte-Carlo solid-angle fractions, and the
//! closed-form constants of the intersection-number bound.
//!
//! A cone `{x : W x >= 0}` is stored through a generator matrix `G` and a
//! list of active constraints on `mu = G^{-1} x` (the rows of `G^{-1}` are
//! the inward facet normals). Membership solves `G mu = x` with LU factors
//! computed once per cone, and never materializes the inverse.
//!
//! The solid-angle fraction `A(B(apex, r) ∩ cone) / A(B(apex, r))` does not
//! depend on `r`, and equals `∫_cone e^{-|x|^2} dx / π^{d/2}` because the
//! Gaussian weight separates into an angular and a radial factor.

use std::f64::consts::{E, PI};

use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{factorial, Point, Simplex};
use crate::linalg::Lu;
use crate::sampling;

/// Directions per shard; shard `k` draws from stream `k` of the seed.
pub const SHARD_SIZE: u64 = 1 << 16;

/// Default number of Monte-Carlo samples per cone.
pub const DEFAULT_SAMPLES: u64 = 1_000_000;

const GAUSSIAN_ESTIMATOR_KEY: u64 = 0x6761_7573_7369_616e;

/// Sample count and seed for a Monte-Carlo estimate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct MonteCarloConfig {
    samples: u64,
    seed: u64,
}

impl MonteCarloConfig {
    pub fn new(samples: u64, seed: u64) -> Result<Self> {
        if samples == 0 {
            return Err(Error::InvalidArgument("samples must be >= 1".into()));
        }
        Ok(Self { samples, seed })
    }

    pub fn samples(&self) -> u64 {
        self.samples
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Same sample count, different seed.
    pub fn with_seed(&self, seed: u64) -> Self {
        Self { seed, ..*self }
    }
}

impl Default for MonteCarloConfig {
    fn default() -> Self {
        Self {
            samples: DEFAULT_SAMPLES,
            seed: sampling::DEFAULT_SEED,
        }
    }
}

/// Monte-Carlo estimate of a solid-angle fraction.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FractionEstimate {
    pub fraction: f64,
    /// `fraction * π^{d/2}`.
    pub gaussian_integral: f64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

impl FractionEstimate {
    fn from_hits(hits: u64, d: usize, mc: &MonteCarloConfig) -> Self {
        let n = mc.samples as f64;
        let fraction = hits as f64 / n;
        Self {
            fraction,
            gaussian_integral: fraction * gaussian_total_mass(d),
            stderr: (fraction * (1.0 - fraction) / n).sqrt(),
            samples: mc.samples,
            seed: mc.seed,
        }
    }
}

/// How a cone arose.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConeKind {
    /// No active constraint: the apex is interior.
    FullSpace,
    /// Apex at a vertex; generators are the edges leaving it.
    Vertex,
    /// Apex in the relative interior of a face; `active` facet constraints.
    Face { active: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Constraint {
    /// `mu[k] >= 0`.
    Coord(usize),
    /// `-(mu[0] + ... + mu[d-1]) >= 0`.
    NegSum,
}

/// Tangent cone of a simplex at a point.
#[derive(Clone, Debug)]
pub struct VertexCone {
    apex: Point,
    kind: ConeKind,
    /// Row-major `d x d`; column `k` is the k-th edge direction.
    edge_directions: Vec<f64>,
    lu: Lu,
    constraints: Vec<Constraint>,
}

impl VertexCone {
    /// The cone `{sum_k mu_k g_k : mu >= 0}` spanned by `d` generator columns.
    pub fn from_generators(apex: Point, generators: &[Vec<f64>]) -> Result<Self> {
        let d = apex.dim();
        if generators.len() != d {
            return Err(Error::ArityError {
                expected: d,
                found: generators.len(),
            });
        }
        if let Some(g) = generators.iter().find(|g| g.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: g.len(),
            });
        }
        let mut m = vec![0.0; d * d];
        for (c, g) in generators.iter().enumerate() {
            for r in 0..d {
                m[r * d + c] = g[r];
            }
        }
        let lu = Lu::new(d, &m);
        if lu.is_singular() {
            return Err(Error::DegenerateSimplex {
                volume: 0.0,
                threshold: 0.0,
            });
        }
        Ok(Self {
            apex,
            kind: ConeKind::Vertex,
            edge_directions: m,
            lu,
            constraints: (0..d).map(Constraint::Coord).collect(),
        })
    }

    /// All of R^d.
    pub fn full_space(apex: Point) -> Self {
        let d = apex.dim();
        let mut m = vec![0.0; d * d];
        for i in 0..d {
            m[i * d + i] = 1.0;
        }
        Self {
            apex,
            kind: ConeKind::FullSpace,
            lu: Lu::new(d, &m),
            edge_directions: m,
            constraints: Vec::new(),
        }
    }

    /// Tangent cone of `s` at `p`.
    ///
    /// Barycentric weights within `tol` of zero mark the active facets. An
    /// interior point yields the full space; a vertex yields the cone of its
    /// `d` outgoing edges.
    pub fn at_point(s: &Simplex, p: &Point, tol: f64) -> Result<Self> {
        let (bary, inside) = s.barycentric(p, tol)?;
        if !inside {
            return Err(Error::PointOutsideSimplex);
        }
        let d = s.dim();
        let active: Vec<usize> = bary
            .weights()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l <= tol)
            .map(|(i, _)| i)
            .collect();

        match active.len() {
            0 => Ok(Self::full_space(p.clone())),
            n if n == d => {
                let j = (0..=d).find(|i| !active.contains(i)).unwrap();
                Self::at_vertex(s, j)
            }
            n => {
                // Generators v_i - v_0; the barycentric weight lambda_i grows
                // along x by mu_{i-1} (i >= 1) and lambda_0 by -sum(mu).
                let gens: Vec<Vec<f64>> = (1..=d)
                    .map(|i| edge_vector(s.vertex(0), s.vertex(i)))
                    .collect();
                let mut cone = Self::from_generators(p.clone(), &gens)?;
                cone.kind = ConeKind::Face { active: n };
                cone.constraints = active
                    .into_iter()
                    .map(|i| if i == 0 { Constraint::NegSum } else { Constraint::Coord(i - 1) })
                    .collect();
                Ok(cone)
            }
        }
    }

    /// Cone of the edges leaving vertex `j`.
    pub fn at_vertex(s: &Simplex, j: usize) -> Result<Self> {
        let apex = s.vertex(j);
        let gens: Vec<Vec<f64>> = (0..=s.dim())
            .filter(|&i| i != j)
            .map(|i| edge_vector(apex, s.vertex(i)))
            .collect();
        Self::from_generators(apex.clone(), &gens)
    }

    pub fn apex(&self) -> &Point {
        &self.apex
    }

    pub fn dim(&self) -> usize {
        self.apex.dim()
    }

    pub fn kind(&self) -> ConeKind {
        self.kind
    }

    pub fn is_full_space(&self) -> bool {
        self.constraints.is_empty()
    }

    /// Edge-direction columns.
    pub fn edge_directions(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        (0..d)
            .map(|c| (0..d).map(|r| self.edge_directions[r * d + c]).collect())
            .collect()
    }

    /// Same cone with every edge direction multiplied by `factor > 0`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor > 0.0 && factor.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "scale factor must be positive, got {factor}"
            )));
        }
        let m: Vec<f64> = self.edge_directions.iter().map(|x| x * factor).collect();
        Ok(Self {
            lu: Lu::new(self.dim(), &m),
            edge_directions: m,
            ..self.clone()
        })
    }

    /// Inward normals of the active facets (rows of the generator inverse).
    pub fn inward_normals(&self) -> Vec<Vec<f64>> {
        let d = self.dim();
        // Column k of the inverse, then read rows.
        let inv_cols: Vec<Vec<f64>> = (0..d)
            .map(|k| {
                let mut e = vec![0.0; d];
                e[k] = 1.0;
                self.lu.solve(&e)
            })
            .collect();
        let row = |r: usize| -> Vec<f64> { (0..d).map(|c| inv_cols[c][r]).collect() };
        self.constraints
            .iter()
            .map(|c| match *c {
                Constraint::Coord(k) => row(k),
                Constraint::NegSum => {
                    let mut n = vec![0.0; d];
                    for k in 0..d {
                        for (acc, x) in n.iter_mut().zip(row(k)) {
                            *acc -= x;
                        }
                    }
                    n
                }
            })
            .collect()
    }

    /// Whether the direction `x` (relative to the apex) lies in the cone.
    pub fn contains_direction(&self, x: &[f64]) -> bool {
        let mut mu = vec![0.0; self.dim()];
        self.contains_with(x, &mut mu)
    }

    #[inline]
    fn contains_with(&self, x: &[f64], mu: &mut [f64]) -> bool {
        if self.constraints.is_empty() {
            return true;
        }
        self.lu.solve_into(x, mu);
        self.constraints.iter().all(|c| match *c {
            Constraint::Coord(k) => mu[k] >= 0.0,
            Constraint::NegSum => mu.iter().sum::<f64>() <= 0.0,
        })
    }

    /// Solid-angle fraction from spherically symmetric directions.
    ///
    /// Work is split into shards of [`SHARD_SIZE`]; shard `k` uses stream `k`
    /// of `mc.seed`, so the estimate is the same for any worker count.
    pub fn solid_angle_fraction(&self, mc: &MonteCarloConfig) -> FractionEstimate {
        let d = self.dim();
        if self.is_full_space() {
            return FractionEstimate::from_hits(mc.samples, d, mc);
        }
        let normals = self.inward_normals().concat();
        let hits = shard_counts(mc, |shard, n| {
            let mut rng = sampling::rng(mc.seed, shard);
            let mut x = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..n {
                for xi in x.iter_mut() {
                    *xi = StandardNormal.sample(&mut rng);
                }
                hits += u64::from(inside_all(&normals, &x));
            }
            hits
        });
        FractionEstimate::from_hits(hits, d, mc)
    }

    /// Independent route to the same fraction: draw points from the density
    /// `e^{-|x|^2} / π^{d/2}` (polar Box-Muller, variance 1/2, separate seed
    /// stream) and count the ones inside the cone. The hit rate estimates
    /// `∫_cone e^{-|x|^2} dx / π^{d/2}`.
    pub fn gaussian_mass_fraction(&self, mc: &MonteCarloConfig) -> FractionEstimate {
        let d = self.dim();
        if self.is_full_space() {
            return FractionEstimate::from_hits(mc.samples, d, mc);
        }
        let seed = sampling::derive_seed(mc.seed, GAUSSIAN_ESTIMATOR_KEY);
        let normals = self.inward_normals().concat();
        let hits = shard_counts(mc, |shard, n| {
            let mut rng = sampling::rng(seed, shard);
            let mut x = vec![0.0; d];
            let mut hits = 0u64;
            for _ in 0..n {
                sampling::box_muller_fill(&mut rng, 0.5, &mut x);
                hits += u64::from(inside_all(&normals, &x));
            }
            hits
        });
        FractionEstimate::from_hits(hits, d, mc)
    }

    /// Exact fraction in the plane, where a cone is an angular sector.
    pub fn planar_fraction(&self) -> Option<f64> {
        if self.dim() != 2 {
            return None;
        }
        match (self.kind, self.constraints.len()) {
            (_, 0) => Some(1.0),
            (_, 1) => Some(0.5),
            _ => {
                let g = self.edge_directions();
                let cross = g[0][0] * g[1][1] - g[0][1] * g[1][0];
                let dot = g[0][0] * g[1][0] + g[0][1] * g[1][1];
                Some(cross.abs().atan2(dot) / (2.0 * PI))
            }
        }
    }
}

fn edge_vector(from: &Point, to: &Point) -> Vec<f64> {
    to.coords()
        .iter()
        .zip(from.coords())
        .map(|(a, b)| a - b)
        .collect()
}

/// `normals` is row-major with `x.len()` columns; true when every row has a
/// non-negative inner product with `x`.
#[inline]
fn inside_all(normals: &[f64], x: &[f64]) -> bool {
    normals
        .chunks_exact(x.len())
        .all(|n| n.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() >= 0.0)
}

fn shard_counts<F>(mc: &MonteCarloConfig, count: F) -> u64
where
    F: Fn(u64, u64) -> u64 + Sync,
{
    let shards = mc.samples.div_ceil(SHARD_SIZE);
    (0..shards)
        .into_par_iter()
        .map(|k| {
            let n = SHARD_SIZE.min(mc.samples - k * SHARD_SIZE);
            count(k, n)
        })
        .sum()
}

/// `∫_{R^d} e^{-|x|^2} dx = π^{d/2}`.
pub fn gaussian_total_mass(d: usize) -> f64 {
    PI.powf(d as f64 / 2.0)
}

/// Surface area of the sphere of radius `r` in R^d: `2 π^{d/2} / Γ(d/2) · r^{d-1}`.
pub fn sphere_surface_area(d: usize, r: f64) -> Result<f64> {
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidArgument(format!("radius must be positive, got {r}")));
    }
    let half = d as f64 / 2.0;
    Ok(2.0 * PI.powf(half) / libm::tgamma(half) * r.powi(d as i32 - 1))
}

/// `(2eπ/d)^{d/2}`: the dimension factor shared by both bounds.
pub fn dimension_factor(d: usize) -> f64 {
    let d = d as f64;
    (2.0 * E * PI / d).powf(d / 2.0)
}

/// Scale `x* = sqrt(d/2)` maximizing `x^d e^{-x^2}`.
pub fn optimal_scale(d: usize) -> f64 {
    (d as f64 / 2.0).sqrt()
}

/// `max_x x^d e^{-x^2} = (d/2)^{d/2} e^{-d/2}`.
pub fn max_scaled_gaussian(d: usize) -> f64 {
    let x = optimal_scale(d);
    x.powi(d as i32) * (-x * x).exp()
}

/// Guaranteed lower bound `ρ (d / (2eπ))^{d/2}` on the solid-angle fraction
/// at any point of a simplex with regularity ratio `rho`.
pub fn per_simplex_angle_bound(rho: f64, d: usize) -> f64 {
    rho / dimension_factor(d)
}

/// Ratio `vol / h^d` of the regular simplex: `sqrt(d+1) / (d! 2^{d/2})`.
/// No simplex in R^d has a larger ratio.
pub fn regular_simplex_ratio(d: usize) -> f64 {
    ((d + 1) as f64).sqrt() / (factorial(d) * 2f64.powf(d as f64 / 2.0))
}

/// Maximum number of simplices of an `eta`-regular partition that can
/// contain a point: `(1/η) (2eπ/d)^{d/2}`.
///
/// An `eta` above [`regular_simplex_ratio`] is unattainable; this logs a
/// warning but still returns the formula value.
pub fn max_intersection_bound(eta: f64, d: usize) -> Result<f64> {
    if !(eta > 0.0 && eta.is_finite()) {
        return Err(Error::InvalidEta(eta));
    }
    if d < 2 {
        return Err(Error::UnsupportedDimension(d));
    }
    let reg = regular_simplex_ratio(d);
    if eta > reg * (1.0 + 1e-12) {
        log::warn!("eta {eta} exceeds the regular-simplex ratio {reg} for d = {d}; no simplex attains it");
    }
    Ok(dimension_factor(d) / eta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::SimplexKind;

    fn pt(c: &[f64]) -> Point {
        Point::new(c.to_vec()).unwrap()
    }

    fn unit_triangle() -> Simplex {
        Simplex::canonical(SimplexKind::UnitCorner, 2).unwrap()
    }

    #[test]
    fn cone_at_vertex_is_quadrant() {
        let cone = VertexCone::at_point(&unit_triangle(), &pt(&[0.0, 0.0]), 1e-9).unwrap();
        assert_eq!(cone.kind(), ConeKind::Vertex);
        assert_eq!(cone.edge_directions(), vec![vec![1.0, 0.0], vec![0.0, 1.0]]);
        assert!(cone.contains_direction(&[0.3, 0.1]));
        assert!(!cone.contains_direction(&[-0.3, 0.1]));
    }

    #[test]
    fn cone_at_centroid_is_full_space() {
        let s = unit_triangle();
        let cone = VertexCone::at_point(&s, &s.centroid(), 1e-9).unwrap();
        assert!(cone.is_full_space());
        assert_eq!(cone.kind(), ConeKind::FullSpace);
    }

    #[test]
    fn cone_at_edge_midpoint_is_half_plane() {
        let cone = VertexCone::at_point(&unit_triangle(), &pt(&[0.5, 0.0]), 1e-9).unwrap();
        assert_eq!(cone.kind(), ConeKind::Face { active: 1 });
        let normals = cone.inward_normals();
        assert_eq!(normals.len(), 1);
        let n = &normals[0];
        let len = (n[0] * n[0] + n[1] * n[1]).sqrt();
        assert!((n[0] / len).abs() < 1e-15 && (n[1] / len - 1.0).abs() < 1e-15);
    }

    #[test]
    fn cone_outside_point_rejected() {
        let err = VertexCone::at_point(&unit_triangle(), &pt(&[1.0, 1.0]), 1e-9).unwrap_err();
        assert_eq!(err, Error::PointOutsideSimplex);
    }

    #[test]
    fn vertex_cone_normals_are_inward() {
        let s = Simplex::canonical(SimplexKind::Regular, 3).unwrap();
        for j in 0..4 {
            let cone = VertexCone::at_vertex(&s, j).unwrap();
            let c = s.centroid();
            let dir: Vec<f64> = c.coords().iter().zip(s.vertex(j).coords()).map(|(a, b)| a - b).collect();
            for n in cone.inward_normals() {
                assert!(n.iter().zip(&dir).map(|(a, b)| a * b).sum::<f64>() > 0.0);
            }
        }
    }

    #[test]
    fn full_space_fraction_is_exact() {
        for d in 2..=6 {
            let mc = MonteCarloConfig::new(1000, 1).unwrap();
            let est = VertexCone::full_space(Point::origin(d)).solid_angle_fraction(&mc);
            assert_eq!(est.fraction, 1.0);
            assert_eq!(est.stderr, 0.0);
            assert_eq!(est.gaussian_integral, PI.powf(d as f64 / 2.0));
        }
    }

    #[test]
    fn quadrant_fraction_within_three_stderr() {
        let mc = MonteCarloConfig::new(200_000, 42).unwrap();
        let cone = VertexCone::at_vertex(&unit_triangle(), 0).unwrap();
        let est = cone.solid_angle_fraction(&mc);
        assert!((est.fraction - 0.25).abs() <= 3.0 * est.stderr, "{est:?}");
        assert_eq!(est.gaussian_integral, est.fraction * PI);
    }

    #[test]
    fn estimates_are_deterministic() {
        let mc = MonteCarloConfig::new(150_000, 5).unwrap();
        let cone = VertexCone::at_vertex(&Simplex::canonical(SimplexKind::Regular, 4).unwrap(), 2).unwrap();
        assert_eq!(cone.solid_angle_fraction(&mc), cone.solid_angle_fraction(&mc));
        assert_ne!(
            cone.solid_angle_fraction(&mc).fraction,
            cone.solid_angle_fraction(&mc.with_seed(6)).fraction
        );
    }

    #[test]
    fn invalid_config_rejected() {
        assert!(MonteCarloConfig::new(0, 1).is_err());
    }

    #[test]
    fn planar_fraction_matches_angles() {
        let eq = Simplex::canonical(SimplexKind::Regular, 2).unwrap();
        for j in 0..3 {
            let f = VertexCone::at_vertex(&eq, j).unwrap().planar_fraction().unwrap();
            assert!((f - 1.0 / 6.0).abs() < 1e-14);
        }
        let t = unit_triangle();
        let f1 = VertexCone::at_vertex(&t, 1).unwrap().planar_fraction().unwrap();
        assert!((f1 - 0.125).abs() < 1e-15);
    }

    #[test]
    fn sphere_areas() {
        assert!((sphere_surface_area(2, 1.0).unwrap() - 2.0 * PI).abs() < 1e-14);
        assert!((sphere_surface_area(3, 1.0).unwrap() - 4.0 * PI).abs() < 1e-13);
        assert!((sphere_surface_area(3, 2.0).unwrap() - 16.0 * PI).abs() < 1e-12);
        assert_eq!(sphere_surface_area(1, 1.0), Err(Error::UnsupportedDimension(1)));
        assert!(sphere_surface_area(3, 0.0).is_err());
    }

    #[test]
    fn gamma_agrees_with_closed_forms() {
        // Γ(n) = (n-1)!, Γ(n + 1/2) = (2n)! √π / (4^n n!)
        for d in 2..=32usize {
            let got = libm::tgamma(d as f64 / 2.0);
            let want = if d % 2 == 0 {
                factorial(d / 2 - 1)
            } else {
                let n = (d - 1) / 2;
                factorial(2 * n) * PI.sqrt() / (4f64.powi(n as i32) * factorial(n))
            };
            assert!(((got - want) / want).abs() < 1e-12, "d={d}: {got} vs {want}");
        }
    }

    #[test]
    fn closed_form_constants() {
        // Reference values evaluated with 30-digit arithmetic.
        let rho = 3f64.sqrt() / 4.0;
        assert!((per_simplex_angle_bound(rho, 2) - 0.050705641487359356).abs() < 1e-15);
        assert!((per_simplex_angle_bound(0.25, 2) - 0.029274915762159580).abs() < 1e-15);
        assert!((max_intersection_bound(rho, 2).unwrap() - 19.721671409073774).abs() < 1e-12);
        assert!((max_intersection_bound(1.0, 2).unwrap() - 8.5397342226735671).abs() < 1e-12);
        assert!((max_intersection_bound(0.25, 2).unwrap() - 34.158936890694268).abs() < 1e-12);
        assert_eq!(optimal_scale(2), 1.0);
        assert!((max_scaled_gaussian(2) - (-1f64).exp()).abs() < 1e-16);
    }

    #[test]
    fn bound_edge_cases() {
        assert_eq!(max_intersection_bound(0.0, 2), Err(Error::InvalidEta(0.0)));
        assert_eq!(max_intersection_bound(-1.0, 3), Err(Error::InvalidEta(-1.0)));
        assert!(max_intersection_bound(f64::NAN, 3).is_err());
        // Unattainable eta still returns the formula value.
        assert!(max_intersection_bound(10.0, 2).is_ok());
        assert!((regular_simplex_ratio(2) - 3f64.sqrt() / 4.0).abs() < 1e-15);
        assert!((regular_simplex_ratio(3) - 0.117851130197757920733).abs() < 1e-15);
    }

    #[test]
    fn optimal_scale_maximizes() {
        for d in 2..=10 {
            let f = |x: f64| x.powi(d as i32) * (-x * x).exp();
            let best = max_scaled_gaussian(d);
            let x = optimal_scale(d);
            for k in 1..200 {
                let t = k as f64 * 0.05;
                assert!(f(t) <= best * (1.0 + 1e-14));
            }
            assert!(f(x * 1.001) < best && f(x * 0.999) < best);
        }
    }
}
