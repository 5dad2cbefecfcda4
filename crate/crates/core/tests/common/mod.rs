#![allow(dead_code)]

use rand::Rng;
use regpart::cone::regular_simplex_ratio;
use regpart::{Point, Simplex};

/// Simplex with vertices uniform in `[-1, 1]^d`, redrawn until its ratio is
/// at least `min_quality` times that of the regular simplex.
pub fn random_simplex<R: Rng + ?Sized>(rng: &mut R, d: usize, min_quality: f64) -> Simplex {
    let min_ratio = min_quality * regular_simplex_ratio(d);
    loop {
        let vertices: Vec<Point> = (0..=d)
            .map(|_| Point::new((0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).unwrap())
            .collect();
        if let Ok(s) = Simplex::new(vertices) {
            if s.regularity_ratio() >= min_ratio {
                return s;
            }
        }
    }
}

/// Simplex from a flat coordinate list of `(d + 1) * d` values.
pub fn simplex_from_flat(d: usize, flat: &[f64]) -> regpart::Result<Simplex> {
    let vertices = flat
        .chunks_exact(d)
        .map(|c| Point::new(c.to_vec()))
        .collect::<regpart::Result<Vec<_>>>()?;
    Simplex::new(vertices)
}

/// Largest pairwise vertex distance by direct enumeration.
pub fn brute_longest_edge(s: &Simplex) -> f64 {
    let v = s.vertices();
    let mut best = 0.0f64;
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            best = best.max(v[i].distance(&v[j]));
        }
    }
    best
}
