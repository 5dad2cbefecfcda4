mod common;

use common::{brute_longest_edge, simplex_from_flat};
use nalgebra::DMatrix;
use proptest::prelude::*;
use regpart::geometry::farthest_pair;
use regpart::{Point, Simplex};

/// Volume from pairwise squared distances only.
fn cayley_menger_volume(s: &Simplex) -> f64 {
    let d = s.dim();
    let v = s.vertices();
    let n = d + 2;
    let cm = DMatrix::from_fn(n, n, |i, j| match (i, j) {
        (0, 0) => 0.0,
        (0, _) | (_, 0) => 1.0,
        _ => {
            let (a, b) = (&v[i - 1], &v[j - 1]);
            a.distance(b).powi(2)
        }
    });
    let sign = if (d + 1).is_multiple_of(2) { 1.0 } else { -1.0 };
    let scale = 2f64.powi(d as i32) * (1..=d).map(|k| k as f64).product::<f64>().powi(2);
    (sign * cm.determinant() / scale).sqrt()
}

fn random_orthogonal(d: usize, entries: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(d, d, entries).qr().q()
}

fn transform(s: &Simplex, q: &DMatrix<f64>, scale: f64, shift: &[f64]) -> Simplex {
    let vertices = s
        .vertices()
        .iter()
        .map(|p| {
            let x = q * nalgebra::DVector::from_column_slice(p.coords());
            Point::new(x.iter().zip(shift).map(|(xi, t)| scale * xi + t).collect()).unwrap()
        })
        .collect();
    Simplex::new(vertices).unwrap()
}

fn simplex_input() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (2usize..=5).prop_flat_map(|d| (Just(d), prop::collection::vec(-1.0f64..1.0, (d + 1) * d)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn longest_edge_matches_enumeration((d, flat) in simplex_input()) {
        let s = simplex_from_flat(d, &flat);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let e = s.longest_edge();
        prop_assert_eq!(e.length, brute_longest_edge(&s));
        let (i, j) = e.edge;
        prop_assert!(i < j);
        prop_assert_eq!(s.vertex(i).distance(s.vertex(j)), e.length);
    }

    #[test]
    fn sampled_points_never_exceed_longest_edge((d, flat) in simplex_input(), seed in any::<u64>()) {
        let s = simplex_from_flat(d, &flat);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        let h = s.longest_edge().length;
        let (dist, i, j) = s.diameter_oracle_witness(500, seed);
        prop_assert!(dist <= h + 1e-9);
        prop_assert!(i <= d && j <= d, "witness ({}, {}) is not a vertex pair", i, j);
    }

    #[test]
    fn volume_matches_cayley_menger((d, flat) in simplex_input()) {
        let s = simplex_from_flat(d, &flat);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        prop_assume!(s.regularity_ratio() > 1e-3);
        let cm = cayley_menger_volume(&s);
        prop_assert!((s.volume() - cm).abs() <= 1e-10 * cm, "{} vs {}", s.volume(), cm);
    }

    #[test]
    fn ratio_is_similarity_invariant(
        (d, flat) in simplex_input(),
        q_entries in prop::collection::vec(-1.0f64..1.0, 25),
        log_scale in -3.0f64..3.0,
        shift in prop::collection::vec(-10.0f64..10.0, 5),
    ) {
        let s = simplex_from_flat(d, &flat);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        prop_assume!(s.regularity_ratio() > 1e-3);
        let q = random_orthogonal(d, &q_entries[..d * d]);
        prop_assume!(q.iter().all(|x| x.is_finite()));
        let t = transform(&s, &q, 10f64.powf(log_scale), &shift[..d]);
        let (a, b) = (s.regularity_ratio(), t.regularity_ratio());
        prop_assert!((a - b).abs() <= 1e-10 * a, "{} vs {}", a, b);
    }

    #[test]
    fn barycentric_round_trip((d, flat) in simplex_input(), raw in prop::collection::vec(0.0f64..1.0, 6)) {
        let s = simplex_from_flat(d, &flat);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        prop_assume!(s.regularity_ratio() > 1e-3);
        let total: f64 = raw[..=d].iter().sum();
        prop_assume!(total > 1e-6);
        let w: Vec<f64> = raw[..=d].iter().map(|x| x / total).collect();
        let p = s.point_at(&w);
        let (bc, inside) = s.barycentric(&p, 1e-9).unwrap();
        prop_assert!(inside);
        for (a, b) in bc.weights().iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-9, "{} vs {}", a, b);
        }
    }

    #[test]
    fn farthest_pair_matches_quadratic_scan(coords in prop::collection::vec(-5.0f64..5.0, 2..120)) {
        let pts: Vec<Point> = coords.chunks_exact(2).map(|c| Point::new(c.to_vec()).unwrap()).collect();
        prop_assume!(pts.len() >= 2);
        let mut best = 0.0f64;
        for a in &pts {
            for b in &pts {
                best = best.max(a.distance(b));
            }
        }
        let (dist, i, j) = farthest_pair(&pts);
        prop_assert!((dist - best).abs() <= 1e-12 * best.max(1.0));
        prop_assert!((pts[i].distance(&pts[j]) - best).abs() <= 1e-12 * best.max(1.0));
    }
}
