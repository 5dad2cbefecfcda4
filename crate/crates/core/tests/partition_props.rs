mod common;

use common::{random_simplex, simplex_from_flat};
use proptest::prelude::*;
use rand::Rng;
use regpart::cone::max_intersection_bound;
use regpart::partition::bisect_longest_edge;
use regpart::{Partition, Point, RefineStrategy};

const TOL: f64 = 1e-9;

/// Leaves containing `p`, by scanning every leaf.
fn flat_valence(p: &Partition, x: &Point) -> usize {
    p.leaves().filter(|n| n.simplex.contains(x, TOL)).count()
}

fn strategy() -> impl Strategy<Value = RefineStrategy> {
    prop_oneof![Just(RefineStrategy::BisectAllLeaves), Just(RefineStrategy::BisectLargestLeaf)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn refinement_conserves_volume_and_shrinks_edges(
        d in 2usize..=4,
        flat in prop::collection::vec(-1.0f64..1.0, 20),
        steps in 0usize..5,
        strat in strategy(),
    ) {
        let root = simplex_from_flat(d, &flat[..(d + 1) * d]);
        prop_assume!(root.is_ok());
        let root = root.unwrap();
        prop_assume!(root.regularity_ratio() > 1e-3);
        let p = Partition::from_roots(d, vec![root]).unwrap().refined(steps, strat).unwrap();
        let (leaf, total) = (p.leaf_volume(), p.root_volume());
        prop_assert!((leaf - total).abs() <= 1e-12 * total, "{} vs {}", leaf, total);
        for n in p.nodes() {
            if let Some(parent) = n.parent {
                let h_parent = p.node(parent).simplex.longest_edge().length;
                prop_assert!(n.simplex.longest_edge().length <= h_parent);
                prop_assert_eq!(n.generation, p.node(parent).generation + 1);
            }
        }
    }

    #[test]
    fn bisection_children_share_the_midpoint(d in 2usize..=5, flat in prop::collection::vec(-1.0f64..1.0, 30)) {
        let s = simplex_from_flat(d, &flat[..(d + 1) * d]);
        prop_assume!(s.is_ok());
        let s = s.unwrap();
        prop_assume!(s.regularity_ratio() > 1e-4);
        let (i, j) = s.longest_edge().edge;
        let m = s.vertex(i).midpoint(s.vertex(j));
        let (a, b) = bisect_longest_edge(&s).unwrap();
        prop_assert!(a.vertices().contains(&m) && b.vertices().contains(&m));
        prop_assert!((a.volume() - s.volume() / 2.0).abs() <= 1e-12 * s.volume());
        prop_assert!((b.volume() - s.volume() / 2.0).abs() <= 1e-12 * s.volume());
    }
}

#[test]
fn tree_valence_matches_flat_scan() {
    let mut rng = regpart::sampling::rng(17, 0);
    for d in 2..=3 {
        let p = Partition::kuhn(d).unwrap().refined(12 - 3 * d, RefineStrategy::BisectAllLeaves).unwrap();
        let reg = p.registry().points();
        let mut probes: Vec<Point> = Vec::new();
        for _ in 0..40 {
            probes.push(reg[rng.random_range(0..reg.len())].clone());
        }
        for _ in 0..30 {
            let a = &reg[rng.random_range(0..reg.len())];
            let b = &reg[rng.random_range(0..reg.len())];
            probes.push(a.midpoint(b));
        }
        for _ in 0..30 {
            probes.push(Point::new((0..d).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap());
        }
        for x in &probes {
            assert_eq!(p.vertex_valence(x, TOL).unwrap(), flat_valence(&p, x), "d={d} at {x:?}");
        }
    }
}

#[test]
fn max_valence_matches_flat_scan_after_eight_rounds() {
    for d in 2..=3 {
        let p = Partition::kuhn(d).unwrap().refined(8, RefineStrategy::BisectAllLeaves).unwrap();
        let brute = p.registry().points().iter().map(|x| flat_valence(&p, x)).max().unwrap();
        let (_, witness, valence) = p.max_valence().unwrap();
        assert_eq!(valence, brute, "d={d}");
        assert_eq!(flat_valence(&p, &witness), brute);
    }
}

#[test]
fn kuhn_square_ratio_is_stable_under_bisection() {
    let mut p = Partition::kuhn(2).unwrap();
    for k in 0..=10 {
        let eta = p.min_regularity().unwrap();
        assert!((eta - 0.25).abs() <= 1e-12, "round {k}: {eta}");
        p.refine(1, RefineStrategy::BisectAllLeaves).unwrap();
    }
    assert_eq!(p.leaf_count(), 2 * 1024 * 2);
}

#[test]
fn kuhn_cube_ratio_stays_bounded_below() {
    let mut p = Partition::kuhn(3).unwrap();
    let mut seen = Vec::new();
    for _ in 0..=6 {
        seen.push(p.min_regularity().unwrap());
        p.refine(1, RefineStrategy::BisectAllLeaves).unwrap();
    }
    let floor = seen.iter().cloned().fold(f64::INFINITY, f64::min);
    assert!(floor > 0.0);
    // Longest-edge bisection of the Kuhn cube cycles through finitely many
    // similarity classes, so the ratio after three rounds repeats.
    for k in 3..seen.len() {
        assert!((seen[k] - seen[k - 3]).abs() <= 1e-12 * seen[k], "{seen:?}");
    }
}

#[test]
fn valence_never_exceeds_intersection_bound() {
    for (d, steps) in [(2, 10), (3, 6), (4, 3)] {
        let p = Partition::kuhn(d).unwrap().refined(steps, RefineStrategy::BisectAllLeaves).unwrap();
        let eta = p.min_regularity().unwrap();
        let (_, _, valence) = p.max_valence().unwrap();
        assert!(valence as f64 <= max_intersection_bound(eta, d).unwrap());

        let eta_all = p.min_regularity_all_nodes().unwrap();
        let bound = max_intersection_bound(eta_all, d).unwrap();
        let per_generation = p.max_valence_by_generation();
        assert_eq!(per_generation.len(), steps + 1);
        assert!(per_generation.iter().all(|&v| v as f64 <= bound), "{per_generation:?} vs {bound}");
    }
}

#[test]
fn random_roots_keep_ratio_bounded_under_refinement() {
    let mut rng = regpart::sampling::rng(23, 0);
    for d in 2..=3 {
        for _ in 0..10 {
            let root = random_simplex(&mut rng, d, 0.05);
            let p = Partition::from_roots(d, vec![root]).unwrap().refined(3 * d, RefineStrategy::BisectAllLeaves).unwrap();
            let eta = p.min_regularity_all_nodes().unwrap();
            let (_, _, valence) = p.max_valence().unwrap();
            assert!(valence as f64 <= max_intersection_bound(eta, d).unwrap());
        }
    }
}
