use hilbund::hyperspace::{
    build_hyperspace, build_incidence, check_singleton_continuity, hausdorff, roundtrip_check, slice_selection,
    subsets_up_to, ConvexSelection, FiniteMetricSpace, SingletonNet, SubsetPoint, DEFAULT_ENUMERATION_CAP,
};
use hilbund::linalg::Vector;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn euclidean(k: usize) -> impl Strategy<Value = FiniteMetricSpace> {
    prop::collection::vec(prop::collection::vec(-5.0f64..5.0, 2), k)
        .prop_map(|coords| FiniteMetricSpace::euclidean(&coords).unwrap())
}

#[test]
fn hausdorff_triangle_exhaustive() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for size in 1..=6 {
        let coords: Vec<Vec<f64>> = (0..size)
            .map(|_| vec![rand::Rng::random_range(&mut rng, -1.0..1.0), rand::Rng::random_range(&mut rng, -1.0..1.0)])
            .collect();
        let z = FiniteMetricSpace::euclidean(&coords).unwrap();
        let subsets = subsets_up_to(size, size);
        for a in &subsets {
            assert_eq!(hausdorff(&z, a, a), 0.0);
            for b in &subsets {
                let ab = hausdorff(&z, a, b);
                assert_eq!(ab, hausdorff(&z, b, a));
                if a != b {
                    assert!(ab > 0.0);
                }
                for c in &subsets {
                    assert!(hausdorff(&z, a, c) <= ab + hausdorff(&z, b, c) + 1e-12);
                }
            }
        }
    }
}

#[test]
fn hyperspace_sizes() {
    for size in 1..=5usize {
        let z = FiniteMetricSpace::discrete((0..size).map(|i| format!("z{i}"))).unwrap();
        for n in 1..=size {
            let h = build_hyperspace(&z, n).unwrap();
            let expected: f64 = (1..=n).map(|k| binomial(size, k)).sum();
            assert_eq!(h.subsets.len() as f64, expected);
            let inc = build_incidence(&z, n).unwrap();
            assert_eq!(*inc.fiber_sizes().iter().max().unwrap(), n);
            let by_size: f64 = (1..=n).map(|k| binomial(size, k) * k as f64).sum();
            assert_eq!(inc.pairs.len() as f64, by_size);
        }
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

#[test]
fn roundtrip_counts_match_formula() {
    for x in 1..=2usize {
        for z in 1..=3usize {
            for n in 1..=z {
                let xs = FiniteMetricSpace::discrete((0..x).map(|i| format!("x{i}"))).unwrap();
                let zs = FiniteMetricSpace::discrete((0..z).map(|i| format!("z{i}"))).unwrap();
                let r = roundtrip_check(&xs, &zs, n, DEFAULT_ENUMERATION_CAP).unwrap();
                let per_point: f64 = (1..=n).map(|k| binomial(z, k)).sum();
                assert_eq!(r.maps as f64, per_point.powi(x as i32));
                assert_eq!(r.cover_classes, r.maps);
                assert!(r.pass);
            }
        }
    }
}

#[test]
fn roundtrip_on_euclidean_spaces() {
    let x = FiniteMetricSpace::euclidean(&[vec![0.0], vec![1.0]]).unwrap();
    let z = FiniteMetricSpace::euclidean(&[vec![0.0, 0.0], vec![3.0, 0.0], vec![0.0, 4.0]]).unwrap();
    let r = roundtrip_check(&x, &z, 2, DEFAULT_ENUMERATION_CAP).unwrap();
    assert_eq!(r.maps, 36);
    assert!(r.pass);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn hausdorff_is_a_metric_on_random_spaces(z in euclidean(5)) {
        let h = build_hyperspace(&z, 3).unwrap();
        let m = h.space.len();
        for i in 0..m {
            for j in 0..m {
                for k in 0..m {
                    prop_assert!(h.space.dist(i, k) <= h.space.dist(i, j) + h.space.dist(j, k) + 1e-12);
                }
            }
        }
    }

    #[test]
    fn slice_reconstruction(seed in 0u64..100_000, size in 2usize..6, n in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts: Vec<Vector> = (0..size)
            .map(|_| Vector::from_fn(2, |_, _| rand::Rng::random_range(&mut rng, -1.0..1.0)))
            .collect();
        let sel = ConvexSelection::random(pts, n, &mut rng).unwrap();
        for a in subsets_up_to(size, n - 1) {
            for x in (0..size).filter(|x| !a.contains(*x)) {
                let r = slice_selection(&sel, x, &a).unwrap();
                prop_assert!(r.residual <= 1e-12);
                prop_assert!((0.0..=1.0).contains(&r.f_x));
                prop_assert!((r.coeffs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn gaps_bounded_by_radius(seed in 0u64..100_000, dirs in prop::collection::vec(prop::collection::vec(-1.0f64..1.0, 2), 1..3)) {
        let mut pts = vec![Vector::zeros(2)];
        let mut terms = Vec::new();
        for m in 1..=8 {
            let h = 0.5f64.powi(m);
            let mut members = Vec::new();
            for d in &dirs {
                pts.push(Vector::from_row_slice(d) * h);
                members.push(pts.len() - 1);
            }
            terms.push(SubsetPoint::new(members).unwrap());
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sel = ConvexSelection::random(pts, dirs.len(), &mut rng).unwrap();
        let report = check_singleton_continuity(&sel, &[SingletonNet { x0: 0, terms }], None, 1e-2).unwrap();
        for (g, r) in report.records[0].gaps.iter().zip(&report.records[0].radii) {
            prop_assert!(*g <= r + 1e-12);
        }
        prop_assert!(report.pass);
    }
}
