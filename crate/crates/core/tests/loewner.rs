use hilbund::bundle::fixtures::random_symmetric_polytope;
use hilbund::geometry::{Ellipsoid, SymmetricBody};
use hilbund::linalg::{self, Matrix, Vector};
use hilbund::loewner::{john_check, loewner_certificate, loewner_hull, mvee_points, HullGenerator, MveeConfig};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

fn gaussian_points(dim: usize, count: usize, rng: &mut ChaCha8Rng) -> Vec<Vector> {
    (0..count)
        .map(|_| Vector::from_fn(dim, |_, _| rng.sample::<f64, _>(StandardNormal)))
        .collect()
}

fn quad(q: &Matrix, p: &Vector) -> f64 {
    p.dot(&(q * p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn enclosure(seed in 0u64..10_000, dim in 2usize..5) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = gaussian_points(dim, dim + 5, &mut rng);
        let cfg = MveeConfig::for_dim(dim);
        let e = mvee_points(&pts, &cfg).unwrap();
        for p in &pts {
            prop_assert!(quad(e.gram(), p) <= 1.0 + cfg.oracle_tol);
        }
    }

    #[test]
    fn volume_is_monotone(seed in 0u64..10_000, dim in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let big = gaussian_points(dim, dim + 6, &mut rng);
        let small = &big[..dim + 2];
        let cfg = MveeConfig::for_dim(dim);
        let a = mvee_points(small, &cfg).unwrap();
        let b = mvee_points(&big, &cfg).unwrap();
        // volume ∝ det(Q)^{-1/2}
        let slack = dim as f64 * (1.0 + cfg.epsilon).ln();
        prop_assert!(-0.5 * a.log_det() <= -0.5 * b.log_det() + slack);
    }

    #[test]
    fn linear_equivariance(seed in 0u64..10_000, dim in 2usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pts = gaussian_points(dim, dim + 4, &mut rng);
        let t = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal)) + Matrix::identity(dim, dim) * 2.0;
        prop_assume!(t.determinant().abs() > 0.1);
        let cfg = MveeConfig { epsilon: 1e-9, max_iter: 200_000, oracle_tol: 1e-10 };
        let q = mvee_points(&pts, &cfg).unwrap();
        let moved: Vec<Vector> = pts.iter().map(|p| &t * p).collect();
        let qt = mvee_points(&moved, &cfg).unwrap();
        let t_inv = t.clone().try_inverse().unwrap();
        let expected = t_inv.transpose() * q.gram() * &t_inv;
        let rel = linalg::max_abs_diff(qt.gram(), &expected) / expected.amax();
        prop_assert!(rel <= 1e-4, "relative error {rel}");
    }
}

#[test]
fn john_bound_on_random_polytopes() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for dim in 2..=5 {
        for _ in 0..25 {
            let b = random_symmetric_polytope(dim, dim + 4, &mut rng);
            let cert = loewner_certificate(&b, &MveeConfig::for_dim(dim)).unwrap();
            assert!(cert.distortion <= (dim as f64).sqrt() + 1e-3);
            assert!(cert.distortion >= 1.0 - 1e-9);
        }
    }
}

#[test]
fn john_check_agrees_with_certificate() {
    let b = SymmetricBody::cube(3);
    let e = Ellipsoid::ball(3, 3f64.sqrt()).unwrap();
    let cert = john_check(&b, &e).unwrap();
    assert!((cert.distortion - 3f64.sqrt()).abs() < 1e-9);
    assert!(cert.within_john_bound(1e-9));
}

#[test]
fn hull_idempotence_on_random_ellipsoids() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for dim in 2..=4 {
        let a = Matrix::from_fn(dim, dim, |_, _| rng.sample::<f64, _>(StandardNormal));
        let e = Ellipsoid::new(&a * a.transpose() + Matrix::identity(dim, dim)).unwrap();
        let h = loewner_hull(&[HullGenerator::ellipsoid(e.clone())], &MveeConfig::for_dim(dim)).unwrap();
        assert!(linalg::max_abs_diff(h.gram(), e.gram()) <= 1e-6);
    }
}

#[test]
fn diagonal_slice_ellipse_escapes_circumscribed_ball() {
    let cube = SymmetricBody::cube(3);
    let s = hilbund::geometry::Subspace::new(
        3,
        vec![Vector::from_row_slice(&[1.0, 1.0, 0.0]) / 2f64.sqrt(), Vector::from_row_slice(&[0.0, 0.0, 1.0])],
    )
    .unwrap();
    let slice = cube.intersect_subspace(&s).unwrap();
    let e = mvee_points(slice.vertices(), &MveeConfig::for_dim(2)).unwrap();
    let m = e.metrics();
    assert!((m.semi_axes[0] - 2.0).abs() < 1e-5);
    assert!((m.semi_axes[1] - 2f64.sqrt()).abs() < 1e-5);
    assert!((m.eccentricity.unwrap() - 0.5f64.sqrt()).abs() < 1e-6);
    let ball = Ellipsoid::ball(3, 3f64.sqrt()).unwrap();
    let c = ball.contains_embedded(&s, &e, 1e-9).unwrap();
    assert!(!c.contained);
    let w = Vector::from_vec(c.witness.unwrap());
    assert!(w.norm() >= 2.0 - 1e-6);
}
