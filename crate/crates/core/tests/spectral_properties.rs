use pion::rng::{gaussian_matrix, stream};
use pion::spectral::{apply_filter, high_pass_schedule, ns_matrix_step, FilterSchedule};
use pion::svd::DEFAULT_RANK_TOL;
use pion::{msign_exact, svd_compact, DenseMatrix, QuinticOdd};
use proptest::prelude::*;

const SHAPES: [(usize, usize); 4] = [(2, 2), (5, 3), (8, 6), (16, 16)];

fn projector(basis: &DenseMatrix) -> DenseMatrix {
    basis.matmul(&basis.transpose()).unwrap()
}

fn max_orthonormality_error(q: &DenseMatrix) -> f64 {
    q.gram_cols().sub(&DenseMatrix::identity(q.cols())).unwrap().max_abs()
}

#[test]
fn svd_round_trip_over_seeded_shapes() {
    for (s, &(rows, cols)) in SHAPES.iter().enumerate() {
        for seed in 0..100 {
            let mut rng = stream(seed, s as u64);
            let m = gaussian_matrix(&mut rng, rows, cols, 1.0);
            let svd = svd_compact(&m, DEFAULT_RANK_TOL).unwrap();
            let err = svd.reconstruct().sub(&m).unwrap().frobenius_norm();
            assert!(err <= 1e-9 * m.frobenius_norm().max(1.0), "{rows}x{cols} seed {seed}: {err}");
            assert!(max_orthonormality_error(&svd.u) <= 1e-10);
            assert!(max_orthonormality_error(&svd.v) <= 1e-10);
            assert!(svd.sigma.windows(2).all(|w| w[0] >= w[1]));
            assert!(svd.sigma.iter().all(|s| *s > 0.0));
        }
    }
}

#[test]
fn msign_is_a_partial_isometry_on_the_same_subspaces() {
    for seed in 0..20 {
        let mut rng = stream(seed, 10);
        let m = gaussian_matrix(&mut rng, 6, 4, 1.0);
        let x = msign_exact(&m).unwrap();
        let sx = svd_compact(&x, DEFAULT_RANK_TOL).unwrap();
        assert!(sx.sigma.iter().all(|s| (s - 1.0).abs() <= 1e-9));
        let sm = svd_compact(&m, DEFAULT_RANK_TOL).unwrap();
        let col = projector(&sx.u).sub(&projector(&sm.u)).unwrap().frobenius_norm();
        let row = projector(&sx.v).sub(&projector(&sm.v)).unwrap().frobenius_norm();
        assert!(col <= 1e-8 && row <= 1e-8, "projector distances {col} {row}");
    }
}

#[test]
fn factorization_identity_for_canonical_triples() {
    let polys = [QuinticOdd::MUON_NS, QuinticOdd::promotion(), QuinticOdd::suppression()];
    for (s, &(rows, cols)) in [(4, 4), (8, 6), (12, 5)].iter().enumerate() {
        for seed in 0..50 {
            let mut rng = stream(seed, 20 + s as u64);
            let m = gaussian_matrix(&mut rng, rows, cols, 1.0);
            let x = m.scale(1.0 / m.frobenius_norm());
            let svd = svd_compact(&x, DEFAULT_RANK_TOL).unwrap();
            for p in &polys {
                let oracle = svd.recompose_with(|s| p.eval(s));
                let err = ns_matrix_step(&x, p).unwrap().sub(&oracle).unwrap().frobenius_norm();
                assert!(err <= 1e-9 * x.frobenius_norm().max(1.0), "{rows}x{cols} seed {seed} {p}: {err}");
            }
        }
    }
}

#[test]
fn composition_identity_per_singular_value() {
    let schedules: Vec<FilterSchedule> = (0..=5)
        .map(|k| high_pass_schedule(k).unwrap())
        .chain([FilterSchedule::muon()])
        .collect();
    for seed in 0..10 {
        let mut rng = stream(seed, 30);
        let m = gaussian_matrix(&mut rng, 7, 5, 3.0);
        let normalized = svd_compact(&m.scale(1.0 / m.frobenius_norm()), DEFAULT_RANK_TOL).unwrap();
        for s in &schedules {
            let out = apply_filter(&m, s, 0.0).unwrap();
            let mapped = normalized.recompose_with(|x| s.eval(x));
            // Per singular value: project onto each (u_i, v_i) pair.
            let coupling = normalized.u.transpose().matmul(&out).unwrap().matmul(&normalized.v).unwrap();
            for (i, sigma) in normalized.sigma.iter().enumerate() {
                assert!((coupling.get(i, i) - s.eval(*sigma)).abs() <= 1e-8);
            }
            assert!(out.sub(&mapped).unwrap().max_abs() <= 1e-8);
        }
    }
}

#[test]
fn muon_whitening_band() {
    let mut checked = 0;
    for seed in 0..200 {
        let mut rng = stream(seed, 40);
        let m = gaussian_matrix(&mut rng, 6, 6, 1.0);
        let normalized = svd_compact(&m.scale(1.0 / m.frobenius_norm()), DEFAULT_RANK_TOL).unwrap();
        if normalized.sigma.len() < 6 || normalized.sigma.iter().any(|s| *s <= 0.1) {
            continue;
        }
        let out = apply_filter(&m, &FilterSchedule::muon(), 1e-7).unwrap();
        let s = svd_compact(&out, DEFAULT_RANK_TOL).unwrap();
        assert!(s.sigma.iter().all(|x| (0.6..=1.4).contains(x)), "{:?}", s.sigma);
        checked += 1;
    }
    assert!(checked >= 10);
}

fn grid() -> impl Iterator<Item = f64> {
    (0..=1000).map(|i| i as f64 / 1000.0)
}

#[test]
fn scalar_maps_on_the_unit_grid() {
    let p = QuinticOdd::promotion();
    let s = QuinticOdd::suppression();
    for x in grid() {
        let dp = 1.875 * (1.0 - x * x).powi(2);
        let ds = 7.5 * x * x * (1.0 - x * x);
        assert!((p.derivative(x) - dp).abs() <= 1e-12);
        assert!((s.derivative(x) - ds).abs() <= 1e-12);
        assert!(p.derivative(x) >= 0.0 && s.derivative(x) >= 0.0);
        assert!((0.0..=1.0).contains(&p.eval(x)));
        assert!((0.0..=1.0).contains(&s.eval(x)));
    }
    assert_eq!(s.derivative(0.0), 0.0);
    assert_eq!(s.derivative(1.0), 0.0);
    assert!((p.eval(1.0) - 1.0).abs() <= 1e-15);
    assert!((s.eval(1.0) - 1.0).abs() <= 1e-15);
}

proptest! {
    #[test]
    fn odd_symmetry_is_exact(sigma in -2.0f64..2.0) {
        for p in [QuinticOdd::MUON_NS, QuinticOdd::promotion(), QuinticOdd::suppression()] {
            prop_assert_eq!(p.eval(-sigma), -p.eval(sigma));
        }
    }

    #[test]
    fn frobenius_squared_is_gram_trace(rows in 1usize..7, cols in 1usize..7, seed in any::<u64>()) {
        let mut rng = stream(seed, 0);
        let m = gaussian_matrix(&mut rng, rows, cols, 2.0);
        let f2 = m.frobenius_norm().powi(2);
        prop_assert!((f2 - m.gram_cols().trace()).abs() <= 1e-10 * f2.max(1e-300));
    }

    #[test]
    fn svd_round_trip_random(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>(), scale in 1e-3f64..1e3) {
        let mut rng = stream(seed, 1);
        let m = gaussian_matrix(&mut rng, rows, cols, scale);
        let svd = svd_compact(&m, DEFAULT_RANK_TOL).unwrap();
        let err = svd.reconstruct().sub(&m).unwrap().frobenius_norm();
        prop_assert!(err <= 1e-9 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn rank_deficient_svd_round_trip(rows in 2usize..8, cols in 2usize..8, seed in any::<u64>()) {
        let mut rng = stream(seed, 2);
        let a = gaussian_matrix(&mut rng, rows, 1, 1.0);
        let b = gaussian_matrix(&mut rng, 1, cols, 1.0);
        let m = a.matmul(&b).unwrap();
        let svd = svd_compact(&m, DEFAULT_RANK_TOL).unwrap();
        prop_assert_eq!(svd.rank(), 1);
        prop_assert!(svd.reconstruct().sub(&m).unwrap().frobenius_norm() <= 1e-9 * m.frobenius_norm().max(1.0));
    }

    #[test]
    fn high_pass_matrix_path_matches_scalar_path(k_p in 0usize..=5, seed in any::<u64>()) {
        let mut rng = stream(seed, 3);
        let m = gaussian_matrix(&mut rng, 5, 4, 1.0);
        let s = high_pass_schedule(k_p).unwrap();
        let out = apply_filter(&m, &s, 0.0).unwrap();
        let oracle = svd_compact(&m.scale(1.0 / m.frobenius_norm()), DEFAULT_RANK_TOL)
            .unwrap()
            .recompose_with(|x| s.eval(x));
        prop_assert!(out.sub(&oracle).unwrap().max_abs() <= 1e-8);
    }
}
