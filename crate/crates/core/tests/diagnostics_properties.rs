use pion::diagnostics::{empirical_snr, erank, kappa_g};
use pion::lpmuon::{build_bands, compose_clipped, fit_loss, theta_from_vec, FitConfig};
use pion::rng::{gaussian_matrix, stream};
use pion::DenseMatrix;
use proptest::prelude::*;

#[test]
fn monte_carlo_snr_matches_closed_form_over_seeds() {
    let (m, n, s) = (6, 5, 0.3);
    let mu = DenseMatrix::from_fn(m, n, |i, j| ((i * 7 + j * 3) % 4) as f64 * 0.1 - 0.15).unwrap();
    let expected = mu.frobenius_norm().powi(2) / ((m * n) as f64 * s * s);
    for seed in 0..3 {
        let mut rng = stream(seed, 900);
        let samples: Vec<DenseMatrix> = (0..2000)
            .map(|_| mu.add(&gaussian_matrix(&mut rng, m, n, s)).unwrap())
            .collect();
        let est = empirical_snr(&samples).unwrap();
        assert!(((est.snr - expected) / expected).abs() <= 0.1, "seed {seed}: {} vs {expected}", est.snr);
    }
}

proptest! {
    #[test]
    fn erank_is_scale_invariant(seed in any::<u64>(), exp in -20i32..20, c in 0.01f64..100.0) {
        let mut rng = stream(seed, 0);
        let m = gaussian_matrix(&mut rng, 6, 4, 1.0);
        let base = erank(&m).unwrap().erank;
        // Power-of-two scaling is exact in floating point.
        prop_assert_eq!(erank(&m.scale(2f64.powi(exp))).unwrap().erank, base);
        prop_assert!((erank(&m.scale(c)).unwrap().erank - base).abs() <= 1e-12 * base);
    }

    #[test]
    fn erank_is_bounded(rows in 1usize..9, cols in 1usize..9, seed in any::<u64>()) {
        let mut rng = stream(seed, 1);
        let e = erank(&gaussian_matrix(&mut rng, rows, cols, 1.0)).unwrap();
        prop_assert!(e.erank >= 1.0 - 1e-12 && e.erank <= rows.min(cols) as f64 + 1e-12);
        prop_assert!((e.probs.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn kappa_is_reward_flip_symmetric(g in 2u64..200, p in 0.01f64..0.99) {
        let a = kappa_g(g, p).unwrap();
        let b = kappa_g(g, 1.0 - p).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * a.max(1e-300));
    }

    #[test]
    fn fit_loss_is_non_negative(coeffs in prop::collection::vec(-5.0f64..5.0, 15), tau in 0.1f64..0.9) {
        let cfg = FitConfig { samples_per_band: 30, ..FitConfig::new(tau, 0) };
        let grid = build_bands(&cfg).unwrap();
        let theta = theta_from_vec(&coeffs).unwrap();
        let l = fit_loss(&theta, &grid, &cfg);
        prop_assert!(l.is_finite() && l >= 0.0);
    }

    #[test]
    fn composition_is_odd(coeffs in prop::collection::vec(-5.0f64..5.0, 15), sigma in 0.0f64..1.0) {
        let theta = theta_from_vec(&coeffs).unwrap();
        prop_assert_eq!(compose_clipped(&theta, -sigma, 1e3), -compose_clipped(&theta, sigma, 1e3));
    }
}
