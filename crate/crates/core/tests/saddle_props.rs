use std::f64::consts::PI;

use odm_core::saddle::{
    balanced_mu, convergence_domain, critical_mu, lambda_factor, real_saddle, saddle_points, saddle_report,
    saddle_residual, sigma, SADDLE_PREC,
};
use proptest::prelude::*;
use rug::{Complex, Float, Rational};

fn q(n: i64, d: i64) -> Rational {
    Rational::from((n, d))
}

fn f(x: f64) -> Float {
    Float::with_val(SADDLE_PREC, x)
}

/// `(alpha, mu_c, lambda_c)`; `mu_c` from an independent 30-digit solve.
fn critical_table() -> Vec<(Rational, f64, f64)> {
    vec![
        (q(3, 2), 4.0312335030, -0.2429640300),
        (q(2, 1), 4.4668461275, -0.2136524524),
        (q(5, 2), 4.8956901865, -0.1896450439),
        (q(3, 1), 5.3168634292, -0.1699396648),
        (q(4, 1), 6.1359656420, -0.14003129119),
    ]
}

fn radius_rate() -> (f64, f64) {
    // R = A mu_c for the oscillator, C from the fitted strong-coupling decay
    (24.0 / 5.0 * 4.895690188, -0.292)
}

#[test]
fn critical_points() {
    for (alpha, mu_c, lambda_c) in critical_table() {
        let c = critical_mu(&alpha, SADDLE_PREC).unwrap();
        assert!((c.mu.to_f64() - mu_c).abs() < 1e-9, "alpha = {alpha}: {}", c.mu.to_f64());
        assert!((c.lambda.to_f64() - lambda_c).abs() < 1e-10, "alpha = {alpha}: {}", c.lambda.to_f64());
        assert!(c.residuals.0 <= 1e-12 && c.residuals.1 <= 1e-12);
        let lo = -1.0 / (alpha.to_f64() - 1.0);
        assert!(c.lambda.to_f64() > lo && c.lambda.to_f64() < 0.0);
        let s = sigma(&alpha, &c.mu, &Complex::with_val(SADDLE_PREC, &c.lambda)).unwrap();
        assert!(s.real().to_f64().abs() < 1e-10);
    }
}

#[test]
fn rate_increases_with_scale() {
    for (alpha, _, _) in critical_table() {
        let rates: Vec<f64> = (0..=24)
            .map(|i| {
                let mu = f(2.0 + 0.25 * i as f64);
                let l = real_saddle(&alpha, &mu).unwrap();
                sigma(&alpha, &mu, &l).unwrap().real().to_f64()
            })
            .collect();
        assert!(rates.windows(2).all(|w| w[1] > w[0]), "alpha = {alpha}: {rates:?}");
    }
}

#[test]
fn balanced_scale_for_cubic_mapping() {
    let b = balanced_mu(&q(3, 1), SADDLE_PREC).unwrap();
    assert!((b.mu.to_f64() - 4.62987613).abs() < 1e-6, "{}", b.mu.to_f64());
    assert!((b.rate.to_f64() - 0.775).abs() < 5e-4, "{}", b.rate.to_f64());
    assert!(b.mu < critical_mu(&q(3, 1), SADDLE_PREC).unwrap().mu);
    let moduli: Vec<f64> = b
        .saddles
        .iter()
        .map(|z| sigma(&q(3, 1), &b.mu, z).unwrap().real().to_f64().exp())
        .collect();
    assert!(moduli.iter().all(|m| (m - b.rate.to_f64()).abs() < 1e-9), "{moduli:?}");
}

#[test]
fn oscillator_damping_coefficients() {
    let (r, c) = radius_rate();
    let at5 = lambda_factor(5.0, 0.0, r, &q(5, 2), 1).unwrap();
    assert!((at5.coefficient - 1.86).abs() < 0.005, "{}", at5.coefficient);
    let at1 = lambda_factor(1.0, 0.0, r, &q(5, 2), 1).unwrap();
    assert!((at1.coefficient - 3.535).abs() < 0.001);
    let total = at1.coefficient - c;
    assert!((total - 3.82).abs() / 3.82 < 0.01 && (total - 3.85).abs() / 3.85 < 0.02, "{total}");
    let far = lambda_factor(1e12, 0.0, r, &q(5, 2), 55).unwrap();
    assert!(far.factor > 0.99);
}

#[test]
fn oscillator_domain() {
    let (r, c) = radius_rate();
    let d = convergence_domain(&q(5, 2), r, c).unwrap();
    assert!((d.boundary_constant - 510.0).abs() < 0.5, "{}", d.boundary_constant);
    assert!((d.reduced_threshold + 0.0826).abs() < 5e-5, "{}", d.reduced_threshold);
    let sector = d.sector_half_angle.unwrap();
    assert!((sector - 5.0 * PI / 4.0).abs() < 1e-12);
    for arg in [-3.9, -2.0, 0.0, 1.0, 3.9] {
        for m in [1e-6, 1.0, 1e6, 1e12] {
            assert!(d.contains(m, arg));
        }
    }
    let beyond = 5.0 * PI / 2.0 * 0.9;
    let edge = d.boundary(beyond).unwrap();
    assert!(d.contains(edge * 1.01, beyond) && !d.contains(edge * 0.99, beyond));
}

#[test]
fn positive_constant_domain_on_real_axis() {
    let d = convergence_domain(&q(3, 1), 10.0, 0.5).unwrap();
    assert!((d.boundary(0.0).unwrap() - 10.0 * 0.5f64.powi(-3)).abs() < 1e-9);
    assert!(d.sector_half_angle.is_none());
}

#[test]
fn report_collects_critical_point() {
    let r = saddle_report(&q(5, 2), &f(4.0), Some(radius_rate())).unwrap();
    assert!((r.mu_c.to_f64() - 4.8956901865).abs() < 1e-9);
    assert!(r.sigma.to_f64() < 0.0);
    assert!(r.lambda_saddles.iter().any(|z| z.imag().is_zero()));
    assert!(r.domain.is_some());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn saddles_solve_the_equation(mu in 1.5f64..9.0, which in 0usize..5) {
        let alpha = critical_table()[which].0.clone();
        let mu = f(mu);
        let pts = saddle_points(&alpha, &mu).unwrap();
        let reals: Vec<&Complex> = pts.iter().filter(|z| z.imag().is_zero()).collect();
        let lo = -1.0 / (alpha.to_f64() - 1.0);
        prop_assert_eq!(reals.iter().filter(|z| z.real().to_f64() > lo && z.real().to_f64() < 0.0).count(), 1);
        for z in &pts {
            let r = saddle_residual(&alpha, &mu, z).unwrap();
            prop_assert!(Float::with_val(SADDLE_PREC, r.abs_ref()).to_f64() <= 1e-10);
        }
    }
}
