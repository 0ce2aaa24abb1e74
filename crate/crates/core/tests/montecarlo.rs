//! Statistical behaviour of the Monte Carlo estimator.

use levy2_core::montecarlo::{c2_tail_integral, estimate_mu7_stratified};
use levy2_core::{build_f, estimate_mu7, ParamPoint};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn stderr_scales_as_inverse_root_n() {
    let small = estimate_mu7(100_000, 1).unwrap();
    let large = estimate_mu7(1_000_000, 1).unwrap();
    let ratio = small.stderr / large.stderr / 10f64.sqrt();
    assert!((1.0 / 1.5..1.5).contains(&ratio), "ratio {ratio}");
}

#[test]
fn stratified_agrees_with_plain() {
    let plain = estimate_mu7(1_000_000, 2).unwrap();
    let strat = estimate_mu7_stratified(1_000_000, 3).unwrap();
    let z = (plain.mean - strat.mean) / plain.stderr.hypot(strat.stderr);
    assert!(z.abs() < 3.0, "{} vs {}: z = {z}", plain.mean, strat.mean);
}

// Gauss-Legendre on the tail after the substitution c2 = c0 + t/(1-t).
fn numeric_tail(a: ParamPoint, b: f64, c1: f64, c3: f64) -> f64 {
    let s = 1.0 - a.a1 * b;
    let k = a.a2 * (b * c1 - c3);
    let c0 = (1.0 - c1 * c1).sqrt();
    let f = |t: f64| {
        let c2 = c0 + t / (1.0 - t);
        (s * c2 - k).powi(-3) / ((1.0 - t) * (1.0 - t))
    };
    // composite Simpson, fine enough for 1e-8 on this smooth integrand
    let n = 20_000;
    let h = 1.0 / n as f64;
    let mut sum = f(0.0);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn tail_integral_matches_numeric_quadrature() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut checked = 0;
    while checked < 100 {
        let a = ParamPoint::new(rng.random_range(-1.0..0.5), rng.random::<f64>());
        if !a.in_omega2_plus() {
            continue;
        }
        let b = rng.random::<f64>();
        let f = build_f(a, b).unwrap();
        let (c1, c3) = (rng.random_range(-1.0..1.0), rng.random_range(-1.5..1.5));
        if !f.contains(c1, c3) {
            continue;
        }
        let exact = c2_tail_integral(a, b, c1, c3).unwrap();
        let num = numeric_tail(a, b, c1, c3);
        assert!(((num - exact) / exact).abs() < 1e-8, "{num} vs {exact}");
        checked += 1;
    }
}
