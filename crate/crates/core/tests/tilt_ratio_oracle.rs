//! Tilt ratios against the exact tilted CIR law.
//!
//! `X_t = G/μ*` with `G` a Poisson(h) mixture of Gamma(q + j, 1). Under the
//! weight `e^{pX}`, with `s = p/μ*`, `G` becomes a Poisson(h/(1−s)) mixture of
//! Gamma(q + j) with rate `1 − s`, so
//! `E[X^γ]_p = Σ_j π_j Γ(q+j+γ)/Γ(q+j) / ((1−s)μ*)^γ`.

use std::sync::Arc;

use moment_tails::legendre::build_legendre;
use moment_tails::models::CirParams;
use moment_tails::tauberian::{tilt_ratio, Order, Weight};
use statrs::function::gamma::ln_gamma;

fn tilted_moment(c: &CirParams, p: f64, gamma: f64) -> f64 {
    let m = c.mu_star();
    let s = p / m;
    let q = 2.0 * c.a / (c.sigma * c.sigma);
    let h = m * c.x0 * (-c.b * c.t).exp() / (1.0 - s);
    // Poisson weights around the mode, summed in log space
    let j_max = (h + 60.0 * h.sqrt() + 60.0) as usize;
    let mut total = 0.0;
    for j in 0..=j_max {
        let jf = j as f64;
        let ln_pi = -h + jf * h.ln() - ln_gamma(jf + 1.0);
        total += (ln_pi + ln_gamma(q + jf + gamma) - ln_gamma(q + jf)).exp();
    }
    total / ((1.0 - s) * m).powf(gamma)
}

#[test]
fn identity_weight_is_the_tilted_mean() {
    let c = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap();
    let d = build_legendre(Arc::new(c), (1.0, 1e6)).unwrap();
    for &x in &[2.0, 20.0, 500.0] {
        let p = c.mu_star() - 1.0 / x;
        let got = tilt_ratio(&Weight::Power(1.0), &d, x, Order::Refined).unwrap();
        let exact = tilted_moment(&c, p, 1.0);
        assert!((got / exact - 1.0).abs() < 1e-10, "x={x}: {got} vs {exact}");
    }
}

#[test]
fn fractional_weight_converges_to_tilted_moment() {
    let c = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap();
    let d = build_legendre(Arc::new(c), (1.0, 1e6)).unwrap();
    let g = Weight::Power(1.0 / 3.0);
    let mut prev = f64::INFINITY;
    for &x in &[1e2, 1e3, 1e4] {
        let p = c.mu_star() - 1.0 / x;
        let exact = tilted_moment(&c, p, 1.0 / 3.0);
        let err = (tilt_ratio(&g, &d, x, Order::Refined).unwrap() / exact - 1.0).abs();
        assert!(err < prev / 3.0, "x={x}: error {err} did not shrink (previous {prev})");
        prev = err;
    }
    assert!(prev < 1e-3, "error at x = 1e4 is {prev}");
}
