//! `ω(τ)` against a brute-force composite Simpson rule.

use moment_tails::cev::{omega, CevParams};

/// `∫₁^τ (1 − s^{−λ/(λ−1)})^{(λ−2)/λ} ds` with `s = 1 + v^m`, `m = 1/(1+e)`,
/// which makes the integrand bounded, then Simpson on a uniform grid.
fn brute(lambda: f64, tau: f64) -> f64 {
    let e = (lambda - 2.0) / lambda;
    let m = 1.0 / (1.0 + e);
    let pow = -lambda / (lambda - 1.0);
    let v_max = (tau - 1.0).powf(1.0 / m);
    let f = |v: f64| {
        if v == 0.0 {
            // limit of (1 − s^pow)^e · m v^{m−1} as v → 0
            return (-pow).powf(e) * m;
        }
        let s = 1.0 + v.powf(m);
        (1.0 - s.powf(pow)).powf(e) * m * v.powf(m - 1.0)
    };
    let n = 200_000;
    let h = v_max / n as f64;
    let mut sum = f(0.0) + f(v_max);
    for i in 1..n {
        sum += if i % 2 == 1 { 4.0 } else { 2.0 } * f(i as f64 * h);
    }
    sum * h / 3.0
}

#[test]
fn omega_matches_brute_force() {
    for &(p, t) in &[(0.25, 1.0), (0.2, 2.0), (0.3, 0.5), (0.1, 1.5)] {
        let params = CevParams::new(0.3, 1.0, 0.5, 0.5, p).unwrap();
        let l = params.lambda;
        let tau = params.tau(t);
        let pre = params.a * l / (params.b * (l - 1.0) * params.v0)
            * (2.0 * params.b / (params.sigma * params.sigma * l)).powf((2.0 - l) / l);
        let expect = pre * brute(l, tau);
        let got = omega(&params, tau).unwrap();
        assert!((got / expect - 1.0).abs() < 1e-7, "p={p} t={t}: {got} vs {expect}");
    }
}

#[test]
fn omega_is_linear_in_a() {
    let p1 = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.25).unwrap();
    let p2 = CevParams::new(0.6, 1.0, 0.5, 0.5, 0.25).unwrap();
    let tau = p1.tau(1.0);
    let r = omega(&p2, tau).unwrap() / omega(&p1, tau).unwrap();
    assert!((r - 2.0).abs() < 1e-12);
}
