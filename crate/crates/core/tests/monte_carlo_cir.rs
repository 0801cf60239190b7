//! Monte Carlo against the closed-form CIR law.

use moment_tails::models::CirParams;
use moment_tails::montecarlo::{empirical_log_mgf, simulate, EmpiricalCcdf, Scheme, SimConfig};
use moment_tails::models::cir_log_mgf;

fn cir() -> CirParams {
    CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap()
}

#[test]
fn sample_mean_matches_closed_form_mean() {
    let c = cir();
    let r = simulate(&c, &SimConfig::new(1_000_000, 1000, 1.0, 3)).unwrap();
    let n = r.samples.len() as f64;
    let mean = r.samples.iter().sum::<f64>() / n;
    let var = r.samples.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let exact = c.x0 * (-c.b * c.t).exp() + c.a / c.b * (1.0 - (-c.b * c.t).exp());
    let z = (mean - exact) / (var / n).sqrt();
    assert!(z.abs() <= 3.0, "mean {mean} exact {exact} z {z}");
}

#[test]
fn exact_ccdf_matches_empirical_deciles() {
    let c = cir();
    let r = simulate(&c, &SimConfig::new(200_000, 500, 1.0, 4)).unwrap();
    let e = EmpiricalCcdf::new(&r.samples).unwrap();
    for i in 1..10 {
        let level = e.quantile(i as f64 / 10.0);
        let est = e.ccdf(level);
        let exact = c.exact_ccdf(level).unwrap();
        // Euler bias at 500 steps is well below the statistical error at this size
        assert!((est.p - exact).abs() <= 3.0 * est.stderr, "decile {i}: {} vs {exact}", est.p);
    }
}

#[test]
fn log_mgf_at_half_critical_moment() {
    let c = cir();
    let r = simulate(&c, &SimConfig::new(200_000, 500, 1.0, 5)).unwrap();
    let mu = 0.5 * c.mu_star();
    let e = empirical_log_mgf(&r.samples, mu).unwrap();
    let exact = cir_log_mgf(&c, mu).unwrap();
    assert!((e.value - exact).abs() <= 3.0 * e.stderr, "{} ± {} vs {exact}", e.value, e.stderr);
}

#[test]
fn doubling_steps_moves_log_mgf_less_than_two_stderr() {
    let c = cir();
    let mu = 0.5 * c.mu_star();
    let a = simulate(&c, &SimConfig::new(100_000, 200, 1.0, 6)).unwrap();
    let b = simulate(&c, &SimConfig::new(100_000, 400, 1.0, 6)).unwrap();
    let ea = empirical_log_mgf(&a.samples, mu).unwrap();
    let eb = empirical_log_mgf(&b.samples, mu).unwrap();
    let se = (ea.stderr.powi(2) + eb.stderr.powi(2)).sqrt();
    assert!((ea.value - eb.value).abs() < 2.0 * se);
}

#[test]
fn thread_count_does_not_change_samples() {
    let c = cir();
    let cfg = SimConfig { scheme: Scheme::EulerReflection, ..SimConfig::new(5_000, 50, 1.0, 9) };
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let three = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let a = one.install(|| simulate(&c, &cfg).unwrap());
    let b = three.install(|| simulate(&c, &cfg).unwrap());
    assert_eq!(a.samples, b.samples);
}
