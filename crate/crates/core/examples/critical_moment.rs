//! Explosion threshold of the CIR moment generating function and the log-MGF
//! approaching it.
//!
//! `cargo run --example critical_moment`

use moment_tails::models::{cir_log_mgf, critical_moment, inverse_critical_moment, CirParams};

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    for t in [0.1, 0.5, 1.0, 2.0, 10.0] {
        let mu = critical_moment(cir.b, cir.sigma, t)?;
        println!("t = {t:>5}: mu* = {mu:.6}, 1/mu* = {:.6}", inverse_critical_moment(cir.b, cir.sigma, t));
    }
    let mu_star = cir.mu_star();
    println!("\nlog E[exp(mu X_1)] for mu -> mu* = {mu_star:.6}");
    for frac in [0.0, 0.5, 0.9, 0.99, 0.999] {
        println!("  mu = {:.4} mu*: {:.6e}", frac, cir_log_mgf(&cir, frac * mu_star)?);
    }
    Ok(())
}
