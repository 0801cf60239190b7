//! Nonlinear drift B̄(y) = y^β: the fixed-point remainder grows like
//! ω_τ (x + 2b)^{2β}, with ω_τ given in closed form.
//!
//! `cargo run --release --example power_drift`

use moment_tails::fixedpoint::{omega_tau, solve_gamma, FixedPointConfig, PowerDriftParams};
use moment_tails::models::SdeSpec;

fn main() -> moment_tails::Result<()> {
    let (beta, b, x0, t) = (1.0 / 3.0, 1.0, 0.5, 3.0);
    let spec = SdeSpec::power_drift(0.0, b, 1.0, beta, x0);
    let mut cfg = FixedPointConfig::new(t);
    cfg.x_max = 1e7;
    let sol = solve_gamma(&spec, &cfg)?;
    let w = omega_tau(beta, &PowerDriftParams { c: 1.0, b, sigma: 1.0, x0 }, (b * beta * t).exp())?;
    println!("omega_tau = {w:.6}; M = {:.3}, contraction {:?}", sol.m_threshold, sol.contraction);
    let xs = &sol.grid.x_nodes;
    let r = sol.grid.last_row();
    for j in (0..xs.len()).step_by(xs.len() / 10).chain([xs.len() - 1]) {
        let coef = r[j] / x0 / (xs[j] + 2.0 * b).powf(2.0 * beta);
        println!("x = {:>10.3e}: R/X0 = {:>12.5e}, R/(X0 (x+2b)^(2β)) / omega_tau = {:.4}", xs[j], r[j] / x0, coef / w);
    }
    Ok(())
}
