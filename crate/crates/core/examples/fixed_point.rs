//! Picard iteration for the log-MGF remainder of a square-root process. With a
//! constant drift the fixed point is known in closed form, so the CIR case
//! doubles as a check.
//!
//! `cargo run --release --example fixed_point`

use moment_tails::fixedpoint::{solve_gamma, FixedPointConfig};
use moment_tails::models::{cir_log_mgf, CirParams, SdeSpec};

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    let spec = SdeSpec::from_cir(&cir);
    let sol = solve_gamma(&spec, &FixedPointConfig::new(cir.t))?;
    println!(
        "M = {:.3}, {} iterations, residuals {:?}, contraction {:?}",
        sol.m_threshold, sol.iterations, sol.residual_history, sol.contraction
    );
    let last = sol.grid.t_nodes.len() - 1;
    let xs = &sol.grid.x_nodes;
    println!("{:>12} {:>16} {:>16}", "x", "Gamma(T, x)", "closed form");
    for j in (0..xs.len()).step_by(xs.len() / 8) {
        let mu = sol.tilt(last, j);
        println!("{:>12.4e} {:>16.8e} {:>16.8e}", xs[j], sol.gamma_at(last, j), cir_log_mgf(&cir, mu)?);
    }
    Ok(())
}
