//! Tail of the CEV marginal V_T from two log-MGF sources, the truncated series
//! and the fixed point, checked against a short Monte Carlo run.
//!
//! `cargo run --release --example cev_tail`

use moment_tails::cev::{cev_ccdf, cev_ccdf_fixed_point, CevParams};
use moment_tails::fixedpoint::FixedPointConfig;
use moment_tails::montecarlo::{simulate, EmpiricalCcdf, SimConfig};
use moment_tails::tauberian::Order;

fn main() -> moment_tails::Result<()> {
    let (params, t) = (CevParams::new(0.3, 1.0, 0.5, 0.5, 0.75)?, 1.0);
    // levels for V^λ
    let xs = [0.55, 0.65, 0.75, 0.85];
    let series = cev_ccdf(&params, t, &xs, Order::Refined, 10)?;
    let mut cfg = FixedPointConfig::new(t);
    cfg.m_threshold = Some(1.0);
    cfg.x_max = 1e5;
    cfg.tol = 1e-8;
    let fp = cev_ccdf_fixed_point(&params, t, &xs, Order::Refined, &cfg)?;

    let sim = simulate(&params, &SimConfig::new(200_000, 500, t, 7))?;
    let u: Vec<f64> = sim.samples.iter().map(|v| v.powf(params.lambda)).collect();
    let emp = EmpiricalCcdf::new(&u)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "x", "series", "fixed point", "Monte Carlo", "stderr");
    for (i, &x) in xs.iter().enumerate() {
        let e = emp.ccdf(x);
        println!(
            "{x:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.1e}",
            series.expansion.points[i].estimate, fp.expansion.points[i].estimate, e.p, e.stderr
        );
    }
    Ok(())
}
