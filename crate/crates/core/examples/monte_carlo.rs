//! Monte Carlo oracles: empirical log-MGF and CCDF of the CIR marginal against
//! their closed forms.
//!
//! `cargo run --release --example monte_carlo`

use moment_tails::models::{cir_log_mgf, CirParams};
use moment_tails::montecarlo::{empirical_log_mgf, simulate, EmpiricalCcdf, SimConfig};

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    let sim = simulate(&cir, &SimConfig::new(200_000, 500, cir.t, 1))?;
    println!("{} paths, {} flagged", sim.samples.len(), sim.flagged);
    for frac in [0.1, 0.25, 0.5] {
        let mu = frac * cir.mu_star();
        let e = empirical_log_mgf(&sim.samples, mu)?;
        println!(
            "log-MGF at {frac} mu*: {:.5} ± {:.5} (exact {:.5}, ESS {:.0})",
            e.value,
            e.stderr,
            cir_log_mgf(&cir, mu)?,
            e.ess
        );
    }
    let emp = EmpiricalCcdf::new(&sim.samples)?;
    for x in [0.5, 1.0, 2.0, 4.0] {
        let c = emp.ccdf(x);
        println!("P(X > {x}) = {:.5} [{:.5}, {:.5}] (exact {:.5})", c.p, c.lo, c.hi, cir.exact_ccdf(x)?);
    }
    Ok(())
}
