//! Squeeze of a power-drift process between two CIR processes, with the
//! pathwise ordering and the log-MGF sandwich checked by simulation.
//!
//! `cargo run --release --example squeeze`

use moment_tails::models::SdeSpec;
use moment_tails::montecarlo::{build_squeeze, squeeze_check, SimConfig};

fn main() -> moment_tails::Result<()> {
    let spec = SdeSpec::power_drift(0.0, 1.0, 1.0, 1.0 / 3.0, 0.5);
    let sq = build_squeeze(&spec, 1e3, 1.0)?;
    println!("lower CIR drift {:.4}, upper CIR drift {:.4}, Z = {:.4e}", sq.lower_cir.a, sq.upper_cir.a, sq.z);
    let deciles: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let rep = squeeze_check(&sq, &SimConfig::new(20_000, 200, 1.0, 3), &deciles, &[1e2, 1e3])?;
    println!("{:>8} {:>10} {:>10} {:>10} {:>10}", "quantile", "level", "lower", "target", "upper");
    for o in &rep.ordering {
        println!("{:>8.1} {:>10.4} {:>10.5} {:>10.5} {:>10.5}", o.quantile, o.level, o.lower.p, o.target.p, o.upper.p);
    }
    for s in &rep.sandwich {
        println!("x = {:.0}: {:.2} <= {:.2} <= {:.2}", s.x, s.lower_bound, s.fixed_point, s.upper_bound);
    }
    println!("ordering {}, sandwich {}", rep.ordering_pass, rep.sandwich_pass);
    Ok(())
}
