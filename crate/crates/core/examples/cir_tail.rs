//! Tail expansion of the CIR marginal from its log-MGF, compared with the exact
//! Poisson–Gamma mixture.
//!
//! `cargo run --release --example cir_tail`

use std::sync::Arc;

use moment_tails::legendre::build_legendre;
use moment_tails::models::CirParams;
use moment_tails::tauberian::{ccdf_expansion, Order};

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    let data = build_legendre(Arc::new(cir), (1.0, 100.0))?;
    let xs = [2.0, 5.0, 10.0, 20.0, 50.0, 100.0];
    let lead = ccdf_expansion(&data, &xs, Order::Leading)?;
    let refined = ccdf_expansion(&data, &xs, Order::Refined)?;
    println!("{:>6} {:>12} {:>12} {:>12} {:>10}", "x", "exact", "leading", "refined", "x²p*'");
    for (l, r) in lead.points.iter().zip(&refined.points) {
        let exact = cir.exact_ccdf(l.x)?;
        println!("{:>6} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.1}", l.x, exact, l.estimate, r.estimate, l.reliability);
    }
    Ok(())
}
