//! Ratio E[g(X) e^{p X}] / E[e^{p X}] at tilts p = μ* − 1/x close to the critical
//! moment, from the Laplace expansion, for a few power weights g(y) = y^γ.
//!
//! `cargo run --release --example tilt_ratio`

use std::sync::Arc;

use moment_tails::legendre::{build_legendre, LogMgf};
use moment_tails::models::CirParams;
use moment_tails::tauberian::{tilt_ratio, Order, Weight};

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    let data = build_legendre(Arc::new(cir), (1.0, 1e6))?;
    for gamma in [1.0, 0.5, 1.0 / 3.0] {
        let g = Weight::Power(gamma);
        println!("g(y) = y^{gamma:.4}");
        for x in [1e2, 1e3, 1e4, 1e5] {
            let lead = tilt_ratio(&g, &data, x, Order::Leading)?;
            let refined = tilt_ratio(&g, &data, x, Order::Refined)?;
            // normalised by g at the tilted mean Λ′(p)
            let level = cir.d1_gap(1.0 / x);
            let gl = g.eval(level);
            println!("  x = {x:>6.0e}: Λ′(p) = {level:.4e}, leading/g = {:.8}, refined/g = {:.8}", lead / gl, refined / gl);
        }
    }
    Ok(())
}
