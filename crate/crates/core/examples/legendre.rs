//! Fenchel–Legendre conjugate of the CIR log-MGF: the optimal tilt p*(x), its
//! derivative and the rate function, plus a biconjugation round trip.
//!
//! `cargo run --release --example legendre`

use std::sync::Arc;

use moment_tails::legendre::{build_legendre, LogMgf};
use moment_tails::models::CirParams;

fn main() -> moment_tails::Result<()> {
    let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0)?;
    let data = build_legendre(Arc::new(cir), (1.0, 1e6))?;
    println!("mu* = {:.6}", data.mu_star());
    for x in [1.0, 10.0, 1e2, 1e4, 1e6] {
        let pt = data.point(x)?;
        println!(
            "x = {x:>8.0e}: p* = {:.8}, mu* - p* = {:.3e}, p*' = {:.3e}, Lambda* = {:.6e}",
            pt.p_star, pt.gap, pt.p_star_prime, pt.lambda_star
        );
    }
    let p = 0.5 * data.mu_star();
    let back = data.biconjugate(p, 1.0, 1e6)?;
    println!("Lambda**(p) = {back:.12}, Lambda(p) = {:.12}", cir.value(p));
    Ok(())
}
