//! Explicit log-MGF series of the mean-reverting CEV process: the ν coefficients
//! (float and exact rational) and the truncated expansion with its validity
//! threshold.
//!
//! `cargo run --release --example cev_series`

use moment_tails::cev::{nu_coefficients, nu_coefficients_exact, CevLogMgf, CevParams};

fn main() -> moment_tails::Result<()> {
    for (num, den) in [(1, 2), (4, 3), (3, 2)] {
        let lambda = num as f64 / den as f64;
        let float = nu_coefficients(lambda, 6)?;
        let exact = nu_coefficients_exact(num, den, 6)?;
        println!("lambda = {num}/{den}");
        for (i, q) in exact.iter().enumerate() {
            println!("  nu_{}: {:<24} {:.15e}", i + 1, q.to_string(), float.nu[i]);
        }
    }

    // p = 0.25 gives λ = 1.5, where the series has terms
    let params = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.25)?;
    let series = CevLogMgf::new(&params, 1.0, 10)?;
    println!("\nmu* = {:.6} for V^lambda", params.mu_star(1.0)?);
    for x in [1e2, 1e3, 1e4, 1e5] {
        let d = series.evaluate(x)?;
        println!(
            "x = {x:>6.0e}: Delta = {:.8e} (explicit {:.6e}, series {:.3e}, {} terms, valid beyond {:.3e}, error O(x^-{:.2}))",
            d.value, d.explicit, d.series, d.terms_kept, d.threshold, d.error_order
        );
    }
    Ok(())
}
