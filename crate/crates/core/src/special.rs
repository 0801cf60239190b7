//! Special functions in log space: regularized incomplete gamma and the
//! noncentral chi-squared survival function as a Poisson mixture.

use crate::error::{Error, Result};
use statrs::function::gamma::ln_gamma;

const FPMIN: f64 = 1e-300;

/// `ln(e^a + e^b)` without overflow.
pub fn log_add_exp(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let m = a.max(b);
    m + ((a - m).exp() + (b - m).exp()).ln()
}

/// `ln Σ e^{v_i}`.
pub fn log_sum_exp(v: &[f64]) -> f64 {
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Series for the regularized lower gamma `P(s, z)`, in log form.
fn ln_p_series(s: f64, z: f64) -> Result<f64> {
    let mut ap = s;
    let mut del = 1.0 / s;
    let mut sum = del;
    for _ in 0..100_000 {
        ap += 1.0;
        del *= z / ap;
        sum += del;
        if del.abs() < sum.abs() * 1e-17 {
            return Ok(sum.ln() - z + s * z.ln() - ln_gamma(s));
        }
    }
    Err(Error::numeric(format!("incomplete gamma series failed at s={s}, z={z}")))
}

/// Continued fraction for the regularized upper gamma `Q(s, z)`, in log form.
fn ln_q_fraction(s: f64, z: f64) -> Result<f64> {
    let mut b = z + 1.0 - s;
    let mut c = 1.0 / FPMIN;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..200_000 {
        let an = -(i as f64) * (i as f64 - s);
        b += 2.0;
        d = an * d + b;
        if d.abs() < FPMIN {
            d = FPMIN;
        }
        c = b + an / c;
        if c.abs() < FPMIN {
            c = FPMIN;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            return Ok(h.ln() - z + s * z.ln() - ln_gamma(s));
        }
    }
    Err(Error::numeric(format!("incomplete gamma continued fraction failed at s={s}, z={z}")))
}

/// `ln Q(s, z)` where `Q` is the regularized upper incomplete gamma function.
///
/// `s = 0` is the degenerate point mass at zero: `Q(0, z) = 0` for `z > 0`.
pub fn ln_gamma_q(s: f64, z: f64) -> Result<f64> {
    if s < 0.0 || z < 0.0 || s.is_nan() || z.is_nan() {
        return Err(Error::domain(format!("incomplete gamma needs s, z >= 0 (s={s}, z={z})")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    if s == 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if z < s + 1.0 {
        let lp = ln_p_series(s, z)?;
        let p = lp.exp();
        if p < 0.5 || z < 0.5 {
            return Ok((-p).ln_1p());
        }
    }
    ln_q_fraction(s, z)
}

/// `ln P(X ≥ z)` for `X ~ Σ_j Poisson(j; h) · Gamma(ν + j, 1)`.
///
/// With `ν = d/2`, `h = λ/2` and `z = y/2` this is the survival function of a
/// noncentral chi-squared variable with `d` degrees of freedom and noncentrality `λ`.
pub fn ln_poisson_gamma_sf(nu: f64, h: f64, z: f64) -> Result<f64> {
    if nu < 0.0 || h < 0.0 {
        return Err(Error::domain(format!("mixture needs nu, h >= 0 (nu={nu}, h={h})")));
    }
    if z <= 0.0 {
        return Ok(0.0);
    }
    const CAP: usize = 2_000_000;
    let ln_h = h.ln();
    let mut terms = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for j in 0..CAP {
        let jf = j as f64;
        let ln_pois = if h == 0.0 {
            if j == 0 {
                0.0
            } else {
                break;
            }
        } else {
            -h + jf * ln_h - ln_gamma(jf + 1.0)
        };
        let t = ln_pois + ln_gamma_q(nu + jf, z)?;
        terms.push(t);
        best = best.max(t);
        // terms are unimodal in j; stop well past the peak and the Poisson mode
        if jf > h && t < best - 60.0 && t <= terms[j.saturating_sub(1)] {
            return Ok(log_sum_exp(&terms));
        }
    }
    if h == 0.0 {
        return Ok(log_sum_exp(&terms));
    }
    Err(Error::numeric(format!(
        "noncentral chi-squared series did not converge after {CAP} terms"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use statrs::distribution::{ContinuousCDF, Gamma};

    #[test]
    fn matches_gamma_survival() {
        for &(s, z) in &[(0.8, 0.3), (0.8, 5.0), (3.5, 2.0), (10.0, 30.0), (0.01, 1.0)] {
            let g = Gamma::new(s, 1.0).unwrap();
            let expect = g.sf(z).ln();
            let got = ln_gamma_q(s, z).unwrap();
            assert!((got - expect).abs() < 1e-12 * expect.abs().max(1.0), "{s} {z}: {got} {expect}");
        }
    }

    #[test]
    fn deep_tail_is_finite() {
        // ln Q(1, z) = -z exactly
        let v = ln_gamma_q(1.0, 1e6).unwrap();
        assert!((v + 1e6).abs() < 1e-8);
    }

    #[test]
    fn mixture_with_zero_noncentrality_is_gamma() {
        let v = ln_poisson_gamma_sf(0.8, 0.0, 4.0).unwrap();
        assert!((v - ln_gamma_q(0.8, 4.0).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn log_sum_exp_is_stable() {
        assert!((log_sum_exp(&[-1000.0, -1000.0]) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
        assert!((log_add_exp(f64::NEG_INFINITY, 3.0) - 3.0).abs() == 0.0);
    }
}
