//! The floating-point `ν` recursion against rational arithmetic.
//!
//! The oracle expands `Σ_k C_k P(z)^k` with exact power-series products, a
//! different route from both the library's float convolution and its exact
//! composition enumeration.

use moment_tails::cev::{nu_coefficients, nu_coefficients_exact};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

fn q(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

/// `ν_1..ν_n` by truncated power series in `z`.
fn oracle(lambda: BigRational, n: usize) -> Vec<BigRational> {
    let one = q(1, 1);
    let beta = (lambda.clone() - one.clone()) / lambda.clone();
    let theta = (q(2, 1) - lambda.clone()) / lambda;
    let mut nu = vec![q(2, 1) * beta.clone()];
    for i in 1..n {
        // [z^i] Σ_k binom(β,k) P(z)^k with P = Σ_{j≤i} ν_j z^j
        let mut p = vec![BigRational::zero(); i + 1];
        for (j, v) in nu.iter().enumerate() {
            p[j + 1] = v.clone();
        }
        let mut power = vec![BigRational::zero(); i + 1];
        power[0] = one.clone();
        let mut binom = one.clone();
        let mut coeff = BigRational::zero();
        for k in 1..=i {
            let mut next = vec![BigRational::zero(); i + 1];
            for a in 0..=i {
                for b in 1..=i - a {
                    next[a + b] += power[a].clone() * p[b].clone();
                }
            }
            power = next;
            binom = binom * (beta.clone() - q(k as i64 - 1, 1)) / q(k as i64, 1);
            coeff += binom.clone() * power[i].clone();
        }
        let ip1 = q(i as i64 + 1, 1);
        nu.push(nu[0].clone() / ip1.clone() * (one.clone() - ip1 * theta.clone()) * coeff);
    }
    nu
}

#[test]
fn float_recursion_matches_rational_oracle() {
    for (num, den) in [(1, 2), (4, 3), (3, 2), (5, 4), (7, 4)] {
        let exact = oracle(q(num, den), 10);
        let float = nu_coefficients(num as f64 / den as f64, 10).unwrap();
        for (i, (e, f)) in exact.iter().zip(&float.nu).enumerate() {
            let ev = e.to_f64().unwrap();
            let tol = 1e-12 * ev.abs().max(1e-300);
            assert!((f - ev).abs() <= tol.max(1e-15), "λ={num}/{den} ν_{}: {f} vs {ev}", i + 1);
        }
    }
}

#[test]
fn library_exact_mode_matches_oracle() {
    for (num, den) in [(1, 2), (4, 3), (3, 2)] {
        assert_eq!(nu_coefficients_exact(num, den, 10).unwrap(), oracle(q(num, den), 10));
    }
}

#[test]
fn known_second_coefficients() {
    assert_eq!(oracle(q(3, 2), 2)[1], q(2, 81));
    assert!(oracle(q(4, 3), 2)[1].is_zero());
}
