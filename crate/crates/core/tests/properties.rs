//! Property checks on the closed-form layer.

use std::sync::Arc;

use moment_tails::legendre::build_legendre;
use moment_tails::models::{cir_log_mgf, critical_moment, CirParams};
use proptest::prelude::*;

fn params() -> impl Strategy<Value = CirParams> {
    (0.0..2.0f64, -1.0..3.0f64, 0.2..2.0f64, 0.05..3.0f64, 0.1..5.0f64)
        .prop_map(|(a, b, s, x0, t)| CirParams::new(a, b, s, x0, t).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn critical_moment_is_decreasing_in_t(b in -2.0..2.0f64, s in 0.1..3.0f64, t in 0.01..10.0f64) {
        let a = critical_moment(b, s, t).unwrap();
        let c = critical_moment(b, s, t * 1.5).unwrap();
        prop_assert!(c < a);
    }

    #[test]
    fn log_mgf_is_convex_and_vanishes_at_zero(c in params(), f1 in 0.01..0.98f64, f2 in 0.01..0.98f64) {
        prop_assert_eq!(cir_log_mgf(&c, 0.0).unwrap(), 0.0);
        let m = c.mu_star();
        let (u, v) = (f1 * m, f2 * m);
        let mid = cir_log_mgf(&c, 0.5 * (u + v)).unwrap();
        let chord = 0.5 * (cir_log_mgf(&c, u).unwrap() + cir_log_mgf(&c, v).unwrap());
        prop_assert!(mid <= chord + 1e-12 * chord.abs());
    }

    #[test]
    fn tilt_root_is_increasing_and_below_pole(c in params(), x in 2.0..1e5f64) {
        prop_assume!(x > 2.0 * c.mean());
        let d = build_legendre(Arc::new(c), (x, 2.0 * x)).unwrap();
        let p1 = d.p_star(x).unwrap();
        let p2 = d.p_star(2.0 * x).unwrap();
        prop_assert!(p1 < p2 && p2 < c.mu_star());
    }

    #[test]
    fn exact_ccdf_is_nonincreasing(c in params(), x in 0.01..20.0f64) {
        prop_assume!(c.a > 0.0);
        let a = c.exact_log_ccdf(x).unwrap();
        let b = c.exact_log_ccdf(x * 1.3).unwrap();
        prop_assert!(b <= a + 1e-12);
    }
}
