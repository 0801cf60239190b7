//! The CEV series and the fixed point describe the same log-MGF in different
//! coordinates. With a = 0 the transformed drift is constant, so both are exact
//! and must agree to solver precision; this pins the coordinate map.

use moment_tails::cev::{compare_with_fixed_point, CevParams};
use moment_tails::fixedpoint::FixedPointConfig;

#[test]
fn zero_drift_level_series_equals_fixed_point() {
    for p in [0.75, 0.25] {
        let params = CevParams::new(0.0, 1.0, 0.5, 0.5, p).unwrap();
        let mut cfg = FixedPointConfig::new(1.0);
        cfg.x_max = 1e5;
        let cmp = compare_with_fixed_point(&params, 1.0, 10, &cfg, 1.0).unwrap();
        assert!(!cmp.points.is_empty());
        for pt in &cmp.points {
            let scale = pt.gamma.abs().max(1.0);
            assert!(pt.diff.abs() / scale < 1e-6, "p = {p}, x = {}: Δ̂ = {}, Γ = {}", pt.x_delta, pt.delta_hat, pt.gamma);
        }
    }
}
