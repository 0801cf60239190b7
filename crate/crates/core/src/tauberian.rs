//! Laplace-type integral asymptotics, CCDF tail expansions and exponential
//! tilt ratios built on a [`LegendreData`].

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::legendre::{LegendreData, LogMgf};
use crate::models::{slope, ScalarFn};
use crate::quad;

/// Expansion order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Order {
    Leading,
    Refined,
}

impl std::str::FromStr for Order {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "leading" => Ok(Order::Leading),
            "refined" => Ok(Order::Refined),
            _ => Err(Error::spec("order", format!("expected leading or refined, got {s}"))),
        }
    }
}

/// Weight function `g` with regular-variation index `γ_g = lim y g′(y)/g(y)`.
#[derive(Clone)]
pub enum Weight {
    /// `g(y) = y^γ`.
    Power(f64),
    Custom { f: ScalarFn, df: ScalarFn, index: f64 },
}

impl Weight {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Weight::Power(g) => {
                if *g == 0.0 {
                    1.0
                } else if *g == 1.0 {
                    y
                } else {
                    y.powf(*g)
                }
            }
            Weight::Custom { f, .. } => f(y),
        }
    }

    pub fn derivative(&self, y: f64) -> f64 {
        match self {
            Weight::Power(g) => {
                if *g == 0.0 {
                    0.0
                } else if *g == 1.0 {
                    1.0
                } else {
                    g * y.powf(g - 1.0)
                }
            }
            Weight::Custom { df, .. } => df(y),
        }
    }

    pub fn index(&self) -> f64 {
        match self {
            Weight::Power(g) => *g,
            Weight::Custom { index, .. } => *index,
        }
    }
}

/// `c_α = −¼(1+1/(α+1))(2+1/(α+1)) + (5/12)(1+1/(α+1))²`.
pub fn c_alpha(alpha: f64) -> f64 {
    let r = 1.0 + 1.0 / (alpha + 1.0);
    -0.25 * r * (r + 1.0) + 5.0 / 12.0 * r * r
}

/// Log-log slope of `x ↦ Λ(μ* − 1/x)` over the two decades below `x_hi`.
pub fn fit_alpha(source: &dyn LogMgf, x_hi: f64) -> f64 {
    let pts: Vec<(f64, f64)> = (0..=40)
        .map(|i| {
            let x = x_hi * 10f64.powf(-2.0 * i as f64 / 40.0);
            (x.ln(), source.value_gap(1.0 / x).ln())
        })
        .collect();
    slope(&pts)
}

/// The analytic index if the source supplies one, otherwise the fitted slope.
pub fn resolve_alpha(source: &dyn LogMgf) -> f64 {
    if let Some(a) = source.alpha() {
        return a;
    }
    let floor = source.min_gap().max(1e-8 * source.mu_star());
    fit_alpha(source, 1.0 / floor)
}

/// Phase function of the Laplace-type integral.
pub trait Kernel {
    /// Tilt scale `x`.
    fn x(&self) -> f64;
    fn p_star_prime(&self) -> f64;
    /// `χ_x(z)`; NaN if it cannot be evaluated.
    fn eval(&self, z: f64) -> f64;
    /// `χ_x′(z)`.
    fn derivative(&self, z: f64) -> f64;
    /// Smallest admissible `z`.
    fn z_min(&self) -> f64 {
        0.0
    }
    /// `x²p*′(x)`.
    fn reliability(&self) -> f64 {
        self.x() * self.x() * self.p_star_prime()
    }
}

/// `χ_x(z) = (p*(x) − p*(xz))xz + Λ(p*(xz)) − Λ(p*(x))` for a log-MGF.
pub struct ChiKernel<'a> {
    data: &'a LegendreData,
    pub x: f64,
    gap_x: f64,
    lambda_x: f64,
    pub p_star_prime: f64,
    /// Proof-level window `h(x) = x^{−1+γ/4}/√p*′(x)`.
    pub window: f64,
}

impl<'a> ChiKernel<'a> {
    pub fn new(data: &'a LegendreData, x: f64) -> Result<Self> {
        let gap_x = data.gap(x)?;
        let psp = data.p_star_prime_at_gap(gap_x);
        let (a1, a2) = data
            .source()
            .envelope()
            .map(|e| (e.alpha1, e.alpha2))
            .unwrap_or_else(|| {
                let a = resolve_alpha(data.source());
                (a, a)
            });
        let gamma = 2.0 - (a2 / a1) * (1.0 + 1.0 / (1.0 + a2));
        Ok(ChiKernel {
            data,
            x,
            gap_x,
            lambda_x: data.lambda_at_gap(gap_x),
            p_star_prime: psp,
            window: x.powf(-1.0 + gamma / 4.0) / psp.sqrt(),
        })
    }

    fn gap_at(&self, z: f64) -> f64 {
        if z == 1.0 {
            return self.gap_x;
        }
        self.data.gap(self.x * z).unwrap_or(f64::NAN)
    }
}

impl Kernel for ChiKernel<'_> {
    fn x(&self) -> f64 {
        self.x
    }
    fn p_star_prime(&self) -> f64 {
        self.p_star_prime
    }
    fn eval(&self, z: f64) -> f64 {
        if z == 1.0 {
            return 0.0;
        }
        let g = self.gap_at(z);
        // p*(x) − p*(xz) = gap(xz) − gap(x)
        (g - self.gap_x) * self.x * z + (self.data.lambda_at_gap(g) - self.lambda_x)
    }
    fn derivative(&self, z: f64) -> f64 {
        self.x * (self.gap_at(z) - self.gap_x)
    }
    fn z_min(&self) -> f64 {
        self.data.x_min / self.x
    }
}

/// Exactly quadratic phase `−x²p*′(z−1)²/2`.
pub struct QuadraticKernel {
    pub x: f64,
    pub p_star_prime: f64,
}

impl Kernel for QuadraticKernel {
    fn x(&self) -> f64 {
        self.x
    }
    fn p_star_prime(&self) -> f64 {
        self.p_star_prime
    }
    fn eval(&self, z: f64) -> f64 {
        -0.5 * self.reliability() * (z - 1.0) * (z - 1.0)
    }
    fn derivative(&self, z: f64) -> f64 {
        -self.reliability() * (z - 1.0)
    }
    fn z_min(&self) -> f64 {
        f64::NEG_INFINITY
    }
}

/// Asymptotic and numerical values of `∫ g(xz)e^{χ_x(z)}dz`.
#[derive(Debug, Clone, Serialize)]
pub struct LaplaceResult {
    pub x: f64,
    pub reliability: f64,
    /// `√(2π)g(x)/(x√p*′)`.
    pub leading: f64,
    /// Leading times `1 + (γ_g² + γ_g/(α+1) + c_α)/(2x²p*′)`.
    pub refined: f64,
    /// The requested order.
    pub asymptotic: f64,
    pub quadrature: f64,
    pub quadrature_error: f64,
    /// Estimate of the mass outside the quadrature window.
    pub tail_bound: f64,
    pub window: (f64, f64),
    pub warning: Option<String>,
}

/// Half-width of the quadrature window in units of the local Gaussian scale.
pub const WINDOW_SIGMAS: f64 = 8.0;

/// Evaluates the Laplace-type integral asymptotically and by adaptive quadrature.
pub fn laplace_integral(g: &Weight, kernel: &dyn Kernel, order: Order, alpha: f64) -> Result<LaplaceResult> {
    let x = kernel.x();
    let s = kernel.reliability();
    if !(s > 0.0) {
        return Err(Error::numeric(format!("x²p*′ = {s} is not positive")));
    }
    let h = WINDOW_SIGMAS / s.sqrt();
    let lo = (1.0 - h).max(kernel.z_min() * (1.0 + 1e-12));
    let hi = 1.0 + h;
    // χ is a difference of terms of size ~x·gap, so relative accuracy below ~1e-12 is noise
    let q = quad::integrate(|z: f64| g.eval(x * z) * kernel.eval(z).exp(), lo, hi, 1e-10, 0.0)?;
    let tail = |z: f64| g.eval(x * z) * kernel.eval(z).exp() / kernel.derivative(z).abs();
    let tail_bound = if lo > 1.0 - h { 0.0 } else { tail(lo) } + tail(hi);
    let leading = (2.0 * PI).sqrt() * g.eval(x) / (x * kernel.p_star_prime().sqrt());
    let gg = g.index();
    let refined = leading * (1.0 + (gg * gg + gg / (alpha + 1.0) + c_alpha(alpha)) / (2.0 * s));
    let warning = (s < 10.0).then(|| format!("x²p*′ = {s:.3} < 10: asymptotics unreliable"));
    Ok(LaplaceResult {
        x,
        reliability: s,
        leading,
        refined,
        asymptotic: if order == Order::Leading { leading } else { refined },
        quadrature: q.value,
        quadrature_error: q.error,
        tail_bound,
        window: (lo, hi),
        warning,
    })
}

/// One point of a CCDF tail expansion.
#[derive(Debug, Clone, Serialize)]
pub struct TailPoint {
    pub x: f64,
    pub lambda_star: f64,
    pub p_star: f64,
    pub p_star_prime: f64,
    /// `x²p*′(x)`.
    pub reliability: f64,
    /// `√p*′/(p*√(2π))`.
    pub leading: f64,
    /// `−(2 + α/(α+1)²)/(24μ*√(2π))·1/(x²√p*′)`.
    pub correction: f64,
    /// `ln` of the (unclamped) estimate.
    pub log_estimate: f64,
    /// Estimate clamped to `[0, 1]`.
    pub estimate: f64,
    pub clamped: bool,
    pub reliable: bool,
}

/// CCDF tail expansion at a set of query points.
#[derive(Debug, Clone, Serialize)]
pub struct TailExpansion {
    pub order: Order,
    pub alpha: f64,
    pub mu_star: f64,
    pub points: Vec<TailPoint>,
}

impl TailExpansion {
    /// Estimates are nonincreasing across reliable points.
    pub fn is_monotone_on_reliable(&self) -> bool {
        let r: Vec<&TailPoint> = self.points.iter().filter(|p| p.reliable).collect();
        r.windows(2).all(|w| w[1].x <= w[0].x || w[1].log_estimate <= w[0].log_estimate)
    }
}

/// `P(X ≥ x) ≈ e^{−Λ*(x)}[√p*′/(p*√(2π)) (+ correction)]`.
pub fn ccdf_expansion(data: &LegendreData, xs: &[f64], order: Order) -> Result<TailExpansion> {
    ccdf_expansion_with_alpha(data, xs, order, None)
}

pub fn ccdf_expansion_with_alpha(
    data: &LegendreData,
    xs: &[f64],
    order: Order,
    alpha: Option<f64>,
) -> Result<TailExpansion> {
    let alpha = alpha.unwrap_or_else(|| resolve_alpha(data.source()));
    let m = data.mu_star();
    let kc = (2.0 + alpha / ((alpha + 1.0) * (alpha + 1.0))) / (24.0 * m * (2.0 * PI).sqrt());
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let pt = data.point(x)?;
        let psp = pt.p_star_prime;
        let leading = psp.sqrt() / (pt.p_star * (2.0 * PI).sqrt());
        let correction = -kc / (x * x * psp.sqrt());
        let factor = match order {
            Order::Leading => leading,
            Order::Refined => leading + correction,
        };
        let rel = x * x * psp;
        let crossover = (2.0 + alpha / ((alpha + 1.0) * (alpha + 1.0))) * pt.p_star * pt.p_star / (12.0 * m);
        let mut reliable = pt.p_star > 0.0 && rel > crossover && correction.abs() < leading;
        let log_estimate = if factor > 0.0 {
            -pt.lambda_star + factor.ln()
        } else {
            reliable = false;
            -pt.lambda_star + leading.ln()
        };
        let clamped = log_estimate > 0.0;
        if clamped {
            reliable = false;
        }
        points.push(TailPoint {
            x,
            lambda_star: pt.lambda_star,
            p_star: pt.p_star,
            p_star_prime: psp,
            reliability: rel,
            leading,
            correction,
            log_estimate,
            estimate: log_estimate.min(0.0).exp(),
            clamped,
            reliable,
        });
    }
    Ok(TailExpansion { order, alpha, mu_star: m, points })
}

/// Approximation of `E[g(X)e^{pX}]/E[e^{pX}]` at `p = μ* − 1/x`.
///
/// Leading order: `g(Λ′) + g′(Λ′)/p`. Refined order: `g(Λ′)(1 + (γ²−γ)Λ″/(2Λ′²))`,
/// which is exact for `g ≡ 1` and `g(y) = y`.
pub fn tilt_ratio(g: &Weight, data: &LegendreData, x: f64, order: Order) -> Result<f64> {
    let m = data.mu_star();
    let p = m - 1.0 / x;
    if !(p > 0.0) {
        return Err(Error::domain(format!("tilt μ* − 1/x must be positive (x = {x}, μ* = {m})")));
    }
    let gap = 1.0 / x;
    if gap < data.source().min_gap() {
        return Err(Error::domain(format!("x = {x} beyond the range of the log-MGF")));
    }
    let d1 = data.source().d1_gap(gap);
    let d2 = data.source().d2_gap(gap);
    Ok(match order {
        Order::Leading => g.eval(d1) + g.derivative(d1) / p,
        Order::Refined => {
            let gi = g.index();
            g.eval(d1) * (1.0 + (gi * gi - gi) * d2 / (2.0 * d1 * d1))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::legendre::{build_legendre, GaussianSurrogate};
    use crate::models::CirParams;
    use std::sync::Arc;

    #[test]
    fn c_alpha_vanishes_at_one() {
        assert!(c_alpha(1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_kernel_gives_gaussian_integral() {
        let k = QuadraticKernel { x: 50.0, p_star_prime: 0.3 };
        let r = laplace_integral(&Weight::Power(0.0), &k, Order::Leading, 1.0).unwrap();
        assert!((r.quadrature / r.leading - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tilt_ratio_exact_cases() {
        let c = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap();
        let d = build_legendre(Arc::new(c), (1.0, 1e6)).unwrap();
        for &x in &[2.0, 10.0, 1e3] {
            assert_eq!(tilt_ratio(&Weight::Power(0.0), &d, x, Order::Refined).unwrap(), 1.0);
            assert_eq!(tilt_ratio(&Weight::Power(0.0), &d, x, Order::Leading).unwrap(), 1.0);
            let v = tilt_ratio(&Weight::Power(1.0), &d, x, Order::Refined).unwrap();
            assert_eq!(v, c.log_mgf_d1_gap(1.0 / x));
        }
    }

    #[test]
    fn gaussian_surrogate_gives_mills_ratio() {
        let d = build_legendre(Arc::new(GaussianSurrogate { cap: 1e8 }), (0.0, 100.0)).unwrap();
        let t = ccdf_expansion_with_alpha(&d, &[5.0, 10.0], Order::Leading, Some(1.0)).unwrap();
        for p in &t.points {
            let mills = (-p.x * p.x / 2.0).exp() / (p.x * (2.0 * PI).sqrt());
            assert!((p.estimate / mills - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn chi_kernel_shape() {
        let c = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap();
        let d = build_legendre(Arc::new(c), (1.0, 1e9)).unwrap();
        let k = ChiKernel::new(&d, 1e4).unwrap();
        assert_eq!(k.eval(1.0), 0.0);
        assert!(k.eval(1.01) < k.eval(1.001) && k.eval(1.001) < 0.0);
        assert!(k.eval(0.99) < k.eval(0.999) && k.eval(0.999) < 0.0);
        let s = k.reliability();
        for &dz in &[-0.25, -0.1, 0.1, 0.25] {
            let z = 1.0 + dz * k.window;
            let ratio = k.eval(z) / (-0.5 * s * (z - 1.0) * (z - 1.0));
            assert!((0.5..=2.0).contains(&ratio), "{z}: {ratio}");
        }
    }
}
