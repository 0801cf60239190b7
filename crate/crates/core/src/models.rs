//! SDE specifications, the CIR reference process and the Σ-transform.
//!
//! The CIR process `dX = (a − bX)dt + σ√X dW` is the closed-form anchor of the
//! crate: its critical moment, log-MGF and exact terminal law are used as
//! oracles everywhere else.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::quad;
use crate::special;

/// Critical moment `μ*_t = 2b / (σ²(1 − e^{−bt}))` of a CIR process.
///
/// For `|bt| < 1e−8` a second-order series around `b = 0` is used, whose limit is `2/(σ²t)`.
pub fn critical_moment(b: f64, sigma: f64, t: f64) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("sigma must be positive, got {sigma}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::domain(format!("t must be positive, got {t}")));
    }
    if !b.is_finite() {
        return Err(Error::domain(format!("b must be finite, got {b}")));
    }
    let bt = b * t;
    let s2 = sigma * sigma;
    if bt.abs() < 1e-8 {
        return Ok(2.0 / (s2 * t) * (1.0 + bt / 2.0 + bt * bt / 12.0));
    }
    Ok(2.0 * b / (s2 * -(-bt).exp_m1()))
}

/// `1/μ*_t` computed without cancellation.
pub fn inverse_critical_moment(b: f64, sigma: f64, t: f64) -> f64 {
    let bt = b * t;
    let s2 = sigma * sigma;
    if bt.abs() < 1e-8 {
        return s2 * t / 2.0 * (1.0 - bt / 2.0 + bt * bt / 6.0);
    }
    s2 * -(-bt).exp_m1() / (2.0 * b)
}

/// Parameters of `dX = (a − bX)dt + σ√X dW`, `X_0 = x0`, observed at horizon `t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CirParams {
    /// Drift level. Negative values are accepted for the formal log-MGF only.
    pub a: f64,
    /// Mean-reversion rate.
    pub b: f64,
    /// Diffusion scale.
    pub sigma: f64,
    /// Initial state.
    pub x0: f64,
    /// Horizon.
    pub t: f64,
}

impl CirParams {
    pub fn new(a: f64, b: f64, sigma: f64, x0: f64, t: f64) -> Result<Self> {
        let p = CirParams { a, b, sigma, x0, t };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.a.is_finite() {
            return Err(Error::domain(format!("a must be finite, got {}", self.a)));
        }
        if !(self.x0 > 0.0) || !self.x0.is_finite() {
            return Err(Error::domain(format!("x0 must be positive, got {}", self.x0)));
        }
        critical_moment(self.b, self.sigma, self.t).map(|_| ())
    }

    pub fn mu_star(&self) -> f64 {
        critical_moment(self.b, self.sigma, self.t).expect("validated parameters")
    }

    /// `e^{−bt}`.
    pub fn decay(&self) -> f64 {
        (-self.b * self.t).exp()
    }

    /// Pole strength `k = X₀e^{−bt}μ*²`, so that `Λ ≈ k/(μ* − μ)` near the pole.
    pub fn pole_strength(&self) -> f64 {
        let m = self.mu_star();
        self.x0 * self.decay() * m * m
    }

    /// Coefficient `2a/σ²` of the logarithmic term.
    pub fn log_coefficient(&self) -> f64 {
        2.0 * self.a / (self.sigma * self.sigma)
    }

    /// `E X_t`.
    pub fn mean(&self) -> f64 {
        let e = self.decay();
        let frac = if (self.b * self.t).abs() < 1e-12 {
            self.t
        } else {
            -(-self.b * self.t).exp_m1() / self.b
        };
        self.x0 * e + self.a * frac
    }

    /// Log-MGF at `μ = μ* − gap`.
    ///
    /// The Riccati solution gives `Λ = ψ(t)X₀ + φ(t)` with
    /// `ψ = μe^{−bt}μ*/(μ* − μ)` and `φ = (2a/σ²) ln(μ*/(μ* − μ))`.
    pub fn log_mgf_gap(&self, gap: f64) -> f64 {
        let m = self.mu_star();
        let mu = m - gap;
        let lin = self.x0 * self.decay() * mu * m / gap;
        lin + self.log_coefficient() * (mu / gap).ln_1p()
    }

    /// `Λ′` at `μ = μ* − gap`.
    pub fn log_mgf_d1_gap(&self, gap: f64) -> f64 {
        self.pole_strength() / (gap * gap) + self.log_coefficient() / gap
    }

    /// `Λ″` at `μ = μ* − gap`.
    pub fn log_mgf_d2_gap(&self, gap: f64) -> f64 {
        2.0 * self.pole_strength() / (gap * gap * gap) + self.log_coefficient() / (gap * gap)
    }

    /// Gap `μ* − p` at which `Λ′(p) = x`, from the quadratic `k u² + q u − x = 0`, `u = 1/gap`.
    pub fn gap_for_slope(&self, x: f64) -> f64 {
        let k = self.pole_strength();
        let q = self.log_coefficient();
        let disc = (q * q + 4.0 * k * x).sqrt();
        if q >= 0.0 {
            (q + disc) / (2.0 * x)
        } else {
            2.0 * k / (disc - q)
        }
    }

    /// `ln P(X_t ≥ x)` from the noncentral chi-squared law of `X_t`.
    ///
    /// `X_t = G/μ*` where `G` is a Poisson(μ*X₀e^{−bt}) mixture of Gamma(2a/σ² + j) variables.
    pub fn exact_log_ccdf(&self, x: f64) -> Result<f64> {
        if self.a < 0.0 {
            return Err(Error::domain("exact law requires a >= 0"));
        }
        if x.is_nan() {
            return Err(Error::domain("x is NaN"));
        }
        if x <= 0.0 {
            return Ok(0.0);
        }
        let m = self.mu_star();
        special::ln_poisson_gamma_sf(self.log_coefficient(), m * self.x0 * self.decay(), m * x)
    }

    pub fn exact_ccdf(&self, x: f64) -> Result<f64> {
        Ok(self.exact_log_ccdf(x)?.exp())
    }
}

/// `ln E e^{μX_t}` for the CIR process.
pub fn cir_log_mgf(params: &CirParams, mu: f64) -> Result<f64> {
    let m = params.mu_star();
    if mu.is_nan() {
        return Err(Error::domain("mu is NaN"));
    }
    if mu >= m {
        return Err(Error::Explosion { mu, mu_star: m });
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    let gap = m - mu;
    let lin = params.x0 * params.decay() * mu * m / gap;
    Ok(lin + params.log_coefficient() * (mu / gap).ln_1p())
}

/// `P(X_t ≥ x)` for the CIR process.
pub fn cir_exact_ccdf(params: &CirParams, x: f64) -> Result<f64> {
    params.exact_ccdf(x)
}

/// A real function of one variable shared across threads.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Drift `B(y)`.
#[derive(Clone)]
pub enum Drift {
    /// `a − b y`.
    Affine { a: f64, b: f64 },
    /// `a − b y + c y^β`.
    Power { a: f64, b: f64, c: f64, beta: f64 },
    /// Any callable.
    Custom(ScalarFn),
}

impl Drift {
    pub fn eval(&self, y: f64) -> f64 {
        match self {
            Drift::Affine { a, b } => a - b * y,
            Drift::Power { a, b, c, beta } => {
                let p = if *c == 0.0 { 0.0 } else { c * y.max(0.0).powf(*beta) };
                a - b * y + p
            }
            Drift::Custom(f) => f(y),
        }
    }
}

impl fmt::Debug for Drift {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Drift::Affine { a, b } => write!(f, "Affine(a={a}, b={b})"),
            Drift::Power { a, b, c, beta } => write!(f, "Power(a={a}, b={b}, c={c}, beta={beta})"),
            Drift::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Diffusion coefficient `σ(y)`.
#[derive(Clone)]
pub enum Diffusion {
    /// `σ √y`.
    SquareRoot { sigma: f64 },
    /// `σ y^p`.
    Power { sigma: f64, p: f64 },
    /// `σ`.
    Constant { sigma: f64 },
    /// Any callable, positive on `(0, ∞)`.
    Custom(ScalarFn),
}

impl Diffusion {
    /// Recognised power form `(σ, p)` with `σ(y) = σ y^p`.
    pub fn as_power(&self) -> Option<(f64, f64)> {
        match self {
            Diffusion::SquareRoot { sigma } => Some((*sigma, 0.5)),
            Diffusion::Power { sigma, p } => Some((*sigma, *p)),
            Diffusion::Constant { sigma } => Some((*sigma, 0.0)),
            Diffusion::Custom(_) => None,
        }
    }

    pub fn eval(&self, y: f64) -> f64 {
        let y = y.max(0.0);
        match self {
            Diffusion::SquareRoot { sigma } => sigma * y.sqrt(),
            Diffusion::Power { sigma, p } => {
                if *p == 0.75 {
                    let r = y.sqrt();
                    sigma * r * r.sqrt()
                } else if *p == 0.5 {
                    sigma * y.sqrt()
                } else {
                    sigma * y.powf(*p)
                }
            }
            Diffusion::Constant { sigma } => *sigma,
            Diffusion::Custom(f) => f(y),
        }
    }

    /// `σ′(y)`: analytic for power forms, fourth-order central differences otherwise.
    pub fn derivative(&self, y: f64) -> f64 {
        match self.as_power() {
            Some((s, p)) => {
                if p == 0.0 {
                    0.0
                } else {
                    s * p * y.powf(p - 1.0)
                }
            }
            None => {
                let h = 1e-3 * y.abs().max(1e-8);
                let h = h.min(0.4 * y);
                (-self.eval(y + 2.0 * h) + 8.0 * self.eval(y + h) - 8.0 * self.eval(y - h)
                    + self.eval(y - 2.0 * h))
                    / (12.0 * h)
            }
        }
    }
}

impl fmt::Debug for Diffusion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Diffusion::SquareRoot { sigma } => write!(f, "SquareRoot(sigma={sigma})"),
            Diffusion::Power { sigma, p } => write!(f, "Power(sigma={sigma}, p={p})"),
            Diffusion::Constant { sigma } => write!(f, "Constant(sigma={sigma})"),
            Diffusion::Custom(_) => write!(f, "Custom"),
        }
    }
}

/// Monotonicity class of `y ↦ B(y)/y` on `[M, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonotoneClass {
    Increasing,
    Decreasing,
}

/// One-dimensional SDE `dX = B(X)dt + σ(X)dW` with drift-regularity metadata.
#[derive(Debug, Clone)]
pub struct SdeSpec {
    pub drift: Drift,
    pub diffusion: Diffusion,
    /// Growth exponent of `B̄(y) = B(y) + b y`.
    pub beta: f64,
    /// Regularity threshold `M`.
    pub m_threshold: f64,
    pub monotone_class: MonotoneClass,
    /// Asymptotic rate `b` with `B(y)/y → −b`.
    pub b_limit: f64,
    pub x0: f64,
}

impl SdeSpec {
    /// `B̄(y) = B(y) + b·y`.
    pub fn bbar(&self, y: f64) -> f64 {
        match &self.drift {
            Drift::Affine { a, b } if *b == self.b_limit => *a,
            Drift::Power { a, b, c, beta } if *b == self.b_limit => {
                a + if *c == 0.0 { 0.0 } else { c * y.max(0.0).powf(*beta) }
            }
            _ => self.drift.eval(y) + self.b_limit * y,
        }
    }

    /// The CIR process as an `SdeSpec`.
    pub fn from_cir(p: &CirParams) -> Self {
        SdeSpec {
            drift: Drift::Affine { a: p.a, b: p.b },
            diffusion: Diffusion::SquareRoot { sigma: p.sigma },
            beta: 0.0,
            m_threshold: 1.0,
            monotone_class: MonotoneClass::Decreasing,
            b_limit: p.b,
            x0: p.x0,
        }
    }

    /// Square-root SDE with unit diffusion and drift `a − b y + c y^β`.
    pub fn power_drift(a: f64, b: f64, c: f64, beta: f64, x0: f64) -> Self {
        let class = if c > 0.0 || (c == 0.0 && a >= 0.0) {
            MonotoneClass::Decreasing
        } else {
            MonotoneClass::Increasing
        };
        SdeSpec {
            drift: Drift::Power { a, b, c, beta },
            diffusion: Diffusion::SquareRoot { sigma: 1.0 },
            beta,
            m_threshold: 1.0,
            monotone_class: class,
            b_limit: b,
            x0,
        }
    }
}

/// Outcome of [`validate_drift`].
#[derive(Debug, Clone, Serialize)]
pub struct DriftReport {
    /// Observed monotonicity of `B(y)/y` on the grid, `None` if neither.
    pub observed_class: Option<MonotoneClass>,
    pub declared_class: MonotoneClass,
    /// `−B(y)/y` at the largest grid point.
    pub b_fit: f64,
    /// Log-log slope of `|B̄|` over the grid.
    pub beta_fit: f64,
    pub beta_declared: f64,
    pub warnings: Vec<String>,
    pub failures: Vec<String>,
    pub pass: bool,
}

/// Numerical check of the drift regularity assumption on a sample grid.
pub fn validate_drift(spec: &SdeSpec, grid: &[f64]) -> DriftReport {
    let mut warnings = Vec::new();
    let mut failures = Vec::new();
    if grid.len() < 100 {
        warnings.push(format!("grid has {} points, fewer than 100", grid.len()));
    }
    let ratios: Vec<f64> = grid.iter().map(|&y| spec.drift.eval(y) / y).collect();
    let mut inc = true;
    let mut dec = true;
    for w in ratios.windows(2) {
        let tol = 1e-14 * w[0].abs().max(w[1].abs());
        if w[1] > w[0] + tol {
            dec = false;
        }
        if w[1] < w[0] - tol {
            inc = false;
        }
    }
    let observed_class = match (inc, dec) {
        (_, true) => Some(MonotoneClass::Decreasing),
        (true, false) => Some(MonotoneClass::Increasing),
        _ => None,
    };
    // a constant ratio belongs to both classes
    let class_ok = match observed_class {
        None => false,
        Some(c) => c == spec.monotone_class || (inc && dec),
    };
    if observed_class.is_none() {
        failures.push("B(y)/y is not monotone on the grid".into());
    } else if !class_ok {
        failures.push(format!(
            "declared class {:?} but observed {:?}",
            spec.monotone_class, observed_class
        ));
    }
    let b_fit = -ratios.last().copied().unwrap_or(f64::NAN);

    let pts: Vec<(f64, f64)> = grid
        .iter()
        .map(|&y| (y.ln(), spec.bbar(y).abs()))
        .filter(|&(_, v)| v > 0.0 && v.is_finite())
        .map(|(u, v)| (u, v.ln()))
        .collect();
    let beta_fit = if pts.len() < 2 { 0.0 } else { slope(&pts) };
    if (beta_fit - spec.beta).abs() > 0.05 {
        warnings.push(format!(
            "fitted beta {beta_fit:.4} differs from declared {:.4}",
            spec.beta
        ));
    }
    if spec.beta >= 1.0 {
        failures.push(format!("beta = {} must be below 1", spec.beta));
    }
    let class = observed_class.unwrap_or(spec.monotone_class);
    if class == MonotoneClass::Increasing && (spec.beta > 0.5 || beta_fit > 0.5 + 0.05) {
        failures.push(format!(
            "increasing class requires beta <= 1/2 (declared {}, fitted {beta_fit:.4})",
            spec.beta
        ));
    }
    let near_zero_max = (0..=200)
        .map(|i| spec.drift.eval(spec.m_threshold * i as f64 / 200.0).abs())
        .fold(0.0f64, f64::max);
    if !near_zero_max.is_finite() {
        failures.push("B is not bounded on [0, M]".into());
    }
    DriftReport {
        observed_class,
        declared_class: spec.monotone_class,
        b_fit,
        beta_fit,
        beta_declared: spec.beta,
        pass: failures.is_empty(),
        warnings,
        failures,
    }
}

/// Least-squares slope of `v` against `u`.
pub(crate) fn slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let mu = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let mv = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let cov: f64 = pts.iter().map(|p| (p.0 - mu) * (p.1 - mv)).sum();
    let var: f64 = pts.iter().map(|p| (p.0 - mu) * (p.0 - mu)).sum();
    cov / var
}

/// The map `Y = Σ(X)` with `Σ(x) = (∫₀ˣ du/(2σ(u)))²`, under which `Y` has
/// diffusion `√Y`, together with the drift of `Y`.
#[derive(Debug, Clone)]
pub struct SigmaTransform {
    pub diffusion: Diffusion,
    pub drift: Drift,
}

/// Builds the Σ-transform of `dX = b(X)dt + σ(X)dW`.
pub fn sigma_transform(diffusion: Diffusion, drift: Drift) -> Result<SigmaTransform> {
    if let Some((s, p)) = diffusion.as_power() {
        if !(s > 0.0) {
            return Err(Error::domain(format!("diffusion scale must be positive, got {s}")));
        }
        if p >= 1.0 {
            return Err(Error::domain(format!(
                "1/sigma is not integrable at 0 for exponent p = {p}"
            )));
        }
    }
    let tr = SigmaTransform { diffusion, drift };
    let f1 = tr.half_integral(1.0)?;
    if !f1.is_finite() || f1 <= 0.0 {
        return Err(Error::domain("1/sigma is not integrable near 0"));
    }
    Ok(tr)
}

impl SigmaTransform {
    /// `λ = 2(1 − p)` and `σ̄` when the diffusion is a power function.
    fn power(&self) -> Option<(f64, f64)> {
        self.diffusion.as_power().map(|(s, p)| (s, 2.0 * (1.0 - p)))
    }

    /// `F(x) = ∫₀ˣ du/(2σ(u))`, so that `Σ = F²`.
    fn half_integral(&self, x: f64) -> Result<f64> {
        if x <= 0.0 {
            return Ok(0.0);
        }
        if let Some((s, lam)) = self.power() {
            return Ok(x.powf(lam / 2.0) / (s * lam));
        }
        // u = x s^8 tames integrable singularities of 1/σ at 0
        let q = quad::integrate(
            |s: f64| {
                if s <= 0.0 {
                    return 0.0;
                }
                let u = x * s.powi(8);
                let v = x * 8.0 * s.powi(7) / (2.0 * self.diffusion.eval(u));
                if v.is_finite() {
                    v
                } else {
                    f64::INFINITY
                }
            },
            0.0,
            1.0,
            1e-14,
            0.0,
        )
        .map_err(|e| Error::domain(format!("1/sigma is not integrable near 0: {e}")))?;
        Ok(q.value)
    }

    /// `Σ(x)`.
    pub fn sigma_big(&self, x: f64) -> Result<f64> {
        let f = self.half_integral(x)?;
        Ok(f * f)
    }

    /// `Σ′(x) = F(x)/σ(x)`.
    pub fn sigma_big_prime(&self, x: f64) -> Result<f64> {
        Ok(self.half_integral(x)? / self.diffusion.eval(x))
    }

    /// `Σ⁻¹(y)`.
    pub fn sigma_big_inv(&self, y: f64) -> Result<f64> {
        if y <= 0.0 {
            return Ok(0.0);
        }
        if let Some((s, lam)) = self.power() {
            return Ok((s * lam).powf(2.0 / lam) * y.powf(1.0 / lam));
        }
        let target = y.sqrt();
        let mut lo = 0.0;
        let mut hi = 1.0;
        while self.half_integral(hi)? < target {
            lo = hi;
            hi *= 2.0;
            if hi > 1e300 {
                return Err(Error::numeric("Sigma inverse not bracketed"));
            }
        }
        let mut x = 0.5 * (lo + hi);
        for _ in 0..200 {
            let f = self.half_integral(x)? - target;
            if f > 0.0 {
                hi = x;
            } else {
                lo = x;
            }
            // F′ = 1/(2σ)
            let step = f * 2.0 * self.diffusion.eval(x);
            let mut next = x - step;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x {
                return Ok(next);
            }
            x = next;
        }
        Ok(x)
    }

    /// `(Σ⁻¹)′(y) = σ(x)/√y` with `x = Σ⁻¹(y)`.
    pub fn inv_d1(&self, y: f64) -> Result<f64> {
        let x = self.sigma_big_inv(y)?;
        Ok(self.diffusion.eval(x) / y.sqrt())
    }

    /// `(Σ⁻¹)″(y) = σ′(x)σ(x)/y − σ(x)/(2y^{3/2})`.
    pub fn inv_d2(&self, y: f64) -> Result<f64> {
        let x = self.sigma_big_inv(y)?;
        let s = self.diffusion.eval(x);
        Ok(self.diffusion.derivative(x) * s / y - s / (2.0 * y * y.sqrt()))
    }

    /// Drift of `Y = Σ(X)`: `−½(Σ⁻¹)″/(Σ⁻¹)′·y + b(Σ⁻¹(y))/(Σ⁻¹)′(y)`.
    pub fn transformed_drift(&self, y: f64) -> Result<f64> {
        let x = self.sigma_big_inv(y)?;
        let s = self.diffusion.eval(x);
        let ds = self.diffusion.derivative(x);
        let r = y.sqrt();
        // −½ y (σ′/√y − 1/(2y)) + b(x)√y/σ
        Ok(0.25 - 0.5 * ds * r + self.drift.eval(x) * r / s)
    }
}

/// Kind of model in a JSON model spec.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelKind {
    Cir,
    Cev,
    Custom,
}

/// JSON model specification shared by all commands.
///
/// `custom` means `dX = (a − bX + cX^β)dt + σ√X dW`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelSpec {
    #[serde(rename = "type")]
    pub kind: ModelKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub b: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sigma: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub x0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, rename = "M", skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
}

fn need(v: Option<f64>, field: &str) -> Result<f64> {
    match v {
        None => Err(Error::spec(field, "missing")),
        Some(x) if !x.is_finite() => Err(Error::spec(field, "must be finite")),
        Some(x) => Ok(x),
    }
}

fn positive(v: Option<f64>, field: &str) -> Result<f64> {
    let x = need(v, field)?;
    if x > 0.0 {
        Ok(x)
    } else {
        Err(Error::spec(field, format!("must be positive, got {x}")))
    }
}

impl ModelSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: ModelSpec = serde_json::from_str(text).map_err(|e| {
            let msg = e.to_string();
            let field = msg
                .split('`')
                .nth(1)
                .map(str::to_string)
                .unwrap_or_else(|| "<document>".into());
            Error::Spec { field, reason: msg }
        })?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<()> {
        match self.kind {
            ModelKind::Cir => self.to_cir().map(|_| ()),
            ModelKind::Cev => self.cev_fields().map(|_| ()),
            ModelKind::Custom => self.to_sde().map(|_| ()),
        }
    }

    pub fn horizon(&self) -> Result<f64> {
        positive(self.t, "t")
    }

    pub fn to_cir(&self) -> Result<CirParams> {
        if self.kind != ModelKind::Cir {
            return Err(Error::spec("type", "expected \"cir\""));
        }
        let a = need(self.a, "a")?;
        if a < 0.0 {
            return Err(Error::spec("a", format!("must be >= 0, got {a}")));
        }
        let b = need(self.b, "b")?;
        let sigma = positive(self.sigma, "sigma")?;
        let x0 = positive(self.x0, "x0")?;
        let t = positive(self.t, "t")?;
        CirParams::new(a, b, sigma, x0, t)
    }

    /// `(a, b, σ, v₀, p)` of a CEV model.
    pub fn cev_fields(&self) -> Result<(f64, f64, f64, f64, f64)> {
        if self.kind != ModelKind::Cev {
            return Err(Error::spec("type", "expected \"cev\""));
        }
        let a = need(self.a, "a")?;
        if a < 0.0 {
            return Err(Error::spec("a", format!("must be >= 0, got {a}")));
        }
        let b = positive(self.b, "b")?;
        let sigma = positive(self.sigma, "sigma")?;
        let x0 = positive(self.x0, "x0")?;
        let p = need(self.p, "p")?;
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::spec("p", format!("must lie in (0, 1), got {p}")));
        }
        positive(self.t, "t")?;
        Ok((a, b, sigma, x0, p))
    }

    /// Square-root SDE described by a `cir` or `custom` spec.
    pub fn to_sde(&self) -> Result<SdeSpec> {
        match self.kind {
            ModelKind::Cir => {
                let mut s = SdeSpec::from_cir(&self.to_cir()?);
                if let Some(m) = self.m {
                    s.m_threshold = positive(Some(m), "M")?;
                }
                Ok(s)
            }
            ModelKind::Custom => {
                let a = need(self.a, "a")?;
                let b = positive(self.b, "b")?;
                let sigma = self.sigma.unwrap_or(1.0);
                if !(sigma > 0.0) {
                    return Err(Error::spec("sigma", "must be positive"));
                }
                let x0 = positive(self.x0, "x0")?;
                positive(self.t, "t")?;
                let c = self.c.unwrap_or(0.0);
                let beta = self.beta.unwrap_or(0.0);
                if beta >= 1.0 {
                    return Err(Error::spec("beta", format!("must be below 1, got {beta}")));
                }
                let mut s = SdeSpec::power_drift(a, b, c, beta, x0);
                s.diffusion = Diffusion::SquareRoot { sigma };
                if let Some(m) = self.m {
                    s.m_threshold = positive(Some(m), "M")?;
                }
                Ok(s)
            }
            ModelKind::Cev => Err(Error::spec("type", "cev models are not square-root SDEs")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> CirParams {
        CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn critical_moment_examples() {
        assert!((critical_moment(1e-12, 1.0, 2.0).unwrap() - 1.0).abs() < 1e-11);
        let v = critical_moment(2f64.ln(), 2f64.sqrt(), 1.0).unwrap();
        assert!((v - 2.0 * 2f64.ln()).abs() < 1e-14);
        let v = critical_moment(1.0, 1.0, 1.0).unwrap();
        assert!((v - 2.0 / (1.0 - (-1f64).exp())).abs() < 1e-14);
        assert!(critical_moment(1.0, 0.0, 1.0).is_err());
        assert!(critical_moment(1.0, 1.0, -1.0).is_err());
    }

    #[test]
    fn critical_moment_is_continuous_across_series_switch() {
        let b: f64 = 0.99e-8;
        let series = critical_moment(b, 1.0, 1.0).unwrap();
        let direct = 2.0 * b / -(-b).exp_m1();
        assert!((series / direct - 1.0).abs() < 1e-15);
    }

    #[test]
    fn critical_moment_monotonicity() {
        let m1 = critical_moment(0.5, 1.0, 1.0).unwrap();
        let m2 = critical_moment(1.0, 1.0, 1.0).unwrap();
        assert!(m1 < m2);
        assert!(critical_moment(1.0, 1.0, 2.0).unwrap() < m2);
        assert!((critical_moment(1.0, 1.0, 60.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((inverse_critical_moment(1.0, 1.0, 1.0) * m2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn log_mgf_at_zero_and_explosion() {
        let p = reference();
        assert_eq!(cir_log_mgf(&p, 0.0).unwrap(), 0.0);
        match cir_log_mgf(&p, p.mu_star()) {
            Err(Error::Explosion { mu_star, .. }) => assert_eq!(mu_star, p.mu_star()),
            other => panic!("expected explosion, got {other:?}"),
        }
    }

    #[test]
    fn log_mgf_small_time_limit() {
        let p = CirParams::new(0.0, 1.0, 1.0, 0.5, 1e-9).unwrap();
        let v = cir_log_mgf(&p, 0.7).unwrap();
        assert!((v - 0.7 * 0.5).abs() < 1e-8);
    }

    #[test]
    fn log_mgf_reproduces_unit_sigma_display() {
        // Λ = X₀e^{−bt}μ*²/(μ*−μ) + 2a ln(μ*/(μ*−μ)) − X₀e^{−bt}μ* at σ = 1
        let p = reference();
        let m = p.mu_star();
        for &mu in &[0.1, 1.0, 2.0, 3.0, 3.15] {
            let e = (-p.b * p.t).exp();
            let display =
                p.x0 * e * m * m / (m - mu) + 2.0 * p.a * (m / (m - mu)).ln() - p.x0 * e * m;
            let v = cir_log_mgf(&p, mu).unwrap();
            assert!((v - display).abs() <= 1e-12 * display.abs(), "{mu}: {v} {display}");
        }
    }

    #[test]
    fn log_mgf_is_convex_increasing() {
        let p = reference();
        let m = p.mu_star();
        let vals: Vec<f64> = (0..200).map(|i| cir_log_mgf(&p, m * i as f64 / 200.0).unwrap()).collect();
        for w in vals.windows(3) {
            assert!(w[1] > w[0]);
            assert!(w[2] - 2.0 * w[1] + w[0] > 0.0);
        }
    }

    #[test]
    fn gap_derivatives_match_finite_differences() {
        let p = reference();
        let g = 0.3;
        let h = 1e-5;
        let d1 = (p.log_mgf_gap(g - h) - p.log_mgf_gap(g + h)) / (2.0 * h);
        assert!((d1 / p.log_mgf_d1_gap(g) - 1.0).abs() < 1e-8);
        let d2 = (p.log_mgf_d1_gap(g - h) - p.log_mgf_d1_gap(g + h)) / (2.0 * h);
        assert!((d2 / p.log_mgf_d2_gap(g) - 1.0).abs() < 1e-8);
        let x = 1234.5;
        assert!((p.log_mgf_d1_gap(p.gap_for_slope(x)) / x - 1.0).abs() < 1e-14);
    }

    #[test]
    fn exact_ccdf_limits() {
        let p = reference();
        assert_eq!(p.exact_ccdf(0.0).unwrap(), 1.0);
        let mut prev = 1.0;
        for i in 1..60 {
            let v = p.exact_ccdf(i as f64 * 0.5).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        assert!(prev < 1e-15);
        assert!(p.exact_log_ccdf(1e5).unwrap() < -3e5);
    }

    #[test]
    fn exact_ccdf_integrates_to_the_mean() {
        // E X = ∫₀^∞ P(X ≥ x) dx
        let p = reference();
        let q = quad::integrate(|x: f64| p.exact_ccdf(x).unwrap(), 0.0, 40.0, 1e-12, 0.0).unwrap();
        assert!((q.value - p.mean()).abs() < 1e-10, "{} {}", q.value, p.mean());
    }

    #[test]
    fn exact_log_mgf_from_law() {
        // E e^{μX} = 1 + μ ∫₀^∞ e^{μx} P(X ≥ x) dx
        let p = reference();
        let mu = 0.5 * p.mu_star();
        let q = quad::integrate(
            |x: f64| mu * (mu * x + p.exact_log_ccdf(x).unwrap()).exp(),
            0.0,
            200.0,
            1e-12,
            0.0,
        )
        .unwrap();
        let lhs = (1.0 + q.value).ln();
        assert!((lhs - cir_log_mgf(&p, mu).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn sigma_transform_square_root_is_identity() {
        let tr = sigma_transform(Diffusion::SquareRoot { sigma: 1.0 }, Drift::Affine { a: 0.4, b: 1.0 })
            .unwrap();
        for &x in &[0.1, 1.0, 7.0] {
            assert!((tr.sigma_big(x).unwrap() - x).abs() < 1e-14 * x);
            assert!((tr.transformed_drift(x).unwrap() - (0.4 - x)).abs() < 1e-13);
        }
    }

    #[test]
    fn sigma_transform_constant_diffusion() {
        let c = 0.7;
        let tr = sigma_transform(Diffusion::Constant { sigma: c }, Drift::Affine { a: 0.0, b: 1.0 }).unwrap();
        for &x in &[0.1, 1.0, 7.0] {
            assert!((tr.sigma_big(x).unwrap() - x * x / (4.0 * c * c)).abs() < 1e-13 * x * x);
        }
    }

    #[test]
    fn custom_diffusion_matches_power_form() {
        let (s, p) = (0.5, 0.75);
        let analytic =
            sigma_transform(Diffusion::Power { sigma: s, p }, Drift::Affine { a: 0.3, b: 1.0 }).unwrap();
        let numeric = sigma_transform(
            Diffusion::Custom(Arc::new(move |x: f64| s * x.powf(p))),
            Drift::Affine { a: 0.3, b: 1.0 },
        )
        .unwrap();
        for &x in &[0.01, 0.3, 1.0, 4.0, 50.0] {
            let a = analytic.sigma_big(x).unwrap();
            let n = numeric.sigma_big(x).unwrap();
            assert!((a / n - 1.0).abs() < 1e-10, "{x}: {a} {n}");
            let y = n;
            let back = numeric.sigma_big_inv(y).unwrap();
            assert!((back / x - 1.0).abs() < 1e-10);
            let lhs = numeric.diffusion.eval(x) * numeric.sigma_big_prime(x).unwrap();
            assert!((lhs / y.sqrt() - 1.0).abs() < 1e-10);
            let da = analytic.transformed_drift(y).unwrap();
            let dn = numeric.transformed_drift(y).unwrap();
            assert!((da - dn).abs() < 1e-7 * da.abs().max(1.0), "{x}: {da} {dn}");
        }
    }

    #[test]
    fn non_integrable_diffusion_is_rejected() {
        let r = sigma_transform(Diffusion::Custom(Arc::new(|x: f64| x * 1.5)), Drift::Affine { a: 0.0, b: 1.0 });
        assert!(matches!(r, Err(Error::Domain(_))));
        let r = sigma_transform(Diffusion::Power { sigma: 1.0, p: 1.0 }, Drift::Affine { a: 0.0, b: 1.0 });
        assert!(matches!(r, Err(Error::Domain(_))));
    }

    fn grid() -> Vec<f64> {
        (0..200).map(|i| 10f64.powf(1.0 + 5.0 * i as f64 / 199.0)).collect()
    }

    #[test]
    fn validate_affine_drift() {
        let spec = SdeSpec::power_drift(0.4, 1.0, 0.0, 0.0, 0.5);
        let r = validate_drift(&spec, &grid());
        assert!(r.pass, "{r:?}");
        assert_eq!(r.observed_class, Some(MonotoneClass::Decreasing));
        assert!(r.beta_fit.abs() < 1e-12);
        assert!((r.b_fit - 1.0).abs() < 1e-4);
    }

    #[test]
    fn validate_cube_root_perturbation() {
        let spec = SdeSpec::power_drift(0.0, 1.0, 1.0, 1.0 / 3.0, 0.5);
        let r = validate_drift(&spec, &grid());
        assert!(r.pass, "{r:?}");
        assert_eq!(r.observed_class, Some(MonotoneClass::Decreasing));
        assert!((r.beta_fit - 1.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn validate_flags_fast_negative_perturbation() {
        let spec = SdeSpec::power_drift(0.0, 1.0, -1.0, 2.0 / 3.0, 0.5);
        let r = validate_drift(&spec, &grid());
        assert!(!r.pass);
        assert_eq!(r.observed_class, Some(MonotoneClass::Increasing));
        assert!((r.beta_fit - 2.0 / 3.0).abs() < 1e-10);
    }

    #[test]
    fn model_spec_parses_and_names_bad_fields() {
        let s = ModelSpec::from_json(r#"{"type":"cir","a":0.4,"b":1,"sigma":1,"x0":0.5,"t":1}"#).unwrap();
        assert_eq!(s.to_cir().unwrap(), reference());
        match ModelSpec::from_json(r#"{"type":"cir","a":0.4,"b":1,"sigma":-1,"x0":0.5,"t":1}"#) {
            Err(Error::Spec { field, .. }) => assert_eq!(field, "sigma"),
            other => panic!("{other:?}"),
        }
        match ModelSpec::from_json(r#"{"type":"cir","a":0.4,"b":1,"sigma":1,"x0":0.5,"t":1,"q":2}"#) {
            Err(Error::Spec { field, .. }) => assert_eq!(field, "q"),
            other => panic!("{other:?}"),
        }
        match ModelSpec::from_json(r#"{"type":"cev","a":0.3,"b":1,"sigma":0.5,"x0":0.5,"t":1,"p":1.5}"#) {
            Err(Error::Spec { field, .. }) => assert_eq!(field, "p"),
            other => panic!("{other:?}"),
        }
    }
}
