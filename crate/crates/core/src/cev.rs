//! Mean-reverting CEV process `dV = (a − bV)dt + σV^p dW`, `p ∈ (0, 1)`.
//!
//! With `λ = 2(1 − p)` the power `U = V^λ` has an exploding MGF with the same
//! critical moment as a CIR process with rate `bλ` and volatility `σλ`. Near that
//! moment its log-MGF is approximated by the series `Δ̂(t, x)`, `x = 1/(μ* − μ)`,
//! built from the coefficients `ν_i` and the time integral `ω(τ)`.

use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::fixedpoint::{solve_gamma, FixedPointConfig, GammaSolution};
use crate::legendre::{build_legendre, LogMgf, SampledLogMgf};
use crate::models::{critical_moment, slope, SdeSpec};
use crate::quad;
use crate::tauberian::{ccdf_expansion, ccdf_expansion_with_alpha, Order, TailExpansion};

/// Largest supported series depth.
pub const MAX_TERMS: usize = 30;

/// Constants of the CEV process.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CevParams {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub v0: f64,
    pub p: f64,
    /// `λ = 2(1 − p)`.
    pub lambda: f64,
}

impl CevParams {
    pub fn new(a: f64, b: f64, sigma: f64, v0: f64, p: f64) -> Result<Self> {
        if !(a >= 0.0) || !a.is_finite() {
            return Err(Error::domain(format!("a must be >= 0, got {a}")));
        }
        for (name, v) in [("b", b), ("sigma", sigma), ("v0", v0)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::domain(format!("{name} must be positive, got {v}")));
            }
        }
        if !(p > 0.0 && p < 1.0) {
            return Err(Error::domain(format!("p must lie in (0, 1), got {p}")));
        }
        Ok(CevParams { a, b, sigma, v0, p, lambda: 2.0 * (1.0 - p) })
    }

    /// `θ = (2 − λ)/λ`; the `i`-th series term decays like `x^{1 − iθ}`.
    pub fn theta(&self) -> f64 {
        (2.0 - self.lambda) / self.lambda
    }

    /// Critical moment of `V_t^λ`.
    pub fn mu_star(&self, t: f64) -> Result<f64> {
        critical_moment(self.b * self.lambda, self.sigma * self.lambda, t)
    }

    /// Transformed time `τ = e^{b(λ−1)t}`.
    pub fn tau(&self, t: f64) -> f64 {
        (self.b * (self.lambda - 1.0) * t).exp()
    }

    /// `V^λ` scaled to unit volatility: `Y = V^λ/(σλ)²` solves
    /// `dY = ((λ−1)/(2λ) − bλY + cY^{(λ−1)/λ})dt + √Y dW` with `c = aλ(σλ)^{−2/λ}`.
    pub fn square_root_spec(&self) -> SdeSpec {
        let l = self.lambda;
        let s = self.sigma * l;
        SdeSpec::power_drift(
            (l - 1.0) / (2.0 * l),
            self.b * l,
            self.a * l * s.powf(-2.0 / l),
            (l - 1.0) / l,
            self.v0.powf(l) / (s * s),
        )
    }

    /// `(σλ)²`, the factor between `V^λ` and the unit-volatility state.
    pub fn scale(&self) -> f64 {
        (self.sigma * self.lambda).powi(2)
    }
}

/// Coefficients of the `Δ̂` series.
#[derive(Debug, Clone, Serialize)]
pub struct NuSeries {
    pub lambda: f64,
    /// `ν_1, …, ν_n`.
    pub nu: Vec<f64>,
    /// `C_1(λ), …, C_n(λ)`: binomial coefficients of `(λ−1)/λ`.
    pub c_k: Vec<f64>,
    /// `r_i = ν_i/(1 − iθ)`, computed without dividing (finite where `1 − iθ = 0`).
    pub ratio: Vec<f64>,
}

impl NuSeries {
    /// `Σ_{k=1}^i C_k Σ_{j_1+…+j_k=i} ν_{j_1}⋯ν_{j_k}` from the stored `ν_1..ν_i`.
    pub fn composition_sum(&self, i: usize) -> f64 {
        composition_sum(&self.nu[..i], &self.c_k)
    }
}

fn composition_sum(nu: &[f64], c_k: &[f64]) -> f64 {
    let i = nu.len();
    // power[d] = [z^d] P(z)^k with P(z) = Σ_j ν_j z^j, truncated at degree i
    let mut power = vec![0.0; i + 1];
    power[0] = 1.0;
    let mut total = 0.0;
    for ck in c_k.iter().take(i) {
        let mut next = vec![0.0; i + 1];
        for (d, &pd) in power.iter().enumerate() {
            if pd == 0.0 {
                continue;
            }
            for (j, &v) in nu.iter().enumerate() {
                let e = d + j + 1;
                if e > i {
                    break;
                }
                next[e] += pd * v;
            }
        }
        power = next;
        total += ck * power[i];
    }
    total
}

/// `ν_1 = 2(λ−1)/λ`, `ν_{i+1} = (ν_1/(i+1))(1 − (i+1)θ) Σ_k C_k Σ_{compositions} ν_{j_1}⋯ν_{j_k}`.
pub fn nu_coefficients(lambda: f64, n: usize) -> Result<NuSeries> {
    if !(lambda > 0.0 && lambda < 2.0) {
        return Err(Error::domain(format!("lambda must lie in (0, 2), got {lambda}")));
    }
    if n > MAX_TERMS {
        return Err(Error::Resource(format!("series depth {n} exceeds the supported {MAX_TERMS}")));
    }
    let beta = (lambda - 1.0) / lambda;
    let theta = (2.0 - lambda) / lambda;
    let mut c_k = Vec::with_capacity(n);
    let mut c = 1.0;
    for k in 1..=n {
        c *= (beta - (k as f64 - 1.0)) / k as f64;
        c_k.push(c);
    }
    let mut nu = Vec::with_capacity(n);
    let mut ratio = Vec::with_capacity(n);
    if n == 0 {
        return Ok(NuSeries { lambda, nu, c_k, ratio });
    }
    let nu1 = 2.0 * beta;
    nu.push(nu1);
    ratio.push(if lambda == 1.0 { 0.0 } else { 1.0 });
    for i in 1..n {
        let s = composition_sum(&nu, &c_k);
        ratio.push(nu1 / (i + 1) as f64 * s);
        nu.push(nu1 / (i + 1) as f64 * (1.0 - (i + 1) as f64 * theta) * s);
    }
    Ok(NuSeries { lambda, nu, c_k, ratio })
}

/// Deepest series supported by [`nu_coefficients_exact`].
pub const MAX_EXACT_TERMS: usize = 10;

/// `ν_1, …, ν_n` in exact rational arithmetic for `λ = num/den`.
///
/// Independent of [`nu_coefficients`]: the inner sum enumerates every integer
/// composition explicitly instead of convolving polynomial powers.
pub fn nu_coefficients_exact(num: i64, den: i64, n: usize) -> Result<Vec<BigRational>> {
    if den <= 0 || num <= 0 || num >= 2 * den {
        return Err(Error::domain(format!("lambda = {num}/{den} must lie in (0, 2)")));
    }
    if n > MAX_EXACT_TERMS {
        return Err(Error::Resource(format!("exact series depth {n} exceeds {MAX_EXACT_TERMS}")));
    }
    let r = |a: i64| BigRational::from_integer(BigInt::from(a));
    let lambda = BigRational::new(BigInt::from(num), BigInt::from(den));
    let beta = (lambda.clone() - r(1)) / lambda.clone();
    let theta = (r(2) - lambda.clone()) / lambda;
    // C_k = binom(β, k)
    let mut c_k = Vec::with_capacity(n);
    let mut c = BigRational::one();
    for k in 1..=n as i64 {
        c = c * (beta.clone() - r(k - 1)) / r(k);
        c_k.push(c.clone());
    }
    let mut nu: Vec<BigRational> = Vec::with_capacity(n);
    if n == 0 {
        return Ok(nu);
    }
    let nu1 = r(2) * beta;
    nu.push(nu1.clone());
    for i in 1..n {
        let mut s = BigRational::zero();
        for k in 1..=i {
            let mut inner = BigRational::zero();
            let mut parts = Vec::with_capacity(k);
            compositions(i, k, &mut parts, &mut |p: &[usize]| {
                inner += p.iter().fold(BigRational::one(), |acc, &j| acc * nu[j - 1].clone());
            });
            s += c_k[k - 1].clone() * inner;
        }
        let ip1 = r(i as i64 + 1);
        nu.push(nu1.clone() / ip1.clone() * (r(1) - ip1 * theta.clone()) * s);
    }
    Ok(nu)
}

/// Calls `f` on every composition of `total` into `k` positive parts.
fn compositions(total: usize, k: usize, parts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
    if k == 0 {
        if total == 0 {
            f(parts);
        }
        return;
    }
    for first in 1..=total.saturating_sub(k - 1) {
        parts.push(first);
        compositions(total - first, k - 1, parts, f);
        parts.pop();
    }
}

/// `ω(τ) = aλ/(b(λ−1)v₀) (2b/(σ²λ))^{(2−λ)/λ} ∫₁^τ (1 − s^{−λ/(λ−1)})^{(λ−2)/λ} ds`.
///
/// Only `λ > 1` gives an integrable endpoint; for `λ < 1` the integrand has a
/// non-integrable singularity at `s = 1` and a domain error is returned.
pub fn omega(params: &CevParams, tau: f64) -> Result<f64> {
    let l = params.lambda;
    if l == 1.0 {
        return Err(Error::domain("omega is undefined at lambda = 1 (p = 1/2)"));
    }
    if !(tau >= 1.0) {
        return Err(Error::domain(format!("tau must be >= 1, got {tau}")));
    }
    if params.a == 0.0 || tau == 1.0 {
        return Ok(0.0);
    }
    if l < 1.0 {
        return Err(Error::domain(format!(
            "omega diverges for lambda = {l} < 1: the integrand behaves like (s − 1)^{} at s = 1",
            (l - 2.0) / l
        )));
    }
    let e = (l - 2.0) / l;
    let pow = -l / (l - 1.0);
    let j = quad::integrate_algebraic_start(|s: f64| (1.0 - s.powf(pow)).powf(e), 1.0, tau, e, 1e-12)?.value;
    let pre = params.a * l / (params.b * (l - 1.0) * params.v0)
        * (2.0 * params.b / (params.sigma * params.sigma * l)).powf((2.0 - l) / l);
    Ok(pre * j)
}

/// One evaluation of `Δ̂(t, x)`.
#[derive(Debug, Clone, Serialize)]
pub struct DeltaHat {
    pub x: f64,
    pub value: f64,
    /// `v₀^λe^{−bλt}μ*²x + ((λ−1)/λ)ln(μ*x) − v₀^λe^{−bλt}μ*`.
    pub explicit: f64,
    pub series: f64,
    pub terms_kept: usize,
    /// Index and magnitude at `x` of the first omitted series term (magnitude
    /// unknown when `ω` is undefined).
    pub first_omitted: Option<(usize, Option<f64>)>,
    /// Validity threshold `ω_τ^{λ/(2−λ)}` (zero when no series term is kept).
    pub threshold: f64,
    /// The remainder is `O(x^{−error_order})`.
    pub error_order: f64,
}

/// `Λ̂(μ) = Δ̂(t, 1/(μ* − μ))` as a log-MGF source.
#[derive(Debug, Clone, Serialize)]
pub struct CevLogMgf {
    pub params: CevParams,
    pub t: f64,
    pub mu_star: f64,
    /// `v₀^λ e^{−bλt} μ*²`.
    pub k: f64,
    /// `(λ−1)/λ`.
    pub q: f64,
    /// `ω(τ)` when needed by the kept terms.
    pub omega: Option<f64>,
    /// `(v₀^λ r_i ω^i, 1 − iθ)` for the kept terms.
    pub terms: Vec<(f64, f64)>,
    /// `(index, coefficient, exponent)` of the first omitted term.
    omitted: Option<(usize, Option<f64>, f64)>,
    pub threshold: f64,
    /// `e^{−bλt}μ*`, so that the series variable is `w = e^{−bλt}μ*(μ*x − 1)`.
    w_scale: f64,
}

impl CevLogMgf {
    /// Keeps series terms while their exponent `1 − iθ` is positive, up to `n_terms`.
    pub fn new(params: &CevParams, t: f64, n_terms: usize) -> Result<Self> {
        Self::with_depth(params, t, n_terms, false)
    }

    /// With `keep_negative`, terms with nonpositive exponent are retained up to `n_terms`.
    pub fn with_depth(params: &CevParams, t: f64, n_terms: usize, keep_negative: bool) -> Result<Self> {
        let l = params.lambda;
        if l == 1.0 && params.a > 0.0 {
            return Err(Error::domain(
                "p = 1/2 with a > 0 is the CIR process; use the CIR routines (the series is undefined at lambda = 1)",
            ));
        }
        let mu_star = params.mu_star(t)?;
        let decay = (-params.b * l * t).exp();
        let vl = params.v0.powf(l);
        let k = vl * decay * mu_star * mu_star;
        let q = (l - 1.0) / l;
        let theta = params.theta();
        let n_all = (n_terms + 1).min(MAX_TERMS);
        let series = nu_coefficients(l, n_all)?;
        let kept = (1..=n_terms.min(MAX_TERMS))
            .take_while(|&i| keep_negative || 1.0 - i as f64 * theta > 0.0)
            .count();
        let needs_omega = params.a > 0.0 && l != 1.0;
        let omega_val = if needs_omega && kept > 0 { Some(omega(params, params.tau(t))?) } else { None };
        let omega_any = if needs_omega { omega_val.or_else(|| omega(params, params.tau(t)).ok()) } else { Some(0.0) };
        let mut terms = Vec::with_capacity(kept);
        for i in 1..=kept {
            let w = omega_val.unwrap_or(0.0);
            terms.push((vl * series.ratio[i - 1] * w.powi(i as i32), 1.0 - i as f64 * theta));
        }
        let omitted = if kept < series.ratio.len() {
            let i = kept + 1;
            let coef = omega_any.map(|w| vl * series.ratio[i - 1] * w.powi(i as i32));
            Some((i, coef, 1.0 - i as f64 * theta))
        } else {
            None
        };
        let threshold = match omega_val {
            Some(w) if w > 0.0 => w.powf(l / (2.0 - l)),
            _ => 0.0,
        };
        Ok(CevLogMgf {
            params: *params,
            t,
            mu_star,
            k,
            q,
            omega: omega_val,
            terms,
            omitted,
            threshold,
            w_scale: decay * mu_star,
        })
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x > self.threshold) || !(self.mu_star * x > 1.0) {
            return Err(Error::domain(format!(
                "x = {x} is outside the validity region: need x > {} and x > 1/mu* = {}",
                self.threshold,
                1.0 / self.mu_star
            )));
        }
        Ok(())
    }

    fn w(&self, x: f64) -> f64 {
        self.w_scale * (self.mu_star * x - 1.0)
    }

    fn explicit(&self, x: f64) -> f64 {
        self.k * x + self.q * (self.mu_star * x).ln() - self.k / self.mu_star
    }

    fn series(&self, x: f64) -> f64 {
        let w = self.w(x);
        self.terms.iter().map(|&(c, e)| c * w.powf(e)).sum()
    }

    /// `Δ̂(t, x)` with diagnostics.
    pub fn evaluate(&self, x: f64) -> Result<DeltaHat> {
        self.check_x(x)?;
        let explicit = self.explicit(x);
        let series = self.series(x);
        let w = self.w(x);
        Ok(DeltaHat {
            x,
            value: explicit + series,
            explicit,
            series,
            terms_kept: self.terms.len(),
            first_omitted: self.omitted.map(|(i, c, e)| (i, c.map(|c| (c * w.powf(e)).abs()))),
            threshold: self.threshold,
            error_order: self.params.theta(),
        })
    }

    /// `dΔ̂/dx` and `d²Δ̂/dx²`.
    fn dx(&self, x: f64) -> (f64, f64) {
        let w = self.w(x);
        let dw = self.w_scale * self.mu_star;
        let mut f1 = self.k + self.q / x;
        let mut f2 = -self.q / (x * x);
        for &(c, e) in &self.terms {
            f1 += c * e * w.powf(e - 1.0) * dw;
            f2 += c * e * (e - 1.0) * w.powf(e - 2.0) * dw * dw;
        }
        (f1, f2)
    }
}

impl LogMgf for CevLogMgf {
    fn mu_star(&self) -> f64 {
        self.mu_star
    }
    fn value_gap(&self, gap: f64) -> f64 {
        let x = 1.0 / gap;
        self.explicit(x) + self.series(x)
    }
    fn d1_gap(&self, gap: f64) -> f64 {
        let x = 1.0 / gap;
        self.dx(x).0 * x * x
    }
    fn d2_gap(&self, gap: f64) -> f64 {
        let x = 1.0 / gap;
        let (f1, f2) = self.dx(x);
        f2 * x.powi(4) + 2.0 * x.powi(3) * f1
    }
    fn max_gap(&self) -> f64 {
        if self.terms.is_empty() {
            self.mu_star
        } else {
            1.0 / (self.threshold * (1.0 + 1e-9)).max(2.0 / self.mu_star)
        }
    }
    fn alpha(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `Δ̂(t, x)` at `x = 1/(μ*_t − μ)` with the default truncation.
pub fn cev_log_mgf_asym(params: &CevParams, t: f64, x: f64, n_terms: usize) -> Result<DeltaHat> {
    CevLogMgf::new(params, t, n_terms)?.evaluate(x)
}

/// CCDF expansion of `V_t^λ`.
#[derive(Debug, Clone, Serialize)]
pub struct CevTail {
    pub lambda: f64,
    pub expansion: TailExpansion,
    /// Equivalent levels `x^{1/λ}` for `V_t`.
    pub v_levels: Vec<f64>,
}

/// `P(V_t^λ ≥ x)` from the conjugate of `Λ̂`.
pub fn cev_ccdf(params: &CevParams, t: f64, xs: &[f64], order: Order, n_terms: usize) -> Result<CevTail> {
    if xs.is_empty() {
        return Err(Error::domain("no evaluation levels"));
    }
    let src = Arc::new(CevLogMgf::new(params, t, n_terms)?);
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let data = build_legendre(src.clone(), (lo, hi))?;
    for &x in xs {
        let g = data.gap(x)?;
        if !(src.d2_gap(g) > 0.0) {
            return Err(Error::numeric(format!("the log-MGF approximation is not convex at the tilt for x = {x}")));
        }
    }
    let expansion = ccdf_expansion(&data, xs, order)?;
    Ok(CevTail {
        lambda: params.lambda,
        expansion,
        v_levels: xs.iter().map(|x| x.powf(1.0 / params.lambda)).collect(),
    })
}

/// Log-MGF of `V_t^λ` sampled from the fixed-point solution for the
/// unit-volatility state, interpolated in the gap `μ* − μ`.
///
/// Unlike `Δ̂`, this keeps every `O(1)` contribution of the drift.
pub fn fixed_point_log_mgf(
    params: &CevParams,
    t: f64,
    config: &FixedPointConfig,
) -> Result<(SampledLogMgf, GammaSolution)> {
    let spec = params.square_root_spec();
    let mut cfg = config.clone();
    cfg.t_max = t;
    let sol = solve_gamma(&spec, &cfg)?;
    let last = sol.grid.t_nodes.len() - 1;
    let xi = sol.grid.xi[last];
    let mu_y = critical_moment(spec.b_limit, 1.0, t)?;
    let mu_star = params.mu_star(t)?;
    let scale = params.scale();
    let mut samples = vec![(mu_star, 0.0)];
    for (j, &xg) in sol.grid.x_nodes.iter().enumerate() {
        let gap = 1.0 / (scale * xi * (xg + mu_y));
        if gap < mu_star {
            samples.push((gap, sol.gamma_at(last, j)));
        }
    }
    let src = SampledLogMgf::new(mu_star, &samples)?.with_alpha(Some(1.0));
    Ok((src, sol))
}

/// `P(V_t^λ ≥ x)` from the conjugate of the fixed-point log-MGF.
pub fn cev_ccdf_fixed_point(
    params: &CevParams,
    t: f64,
    xs: &[f64],
    order: Order,
    config: &FixedPointConfig,
) -> Result<CevTail> {
    if xs.is_empty() {
        return Err(Error::domain("no evaluation levels"));
    }
    let (src, _) = fixed_point_log_mgf(params, t, config)?;
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let data = build_legendre(Arc::new(src), (lo, hi))?;
    let expansion = ccdf_expansion_with_alpha(&data, xs, order, Some(1.0))?;
    Ok(CevTail {
        lambda: params.lambda,
        expansion,
        v_levels: xs.iter().map(|x| x.powf(1.0 / params.lambda)).collect(),
    })
}

/// One grid point of the series vs fixed-point comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ComparisonPoint {
    /// `1/(μ*_t − μ)` for `V^λ`.
    pub x_delta: f64,
    /// Fixed-point grid abscissa of the same tilt.
    pub x_gamma: f64,
    pub delta_hat: f64,
    pub gamma: f64,
    pub diff: f64,
}

/// Decay of `Δ̂ − Γ` against the fixed-point log-MGF.
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointComparison {
    pub points: Vec<ComparisonPoint>,
    /// Log-log slope of `|Δ̂ − Γ|` over the fitted points.
    pub slope: f64,
    /// `−(2 − λ)/λ`.
    pub expected_slope: f64,
    /// `(x_lo, x_hi)` of the fit, in `x_delta` units.
    pub fit_range: (f64, f64),
    /// Limit of `Δ̂ − Γ` estimated from the last grid point, and the slope of
    /// `|Δ̂ − Γ − limit|` (a diagnostic for a constant offset).
    pub offset: f64,
    pub slope_after_offset: f64,
    pub m_threshold: f64,
    pub iterations: usize,
    pub contraction: Option<f64>,
}

/// Solves the fixed point for `Y = V^λ/(σλ)²` and compares `Γ` with `Δ̂` on the
/// final time slice. The fit uses grid points whose `x_gamma` lies in the top
/// `fit_decades` decades of the grid.
pub fn compare_with_fixed_point(
    params: &CevParams,
    t: f64,
    n_terms: usize,
    config: &FixedPointConfig,
    fit_decades: f64,
) -> Result<FixedPointComparison> {
    let src = CevLogMgf::new(params, t, n_terms)?;
    let spec = params.square_root_spec();
    let mut cfg = config.clone();
    cfg.t_max = t;
    let sol = solve_gamma(&spec, &cfg)?;
    let last = sol.grid.t_nodes.len() - 1;
    let xi = sol.grid.xi[last];
    let mu_y = critical_moment(spec.b_limit, 1.0, t)?;
    let scale = params.scale();
    let mut points = Vec::new();
    for (j, &xg) in sol.grid.x_nodes.iter().enumerate() {
        let xd = scale * xi * (xg + mu_y);
        let Ok(d) = src.evaluate(xd) else { continue };
        let g = sol.gamma_at(last, j);
        points.push(ComparisonPoint { x_delta: xd, x_gamma: xg, delta_hat: d.value, gamma: g, diff: d.value - g });
    }
    if points.len() < 4 {
        return Err(Error::numeric("too few grid points inside the validity region"));
    }
    let x_top = points.last().map(|p| p.x_gamma).unwrap_or(0.0);
    let cut = x_top / 10f64.powf(fit_decades);
    let fit: Vec<&ComparisonPoint> = points.iter().filter(|p| p.x_gamma >= cut).collect();
    let pts: Vec<(f64, f64)> = fit.iter().map(|p| (p.x_delta.ln(), p.diff.abs().ln())).collect();
    let offset = points.last().map(|p| p.diff).unwrap_or(0.0);
    // the offset diagnostic uses the lower part of the range, away from the point defining the limit
    let pts_off: Vec<(f64, f64)> = points
        .iter()
        .filter(|p| p.x_gamma < cut)
        .map(|p| (p.x_delta.ln(), (p.diff - offset).abs().ln()))
        .filter(|p| p.1.is_finite())
        .collect();
    Ok(FixedPointComparison {
        slope: slope(&pts),
        expected_slope: -params.theta(),
        fit_range: (fit[0].x_delta, fit[fit.len() - 1].x_delta),
        offset,
        slope_after_offset: if pts_off.len() >= 3 { slope(&pts_off) } else { f64::NAN },
        m_threshold: sol.m_threshold,
        iterations: sol.iterations,
        contraction: sol.contraction,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{cir_log_mgf, CirParams};

    #[test]
    fn nu_hand_values() {
        let s = nu_coefficients(1.5, 5).unwrap();
        assert!((s.nu[0] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s.nu[1] - 2.0 / 81.0).abs() < 1e-15);
        let s = nu_coefficients(4.0 / 3.0, 5).unwrap();
        assert!(s.nu[1].abs() < 1e-15);
        assert!(nu_coefficients(1.0, 8).unwrap().nu.iter().all(|&v| v == 0.0));
        assert!(matches!(nu_coefficients(1.5, 31), Err(Error::Resource(_))));
    }

    #[test]
    fn exact_nu_hand_values() {
        let nu = nu_coefficients_exact(3, 2, 4).unwrap();
        assert_eq!(nu[0], BigRational::new(2.into(), 3.into()));
        assert_eq!(nu[1], BigRational::new(2.into(), 81.into()));
        assert!(nu_coefficients_exact(4, 3, 3).unwrap()[1].is_zero());
        assert!(matches!(nu_coefficients_exact(3, 2, 11), Err(Error::Resource(_))));
    }

    #[test]
    fn recursion_is_self_consistent() {
        let s = nu_coefficients(1.5, 12).unwrap();
        let theta = 1.0 / 3.0;
        for i in 1..12 {
            let again = s.nu[0] / (i + 1) as f64 * (1.0 - (i + 1) as f64 * theta) * s.composition_sum(i);
            assert_eq!(again, s.nu[i]);
        }
    }

    #[test]
    fn omega_trivial_and_divergent() {
        let p = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.25).unwrap();
        assert_eq!(omega(&p, 1.0).unwrap(), 0.0);
        let p0 = CevParams::new(0.0, 1.0, 0.5, 0.5, 0.25).unwrap();
        assert_eq!(omega(&p0, 3.0).unwrap(), 0.0);
        let p2 = CevParams::new(0.6, 1.0, 0.5, 0.5, 0.25).unwrap();
        assert!((omega(&p2, 3.0).unwrap() / omega(&p, 3.0).unwrap() - 2.0).abs() < 1e-10);
        let half = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.75).unwrap();
        assert!(matches!(omega(&half, 2.0), Err(Error::Domain(_))));
    }

    #[test]
    fn a_zero_p_half_is_cir() {
        let p = CevParams::new(0.0, 1.0, 0.5, 0.5, 0.5).unwrap();
        let cir = CirParams::new(0.0, 1.0, 0.5, 0.5, 1.0).unwrap();
        for &x in &[10.0, 100.0, 1e4] {
            let d = cev_log_mgf_asym(&p, 1.0, x, 5).unwrap();
            let exact = cir_log_mgf(&cir, cir.mu_star() - 1.0 / x).unwrap();
            assert!((d.value / exact - 1.0).abs() < 1e-11, "{x}: {} {exact}", d.value);
        }
        let ap = CevParams::new(0.2, 1.0, 0.5, 0.5, 0.5).unwrap();
        assert!(cev_log_mgf_asym(&ap, 1.0, 10.0, 5).is_err());
    }

    #[test]
    fn leading_coefficient_ignores_a() {
        let p1 = CevParams::new(0.1, 1.0, 0.5, 0.5, 0.25).unwrap();
        let p2 = CevParams { a: 0.4, ..p1 };
        let s1 = CevLogMgf::new(&p1, 1.0, 5).unwrap();
        let s2 = CevLogMgf::new(&p2, 1.0, 5).unwrap();
        assert_eq!(s1.k, s2.k);
        // the a-dependence is o(x)
        let rel = |x: f64| (s2.evaluate(x).unwrap().value - s1.evaluate(x).unwrap().value).abs() / (s1.k * x);
        assert!(rel(1e9) < rel(1e6) / 5.0 && rel(1e12) < rel(1e9) / 5.0);
    }

    #[test]
    fn analytic_derivatives_match_differences() {
        let p = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.25).unwrap();
        let s = CevLogMgf::new(&p, 1.0, 5).unwrap();
        assert!(!s.terms.is_empty());
        let g = 1e-3;
        let h = 1e-7;
        let fd1 = (s.value_gap(g - h) - s.value_gap(g + h)) / (2.0 * h);
        assert!((fd1 / s.d1_gap(g) - 1.0).abs() < 1e-6);
        let fd2 = (s.d1_gap(g - h) - s.d1_gap(g + h)) / (2.0 * h);
        assert!((fd2 / s.d2_gap(g) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ccdf_is_monotone() {
        let p = CevParams::new(0.3, 1.0, 0.5, 0.5, 0.75).unwrap();
        let xs: Vec<f64> = (1..30).map(|i| 0.5 * i as f64).collect();
        let tail = cev_ccdf(&p, 1.0, &xs, Order::Refined, 5).unwrap();
        assert!(tail.expansion.is_monotone_on_reliable());
        assert!(tail.expansion.points.iter().all(|p| (0.0..=1.0).contains(&p.estimate)));
    }
}
