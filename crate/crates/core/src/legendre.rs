//! Fenchel–Legendre conjugate of a log-MGF: `Λ*(x) = sup_μ (μx − Λ(μ))`, the
//! optimal tilt `p*(x)` and its derivative `p*′(x) = 1/Λ″(p*(x))`.
//!
//! Everything is parametrised by the gap `μ* − μ` so that values close to the
//! critical moment never suffer from cancellation.

use std::sync::Arc;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::CirParams;

/// Exact form `Λ(μ) = k/(μ* − μ) + offset`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PoleForm {
    pub k: f64,
    pub offset: f64,
}

/// Envelope `c₁/(μ*−μ)^{α₁} ≤ Λ(μ) ≤ c₂/(μ*−μ)^{α₂}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Envelope {
    pub alpha1: f64,
    pub alpha2: f64,
    pub c1: f64,
    pub c2: f64,
}

impl Envelope {
    /// `c̃₂ = (c₂α₂)^{1/(1+α₂)}(1+α₂)/α₂`.
    pub fn c2_tilde(&self) -> f64 {
        (self.c2 * self.alpha2).powf(1.0 / (1.0 + self.alpha2)) * (1.0 + self.alpha2) / self.alpha2
    }

    /// `α₂(1 + 1/(1+α₂)) < 2α₁`.
    pub fn exponents_admissible(&self) -> bool {
        self.alpha2 * (1.0 + 1.0 / (1.0 + self.alpha2)) < 2.0 * self.alpha1
    }
}

/// A log-MGF with a finite critical moment, evaluated through the gap `g = μ* − μ`.
pub trait LogMgf: Send + Sync {
    fn mu_star(&self) -> f64;

    /// `Λ(μ* − g)`.
    fn value_gap(&self, gap: f64) -> f64;

    /// `Λ′(μ* − g)` (derivative in μ). Richardson-extrapolated differences by default.
    fn d1_gap(&self, gap: f64) -> f64 {
        let h = 1e-3 * gap;
        let d = |h: f64| (self.value_gap(gap - h) - self.value_gap(gap + h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    /// `Λ″(μ* − g)`.
    fn d2_gap(&self, gap: f64) -> f64 {
        let h = 1e-3 * gap;
        let d = |h: f64| (self.d1_gap(gap - h) - self.d1_gap(gap + h)) / (2.0 * h);
        (4.0 * d(h / 2.0) - d(h)) / 3.0
    }

    /// Smallest gap at which the source is defined.
    fn min_gap(&self) -> f64 {
        0.0
    }

    /// Largest gap at which the source is defined (`μ*`, i.e. `μ = 0`, by default).
    fn max_gap(&self) -> f64 {
        self.mu_star()
    }

    /// Analytic solution of `Λ′(μ* − g) = x`, if known.
    fn gap_for_slope(&self, _x: f64) -> Option<f64> {
        None
    }

    fn pole_form(&self) -> Option<PoleForm> {
        None
    }

    fn envelope(&self) -> Option<Envelope> {
        None
    }

    /// Regular-variation index of `x ↦ Λ(μ* − 1/x)`, if known analytically.
    fn alpha(&self) -> Option<f64> {
        None
    }

    fn value(&self, mu: f64) -> f64 {
        self.value_gap(self.mu_star() - mu)
    }
}

impl LogMgf for CirParams {
    fn mu_star(&self) -> f64 {
        CirParams::mu_star(self)
    }
    fn value_gap(&self, gap: f64) -> f64 {
        self.log_mgf_gap(gap)
    }
    fn d1_gap(&self, gap: f64) -> f64 {
        self.log_mgf_d1_gap(gap)
    }
    fn d2_gap(&self, gap: f64) -> f64 {
        self.log_mgf_d2_gap(gap)
    }
    fn gap_for_slope(&self, x: f64) -> Option<f64> {
        Some(CirParams::gap_for_slope(self, x))
    }
    fn pole_form(&self) -> Option<PoleForm> {
        if self.a == 0.0 {
            let k = self.pole_strength();
            Some(PoleForm { k, offset: -k / CirParams::mu_star(self) })
        } else {
            None
        }
    }
    fn alpha(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// `Λ(p) = p²/2` capped at a large `μ*`; its conjugate is `x²/2`.
#[derive(Debug, Clone, Copy)]
pub struct GaussianSurrogate {
    pub cap: f64,
}

impl LogMgf for GaussianSurrogate {
    fn mu_star(&self) -> f64 {
        self.cap
    }
    fn value_gap(&self, gap: f64) -> f64 {
        let p = self.cap - gap;
        0.5 * p * p
    }
    fn d1_gap(&self, gap: f64) -> f64 {
        self.cap - gap
    }
    fn d2_gap(&self, _gap: f64) -> f64 {
        1.0
    }
    fn gap_for_slope(&self, x: f64) -> Option<f64> {
        Some(self.cap - x)
    }
}

/// `Λ(μ) = k/(μ* − μ) + offset`.
#[derive(Debug, Clone, Copy)]
pub struct PoleLogMgf {
    pub mu_star: f64,
    pub k: f64,
    pub offset: f64,
}

impl LogMgf for PoleLogMgf {
    fn mu_star(&self) -> f64 {
        self.mu_star
    }
    fn value_gap(&self, gap: f64) -> f64 {
        self.k / gap + self.offset
    }
    fn d1_gap(&self, gap: f64) -> f64 {
        self.k / (gap * gap)
    }
    fn d2_gap(&self, gap: f64) -> f64 {
        2.0 * self.k / (gap * gap * gap)
    }
    fn gap_for_slope(&self, x: f64) -> Option<f64> {
        Some((self.k / x).sqrt())
    }
    fn pole_form(&self) -> Option<PoleForm> {
        Some(PoleForm { k: self.k, offset: self.offset })
    }
    fn alpha(&self) -> Option<f64> {
        Some(1.0)
    }
}

/// Quadratic piece `z + s(τ − τ₀) + c(τ − τ₀)²` in the variable `τ = −gap`.
#[derive(Debug, Clone, Copy)]
struct Piece {
    tau0: f64,
    z: f64,
    s: f64,
    c: f64,
}

/// Log-MGF known only through samples, interpolated by a shape-preserving
/// (Schumaker) C¹ quadratic spline.
///
/// Convex data give a convex interpolant; `Λ″` is piecewise constant.
#[derive(Debug, Clone)]
pub struct SampledLogMgf {
    mu_star: f64,
    /// Breakpoints in `τ = −gap`, ascending.
    breaks: Vec<f64>,
    pieces: Vec<Piece>,
    alpha: Option<f64>,
}

impl SampledLogMgf {
    /// Builds the interpolant from `(gap, Λ)` samples (any order).
    pub fn new(mu_star: f64, samples: &[(f64, f64)]) -> Result<Self> {
        if samples.len() < 3 {
            return Err(Error::domain("need at least three samples"));
        }
        let mut pts: Vec<(f64, f64)> = samples.iter().map(|&(g, v)| (-g, v)).collect();
        pts.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        for w in pts.windows(2) {
            if w[1].0 <= w[0].0 {
                return Err(Error::domain("sample gaps must be distinct"));
            }
        }
        if pts.iter().any(|p| -p.0 <= 0.0 || -p.0 > mu_star || !p.1.is_finite()) {
            return Err(Error::domain("sample gaps must lie in (0, mu*] with finite values"));
        }
        let n = pts.len();
        let delta: Vec<f64> = pts.windows(2).map(|w| (w[1].1 - w[0].1) / (w[1].0 - w[0].0)).collect();
        for w in delta.windows(2) {
            if w[1] < w[0] - 1e-12 * w[1].abs() {
                return Err(Error::domain("samples are not convex"));
            }
        }
        let len: Vec<f64> = pts.windows(2).map(|w| w[1].0 - w[0].0).collect();
        let mut s = vec![0.0; n];
        for i in 1..n - 1 {
            s[i] = (len[i] * delta[i - 1] + len[i - 1] * delta[i]) / (len[i - 1] + len[i]);
        }
        s[0] = ((3.0 * delta[0] - s[1]) / 2.0).min(delta[0]);
        s[n - 1] = ((3.0 * delta[n - 2] - s[n - 2]) / 2.0).max(delta[n - 2]);

        let mut breaks = Vec::new();
        let mut pieces = Vec::new();
        for i in 0..n - 1 {
            let (t0, z0) = pts[i];
            let (t1, z1) = pts[i + 1];
            let h = t1 - t0;
            let d = delta[i];
            let (si, sj) = (s[i], s[i + 1]);
            if ((si + sj) / 2.0 - d).abs() <= 1e-15 * d.abs().max(1e-300) {
                breaks.push(t0);
                pieces.push(Piece { tau0: t0, z: z0, s: si, c: (sj - si) / (2.0 * h) });
                continue;
            }
            let xi = if (si - d) * (sj - d) >= 0.0 {
                0.5 * (t0 + t1)
            } else if (sj - d).abs() < (si - d).abs() {
                t0 + h * (sj - d) / (sj - si)
            } else {
                t1 + h * (si - d) / (sj - si)
            };
            let a = xi - t0;
            let b = t1 - xi;
            let sbar = (2.0 * (z1 - z0) - (a * si + b * sj)) / h;
            breaks.push(t0);
            pieces.push(Piece { tau0: t0, z: z0, s: si, c: (sbar - si) / (2.0 * a) });
            breaks.push(xi);
            pieces.push(Piece { tau0: xi, z: z0 + a * (si + sbar) / 2.0, s: sbar, c: (sj - sbar) / (2.0 * b) });
        }
        breaks.push(pts[n - 1].0);
        Ok(SampledLogMgf { mu_star, breaks, pieces, alpha: None })
    }

    /// Samples `source` on gaps `μ*·r^i`, `i = 0..n`, and interpolates.
    pub fn from_source(source: &dyn LogMgf, n: usize, ratio: f64) -> Result<Self> {
        let m = source.mu_star();
        let samples: Vec<(f64, f64)> = (0..n)
            .map(|i| {
                let g = m * ratio.powi(i as i32);
                (g, source.value_gap(g))
            })
            .collect();
        let mut s = Self::new(m, &samples)?;
        s.alpha = source.alpha();
        Ok(s)
    }

    /// Overrides the regular-variation index reported through [`LogMgf::alpha`].
    pub fn with_alpha(mut self, alpha: Option<f64>) -> Self {
        self.alpha = alpha;
        self
    }

    fn piece(&self, gap: f64) -> &Piece {
        let tau = -gap;
        let idx = self.breaks[..self.pieces.len()].partition_point(|&b| b <= tau);
        &self.pieces[idx.saturating_sub(1).min(self.pieces.len() - 1)]
    }
}

impl LogMgf for SampledLogMgf {
    fn mu_star(&self) -> f64 {
        self.mu_star
    }
    fn value_gap(&self, gap: f64) -> f64 {
        let p = self.piece(gap);
        let d = -gap - p.tau0;
        p.z + p.s * d + p.c * d * d
    }
    fn d1_gap(&self, gap: f64) -> f64 {
        let p = self.piece(gap);
        p.s + 2.0 * p.c * (-gap - p.tau0)
    }
    fn d2_gap(&self, gap: f64) -> f64 {
        2.0 * self.piece(gap).c
    }
    fn min_gap(&self) -> f64 {
        -self.breaks[self.breaks.len() - 1]
    }
    fn alpha(&self) -> Option<f64> {
        self.alpha
    }
}

/// One evaluated point of the conjugate.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ConjugatePoint {
    pub x: f64,
    /// `μ* − p*(x)`.
    pub gap: f64,
    pub p_star: f64,
    pub p_star_prime: f64,
    pub lambda_star: f64,
}

/// Conjugate toolkit built on a log-MGF.
#[derive(Clone)]
pub struct LegendreData {
    source: Arc<dyn LogMgf>,
    /// `Λ′(0)`: smallest `x` with a bracketed tilt root.
    pub x_min: f64,
    /// Largest `x` with a bracketed root (finite only for sampled sources).
    pub x_max: f64,
    closed_form: Option<PoleForm>,
}

impl std::fmt::Debug for LegendreData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LegendreData")
            .field("mu_star", &self.mu_star())
            .field("x_min", &self.x_min)
            .field("x_max", &self.x_max)
            .field("closed_form", &self.closed_form)
            .finish()
    }
}

/// Builds the conjugate of `source`, checking that `x_range` lies in the image of `Λ′`.
pub fn build_legendre(source: Arc<dyn LogMgf>, x_range: (f64, f64)) -> Result<LegendreData> {
    let m = source.mu_star();
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::domain(format!("critical moment must be positive and finite, got {m}")));
    }
    let x_min = source.d1_gap(source.max_gap().min(m));
    let x_max = if source.min_gap() > 0.0 { source.d1_gap(source.min_gap()) } else { f64::INFINITY };
    let (lo, hi) = x_range;
    if !(lo >= x_min) || !(hi <= x_max) || lo > hi {
        return Err(Error::domain(format!(
            "requested x range [{lo}, {hi}] is outside the image of the log-MGF slope [{x_min}, {x_max}]"
        )));
    }
    let closed_form = source.pole_form();
    Ok(LegendreData { source, x_min, x_max, closed_form })
}

impl LegendreData {
    pub fn source(&self) -> &dyn LogMgf {
        self.source.as_ref()
    }

    pub fn source_arc(&self) -> Arc<dyn LogMgf> {
        self.source.clone()
    }

    pub fn mu_star(&self) -> f64 {
        self.source.mu_star()
    }

    pub fn has_closed_form(&self) -> bool {
        self.closed_form.is_some()
    }

    fn check_x(&self, x: f64) -> Result<()> {
        if !(x >= self.x_min && x <= self.x_max) {
            return Err(Error::domain(format!(
                "x = {x} is outside the valid range [{}, {}]",
                self.x_min, self.x_max
            )));
        }
        Ok(())
    }

    /// `μ* − p*(x)`.
    pub fn gap(&self, x: f64) -> Result<f64> {
        self.check_x(x)?;
        if let Some(pf) = self.closed_form {
            return Ok((pf.k / x).sqrt());
        }
        self.solve_gap(x, false)
    }

    /// Root of `Λ′(μ* − g) = x` by safeguarded Newton in `ln g`; `numeric_only`
    /// ignores analytic inverses (used to cross-check the closed-form path).
    pub fn solve_gap(&self, x: f64, numeric_only: bool) -> Result<f64> {
        self.check_x(x)?;
        let src = self.source.as_ref();
        let m = src.mu_star();
        let f = |g: f64| src.d1_gap(g) - x;
        let top = src.max_gap().min(m);
        if x == self.x_min {
            return Ok(top);
        }
        if !numeric_only {
            if let Some(g) = src.gap_for_slope(x) {
                if g > 0.0 && g.is_finite() {
                    // polish the analytic root once
                    let r = f(g);
                    let d2 = src.d2_gap(g);
                    let g2 = g + r / d2;
                    return Ok(if g2 > 0.0 && (g2 - g).abs() < 1e-6 * g { g2 } else { g });
                }
            }
        }
        let floor = src.min_gap();
        let mut hi = top;
        let mut lo = top;
        let mut guard = 0;
        loop {
            lo *= 0.5;
            if lo <= floor {
                lo = floor;
                if f(lo) < 0.0 {
                    return Err(Error::domain(format!("x = {x} is above the sampled range")));
                }
                break;
            }
            if f(lo) >= 0.0 {
                break;
            }
            hi = lo;
            guard += 1;
            if guard > 2100 {
                return Err(Error::numeric(format!("tilt root for x = {x} not bracketed")));
            }
        }
        if lo == floor && floor == 0.0 {
            return Err(Error::numeric(format!("tilt root for x = {x} not bracketed")));
        }
        let mut g = (lo * hi).sqrt();
        let mut converged = 0;
        for _ in 0..300 {
            let r = f(g);
            if r == 0.0 {
                return Ok(g);
            }
            if r > 0.0 {
                lo = lo.max(g);
            } else {
                hi = hi.min(g);
            }
            let d2 = src.d2_gap(g);
            let mut next = g * (r / (d2 * g)).exp();
            if !(next > lo && next < hi) || !next.is_finite() {
                next = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
            }
            let rel = ((next - g) / g).abs();
            g = next;
            if rel <= 1e-13 {
                converged += 1;
                if converged >= 2 {
                    return Ok(g);
                }
            }
            if (hi - lo) <= 1e-15 * hi {
                return Ok(g);
            }
        }
        Err(Error::numeric(format!("Newton iteration for the tilt root at x = {x} did not converge")))
    }

    pub fn p_star(&self, x: f64) -> Result<f64> {
        Ok(self.mu_star() - self.gap(x)?)
    }

    /// `Λ(μ* − g)`.
    pub fn lambda_at_gap(&self, gap: f64) -> f64 {
        if let Some(pf) = self.closed_form {
            return pf.k / gap + pf.offset;
        }
        self.source.value_gap(gap)
    }

    pub fn p_star_prime_at_gap(&self, gap: f64) -> f64 {
        if let Some(pf) = self.closed_form {
            return gap * gap * gap / (2.0 * pf.k);
        }
        1.0 / self.source.d2_gap(gap)
    }

    pub fn p_star_prime(&self, x: f64) -> Result<f64> {
        let g = self.gap(x)?;
        Ok(self.p_star_prime_at_gap(g))
    }

    /// `Λ*(x) = p*(x)x − Λ(p*(x))`.
    pub fn lambda_star(&self, x: f64) -> Result<f64> {
        let g = self.gap(x)?;
        Ok(self.lambda_star_at(x, g))
    }

    fn lambda_star_at(&self, x: f64, gap: f64) -> f64 {
        if let Some(pf) = self.closed_form {
            return self.mu_star() * x - 2.0 * (pf.k * x).sqrt() - pf.offset;
        }
        (self.mu_star() - gap) * x - self.source.value_gap(gap)
    }

    pub fn point(&self, x: f64) -> Result<ConjugatePoint> {
        let gap = self.gap(x)?;
        Ok(ConjugatePoint {
            x,
            gap,
            p_star: self.mu_star() - gap,
            p_star_prime: self.p_star_prime_at_gap(gap),
            lambda_star: self.lambda_star_at(x, gap),
        })
    }

    /// `sup_x (p x − Λ*(x))` over `[x_lo, x_hi]`: coarse scan then golden-section refinement.
    pub fn biconjugate(&self, p: f64, x_lo: f64, x_hi: f64) -> Result<f64> {
        let obj = |x: f64| -> Result<f64> { Ok(p * x - self.lambda_star(x)?) };
        let n = 400;
        let xs: Vec<f64> = (0..=n).map(|i| x_lo * (x_hi / x_lo).powf(i as f64 / n as f64)).collect();
        let mut best = 0;
        let mut best_v = f64::NEG_INFINITY;
        for (i, &x) in xs.iter().enumerate() {
            let v = obj(x)?;
            if v > best_v {
                best_v = v;
                best = i;
            }
        }
        let mut a = xs[best.saturating_sub(1)];
        let mut b = xs[(best + 1).min(n)];
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let mut fc = obj(c)?;
        let mut fd = obj(d)?;
        for _ in 0..200 {
            if (b - a) <= 1e-14 * b {
                break;
            }
            if fc > fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = obj(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = obj(d)?;
            }
        }
        Ok(best_v.max(fc).max(fd))
    }
}

/// Per-point outcome of [`check_pstar_envelope`].
#[derive(Debug, Clone, Serialize)]
pub struct EnvelopePoint {
    pub x: f64,
    pub p_star: f64,
    /// `μ* − c̃₂x^{−1/(α₂+1)}`.
    pub lower: f64,
    /// `μ* − (c₁/c̃₂)^{1/α₁}x^{−(α₂/α₁)/(α₂+1)}`.
    pub upper: f64,
    /// Ratio of the admissible gap to the actual gap (≥ 1 when the lower bound holds).
    pub slack_lower: f64,
    /// Ratio of the actual gap to the minimal gap (≥ 1 when the upper bound holds).
    pub slack_upper: f64,
    pub p_star_prime: f64,
    pub x2_p_star_prime: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvelopeReport {
    pub envelope: Envelope,
    pub c2_tilde: f64,
    pub exponents_admissible: bool,
    /// Fitted constant of the lower `p*′` bracket `m₁x^{e₁}`.
    pub m1: f64,
    /// Fitted constant of the upper `p*′` bracket `m₂x^{e₂}`.
    pub m2: f64,
    pub e1: f64,
    pub e2: f64,
    pub points: Vec<EnvelopePoint>,
    pub worst_slack: f64,
    pub bounds_hold: bool,
    pub bracket_holds: bool,
    pub x2_p_star_prime_increasing: bool,
}

/// Verifies the tilt-root envelope and the `p*′` power bracket at each `x`.
pub fn check_pstar_envelope(data: &LegendreData, env: &Envelope, xs: &[f64]) -> Result<EnvelopeReport> {
    let m = data.mu_star();
    let c2t = env.c2_tilde();
    let k = 1.0 + 1.0 / (1.0 + env.alpha2);
    let e1 = -(env.alpha2 / env.alpha1) * k;
    let e2 = -(env.alpha1 / env.alpha2) * k;
    let mut points = Vec::with_capacity(xs.len());
    for &x in xs {
        let pt = data.point(x)?;
        let gmax = c2t * x.powf(-1.0 / (env.alpha2 + 1.0));
        let gmin = (env.c1 / c2t).powf(1.0 / env.alpha1) * x.powf(-(env.alpha2 / env.alpha1) / (env.alpha2 + 1.0));
        points.push(EnvelopePoint {
            x,
            p_star: pt.p_star,
            lower: m - gmax,
            upper: m - gmin,
            slack_lower: gmax / pt.gap,
            slack_upper: pt.gap / gmin,
            p_star_prime: pt.p_star_prime,
            x2_p_star_prime: x * x * pt.p_star_prime,
        });
    }
    let m1 = points.iter().map(|p| p.p_star_prime / p.x.powf(e1)).fold(f64::INFINITY, f64::min);
    let m2 = points.iter().map(|p| p.p_star_prime / p.x.powf(e2)).fold(0.0, f64::max);
    let worst_slack = points
        .iter()
        .map(|p| p.slack_lower.min(p.slack_upper))
        .fold(f64::INFINITY, f64::min);
    let bounds_hold = worst_slack >= 1.0 - 1e-9;
    let bracket_holds = m1 > 0.0
        && m2.is_finite()
        && points.iter().all(|p| m1 * p.x.powf(e1) <= m2 * p.x.powf(e2) * (1.0 + 1e-9));
    let x2_p_star_prime_increasing = points.windows(2).all(|w| w[1].x2_p_star_prime > w[0].x2_p_star_prime);
    Ok(EnvelopeReport {
        envelope: *env,
        c2_tilde: c2t,
        exponents_admissible: env.exponents_admissible(),
        m1,
        m2,
        e1,
        e2,
        points,
        worst_slack,
        bounds_hold,
        bracket_holds,
        x2_p_star_prime_increasing,
    })
}

/// Fits envelope constants from samples of `Λ`: `c₂` as the maximum of `Λg^{α₂}`
/// over all gaps, `c₁` as the minimum of `Λg^{α₁}` over gaps `≤ window`.
///
/// The lower envelope can only hold near the pole because `Λ(0) = 0`.
pub fn fit_envelope(source: &dyn LogMgf, alpha1: f64, alpha2: f64, window: f64) -> Envelope {
    let m = source.mu_star();
    let floor = source.min_gap().max(1e-12 * m);
    let n = 2000;
    let gaps: Vec<f64> = (0..=n).map(|i| floor * (m / floor).powf(i as f64 / n as f64)).collect();
    let c2 = gaps.iter().map(|&g| source.value_gap(g) * g.powf(alpha2)).fold(0.0, f64::max);
    let c1 = gaps
        .iter()
        .filter(|&&g| g <= window)
        .map(|&g| source.value_gap(g) * g.powf(alpha1))
        .fold(f64::INFINITY, f64::min);
    Envelope { alpha1, alpha2, c1, c2 }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cir() -> CirParams {
        CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap()
    }

    #[test]
    fn gaussian_conjugate() {
        let d = build_legendre(Arc::new(GaussianSurrogate { cap: 1e6 }), (0.0, 100.0)).unwrap();
        for &x in &[0.5, 2.0, 10.0] {
            let pt = d.point(x).unwrap();
            assert!((pt.p_star - x).abs() < 1e-9);
            assert!((pt.lambda_star - x * x / 2.0).abs() < 1e-9 * x * x);
            assert_eq!(pt.p_star_prime, 1.0);
        }
    }

    #[test]
    fn numeric_root_matches_slope_identity() {
        let c = cir();
        let d = build_legendre(Arc::new(c), (1.0, 1e6)).unwrap();
        for &x in &[1.0, 10.0, 1e3, 1e6] {
            let g = d.solve_gap(x, true).unwrap();
            assert!((c.log_mgf_d1_gap(g) / x - 1.0).abs() < 1e-12);
            let ga = d.gap(x).unwrap();
            assert!((g / ga - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn below_range_is_a_domain_error_with_range() {
        let c = cir();
        match build_legendre(Arc::new(c), (0.01, 10.0)) {
            Err(Error::Domain(msg)) => assert!(msg.contains(&format!("{}", c.mean()))),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn derivative_of_conjugate_is_tilt() {
        let d = build_legendre(Arc::new(cir()), (1.0, 1e4)).unwrap();
        for &x in &[2.0, 50.0, 3000.0] {
            let h = 1e-4 * x;
            let fd = (d.lambda_star(x + h).unwrap() - d.lambda_star(x - h).unwrap()) / (2.0 * h);
            assert!((fd / d.p_star(x).unwrap() - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn pole_example_envelope_slack_is_two() {
        let c = 1.7;
        let src = PoleLogMgf { mu_star: 2.0, k: c, offset: 0.0 };
        let d = build_legendre(Arc::new(src), (1.0, 1e6)).unwrap();
        let env = Envelope { alpha1: 1.0, alpha2: 1.0, c1: c, c2: c };
        assert!((env.c2_tilde() - 2.0 * c.sqrt()).abs() < 1e-14);
        let r = check_pstar_envelope(&d, &env, &[10.0, 1e3, 1e5]).unwrap();
        assert!(r.bounds_hold);
        for p in &r.points {
            assert!((p.slack_lower - 2.0).abs() < 1e-9 && (p.slack_upper - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn sampled_spline_preserves_convexity_and_interpolates() {
        let c = cir();
        let s = SampledLogMgf::from_source(&c, 400, 0.95).unwrap();
        let m = c.mu_star();
        for i in 0..399 {
            let g = m * 0.95f64.powi(i);
            assert!((s.value_gap(g) - c.log_mgf_gap(g)).abs() <= 1e-12 * c.log_mgf_gap(g).abs().max(1e-12));
            assert!(s.d2_gap(g * 0.9) >= 0.0);
        }
        let d = build_legendre(Arc::new(s), (1.0, 1e3)).unwrap();
        let x = 200.0;
        let g = d.gap(x).unwrap();
        let exact = c.gap_for_slope(x);
        assert!((g / exact - 1.0).abs() < 2e-3, "{g} {exact}");
    }
}
