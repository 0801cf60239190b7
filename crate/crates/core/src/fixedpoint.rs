//! Picard solver for the log-MGF of a square-root SDE with nonlinear drift.
//!
//! For `dX = (−bX + B̄(X))dt + √X dW` the log-MGF at the tilt
//! `μ = μ*_t − 1/(ξ_t(x + μ*_t))`, `ξ_t = e^{bt}/μ*_t²`, is written
//! `Γ(t,x) = (2b + x)X₀ + R(t,x)` where the remainder solves
//!
//! `R(t,x) = ∫₀ᵗ (x+2b)μ*_s/(x+μ*_s) · B̃[s, ξ_s(x+μ*_s)²(X₀ + ∂ₓR(s,x))] ds`.
//!
//! The remainder lives on a tensor grid: graded Gauss–Legendre panels in time
//! and a log-spaced grid in `x` with fourth-order differences.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::models::{critical_moment, inverse_critical_moment, Diffusion, SdeSpec};
use crate::quad;
use crate::tauberian::Order;

/// Grid and iteration settings for [`solve_gamma`].
#[derive(Debug, Clone, Serialize)]
pub struct FixedPointConfig {
    /// Final time `T`.
    pub t_max: f64,
    /// Lower edge `M` of the state grid; chosen automatically when `None`.
    pub m_threshold: Option<f64>,
    pub x_max: f64,
    pub n_x: usize,
    /// Gauss–Legendre nodes per time panel.
    pub gl_order: usize,
    /// Number of geometrically graded panels toward `t = 0`; derived from `x_max` when `None`.
    pub graded_levels: Option<usize>,
    pub tol: f64,
    pub max_iter: usize,
    /// Norm exponent; defaults to `max(1, β/(1−β)) + 0.25`.
    pub gamma: Option<f64>,
    pub order: Order,
    /// Doublings of `M` allowed in automatic mode.
    pub max_doublings: usize,
}

impl FixedPointConfig {
    pub fn new(t_max: f64) -> Self {
        FixedPointConfig {
            t_max,
            m_threshold: None,
            x_max: 1e6,
            n_x: 161,
            gl_order: 12,
            graded_levels: None,
            tol: 1e-10,
            max_iter: 50,
            gamma: None,
            order: Order::Leading,
            max_doublings: 8,
        }
    }
}

/// Remainder `R(t, x)` on the tensor grid.
#[derive(Debug, Clone, Serialize)]
pub struct RGrid {
    pub t_nodes: Vec<f64>,
    pub x_nodes: Vec<f64>,
    /// Row-major: `values[i * x_nodes.len() + j] = R(t_i, x_j)`.
    pub values: Vec<f64>,
    pub gamma: f64,
    /// `ξ_t = e^{bt}/μ*_t²` on `t_nodes` (zero at `t = 0`).
    pub xi: Vec<f64>,
}

impl RGrid {
    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.x_nodes.len();
        &self.values[i * n..(i + 1) * n]
    }

    pub fn last_row(&self) -> &[f64] {
        self.row(self.t_nodes.len() - 1)
    }

    fn log_step(&self) -> f64 {
        let n = self.x_nodes.len();
        (self.x_nodes[n - 1] / self.x_nodes[0]).ln() / (n - 1) as f64
    }

    /// `∂ₓR(t_i, ·)`.
    pub fn dx_row(&self, i: usize) -> Vec<f64> {
        let h = self.log_step();
        d_du(self.row(i), h).iter().zip(&self.x_nodes).map(|(d, x)| d / x).collect()
    }
}

/// Converged fixed point with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct GammaSolution {
    pub grid: RGrid,
    pub b: f64,
    pub x0: f64,
    pub m_threshold: f64,
    pub iterations: usize,
    /// Weighted sup-norm `sup x^{−γ}|R_{n+1} − R_n|` per iteration.
    pub residual_history: Vec<f64>,
    /// Estimated contraction constant from the residual ratios.
    pub contraction: Option<f64>,
    /// Estimated contraction for every `M` tried in automatic mode.
    pub attempts: Vec<(f64, Option<f64>)>,
}

impl GammaSolution {
    /// `Γ(t_i, x_j) = (2b + x_j)X₀ + R(t_i, x_j)`.
    pub fn gamma_at(&self, i: usize, j: usize) -> f64 {
        let x = self.grid.x_nodes[j];
        (2.0 * self.b + x) * self.x0 + self.grid.row(i)[j]
    }

    /// `∂ₓΓ(t_i, ·) = X₀ + ∂ₓR`.
    pub fn dx_gamma(&self, i: usize) -> Vec<f64> {
        self.grid.dx_row(i).into_iter().map(|d| d + self.x0).collect()
    }

    /// `Γ(t_i, x)` at an arbitrary `x` inside the grid (cubic interpolation of `R` in `ln x`).
    pub fn gamma_interp(&self, i: usize, x: f64) -> Result<f64> {
        let xs = &self.grid.x_nodes;
        let n = xs.len();
        if !(x >= xs[0] && x <= xs[n - 1]) {
            return Err(Error::domain(format!("x = {x} is outside the grid [{}, {}]", xs[0], xs[n - 1])));
        }
        let h = self.grid.log_step();
        let u = (x / xs[0]).ln() / h;
        let j0 = (u.floor() as usize).saturating_sub(1).min(n - 4);
        let row = self.grid.row(i);
        let mut r = 0.0;
        for l in 0..4 {
            let mut w = 1.0;
            for m in 0..4 {
                if m != l {
                    w *= (u - (j0 + m) as f64) / (l as f64 - m as f64);
                }
            }
            r += w * row[j0 + l];
        }
        Ok((2.0 * self.b + x) * self.x0 + r)
    }

    /// The tilt `μ = μ*_t − 1/(ξ_t(x + μ*_t))` at which `Γ(t, x)` is the log-MGF.
    pub fn tilt(&self, i: usize, j: usize) -> f64 {
        let t = self.grid.t_nodes[i];
        let m = critical_moment(self.b, 1.0, t).unwrap_or(f64::INFINITY);
        let x = self.grid.x_nodes[j];
        m - 1.0 / (self.grid.xi[i] * (x + m))
    }
}

/// Fourth-order first derivative on a uniform grid (one-sided at the edges).
pub fn d_du(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let mut d = vec![0.0; n];
    if n < 5 {
        for i in 0..n {
            let (a, b) = (i.saturating_sub(1), (i + 1).min(n - 1));
            d[i] = (f[b] - f[a]) / ((b - a) as f64 * h);
        }
        return d;
    }
    let c = 12.0 * h;
    d[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / c;
    d[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) / c;
    for i in 2..n - 2 {
        d[i] = (-f[i + 2] + 8.0 * f[i + 1] - 8.0 * f[i - 1] + f[i - 2]) / c;
    }
    d[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) / c;
    d[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4] + 3.0 * f[n - 5]) / c;
    d
}

/// Fourth-order second derivative on a uniform grid (one-sided at the edges).
pub fn d2_du2(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    if n < 6 {
        return d_du(&d_du(f, h), h);
    }
    let c = 12.0 * h * h;
    let mut d = vec![0.0; n];
    d[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5]) / c;
    d[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) / c;
    for i in 2..n - 2 {
        d[i] = (-f[i + 2] + 16.0 * f[i + 1] - 30.0 * f[i] + 16.0 * f[i - 1] - f[i - 2]) / c;
    }
    d[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5] + f[n - 6]) / c;
    d[n - 1] = (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4] + 61.0 * f[n - 5]
        - 10.0 * f[n - 6])
        / c;
    d
}

/// Local quantities entering `B̃` at one `(t, x)` node.
#[derive(Debug, Clone, Copy)]
pub struct BtildeInput {
    pub t: f64,
    pub x: f64,
    /// Mean-reversion rate `b`.
    pub b: f64,
    /// `∂ₓΓ = X₀ + ∂ₓR`.
    pub dx_gamma: f64,
    /// `∂ₓ²Γ`, used by the refined order only.
    pub dxx_gamma: f64,
}

/// `ξ_t(x + μ*_t)² = e^{bt}(1 + x/μ*_t)²`, finite as `t → 0`.
fn tilt_scale(b: f64, t: f64, x: f64) -> f64 {
    let w = 1.0 + x * inverse_critical_moment(b, 1.0, t);
    (b * t).exp() * w * w
}

/// Drift expectation `B̃` under the tilted law.
///
/// Leading order: `B̄(Λ′)` with `Λ′ = ξ(x+μ*)²∂ₓΓ`. Refined order multiplies by
/// `1 + (β²−β)Λ″/(2Λ′²)` with `Λ″ = ξ²(x+μ*)³(2∂ₓΓ + (x+μ*)∂ₓ²Γ)`.
pub fn btilde(bbar: &dyn Fn(f64) -> f64, beta: f64, input: &BtildeInput, order: Order) -> Result<f64> {
    let scale = tilt_scale(input.b, input.t, input.x);
    let arg = scale * input.dx_gamma;
    if !(arg > 0.0) {
        return Err(Error::domain(format!(
            "B̃ argument {arg} is not positive at t = {}, x = {}: the grid threshold M is too small",
            input.t, input.x
        )));
    }
    let lead = bbar(arg);
    if order == Order::Leading || beta == 0.0 || beta == 1.0 {
        return Ok(lead);
    }
    let inv_m = inverse_critical_moment(input.b, 1.0, input.t);
    // w = x + μ*; ξ = e^{bt}/μ*², so ξ²w³ = scale²/w
    let w = input.x + 1.0 / inv_m;
    let d2 = scale * scale / w * (2.0 * input.dx_gamma + w * input.dxx_gamma);
    Ok(lead * (1.0 + (beta * beta - beta) * d2 / (2.0 * arg * arg)))
}

/// Time nodes: row 0 is `t = 0`, then per panel the Gauss–Legendre nodes and the panel end.
struct TimePlan {
    t: Vec<f64>,
    /// `(first row of the panel, half width)`.
    panels: Vec<(usize, f64)>,
    cum: Vec<Vec<f64>>,
    m: usize,
}

impl TimePlan {
    fn new(t_max: f64, levels: usize, m: usize) -> Self {
        let (gx, _) = quad::gauss_legendre(m);
        let cum = quad::cumulative_matrix(&gx);
        let mut edges = vec![0.0];
        for l in (0..levels).rev() {
            edges.push(t_max * 0.5f64.powi(l as i32 + 1));
        }
        edges.push(t_max);
        let mut t = vec![0.0];
        let mut panels = Vec::new();
        for w in edges.windows(2) {
            let (a, b) = (w[0], w[1]);
            let hw = 0.5 * (b - a);
            panels.push((t.len(), hw));
            for &g in &gx {
                t.push(a + hw * (g + 1.0));
            }
            t.push(b);
        }
        TimePlan { t, panels, cum, m }
    }
}

/// Solves the remainder equation by Picard iteration from `R₀ = 0`.
///
/// With `m_threshold = None`, `M` starts at `10(2b + μ*_T)` and doubles until the
/// estimated contraction constant is at most 0.9.
pub fn solve_gamma(spec: &SdeSpec, config: &FixedPointConfig) -> Result<GammaSolution> {
    match &spec.diffusion {
        Diffusion::SquareRoot { sigma } if *sigma == 1.0 => {}
        other => {
            return Err(Error::domain(format!(
                "the fixed-point solver needs diffusion sqrt(y); got {other:?} (apply the Sigma-transform first)"
            )))
        }
    }
    if !(spec.b_limit > 0.0) || !(spec.x0 > 0.0) || !(config.t_max > 0.0) {
        return Err(Error::domain("need b > 0, x0 > 0 and T > 0"));
    }
    if spec.beta >= 1.0 {
        return Err(Error::domain(format!("beta = {} must be below 1", spec.beta)));
    }
    if config.n_x < 8 || config.gl_order < 2 {
        return Err(Error::domain("grid too small: need n_x >= 8 and gl_order >= 2"));
    }
    match config.m_threshold {
        Some(m) => solve_with_threshold(spec, config, m).map(|mut s| {
            s.attempts = vec![(m, s.contraction)];
            s
        }),
        None => {
            let mu_t = critical_moment(spec.b_limit, 1.0, config.t_max)?;
            let mut m = 10.0 * (2.0 * spec.b_limit + mu_t);
            let mut attempts = Vec::new();
            let mut last_err = None;
            for _ in 0..=config.max_doublings {
                if m >= config.x_max / 10.0 {
                    break;
                }
                match solve_with_threshold(spec, config, m) {
                    Ok(mut s) => {
                        attempts.push((m, s.contraction));
                        if s.contraction.map_or(true, |c| c <= 0.9) {
                            s.attempts = attempts;
                            return Ok(s);
                        }
                    }
                    Err(e) => {
                        attempts.push((m, None));
                        last_err = Some(e);
                    }
                }
                m *= 2.0;
            }
            Err(last_err.unwrap_or_else(|| {
                Error::numeric(format!(
                    "no threshold M gave a contraction constant <= 0.9 (attempts {attempts:?}); enlarge x_max or M"
                ))
            }))
        }
    }
}

fn solve_with_threshold(spec: &SdeSpec, config: &FixedPointConfig, m_thr: f64) -> Result<GammaSolution> {
    let b = spec.b_limit;
    let x0 = spec.x0;
    let t_max = config.t_max;
    let gamma = config.gamma.unwrap_or_else(|| {
        let beta = spec.beta.max(0.0);
        (1.0f64).max(beta / (1.0 - beta)) + 0.25
    });
    let nx = config.n_x;
    if !(m_thr > 0.0 && m_thr < config.x_max) {
        return Err(Error::domain(format!("need 0 < M < x_max (M = {m_thr}, x_max = {})", config.x_max)));
    }
    let h = (config.x_max / m_thr).ln() / (nx - 1) as f64;
    let xs: Vec<f64> = (0..nx).map(|j| m_thr * (h * j as f64).exp()).collect();
    let levels = config
        .graded_levels
        .unwrap_or_else(|| ((t_max * config.x_max / 0.01).log2().ceil().max(1.0)) as usize);
    let plan = TimePlan::new(t_max, levels, config.gl_order);
    let nt = plan.t.len();
    let xi: Vec<f64> = plan
        .t
        .iter()
        .map(|&t| if t == 0.0 { 0.0 } else { (b * t).exp() * inverse_critical_moment(b, 1.0, t).powi(2) })
        .collect();
    let weight: Vec<f64> = xs.iter().map(|x| x.powf(-gamma)).collect();

    // kernel (x+2b)μ*_s/(x+μ*_s) at every GL row
    let gl_rows: Vec<usize> = plan
        .panels
        .iter()
        .flat_map(|&(first, _)| first..first + plan.m)
        .collect();
    let kern: Vec<Vec<f64>> = gl_rows
        .iter()
        .map(|&r| {
            let inv = inverse_critical_moment(b, 1.0, plan.t[r]);
            xs.iter().map(|&x| (x + 2.0 * b) / (1.0 + x * inv)).collect()
        })
        .collect();

    let bbar = |y: f64| spec.bbar(y);
    let mut r = vec![0.0; nt * nx];
    let mut history = Vec::new();
    let mut iterations = 0;
    let mut f = vec![vec![0.0; nx]; gl_rows.len()];
    loop {
        iterations += 1;
        for (gi, &row) in gl_rows.iter().enumerate() {
            let cur = &r[row * nx..(row + 1) * nx];
            let du = d_du(cur, h);
            let duu = if config.order == Order::Refined { d2_du2(cur, h) } else { vec![0.0; nx] };
            for j in 0..nx {
                let x = xs[j];
                let input = BtildeInput {
                    t: plan.t[row],
                    x,
                    b,
                    dx_gamma: x0 + du[j] / x,
                    dxx_gamma: (duu[j] - du[j]) / (x * x),
                };
                f[gi][j] = kern[gi][j] * btilde(&bbar, spec.beta, &input, config.order)?;
            }
        }
        let mut next = vec![0.0; nt * nx];
        for (p, &(first, hw)) in plan.panels.iter().enumerate() {
            let base_row = first - 1;
            for i in 0..=plan.m {
                let row = first + i;
                let coeffs = &plan.cum[i];
                for j in 0..nx {
                    let mut acc = 0.0;
                    for l in 0..plan.m {
                        acc += coeffs[l] * f[p * plan.m + l][j];
                    }
                    next[row * nx + j] = next[base_row * nx + j] + hw * acc;
                }
            }
        }
        let mut res = 0.0f64;
        for i in 0..nt {
            for j in 0..nx {
                let d = (next[i * nx + j] - r[i * nx + j]).abs() * weight[j];
                if !d.is_finite() {
                    return Err(Error::numeric(format!("non-finite iterate at iteration {iterations}")));
                }
                res = res.max(d);
            }
        }
        r = next;
        history.push(res);
        let contraction = estimate_contraction(&history);
        if res <= config.tol {
            return Ok(GammaSolution {
                grid: RGrid { t_nodes: plan.t.clone(), x_nodes: xs, values: r, gamma, xi },
                b,
                x0,
                m_threshold: m_thr,
                iterations,
                residual_history: history,
                contraction,
                attempts: Vec::new(),
            });
        }
        if history.len() >= 4 && contraction.is_some_and(|c| c >= 1.0) {
            return Err(Error::numeric(format!(
                "Picard iteration is not contracting (estimate {:.3}) at M = {m_thr}; increase M. Residuals: {history:?}",
                contraction.unwrap()
            )));
        }
        if iterations >= config.max_iter {
            return Err(Error::numeric(format!(
                "no convergence after {iterations} iterations at M = {m_thr}; residuals: {history:?}"
            )));
        }
    }
}

/// Contraction constant from the last residual ratios (needs at least three residuals).
fn estimate_contraction(history: &[f64]) -> Option<f64> {
    let n = history.len();
    if n < 2 {
        return None;
    }
    if history[n - 1] == 0.0 {
        return Some(0.0);
    }
    if n < 3 {
        return None;
    }
    let r1 = history[n - 1] / history[n - 2];
    let r2 = history[n - 2] / history[n - 3];
    Some(r1.max(r2))
}

/// `sup_{k ≤ k_max} sup x^{−γ+k}|∂ₓᵏu|` over the grid.
pub fn banach_norm(grid: &RGrid, k_max: usize) -> Result<f64> {
    if k_max > 3 {
        return Err(Error::numeric(format!("derivative depth {k_max} is not supported (max 3)")));
    }
    let nx = grid.x_nodes.len();
    if nx < 2 * k_max + 5 {
        return Err(Error::numeric(format!("{nx} grid points are too few for depth {k_max}")));
    }
    let h = grid.log_step();
    let mut best = 0.0f64;
    for i in 0..grid.t_nodes.len() {
        let f = grid.row(i);
        let f1 = d_du(f, h);
        let f2 = d2_du2(f, h);
        let f3 = d_du(&f2, h);
        for j in 0..nx {
            let w = grid.x_nodes[j].powf(-grid.gamma);
            let terms = [f[j], f1[j], f2[j] - f1[j], f3[j] - 3.0 * f2[j] + 2.0 * f1[j]];
            for t in terms.iter().take(k_max + 1) {
                best = best.max(w * t.abs());
            }
        }
    }
    Ok(best)
}

/// Constants of the power-drift coefficient.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct PowerDriftParams {
    /// Coefficient `c` in `B̄(y) = c y^β`.
    pub c: f64,
    pub b: f64,
    pub sigma: f64,
    pub x0: f64,
}

/// `ω_τ = c X₀^{β−1}(2b/σ²)^{1−2β}/(bβ) ∫₁^τ (1 − s^{−1/β})^{2β−1} ds`.
pub fn omega_tau(beta: f64, params: &PowerDriftParams, tau: f64) -> Result<f64> {
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("beta must lie in (0, 1), got {beta}")));
    }
    if !(tau >= 1.0) {
        return Err(Error::domain(format!("tau must be >= 1, got {tau}")));
    }
    if tau == 1.0 || params.c == 0.0 {
        return Ok(0.0);
    }
    let j = quad::integrate_algebraic_start(
        |s: f64| (1.0 - s.powf(-1.0 / beta)).powf(2.0 * beta - 1.0),
        1.0,
        tau,
        2.0 * beta - 1.0,
        1e-12,
    )?
    .value;
    let pre = params.c * params.x0.powf(beta - 1.0) / (params.b * beta)
        * (2.0 * params.b / (params.sigma * params.sigma)).powf(1.0 - 2.0 * beta);
    Ok(pre * j)
}

/// Tail coefficient `c_t` of `R̃(t, y) ~ c_t y^{2β ∨ β/(1−β)}`.
pub fn power_drift_coefficient(beta: f64, params: &PowerDriftParams, tau: f64) -> Result<f64> {
    if beta == 1.0 {
        return Err(Error::domain("beta = 1 is not admissible"));
    }
    let w = omega_tau(beta, params, tau)?;
    Ok(if beta < 0.5 {
        w
    } else if beta == 0.5 {
        (1.0 + w / 2.0).powi(2) - 1.0
    } else {
        let g = beta / (1.0 - beta);
        (g.powf(beta) * (1.0 - beta) * w).powf(1.0 / (1.0 - beta))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::{cir_log_mgf, CirParams, SdeSpec};

    #[test]
    fn derivative_stencils_are_fourth_order() {
        let h = 0.05;
        let f: Vec<f64> = (0..40).map(|i| (0.3 * i as f64 * h).exp()).collect();
        let d = d_du(&f, h);
        let d2 = d2_du2(&f, h);
        for i in 0..40 {
            assert!((d[i] / (0.3 * f[i]) - 1.0).abs() < 1e-7, "{i}");
            assert!((d2[i] / (0.09 * f[i]) - 1.0).abs() < 1e-5, "{i}");
        }
    }

    #[test]
    fn zero_perturbation_converges_at_once() {
        let spec = SdeSpec::power_drift(0.0, 1.0, 0.0, 0.0, 0.5);
        let mut cfg = FixedPointConfig::new(1.0);
        cfg.m_threshold = Some(50.0);
        cfg.x_max = 1e5;
        let s = solve_gamma(&spec, &cfg).unwrap();
        assert_eq!(s.iterations, 1);
        assert!(s.grid.values.iter().all(|&v| v == 0.0));
        assert_eq!(s.gamma_at(0, 3), (2.0 + s.grid.x_nodes[3]) * 0.5);
    }

    #[test]
    fn constant_perturbation_is_exact_cir() {
        let a = 0.4;
        let spec = SdeSpec::power_drift(a, 1.0, 0.0, 0.0, 0.5);
        let mut cfg = FixedPointConfig::new(1.0);
        cfg.m_threshold = Some(50.0);
        cfg.x_max = 1e5;
        let s = solve_gamma(&spec, &cfg).unwrap();
        for (i, &t) in s.grid.t_nodes.iter().enumerate().skip(1) {
            let inv = inverse_critical_moment(1.0, 1.0, t);
            for (j, &x) in s.grid.x_nodes.iter().enumerate() {
                let exact = 2.0 * a * (t + (x * inv).ln_1p());
                let got = s.grid.row(i)[j];
                assert!((got - exact).abs() <= 1e-10 * exact.max(1e-3), "t={t} x={x}: {got} {exact}");
            }
        }
        // the full log-MGF through the tilt, away from t = 0 where μ* is huge
        for (i, &t) in s.grid.t_nodes.iter().enumerate().filter(|(_, &t)| t > 0.05) {
            let cir = CirParams::new(a, 1.0, 1.0, 0.5, t).unwrap();
            for j in (0..cfg.n_x).step_by(10) {
                let exact = cir_log_mgf(&cir, s.tilt(i, j)).unwrap();
                assert!((s.gamma_at(i, j) / exact - 1.0).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn btilde_trivial_cases() {
        let inp = BtildeInput { t: 0.5, x: 100.0, b: 1.0, dx_gamma: 0.5, dxx_gamma: 0.0 };
        assert_eq!(btilde(&|_| 0.0, 0.0, &inp, Order::Refined).unwrap(), 0.0);
        assert_eq!(btilde(&|_| 0.4, 0.0, &inp, Order::Refined).unwrap(), 0.4);
        assert_eq!(btilde(&|_| 0.4, 0.0, &inp, Order::Leading).unwrap(), 0.4);
        let bad = BtildeInput { dx_gamma: -1.0, ..inp };
        assert!(matches!(btilde(&|_| 0.4, 0.0, &bad, Order::Leading), Err(Error::Domain(_))));
    }

    #[test]
    fn banach_norm_of_monomial() {
        let gamma = 1.25;
        let xs: Vec<f64> = (0..200).map(|j| 10.0 * (0.03 * j as f64).exp()).collect();
        let values: Vec<f64> = xs.iter().map(|x| x.powf(gamma)).collect();
        let g = RGrid { t_nodes: vec![1.0], x_nodes: xs, values, gamma, xi: vec![1.0] };
        assert!((banach_norm(&g, 0).unwrap() - 1.0).abs() < 1e-12);
        let expect = [1.0f64, gamma, gamma * (gamma - 1.0), gamma * (gamma - 1.0) * (gamma - 2.0)];
        let max3 = expect.iter().map(|v| v.abs()).fold(0.0, f64::max);
        assert!((banach_norm(&g, 3).unwrap() - max3).abs() < 1e-5);
        let zero = RGrid { values: vec![0.0; 200], ..g.clone() };
        assert_eq!(banach_norm(&zero, 2).unwrap(), 0.0);
        assert!(banach_norm(&g, 4).is_err());
    }

    #[test]
    fn power_coefficient_trivial_cases() {
        let p = PowerDriftParams { c: 1.0, b: 1.0, sigma: 1.0, x0: 0.5 };
        for &beta in &[0.3, 0.5, 0.7] {
            assert_eq!(power_drift_coefficient(beta, &p, 1.0).unwrap(), 0.0);
        }
        let p0 = PowerDriftParams { c: 0.0, ..p };
        assert_eq!(power_drift_coefficient(0.3, &p0, 2.0).unwrap(), 0.0);
        assert!(power_drift_coefficient(1.0, &p, 2.0).is_err());
    }
}
