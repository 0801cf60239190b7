//! Path simulation and empirical estimators used as independent oracles.
//!
//! Every path draws its normals from its own ChaCha8 stream, keyed by the run seed
//! and the path index, so results do not depend on thread scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cev::CevParams;
use crate::error::{Error, Result};
use crate::fixedpoint::{solve_gamma, FixedPointConfig};
use crate::models::{cir_exact_ccdf, cir_log_mgf, critical_moment, CirParams, MonotoneClass, SdeSpec};
use crate::quad::pairwise_sum;

/// Time-stepping scheme.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Drift and diffusion evaluated at `max(X, 0)`; the terminal value is `max(X, 0)`.
    EulerFullTruncation,
    /// `X ← |X + drift·dt + diffusion·ΔW|`.
    EulerReflection,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euler_full_truncation" | "full-truncation" => Ok(Scheme::EulerFullTruncation),
            "euler_reflection" | "reflection" => Ok(Scheme::EulerReflection),
            _ => Err(Error::spec("scheme", format!("unknown scheme `{s}`"))),
        }
    }
}

/// Simulation settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub horizon: f64,
    pub seed: u64,
    pub scheme: Scheme,
}

impl SimConfig {
    pub fn new(n_paths: usize, n_steps: usize, horizon: f64, seed: u64) -> Self {
        SimConfig { n_paths, n_steps, horizon, seed, scheme: Scheme::EulerFullTruncation }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths == 0 || self.n_steps == 0 {
            return Err(Error::domain("n_paths and n_steps must be at least 1"));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::domain(format!("horizon must be positive, got {}", self.horizon)));
        }
        Ok(())
    }
}

/// A one-dimensional SDE `dX = drift(X)dt + diffusion(X)dW`.
pub trait SimModel: Sync {
    fn x0(&self) -> f64;
    fn drift(&self, x: f64) -> f64;
    fn diffusion(&self, x: f64) -> f64;
}

impl SimModel for SdeSpec {
    fn x0(&self) -> f64 {
        self.x0
    }
    #[inline]
    fn drift(&self, x: f64) -> f64 {
        self.drift.eval(x)
    }
    #[inline]
    fn diffusion(&self, x: f64) -> f64 {
        self.diffusion.eval(x)
    }
}

impl SimModel for CirParams {
    fn x0(&self) -> f64 {
        self.x0
    }
    #[inline]
    fn drift(&self, x: f64) -> f64 {
        self.a - self.b * x
    }
    #[inline]
    fn diffusion(&self, x: f64) -> f64 {
        self.sigma * x.max(0.0).sqrt()
    }
}

impl SimModel for CevParams {
    fn x0(&self) -> f64 {
        self.v0
    }
    #[inline]
    fn drift(&self, x: f64) -> f64 {
        self.a - self.b * x
    }
    #[inline]
    fn diffusion(&self, x: f64) -> f64 {
        let x = x.max(0.0);
        if self.p == 0.75 {
            let r = x.sqrt();
            self.sigma * r * r.sqrt()
        } else {
            self.sigma * x.powf(self.p)
        }
    }
}

/// Difference between the configured grid and a grid with twice as many steps
/// driven by the same Brownian path.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct HalvingDiagnostic {
    /// Mean of `X_fine − X_coarse`.
    pub mean_shift: f64,
    /// Standard error of that mean.
    pub stderr: f64,
    /// Mean of `|X_fine − X_coarse|`.
    pub mean_abs: f64,
}

/// Terminal samples of a run.
#[derive(Debug, Clone, Serialize)]
pub struct SimResult {
    pub samples: Vec<f64>,
    /// Paths excluded for non-finite values.
    pub flagged: usize,
    pub config: SimConfig,
    pub halving: Option<HalvingDiagnostic>,
}

#[inline]
fn step(m: &(impl SimModel + ?Sized), scheme: Scheme, x: f64, dt: f64, dw: f64) -> f64 {
    match scheme {
        Scheme::EulerFullTruncation => {
            let xp = x.max(0.0);
            x + m.drift(xp) * dt + m.diffusion(xp) * dw
        }
        Scheme::EulerReflection => (x + m.drift(x) * dt + m.diffusion(x) * dw).abs(),
    }
}

#[inline]
fn terminal(scheme: Scheme, x: f64) -> f64 {
    match scheme {
        Scheme::EulerFullTruncation => x.max(0.0),
        Scheme::EulerReflection => x,
    }
}

fn path_rng(seed: u64, path: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(path as u64);
    rng
}

fn collect(values: Vec<Option<f64>>, config: SimConfig) -> Result<(Vec<f64>, usize)> {
    let flagged = values.iter().filter(|v| v.is_none()).count();
    if flagged as f64 > 1e-3 * config.n_paths as f64 {
        return Err(Error::numeric(format!(
            "{flagged} of {} paths produced non-finite values (limit 0.1%)",
            config.n_paths
        )));
    }
    Ok((values.into_iter().flatten().collect(), flagged))
}

/// Simulates `config.n_paths` independent paths and returns the terminal values.
pub fn simulate<M: SimModel + ?Sized>(model: &M, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.n_steps;
    let dt = config.horizon / n as f64;
    let sq = dt.sqrt();
    let scheme = config.scheme;
    let x0 = model.x0();
    let values: Vec<Option<f64>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            let mut x = x0;
            for _ in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                x = step(model, scheme, x, dt, sq * z);
            }
            let v = terminal(scheme, x);
            v.is_finite().then_some(v)
        })
        .collect();
    let (samples, flagged) = collect(values, *config)?;
    Ok(SimResult { samples, flagged, config: *config, halving: None })
}

/// Like [`simulate`], with the step-halving diagnostic attached.
///
/// Each path runs on a grid of `2·n_steps` and, on the same Brownian path, on the
/// configured grid; the returned samples are those of the configured grid.
pub fn simulate_with_halving<M: SimModel + ?Sized>(model: &M, config: &SimConfig) -> Result<SimResult> {
    config.validate()?;
    let n = config.n_steps;
    let dt = config.horizon / n as f64;
    let hf = 0.5 * dt;
    let sqf = hf.sqrt();
    let scheme = config.scheme;
    let x0 = model.x0();
    let pairs: Vec<Option<(f64, f64)>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            let (mut xc, mut xf) = (x0, x0);
            for _ in 0..n {
                let z1: f64 = StandardNormal.sample(&mut rng);
                let z2: f64 = StandardNormal.sample(&mut rng);
                xf = step(model, scheme, xf, hf, sqf * z1);
                xf = step(model, scheme, xf, hf, sqf * z2);
                xc = step(model, scheme, xc, dt, sqf * (z1 + z2));
            }
            let (c, f) = (terminal(scheme, xc), terminal(scheme, xf));
            (c.is_finite() && f.is_finite()).then_some((c, f))
        })
        .collect();
    let coarse: Vec<Option<f64>> = pairs.iter().map(|p| p.map(|p| p.0)).collect();
    let diffs: Vec<f64> = pairs.iter().flatten().map(|p| p.1 - p.0).collect();
    let (samples, flagged) = collect(coarse, *config)?;
    let m = diffs.len() as f64;
    let mean = pairwise_sum(&diffs) / m;
    let var = pairwise_sum(&diffs.iter().map(|d| (d - mean).powi(2)).collect::<Vec<_>>()) / (m - 1.0).max(1.0);
    let abs = pairwise_sum(&diffs.iter().map(|d| d.abs()).collect::<Vec<_>>()) / m;
    Ok(SimResult {
        samples,
        flagged,
        config: *config,
        halving: Some(HalvingDiagnostic { mean_shift: mean, stderr: (var / m).sqrt(), mean_abs: abs }),
    })
}

/// Simulates several models driven by identical Brownian increments, path by path.
pub fn simulate_coupled(models: &[&dyn SimModel], config: &SimConfig) -> Result<Vec<Vec<f64>>> {
    config.validate()?;
    let n = config.n_steps;
    let dt = config.horizon / n as f64;
    let sq = dt.sqrt();
    let scheme = config.scheme;
    let k = models.len();
    let rows: Vec<Option<Vec<f64>>> = (0..config.n_paths)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(config.seed, i);
            let mut xs: Vec<f64> = models.iter().map(|m| m.x0()).collect();
            for _ in 0..n {
                let z: f64 = StandardNormal.sample(&mut rng);
                for (x, m) in xs.iter_mut().zip(models) {
                    *x = step(*m, scheme, *x, dt, sq * z);
                }
            }
            let out: Vec<f64> = xs.into_iter().map(|x| terminal(scheme, x)).collect();
            out.iter().all(|v| v.is_finite()).then_some(out)
        })
        .collect();
    let flagged = rows.iter().filter(|r| r.is_none()).count();
    if flagged as f64 > 1e-3 * config.n_paths as f64 {
        return Err(Error::numeric(format!("{flagged} coupled paths produced non-finite values")));
    }
    let mut out = vec![Vec::with_capacity(config.n_paths - flagged); k];
    for r in rows.into_iter().flatten() {
        for (j, v) in r.into_iter().enumerate() {
            out[j].push(v);
        }
    }
    Ok(out)
}

/// Empirical log-MGF with its delta-method standard error.
#[derive(Debug, Clone, Serialize)]
pub struct MgfEstimate {
    pub mu: f64,
    pub value: f64,
    pub stderr: f64,
    /// `(Σw)²/Σw²` for the weights `w = e^{μS}`.
    pub ess: f64,
    pub n: usize,
    /// Set when the effective sample size is below 1% of the sample count.
    pub warning: Option<String>,
}

/// `ln mean(e^{μS})`, computed with a max shift.
pub fn empirical_log_mgf(samples: &[f64], mu: f64) -> Result<MgfEstimate> {
    if samples.is_empty() {
        return Err(Error::domain("no samples"));
    }
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("samples must be finite"));
    }
    let n = samples.len();
    if mu == 0.0 {
        return Ok(MgfEstimate { mu, value: 0.0, stderr: 0.0, ess: n as f64, n, warning: None });
    }
    let shift = samples.iter().map(|s| mu * s).fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = samples.iter().map(|s| (mu * s - shift).exp()).collect();
    let sum = pairwise_sum(&w);
    let mean = sum / n as f64;
    let sq: Vec<f64> = w.iter().map(|v| v * v).collect();
    let sum2 = pairwise_sum(&sq);
    let var = if n > 1 { ((sum2 - sum * mean) / (n - 1) as f64).max(0.0) } else { 0.0 };
    let ess = sum * sum / sum2;
    let warning = (ess < 0.01 * n as f64).then(|| {
        format!("effective sample size {ess:.1} of {n}: mu = {mu} is close to the empirical blow-up region")
    });
    Ok(MgfEstimate {
        mu,
        value: shift + mean.ln(),
        stderr: (var / n as f64).sqrt() / mean,
        ess,
        n,
        warning,
    })
}

/// Empirical CCDF `P(S ≥ x)` with a Wilson interval.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct CcdfEstimate {
    pub x: f64,
    pub p: f64,
    /// Binomial standard error `√(p(1−p)/n)` of the estimate.
    pub stderr: f64,
    pub count: usize,
    pub n: usize,
    pub lo: f64,
    pub hi: f64,
}

/// Default Wilson interval width in standard deviations.
pub const WILSON_Z: f64 = 3.0;

fn wilson(count: usize, n: usize, z: f64) -> (f64, f64) {
    let nf = n as f64;
    let p = count as f64 / nf;
    let z2 = z * z;
    let den = 1.0 + z2 / nf;
    let centre = (p + z2 / (2.0 * nf)) / den;
    let half = z * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / den;
    let lo = if count == 0 { 0.0 } else { (centre - half).max(0.0) };
    (lo, (centre + half).min(1.0))
}

/// Sorted samples for repeated CCDF queries.
#[derive(Debug, Clone)]
pub struct EmpiricalCcdf {
    sorted: Vec<f64>,
}

impl EmpiricalCcdf {
    pub fn new(samples: &[f64]) -> Result<Self> {
        if samples.is_empty() || samples.iter().any(|s| !s.is_finite()) {
            return Err(Error::domain("samples must be finite and non-empty"));
        }
        let mut sorted = samples.to_vec();
        sorted.sort_by(|a, b| a.total_cmp(b));
        Ok(EmpiricalCcdf { sorted })
    }

    pub fn len(&self) -> usize {
        self.sorted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sorted.is_empty()
    }

    pub fn ccdf(&self, x: f64) -> CcdfEstimate {
        self.ccdf_z(x, WILSON_Z)
    }

    pub fn ccdf_z(&self, x: f64, z: f64) -> CcdfEstimate {
        let n = self.sorted.len();
        let count = n - self.sorted.partition_point(|&s| s < x);
        let p = count as f64 / n as f64;
        let (lo, hi) = wilson(count, n, z);
        CcdfEstimate { x, p, stderr: (p * (1.0 - p) / n as f64).sqrt(), count, n, lo, hi }
    }

    /// Empirical quantile (lower order statistic).
    pub fn quantile(&self, q: f64) -> f64 {
        let n = self.sorted.len();
        let i = ((q * n as f64).floor() as usize).min(n - 1);
        self.sorted[i]
    }
}

/// `P(S ≥ x)` from unsorted samples.
pub fn empirical_ccdf(samples: &[f64], x: f64) -> Result<CcdfEstimate> {
    if samples.is_empty() || samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::domain("samples must be finite and non-empty"));
    }
    let n = samples.len();
    let count = samples.iter().filter(|&&s| s >= x).count();
    let p = count as f64 / n as f64;
    let (lo, hi) = wilson(count, n, WILSON_Z);
    Ok(CcdfEstimate { x, p, stderr: (p * (1.0 - p) / n as f64).sqrt(), count, n, lo, hi })
}

/// Two CIR processes bracketing a square-root SDE pathwise.
#[derive(Debug, Clone, Serialize)]
pub struct SqueezeSpec {
    #[serde(skip)]
    pub target: SdeSpec,
    pub lower_cir: CirParams,
    pub upper_cir: CirParams,
    pub monotone_class: MonotoneClass,
    /// The level `x` the construction is built for.
    pub x: f64,
    /// `Z(x) = (x ln x)^{1/(1−β)}`.
    pub z: f64,
    pub m: f64,
    pub c: f64,
    /// Largest grid point used in the maximisations; the bounds are checked on the grid only.
    pub grid_max: f64,
}

/// Builds the CIR bounds of `target` for the level `x` at horizon `t`.
///
/// Decreasing class: `−m − by ≤ B(y) ≤ cZ^β + (B(Z)/Z)y`. Increasing class:
/// `−cZ^β + (B(Z)/Z)y ≤ B(y) ≤ m − by`. The constants `m` and `c` are the smallest
/// values satisfying these inequalities on a log grid reaching `100·Z`.
pub fn build_squeeze(target: &SdeSpec, x: f64, t: f64) -> Result<SqueezeSpec> {
    let beta = target.beta;
    if !(beta > 0.0 && beta < 1.0) {
        return Err(Error::domain(format!("the squeeze needs beta in (0, 1), got {beta}")));
    }
    if !(x > std::f64::consts::E) {
        return Err(Error::domain(format!("x must exceed e, got {x}")));
    }
    let b = target.b_limit;
    let z = (x * x.ln()).powf(1.0 / (1.0 - beta));
    let bz = target.drift.eval(z);
    let slope_z = bz / z;
    let grid_max = 100.0 * z;
    let mut ys = vec![0.0];
    let n = 4000;
    let lo = 1e-8f64;
    for i in 0..=n {
        ys.push(lo * (grid_max / lo).powf(i as f64 / n as f64));
    }
    let zb = z.powf(beta);
    let (m, c, lower, upper) = match target.monotone_class {
        MonotoneClass::Decreasing => {
            let m = ys.iter().map(|&y| -target.drift.eval(y) - b * y).fold(0.0, f64::max);
            let c = ys.iter().map(|&y| (target.drift.eval(y) - slope_z * y) / zb).fold(0.0, f64::max);
            (m, c, (-m, b), (c * zb, -slope_z))
        }
        MonotoneClass::Increasing => {
            let m = ys.iter().map(|&y| target.drift.eval(y) + b * y).fold(0.0, f64::max);
            let c = ys.iter().map(|&y| (slope_z * y - target.drift.eval(y)) / zb).fold(0.0, f64::max);
            (m, c, (-c * zb, -slope_z), (m, b))
        }
    };
    let sigma = match target.diffusion.as_power() {
        Some((s, p)) if p == 0.5 => s,
        _ => return Err(Error::domain("the squeeze needs a square-root diffusion")),
    };
    Ok(SqueezeSpec {
        target: target.clone(),
        lower_cir: CirParams { a: lower.0, b: lower.1, sigma, x0: target.x0, t },
        upper_cir: CirParams { a: upper.0, b: upper.1, sigma, x0: target.x0, t },
        monotone_class: target.monotone_class,
        x,
        z,
        m,
        c,
        grid_max,
    })
}

/// CCDF ordering at one level.
#[derive(Debug, Clone, Serialize)]
pub struct OrderingPoint {
    /// Target quantile level defining the test point.
    pub quantile: f64,
    pub level: f64,
    pub lower: CcdfEstimate,
    pub target: CcdfEstimate,
    pub upper: CcdfEstimate,
    /// Exact CCDFs of the bounding CIRs (`None` for a negative drift level).
    pub lower_exact: Option<f64>,
    pub upper_exact: Option<f64>,
    pub pass: bool,
}

/// Log-MGF sandwich at `μ = μ*_t − 1/x`.
#[derive(Debug, Clone, Serialize)]
pub struct SandwichPoint {
    pub x: f64,
    pub mu: f64,
    /// Bounds built for this `x` (`Z = Z(x)`).
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Log-MGF of the target from the fixed-point solver.
    pub fixed_point: f64,
    /// Empirical log-MGF of the simulated target with its effective sample size.
    pub empirical: MgfEstimate,
    /// `ω₁ = lower/x` and `ω₂ = upper/(x |ln(1/x)|^{1/(1−β)})`.
    pub omega1: f64,
    pub omega2: f64,
    pub pass: bool,
}

/// Result of [`squeeze_check`].
#[derive(Debug, Clone, Serialize)]
pub struct SqueezeReport {
    pub spec: SqueezeSpec,
    pub ordering: Vec<OrderingPoint>,
    /// Fraction of coupled paths with `lower ≤ target ≤ upper` violated.
    pub pathwise_violations: f64,
    pub sandwich: Vec<SandwichPoint>,
    pub ordering_pass: bool,
    pub sandwich_pass: bool,
    /// Worst ordering excess in standard errors (positive means violated).
    pub worst_excess: f64,
}

/// Coupled-noise ordering at the target quantiles `quantiles`, plus the log-MGF
/// sandwich at each level in `sandwich_xs` (bounds rebuilt for every level).
pub fn squeeze_check(
    spec: &SqueezeSpec,
    config: &SimConfig,
    quantiles: &[f64],
    sandwich_xs: &[f64],
) -> Result<SqueezeReport> {
    let models: [&dyn SimModel; 3] = [&spec.lower_cir, &spec.target, &spec.upper_cir];
    let paths = simulate_coupled(&models, config)?;
    let viol = paths[0]
        .iter()
        .zip(&paths[1])
        .zip(&paths[2])
        .filter(|((l, t), u)| *l > *t || *t > *u)
        .count() as f64
        / paths[1].len() as f64;
    let e_lo = EmpiricalCcdf::new(&paths[0])?;
    let e_t = EmpiricalCcdf::new(&paths[1])?;
    let e_up = EmpiricalCcdf::new(&paths[2])?;
    let mut ordering = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    for &q in quantiles {
        let level = e_t.quantile(q);
        let (l, t, u) = (e_lo.ccdf(level), e_t.ccdf(level), e_up.ccdf(level));
        let se1 = (l.stderr.powi(2) + t.stderr.powi(2)).sqrt().max(1.0 / l.n as f64);
        let se2 = (t.stderr.powi(2) + u.stderr.powi(2)).sqrt().max(1.0 / t.n as f64);
        let ex1 = (l.p - t.p) / se1;
        let ex2 = (t.p - u.p) / se2;
        worst = worst.max(ex1).max(ex2);
        let exact = |c: &CirParams| if c.a >= 0.0 { cir_exact_ccdf(c, level).ok() } else { None };
        ordering.push(OrderingPoint {
            quantile: q,
            level,
            lower: l,
            target: t,
            upper: u,
            lower_exact: exact(&spec.lower_cir),
            upper_exact: exact(&spec.upper_cir),
            pass: ex1 <= 2.0 && ex2 <= 2.0,
        });
    }
    let t = config.horizon;
    let b = spec.target.b_limit;
    let beta = spec.target.beta;
    let mut sandwich = Vec::new();
    if !sandwich_xs.is_empty() {
        let sigma = spec.lower_cir.sigma;
        if sigma != 1.0 {
            return Err(Error::domain("the sandwich check needs unit volatility"));
        }
        let mu_star = critical_moment(b, 1.0, t)?;
        let xi = (b * t).exp() / (mu_star * mu_star);
        let x_hi = sandwich_xs.iter().cloned().fold(0.0, f64::max);
        let mut fp = FixedPointConfig::new(t);
        fp.x_max = (10.0 * (x_hi / xi)).max(1e6);
        let sol = solve_gamma(&spec.target, &fp)?;
        let last = sol.grid.t_nodes.len() - 1;
        for &x in sandwich_xs {
            let s = build_squeeze(&spec.target, x, t)?;
            let mu = mu_star - 1.0 / x;
            let lower = cir_log_mgf(&s.lower_cir, mu)?;
            let upper = cir_log_mgf(&s.upper_cir, mu)?;
            let fixed_point = sol.gamma_interp(last, x / xi - mu_star)?;
            let empirical = empirical_log_mgf(&paths[1], mu)?;
            let pass = lower <= fixed_point && fixed_point <= upper;
            sandwich.push(SandwichPoint {
                x,
                mu,
                lower_bound: lower,
                upper_bound: upper,
                fixed_point,
                empirical,
                omega1: lower / x,
                omega2: upper / (x * x.ln().powf(1.0 / (1.0 - beta))),
                pass,
            });
        }
    }
    Ok(SqueezeReport {
        spec: spec.clone(),
        ordering_pass: ordering.iter().all(|o| o.pass),
        sandwich_pass: sandwich.iter().all(|s| s.pass),
        ordering,
        pathwise_violations: viol,
        sandwich,
        worst_excess: worst,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::Diffusion;

    #[test]
    fn zero_diffusion_follows_the_ode() {
        let mut spec = SdeSpec::power_drift(0.0, 1.0, 0.0, 0.0, 1.0);
        spec.diffusion = Diffusion::Constant { sigma: 0.0 };
        let cfg = SimConfig::new(4, 10_000, 1.0, 1);
        let r = simulate(&spec, &cfg).unwrap();
        for s in r.samples {
            assert!((s - (-1.0f64).exp()).abs() < 1e-4);
        }
    }

    #[test]
    fn same_seed_same_samples() {
        let cir = CirParams::new(0.4, 1.0, 1.0, 0.5, 1.0).unwrap();
        let cfg = SimConfig::new(500, 50, 1.0, 7);
        let a = simulate(&cir, &cfg).unwrap().samples;
        let b = simulate(&cir, &cfg).unwrap().samples;
        assert!(a.iter().zip(&b).all(|(x, y)| x.to_bits() == y.to_bits()));
        let c = simulate(&cir, &SimConfig { seed: 8, ..cfg }).unwrap().samples;
        assert_ne!(a, c);
    }

    #[test]
    fn estimator_trivial_cases() {
        let s = [0.3, 1.2, 5.0];
        assert_eq!(empirical_log_mgf(&s, 0.0).unwrap().value, 0.0);
        let c = [2.5; 10];
        assert_eq!(empirical_log_mgf(&c, 0.7).unwrap().value, 0.7 * 2.5);
        let e = empirical_ccdf(&s, 10.0).unwrap();
        assert_eq!(e.p, 0.0);
        assert_eq!(e.lo, 0.0);
        assert!(e.hi > 0.0);
        assert_eq!(empirical_ccdf(&s, 1.2).unwrap().count, 2);
    }

    #[test]
    fn degenerate_squeeze_collapses() {
        let spec = SdeSpec::power_drift(0.0, 1.0, 0.0, 0.5, 0.5);
        // c = 0 with beta in (0, 1): the drift is CIR itself
        let sq = build_squeeze(&spec, 100.0, 1.0).unwrap();
        assert_eq!(sq.m, 0.0);
        assert_eq!(sq.c, 0.0);
        assert_eq!(sq.lower_cir.a, 0.0);
        assert_eq!(sq.upper_cir.b, 1.0);
        let r = squeeze_check(&sq, &SimConfig::new(2000, 50, 1.0, 3), &[0.1, 0.5, 0.9], &[]).unwrap();
        assert_eq!(r.pathwise_violations, 0.0);
        assert!(r.ordering_pass);
    }

    #[test]
    fn power_drift_squeeze_constant() {
        let spec = SdeSpec::power_drift(0.0, 1.0, 1.0, 1.0 / 3.0, 0.5);
        let sq = build_squeeze(&spec, 1e3, 1.0).unwrap();
        let exact = 2.0 / 3f64.powf(1.5);
        assert!((sq.c / exact - 1.0).abs() < 1e-3, "{}", sq.c);
        assert!(sq.upper_cir.b < 1.0);
    }
}
