//! Acceptance suite: each criterion runs at its full size and tolerance and
//! yields a [`CriterionResult`] with a one-line verdict and JSON details.

use std::sync::Arc;
use std::time::Instant;

use serde::Serialize;
use serde_json::{json, Value};

use crate::cev::{
    cev_ccdf, cev_ccdf_fixed_point, compare_with_fixed_point, nu_coefficients, nu_coefficients_exact, CevParams,
};
use crate::error::{Error, Result};
use crate::fixedpoint::{omega_tau, solve_gamma, FixedPointConfig, PowerDriftParams};
use crate::legendre::{build_legendre, check_pstar_envelope, fit_envelope};
use crate::models::{cir_log_mgf, inverse_critical_moment, slope, CirParams, SdeSpec};
use crate::montecarlo::{build_squeeze, empirical_log_mgf, simulate, squeeze_check, EmpiricalCcdf, SimConfig};
use crate::tauberian::{ccdf_expansion, laplace_integral, ChiKernel, Order, Weight};

/// Identifier, short name and runtime budget (seconds) of every criterion.
pub const CRITERIA: [(u8, &str, Option<f64>); 10] = [
    (1, "CIR closed-form log-MGF vs Monte Carlo", Some(60.0)),
    (2, "Tauberian CCDF vs exact CIR law", Some(10.0)),
    (3, "Laplace-integral asymptotics", Some(10.0)),
    (4, "Legendre machinery", Some(5.0)),
    (5, "Fixed-point exactness on CIR", Some(30.0)),
    (6, "Power-drift tail law", Some(60.0)),
    (7, "CEV series cross-validation", Some(120.0)),
    (8, "CEV tail vs Monte Carlo", Some(600.0)),
    (9, "Squeeze verification", Some(120.0)),
    (10, "Determinism of CLI output", None),
];

/// Criteria whose failure is understood and recorded in the README: the CEV
/// series omits an `O(1)` drift contribution, so its error does not decay.
pub const KNOWN_FAILURES: [u8; 2] = [7, 8];

/// The CIR reference process used throughout the suite.
pub fn reference_cir() -> CirParams {
    CirParams { a: 0.4, b: 1.0, sigma: 1.0, x0: 0.5, t: 1.0 }
}

/// The CEV process (`p = 0.75`) used by the CEV criteria.
pub fn reference_cev() -> CevParams {
    CevParams { a: 0.3, b: 1.0, sigma: 0.5, v0: 0.5, p: 0.75, lambda: 0.5 }
}

#[derive(Debug, Clone)]
pub struct AcceptConfig {
    pub seed: u64,
    /// Directory for the determinism check's scratch files.
    pub scratch: Option<std::path::PathBuf>,
}

impl Default for AcceptConfig {
    fn default() -> Self {
        AcceptConfig { seed: 20240601, scratch: None }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub pass: bool,
    /// Whether a failure of this criterion is documented as expected.
    pub known_failure: bool,
    pub summary: String,
    pub elapsed_secs: f64,
    pub budget_secs: Option<f64>,
    pub details: Value,
}

impl CriterionResult {
    /// `PASS`/`FAIL` line for terminal output.
    pub fn line(&self) -> String {
        let budget = self.budget_secs.map(|b| format!(" / {b:.0} s")).unwrap_or_default();
        let tag = match (self.pass, self.known_failure) {
            (true, _) => "PASS",
            (false, true) => "FAIL (known)",
            (false, false) => "FAIL",
        };
        format!(
            "{tag} criterion {:>2}: {} [{:.1} s{budget}] {}",
            self.id, self.name, self.elapsed_secs, self.summary
        )
    }
}

/// Runs one criterion; errors inside the check are reported as a failure.
pub fn run_criterion(id: u8, cfg: &AcceptConfig) -> Result<CriterionResult> {
    let &(_, name, budget) = CRITERIA
        .iter()
        .find(|c| c.0 == id)
        .ok_or_else(|| Error::spec("criterion", format!("unknown criterion {id}")))?;
    let start = Instant::now();
    let outcome = match id {
        1 => c1_cir_mgf(cfg),
        2 => c2_tauberian(),
        3 => c3_laplace(),
        4 => c4_legendre(),
        5 => c5_fixed_point_cir(),
        6 => c6_power_drift(),
        7 => c7_cev_series(),
        8 => c8_cev_tail(cfg),
        9 => c9_squeeze(cfg),
        _ => c10_determinism(cfg),
    };
    let elapsed = start.elapsed().as_secs_f64();
    let (pass, summary, details) = match outcome {
        Ok(o) => o,
        Err(e) => (false, format!("error: {e}"), Value::Null),
    };
    let within = budget.map_or(true, |b| elapsed <= b);
    let summary = if within { summary } else { format!("{summary}; over the runtime budget") };
    Ok(CriterionResult {
        id,
        name: name.to_string(),
        pass: pass && within,
        known_failure: KNOWN_FAILURES.contains(&id),
        summary,
        elapsed_secs: elapsed,
        budget_secs: budget,
        details,
    })
}

/// Runs the listed criteria in order, printing each line as it completes when `echo` is set.
pub fn run_suite(ids: &[u8], cfg: &AcceptConfig, echo: bool) -> Result<Vec<CriterionResult>> {
    let mut out = Vec::with_capacity(ids.len());
    for &id in ids {
        let r = run_criterion(id, cfg)?;
        if echo {
            println!("{}", r.line());
        }
        out.push(r);
    }
    Ok(out)
}

type Outcome = Result<(bool, String, Value)>;

fn rel(a: f64, b: f64) -> f64 {
    (a / b - 1.0).abs()
}

fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo * (hi / lo).powf(i as f64 / (n - 1) as f64)).collect()
}

fn c1_cir_mgf(cfg: &AcceptConfig) -> Outcome {
    let cir = reference_cir();
    let sim = simulate(&cir, &SimConfig::new(1_000_000, 1000, cir.t, cfg.seed))?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    for f in [0.25, 0.5, 0.75] {
        let mu = f * cir.mu_star();
        let e = empirical_log_mgf(&sim.samples, mu)?;
        let exact = cir_log_mgf(&cir, mu)?;
        let z = (e.value - exact) / e.stderr;
        pass &= z.abs() <= 3.0;
        worst = worst.max(z.abs());
        rows.push(json!({"fraction": f, "mu": mu, "exact": exact, "empirical": e.value,
            "stderr": e.stderr, "z": z, "ess": e.ess}));
    }
    Ok((pass, format!("max |z| = {worst:.2} (limit 3)"), json!({"points": rows, "flagged": sim.flagged})))
}

fn c2_tauberian() -> Outcome {
    let cir = reference_cir();
    let data = build_legendre(Arc::new(cir), (1.0, 1e6))?;
    let xs = log_grid(1.0, 1e6, 61);
    let lead = ccdf_expansion(&data, &xs, Order::Leading)?;
    let refd = ccdf_expansion(&data, &xs, Order::Refined)?;
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut last = None;
    for (l, r) in lead.points.iter().zip(&refd.points) {
        if l.reliability < 100.0 {
            continue;
        }
        let exact = cir.exact_log_ccdf(l.x)?;
        let el = ((l.log_estimate - exact).exp() - 1.0).abs();
        let er = ((r.log_estimate - exact).exp() - 1.0).abs();
        pass &= el <= 0.10;
        worst = worst.max(el);
        rows.push(json!({"x": l.x, "reliability": l.reliability, "log_exact": exact,
            "leading_error": el, "refined_error": er}));
        last = Some((l.x, el, er));
    }
    let Some((x_top, el, er)) = last else {
        return Ok((false, "no point with x²p*′ ≥ 100".into(), Value::Null));
    };
    let cut = el / er;
    pass &= cut >= 2.0;
    Ok((
        pass,
        format!("max leading |ratio−1| = {worst:.2e} over {} points; refined cut at x = {x_top:.0e}: {cut:.1}x", rows.len()),
        json!({"points": rows, "refined_cut": cut}),
    ))
}

fn c3_laplace() -> Outcome {
    let cir = reference_cir();
    let data = build_legendre(Arc::new(cir), (1.0, 1e12))?;
    let xs = log_grid(1e8, 1e11, 7);
    let weights = [("1", 0.0), ("z", 1.0), ("z^(1/3)", 1.0 / 3.0)];
    let mut rows = Vec::new();
    let mut pass = true;
    let mut worst = 0.0f64;
    let mut worst_cut = f64::INFINITY;
    for &x in &xs {
        let k = ChiKernel::new(&data, x)?;
        if k.p_star_prime * x * x < 1e4 {
            continue;
        }
        for (label, g) in weights {
            let r = laplace_integral(&Weight::Power(g), &k, Order::Refined, 1.0)?;
            let el = (r.quadrature / r.leading - 1.0).abs();
            let er = (r.quadrature / r.refined - 1.0).abs();
            pass &= el <= 0.02;
            worst = worst.max(el);
            // the refined factor is identically one for g ≡ 1 at α = 1, so the cut applies to the other weights
            let cut = if r.refined == r.leading { None } else { Some(el / er) };
            if let Some(c) = cut {
                pass &= c >= 5.0;
                worst_cut = worst_cut.min(c);
            }
            rows.push(json!({"x": x, "weight": label, "reliability": r.reliability, "quadrature": r.quadrature,
                "leading": r.leading, "refined": r.refined, "leading_error": el, "refined_error": er, "cut": cut}));
        }
    }
    if rows.is_empty() {
        return Ok((false, "no point with x²p*′ ≥ 10⁴".into(), Value::Null));
    }
    Ok((
        pass,
        format!("max leading |ratio−1| = {worst:.2e}; smallest refined cut {worst_cut:.1}x"),
        json!({"points": rows}),
    ))
}

fn c4_legendre() -> Outcome {
    let cir = reference_cir();
    let m = cir.mu_star();
    // biconjugation at 50 tilts spread over (0, μ*)
    let tilts: Vec<f64> = (1..=50).map(|i| m * i as f64 / 51.0).collect();
    // the slope image starts at the mean, Λ′(0)
    let x_lo = (cir.log_mgf_d1_gap(m - tilts[0]) * 0.5).max(cir.mean() * (1.0 + 1e-9));
    let x_hi = cir.log_mgf_d1_gap(m - tilts[49]) * 2.0;
    let data = build_legendre(Arc::new(cir), (x_lo, x_hi))?;
    let mut worst_bi = 0.0f64;
    for &p in &tilts {
        let bi = data.biconjugate(p, x_lo, x_hi)?;
        worst_bi = worst_bi.max(rel(bi, cir_log_mgf(&cir, p)?));
    }
    // closed-form conjugate of the a = 0 process against the numeric root
    let cir0 = CirParams { a: 0.0, ..cir };
    let d0 = build_legendre(Arc::new(cir0), (1.0, 1e6))?;
    let mut worst_cf = 0.0f64;
    for x in log_grid(1.0, 1e6, 25) {
        let g_closed = d0.gap(x)?;
        let g_num = d0.solve_gap(x, true)?;
        let ls_closed = d0.lambda_star(x)?;
        let ls_num = (m - g_num) * x - cir0.log_mgf_gap(g_num);
        worst_cf = worst_cf.max(rel(g_num, g_closed)).max(rel(ls_num, ls_closed));
    }
    // envelope and p*′ bracket
    let xs: Vec<f64> = (2..=6).map(|e| 10f64.powi(e)).collect();
    let env_data = build_legendre(Arc::new(cir), (1.0, 1e6))?;
    let env = fit_envelope(&cir, 1.0, 1.0, 1e-2 * m);
    let report = check_pstar_envelope(&env_data, &env, &xs)?;
    let pass = worst_bi <= 1e-8
        && worst_cf <= 1e-10
        && report.bounds_hold
        && report.bracket_holds
        && report.exponents_admissible;
    Ok((
        pass,
        format!(
            "biconjugate {worst_bi:.1e} (≤1e-8); closed form vs numeric {worst_cf:.1e} (≤1e-10); envelope slack {:.3}, bracket {}",
            report.worst_slack, report.bracket_holds
        ),
        json!({"biconjugate_max_rel": worst_bi, "closed_form_max_rel": worst_cf, "envelope": report}),
    ))
}

fn c5_fixed_point_cir() -> Outcome {
    let cir = reference_cir();
    let spec = SdeSpec::power_drift(cir.a, cir.b, 0.0, 0.0, cir.x0);
    let cfg = FixedPointConfig::new(cir.t);
    let sol = solve_gamma(&spec, &cfg)?;
    let mut worst = 0.0f64;
    for (i, &t) in sol.grid.t_nodes.iter().enumerate() {
        let inv = inverse_critical_moment(cir.b, 1.0, t);
        for (j, &x) in sol.grid.x_nodes.iter().enumerate() {
            let exact = (2.0 * cir.b + x) * cir.x0 + 2.0 * cir.a * (cir.b * t + (x * inv).ln_1p());
            worst = worst.max(rel(sol.gamma_at(i, j), exact));
        }
    }
    // the closed form above is the CIR log-MGF at the grid tilt
    let mut worst_mgf = 0.0f64;
    for (i, &t) in sol.grid.t_nodes.iter().enumerate().filter(|(_, &t)| t >= 0.05) {
        let c = CirParams { t, ..cir };
        for j in (0..sol.grid.x_nodes.len()).step_by(8) {
            worst_mgf = worst_mgf.max(rel(sol.gamma_at(i, j), cir_log_mgf(&c, sol.tilt(i, j))?));
        }
    }
    let h = &sol.residual_history;
    let geometric = h.windows(2).all(|w| w[1] <= w[0]);
    let contraction = sol.contraction;
    // a single correction step can reach the tolerance at once; the estimate then reads as zero
    let c_ok = contraction.map_or(h.len() <= 2 && h.last().map_or(true, |&r| r <= cfg.tol), |c| c <= 0.9);
    let pass = worst <= 1e-6 && worst_mgf <= 1e-6 && geometric && c_ok;
    Ok((
        pass,
        format!(
            "max rel error {worst:.1e} on {}x{} grid, vs log-MGF {worst_mgf:.1e}; {} iterations, contraction {}",
            sol.grid.t_nodes.len(),
            sol.grid.x_nodes.len(),
            sol.iterations,
            contraction.map_or("n/a (converged immediately)".into(), |c| format!("{c:.3}"))
        ),
        json!({"max_rel_grid": worst, "max_rel_log_mgf": worst_mgf, "residuals": h,
            "contraction": contraction, "m_threshold": sol.m_threshold}),
    ))
}

fn c6_power_drift() -> Outcome {
    let beta = 1.0 / 3.0;
    let (b, x0, t) = (1.0, 0.5, 3.0);
    let spec = SdeSpec::power_drift(0.0, b, 1.0, beta, x0);
    let mut cfg = FixedPointConfig::new(t);
    cfg.x_max = 1e7;
    let sol = solve_gamma(&spec, &cfg)?;
    let xs = &sol.grid.x_nodes;
    let r = sol.grid.last_row();
    let n = xs.len();
    // R̃ = R/X₀ against y = x + 2b over the top quarter of the grid
    let k = n / 4;
    let pts: Vec<(f64, f64)> = (n - 1 - k..n).map(|j| ((xs[j] + 2.0 * b).ln(), (r[j] / x0).ln())).collect();
    let fitted = slope(&pts);
    let tau = (b * beta * t).exp();
    let w = omega_tau(beta, &PowerDriftParams { c: 1.0, b, sigma: 1.0, x0 }, tau)?;
    let coef = r[n - 1] / x0 / (xs[n - 1] + 2.0 * b).powf(2.0 * beta);
    let ratio = coef / w;
    let pass = (fitted - 2.0 * beta).abs() <= 0.05 && (ratio - 1.0).abs() <= 0.05;
    Ok((
        pass,
        format!("exponent {fitted:.4} (target {:.4} ± 0.05); coefficient / ω_τ = {ratio:.4}", 2.0 * beta),
        json!({"slope": fitted, "coefficient": coef, "omega_tau": w, "ratio": ratio,
            "m_threshold": sol.m_threshold, "iterations": sol.iterations, "contraction": sol.contraction}),
    ))
}

fn c7_cev_series() -> Outcome {
    let mut worst = 0.0f64;
    let mut rows = Vec::new();
    for (num, den) in [(1i64, 2i64), (4, 3), (3, 2)] {
        let exact = nu_coefficients_exact(num, den, 10)?;
        let float = nu_coefficients(num as f64 / den as f64, 10)?;
        for (i, (e, f)) in exact.iter().zip(&float.nu).enumerate() {
            let ev = rational_to_f64(e);
            let err = (f - ev).abs() / ev.abs().max(1e-300);
            let err = if ev == 0.0 { f.abs() } else { err };
            worst = worst.max(err);
            rows.push(json!({"lambda": format!("{num}/{den}"), "i": i + 1, "exact": e.to_string(), "float": f}));
        }
    }
    let nu2_32 = nu_coefficients_exact(3, 2, 2)?[1].to_string();
    let nu2_43 = nu_coefficients_exact(4, 3, 2)?[1].to_string();
    let nu_ok = worst <= 1e-12 && nu2_32 == "2/81" && nu2_43 == "0";

    let p = reference_cev();
    let mut cfg = FixedPointConfig::new(1.0);
    cfg.x_max = 1e6;
    let cmp = compare_with_fixed_point(&p, 1.0, 10, &cfg, 1.0)?;
    let slope_ok = (cmp.slope - cmp.expected_slope).abs() <= 0.15;
    Ok((
        nu_ok && slope_ok,
        format!(
            "ν exact vs float max rel {worst:.1e}, ν₂(3/2) = {nu2_32}, ν₂(4/3) = {nu2_43}; \
             slope of |Δ̂ − Γ| = {:.3} (target {:.3} ± 0.15), Δ̂ − Γ → {:.3}",
            cmp.slope, cmp.expected_slope, cmp.offset
        ),
        json!({"nu": rows, "nu_max_rel": worst, "comparison": {
            "slope": cmp.slope, "expected_slope": cmp.expected_slope, "offset": cmp.offset,
            "slope_after_offset": cmp.slope_after_offset, "fit_range": cmp.fit_range,
            "m_threshold": cmp.m_threshold, "iterations": cmp.iterations, "contraction": cmp.contraction,
            "points": cmp.points.iter().step_by(10).collect::<Vec<_>>()}}),
    ))
}

fn rational_to_f64(r: &num_rational::BigRational) -> f64 {
    use num_traits::ToPrimitive;
    r.to_f64().unwrap_or(f64::NAN)
}

fn c8_cev_tail(cfg: &AcceptConfig) -> Outcome {
    let p = reference_cev();
    let t = 1.0;
    let n = 10_000_000;
    let xs: Vec<f64> = (0..30).map(|i| 0.45 + 0.1 * i as f64).collect();
    let tail = cev_ccdf(&p, t, &xs, Order::Refined, 10)?;
    let mut fp_cfg = FixedPointConfig::new(t);
    fp_cfg.m_threshold = Some(1.0);
    fp_cfg.x_max = 1e5;
    fp_cfg.tol = 1e-8;
    // cross-check only: the fixed-point log-MGF covers slopes above ≈ 0.48, so the lowest level is skipped
    let fp_xs = &xs[1..];
    let fp_tail = cev_ccdf_fixed_point(&p, t, fp_xs, Order::Refined, &fp_cfg).ok();
    let sim = simulate(&p, &SimConfig::new(n, 1000, t, cfg.seed))?;
    let u: Vec<f64> = sim.samples.iter().map(|v| v.powf(p.lambda)).collect();
    drop(sim);
    let emp = EmpiricalCcdf::new(&u)?;
    let mut rows = Vec::new();
    let (mut ccdf_ok, mut markov_ok) = (true, true);
    let (mut compared, mut worst_z, mut worst_markov) = (0, 0.0f64, f64::NEG_INFINITY);
    for (k, pt) in tail.expansion.points.iter().enumerate() {
        let c = emp.ccdf(pt.x);
        let se_model = (pt.estimate * (1.0 - pt.estimate) / n as f64).sqrt();
        let se = c.stderr.max(se_model).max(1.0 / n as f64);
        let z = (c.p - pt.estimate) / se;
        let checked = pt.estimate >= 1e-5;
        if checked {
            compared += 1;
            worst_z = worst_z.max(z.abs());
            ccdf_ok &= z.abs() <= 3.0;
        }
        let markov = (-pt.lambda_star).exp();
        let excess = (c.p - markov) / c.stderr.max(1.0 / n as f64);
        worst_markov = worst_markov.max(excess);
        markov_ok &= c.p <= markov + 3.0 * c.stderr;
        let fp = fp_tail.as_ref().and_then(|f| k.checked_sub(1).map(|i| f.expansion.points[i].estimate));
        rows.push(json!({"x": pt.x, "predicted": pt.estimate, "empirical": c.p, "stderr": se, "z": z,
            "checked": checked, "markov": markov, "fixed_point_tail": fp}));
    }
    let pass = ccdf_ok && markov_ok && compared > 0;
    Ok((
        pass,
        format!(
            "{compared} levels with predicted ≥ 1e-5, max |z| = {worst_z:.1}; worst Markov excess {worst_markov:.1} stderr"
        ),
        json!({"points": rows, "n_paths": n}),
    ))
}

fn c9_squeeze(cfg: &AcceptConfig) -> Outcome {
    let spec = SdeSpec::power_drift(0.0, 1.0, 1.0, 1.0 / 3.0, 0.5);
    let sq = build_squeeze(&spec, 1e3, 1.0)?;
    let deciles: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let rep = squeeze_check(&sq, &SimConfig::new(200_000, 1000, 1.0, cfg.seed), &deciles, &[1e2, 1e3])?;
    let pass = rep.ordering_pass && rep.sandwich_pass;
    let sand: Vec<String> = rep
        .sandwich
        .iter()
        .map(|s| format!("x={:.0}: {:.1} ≤ {:.1} ≤ {:.1}", s.x, s.lower_bound, s.fixed_point, s.upper_bound))
        .collect();
    Ok((
        pass,
        format!(
            "ordering worst excess {:.2} stderr (≤2), {} pathwise violations; sandwich {}",
            rep.worst_excess,
            rep.pathwise_violations,
            sand.join(", ")
        ),
        serde_json::to_value(&rep)?,
    ))
}

fn c10_determinism(cfg: &AcceptConfig) -> Outcome {
    let dir = match &cfg.scratch {
        Some(d) => d.clone(),
        None => std::env::temp_dir().join(format!("moment-tails-accept-{}", std::process::id())),
    };
    std::fs::create_dir_all(&dir)?;
    let model = dir.join("cir.json");
    std::fs::write(&model, r#"{"type": "cir", "a": 0.4, "b": 1.0, "sigma": 1.0, "x0": 0.5, "t": 1.0}"#)?;
    let m = model.to_string_lossy().to_string();
    let commands: Vec<Vec<String>> = vec![
        vec!["cir-ccdf".into(), "--model".into(), m.clone(), "--x".into(), "0.5,1,2,5".into()],
        vec!["tail".into(), "--model".into(), m.clone(), "--x".into(), "10,100,1000".into(), "--order".into(), "refined".into()],
        vec!["legendre".into(), "--model".into(), m.clone(), "--x".into(), "2,20,200".into()],
        vec!["cev".into(), "--a".into(), "0.3".into(), "--b".into(), "1".into(), "--sigma".into(), "0.5".into(),
            "--v0".into(), "0.5".into(), "--p".into(), "0.75".into(), "--t".into(), "1".into(), "--x".into(), "1,2,4".into()],
        vec!["mc".into(), "--model".into(), m.clone(), "--paths".into(), "20000".into(), "--steps".into(), "100".into(),
            "--mu-fractions".into(), "0.25,0.5".into(), "--seed".into(), cfg.seed.to_string()],
    ];
    let mut rows = Vec::new();
    let mut pass = true;
    for (k, cmd) in commands.iter().enumerate() {
        let first = dir.join(format!("run{k}.csv"));
        let second = dir.join(format!("replay{k}.csv"));
        let mut args = vec!["moment-tails".to_string()];
        args.extend(cmd.iter().cloned());
        args.extend(["--out".to_string(), first.to_string_lossy().to_string()]);
        let code1 = crate::cli::run(&args);
        let manifest = crate::cli::manifest_path(&first);
        let code2 = crate::cli::run(&[
            "moment-tails".to_string(),
            "replay".to_string(),
            "--manifest".to_string(),
            manifest.to_string_lossy().to_string(),
            "--out".to_string(),
            second.to_string_lossy().to_string(),
        ]);
        let same = code1 == 0 && code2 == 0 && std::fs::read(&first)? == std::fs::read(&second)?;
        pass &= same;
        rows.push(json!({"command": cmd[0], "exit_codes": [code1, code2], "identical": same}));
    }
    if cfg.scratch.is_none() {
        let _ = std::fs::remove_dir_all(&dir);
    }
    Ok((pass, format!("{} commands replayed from their manifests, identical: {pass}", commands.len()), json!({"runs": rows})))
}
