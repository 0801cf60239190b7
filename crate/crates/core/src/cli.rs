//! Command-line front end.
//!
//! Every table is written as CSV whose first line is `# manifest: {...}`. The
//! manifest holds the fully resolved command (model spec inlined), so
//! `replay --manifest` regenerates the table bit for bit. With `--out`, a
//! sidecar `<out>.json` carries the manifest plus timing, output paths and
//! nested diagnostics.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::acceptance::{run_suite, AcceptConfig, CRITERIA};
use crate::cev::{cev_ccdf, CevLogMgf, CevParams};
use crate::error::{Error, Result};
use crate::fixedpoint::{solve_gamma, FixedPointConfig};
use crate::legendre::{build_legendre, LogMgf};
use crate::models::{cir_log_mgf, critical_moment, CirParams, ModelKind, ModelSpec, SdeSpec};
use crate::montecarlo::{
    build_squeeze, empirical_log_mgf, simulate, squeeze_check, EmpiricalCcdf, Scheme, SimConfig, SimModel,
};
use crate::tauberian::{ccdf_expansion, tilt_ratio, Order, Weight};

/// Environment variable holding the default worker-thread count.
pub const THREADS_ENV: &str = "MOMENT_TAILS_THREADS";

#[derive(Parser, Debug)]
#[command(name = "moment-tails", version, about = "Moment explosion and tail asymptotics for square-root SDEs")]
struct Cli {
    /// Worker threads (defaults to $MOMENT_TAILS_THREADS, then to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// CSV destination; the table goes to stdout when omitted.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "command", content = "args", rename_all = "kebab-case")]
enum Command {
    /// Critical moment μ*_t = 2b/(σ²(1 − e^{−bt})).
    CriticalMoment(CriticalMomentArgs),
    /// Closed-form CIR log-MGF.
    CirMgf(CirMgfArgs),
    /// Exact CIR CCDF (noncentral chi-squared).
    CirCcdf(LevelArgs),
    /// Fenchel-Legendre table (x, p*, p*', Λ*).
    Legendre(LevelArgs),
    /// CCDF tail expansion.
    Tail(TailArgs),
    /// Tilted expectation ratio E[g(X)e^{pX}]/E[e^{pX}] for g(y) = y^γ.
    TiltRatio(TiltArgs),
    /// Fixed-point log-MGF for a square-root SDE with nonlinear drift.
    FixedPoint(FixedPointArgs),
    /// CEV log-MGF series and tail.
    Cev(CevArgs),
    /// Monte Carlo log-MGF and CCDF estimates.
    Mc(McArgs),
    /// CIR squeeze of a nonlinear-drift model.
    Squeeze(SqueezeArgs),
    /// Acceptance suite.
    Accept(AcceptArgs),
    /// Re-run the command recorded in a manifest.
    #[serde(skip)]
    Replay(ReplayArgs),
}

/// Model given as a JSON file; after resolution the spec is stored inline.
#[derive(Args, Debug, Clone, Serialize, Deserialize, Default)]
struct ModelArg {
    /// JSON model spec ({"type": "cir"|"cev"|"custom", ...}).
    #[arg(long = "model", value_name = "FILE")]
    #[serde(skip)]
    path: Option<PathBuf>,
    #[arg(skip)]
    spec: Option<ModelSpec>,
}

impl ModelArg {
    fn resolve(&mut self) -> Result<()> {
        if self.spec.is_none() {
            let path = self.path.as_ref().ok_or_else(|| Error::spec("model", "missing --model"))?;
            let text = std::fs::read_to_string(path)
                .map_err(|e| Error::spec("model", format!("cannot read {}: {e}", path.display())))?;
            self.spec = Some(ModelSpec::from_json(&text)?);
        }
        Ok(())
    }

    fn spec(&self) -> &ModelSpec {
        self.spec.as_ref().expect("model resolved before dispatch")
    }
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CriticalMomentArgs {
    #[arg(long)]
    b: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    t: f64,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CirMgfArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Tilts μ.
    #[arg(long, value_delimiter = ',')]
    mu: Vec<f64>,
    /// Tilts as fractions of μ*.
    #[arg(long, value_delimiter = ',')]
    mu_fractions: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct LevelArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    /// Series depth for CEV models.
    #[arg(long, default_value_t = 10)]
    n_terms: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct TailArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, default_value = "leading")]
    order: Order,
    #[arg(long, default_value_t = 10)]
    n_terms: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct TiltArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, value_delimiter = ',', required = true)]
    x: Vec<f64>,
    /// Exponent γ of the weight g(y) = y^γ.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 10)]
    n_terms: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct FixedPointArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Lower edge M of the state grid (automatic when omitted).
    #[arg(long)]
    m: Option<f64>,
    #[arg(long, default_value_t = 1e6)]
    x_max: f64,
    #[arg(long, default_value_t = 161)]
    n_x: usize,
    #[arg(long, default_value_t = 1e-10)]
    tol: f64,
    #[arg(long, default_value_t = 50)]
    max_iter: usize,
    #[arg(long, default_value = "leading")]
    order: Order,
    /// Only emit the final time slice.
    #[arg(long)]
    last_only: bool,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct CevArgs {
    #[arg(long)]
    p: f64,
    #[arg(long)]
    a: f64,
    #[arg(long)]
    b: f64,
    #[arg(long)]
    sigma: f64,
    #[arg(long)]
    v0: f64,
    #[arg(long)]
    t: f64,
    /// Levels x: Δ̂ is evaluated at x = 1/(μ* − μ), the CCDF at P(V^λ ≥ x).
    #[arg(long, alias = "x-grid", value_delimiter = ',', required = true)]
    x: Vec<f64>,
    #[arg(long, default_value = "refined")]
    order: Order,
    #[arg(long, default_value_t = 10)]
    n_terms: usize,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct McArgs {
    #[command(flatten)]
    model: ModelArg,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, default_value = "full-truncation")]
    scheme: Scheme,
    /// Tilts as fractions of μ* for log-MGF rows.
    #[arg(long, value_delimiter = ',')]
    mu_fractions: Vec<f64>,
    /// Levels for CCDF rows.
    #[arg(long, value_delimiter = ',')]
    x: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct SqueezeArgs {
    #[command(flatten)]
    model: ModelArg,
    /// Level x defining Z(x).
    #[arg(long, default_value_t = 1e3)]
    level: f64,
    #[arg(long, default_value_t = 100_000)]
    paths: usize,
    #[arg(long, default_value_t = 1000)]
    steps: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Levels for the log-MGF sandwich.
    #[arg(long, value_delimiter = ',', default_value = "100,1000")]
    sandwich_x: Vec<f64>,
}

#[derive(Args, Debug, Clone, Serialize, Deserialize)]
struct AcceptArgs {
    #[arg(long, default_value = "primary")]
    suite: String,
    /// Subset of criteria (all when omitted).
    #[arg(long, value_delimiter = ',')]
    criteria: Vec<u8>,
    #[arg(long, default_value_t = AcceptConfig::default().seed)]
    seed: u64,
}

#[derive(Args, Debug, Clone)]
struct ReplayArgs {
    /// Sidecar JSON or CSV carrying a `# manifest:` line.
    #[arg(long)]
    manifest: PathBuf,
}

/// Deterministic part of the run manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct Manifest {
    tool: String,
    version: String,
    #[serde(flatten)]
    command: Command,
}

/// Table and diagnostics produced by a command.
struct Output {
    header: Vec<&'static str>,
    rows: Vec<Vec<String>>,
    diagnostics: Value,
    /// Printed to stdout in addition to the table.
    message: Option<String>,
    /// Exit code when the command itself ran (nonzero for failed checks).
    status: i32,
}

impl Output {
    fn table(header: Vec<&'static str>, rows: Vec<Vec<String>>) -> Self {
        Output { header, rows, diagnostics: Value::Null, message: None, status: 0 }
    }
}

/// Path of the JSON sidecar written next to `csv`.
pub fn manifest_path(csv: &Path) -> PathBuf {
    let mut s = csv.as_os_str().to_os_string();
    s.push(".json");
    PathBuf::from(s)
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn run(args: &[String]) -> i32 {
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn configure_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var(THREADS_ENV) {
            Ok(v) => Some(v.parse().map_err(|_| Error::spec(THREADS_ENV, format!("not a thread count: {v}")))?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        // a second configuration in the same process (tests, replay) keeps the first pool
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    configure_threads(cli.threads)?;
    let command = match cli.command {
        Command::Replay(r) => load_manifest(&r.manifest)?,
        c => c,
    };
    let mut command = command;
    resolve(&mut command)?;
    let manifest = Manifest {
        tool: env!("CARGO_PKG_NAME").to_string(),
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: command.clone(),
    };
    let start = Instant::now();
    let out = dispatch(&command)?;
    let elapsed = start.elapsed().as_secs_f64();

    let manifest_json = serde_json::to_string(&manifest)?;
    let csv = render_csv(&manifest_json, &out);
    if let Some(msg) = &out.message {
        println!("{msg}");
    }
    match &cli.out {
        Some(path) => {
            write_atomic(path, csv.as_bytes())?;
            let side = json!({
                "manifest": manifest,
                "timing_secs": elapsed,
                "outputs": [path.to_string_lossy(), manifest_path(path).to_string_lossy()],
                "diagnostics": out.diagnostics,
            });
            write_atomic(&manifest_path(path), serde_json::to_string_pretty(&side)?.as_bytes())?;
        }
        // the bare value is the whole answer for critical-moment
        None if matches!(command, Command::CriticalMoment(_)) => {}
        None => print!("{csv}"),
    }
    Ok(out.status)
}

fn load_manifest(path: &Path) -> Result<Command> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::spec("manifest", format!("cannot read {}: {e}", path.display())))?;
    let value: Value = if let Some(rest) = text.strip_prefix("# manifest: ") {
        serde_json::from_str(rest.lines().next().unwrap_or(""))?
    } else {
        let v: Value = serde_json::from_str(&text)?;
        v.get("manifest").cloned().ok_or_else(|| Error::spec("manifest", "no `manifest` object"))?
    };
    let m: Manifest = serde_json::from_value(value).map_err(|e| Error::spec("manifest", e.to_string()))?;
    Ok(m.command)
}

fn resolve(command: &mut Command) -> Result<()> {
    match command {
        Command::CirMgf(a) => a.model.resolve(),
        Command::CirCcdf(a) | Command::Legendre(a) => a.model.resolve(),
        Command::Tail(a) => a.model.resolve(),
        Command::TiltRatio(a) => a.model.resolve(),
        Command::FixedPoint(a) => a.model.resolve(),
        Command::Mc(a) => a.model.resolve(),
        Command::Squeeze(a) => a.model.resolve(),
        _ => Ok(()),
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let mut tmp = path.as_os_str().to_os_string();
    tmp.push(format!(".tmp-{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)?;
    Ok(())
}

fn render_csv(manifest: &str, out: &Output) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "# manifest: {manifest}");
    let _ = writeln!(s, "{}", out.header.join(","));
    for r in &out.rows {
        let _ = writeln!(s, "{}", r.join(","));
    }
    s
}

fn f(v: f64) -> String {
    format!("{v}")
}

fn opt(v: Option<f64>) -> String {
    v.map(f).unwrap_or_default()
}

fn dispatch(command: &Command) -> Result<Output> {
    match command {
        Command::CriticalMoment(a) => {
            let m = critical_moment(a.b, a.sigma, a.t)?;
            let mut o = Output::table(vec!["b", "sigma", "t", "mu_star"], vec![vec![f(a.b), f(a.sigma), f(a.t), f(m)]]);
            o.message = Some(f(m));
            Ok(o)
        }
        Command::CirMgf(a) => cir_mgf(a),
        Command::CirCcdf(a) => cir_ccdf(a),
        Command::Legendre(a) => legendre(a),
        Command::Tail(a) => tail(a),
        Command::TiltRatio(a) => tilt(a),
        Command::FixedPoint(a) => fixed_point(a),
        Command::Cev(a) => cev(a),
        Command::Mc(a) => mc(a),
        Command::Squeeze(a) => squeeze(a),
        Command::Accept(a) => accept(a),
        Command::Replay(_) => Err(Error::spec("manifest", "a manifest cannot record a replay")),
    }
}

fn cev_params(spec: &ModelSpec) -> Result<(CevParams, f64)> {
    let (a, b, sigma, v0, p) = spec.cev_fields()?;
    Ok((CevParams::new(a, b, sigma, v0, p)?, spec.horizon()?))
}

/// Log-MGF source for a CIR or CEV spec.
fn source(spec: &ModelSpec, n_terms: usize) -> Result<Arc<dyn LogMgf>> {
    Ok(match spec.kind {
        ModelKind::Cir => Arc::new(spec.to_cir()?),
        ModelKind::Cev => {
            let (p, t) = cev_params(spec)?;
            Arc::new(CevLogMgf::new(&p, t, n_terms)?)
        }
        ModelKind::Custom => {
            return Err(Error::spec("type", "custom models have no closed-form log-MGF; use `fixed-point`"));
        }
    })
}

fn range(xs: &[f64]) -> Result<(f64, f64)> {
    if xs.is_empty() {
        return Err(Error::spec("x", "empty list"));
    }
    let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

fn cir_mgf(a: &CirMgfArgs) -> Result<Output> {
    let cir = a.model.spec().to_cir()?;
    let m = cir.mu_star();
    let mus: Vec<f64> = a.mu.iter().cloned().chain(a.mu_fractions.iter().map(|f| f * m)).collect();
    if mus.is_empty() {
        return Err(Error::spec("mu", "give --mu or --mu-fractions"));
    }
    let mut rows = Vec::new();
    for mu in mus {
        rows.push(vec![f(mu), f(mu / m), f(cir_log_mgf(&cir, mu)?)]);
    }
    Ok(Output::table(vec!["mu", "mu_over_mu_star", "log_mgf"], rows))
}

fn cir_ccdf(a: &LevelArgs) -> Result<Output> {
    let cir = a.model.spec().to_cir()?;
    let mut rows = Vec::new();
    for &x in &a.x {
        let l = cir.exact_log_ccdf(x)?;
        rows.push(vec![f(x), f(l.exp()), f(l)]);
    }
    Ok(Output::table(vec!["x", "ccdf", "log_ccdf"], rows))
}

fn legendre(a: &LevelArgs) -> Result<Output> {
    let data = build_legendre(source(a.model.spec(), a.n_terms)?, range(&a.x)?)?;
    let mut rows = Vec::new();
    for &x in &a.x {
        let p = data.point(x)?;
        rows.push(vec![f(x), f(p.p_star), f(p.p_star_prime), f(p.lambda_star)]);
    }
    Ok(Output::table(vec!["x", "p_star", "p_star_prime", "lambda_star"], rows))
}

fn tail(a: &TailArgs) -> Result<Output> {
    let spec = a.model.spec();
    let data = build_legendre(source(spec, a.n_terms)?, range(&a.x)?)?;
    let exp = ccdf_expansion(&data, &a.x, a.order)?;
    let cir = (spec.kind == ModelKind::Cir).then(|| spec.to_cir()).transpose()?;
    let mut rows = Vec::new();
    for p in &exp.points {
        let exact = cir.map(|c| c.exact_log_ccdf(p.x)).transpose()?;
        rows.push(vec![
            f(p.x),
            f(p.lambda_star),
            f(p.leading),
            f(p.correction),
            f(p.estimate),
            opt(exact.map(f64::exp)),
            opt(exact.map(|e| (p.log_estimate - e).exp())),
            p.reliable.to_string(),
        ]);
    }
    let mut o = Output::table(
        vec!["x", "lambda_star", "leading", "correction", "estimate", "exact", "ratio", "reliable"],
        rows,
    );
    o.diagnostics = json!({"alpha": exp.alpha, "mu_star": exp.mu_star, "points": exp.points});
    Ok(o)
}

fn tilt(a: &TiltArgs) -> Result<Output> {
    let data = build_legendre(source(a.model.spec(), a.n_terms)?, (1.0, range(&a.x)?.1))
        .or_else(|_| build_legendre(source(a.model.spec(), a.n_terms)?, range(&a.x)?))?;
    let g = Weight::Power(a.gamma);
    let mut rows = Vec::new();
    for &x in &a.x {
        let l = tilt_ratio(&g, &data, x, Order::Leading)?;
        let r = tilt_ratio(&g, &data, x, Order::Refined)?;
        rows.push(vec![f(x), f(data.mu_star() - 1.0 / x), f(a.gamma), f(l), f(r)]);
    }
    Ok(Output::table(vec!["x", "tilt", "gamma", "leading", "refined"], rows))
}

fn fixed_point(a: &FixedPointArgs) -> Result<Output> {
    let spec = a.model.spec();
    let (sde, t): (SdeSpec, f64) = match spec.kind {
        ModelKind::Cev => {
            let (p, t) = cev_params(spec)?;
            (p.square_root_spec(), t)
        }
        _ => (spec.to_sde()?, spec.horizon()?),
    };
    let mut cfg = FixedPointConfig::new(t);
    cfg.m_threshold = a.m;
    cfg.x_max = a.x_max;
    cfg.n_x = a.n_x;
    cfg.tol = a.tol;
    cfg.max_iter = a.max_iter;
    cfg.order = a.order;
    let sol = solve_gamma(&sde, &cfg)?;
    let nt = sol.grid.t_nodes.len();
    let first = if a.last_only { nt - 1 } else { 0 };
    let mut rows = Vec::new();
    for i in first..nt {
        let dg = sol.dx_gamma(i);
        let r = sol.grid.row(i);
        for (j, &x) in sol.grid.x_nodes.iter().enumerate() {
            rows.push(vec![f(sol.grid.t_nodes[i]), f(x), f(r[j]), f(sol.gamma_at(i, j)), f(dg[j])]);
        }
    }
    let mut o = Output::table(vec!["t", "x", "R", "Gamma", "dGamma_dx"], rows);
    o.diagnostics = json!({
        "gamma": sol.grid.gamma,
        "m_threshold": sol.m_threshold,
        "contraction": sol.contraction,
        "iterations": sol.iterations,
        "residual_history": sol.residual_history,
        "attempts": sol.attempts,
    });
    Ok(o)
}

fn cev(a: &CevArgs) -> Result<Output> {
    let p = CevParams::new(a.a, a.b, a.sigma, a.v0, a.p)?;
    let src = CevLogMgf::new(&p, a.t, a.n_terms)?;
    let mut rows = Vec::new();
    for &x in &a.x {
        let dh = src.evaluate(x).ok();
        let lead = cev_ccdf(&p, a.t, &[x], Order::Leading, a.n_terms).ok();
        let refd = cev_ccdf(&p, a.t, &[x], Order::Refined, a.n_terms).ok();
        let pt = match a.order {
            Order::Leading => lead.as_ref(),
            Order::Refined => refd.as_ref(),
        }
        .map(|t| t.expansion.points[0].clone());
        let valid = dh.is_some() && pt.as_ref().is_some_and(|p| p.reliable);
        rows.push(vec![
            f(x),
            opt(dh.map(|d| d.value)),
            opt(pt.as_ref().map(|p| p.lambda_star)),
            opt(lead.map(|t| t.expansion.points[0].estimate)),
            opt(refd.map(|t| t.expansion.points[0].estimate)),
            valid.to_string(),
        ]);
    }
    let mut o = Output::table(vec!["x", "delta_hat", "lambda_star", "ccdf_leading", "ccdf_refined", "valid"], rows);
    o.diagnostics = json!({"mu_star": src.mu_star, "omega": src.omega, "threshold": src.threshold, "terms": src.terms});
    Ok(o)
}

fn mc(a: &McArgs) -> Result<Output> {
    let spec = a.model.spec();
    let t = spec.horizon()?;
    let mut cfg = SimConfig::new(a.paths, a.steps, t, a.seed);
    cfg.scheme = a.scheme;
    let (model, power, mu_star, cir): (Box<dyn SimModel>, f64, Option<f64>, Option<CirParams>) = match spec.kind {
        ModelKind::Cir => {
            let c = spec.to_cir()?;
            (Box::new(c), 1.0, Some(c.mu_star()), Some(c))
        }
        ModelKind::Cev => {
            let (p, t) = cev_params(spec)?;
            (Box::new(p), p.lambda, Some(p.mu_star(t)?), None)
        }
        ModelKind::Custom => {
            let s = spec.to_sde()?;
            let m = match s.diffusion.as_power() {
                Some((sig, e)) if e == 0.5 => critical_moment(s.b_limit, sig, t).ok(),
                _ => None,
            };
            (Box::new(s), 1.0, m, None)
        }
    };
    let sim = simulate(model.as_ref(), &cfg)?;
    // CEV estimates refer to V^λ, the variable with the exploding MGF
    let samples: Vec<f64> = if power == 1.0 { sim.samples } else { sim.samples.iter().map(|v| v.powf(power)).collect() };
    let mut rows = Vec::new();
    if !a.mu_fractions.is_empty() {
        let m = mu_star.ok_or_else(|| Error::domain("no critical moment for this model"))?;
        for &fr in &a.mu_fractions {
            let mu = fr * m;
            let e = empirical_log_mgf(&samples, mu)?;
            let reference = cir.map(|c| cir_log_mgf(&c, mu)).transpose()?;
            let (lo, hi) = (e.value - 3.0 * e.stderr, e.value + 3.0 * e.stderr);
            rows.push(vec![
                "mu".into(),
                f(mu),
                f(e.value),
                f(e.stderr),
                f(lo),
                f(hi),
                opt(reference),
                reference.map(|r| (lo <= r && r <= hi).to_string()).unwrap_or_default(),
            ]);
        }
    }
    if !a.x.is_empty() {
        let emp = EmpiricalCcdf::new(&samples)?;
        for &x in &a.x {
            let c = emp.ccdf(x);
            let reference = cir.map(|cp| cp.exact_ccdf(x)).transpose()?;
            rows.push(vec![
                "x".into(),
                f(x),
                f(c.p),
                f(c.stderr),
                f(c.lo),
                f(c.hi),
                opt(reference),
                reference.map(|r| (c.lo <= r && r <= c.hi).to_string()).unwrap_or_default(),
            ]);
        }
    }
    if rows.is_empty() {
        return Err(Error::spec("mu-fractions", "give --mu-fractions and/or --x"));
    }
    let mut o = Output::table(
        vec!["quantity", "point", "estimate", "stderr", "bound_low", "bound_high", "reference", "pass"],
        rows,
    );
    o.diagnostics = json!({"seed": a.seed, "scheme": a.scheme, "n_paths": a.paths, "n_steps": a.steps,
        "flagged": sim.flagged, "power": power});
    Ok(o)
}

fn squeeze(a: &SqueezeArgs) -> Result<Output> {
    let spec = a.model.spec();
    let t = spec.horizon()?;
    let sde = spec.to_sde()?;
    let sq = build_squeeze(&sde, a.level, t)?;
    let deciles: Vec<f64> = (1..10).map(|i| i as f64 / 10.0).collect();
    let rep = squeeze_check(&sq, &SimConfig::new(a.paths, a.steps, t, a.seed), &deciles, &a.sandwich_x)?;
    let rows = rep
        .ordering
        .iter()
        .map(|o| {
            vec![
                f(o.quantile),
                f(o.level),
                f(o.lower.p),
                f(o.target.p),
                f(o.upper.p),
                opt(o.lower_exact),
                opt(o.upper_exact),
                o.pass.to_string(),
            ]
        })
        .collect();
    let mut o = Output::table(
        vec!["quantile", "level", "lower_ccdf", "target_ccdf", "upper_ccdf", "lower_exact", "upper_exact", "pass"],
        rows,
    );
    o.status = if rep.ordering_pass && rep.sandwich_pass { 0 } else { 3 };
    o.diagnostics = serde_json::to_value(&rep)?;
    Ok(o)
}

fn accept(a: &AcceptArgs) -> Result<Output> {
    if a.suite != "primary" {
        return Err(Error::spec("suite", format!("unknown suite `{}` (only `primary`)", a.suite)));
    }
    let ids: Vec<u8> = if a.criteria.is_empty() { CRITERIA.iter().map(|c| c.0).collect() } else { a.criteria.clone() };
    let cfg = AcceptConfig { seed: a.seed, scratch: None };
    let results = run_suite(&ids, &cfg, true)?;
    let rows = results
        .iter()
        .map(|r| vec![r.id.to_string(), r.pass.to_string(), r.known_failure.to_string()])
        .collect();
    let passed = results.iter().filter(|r| r.pass).count();
    let mut o = Output::table(vec!["criterion", "pass", "known_failure"], rows);
    o.message = Some(format!("{passed}/{} criteria passed", results.len()));
    o.status = if passed == results.len() { 0 } else { 3 };
    o.diagnostics = serde_json::to_value(&results)?;
    Ok(o)
}
