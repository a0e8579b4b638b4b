use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use super::{ensure_dir, exit, resolve, write_json, Common, Run};
use crate::certificates::{
    build_certificate_golfing_mc, build_certificate_ls_mc, build_certificate_rpca, verify_mc_certificate,
    CertificateReport, Construction, GolfingConfig, VerifyMode,
};
use crate::error::{LrdError, Result};
use crate::instances::{CorruptionModel, MCInstance, RPCAInstance, Sampler};
use crate::io;
use crate::linalg::{svd, DenseMatrix, TangentSpace, DEFAULT_RANK_TOL};
use crate::solvers::{solve_mc_bidual, solve_rpca_bidual, solve_weighted_lra, SolveReport, SolverConfig, Status};

fn default_spectrum(r: usize, given: &Option<Vec<f64>>) -> Vec<f64> {
    given.clone().unwrap_or_else(|| vec![1.0; r])
}

fn rel_err(x: &DenseMatrix, truth: &DenseMatrix) -> Result<f64> {
    x.check_shape(truth.shape())?;
    Ok((x - truth).frobenius_norm() / truth.frobenius_norm().max(f64::MIN_POSITIVE))
}

fn solve_report_json(rep: &SolveReport) -> Value {
    json!({
        "status": rep.status,
        "iterations_run": rep.iterations_run,
        "primal_value": rep.primal_value,
        "dual_value": rep.dual_value,
        "duality_gap": rep.duality_gap,
        "failure": rep.failure,
        "residual_trace": rep.residual_trace,
    })
}

fn status_code(status: Status) -> i32 {
    match status {
        Status::Converged => exit::OK,
        Status::MaxIters => exit::MAX_ITERS,
        Status::NumericalFailure => exit::NUMERICAL,
    }
}

fn certificate_json(rep: &CertificateReport) -> Value {
    json!({
        "passed": rep.passed(),
        "construction": rep.construction,
        "conditions": rep.conditions,
    })
}

fn with_extra(mut base: Value, extra: Value) -> Value {
    if let (Value::Object(b), Value::Object(e)) = (&mut base, extra) {
        b.extend(e);
    }
    base
}

fn print_summary(v: &Value) {
    println!("{}", serde_json::to_string(v).unwrap_or_default());
}

// ---- solver flags ----------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct SolverFlags {
    /// Prox step
    #[arg(long)]
    gamma: Option<f64>,
    /// Relative fixed-point tolerance
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    max_iters: Option<usize>,
}

fn default_gamma() -> f64 {
    1.0
}
fn default_tol() -> f64 {
    1e-9
}
fn default_max_iters() -> usize {
    5000
}

fn solver_config(gamma: f64, tol: f64, max_iters: usize) -> Result<SolverConfig> {
    let cfg = SolverConfig {
        gamma,
        tol,
        max_iters,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

// ---- gen-mc ----------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct GenMcArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    n1: Option<usize>,
    /// Defaults to n1
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    /// Comma-separated singular values (default all ones)
    #[arg(long, value_delimiter = ',')]
    spectrum: Option<Vec<f64>>,
    /// Exact number of observed entries (uniform sampler)
    #[arg(long, conflicts_with = "density")]
    samples: Option<usize>,
    /// Observation probability (Bernoulli sampler)
    #[arg(long)]
    density: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct GenMcParams {
    n1: usize,
    #[serde(default)]
    n2: Option<usize>,
    rank: usize,
    #[serde(default)]
    spectrum: Option<Vec<f64>>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    density: Option<f64>,
    #[serde(default)]
    seed: u64,
    out: PathBuf,
}

fn pick_sampler(samples: Option<usize>, density: Option<f64>) -> Result<Sampler> {
    match (samples, density) {
        (Some(m), None) => Ok(Sampler::Uniform { m }),
        (None, Some(p)) => Ok(Sampler::Bernoulli { p }),
        _ => Err(LrdError::arg("give exactly one of --samples and --density")),
    }
}

pub(crate) fn gen_mc(args: GenMcArgs) -> Result<i32> {
    let run = Run::start("gen-mc");
    let p: GenMcParams = resolve("gen-mc", args.common.config.as_deref(), &args, true)?;
    let n2 = p.n2.unwrap_or(p.n1);
    let sampler = pick_sampler(p.samples, p.density)?;
    let spectrum = default_spectrum(p.rank, &p.spectrum);
    let inst = MCInstance::generate(p.n1, n2, p.rank, &spectrum, sampler, p.seed)?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("x_star.mtx"), &inst.x_star)?;
    io::write_dense(&p.out.join("a.mtx"), &inst.a)?;
    io::write_dense(&p.out.join("b.mtx"), &inst.b)?;
    io::write_entries(&p.out.join("obs.mtx"), &inst.obs_values, &inst.obs)?;
    let summary = json!({
        "problem": "mc",
        "n1": p.n1,
        "n2": n2,
        "rank": p.rank,
        "observed": inst.obs.len(),
        "mu": inst.mu,
        "kappa": inst.kappa,
    });
    write_json(&p.out.join("instance.json"), &summary)?;
    run.finish(&p.out, &p, Some(p.seed), &["x_star.mtx", "a.mtx", "b.mtx", "obs.mtx", "instance.json"])?;
    print_summary(&summary);
    Ok(exit::OK)
}

// ---- gen-rpca --------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct GenRpcaArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    n1: Option<usize>,
    #[arg(long)]
    n2: Option<usize>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    spectrum: Option<Vec<f64>>,
    /// Number of corrupted entries
    #[arg(long, conflicts_with = "density")]
    samples: Option<usize>,
    /// Fraction of corrupted entries
    #[arg(long)]
    density: Option<f64>,
    /// Corruption magnitude (default ‖X*‖_∞)
    #[arg(long)]
    magnitude: Option<f64>,
    /// Draw the corruption support as Bernoulli instead of exactly m entries
    #[arg(long)]
    #[serde(skip_serializing_if = "std::ops::Not::not")]
    bernoulli: bool,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct GenRpcaParams {
    n1: usize,
    #[serde(default)]
    n2: Option<usize>,
    rank: usize,
    #[serde(default)]
    spectrum: Option<Vec<f64>>,
    #[serde(default)]
    samples: Option<usize>,
    #[serde(default)]
    density: Option<f64>,
    #[serde(default)]
    magnitude: Option<f64>,
    #[serde(default)]
    bernoulli: bool,
    #[serde(default)]
    seed: u64,
    out: PathBuf,
}

pub(crate) fn gen_rpca(args: GenRpcaArgs) -> Result<i32> {
    let run = Run::start("gen-rpca");
    let p: GenRpcaParams = resolve("gen-rpca", args.common.config.as_deref(), &args, true)?;
    let n2 = p.n2.unwrap_or(p.n1);
    let m = match (p.samples, p.density) {
        (Some(m), None) => m,
        (None, Some(f)) if (0.0..=1.0).contains(&f) => (f * (p.n1 * n2) as f64).round() as usize,
        (None, Some(f)) => return Err(LrdError::arg(format!("density {f} outside [0, 1]"))),
        _ => return Err(LrdError::arg("give exactly one of --samples and --density")),
    };
    let model = if p.bernoulli {
        CorruptionModel::BernoulliSign
    } else {
        CorruptionModel::SignedUniform
    };
    let spectrum = default_spectrum(p.rank, &p.spectrum);
    let inst = RPCAInstance::generate(p.n1, n2, p.rank, &spectrum, m, p.magnitude, model, p.seed)?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("x_star.mtx"), &inst.x_star)?;
    io::write_entries(&p.out.join("s_star.mtx"), &inst.s_star, &inst.corr)?;
    io::write_dense(&p.out.join("d.mtx"), &inst.d)?;
    let summary = json!({
        "problem": "rpca",
        "n1": p.n1,
        "n2": n2,
        "rank": p.rank,
        "corrupted": inst.corr.len(),
        "mu": inst.mu,
        "lambda_default": inst.lambda_default,
    });
    write_json(&p.out.join("instance.json"), &summary)?;
    run.finish(&p.out, &p, Some(p.seed), &["x_star.mtx", "s_star.mtx", "d.mtx", "instance.json"])?;
    print_summary(&summary);
    Ok(exit::OK)
}

// ---- solve mc --------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct SolveMcArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Observed entries (coordinate real)
    #[arg(long)]
    obs: Option<PathBuf>,
    /// Ground truth, for the reported recovery error
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SolveMcParams {
    obs: PathBuf,
    #[serde(default)]
    truth: Option<PathBuf>,
    rank: usize,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    out: PathBuf,
}

fn truth_error(truth: &Option<PathBuf>, x: &DenseMatrix) -> Result<Option<f64>> {
    truth
        .as_deref()
        .map(|t| rel_err(x, &io::read_dense(t)?))
        .transpose()
}

pub(crate) fn solve_mc(args: SolveMcArgs) -> Result<i32> {
    let run = Run::start("solve mc");
    let p: SolveMcParams = resolve("solve mc", args.common.config.as_deref(), &args, false)?;
    let cfg = solver_config(p.gamma, p.tol, p.max_iters)?;
    let (values, obs) = io::read_entries(&p.obs)?;
    let rep = solve_mc_bidual(&obs, &values, p.rank, &cfg)?;
    let err = truth_error(&p.truth, &rep.solution)?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("solution.mtx"), &rep.solution)?;
    let report = with_extra(solve_report_json(&rep), json!({ "relative_error": err }));
    write_json(&p.out.join("report.json"), &report)?;
    run.finish(&p.out, &p, None, &["solution.mtx", "report.json"])?;
    print_summary(&json!({"status": rep.status, "iterations_run": rep.iterations_run, "relative_error": err}));
    Ok(status_code(rep.status))
}

// ---- solve rpca ------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct SolveRpcaArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Observed matrix D = X* + S* (array)
    #[arg(long)]
    d: Option<PathBuf>,
    /// Low-rank truth; also sets the default λ = σ_r(X*)/√n_(1)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Sparse truth, for the reported recovery error
    #[arg(long)]
    sparse_truth: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long)]
    lambda: Option<f64>,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SolveRpcaParams {
    d: PathBuf,
    #[serde(default)]
    truth: Option<PathBuf>,
    #[serde(default)]
    sparse_truth: Option<PathBuf>,
    rank: usize,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    out: PathBuf,
}

/// `σ_r(X*) / √n_(1)`.
fn default_lambda(x_star: &DenseMatrix, r: usize) -> Result<f64> {
    let f = svd(x_star, DEFAULT_RANK_TOL)?;
    if r == 0 || r > f.sigma.len() {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", f.sigma.len())));
    }
    let (n1, n2) = x_star.shape();
    Ok(f.sigma[r - 1] / (n1.max(n2) as f64).sqrt())
}

pub(crate) fn solve_rpca(args: SolveRpcaArgs) -> Result<i32> {
    let run = Run::start("solve rpca");
    let p: SolveRpcaParams = resolve("solve rpca", args.common.config.as_deref(), &args, false)?;
    let cfg = solver_config(p.gamma, p.tol, p.max_iters)?;
    let d = io::read_dense(&p.d)?;
    let truth = p.truth.as_deref().map(io::read_dense).transpose()?;
    let lambda = match (p.lambda, &truth) {
        (Some(l), _) => l,
        (None, Some(t)) => default_lambda(t, p.rank)?,
        (None, None) => return Err(LrdError::arg("give --lambda or --truth")),
    };
    let rep = solve_rpca_bidual(&d, p.rank, lambda, &cfg)?;
    let sparse = rep.second.clone().expect("robust PCA reports the sparse part");
    let err_l = truth.as_ref().map(|t| rel_err(&rep.solution, t)).transpose()?;
    let err_s = p
        .sparse_truth
        .as_deref()
        .map(|s| rel_err(&sparse, &io::read_dense(s)?))
        .transpose()?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("low_rank.mtx"), &rep.solution)?;
    io::write_dense(&p.out.join("sparse.mtx"), &sparse)?;
    let report = with_extra(
        solve_report_json(&rep),
        json!({ "lambda": lambda, "relative_error_low_rank": err_l, "relative_error_sparse": err_s }),
    );
    write_json(&p.out.join("report.json"), &report)?;
    run.finish(&p.out, &p, None, &["low_rank.mtx", "sparse.mtx", "report.json"])?;
    print_summary(&json!({
        "status": rep.status,
        "iterations_run": rep.iterations_run,
        "relative_error_low_rank": err_l,
        "relative_error_sparse": err_s,
    }));
    Ok(status_code(rep.status))
}

// ---- solve wlra ------------------------------------------------------------

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct SolveWlraArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Target matrix (array)
    #[arg(long)]
    y: Option<PathBuf>,
    /// Entrywise weights (array)
    #[arg(long)]
    w: Option<PathBuf>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    rank: Option<usize>,
    #[command(flatten)]
    #[serde(flatten)]
    solver: SolverFlags,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct SolveWlraParams {
    y: PathBuf,
    w: PathBuf,
    beta: f64,
    rank: usize,
    #[serde(default = "default_gamma")]
    gamma: f64,
    #[serde(default = "default_tol")]
    tol: f64,
    #[serde(default = "default_max_iters")]
    max_iters: usize,
    out: PathBuf,
}

pub(crate) fn solve_wlra(args: SolveWlraArgs) -> Result<i32> {
    let run = Run::start("solve wlra");
    let p: SolveWlraParams = resolve("solve wlra", args.common.config.as_deref(), &args, false)?;
    let cfg = solver_config(p.gamma, p.tol, p.max_iters)?;
    let y = io::read_dense(&p.y)?;
    let w = io::read_dense(&p.w)?;
    let rep = solve_weighted_lra(&y, &w, p.beta, p.rank, &cfg)?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("solution.mtx"), &rep.solution)?;
    write_json(&p.out.join("report.json"), &solve_report_json(&rep))?;
    run.finish(&p.out, &p, None, &["solution.mtx", "report.json"])?;
    print_summary(&json!({"status": rep.status, "iterations_run": rep.iterations_run, "primal_value": rep.primal_value}));
    Ok(status_code(rep.status))
}

// ---- certify ---------------------------------------------------------------

fn certificate_code(passed: bool) -> i32 {
    if passed {
        exit::OK
    } else {
        exit::CERTIFICATE_FAILED
    }
}

fn print_conditions(rep: &CertificateReport) {
    for c in &rep.conditions {
        let rel = if c.strict { "<" } else { "<=" };
        let mark = if c.satisfied { "ok  " } else { "FAIL" };
        eprintln!("{mark} {:<18} {:.6e} {rel} {:.6e}", c.name, c.lhs, c.bound);
    }
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct CertifyMcLsArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Low-rank truth X* (array)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Observation support (coordinate, pattern or real)
    #[arg(long)]
    obs: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    cg_tol: Option<f64>,
    /// Conjugate-gradient iteration cap (0 = 10 dim T)
    #[arg(long)]
    cg_iters: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::ValueEnum, Clone, Copy, Debug, Serialize, Deserialize, PartialEq, Eq)]
#[serde(rename_all = "snake_case")]
pub(crate) enum ModeArg {
    Exact,
    Relaxed,
}

impl From<ModeArg> for VerifyMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Exact => VerifyMode::Exact,
            ModeArg::Relaxed => VerifyMode::Relaxed,
        }
    }
}

fn exact() -> ModeArg {
    ModeArg::Exact
}
fn relaxed() -> ModeArg {
    ModeArg::Relaxed
}
fn default_cg_tol() -> f64 {
    1e-12
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct CertifyMcLsParams {
    truth: PathBuf,
    obs: PathBuf,
    rank: usize,
    #[serde(default = "exact")]
    mode: ModeArg,
    #[serde(default = "default_cg_tol")]
    cg_tol: f64,
    #[serde(default)]
    cg_iters: usize,
    out: PathBuf,
}

pub(crate) fn certify_mc_ls(args: CertifyMcLsArgs) -> Result<i32> {
    let run = Run::start("certify mc-ls");
    let p: CertifyMcLsParams = resolve("certify mc-ls", args.common.config.as_deref(), &args, false)?;
    let x_star = io::read_dense(&p.truth)?;
    let obs = io::read_support(&p.obs)?;
    let t = TangentSpace::at(&x_star, p.rank)?;
    let ls = build_certificate_ls_mc(&x_star, &t, &obs, p.cg_tol, p.cg_iters)?;
    let rep = verify_mc_certificate(&ls.lambda, &x_star, &t, &obs, p.mode.into())?
        .with_construction(Construction::LeastSquares);
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("certificate.mtx"), &ls.lambda)?;
    let report = with_extra(
        certificate_json(&rep),
        json!({
            "mode": p.mode,
            "cg_iterations": ls.cg_iterations,
            "cg_residual": ls.cg_residual,
            "neumann_terms": ls.neumann_terms,
            "neumann_discrepancy": ls.neumann_discrepancy,
            "omega_perp_t_norm": ls.omega_perp_t_norm,
        }),
    );
    write_json(&p.out.join("report.json"), &report)?;
    run.finish(&p.out, &p, None, &["certificate.mtx", "report.json"])?;
    print_conditions(&rep);
    Ok(certificate_code(rep.passed()))
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct CertifyMcGolfingArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    #[arg(long)]
    truth: Option<PathBuf>,
    #[arg(long)]
    rank: Option<usize>,
    /// Number of partitions (default from κ and n)
    #[arg(long)]
    b: Option<usize>,
    /// Per-partition rate (default from --density)
    #[arg(long)]
    q: Option<f64>,
    /// Density of the union of partitions
    #[arg(long)]
    density: Option<f64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn default_union_density() -> f64 {
    0.99
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct CertifyMcGolfingParams {
    truth: PathBuf,
    rank: usize,
    #[serde(default)]
    b: Option<usize>,
    #[serde(default)]
    q: Option<f64>,
    #[serde(default = "default_union_density")]
    density: f64,
    #[serde(default = "relaxed")]
    mode: ModeArg,
    #[serde(default)]
    seed: u64,
    out: PathBuf,
}

fn golfing_mc_config(p: &CertifyMcGolfingParams, x_star: &DenseMatrix) -> Result<GolfingConfig> {
    let (n1, n2) = x_star.shape();
    match (p.b, p.q) {
        (Some(b), Some(q)) => GolfingConfig::new(b, q, p.seed),
        (Some(b), None) => GolfingConfig::new(b, 1.0 - (1.0 - p.density).powf(1.0 / b.max(1) as f64), p.seed),
        (None, q) => {
            let f = svd(x_star, DEFAULT_RANK_TOL)?;
            if p.rank == 0 || p.rank > f.numeric_rank {
                return Err(LrdError::arg(format!("X* has numerical rank {}", f.numeric_rank)));
            }
            let kappa = f.sigma[0] / f.sigma[p.rank - 1];
            let mut cfg = GolfingConfig::mc_default(n1, n2, kappa, p.density, p.seed)?;
            if let Some(q) = q {
                cfg = GolfingConfig::new(cfg.b, q, p.seed)?;
            }
            Ok(cfg)
        }
    }
}

pub(crate) fn certify_mc_golfing(args: CertifyMcGolfingArgs) -> Result<i32> {
    let run = Run::start("certify mc-golfing");
    let p: CertifyMcGolfingParams =
        resolve("certify mc-golfing", args.common.config.as_deref(), &args, true)?;
    let x_star = io::read_dense(&p.truth)?;
    let t = TangentSpace::at(&x_star, p.rank)?;
    let cfg = golfing_mc_config(&p, &x_star)?;
    let g = build_certificate_golfing_mc(&x_star, &t, &cfg)?;
    let rep = verify_mc_certificate(&g.certificate, &x_star, &t, &g.obs, p.mode.into())?
        .with_construction(Construction::Golfing);
    let passed = rep.passed() && g.contracted;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("certificate.mtx"), &g.certificate)?;
    io::write_support(&p.out.join("obs.mtx"), &g.obs)?;
    let mut report = with_extra(
        certificate_json(&rep),
        json!({
            "mode": p.mode,
            "b": cfg.b,
            "q": cfg.q,
            "trace": g.trace,
            "contracted": g.contracted,
        }),
    );
    report["passed"] = passed.into();
    write_json(&p.out.join("report.json"), &report)?;
    run.finish(&p.out, &p, Some(p.seed), &["certificate.mtx", "obs.mtx", "report.json"])?;
    print_conditions(&rep);
    if !g.contracted {
        eprintln!("FAIL golfing residual trace is not strictly decreasing");
    }
    Ok(certificate_code(passed))
}

#[derive(Args, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub(crate) struct CertifyRpcaArgs {
    #[command(flatten)]
    #[serde(skip)]
    common: Common,
    /// Low-rank truth X* (array)
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Corruption S* (coordinate real; listed positions form the support)
    #[arg(long)]
    sparse: Option<PathBuf>,
    /// Default σ_r(X*)/√n_(1) at the numerical rank
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long)]
    b: Option<usize>,
    #[arg(long)]
    q: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields)]
struct CertifyRpcaParams {
    truth: PathBuf,
    sparse: PathBuf,
    #[serde(default)]
    lambda: Option<f64>,
    #[serde(default)]
    b: Option<usize>,
    #[serde(default)]
    q: Option<f64>,
    #[serde(default)]
    seed: u64,
    out: PathBuf,
}

pub(crate) fn certify_rpca(args: CertifyRpcaArgs) -> Result<i32> {
    let run = Run::start("certify rpca");
    let p: CertifyRpcaParams = resolve("certify rpca", args.common.config.as_deref(), &args, true)?;
    let x_star = io::read_dense(&p.truth)?;
    let (s_star, corr) = io::read_entries(&p.sparse)?;
    let (n1, n2) = x_star.shape();
    let lambda = match p.lambda {
        Some(l) => l,
        None => {
            let r = svd(&x_star, DEFAULT_RANK_TOL)?.numeric_rank;
            if r == 0 {
                return Err(LrdError::arg("X* is zero; give --lambda"));
            }
            default_lambda(&x_star, r)?
        }
    };
    let mut cfg = GolfingConfig::rpca_default(n1, n2, corr.density(), p.seed)?;
    if let Some(b) = p.b {
        cfg = GolfingConfig::new(b, 1.0 - corr.density().powf(1.0 / b.max(1) as f64), p.seed)?;
    }
    if let Some(q) = p.q {
        cfg = GolfingConfig::new(cfg.b, q, p.seed)?;
    }
    let cert = build_certificate_rpca(&x_star, &s_star, &corr, lambda, &cfg)?;
    ensure_dir(&p.out)?;
    io::write_dense(&p.out.join("w_l.mtx"), &cert.w_l)?;
    io::write_dense(&p.out.join("w_s.mtx"), &cert.w_s)?;
    let report = with_extra(
        certificate_json(&cert.report),
        json!({
            "lambda": lambda,
            "b": cfg.b,
            "q": cfg.q,
            "omega_t_norm": cert.omega_t_norm,
            "neumann_terms": cert.neumann_terms,
        }),
    );
    write_json(&p.out.join("report.json"), &report)?;
    run.finish(&p.out, &p, Some(p.seed), &["w_l.mtx", "w_s.mtx", "report.json"])?;
    print_conditions(&cert.report);
    Ok(certificate_code(cert.report.passed()))
}
