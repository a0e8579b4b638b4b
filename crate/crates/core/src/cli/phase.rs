use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{ensure_dir, exit, RunManifest, Run};
use crate::error::{LrdError, Result};
use crate::instances::{CorruptionModel, MCInstance, RPCAInstance, Sampler};
use crate::rng::derive_seed;
use crate::solvers::{solve_mc_bidual, solve_rpca_bidual, SolverConfig, Status};

pub const PHASE_CSV: &str = "phase.csv";

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Problem {
    /// `ρ = m / (r (n1 + n2 − r))`
    Mc,
    /// `ρ` = fraction of corrupted entries
    Rpca,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Uniform,
    Bernoulli,
}

impl SamplerKind {
    fn name(self) -> &'static str {
        match self {
            SamplerKind::Uniform => "uniform",
            SamplerKind::Bernoulli => "bernoulli",
        }
    }
}

fn default_samplers() -> Vec<SamplerKind> {
    vec![SamplerKind::Uniform, SamplerKind::Bernoulli]
}
fn default_threshold() -> f64 {
    1e-4
}

/// Sweep grid. Cells are the product `n × r × rho` in that nesting order;
/// every sampler is run on every cell with the same trial seeds
/// `derive_seed(seed, [cell_index, trial])`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseGrid {
    pub problem: Problem,
    pub n: Vec<usize>,
    pub r: Vec<usize>,
    pub rho: Vec<f64>,
    pub trials: usize,
    /// success means relative Frobenius error at most this
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_samplers")]
    pub samplers: Vec<SamplerKind>,
    /// singular values of the truth (default all ones)
    #[serde(default)]
    pub spectrum: Option<Vec<f64>>,
    #[serde(default)]
    pub solver: SolverConfig,
}

impl PhaseGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n.is_empty() || self.r.is_empty() || self.rho.is_empty() || self.samplers.is_empty() {
            return Err(LrdError::arg("grid axes must be non-empty"));
        }
        if self.trials == 0 {
            return Err(LrdError::arg("trials must be at least 1"));
        }
        if !(self.threshold > 0.0) {
            return Err(LrdError::arg("threshold must be positive"));
        }
        if self.rho.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
            return Err(LrdError::arg("rho values must be finite and nonnegative"));
        }
        if self.problem == Problem::Rpca && self.rho.iter().any(|x| *x > 1.0) {
            return Err(LrdError::arg("corruption fractions must lie in [0, 1]"));
        }
        for &n in &self.n {
            if let Some(&r) = self.r.iter().find(|&&r| r == 0 || r > n) {
                return Err(LrdError::arg(format!("rank {r} invalid for n = {n}")));
            }
        }
        if let Some(s) = &self.spectrum {
            if let Some(&r) = self.r.iter().find(|&&r| r != s.len()) {
                return Err(LrdError::arg(format!("spectrum has {} values but r = {r}", s.len())));
            }
        }
        self.solver.validate()
    }

    /// `(n, r, rho)` for every cell, in cell-index order.
    pub fn cells(&self) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for &n in &self.n {
            for &r in &self.r {
                for &rho in &self.rho {
                    out.push((n, r, rho));
                }
            }
        }
        out
    }

    /// Sample count of a cell: observed entries (completion) or corrupted
    /// entries (robust PCA), capped at `n²`.
    pub fn cell_m(&self, n: usize, r: usize, rho: f64) -> usize {
        let raw = match self.problem {
            Problem::Mc => rho * (r * (2 * n - r)) as f64,
            Problem::Rpca => rho * (n * n) as f64,
        };
        (raw.round() as usize).min(n * n)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub cell_index: usize,
    pub problem: Problem,
    pub sampler: SamplerKind,
    pub n: usize,
    pub r: usize,
    pub rho: f64,
    pub m: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_prob: f64,
    /// over trials without a failure; NaN when every trial failed
    pub mean_error: f64,
    pub mean_iterations: f64,
    /// generation errors or numerical failures
    pub failures: usize,
}

/// Outcome of one trial: `(relative error, iterations)` or a failure.
type Trial = Option<(f64, usize)>;

fn run_trial(grid: &PhaseGrid, n: usize, r: usize, m: usize, sampler: SamplerKind, seed: u64) -> Trial {
    let ones = vec![1.0; r];
    let spectrum = grid.spectrum.as_deref().unwrap_or(&ones);
    let total = (n * n) as f64;
    let outcome = match grid.problem {
        Problem::Mc => {
            let s = match sampler {
                SamplerKind::Uniform => Sampler::Uniform { m },
                SamplerKind::Bernoulli => Sampler::Bernoulli { p: m as f64 / total },
            };
            MCInstance::generate(n, n, r, spectrum, s, seed).and_then(|inst| {
                let rep = solve_mc_bidual(&inst.obs, &inst.obs_values, r, &grid.solver)?;
                let err = (&rep.solution - &inst.x_star).frobenius_norm() / inst.x_star.frobenius_norm();
                Ok((rep.status, err, rep.iterations_run))
            })
        }
        Problem::Rpca => {
            let model = match sampler {
                SamplerKind::Uniform => CorruptionModel::SignedUniform,
                SamplerKind::Bernoulli => CorruptionModel::BernoulliSign,
            };
            RPCAInstance::generate(n, n, r, spectrum, m, None, model, seed).and_then(|inst| {
                let rep = solve_rpca_bidual(&inst.d, r, inst.lambda_default, &grid.solver)?;
                let err = (&rep.solution - &inst.x_star).frobenius_norm() / inst.x_star.frobenius_norm();
                Ok((rep.status, err, rep.iterations_run))
            })
        }
    };
    match outcome {
        Ok((status, err, it)) if status != Status::NumericalFailure && err.is_finite() => Some((err, it)),
        _ => None,
    }
}

/// Runs every (cell, sampler, trial) on a pool of `jobs` threads. Each trial
/// depends only on the grid and its seed, and results are gathered by index,
/// so the rows do not depend on `jobs`.
pub fn run_phase(grid: &PhaseGrid, jobs: usize) -> Result<Vec<PhaseRow>> {
    grid.validate()?;
    if jobs == 0 {
        return Err(LrdError::arg("jobs must be at least 1"));
    }
    let cells = grid.cells();
    let mut tasks = Vec::new();
    for (ci, &(n, r, rho)) in cells.iter().enumerate() {
        for (si, &sampler) in grid.samplers.iter().enumerate() {
            for t in 0..grid.trials {
                tasks.push((ci, si, t, n, r, grid.cell_m(n, r, rho), sampler));
            }
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| LrdError::arg(format!("cannot start {jobs} workers: {e}")))?;
    let results: Vec<Trial> = pool.install(|| {
        tasks
            .par_iter()
            .map(|&(ci, _, t, n, r, m, sampler)| {
                run_trial(grid, n, r, m, sampler, derive_seed(grid.seed, &[ci as u64, t as u64]))
            })
            .collect()
    });

    let mut rows = Vec::new();
    for (ci, &(n, r, rho)) in cells.iter().enumerate() {
        for (si, &sampler) in grid.samplers.iter().enumerate() {
            let start = (ci * grid.samplers.len() + si) * grid.trials;
            let slice = &results[start..start + grid.trials];
            let ok: Vec<(f64, usize)> = slice.iter().flatten().copied().collect();
            let successes = ok.iter().filter(|(e, _)| *e <= grid.threshold).count();
            let denom = ok.len() as f64;
            let (mean_error, mean_iterations) = if ok.is_empty() {
                (f64::NAN, f64::NAN)
            } else {
                (
                    ok.iter().map(|(e, _)| e).sum::<f64>() / denom,
                    ok.iter().map(|(_, i)| *i as f64).sum::<f64>() / denom,
                )
            };
            rows.push(PhaseRow {
                cell_index: ci,
                problem: grid.problem,
                sampler,
                n,
                r,
                rho,
                m: grid.cell_m(n, r, rho),
                trials: grid.trials,
                successes,
                success_prob: successes as f64 / grid.trials as f64,
                mean_error,
                mean_iterations,
                failures: grid.trials - ok.len(),
            });
        }
    }
    Ok(rows)
}

const CSV_HEADER: [&str; 13] = [
    "cell_index",
    "problem",
    "sampler",
    "n",
    "r",
    "rho",
    "m",
    "trials",
    "successes",
    "success_prob",
    "mean_error",
    "mean_iterations",
    "failures",
];

/// CSV with a fixed header; floats use the shortest round-trip form.
pub fn write_phase_csv<W: Write>(rows: &[PhaseRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    let csv_err = |e: csv::Error| LrdError::Io(std::io::Error::other(e.to_string()));
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for row in rows {
        let problem = match row.problem {
            Problem::Mc => "mc",
            Problem::Rpca => "rpca",
        };
        w.write_record([
            row.cell_index.to_string(),
            problem.to_string(),
            row.sampler.name().to_string(),
            row.n.to_string(),
            row.r.to_string(),
            row.rho.to_string(),
            row.m.to_string(),
            row.trials.to_string(),
            row.successes.to_string(),
            row.success_prob.to_string(),
            row.mean_error.to_string(),
            row.mean_iterations.to_string(),
            row.failures.to_string(),
        ])
        .map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Args, Debug)]
pub(crate) struct PhaseArgs {
    /// Grid file, or a manifest written by an earlier `lrd phase`
    #[arg(long)]
    config: PathBuf,
    /// Worker threads
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output directory (defaults to the manifest's when re-running one)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PhaseParams {
    grid: PhaseGrid,
    out: PathBuf,
}

pub(crate) fn cmd_phase(args: PhaseArgs) -> Result<i32> {
    let run = Run::start("phase");
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        LrdError::Io(std::io::Error::new(e.kind(), format!("{}: {e}", args.config.display())))
    })?;
    let value: Value = serde_json::from_str(&text)?;
    let (grid, recorded_out) = if value.get("command").is_some() {
        let manifest: RunManifest = serde_json::from_value(value)?;
        if manifest.command != "phase" {
            return Err(LrdError::arg(format!("manifest records command `{}`", manifest.command)));
        }
        let p: PhaseParams = serde_json::from_value(manifest.params)?;
        (p.grid, Some(p.out))
    } else {
        (serde_json::from_value::<PhaseGrid>(value)?, None)
    };
    let out = args
        .out
        .or(recorded_out)
        .ok_or_else(|| LrdError::arg("missing --out"))?;
    let rows = run_phase(&grid, args.jobs)?;
    ensure_dir(&out)?;
    let file = std::fs::File::create(out.join(PHASE_CSV))?;
    write_phase_csv(&rows, std::io::BufWriter::new(file))?;
    let params = PhaseParams { grid, out: out.clone() };
    let seed = params.grid.seed;
    run.finish(&out, &params, Some(seed), &[PHASE_CSV])?;
    for row in &rows {
        println!(
            "cell {:>3} {:<9} n={:<4} r={:<2} rho={:<6} success {}/{}",
            row.cell_index,
            row.sampler.name(),
            row.n,
            row.r,
            row.rho,
            row.successes,
            row.trials
        );
    }
    Ok(exit::OK)
}
