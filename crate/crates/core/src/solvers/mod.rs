//! Douglas-Rachford splitting for the convex bi-dual programs, the factored
//! non-convex primal solver, and duality-gap evaluation.

mod duality;
mod factored;
mod mc;
mod rpca;
mod wlra;

pub use duality::{check_condition_31, duality_gap_mc, Condition31Report, GapReport};
pub use factored::{solve_factored_gd, FactoredSolution};
pub use mc::solve_mc_bidual;
pub use rpca::{soft_threshold_toward, solve_rpca_bidual};
pub use wlra::{solve_weighted_lra, wlra_prox_entry};

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::linalg::DenseMatrix;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolverConfig {
    pub max_iters: usize,
    /// relative fixed-point residual threshold
    pub tol: f64,
    /// prox step
    pub gamma: f64,
    pub seed: u64,
    /// record the residual every `log_every` iterations (and at termination)
    pub log_every: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            max_iters: 5000,
            tol: 1e-9,
            gamma: 1.0,
            seed: 0,
            log_every: 1,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 {
            return Err(LrdError::arg("max_iters must be at least 1"));
        }
        if !(self.tol > 0.0) {
            return Err(LrdError::arg("tol must be positive"));
        }
        if !(self.gamma > 0.0) || !self.gamma.is_finite() {
            return Err(LrdError::arg("gamma must be positive"));
        }
        if self.log_every == 0 {
            return Err(LrdError::arg("log_every must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Converged,
    MaxIters,
    NumericalFailure,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub solution: DenseMatrix,
    /// `Ŝ` for robust PCA
    pub second: Option<DenseMatrix>,
    pub iterations_run: usize,
    pub residual_trace: Vec<f64>,
    pub primal_value: f64,
    pub dual_value: Option<f64>,
    pub duality_gap: Option<f64>,
    pub status: Status,
    /// set when `status` is `NumericalFailure`
    pub failure: Option<String>,
}

impl SolveReport {
    pub fn set_dual(&mut self, dual: f64) {
        self.dual_value = Some(dual);
        self.duality_gap = Some(self.primal_value - dual);
    }
}

/// Raw outcome of the splitting loop, before problem-specific objective values.
pub(crate) struct DrRun {
    pub x: DMatrix<f64>,
    pub iterations: usize,
    pub trace: Vec<f64>,
    pub status: Status,
    pub failure: Option<String>,
}

/// `x = prox_g(z); y = prox_f(2x − z); z ← z + y − x`, stopping once
/// `‖Δz‖_F / max(1, ‖z‖_F) ≤ tol`. The closures already include the step.
pub(crate) fn dr_loop(
    mut prox_f: impl FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    mut prox_g: impl FnMut(&DMatrix<f64>) -> Result<DMatrix<f64>>,
    z0: DMatrix<f64>,
    cfg: &SolverConfig,
) -> DrRun {
    let mut z = z0;
    let mut x = z.clone();
    let mut trace = Vec::new();
    let fail = |x: DMatrix<f64>, k: usize, trace: Vec<f64>, msg: String| DrRun {
        x,
        iterations: k,
        trace,
        status: Status::NumericalFailure,
        failure: Some(msg),
    };
    for k in 1..=cfg.max_iters {
        x = match prox_g(&z) {
            Ok(v) => v,
            Err(e) => return fail(x, k, trace, e.to_string()),
        };
        let reflected = 2.0 * &x - &z;
        let y = match prox_f(&reflected) {
            Ok(v) => v,
            Err(e) => return fail(x, k, trace, e.to_string()),
        };
        let step = y - &x;
        let z_norm = z.norm();
        let residual = step.norm() / z_norm.max(1.0);
        z += step;
        if !residual.is_finite() || !x.iter().all(|v| v.is_finite()) {
            trace.push(residual);
            return fail(x, k, trace, format!("non-finite iterate at iteration {k}"));
        }
        let done = residual <= cfg.tol;
        if k % cfg.log_every == 0 || done || k == cfg.max_iters {
            trace.push(residual);
        }
        if done {
            return DrRun {
                x,
                iterations: k,
                trace,
                status: Status::Converged,
                failure: None,
            };
        }
    }
    DrRun {
        x,
        iterations: cfg.max_iters,
        trace,
        status: Status::MaxIters,
        failure: None,
    }
}

/// Douglas-Rachford on `min f + g`, with `prox_f`, `prox_g` the prox maps of
/// `γf`, `γg` for the configured step. Reports `x = prox_g(z)` at termination;
/// `primal_value` is left at zero since `f` and `g` are opaque here.
pub fn douglas_rachford(
    prox_f: impl Fn(&DenseMatrix) -> Result<DenseMatrix>,
    prox_g: impl Fn(&DenseMatrix) -> Result<DenseMatrix>,
    z0: &DenseMatrix,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    let shape = z0.shape();
    let lift = |p: &dyn Fn(&DenseMatrix) -> Result<DenseMatrix>, m: &DMatrix<f64>| {
        let out = p(&DenseMatrix::from_nalgebra(m.clone())?)?;
        out.check_shape(shape)?;
        Ok(out.into_nalgebra())
    };
    let run = dr_loop(
        |m| lift(&prox_f, m),
        |m| lift(&prox_g, m),
        z0.as_nalgebra().clone(),
        cfg,
    );
    Ok(finish(run, None, |_| Ok(0.0)))
}

/// Turns a loop outcome into a report. A non-finite `x` is replaced by zeros
/// (the status already flags the failure).
pub(crate) fn finish(
    run: DrRun,
    second: Option<DMatrix<f64>>,
    primal: impl FnOnce(&DenseMatrix) -> Result<f64>,
) -> SolveReport {
    let (n1, n2) = run.x.shape();
    let mut status = run.status;
    let mut failure = run.failure;
    let solution = DenseMatrix::from_nalgebra(run.x).unwrap_or_else(|_| DenseMatrix::zeros(n1, n2));
    let second = second.map(|s| DenseMatrix::from_nalgebra(s).unwrap_or_else(|_| DenseMatrix::zeros(n1, n2)));
    let primal_value = if status == Status::NumericalFailure {
        f64::NAN
    } else {
        match primal(&solution) {
            Ok(v) => v,
            Err(e) => {
                status = Status::NumericalFailure;
                failure = Some(e.to_string());
                f64::NAN
            }
        }
    };
    SolveReport {
        solution,
        second,
        iterations_run: run.iterations,
        residual_trace: run.trace,
        primal_value,
        dual_value: None,
        duality_gap: None,
        status,
        failure,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        let bad = SolverConfig {
            gamma: 0.0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
        let bad = SolverConfig {
            max_iters: 0,
            ..Default::default()
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn common_quadratic_minimizer() {
        let a = DenseMatrix::gaussian(4, 3, &mut Rng::new(1));
        let cfg = SolverConfig::default();
        // prox of γ·½‖·−A‖² is (m + γA)/(1+γ)
        let prox = |m: &DenseMatrix| Ok((m + &a.scale(cfg.gamma)).scale(1.0 / (1.0 + cfg.gamma)));
        let rep = douglas_rachford(prox, prox, &DenseMatrix::zeros(4, 3), &cfg).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!((&rep.solution - &a).frobenius_norm() < 1e-8);
        assert!(rep.residual_trace.last().unwrap() <= rep.residual_trace.first().unwrap());
    }

    #[test]
    fn intersecting_entry_constraints() {
        // f fixes entry (0,0) = 1, g fixes entry (1,1) = 2; any matrix with both is a solution
        let fix = |i: usize, v: f64| {
            move |m: &DenseMatrix| {
                let mut out = m.as_nalgebra().clone();
                out[(i, i)] = v;
                DenseMatrix::from_nalgebra(out)
            }
        };
        let cfg = SolverConfig::default();
        let z0 = DenseMatrix::gaussian(2, 2, &mut Rng::new(2));
        let rep = douglas_rachford(fix(0, 1.0), fix(1, 2.0), &z0, &cfg).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!((rep.solution.get(0, 0) - 1.0).abs() <= 1e-9);
        assert_eq!(rep.solution.get(1, 1), 2.0);
    }

    #[test]
    fn non_finite_prox_is_flagged() {
        let cfg = SolverConfig::default();
        let good = |m: &DenseMatrix| Ok(m.clone());
        let bad = |_: &DenseMatrix| -> Result<DenseMatrix> {
            Err(LrdError::NumericalFailure("boom".into()))
        };
        let rep = douglas_rachford(bad, good, &DenseMatrix::zeros(2, 2), &cfg).unwrap();
        assert_eq!(rep.status, Status::NumericalFailure);
        assert!(rep.failure.is_some());
    }

    #[test]
    fn max_iters_status_and_trace_length() {
        let cfg = SolverConfig {
            max_iters: 10,
            log_every: 3,
            tol: 1e-300,
            ..Default::default()
        };
        let a = DenseMatrix::gaussian(3, 3, &mut Rng::new(3));
        let prox = |m: &DenseMatrix| Ok((m + &a).scale(0.5));
        let rep = douglas_rachford(prox, prox, &DenseMatrix::zeros(3, 3), &cfg).unwrap();
        assert_eq!(rep.status, Status::MaxIters);
        assert_eq!(rep.iterations_run, 10);
        // iterations 3, 6, 9 and the final 10
        assert_eq!(rep.residual_trace.len(), 4);
    }
}
