use nalgebra::DMatrix;

use super::{SolveReport, SolverConfig, Status};
use crate::error::{LrdError, Result};
use crate::linalg::{svd_raw, DenseMatrix, DEFAULT_RANK_TOL};
use crate::rng::Rng;

const ARMIJO_C: f64 = 1e-4;
const MIN_STEP: f64 = 1e-30;

#[derive(Clone, Debug)]
pub struct FactoredSolution {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    /// `solution = AB`, `primal_value` is the final `½‖Ŷ − AB‖_F²`,
    /// `residual_trace` holds gradient norms
    pub report: SolveReport,
}

fn objective(y: &DMatrix<f64>, a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    0.5 * (a * b - y).norm_squared()
}

/// Gradient descent on `½‖Ŷ − AB‖_F²` with Armijo backtracking (`c = 1e-4`,
/// halving; each accepted step doubles the next trial step). `A`, `B` start
/// as seeded Gaussians scaled so that `‖AB‖_F ≈ σ_1(Ŷ)/√r`; the stopping test is
/// `‖(∇_A, ∇_B)‖_F ≤ tol`.
pub fn solve_factored_gd(y: &DenseMatrix, r: usize, cfg: &SolverConfig) -> Result<FactoredSolution> {
    cfg.validate()?;
    let (n1, n2) = y.shape();
    if r == 0 || r > n1.min(n2) {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", n1.min(n2))));
    }
    let ym = y.as_nalgebra();
    let sigma1 = svd_raw(ym, DEFAULT_RANK_TOL)?.sigma[0].max(f64::MIN_POSITIVE);
    let mut rng = Rng::new(cfg.seed);
    let sa = (sigma1 / (r as f64 * n1 as f64)).sqrt();
    let sb = (sigma1 / (r as f64 * n2 as f64)).sqrt();
    let mut a = DMatrix::from_fn(n1, r, |_, _| sa * rng.gaussian());
    let mut b = DMatrix::from_fn(r, n2, |_, _| sb * rng.gaussian());

    let mut f = objective(ym, &a, &b);
    let mut step = 1.0 / (sigma1 * sigma1);
    let mut trace = Vec::new();
    let mut status = Status::MaxIters;
    let mut failure = None;
    let mut iterations = cfg.max_iters;
    for k in 1..=cfg.max_iters {
        let g = &a * &b - ym;
        let ga = &g * b.transpose();
        let gb = a.transpose() * &g;
        let gnorm_sq = ga.norm_squared() + gb.norm_squared();
        let gnorm = gnorm_sq.sqrt();
        if !gnorm.is_finite() || !f.is_finite() {
            status = Status::NumericalFailure;
            failure = Some(format!("non-finite gradient at iteration {k}"));
            iterations = k;
            trace.push(gnorm);
            break;
        }
        let done = gnorm <= cfg.tol;
        if k % cfg.log_every == 0 || done || k == cfg.max_iters {
            trace.push(gnorm);
        }
        if done {
            status = Status::Converged;
            iterations = k;
            break;
        }
        loop {
            let a_new = &a - step * &ga;
            let b_new = &b - step * &gb;
            let f_new = objective(ym, &a_new, &b_new);
            if f_new <= f - ARMIJO_C * step * gnorm_sq {
                a = a_new;
                b = b_new;
                f = f_new;
                step *= 2.0;
                break;
            }
            step *= 0.5;
            if step < MIN_STEP {
                break;
            }
        }
        if step < MIN_STEP {
            // no descent possible at machine precision: a stationary point up to round-off
            status = Status::Converged;
            iterations = k;
            trace.push(gnorm);
            break;
        }
    }
    let ab = &a * &b;
    let report = SolveReport {
        solution: DenseMatrix::from_nalgebra(ab).unwrap_or_else(|_| DenseMatrix::zeros(n1, n2)),
        second: None,
        iterations_run: iterations,
        residual_trace: trace,
        primal_value: f,
        dual_value: None,
        duality_gap: None,
        status,
        failure,
    };
    Ok(FactoredSolution {
        a: DenseMatrix::from_nalgebra(a).unwrap_or_else(|_| DenseMatrix::zeros(n1, r)),
        b: DenseMatrix::from_nalgebra(b).unwrap_or_else(|_| DenseMatrix::zeros(r, n2)),
        report,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_lowrank;

    #[test]
    fn exact_fit_when_rank_allows() {
        let (y, ..) = gen_lowrank(8, 6, 2, &[2.0, 1.0], 3).unwrap();
        let sol = solve_factored_gd(&y, 2, &SolverConfig::default()).unwrap();
        assert!(sol.report.primal_value <= 1e-8, "{}", sol.report.primal_value);
    }

    #[test]
    fn diagonal_tail_value() {
        let y = DenseMatrix::from_diagonal(3, 3, &[3.0, 2.0, 1.0]).unwrap();
        let sol = solve_factored_gd(&y, 1, &SolverConfig::default()).unwrap();
        assert!((sol.report.primal_value - 2.5).abs() <= 1e-8, "{}", sol.report.primal_value);
    }

    #[test]
    fn objective_never_increases_from_init() {
        let y = DenseMatrix::gaussian(7, 5, &mut Rng::new(4));
        let cfg = SolverConfig {
            max_iters: 1,
            ..Default::default()
        };
        let first = solve_factored_gd(&y, 2, &cfg).unwrap().report.primal_value;
        let later = solve_factored_gd(&y, 2, &SolverConfig::default()).unwrap().report.primal_value;
        assert!(later <= first);
    }
}
