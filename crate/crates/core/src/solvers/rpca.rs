use nalgebra::DMatrix;

use super::{dr_loop, finish, SolveReport, SolverConfig};
use crate::error::{LrdError, Result};
use crate::linalg::DenseMatrix;
use crate::rstar::{prox_rstar_raw, rstar_norm};

fn soft_toward(m: &DMatrix<f64>, d: &DMatrix<f64>, t: f64) -> DMatrix<f64> {
    m.zip_map(d, |m, d| {
        let diff = m - d;
        d + diff.signum() * (diff.abs() - t).max(0.0)
    })
}

/// Prox of `t‖D − ·‖_1` at `M`: each entry moves toward `D_ij` by `min(t, |M_ij − D_ij|)`.
pub fn soft_threshold_toward(m: &DenseMatrix, d: &DenseMatrix, t: f64) -> Result<DenseMatrix> {
    m.check_shape(d.shape())?;
    if !(t >= 0.0) {
        return Err(LrdError::arg("threshold must be nonnegative"));
    }
    DenseMatrix::from_nalgebra(soft_toward(m.as_nalgebra(), d.as_nalgebra(), t))
}

/// `min ‖X‖_{r*} + λ‖D − X‖_1`, returning `X̂` and `Ŝ = D − X̂`.
/// Splitting with `f = ‖·‖_{r*}` and `g = λ‖D − ·‖_1`, started at `z = D`.
pub fn solve_rpca_bidual(
    d: &DenseMatrix,
    r: usize,
    lambda: f64,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(LrdError::arg("lambda must be positive"));
    }
    let (n1, n2) = d.shape();
    if r == 0 || r > n1.min(n2) {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", n1.min(n2))));
    }
    let gamma = cfg.gamma;
    let dm = d.as_nalgebra();
    let prox_g = |z: &DMatrix<f64>| Ok(soft_toward(z, dm, gamma * lambda));
    let prox_f = |m: &DMatrix<f64>| prox_rstar_raw(m, r, gamma);
    let run = dr_loop(prox_f, prox_g, dm.clone(), cfg);
    let s_hat = dm - &run.x;
    let l1 = s_hat.iter().map(|v| v.abs()).sum::<f64>();
    Ok(finish(run, Some(s_hat), |x| Ok(rstar_norm(x, r)? + lambda * l1)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_lowrank;
    use crate::solvers::Status;

    #[test]
    fn soft_threshold_identity() {
        let m = DenseMatrix::from_row_major(1, 3, &[5.0, 0.2, -3.0]).unwrap();
        let d = DenseMatrix::from_row_major(1, 3, &[1.0, 0.0, 0.0]).unwrap();
        let p = soft_threshold_toward(&m, &d, 0.5).unwrap();
        assert_eq!(p.to_row_major(), vec![4.5, 0.0, -2.5]);
    }

    #[test]
    fn uncorrupted_low_rank_is_kept() {
        let (x, ..) = gen_lowrank(12, 10, 1, &[1.0], 2).unwrap();
        let rep = solve_rpca_bidual(&x, 1, 10.0, &SolverConfig::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!((&rep.solution - &x).frobenius_norm() <= 1e-7);
        let s = rep.second.unwrap();
        assert!(s.max_abs() <= 1e-7);
        assert_eq!(&rep.solution + &s, x);
    }

    #[test]
    fn rejects_bad_lambda() {
        let x = DenseMatrix::zeros(3, 3);
        assert!(solve_rpca_bidual(&x, 1, 0.0, &SolverConfig::default()).is_err());
    }
}
