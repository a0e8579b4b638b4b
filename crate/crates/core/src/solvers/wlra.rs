use nalgebra::DMatrix;

use super::{dr_loop, finish, SolveReport, SolverConfig};
use crate::error::{LrdError, Result};
use crate::linalg::DenseMatrix;
use crate::rstar::{prox_rstar_raw, rstar_norm};

/// Prox of `γ β w² (y − ·)²` at `m`: `(m + 2γβw²y) / (1 + 2γβw²)`.
pub fn wlra_prox_entry(m: f64, y: f64, w: f64, beta: f64, gamma: f64) -> f64 {
    let k = 2.0 * gamma * beta * w * w;
    (m + k * y) / (1.0 + k)
}

/// `min β Σ W_ij² (Y_ij − M_ij)² + ‖M‖_{r*}`, started at `z = Y`.
pub fn solve_weighted_lra(
    y: &DenseMatrix,
    w: &DenseMatrix,
    beta: f64,
    r: usize,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    w.check_shape(y.shape())?;
    if !(beta > 0.0) || !beta.is_finite() {
        return Err(LrdError::arg("beta must be positive"));
    }
    let (n1, n2) = y.shape();
    if r == 0 || r > n1.min(n2) {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", n1.min(n2))));
    }
    let gamma = cfg.gamma;
    let (ym, wm) = (y.as_nalgebra(), w.as_nalgebra());
    let prox_g = |z: &DMatrix<f64>| {
        Ok(DMatrix::from_fn(n1, n2, |i, j| {
            wlra_prox_entry(z[(i, j)], ym[(i, j)], wm[(i, j)], beta, gamma)
        }))
    };
    let prox_f = |m: &DMatrix<f64>| prox_rstar_raw(m, r, gamma);
    let run = dr_loop(prox_f, prox_g, ym.clone(), cfg);
    Ok(finish(run, None, |m| {
        let h: f64 = ym
            .iter()
            .zip(wm.iter())
            .zip(m.as_nalgebra().iter())
            .map(|((y, w), m)| w * w * (y - m).powi(2))
            .sum();
        Ok(beta * h + rstar_norm(m, r)?)
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::Rng;
    use crate::rstar::prox_rstar;
    use crate::solvers::Status;

    #[test]
    fn prox_entry_arithmetic() {
        assert!((wlra_prox_entry(0.0, 2.0, 1.0, 1.0, 1.0) - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(wlra_prox_entry(0.7, 2.0, 0.0, 1.0, 1.0), 0.7);
    }

    #[test]
    fn zero_weights_give_zero() {
        let y = DenseMatrix::gaussian(4, 4, &mut Rng::new(1));
        let rep = solve_weighted_lra(&y, &DenseMatrix::zeros(4, 4), 1.0, 2, &SolverConfig::default())
            .unwrap();
        assert_eq!(rep.status, Status::Converged);
        assert!(rep.solution.frobenius_norm() <= 1e-8);
    }

    #[test]
    fn unit_weights_match_closed_form() {
        // with W = 1 the program is the prox of ‖·‖_{r*} with step 1/(2β) at Y
        let y = DenseMatrix::gaussian(4, 4, &mut Rng::new(2));
        let beta = 50.0;
        let ones = DenseMatrix::from_fn(4, 4, |_, _| 1.0).unwrap();
        let rep = solve_weighted_lra(&y, &ones, beta, 1, &SolverConfig::default()).unwrap();
        assert_eq!(rep.status, Status::Converged);
        let expect = prox_rstar(&y, 1, 0.5 / beta).unwrap();
        assert!((&rep.solution - &expect).frobenius_norm() <= 1e-6);
    }
}
