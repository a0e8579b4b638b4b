use nalgebra::DMatrix;

use super::{dr_loop, finish, SolveReport, SolverConfig};
use crate::error::{LrdError, Result};
use crate::linalg::{DenseMatrix, SupportSet};
use crate::rstar::{prox_rstar_raw, rstar_norm};

/// `min ‖X‖_{r*}` subject to `P_Ω(X) = P_Ω(X*)`. Splitting with `g` the
/// indicator of the observation set (prox overwrites the observed entries) and
/// `f = ‖·‖_{r*}`. Starts from the zero-filled observations.
pub fn solve_mc_bidual(
    obs: &SupportSet,
    obs_values: &DenseMatrix,
    r: usize,
    cfg: &SolverConfig,
) -> Result<SolveReport> {
    cfg.validate()?;
    obs_values.check_shape(obs.shape())?;
    if obs.is_empty() {
        return Err(LrdError::arg("observation set is empty"));
    }
    let (n1, n2) = obs.shape();
    if r == 0 || r > n1.min(n2) {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", n1.min(n2))));
    }
    let values = obs.apply(obs_values.as_nalgebra(), false);
    if &values != obs_values.as_nalgebra() {
        return Err(LrdError::arg("observed values are not supported on the observation set"));
    }
    let gamma = cfg.gamma;
    let prox_g = |z: &DMatrix<f64>| {
        let mut x = obs.apply(z, true);
        x += &values;
        Ok(x)
    };
    let prox_f = |m: &DMatrix<f64>| prox_rstar_raw(m, r, gamma);
    let run = dr_loop(prox_f, prox_g, values.clone(), cfg);
    Ok(finish(run, None, |x| rstar_norm(x, r)))
}
