use serde::Serialize;

use crate::error::{LrdError, Result};
use crate::linalg::{schatten_r_sq, svd_r, DenseMatrix, SupportSet};

/// Primal and dual objective values of the completion problem at a factor pair
/// and a multiplier.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapReport {
    /// `½‖AB‖_F²`
    pub primal: f64,
    /// `−⟨Λ, P_Ω(X*)⟩ − ½‖Λ‖_r²`
    pub dual: f64,
    pub gap: f64,
    /// `gap / primal` (zero when both vanish)
    pub relative_gap: f64,
    /// `‖AB − svd_r(−Λ)‖_F`
    pub relation_residual: f64,
    /// `relation_residual / ‖AB‖_F`
    pub relation_relative: f64,
    /// `‖P_Ω(AB) − P_Ω(X*)‖_F`
    pub feasibility_residual: f64,
    /// `‖AB − X̂‖_F`
    pub factor_mismatch: f64,
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

/// Requires `Λ ∈ Ω` up to `1e-10 · max(1, ‖Λ‖_F)`.
pub fn duality_gap_mc(
    x_hat: &DenseMatrix,
    a: &DenseMatrix,
    b: &DenseMatrix,
    lambda: &DenseMatrix,
    obs: &SupportSet,
    obs_values: &DenseMatrix,
    r: usize,
) -> Result<GapReport> {
    let ab = a.matmul(b)?;
    for m in [x_hat, lambda, obs_values] {
        m.check_shape(ab.shape())?;
    }
    obs_values.check_shape(obs.shape())?;
    let off = obs.apply(lambda.as_nalgebra(), true).norm();
    if off > 1e-10 * lambda.frobenius_norm().max(1.0) {
        return Err(LrdError::Precondition(format!(
            "multiplier has mass {off:.3e} off the observation set"
        )));
    }
    let primal = 0.5 * ab.frobenius_norm().powi(2);
    let dual = -lambda.dot(obs_values) - 0.5 * schatten_r_sq(lambda, r)?;
    let gap = primal - dual;
    let relation_residual = (&ab - &svd_r(&-lambda, r)?).frobenius_norm();
    let feasibility_residual =
        (obs.apply(ab.as_nalgebra(), false) - obs_values.as_nalgebra()).norm();
    Ok(GapReport {
        primal,
        dual,
        gap,
        relative_gap: ratio(gap, primal),
        relation_relative: ratio(relation_residual, ab.frobenius_norm()),
        relation_residual,
        feasibility_residual,
        factor_mismatch: (&ab - x_hat).frobenius_norm(),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition31Report {
    pub holds: bool,
    /// `‖ABBᵀ + ΛBᵀ‖_F`
    pub residual_a: f64,
    /// `‖AᵀAB + AᵀΛ‖_F`
    pub residual_b: f64,
    /// `tol · (1 + ‖AB‖_F)`
    pub threshold: f64,
}

/// Stationarity of the Lagrangian in `A` and `B`:
/// `−ABBᵀ = ΛBᵀ` and `Aᵀ(−AB) = AᵀΛ`.
pub fn check_condition_31(
    a: &DenseMatrix,
    b: &DenseMatrix,
    lambda: &DenseMatrix,
    tol: f64,
) -> Result<Condition31Report> {
    let ab = a.matmul(b)?;
    lambda.check_shape(ab.shape())?;
    let (am, bm, lm, abm) = (a.as_nalgebra(), b.as_nalgebra(), lambda.as_nalgebra(), ab.as_nalgebra());
    let residual_a = ((abm + lm) * bm.transpose()).norm();
    let residual_b = (am.transpose() * (abm + lm)).norm();
    let threshold = tol * (1.0 + ab.frobenius_norm());
    Ok(Condition31Report {
        holds: residual_a <= threshold && residual_b <= threshold,
        residual_a,
        residual_b,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::gen_lowrank;
    use crate::linalg::{svd, DEFAULT_RANK_TOL};
    use crate::rng::Rng;

    #[test]
    fn exact_certificate_under_full_observation() {
        let (x, a, b) = gen_lowrank(6, 5, 2, &[2.0, 1.0], 1).unwrap();
        let full = SupportSet::full(6, 5);
        let rep = duality_gap_mc(&x, &a, &b, &-&x, &full, &x, 2).unwrap();
        assert!(rep.gap.abs() <= 1e-10, "{}", rep.gap);
        assert!(rep.relation_residual <= 1e-10);
    }

    #[test]
    fn weak_duality_for_feasible_pairs() {
        let (x, a, b) = gen_lowrank(6, 6, 1, &[1.0], 2).unwrap();
        let obs = SupportSet::new(6, 6, (0..6).flat_map(|i| [(i, i), (i, (i + 1) % 6)]).collect()).unwrap();
        let vals = DenseMatrix::wrap(obs.apply(x.as_nalgebra(), false));
        let mut rng = Rng::new(3);
        for _ in 0..20 {
            let lam = DenseMatrix::wrap(obs.apply(DenseMatrix::gaussian(6, 6, &mut rng).as_nalgebra(), false));
            let rep = duality_gap_mc(&x, &a, &b, &lam, &obs, &vals, 1).unwrap();
            assert!(rep.gap >= -1e-8, "{}", rep.gap);
        }
        let dense = DenseMatrix::gaussian(6, 6, &mut rng);
        assert!(matches!(
            duality_gap_mc(&x, &a, &b, &dense, &obs, &vals, 1),
            Err(LrdError::Precondition(_))
        ));
    }

    #[test]
    fn condition_31_cases() {
        let mut rng = Rng::new(5);
        let a = DenseMatrix::gaussian(5, 2, &mut rng);
        let lam = DenseMatrix::gaussian(5, 4, &mut rng);
        let zero_b = check_condition_31(&a, &DenseMatrix::zeros(2, 4), &lam, 1e-10).unwrap();
        assert_eq!(zero_b.residual_a, 0.0);
        let zero = check_condition_31(&DenseMatrix::zeros(5, 2), &DenseMatrix::zeros(2, 4), &lam, 1e-10);
        assert!(zero.unwrap().holds);

        let f = svd(&-&lam, DEFAULT_RANK_TOL).unwrap();
        let mut a2 = f.u.columns(0, 2).into_owned();
        for j in 0..2 {
            a2.column_mut(j).scale_mut(f.sigma[j]);
        }
        let b2 = f.v.columns(0, 2).transpose();
        let (a2, b2) = (DenseMatrix::wrap(a2), DenseMatrix::wrap(b2));
        assert!(check_condition_31(&a2, &b2, &lam, 1e-10).unwrap().holds);

        let b3 = DenseMatrix::gaussian(2, 4, &mut rng);
        let rep = check_condition_31(&a, &b3, &lam, 1e-10).unwrap();
        assert!(!rep.holds);
        assert!(rep.residual_a > 1e-3);
    }
}
