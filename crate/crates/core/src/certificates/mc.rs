use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{equality_tol, CertificateReport, Condition, Construction, GolfingConfig};
use crate::error::{LrdError, Result};
use crate::linalg::{
    composed_projector_norm, svd_raw, Composition, DenseMatrix, SupportSet, TangentSpace,
    DEFAULT_POWER_ITERS, DEFAULT_RANK_TOL,
};
use crate::rng::{derive_seed, Rng};

#[derive(Clone, Debug)]
pub struct LsCertificate {
    /// `Λ = −P_Ω Z` with `P_T P_Ω P_T Z = X*`, `Z ∈ T`
    pub lambda: DenseMatrix,
    pub cg_iterations: usize,
    /// `‖P_T P_Ω P_T Z − X*‖_F / ‖X*‖_F`
    pub cg_residual: f64,
    /// `‖Z_cg − Z_neumann‖_F / ‖X*‖_F`
    pub neumann_discrepancy: f64,
    pub neumann_terms: usize,
    /// power-iteration estimate of `‖P_{Ω⊥} P_T‖`
    pub omega_perp_t_norm: f64,
}

fn check_shapes(x_star: &DenseMatrix, t: &TangentSpace, obs: &SupportSet) -> Result<()> {
    x_star.check_shape(t.shape())?;
    x_star.check_shape(obs.shape())
}

/// `Σ_k (P_T P_{Ω⊥} P_T)^k (rhs)`, truncated once a term drops below
/// `term_tol · ‖rhs‖_F` or after `max_terms` terms. Returns the sum and the
/// number of terms used.
pub fn neumann_inverse_on_t(
    t: &TangentSpace,
    obs: &SupportSet,
    rhs: &DenseMatrix,
    term_tol: f64,
    max_terms: usize,
) -> Result<(DenseMatrix, usize)> {
    rhs.check_shape(t.shape())?;
    rhs.check_shape(obs.shape())?;
    let b = t.project_raw(rhs.as_nalgebra());
    let threshold = term_tol * b.norm();
    let mut term = b.clone();
    let mut sum = b;
    let mut used = 1;
    while used < max_terms && term.norm() > threshold {
        term = t.project_raw(&obs.apply(&term, true));
        sum += &term;
        used += 1;
    }
    Ok((DenseMatrix::wrap(sum), used))
}

/// Least-squares certificate `Λ = −P_Ω P_T (P_T P_Ω P_T)^{-1} X*`. The inverse on
/// `T` is computed by conjugate gradients; a Neumann series solve is kept as a
/// cross-check and its discrepancy reported. `cg_iters = 0` selects `10 · dim T`.
pub fn build_certificate_ls_mc(
    x_star: &DenseMatrix,
    t: &TangentSpace,
    obs: &SupportSet,
    cg_tol: f64,
    cg_iters: usize,
) -> Result<LsCertificate> {
    check_shapes(x_star, t, obs)?;
    if !(cg_tol > 0.0) {
        return Err(LrdError::arg("cg_tol must be positive"));
    }
    let cap = if cg_iters == 0 { 10 * t.dim() } else { cg_iters };
    let omega_perp_t_norm =
        composed_projector_norm(t, obs, Composition::OmegaPerpT, DEFAULT_POWER_ITERS)?;
    if omega_perp_t_norm >= 1.0 - 1e-9 {
        return Err(LrdError::IllPosed(format!(
            "‖P_Ω⊥ P_T‖ ≈ {omega_perp_t_norm:.6}: T meets the unobserved entries"
        )));
    }

    let op = |z: &DMatrix<f64>| t.project_raw(&obs.apply(z, false));
    let rhs = t.project_raw(x_star.as_nalgebra());
    let rhs_norm = rhs.norm();
    let (n1, n2) = t.shape();
    let mut z = DMatrix::<f64>::zeros(n1, n2);
    let mut iterations = 0;
    if rhs_norm > 0.0 {
        let mut res = rhs.clone();
        let mut p = res.clone();
        let mut rr = res.norm_squared();
        loop {
            if rr.sqrt() <= cg_tol * rhs_norm {
                break;
            }
            if iterations >= cap {
                return Err(LrdError::IllPosed(format!(
                    "conjugate gradients stalled after {iterations} iterations (relative residual {:.3e})",
                    rr.sqrt() / rhs_norm
                )));
            }
            let ap = op(&p);
            let curvature = p.dot(&ap);
            if !(curvature > 1e-14 * p.norm_squared()) {
                return Err(LrdError::IllPosed(
                    "P_T P_Ω P_T is singular on T (nonzero element of T vanishes on Ω)".into(),
                ));
            }
            let alpha = rr / curvature;
            z += alpha * &p;
            res -= alpha * &ap;
            let rr_new = res.norm_squared();
            p = &res + (rr_new / rr) * &p;
            rr = rr_new;
            iterations += 1;
        }
    }
    let cg_residual = if rhs_norm > 0.0 {
        (op(&z) - &rhs).norm() / rhs_norm
    } else {
        0.0
    };
    let (z_neumann, neumann_terms) = neumann_inverse_on_t(t, obs, x_star, cg_tol, cap.max(1))?;
    let neumann_discrepancy = if rhs_norm > 0.0 {
        (z_neumann.as_nalgebra() - &z).norm() / rhs_norm
    } else {
        0.0
    };
    let lambda = -obs.apply(&z, false);
    Ok(LsCertificate {
        lambda: DenseMatrix::from_nalgebra(lambda)?,
        cg_iterations: iterations,
        cg_residual,
        neumann_discrepancy,
        neumann_terms,
        omega_perp_t_norm,
    })
}

#[derive(Clone, Debug)]
pub struct GolfingCertificate {
    /// `−Λ_b`, signed so that `P_T(−certificate) ≈ X*`
    pub certificate: DenseMatrix,
    /// `‖W_k‖_F` for `k = 0..=b`
    pub trace: Vec<f64>,
    /// union of the partitions: the observation set the certificate lives on
    pub obs: SupportSet,
    /// every step strictly reduced the residual (until it reached round-off)
    pub contracted: bool,
}

/// Golfing scheme: `W_0 = X*`, `Λ_k = q⁻¹ Σ_{j≤k} P_{Ω_j}(W_{j−1})`,
/// `W_k = X* − P_T(Λ_k)`, with `Ω_j` an independent Bernoulli(`q`) draw from
/// `derive_seed(seed, [j])`.
pub fn build_certificate_golfing_mc(
    x_star: &DenseMatrix,
    t: &TangentSpace,
    cfg: &GolfingConfig,
) -> Result<GolfingCertificate> {
    cfg.validate()?;
    x_star.check_shape(t.shape())?;
    let (n1, n2) = t.shape();
    let x = x_star.as_nalgebra();
    let mut w = x.clone();
    let mut acc = DMatrix::<f64>::zeros(n1, n2);
    let mut union = vec![false; n1 * n2];
    let mut trace = vec![w.norm()];
    for j in 1..=cfg.b {
        let mut rng = Rng::new(derive_seed(cfg.seed, &[j as u64]));
        let mask: Vec<bool> = (0..n1 * n2).map(|_| rng.bernoulli(cfg.q)).collect();
        let part = SupportSet::from_mask(n1, n2, mask);
        for (u, m) in union.iter_mut().zip(part.mask()) {
            *u |= *m;
        }
        acc += part.apply(&w, false) / cfg.q;
        w = x - t.project_raw(&acc);
        trace.push(w.norm());
    }
    // a residual already at round-off level counts as contracted
    let floor = 1e-14 * trace[0];
    let contracted = trace.windows(2).all(|p| p[1] < p[0] || p[0] <= floor);
    Ok(GolfingCertificate {
        certificate: DenseMatrix::from_nalgebra(-acc)?,
        trace,
        obs: SupportSet::from_mask(n1, n2, union),
        contracted,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerifyMode {
    /// `Λ ∈ Ω`, `P_T(−Λ) = X*`, `‖P_{T⊥}Λ‖ < (2/3)σ_r`
    Exact,
    /// `Λ ∈ Ω`, `‖P_T(−Λ) − X*‖_F ≤ √(r/(3n_(1)²))σ_r`, `‖P_{T⊥}Λ‖ < σ_r/3`
    Relaxed,
}

/// Evaluates the completion dual conditions. Equality-type conditions use the
/// slack `1e-8 · max(1, ‖X*‖_F)`.
pub fn verify_mc_certificate(
    lambda: &DenseMatrix,
    x_star: &DenseMatrix,
    t: &TangentSpace,
    obs: &SupportSet,
    mode: VerifyMode,
) -> Result<CertificateReport> {
    check_shapes(x_star, t, obs)?;
    lambda.check_shape(t.shape())?;
    let r = t.rank();
    let sigma_r = if r == 0 {
        0.0
    } else {
        svd_raw(x_star.as_nalgebra(), DEFAULT_RANK_TOL)?.sigma[r - 1]
    };
    let lam = lambda.as_nalgebra();
    let eq = equality_tol(x_star.frobenius_norm());
    let off_support = obs.apply(lam, true).norm();
    let t_residual = (t.project_raw(&-lam) - x_star.as_nalgebra()).norm();
    let perp = t.project_perp_raw(lam);
    let perp_norm = svd_raw(&perp, DEFAULT_RANK_TOL)?.sigma[0];
    let (n1, n2) = t.shape();
    let n = n1.max(n2) as f64;
    let conditions = match mode {
        VerifyMode::Exact => vec![
            Condition::new("lambda_in_omega", off_support, eq, false),
            Condition::new("tangent_equality", t_residual, eq, false),
            Condition::new("perp_norm", perp_norm, 2.0 / 3.0 * sigma_r, true),
        ],
        VerifyMode::Relaxed => vec![
            Condition::new("lambda_in_omega", off_support, eq, false),
            Condition::new(
                "tangent_residual",
                t_residual,
                (r as f64 / (3.0 * n * n)).sqrt() * sigma_r,
                false,
            ),
            Condition::new("perp_norm", perp_norm, sigma_r / 3.0, true),
        ],
    };
    Ok(CertificateReport {
        certificate: lambda.clone(),
        conditions,
        construction: Construction::UserSupplied,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instances::{MCInstance, Sampler};

    fn instance(n: usize, m: usize, seed: u64) -> (MCInstance, TangentSpace) {
        let inst = MCInstance::generate(n, n, 2, &[1.0, 1.0], Sampler::Uniform { m }, seed).unwrap();
        let t = TangentSpace::at(&inst.x_star, 2).unwrap();
        (inst, t)
    }

    #[test]
    fn full_observation_ls_is_minus_truth() {
        let (inst, t) = instance(12, 144, 1);
        let ls = build_certificate_ls_mc(&inst.x_star, &t, &inst.obs, 1e-12, 0).unwrap();
        assert!((&ls.lambda + &inst.x_star).frobenius_norm() <= 1e-12);
        let rep = verify_mc_certificate(&ls.lambda, &inst.x_star, &t, &inst.obs, VerifyMode::Exact).unwrap();
        assert!(rep.passed());
        let c = rep.condition("perp_norm").unwrap();
        assert!((c.margin - 2.0 / 3.0).abs() <= 1e-10);
    }

    #[test]
    fn zero_lambda_fails_tangent_condition() {
        let (inst, t) = instance(10, 50, 2);
        let rep = verify_mc_certificate(&DenseMatrix::zeros(10, 10), &inst.x_star, &t, &inst.obs, VerifyMode::Exact)
            .unwrap();
        let c = rep.condition("tangent_equality").unwrap();
        assert!(!c.satisfied);
        assert!((c.lhs - inst.x_star.frobenius_norm()).abs() <= 1e-12);
    }

    #[test]
    fn ls_certificate_is_supported_and_consistent() {
        let (inst, t) = instance(40, 900, 3);
        let ls = build_certificate_ls_mc(&inst.x_star, &t, &inst.obs, 1e-12, 0).unwrap();
        let lam = ls.lambda.as_nalgebra();
        assert!(inst.obs.apply(lam, true).iter().all(|v| *v == 0.0));
        assert!(ls.cg_residual <= 1e-12);
        assert!(ls.neumann_discrepancy <= 1e-10, "{}", ls.neumann_discrepancy);
        let rep = verify_mc_certificate(&ls.lambda, &inst.x_star, &t, &inst.obs, VerifyMode::Exact).unwrap();
        assert!(rep.condition("lambda_in_omega").unwrap().satisfied);
        assert!(rep.condition("tangent_equality").unwrap().satisfied);
    }

    #[test]
    fn undersampled_ls_is_ill_posed_or_fails() {
        let (inst, t) = instance(30, 30, 4);
        match build_certificate_ls_mc(&inst.x_star, &t, &inst.obs, 1e-12, 0) {
            Err(LrdError::IllPosed(_)) => {}
            Ok(ls) => {
                let rep = verify_mc_certificate(&ls.lambda, &inst.x_star, &t, &inst.obs, VerifyMode::Exact)
                    .unwrap();
                assert!(!rep.condition("perp_norm").unwrap().satisfied);
            }
            Err(e) => panic!("unexpected error {e}"),
        }
    }

    #[test]
    fn golfing_full_sampling_kills_residual() {
        let (inst, t) = instance(10, 100, 5);
        let g = build_certificate_golfing_mc(&inst.x_star, &t, &GolfingConfig::new(1, 1.0, 0).unwrap()).unwrap();
        assert!(g.trace[1] <= 1e-12);
        assert_eq!(g.obs, SupportSet::full(10, 10));
    }

    #[test]
    fn golfing_trace_is_the_tangent_residual() {
        let (inst, t) = instance(30, 10, 6);
        let g = build_certificate_golfing_mc(&inst.x_star, &t, &GolfingConfig::new(4, 0.4, 9).unwrap()).unwrap();
        let lambda_b = -&g.certificate;
        let resid = (&DenseMatrix::wrap(t.project_raw(lambda_b.as_nalgebra())) - &inst.x_star).frobenius_norm();
        assert!((resid - g.trace[4]).abs() <= 1e-12);
        assert!(g.obs.apply(g.certificate.as_nalgebra(), true).iter().all(|v| *v == 0.0));
    }
}
