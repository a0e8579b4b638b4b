//! Dual certificates: construction and verification for completion
//! (least squares and golfing) and for robust PCA (`W = W^L + W^S`).

mod mc;
mod rpca;

pub use mc::{
    build_certificate_golfing_mc, build_certificate_ls_mc, neumann_inverse_on_t, verify_mc_certificate,
    GolfingCertificate, LsCertificate, VerifyMode,
};
pub use rpca::{build_certificate_rpca, verify_rpca_certificate, RpcaCertificate};

use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::linalg::DenseMatrix;

/// Absolute slack for equality-type conditions: `1e-8 · max(1, scale)`.
pub(crate) fn equality_tol(scale: f64) -> f64 {
    1e-8 * scale.max(1.0)
}

/// One inequality `lhs < bound` (strict) or `lhs ≤ bound`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub name: String,
    pub lhs: f64,
    pub bound: f64,
    pub strict: bool,
    pub satisfied: bool,
    /// `bound − lhs`
    pub margin: f64,
}

impl Condition {
    pub fn new(name: &str, lhs: f64, bound: f64, strict: bool) -> Self {
        let satisfied = if strict { lhs < bound } else { lhs <= bound };
        Condition {
            name: name.to_string(),
            lhs,
            bound,
            strict,
            satisfied,
            margin: bound - lhs,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Construction {
    LeastSquares,
    Golfing,
    RpcaComposite,
    UserSupplied,
}

#[derive(Clone, Debug)]
pub struct CertificateReport {
    pub certificate: DenseMatrix,
    pub conditions: Vec<Condition>,
    pub construction: Construction,
}

impl CertificateReport {
    pub fn passed(&self) -> bool {
        self.conditions.iter().all(|c| c.satisfied)
    }

    pub fn condition(&self, name: &str) -> Option<&Condition> {
        self.conditions.iter().find(|c| c.name == name)
    }

    pub fn with_construction(mut self, construction: Construction) -> Self {
        self.construction = construction;
        self
    }
}

/// `b` partitions, each a Bernoulli(`q`) draw seeded by `derive_seed(seed, [j])`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GolfingConfig {
    pub b: usize,
    pub q: f64,
    pub seed: u64,
}

impl GolfingConfig {
    pub fn new(b: usize, q: f64, seed: u64) -> Result<Self> {
        let cfg = GolfingConfig { b, q, seed };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.b == 0 {
            return Err(LrdError::arg("b must be at least 1"));
        }
        if !(self.q > 0.0 && self.q <= 1.0) {
            return Err(LrdError::arg(format!("q = {} outside (0, 1]", self.q)));
        }
        Ok(())
    }

    /// `b = ⌈½ log_{2κ}(24² n_(1)² κ²)⌉` partitions whose union has density `p`,
    /// i.e. `q = 1 − (1 − p)^{1/b}`.
    pub fn mc_default(n1: usize, n2: usize, kappa: f64, p: f64, seed: u64) -> Result<Self> {
        if !(kappa >= 1.0) {
            return Err(LrdError::arg("kappa must be at least 1"));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(LrdError::arg("p must lie in (0, 1]"));
        }
        let n = n1.max(n2) as f64;
        let b = (0.5 * (24.0 * 24.0 * n * n * kappa * kappa).ln() / (2.0 * kappa).ln()).ceil() as usize;
        let b = b.max(1);
        Self::new(b, 1.0 - (1.0 - p).powf(1.0 / b as f64), seed)
    }

    /// `j0 = 2⌈ln n_(1)⌉` partitions whose union covers a fraction `1 − ρ` of the
    /// entries, `ρ` being the corruption density: `q = 1 − ρ^{1/j0}`.
    pub fn rpca_default(n1: usize, n2: usize, rho: f64, seed: u64) -> Result<Self> {
        if !(0.0..1.0).contains(&rho) {
            return Err(LrdError::arg("corruption density must lie in [0, 1)"));
        }
        let j0 = (2.0 * (n1.max(n2) as f64).ln().ceil()) as usize;
        let j0 = j0.max(1);
        Self::new(j0, 1.0 - rho.powf(1.0 / j0 as f64), seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn condition_strictness() {
        assert!(!Condition::new("a", 1.0, 1.0, true).satisfied);
        assert!(Condition::new("a", 1.0, 1.0, false).satisfied);
        assert!(!Condition::new("a", f64::NAN, 1.0, false).satisfied);
        assert_eq!(Condition::new("a", 0.25, 1.0, true).margin, 0.75);
    }

    #[test]
    fn golfing_defaults() {
        let cfg = GolfingConfig::mc_default(100, 100, 1.0, 0.5, 0).unwrap();
        assert_eq!(cfg.b, 12);
        assert!((1.0 - (1.0 - cfg.q).powi(12) - 0.5).abs() < 1e-12);
        let cfg = GolfingConfig::rpca_default(100, 100, 0.05, 0).unwrap();
        assert_eq!(cfg.b, 10);
        assert!(GolfingConfig::new(0, 0.5, 0).is_err());
        assert!(GolfingConfig::new(1, 0.0, 0).is_err());
    }
}
