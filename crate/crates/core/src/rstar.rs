//! The spectral pair at the core of the bi-dual programs:
//! `½‖X‖_r² = ½ Σ_{i≤r} σ_i(X)²` and its convex conjugate `‖·‖_{r*}`,
//! together with their proximal operators.
//!
//! Everything is computed on the singular spectrum and lifted back with the
//! singular vectors of the input (both functions are unitarily invariant).
//! The vector problems have a block structure: a leading run of entries is
//! handled in closed form, and a single contiguous block straddling index `r`
//! is tied to a common value. The solvers enumerate the admissible blocks.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{LrdError, Result};
use crate::linalg::{svd, svd_raw, DenseMatrix, DEFAULT_RANK_TOL};

/// Tied block `start..=end` (0-based, `start < r ≤ end + 1`) sharing `value`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TieGroup {
    pub start: usize,
    pub end: usize,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SpectralProxResult {
    pub shrunk_spectrum: Vec<f64>,
    /// Present when two or more entries are tied.
    pub tie_group: Option<TieGroup>,
    pub objective_value: f64,
}

fn check_spectrum(s: &[f64], r: usize) -> Result<()> {
    if s.is_empty() {
        return Err(LrdError::arg("empty spectrum"));
    }
    if r == 0 || r > s.len() {
        return Err(LrdError::arg(format!("rank {r} outside 1..={}", s.len())));
    }
    if s.iter().any(|x| !x.is_finite() || *x < 0.0) {
        return Err(LrdError::arg("spectrum must be finite and nonnegative"));
    }
    if s.windows(2).any(|w| w[0] < w[1]) {
        return Err(LrdError::arg("spectrum must be sorted in descending order"));
    }
    Ok(())
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0) || !gamma.is_finite() {
        return Err(LrdError::arg(format!("gamma must be positive, got {gamma}")));
    }
    Ok(())
}

fn prefix_sums(s: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let mut p1 = Vec::with_capacity(s.len() + 1);
    let mut p2 = Vec::with_capacity(s.len() + 1);
    p1.push(0.0);
    p2.push(0.0);
    for &x in s {
        p1.push(p1.last().unwrap() + x);
        p2.push(p2.last().unwrap() + x * x);
    }
    (p1, p2)
}

/// `argmin_x ½‖x − s‖² + (γ/2) Σ_{i≤r} x_[i]²` for a descending nonnegative `s`.
///
/// Entries before the tied block shrink to `s_i/(1+γ)`, entries after it are
/// kept, and the block `k..=l` takes `Σ s_i / ((l−k+1) + γ(r−k))` (0-based `k`).
/// All `O(n²)` blocks with `k < r ≤ l+1` are scored in `O(1)` each; the
/// descending candidate with the smallest objective is the minimizer.
pub fn prox_topr_sq_vec(s: &[f64], r: usize, gamma: f64) -> Result<SpectralProxResult> {
    check_spectrum(s, r)?;
    check_gamma(gamma)?;
    let n = s.len();
    let (p1, p2) = prefix_sums(s);
    let slack = 1e-12 * s[0].max(f64::MIN_POSITIVE);
    let head_factor = 0.5 * gamma / (1.0 + gamma);

    let mut best: Option<(f64, usize, usize, f64)> = None;
    for k in 0..r {
        let penalized = (r - k) as f64;
        for l in (r - 1)..n {
            let count = (l - k + 1) as f64;
            let block_sum = p1[l + 1] - p1[k];
            let t = block_sum / (count + gamma * penalized);
            if k > 0 && s[k - 1] / (1.0 + gamma) < t - slack {
                continue;
            }
            if l + 1 < n && t < s[l + 1] - slack {
                continue;
            }
            let block_sq = p2[l + 1] - p2[k];
            let objective = head_factor * p2[k]
                + 0.5 * (count * t * t - 2.0 * t * block_sum + block_sq)
                + 0.5 * gamma * penalized * t * t;
            if best.map_or(true, |(b, ..)| objective < b) {
                best = Some((objective, k, l, t));
            }
        }
    }
    let (objective_value, k, l, t) =
        best.ok_or_else(|| LrdError::NumericalFailure("no admissible tie block".into()))?;

    let mut x = Vec::with_capacity(n);
    x.extend(s[..k].iter().map(|v| v / (1.0 + gamma)));
    x.extend(std::iter::repeat(t).take(l - k + 1));
    x.extend_from_slice(&s[l + 1..]);
    // enforce exact monotonicity against round-off at the block boundaries
    for i in 1..n {
        if x[i] > x[i - 1] {
            x[i] = x[i - 1];
        }
    }
    Ok(SpectralProxResult {
        shrunk_spectrum: x,
        tie_group: (l > k).then_some(TieGroup {
            start: k,
            end: l,
            value: t,
        }),
        objective_value,
    })
}

/// Conjugate of `½ Σ_{i≤r} y_[i]²` at a descending nonnegative `s`, with its maximizer.
///
/// The maximizer keeps `y_i = s_i` for `i < k` and ties everything from `k` on
/// to `t = Σ_{i≥k} s_i / (r − k)`; the value is `½ Σ_{i<k} s_i² + ½ (Σ_{i≥k} s_i)² / (r − k)`.
pub fn rstar_vec(s: &[f64], r: usize) -> Result<(f64, Vec<f64>)> {
    check_spectrum(s, r)?;
    let n = s.len();
    let (p1, p2) = prefix_sums(s);
    let slack = 1e-12 * s[0].max(f64::MIN_POSITIVE);
    let mut best: Option<(f64, usize, f64)> = None;
    for k in 0..r {
        let tail = p1[n] - p1[k];
        let t = tail / (r - k) as f64;
        if k > 0 && t > s[k - 1] + slack {
            continue;
        }
        let value = 0.5 * p2[k] + 0.5 * tail * t;
        if best.map_or(true, |(b, ..)| value > b) {
            best = Some((value, k, t));
        }
    }
    let (value, k, t) =
        best.ok_or_else(|| LrdError::NumericalFailure("no admissible tail block".into()))?;
    let mut y = s[..k].to_vec();
    y.extend(std::iter::repeat(t).take(n - k));
    Ok((value, y))
}

fn check_rank(m: &DenseMatrix, r: usize) -> Result<()> {
    let k = m.n_rows().min(m.n_cols());
    if r == 0 || r > k {
        return Err(LrdError::arg(format!("rank {r} outside 1..={k}")));
    }
    Ok(())
}

/// `‖M‖_{r*} = max_X ⟨M, X⟩ − ½‖X‖_r²`.
pub fn rstar_norm(m: &DenseMatrix, r: usize) -> Result<f64> {
    check_rank(m, r)?;
    let f = svd(m, DEFAULT_RANK_TOL)?;
    Ok(rstar_vec(&f.sigma, r)?.0)
}

/// The maximizer `X` attaining `‖M‖_{r*}` (Fenchel-Young equality point).
pub fn rstar_maximizer(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    check_rank(m, r)?;
    let f = svd(m, DEFAULT_RANK_TOL)?;
    let (_, y) = rstar_vec(&f.sigma, r)?;
    DenseMatrix::from_nalgebra(f.with_spectrum(&y))
}

pub(crate) fn prox_half_r_sq_raw(m: &DMatrix<f64>, r: usize, gamma: f64) -> Result<DMatrix<f64>> {
    let f = svd_raw(m, DEFAULT_RANK_TOL)?;
    let p = prox_topr_sq_vec(&f.sigma, r, gamma)?;
    Ok(f.with_spectrum(&p.shrunk_spectrum))
}

/// `prox_{γ·½‖·‖_r²}(M)`.
pub fn prox_half_r_sq(m: &DenseMatrix, r: usize, gamma: f64) -> Result<DenseMatrix> {
    check_rank(m, r)?;
    check_gamma(gamma)?;
    DenseMatrix::from_nalgebra(prox_half_r_sq_raw(m.as_nalgebra(), r, gamma)?)
}

/// Spectrum of `prox_{γ‖·‖_{r*}}` via Moreau: `s − γ·prox_{γ⁻¹·½‖·‖_r²}(s/γ)`.
fn prox_rstar_spectrum(sigma: &[f64], r: usize, gamma: f64) -> Result<Vec<f64>> {
    let scaled: Vec<f64> = sigma.iter().map(|s| s / gamma).collect();
    let inner = prox_topr_sq_vec(&scaled, r, 1.0 / gamma)?;
    Ok(sigma
        .iter()
        .zip(&inner.shrunk_spectrum)
        .map(|(s, y)| (s - gamma * y).max(0.0))
        .collect())
}

pub(crate) fn prox_rstar_raw(m: &DMatrix<f64>, r: usize, gamma: f64) -> Result<DMatrix<f64>> {
    let f = svd_raw(m, DEFAULT_RANK_TOL)?;
    let s = prox_rstar_spectrum(&f.sigma, r, gamma)?;
    Ok(f.with_spectrum(&s))
}

/// `prox_{γ‖·‖_{r*}}(M)`.
pub fn prox_rstar(m: &DenseMatrix, r: usize, gamma: f64) -> Result<DenseMatrix> {
    check_rank(m, r)?;
    check_gamma(gamma)?;
    DenseMatrix::from_nalgebra(prox_rstar_raw(m.as_nalgebra(), r, gamma)?)
}

/// `‖M − prox_{γf}(M) − γ·prox_{γ⁻¹f*}(M/γ)‖_F` with `f = ½‖·‖_r²`.
pub fn moreau_residual(m: &DenseMatrix, r: usize, gamma: f64) -> Result<f64> {
    let p = prox_half_r_sq(m, r, gamma)?;
    let q = prox_rstar(&m.scale(1.0 / gamma), r, 1.0 / gamma)?;
    Ok((&(m - &p) - &q.scale(gamma)).frobenius_norm())
}

/// Outcome of testing `G ∈ ∂‖X*‖_{r*} = {X* + W : UᵀW = 0, WV = 0, ‖W‖ ≤ σ_r(X*)}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SubgradientCheck {
    pub holds: bool,
    /// `max |UᵀW|`
    pub left_residual: f64,
    /// `max |WV|`
    pub right_residual: f64,
    /// `‖W‖`
    pub op_norm: f64,
    /// `σ_r(X*)`
    pub sigma_r: f64,
}

pub fn rstar_subgradient_check(
    x_star: &DenseMatrix,
    g: &DenseMatrix,
    r: usize,
    tol: f64,
) -> Result<SubgradientCheck> {
    check_rank(x_star, r)?;
    g.check_shape(x_star.shape())?;
    let f = svd(x_star, DEFAULT_RANK_TOL)?;
    if f.numeric_rank != r {
        return Err(LrdError::Precondition(format!(
            "X* has numeric rank {}, expected {r}",
            f.numeric_rank
        )));
    }
    let w = g.as_nalgebra() - x_star.as_nalgebra();
    let u = f.u.columns(0, r);
    let v = f.v.columns(0, r);
    let left_residual = (u.transpose() * &w).amax();
    let right_residual = (&w * v).amax();
    let op_norm = svd_raw(&w, DEFAULT_RANK_TOL)?.sigma[0];
    let sigma_r = f.sigma[r - 1];
    Ok(SubgradientCheck {
        holds: left_residual <= tol && right_residual <= tol && op_norm <= sigma_r + tol,
        left_residual,
        right_residual,
        op_norm,
        sigma_r,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::schatten_r_sq;
    use crate::rng::Rng;
    use approx::assert_abs_diff_eq;

    #[test]
    fn prox_vec_known_values() {
        let p = prox_topr_sq_vec(&[4.0, 2.0], 2, 1.0).unwrap();
        assert_eq!(p.shrunk_spectrum, vec![2.0, 1.0]);
        assert!(p.tie_group.is_none());

        let p = prox_topr_sq_vec(&[10.0, 1.0], 1, 1.0).unwrap();
        assert_eq!(p.shrunk_spectrum, vec![5.0, 1.0]);

        let p = prox_topr_sq_vec(&[3.0, 2.9], 1, 1.0).unwrap();
        let t = 59.0 / 30.0;
        assert_abs_diff_eq!(p.shrunk_spectrum[0], t, epsilon = 1e-12);
        assert_abs_diff_eq!(p.shrunk_spectrum[1], t, epsilon = 1e-12);
        let g = p.tie_group.unwrap();
        assert_eq!((g.start, g.end), (0, 1));
        assert_abs_diff_eq!(g.value, t, epsilon = 1e-12);
    }

    #[test]
    fn prox_vec_rejects_bad_input() {
        assert!(prox_topr_sq_vec(&[1.0, 2.0], 1, 1.0).is_err());
        assert!(prox_topr_sq_vec(&[1.0, -0.5], 1, 1.0).is_err());
        assert!(prox_topr_sq_vec(&[1.0], 2, 1.0).is_err());
        assert!(prox_topr_sq_vec(&[1.0], 1, 0.0).is_err());
        assert!(prox_topr_sq_vec(&[], 1, 1.0).is_err());
    }

    #[test]
    fn rstar_known_values() {
        let d = DenseMatrix::from_diagonal(2, 2, &[2.0, 1.0]).unwrap();
        assert_abs_diff_eq!(rstar_norm(&d, 2).unwrap(), 2.5, epsilon = 1e-12);
        assert_abs_diff_eq!(rstar_norm(&d, 1).unwrap(), 4.5, epsilon = 1e-12);
        assert_eq!(rstar_norm(&DenseMatrix::zeros(3, 2), 1).unwrap(), 0.0);
        assert!(rstar_norm(&d, 3).is_err());
    }

    #[test]
    fn rstar_of_low_rank_is_half_frobenius() {
        let mut rng = Rng::new(4);
        let a = DenseMatrix::gaussian(6, 2, &mut rng);
        let b = DenseMatrix::gaussian(2, 5, &mut rng);
        let m = a.matmul(&b).unwrap();
        for r in 2..=5 {
            let v = rstar_norm(&m, r).unwrap();
            assert_abs_diff_eq!(v, 0.5 * m.frobenius_norm().powi(2), epsilon = 1e-10);
        }
    }

    #[test]
    fn full_rank_prox_is_uniform_shrink() {
        let m = DenseMatrix::gaussian(3, 4, &mut Rng::new(5));
        let expect = m.scale(1.0 / 1.5);
        let p = prox_half_r_sq(&m, 3, 0.5).unwrap();
        assert!((&p - &expect).frobenius_norm() < 1e-12);
        let q = prox_rstar(&m, 3, 0.5).unwrap();
        assert!((&q - &expect).frobenius_norm() < 1e-12);
        assert_eq!(prox_half_r_sq(&DenseMatrix::zeros(2, 2), 1, 1.0).unwrap(), DenseMatrix::zeros(2, 2));
    }

    #[test]
    fn moreau_identity_small() {
        let m = DenseMatrix::gaussian(4, 3, &mut Rng::new(6));
        for r in 1..=3 {
            for gamma in [0.3, 1.0, 3.0] {
                assert!(moreau_residual(&m, r, gamma).unwrap() <= 1e-10);
            }
        }
    }

    #[test]
    fn subgradient_check_cases() {
        // X* = diag(3, 2, 0, 0) in 4x4, r = 2; u⊥ = e3, v⊥ = e4
        let x = DenseMatrix::from_diagonal(4, 4, &[3.0, 2.0]).unwrap();
        let c = rstar_subgradient_check(&x, &x, 2, 1e-10).unwrap();
        assert!(c.holds);
        let mut w = DMatrix::<f64>::zeros(4, 4);
        w[(2, 3)] = 2.0 * 2.0;
        let g = DenseMatrix::from_nalgebra(x.as_nalgebra() + &w).unwrap();
        let c = rstar_subgradient_check(&x, &g, 2, 1e-10).unwrap();
        assert!(!c.holds);
        assert_abs_diff_eq!(c.op_norm, 4.0, epsilon = 1e-12);
        w[(2, 3)] = 0.5 * 2.0;
        let g = DenseMatrix::from_nalgebra(x.as_nalgebra() + &w).unwrap();
        assert!(rstar_subgradient_check(&x, &g, 2, 1e-10).unwrap().holds);
        // rank mismatch
        assert!(matches!(
            rstar_subgradient_check(&x, &g, 1, 1e-10),
            Err(LrdError::Precondition(_))
        ));
    }

    #[test]
    fn subgradient_inequality_on_random_points() {
        let x = DenseMatrix::from_diagonal(4, 4, &[3.0, 2.0]).unwrap();
        let mut gm = x.as_nalgebra().clone();
        gm[(2, 3)] = 0.5 * 2.0;
        let g = DenseMatrix::from_nalgebra(gm).unwrap();
        let base = rstar_norm(&x, 2).unwrap();
        let mut rng = Rng::new(7);
        for _ in 0..100 {
            let y = DenseMatrix::gaussian(4, 4, &mut rng).scale(2.0);
            let lhs = rstar_norm(&y, 2).unwrap();
            let rhs = base + g.dot(&(&y - &x));
            assert!(lhs >= rhs - 1e-9, "{lhs} < {rhs}");
        }
    }

    #[test]
    fn fenchel_young_equality_at_maximizer() {
        let mut rng = Rng::new(8);
        for _ in 0..20 {
            let m = DenseMatrix::gaussian(4, 3, &mut rng);
            for r in 1..=3 {
                let x = rstar_maximizer(&m, r).unwrap();
                let lhs = m.dot(&x);
                let rhs = rstar_norm(&m, r).unwrap() + 0.5 * schatten_r_sq(&x, r).unwrap();
                assert_abs_diff_eq!(lhs, rhs, epsilon = 1e-8);
            }
        }
    }
}
