//! Synthetic ground truth, sampling models, corruption models and the
//! biclique weighted-approximation instance.
//!
//! Seeding: a generator called with `seed` splits it with
//! [`derive_seed`](crate::rng::derive_seed) into independent streams
//! (`[0]` for the low-rank factors, `[1]` for the support, `[2]` for signs).

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{LrdError, Result};
use crate::linalg::{check_rank_arg, svd, DenseMatrix, SupportSet, DEFAULT_RANK_TOL};
use crate::rng::{derive_seed, Rng};

/// `X* = U diag(spectrum) Vᵀ` with `U`, `V` the Q factors of seeded Gaussian
/// matrices (entries drawn row-major, `U` first). Returns `(X*, A, B)` with the
/// balanced factors `A = U diag(√s)`, `B = diag(√s) Vᵀ`.
pub fn gen_lowrank(
    n1: usize,
    n2: usize,
    r: usize,
    spectrum: &[f64],
    seed: u64,
) -> Result<(DenseMatrix, DenseMatrix, DenseMatrix)> {
    if n1 == 0 || n2 == 0 || r == 0 || r > n1.min(n2) {
        return Err(LrdError::arg(format!("rank {r} invalid for {n1}x{n2}")));
    }
    if spectrum.len() != r {
        return Err(LrdError::arg(format!(
            "spectrum has {} values, expected {r}",
            spectrum.len()
        )));
    }
    if spectrum.iter().any(|s| !(*s > 0.0) || !s.is_finite())
        || spectrum.windows(2).any(|w| w[0] < w[1])
    {
        return Err(LrdError::arg("spectrum must be positive and descending"));
    }
    let mut rng = Rng::new(seed);
    let mut gaussian = |rows: usize| {
        let entries: Vec<f64> = (0..rows * r).map(|_| rng.gaussian()).collect();
        DMatrix::from_row_slice(rows, r, &entries)
    };
    let gu = gaussian(n1);
    let gv = gaussian(n2);
    let u = gu.qr().q();
    let v = gv.qr().q();
    let mut a = u.clone();
    let mut bt = v.clone();
    for (j, s) in spectrum.iter().enumerate() {
        a.column_mut(j).scale_mut(s.sqrt());
        bt.column_mut(j).scale_mut(s.sqrt());
    }
    let b = bt.transpose();
    let x = &a * &b;
    Ok((
        DenseMatrix::from_nalgebra(x)?,
        DenseMatrix::from_nalgebra(a)?,
        DenseMatrix::from_nalgebra(b)?,
    ))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Incoherence {
    pub mu: f64,
    /// `n1 ‖Uᵀe_i‖² / r`
    pub per_row: Vec<f64>,
    /// `n2 ‖Vᵀe_j‖² / r`
    pub per_col: Vec<f64>,
}

/// Incoherence of the top-`r` singular subspaces of `x`; lies in `[1, n_(1)/r]`.
pub fn incoherence_mu(x: &DenseMatrix, r: usize) -> Result<Incoherence> {
    check_rank_arg(x, r)?;
    let f = svd(x, DEFAULT_RANK_TOL)?;
    if f.numeric_rank < r {
        return Err(LrdError::Precondition(format!(
            "numeric rank {} is below {r}",
            f.numeric_rank
        )));
    }
    let (n1, n2) = x.shape();
    let leverage = |basis: &DMatrix<f64>, n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let row_sq: f64 = (0..r).map(|j| basis[(i, j)].powi(2)).sum();
                n as f64 * row_sq / r as f64
            })
            .collect()
    };
    let per_row = leverage(&f.u, n1);
    let per_col = leverage(&f.v, n2);
    let mu = per_row
        .iter()
        .chain(&per_col)
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    Ok(Incoherence {
        mu,
        per_row,
        per_col,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct LinfCheck {
    pub holds: bool,
    pub ratio: f64,
}

/// Ratio `‖X‖_∞ / (√(μ r / (n1 n2)) σ_r)`; holds when it is at most one
/// (up to a relative rounding allowance of `1e-12`).
pub fn rpca_linf_check(x: &DenseMatrix, r: usize) -> Result<LinfCheck> {
    let inc = incoherence_mu(x, r)?;
    let f = svd(x, DEFAULT_RANK_TOL)?;
    let (n1, n2) = x.shape();
    let scale = (inc.mu * r as f64 / (n1 * n2) as f64).sqrt() * f.sigma[r - 1];
    let ratio = x.max_abs() / scale;
    Ok(LinfCheck {
        holds: ratio <= 1.0 + 1e-12,
        ratio,
    })
}

/// First `count` entries of a Fisher-Yates shuffle of `0..total`, driven by `rng`.
/// Step `i` swaps position `i` with `i + below(total − i)`.
fn shuffled_prefix(total: usize, count: usize, rng: &mut Rng) -> Vec<usize> {
    let mut perm: Vec<usize> = (0..total).collect();
    for i in 0..count {
        let j = i + rng.below((total - i) as u64) as usize;
        perm.swap(i, j);
    }
    perm.truncate(count);
    perm
}

fn support_from_linear(n1: usize, n2: usize, linear: Vec<usize>) -> Result<SupportSet> {
    SupportSet::new(n1, n2, linear.into_iter().map(|e| (e / n2, e % n2)).collect())
}

/// Uniformly random subset of exactly `m` entries (row-major linear indices
/// shuffled by `Rng::new(seed)`).
pub fn sample_uniform(n1: usize, n2: usize, m: usize, seed: u64) -> Result<SupportSet> {
    let total = n1 * n2;
    if total == 0 {
        return Err(LrdError::arg("dimensions must be positive"));
    }
    if m > total {
        return Err(LrdError::arg(format!("m = {m} exceeds {total} entries")));
    }
    support_from_linear(n1, n2, shuffled_prefix(total, m, &mut Rng::new(seed)))
}

/// Bernoulli(`p`) subset. The cardinality is drawn as a Binomial(`n1 n2`, `p`)
/// count from stream `derive_seed(seed, [1])`, then the entries are the first
/// that many of the same shuffle [`sample_uniform`] uses. Under a shared seed the
/// two samplers are therefore nested, which couples them for paired comparisons
/// while each keeps its exact distribution.
pub fn sample_bernoulli(n1: usize, n2: usize, p: f64, seed: u64) -> Result<SupportSet> {
    if !(0.0..=1.0).contains(&p) {
        return Err(LrdError::arg(format!("p = {p} outside [0, 1]")));
    }
    let total = n1 * n2;
    if total == 0 {
        return Err(LrdError::arg("dimensions must be positive"));
    }
    let mut count_rng = Rng::new(derive_seed(seed, &[1]));
    let count = (0..total).filter(|_| count_rng.bernoulli(p)).count();
    support_from_linear(n1, n2, shuffled_prefix(total, count, &mut Rng::new(seed)))
}

/// Observation / corruption support model.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Sampler {
    /// exactly `m` entries uniformly
    Uniform { m: usize },
    /// each entry independently with probability `p`
    Bernoulli { p: f64 },
}

impl Sampler {
    pub fn sample(&self, n1: usize, n2: usize, seed: u64) -> Result<SupportSet> {
        match *self {
            Sampler::Uniform { m } => sample_uniform(n1, n2, m, seed),
            Sampler::Bernoulli { p } => sample_bernoulli(n1, n2, p, seed),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorruptionModel {
    /// exactly `m` corrupted entries chosen uniformly
    SignedUniform,
    /// Bernoulli support with rate `m / (n1 n2)`
    BernoulliSign,
}

/// `S*` with entries `±magnitude` (fair independent signs) on its support.
pub fn gen_sparse_corruption(
    n1: usize,
    n2: usize,
    m: usize,
    magnitude: f64,
    model: CorruptionModel,
    seed: u64,
) -> Result<(DenseMatrix, SupportSet)> {
    if !(magnitude > 0.0) || !magnitude.is_finite() {
        return Err(LrdError::arg("magnitude must be positive"));
    }
    if m > n1 * n2 {
        return Err(LrdError::arg(format!("m = {m} exceeds {} entries", n1 * n2)));
    }
    let support_seed = derive_seed(seed, &[1]);
    let support = match model {
        CorruptionModel::SignedUniform => sample_uniform(n1, n2, m, support_seed)?,
        CorruptionModel::BernoulliSign => {
            sample_bernoulli(n1, n2, m as f64 / (n1 * n2) as f64, support_seed)?
        }
    };
    let mut signs = Rng::new(derive_seed(seed, &[2]));
    let mut s = DMatrix::zeros(n1, n2);
    for &(i, j) in support.indices() {
        s[(i, j)] = magnitude * signs.sign();
    }
    Ok((DenseMatrix::from_nalgebra(s)?, support))
}

#[derive(Clone, Debug)]
pub struct MCInstance {
    pub x_star: DenseMatrix,
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub obs: SupportSet,
    /// `P_Ω(X*)`
    pub obs_values: DenseMatrix,
    pub mu: f64,
    pub kappa: f64,
    pub r: usize,
    pub seed: u64,
}

impl MCInstance {
    /// Low-rank truth from stream `[0]`, observations from stream `[1]`.
    pub fn generate(
        n1: usize,
        n2: usize,
        r: usize,
        spectrum: &[f64],
        sampler: Sampler,
        seed: u64,
    ) -> Result<Self> {
        let (x_star, a, b) = gen_lowrank(n1, n2, r, spectrum, derive_seed(seed, &[0]))?;
        let obs = sampler.sample(n1, n2, derive_seed(seed, &[1]))?;
        Self::from_parts(x_star, a, b, obs, r, seed)
    }

    pub fn from_parts(
        x_star: DenseMatrix,
        a: DenseMatrix,
        b: DenseMatrix,
        obs: SupportSet,
        r: usize,
        seed: u64,
    ) -> Result<Self> {
        x_star.check_shape(obs.shape())?;
        let obs_values = DenseMatrix::wrap(obs.apply(x_star.as_nalgebra(), false));
        let mu = incoherence_mu(&x_star, r)?.mu;
        let f = svd(&x_star, DEFAULT_RANK_TOL)?;
        Ok(MCInstance {
            kappa: f.sigma[0] / f.sigma[r - 1],
            x_star,
            a,
            b,
            obs,
            obs_values,
            mu,
            r,
            seed,
        })
    }
}

#[derive(Clone, Debug)]
pub struct RPCAInstance {
    pub x_star: DenseMatrix,
    pub s_star: DenseMatrix,
    pub d: DenseMatrix,
    pub corr: SupportSet,
    /// `σ_r(X*) / √n_(1)`
    pub lambda_default: f64,
    pub mu: f64,
    pub r: usize,
    pub seed: u64,
}

impl RPCAInstance {
    /// Low-rank truth from stream `[0]`, corruption from stream `[1]`.
    /// `magnitude` defaults to `‖X*‖_∞`.
    pub fn generate(
        n1: usize,
        n2: usize,
        r: usize,
        spectrum: &[f64],
        m: usize,
        magnitude: Option<f64>,
        model: CorruptionModel,
        seed: u64,
    ) -> Result<Self> {
        let (x_star, _, _) = gen_lowrank(n1, n2, r, spectrum, derive_seed(seed, &[0]))?;
        let magnitude = magnitude.unwrap_or_else(|| x_star.max_abs());
        let (s_star, corr) =
            gen_sparse_corruption(n1, n2, m, magnitude, model, derive_seed(seed, &[1]))?;
        Self::from_parts(x_star, s_star, corr, r, seed)
    }

    pub fn from_parts(
        x_star: DenseMatrix,
        s_star: DenseMatrix,
        corr: SupportSet,
        r: usize,
        seed: u64,
    ) -> Result<Self> {
        x_star.check_shape(s_star.shape())?;
        x_star.check_shape(corr.shape())?;
        if SupportSet::support_of(&s_star) != corr {
            return Err(LrdError::arg("support of S* differs from the corruption set"));
        }
        let mu = incoherence_mu(&x_star, r)?.mu;
        let f = svd(&x_star, DEFAULT_RANK_TOL)?;
        let (n1, n2) = x_star.shape();
        Ok(RPCAInstance {
            d: &x_star + &s_star,
            lambda_default: f.sigma[r - 1] / (n1.max(n2) as f64).sqrt(),
            x_star,
            s_star,
            corr,
            mu,
            r,
            seed,
        })
    }
}

#[derive(Clone, Debug)]
pub struct BicliqueInstance {
    /// adjacency, 1 on edges
    pub y: DenseMatrix,
    /// 1 on edges, `offweight` elsewhere
    pub w: DenseMatrix,
    pub beta: f64,
}

impl BicliqueInstance {
    /// `H(M) = β Σ W_ij² (Y_ij − M_ij)²`.
    pub fn h_value(&self, m: &DenseMatrix) -> Result<f64> {
        m.check_shape(self.y.shape())?;
        let (y, w, m) = (self.y.as_nalgebra(), self.w.as_nalgebra(), m.as_nalgebra());
        Ok(self.beta
            * y.iter()
                .zip(w.iter())
                .zip(m.iter())
                .map(|((y, w), m)| w * w * (y - m).powi(2))
                .sum::<f64>())
    }
}

/// Weighted low-rank instance of a bipartite graph. `offweight` defaults to `n²`
/// with `n = max(n_left, n_right)`.
pub fn biclique_reduction(
    n_left: usize,
    n_right: usize,
    edges: &[(usize, usize)],
    beta: f64,
    offweight: Option<f64>,
) -> Result<BicliqueInstance> {
    if !(beta > 0.0) {
        return Err(LrdError::arg("beta must be positive"));
    }
    let n = n_left.max(n_right);
    let offweight = offweight.unwrap_or((n * n) as f64);
    let edge_set = SupportSet::new(n_left, n_right, edges.to_vec())?;
    let y = DenseMatrix::from_fn(n_left, n_right, |i, j| {
        if edge_set.contains(i, j) {
            1.0
        } else {
            0.0
        }
    })?;
    let w = DenseMatrix::from_fn(n_left, n_right, |i, j| {
        if edge_set.contains(i, j) {
            1.0
        } else {
            offweight
        }
    })?;
    Ok(BicliqueInstance { y, w, beta })
}

/// `ceil(c κ² μ n_(1) r ln(n_(1)) log_{2κ}(n_(1)))`, natural log except the
/// base-`2κ` factor (base 2 when `κ = 1`).
pub fn required_samples_mc(
    n1: usize,
    n2: usize,
    r: usize,
    mu: f64,
    kappa: f64,
    c: f64,
) -> Result<u64> {
    if !(kappa >= 1.0) {
        return Err(LrdError::arg(format!("kappa = {kappa} must be at least 1")));
    }
    if n1 == 0 || n2 == 0 || r == 0 || !(mu > 0.0) || !(c > 0.0) {
        return Err(LrdError::arg("all arguments must be positive"));
    }
    let n = n1.max(n2) as f64;
    let value = c * kappa * kappa * mu * n * r as f64 * n.ln() * (n.ln() / (2.0 * kappa).ln());
    Ok(value.ceil() as u64)
}
