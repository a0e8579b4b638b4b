//! Dense matrix primitives: SVD and truncation, spectral norms, and the
//! projectors onto an index support `Ω` and onto a tangent space `T`.
//!
//! All storage is dense. Matrices are wrapped in [`DenseMatrix`], which
//! refuses non-finite entries at construction.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::DMatrix;

use crate::error::{LrdError, Result};
use crate::rng::Rng;

/// Relative cutoff: `σ_i` counts towards the numeric rank iff `σ_i > DEFAULT_RANK_TOL * σ_1`.
pub const DEFAULT_RANK_TOL: f64 = 1e-10;

/// Default power-iteration count for [`composed_projector_norm`].
pub const DEFAULT_POWER_ITERS: usize = 200;

const POWER_ITER_SEED: u64 = 0x5eed_0f_70_0e;

/// Real `n_rows × n_cols` matrix with finite entries.
#[derive(Clone, PartialEq)]
pub struct DenseMatrix(DMatrix<f64>);

impl fmt::Debug for DenseMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "DenseMatrix({}x{}) {:?}", self.n_rows(), self.n_cols(), self.0.as_slice())
    }
}

impl DenseMatrix {
    /// Builds a matrix from entries listed row by row.
    pub fn from_row_major(n_rows: usize, n_cols: usize, entries: &[f64]) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(LrdError::arg("matrix dimensions must be positive"));
        }
        if entries.len() != n_rows * n_cols {
            return Err(LrdError::arg(format!(
                "expected {} entries for a {n_rows}x{n_cols} matrix, got {}",
                n_rows * n_cols,
                entries.len()
            )));
        }
        Self::from_nalgebra(DMatrix::from_row_slice(n_rows, n_cols, entries))
    }

    pub fn from_nalgebra(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(LrdError::arg("matrix dimensions must be positive"));
        }
        if let Some(pos) = m.iter().position(|x| !x.is_finite()) {
            let (c, r) = (pos / m.nrows(), pos % m.nrows());
            return Err(LrdError::arg(format!("non-finite entry at ({r}, {c})")));
        }
        Ok(DenseMatrix(m))
    }

    /// Wraps without the finiteness scan. Callers guarantee finite entries.
    pub(crate) fn wrap(m: DMatrix<f64>) -> Self {
        debug_assert!(m.iter().all(|x| x.is_finite()));
        DenseMatrix(m)
    }

    pub fn zeros(n_rows: usize, n_cols: usize) -> Self {
        DenseMatrix(DMatrix::zeros(n_rows, n_cols))
    }

    pub fn identity(n: usize) -> Self {
        DenseMatrix(DMatrix::identity(n, n))
    }

    pub fn from_fn(n_rows: usize, n_cols: usize, f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        Self::from_nalgebra(DMatrix::from_fn(n_rows, n_cols, f))
    }

    /// `n_rows × n_cols` matrix with `diag` on the main diagonal.
    pub fn from_diagonal(n_rows: usize, n_cols: usize, diag: &[f64]) -> Result<Self> {
        if diag.len() > n_rows.min(n_cols) {
            return Err(LrdError::arg("diagonal longer than min(n_rows, n_cols)"));
        }
        let mut m = DMatrix::zeros(n_rows, n_cols);
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        Self::from_nalgebra(m)
    }

    /// i.i.d. standard Gaussian entries.
    pub fn gaussian(n_rows: usize, n_cols: usize, rng: &mut Rng) -> Self {
        DenseMatrix(DMatrix::from_fn(n_rows, n_cols, |_, _| rng.gaussian()))
    }

    pub fn as_nalgebra(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_nalgebra(self) -> DMatrix<f64> {
        self.0
    }

    pub fn n_rows(&self) -> usize {
        self.0.nrows()
    }

    pub fn n_cols(&self) -> usize {
        self.0.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        self.0.shape()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.0[(i, j)]
    }

    /// Entries in row-major order.
    pub fn to_row_major(&self) -> Vec<f64> {
        self.0.transpose().as_slice().to_vec()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.0.norm()
    }

    /// `max_ij |M_ij|`.
    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Spectral norm `σ_1`.
    pub fn op_norm(&self) -> Result<f64> {
        Ok(svd(self, DEFAULT_RANK_TOL)?.sigma.first().copied().unwrap_or(0.0))
    }

    pub fn dot(&self, other: &DenseMatrix) -> f64 {
        self.0.dot(&other.0)
    }

    pub fn transpose(&self) -> DenseMatrix {
        DenseMatrix(self.0.transpose())
    }

    pub fn matmul(&self, other: &DenseMatrix) -> Result<DenseMatrix> {
        if self.n_cols() != other.n_rows() {
            return Err(LrdError::arg(format!(
                "cannot multiply {}x{} by {}x{}",
                self.n_rows(),
                self.n_cols(),
                other.n_rows(),
                other.n_cols()
            )));
        }
        Ok(DenseMatrix(&self.0 * &other.0))
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        DenseMatrix(&self.0 * s)
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|x| x.is_finite())
    }

    pub(crate) fn check_shape(&self, shape: (usize, usize)) -> Result<()> {
        if self.shape() != shape {
            Err(LrdError::dims(shape, self.shape()))
        } else {
            Ok(())
        }
    }
}

impl Add for &DenseMatrix {
    type Output = DenseMatrix;
    fn add(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 + &rhs.0)
    }
}

impl Sub for &DenseMatrix {
    type Output = DenseMatrix;
    fn sub(self, rhs: &DenseMatrix) -> DenseMatrix {
        DenseMatrix(&self.0 - &rhs.0)
    }
}

impl Mul<f64> for &DenseMatrix {
    type Output = DenseMatrix;
    fn mul(self, rhs: f64) -> DenseMatrix {
        self.scale(rhs)
    }
}

impl Neg for &DenseMatrix {
    type Output = DenseMatrix;
    fn neg(self) -> DenseMatrix {
        DenseMatrix(-&self.0)
    }
}

/// Thin SVD `M = U diag(σ) Vᵀ` with `σ` descending.
#[derive(Clone, Debug)]
pub struct SvdFactors {
    pub u: DMatrix<f64>,
    pub sigma: Vec<f64>,
    pub v: DMatrix<f64>,
    pub numeric_rank: usize,
}

impl SvdFactors {
    /// `σ_1 / σ_rank`; `None` for the zero matrix.
    pub fn condition_number(&self) -> Option<f64> {
        if self.numeric_rank == 0 {
            None
        } else {
            Some(self.sigma[0] / self.sigma[self.numeric_rank - 1])
        }
    }

    /// `U_{:,1:k} diag(σ_{1:k}) V_{:,1:k}ᵀ`.
    pub fn reconstruct_top(&self, k: usize) -> DMatrix<f64> {
        let k = k.min(self.sigma.len());
        let mut us = self.u.columns(0, k).into_owned();
        for (j, s) in self.sigma.iter().take(k).enumerate() {
            us.column_mut(j).scale_mut(*s);
        }
        us * self.v.columns(0, k).transpose()
    }

    pub fn reconstruct(&self) -> DMatrix<f64> {
        self.reconstruct_top(self.sigma.len())
    }

    /// `U diag(s) Vᵀ` for a replacement spectrum `s` of the same length.
    pub(crate) fn with_spectrum(&self, s: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(s.len(), self.sigma.len());
        let mut us = self.u.clone();
        for (j, v) in s.iter().enumerate() {
            us.column_mut(j).scale_mut(*v);
        }
        us * self.v.transpose()
    }
}

const SVD_PROBE_TOL: f64 = 1e-9;

static FAER_SERIAL: std::sync::Once = std::sync::Once::new();

/// Converts to faer storage. faer kernels are pinned to a single thread so
/// results do not depend on the size of the caller's thread pool.
fn faer_mat(m: &DMatrix<f64>) -> faer::Mat<f64> {
    FAER_SERIAL.call_once(|| faer::set_global_parallelism(faer::Parallelism::None));
    faer::Mat::<f64>::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)])
}

fn from_faer(m: faer::MatRef<'_, f64>, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |i, j| m.read(i, j))
}

/// faer's bidiagonal SVD, fast but unreliable on exactly tied spectra.
fn svd_bidiagonal(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    let (n1, n2) = m.shape();
    let k = n1.min(n2);
    let d = faer_mat(m).thin_svd();
    let sigma = (0..k).map(|i| d.s_diagonal().read(i)).collect();
    (from_faer(d.u(), n1, k), sigma, from_faer(d.v(), n2, k))
}

/// QR followed by one-sided Jacobi on the square factor, sorted descending.
fn svd_jacobi(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    use faer::linalg::svd::jacobi::{jacobi_svd, Skip};
    if m.nrows() < m.ncols() {
        let (u, s, v) = svd_jacobi(&m.transpose());
        return (v, s, u);
    }
    let (n1, n2) = m.shape();
    let qr = faer_mat(m).qr();
    let q = from_faer(qr.compute_thin_q().as_ref(), n1, n2);
    let mut r = qr.compute_thin_r();
    let mut ur = faer::Mat::<f64>::zeros(n2, n2);
    let mut vr = faer::Mat::<f64>::zeros(n2, n2);
    jacobi_svd(
        r.as_mut(),
        Some(ur.as_mut()),
        Some(vr.as_mut()),
        Skip::None,
        f64::EPSILON,
        f64::MIN_POSITIVE,
    );
    let mut order: Vec<usize> = (0..n2).collect();
    order.sort_by(|&a, &b| r.read(b, b).abs().total_cmp(&r.read(a, a).abs()));
    let sigma = order.iter().map(|&j| r.read(j, j).abs()).collect();
    let ur = DMatrix::from_fn(n2, n2, |i, j| {
        let c = order[j];
        ur.read(i, c) * if r.read(c, c) < 0.0 { -1.0 } else { 1.0 }
    });
    let v = DMatrix::from_fn(n2, n2, |i, j| vr.read(i, order[j]));
    (q * ur, sigma, v)
}

/// Cheap randomized check of `U diag(σ) Vᵀ = M`, `UᵀU = I`, `VᵀV = I` on two
/// fixed probe vectors.
fn svd_passes_probes(m: &DMatrix<f64>, u: &DMatrix<f64>, sigma: &[f64], v: &DMatrix<f64>) -> bool {
    if sigma.iter().chain(u.iter()).chain(v.iter()).any(|x| !x.is_finite()) {
        return false;
    }
    let mut rng = Rng::new(POWER_ITER_SEED ^ 0x5D);
    let scale = m.norm().max(f64::MIN_POSITIVE);
    (0..2).all(|_| {
        let x = nalgebra::DVector::from_fn(m.ncols(), |_, _| rng.gaussian());
        let y = nalgebra::DVector::from_fn(u.ncols(), |_, _| rng.gaussian());
        let vtx = v.transpose() * &x;
        let svtx = nalgebra::DVector::from_fn(sigma.len(), |i, _| sigma[i] * vtx[i]);
        let recon = (u * svtx - m * &x).norm() <= SVD_PROBE_TOL * scale * x.norm();
        let ortho_u = (u.transpose() * (u * &y) - &y).norm() <= SVD_PROBE_TOL * y.norm();
        let ortho_v = (v.transpose() * (v * &y) - &y).norm() <= SVD_PROBE_TOL * y.norm();
        recon && ortho_u && ortho_v
    })
}

/// Thin SVD. The fast faer kernel runs first. If its output fails the probe
/// check, a Jacobi SVD is used instead. nalgebra's SVD is avoided because it
/// returns non-reconstructing factors on e.g. the all-ones 5x5. faer's
/// bidiagonal path fails on exactly tied nonzero singular values.
pub(crate) fn svd_raw(m: &DMatrix<f64>, rank_tol: f64) -> Result<SvdFactors> {
    let (mut u, mut sigma, mut v) = svd_bidiagonal(m);
    if !svd_passes_probes(m, &u, &sigma, &v) {
        (u, sigma, v) = svd_jacobi(m);
        if !svd_passes_probes(m, &u, &sigma, &v) {
            return Err(LrdError::NumericalFailure("SVD failed to reconstruct its input".into()));
        }
    }
    for s in sigma.iter_mut() {
        *s = s.max(0.0);
    }
    for i in 1..sigma.len() {
        if sigma[i] > sigma[i - 1] {
            sigma[i] = sigma[i - 1];
        }
    }
    let cutoff = rank_tol * sigma.first().copied().unwrap_or(0.0);
    let numeric_rank = sigma.iter().filter(|&&s| s > cutoff && s > 0.0).count();
    Ok(SvdFactors {
        u,
        sigma,
        v,
        numeric_rank,
    })
}

#[cfg(test)]
pub(crate) fn svd_jacobi_for_tests(m: &DMatrix<f64>) -> (DMatrix<f64>, Vec<f64>, DMatrix<f64>) {
    svd_jacobi(m)
}

/// Thin SVD. `rank_tol` is relative to `σ_1`.
pub fn svd(m: &DenseMatrix, rank_tol: f64) -> Result<SvdFactors> {
    if !(rank_tol >= 0.0) {
        return Err(LrdError::arg("rank_tol must be nonnegative"));
    }
    svd_raw(&m.0, rank_tol)
}

pub(crate) fn check_rank_arg(m: &DenseMatrix, r: usize) -> Result<()> {
    let k = m.n_rows().min(m.n_cols());
    if r == 0 || r > k {
        return Err(LrdError::arg(format!("rank {r} outside 1..={k}")));
    }
    Ok(())
}

/// Best rank-`r` approximation. With tied singular values at the cut this
/// keeps the first `r` columns returned by the SVD, which is one minimizer of several.
pub fn svd_r(m: &DenseMatrix, r: usize) -> Result<DenseMatrix> {
    check_rank_arg(m, r)?;
    let f = svd(m, DEFAULT_RANK_TOL)?;
    Ok(DenseMatrix::wrap(f.reconstruct_top(r)))
}

/// `Σ_{i≤r} σ_i(M)²`.
pub fn schatten_r_sq(m: &DenseMatrix, r: usize) -> Result<f64> {
    check_rank_arg(m, r)?;
    let f = svd(m, DEFAULT_RANK_TOL)?;
    Ok(f.sigma.iter().take(r).map(|s| s * s).sum())
}

/// Index support `Ω ⊆ [n_rows] × [n_cols]`, kept sorted row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SupportSet {
    n_rows: usize,
    n_cols: usize,
    indices: Vec<(usize, usize)>,
    mask: Vec<bool>,
}

impl SupportSet {
    /// Sorts the given pairs; duplicates or out-of-range pairs are rejected.
    pub fn new(n_rows: usize, n_cols: usize, mut indices: Vec<(usize, usize)>) -> Result<Self> {
        if n_rows == 0 || n_cols == 0 {
            return Err(LrdError::arg("support dimensions must be positive"));
        }
        if let Some(&(i, j)) = indices.iter().find(|&&(i, j)| i >= n_rows || j >= n_cols) {
            return Err(LrdError::arg(format!(
                "index ({i}, {j}) outside {n_rows}x{n_cols}"
            )));
        }
        indices.sort_unstable();
        if let Some(w) = indices.windows(2).find(|w| w[0] == w[1]) {
            return Err(LrdError::arg(format!("duplicate index {:?}", w[0])));
        }
        Ok(Self::from_sorted(n_rows, n_cols, indices))
    }

    fn from_sorted(n_rows: usize, n_cols: usize, indices: Vec<(usize, usize)>) -> Self {
        let mut mask = vec![false; n_rows * n_cols];
        for &(i, j) in &indices {
            mask[i * n_cols + j] = true;
        }
        SupportSet {
            n_rows,
            n_cols,
            indices,
            mask,
        }
    }

    pub(crate) fn from_mask(n_rows: usize, n_cols: usize, mask: Vec<bool>) -> Self {
        let indices = (0..n_rows)
            .flat_map(|i| (0..n_cols).map(move |j| (i, j)))
            .filter(|&(i, j)| mask[i * n_cols + j])
            .collect();
        SupportSet {
            n_rows,
            n_cols,
            indices,
            mask,
        }
    }

    pub fn full(n_rows: usize, n_cols: usize) -> Self {
        Self::from_mask(n_rows, n_cols, vec![true; n_rows * n_cols])
    }

    pub fn empty(n_rows: usize, n_cols: usize) -> Self {
        Self::from_mask(n_rows, n_cols, vec![false; n_rows * n_cols])
    }

    /// Nonzero pattern of `m`.
    pub fn support_of(m: &DenseMatrix) -> Self {
        let (n1, n2) = m.shape();
        let mut mask = vec![false; n1 * n2];
        for i in 0..n1 {
            for j in 0..n2 {
                mask[i * n2 + j] = m.get(i, j) != 0.0;
            }
        }
        Self::from_mask(n1, n2, mask)
    }

    pub fn complement(&self) -> Self {
        Self::from_mask(
            self.n_rows,
            self.n_cols,
            self.mask.iter().map(|b| !b).collect(),
        )
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn n_cols(&self) -> usize {
        self.n_cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.n_rows, self.n_cols)
    }

    pub fn indices(&self) -> &[(usize, usize)] {
        &self.indices
    }

    /// Cardinality `m`.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Implied density `p = m / (n_rows n_cols)`.
    pub fn density(&self) -> f64 {
        self.len() as f64 / (self.n_rows * self.n_cols) as f64
    }

    /// Row-major membership mask.
    pub(crate) fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn contains(&self, i: usize, j: usize) -> bool {
        i < self.n_rows && j < self.n_cols && self.mask[i * self.n_cols + j]
    }

    /// Zeroes the entries of `m` outside the support (inside it, when `complement`).
    pub(crate) fn apply(&self, m: &DMatrix<f64>, complement: bool) -> DMatrix<f64> {
        let mut out = m.clone();
        self.apply_mut(&mut out, complement);
        out
    }

    pub(crate) fn apply_mut(&self, m: &mut DMatrix<f64>, complement: bool) {
        let n2 = self.n_cols;
        for j in 0..n2 {
            for i in 0..self.n_rows {
                if self.mask[i * n2 + j] == complement {
                    m[(i, j)] = 0.0;
                }
            }
        }
    }
}

/// `P_Ω(M)`, or `P_{Ω⊥}(M)` when `complement` is set.
pub fn project_omega(s: &SupportSet, m: &DenseMatrix, complement: bool) -> Result<DenseMatrix> {
    m.check_shape(s.shape())?;
    Ok(DenseMatrix::wrap(s.apply(&m.0, complement)))
}

/// Tangent space `T = {U Xᵀ + Y Vᵀ}` of a rank-`r` matrix with column-orthonormal bases `U`, `V`.
#[derive(Clone, Debug)]
pub struct TangentSpace {
    u: DMatrix<f64>,
    v: DMatrix<f64>,
}

impl TangentSpace {
    const ORTHO_TOL: f64 = 1e-10;

    pub fn new(u: DMatrix<f64>, v: DMatrix<f64>) -> Result<Self> {
        if u.ncols() != v.ncols() || u.ncols() == 0 {
            return Err(LrdError::arg("bases must have the same positive number of columns"));
        }
        for (name, b) in [("U", &u), ("V", &v)] {
            let gram = b.transpose() * b - DMatrix::<f64>::identity(b.ncols(), b.ncols());
            if gram.amax() > Self::ORTHO_TOL {
                return Err(LrdError::arg(format!(
                    "{name} is not column-orthonormal (deviation {:.3e})",
                    gram.amax()
                )));
            }
        }
        Ok(TangentSpace { u, v })
    }

    /// Tangent space at the rank-`r` truncation of `x`.
    pub fn at(x: &DenseMatrix, r: usize) -> Result<Self> {
        check_rank_arg(x, r)?;
        let f = svd(x, DEFAULT_RANK_TOL)?;
        Ok(Self::from_factors(&f, r))
    }

    /// The zero subspace, used for the rank-0 matrix.
    pub(crate) fn trivial(n1: usize, n2: usize) -> Self {
        TangentSpace {
            u: DMatrix::zeros(n1, 0),
            v: DMatrix::zeros(n2, 0),
        }
    }

    pub(crate) fn from_factors(f: &SvdFactors, r: usize) -> Self {
        TangentSpace {
            u: f.u.columns(0, r).into_owned(),
            v: f.v.columns(0, r).into_owned(),
        }
    }

    pub fn rank(&self) -> usize {
        self.u.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.u.nrows(), self.v.nrows())
    }

    pub fn u(&self) -> &DMatrix<f64> {
        &self.u
    }

    pub fn v(&self) -> &DMatrix<f64> {
        &self.v
    }

    /// `dim T = r (n1 + n2 - r)`.
    pub fn dim(&self) -> usize {
        let (n1, n2) = self.shape();
        let r = self.rank();
        r * (n1 + n2 - r)
    }

    /// `UUᵀM + MVVᵀ − UUᵀMVVᵀ`.
    pub(crate) fn project_raw(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let utm = self.u.transpose() * m; // r × n2
        let mv = m * &self.v; // n1 × r
        let left = &self.u * &utm;
        let right = &mv * self.v.transpose();
        let both = &self.u * (&utm * &self.v) * self.v.transpose();
        left + right - both
    }

    /// `(I − UUᵀ) M (I − VVᵀ)`.
    pub(crate) fn project_perp_raw(&self, m: &DMatrix<f64>) -> DMatrix<f64> {
        let left = m - &self.u * (self.u.transpose() * m);
        &left - (&left * &self.v) * self.v.transpose()
    }
}

/// `P_T(M)`.
pub fn project_t(t: &TangentSpace, m: &DenseMatrix) -> Result<DenseMatrix> {
    m.check_shape(t.shape())?;
    Ok(DenseMatrix::wrap(t.project_raw(&m.0)))
}

/// `P_{T⊥}(M)`.
pub fn project_t_perp(t: &TangentSpace, m: &DenseMatrix) -> Result<DenseMatrix> {
    m.check_shape(t.shape())?;
    Ok(DenseMatrix::wrap(t.project_perp_raw(&m.0)))
}

/// Which composition [`composed_projector_norm`] measures.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Composition {
    /// `P_Ω P_T`
    OmegaT,
    /// `P_{Ω⊥} P_T`
    OmegaPerpT,
}

/// Power-iteration estimate of `‖P_Ω P_T‖` or `‖P_{Ω⊥} P_T‖` (operator norm over
/// unit-Frobenius inputs). Starts from a fixed seeded direction, so repeated
/// calls agree; the returned estimate is non-decreasing in `iters`.
pub fn composed_projector_norm(
    t: &TangentSpace,
    s: &SupportSet,
    which: Composition,
    iters: usize,
) -> Result<f64> {
    if iters == 0 {
        return Err(LrdError::arg("iters must be at least 1"));
    }
    if t.shape() != s.shape() {
        return Err(LrdError::dims(t.shape(), s.shape()));
    }
    let complement = which == Composition::OmegaPerpT;
    let (n1, n2) = t.shape();
    let mut rng = Rng::new(POWER_ITER_SEED);
    let mut x = t.project_raw(&DMatrix::from_fn(n1, n2, |_, _| rng.gaussian()));
    let mut best: f64 = 0.0;
    for _ in 0..iters {
        let nx = x.norm();
        if nx == 0.0 {
            break;
        }
        x /= nx;
        // ‖A x‖ for A = P_S P_T with x ∈ T; the next iterate is AᵀA x = P_T P_S x.
        let ax = s.apply(&x, complement);
        best = best.max(ax.norm());
        x = t.project_raw(&ax);
    }
    Ok(best.min(1.0))
}
