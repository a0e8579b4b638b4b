//! Reference computations that share no code with the library.

#![allow(dead_code)]

use nalgebra::DMatrix;

/// Euclidean projection onto `{y : y_1 ≥ y_2 ≥ … ≥ y_n}` by pool-adjacent-violators.
pub fn pava_decreasing(x: &[f64]) -> Vec<f64> {
    // blocks of (sum, count)
    let mut blocks: Vec<(f64, usize)> = Vec::with_capacity(x.len());
    for &v in x {
        blocks.push((v, 1));
        while blocks.len() > 1 {
            let (s1, c1) = blocks[blocks.len() - 2];
            let (s2, c2) = blocks[blocks.len() - 1];
            if s1 / c1 as f64 >= s2 / c2 as f64 {
                break;
            }
            blocks.pop();
            *blocks.last_mut().unwrap() = (s1 + s2, c1 + c2);
        }
    }
    let mut out = Vec::with_capacity(x.len());
    for (s, c) in blocks {
        out.extend(std::iter::repeat(s / c as f64).take(c));
    }
    out
}

/// Projection onto the nonnegative decreasing cone.
pub fn project_monotone_cone(x: &[f64]) -> Vec<f64> {
    pava_decreasing(x).into_iter().map(|v| v.max(0.0)).collect()
}

/// Minimizer of `½‖y − s‖² + (γ/2)·Σ_{i≤r} y_(i)²` for a nonnegative decreasing `s`.
///
/// On the cone the r largest entries are the first r, so the objective is a
/// smooth strongly convex quadratic there and projected gradient converges
/// linearly with rate `γ/(1+γ)`.
pub fn vec_prox_oracle(s: &[f64], r: usize, gamma: f64) -> Vec<f64> {
    let step = 1.0 / (1.0 + gamma);
    let mut y = project_monotone_cone(s);
    for _ in 0..5000 {
        let shifted: Vec<f64> = y
            .iter()
            .zip(s)
            .enumerate()
            .map(|(i, (&yi, &si))| {
                let g = yi - si + if i < r { gamma * yi } else { 0.0 };
                yi - step * g
            })
            .collect();
        let next = project_monotone_cone(&shifted);
        let moved: f64 = next.iter().zip(&y).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
        y = next;
        if moved < 1e-15 {
            break;
        }
    }
    y
}

fn golden_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut a = hi - phi * (hi - lo);
    let mut b = lo + phi * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    for _ in 0..200 {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + phi * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - phi * (hi - lo);
            fa = f(a);
        }
    }
    f(0.5 * (lo + hi)).max(fa).max(fb)
}

/// `sup_y ⟨s, y⟩ − ½·(sum of the r largest y_i²)` for a nonnegative `s`.
///
/// Writing the top-r sum as `min_τ rτ + Σ (y_i² − τ)_+` turns the supremum
/// into a one-dimensional concave maximization over `τ ≥ 0`, searched here by
/// golden section.
pub fn rstar_vec_oracle(s: &[f64], r: usize) -> f64 {
    let h = |tau: f64| {
        let root = tau.sqrt();
        let inner: f64 = s
            .iter()
            .map(|&si| if si <= root { si * root } else { 0.5 * si * si + 0.5 * tau })
            .sum();
        inner - 0.5 * r as f64 * tau
    };
    let total: f64 = s.iter().sum();
    let top = s.iter().cloned().fold(0.0, f64::max);
    let hi = (top * top).max((total / r as f64).powi(2)) + 1.0;
    golden_max(h, 0.0, hi)
}

/// Singular values in decreasing order, by the eigenvalues of `MᵀM`
/// (symmetric eigensolver, not the SVD path the library uses).
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    let gram = if m.nrows() >= m.ncols() { m.transpose() * m } else { m * m.transpose() };
    let mut ev: Vec<f64> = gram.symmetric_eigenvalues().iter().map(|v| v.max(0.0).sqrt()).collect();
    ev.sort_by(|a, b| b.total_cmp(a));
    ev
}

/// `rstar_norm` computed from scratch: oracle singular values, then the τ search.
pub fn rstar_matrix_oracle(m: &DMatrix<f64>, r: usize) -> f64 {
    rstar_vec_oracle(&singular_values(m), r)
}

/// Small deterministic generator for test fixtures (SplitMix64).
pub struct Fixture(u64);

impl Fixture {
    pub fn new(seed: u64) -> Self {
        Fixture(seed)
    }

    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }

    pub fn below(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn normal(&mut self) -> f64 {
        let u1 = self.uniform().max(1e-300);
        let u2 = self.uniform();
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    }

    pub fn matrix(&mut self, n1: usize, n2: usize) -> DMatrix<f64> {
        DMatrix::from_fn(n1, n2, |_, _| self.normal())
    }

    /// A nonnegative decreasing spectrum of length `len`, with a forced tie
    /// at the top some of the time.
    pub fn spectrum(&mut self, len: usize) -> Vec<f64> {
        let mut s: Vec<f64> = (0..len).map(|_| 3.0 * self.uniform()).collect();
        s.sort_by(|a, b| b.total_cmp(a));
        if len > 1 && self.uniform() < 0.3 {
            s[1] = s[0];
        }
        s
    }
}

pub fn l2_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}
