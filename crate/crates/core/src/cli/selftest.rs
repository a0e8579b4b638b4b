use clap::Args;
use serde::Serialize;

use super::exit;
use crate::error::{LrdError, Result};
use crate::instances::sample_uniform;
use crate::linalg::{
    composed_projector_norm, project_omega, project_t, project_t_perp, schatten_r_sq, svd, Composition,
    DenseMatrix, TangentSpace, DEFAULT_POWER_ITERS, DEFAULT_RANK_TOL,
};
use crate::rng::Rng;
use crate::rstar::{moreau_residual, prox_topr_sq_vec, rstar_maximizer, rstar_norm};
use crate::solvers::{solve_factored_gd, SolverConfig};

pub const SUITES: [&str; 5] = ["prox", "moreau", "projector", "conjugacy", "landscape"];

#[derive(Clone, Debug, Serialize)]
pub struct SuiteOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// worst observed violation or a short failure note
    pub detail: String,
}

/// `½‖y − s‖² + (γ/2)·(sum of the r largest y_i²)`.
fn prox_objective(y: &[f64], s: &[f64], r: usize, gamma: f64) -> f64 {
    let mut sq: Vec<f64> = y.iter().map(|v| v * v).collect();
    sq.sort_by(|a, b| b.total_cmp(a));
    let fit: f64 = y.iter().zip(s).map(|(a, b)| (a - b) * (a - b)).sum();
    0.5 * fit + 0.5 * gamma * sq.iter().take(r).sum::<f64>()
}

fn random_spectrum(rng: &mut Rng, len: usize) -> Vec<f64> {
    let mut s: Vec<f64> = (0..len).map(|_| 3.0 * rng.uniform()).collect();
    if rng.bernoulli(0.3) && len > 1 {
        s[1] = s[0];
    }
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// The prox output must not be beaten by any small perturbation.
fn suite_prox(fault: bool) -> Result<(bool, String)> {
    let mut rng = Rng::new(11);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let len = 1 + rng.below(8) as usize;
        let r = 1 + rng.below(len as u64) as usize;
        let gamma = [0.3, 1.0, 3.0][rng.below(3) as usize];
        let s = random_spectrum(&mut rng, len);
        let mut y = prox_topr_sq_vec(&s, r, gamma)?.shrunk_spectrum;
        if fault {
            y[0] = -y[0];
        }
        let base = prox_objective(&y, &s, r, gamma);
        for _ in 0..20 {
            let z: Vec<f64> = y.iter().map(|v| v + 1e-4 * rng.gaussian()).collect();
            worst = worst.max(base - prox_objective(&z, &s, r, gamma));
        }
    }
    Ok((worst <= 1e-12, format!("max objective decrease {worst:.2e}")))
}

fn suite_moreau() -> Result<(bool, String)> {
    let mut rng = Rng::new(12);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let n1 = 1 + rng.below(6) as usize;
        let n2 = 1 + rng.below(6) as usize;
        let m = DenseMatrix::gaussian(n1, n2, &mut rng);
        let r = 1 + rng.below(n1.min(n2) as u64) as usize;
        for gamma in [0.3, 1.0, 3.0] {
            worst = worst.max(moreau_residual(&m, r, gamma)?);
        }
    }
    Ok((worst <= 1e-10, format!("max residual {worst:.2e}")))
}

fn suite_projector() -> Result<(bool, String)> {
    let mut rng = Rng::new(13);
    let mut worst: f64 = 0.0;
    let mut omega_norm: f64 = 0.0;
    for _ in 0..10 {
        let (n1, n2, r) = (12, 9, 2);
        let a = DenseMatrix::gaussian(n1, r, &mut rng);
        let b = DenseMatrix::gaussian(r, n2, &mut rng);
        let t = TangentSpace::at(&a.matmul(&b)?, r)?;
        let m = DenseMatrix::gaussian(n1, n2, &mut rng);
        let k = DenseMatrix::gaussian(n1, n2, &mut rng);
        let pt = project_t(&t, &m)?;
        let sum = &pt + &project_t_perp(&t, &m)?;
        worst = worst.max((&sum - &m).frobenius_norm());
        worst = worst.max((&project_t(&t, &pt)? - &pt).frobenius_norm());
        worst = worst.max((project_t(&t, &k)?.dot(&m) - k.dot(&pt)).abs());
        let obs = sample_uniform(n1, n2, 90, rng.next_u64())?;
        let po = project_omega(&obs, &m, false)?;
        worst = worst.max((&project_omega(&obs, &po, false)? - &po).frobenius_norm());
        omega_norm = omega_norm.max(composed_projector_norm(&t, &obs, Composition::OmegaPerpT, DEFAULT_POWER_ITERS)?);
    }
    Ok((
        worst <= 1e-10 && omega_norm < 1.0,
        format!("max identity defect {worst:.2e}, max ‖P_Ω⊥ P_T‖ {omega_norm:.4}"),
    ))
}

fn suite_conjugacy() -> Result<(bool, String)> {
    let mut rng = Rng::new(14);
    let mut worst: f64 = 0.0;
    for _ in 0..30 {
        let n = 2 + rng.below(4) as usize;
        let r = 1 + rng.below(n as u64) as usize;
        let lowrank = DenseMatrix::gaussian(n, r, &mut rng).matmul(&DenseMatrix::gaussian(r, n, &mut rng))?;
        let half_sq = 0.5 * lowrank.frobenius_norm().powi(2);
        worst = worst.max((rstar_norm(&lowrank, r)? - half_sq).abs() / half_sq.max(1.0));
        // Fenchel-Young: equality at the maximizer, inequality elsewhere
        let m = DenseMatrix::gaussian(n, n, &mut rng);
        let value = rstar_norm(&m, r)?;
        let x = rstar_maximizer(&m, r)?;
        let gap = value + 0.5 * schatten_r_sq(&x, r)? - m.dot(&x);
        worst = worst.max(gap.abs());
        let other = DenseMatrix::gaussian(n, n, &mut rng);
        let slack = value + 0.5 * schatten_r_sq(&other, r)? - m.dot(&other);
        worst = worst.max((-slack).max(0.0));
    }
    Ok((worst <= 1e-10, format!("max defect {worst:.2e}")))
}

fn suite_landscape() -> Result<(bool, String)> {
    let y = DenseMatrix::gaussian(20, 15, &mut Rng::new(15));
    let f = svd(&y, DEFAULT_RANK_TOL)?;
    let target = 0.5 * f.sigma[3..].iter().map(|s| s * s).sum::<f64>();
    let mut worst: f64 = 0.0;
    for seed in 0..5 {
        let cfg = SolverConfig {
            seed,
            tol: 1e-6,
            max_iters: 50_000,
            ..Default::default()
        };
        let sol = solve_factored_gd(&y, 3, &cfg)?;
        worst = worst.max((sol.report.primal_value - target).abs());
    }
    Ok((worst <= 1e-6, format!("max objective gap {worst:.2e}")))
}

/// Runs the named suite, or all of them when `filter` is `None`.
pub fn run_selftest(filter: Option<&str>, inject_fault: bool) -> Result<Vec<SuiteOutcome>> {
    if let Some(f) = filter {
        if !SUITES.contains(&f) {
            return Err(LrdError::arg(format!("unknown suite `{f}`; known: {}", SUITES.join(", "))));
        }
    }
    let mut out = Vec::new();
    for name in SUITES {
        if filter.is_some_and(|f| f != name) {
            continue;
        }
        let result = match name {
            "prox" => suite_prox(inject_fault),
            "moreau" => suite_moreau(),
            "projector" => suite_projector(),
            "conjugacy" => suite_conjugacy(),
            _ => suite_landscape(),
        };
        let (passed, detail) = result.unwrap_or_else(|e| (false, e.to_string()));
        out.push(SuiteOutcome { name, passed, detail });
    }
    Ok(out)
}

#[derive(Args, Debug)]
pub(crate) struct SelftestArgs {
    /// Run only this suite
    #[arg(long)]
    filter: Option<String>,
    /// Flip a sign in the prox output to check that the harness notices
    #[arg(long)]
    inject_fault: bool,
}

pub(crate) fn cmd_selftest(args: SelftestArgs) -> Result<i32> {
    let outcomes = run_selftest(args.filter.as_deref(), args.inject_fault)?;
    println!("{:<10} {:<6} detail", "suite", "status");
    for o in &outcomes {
        println!("{:<10} {:<6} {}", o.name, if o.passed { "PASS" } else { "FAIL" }, o.detail);
    }
    Ok(if outcomes.iter().all(|o| o.passed) {
        exit::OK
    } else {
        exit::SELFTEST
    })
}
