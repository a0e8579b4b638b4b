//! The r*-norm and its proximal maps on a small matrix.
//!
//! ```text
//! cargo run --example spectral_prox
//! ```

use lrd::linalg::{schatten_r_sq, svd, DEFAULT_RANK_TOL};
use lrd::rstar::{moreau_residual, prox_half_r_sq, prox_rstar, prox_topr_sq_vec, rstar_norm};
use lrd::{DenseMatrix, Rng};

fn main() -> lrd::Result<()> {
    // vector level: prox of (γ/2)·(sum of the r largest squares)
    let s = [3.0, 2.0, 2.0, 0.5];
    let p = prox_topr_sq_vec(&s, 2, 1.0)?;
    println!("prox of {s:?} (r = 2, γ = 1): {:?}", p.shrunk_spectrum);
    if let Some(g) = p.tie_group {
        println!("  tied block {}..={} at {:.4}", g.start, g.end, g.value);
    }

    let m = DenseMatrix::gaussian(5, 4, &mut Rng::new(7));
    let r = 2;
    println!("‖M‖_r²        = {:.6}", schatten_r_sq(&m, r)?);
    println!("‖M‖_r*        = {:.6}", rstar_norm(&m, r)?);
    println!("½‖M‖_F²       = {:.6}", 0.5 * m.frobenius_norm().powi(2));

    for gamma in [0.3, 1.0, 3.0] {
        let a = prox_half_r_sq(&m, r, gamma)?;
        let b = prox_rstar(&m, r, gamma)?;
        let sa = svd(&a, DEFAULT_RANK_TOL)?.sigma;
        let sb = svd(&b, DEFAULT_RANK_TOL)?.sigma;
        println!(
            "γ = {gamma}: σ(prox ½‖·‖_r²) = {:.3?}  σ(prox ‖·‖_r*) = {:.3?}  Moreau residual {:.1e}",
            sa,
            sb,
            moreau_residual(&m, r, gamma)?
        );
    }
    Ok(())
}
