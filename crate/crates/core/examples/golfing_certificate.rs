//! Golfing construction of a completion certificate and its residual trace.
//!
//! ```text
//! cargo run --release --example golfing_certificate
//! ```

use lrd::certificates::{build_certificate_golfing_mc, verify_mc_certificate, GolfingConfig, VerifyMode};
use lrd::instances::{MCInstance, Sampler};
use lrd::TangentSpace;

fn main() -> lrd::Result<()> {
    let n = 100;
    // the golfing scheme draws its own partitions; the instance's sample is unused
    let inst = MCInstance::generate(n, n, 2, &[1.0, 1.0], Sampler::Uniform { m: 1 }, 5)?;
    let t = TangentSpace::at(&inst.x_star, 2)?;

    for (b, density) in [(3, 0.99), (12, 0.99)] {
        let q = 1.0 - (1.0f64 - density).powf(1.0 / b as f64);
        let cfg = GolfingConfig::new(b, q, 9)?;
        let g = build_certificate_golfing_mc(&inst.x_star, &t, &cfg)?;
        let rep = verify_mc_certificate(&g.certificate, &inst.x_star, &t, &g.obs, VerifyMode::Relaxed)?;
        println!("b = {b}, q = {q:.3}, union density {:.3}", g.obs.density());
        let trace: Vec<String> = g.trace.iter().map(|v| format!("{v:.1e}")).collect();
        println!("  ‖W_k‖_F: {}", trace.join(" "));
        for c in &rep.conditions {
            println!("  {:<18} {:.3e} vs {:.3e}  {}", c.name, c.lhs, c.bound, c.satisfied);
        }
    }
    Ok(())
}
