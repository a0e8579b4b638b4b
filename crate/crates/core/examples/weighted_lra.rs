//! Weighted low-rank approximation on the biclique gadget of a small graph.

use lrd::instances::biclique_reduction;
use lrd::solvers::{solve_weighted_lra, SolverConfig};

fn main() -> lrd::Result<()> {
    // K_{2,2} plus a pendant edge
    let edges = [(0, 0), (0, 1), (1, 0), (1, 1), (2, 2)];
    let inst = biclique_reduction(3, 3, &edges, 1.0, None)?;
    let cfg = SolverConfig { max_iters: 20_000, ..Default::default() };
    let rep = solve_weighted_lra(&inst.y, &inst.w, inst.beta, 1, &cfg)?;
    println!("{:?} after {} iterations, objective {:.6}", rep.status, rep.iterations_run, rep.primal_value);
    println!("h(M) = {:.6}", inst.h_value(&rep.solution)?);
    for i in 0..3 {
        let row: Vec<String> = (0..3).map(|j| format!("{:7.4}", rep.solution.get(i, j))).collect();
        println!("  {}", row.join(" "));
    }
    Ok(())
}
