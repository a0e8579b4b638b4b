//! A small completion phase sweep written as CSV to stdout.
//!
//! ```text
//! cargo run --release --example phase_sweep > phase.csv
//! ```

use lrd::cli::{run_phase, write_phase_csv, PhaseGrid};

fn main() -> lrd::Result<()> {
    let grid: PhaseGrid = serde_json::from_str(
        r#"{
            "problem": "mc",
            "n": [30],
            "r": [2],
            "rho": [0.8, 2.0, 3.0, 5.0],
            "trials": 10,
            "seed": 1,
            "solver": {"max_iters": 2000}
        }"#,
    )?;
    let jobs = std::thread::available_parallelism().map_or(1, |n| n.get());
    let rows = run_phase(&grid, jobs)?;
    write_phase_csv(&rows, std::io::stdout().lock())
}
