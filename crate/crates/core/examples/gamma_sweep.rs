// All measures along the entanglement parameter at the noise level
// `lambda = 0.807`, written as CSV to stdout.
//
// ```bash
// cargo run --release --example gamma_sweep
// ```

use nonlocality::io::write_results_csv;
use nonlocality::{run_sweep, Measure, Result, SweepConfig, SweepRow};

pub fn run_example() -> Result<Vec<SweepRow>> {
    let grid = SweepConfig::linear_grid(0.0, 1.0, 11)?;
    let cfg = SweepConfig::new(grid, 0.807, vec![Measure::I3, Measure::DistLocal, Measure::DistNs, Measure::Capacity]);
    let rows = run_sweep(&cfg)?;
    write_results_csv(&rows, std::io::stdout().lock())?;
    Ok(rows)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
