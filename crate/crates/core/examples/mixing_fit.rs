// Recovering the white-noise mixing parameter from simulated coincidence counts.
//
// ```bash
// cargo run --release --example mixing_fit
// ```

use nonlocality::pipeline::{fit_point_from_counts, sample_counts};
use nonlocality::{born_behavior, fit_mixing_parameter, MixingFit, QutritModel, Result};

pub const TRUE_LAMBDA: f64 = 0.807;

pub fn run_example() -> Result<MixingFit> {
    let mut points = Vec::new();
    for k in 1..=10 {
        let gamma = 0.1 * k as f64;
        let p = born_behavior(&QutritModel::new(gamma, TRUE_LAMBDA)?)?;
        let counts = sample_counts(&p, 1000.0, 100 + k)?;
        let pt = fit_point_from_counts(gamma, &counts)?;
        println!("gamma {gamma:.1}: I3 = {:.4} +- {:.4}", pt.measured_i3, 2.0 / pt.weight.sqrt());
        points.push(pt);
    }
    let fit = fit_mixing_parameter(&points)?;
    println!("lambda = {:.4} +- {:.4} (2 sigma), generated with {TRUE_LAMBDA}", fit.lambda, 2.0 * fit.stderr);
    Ok(fit)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
