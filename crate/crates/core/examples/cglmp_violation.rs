// CGLMP values of the noisy two-qutrit family, and the entanglement that
// maximizes the violation.
//
// ```bash
// cargo run --release --example cglmp_violation
// ```

use nonlocality::{born_behavior, i3, maximize_i3_theory, QutritModel, Result};

pub struct Summary {
    pub i3_max_entangled: f64,
    pub gamma_opt: f64,
    pub i3_opt: f64,
}

pub fn run_example() -> Result<Summary> {
    println!("{:>6} {:>10} {:>10}", "gamma", "I3(1.0)", "I3(0.807)");
    for k in 0..=10 {
        let gamma = 0.1 * k as f64;
        let pure = i3(&born_behavior(&QutritModel::new(gamma, 1.0)?)?)?.value;
        let noisy = i3(&born_behavior(&QutritModel::new(gamma, 0.807)?)?)?.value;
        println!("{gamma:>6.2} {pure:>10.6} {noisy:>10.6}");
    }
    let i3_max_entangled = i3(&born_behavior(&QutritModel::new(1.0, 1.0)?)?)?.value;
    let (gamma_opt, i3_opt) = maximize_i3_theory(0.6, 1.0, 1e-6)?;
    println!("maximally entangled: I3 = {i3_max_entangled:.10}");
    println!("largest violation:   I3 = {i3_opt:.10} at gamma = {gamma_opt:.6}");
    Ok(Summary { i3_max_entangled, gamma_opt, i3_opt })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
