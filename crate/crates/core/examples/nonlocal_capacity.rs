// Asymptotic non-local capacity: one bit for the PR box, and a larger value
// for the partially entangled qutrit state than for the maximally entangled one.
//
// ```bash
// cargo run --release --example nonlocal_capacity
// ```

use nonlocality::{born_behavior, nonlocal_capacity_asym, BehaviorTable, CapacityCertificate, QutritModel, Result};

pub struct Summary {
    pub pr_box: CapacityCertificate,
    pub optimal_gamma: CapacityCertificate,
    pub max_entangled: CapacityCertificate,
}

fn report(label: &str, c: &CapacityCertificate) {
    println!("{label:<28} {:.9} bits  (gap {:.1e}, {} iterations)", c.value, c.gap, c.iterations);
}

pub fn run_example() -> Result<Summary> {
    let pr_box = nonlocal_capacity_asym(&BehaviorTable::pr_box(), 1e-6)?;
    report("PR box", &pr_box);
    let optimal_gamma = nonlocal_capacity_asym(&born_behavior(&QutritModel::new(0.792, 1.0)?)?, 1e-6)?;
    report("gamma 0.792, lambda 1", &optimal_gamma);
    let max_entangled = nonlocal_capacity_asym(&born_behavior(&QutritModel::new(1.0, 1.0)?)?, 1e-6)?;
    report("gamma 1, lambda 1", &max_entangled);
    for gamma in [0.2, 0.3, 0.5, 1.0] {
        let c = nonlocal_capacity_asym(&born_behavior(&QutritModel::new(gamma, 0.807)?)?, 1e-6)?;
        report(&format!("gamma {gamma}, lambda 0.807"), &c);
    }
    Ok(Summary { pr_box, optimal_gamma, max_entangled })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
