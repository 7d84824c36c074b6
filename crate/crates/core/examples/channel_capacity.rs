// Blahut-Arimoto capacities of binary symmetric channels against `1 - h(p)`.
//
// ```bash
// cargo run --release --example channel_capacity
// ```

use nonlocality::{channel_capacity, Result};

fn binary_entropy(p: f64) -> f64 {
    if p <= 0.0 || p >= 1.0 {
        0.0
    } else {
        -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
    }
}

/// Largest deviation from the closed form over the flip-probability grid.
pub fn run_example() -> Result<f64> {
    let mut worst: f64 = 0.0;
    println!("{:>5} {:>12} {:>12} {:>6}", "p", "capacity", "1 - h(p)", "iters");
    for k in 0..=10 {
        let p = 0.05 * k as f64;
        let c = channel_capacity(&[vec![1.0 - p, p], vec![p, 1.0 - p]], 1e-9)?;
        let exact = 1.0 - binary_entropy(p);
        worst = worst.max((c.capacity - exact).abs());
        println!("{p:>5.2} {:>12.9} {exact:>12.9} {:>6}", c.capacity, c.iterations);
    }
    println!("largest deviation {worst:.2e} bits");
    Ok(worst)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
