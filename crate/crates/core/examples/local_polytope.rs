// L1 distance to the local polytope for the PR box and the qutrit family.
//
// ```bash
// cargo run --release --example local_polytope
// ```

use nonlocality::{
    born_behavior, distance_to_local_polytope, enumerate_local_vertices, BehaviorTable, Dims, QutritModel, Result,
};

pub struct Summary {
    pub n_vertices: usize,
    pub pr_distance: f64,
    /// `(gamma, distance)` at `lambda = 0.807`.
    pub qutrit: Vec<(f64, f64)>,
}

pub fn run_example() -> Result<Summary> {
    let n_vertices = enumerate_local_vertices(Dims::cglmp())?.len();
    println!("local deterministic vertices for (2,2,3,3): {n_vertices}");

    let pr = distance_to_local_polytope(&BehaviorTable::pr_box())?;
    println!("PR box: distance {:.12}", pr.distance);

    let mut qutrit = Vec::new();
    for gamma in [0.1, 0.2, 0.3, 0.5, 0.792, 1.0] {
        let p = born_behavior(&QutritModel::new(gamma, 0.807)?)?;
        let d = distance_to_local_polytope(&p)?.distance;
        println!("gamma {gamma:<5} lambda 0.807: distance {d:.6}");
        qutrit.push((gamma, d));
    }
    Ok(Summary { n_vertices, pr_distance: pr.distance, qutrit })
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
