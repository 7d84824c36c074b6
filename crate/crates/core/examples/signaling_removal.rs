// Finite counts make a behavior slightly signaling. Projecting onto the
// non-signaling polytope removes it and barely moves the Bell value.
//
// ```bash
// cargo run --release --example signaling_removal
// ```

use nonlocality::pipeline::sample_counts;
use nonlocality::{born_behavior, i3, normalize_counts, project_nonsignaling, signaling_deficit, QutritModel, Result};

pub struct Summary {
    pub deficit_raw: f64,
    pub deficit_ns: f64,
    pub projection_distance: f64,
    pub i3_raw: f64,
    pub i3_ns: f64,
}

pub fn run_example() -> Result<Summary> {
    let model = QutritModel::new(0.792, 0.807)?;
    let counts = sample_counts(&born_behavior(&model)?, 2000.0, 42)?;
    let raw = normalize_counts(&counts)?;
    let projection = project_nonsignaling(&raw)?;
    let s = Summary {
        deficit_raw: signaling_deficit(&raw),
        deficit_ns: signaling_deficit(&projection.nearest),
        projection_distance: projection.distance,
        i3_raw: i3(&raw)?.value,
        i3_ns: i3(&projection.nearest)?.value,
    };
    println!("signaling deficit: raw {:.3e}, projected {:.3e}", s.deficit_raw, s.deficit_ns);
    println!("L1 distance moved: {:.6}", s.projection_distance);
    println!("I3: raw {:.6}, projected {:.6}", s.i3_raw, s.i3_ns);
    Ok(s)
}

#[allow(dead_code)]
fn main() -> Result<()> {
    run_example().map(|_| ())
}
