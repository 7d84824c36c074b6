//! Non-locality measures for bipartite input-output behaviors.
//!
//! Behaviors `P(ab|xy)` come either from the Born rule applied to the
//! two-qutrit family `(|00> + gamma |11> + |22>) / sqrt(2 + gamma^2)` with
//! white noise, or from experimental coincidence counts. They are scored by
//!
//! - the CHSH and CGLMP Bell parameters ([`bell`]),
//! - the L1 distance to the local polytope ([`polytope`]),
//! - the asymptotic non-local capacity, the minimal classical communication
//!   per copy needed to simulate the behavior ([`capacity`]).
//!
//! Measured data are usually slightly signaling, so the pipeline first
//! replaces them by the L1-closest non-signaling behavior
//! ([`polytope::project_nonsignaling`]).
//!
//! Every capability has a runnable program under `examples/`:
//!
//! ```bash
//! cargo run --release --example cglmp_violation
//! cargo run --release --example local_polytope
//! cargo run --release --example signaling_removal
//! cargo run --release --example channel_capacity
//! cargo run --release --example nonlocal_capacity
//! cargo run --release --example mixing_fit
//! cargo run --release --example gamma_sweep
//! ```

pub mod behavior;
pub mod bell;
pub mod capacity;
pub mod error;
pub mod io;
pub mod pipeline;
pub mod polytope;
pub mod quantum;
pub mod simplex;

pub use behavior::{l1_distance, normalize_counts, signaling_deficit, BehaviorTable, CountsRecord, Dims};
pub use bell::{fit_mixing_parameter, i2, i3, i3_theory, maximize_i3_theory, BellValue, FitPoint, Functional, MixingFit};
pub use capacity::{
    build_v_polytope, channel_capacity, nonlocal_capacity_asym, nonlocal_capacity_asym_with, CapacityCertificate,
    CapacityOptions, ChannelCapacity, ExtendedDistribution,
};
pub use error::{Error, Result};
pub use polytope::{
    distance_to_local_polytope, enumerate_local_vertices, is_local, project_nonsignaling, LocalVertexSet,
    PolytopeResult,
};
pub use quantum::{born_behavior, measurement_vector, qutrit_state, Party, QutritModel, StateVector};
pub use pipeline::{
    analyze_counts, bootstrap_uncertainty, run_sweep, Analysis, Interval, Measure, PipelineOptions, Statistic,
    SweepConfig, SweepRow,
};
pub use simplex::SimplexOptions;
