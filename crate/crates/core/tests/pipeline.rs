mod common;

use std::io::Write;

use nonlocality::io::{counts_to_json, load_counts, parse_counts, read_results_csv, write_results_csv};
use nonlocality::pipeline::{
    analyze_counts, bootstrap_uncertainty, sample_counts, BootstrapRequest, PipelineOptions, Statistic,
};
use nonlocality::{
    born_behavior, run_sweep, BehaviorTable, CountsRecord, Dims, Error, Measure, QutritModel, SweepConfig, SweepRow,
};

use common::{oracle_behavior, oracle_i3};

fn model(gamma: f64, lambda: f64) -> BehaviorTable {
    born_behavior(&QutritModel::new(gamma, lambda).unwrap()).unwrap()
}

#[test]
fn bootstrap_width_shrinks_with_large_counts() {
    let c = CountsRecord::from_behavior(&model(1.0, 0.807), 9e6).unwrap();
    let iv = bootstrap_uncertainty(&c, Statistic::I3, 200, 1).unwrap();
    assert!(iv.half_width / iv.center < 1e-2, "{iv:?}");
    assert!(iv.half_width > 0.0);
}

#[test]
fn bootstrap_interval_is_calibrated() {
    let truth = 0.807 * oracle_i3(&oracle_behavior(1.0, 1.0));
    let p = model(1.0, 0.807);
    let trials = 1000;
    let covered = (0..trials)
        .filter(|&t| {
            let observed = sample_counts(&p, 1000.0, 10_000 + t).unwrap();
            bootstrap_uncertainty(&observed, Statistic::I3, 400, t).unwrap().contains(truth)
        })
        .count();
    assert!(covered as f64 >= 0.95 * trials as f64, "coverage {covered}/{trials}");
}

#[test]
fn bootstrap_is_stable_in_resample_count() {
    let c = sample_counts(&model(0.8, 0.807), 1000.0, 4).unwrap();
    let small = bootstrap_uncertainty(&c, Statistic::I3, 100, 77).unwrap();
    let large = bootstrap_uncertainty(&c, Statistic::I3, 10_000, 77).unwrap();
    let rel = (small.half_width - large.half_width).abs() / large.half_width;
    assert!(rel < 0.3, "{small:?} vs {large:?}");
}

#[test]
fn bootstrap_holds_background_fixed() {
    let p = model(1.0, 0.9);
    let c = CountsRecord::from_behavior(&p, 1000.0).unwrap();
    let bg = CountsRecord::new(c.dims(), c.counts().to_vec(), Some(vec![5.0; 36])).unwrap();
    let a = bootstrap_uncertainty(&bg, Statistic::I3, 300, 3).unwrap();
    let b = bootstrap_uncertainty(&bg, Statistic::I3, 300, 3).unwrap();
    assert_eq!(a, b);
    // Same Poisson noise on fewer signal events: wider interval.
    let plain = bootstrap_uncertainty(&c, Statistic::I3, 300, 3).unwrap();
    assert!(a.half_width > plain.half_width);
}

#[test]
fn bootstrap_fails_when_resamples_fail() {
    let d = Dims::cglmp();
    let mut counts = vec![100u64; 36];
    // One block carries a single event, so about a third of resamples empty it.
    for a in 0..3 {
        for b in 0..3 {
            counts[d.index(1, 1, a, b)] = 0;
        }
    }
    counts[d.index(1, 1, 0, 0)] = 1;
    let c = CountsRecord::new(d, counts, None).unwrap();
    match bootstrap_uncertainty(&c, Statistic::I3, 200, 5) {
        Err(Error::Bootstrap { failed, total, .. }) => {
            assert_eq!(total, 200);
            assert!(failed > 2);
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn bootstrap_of_distance_and_capacity() {
    let c = sample_counts(&model(0.792, 0.807), 5000.0, 8).unwrap();
    let opts = PipelineOptions { project_ns: true, ..Default::default() };
    let analysis = analyze_counts(
        &c,
        &[Measure::DistLocal, Measure::Capacity],
        &opts,
        Some(BootstrapRequest { n: 100, seed: 2 }),
    )
    .unwrap();
    for key in ["dist_local", "capacity"] {
        let iv = &analysis.intervals[key];
        assert!(iv.half_width > 0.0 && iv.half_width < analysis.measures[key], "{key}: {iv:?}");
        assert_eq!(iv.failed, 0);
    }
}

#[test]
fn sweep_i3_follows_oracle() {
    let cfg = SweepConfig::new(vec![0.0, 0.5, 1.0], 1.0, vec![Measure::I3]);
    let rows = run_sweep(&cfg).unwrap();
    for r in &rows {
        let oracle = oracle_i3(&oracle_behavior(r.gamma, 1.0));
        assert!((r.i3.unwrap() - oracle).abs() < 1e-10);
        assert!((r.i3.unwrap() - r.i3_ns.unwrap()).abs() < 1e-9);
        assert!(r.dist_local_raw.is_none() && r.capacity_ns.is_none());
    }
    assert!(rows[0].i3 < rows[1].i3 && rows[1].i3 < rows[2].i3);
    assert!((rows[2].i3.unwrap() - 2.8729).abs() < 1e-3);
}

#[test]
fn sweep_at_fitted_noise_level() {
    let cfg = SweepConfig::new(vec![0.5], 0.807, vec![Measure::I3]);
    let row = &run_sweep(&cfg).unwrap()[0];
    let oracle = 0.807 * oracle_i3(&oracle_behavior(0.5, 1.0));
    assert!((row.i3.unwrap() - oracle).abs() < 1e-10);
    assert!((row.i3.unwrap() - 2.263).abs() < 1e-3);
}

#[test]
fn sweep_shows_non_monotonicity() {
    let cfg = SweepConfig::new(vec![0.792, 1.0], 1.0, vec![Measure::DistLocal, Measure::Capacity]);
    let rows = run_sweep(&cfg).unwrap();
    assert!(rows[0].dist_local_ns.unwrap() > rows[1].dist_local_ns.unwrap());
    let gaps = rows[0].capacity_gap.unwrap() + rows[1].capacity_gap.unwrap();
    assert!(rows[0].capacity_ns.unwrap() - rows[1].capacity_ns.unwrap() > 2.0 * gaps);
}

fn csv_bytes(rows: &[SweepRow]) -> Vec<u8> {
    let mut out = Vec::new();
    write_results_csv(rows, &mut out).unwrap();
    out
}

#[test]
fn sweeps_are_byte_reproducible() {
    let mut cfg = SweepConfig::new(
        SweepConfig::linear_grid(0.2, 1.0, 5).unwrap(),
        0.807,
        vec![Measure::I3, Measure::DistLocal, Measure::DistNs],
    );
    cfg.n_bootstrap = 100;
    cfg.seed = 99;
    let a = csv_bytes(&run_sweep(&cfg).unwrap());
    let b = csv_bytes(&run_sweep(&cfg).unwrap());
    assert_eq!(a, b);
    cfg.seed = 100;
    assert_ne!(a, csv_bytes(&run_sweep(&cfg).unwrap()));
}

#[test]
fn results_table_round_trips() {
    let cfg = SweepConfig::new(
        vec![0.0, 0.1 + 0.2, 1.0 / 3.0, 1.0],
        0.807,
        vec![Measure::I3, Measure::DistLocal, Measure::DistNs, Measure::Capacity],
    );
    let mut rows = run_sweep(&cfg).unwrap();
    let mut boot = SweepConfig::new(vec![0.5], 0.807, vec![Measure::I3]);
    boot.n_bootstrap = 100;
    rows.extend(run_sweep(&boot).unwrap());
    assert!(rows.last().unwrap().i3_half_width.is_some());
    let bytes = csv_bytes(&rows);
    assert_eq!(read_results_csv(bytes.as_slice()).unwrap(), rows);
    assert!(read_results_csv(&b""[..]).is_err());
    assert_eq!(read_results_csv(csv_bytes(&[]).as_slice()).unwrap(), vec![]);
}

#[test]
fn counts_file_round_trips() {
    let p = model(0.6, 0.9);
    let plain = sample_counts(&p, 800.0, 12).unwrap();
    let with_bg = CountsRecord::new(plain.dims(), plain.counts().to_vec(), Some((0..36).map(|i| i as f64 * 0.25).collect()))
        .unwrap();
    for c in [plain, with_bg] {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(counts_to_json(&c).as_bytes()).unwrap();
        assert_eq!(load_counts(f.path()).unwrap(), c);
        assert_eq!(parse_counts(&counts_to_json(&c)).unwrap(), c);
    }
}

#[test]
fn missing_file_is_an_io_error() {
    let err = load_counts("/nonexistent/counts.json").unwrap_err();
    assert!(matches!(err, Error::Io(_)));
}
