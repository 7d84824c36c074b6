use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use nonlocality::capacity::CapacityOptions;
use nonlocality::io::{behavior_to_json, counts_to_json, load_counts, write_results_csv, write_vertices_csv};
use nonlocality::pipeline::{analyze_counts, run_sweep, sample_counts, BootstrapRequest, Sidecar};
use nonlocality::{
    born_behavior, enumerate_local_vertices, Dims, Error, Measure, PipelineOptions, QutritModel, Result,
    SimplexOptions, SweepConfig,
};

#[derive(Parser)]
#[command(name = "nonlocality", version, about = "Non-locality measures for qutrit Bell experiments")]
struct Cli {
    #[command(flatten)]
    tols: Tolerances,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Tolerances {
    /// Capacity tolerance in bits.
    #[arg(long, global = true, default_value_t = 1e-6)]
    tol: f64,
    /// Feasibility tolerance of the linear programs.
    #[arg(long, global = true, default_value_t = 1e-9)]
    lp_tol: f64,
}

#[derive(Subcommand)]
enum Command {
    /// Born-rule behavior of the noisy qutrit model, or Poisson counts drawn from it.
    Simulate {
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Emit a counts file with this many expected events per setting pair.
        #[arg(long)]
        counts_per_block: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Score a counts file.
    Analyze {
        path: PathBuf,
        #[arg(long, value_parser = parse_measures)]
        measures: MeasureList,
        #[arg(long)]
        project_ns: bool,
        #[arg(long)]
        bootstrap: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score the qutrit model over a gamma grid and write a CSV table.
    Sweep {
        #[arg(long)]
        gamma_start: f64,
        #[arg(long)]
        gamma_stop: f64,
        #[arg(long)]
        gamma_steps: usize,
        #[arg(long)]
        lambda: f64,
        #[arg(long, value_parser = parse_measures)]
        measures: MeasureList,
        #[arg(long, default_value_t = 0)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000.0)]
        counts_per_block: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Write the local deterministic vertices as CSV.
    Vertices {
        #[arg(long, value_parser = parse_dims)]
        dims: Dims,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone)]
struct MeasureList(Vec<Measure>);

fn parse_measures(s: &str) -> std::result::Result<MeasureList, String> {
    Measure::parse_list(s).map(MeasureList).map_err(|e| e.to_string())
}

fn parse_dims(s: &str) -> std::result::Result<Dims, String> {
    let parts: Vec<usize> = s
        .split(',')
        .map(|t| t.trim().parse::<usize>().map_err(|e| format!("'{t}': {e}")))
        .collect::<std::result::Result<_, _>>()?;
    match parts[..] {
        [nx, ny, na, nb] => Dims::new(nx, ny, na, nb).map_err(|e| e.to_string()),
        _ => Err(format!("expected NX,NY,NA,NB, got '{s}'")),
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, format!("{text}\n"))?,
        None => println!("{text}"),
    }
    Ok(())
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".json");
    PathBuf::from(name)
}

fn write_sidecar<C: Serialize>(out: &Path, sidecar: &Sidecar<C>) -> Result<()> {
    let text = serde_json::to_string_pretty(sidecar).expect("sidecar serialize");
    std::fs::write(sidecar_path(out), format!("{text}\n"))?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let options = PipelineOptions {
        project_ns: true,
        capacity: CapacityOptions::with_tol(cli.tols.tol),
        lp: SimplexOptions { feasibility_tol: cli.tols.lp_tol, ..Default::default() },
    };
    match cli.command {
        Command::Simulate { gamma, lambda, out, counts_per_block, seed } => {
            let model = QutritModel::new(gamma, lambda)?;
            let p = born_behavior(&model)?;
            let text = match counts_per_block {
                Some(n) => counts_to_json(&sample_counts(&p, n, seed)?),
                None => behavior_to_json(&p, Some(&model)),
            };
            emit(&text, out.as_deref())
        }
        Command::Analyze { path, measures, project_ns, bootstrap, seed, out } => {
                        let counts = load_counts(&path)?;
            let opts = PipelineOptions { project_ns, ..options };
            let request = bootstrap.map(|n| BootstrapRequest { n, seed });
            let analysis = analyze_counts(&counts, &measures.0, &opts, request)?;
            emit(&serde_json::to_string_pretty(&analysis).expect("analysis serialize"), out.as_deref())
        }
        Command::Sweep {
            gamma_start,
            gamma_stop,
            gamma_steps,
            lambda,
            measures,
            bootstrap,
            seed,
            counts_per_block,
            out,
        } => {
            let mut cfg = SweepConfig::new(
                SweepConfig::linear_grid(gamma_start, gamma_stop, gamma_steps)?,
                lambda,
                measures.0,
            );
            cfg.tol = cli.tols.tol;
            cfg.lp_tol = cli.tols.lp_tol;
            cfg.n_bootstrap = bootstrap;
            cfg.seed = seed;
            cfg.counts_per_block = counts_per_block;
            let rows = run_sweep(&cfg)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_results_csv(&rows, &mut w)?;
            w.flush()?;
            write_sidecar(&out, &Sidecar::new("sweep", &cfg, cfg.options()))
        }
        Command::Vertices { dims, out } => {
            let set = enumerate_local_vertices(dims)?;
            let mut w = BufWriter::new(File::create(&out)?);
            write_vertices_csv(&set, &mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            report_exit(&e)
        }
    }
}

fn report_exit(e: &Error) -> ExitCode {
    ExitCode::from(e.exit_code() as u8)
}
