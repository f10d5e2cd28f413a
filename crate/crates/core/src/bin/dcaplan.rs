use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dcaplan_core::bench::{
    load_reference, run_sweep, run_trace_sweep, summarize, summarize_traces, write_csv, SweepSpec, TraceSpec,
};
use dcaplan_core::planners::{plan, NearMode, PlanConfig, PlannerKind};
use dcaplan_core::{Error, Scenario};

#[derive(Parser)]
#[command(
    name = "dcaplan",
    version,
    about = "Sampling-based optimal planning for the Reeds-Shepp car"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one planner and print the result as JSON.
    Plan(PlanArgs),
    /// Run repeated trials over several sample counts and emit CSV.
    Sweep(SweepArgs),
    /// Check tracing of a reference path by random sample sets.
    Trace(TraceArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum OnOff {
    On,
    Off,
}

#[derive(Args)]
struct Common {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    /// box or exact_ball
    #[arg(long, default_value = "exact_ball")]
    mode: NearMode,
    #[arg(long, value_enum, default_value = "on")]
    cache: OnOff,
    /// Seed (base seed for sweeps); defaults to the scenario's seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args)]
struct PlanArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "dfmt")]
    planner: PlannerKind,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Write the path as a JSON list of poses, one per collision step.
    #[arg(long)]
    path_out: Option<PathBuf>,
    /// Write the JSON result here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: Common,
    #[arg(long, default_value = "dfmt")]
    planner: PlannerKind,
    /// Comma-separated, strictly increasing sample counts.
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 50)]
    trials: usize,
    /// CSV output; the per-n summary goes next to it as <stem>.summary.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct TraceArgs {
    /// Scenario JSON file.
    #[arg(long)]
    scenario: PathBuf,
    /// Pose-list JSON file, or plan:<planner>:<n>:<seed>.
    #[arg(long)]
    reference: String,
    #[arg(long, value_delimiter = ',', required = true)]
    n: Vec<usize>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    #[arg(long, default_value_t = 0.0)]
    eta: f64,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

const EXIT_INPUT: u8 = 1;
const EXIT_FAILURE: u8 = 2;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INPUT)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.cmd {
        Cmd::Plan(a) => cmd_plan(a),
        Cmd::Sweep(a) => cmd_sweep(a),
        Cmd::Trace(a) => cmd_trace(a),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}

fn open_out(path: Option<&Path>) -> Result<Box<dyn Write>, Error> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn summary_path(out: &Path) -> PathBuf {
    let stem = out
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_default();
    out.with_file_name(format!("{stem}.summary.csv"))
}

fn cmd_plan(a: PlanArgs) -> Result<ExitCode, Error> {
    let sc = Scenario::load(&a.common.scenario)?;
    let cfg = PlanConfig {
        n: a.n,
        eta: a.common.eta,
        mode: a.common.mode,
        seed: a.common.seed.unwrap_or(sc.seed()),
        cache: matches!(a.common.cache, OnOff::On),
    };
    let (res, _) = plan(&sc, a.planner, &cfg)?;
    let mut out = open_out(a.out.as_deref())?;
    serde_json::to_writer_pretty(&mut out, &res).map_err(io::Error::from)?;
    writeln!(out)?;
    out.flush()?;
    if let Some(p) = a.path_out {
        let poly = res.polyline(sc.collision_step());
        std::fs::write(p, serde_json::to_string(&poly).map_err(io::Error::from)?)?;
    }
    Ok(if res.is_success() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FAILURE)
    })
}

fn cmd_sweep(a: SweepArgs) -> Result<ExitCode, Error> {
    let sc = Scenario::load(&a.common.scenario)?;
    let spec = SweepSpec {
        planner: a.planner,
        n_values: a.n,
        trials: a.trials,
        eta: a.common.eta,
        mode: a.common.mode,
        cache: matches!(a.common.cache, OnOff::On),
        base_seed: a.common.seed.unwrap_or(sc.seed()),
    };
    let rows = run_sweep(&sc, &spec)?;
    write_csv(open_out(a.out.as_deref())?, &rows)?;
    let summary = summarize(&rows);
    match &a.out {
        Some(p) => write_csv(File::create(summary_path(p))?, &summary)?,
        None => write_csv(io::stderr().lock(), &summary)?,
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_trace(a: TraceArgs) -> Result<ExitCode, Error> {
    let sc = Scenario::load(&a.scenario)?;
    let x_ref = load_reference(&a.reference, &sc)?;
    let spec = TraceSpec {
        n_values: a.n,
        trials: a.trials,
        eps: a.eps,
        eta: a.eta,
        base_seed: a.seed.unwrap_or(sc.seed()),
    };
    let rows = run_trace_sweep(&sc, &x_ref, &spec)?;
    write_csv(open_out(a.out.as_deref())?, &rows)?;
    let summary = summarize_traces(&rows);
    match &a.out {
        Some(p) => write_csv(File::create(summary_path(p))?, &summary)?,
        None => write_csv(io::stderr().lock(), &summary)?,
    }
    Ok(ExitCode::SUCCESS)
}
