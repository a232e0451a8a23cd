//! Command-line front end: scenario runs, planner comparisons and IRL training.
//!
//! Exit codes: 0 success, 1 I/O failure, 2 invalid input (arguments, scenario
//! or demonstration files), 3 the robot collided (outputs are still written).

use std::collections::BTreeMap;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use log::info;
use occlusim::costs::{Weights, HUMAN_FEATURES};
use occlusim::irl::{learn_weights, neg_log_likelihood, parse_demos, IrlOptions};
use occlusim::sim::{
    builtin, compute_metrics, run_scenario, Metrics, PlannerKind, ScenarioConfig, Trace,
};
use occlusim::Error;

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_COLLISION: i32 = 3;

#[derive(Debug, Parser)]
#[command(
    name = "occlusim",
    version,
    about = "Occlusion-aware driving simulator"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scenario with one planner.
    Run(RunArgs),
    /// Run all three planners on the same scenario and tabulate their metrics.
    Compare(CompareArgs),
    /// Learn human cost weights from demonstrations.
    TrainIrl(TrainArgs),
}

#[derive(Debug, Clone, clap::Args)]
pub struct RunArgs {
    /// Scenario file, or the name of a built-in scenario.
    #[arg(long)]
    pub scenario: String,
    #[arg(long, default_value = "social")]
    pub planner: PlannerKind,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Overrides the scenario step limit.
    #[arg(long)]
    pub steps: Option<usize>,
    /// Also write the full trace as JSON lines.
    #[arg(long)]
    pub full_trace: bool,
}

#[derive(Debug, Clone, clap::Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub scenario: String,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    #[arg(long)]
    pub steps: Option<usize>,
}

#[derive(Debug, Clone, clap::Args)]
pub struct TrainArgs {
    /// Demonstrations, one JSON object per line.
    #[arg(long)]
    pub demos: PathBuf,
    /// Initial weights as a JSON object keyed by feature name.
    #[arg(long)]
    pub init: Option<PathBuf>,
    /// Output weight file.
    #[arg(long, default_value = "weights.json")]
    pub out: PathBuf,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Treat every demonstration as locally optimal (drops the gradient term).
    #[arg(long)]
    pub locally_optimal: bool,
}

/// Failure of a command, carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub msg: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Io(_) => EXIT_IO,
            _ => EXIT_INPUT,
        };
        Failure {
            code,
            msg: e.to_string(),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure {
        code: EXIT_IO,
        msg: format!("{}: {e}", path.display()),
    }
}

/// Loads a scenario from a file, falling back to the built-in of that name.
pub fn load_scenario(scenario: &str) -> Result<ScenarioConfig, Error> {
    let path = Path::new(scenario);
    if !path.exists() {
        if let Some(text) = builtin(scenario) {
            return ScenarioConfig::from_toml_str(text);
        }
    }
    ScenarioConfig::load(path)
}

fn configure(scenario: &str, seed: Option<u64>) -> Result<ScenarioConfig, Error> {
    let mut cfg = load_scenario(scenario)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn create(path: &Path) -> Result<BufWriter<File>, Failure> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| io_failure(path, e))
}

/// Writes `trace.csv`, `metrics.json` and `plot_data.csv` into `dir`.
pub fn write_run_outputs(
    dir: &Path,
    trace: &Trace,
    metrics: &Metrics,
    full: bool,
) -> Result<(), Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    trace.write_csv(create(&dir.join("trace.csv"))?)?;
    trace.write_plot_data(create(&dir.join("plot_data.csv"))?)?;
    let path = dir.join("metrics.json");
    let mut w = create(&path)?;
    serde_json::to_writer_pretty(&mut w, metrics).map_err(|e| io_failure(&path, e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&path, e))?;
    if full {
        trace.write_jsonl(create(&dir.join("trace.jsonl"))?)?;
    }
    Ok(())
}

pub fn cmd_run(args: &RunArgs) -> Result<i32, Failure> {
    let cfg = configure(&args.scenario, args.seed)?;
    info!("running {} with the {} planner", cfg.name, args.planner);
    let trace = run_scenario(&cfg, args.planner, args.steps)?;
    let metrics = compute_metrics(&trace)?;
    write_run_outputs(&args.out, &trace, &metrics, args.full_trace)?;
    println!(
        "{}: outcome {:?}, {} steps, avg speed {:.3} m/s, min gap {}",
        args.planner,
        trace.outcome,
        metrics.steps,
        metrics.avg_speed,
        metrics
            .min_gap
            .map_or("n/a".to_string(), |g| format!("{g:.3} m")),
    );
    Ok(if metrics.collision {
        EXIT_COLLISION
    } else {
        EXIT_OK
    })
}

pub const COMPARISON_HEADER: [&str; 9] = [
    "planner",
    "collision",
    "min_gap",
    "avg_speed",
    "peak_decel",
    "steps_to_goal",
    "belief_lead_time",
    "first_sighting_step",
    "steps",
];

fn opt<T: ToString>(v: Option<T>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Runs the three planners concurrently on the same scenario and seed.
pub fn compare(
    cfg: &ScenarioConfig,
    steps: Option<usize>,
) -> Result<Vec<(PlannerKind, Metrics)>, Error> {
    std::thread::scope(|s| {
        let handles: Vec<_> = PlannerKind::ALL
            .iter()
            .map(|&k| {
                s.spawn(move || {
                    run_scenario(cfg, k, steps)
                        .and_then(|t| compute_metrics(&t))
                        .map(|m| (k, m))
                })
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("simulation thread panicked"))
            .collect()
    })
}

pub fn cmd_compare(args: &CompareArgs) -> Result<i32, Failure> {
    let cfg = configure(&args.scenario, args.seed)?;
    let rows = compare(&cfg, args.steps)?;
    fs::create_dir_all(&args.out).map_err(|e| io_failure(&args.out, e))?;
    let path = args.out.join("comparison.csv");
    let mut w = create(&path)?;
    let mut table = vec![COMPARISON_HEADER.join(",")];
    for (k, m) in &rows {
        table.push(
            [
                k.name().to_string(),
                m.collision.to_string(),
                opt(m.min_gap),
                m.avg_speed.to_string(),
                m.peak_decel.to_string(),
                opt(m.steps_to_goal),
                m.belief_lead_time.to_string(),
                opt(m.first_sighting_step),
                m.steps.to_string(),
            ]
            .join(","),
        );
    }
    for line in &table {
        writeln!(w, "{line}").map_err(|e| io_failure(&path, e))?;
        println!("{line}");
    }
    w.flush().map_err(|e| io_failure(&path, e))?;
    Ok(EXIT_OK)
}

fn read_weights(path: &Path) -> Result<Weights, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", path.display()),
    })?;
    let map: BTreeMap<String, f64> = serde_json::from_str(&text).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", path.display()),
    })?;
    Ok(Weights::from_named(&map, &HUMAN_FEATURES)?)
}

pub fn cmd_train_irl(args: &TrainArgs) -> Result<i32, Failure> {
    let text = fs::read_to_string(&args.demos).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", args.demos.display()),
    })?;
    let demos = parse_demos(&text).map_err(|e| Failure {
        code: EXIT_INPUT,
        msg: format!("{}: {e}", args.demos.display()),
    })?;
    if demos.is_empty() {
        return Err(Failure {
            code: EXIT_INPUT,
            msg: format!("{}: no demonstrations", args.demos.display()),
        });
    }
    let theta0 = match &args.init {
        Some(p) => read_weights(p)?,
        None => Weights::new(vec![1.0; HUMAN_FEATURES.len()]),
    };
    let opts = IrlOptions {
        tol: args.tol,
        max_iter: args.max_iter,
        locally_optimal: args.locally_optimal,
        ..IrlOptions::default()
    };
    let initial = neg_log_likelihood(&theta0, &demos, &opts)?;
    println!("initial objective: {initial:.12e}");
    let res = learn_weights(&demos, &theta0, &opts)?;
    println!("final objective: {:.12e}", res.nll);
    println!("gradient norm: {:.6e}", res.grad_norm);
    println!("iterations: {}", res.iterations);
    if !res.converged {
        log::warn!("stopped before reaching the gradient tolerance");
    }
    let mut w = create(&args.out)?;
    serde_json::to_writer_pretty(&mut w, &res.theta.to_named(&HUMAN_FEATURES))
        .map_err(|e| io_failure(&args.out, e.into()))?;
    writeln!(w)
        .and_then(|_| w.flush())
        .map_err(|e| io_failure(&args.out, e))?;
    Ok(EXIT_OK)
}

pub fn dispatch(cli: &Cli) -> i32 {
    let res = match &cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Compare(a) => cmd_compare(a),
        Command::TrainIrl(a) => cmd_train_irl(a),
    };
    match res {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.msg);
            f.code
        }
    }
}
