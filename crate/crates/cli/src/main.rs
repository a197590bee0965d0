//! `lab`: scenario runner for gibbs-lab.
//!
//! Exit codes: 0 all assertions passed, 1 falsification detected,
//! 2 inconclusive, 3 usage or resource error.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand};
use gibbs_lab::experiment::{self, BoundarySpec, ExperimentSpec, Outcome, Scenario, Status, SweepParam};
use gibbs_lab::sampler::{run_chains, ChainConfig, InitialState, Kernel, SweepOrder};
use gibbs_lab::{Geometry, ModelConfig, Window};

#[derive(Parser)]
#[command(name = "lab", version, about = "Reproducible Gibbs-measure experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Dobrushin interdependence row, c and the certified D.
    Certify(RunArgs),
    /// Exponential-moment (GCB) test of an observable.
    GcbTest(RunArgs),
    /// Blow-up bound on random sets.
    Blowup(RunArgs),
    /// Frequency bound on configuration pairs.
    FrequencyLemma(RunArgs),
    /// Per-site relative entropy between − and + boundary measures.
    EntropyProbe(RunArgs),
    /// Magnetization variance per site across torus sizes.
    CriticalVariance(RunArgs),
    /// Boundary-driven magnetization, entropy and rate trends.
    PhaseCoexistence(RunArgs),
    /// Empirical decay rates of block-mean deviation events.
    DeviationRates(RunArgs),
    /// Runs a scenario once per grid value of one parameter.
    Sweep(SweepArgs),
    /// Draws configurations and writes them as a sample file.
    Sample(SampleArgs),
}

#[derive(Args)]
struct RunArgs {
    /// Experiment spec (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Overrides the seed in the spec file.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for the JSON report and CSV table.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    run: RunArgs,
    /// beta, n, epsilon or lambda.
    #[arg(long)]
    param: String,
    /// Comma-separated grid values.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    grid: Vec<f64>,
}

#[derive(Args)]
struct SampleArgs {
    /// Model config (JSON).
    #[arg(long)]
    model_config: PathBuf,
    /// Window side length.
    #[arg(long)]
    side: usize,
    /// fixed, free or torus; must agree with the boundary.
    #[arg(long)]
    geometry: Option<String>,
    /// plus, minus, free or periodic.
    #[arg(long, default_value = "periodic")]
    boundary: String,
    /// Burn-in sweeps.
    #[arg(long, default_value_t = 1000)]
    sweeps: usize,
    /// Sweeps between recorded samples.
    #[arg(long, default_value_t = 1)]
    between: usize,
    /// Samples per chain.
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    chains: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = "heat-bath")]
    kernel: String,
    #[arg(long, default_value = "lexicographic")]
    order: String,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    if let Err(Failure(msg)) = configure_threads() {
        eprintln!("lab: {msg}");
        return ExitCode::from(3);
    }
    match dispatch(cli.command) {
        Ok(status) => ExitCode::from(status.exit_code() as u8),
        Err(Failure(msg)) => {
            eprintln!("lab: {msg}");
            ExitCode::from(3)
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    if let Ok(v) = std::env::var("LAB_THREADS") {
        let n: usize = v
            .parse()
            .map_err(|_| Failure(format!("LAB_THREADS must be a positive integer, got `{v}`")))?;
        if n == 0 {
            return Err(Failure("LAB_THREADS must be positive".into()));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    Ok(())
}

fn dispatch(command: Command) -> Result<Status, Failure> {
    let (scenario, args) = match command {
        Command::Certify(a) => (Scenario::Certify, a),
        Command::GcbTest(a) => (Scenario::GcbTest, a),
        Command::Blowup(a) => (Scenario::Blowup, a),
        Command::FrequencyLemma(a) => (Scenario::FrequencyLemma, a),
        Command::EntropyProbe(a) => (Scenario::EntropyProbe, a),
        Command::CriticalVariance(a) => (Scenario::CriticalVariance, a),
        Command::PhaseCoexistence(a) => (Scenario::PhaseCoexistence, a),
        Command::DeviationRates(a) => (Scenario::DeviationRates, a),
        Command::Sweep(s) => return sweep(s),
        Command::Sample(s) => return sample(s),
    };
    let spec = load_spec(&args, Some(scenario))?;
    let outcome = experiment::run(&spec);
    emit(&spec, &args, scenario.name(), &outcome)
}

fn load_spec(args: &RunArgs, scenario: Option<Scenario>) -> Result<ExperimentSpec, Failure> {
    let text = fs::read_to_string(&args.spec)
        .map_err(|e| Failure(format!("{}: {e}", args.spec.display())))?;
    let mut spec = ExperimentSpec::from_json(&text)
        .map_err(|e| Failure(format!("{}: {e}", args.spec.display())))?;
    if let Some(s) = scenario {
        if spec.scenario != s {
            return Err(Failure(format!(
                "spec scenario is `{}` but `{}` was requested",
                spec.scenario.name(),
                s.name()
            )));
        }
    }
    if let Some(seed) = args.seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn sweep(args: SweepArgs) -> Result<Status, Failure> {
    let param: SweepParam = args.param.parse()?;
    if args.grid.is_empty() {
        return Err(Failure("empty --grid".into()));
    }
    let spec = load_spec(&args.run, None)?;
    let outcome = experiment::sweep_outcome(&spec, param, &args.grid);
    let stem = format!("{}-sweep-{}", spec.scenario.name(), args.param);
    emit(&spec, &args.run, &stem, &outcome)
}

fn emit(spec: &ExperimentSpec, args: &RunArgs, stem: &str, outcome: &Outcome) -> Result<Status, Failure> {
    let dir = args.out.clone().unwrap_or_else(|| PathBuf::from("."));
    fs::create_dir_all(&dir).map_err(|e| Failure(format!("{}: {e}", dir.display())))?;
    let named = |given: Option<&String>, ext: &str| -> PathBuf {
        given.map_or_else(|| dir.join(format!("{stem}.{ext}")), |g| dir.join(g))
    };
    let outputs = spec.outputs.clone().unwrap_or_default();
    let report = named(outputs.report.as_ref(), "json");
    let csv = named(outputs.csv.as_ref(), "csv");
    let timestamp = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .ok()
        .map(|d| d.as_secs());
    write(&report, &outcome.report_json(timestamp))?;
    write(&csv, &outcome.csv)?;
    print!("{}", render_table(&outcome.csv));
    if let Some(e) = outcome.body.get("error").and_then(|e| e.as_str()) {
        eprintln!("lab: {e}");
    }
    println!(
        "status: {} (exit {})  report: {}  table: {}",
        serde_json::to_value(outcome.status)?.as_str().unwrap_or("?"),
        outcome.status.exit_code(),
        report.display(),
        csv.display()
    );
    Ok(outcome.status)
}

fn write(path: &Path, text: &str) -> Result<(), Failure> {
    fs::write(path, text).map_err(|e| Failure(format!("{}: {e}", path.display())))
}

/// Aligns CSV columns for the terminal.
fn render_table(csv: &str) -> String {
    let rows: Vec<Vec<&str>> = csv.lines().map(|l| l.split(',').collect()).collect();
    let cols = rows.iter().map(Vec::len).max().unwrap_or(0);
    let mut width = vec![0; cols];
    for r in &rows {
        for (i, c) in r.iter().enumerate() {
            width[i] = width[i].max(c.chars().count());
        }
    }
    let mut out = String::new();
    for r in &rows {
        let cells: Vec<String> = r
            .iter()
            .enumerate()
            .map(|(i, c)| format!("{c:>w$}", w = width[i]))
            .collect();
        out.push_str(cells.join("  ").trim_end());
        out.push('\n');
    }
    out
}

fn sample(args: SampleArgs) -> Result<Status, Failure> {
    let text = fs::read_to_string(&args.model_config)
        .map_err(|e| Failure(format!("{}: {e}", args.model_config.display())))?;
    let model = ModelConfig::from_json(&text)?;
    let boundary: BoundarySpec = args.boundary.parse()?;
    let geometry = boundary.geometry();
    if let Some(g) = &args.geometry {
        let want = match g.as_str() {
            "fixed" => Geometry::Fixed,
            "free" => Geometry::Free,
            "torus" | "periodic" => Geometry::Torus,
            other => return Err(Failure(format!("unknown geometry `{other}` (fixed, free, torus)"))),
        };
        if want != geometry {
            return Err(Failure(format!(
                "geometry `{g}` does not match boundary `{}`",
                args.boundary
            )));
        }
    }
    let window = Window::with_side(model.d, args.side, geometry, model.alphabet())?;
    let kernel: Kernel = serde_json::from_value(serde_json::Value::String(args.kernel.clone()))
        .map_err(|_| Failure(format!("unknown kernel `{}` (heat-bath, metropolis)", args.kernel)))?;
    let order: SweepOrder = serde_json::from_value(serde_json::Value::String(args.order.clone()))
        .map_err(|_| Failure(format!("unknown order `{}` (lexicographic, random)", args.order)))?;
    let cfg = ChainConfig {
        boundary: boundary.boundary(model.alphabet()),
        kernel,
        order,
        initial: InitialState::Random,
        burn_in: args.sweeps,
        between: args.between,
        n_samples: args.samples,
        n_chains: args.chains,
        ..ChainConfig::new(model, window, gibbs_lab::Boundary::None, args.seed)
    };
    let set = run_chains(&cfg)?;
    let text = set.to_text()?;
    match &args.out {
        Some(p) => write(p, &text)?,
        None => print!("{text}"),
    }
    Ok(Status::Pass)
}
