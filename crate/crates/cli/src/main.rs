use std::fmt;
use std::io::{BufReader, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use sprig_core::canonical::canonical_hash;
use sprig_core::equilibrium::{
    linspace, monte_carlo_estimate, outcome_probabilities, solve_pbe, sweep, sweep_csv, EquilibriumSolution,
    GameParameters, MonteCarloComparison, OutcomeProbabilities, PARAMETER_NAMES,
};
use sprig_core::proof::parse_proof_document;
use sprig_core::protocol::{
    read_move_log, replay, Ledger, Mode, Node, NodeId, ProtocolInstance, Settlement, Setup, Status, Timestamp,
};
use sprig_core::simulator::{metrics_csv, payoff_report, presets, run_scenario, ScenarioConfig};

/// Marks errors that exit with status 2.
#[derive(Debug)]
struct UsageError(String);

impl fmt::Display for UsageError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

#[derive(Parser)]
#[command(name = "sprig", version, about = "Claim/question proof verification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check the structure of a proof document; exits 1 if it has violations.
    Validate {
        path: PathBuf,
        /// Maximum number of chain layers a document may nest.
        #[arg(long, default_value_t = 3)]
        level_limit: u32,
        /// Print the report as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Replay a move log against a setup file and print statuses and settlement.
    Run {
        movelog: PathBuf,
        setup: PathBuf,
        #[arg(long, value_enum)]
        mode: Option<ModeArg>,
        /// Advance the clock to this time after the last move.
        #[arg(long)]
        horizon: Option<u64>,
        /// Skip settlement even when the instance is settleable.
        #[arg(long)]
        no_settle: bool,
    },
    /// Run an agent scenario and write its trace as JSON lines.
    Simulate(SimulateArgs),
    /// Solve the two-level challenge game.
    Solve {
        #[command(flatten)]
        theta: ThetaArgs,
    },
    /// Solve over a range of one parameter and print CSV.
    Sweep {
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long, default_value = "sigma2")]
        param: String,
        #[arg(long, default_value_t = 0.0)]
        from: f64,
        #[arg(long, default_value_t = 60.0)]
        to: f64,
        #[arg(long, default_value_t = 121)]
        steps: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare closed-form outcome probabilities with simulated games.
    VerifyMc {
        #[command(flatten)]
        theta: ThetaArgs,
        #[arg(long, default_value_t = 1_000_000)]
        n: u64,
        #[arg(long, env = "SPRIG_SEED", default_value_t = 0)]
        seed: u64,
        /// Tolerance in standard errors.
        #[arg(long, default_value_t = 3.0)]
        k: f64,
    },
}

#[derive(Args)]
struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(required_unless_present = "preset", conflicts_with = "preset")]
    scenario: Option<PathBuf>,
    /// Built-in scenario instead of a file.
    #[arg(long)]
    preset: Option<String>,
    /// Overrides the scenario seed.
    #[arg(long, env = "SPRIG_SEED")]
    seed: Option<u64>,
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
    /// Where to write the JSONL trace (stdout if omitted).
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Tree metrics CSV.
    #[arg(long)]
    metrics: Option<PathBuf>,
    /// Per-agent payoff CSV.
    #[arg(long)]
    payoffs: Option<PathBuf>,
    /// Accepted moves as a move log, replayable with `run`.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Setup file matching `--log`.
    #[arg(long)]
    setup: Option<PathBuf>,
}

/// Game parameters; unset values come from the baseline
/// B₂ = 10, B₁ = B₀ = 40, β₁ = σ₁ = β₀ = 5, σ₂ = 5.
#[derive(Args)]
struct ThetaArgs {
    #[arg(long, default_value_t = 40.0)]
    b0: f64,
    #[arg(long, default_value_t = 40.0)]
    b1: f64,
    #[arg(long, default_value_t = 10.0)]
    b2: f64,
    #[arg(long, default_value_t = 5.0)]
    sigma1: f64,
    #[arg(long, default_value_t = 5.0)]
    sigma2: f64,
    #[arg(long, default_value_t = 5.0)]
    beta0: f64,
    #[arg(long, default_value_t = 5.0)]
    beta1: f64,
}

impl ThetaArgs {
    fn params(&self) -> GameParameters {
        GameParameters {
            b0: self.b0,
            b1: self.b1,
            b2: self.b2,
            sigma1: self.sigma1,
            sigma2: self.sigma2,
            beta0: self.beta0,
            beta1: self.beta1,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Quiescence,
    EarlyStop,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Quiescence => Mode::Quiescence,
            ModeArg::EarlyStop => Mode::EarlyStop,
        }
    }
}

fn read(path: &Path) -> Result<Vec<u8>> {
    std::fs::read(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => usage(format!("{}: no such file", path.display())),
        _ => anyhow!(e).context(path.display().to_string()),
    })
}

fn read_text(path: &Path) -> Result<String> {
    String::from_utf8(read(path)?).with_context(|| format!("{}: not UTF-8", path.display()))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn emit(text: &str) -> Result<()> {
    let mut out = std::io::stdout().lock();
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    emit(&(serde_json::to_string_pretty(value)? + "\n"))
}

fn cmd_validate(path: &Path, level_limit: u32, json: bool) -> Result<ExitCode> {
    let bytes = read(path)?;
    let doc = parse_proof_document(&bytes).with_context(|| path.display().to_string())?;
    let report = doc.structural_report(level_limit)?;
    if json {
        print_json(&report)?;
    } else if report.is_valid() {
        emit(&format!("ok: {} document, no violations\n", doc.kind()))?;
    } else {
        for entry in &report.violations {
            emit(&format!("{entry}\n"))?;
        }
        emit(&format!("{} violation(s)\n", report.violations.len()))?;
    }
    Ok(if report.is_valid() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    })
}

#[derive(Serialize)]
struct NodeSummary {
    id: NodeId,
    owner: String,
    kind: &'static str,
    level: u32,
    origin: Option<NodeId>,
    #[serde(skip_serializing_if = "Option::is_none")]
    step: Option<usize>,
    posted_at: Timestamp,
    status: Status,
    determined_at: Option<Timestamp>,
}

impl From<&Node> for NodeSummary {
    fn from(n: &Node) -> Self {
        let kind = if n.is_machine_claim() {
            "machine_claim"
        } else if n.is_claim() {
            "claim"
        } else {
            "question"
        };
        Self {
            id: n.id,
            owner: n.owner.to_string(),
            kind,
            level: n.level,
            origin: n.origin,
            step: n.step(),
            posted_at: n.posted_at,
            status: n.status,
            determined_at: n.determined_at,
        }
    }
}

#[derive(Serialize)]
struct RunReport {
    clock: u64,
    root_status: Status,
    quiescent: bool,
    stopped_at: Option<Timestamp>,
    nodes: Vec<NodeSummary>,
    ledger: Ledger,
    settlement: Option<Settlement>,
    state_hash: String,
}

impl RunReport {
    fn of(inst: &ProtocolInstance) -> Self {
        Self {
            clock: inst.clock(),
            root_status: inst.root().status,
            quiescent: inst.is_quiescent(),
            stopped_at: inst.stopped_at(),
            nodes: inst.nodes().iter().map(NodeSummary::from).collect(),
            ledger: inst.ledger().clone(),
            settlement: inst.settlement().cloned(),
            state_hash: canonical_hash(&inst.snapshot()),
        }
    }
}

fn cmd_run(
    movelog: &Path,
    setup_path: &Path,
    mode: Option<ModeArg>,
    horizon: Option<u64>,
    no_settle: bool,
) -> Result<()> {
    let setup_text = read_text(setup_path)?;
    let log = read(movelog)?;
    let mut setup: Setup = serde_json::from_str(&setup_text).with_context(|| setup_path.display().to_string())?;
    if let Some(m) = mode {
        setup.config.mode = m.into();
    }
    if horizon.is_some() {
        setup.horizon = horizon;
    }
    let records = read_move_log(BufReader::new(log.as_slice())).with_context(|| movelog.display().to_string())?;
    let mut inst = replay(&setup, &records).with_context(|| movelog.display().to_string())?;
    if !no_settle && inst.is_settleable() {
        inst.settle()?;
    }
    print_json(&RunReport::of(&inst))
}

fn cmd_simulate(args: &SimulateArgs) -> Result<()> {
    let mut config = match (&args.scenario, &args.preset) {
        (Some(path), _) => {
            let text = read_text(path)?;
            ScenarioConfig::from_json(&text).with_context(|| path.display().to_string())?
        }
        (None, Some(name)) => presets::by_name(name).ok_or_else(|| {
            let names: Vec<String> = presets::all().into_iter().map(|s| s.name).collect();
            usage(format!("unknown preset {name:?} (one of {})", names.join(", ")))
        })?,
        (None, None) => return Err(usage("a scenario file or --preset is required")),
    };
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    if let Some(m) = args.mode {
        config.instance.mode = m.into();
    }
    let trace = run_scenario(&config)?;
    match &args.trace {
        Some(path) => write(path, &trace.to_jsonl())?,
        None => emit(&trace.to_jsonl())?,
    }
    if let Some(path) = &args.metrics {
        write(path, &metrics_csv(std::slice::from_ref(&trace)))?;
    }
    if let Some(path) = &args.payoffs {
        write(path, &payoff_report(&trace)?.to_csv())?;
    }
    if let Some(path) = &args.log {
        write(path, &sprig_core::protocol::write_move_log(&trace.accepted))?;
    }
    if let Some(path) = &args.setup {
        write(path, &(serde_json::to_string_pretty(&trace.setup)? + "\n"))?;
    }
    Ok(())
}

#[derive(Serialize)]
struct SolveReport {
    theta: GameParameters,
    solution: EquilibriumSolution,
    outcomes: OutcomeProbabilities,
}

fn solved(theta: &GameParameters) -> Result<(EquilibriumSolution, OutcomeProbabilities)> {
    let sol = solve_pbe(theta)?;
    let outcomes = outcome_probabilities(&sol, theta)?;
    Ok((sol, outcomes))
}

fn cmd_solve(theta: &GameParameters) -> Result<()> {
    let (solution, outcomes) = solved(theta)?;
    print_json(&SolveReport {
        theta: *theta,
        solution,
        outcomes,
    })
}

fn cmd_sweep(theta: &GameParameters, param: &str, from: f64, to: f64, steps: usize, out: Option<&Path>) -> Result<()> {
    if !PARAMETER_NAMES.contains(&param) {
        return Err(usage(format!("--param must be one of {}", PARAMETER_NAMES.join(", "))));
    }
    if !from.is_finite() || !to.is_finite() {
        return Err(usage("--from and --to must be finite"));
    }
    theta.with(param, from)?.validate()?;
    let rows = sweep(theta, param, &linspace(from, to, steps))?;
    let csv = sweep_csv(&rows);
    match out {
        Some(path) => write(path, &csv),
        None => emit(&csv),
    }
}

#[derive(Serialize)]
struct McReport {
    theta: GameParameters,
    n: u64,
    seed: u64,
    k: f64,
    solution: EquilibriumSolution,
    comparisons: Vec<MonteCarloComparison>,
    verdict: &'static str,
}

fn cmd_verify_mc(theta: &GameParameters, n: u64, seed: u64, k: f64) -> Result<ExitCode> {
    if n == 0 {
        return Err(usage("--n must be at least 1"));
    }
    let (solution, exact) = solved(theta)?;
    let comparisons = monte_carlo_estimate(&solution, n, seed).compare(&exact, k);
    let pass = comparisons.iter().all(|c| c.pass);
    print_json(&McReport {
        theta: *theta,
        n,
        seed,
        k,
        solution,
        comparisons,
        verdict: if pass { "pass" } else { "fail" },
    })?;
    Ok(if pass { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn dispatch(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Validate {
            path,
            level_limit,
            json,
        } => cmd_validate(&path, level_limit, json),
        Command::Run {
            movelog,
            setup,
            mode,
            horizon,
            no_settle,
        } => cmd_run(&movelog, &setup, mode, horizon, no_settle).map(|()| ExitCode::SUCCESS),
        Command::Simulate(args) => cmd_simulate(&args).map(|()| ExitCode::SUCCESS),
        Command::Solve { theta } => cmd_solve(&theta.params()).map(|()| ExitCode::SUCCESS),
        Command::Sweep {
            theta,
            param,
            from,
            to,
            steps,
            out,
        } => cmd_sweep(&theta.params(), &param, from, to, steps, out.as_deref()).map(|()| ExitCode::SUCCESS),
        Command::VerifyMc { theta, n, seed, k } => cmd_verify_mc(&theta.params(), n, seed, k),
    }
}

fn is_broken_pipe(err: &anyhow::Error) -> bool {
    err.chain()
        .filter_map(|e| e.downcast_ref::<std::io::Error>())
        .any(|e| e.kind() == std::io::ErrorKind::BrokenPipe)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => code,
        Err(err) if is_broken_pipe(&err) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            if err.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
