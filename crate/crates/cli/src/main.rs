//! Command-line front end: runs campaigns and ensembles, sweeps seeds,
//! verifies persisted ledgers, and emits result tables and plot data.
//!
//! Exit codes: 0 success, 1 usage error, 2 runtime error, 3 verification
//! mismatch. Output files are written once, after the work succeeds, so a
//! failed invocation never leaves a partial ledger behind.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use redexplore_core::agents::ScriptedAgentProfile;
use redexplore_core::orchestrator::{
    run_campaign, run_ensemble, seed_sensitivity, AgentConfig, Budget, CampaignConfig,
    CampaignError,
};
use redexplore_core::prompts::MutationStrategy;
use redexplore_core::remote::RemoteEndpointConfig;
use redexplore_core::report::{
    emit_convergence_table, emit_plotdata, emit_table, ledger_from_json, ledger_to_json,
    verify_file, LedgerFile, PlotInputs, PlotKind, ScalingPoint, SeriesSpec,
};
use redexplore_core::signature::SchemeKind;

/// Seed spacing for ensemble workers: worker `i` runs at `base + 100·i`.
const ENSEMBLE_SEED_STRIDE: u64 = 100;

#[derive(Parser)]
#[command(
    name = "redexplore",
    version,
    about = "Archive-guided adversarial search against tool-using agents"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one campaign and emit its ledger as JSON.
    Run(RunArgs),
    /// Run an ensemble of campaigns in parallel and emit the merged ledger.
    Ensemble(EnsembleArgs),
    /// Run a seed-sensitivity sweep and print the convergence table.
    Seeds(SeedsArgs),
    /// Re-run detection and scoring on a persisted ledger.
    Verify(VerifyArgs),
    /// Emit a results table or plot data from persisted ledgers.
    Report(ReportArgs),
}

/// Campaign overrides shared by `run`, `ensemble`, and `seeds`. Any flag
/// left unset falls back to the config file, then to built-in defaults.
#[derive(Args, Clone)]
struct CampaignFlags {
    /// Campaign config file (TOML); flags override its values.
    #[arg(long, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Base RNG seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration budget.
    #[arg(long, value_name = "N", conflicts_with = "budget_secs")]
    budget_iters: Option<u64>,
    /// Wall-clock budget in seconds.
    #[arg(long, value_name = "SECS")]
    budget_secs: Option<f64>,
    /// Cell signature scheme.
    #[arg(long, value_enum, value_name = "SCHEME")]
    signature: Option<SignatureArg>,
    /// Reward-biased cell selection.
    #[arg(long, value_enum, value_name = "ON|OFF")]
    rewards: Option<Toggle>,
    /// Output-screening guardrail.
    #[arg(long, value_enum, value_name = "ON|OFF")]
    guardrail: Option<Toggle>,
    /// Prompt mutation strategy.
    #[arg(long, value_enum, value_name = "STRATEGY")]
    strategy: Option<StrategyArg>,
    /// Agent backend.
    #[arg(long, value_enum, value_name = "BACKEND")]
    agent: Option<AgentArg>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    flags: CampaignFlags,
    /// Write the ledger here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EnsembleArgs {
    #[command(flatten)]
    flags: CampaignFlags,
    /// Number of parallel campaigns.
    #[arg(long, default_value_t = 3)]
    n_agents: usize,
    /// Worker concurrency bound.
    #[arg(long, default_value_t = 20)]
    max_concurrent: usize,
    /// Write the merged ledger here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SeedsArgs {
    #[command(flatten)]
    flags: CampaignFlags,
    /// Comma-separated seed list, swept in order.
    #[arg(long, value_name = "LIST", value_delimiter = ',', required = true)]
    seeds: Vec<u64>,
    /// Write the table here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Ledger file to verify.
    #[arg(value_name = "LEDGER")]
    ledger: PathBuf,
}

#[derive(Args)]
struct ReportArgs {
    /// Ledger files; merged ledgers contribute their per-seed runs.
    #[arg(value_name = "LEDGER", required = true)]
    ledgers: Vec<PathBuf>,
    /// Emit plot data of this kind instead of the results table.
    #[arg(long, value_enum, value_name = "KIND")]
    plot: Option<PlotArg>,
    /// Write the output here instead of stdout.
    #[arg(long, value_name = "FILE")]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SignatureArg {
    /// Tool names only.
    Tools,
    /// Tool names plus canonicalized arguments.
    ToolsArgs,
    /// Tools, arguments, and recent message texts.
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Toggle {
    On,
    Off,
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    General,
    Targeted,
    Mixed,
}

#[derive(Clone, Copy, ValueEnum)]
enum AgentArg {
    Scripted,
    Remote,
}

#[derive(Clone, Copy, ValueEnum)]
enum PlotArg {
    SeedVariance,
    Convergence,
    Scaling,
}

enum CliError {
    Usage(String),
    Runtime(String),
    Mismatch(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Runtime(_) => 2,
            CliError::Mismatch(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Runtime(m) | CliError::Mismatch(m) => m,
        }
    }
}

impl From<CampaignError> for CliError {
    fn from(err: CampaignError) -> Self {
        match err {
            CampaignError::Config(m) => CliError::Usage(format!("invalid campaign config: {m}")),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {}", err.message());
            ExitCode::from(err.code())
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::Run(args) => {
            let config = build_config(&args.flags)?;
            let ledger = run_campaign(&config)?;
            write_output(args.out.as_deref(), &ledger_to_json(&ledger))
        }
        Command::Ensemble(args) => {
            if args.n_agents == 0 {
                return Err(CliError::Usage("--n-agents must be at least 1".into()));
            }
            if args.max_concurrent == 0 {
                return Err(CliError::Usage("--max-concurrent must be at least 1".into()));
            }
            let config = build_config(&args.flags)?;
            let merged =
                run_ensemble(&config, args.n_agents, ENSEMBLE_SEED_STRIDE, args.max_concurrent)?;
            write_output(args.out.as_deref(), &ledger_to_json(&merged))
        }
        Command::Seeds(args) => {
            let config = build_config(&args.flags)?;
            let table = seed_sensitivity(&config, &args.seeds)?;
            write_output(args.out.as_deref(), &emit_convergence_table(&table))
        }
        Command::Verify(args) => {
            let file = load_ledger(&args.ledger)?;
            let mismatches = verify_file(&file);
            if mismatches.is_empty() {
                println!("{}: verified clean", args.ledger.display());
                Ok(())
            } else {
                let mut report = format!(
                    "{}: {} mismatch(es)\n",
                    args.ledger.display(),
                    mismatches.len()
                );
                for m in &mismatches {
                    report.push_str(&format!("  {} / {}: {}\n", m.scope, m.field, m.detail));
                }
                Err(CliError::Mismatch(report.trim_end().to_string()))
            }
        }
        Command::Report(args) => {
            let mut files = Vec::with_capacity(args.ledgers.len());
            for path in &args.ledgers {
                files.push(load_ledger(path)?);
            }
            let text = match args.plot {
                None => {
                    let runs = flatten_runs(files);
                    emit_table(&runs)
                }
                Some(kind) => render_plot(kind, files)?,
            };
            write_output(args.out.as_deref(), &text)
        }
    }
}

/// Loads the base config (file or defaults) and applies flag overrides.
fn build_config(flags: &CampaignFlags) -> Result<CampaignConfig, CliError> {
    let mut config = match &flags.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::Runtime(format!("cannot read {}: {e}", path.display()))
            })?;
            CampaignConfig::from_toml(&text)?
        }
        None => CampaignConfig::default(),
    };
    if let Some(seed) = flags.seed {
        config.seed = seed;
    }
    if let Some(iters) = flags.budget_iters {
        config.budget = Budget::Iterations(iters);
    }
    if let Some(secs) = flags.budget_secs {
        config.budget = Budget::WallSecs(secs);
    }
    if let Some(signature) = flags.signature {
        config.scheme = match signature {
            SignatureArg::Tools => SchemeKind::ToolsOnly,
            SignatureArg::ToolsArgs => SchemeKind::ToolsArgs,
            SignatureArg::Full => SchemeKind::FullIntent,
        };
    }
    if let Some(toggle) = flags.rewards {
        config.rewards = matches!(toggle, Toggle::On);
    }
    if let Some(toggle) = flags.guardrail {
        config.guardrail.enabled = matches!(toggle, Toggle::On);
    }
    if let Some(strategy) = flags.strategy {
        config.strategy = match strategy {
            StrategyArg::General => MutationStrategy::General,
            StrategyArg::Targeted => MutationStrategy::Targeted,
            StrategyArg::Mixed => MutationStrategy::Mixed,
        };
    }
    if let Some(agent) = flags.agent {
        // Switch the backend kind only when it differs, so a config file's
        // profile or endpoint settings survive a redundant flag.
        config.agent = match (agent, &config.agent) {
            (AgentArg::Scripted, AgentConfig::Scripted(profile)) => {
                AgentConfig::Scripted(profile.clone())
            }
            (AgentArg::Scripted, _) => AgentConfig::Scripted(ScriptedAgentProfile::default()),
            (AgentArg::Remote, AgentConfig::Remote(remote)) => {
                AgentConfig::Remote(remote.clone())
            }
            (AgentArg::Remote, _) => AgentConfig::Remote(RemoteEndpointConfig::default()),
        };
    }
    config.validate().map_err(CliError::from)?;
    Ok(config)
}

fn load_ledger(path: &Path) -> Result<LedgerFile, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Runtime(format!("cannot read {}: {e}", path.display())))?;
    ledger_from_json(&text)
        .map_err(|e| CliError::Runtime(format!("cannot parse {}: {e}", path.display())))
}

fn flatten_runs(files: Vec<LedgerFile>) -> Vec<redexplore_core::orchestrator::RunLedger> {
    let mut runs = Vec::new();
    for file in files {
        match file {
            LedgerFile::Run(run) => runs.push(run),
            LedgerFile::Merged(merged) => runs.extend(merged.runs),
        }
    }
    runs
}

fn render_plot(kind: PlotArg, files: Vec<LedgerFile>) -> Result<String, CliError> {
    let text = match kind {
        PlotArg::Convergence => {
            let values: Vec<f64> = flatten_runs(files)
                .iter()
                .map(|r| r.findings_count as f64)
                .collect();
            emit_plotdata(PlotKind::Convergence, &PlotInputs::Convergence(values))
        }
        PlotArg::SeedVariance => {
            // One series per experiment label, rows in file order.
            let mut series: Vec<SeriesSpec> = Vec::new();
            for run in flatten_runs(files) {
                let row = (run.seed, run.findings_count as f64);
                match series.iter_mut().find(|s| s.label == run.experiment) {
                    Some(spec) => spec.rows.push(row),
                    None => series.push(SeriesSpec { label: run.experiment.clone(), rows: vec![row] }),
                }
            }
            emit_plotdata(PlotKind::SeedVariance, &PlotInputs::SeedVariance(series))
        }
        PlotArg::Scaling => {
            // One point per ledger: a merged file measures its ensemble,
            // a single run counts as an ensemble of one.
            let points: Vec<ScalingPoint> = files
                .iter()
                .map(|file| match file {
                    LedgerFile::Run(run) => ScalingPoint {
                        n: 1,
                        unique_types: run.unique_attack_types.len(),
                        real_attacks: run.verified_attacks.len(),
                    },
                    LedgerFile::Merged(merged) => ScalingPoint {
                        n: merged.runs.len(),
                        unique_types: merged.unique_attack_types.len(),
                        real_attacks: merged.total_attacks,
                    },
                })
                .collect();
            emit_plotdata(PlotKind::Scaling, &PlotInputs::Scaling(points))
        }
    };
    text.map_err(|e| CliError::Runtime(e.to_string()))
}

/// Writes to the file (whole output at once, only after success upstream)
/// or to stdout when no path was given.
fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| CliError::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
