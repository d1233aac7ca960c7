//! `psi-sim`: run scenarios, the full experiment grid, offline metrics and
//! config validation.
//!
//! Exit codes: 0 success, 2 invalid configuration or usage, 3 runtime
//! failure, 4 corrupt run log.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand, ValueEnum};
use psi_sim::config::{PersonalitySource, RunConfig, ScenarioId};
use psi_sim::hexgrid::WorldMap;
use psi_sim::telemetry::{self, NetworkFormat, NetworkOptions, PlanFamily, RunLog};
use psi_sim::{agent, run_scenario, Error};
use rayon::prelude::*;
use serde::Serialize;

const EXIT_CONFIG: u8 = 2;
const EXIT_RUNTIME: u8 = 3;
const EXIT_CORRUPT: u8 = 4;

#[derive(Parser)]
#[command(
    name = "psi-sim",
    version,
    about = "Deterministic need-driven multi-agent simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its log, metrics and final network.
    Run(RunArgs),
    /// Run every scenario for group seeds 1-3 and sim seeds 1-3.
    Grid(GridArgs),
    /// Recompute a metric from a stored run log.
    Metrics(MetricsArgs),
    /// Check a config, a map and the bundled personality fixtures.
    Validate(ValidateArgs),
}

#[derive(Args, Clone)]
struct Overrides {
    /// TOML config; built-in defaults fill anything it omits.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    ticks: Option<u64>,
    #[arg(long)]
    map: Option<PathBuf>,
    #[arg(long)]
    agents_per_group: Option<usize>,
    #[arg(long, value_enum)]
    personality: Option<Personality>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Personality {
    Fixtures,
    Generated,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    scenario: Option<ScenarioId>,
    #[arg(long)]
    group_seed: Option<u64>,
    #[arg(long)]
    sim_seed: Option<u64>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, env = "PSI_SIM_OUT_DIR", default_value = "psi-sim-out")]
    out_dir: PathBuf,
    /// Engage bin width for the default metrics.
    #[arg(long, default_value_t = 500)]
    bin: u64,
}

#[derive(Args)]
struct GridArgs {
    /// Restrict the grid to one scenario.
    #[arg(long)]
    scenario: Option<ScenarioId>,
    #[command(flatten)]
    overrides: Overrides,
    #[arg(long, env = "PSI_SIM_OUT_DIR", default_value = "psi-sim-out")]
    out_dir: PathBuf,
    /// Concurrent runs; defaults to the number of CPUs.
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long, default_value_t = 500)]
    bin: u64,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Metric {
    EngageBins,
    SocialActions,
    ExchangeActions,
    AllActions,
    Network,
}

#[derive(Args)]
struct MetricsArgs {
    log: PathBuf,
    #[arg(long, value_enum)]
    which: Metric,
    #[arg(long, default_value_t = 500)]
    bin: u64,
    /// Network format: graphml or csv.
    #[arg(long, default_value = "graphml")]
    format: String,
    /// Drop network edges with |score| below this value.
    #[arg(long, default_value_t = 0.0)]
    prune: f64,
    /// Average both directions of every network edge.
    #[arg(long)]
    symmetrize: bool,
    /// Output file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    map: Option<PathBuf>,
}

/// Error carrying the exit status it maps to.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

impl Failure {
    fn runtime(error: anyhow::Error) -> Self {
        Self {
            code: EXIT_RUNTIME,
            error,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Map(_)
            | Error::Config(_)
            | Error::Fixture(_)
            | Error::SignalTable(_)
            | Error::NoOpposingGroup
            | Error::UnsupportedFormat(_) => EXIT_CONFIG,
            Error::CorruptLog { .. } => EXIT_CORRUPT,
            _ => EXIT_RUNTIME,
        };
        Self {
            code,
            error: e.into(),
        }
    }
}

type CliResult<T> = std::result::Result<T, Failure>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Run(a) => cmd_run(a),
        Command::Grid(a) => cmd_grid(a),
        Command::Metrics(a) => cmd_metrics(a),
        Command::Validate(a) => cmd_validate(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("psi-sim: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}

fn base_config(o: &Overrides) -> CliResult<RunConfig> {
    let mut cfg = match &o.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(t) = o.ticks {
        cfg.scenario.ticks = t;
    }
    if let Some(m) = &o.map {
        cfg.scenario.map = Some(m.clone());
    }
    if let Some(n) = o.agents_per_group {
        cfg.scenario.agents_per_group = n;
    }
    if let Some(p) = o.personality {
        cfg.scenario.personality = match p {
            Personality::Fixtures => PersonalitySource::Fixtures,
            Personality::Generated => PersonalitySource::Generated,
        };
    }
    cfg.validate()?;
    if let Some(m) = &cfg.scenario.map {
        WorldMap::load(m)?;
    }
    Ok(cfg)
}

fn write(path: &Path, text: &str) -> CliResult<()> {
    fs::write(path, text)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(Failure::runtime)
}

/// Writes the log and the default metrics into `dir`.
fn write_artifacts(log: &RunLog, dir: &Path, bin: u64) -> CliResult<()> {
    fs::create_dir_all(dir)
        .with_context(|| format!("creating {}", dir.display()))
        .map_err(Failure::runtime)?;
    write(&dir.join("run.jsonl"), &log.to_jsonl())?;
    let bins = telemetry::bin_engage_counts(log, bin)?;
    write(
        &dir.join("engage_bins.csv"),
        &telemetry::engage_bins_csv(&bins),
    )?;
    for (name, family) in [
        ("social_actions.csv", PlanFamily::Social),
        ("exchange_actions.csv", PlanFamily::InformationExchange),
        ("all_actions.csv", PlanFamily::All),
    ] {
        write(
            &dir.join(name),
            &telemetry::action_counts_csv(&telemetry::count_actions(log, family)),
        )?;
    }
    if let Some(snap) = &log.snapshot {
        for f in [NetworkFormat::GraphMl, NetworkFormat::Csv] {
            write(
                &dir.join(format!("network.{}", f.extension())),
                &telemetry::export_network(snap, f),
            )?;
        }
    }
    Ok(())
}

fn cmd_run(a: RunArgs) -> CliResult<()> {
    let mut cfg = base_config(&a.overrides)?;
    if let Some(s) = a.scenario {
        cfg.scenario.scenario = s;
    }
    if let Some(g) = a.group_seed {
        cfg.scenario.group_seed = g;
    }
    if let Some(s) = a.sim_seed {
        cfg.scenario.sim_seed = s;
    }
    if a.bin == 0 {
        return Err(Error::Config("--bin must be positive".into()).into());
    }
    let log = run_scenario(&cfg)?;
    write_artifacts(&log, &a.out_dir, a.bin)?;
    println!("{}", a.out_dir.display());
    Ok(())
}

#[derive(Serialize)]
struct ManifestEntry {
    scenario: ScenarioId,
    group_seed: u64,
    sim_seed: u64,
    dir: String,
    ok: bool,
    error: Option<String>,
}

fn cmd_grid(a: GridArgs) -> CliResult<()> {
    let base = base_config(&a.overrides)?;
    if a.bin == 0 {
        return Err(Error::Config("--bin must be positive".into()).into());
    }
    let scenarios: Vec<ScenarioId> = match a.scenario {
        Some(s) => vec![s],
        None => vec![ScenarioId::S1, ScenarioId::S2, ScenarioId::S3],
    };
    let cells: Vec<(ScenarioId, u64, u64)> = scenarios
        .iter()
        .flat_map(|&s| (1..=3).flat_map(move |g| (1..=3).map(move |r| (s, g, r))))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(a.jobs.unwrap_or(0))
        .build()
        .context("building thread pool")
        .map_err(Failure::runtime)?;
    let manifest: Vec<ManifestEntry> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(s, g, r)| {
                let mut cfg = base.clone();
                cfg.scenario.scenario = s;
                cfg.scenario.group_seed = g;
                cfg.scenario.sim_seed = r;
                let name = format!("{s}_g{g}_s{r}");
                let dir = a.out_dir.join(&name);
                let result = run_scenario(&cfg)
                    .map_err(Failure::from)
                    .and_then(|log| write_artifacts(&log, &dir, a.bin));
                ManifestEntry {
                    scenario: s,
                    group_seed: g,
                    sim_seed: r,
                    dir: name,
                    ok: result.is_ok(),
                    error: result.err().map(|f| format!("{:#}", f.error)),
                }
            })
            .collect()
    });
    fs::create_dir_all(&a.out_dir)
        .with_context(|| format!("creating {}", a.out_dir.display()))
        .map_err(Failure::runtime)?;
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write(&a.out_dir.join("manifest.json"), &json)?;
    let failed = manifest.iter().filter(|m| !m.ok).count();
    if failed > 0 {
        return Err(Failure::runtime(anyhow::anyhow!(
            "{failed} of {} runs failed",
            manifest.len()
        )));
    }
    println!("{} runs in {}", manifest.len(), a.out_dir.display());
    Ok(())
}

fn cmd_metrics(a: MetricsArgs) -> CliResult<()> {
    let file = fs::File::open(&a.log).map_err(|e| Error::io(&a.log, e))?;
    let log = RunLog::read_jsonl(std::io::BufReader::new(file))?;
    let text = match a.which {
        Metric::EngageBins => {
            telemetry::engage_bins_csv(&telemetry::bin_engage_counts(&log, a.bin)?)
        }
        Metric::SocialActions => {
            telemetry::action_counts_csv(&telemetry::count_actions(&log, PlanFamily::Social))
        }
        Metric::ExchangeActions => telemetry::action_counts_csv(&telemetry::count_actions(
            &log,
            PlanFamily::InformationExchange,
        )),
        Metric::AllActions => {
            telemetry::action_counts_csv(&telemetry::count_actions(&log, PlanFamily::All))
        }
        Metric::Network => {
            let format: NetworkFormat = a.format.parse()?;
            let snap = log
                .snapshot
                .as_ref()
                .ok_or_else(|| Error::CorruptLog {
                    line: 0,
                    reason: "log has no network snapshot".into(),
                })?
                .transformed(&NetworkOptions {
                    prune_below: a.prune,
                    symmetrize: a.symmetrize,
                });
            telemetry::export_network(&snap, format)
        }
    };
    match &a.out {
        Some(p) => write(p, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn cmd_validate(a: ValidateArgs) -> CliResult<()> {
    let cfg = match &a.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.validate()?;
    let map_path = a.map.as_ref().or(cfg.scenario.map.as_ref());
    let map = match map_path {
        Some(p) => WorldMap::load(p)?,
        None => WorldMap::default_map(),
    };
    let mut fixtures = 0;
    for seed in 1..=3 {
        for team in 1..=2 {
            if let Some(text) = agent::fixture_text(seed, team) {
                fixtures += agent::parse_fixture(text)?.len();
            }
        }
    }
    println!(
        "ok: config valid, map {}x{} with {} food spawn points, {fixtures} fixture personalities",
        map.width(),
        map.height(),
        map.food_spawn_points().len()
    );
    Ok(())
}
