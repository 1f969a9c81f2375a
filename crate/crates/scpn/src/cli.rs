//! Command-line front end: simulate scenarios, list attack paths,
//! compare curves, validate files, and list bundled fixtures.
//!
//! Exit codes: 0 on success, 1 when a scenario or an argument fails
//! validation, 2 when reading or writing a file fails. Diagnostics go
//! to the error stream; data (CSV, path listings, reports) goes to the
//! chosen output target.

use std::env;
use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::game::GameConfig;
use crate::net;
use crate::scenario::{self, ScenarioDoc};
use crate::ssa::{self, RolloutMode, SsaOptions};

/// When set, scenario names resolve to `<dir>/<name>.toml` there before
/// falling back to the bundled fixtures.
pub const FIXTURES_DIR_ENV: &str = "SCPN_FIXTURES_DIR";

/// Threat-propagation simulator: models an IoT network as a stochastic
/// colored Petri net, scores each threat with an attacker/defender
/// game, and emits the normalized security-situation curve.
#[derive(Debug, Parser)]
#[command(name = "scpn", version, about, long_about = None)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// A scenario argument is a file path (anything containing `/` or
/// ending in `.toml`), a name under the directory named by
/// `SCPN_FIXTURES_DIR`, or the id of a bundled fixture.
#[derive(Debug, Subcommand)]
pub enum Command {
    /// Compute a scenario's situation curve and emit it as CSV.
    Simulate {
        /// Scenario file path or fixture name.
        scenario: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Write the CSV here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List every simple attack path between two nodes.
    Paths {
        /// Scenario file path or fixture name.
        scenario: String,
        /// Node the attacker starts from.
        entry: String,
        /// Node the attacker wants to reach.
        target: String,
        /// Threat whose subnet is searched; defaults to the scenario's
        /// only threat.
        #[arg(long)]
        threat: Option<String>,
    },
    /// Compare the situation curves of two scenarios.
    Compare {
        /// First scenario file path or fixture name.
        scenario_a: String,
        /// Second scenario file path or fixture name.
        scenario_b: String,
        #[command(flatten)]
        overrides: Overrides,
        /// Write the report here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse a scenario and report every validation problem.
    Validate {
        /// Scenario file path or fixture name.
        scenario: String,
    },
    /// List the bundled scenario fixtures.
    Fixtures,
}

/// Scenario-file settings that can be overridden from the command line.
/// Overridden values are validated exactly like file values.
#[derive(Debug, Args)]
pub struct Overrides {
    /// Look-ahead epochs (>= 1); the curve has horizon + 1 rows.
    #[arg(long)]
    pub horizon: Option<u32>,
    /// Discount on future damage, in [0, 1).
    #[arg(long)]
    pub discount: Option<f64>,
    /// Aggregation radix (> 1).
    #[arg(long)]
    pub radix: Option<f64>,
    /// How successive epochs are produced.
    #[arg(long, value_enum)]
    pub mode: Option<ModeArg>,
    /// Monte-Carlo trial count (>= 1).
    #[arg(long)]
    pub trials: Option<u32>,
    /// Monte-Carlo RNG seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Command-line spelling of [`RolloutMode`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Expectation,
    Montecarlo,
}

impl From<ModeArg> for RolloutMode {
    fn from(mode: ModeArg) -> Self {
        match mode {
            ModeArg::Expectation => RolloutMode::Expectation,
            ModeArg::Montecarlo => RolloutMode::MonteCarlo,
        }
    }
}

enum CliError {
    /// Bad scenario, bad reference, or bad override: exit 1.
    Validation(String),
    /// Could not read or write a file: exit 2.
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 2,
        }
    }

    fn message(&self) -> &str {
        match self {
            CliError::Validation(m) | CliError::Io(m) => m,
        }
    }
}

/// Runs the CLI against `args` (including the program name), writing
/// data to `out` and diagnostics to `err`, and returns the exit code.
pub fn run_with_io(
    args: impl IntoIterator<Item = impl Into<OsString> + Clone>,
    out: &mut impl Write,
    err: &mut impl Write,
) -> u8 {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{e}");
                    0
                }
                _ => {
                    let _ = write!(err, "{e}");
                    1
                }
            };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message());
            e.exit_code()
        }
    }
}

/// Runs the CLI against the process arguments and standard streams.
pub fn run(args: impl IntoIterator<Item = impl Into<OsString> + Clone>) -> u8 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with_io(args, &mut stdout.lock(), &mut stderr.lock())
}

fn dispatch(command: &Command, out: &mut impl Write) -> Result<(), CliError> {
    match command {
        Command::Simulate {
            scenario,
            overrides,
            out: target,
        } => cmd_simulate(scenario, overrides, target.as_deref(), out),
        Command::Paths {
            scenario,
            entry,
            target,
            threat,
        } => cmd_paths(scenario, threat.as_deref(), entry, target, out),
        Command::Compare {
            scenario_a,
            scenario_b,
            overrides,
            out: target,
        } => cmd_compare(scenario_a, scenario_b, overrides, target.as_deref(), out),
        Command::Validate { scenario } => cmd_validate(scenario, out),
        Command::Fixtures => cmd_fixtures(out),
    }
}

/// Resolves a scenario reference: explicit paths load from disk, names
/// try the `SCPN_FIXTURES_DIR` directory and then the bundled fixtures.
fn load_scenario(reference: &str) -> Result<ScenarioDoc, CliError> {
    let path = Path::new(reference);
    if reference.contains('/') || reference.ends_with(".toml") || path.is_file() {
        return load_scenario_file(path);
    }
    if let Ok(dir) = env::var(FIXTURES_DIR_ENV) {
        let candidate = Path::new(&dir).join(format!("{reference}.toml"));
        if candidate.is_file() {
            return load_scenario_file(&candidate);
        }
    }
    scenario::builtin_fixture(reference).ok_or_else(|| {
        let names: Vec<String> = scenario::builtin_fixtures()
            .iter()
            .map(|d| d.scenario_id.clone())
            .collect();
        CliError::Validation(format!(
            "unknown scenario {reference:?}; bundled fixtures: {}",
            names.join(", ")
        ))
    })
}

fn load_scenario_file(path: &Path) -> Result<ScenarioDoc, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?;
    scenario::parse_scenario(&text).map_err(|e| {
        let lines: Vec<String> = e.errors.iter().map(|err| err.to_string()).collect();
        CliError::Validation(format!("{}: {}", path.display(), lines.join("; ")))
    })
}

/// Applies command-line overrides and re-checks the document, so an
/// out-of-range flag fails exactly like an out-of-range file value.
fn apply_overrides(doc: &mut ScenarioDoc, overrides: &Overrides) -> Result<(), CliError> {
    if let Some(horizon) = overrides.horizon {
        doc.game.horizon = horizon;
    }
    if let Some(discount) = overrides.discount {
        doc.game.discount = discount;
    }
    if let Some(radix) = overrides.radix {
        doc.ssa.radix = radix;
    }
    if let Some(mode) = overrides.mode {
        doc.ssa.mode = mode.into();
    }
    if let Some(trials) = overrides.trials {
        doc.ssa.trials = trials;
    }
    if let Some(seed) = overrides.seed {
        doc.ssa.seed = seed;
    }
    let errors = scenario::validate(doc);
    if errors.is_empty() {
        Ok(())
    } else {
        let lines: Vec<String> = errors.iter().map(|e| e.to_string()).collect();
        Err(CliError::Validation(lines.join("; ")))
    }
}

fn prepared_series(doc: &ScenarioDoc) -> Result<ssa::SituationSeries, CliError> {
    let net = scenario::to_net(doc).map_err(|e| CliError::Validation(e.to_string()))?;
    let cfg: GameConfig = scenario::game_config(doc);
    let opts: SsaOptions = scenario::ssa_options(doc);
    ssa::situation_series(&doc.scenario_id, &net, &cfg, &opts)
        .map_err(|e| CliError::Validation(e.to_string()))
}

/// Writes `text` to the `--out` file when given, else to the output
/// stream.
fn emit(text: &str, target: Option<&Path>, out: &mut impl Write) -> Result<(), CliError> {
    match target {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display()))),
        None => {
            let _ = write!(out, "{text}");
            Ok(())
        }
    }
}

fn cmd_simulate(
    reference: &str,
    overrides: &Overrides,
    target: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let mut doc = load_scenario(reference)?;
    apply_overrides(&mut doc, overrides)?;
    let series = prepared_series(&doc)?;
    emit(&ssa::to_csv(&series), target, out)
}

fn cmd_paths(
    reference: &str,
    threat: Option<&str>,
    entry: &str,
    target: &str,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let doc = load_scenario(reference)?;
    let net = scenario::to_net(&doc).map_err(|e| CliError::Validation(e.to_string()))?;
    let threat_id = match threat {
        Some(id) => id.to_string(),
        None if doc.threats.len() == 1 => doc.threats[0].clone(),
        None => {
            return Err(CliError::Validation(format!(
                "scenario declares {} threats; pick one with --threat ({})",
                doc.threats.len(),
                doc.threats.join(", ")
            )));
        }
    };
    let paths = net::enumerate_attack_paths(&net, &threat_id, entry, target)
        .map_err(|e| CliError::Validation(e.to_string()))?;
    for path in &paths {
        let mut nodes = vec![entry.to_string()];
        nodes.extend(path.iter().map(|c| c.target.clone()));
        let _ = writeln!(out, "{}", nodes.join("->"));
    }
    let _ = writeln!(out, "count {}", paths.len());
    Ok(())
}

fn cmd_compare(
    reference_a: &str,
    reference_b: &str,
    overrides: &Overrides,
    target: Option<&Path>,
    out: &mut impl Write,
) -> Result<(), CliError> {
    let mut doc_a = load_scenario(reference_a)?;
    let mut doc_b = load_scenario(reference_b)?;
    apply_overrides(&mut doc_a, overrides)?;
    apply_overrides(&mut doc_b, overrides)?;
    if doc_a.game.horizon != doc_b.game.horizon {
        return Err(CliError::Validation(format!(
            "horizon mismatch: {} has {}, {} has {}; align the files or pass --horizon",
            doc_a.scenario_id, doc_a.game.horizon, doc_b.scenario_id, doc_b.game.horizon
        )));
    }
    let series_a = prepared_series(&doc_a)?;
    let series_b = prepared_series(&doc_b)?;
    let report =
        ssa::compare(&series_a, &series_b).map_err(|e| CliError::Validation(e.to_string()))?;

    let mut text = String::new();
    for stats in [&report.left, &report.right] {
        let half = match stats.time_to_half_peak {
            Some(tau) => tau.to_string(),
            None => "never".to_string(),
        };
        text.push_str(&format!(
            "{}: peak {:.6} (tau {}), time-to-half-peak {}, area {:.6}\n",
            stats.scenario_id, stats.peak, stats.peak_tau, half, stats.auc
        ));
    }
    text.push_str(&format!("verdict: {}\n", report.verdict));
    emit(&text, target, out)
}

fn cmd_validate(reference: &str, out: &mut impl Write) -> Result<(), CliError> {
    let doc = load_scenario(reference)?;
    let _ = writeln!(
        out,
        "ok: {} ({} assets, {} connections, {} threats)",
        doc.scenario_id,
        doc.assets.len(),
        doc.connections.len(),
        doc.threats.len()
    );
    Ok(())
}

fn cmd_fixtures(out: &mut impl Write) -> Result<(), CliError> {
    for doc in scenario::builtin_fixtures() {
        let entries: Vec<String> = doc
            .initial_infections
            .iter()
            .map(|(threat, places)| format!("{threat} at {}", places.join(",")))
            .collect();
        let _ = writeln!(
            out,
            "{}: {} assets, {} connections, {}",
            doc.scenario_id,
            doc.assets.len(),
            doc.connections.len(),
            entries.join("; ")
        );
    }
    Ok(())
}
