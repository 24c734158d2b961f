//! `masqkd` command-line runner.
//!
//! Exit codes: 0 success, 1 the run aborted (unless `--allow-abort`),
//! 2 configuration or usage error, 3 any other failure.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use masqkd_core::config::{resolve_seed, ConfigError, SEED_ENV};
use masqkd_core::harness::{attack_check, compare_protocols, run_experiment_with_workers, sweep, HarnessError};
use masqkd_core::{load_config, ProtocolKind};
use serde_json::Value;

#[derive(Parser, Debug)]
#[command(
    name = "masqkd",
    version,
    about = "Simulate mediated semi-quantum key distribution experiments"
)]
struct Cli {
    /// Worker threads for round simulation (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Run one experiment and emit its JSON report.
    Run {
        config: PathBuf,
        /// Overrides the config seed and the MASQKD_SEED variable.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Exit 0 even when the run aborts.
        #[arg(long)]
        allow_abort: bool,
    },
    /// Rerun a config for each value of one parameter and emit CSV.
    Sweep {
        config: PathBuf,
        /// Dotted path to a scalar, e.g. `attack.params.theta` or `n`.
        #[arg(long)]
        param: String,
        /// Comma-separated values; each is read as JSON, else as a string.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Honest runs of every protocol beside the published efficiencies.
    Compare {
        #[arg(long)]
        n: u64,
        #[arg(long)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Validate an attack file and print its predicted statistics.
    AttackCheck {
        attack_file: PathBuf,
        /// Fail unless the attack is valid for this protocol.
        #[arg(long)]
        protocol: Option<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Csv,
    Json,
}

enum Failure {
    Config(String),
    Other(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        match e {
            HarnessError::Config(_) | HarnessError::Path { .. } => Failure::Config(e.to_string()),
            HarnessError::Protocol(masqkd_core::ProtocolError::Attack { .. }) => Failure::Config(e.to_string()),
            _ => Failure::Other(e.to_string()),
        }
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::Config(e.to_string())
    }
}

fn emit(text: &str, out: Option<&Path>) -> Result<(), Failure> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| Failure::Other(format!("cannot write {}: {e}", path.display())))
        }
        None => {
            let mut stdout = io::stdout().lock();
            let newline = if text.ends_with('\n') { "" } else { "\n" };
            match write!(stdout, "{text}{newline}").and_then(|()| stdout.flush()) {
                Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::Other(format!("stdout: {e}"))),
                _ => Ok(()),
            }
        }
    }
}

fn env_seed() -> Option<String> {
    std::env::var(SEED_ENV).ok()
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Config(format!("cannot read {}: {e}", path.display())))
}

fn parse_grid(raw: &str) -> Vec<Value> {
    raw.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| serde_json::from_str(s).unwrap_or_else(|_| Value::String(s.to_string())))
        .collect()
}

fn execute(cli: Cli) -> Result<ExitCode, Failure> {
    match cli.command {
        Command::Run {
            config,
            seed,
            out,
            allow_abort,
        } => {
            let mut config = load_config(&config)?;
            config.seed = resolve_seed(config.seed, seed, env_seed().as_deref())?;
            let report = run_experiment_with_workers(&config, cli.workers)?;
            let target = out.or_else(|| config.output_path.as_ref().map(PathBuf::from));
            emit(&report.to_json()?, target.as_deref())?;
            if report.abort && !allow_abort {
                let rate = |r: Option<f64>| r.map_or("n/a".to_string(), |r| format!("{r:.4}"));
                eprintln!(
                    "aborted: case 1 error rate {}, disclosed key mismatch rate {}, threshold {}",
                    rate(report.case1_error_rate),
                    rate(report.case2_mismatch.observed_rate),
                    config.threshold
                );
                return Ok(ExitCode::from(1));
            }
        }
        Command::Sweep {
            config,
            param,
            grid,
            seed,
            out,
        } => {
            let text = read(&config)?;
            let mut base: Value = serde_json::from_str(&text).map_err(ConfigError::from)?;
            let file_seed = base.get("seed").and_then(Value::as_u64).unwrap_or(0);
            let resolved = resolve_seed(file_seed, seed, env_seed().as_deref())?;
            if let Some(obj) = base.as_object_mut() {
                obj.insert("seed".into(), Value::from(resolved));
            }
            let grid = parse_grid(&grid);
            let table = match cli.workers {
                Some(w) => rayon_pool(w)?.install(|| sweep(&base, &param, &grid))?,
                None => sweep(&base, &param, &grid)?,
            };
            emit(&table.to_csv()?, out.as_deref())?;
        }
        Command::Compare { n, seed, format, out } => {
            if n == 0 {
                return Err(Failure::Config("n must be at least 1".into()));
            }
            let table = compare_protocols(n, seed, cli.workers)?;
            let text = match format {
                Format::Csv => table.to_csv()?,
                Format::Json => serde_json::to_string_pretty(&table).map_err(HarnessError::from)?,
            };
            emit(&text, out.as_deref())?;
        }
        Command::AttackCheck {
            attack_file,
            protocol,
            out,
        } => {
            let check = attack_check(&read(&attack_file)?)?;
            emit(
                &serde_json::to_string_pretty(&check).map_err(HarnessError::from)?,
                out.as_deref(),
            )?;
            let ok = match protocol {
                Some(name) => {
                    let kind: ProtocolKind = serde_json::from_value(Value::String(name.clone()))
                        .map_err(|_| Failure::Config(format!("unknown protocol `{name}`")))?;
                    check.protocols.iter().any(|p| p.protocol == kind && p.valid)
                }
                None => check.any_valid(),
            };
            if !ok {
                for row in check.protocols.iter().filter(|p| !p.valid) {
                    eprintln!("{}: {}", row.protocol, row.violations.join("; "));
                }
                return Ok(ExitCode::from(2));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn rayon_pool(workers: usize) -> Result<masqkd_core::harness::ThreadPool, Failure> {
    masqkd_core::harness::thread_pool(workers).map_err(|e| Failure::Other(e.to_string()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(code) => code,
        Err(Failure::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Other(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
