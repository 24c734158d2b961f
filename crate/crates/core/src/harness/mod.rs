//! End-to-end experiment runs and their reports.

mod compare;
mod sweep;

pub use compare::{compare_protocols, Comparison, ComparisonRow};
pub use sweep::{set_path, sweep, SweepRow, SweepTable, SWEEP_COLUMNS};

use std::time::Instant;

use serde::Serialize;
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::adversary::{eve_information, AttackError, AttackModel};
use crate::config::{ConfigError, ExperimentConfig};
use crate::postprocess::{
    self, estimate_and_decide, key_rate_estimate, privacy_amplification, sift, undisclosed_bits, EfficiencyConvention,
    PostprocessError,
};
use crate::protocol::{run_protocol, Case, ProtocolError, ProtocolKind, Transcript};
use crate::rng::{Stream, AMPLIFICATION_STREAM};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error(transparent)]
    Postprocess(#[from] PostprocessError),
    #[error(transparent)]
    Attack(#[from] AttackError),
    #[error("parameter path `{path}`: {reason}")]
    Path { path: String, reason: String },
    #[error("CSV output: {0}")]
    Csv(#[from] csv::Error),
    #[error("JSON output: {0}")]
    Json(#[from] serde_json::Error),
    #[error("worker pool: {0}")]
    Pool(#[from] rayon::ThreadPoolBuildError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CaseCounts {
    pub case1: u64,
    pub case2: u64,
    pub case3: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MismatchStats {
    /// Rounds kept as key candidates, matching or not.
    pub candidates: u64,
    /// Mismatches among all candidates (simulator ground truth).
    pub true_count: u64,
    /// Mismatches found among the disclosed candidates.
    pub discovered_count: u64,
    pub observed_rate: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Efficiency {
    pub prepared_total: u64,
    pub raw_key_bits: u64,
    pub final_key_bits: u64,
    pub raw_over_prepared: f64,
    pub final_over_prepared: f64,
    /// Convention selected in the config, and its value.
    pub convention: EfficiencyConvention,
    pub eta: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveStats {
    /// False when Eve's target bit is not modeled for this attack.
    pub modeled: bool,
    pub holevo_bits: Option<f64>,
    pub helstrom_success: Option<f64>,
    /// Key rounds on which Eve made a guess.
    pub guessed_rounds: u64,
    /// Fraction of those guesses equal to Alice's key bit.
    pub empirical_guess_accuracy: Option<f64>,
}

/// Machine-readable summary of one experiment. Keys serialize in field
/// order; `wall_time_ms` is last and is the only nondeterministic field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub rounds: u64,
    pub case_counts: CaseCounts,
    pub case1_errors: u64,
    pub case1_error_rate: Option<f64>,
    pub predicted_case1_error: f64,
    pub case2_mismatch: MismatchStats,
    pub sifted_length: u64,
    pub disclosed_count: u64,
    pub abort: bool,
    pub final_key_length: u64,
    /// SHA-256 of the final key; see [`key_digest`].
    pub final_key_digest: String,
    pub efficiency: Efficiency,
    pub key_rate_estimate: f64,
    pub eve: EveStats,
    pub wall_time_ms: f64,
}

impl Report {
    pub fn to_json(&self) -> Result<String, HarnessError> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// JSON with the `wall_time_ms` key removed, for reproducibility checks.
    pub fn to_json_without_wall_time(&self) -> Result<String, HarnessError> {
        let mut value = serde_json::to_value(self)?;
        if let Some(map) = value.as_object_mut() {
            map.remove("wall_time_ms");
        }
        Ok(serde_json::to_string_pretty(&value)?)
    }
}

/// Hex SHA-256 over the key's bit count (8 bytes, little endian) followed by
/// the bits packed most-significant-first, zero-padded to a whole byte.
pub fn key_digest(bits: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update((bits.len() as u64).to_le_bytes());
    let packed: Vec<u8> = bits
        .chunks(8)
        .map(|chunk| {
            chunk
                .iter()
                .enumerate()
                .fold(0u8, |acc, (i, b)| acc | ((b & 1) << (7 - i)))
        })
        .collect();
    hasher.update(&packed);
    hex::encode(hasher.finalize())
}

/// Runs the protocol, post-processing and adversary analytics for `config`
/// on the current rayon pool.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Report, HarnessError> {
    let start = Instant::now();
    config.validate()?;
    let transcript = run_protocol(config)?;
    let mut report = analyze(&transcript)?;
    report.wall_time_ms = start.elapsed().as_secs_f64() * 1e3;
    Ok(report)
}

pub use rayon::ThreadPool;

/// Dedicated pool with `workers` threads (0 means one per core).
pub fn thread_pool(workers: usize) -> Result<ThreadPool, HarnessError> {
    Ok(rayon::ThreadPoolBuilder::new().num_threads(workers).build()?)
}

/// As [`run_experiment`], on a dedicated pool with `workers` threads.
pub fn run_experiment_with_workers(config: &ExperimentConfig, workers: Option<usize>) -> Result<Report, HarnessError> {
    match workers {
        Some(w) => thread_pool(w)?.install(|| run_experiment(config)),
        None => run_experiment(config),
    }
}

/// Builds the report for a finished transcript (`wall_time_ms` = 0).
pub fn analyze(transcript: &Transcript) -> Result<Report, HarnessError> {
    let config = &transcript.config;
    let attack = config.attack_or_none();
    let count = |case| transcript.rounds.iter().filter(|r| r.case == case).count() as u64;
    let case_counts = CaseCounts {
        case1: count(Case::Case1),
        case2: count(Case::Case2),
        case3: count(Case::Case3),
    };

    let key = sift(transcript);
    let check = estimate_and_decide(transcript, config.threshold)?;
    let remaining = undisclosed_bits(&key, &check);
    let raw = postprocess::qubit_efficiency(transcript, &check, EfficiencyConvention::RawOverPrepared);
    let fin = postprocess::qubit_efficiency(transcript, &check, EfficiencyConvention::FinalOverPrepared);
    let efficiency = Efficiency {
        prepared_total: raw.prepared_total,
        raw_key_bits: raw.key_bits,
        final_key_bits: fin.key_bits,
        raw_over_prepared: raw.eta,
        final_over_prepared: fin.eta,
        convention: config.efficiency_convention,
        eta: match config.efficiency_convention {
            EfficiencyConvention::RawOverPrepared => raw.eta,
            EfficiencyConvention::FinalOverPrepared => fin.eta,
        },
    };

    let info = eve_information(&attack, config.protocol)?;
    // Unmodeled leakage is charged as a full bit.
    let leakage = info.map_or(1.0, |i| i.holevo_bits);
    let rate = key_rate_estimate(check.observed_qber().unwrap_or(0.0), leakage);
    let final_bits = if check.abort {
        Vec::new()
    } else {
        let out_len = (remaining.len() as f64 * rate).floor() as usize;
        let mut stream = Stream::new(config.seed, AMPLIFICATION_STREAM);
        privacy_amplification(&remaining, out_len, &mut stream)?.bits
    };

    Ok(Report {
        config: config.clone(),
        rounds: transcript.rounds.len() as u64,
        case_counts,
        case1_errors: check.case1_errors,
        case1_error_rate: check.case1_error_rate,
        predicted_case1_error: attack.predicted_case1_error(config.protocol),
        case2_mismatch: MismatchStats {
            candidates: check.candidate_rounds,
            true_count: check.case2_true_mismatch_count,
            discovered_count: check.case2_mismatch_count,
            observed_rate: check.observed_qber(),
        },
        sifted_length: key.len() as u64,
        disclosed_count: check.case2_disclosed_indices.len() as u64,
        abort: check.abort,
        final_key_length: final_bits.len() as u64,
        final_key_digest: key_digest(&final_bits),
        efficiency,
        key_rate_estimate: rate,
        eve: eve_stats(transcript, info),
        wall_time_ms: 0.0,
    })
}

fn eve_stats(transcript: &Transcript, info: Option<crate::adversary::EveInformation>) -> EveStats {
    let guesses: Vec<bool> = transcript
        .rounds
        .iter()
        .filter_map(|r| {
            let guess = r.eve.as_ref()?.guess?;
            let bits = r.key_bits?;
            let truth = match r.kind {
                ProtocolKind::Improved => r.shared_bit.unwrap_or(bits.alice),
                _ => bits.alice,
            };
            Some(guess == truth)
        })
        .collect();
    let correct = guesses.iter().filter(|&&g| g).count();
    EveStats {
        modeled: info.is_some(),
        holevo_bits: info.map(|i| i.holevo_bits),
        helstrom_success: info.map(|i| i.helstrom_success),
        guessed_rounds: guesses.len() as u64,
        empirical_guess_accuracy: (!guesses.is_empty()).then(|| correct as f64 / guesses.len() as f64),
    }
}

/// Validation and analytics for one attack against every protocol.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackCheck {
    pub attack: AttackModel,
    pub protocols: Vec<AttackCheckRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AttackCheckRow {
    pub protocol: ProtocolKind,
    pub valid: bool,
    pub violations: Vec<String>,
    pub predicted_case1_error: Option<f64>,
    pub holevo_bits: Option<f64>,
    pub helstrom_success: Option<f64>,
}

impl AttackCheck {
    pub fn all_valid(&self) -> bool {
        self.protocols.iter().all(|p| p.valid)
    }

    pub fn any_valid(&self) -> bool {
        self.protocols.iter().any(|p| p.valid)
    }
}

/// Parses an attack file (`{kind, location, params}`) and checks it.
pub fn attack_check(text: &str) -> Result<AttackCheck, HarnessError> {
    let attack: AttackModel = serde_json::from_str(text).map_err(ConfigError::from)?;
    let mut protocols = Vec::new();
    for kind in ProtocolKind::ALL {
        let row = match attack.validate(kind) {
            Ok(()) => {
                let info = eve_information(&attack, kind)?;
                AttackCheckRow {
                    protocol: kind,
                    valid: true,
                    violations: Vec::new(),
                    predicted_case1_error: Some(attack.predicted_case1_error(kind)),
                    holevo_bits: info.map(|i| i.holevo_bits),
                    helstrom_success: info.map(|i| i.helstrom_success),
                }
            }
            Err(violations) => AttackCheckRow {
                protocol: kind,
                valid: false,
                violations: violations.iter().map(ToString::to_string).collect(),
                predicted_case1_error: None,
                holevo_bits: None,
                helstrom_success: None,
            },
        };
        protocols.push(row);
    }
    Ok(AttackCheck { attack, protocols })
}
