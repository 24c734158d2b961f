//! Simulation of mediated asymmetric semi-quantum key distribution.
//!
//! The crate is layered bottom-up:
//!
//! * [`quantum`]: statevectors, gates, measurements and density-matrix tools;
//! * [`rng`]: counter-based random streams;
//! * [`adversary`]: attack models and Eve's information;
//! * [`protocol`]: round engines for the base, improved and reference protocols;
//! * [`postprocess`]: sifting, error estimation, privacy amplification;
//! * [`config`] and [`harness`]: experiment configuration, runs, sweeps and reports.

pub mod adversary;
pub mod config;
pub mod harness;
pub mod postprocess;
pub mod protocol;
pub mod quantum;
pub mod rng;

pub use adversary::{
    eve_conditional_states, eve_information, holevo_info, make_undetectable_s2, validate_attack, Attack, AttackError,
    AttackModel, EveEnsemble, EveInformation, EveTarget, Leg, MeasureBasis, Violation,
};
pub use config::{load_config, resolve_seed, ConfigError, ExperimentConfig};
pub use harness::{
    analyze, attack_check, compare_protocols, key_digest, run_experiment, run_experiment_with_workers, sweep,
    AttackCheck, Comparison, HarnessError, Report, SweepTable,
};
pub use postprocess::{
    binary_entropy, estimate_and_decide, key_rate_estimate, privacy_amplification, qubit_efficiency, sift, CheckReport,
    EfficiencyConvention, EfficiencyReport, SiftedKey,
};
pub use protocol::{
    classify_case, run_protocol, run_round, shared_bit_base, shared_bit_improved, Case, ProtocolError, ProtocolKind,
    RoundRecord, Transcript,
};
pub use quantum::{DensityMatrix, Gate, StateVector, C64};
pub use rng::Stream;
