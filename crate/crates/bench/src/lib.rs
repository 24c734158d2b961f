//! Shared fixtures for the benchmarks.

use masqkd_core::adversary::{random_s2, Leg};
use masqkd_core::rng::{Stream, ATTACK_SAMPLING_STREAM};
use masqkd_core::{AttackModel, ExperimentConfig, ProtocolKind};

pub fn honest(kind: ProtocolKind, n: u64) -> ExperimentConfig {
    ExperimentConfig::new(kind, n, 1)
}

/// A fixed, valid Strategy 2 attack on the Alice → Bob leg.
pub fn s2_attack() -> AttackModel {
    random_s2(&mut Stream::new(1, ATTACK_SAMPLING_STREAM), Leg::AliceToBob)
}

pub fn random_bits(len: usize, seed: u64) -> Vec<u8> {
    let mut s = Stream::new(seed, 0);
    (0..len).map(|_| s.bit()).collect()
}
