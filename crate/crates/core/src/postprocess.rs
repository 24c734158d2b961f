//! Sifting, error estimation, privacy amplification and efficiency
//! accounting over a finished transcript.

use std::collections::HashSet;

use rand::seq::index;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::protocol::{Case, Transcript};
use crate::rng::{Stream, DISCLOSURE_STREAM};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PostprocessError {
    #[error("{name} = {value} is outside [0, 1]")]
    OutOfRange { name: &'static str, value: f64 },
    #[error("requested {requested} output bits from {available} input bits")]
    OutputTooLong { requested: usize, available: usize },
    #[error("Toeplitz matrix {rows}×{cols} needs {expected} diagonal bits, got {found}")]
    DiagonalLength {
        rows: usize,
        cols: usize,
        expected: usize,
        found: usize,
    },
    #[error("input has {found} bits, hash expects {expected}")]
    InputLength { expected: usize, found: usize },
}

/// Which key length the efficiency ratio counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EfficiencyConvention {
    /// All sifted bits.
    RawOverPrepared,
    /// Sifted bits left after check-bit disclosure.
    #[default]
    FinalOverPrepared,
}

/// Raw key bits from Case 2 rounds where both parties hold the same bit.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct SiftedKey {
    pub bits: Vec<u8>,
    pub source_rounds: Vec<u64>,
    /// Key-candidate rounds whose two bits disagree (only under attack).
    pub mismatched_rounds: Vec<u64>,
}

impl SiftedKey {
    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }
}

pub fn sift(transcript: &Transcript) -> SiftedKey {
    let mut key = SiftedKey::default();
    for r in transcript.rounds.iter().filter(|r| r.case == Case::Case2) {
        match (r.key_bits, r.shared_bit) {
            (Some(_), Some(bit)) => {
                key.bits.push(bit);
                key.source_rounds.push(r.round_index);
            }
            (Some(_), None) => key.mismatched_rounds.push(r.round_index),
            _ => {}
        }
    }
    key
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckReport {
    pub case1_rounds: u64,
    pub case1_errors: u64,
    /// Absent when there were no Case 1 rounds.
    pub case1_error_rate: Option<f64>,
    /// Rounds the parties treat as key candidates (matching or not).
    pub candidate_rounds: u64,
    /// Round indices whose key bits were disclosed, ascending.
    pub case2_disclosed_indices: Vec<u64>,
    /// Mismatches the parties found among disclosed bits.
    pub case2_mismatch_count: u64,
    /// Mismatches among all candidates; visible only to the simulator.
    pub case2_true_mismatch_count: u64,
    pub abort: bool,
    pub threshold: f64,
}

impl CheckReport {
    /// Mismatch rate observed on the disclosed bits.
    pub fn observed_qber(&self) -> Option<f64> {
        let n = self.case2_disclosed_indices.len();
        (n > 0).then(|| self.case2_mismatch_count as f64 / n as f64)
    }
}

/// Estimates error rates and decides whether to abort.
///
/// All Case 1 rounds are checked. A `disclosure_fraction` share (rounded
/// down) of the key-candidate rounds is sampled without replacement from the
/// disclosure stream of the config seed and compared.
pub fn estimate_and_decide(transcript: &Transcript, threshold: f64) -> Result<CheckReport, PostprocessError> {
    if !(0.0..=1.0).contains(&threshold) {
        return Err(PostprocessError::OutOfRange {
            name: "threshold",
            value: threshold,
        });
    }
    let fraction = transcript.config.disclosure_fraction;
    if !(0.0..=1.0).contains(&fraction) {
        return Err(PostprocessError::OutOfRange {
            name: "disclosure_fraction",
            value: fraction,
        });
    }
    let case1: Vec<_> = transcript.rounds.iter().filter(|r| r.case == Case::Case1).collect();
    let case1_errors = case1.iter().filter(|r| r.check_error).count() as u64;
    let case1_error_rate = (!case1.is_empty()).then(|| case1_errors as f64 / case1.len() as f64);

    let candidates: Vec<_> = transcript
        .rounds
        .iter()
        .filter_map(|r| r.key_bits.map(|k| (r.round_index, k.alice != k.bob)))
        .collect();
    let count = (fraction * candidates.len() as f64).floor() as usize;
    let mut stream = Stream::new(transcript.config.seed, DISCLOSURE_STREAM);
    let mut picked = index::sample(stream.rng(), candidates.len(), count).into_vec();
    picked.sort_unstable();
    let case2_mismatch_count = picked.iter().filter(|&&i| candidates[i].1).count() as u64;
    let case2_disclosed_indices: Vec<u64> = picked.iter().map(|&i| candidates[i].0).collect();
    let case2_true_mismatch_count = candidates.iter().filter(|c| c.1).count() as u64;

    let case2_rate = (count > 0).then(|| case2_mismatch_count as f64 / count as f64);
    let abort = case1_error_rate.is_some_and(|r| r > threshold) || case2_rate.is_some_and(|r| r > threshold);
    Ok(CheckReport {
        case1_rounds: case1.len() as u64,
        case1_errors,
        case1_error_rate,
        candidate_rounds: candidates.len() as u64,
        case2_disclosed_indices,
        case2_mismatch_count,
        case2_true_mismatch_count,
        abort,
        threshold,
    })
}

/// Sifted bits whose rounds were not disclosed, in round order.
pub fn undisclosed_bits(key: &SiftedKey, check: &CheckReport) -> Vec<u8> {
    let disclosed: HashSet<u64> = check.case2_disclosed_indices.iter().copied().collect();
    key.bits
        .iter()
        .zip(&key.source_rounds)
        .filter(|(_, r)| !disclosed.contains(r))
        .map(|(b, _)| *b)
        .collect()
}

/// Binary Shannon entropy in bits.
pub fn binary_entropy(q: f64) -> Result<f64, PostprocessError> {
    if !(0.0..=1.0).contains(&q) {
        return Err(PostprocessError::OutOfRange { name: "q", value: q });
    }
    if q == 0.0 || q == 1.0 {
        return Ok(0.0);
    }
    Ok(-q * q.log2() - (1.0 - q) * (1.0 - q).log2())
}

/// Asymptotic key rate `max(0, 1 − h(qber) − eve_info_bits)`, modeling
/// Alice–Bob as a binary symmetric channel. `qber` is clamped to
/// `[0, 0.5]` and negative leakage to zero.
pub fn key_rate_estimate(qber: f64, eve_info_bits: f64) -> f64 {
    let q = if qber.is_nan() { 0.5 } else { qber.clamp(0.0, 0.5) };
    let h = binary_entropy(q).unwrap_or(1.0);
    (1.0 - h - eve_info_bits.max(0.0)).max(0.0)
}

/// Toeplitz matrix over GF(2); entry `(i, j)` is `diagonals[i + cols − 1 − j]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToeplitzHash {
    rows: usize,
    cols: usize,
    diagonals: Vec<u8>,
}

impl ToeplitzHash {
    fn diagonal_count(rows: usize, cols: usize) -> usize {
        if rows == 0 || cols == 0 {
            0
        } else {
            rows + cols - 1
        }
    }

    pub fn from_diagonals(rows: usize, cols: usize, diagonals: Vec<u8>) -> Result<Self, PostprocessError> {
        let expected = Self::diagonal_count(rows, cols);
        if diagonals.len() != expected {
            return Err(PostprocessError::DiagonalLength {
                rows,
                cols,
                expected,
                found: diagonals.len(),
            });
        }
        Ok(Self {
            rows,
            cols,
            diagonals: diagonals.into_iter().map(|b| b & 1).collect(),
        })
    }

    pub fn random(rows: usize, cols: usize, stream: &mut Stream) -> Self {
        let diagonals = (0..Self::diagonal_count(rows, cols)).map(|_| stream.bit()).collect();
        Self { rows, cols, diagonals }
    }

    pub fn entry(&self, row: usize, col: usize) -> u8 {
        self.diagonals[row + self.cols - 1 - col]
    }

    pub fn diagonals(&self) -> &[u8] {
        &self.diagonals
    }

    /// Matrix–vector product over GF(2).
    pub fn apply(&self, bits: &[u8]) -> Result<Vec<u8>, PostprocessError> {
        if bits.len() != self.cols {
            return Err(PostprocessError::InputLength {
                expected: self.cols,
                found: bits.len(),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                bits.iter()
                    .enumerate()
                    .fold(0u8, |acc, (j, &b)| acc ^ (self.entry(i, j) & b & 1))
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyMaterial {
    pub bits: Vec<u8>,
    /// Diagonal bits of the Toeplitz matrix used.
    pub pa_seed: Vec<u8>,
}

/// Compresses `bits` to `out_len` bits with a random Toeplitz hash drawn
/// from `stream`.
pub fn privacy_amplification(
    bits: &[u8],
    out_len: usize,
    stream: &mut Stream,
) -> Result<KeyMaterial, PostprocessError> {
    if out_len > bits.len() {
        return Err(PostprocessError::OutputTooLong {
            requested: out_len,
            available: bits.len(),
        });
    }
    let hash = ToeplitzHash::random(out_len, bits.len(), stream);
    Ok(KeyMaterial {
        bits: hash.apply(bits)?,
        pa_seed: hash.diagonals,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyReport {
    /// Total qubits prepared by all parties (`m`).
    pub prepared_total: u64,
    /// Key bits counted under `convention` (`n`).
    pub key_bits: u64,
    pub convention: EfficiencyConvention,
    pub eta: f64,
}

pub fn qubit_efficiency(
    transcript: &Transcript,
    check: &CheckReport,
    convention: EfficiencyConvention,
) -> EfficiencyReport {
    let prepared_total: u64 = transcript.rounds.iter().map(|r| u64::from(r.prepared_count)).sum();
    let key = sift(transcript);
    let key_bits = match convention {
        EfficiencyConvention::RawOverPrepared => key.len(),
        EfficiencyConvention::FinalOverPrepared => undisclosed_bits(&key, check).len(),
    } as u64;
    EfficiencyReport {
        prepared_total,
        key_bits,
        convention,
        eta: key_bits as f64 / prepared_total as f64,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::ExperimentConfig;
    use crate::protocol::{run_protocol, ProtocolKind};
    use proptest::prelude::*;

    #[test]
    fn entropy_examples() {
        assert_eq!(binary_entropy(0.0).unwrap(), 0.0);
        assert_eq!(binary_entropy(1.0).unwrap(), 0.0);
        assert!((binary_entropy(0.5).unwrap() - 1.0).abs() < 1e-15);
        // −0.11·log₂0.11 − 0.89·log₂0.89
        let direct = 0.11 * (1.0f64 / 0.11).log2() + 0.89 * (1.0f64 / 0.89).log2();
        assert!((binary_entropy(0.11).unwrap() - direct).abs() < 1e-15);
        assert!((direct - 0.4999).abs() < 1e-4);
        assert!(binary_entropy(-0.1).is_err());
        assert!(binary_entropy(1.1).is_err());
    }

    #[test]
    fn key_rate_examples() {
        assert_eq!(key_rate_estimate(0.0, 0.0), 1.0);
        assert_eq!(key_rate_estimate(0.0, 1.0), 0.0);
        let h05 = binary_entropy(0.05).unwrap();
        assert!((h05 - 0.2864).abs() < 1e-4);
        assert!((key_rate_estimate(0.05, 0.2) - (0.8 - h05)).abs() < 1e-12);
        assert!((key_rate_estimate(0.05, 0.2) - 0.5136).abs() < 1e-4);
    }

    #[test]
    fn toeplitz_identity_fixture() {
        let (rows, cols) = (3, 6);
        let mut diagonals = vec![0; rows + cols - 1];
        diagonals[cols - 1] = 1;
        let t = ToeplitzHash::from_diagonals(rows, cols, diagonals).unwrap();
        let input = [1, 0, 1, 1, 0, 1];
        assert_eq!(t.apply(&input).unwrap(), vec![1, 0, 1]);
        assert!(ToeplitzHash::from_diagonals(3, 6, vec![0; 4]).is_err());
    }

    #[test]
    fn toeplitz_single_bit_difference() {
        let mut s = Stream::new(9, 0);
        let t = ToeplitzHash::random(5, 12, &mut s);
        let x: Vec<u8> = (0..12).map(|i| (i % 3 == 0) as u8).collect();
        for flip in 0..12 {
            let mut y = x.clone();
            y[flip] ^= 1;
            let (hx, hy) = (t.apply(&x).unwrap(), t.apply(&y).unwrap());
            for i in 0..5 {
                assert_eq!(hx[i] ^ hy[i], t.entry(i, flip));
            }
        }
    }

    #[test]
    fn amplification_edges() {
        let mut s = Stream::new(1, 0);
        let k = privacy_amplification(&[1, 0, 1], 0, &mut s).unwrap();
        assert!(k.bits.is_empty());
        assert!(matches!(
            privacy_amplification(&[1, 0], 3, &mut s),
            Err(PostprocessError::OutputTooLong { .. })
        ));
        let a = privacy_amplification(&[1, 0, 1, 1], 2, &mut Stream::new(4, 4)).unwrap();
        let b = privacy_amplification(&[1, 0, 1, 1], 2, &mut Stream::new(4, 4)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn empty_transcript_sifts_to_nothing() {
        let config = ExperimentConfig::new(ProtocolKind::Base, 1, 0);
        let mut t = run_protocol(&config).unwrap();
        t.rounds.retain(|r| r.case != Case::Case2);
        assert!(sift(&t).is_empty());
        let check = estimate_and_decide(&t, 0.02).unwrap();
        assert!(check.case2_disclosed_indices.is_empty());
        assert!(check.observed_qber().is_none());
    }

    #[test]
    fn no_case1_rounds_reports_absent_rate() {
        let config = ExperimentConfig::new(ProtocolKind::Base, 2, 3);
        let mut t = run_protocol(&config).unwrap();
        t.rounds.retain(|r| r.case != Case::Case1);
        let check = estimate_and_decide(&t, 0.02).unwrap();
        assert_eq!(check.case1_error_rate, None);
        assert!(!check.abort);
        assert!(estimate_and_decide(&t, 1.5).is_err());
    }

    #[test]
    fn disclosure_is_distinct_and_removed() {
        let config = ExperimentConfig::new(ProtocolKind::Improved, 50, 12);
        let t = run_protocol(&config).unwrap();
        let key = sift(&t);
        let check = estimate_and_decide(&t, 0.02).unwrap();
        let distinct: HashSet<_> = check.case2_disclosed_indices.iter().collect();
        assert_eq!(distinct.len(), check.case2_disclosed_indices.len());
        assert_eq!(check.case2_disclosed_indices.len(), key.len() / 2);
        let remaining = undisclosed_bits(&key, &check);
        assert_eq!(remaining.len(), key.len() - check.case2_disclosed_indices.len());
        let eff = qubit_efficiency(&t, &check, EfficiencyConvention::FinalOverPrepared);
        assert_eq!(eff.key_bits as usize, remaining.len());
    }

    proptest! {
        #[test]
        fn amplification_is_linear(
            x in prop::collection::vec(0u8..2, 1..40),
            y_seed in any::<u64>(),
            out_frac in 0.0f64..1.0,
            seed in any::<u64>(),
        ) {
            let mut ys = Stream::new(y_seed, 0);
            let y: Vec<u8> = x.iter().map(|_| ys.bit()).collect();
            let xy: Vec<u8> = x.iter().zip(&y).map(|(a, b)| a ^ b).collect();
            let out = (out_frac * x.len() as f64) as usize;
            let pa = |v: &[u8]| privacy_amplification(v, out, &mut Stream::new(seed, 7)).unwrap().bits;
            let lhs = pa(&xy);
            let rhs: Vec<u8> = pa(&x).iter().zip(pa(&y)).map(|(a, b)| a ^ b).collect();
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn key_rate_is_nonincreasing(q in 0.0f64..0.5, dq in 0.0f64..0.5, e in 0.0f64..1.0, de in 0.0f64..1.0) {
            let q2 = (q + dq).min(0.5);
            prop_assert!(key_rate_estimate(q2, e) <= key_rate_estimate(q, e) + 1e-15);
            prop_assert!(key_rate_estimate(q, e + de) <= key_rate_estimate(q, e) + 1e-15);
        }
    }
}
