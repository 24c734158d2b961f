//! Round engines for the three protocol variants.
//!
//! * `Base`: the mediator sends `|+⟩` to Alice, who reflects it or
//!   measure-resends it in Z; Bob optionally applies H and measures in Z.
//! * `Improved`: as `Base`, but Bob optionally applies H, then optionally
//!   σ_Z, and reflects the qubit to the mediator, who measures in X and
//!   publishes the result.
//! * `KrawecRef`: the mediator sends one half of `|Φ+⟩` to each party; each
//!   reflects or measure-resends, and the mediator announces `−1` when its
//!   Bell measurement gives `|Φ−⟩` and `+1` otherwise.
//!
//! Party choices are fair coins. The engine never aborts; every round is
//! recorded and abort decisions are left to post-processing.

use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::{eve_conditional_states, AttackError, AttackModel, EveTarget, Leg, Violation};
use crate::config::ExperimentConfig;
use crate::quantum::{
    apply_gate, basis_state, measure, z_state, Basis, Gate, HelstromMeasurement, QuantumError, StateLabel, StateVector,
};
use crate::rng::Stream;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProtocolKind {
    Base,
    Improved,
    #[serde(rename = "krawec")]
    KrawecRef,
}

impl ProtocolKind {
    pub const ALL: [ProtocolKind; 3] = [ProtocolKind::Base, ProtocolKind::Improved, ProtocolKind::KrawecRef];
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ProtocolKind::Base => "base",
            ProtocolKind::Improved => "improved",
            ProtocolKind::KrawecRef => "krawec",
        })
    }
}

#[derive(Debug, Error)]
pub enum ProtocolError {
    #[error("attack not allowed for the {kind} protocol: {}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Attack {
        kind: ProtocolKind,
        violations: Vec<Violation>,
    },
    #[error("n must be at least 1")]
    NoRounds,
    #[error(transparent)]
    Adversary(#[from] AttackError),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartyAction {
    Reflect,
    MeasureResend,
}

/// What a reflect/measure-resend party did with its qubit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AliceChoice {
    pub action: PartyAction,
    /// Z-basis result; present exactly when `action` is `MeasureResend`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub measured_bit: Option<u8>,
}

impl AliceChoice {
    pub fn reflect() -> Self {
        Self {
            action: PartyAction::Reflect,
            measured_bit: None,
        }
    }

    pub fn measure_resend(bit: u8) -> Self {
        Self {
            action: PartyAction::MeasureResend,
            measured_bit: Some(bit),
        }
    }

    pub fn measures(&self) -> bool {
        self.action == PartyAction::MeasureResend
    }
}

/// Bob's operations; the variant follows the protocol kind.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "snake_case")]
pub enum BobChoice {
    Base {
        hadamard: bool,
        measured_bit: u8,
    },
    Improved {
        hadamard: bool,
        sigma_z: bool,
    },
    /// Bob is a reflect/measure-resend party in the reference protocol.
    Krawec {
        action: PartyAction,
        measured_bit: Option<u8>,
    },
}

impl BobChoice {
    pub fn hadamard(&self) -> bool {
        match self {
            BobChoice::Base { hadamard, .. } | BobChoice::Improved { hadamard, .. } => *hadamard,
            BobChoice::Krawec { .. } => false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Case {
    Case1,
    Case2,
    Case3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XOutcome {
    Plus,
    Minus,
}

impl XOutcome {
    fn from_index(index: usize) -> Self {
        if index == 0 {
            XOutcome::Plus
        } else {
            XOutcome::Minus
        }
    }
}

impl fmt::Display for XOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            XOutcome::Plus => "+",
            XOutcome::Minus => "-",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BellOutcome {
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl BellOutcome {
    fn from_index(index: usize) -> Self {
        [
            BellOutcome::PhiPlus,
            BellOutcome::PhiMinus,
            BellOutcome::PsiPlus,
            BellOutcome::PsiMinus,
        ][index]
    }
}

/// Result the mediator announces at the end of a round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TpResult {
    /// X-basis outcome published in the improved protocol.
    XBasis(XOutcome),
    /// `+1` / `−1` message of the reference protocol.
    Message(i8),
}

/// Both parties' candidate key bits in a round they treat as a key round.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct KeyBits {
    pub alice: u8,
    pub bob: u8,
}

/// Eve's side of a round.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EveRecord {
    pub round_index: u64,
    /// Final pure ancilla state, `[re, im]` per amplitude (collective attacks).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ancilla: Option<Vec<[f64; 2]>>,
    /// Intercept-resend measurement outcome.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub intercepted: Option<u8>,
    /// Eve's guess of the round's key bit, on key rounds where her target is modeled.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub guess: Option<u8>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round_index: u64,
    pub kind: ProtocolKind,
    pub alice: AliceChoice,
    pub bob: BobChoice,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub tp_result: Option<TpResult>,
    pub case: Case,
    /// Only meaningful for Case 1; always false otherwise.
    pub check_error: bool,
    /// Present on rounds the parties keep as key candidates.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub key_bits: Option<KeyBits>,
    /// Present when `key_bits` agree.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub shared_bit: Option<u8>,
    /// Qubits freshly prepared this round by all parties.
    pub prepared_count: u32,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eve: Option<EveRecord>,
}

impl RoundRecord {
    /// Bit Bob measured, for base-protocol rounds.
    pub fn bob_measured_bit(&self) -> Option<u8> {
        match self.bob {
            BobChoice::Base { measured_bit, .. } => Some(measured_bit),
            BobChoice::Krawec { measured_bit, .. } => measured_bit,
            BobChoice::Improved { .. } => None,
        }
    }
}

pub fn classify_case(kind: ProtocolKind, alice: &AliceChoice, bob: &BobChoice) -> Case {
    let alice_mr = alice.measures();
    let (case1, case2) = match (kind, bob) {
        (ProtocolKind::Base, _) => (!alice_mr && bob.hadamard(), alice_mr && !bob.hadamard()),
        (ProtocolKind::Improved, _) => (!alice_mr && !bob.hadamard(), alice_mr && bob.hadamard()),
        (ProtocolKind::KrawecRef, BobChoice::Krawec { action, .. }) => {
            let bob_mr = *action == PartyAction::MeasureResend;
            (!alice_mr && !bob_mr, alice_mr && bob_mr)
        }
        (ProtocolKind::KrawecRef, _) => (false, false),
    };
    if case1 {
        Case::Case1
    } else if case2 {
        Case::Case2
    } else {
        Case::Case3
    }
}

/// Key bit from a base-protocol Case 2 round; absent on mismatch.
pub fn shared_bit_base(alice_bit: u8, bob_bit: u8) -> Option<u8> {
    (alice_bit == bob_bit).then_some(alice_bit)
}

/// Alice's key bit and her inference of Bob's σ_Z choice from her Z result
/// and the published X outcome. The bit is 0 exactly when σ_Z was applied.
pub fn shared_bit_improved(alice_bit: u8, tp_x_result: XOutcome) -> (u8, bool) {
    let sigma_z = matches!((alice_bit, tp_x_result), (0, XOutcome::Minus) | (1, XOutcome::Plus));
    (u8::from(!sigma_z), sigma_z)
}

/// Bob's Case 1 check in the improved protocol: the mediator should have
/// seen `|−⟩` if σ_Z was applied and `|+⟩` otherwise.
pub fn check_case1_improved(bob_sigma_z: bool, tp_x_result: XOutcome) -> bool {
    let expected = if bob_sigma_z { XOutcome::Minus } else { XOutcome::Plus };
    tp_x_result != expected
}

pub fn krawec_tp_message(bell_outcome: BellOutcome) -> i8 {
    if bell_outcome == BellOutcome::PhiMinus {
        -1
    } else {
        1
    }
}

/// Fair-coin decisions for one round, drawn before any measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decisions {
    pub alice_measure_resend: bool,
    /// Base/Improved: Hadamard. Krawec: measure-resend.
    pub bob_primary: bool,
    /// Improved only: σ_Z.
    pub bob_sigma_z: bool,
}

impl Decisions {
    pub fn draw(kind: ProtocolKind, stream: &mut Stream) -> Self {
        let alice_measure_resend = stream.coin();
        let bob_primary = stream.coin();
        let bob_sigma_z = kind == ProtocolKind::Improved && stream.coin();
        Self {
            alice_measure_resend,
            bob_primary,
            bob_sigma_z,
        }
    }
}

/// Precomputed per-experiment round simulator.
#[derive(Debug, Clone)]
pub struct RoundEngine {
    kind: ProtocolKind,
    attack: AttackModel,
    eve_measurement: Option<HelstromMeasurement>,
}

struct Path {
    state: StateVector,
    intercepted: Option<u8>,
    prepared: u32,
}

impl Path {
    fn attack_on(
        &mut self,
        attack: &AttackModel,
        leg: Leg,
        target: usize,
        stream: &mut Stream,
    ) -> Result<(), ProtocolError> {
        if attack.location == leg && !attack.is_none() {
            let (state, eve) = attack.apply(&self.state, target, stream)?;
            self.state = state;
            self.intercepted = self.intercepted.or(eve);
        }
        Ok(())
    }

    /// Z measurement of `target` followed by re-preparation of the result.
    fn measure_resend(&mut self, target: usize, stream: &mut Stream) -> Result<u8, ProtocolError> {
        let m = measure(&self.state, &Basis::z(), &[target], stream.uniform())?;
        let bit = m.index as u8;
        self.state = m.post_state.insert(target, &z_state(bit))?;
        self.prepared += 1;
        Ok(bit)
    }
}

impl RoundEngine {
    pub fn new(kind: ProtocolKind, attack: AttackModel) -> Result<Self, ProtocolError> {
        attack
            .validate(kind)
            .map_err(|violations| ProtocolError::Attack { kind, violations })?;
        let eve_measurement = match EveTarget::for_attack(&attack, kind) {
            Some(target) if attack.is_collective() => {
                let ens = eve_conditional_states(&attack, target)?;
                Some(HelstromMeasurement::new(&ens.rho0, &ens.rho1, ens.p0)?)
            }
            _ => None,
        };
        Ok(Self {
            kind,
            attack,
            eve_measurement,
        })
    }

    pub fn kind(&self) -> ProtocolKind {
        self.kind
    }

    pub fn attack(&self) -> &AttackModel {
        &self.attack
    }

    /// Simulates round `round_index` on its own stream of `seed`.
    pub fn run_round(&self, seed: u64, round_index: u64) -> Result<RoundRecord, ProtocolError> {
        let mut stream = Stream::for_round(seed, round_index);
        let decisions = Decisions::draw(self.kind, &mut stream);
        self.run_round_with(round_index, decisions, &mut stream)
    }

    /// Simulates one round with fixed party decisions.
    pub fn run_round_with(
        &self,
        round_index: u64,
        decisions: Decisions,
        stream: &mut Stream,
    ) -> Result<RoundRecord, ProtocolError> {
        match self.kind {
            ProtocolKind::Base | ProtocolKind::Improved => self.mediated_round(round_index, decisions, stream),
            ProtocolKind::KrawecRef => self.krawec_round(round_index, decisions, stream),
        }
    }

    fn mediated_round(
        &self,
        round_index: u64,
        d: Decisions,
        stream: &mut Stream,
    ) -> Result<RoundRecord, ProtocolError> {
        let mut path = Path {
            state: basis_state(StateLabel::Plus),
            intercepted: None,
            prepared: 1,
        };
        path.attack_on(&self.attack, Leg::TpToAlice, 0, stream)?;
        let alice = if d.alice_measure_resend {
            AliceChoice::measure_resend(path.measure_resend(0, stream)?)
        } else {
            AliceChoice::reflect()
        };
        path.attack_on(&self.attack, Leg::AliceToBob, 0, stream)?;
        if d.bob_primary {
            path.state = apply_gate(&path.state, &Gate::hadamard(), 0)?;
        }

        let (bob, tp_result, remainder) = if self.kind == ProtocolKind::Base {
            let m = measure(&path.state, &Basis::z(), &[0], stream.uniform())?;
            let bob = BobChoice::Base {
                hadamard: d.bob_primary,
                measured_bit: m.index as u8,
            };
            (bob, None, m.post_state)
        } else {
            if d.bob_sigma_z {
                path.state = apply_gate(&path.state, &Gate::sigma_z(), 0)?;
            }
            path.attack_on(&self.attack, Leg::BobToTp, 0, stream)?;
            let m = measure(&path.state, &Basis::x(), &[0], stream.uniform())?;
            let bob = BobChoice::Improved {
                hadamard: d.bob_primary,
                sigma_z: d.bob_sigma_z,
            };
            (bob, Some(XOutcome::from_index(m.index)), m.post_state)
        };

        let case = classify_case(self.kind, &alice, &bob);
        let mut check_error = false;
        let mut key_bits = None;
        match (case, bob, tp_result) {
            (Case::Case1, BobChoice::Base { measured_bit, .. }, _) => check_error = measured_bit != 0,
            (Case::Case1, BobChoice::Improved { sigma_z, .. }, Some(x)) => {
                check_error = check_case1_improved(sigma_z, x)
            }
            (Case::Case2, BobChoice::Base { measured_bit, .. }, _) => {
                key_bits = alice.measured_bit.map(|a| KeyBits {
                    alice: a,
                    bob: measured_bit,
                })
            }
            (Case::Case2, BobChoice::Improved { sigma_z, .. }, Some(x)) => {
                key_bits = alice.measured_bit.map(|a| KeyBits {
                    alice: shared_bit_improved(a, x).0,
                    bob: u8::from(!sigma_z),
                })
            }
            _ => {}
        }
        let shared_bit = key_bits.and_then(|k| shared_bit_base(k.alice, k.bob));

        let eve = self.eve_record(
            round_index,
            &path,
            &remainder,
            &alice,
            tp_result,
            key_bits.is_some(),
            stream,
        );
        Ok(RoundRecord {
            round_index,
            kind: self.kind,
            alice,
            bob,
            tp_result: tp_result.map(TpResult::XBasis),
            case,
            check_error,
            key_bits,
            shared_bit,
            prepared_count: path.prepared,
            eve,
        })
    }

    fn krawec_round(&self, round_index: u64, d: Decisions, stream: &mut Stream) -> Result<RoundRecord, ProtocolError> {
        // Subsystem 0 travels via Alice, subsystem 1 via Bob.
        let mut path = Path {
            state: basis_state(StateLabel::PhiPlus),
            intercepted: None,
            prepared: 2,
        };
        path.attack_on(&self.attack, Leg::TpToAlice, 0, stream)?;
        let alice = if d.alice_measure_resend {
            AliceChoice::measure_resend(path.measure_resend(0, stream)?)
        } else {
            AliceChoice::reflect()
        };
        let (action, bob_bit) = if d.bob_primary {
            (PartyAction::MeasureResend, Some(path.measure_resend(1, stream)?))
        } else {
            (PartyAction::Reflect, None)
        };
        let bob = BobChoice::Krawec {
            action,
            measured_bit: bob_bit,
        };
        path.attack_on(&self.attack, Leg::AliceToBob, 0, stream)?;
        let m = measure(&path.state, &Basis::bell(), &[0, 1], stream.uniform())?;
        let message = krawec_tp_message(BellOutcome::from_index(m.index));

        let case = classify_case(self.kind, &alice, &bob);
        let check_error = case == Case::Case1 && message == -1;
        let key_bits = match (case, alice.measured_bit, bob_bit) {
            (Case::Case2, Some(a), Some(b)) if message == -1 => Some(KeyBits { alice: a, bob: b }),
            _ => None,
        };
        let shared_bit = key_bits.and_then(|k| shared_bit_base(k.alice, k.bob));
        let eve = self.eve_record(round_index, &path, &m.post_state, &alice, None, false, stream);
        Ok(RoundRecord {
            round_index,
            kind: self.kind,
            alice,
            bob,
            tp_result: Some(TpResult::Message(message)),
            case,
            check_error,
            key_bits,
            shared_bit,
            prepared_count: path.prepared,
            eve,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn eve_record(
        &self,
        round_index: u64,
        path: &Path,
        remainder: &StateVector,
        alice: &AliceChoice,
        tp_x: Option<XOutcome>,
        key_round: bool,
        stream: &mut Stream,
    ) -> Option<EveRecord> {
        if self.attack.is_none() {
            return None;
        }
        let collective = self.attack.is_collective();
        let ancilla = collective.then(|| remainder.amps().iter().map(|a| [a.re, a.im]).collect());
        let mut guess_alice = None;
        if key_round && alice.measures() {
            if let Some(helstrom) = &self.eve_measurement {
                guess_alice = Some(helstrom.guess(remainder.amps(), stream.uniform()));
            } else if !collective && self.attack.location != Leg::BobToTp {
                guess_alice = path.intercepted;
            }
        }
        let guess = guess_alice.map(|g| match tp_x {
            Some(x) => shared_bit_improved(g, x).0,
            None => g,
        });
        Some(EveRecord {
            round_index,
            ancilla,
            intercepted: path.intercepted,
            guess,
        })
    }
}

/// One round with a fresh engine; see [`RoundEngine::run_round`].
pub fn run_round(
    kind: ProtocolKind,
    round_index: u64,
    attack: &AttackModel,
    seed: u64,
) -> Result<RoundRecord, ProtocolError> {
    RoundEngine::new(kind, attack.clone())?.run_round(seed, round_index)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Party {
    Tp,
    Alice,
    Bob,
    /// Broadcast to both classical parties.
    Public,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Payload {
    /// A party announces its operation for a round.
    Operation { round: u64, action: PartyAction },
    /// Bob announces whether he applied H.
    Hadamard { round: u64, applied: bool },
    /// Bob discloses his Case 1 measurement in the base protocol.
    Case1Result { round: u64, bit: u8 },
    /// Bob reports his Case 1 check in the improved protocol.
    Case1Check { round: u64, pass: bool },
    /// Mediator's published X-basis outcome.
    TpPublication { round: u64, outcome: XOutcome },
    /// Mediator's `+1` / `−1` message.
    TpMessage { round: u64, message: i8 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassicalMessage {
    pub sender: Party,
    pub receiver: Party,
    pub payload: Payload,
}

impl ClassicalMessage {
    fn new(sender: Party, receiver: Party, payload: Payload) -> Self {
        Self {
            sender,
            receiver,
            payload,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub config: ExperimentConfig,
    pub rounds: Vec<RoundRecord>,
    pub classical_messages: Vec<ClassicalMessage>,
}

/// Classical traffic in protocol step order: mediator announcements for all
/// rounds first, then the per-round discussion between Alice and Bob.
fn classical_log(kind: ProtocolKind, rounds: &[RoundRecord]) -> Vec<ClassicalMessage> {
    let mut log = Vec::with_capacity(rounds.len() * 4);
    for r in rounds {
        match r.tp_result {
            Some(TpResult::XBasis(outcome)) => log.push(ClassicalMessage::new(
                Party::Tp,
                Party::Public,
                Payload::TpPublication {
                    round: r.round_index,
                    outcome,
                },
            )),
            Some(TpResult::Message(message)) => log.push(ClassicalMessage::new(
                Party::Tp,
                Party::Public,
                Payload::TpMessage {
                    round: r.round_index,
                    message,
                },
            )),
            None => {}
        }
    }
    for r in rounds {
        let round = r.round_index;
        log.push(ClassicalMessage::new(
            Party::Alice,
            Party::Bob,
            Payload::Operation {
                round,
                action: r.alice.action,
            },
        ));
        match (kind, r.bob) {
            (ProtocolKind::KrawecRef, BobChoice::Krawec { action, .. }) => log.push(ClassicalMessage::new(
                Party::Bob,
                Party::Alice,
                Payload::Operation { round, action },
            )),
            (_, bob) => log.push(ClassicalMessage::new(
                Party::Bob,
                Party::Alice,
                Payload::Hadamard {
                    round,
                    applied: bob.hadamard(),
                },
            )),
        }
        if r.case == Case::Case1 {
            match r.bob {
                BobChoice::Base { measured_bit, .. } => log.push(ClassicalMessage::new(
                    Party::Bob,
                    Party::Alice,
                    Payload::Case1Result {
                        round,
                        bit: measured_bit,
                    },
                )),
                BobChoice::Improved { .. } => log.push(ClassicalMessage::new(
                    Party::Bob,
                    Party::Alice,
                    Payload::Case1Check {
                        round,
                        pass: !r.check_error,
                    },
                )),
                BobChoice::Krawec { .. } => {}
            }
        }
    }
    log
}

/// Runs all `8n` rounds of `config`. Rounds execute on the current rayon
/// pool; the result does not depend on how many workers it has.
pub fn run_protocol(config: &ExperimentConfig) -> Result<Transcript, ProtocolError> {
    if config.n == 0 {
        return Err(ProtocolError::NoRounds);
    }
    let attack = config.attack.clone().unwrap_or_else(AttackModel::none);
    let engine = RoundEngine::new(config.protocol, attack)?;
    let rounds = (0..config.rounds())
        .into_par_iter()
        .map(|i| engine.run_round(config.seed, i))
        .collect::<Result<Vec<_>, _>>()?;
    let classical_messages = classical_log(config.protocol, &rounds);
    Ok(Transcript {
        config: config.clone(),
        rounds,
        classical_messages,
    })
}
