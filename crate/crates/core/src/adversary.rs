//! Attack models on the quantum channel legs.
//!
//! Collective attacks are parameterized by the unnormalized ancilla vectors
//! directly: for Strategy 1, `u = a₀|e₀⟩` and `w = a₁|e₁⟩` with
//! `U|+⟩|E⟩ = |+⟩u + |−⟩w`; for Strategy 2, `U|0⟩|E⟩ = |0⟩v0 + |1⟩v1` and
//! `U|1⟩|E⟩ = |0⟩w0 + |1⟩w1`. No orthogonality between ancilla states is
//! assumed, which is what makes the zero-error family non-trivial.

use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::protocol::ProtocolKind;
use crate::quantum::{
    self, apply_isometry, helstrom_success, inner, measure, partial_trace, vn_entropy, Basis, DensityMatrix,
    QuantumError, StateLabel, StateVector, C64, TOL,
};
use crate::rng::Stream;

/// Quantum channel leg an attack sits on.
///
/// For the Krawec reference protocol, `TpToAlice` is the mediator's particle
/// on its way to Alice and `AliceToBob` is Alice's particle on its way back
/// to the mediator (the leg carrying what Alice sends onward).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Leg {
    #[default]
    TpToAlice,
    AliceToBob,
    BobToTp,
}

impl fmt::Display for Leg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Leg::TpToAlice => "tp_to_alice",
            Leg::AliceToBob => "alice_to_bob",
            Leg::BobToTp => "bob_to_tp",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MeasureBasis {
    Z,
    X,
}

impl MeasureBasis {
    pub fn basis(self) -> Basis {
        match self {
            MeasureBasis::Z => Basis::z(),
            MeasureBasis::X => Basis::x(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Attack {
    None,
    InterceptResend {
        basis: MeasureBasis,
    },
    CollectiveS1 {
        u: [C64; 2],
        w: [C64; 2],
    },
    CollectiveS2 {
        v0: [C64; 4],
        v1: [C64; 4],
        w0: [C64; 4],
        w1: [C64; 4],
    },
}

/// An attack and the leg it is applied on. One location per experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "AttackSpec", into = "AttackSpec")]
pub struct AttackModel {
    pub attack: Attack,
    pub location: Leg,
}

/// A violated attack constraint.
#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub constraint: String,
    /// Size of the violation, when the constraint is numeric.
    pub residual: Option<f64>,
}

impl Violation {
    fn numeric(constraint: impl Into<String>, residual: f64) -> Self {
        Self {
            constraint: constraint.into(),
            residual: Some(residual),
        }
    }

    fn structural(constraint: impl Into<String>) -> Self {
        Self {
            constraint: constraint.into(),
            residual: None,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.residual {
            Some(r) => write!(f, "{} (residual {r:.3e})", self.constraint),
            None => f.write_str(&self.constraint),
        }
    }
}

fn describe(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AttackError {
    #[error("invalid attack: {}", describe(.0))]
    Invalid(Vec<Violation>),
    #[error("Strategy 1 is only defined on a |+⟩ input")]
    InputNotPlus,
    #[error("Eve's conditional states are only defined for collective attacks")]
    NotCollective,
    #[error("Eve target {target:?} is not defined for this attack")]
    UnsupportedTarget { target: EveTarget },
    #[error("attack specification: {0}")]
    Spec(String),
    #[error(transparent)]
    Quantum(#[from] QuantumError),
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

fn combine<const N: usize>(terms: &[(f64, &[C64; N])]) -> [C64; N] {
    let mut out = [C64::new(0.0, 0.0); N];
    for (coef, v) in terms {
        for (o, x) in out.iter_mut().zip(v.iter()) {
            *o += x * *coef;
        }
    }
    out
}

impl AttackModel {
    pub fn none() -> Self {
        Self {
            attack: Attack::None,
            location: Leg::TpToAlice,
        }
    }

    pub fn intercept_resend(basis: MeasureBasis, location: Leg) -> Self {
        Self {
            attack: Attack::InterceptResend { basis },
            location,
        }
    }

    /// Strategy 1 on the mediator-to-Alice leg.
    pub fn collective_s1(u: [C64; 2], w: [C64; 2]) -> Self {
        Self {
            attack: Attack::CollectiveS1 { u, w },
            location: Leg::TpToAlice,
        }
    }

    /// One-parameter Strategy 1 family `u = (cos θ, 0)`, `w = (0, sin θ)`.
    pub fn s1_theta(theta: f64) -> Self {
        let zero = C64::new(0.0, 0.0);
        Self::collective_s1([C64::new(theta.cos(), 0.0), zero], [zero, C64::new(theta.sin(), 0.0)])
    }

    pub fn collective_s2(v0: [C64; 4], v1: [C64; 4], w0: [C64; 4], w1: [C64; 4], location: Leg) -> Self {
        Self {
            attack: Attack::CollectiveS2 { v0, v1, w0, w1 },
            location,
        }
    }

    pub fn is_none(&self) -> bool {
        matches!(self.attack, Attack::None)
    }

    pub fn is_collective(&self) -> bool {
        matches!(self.attack, Attack::CollectiveS1 { .. } | Attack::CollectiveS2 { .. })
    }

    /// Checks the norm and isometry constraints and leg compatibility with
    /// `kind`.
    pub fn validate(&self, kind: ProtocolKind) -> Result<(), Vec<Violation>> {
        let mut violations = Vec::new();
        if self.location == Leg::BobToTp && kind != ProtocolKind::Improved && !self.is_none() {
            violations.push(Violation::structural(format!(
                "leg bob_to_tp does not exist in the {kind} protocol"
            )));
        }
        match &self.attack {
            Attack::None | Attack::InterceptResend { .. } => {}
            Attack::CollectiveS1 { u, w } => {
                check_finite(&[u.as_slice(), w.as_slice()], &mut violations);
                let norm = norm_sqr(u) + norm_sqr(w);
                if (norm - 1.0).abs() > TOL {
                    violations.push(Violation::numeric("‖u‖² + ‖w‖² = 1", (norm - 1.0).abs()));
                }
                if self.location != Leg::TpToAlice || kind == ProtocolKind::KrawecRef {
                    violations.push(Violation::structural(format!(
                        "Strategy 1 needs a |+⟩ input; leg {} of the {kind} protocol does not carry one",
                        self.location
                    )));
                }
            }
            Attack::CollectiveS2 { v0, v1, w0, w1 } => {
                check_finite(
                    &[v0.as_slice(), v1.as_slice(), w0.as_slice(), w1.as_slice()],
                    &mut violations,
                );
                let nv = norm_sqr(v0) + norm_sqr(v1);
                if (nv - 1.0).abs() > TOL {
                    violations.push(Violation::numeric("‖v0‖² + ‖v1‖² = 1", (nv - 1.0).abs()));
                }
                let nw = norm_sqr(w0) + norm_sqr(w1);
                if (nw - 1.0).abs() > TOL {
                    violations.push(Violation::numeric("‖w0‖² + ‖w1‖² = 1", (nw - 1.0).abs()));
                }
                let cross = inner(v0, w0) + inner(v1, w1);
                if cross.norm() > TOL {
                    violations.push(Violation::numeric("⟨v0,w0⟩ + ⟨v1,w1⟩ = 0", cross.norm()));
                }
            }
        }
        if violations.is_empty() {
            Ok(())
        } else {
            Err(violations)
        }
    }

    /// Applies the attack to subsystem `target` of `state`.
    ///
    /// Collective attacks append a new ancilla subsystem at the end.
    /// Intercept-resend returns Eve's outcome index in the configured basis.
    pub fn apply(
        &self,
        state: &StateVector,
        target: usize,
        stream: &mut Stream,
    ) -> Result<(StateVector, Option<u8>), AttackError> {
        match &self.attack {
            Attack::None => Ok((state.clone(), None)),
            Attack::InterceptResend { basis } => {
                let basis = basis.basis();
                let m = measure(state, &basis, &[target], stream.uniform())?;
                let resent = m.post_state.insert(target, basis.state(m.index))?;
                Ok((resent, Some(m.index as u8)))
            }
            Attack::CollectiveS1 { u, w } => {
                let plus = quantum::basis_state(StateLabel::Plus);
                let reduced = partial_trace(state, &[target])?;
                if (reduced.expectation(plus.amps()) - 1.0).abs() > TOL {
                    return Err(AttackError::InputNotPlus);
                }
                // Any linear map with V|0⟩ = V|1⟩ = (|+⟩u + |−⟩w)/√2 acts as
                // U|+⟩ = |+⟩u + |−⟩w; other inputs are rejected above.
                let h = FRAC_1_SQRT_2;
                let image: Vec<C64> = (0..2)
                    .flat_map(|q| {
                        let sign = if q == 0 { 1.0 } else { -1.0 };
                        (0..2).map(move |a| (u[a] + w[a] * sign) * h * h)
                    })
                    .collect();
                let out = apply_isometry(state, target, &[image.clone(), image], 2)?;
                Ok((out, None))
            }
            Attack::CollectiveS2 { v0, v1, w0, w1 } => {
                let col0: Vec<C64> = v0.iter().chain(v1.iter()).copied().collect();
                let col1: Vec<C64> = w0.iter().chain(w1.iter()).copied().collect();
                Ok((apply_isometry(state, target, &[col0, col1], 4)?, None))
            }
        }
    }

    /// Closed-form probability that a Case 1 round is flagged as an error.
    pub fn predicted_case1_error(&self, kind: ProtocolKind) -> f64 {
        match &self.attack {
            Attack::None => 0.0,
            Attack::InterceptResend { basis: MeasureBasis::Z } => 0.5,
            Attack::InterceptResend { basis: MeasureBasis::X } => 0.0,
            Attack::CollectiveS1 { w, .. } => norm_sqr(w),
            Attack::CollectiveS2 { v0, v1, w0, w1 } => {
                let minus_branch =
                    |a: f64, b: f64, c: f64| norm_sqr(&combine(&[(1.0, v0), (a, v1), (b, w0), (c, w1)])) / 4.0;
                match (kind, self.location) {
                    (ProtocolKind::KrawecRef, _) => norm_sqr(&combine(&[(1.0, v0), (-1.0, w1)])) / 4.0,
                    // Bob's σ_Z choice decides whether |+⟩ or |−⟩ enters U.
                    (_, Leg::BobToTp) => 0.5 * (minus_branch(-1.0, 1.0, -1.0) + minus_branch(1.0, -1.0, -1.0)),
                    _ => minus_branch(-1.0, 1.0, -1.0),
                }
            }
        }
    }
}

fn check_finite(vectors: &[&[C64]], violations: &mut Vec<Violation>) {
    if vectors
        .iter()
        .flat_map(|v| v.iter())
        .any(|a| !a.re.is_finite() || !a.im.is_finite())
    {
        violations.push(Violation::structural("all amplitudes finite"));
    }
}

/// Free-function form of [`AttackModel::validate`].
pub fn validate_attack(attack: &AttackModel, kind: ProtocolKind) -> Result<(), Vec<Violation>> {
    attack.validate(kind)
}

/// Which classical value Eve's ancilla is measured against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveTarget {
    /// Alice's Z-basis result after the attacked qubit reached her.
    AliceMeasuredBit,
    /// The Z-basis state that entered the attacked leg.
    SentBit,
}

impl EveTarget {
    /// The target matching where the attack sits, when one is modeled.
    pub fn for_attack(attack: &AttackModel, kind: ProtocolKind) -> Option<Self> {
        if kind == ProtocolKind::KrawecRef {
            return None;
        }
        match (&attack.attack, attack.location) {
            (Attack::CollectiveS1 { .. } | Attack::CollectiveS2 { .. }, Leg::TpToAlice) => {
                Some(EveTarget::AliceMeasuredBit)
            }
            (Attack::CollectiveS2 { .. }, Leg::AliceToBob) => Some(EveTarget::SentBit),
            _ => None,
        }
    }
}

/// Eve's ancilla states conditioned on the two values of her target bit.
#[derive(Debug, Clone, PartialEq)]
pub struct EveEnsemble {
    pub p0: f64,
    pub rho0: DensityMatrix,
    pub rho1: DensityMatrix,
}

impl EveEnsemble {
    fn from_branches(branch0: &[C64], branch1: &[C64], p0: f64) -> Result<Self, AttackError> {
        let n0 = norm_sqr(branch0);
        let n1 = norm_sqr(branch1);
        // A branch that never occurs carries no information; mirror the other.
        let (rho0, rho1) = match (n0 > TOL, n1 > TOL) {
            (true, true) => (
                DensityMatrix::from_unnormalized(&[branch0])?,
                DensityMatrix::from_unnormalized(&[branch1])?,
            ),
            (true, false) => {
                let r = DensityMatrix::from_unnormalized(&[branch0])?;
                (r.clone(), r)
            }
            (false, true) => {
                let r = DensityMatrix::from_unnormalized(&[branch1])?;
                (r.clone(), r)
            }
            (false, false) => return Err(AttackError::InputNotPlus),
        };
        Ok(Self { p0, rho0, rho1 })
    }

    pub fn holevo(&self) -> Result<f64, AttackError> {
        holevo_info(&self.rho0, &self.rho1, self.p0)
    }

    pub fn helstrom(&self) -> Result<f64, AttackError> {
        Ok(helstrom_success(&self.rho0, &self.rho1, self.p0)?)
    }
}

/// Eve's conditional ancilla states for a collective attack.
pub fn eve_conditional_states(attack: &AttackModel, target: EveTarget) -> Result<EveEnsemble, AttackError> {
    match (&attack.attack, target) {
        (Attack::CollectiveS1 { u, w }, EveTarget::AliceMeasuredBit) => {
            let plus = combine(&[(1.0, u), (1.0, w)]);
            let minus = combine(&[(1.0, u), (-1.0, w)]);
            EveEnsemble::from_branches(&plus, &minus, norm_sqr(&plus) / 2.0)
        }
        (Attack::CollectiveS2 { v0, v1, w0, w1 }, EveTarget::AliceMeasuredBit) => {
            let b0 = combine(&[(1.0, v0), (1.0, w0)]);
            let b1 = combine(&[(1.0, v1), (1.0, w1)]);
            EveEnsemble::from_branches(&b0, &b1, norm_sqr(&b0) / 2.0)
        }
        (Attack::CollectiveS2 { v0, v1, w0, w1 }, EveTarget::SentBit) => Ok(EveEnsemble {
            p0: 0.5,
            rho0: DensityMatrix::from_unnormalized(&[v0, v1])?,
            rho1: DensityMatrix::from_unnormalized(&[w0, w1])?,
        }),
        (Attack::CollectiveS1 { .. }, _) => Err(AttackError::UnsupportedTarget { target }),
        _ => Err(AttackError::NotCollective),
    }
}

/// Holevo quantity of the binary ensemble `{(p0, ρ0), (1 − p0, ρ1)}`, in bits.
pub fn holevo_info(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<f64, AttackError> {
    let p1 = 1.0 - p0;
    let avg = DensityMatrix::mixture(&[(p0, rho0), (p1, rho1)])?;
    let chi = vn_entropy(&avg)? - p0 * vn_entropy(rho0)? - p1 * vn_entropy(rho1)?;
    Ok(chi.clamp(0.0, 1.0))
}

/// Eve's information about her target bit, for attacks where it is modeled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EveInformation {
    pub holevo_bits: f64,
    pub helstrom_success: f64,
}

/// Holevo and Helstrom figures for `attack` in `kind`, if the attack has a
/// modeled target. Intercept-resend is a classical channel to Eve: a Z
/// measurement reveals Alice's bit exactly and an X measurement reveals
/// nothing.
pub fn eve_information(attack: &AttackModel, kind: ProtocolKind) -> Result<Option<EveInformation>, AttackError> {
    let classical = |bits: f64, success: f64| {
        Ok(Some(EveInformation {
            holevo_bits: bits,
            helstrom_success: success,
        }))
    };
    match &attack.attack {
        Attack::None => classical(0.0, 0.5),
        Attack::InterceptResend { basis } => {
            if kind == ProtocolKind::KrawecRef || attack.location == Leg::BobToTp {
                return Ok(None);
            }
            match basis {
                MeasureBasis::Z => classical(1.0, 1.0),
                MeasureBasis::X => classical(0.0, 0.5),
            }
        }
        _ => match EveTarget::for_attack(attack, kind) {
            Some(target) => {
                let ens = eve_conditional_states(attack, target)?;
                Ok(Some(EveInformation {
                    holevo_bits: ens.holevo()?,
                    helstrom_success: ens.helstrom()?,
                }))
            }
            None => Ok(None),
        },
    }
}

/// Strategy 2 attack with `w0 = v1`, `w1 = v0`, which never disturbs Case 1.
pub fn make_undetectable_s2(v0: [C64; 4], v1: [C64; 4], location: Leg) -> Result<AttackModel, AttackError> {
    let mut violations = Vec::new();
    let norm = norm_sqr(&v0) + norm_sqr(&v1);
    if (norm - 1.0).abs() > TOL {
        violations.push(Violation::numeric("‖v0‖² + ‖v1‖² = 1", (norm - 1.0).abs()));
    }
    let re = inner(&v0, &v1).re;
    if re.abs() > TOL {
        violations.push(Violation::numeric("Re⟨v0,v1⟩ = 0", re.abs()));
    }
    if !violations.is_empty() {
        return Err(AttackError::Invalid(violations));
    }
    Ok(AttackModel::collective_s2(v0, v1, v1, v0, location))
}

fn random_vector<const N: usize>(stream: &mut Stream) -> [C64; N] {
    std::array::from_fn(|_| C64::new(2.0 * stream.uniform() - 1.0, 2.0 * stream.uniform() - 1.0))
}

fn scale<const N: usize>(v: &mut [C64; N], s: f64) {
    v.iter_mut().for_each(|a| *a *= s);
}

/// Samples a random Strategy 2 attack satisfying the isometry constraints.
pub fn random_s2(stream: &mut Stream, location: Leg) -> AttackModel {
    loop {
        let a: [C64; 8] = random_vector(stream);
        let b: [C64; 8] = random_vector(stream);
        let na = norm_sqr(&a).sqrt();
        if na < 1e-3 {
            continue;
        }
        let mut a = a;
        scale(&mut a, 1.0 / na);
        let proj = inner(&a, &b);
        let mut b2 = b;
        for (x, y) in b2.iter_mut().zip(a.iter()) {
            *x -= y * proj;
        }
        let nb = norm_sqr(&b2).sqrt();
        if nb < 1e-3 {
            continue;
        }
        scale(&mut b2, 1.0 / nb);
        let split = |v: &[C64; 8]| -> ([C64; 4], [C64; 4]) {
            (std::array::from_fn(|k| v[k]), std::array::from_fn(|k| v[k + 4]))
        };
        let (v0, v1) = split(&a);
        let (w0, w1) = split(&b2);
        return AttackModel::collective_s2(v0, v1, w0, w1, location);
    }
}

/// Samples a random attack from the zero-error Strategy 2 family.
pub fn random_undetectable_s2(stream: &mut Stream, location: Leg) -> AttackModel {
    loop {
        let v0: [C64; 4] = random_vector(stream);
        let mut v1: [C64; 4] = random_vector(stream);
        let n0 = norm_sqr(&v0);
        if n0 < 1e-6 {
            continue;
        }
        let t = inner(&v0, &v1).re / n0;
        for (x, y) in v1.iter_mut().zip(v0.iter()) {
            *x -= y * t;
        }
        let total = (n0 + norm_sqr(&v1)).sqrt();
        let (mut v0, mut v1) = (v0, v1);
        scale(&mut v0, 1.0 / total);
        scale(&mut v1, 1.0 / total);
        if let Ok(model) = make_undetectable_s2(v0, v1, location) {
            return model;
        }
    }
}

// Serialized form: {"kind": ..., "location": ..., "params": {...}}, complex
// numbers as [re, im].

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttackKindName {
    None,
    InterceptResend,
    CollectiveS1,
    CollectiveS2,
}

/// Wire form of an [`AttackModel`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AttackSpec {
    pub kind: AttackKindName,
    #[serde(default)]
    pub location: Leg,
    #[serde(default, skip_serializing_if = "Value::is_null")]
    pub params: Value,
}

type Pair = [f64; 2];

fn to_pairs<const N: usize>(v: &[C64; N]) -> [Pair; N] {
    v.map(|c| [c.re, c.im])
}

fn from_pairs<const N: usize>(v: [Pair; N]) -> [C64; N] {
    v.map(|[re, im]| C64::new(re, im))
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InterceptParams {
    basis: MeasureBasis,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum S1Params {
    Vectors { u: [Pair; 2], w: [Pair; 2] },
    Theta { theta: f64 },
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct S2Params {
    v0: [Pair; 4],
    v1: [Pair; 4],
    w0: [Pair; 4],
    w1: [Pair; 4],
}

fn parse_params<T: serde::de::DeserializeOwned>(kind: AttackKindName, params: Value) -> Result<T, AttackError> {
    serde_json::from_value(params).map_err(|e| AttackError::Spec(format!("{kind:?} params: {e}")))
}

impl TryFrom<AttackSpec> for AttackModel {
    type Error = AttackError;

    fn try_from(spec: AttackSpec) -> Result<Self, Self::Error> {
        let attack = match spec.kind {
            AttackKindName::None => Attack::None,
            AttackKindName::InterceptResend => {
                let p: InterceptParams = parse_params(spec.kind, spec.params)?;
                Attack::InterceptResend { basis: p.basis }
            }
            AttackKindName::CollectiveS1 => match parse_params(spec.kind, spec.params)? {
                S1Params::Vectors { u, w } => Attack::CollectiveS1 {
                    u: from_pairs(u),
                    w: from_pairs(w),
                },
                S1Params::Theta { theta } => AttackModel::s1_theta(theta).attack,
            },
            AttackKindName::CollectiveS2 => {
                let p: S2Params = parse_params(spec.kind, spec.params)?;
                Attack::CollectiveS2 {
                    v0: from_pairs(p.v0),
                    v1: from_pairs(p.v1),
                    w0: from_pairs(p.w0),
                    w1: from_pairs(p.w1),
                }
            }
        };
        Ok(AttackModel {
            attack,
            location: spec.location,
        })
    }
}

impl From<AttackModel> for AttackSpec {
    fn from(model: AttackModel) -> Self {
        let (kind, params) = match &model.attack {
            Attack::None => (AttackKindName::None, Value::Null),
            Attack::InterceptResend { basis } => {
                (AttackKindName::InterceptResend, serde_json::json!({ "basis": basis }))
            }
            Attack::CollectiveS1 { u, w } => (
                AttackKindName::CollectiveS1,
                serde_json::json!({ "u": to_pairs(u), "w": to_pairs(w) }),
            ),
            Attack::CollectiveS2 { v0, v1, w0, w1 } => (
                AttackKindName::CollectiveS2,
                serde_json::json!({
                    "v0": to_pairs(v0),
                    "v1": to_pairs(v1),
                    "w0": to_pairs(w0),
                    "w1": to_pairs(w1),
                }),
            ),
        };
        AttackSpec {
            kind,
            location: model.location,
            params,
        }
    }
}
