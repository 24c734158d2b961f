//! Dense statevector mathematics for small systems of qubits and
//! four-level ancillas.
//!
//! Subsystems are stored in row-major order: subsystem 0 is the most
//! significant digit of the flat amplitude index. Total dimension is capped
//! at [`MAX_TOTAL_DIM`], which is enough for a transit qubit, a partner qubit
//! and one four-level ancilla.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use thiserror::Error;

pub use nalgebra::Complex;

/// Complex amplitude.
pub type C64 = Complex<f64>;

/// Tolerance used by every normalization, unitarity and Hermiticity check.
pub const TOL: f64 = 1e-9;

/// Largest supported product of subsystem dimensions.
pub const MAX_TOTAL_DIM: usize = 16;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuantumError {
    #[error("unknown state label `{0}`")]
    UnknownLabel(String),
    #[error("subsystem dimension {0} is not 2 or 4")]
    BadDimension(usize),
    #[error("total dimension {0} exceeds {MAX_TOTAL_DIM}")]
    TooLarge(usize),
    #[error("amplitude vector has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("non-finite amplitude")]
    NonFinite,
    #[error("matrix is not unitary (max entrywise deviation {0:e})")]
    NotUnitary(f64),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("subsystem {index} out of range for a state with {count} subsystems")]
    SubsystemOutOfRange { index: usize, count: usize },
    #[error("subsystem {0} listed more than once")]
    DuplicateSubsystem(usize),
    #[error("partial trace needs at least one subsystem to keep")]
    EmptyKeepSet,
    #[error("random draw {0} is outside [0, 1)")]
    BadDraw(f64),
    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),
    #[error("prior probability {0} is outside [0, 1]")]
    BadPrior(f64),
}

pub type Result<T, E = QuantumError> = std::result::Result<T, E>;

/// Labels for the canonical single- and two-qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StateLabel {
    Zero,
    One,
    Plus,
    Minus,
    PhiPlus,
    PhiMinus,
    PsiPlus,
    PsiMinus,
}

impl FromStr for StateLabel {
    type Err = QuantumError;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s.trim() {
            "0" => StateLabel::Zero,
            "1" => StateLabel::One,
            "+" => StateLabel::Plus,
            "-" | "−" => StateLabel::Minus,
            "Φ+" | "phi+" | "Phi+" => StateLabel::PhiPlus,
            "Φ-" | "Φ−" | "phi-" | "Phi-" => StateLabel::PhiMinus,
            "Ψ+" | "psi+" | "Psi+" => StateLabel::PsiPlus,
            "Ψ-" | "Ψ−" | "psi-" | "Psi-" => StateLabel::PsiMinus,
            other => return Err(QuantumError::UnknownLabel(other.to_string())),
        })
    }
}

impl fmt::Display for StateLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            StateLabel::Zero => "0",
            StateLabel::One => "1",
            StateLabel::Plus => "+",
            StateLabel::Minus => "-",
            StateLabel::PhiPlus => "Φ+",
            StateLabel::PhiMinus => "Φ-",
            StateLabel::PsiPlus => "Ψ+",
            StateLabel::PsiMinus => "Ψ-",
        };
        f.write_str(s)
    }
}

/// Returns the normalized canonical state for `label`.
pub fn basis_state(label: StateLabel) -> StateVector {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let (dims, amps): (Vec<usize>, Vec<f64>) = match label {
        StateLabel::Zero => (vec![2], vec![1.0, 0.0]),
        StateLabel::One => (vec![2], vec![0.0, 1.0]),
        StateLabel::Plus => (vec![2], vec![h, h]),
        StateLabel::Minus => (vec![2], vec![h, -h]),
        StateLabel::PhiPlus => (vec![2, 2], vec![h, 0.0, 0.0, h]),
        StateLabel::PhiMinus => (vec![2, 2], vec![h, 0.0, 0.0, -h]),
        StateLabel::PsiPlus => (vec![2, 2], vec![0.0, h, h, 0.0]),
        StateLabel::PsiMinus => (vec![2, 2], vec![0.0, h, -h, 0.0]),
    };
    StateVector {
        dims,
        amps: amps.into_iter().map(|x| C64::new(x, 0.0)).collect(),
    }
}

/// Z-basis state `|bit⟩`.
pub fn z_state(bit: u8) -> StateVector {
    basis_state(if bit == 0 { StateLabel::Zero } else { StateLabel::One })
}

fn check_finite(amps: &[C64]) -> Result<()> {
    if amps.iter().all(|a| a.re.is_finite() && a.im.is_finite()) {
        Ok(())
    } else {
        Err(QuantumError::NonFinite)
    }
}

fn norm_sqr(v: &[C64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum()
}

/// `⟨a|b⟩`, conjugate-linear in the first argument.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn strides(dims: &[usize]) -> Vec<usize> {
    let mut strides = vec![1; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    strides
}

/// Maps each flat index of a state onto (index within `targets`, index
/// within the remaining subsystems), both row-major in their own order.
fn split_indices(dims: &[usize], targets: &[usize]) -> Vec<(usize, usize)> {
    let rest: Vec<usize> = (0..dims.len()).filter(|k| !targets.contains(k)).collect();
    let st = strides(dims);
    let total: usize = dims.iter().product();
    (0..total)
        .map(|i| {
            let digit = |k: usize| (i / st[k]) % dims[k];
            let t = targets.iter().fold(0, |acc, &k| acc * dims[k] + digit(k));
            let r = rest.iter().fold(0, |acc, &k| acc * dims[k] + digit(k));
            (t, r)
        })
        .collect()
}

fn check_subsystems(indices: &[usize], count: usize) -> Result<()> {
    for (pos, &index) in indices.iter().enumerate() {
        if index >= count {
            return Err(QuantumError::SubsystemOutOfRange { index, count });
        }
        if indices[..pos].contains(&index) {
            return Err(QuantumError::DuplicateSubsystem(index));
        }
    }
    Ok(())
}

/// Pure state over an ordered list of subsystems.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: Vec<C64>,
}

impl StateVector {
    /// Builds a state, checking dimensions, finiteness and normalization.
    pub fn new(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        if let Some(&bad) = dims.iter().find(|&&d| d != 2 && d != 4) {
            return Err(QuantumError::BadDimension(bad));
        }
        let expected: usize = dims.iter().product();
        if expected > MAX_TOTAL_DIM {
            return Err(QuantumError::TooLarge(expected));
        }
        if amps.len() != expected {
            return Err(QuantumError::LengthMismatch {
                expected,
                found: amps.len(),
            });
        }
        check_finite(&amps)?;
        let n = norm_sqr(&amps);
        if (n - 1.0).abs() > TOL {
            return Err(QuantumError::NotNormalized(n));
        }
        Ok(Self { dims, amps })
    }

    /// Rescales `amps` to unit norm before building the state.
    pub fn normalized(dims: Vec<usize>, amps: Vec<C64>) -> Result<Self> {
        check_finite(&amps)?;
        let n = norm_sqr(&amps).sqrt();
        if n <= TOL {
            return Err(QuantumError::NotNormalized(n * n));
        }
        Self::new(dims, amps.into_iter().map(|a| a / n).collect())
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn amps(&self) -> &[C64] {
        &self.amps
    }

    pub fn num_subsystems(&self) -> usize {
        self.dims.len()
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn norm(&self) -> f64 {
        norm_sqr(&self.amps).sqrt()
    }

    /// `|⟨self|other⟩|²`; 1 when the states agree up to global phase.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        if self.dims != other.dims {
            return 0.0;
        }
        inner(&self.amps, &other.amps).norm_sqr()
    }

    /// Entrywise comparison within `tol`.
    pub fn approx_eq(&self, other: &StateVector, tol: f64) -> bool {
        self.dims == other.dims && self.amps.iter().zip(&other.amps).all(|(a, b)| (a - b).norm() <= tol)
    }

    /// Reorders subsystems so that new subsystem `k` is old subsystem `order[k]`.
    pub fn permute(&self, order: &[usize]) -> Result<StateVector> {
        if order.len() != self.dims.len() {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dims.len(),
                found: order.len(),
            });
        }
        check_subsystems(order, self.dims.len())?;
        let split = split_indices(&self.dims, order);
        let mut amps = vec![ZERO; self.amps.len()];
        for (i, &(t, _)) in split.iter().enumerate() {
            amps[t] = self.amps[i];
        }
        Ok(StateVector {
            dims: order.iter().map(|&k| self.dims[k]).collect(),
            amps,
        })
    }

    /// Places `sub` so that its first subsystem lands at `position`.
    pub fn insert(&self, position: usize, sub: &StateVector) -> Result<StateVector> {
        if position > self.dims.len() {
            return Err(QuantumError::SubsystemOutOfRange {
                index: position,
                count: self.dims.len() + 1,
            });
        }
        let joint = tensor(sub, self)?;
        let k = sub.dims.len();
        let order: Vec<usize> = (0..position)
            .map(|i| k + i)
            .chain(0..k)
            .chain((position..self.dims.len()).map(|i| k + i))
            .collect();
        joint.permute(&order)
    }
}

/// Kronecker product; subsystem lists are concatenated.
pub fn tensor(a: &StateVector, b: &StateVector) -> Result<StateVector> {
    let total = a.dim() * b.dim();
    if total > MAX_TOTAL_DIM {
        return Err(QuantumError::TooLarge(total));
    }
    let amps = a.amps.iter().flat_map(|x| b.amps.iter().map(move |y| x * y)).collect();
    let dims = a.dims.iter().chain(&b.dims).copied().collect();
    Ok(StateVector { dims, amps })
}

/// Square unitary acting on one subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    dim: usize,
    matrix: Vec<C64>,
}

impl Gate {
    /// `matrix` is row-major `dim × dim`; rejected unless `U†U = I` within [`TOL`].
    pub fn new(dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if matrix.len() != dim * dim {
            return Err(QuantumError::LengthMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        check_finite(&matrix)?;
        let gate = Gate { dim, matrix };
        let dev = gate.unitarity_deviation();
        if dev > TOL {
            return Err(QuantumError::NotUnitary(dev));
        }
        Ok(gate)
    }

    pub fn hadamard() -> Self {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        Gate {
            dim: 2,
            matrix: [h, h, h, -h].map(|x| C64::new(x, 0.0)).to_vec(),
        }
    }

    pub fn sigma_z() -> Self {
        Gate {
            dim: 2,
            matrix: vec![ONE, ZERO, ZERO, -ONE],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let matrix = (0..dim * dim)
            .map(|k| if k / dim == k % dim { ONE } else { ZERO })
            .collect();
        Gate { dim, matrix }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.dim + col]
    }

    /// Matrix product `self · rhs` (apply `rhs` first).
    pub fn compose(&self, rhs: &Gate) -> Result<Gate> {
        if self.dim != rhs.dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim,
                found: rhs.dim,
            });
        }
        let d = self.dim;
        let matrix = (0..d * d)
            .map(|k| {
                let (r, c) = (k / d, k % d);
                (0..d).map(|j| self.entry(r, j) * rhs.entry(j, c)).sum()
            })
            .collect();
        Ok(Gate { dim: d, matrix })
    }

    /// Largest entrywise deviation of `U†U` from the identity.
    pub fn unitarity_deviation(&self) -> f64 {
        let d = self.dim;
        let mut worst: f64 = 0.0;
        for r in 0..d {
            for c in 0..d {
                let v: C64 = (0..d).map(|j| self.entry(j, r).conj() * self.entry(j, c)).sum();
                let target = if r == c { ONE } else { ZERO };
                worst = worst.max((v - target).norm());
            }
        }
        worst
    }
}

/// Applies `gate` to subsystem `target`, identity elsewhere.
pub fn apply_gate(state: &StateVector, gate: &Gate, target: usize) -> Result<StateVector> {
    check_subsystems(&[target], state.dims.len())?;
    let d = state.dims[target];
    if gate.dim != d {
        return Err(QuantumError::DimensionMismatch {
            expected: d,
            found: gate.dim,
        });
    }
    let stride = strides(&state.dims)[target];
    let amps = (0..state.amps.len())
        .map(|i| {
            let digit = (i / stride) % d;
            let base = i - digit * stride;
            (0..d)
                .map(|k| gate.entry(digit, k) * state.amps[base + k * stride])
                .sum()
        })
        .collect();
    Ok(StateVector {
        dims: state.dims.clone(),
        amps,
    })
}

/// Applies a linear map from subsystem `target` into `target ⊗ ancilla`,
/// appending the ancilla as the last subsystem.
///
/// `columns[j]` is the image of basis state `|j⟩`, laid out target-major
/// (`target_dim * ancilla_dim` entries). Norm is preserved only when the map
/// is an isometry; callers are expected to validate that.
pub fn apply_isometry(
    state: &StateVector,
    target: usize,
    columns: &[Vec<C64>],
    ancilla_dim: usize,
) -> Result<StateVector> {
    check_subsystems(&[target], state.dims.len())?;
    let d = state.dims[target];
    if ancilla_dim != 2 && ancilla_dim != 4 {
        return Err(QuantumError::BadDimension(ancilla_dim));
    }
    if columns.len() != d {
        return Err(QuantumError::DimensionMismatch {
            expected: d,
            found: columns.len(),
        });
    }
    if let Some(col) = columns.iter().find(|c| c.len() != d * ancilla_dim) {
        return Err(QuantumError::LengthMismatch {
            expected: d * ancilla_dim,
            found: col.len(),
        });
    }
    let total = state.amps.len() * ancilla_dim;
    if total > MAX_TOTAL_DIM {
        return Err(QuantumError::TooLarge(total));
    }
    let stride = strides(&state.dims)[target];
    let mut amps = vec![ZERO; total];
    for (i, &amp) in state.amps.iter().enumerate() {
        let j = (i / stride) % d;
        let base = i - j * stride;
        for q in 0..d {
            for a in 0..ancilla_dim {
                amps[(base + q * stride) * ancilla_dim + a] += amp * columns[j][q * ancilla_dim + a];
            }
        }
    }
    let mut dims = state.dims.clone();
    dims.push(ancilla_dim);
    Ok(StateVector { dims, amps })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BasisKind {
    Z,
    X,
    Bell,
}

/// Orthonormal measurement basis.
///
/// Vector order is fixed: Z = (|0⟩, |1⟩), X = (|+⟩, |−⟩),
/// Bell = (Φ+, Φ−, Ψ+, Ψ−). Outcome indices refer to this order.
#[derive(Debug, Clone, PartialEq)]
pub struct Basis {
    kind: BasisKind,
    vectors: Vec<StateVector>,
}

impl Basis {
    pub fn new(kind: BasisKind) -> Self {
        use StateLabel::*;
        let labels: &[StateLabel] = match kind {
            BasisKind::Z => &[Zero, One],
            BasisKind::X => &[Plus, Minus],
            BasisKind::Bell => &[PhiPlus, PhiMinus, PsiPlus, PsiMinus],
        };
        Basis {
            kind,
            vectors: labels.iter().map(|&l| basis_state(l)).collect(),
        }
    }

    pub fn z() -> Self {
        Self::new(BasisKind::Z)
    }

    pub fn x() -> Self {
        Self::new(BasisKind::X)
    }

    pub fn bell() -> Self {
        Self::new(BasisKind::Bell)
    }

    pub fn kind(&self) -> BasisKind {
        self.kind
    }

    pub fn dim(&self) -> usize {
        self.vectors.len()
    }

    pub fn vectors(&self) -> &[StateVector] {
        &self.vectors
    }

    pub fn state(&self, index: usize) -> &StateVector {
        &self.vectors[index]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementOutcome {
    pub index: usize,
    pub probability: f64,
    /// Renormalized state of the unmeasured subsystems, in their original order.
    pub post_state: StateVector,
}

/// Projects `state` on every vector of `basis` over `targets`, returning the
/// unnormalized remainders.
fn project_all(state: &StateVector, basis: &Basis, targets: &[usize]) -> Result<Vec<Vec<C64>>> {
    check_subsystems(targets, state.dims.len())?;
    let target_dim: usize = targets.iter().map(|&k| state.dims[k]).product();
    if target_dim != basis.dim() {
        return Err(QuantumError::DimensionMismatch {
            expected: target_dim,
            found: basis.dim(),
        });
    }
    let rest_dim = state.amps.len() / target_dim;
    let split = split_indices(&state.dims, targets);
    Ok(basis
        .vectors
        .iter()
        .map(|b| {
            let mut rem = vec![ZERO; rest_dim];
            for (i, &(t, r)) in split.iter().enumerate() {
                rem[r] += b.amps[t].conj() * state.amps[i];
            }
            rem
        })
        .collect())
}

/// Born-rule probabilities of each basis outcome.
pub fn outcome_probabilities(state: &StateVector, basis: &Basis, targets: &[usize]) -> Result<Vec<f64>> {
    Ok(project_all(state, basis, targets)?
        .iter()
        .map(|r| norm_sqr(r))
        .collect())
}

/// Samples a measurement of `targets` in `basis`.
///
/// The outcome is the first index whose cumulative probability exceeds
/// `rand`. Measured subsystems are removed from the returned post state;
/// use [`StateVector::insert`] to re-prepare them.
pub fn measure(state: &StateVector, basis: &Basis, targets: &[usize], rand: f64) -> Result<MeasurementOutcome> {
    if !(0.0..1.0).contains(&rand) {
        return Err(QuantumError::BadDraw(rand));
    }
    let remainders = project_all(state, basis, targets)?;
    let probs: Vec<f64> = remainders.iter().map(|r| norm_sqr(r)).collect();
    let mut cumulative = 0.0;
    let mut index = None;
    for (k, &p) in probs.iter().enumerate() {
        cumulative += p;
        if rand < cumulative {
            index = Some(k);
            break;
        }
    }
    // Rounding can leave the total a hair below 1.
    let index = index.or_else(|| probs.iter().rposition(|&p| p > 0.0)).unwrap_or(0);
    let probability = probs[index];
    let scale = probability.sqrt();
    let dims: Vec<usize> = (0..state.dims.len())
        .filter(|k| !targets.contains(k))
        .map(|k| state.dims[k])
        .collect();
    let amps = remainders[index].iter().map(|a| a / scale).collect();
    Ok(MeasurementOutcome {
        index,
        probability,
        post_state: StateVector { dims, amps },
    })
}

/// Hermitian, unit-trace, positive semidefinite matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dim: usize,
    matrix: Vec<C64>,
}

impl DensityMatrix {
    /// Validates Hermiticity, unit trace and positivity within [`TOL`].
    pub fn new(dim: usize, matrix: Vec<C64>) -> Result<Self> {
        if dim == 0 || matrix.len() != dim * dim {
            return Err(QuantumError::LengthMismatch {
                expected: dim * dim,
                found: matrix.len(),
            });
        }
        check_finite(&matrix)?;
        let rho = DensityMatrix { dim, matrix };
        for r in 0..dim {
            for c in 0..dim {
                if (rho.entry(r, c) - rho.entry(c, r).conj()).norm() > TOL {
                    return Err(QuantumError::InvalidDensity(format!("not Hermitian at ({r}, {c})")));
                }
            }
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TOL {
            return Err(QuantumError::InvalidDensity(format!("trace {tr}")));
        }
        if let Some(min) = rho.eigenvalues().into_iter().reduce(f64::min) {
            if min < -TOL {
                return Err(QuantumError::InvalidDensity(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(rho)
    }

    /// `|ψ⟩⟨ψ|` for a normalized vector of amplitudes.
    pub fn pure(amps: &[C64]) -> Result<Self> {
        check_finite(amps)?;
        let n = norm_sqr(amps);
        if (n - 1.0).abs() > TOL {
            return Err(QuantumError::NotNormalized(n));
        }
        Ok(Self::outer(amps))
    }

    /// `Σ |vᵢ⟩⟨vᵢ|` rescaled to unit trace; vectors may be unnormalized.
    pub fn from_unnormalized(vectors: &[&[C64]]) -> Result<Self> {
        let dim = vectors.first().map_or(0, |v| v.len());
        if let Some(v) = vectors.iter().find(|v| v.len() != dim) {
            return Err(QuantumError::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        let weight: f64 = vectors.iter().map(|v| norm_sqr(v)).sum();
        if dim == 0 || weight <= TOL {
            return Err(QuantumError::InvalidDensity("zero weight".into()));
        }
        let mut matrix = vec![ZERO; dim * dim];
        for v in vectors {
            for r in 0..dim {
                for c in 0..dim {
                    matrix[r * dim + c] += v[r] * v[c].conj() / weight;
                }
            }
        }
        Ok(DensityMatrix { dim, matrix })
    }

    fn outer(amps: &[C64]) -> Self {
        let dim = amps.len();
        let matrix = (0..dim * dim).map(|k| amps[k / dim] * amps[k % dim].conj()).collect();
        DensityMatrix { dim, matrix }
    }

    pub fn from_state(state: &StateVector) -> Self {
        Self::outer(&state.amps)
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        let matrix = (0..dim * dim)
            .map(|k| {
                if k / dim == k % dim {
                    C64::new(1.0 / dim as f64, 0.0)
                } else {
                    ZERO
                }
            })
            .collect();
        DensityMatrix { dim, matrix }
    }

    /// Convex combination `Σ wᵢ ρᵢ`; weights must be nonnegative and sum to 1.
    pub fn mixture(parts: &[(f64, &DensityMatrix)]) -> Result<Self> {
        let dim = parts.first().map_or(0, |(_, r)| r.dim);
        let mut matrix = vec![ZERO; dim * dim];
        for (w, rho) in parts {
            if rho.dim != dim {
                return Err(QuantumError::DimensionMismatch {
                    expected: dim,
                    found: rho.dim,
                });
            }
            if !(0.0..=1.0).contains(w) {
                return Err(QuantumError::BadPrior(*w));
            }
            for (m, x) in matrix.iter_mut().zip(&rho.matrix) {
                *m += x * *w;
            }
        }
        Self::new(dim, matrix)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &[C64] {
        &self.matrix
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        self.matrix[row * self.dim + col]
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|k| self.entry(k, k).re).sum()
    }

    /// `⟨ψ|ρ|ψ⟩` for a vector of matching length.
    pub fn expectation(&self, psi: &[C64]) -> f64 {
        let d = self.dim;
        let mut acc = ZERO;
        for r in 0..d {
            for c in 0..d {
                acc += psi[r].conj() * self.entry(r, c) * psi[c];
            }
        }
        acc.re
    }

    pub fn approx_eq(&self, other: &DensityMatrix, tol: f64) -> bool {
        self.dim == other.dim
            && self
                .matrix
                .iter()
                .zip(&other.matrix)
                .all(|(a, b)| (a - b).norm() <= tol)
    }

    /// `U ρ U†`.
    pub fn conjugate_by(&self, unitary: &Gate) -> Result<Self> {
        if unitary.dim() != self.dim {
            return Err(QuantumError::DimensionMismatch {
                expected: self.dim,
                found: unitary.dim(),
            });
        }
        let u = DMatrix::from_row_slice(self.dim, self.dim, unitary.matrix());
        let rho = self.as_dmatrix();
        let out = &u * rho * u.adjoint();
        Ok(DensityMatrix {
            dim: self.dim,
            matrix: out.transpose().iter().copied().collect(),
        })
    }

    fn as_dmatrix(&self) -> DMatrix<C64> {
        DMatrix::from_row_slice(self.dim, self.dim, &self.matrix)
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(self.as_dmatrix()).0
    }
}

/// Ascending eigenvalues and matching eigenvectors of a Hermitian matrix.
fn hermitian_eigen(m: DMatrix<C64>) -> (Vec<f64>, Vec<Vec<C64>>) {
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<C64>)> = eig
        .eigenvalues
        .iter()
        .enumerate()
        .map(|(k, &val)| (val, eig.eigenvectors.column(k).iter().copied().collect()))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}

/// Reduced density matrix of the `keep` subsystems, in the order given.
pub fn partial_trace(state: &StateVector, keep: &[usize]) -> Result<DensityMatrix> {
    if keep.is_empty() {
        return Err(QuantumError::EmptyKeepSet);
    }
    check_subsystems(keep, state.dims.len())?;
    let dim: usize = keep.iter().map(|&k| state.dims[k]).product();
    let rest_dim = state.amps.len() / dim;
    let mut blocks = vec![vec![ZERO; rest_dim]; dim];
    for (i, (t, r)) in split_indices(&state.dims, keep).into_iter().enumerate() {
        blocks[t][r] = state.amps[i];
    }
    let matrix = (0..dim * dim)
        .map(|k| inner(&blocks[k % dim], &blocks[k / dim]))
        .collect();
    Ok(DensityMatrix { dim, matrix })
}

/// Von Neumann entropy in bits.
pub fn vn_entropy(rho: &DensityMatrix) -> Result<f64> {
    let eigenvalues = rho.eigenvalues();
    if let Some(&min) = eigenvalues.first() {
        if min < -TOL {
            return Err(QuantumError::InvalidDensity(format!("negative eigenvalue {min:e}")));
        }
    }
    let s: f64 = eigenvalues.iter().filter(|&&l| l > 0.0).map(|&l| -l * l.log2()).sum();
    Ok(s.clamp(0.0, (rho.dim as f64).log2()))
}

fn weighted_difference(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<DMatrix<C64>> {
    if rho0.dim != rho1.dim {
        return Err(QuantumError::DimensionMismatch {
            expected: rho0.dim,
            found: rho1.dim,
        });
    }
    if !(0.0..=1.0).contains(&p0) {
        return Err(QuantumError::BadPrior(p0));
    }
    Ok(rho0.as_dmatrix() * C64::new(p0, 0.0) - rho1.as_dmatrix() * C64::new(1.0 - p0, 0.0))
}

/// Optimal single-shot probability of telling `rho0` (prior `p0`) from `rho1`.
pub fn helstrom_success(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<f64> {
    let delta = weighted_difference(rho0, rho1, p0)?;
    let trace_norm: f64 = hermitian_eigen(delta).0.iter().map(|l| l.abs()).sum();
    Ok((0.5 + 0.5 * trace_norm).clamp(p0.max(1.0 - p0), 1.0))
}

/// Two-outcome measurement achieving [`helstrom_success`]: outcome 0 is the
/// projector onto the positive eigenspace of `p0·ρ0 − (1−p0)·ρ1`.
#[derive(Debug, Clone, PartialEq)]
pub struct HelstromMeasurement {
    positive: Vec<Vec<C64>>,
}

impl HelstromMeasurement {
    pub fn new(rho0: &DensityMatrix, rho1: &DensityMatrix, p0: f64) -> Result<Self> {
        let (values, vectors) = hermitian_eigen(weighted_difference(rho0, rho1, p0)?);
        let positive = values
            .into_iter()
            .zip(vectors)
            .filter(|(v, _)| *v > TOL)
            .map(|(_, vec)| vec)
            .collect();
        Ok(Self { positive })
    }

    /// Probability of outcome 0 ("guess ρ0") on the pure state `psi`.
    pub fn prob_guess_zero(&self, psi: &[C64]) -> f64 {
        let p: f64 = self.positive.iter().map(|v| inner(v, psi).norm_sqr()).sum();
        p / norm_sqr(psi).max(f64::MIN_POSITIVE)
    }

    /// Samples a guess for the pure state `psi` with uniform draw `rand`.
    pub fn guess(&self, psi: &[C64], rand: f64) -> u8 {
        u8::from(rand >= self.prob_guess_zero(psi))
    }
}
