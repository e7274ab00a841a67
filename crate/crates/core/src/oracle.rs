//! Dense state-vector oracle for up to eight qubits.
//!
//! This is deliberately independent of the label algebra in [`crate::bell`]:
//! Bell states are built from their amplitudes, measurement follows the Born
//! rule with explicit projectors, and labels are read back from the reduced
//! density matrix. Only the [`BellLabel`] and [`PauliOp`] types are shared.
//!
//! Basis index convention is big-endian over `qubit_order`: the first qubit
//! in the order is the most significant bit of the amplitude index.

use num_complex::Complex64;
use thiserror::Error;

use crate::bell::{BellLabel, PairTable, PauliOp, QubitId};
use crate::random::{RandomError, RandomStream};

pub const MAX_QUBITS: usize = 8;

/// Fidelity slack used by [`bell_label_of`].
pub const FIDELITY_TOLERANCE: f64 = 1e-9;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OracleError {
    #[error("{0} qubits exceeds the oracle limit of {MAX_QUBITS}")]
    TooManyQubits(usize),
    #[error("qubit {0} is not in the state")]
    UnknownQubit(QubitId),
    #[error("qubit {0} is unpaired; the oracle only prepares products of Bell pairs")]
    Unpaired(QubitId),
    #[error("cannot measure qubit {0} with itself")]
    SameQubit(QubitId),
    #[error("sampled a zero-probability branch: {0}")]
    ZeroProbabilityBranch(#[from] RandomError),
}

/// The two-qubit Bell state for `label`, indexed by `(first bit << 1) | second bit`.
pub fn bell_amplitudes(label: BellLabel) -> [Complex64; 4] {
    let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let zero = Complex64::new(0.0, 0.0);
    match (label.x(), label.z()) {
        // (|00> + |11>)/sqrt 2
        (false, false) => [h, zero, zero, h],
        // (|00> - |11>)/sqrt 2
        (false, true) => [h, zero, zero, -h],
        // (|01> + |10>)/sqrt 2
        (true, false) => [zero, h, h, zero],
        // (|01> - |10>)/sqrt 2
        (true, true) => [zero, h, -h, zero],
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
    qubit_order: Vec<QubitId>,
}

impl StateVector {
    pub fn from_amplitudes(
        qubit_order: Vec<QubitId>,
        amplitudes: Vec<Complex64>,
    ) -> Result<Self, OracleError> {
        if qubit_order.len() > MAX_QUBITS {
            return Err(OracleError::TooManyQubits(qubit_order.len()));
        }
        assert_eq!(amplitudes.len(), 1 << qubit_order.len(), "amplitude length");
        Ok(Self {
            amplitudes,
            qubit_order,
        })
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn qubit_order(&self) -> &[QubitId] {
        &self.qubit_order
    }

    pub fn num_qubits(&self) -> usize {
        self.qubit_order.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Bit shift of `q` inside an amplitude index.
    fn shift(&self, q: QubitId) -> Result<usize, OracleError> {
        let pos = self
            .qubit_order
            .iter()
            .position(|&x| x == q)
            .ok_or(OracleError::UnknownQubit(q))?;
        Ok(self.qubit_order.len() - 1 - pos)
    }

    /// Largest `|<self|other>|` deviation from 1, i.e. equality up to global phase.
    pub fn overlap_magnitude(&self, other: &StateVector) -> f64 {
        assert_eq!(self.qubit_order, other.qubit_order);
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum::<Complex64>()
            .norm()
    }
}

/// Tensor product of the Bell pairs in `pairs`, over the sorted qubit ids.
pub fn prepare(pairs: &PairTable) -> Result<StateVector, OracleError> {
    let order: Vec<QubitId> = pairs.qubits().collect();
    if order.len() > MAX_QUBITS {
        return Err(OracleError::TooManyQubits(order.len()));
    }
    let n = order.len();
    let mut factors = Vec::new();
    for (pos, &q) in order.iter().enumerate() {
        let (partner, label) = pairs.partner(q).map_err(|_| OracleError::Unpaired(q))?;
        let partner_pos = order.iter().position(|&x| x == partner).expect("partner is live");
        if pos < partner_pos {
            factors.push((n - 1 - pos, n - 1 - partner_pos, bell_amplitudes(label)));
        }
    }
    let amplitudes = (0..1usize << n)
        .map(|index| {
            factors
                .iter()
                .fold(Complex64::new(1.0, 0.0), |acc, &(sa, sb, amps)| {
                    let local = (((index >> sa) & 1) << 1) | ((index >> sb) & 1);
                    acc * amps[local]
                })
        })
        .collect();
    Ok(StateVector {
        amplitudes,
        qubit_order: order,
    })
}

/// Projectors onto the Bell basis of one qubit pair, identity elsewhere.
#[derive(Clone, Debug)]
pub struct BellProjectorSet {
    n: usize,
    shift_a: usize,
    shift_b: usize,
}

impl BellProjectorSet {
    pub fn new(state: &StateVector, a: QubitId, b: QubitId) -> Result<Self, OracleError> {
        if a == b {
            return Err(OracleError::SameQubit(a));
        }
        Ok(Self {
            n: state.num_qubits(),
            shift_a: state.shift(a)?,
            shift_b: state.shift(b)?,
        })
    }

    /// Indices of the four basis states that differ only in the bits of `a` and `b`,
    /// listed as `(bit a, bit b)` = 00, 01, 10, 11, for every setting of the rest.
    fn blocks(&self) -> impl Iterator<Item = [usize; 4]> + '_ {
        let mask = (1 << self.shift_a) | (1 << self.shift_b);
        (0..1usize << self.n).filter(move |i| i & mask == 0).map(move |base| {
            [
                base,
                base | (1 << self.shift_b),
                base | (1 << self.shift_a),
                base | mask,
            ]
        })
    }

    /// `P_label |psi>`, unnormalized.
    pub fn project(&self, label: BellLabel, amplitudes: &[Complex64]) -> Vec<Complex64> {
        let bell = bell_amplitudes(label);
        let mut out = vec![Complex64::new(0.0, 0.0); amplitudes.len()];
        for block in self.blocks() {
            let overlap: Complex64 = block
                .iter()
                .zip(&bell)
                .map(|(&i, b)| b.conj() * amplitudes[i])
                .sum();
            for (&i, b) in block.iter().zip(&bell) {
                out[i] = b * overlap;
            }
        }
        out
    }

    /// Dense `2^n x 2^n` matrix of the projector for `label`, row-major.
    pub fn matrix(&self, label: BellLabel) -> Vec<Vec<Complex64>> {
        let dim = 1usize << self.n;
        let mut m = vec![vec![Complex64::new(0.0, 0.0); dim]; dim];
        let bell = bell_amplitudes(label);
        for block in self.blocks() {
            for (r, &row) in block.iter().enumerate() {
                for (c, &col) in block.iter().enumerate() {
                    m[row][col] = bell[r] * bell[c].conj();
                }
            }
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct OracleMeasurement {
    pub outcome: BellLabel,
    pub state: StateVector,
    /// Born weights indexed by label index (00, 01, 10, 11).
    pub probabilities: [f64; 4],
}

/// Born-rule Bell measurement on `a`, `b`. Forced outcomes queued on
/// `randomness` are honoured when their weight is nonzero.
pub fn oracle_bsm(
    state: &StateVector,
    a: QubitId,
    b: QubitId,
    randomness: &mut RandomStream,
) -> Result<OracleMeasurement, OracleError> {
    let projectors = BellProjectorSet::new(state, a, b)?;
    let projected: Vec<Vec<Complex64>> = BellLabel::ALL
        .iter()
        .map(|&l| projectors.project(l, &state.amplitudes))
        .collect();
    let mut probabilities = [0.0; 4];
    for (p, v) in probabilities.iter_mut().zip(&projected) {
        *p = v.iter().map(|x| x.norm_sqr()).sum();
    }
    let outcome = randomness.weighted_label(probabilities)?;
    let scale = probabilities[outcome.index()].sqrt();
    let amplitudes = projected[outcome.index()].iter().map(|x| x / scale).collect();
    Ok(OracleMeasurement {
        outcome,
        state: StateVector {
            amplitudes,
            qubit_order: state.qubit_order.clone(),
        },
        probabilities,
    })
}

/// Marker for a qubit pair whose reduced state is not a pure Bell state.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Error)]
#[error("qubits are not in a Bell state with each other")]
pub struct NotABellPair;

/// Fidelity of the reduced state of `(a, b)` with each Bell state.
pub fn bell_fidelities(
    state: &StateVector,
    a: QubitId,
    b: QubitId,
) -> Result<[f64; 4], OracleError> {
    let projectors = BellProjectorSet::new(state, a, b)?;
    // Reduced density matrix over (bit a, bit b).
    let mut rho = [[Complex64::new(0.0, 0.0); 4]; 4];
    for block in projectors.blocks() {
        for r in 0..4 {
            for c in 0..4 {
                rho[r][c] += state.amplitudes[block[r]] * state.amplitudes[block[c]].conj();
            }
        }
    }
    let mut out = [0.0; 4];
    for label in BellLabel::ALL {
        let v = bell_amplitudes(label);
        let mut f = Complex64::new(0.0, 0.0);
        for r in 0..4 {
            for c in 0..4 {
                f += v[r].conj() * rho[r][c] * v[c];
            }
        }
        out[label.index()] = f.re;
    }
    Ok(out)
}

/// Reads back the Bell label of `(a, b)` if their reduced state is a Bell
/// state to within [`FIDELITY_TOLERANCE`].
pub fn bell_label_of(
    state: &StateVector,
    a: QubitId,
    b: QubitId,
) -> Result<Result<BellLabel, NotABellPair>, OracleError> {
    let fidelities = bell_fidelities(state, a, b)?;
    Ok(BellLabel::ALL
        .into_iter()
        .find(|l| fidelities[l.index()] >= 1.0 - FIDELITY_TOLERANCE)
        .ok_or(NotABellPair))
}

/// Applies a single-qubit Pauli to `q`.
pub fn oracle_apply_pauli(
    state: &StateVector,
    q: QubitId,
    op: PauliOp,
) -> Result<StateVector, OracleError> {
    let shift = state.shift(q)?;
    let i = Complex64::new(0.0, 1.0);
    let mut out = state.amplitudes.clone();
    for (index, amp) in state.amplitudes.iter().enumerate() {
        let bit = (index >> shift) & 1;
        let flipped = index ^ (1 << shift);
        match op {
            PauliOp::I => {}
            PauliOp::X => out[flipped] = *amp,
            PauliOp::Z => {
                if bit == 1 {
                    out[index] = -amp;
                }
            }
            // Y|0> = i|1>, Y|1> = -i|0>
            PauliOp::Y => out[flipped] = if bit == 0 { i * amp } else { -i * amp },
        }
    }
    Ok(StateVector {
        amplitudes: out,
        qubit_order: state.qubit_order.clone(),
    })
}
