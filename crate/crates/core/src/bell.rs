//! Symbolic Bell-pair algebra.
//!
//! A [`BellLabel`] names one of the four Bell states by two bits: `x` (bit
//! flip) and `z` (phase). Written as a two-digit string, the first digit is
//! `x` and the second is `z`:
//!
//! ```text
//! 00  (|00> + |11>) / sqrt 2
//! 01  (|00> - |11>) / sqrt 2
//! 10  (|01> + |10>) / sqrt 2
//! 11  (|01> - |10>) / sqrt 2
//! ```
//!
//! With this encoding entanglement swapping is a componentwise XOR, and a
//! single-qubit Pauli toggles one or both bits. Global phase is not tracked.
//!
//! A [`PairTable`] is the whole quantum state of the simulation: a partition
//! of the live qubits into disjoint Bell pairs.

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{BitXor, BitXorAssign};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::random::RandomStream;

/// One of the four Bell states, `(x, z)`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BellLabel(u8);

impl BellLabel {
    pub const PHI_PLUS: Self = Self(0b00);
    pub const PHI_MINUS: Self = Self(0b01);
    pub const PSI_PLUS: Self = Self(0b10);
    pub const PSI_MINUS: Self = Self(0b11);

    /// All four labels in the order 00, 01, 10, 11.
    pub const ALL: [Self; 4] = [
        Self::PHI_PLUS,
        Self::PHI_MINUS,
        Self::PSI_PLUS,
        Self::PSI_MINUS,
    ];

    pub const fn new(x: bool, z: bool) -> Self {
        Self(((x as u8) << 1) | z as u8)
    }

    /// Builds a label from its index `2x + z` (the two digits read as binary).
    pub fn from_index(index: usize) -> Option<Self> {
        (index < 4).then_some(Self(index as u8))
    }

    pub const fn index(self) -> usize {
        self.0 as usize
    }

    pub const fn x(self) -> bool {
        self.0 & 0b10 != 0
    }

    pub const fn z(self) -> bool {
        self.0 & 0b01 != 0
    }
}

impl BitXor for BellLabel {
    type Output = Self;

    fn bitxor(self, rhs: Self) -> Self {
        Self(self.0 ^ rhs.0)
    }
}

impl BitXorAssign for BellLabel {
    fn bitxor_assign(&mut self, rhs: Self) {
        self.0 ^= rhs.0;
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.x() as u8, self.z() as u8)
    }
}

impl fmt::Debug for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|{self}>")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("invalid Bell label {0:?}: expected one of \"00\", \"01\", \"10\", \"11\"")]
pub struct ParseLabelError(pub String);

impl FromStr for BellLabel {
    type Err = ParseLabelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bit = |c: u8| match c {
            b'0' => Some(false),
            b'1' => Some(true),
            _ => None,
        };
        match s.as_bytes() {
            [x, z] => match (bit(*x), bit(*z)) {
                (Some(x), Some(z)) => Ok(Self::new(x, z)),
                _ => Err(ParseLabelError(s.to_owned())),
            },
            _ => Err(ParseLabelError(s.to_owned())),
        }
    }
}

impl Serialize for BellLabel {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BellLabel {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Qubit identifier. The protocol uses 1..=6 and the eavesdropper adds 7 and 8.
#[derive(
    Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct QubitId(pub u8);

impl fmt::Display for QubitId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

/// Single-qubit Pauli operator, up to global phase.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
pub enum PauliOp {
    I,
    X,
    Z,
    Y,
}

impl PauliOp {
    pub const ALL: [Self; 4] = [Self::I, Self::X, Self::Z, Self::Y];

    /// The label change this operator causes when applied to either qubit of a pair.
    pub const fn toggle(self) -> BellLabel {
        match self {
            Self::I => BellLabel::new(false, false),
            Self::X => BellLabel::new(true, false),
            Self::Z => BellLabel::new(false, true),
            Self::Y => BellLabel::new(true, true),
        }
    }

    pub fn from_toggle(toggle: BellLabel) -> Self {
        match (toggle.x(), toggle.z()) {
            (false, false) => Self::I,
            (true, false) => Self::X,
            (false, true) => Self::Z,
            (true, true) => Self::Y,
        }
    }
}

/// Outcome of a Bell measurement on qubits `i`, `k` when `i` was paired with
/// `j` in `left` and `k` with `l` in `right`: returns the label of `(j, l)`.
pub fn swap_rule(left: BellLabel, right: BellLabel, outcome: BellLabel) -> BellLabel {
    left ^ right ^ outcome
}

/// The unique Pauli that turns a pair in `current` into `target` when applied
/// to one of its qubits.
pub fn pauli_correction(current: BellLabel, target: BellLabel) -> PauliOp {
    PauliOp::from_toggle(current ^ target)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BellError {
    #[error("unknown qubit {0}")]
    UnknownQubit(QubitId),
    #[error("qubit {0} is not currently paired")]
    Unpaired(QubitId),
    #[error("qubit {0} is already present in the table")]
    Duplicate(QubitId),
    #[error("qubit {0} cannot be paired or measured with itself")]
    SelfPair(QubitId),
}

/// A Bell pair as reported by [`PairTable::pairs`], with `a < b`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Serialize, Deserialize)]
pub struct Pair {
    pub a: QubitId,
    pub b: QubitId,
    pub label: BellLabel,
}

impl Pair {
    pub fn new(a: QubitId, b: QubitId, label: BellLabel) -> Self {
        let (a, b) = if a <= b { (a, b) } else { (b, a) };
        Self { a, b, label }
    }
}

/// Partition of the live qubits into disjoint Bell pairs.
///
/// Every qubit maps to its partner and the shared label, so both directions
/// are stored. A qubit may be registered but unpaired.
#[derive(Clone, Default, PartialEq, Eq)]
pub struct PairTable {
    slots: BTreeMap<QubitId, Option<(QubitId, BellLabel)>>,
}

impl PairTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a table from `(a, b, label)` triples.
    pub fn from_pairs<I>(pairs: I) -> Result<Self, BellError>
    where
        I: IntoIterator<Item = (QubitId, QubitId, BellLabel)>,
    {
        let mut table = Self::new();
        for (a, b, label) in pairs {
            table.insert_pair(a, b, label)?;
        }
        Ok(table)
    }

    pub fn insert_pair(&mut self, a: QubitId, b: QubitId, label: BellLabel) -> Result<(), BellError> {
        if a == b {
            return Err(BellError::SelfPair(a));
        }
        for q in [a, b] {
            if self.slots.contains_key(&q) {
                return Err(BellError::Duplicate(q));
            }
        }
        self.slots.insert(a, Some((b, label)));
        self.slots.insert(b, Some((a, label)));
        Ok(())
    }

    /// Registers a qubit that belongs to no pair.
    pub fn insert_unpaired(&mut self, q: QubitId) -> Result<(), BellError> {
        if self.slots.contains_key(&q) {
            return Err(BellError::Duplicate(q));
        }
        self.slots.insert(q, None);
        Ok(())
    }

    pub fn qubits(&self) -> impl Iterator<Item = QubitId> + '_ {
        self.slots.keys().copied()
    }

    pub fn len_qubits(&self) -> usize {
        self.slots.len()
    }

    pub fn contains(&self, q: QubitId) -> bool {
        self.slots.contains_key(&q)
    }

    /// Partner and shared label of `q`.
    pub fn partner(&self, q: QubitId) -> Result<(QubitId, BellLabel), BellError> {
        match self.slots.get(&q) {
            None => Err(BellError::UnknownQubit(q)),
            Some(None) => Err(BellError::Unpaired(q)),
            Some(Some(p)) => Ok(*p),
        }
    }

    /// Label of the pair `(a, b)`, or `None` if they are not partners.
    pub fn label_of(&self, a: QubitId, b: QubitId) -> Option<BellLabel> {
        match self.slots.get(&a) {
            Some(Some((partner, label))) if *partner == b => Some(*label),
            _ => None,
        }
    }

    /// All pairs, each once with `a < b`, sorted.
    pub fn pairs(&self) -> Vec<Pair> {
        self.slots
            .iter()
            .filter_map(|(&a, slot)| match slot {
                Some((b, label)) if a < *b => Some(Pair::new(a, *b, *label)),
                _ => None,
            })
            .collect()
    }

    fn set_pair(&mut self, a: QubitId, b: QubitId, label: BellLabel) {
        self.slots.insert(a, Some((b, label)));
        self.slots.insert(b, Some((a, label)));
    }

    /// Bell-operator measurement on `a` and `b`.
    ///
    /// Partners are an eigenstate: their label is returned and nothing
    /// changes. Otherwise, with `a` paired to `j` and `b` to `l`, the outcome
    /// is drawn uniformly, `(a, b)` take the outcome and `(j, l)` the swapped
    /// label.
    pub fn bsm(
        &mut self,
        a: QubitId,
        b: QubitId,
        randomness: &mut RandomStream,
    ) -> Result<BellLabel, BellError> {
        self.bsm_detailed(a, b, randomness).map(|m| m.outcome)
    }

    /// Like [`bsm`](Self::bsm) but reports what happened to the partners.
    pub fn bsm_detailed(
        &mut self,
        a: QubitId,
        b: QubitId,
        randomness: &mut RandomStream,
    ) -> Result<Measurement, BellError> {
        if a == b {
            return Err(BellError::SelfPair(a));
        }
        let (j, left) = self.partner(a)?;
        let (l, right) = self.partner(b)?;
        if j == b {
            return Ok(Measurement {
                outcome: left,
                swapped: None,
            });
        }
        let outcome = randomness.uniform_label();
        let product = swap_rule(left, right, outcome);
        self.set_pair(a, b, outcome);
        self.set_pair(j, l, product);
        Ok(Measurement {
            outcome,
            swapped: Some(Swapped {
                a_partner: j,
                b_partner: l,
                left,
                right,
                product,
            }),
        })
    }

    /// Applies `op` to qubit `q`, toggling the label of its pair.
    pub fn apply_pauli(&mut self, q: QubitId, op: PauliOp) -> Result<(), BellError> {
        let (partner, label) = self.partner(q)?;
        self.set_pair(q, partner, label ^ op.toggle());
        Ok(())
    }

    /// Value-returning form of [`apply_pauli`](Self::apply_pauli).
    pub fn with_pauli(mut self, q: QubitId, op: PauliOp) -> Result<Self, BellError> {
        self.apply_pauli(q, op)?;
        Ok(self)
    }

    /// True when every stored partner link is reciprocal and no qubit pairs with itself.
    pub fn is_consistent(&self) -> bool {
        self.slots.iter().all(|(&q, slot)| match slot {
            None => true,
            Some((p, label)) => {
                *p != q && matches!(self.slots.get(p), Some(Some((back, l))) if *back == q && l == label)
            }
        })
    }
}

impl fmt::Debug for PairTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut set = f.debug_set();
        for p in self.pairs() {
            set.entry(&format_args!("({},{}):{}", p.a, p.b, p.label));
        }
        set.finish()
    }
}

/// Result of a Bell measurement on a [`PairTable`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Measurement {
    pub outcome: BellLabel,
    /// `None` when the measured qubits were already partners.
    pub swapped: Option<Swapped>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Swapped {
    pub a_partner: QubitId,
    pub b_partner: QubitId,
    pub left: BellLabel,
    pub right: BellLabel,
    pub product: BellLabel,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l(s: &str) -> BellLabel {
        s.parse().unwrap()
    }

    fn q(n: u8) -> QubitId {
        QubitId(n)
    }

    #[test]
    fn label_digits() {
        assert_eq!(l("10"), BellLabel::new(true, false));
        assert_eq!(l("01").to_string(), "01");
        assert!(l("11").x() && l("11").z());
        assert!("2".parse::<BellLabel>().is_err());
        assert!("012".parse::<BellLabel>().is_err());
        assert!("0a".parse::<BellLabel>().is_err());
    }

    #[test]
    fn swap_rule_examples() {
        assert_eq!(swap_rule(l("11"), l("01"), l("00")), l("10"));
        assert_eq!(swap_rule(l("00"), l("00"), l("00")), l("00"));
        assert_eq!(swap_rule(l("10"), l("10"), l("01")), l("01"));
    }

    #[test]
    fn worked_swap_example() {
        let (i, j, k, ll) = (q(1), q(2), q(3), q(4));
        let mut table = PairTable::from_pairs([(i, j, l("11")), (k, ll, l("01"))]).unwrap();
        let mut rng = RandomStream::new(0).with_forced([l("00")]);
        assert_eq!(table.bsm(i, k, &mut rng).unwrap(), l("00"));
        assert_eq!(table.label_of(i, k), Some(l("00")));
        assert_eq!(table.label_of(j, ll), Some(l("10")));
        assert!(table.is_consistent());
    }

    #[test]
    fn partner_measurement_is_readout() {
        let mut table = PairTable::from_pairs([(q(6), q(8), l("10"))]).unwrap();
        let before = table.clone();
        let mut rng = RandomStream::new(3);
        for _ in 0..5 {
            assert_eq!(table.bsm(q(6), q(8), &mut rng).unwrap(), l("10"));
            assert_eq!(table.bsm(q(8), q(6), &mut rng).unwrap(), l("10"));
        }
        assert_eq!(table, before);
    }

    #[test]
    fn bsm_errors() {
        let mut table = PairTable::from_pairs([(q(1), q(2), l("00"))]).unwrap();
        table.insert_unpaired(q(5)).unwrap();
        let mut rng = RandomStream::new(0);
        assert_eq!(table.bsm(q(1), q(9), &mut rng), Err(BellError::UnknownQubit(q(9))));
        assert_eq!(table.bsm(q(5), q(1), &mut rng), Err(BellError::Unpaired(q(5))));
        assert_eq!(table.bsm(q(1), q(1), &mut rng), Err(BellError::SelfPair(q(1))));
    }

    #[test]
    fn table_construction_errors() {
        assert_eq!(
            PairTable::from_pairs([(q(1), q(1), l("00"))]),
            Err(BellError::SelfPair(q(1)))
        );
        assert_eq!(
            PairTable::from_pairs([(q(1), q(2), l("00")), (q(2), q(3), l("00"))]),
            Err(BellError::Duplicate(q(2)))
        );
    }

    #[test]
    fn pauli_corrections() {
        assert_eq!(pauli_correction(l("11"), l("11")), PauliOp::I);
        assert_eq!(pauli_correction(l("10"), l("11")), PauliOp::Z);
        assert_eq!(pauli_correction(l("01"), l("10")), PauliOp::Y);
        for a in BellLabel::ALL {
            for b in BellLabel::ALL {
                let op = pauli_correction(a, b);
                assert_eq!(a ^ op.toggle(), b);
                let back = pauli_correction(b, a);
                assert_eq!(op.toggle() ^ back.toggle(), BellLabel::default());
                let hits = PauliOp::ALL.iter().filter(|p| a ^ p.toggle() == b).count();
                assert_eq!(hits, 1);
            }
        }
    }

    #[test]
    fn apply_pauli_examples() {
        let t = PairTable::from_pairs([(q(1), q(3), l("10"))]).unwrap();
        assert_eq!(t.clone().with_pauli(q(1), PauliOp::Z).unwrap().label_of(q(1), q(3)), Some(l("11")));
        assert_eq!(t.clone().with_pauli(q(1), PauliOp::I).unwrap(), t);
        let t = PairTable::from_pairs([(q(1), q(3), l("01"))]).unwrap();
        assert_eq!(t.with_pauli(q(3), PauliOp::Y).unwrap().label_of(q(3), q(1)), Some(l("10")));
        let mut t = PairTable::new();
        t.insert_unpaired(q(4)).unwrap();
        assert_eq!(t.apply_pauli(q(4), PauliOp::X), Err(BellError::Unpaired(q(4))));
        assert_eq!(t.apply_pauli(q(7), PauliOp::X), Err(BellError::UnknownQubit(q(7))));
    }

    #[test]
    fn serde_as_digit_strings() {
        let json = serde_json::to_string(&[l("00"), l("11")]).unwrap();
        assert_eq!(json, r#"["00","11"]"#);
        let back: Vec<BellLabel> = serde_json::from_str(&json).unwrap();
        assert_eq!(back, vec![l("00"), l("11")]);
        assert!(serde_json::from_str::<BellLabel>(r#""21""#).is_err());
    }
}
