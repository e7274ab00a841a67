use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bell::QubitId;

/// Position in the six-qubit layout of a round, numbered as in the protocol
/// description: Alice keeps 1, 3, 5 and sends 2; Bob keeps 4 and returns 6.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Slot {
    S1 = 0,
    S2 = 1,
    S3 = 2,
    S4 = 3,
    S5 = 4,
    S6 = 5,
}

impl Slot {
    pub const ALL: [Slot; 6] = [Slot::S1, Slot::S2, Slot::S3, Slot::S4, Slot::S5, Slot::S6];
}

/// The three starting pairs of a round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PairRole {
    /// Slots 1-2, Alice's pair whose slot-2 qubit travels to Bob.
    AliceLink,
    /// Slots 3-5, kept by Alice.
    AliceAnchor,
    /// Slots 4-6, Bob's pair whose slot-6 qubit travels to Alice.
    BobLink,
}

impl PairRole {
    pub const ALL: [PairRole; 3] = [PairRole::AliceLink, PairRole::AliceAnchor, PairRole::BobLink];

    pub fn slots(self) -> (Slot, Slot) {
        match self {
            PairRole::AliceLink => (Slot::S1, Slot::S2),
            PairRole::AliceAnchor => (Slot::S3, Slot::S5),
            PairRole::BobLink => (Slot::S4, Slot::S6),
        }
    }
}

/// Which physical qubit plays each slot this round.
///
/// After a round the physical pairs are (1,3) and (5,6) at Alice and (2,4)
/// at Bob. [`RoleMap::rotate`] maps them onto next round's (1,2), (3,5)
/// and (4,6) so that Alice sends her link partner and Bob returns the qubit
/// he last received. Qubits in slots 1, 4 and 5 never move; the travelling
/// qubits cycle with period three.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct RoleMap([QubitId; 6]);

impl RoleMap {
    pub fn initial() -> Self {
        Self([1, 2, 3, 4, 5, 6].map(QubitId))
    }

    pub fn new(qubits: [QubitId; 6]) -> Option<Self> {
        let mut sorted = qubits;
        sorted.sort();
        sorted.windows(2).all(|w| w[0] != w[1]).then_some(Self(qubits))
    }

    pub fn qubit(&self, slot: Slot) -> QubitId {
        self.0[slot as usize]
    }

    pub fn pair(&self, role: PairRole) -> (QubitId, QubitId) {
        let (a, b) = role.slots();
        (self.qubit(a), self.qubit(b))
    }

    pub fn qubits(&self) -> [QubitId; 6] {
        self.0
    }

    pub fn rotate(&self) -> Self {
        let q = |s| self.qubit(s);
        Self([
            q(Slot::S1),
            q(Slot::S3),
            q(Slot::S6),
            q(Slot::S4),
            q(Slot::S5),
            q(Slot::S2),
        ])
    }
}

impl fmt::Debug for RoleMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "RoleMap{:?}", self.0.map(|q| q.0))
    }
}
