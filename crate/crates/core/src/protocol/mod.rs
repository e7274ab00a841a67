//! Alice and Bob executing the entanglement-swapping key distribution.
//!
//! The quantum state and qubit custody live in a [`World`]. Parties act on
//! it only through a [`Lab`], a handle scoped to one party that can measure
//! or rotate qubits that party physically holds and move qubits over the
//! public channel. Nothing outside this module can read pair labels
//! directly, which is what keeps the eavesdropper honest.

mod ledger;
mod roles;
mod round;
mod session;
mod world;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::{BellError, BellLabel, QubitId};

pub use ledger::{KnowledgeEntry, KnowledgeLedger, Visibility};
pub use roles::{PairRole, RoleMap, Slot};
pub use round::{
    eve_public_posterior, infer_alice_secret, infer_bob_secret, reset_round, run_round, Correction,
    RoundForcing, RoundRecord, Step,
};
pub use session::{initial_world, run_session, Session, SessionConfig, SessionTranscript, StartLabels};
pub use world::{Holder, Lab, Phase, Transfer, World};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Party {
    Alice = 0,
    Bob = 1,
    Eve = 2,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Bell(#[from] BellError),
    #[error("{party:?} does not hold qubit {qubit}")]
    NotHeld { party: Party, qubit: QubitId },
    #[error("qubit {0} is not in transit")]
    NotInTransit(QubitId),
    #[error("malformed state: {0}")]
    Malformed(String),
    #[error("{party:?} cannot rotate pair ({a},{b}) without knowing its label")]
    UnknownLabel { party: Party, a: QubitId, b: QubitId },
    #[error("forced {step:?} = {forced} conflicts with deterministic outcome {actual}")]
    ForcingConflict {
        step: Step,
        forced: BellLabel,
        actual: BellLabel,
    },
    #[error("no randomness satisfies the forced outcomes of round {round} after {attempts} attempts")]
    UnsatisfiableForcing { round: u64, attempts: u32 },
    #[error("operation out of order: {0}")]
    OutOfOrder(&'static str),
}
