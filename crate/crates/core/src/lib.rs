//! Simulator for quantum key distribution by entanglement swapping.
//!
//! * [`bell`]: symbolic Bell-pair algebra, the state the simulator runs on.
//! * [`oracle`]: dense state-vector model used to cross-check it.
//! * [`protocol`]: Alice and Bob, rounds, resets and the knowledge ledger.
//! * [`adversary`]: the entanglement-swapping eavesdropper.
//! * [`analysis`]: eavesdropping tests, detection curves, rate accounting.
//! * [`transcript`]: line-delimited JSON transcripts.
//! * [`cli`]: the `swapqkd` command.

pub mod adversary;
pub mod analysis;
pub mod bell;
pub mod cli;
pub mod oracle;
pub mod protocol;
pub mod random;
pub mod transcript;
pub mod verify;
