use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::bell::{BellLabel, PairTable, PauliOp, QubitId};
use crate::random::RandomStream;

use super::ledger::KnowledgeLedger;
use super::round::{RoundForcing, Step};
use super::{Party, ProtocolError};

/// Where a qubit physically is.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Holder {
    Held(Party),
    InTransit { from: Party, to: Party },
}

/// One hop of a qubit over the public channel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Transfer {
    pub qubit: QubitId,
    pub from: Party,
    pub to: Party,
}

/// Progress through a round, in execution order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Phase {
    Idle,
    OutboundInTransit,
    OutboundDelivered,
    SecretsMeasured,
    ReturnInTransit,
    ReturnDelivered,
    Announced,
}

/// The simulated universe: quantum state, qubit custody and the knowledge
/// ledger of the current round.
#[derive(Clone, Debug)]
pub struct World {
    table: PairTable,
    custody: BTreeMap<QubitId, Holder>,
    ledger: KnowledgeLedger,
    phase: Phase,
    transfers: Vec<Transfer>,
    diverted: BTreeMap<QubitId, Party>,
    forcing: RoundForcing,
}

impl World {
    pub fn new(table: PairTable, custody: BTreeMap<QubitId, Holder>) -> Result<Self, ProtocolError> {
        for q in table.qubits() {
            if !custody.contains_key(&q) {
                return Err(ProtocolError::Malformed(format!("qubit {q} has no holder")));
            }
        }
        let mut world = Self {
            table,
            custody,
            ledger: KnowledgeLedger::default(),
            phase: Phase::Idle,
            transfers: Vec::new(),
            diverted: BTreeMap::new(),
            forcing: RoundForcing::default(),
        };
        world.begin_round();
        Ok(world)
    }

    /// Resets per-round bookkeeping. Pairs held entirely by one party count
    /// as private to it only when that party is Eve; everything else starts
    /// out public.
    pub(super) fn begin_round(&mut self) {
        let custody = &self.custody;
        self.ledger = KnowledgeLedger::begin_round(&self.table, |pair| {
            let eve = Holder::Held(Party::Eve);
            (custody.get(&pair.a) == Some(&eve) && custody.get(&pair.b) == Some(&eve))
                .then_some(Party::Eve)
        });
        self.phase = Phase::Idle;
        self.transfers.clear();
        self.diverted.clear();
    }

    pub(super) fn set_phase(&mut self, phase: Phase) {
        self.phase = phase;
    }

    pub(super) fn set_forcing(&mut self, forcing: RoundForcing) {
        self.forcing = forcing;
    }

    pub(super) fn take_transfers(&mut self) -> Vec<Transfer> {
        std::mem::take(&mut self.transfers)
    }

    pub fn phase(&self) -> Phase {
        self.phase
    }

    pub fn holder(&self, q: QubitId) -> Option<Holder> {
        self.custody.get(&q).copied()
    }

    pub fn ledger(&self) -> &KnowledgeLedger {
        &self.ledger
    }

    /// The true quantum state, for the simulator and tests. Parties never get this.
    pub fn observer_view(&self) -> &PairTable {
        &self.table
    }

    pub fn lab(&mut self, party: Party) -> Lab<'_> {
        Lab { world: self, party }
    }

    fn require_held(&self, party: Party, q: QubitId) -> Result<(), ProtocolError> {
        match self.custody.get(&q) {
            Some(Holder::Held(p)) if *p == party => Ok(()),
            _ => Err(ProtocolError::NotHeld { party, qubit: q }),
        }
    }

    fn measure(
        &mut self,
        party: Party,
        a: QubitId,
        b: QubitId,
        step: Step,
        announced: bool,
        rng: &mut RandomStream,
    ) -> Result<BellLabel, ProtocolError> {
        self.require_held(party, a)?;
        self.require_held(party, b)?;
        if let Some(forced) = self.forcing.get(step) {
            match self.table.label_of(a, b) {
                Some(actual) if actual != forced => {
                    return Err(ProtocolError::ForcingConflict { step, forced, actual })
                }
                Some(_) => {}
                None => rng.force_next(forced),
            }
        }
        let m = self.table.bsm_detailed(a, b, rng)?;
        self.ledger.record_measurement(party, announced, a, b, &m);
        Ok(m.outcome)
    }
}

/// One party's access to the world: its own qubits and the channel.
pub struct Lab<'w> {
    world: &'w mut World,
    party: Party,
}

impl Lab<'_> {
    pub fn party(&self) -> Party {
        self.party
    }

    pub fn phase(&self) -> Phase {
        self.world.phase
    }

    pub fn holds(&self, q: QubitId) -> bool {
        self.world.custody.get(&q) == Some(&Holder::Held(self.party))
    }

    /// Private Bell measurement on two held qubits.
    pub fn bsm(
        &mut self,
        a: QubitId,
        b: QubitId,
        step: Step,
        rng: &mut RandomStream,
    ) -> Result<BellLabel, ProtocolError> {
        self.world.measure(self.party, a, b, step, false, rng)
    }

    /// Bell measurement whose result is announced publicly.
    pub fn announced_bsm(
        &mut self,
        a: QubitId,
        b: QubitId,
        step: Step,
        rng: &mut RandomStream,
    ) -> Result<BellLabel, ProtocolError> {
        self.world.measure(self.party, a, b, step, true, rng)
    }

    pub fn apply_pauli(&mut self, q: QubitId, op: PauliOp) -> Result<(), ProtocolError> {
        self.world.require_held(self.party, q)?;
        self.world.table.apply_pauli(q, op)?;
        Ok(())
    }

    /// Whether this party can deduce the label of its pair `(a, b)`.
    pub fn knows_label(&self, a: QubitId, b: QubitId) -> bool {
        self.world.ledger.knows(self.party, a, b)
    }

    pub fn send(&mut self, q: QubitId, to: Party) -> Result<(), ProtocolError> {
        self.world.require_held(self.party, q)?;
        self.world.custody.insert(q, Holder::InTransit { from: self.party, to });
        self.world.transfers.push(Transfer {
            qubit: q,
            from: self.party,
            to,
        });
        Ok(())
    }

    /// Takes a qubit off the channel that was addressed to someone else.
    pub fn intercept(&mut self, q: QubitId) -> Result<(), ProtocolError> {
        match self.world.custody.get(&q) {
            Some(&Holder::InTransit { to, .. }) if to != self.party => {
                self.world.custody.insert(q, Holder::Held(self.party));
                self.world.diverted.insert(q, to);
                if let Some(t) = self.world.transfers.iter_mut().rev().find(|t| t.qubit == q) {
                    t.to = self.party;
                }
                Ok(())
            }
            _ => Err(ProtocolError::NotInTransit(q)),
        }
    }

    /// Sends an intercepted qubit on to its original destination.
    pub fn forward(&mut self, q: QubitId) -> Result<(), ProtocolError> {
        let to = self
            .world
            .diverted
            .remove(&q)
            .ok_or(ProtocolError::OutOfOrder("forwarding a qubit that was not intercepted"))?;
        self.send(q, to)
    }

    pub fn receive(&mut self, q: QubitId) -> Result<(), ProtocolError> {
        match self.world.custody.get(&q) {
            Some(&Holder::InTransit { to, .. }) if to == self.party => {
                self.world.custody.insert(q, Holder::Held(self.party));
                Ok(())
            }
            _ => Err(ProtocolError::NotInTransit(q)),
        }
    }
}
