//! The entanglement-swapping eavesdropper.
//!
//! Eve holds an ancilla pair (7, 8). She intercepts the qubit Alice sends
//! and Bell-measures it with 8, which entangles Alice's 1 with Eve's 7. On
//! the return leg she measures the returning qubit with 8 (they are now
//! partners, so this reads Bob's correlation without disturbing it), which
//! gives her Bob's secret result, then swaps 7 with 8 so that the qubit
//! reaching Alice is entangled with Alice's 5. Once Alice announces her
//! 5-6 result, Eve can back out Alice's secret result too. The price is
//! that Bob's inference of Alice's result is right only one time in four.
//!
//! Eve works through a [`Lab`] scoped to herself: she can touch her own
//! qubits and whatever she pulls off the channel, and she learns nothing
//! else except the public labels and announcements passed in here.

use serde::{Deserialize, Serialize};

use crate::bell::{pauli_correction, BellLabel, QubitId};
use crate::protocol::{Correction, Lab, Party, Phase, ProtocolError, StartLabels, Step};
use crate::random::RandomStream;

/// Eve's qubit that ends up entangled with Alice's side (7).
pub const ANCILLA_KEEP: QubitId = QubitId(7);
/// Eve's qubit that is measured against the intercepted qubits (8).
pub const ANCILLA_PROBE: QubitId = QubitId(8);

/// What Eve measured and deduced during one round.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EveRecord {
    pub ancilla: BellLabel,
    /// Outbound qubit with 8.
    pub e1: BellLabel,
    /// Returning qubit with 8.
    pub m1: BellLabel,
    /// 7 with 8.
    pub e2: BellLabel,
    /// Label of (1, 7) right after the outbound interception.
    pub l17: BellLabel,
    /// Reconstructed label (5, 7) had just before Eve's swap.
    pub l57: BellLabel,
    pub inferred_alice: BellLabel,
    pub inferred_bob: BellLabel,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EveState {
    ancilla: BellLabel,
    public: StartLabels,
    e1: Option<BellLabel>,
    m1: Option<BellLabel>,
    e2: Option<BellLabel>,
    l57: Option<BellLabel>,
    inferred_alice: Option<BellLabel>,
    inferred_bob: Option<BellLabel>,
}

impl EveState {
    pub fn new(ancilla: BellLabel, public: StartLabels) -> Self {
        Self {
            ancilla,
            public,
            e1: None,
            m1: None,
            e2: None,
            l57: None,
            inferred_alice: None,
            inferred_bob: None,
        }
    }

    pub fn ancilla(&self) -> BellLabel {
        self.ancilla
    }

    pub fn inferred_alice(&self) -> Option<BellLabel> {
        self.inferred_alice
    }

    pub fn inferred_bob(&self) -> Option<BellLabel> {
        self.inferred_bob
    }

    /// Forgets last round's outcomes.
    pub fn begin_round(&mut self) {
        *self = Self::new(self.ancilla, self.public);
    }

    /// Label Eve predicts for (1, 7) after her outbound measurement.
    pub fn l17(&self) -> Option<BellLabel> {
        self.e1.map(|e1| self.public.l12 ^ self.ancilla ^ e1)
    }

    /// Intercepts the outbound qubit, measures it with 8 and forwards it.
    pub fn intercept_outbound(
        &mut self,
        lab: &mut Lab<'_>,
        qubit: QubitId,
        rng: &mut RandomStream,
    ) -> Result<(), ProtocolError> {
        if !(lab.holds(ANCILLA_KEEP) && lab.holds(ANCILLA_PROBE)) {
            return Err(ProtocolError::OutOfOrder("ancillas not initialized"));
        }
        lab.intercept(qubit)?;
        self.e1 = Some(lab.bsm(qubit, ANCILLA_PROBE, Step::EveOutbound, rng)?);
        lab.forward(qubit)
    }

    /// Intercepts the returning qubit: reads its pairing with 8 to learn
    /// Bob's result, swaps 7 with 8, and forwards the qubit to Alice.
    pub fn intercept_return(
        &mut self,
        lab: &mut Lab<'_>,
        qubit: QubitId,
        rng: &mut RandomStream,
    ) -> Result<(), ProtocolError> {
        if lab.phase() < Phase::SecretsMeasured {
            return Err(ProtocolError::OutOfOrder(
                "return interception before both secret measurements",
            ));
        }
        let e1 = self
            .e1
            .ok_or(ProtocolError::OutOfOrder("return interception without outbound"))?;
        lab.intercept(qubit)?;
        let m1 = lab.bsm(qubit, ANCILLA_PROBE, Step::EveReadout, rng)?;
        self.m1 = Some(m1);
        self.inferred_bob = Some(m1 ^ self.public.l46 ^ e1);
        self.e2 = Some(lab.bsm(ANCILLA_KEEP, ANCILLA_PROBE, Step::EveSwap, rng)?);
        lab.forward(qubit)
    }

    /// Uses Alice's announcement to reconstruct (5, 7) and Alice's secret result.
    pub fn finalize(&mut self, announcement: BellLabel) -> Result<(), ProtocolError> {
        let (Some(m1), Some(e2), Some(l17)) = (self.m1, self.e2, self.l17()) else {
            return Err(ProtocolError::OutOfOrder("finalize before both interceptions"));
        };
        let l57 = announcement ^ m1 ^ e2;
        self.l57 = Some(l57);
        self.inferred_alice = Some(l57 ^ self.public.l35 ^ l17);
        Ok(())
    }

    pub fn record(&self) -> Result<EveRecord, ProtocolError> {
        match (
            self.e1,
            self.m1,
            self.e2,
            self.l17(),
            self.l57,
            self.inferred_alice,
            self.inferred_bob,
        ) {
            (Some(e1), Some(m1), Some(e2), Some(l17), Some(l57), Some(a), Some(b)) => Ok(EveRecord {
                ancilla: self.ancilla,
                e1,
                m1,
                e2,
                l17,
                l57,
                inferred_alice: a,
                inferred_bob: b,
            }),
            _ => Err(ProtocolError::OutOfOrder("eve record requested before finalize")),
        }
    }

    /// Rotates the ancilla pair, now in the state of Eve's last swap
    /// outcome, back to its starting label.
    pub fn reset(&mut self, lab: &mut Lab<'_>) -> Result<Option<Correction>, ProtocolError> {
        let Some(e2) = self.e2 else {
            return Ok(None);
        };
        if !lab.knows_label(ANCILLA_KEEP, ANCILLA_PROBE) {
            return Err(ProtocolError::UnknownLabel {
                party: Party::Eve,
                a: ANCILLA_KEEP,
                b: ANCILLA_PROBE,
            });
        }
        let op = pauli_correction(e2, self.ancilla);
        lab.apply_pauli(ANCILLA_PROBE, op)?;
        Ok(Some(Correction {
            party: Party::Eve,
            pair: (ANCILLA_KEEP, ANCILLA_PROBE),
            qubit: ANCILLA_PROBE,
            from: e2,
            to: self.ancilla,
            op,
        }))
    }
}
