use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{EveRecord, EveState};
use crate::bell::{pauli_correction, swap_rule, BellLabel, PauliOp, QubitId};
use crate::random::RandomStream;

use super::ledger::KnowledgeEntry;
use super::roles::{PairRole, RoleMap, Slot};
use super::session::StartLabels;
use super::world::{Holder, Phase, Transfer, World};
use super::{Party, ProtocolError};

/// Named measurements of a round, used to force outcomes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Step {
    /// Alice on slots 1 and 3.
    AliceSecret,
    /// Bob on slots 2 and 4.
    BobSecret,
    /// Alice on slots 5 and 6, announced.
    Announcement,
    /// Eve on the outbound qubit and her probe.
    EveOutbound,
    /// Eve on the returning qubit and her probe.
    EveReadout,
    /// Eve on her two ancillas.
    EveSwap,
}

/// Forced outcomes for some steps of one round.
///
/// A forced step whose measurement is random simply takes the forced value.
/// A forced step whose measurement turns out to be deterministic (the two
/// qubits are already partners) acts as a condition: the round is replayed
/// on fresh randomness until every condition holds, which samples the round
/// conditioned on the forced values.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundForcing(BTreeMap<Step, BellLabel>);

impl RoundForcing {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, step: Step, label: BellLabel) -> Self {
        self.0.insert(step, label);
        self
    }

    pub fn get(&self, step: Step) -> Option<BellLabel> {
        self.0.get(&step).copied()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// A Pauli rotation made while resetting pairs to their agreed labels.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Correction {
    pub party: Party,
    pub pair: (QubitId, QubitId),
    pub qubit: QubitId,
    pub from: BellLabel,
    pub to: BellLabel,
    pub op: PauliOp,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub roles: RoleMap,
    pub alice_secret: BellLabel,
    pub bob_secret: BellLabel,
    pub public_announcement: BellLabel,
    pub alice_inferred_bob: BellLabel,
    pub bob_inferred_alice: BellLabel,
    pub transmissions: u32,
    pub key_bits: BellLabel,
    pub transfers: Vec<Transfer>,
    pub knowledge: Vec<KnowledgeEntry>,
    pub corrections: Vec<Correction>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eve: Option<EveRecord>,
}

/// Bob's secret result as Alice deduces it: the swap rule gives the state
/// of slots 2-5 from her secret result, then the state of 2-4 from the
/// announcement.
pub fn infer_bob_secret(
    l12: BellLabel,
    l35: BellLabel,
    l46: BellLabel,
    alice_secret: BellLabel,
    announcement: BellLabel,
) -> BellLabel {
    let l25 = swap_rule(l12, l35, alice_secret);
    swap_rule(l25, l46, announcement)
}

/// Alice's secret result as Bob deduces it: the state of slots 1-6 from his
/// secret result, then the state of 1-3 from the announcement.
pub fn infer_alice_secret(
    l12: BellLabel,
    l35: BellLabel,
    l46: BellLabel,
    bob_secret: BellLabel,
    announcement: BellLabel,
) -> BellLabel {
    let l16 = swap_rule(l12, l46, bob_secret);
    swap_rule(l16, l35, announcement)
}

/// The `(alice_secret, bob_secret)` combinations consistent with public
/// information, ordered by Alice's result. All four are equally likely.
pub fn eve_public_posterior(
    l12: BellLabel,
    l35: BellLabel,
    l46: BellLabel,
    announcement: BellLabel,
) -> [(BellLabel, BellLabel); 4] {
    BellLabel::ALL.map(|s_a| (s_a, infer_bob_secret(l12, l35, l46, s_a, announcement)))
}

fn check_layout(
    world: &World,
    roles: &RoleMap,
    labels: &StartLabels,
) -> Result<(), ProtocolError> {
    let table = world.observer_view();
    for role in PairRole::ALL {
        let (a, b) = roles.pair(role);
        match table.label_of(a, b) {
            Some(l) if l == labels.get(role) => {}
            other => {
                return Err(ProtocolError::Malformed(format!(
                    "{role:?} pair ({a},{b}) is {other:?}, expected {}",
                    labels.get(role)
                )))
            }
        }
    }
    let at = |slot: Slot| world.holder(roles.qubit(slot));
    for (slot, party) in [
        (Slot::S1, Party::Alice),
        (Slot::S2, Party::Alice),
        (Slot::S3, Party::Alice),
        (Slot::S5, Party::Alice),
        (Slot::S4, Party::Bob),
        (Slot::S6, Party::Bob),
    ] {
        if at(slot) != Some(Holder::Held(party)) {
            return Err(ProtocolError::Malformed(format!(
                "{slot:?} qubit {} should be held by {party:?}",
                roles.qubit(slot)
            )));
        }
    }
    Ok(())
}

/// Executes one round on `world`: Alice sends slot 2 to Bob, both make their
/// secret measurements, Bob returns slot 6, Alice measures 5-6 and announces
/// the result, and each side infers the other's secret. When `eve` is given
/// she intercepts both transmissions.
///
/// Forced outcomes must have been installed on the world beforehand; see
/// [`play_round`] for the driver that does this and retries on conflicts.
pub fn run_round(
    world: &mut World,
    round: u64,
    roles: &RoleMap,
    labels: &StartLabels,
    mut eve: Option<&mut EveState>,
    rng: &mut RandomStream,
) -> Result<RoundRecord, ProtocolError> {
    check_layout(world, roles, labels)?;
    world.begin_round();
    if let Some(eve) = eve.as_deref_mut() {
        eve.begin_round();
    }
    let q = |s| roles.qubit(s);

    world.lab(Party::Alice).send(q(Slot::S2), Party::Bob)?;
    world.set_phase(Phase::OutboundInTransit);
    if let Some(eve) = eve.as_deref_mut() {
        eve.intercept_outbound(&mut world.lab(Party::Eve), q(Slot::S2), rng)?;
    }
    world.lab(Party::Bob).receive(q(Slot::S2))?;
    world.set_phase(Phase::OutboundDelivered);

    let alice_secret = world
        .lab(Party::Alice)
        .bsm(q(Slot::S1), q(Slot::S3), Step::AliceSecret, rng)?;
    let bob_secret = world
        .lab(Party::Bob)
        .bsm(q(Slot::S2), q(Slot::S4), Step::BobSecret, rng)?;
    world.set_phase(Phase::SecretsMeasured);

    world.lab(Party::Bob).send(q(Slot::S6), Party::Alice)?;
    world.set_phase(Phase::ReturnInTransit);
    if let Some(eve) = eve.as_deref_mut() {
        eve.intercept_return(&mut world.lab(Party::Eve), q(Slot::S6), rng)?;
    }
    world.lab(Party::Alice).receive(q(Slot::S6))?;
    world.set_phase(Phase::ReturnDelivered);

    let announcement = world
        .lab(Party::Alice)
        .announced_bsm(q(Slot::S5), q(Slot::S6), Step::Announcement, rng)?;
    world.set_phase(Phase::Announced);

    let eve_record = match eve {
        Some(eve) => {
            eve.finalize(announcement)?;
            Some(eve.record()?)
        }
        None => None,
    };

    let transfers = world.take_transfers();
    let transmissions = transfers
        .iter()
        .filter(|t| t.from != Party::Eve)
        .count() as u32;
    Ok(RoundRecord {
        round,
        roles: *roles,
        alice_secret,
        bob_secret,
        public_announcement: announcement,
        alice_inferred_bob: infer_bob_secret(labels.l12, labels.l35, labels.l46, alice_secret, announcement),
        bob_inferred_alice: infer_alice_secret(labels.l12, labels.l35, labels.l46, bob_secret, announcement),
        transmissions,
        key_bits: alice_secret,
        transfers,
        knowledge: world.ledger().snapshot(),
        corrections: Vec::new(),
        eve: eve_record,
    })
}

/// Each holder rotates its pairs back to the agreed labels, using only the
/// results it measured itself, and the role map is advanced.
pub fn reset_round(
    world: &mut World,
    roles: &RoleMap,
    labels: &StartLabels,
    record: &RoundRecord,
    eve: Option<&mut EveState>,
) -> Result<(Vec<Correction>, RoleMap), ProtocolError> {
    let q = |s| roles.qubit(s);
    let plan = [
        (Party::Alice, (q(Slot::S1), q(Slot::S3)), q(Slot::S3), record.alice_secret, labels.l12),
        (Party::Alice, (q(Slot::S5), q(Slot::S6)), q(Slot::S6), record.public_announcement, labels.l35),
        (Party::Bob, (q(Slot::S2), q(Slot::S4)), q(Slot::S2), record.bob_secret, labels.l46),
    ];
    let mut corrections = Vec::new();
    for (party, (a, b), qubit, from, to) in plan {
        let mut lab = world.lab(party);
        if !lab.knows_label(a, b) {
            return Err(ProtocolError::UnknownLabel { party, a, b });
        }
        let op = pauli_correction(from, to);
        lab.apply_pauli(qubit, op)?;
        corrections.push(Correction {
            party,
            pair: (a, b),
            qubit,
            from,
            to,
            op,
        });
    }
    if let Some(eve) = eve {
        corrections.extend(eve.reset(&mut world.lab(Party::Eve))?);
    }
    Ok((corrections, roles.rotate()))
}

/// Replay budget for rounds with forced outcomes.
pub const MAX_FORCING_ATTEMPTS: u32 = 1024;

/// Runs one round with `forcing` installed. Attempt `k` uses
/// `round_stream.split(k)`; attempts whose deterministic measurements
/// contradict the forcing are discarded and the world is left untouched.
#[allow(clippy::too_many_arguments)]
pub(crate) fn play_round(
    world: &mut World,
    round: u64,
    roles: &RoleMap,
    labels: &StartLabels,
    eve: Option<&mut EveState>,
    round_stream: &RandomStream,
    forcing: &RoundForcing,
) -> Result<RoundRecord, ProtocolError> {
    let attempts = if forcing.is_empty() { 1 } else { MAX_FORCING_ATTEMPTS };
    let mut eve = eve;
    for attempt in 0..attempts {
        let mut trial_world = world.clone();
        let mut trial_eve = eve.as_deref().cloned();
        trial_world.set_forcing(forcing.clone());
        let mut rng = round_stream.split(u64::from(attempt));
        match run_round(&mut trial_world, round, roles, labels, trial_eve.as_mut(), &mut rng) {
            Ok(record) => {
                trial_world.set_forcing(RoundForcing::default());
                *world = trial_world;
                if let (Some(e), Some(t)) = (eve.as_deref_mut(), trial_eve) {
                    *e = t;
                }
                return Ok(record);
            }
            Err(ProtocolError::ForcingConflict { .. }) => continue,
            Err(e) => return Err(e),
        }
    }
    Err(ProtocolError::UnsatisfiableForcing { round, attempts })
}
