use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::adversary::{EveState, ANCILLA_KEEP, ANCILLA_PROBE};
use crate::bell::{BellLabel, PairTable};
use crate::random::RandomStream;

use super::roles::{PairRole, RoleMap, Slot};
use super::round::{play_round, reset_round, RoundForcing, RoundRecord};
use super::world::{Holder, World};
use super::{Party, ProtocolError};

/// Publicly agreed labels of the three starting pairs. Every round starts
/// from these, so they are also the reset targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StartLabels {
    pub l12: BellLabel,
    pub l35: BellLabel,
    pub l46: BellLabel,
}

impl Default for StartLabels {
    fn default() -> Self {
        Self {
            l12: BellLabel::PSI_MINUS,
            l35: BellLabel::PSI_PLUS,
            l46: BellLabel::PSI_PLUS,
        }
    }
}

impl StartLabels {
    pub fn get(&self, role: PairRole) -> BellLabel {
        match role {
            PairRole::AliceLink => self.l12,
            PairRole::AliceAnchor => self.l35,
            PairRole::BobLink => self.l46,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SessionConfig {
    pub rounds: u64,
    pub seed: u64,
    /// Fraction of rounds sacrificed for the eavesdropping test.
    pub test_fraction: f64,
    pub labels: StartLabels,
    pub eve_enabled: bool,
    /// Label of Eve's ancilla pair (7, 8).
    pub eve_ancilla: BellLabel,
}

impl Default for SessionConfig {
    fn default() -> Self {
        Self {
            rounds: 0,
            seed: 0,
            test_fraction: 0.0,
            labels: StartLabels::default(),
            eve_enabled: false,
            eve_ancilla: BellLabel::PHI_PLUS,
        }
    }
}

impl SessionConfig {
    /// Seed of the quantum randomness; round `r` uses `split(r)` of it.
    pub fn quantum_seed(&self) -> u64 {
        RandomStream::split_seed(self.seed, 0)
    }

    /// Seed of the public coin used to pick test rounds.
    pub fn coin_seed(&self) -> u64 {
        RandomStream::split_seed(self.seed, 1)
    }
}

/// A completed session, in round order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SessionTranscript {
    pub rounds: Vec<RoundRecord>,
    /// Role map after the final reset, ready for another round.
    pub final_roles: RoleMap,
}

impl SessionTranscript {
    /// Alice's key: her secret results in order, two bits each.
    pub fn alice_key(&self) -> Vec<BellLabel> {
        self.rounds.iter().map(|r| r.key_bits).collect()
    }

    /// Bob's key: what he inferred Alice obtained.
    pub fn bob_key(&self) -> Vec<BellLabel> {
        self.rounds.iter().map(|r| r.bob_inferred_alice).collect()
    }
}

/// Builds the step-one layout: Alice holds (1,2) and (3,5), Bob holds
/// (4,6), and Eve, when present, holds her ancillas (7,8).
pub fn initial_world(labels: &StartLabels, eve_ancilla: Option<BellLabel>) -> World {
    let roles = RoleMap::initial();
    let mut table = PairTable::new();
    let mut custody = BTreeMap::new();
    for role in PairRole::ALL {
        let (a, b) = roles.pair(role);
        table.insert_pair(a, b, labels.get(role)).expect("fixed layout");
    }
    for slot in Slot::ALL {
        let holder = match slot {
            Slot::S4 | Slot::S6 => Party::Bob,
            _ => Party::Alice,
        };
        custody.insert(roles.qubit(slot), Holder::Held(holder));
    }
    if let Some(label) = eve_ancilla {
        table
            .insert_pair(ANCILLA_KEEP, ANCILLA_PROBE, label)
            .expect("fixed layout");
        custody.insert(ANCILLA_KEEP, Holder::Held(Party::Eve));
        custody.insert(ANCILLA_PROBE, Holder::Held(Party::Eve));
    }
    World::new(table, custody).expect("fixed layout")
}

/// A session in progress, advanced one round at a time.
#[derive(Clone, Debug)]
pub struct Session {
    cfg: SessionConfig,
    world: World,
    eve: Option<EveState>,
    roles: RoleMap,
    quantum: RandomStream,
    next_round: u64,
}

impl Session {
    pub fn new(cfg: SessionConfig) -> Self {
        let world = initial_world(&cfg.labels, cfg.eve_enabled.then_some(cfg.eve_ancilla));
        let eve = cfg
            .eve_enabled
            .then(|| EveState::new(cfg.eve_ancilla, cfg.labels));
        let quantum = RandomStream::new(cfg.quantum_seed());
        Self {
            cfg,
            world,
            eve,
            roles: RoleMap::initial(),
            quantum,
            next_round: 0,
        }
    }

    pub fn world(&self) -> &World {
        &self.world
    }

    pub fn roles(&self) -> &RoleMap {
        &self.roles
    }

    pub fn config(&self) -> &SessionConfig {
        &self.cfg
    }

    /// Runs the next round and the reset that follows it.
    pub fn step(&mut self, forcing: &RoundForcing) -> Result<RoundRecord, ProtocolError> {
        let r = self.next_round;
        let stream = self.quantum.split(r);
        let mut record = play_round(
            &mut self.world,
            r,
            &self.roles,
            &self.cfg.labels,
            self.eve.as_mut(),
            &stream,
            forcing,
        )?;
        let (corrections, next) = reset_round(
            &mut self.world,
            &self.roles,
            &self.cfg.labels,
            &record,
            self.eve.as_mut(),
        )?;
        record.corrections = corrections;
        self.roles = next;
        self.next_round += 1;
        Ok(record)
    }
}

/// Runs a full session. Rounds listed in `forcing` have those outcomes
/// forced; everything else is drawn from the seeded streams.
pub fn run_session(
    cfg: &SessionConfig,
    forcing: &BTreeMap<u64, RoundForcing>,
) -> Result<SessionTranscript, ProtocolError> {
    let mut session = Session::new(cfg.clone());
    let none = RoundForcing::default();
    let rounds = (0..cfg.rounds)
        .map(|r| session.step(forcing.get(&r).unwrap_or(&none)))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SessionTranscript {
        rounds,
        final_roles: session.roles,
    })
}
