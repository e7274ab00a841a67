//! Who knows which Bell label.
//!
//! Every label produced during a round is an XOR of independent symbols:
//! one per starting pair label and one per random measurement outcome. A
//! label is tracked as a bitmask over those symbols. A party knows a label
//! exactly when its mask lies in the GF(2) span of everything the party has
//! observed (its own outcomes, public announcements, labels it was told).
//! Knowledge therefore only widens as a round goes on, and inferences such
//! as "Alice now knows Bob's secret result" fall out of the span test
//! instead of being hard-coded.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::bell::{BellLabel, Measurement, Pair, PairTable, QubitId};

use super::Party;

type Mask = u64;

/// Row-reduced XOR basis.
#[derive(Clone, Debug, Default)]
struct XorBasis {
    rows: Vec<Mask>,
}

impl XorBasis {
    fn reduce(&self, mut v: Mask) -> Mask {
        for &row in &self.rows {
            v = v.min(v ^ row);
        }
        v
    }

    fn insert(&mut self, v: Mask) {
        let v = self.reduce(v);
        if v != 0 {
            self.rows.push(v);
            self.rows.sort_unstable_by(|a, b| b.cmp(a));
        }
    }

    fn contains(&self, v: Mask) -> bool {
        self.reduce(v) == 0
    }
}

/// Visibility of a Bell label, rendered in bracket notation: `"00"` public,
/// `(00)` Alice, `[00]` Bob, `{00}` Eve,
/// `|00|` nobody, nested brackets for shared knowledge.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Visibility {
    Public,
    AliceOnly,
    BobOnly,
    EveOnly,
    AliceAndBob,
    AliceAndEve,
    BobAndEve,
    AllParties,
    Unknown,
}

impl Visibility {
    fn from_knowers(alice: bool, bob: bool, eve: bool) -> Self {
        match (alice, bob, eve) {
            (true, false, false) => Self::AliceOnly,
            (false, true, false) => Self::BobOnly,
            (false, false, true) => Self::EveOnly,
            (true, true, false) => Self::AliceAndBob,
            (true, false, true) => Self::AliceAndEve,
            (false, true, true) => Self::BobAndEve,
            (true, true, true) => Self::AllParties,
            (false, false, false) => Self::Unknown,
        }
    }

    pub fn known_to(self, party: Party) -> bool {
        use Visibility::*;
        match party {
            Party::Alice => matches!(self, Public | AliceOnly | AliceAndBob | AliceAndEve | AllParties),
            Party::Bob => matches!(self, Public | BobOnly | AliceAndBob | BobAndEve | AllParties),
            Party::Eve => matches!(self, Public | EveOnly | AliceAndEve | BobAndEve | AllParties),
        }
    }

    /// Renders `label` in bracket notation.
    pub fn bracket(self, label: BellLabel) -> String {
        if self == Self::Public {
            return format!("\"{label}\"");
        }
        if self == Self::Unknown {
            return format!("|{label}|");
        }
        let mut s = label.to_string();
        if self.known_to(Party::Alice) {
            s = format!("({s})");
        }
        if self.known_to(Party::Bob) {
            s = format!("[{s}]");
        }
        if self.known_to(Party::Eve) {
            s = format!("{{{s}}}");
        }
        s
    }
}

/// One pair that existed at some point during the round.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct KnowledgeEntry {
    pub a: QubitId,
    pub b: QubitId,
    pub label: BellLabel,
    pub visibility: Visibility,
    /// Whether the pair still exists at snapshot time.
    pub live: bool,
}

impl fmt::Display for KnowledgeEntry {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}_{}{}", self.visibility.bracket(self.label), self.a, self.b)
    }
}

#[derive(Clone, Debug)]
struct Entry {
    pair: Pair,
    mask: Mask,
}

/// Per-round record of every pair label and who can deduce it.
#[derive(Clone, Debug, Default)]
pub struct KnowledgeLedger {
    symbols: u32,
    entries: Vec<Entry>,
    /// Live pair of each qubit, as an index into `entries`.
    live: BTreeMap<QubitId, usize>,
    public: XorBasis,
    parties: [XorBasis; 3],
}

impl KnowledgeLedger {
    /// Starts a round from `table`. `initial` says who knows each starting
    /// label; `None` means public.
    pub fn begin_round<F>(table: &PairTable, initial: F) -> Self
    where
        F: Fn(&Pair) -> Option<Party>,
    {
        let mut ledger = Self::default();
        for pair in table.pairs() {
            let mask = ledger.fresh_symbol();
            ledger.push(pair, mask);
            match initial(&pair) {
                None => ledger.observe_public(mask),
                Some(p) => ledger.observe(p, mask),
            }
        }
        ledger
    }

    fn fresh_symbol(&mut self) -> Mask {
        assert!(self.symbols < Mask::BITS, "too many symbols in one round");
        let m = 1 << self.symbols;
        self.symbols += 1;
        m
    }

    fn push(&mut self, pair: Pair, mask: Mask) -> usize {
        let idx = self.entries.len();
        self.entries.push(Entry { pair, mask });
        self.live.insert(pair.a, idx);
        self.live.insert(pair.b, idx);
        idx
    }

    fn observe(&mut self, party: Party, mask: Mask) {
        self.parties[party as usize].insert(mask);
    }

    fn observe_public(&mut self, mask: Mask) {
        self.public.insert(mask);
        for basis in &mut self.parties {
            basis.insert(mask);
        }
    }

    fn mask_of(&self, q: QubitId) -> Mask {
        self.entries[self.live[&q]].mask
    }

    /// Records a Bell measurement by `measurer` on `(a, b)`. `announced`
    /// makes the outcome public.
    pub fn record_measurement(
        &mut self,
        measurer: Party,
        announced: bool,
        a: QubitId,
        b: QubitId,
        m: &Measurement,
    ) {
        let outcome_mask = match m.swapped {
            None => self.mask_of(a),
            Some(s) => {
                let left = self.mask_of(a);
                let right = self.mask_of(b);
                let o = self.fresh_symbol();
                self.push(Pair::new(a, b, m.outcome), o);
                self.push(Pair::new(s.a_partner, s.b_partner, s.product), left ^ right ^ o);
                o
            }
        };
        if announced {
            self.observe_public(outcome_mask);
        } else {
            self.observe(measurer, outcome_mask);
        }
    }

    fn visibility_of(&self, mask: Mask) -> Visibility {
        if self.public.contains(mask) {
            return Visibility::Public;
        }
        let k = |p: Party| self.parties[p as usize].contains(mask);
        Visibility::from_knowers(k(Party::Alice), k(Party::Bob), k(Party::Eve))
    }

    /// Visibility of the live pair `(a, b)`, if they are partners.
    pub fn visibility(&self, a: QubitId, b: QubitId) -> Option<Visibility> {
        let ia = *self.live.get(&a)?;
        let ib = *self.live.get(&b)?;
        (ia == ib).then(|| self.visibility_of(self.entries[ia].mask))
    }

    pub fn knows(&self, party: Party, a: QubitId, b: QubitId) -> bool {
        self.visibility(a, b).is_some_and(|v| v.known_to(party))
    }

    /// Every pair of the round so far, in creation order.
    pub fn snapshot(&self) -> Vec<KnowledgeEntry> {
        self.entries
            .iter()
            .enumerate()
            .map(|(idx, e)| KnowledgeEntry {
                a: e.pair.a,
                b: e.pair.b,
                label: e.pair.label,
                visibility: self.visibility_of(e.mask),
                live: self.live.get(&e.pair.a) == Some(&idx),
            })
            .collect()
    }

    /// Visibility of a historical pair, looked up by qubits regardless of liveness
    /// (latest entry wins).
    pub fn historical(&self, a: QubitId, b: QubitId) -> Option<Visibility> {
        let want = Pair::new(a, b, BellLabel::default());
        self.entries
            .iter()
            .rev()
            .find(|e| (e.pair.a, e.pair.b) == (want.a, want.b))
            .map(|e| self.visibility_of(e.mask))
    }
}
