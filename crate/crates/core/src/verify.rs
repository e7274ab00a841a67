//! Cross-checks of the symbolic swap rule.
//!
//! Two independent checks:
//!
//! * [`reproduce_swap_table`] regenerates the standard table of
//!   Bell-measurement results from a swap rule and compares it row by row
//!   as sets.
//! * [`verify_against_oracle`] runs every `(left, right, outcome)` case on
//!   the dense oracle, embedded in an eight-qubit state with two spectator
//!   pairs, and compares Born weights and read-back labels with the rule
//!   and with [`PairTable::bsm`].

use std::collections::BTreeSet;
use std::fmt;

use crate::bell::{BellLabel, PairTable, QubitId};
use crate::oracle::{self, OracleError};
use crate::random::RandomStream;

/// Born weights must match 1/4 this closely.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// The swap table. Each row lists four initial states `|ijkl>` (left
/// half) and the four possible final states `|ikjl>` (right half); any
/// initial state in a row can end in any final state of that row.
pub const SWAP_TABLE: [([&str; 4], [&str; 4]); 4] = [
    (["0000", "0101", "1010", "1111"], ["0000", "0101", "1010", "1111"]),
    (["0001", "0100", "1011", "1110"], ["0001", "0100", "1011", "1110"]),
    (["0010", "0111", "1000", "1101"], ["0010", "0111", "1000", "1101"]),
    (["0011", "0110", "1001", "1100"], ["0011", "0110", "1001", "1100"]),
];

fn split_digits(s: &str) -> (BellLabel, BellLabel) {
    (s[..2].parse().expect("table digit"), s[2..].parse().expect("table digit"))
}

fn join_digits(a: BellLabel, b: BellLabel) -> String {
    format!("{a}{b}")
}

/// A `(left, right, outcome)` case where a check failed.
#[derive(Clone, Debug, PartialEq)]
pub struct Discrepancy {
    pub left: BellLabel,
    pub right: BellLabel,
    pub outcome: BellLabel,
    pub detail: String,
}

impl fmt::Display for Discrepancy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "left={} right={} outcome={}: {}",
            self.left, self.right, self.outcome, self.detail
        )
    }
}

#[derive(Clone, Debug, Default)]
pub struct VerificationReport {
    pub cases: usize,
    pub discrepancies: Vec<Discrepancy>,
}

impl VerificationReport {
    pub fn passed(&self) -> usize {
        let failed: BTreeSet<_> = self
            .discrepancies
            .iter()
            .map(|d| (d.left, d.right, d.outcome))
            .collect();
        self.cases - failed.len()
    }

    pub fn is_clean(&self) -> bool {
        self.discrepancies.is_empty()
    }
}

/// Regenerates the swap table from `rule`. For every initial state of every
/// row, the set of `(outcome, rule(l, r, outcome))` over the four outcomes
/// must equal that row's right half. Reports one discrepancy per mismatching
/// initial state (with `outcome` set to the first outcome that is off-row).
pub fn reproduce_swap_table<F>(rule: F) -> VerificationReport
where
    F: Fn(BellLabel, BellLabel, BellLabel) -> BellLabel,
{
    let mut report = VerificationReport::default();
    for (initial, finals) in SWAP_TABLE {
        let expected: BTreeSet<String> = finals.iter().map(|s| s.to_string()).collect();
        for start in initial {
            let (left, right) = split_digits(start);
            let produced: BTreeSet<String> = BellLabel::ALL
                .iter()
                .map(|&o| join_digits(o, rule(left, right, o)))
                .collect();
            report.cases += 4;
            if produced != expected {
                let outcome = BellLabel::ALL
                    .into_iter()
                    .find(|&o| !expected.contains(&join_digits(o, rule(left, right, o))))
                    .unwrap_or_default();
                report.discrepancies.push(Discrepancy {
                    left,
                    right,
                    outcome,
                    detail: format!("row {start}: produced {produced:?}, table has {expected:?}"),
                });
            }
        }
    }
    report
}

const SPECTATORS: [(u8, u8, BellLabel); 2] = [
    (5, 6, BellLabel::PHI_PLUS),
    (7, 8, BellLabel::PSI_MINUS),
];

/// Exhaustive oracle comparison over all 16 label pairs and 4 forced outcomes.
pub fn verify_against_oracle<F>(rule: F) -> Result<VerificationReport, OracleError>
where
    F: Fn(BellLabel, BellLabel, BellLabel) -> BellLabel,
{
    let (i, j, k, l) = (QubitId(1), QubitId(2), QubitId(3), QubitId(4));
    let mut report = VerificationReport::default();
    for left in BellLabel::ALL {
        for right in BellLabel::ALL {
            let mut pairs = vec![(i, j, left), (k, l, right)];
            pairs.extend(SPECTATORS.iter().map(|&(a, b, s)| (QubitId(a), QubitId(b), s)));
            let table = PairTable::from_pairs(pairs).expect("disjoint pairs");
            let state = oracle::prepare(&table)?;
            for outcome in BellLabel::ALL {
                report.cases += 1;
                let mut fail = |detail: String| {
                    report.discrepancies.push(Discrepancy {
                        left,
                        right,
                        outcome,
                        detail,
                    })
                };
                let mut forced = RandomStream::new(0).with_forced([outcome]);
                let m = oracle::oracle_bsm(&state, i, k, &mut forced)?;
                for (p, label) in m.probabilities.iter().zip(BellLabel::ALL) {
                    if (p - 0.25).abs() > PROBABILITY_TOLERANCE {
                        fail(format!("Born weight of {label} is {p}"));
                    }
                }
                if (m.state.norm() - 1.0).abs() > PROBABILITY_TOLERANCE {
                    fail(format!("post-state norm {}", m.state.norm()));
                }
                let read = |a: QubitId, b: QubitId| oracle::bell_label_of(&m.state, a, b);
                if read(i, k)? != Ok(outcome) {
                    fail(format!("measured pair reads back {:?}", read(i, k)?));
                }
                let predicted = rule(left, right, outcome);
                let actual = read(j, l)?;
                if actual != Ok(predicted) {
                    fail(format!("rule predicts {predicted}, oracle has {actual:?}"));
                }
                for &(a, b, s) in &SPECTATORS {
                    if read(QubitId(a), QubitId(b))? != Ok(s) {
                        fail(format!("spectator pair ({a},{b}) disturbed"));
                    }
                }
                let mut symbolic = table.clone();
                let mut forced = RandomStream::new(0).with_forced([outcome]);
                match symbolic.bsm(i, k, &mut forced) {
                    Ok(o) if o == outcome => {}
                    other => fail(format!("symbolic bsm returned {other:?}")),
                }
                for p in symbolic.pairs() {
                    if read(p.a, p.b)? != Ok(p.label) {
                        fail(format!(
                            "symbolic table has ({},{}):{} but oracle disagrees",
                            p.a, p.b, p.label
                        ));
                    }
                }
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bell::swap_rule;

    #[test]
    fn real_rule_is_clean() {
        let table = reproduce_swap_table(swap_rule);
        assert_eq!(table.cases, 64);
        assert!(table.is_clean(), "{:?}", table.discrepancies);
        let oracle = verify_against_oracle(swap_rule).unwrap();
        assert_eq!((oracle.cases, oracle.passed()), (64, 64));
    }

    #[test]
    fn faulty_rule_is_caught() {
        // Off by one bit only in a single row-entry.
        let off = |l: BellLabel, r: BellLabel, o: BellLabel| {
            let v = swap_rule(l, r, o);
            if (l, r, o) == (BellLabel::PSI_PLUS, BellLabel::PSI_PLUS, BellLabel::PHI_MINUS) {
                v ^ BellLabel::PSI_PLUS
            } else {
                v
            }
        };
        let report = verify_against_oracle(off).unwrap();
        assert_eq!(report.passed(), 63);
        assert!(!reproduce_swap_table(off).is_clean());
        assert!(!reproduce_swap_table(|l, _, _| l).is_clean());
    }
}
