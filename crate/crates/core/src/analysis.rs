//! Eavesdropping tests, detection probabilities and rate accounting.
//!
//! Detection is always reported conditional on the attack implemented in
//! [`crate::adversary`]; nothing here bounds other attacks.

use std::io::Write;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::bell::BellLabel;
use crate::protocol::{run_session, ProtocolError, SessionConfig, SessionTranscript};
use crate::random::RandomStream;

/// Useful bits per transmitted qubit of the schemes this one is compared with.
pub const BB84_RATE: f64 = 0.5;
pub const B92_RATE: f64 = 0.5;
pub const E91_RATE: f64 = 0.25;

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("bit count {0} is odd; tested bits come in pairs")]
    OddBitCount(u32),
    #[error("test fraction {0} is outside [0, 1]")]
    BadFraction(f64),
    #[error("cannot test {wanted} pairs from a {rounds}-round session")]
    TooManyPairs { wanted: u64, rounds: u64 },
    #[error("at least one tested pair is required")]
    NoPairs,
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Probability that comparing `bits` bits (in same-round pairs) exposes
/// the swapping attack: `1 - (1/2)^N`.
pub fn scheme_detection_probability(bits: u32) -> Result<f64, AnalysisError> {
    if !bits.is_multiple_of(2) {
        return Err(AnalysisError::OddBitCount(bits));
    }
    Ok(1.0 - 0.5f64.powi(bits as i32))
}

/// BB84 intercept-resend detection probability for `bits` compared bits: `1 - (3/4)^N`.
pub fn bb84_detection_probability(bits: u32) -> f64 {
    1.0 - 0.75f64.powi(bits as i32)
}

/// Binomial standard error `sqrt(p (1 - p) / trials)`.
pub fn binomial_sigma(p: f64, trials: u64) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TestReport {
    pub pairs_tested: u64,
    pub bits_tested: u64,
    pub mismatches: u64,
    pub eve_detected: bool,
    /// No rounds were selected, so the test says nothing.
    pub degenerate: bool,
    pub tested_rounds: Vec<u64>,
    /// Alice's key with tested rounds removed.
    pub remaining_key: Vec<BellLabel>,
    /// Bob's key with tested rounds removed.
    pub remaining_bob_key: Vec<BellLabel>,
}

/// Number of rounds a fraction selects: `round(fraction * rounds)`.
pub fn pairs_for_fraction(fraction: f64, rounds: u64) -> Result<u64, AnalysisError> {
    if !(0.0..=1.0).contains(&fraction) {
        return Err(AnalysisError::BadFraction(fraction));
    }
    Ok((fraction * rounds as f64).round() as u64)
}

/// Picks `pairs` distinct rounds with the public coin, returned sorted.
pub fn select_test_rounds(rounds: u64, pairs: u64, coin: &mut RandomStream) -> Vec<u64> {
    let mut picked: Vec<u64> = sample(coin.rng(), rounds as usize, pairs as usize)
        .into_iter()
        .map(|i| i as u64)
        .collect();
    picked.sort_unstable();
    picked
}

/// Compares Alice's and Bob's two-bit values on `pairs` coin-selected rounds
/// and discards those rounds from both keys.
pub fn eavesdropping_test_pairs(
    transcript: &SessionTranscript,
    pairs: u64,
    coin: &mut RandomStream,
) -> Result<TestReport, AnalysisError> {
    let rounds = transcript.rounds.len() as u64;
    if pairs > rounds {
        return Err(AnalysisError::TooManyPairs { wanted: pairs, rounds });
    }
    let tested = select_test_rounds(rounds, pairs, coin);
    let mismatches = tested
        .iter()
        .map(|&r| &transcript.rounds[r as usize])
        .filter(|r| r.key_bits != r.bob_inferred_alice)
        .count() as u64;
    let keep = |r: &&crate::protocol::RoundRecord| tested.binary_search(&r.round).is_err();
    Ok(TestReport {
        pairs_tested: pairs,
        bits_tested: 2 * pairs,
        mismatches,
        eve_detected: mismatches > 0,
        degenerate: pairs == 0,
        remaining_key: transcript.rounds.iter().filter(keep).map(|r| r.key_bits).collect(),
        remaining_bob_key: transcript
            .rounds
            .iter()
            .filter(keep)
            .map(|r| r.bob_inferred_alice)
            .collect(),
        tested_rounds: tested,
    })
}

/// [`eavesdropping_test_pairs`] with the pair count taken from a fraction of the rounds.
pub fn eavesdropping_test(
    transcript: &SessionTranscript,
    test_fraction: f64,
    coin: &mut RandomStream,
) -> Result<TestReport, AnalysisError> {
    let pairs = pairs_for_fraction(test_fraction, transcript.rounds.len() as u64)?;
    eavesdropping_test_pairs(transcript, pairs, coin)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub key_bits: u64,
    pub transmitted_qubits: u64,
    /// Key bits per transmitted qubit before testing; absent for an empty session.
    pub rate: Option<f64>,
    pub bb84_rate: f64,
    pub b92_rate: f64,
    pub e91_rate: f64,
}

pub fn rate_report(transcript: &SessionTranscript) -> RateReport {
    let key_bits = 2 * transcript.rounds.len() as u64;
    let transmitted_qubits: u64 = transcript.rounds.iter().map(|r| u64::from(r.transmissions)).sum();
    RateReport {
        key_bits,
        transmitted_qubits,
        rate: (transmitted_qubits > 0).then(|| key_bits as f64 / transmitted_qubits as f64),
        bb84_rate: BB84_RATE,
        b92_rate: B92_RATE,
        e91_rate: E91_RATE,
    }
}

/// Empirical detection rate for a fixed number of tested pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DetectionEstimate {
    pub pairs: u64,
    pub sessions: u64,
    pub detected: u64,
    pub frequency: f64,
    /// Closed form `1 - 4^-n`.
    pub expected: f64,
    /// Binomial sigma at `expected`.
    pub sigma: f64,
}

impl DetectionEstimate {
    pub fn deviation_in_sigmas(&self) -> f64 {
        if self.sigma == 0.0 {
            return if self.frequency == self.expected { 0.0 } else { f64::INFINITY };
        }
        (self.frequency - self.expected).abs() / self.sigma
    }

    pub fn within(&self, sigmas: f64) -> bool {
        self.deviation_in_sigmas() <= sigmas
    }
}

/// Rounds per Monte Carlo session when testing `pairs` pairs: twice the
/// pairs, so the coin has a real choice to make.
pub fn rounds_for_pairs(pairs: u64) -> u64 {
    2 * pairs
}

/// Runs `sessions` independent sessions, each testing `pairs` pairs.
/// Session `i` uses seed `split_seed(seed, i)`; sessions run in parallel
/// but the result does not depend on scheduling.
pub fn estimate_detection(
    pairs: u64,
    sessions: u64,
    seed: u64,
    eve_enabled: bool,
) -> Result<DetectionEstimate, AnalysisError> {
    if pairs == 0 {
        return Err(AnalysisError::NoPairs);
    }
    let detected = (0..sessions)
        .into_par_iter()
        .map(|i| {
            let cfg = SessionConfig {
                rounds: rounds_for_pairs(pairs),
                seed: RandomStream::split_seed(seed, i),
                eve_enabled,
                ..SessionConfig::default()
            };
            let transcript = run_session(&cfg, &Default::default())?;
            let mut coin = RandomStream::new(cfg.coin_seed());
            let report = eavesdropping_test_pairs(&transcript, pairs, &mut coin)?;
            Ok(u64::from(report.eve_detected))
        })
        .collect::<Result<Vec<u64>, AnalysisError>>()?
        .into_iter()
        .sum::<u64>();
    let expected = if eve_enabled {
        scheme_detection_probability(2 * pairs as u32)?
    } else {
        0.0
    };
    Ok(DetectionEstimate {
        pairs,
        sessions,
        detected,
        frequency: detected as f64 / sessions as f64,
        expected,
        sigma: binomial_sigma(expected, sessions),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    #[serde(rename = "N")]
    pub bits: u32,
    pub scheme_prob: f64,
    pub bb84_prob: f64,
    pub empirical: Option<f64>,
    pub stderr: Option<f64>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct DetectionCurve {
    pub points: Vec<CurvePoint>,
}

impl DetectionCurve {
    /// Closed-form points for `n = 1..=max_pairs` tested pairs (`N = 2n` bits).
    pub fn closed_form(max_pairs: u32) -> Result<Self, AnalysisError> {
        if max_pairs == 0 {
            return Err(AnalysisError::NoPairs);
        }
        let points = (1..=max_pairs)
            .map(|n| {
                let bits = 2 * n;
                Ok(CurvePoint {
                    bits,
                    scheme_prob: scheme_detection_probability(bits)?,
                    bb84_prob: bb84_detection_probability(bits),
                    empirical: None,
                    stderr: None,
                })
            })
            .collect::<Result<_, AnalysisError>>()?;
        Ok(Self { points })
    }

    /// Fills the empirical columns by Monte Carlo against the attack.
    pub fn with_empirical(mut self, sessions: u64, seed: u64) -> Result<Self, AnalysisError> {
        for (i, point) in self.points.iter_mut().enumerate() {
            let est = estimate_detection(
                u64::from(point.bits / 2),
                sessions,
                RandomStream::split_seed(seed, i as u64),
                true,
            )?;
            point.empirical = Some(est.frequency);
            point.stderr = Some(binomial_sigma(est.frequency, sessions));
        }
        Ok(self)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), AnalysisError> {
        let mut w = csv::Writer::from_writer(out);
        for p in &self.points {
            w.serialize(p)?;
        }
        w.flush()?;
        Ok(())
    }
}
