//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fail.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use swapqkd::analysis::{
    bb84_detection_probability, binomial_sigma, estimate_detection, rate_report,
    scheme_detection_probability,
};
use swapqkd::bell::{swap_rule, BellLabel};
use swapqkd::protocol::{
    eve_public_posterior, run_session, RoundForcing, Session, SessionConfig, Step,
};
use swapqkd::transcript::Transcript;
use swapqkd::verify::{reproduce_swap_table, verify_against_oracle};

/// Statistical tolerance in binomial standard deviations.
const SIGMAS: f64 = 3.0;
const TRIALS: u64 = 10_000;
const TABLE_BUDGET: Duration = Duration::from_secs(1);
const ORACLE_BUDGET: Duration = Duration::from_secs(5);
const MONTE_CARLO_BUDGET: Duration = Duration::from_secs(10);
const SEED: u64 = 20_240_601;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn l(s: &str) -> BellLabel {
    s.parse().unwrap()
}

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn timed(budget: Duration, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let detail = f()?;
    let took = start.elapsed();
    ensure(took <= budget, format!("took {took:.2?}, budget {budget:?}"))?;
    Ok(format!("{detail} in {took:.2?}"))
}

fn within(freq: f64, p: f64, trials: u64) -> bool {
    (freq - p).abs() <= SIGMAS * binomial_sigma(p, trials)
}

fn table_reproduction() -> Outcome {
    timed(TABLE_BUDGET, || {
        let r = reproduce_swap_table(swap_rule);
        ensure(r.is_clean() && r.cases == 64, format!("{:?}", r.discrepancies))?;
        Ok(format!("{}/{} cases", r.passed(), r.cases))
    })
}

fn oracle_equivalence() -> Outcome {
    timed(ORACLE_BUDGET, || {
        let r = verify_against_oracle(swap_rule).map_err(|e| e.to_string())?;
        ensure(r.is_clean() && r.cases == 64, format!("{:?}", r.discrepancies))?;
        Ok(format!("{}/{} cases", r.passed(), r.cases))
    })
}

fn worked_example() -> Outcome {
    let forcing = RoundForcing::new()
        .with(Step::AliceSecret, l("11"))
        .with(Step::Announcement, l("00"));
    let r = Session::new(SessionConfig::default())
        .step(&forcing)
        .map_err(|e| e.to_string())?;
    let got = (r.bob_secret, r.bob_inferred_alice, r.alice_inferred_bob);
    ensure(got == (l("00"), l("11"), l("00")), format!("got {got:?}"))?;
    Ok("bob_secret=00 bob_inferred_alice=11 alice_inferred_bob=00".into())
}

fn eve_worked_example() -> Outcome {
    let cfg = SessionConfig {
        eve_enabled: true,
        ..SessionConfig::default()
    };
    let forcing = RoundForcing::new()
        .with(Step::EveOutbound, l("00"))
        .with(Step::EveSwap, l("01"))
        .with(Step::AliceSecret, l("11"))
        .with(Step::BobSecret, l("00"));
    let r = Session::new(cfg).step(&forcing).map_err(|e| e.to_string())?;
    let eve = r.eve.ok_or("no eve record")?;
    let shown: Vec<String> = r.knowledge.iter().map(|e| e.to_string()).collect();
    let label_of = |pair: &str| {
        r.knowledge
            .iter()
            .find(|e| format!("{}{}", e.a, e.b) == pair)
            .map(|e| e.label)
    };
    ensure(eve.l17 == l("11") && label_of("17") == Some(l("11")), "(1,7)")?;
    ensure(eve.l57 == l("10") && label_of("57") == Some(l("10")), "(5,7)")?;
    ensure(label_of("68") == Some(l("10")), format!("(6,8) in {shown:?}"))?;
    ensure(eve.inferred_bob == l("00"), "inferred_bob")?;
    ensure(r.public_announcement == l("01") && label_of("56") == Some(l("01")), "(5,6)")?;
    ensure(eve.inferred_alice == l("11"), "inferred_alice")?;
    ensure(
        r.bob_inferred_alice == l("10") && r.key_bits == l("11"),
        format!("bob {} vs alice {}", r.bob_inferred_alice, r.key_bits),
    )?;
    Ok("(1,7)=11 (5,7)=10 (6,8)=10 (5,6)=01, Eve infers 11/00, Bob's pair 10 vs 11".into())
}

fn rate_claim() -> Outcome {
    for (rounds, seed) in [(1, 1), (17, 2), (1000, SEED)] {
        let cfg = SessionConfig {
            rounds,
            seed,
            ..SessionConfig::default()
        };
        let t = run_session(&cfg, &BTreeMap::new()).map_err(|e| e.to_string())?;
        let rate = rate_report(&t);
        ensure(
            rate.key_bits == 2 * rounds && rate.transmitted_qubits == 2 * rounds,
            format!("{rate:?}"),
        )?;
        ensure(rate.rate == Some(1.0), format!("rate {:?}", rate.rate))?;
        ensure(t.alice_key() == t.bob_key(), format!("keys differ at R={rounds}"))?;
    }
    Ok("rate 1.0 and identical keys for R in {1, 17, 1000}".into())
}

fn eve_effectiveness() -> Outcome {
    let cfg = SessionConfig {
        rounds: TRIALS,
        seed: SEED,
        eve_enabled: true,
        ..SessionConfig::default()
    };
    let t = run_session(&cfg, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let hits = t
        .rounds
        .iter()
        .filter(|r| {
            r.eve
                .is_some_and(|e| e.inferred_alice == r.alice_secret && e.inferred_bob == r.bob_secret)
        })
        .count();
    ensure(hits as u64 == TRIALS, format!("{hits}/{TRIALS}"))?;
    Ok(format!("{hits}/{TRIALS} rounds"))
}

fn detection_statistics() -> Outcome {
    ensure(scheme_detection_probability(2).ok() == Some(0.75), "N=2")?;
    for n in 0..=20u32 {
        let bits = 2 * n;
        ensure(
            scheme_detection_probability(bits).ok() == Some(1.0 - 0.5f64.powi(bits as i32)),
            format!("scheme N={bits}"),
        )?;
        ensure(
            bb84_detection_probability(bits) == 1.0 - 0.75f64.powi(bits as i32),
            format!("bb84 N={bits}"),
        )?;
    }
    timed(MONTE_CARLO_BUDGET, || {
        let mut parts = Vec::new();
        for n in 1..=4u64 {
            let est = estimate_detection(n, TRIALS, SEED + n, true).map_err(|e| e.to_string())?;
            let expected = 1.0 - 0.25f64.powi(n as i32);
            ensure(
                est.expected == expected && within(est.frequency, expected, TRIALS),
                format!("n={n}: {:.4} vs {expected:.4}", est.frequency),
            )?;
            parts.push(format!("n={n}: {:.4}", est.frequency));
        }
        Ok(parts.join(", "))
    })
}

fn secrecy_shape() -> Outcome {
    let cfg = SessionConfig {
        rounds: TRIALS,
        seed: SEED,
        ..SessionConfig::default()
    };
    let t = run_session(&cfg, &BTreeMap::new()).map_err(|e| e.to_string())?;
    let labels = cfg.labels;
    let mut position = [0u64; 4];
    for r in &t.rounds {
        let post = eve_public_posterior(labels.l12, labels.l35, labels.l46, r.public_announcement);
        let distinct = post.iter().collect::<std::collections::BTreeSet<_>>().len();
        ensure(distinct == 4, format!("round {}: {distinct} candidates", r.round))?;
        let i = post
            .iter()
            .position(|&c| c == (r.alice_secret, r.bob_secret))
            .ok_or(format!("round {}: true pair not in posterior", r.round))?;
        position[i] += 1;
    }
    let freqs: Vec<f64> = position.iter().map(|&c| c as f64 / TRIALS as f64).collect();
    ensure(
        freqs.iter().all(|&f| within(f, 0.25, TRIALS)),
        format!("candidate frequencies {freqs:?}"),
    )?;
    Ok(format!("4 candidates every round, frequencies {freqs:.3?}"))
}

fn determinism() -> Outcome {
    for cfg in [
        SessionConfig {
            rounds: 500,
            seed: 7,
            test_fraction: 0.1,
            ..SessionConfig::default()
        },
        SessionConfig {
            rounds: 500,
            seed: 7,
            test_fraction: 0.1,
            eve_enabled: true,
            ..SessionConfig::default()
        },
    ] {
        let a = Transcript::generate(&cfg).and_then(|t| t.to_jsonl()).map_err(|e| e.to_string())?;
        let b = Transcript::generate(&cfg).and_then(|t| t.to_jsonl()).map_err(|e| e.to_string())?;
        ensure(a == b, "transcripts differ")?;
        let back = Transcript::read_jsonl(a.as_bytes()).map_err(|e| e.to_string())?;
        let replay = Transcript::generate(&back.header.config)
            .and_then(|t| t.to_jsonl())
            .map_err(|e| e.to_string())?;
        ensure(replay == a, "replay from header differs")?;
    }
    Ok("byte-identical transcripts on rerun and on replay from header".into())
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("table reproduction", table_reproduction),
        ("oracle equivalence", oracle_equivalence),
        ("worked example", worked_example),
        ("eavesdropper worked example", eve_worked_example),
        ("rate", rate_claim),
        ("eavesdropper effectiveness", eve_effectiveness),
        ("detection statistics", detection_statistics),
        ("secrecy shape", secrecy_shape),
        ("determinism", determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        match check() {
            Ok(detail) => println!("PASS {}. {name}: {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {}. {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
