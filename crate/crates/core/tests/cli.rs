use std::process::{Command, Output};

use swapqkd::bell::BellLabel;
use swapqkd::cli::verify_oracle_with;
use swapqkd::transcript::Transcript;

fn swapqkd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_swapqkd"))
        .args(args)
        .env_remove("SWAPQKD_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

#[test]
fn verify_oracle_passes() {
    let o = swapqkd(&["verify-oracle"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().any(|l| l == "64/64 cases verified"));
}

#[test]
fn verify_oracle_catches_a_faulty_rule() {
    let faulty = |l: BellLabel, r: BellLabel, o: BellLabel| {
        let good = l ^ r ^ o;
        if (l, r, o) == (BellLabel::PHI_PLUS, BellLabel::PSI_MINUS, BellLabel::PHI_MINUS) {
            good ^ BellLabel::PSI_PLUS
        } else {
            good
        }
    };
    let mut out = Vec::new();
    assert!(!verify_oracle_with(faulty, &mut out).unwrap());
    let text = String::from_utf8(out).unwrap();
    assert!(text.contains("63/64"), "{text}");
}

#[test]
fn run_writes_a_clean_transcript() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("t.jsonl");
    let o = swapqkd(&["run", "--rounds", "100", "--seed", "7", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{o:?}");
    assert!(stdout(&o).contains("key_bits=200 transmitted=200 rate=1 "));
    let t = Transcript::read_jsonl(std::fs::read(&path).unwrap().as_slice()).unwrap();
    assert_eq!(t.session.rounds.len(), 100);
    assert_eq!(t.summary.rate.rate, Some(1.0));
    assert_eq!(t.summary.test.mismatches, 0);
    assert_eq!(t.session.alice_key(), t.session.bob_key());
}

#[test]
fn empty_run_is_degenerate() {
    let o = swapqkd(&["run", "--rounds", "0", "--seed", "7"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Transcript::read_jsonl(o.stdout.as_slice()).unwrap();
    assert!(t.session.rounds.is_empty());
    assert!(t.summary.test.degenerate);
    assert_eq!(t.summary.rate.rate, None);
}

#[test]
fn eve_run_is_detected() {
    let o = swapqkd(&["run", "--rounds", "10000", "--eve", "--seed", "7", "--test-fraction", "0.1"]);
    assert_eq!(o.status.code(), Some(0));
    let t = Transcript::read_jsonl(o.stdout.as_slice()).unwrap();
    let test = &t.summary.test;
    assert_eq!(test.pairs_tested, 1000);
    assert!(test.eve_detected);
    // Each tested pair disagrees with probability 3/4.
    let freq = test.mismatches as f64 / 1000.0;
    assert!((freq - 0.75).abs() <= 3.0 * (0.75f64 * 0.25 / 1000.0).sqrt(), "{freq}");
    assert!(test.tested_rounds.iter().all(|&r| r < 10_000));
    assert_eq!(test.remaining_key.len(), 9000);
}

#[test]
fn reruns_are_byte_identical() {
    let args = ["run", "--rounds", "50", "--eve", "--seed", "3", "--test-fraction", "0.2"];
    assert_eq!(swapqkd(&args).stdout, swapqkd(&args).stdout);
}

#[test]
fn out_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_swapqkd"))
        .args(["run", "--rounds", "3", "--seed", "9", "--format", "csv"])
        .env("SWAPQKD_OUT_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(dir.path().join("transcript-seed9.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.starts_with("round,alice_secret,"));
}

#[test]
fn curves() {
    let o = swapqkd(&["curves", "--max-pairs", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "N,scheme_prob,bb84_prob,empirical,stderr\n2,0.75,0.4375,,\n");

    let o = swapqkd(&["curves", "--max-pairs", "6"]);
    let rows: Vec<Vec<f64>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split(',').take(3).map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 6);
    assert!(rows.windows(2).all(|w| w[0][1] <= w[1][1] && w[0][2] <= w[1][2]));

    assert_eq!(swapqkd(&["curves", "--max-pairs", "0"]).status.code(), Some(2));
}

#[test]
fn curves_with_empirical_columns() {
    let o = swapqkd(&["curves", "--max-pairs", "2", "--sessions", "200", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0));
    for line in stdout(&o).lines().skip(1) {
        assert_eq!(line.split(',').filter(|c| !c.is_empty()).count(), 5, "{line}");
    }
}

#[test]
fn montecarlo() {
    let o = swapqkd(&["montecarlo", "--pairs", "1", "--sessions", "2000", "--seed", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("within_3sigma=true"), "{}", stdout(&o));
    let o = swapqkd(&["montecarlo", "--pairs", "2", "--sessions", "500", "--seed", "5", "--no-eve"]);
    assert!(stdout(&o).contains("detected=0 "));
}

#[test]
fn exit_codes() {
    assert_eq!(swapqkd(&["run", "--seed", "1"]).status.code(), Some(2));
    assert_eq!(swapqkd(&["run", "--rounds", "1", "--seed", "1", "--l35", "2"]).status.code(), Some(2));
    assert_eq!(swapqkd(&["run", "--rounds", "5", "--seed", "1", "--test-fraction", "2"]).status.code(), Some(2));
    assert_eq!(swapqkd(&["frobnicate"]).status.code(), Some(2));
    let o = swapqkd(&["run", "--rounds", "1", "--seed", "1", "--out", "/nonexistent-dir/x.jsonl"]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(swapqkd(&["--help"]).status.code(), Some(0));
}
