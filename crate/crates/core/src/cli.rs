//! Command-line front end. The binary only forwards to [`run`].

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analysis::{estimate_detection, AnalysisError, DetectionCurve};
use crate::bell::{swap_rule, BellLabel};
use crate::protocol::{SessionConfig, StartLabels};
use crate::transcript::{Transcript, TranscriptError};
use crate::verify::{reproduce_swap_table, verify_against_oracle, VerificationReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_VERIFY_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;

/// Default directory for output files when `--out` is not given.
pub const OUT_DIR_ENV: &str = "SWAPQKD_OUT_DIR";

#[derive(Debug, Parser)]
#[command(name = "swapqkd", version, about = "Entanglement-swapping QKD simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a session and write its transcript.
    Run {
        #[arg(long)]
        rounds: u64,
        #[arg(long)]
        seed: u64,
        /// Enable the swapping eavesdropper.
        #[arg(long)]
        eve: bool,
        #[arg(long, default_value_t = 0.0)]
        test_fraction: f64,
        #[arg(long, default_value = "11")]
        l12: BellLabel,
        #[arg(long, default_value = "10")]
        l35: BellLabel,
        #[arg(long, default_value = "10")]
        l46: BellLabel,
        #[arg(long, default_value = "00")]
        eve_ancilla: BellLabel,
        #[arg(long, value_enum, default_value_t = Format::Json)]
        format: Format,
        /// Output file; `-` for stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check the swap rule against the swap table and the state-vector oracle.
    VerifyOracle,
    /// Write detection probability curves as CSV.
    Curves {
        #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
        max_pairs: u32,
        /// Also estimate each point from this many simulated sessions.
        #[arg(long)]
        sessions: Option<u64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate the detection rate for a number of tested pairs.
    Montecarlo {
        #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
        pairs: u64,
        #[arg(long, default_value_t = 10_000)]
        sessions: u64,
        #[arg(long)]
        seed: u64,
        /// Run without the eavesdropper (false-positive check).
        #[arg(long)]
        no_eve: bool,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Io(String),
    Verify,
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e.to_string())
    }
}

impl From<TranscriptError> for Failure {
    fn from(e: TranscriptError) -> Self {
        match e {
            TranscriptError::Io(e) => Failure::Io(e.to_string()),
            TranscriptError::Analysis(AnalysisError::Io(e)) => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

impl From<AnalysisError> for Failure {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Io(e) => Failure::Io(e.to_string()),
            AnalysisError::Csv(e) if e.is_io_error() => Failure::Io(e.to_string()),
            other => Failure::Usage(other.to_string()),
        }
    }
}

/// Parses `args` and runs the command, returning the exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if code == EXIT_OK {
                stdout.write_all(text.as_bytes())
            } else {
                stderr.write_all(text.as_bytes())
            };
            return code;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => EXIT_OK,
        Err(Failure::Verify) => EXIT_VERIFY_FAILED,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(stderr, "error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Io(msg)) => {
            let _ = writeln!(stderr, "i/o error: {msg}");
            EXIT_IO
        }
    }
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<(), Failure> {
    match cmd {
        Command::Run {
            rounds,
            seed,
            eve,
            test_fraction,
            l12,
            l35,
            l46,
            eve_ancilla,
            format,
            out,
        } => {
            let cfg = SessionConfig {
                rounds,
                seed,
                test_fraction,
                labels: StartLabels { l12, l35, l46 },
                eve_enabled: eve,
                eve_ancilla,
            };
            cmd_run(&cfg, format, out.as_deref(), stdout, stderr)
        }
        Command::VerifyOracle => {
            if verify_oracle_with(swap_rule, stdout)? {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
        Command::Curves {
            max_pairs,
            sessions,
            seed,
            out,
        } => {
            let mut curve = DetectionCurve::closed_form(max_pairs)?;
            if let Some(s) = sessions {
                curve = curve.with_empirical(s, seed)?;
            }
            let path = out.or_else(|| default_path("curves.csv"));
            with_output(path.as_deref(), stdout, |w| Ok(curve.write_csv(w)?))
        }
        Command::Montecarlo {
            pairs,
            sessions,
            seed,
            no_eve,
        } => {
            let est = estimate_detection(pairs, sessions, seed, !no_eve)?;
            writeln!(
                stdout,
                "pairs={} sessions={} detected={} frequency={:.6} expected={:.6} sigma={:.6} within_3sigma={}",
                est.pairs,
                est.sessions,
                est.detected,
                est.frequency,
                est.expected,
                est.sigma,
                est.within(3.0)
            )?;
            Ok(())
        }
    }
}

fn default_path(name: &str) -> Option<PathBuf> {
    std::env::var_os(OUT_DIR_ENV).map(|d| PathBuf::from(d).join(name))
}

fn with_output(
    path: Option<&Path>,
    stdout: &mut dyn Write,
    body: impl FnOnce(&mut dyn Write) -> Result<(), Failure>,
) -> Result<(), Failure> {
    match path {
        None => body(stdout),
        Some(p) if p == Path::new("-") => body(stdout),
        Some(p) => {
            let file = File::create(p).map_err(|e| Failure::Io(format!("{}: {e}", p.display())))?;
            let mut w = BufWriter::new(file);
            body(&mut w)?;
            w.flush()?;
            Ok(())
        }
    }
}

/// Flat per-round projection used by `run --format csv`.
#[derive(Serialize)]
struct CsvRound {
    round: u64,
    alice_secret: BellLabel,
    bob_secret: BellLabel,
    public_announcement: BellLabel,
    alice_inferred_bob: BellLabel,
    bob_inferred_alice: BellLabel,
    transmissions: u32,
    eve_inferred_alice: Option<BellLabel>,
    eve_inferred_bob: Option<BellLabel>,
}

fn cmd_run(
    cfg: &SessionConfig,
    format: Format,
    out: Option<&Path>,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<(), Failure> {
    let t = Transcript::generate(cfg)?;
    let ext = match format {
        Format::Json => "jsonl",
        Format::Csv => "csv",
    };
    let path = out
        .map(Path::to_path_buf)
        .or_else(|| default_path(&format!("transcript-seed{}.{ext}", cfg.seed)));
    let to_stdout = path.as_deref().is_none_or(|p| p == Path::new("-"));
    with_output(path.as_deref(), stdout, |w| match format {
        Format::Json => Ok(t.write_jsonl(w)?),
        Format::Csv => {
            let mut csv = csv::Writer::from_writer(w);
            for r in &t.session.rounds {
                csv.serialize(CsvRound {
                    round: r.round,
                    alice_secret: r.alice_secret,
                    bob_secret: r.bob_secret,
                    public_announcement: r.public_announcement,
                    alice_inferred_bob: r.alice_inferred_bob,
                    bob_inferred_alice: r.bob_inferred_alice,
                    transmissions: r.transmissions,
                    eve_inferred_alice: r.eve.map(|e| e.inferred_alice),
                    eve_inferred_bob: r.eve.map(|e| e.inferred_bob),
                })
                .map_err(AnalysisError::from)?;
            }
            csv.flush()?;
            Ok(())
        }
    })?;
    let summary: &mut dyn Write = if to_stdout { stderr } else { stdout };
    let s = &t.summary;
    let rate = s.rate.rate.map_or_else(|| "n/a".to_owned(), |r| format!("{r}"));
    writeln!(
        summary,
        "rounds={} key_bits={} transmitted={} rate={} tested_pairs={} mismatches={} eve_detected={}{}",
        cfg.rounds,
        s.rate.key_bits,
        s.rate.transmitted_qubits,
        rate,
        s.test.pairs_tested,
        s.test.mismatches,
        s.test.eve_detected,
        if s.test.degenerate { " (no rounds tested)" } else { "" }
    )?;
    Ok(())
}

/// Runs both swap-rule checks against `rule` and prints the outcome.
/// Returns whether every case passed.
pub fn verify_oracle_with<F>(rule: F, out: &mut dyn Write) -> io::Result<bool>
where
    F: Fn(BellLabel, BellLabel, BellLabel) -> BellLabel + Copy,
{
    let table = reproduce_swap_table(rule);
    let oracle = match verify_against_oracle(rule) {
        Ok(r) => r,
        Err(e) => {
            writeln!(out, "oracle error: {e}")?;
            return Ok(false);
        }
    };
    let report = |out: &mut dyn Write, name: &str, r: &VerificationReport| -> io::Result<()> {
        writeln!(out, "{name}: {}/{} cases verified", r.passed(), r.cases)?;
        for d in &r.discrepancies {
            writeln!(out, "  {d}")?;
        }
        Ok(())
    };
    report(out, "table", &table)?;
    report(out, "oracle", &oracle)?;
    let clean = table.is_clean() && oracle.is_clean();
    if clean {
        writeln!(out, "{}/{} cases verified", oracle.passed(), oracle.cases)?;
    }
    Ok(clean)
}
