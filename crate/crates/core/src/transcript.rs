//! Line-delimited JSON transcripts.
//!
//! A transcript is a header line, one line per round and a summary line.
//! Output is a pure function of the configuration, so replaying a seed
//! reproduces the file byte for byte.

use std::collections::BTreeMap;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::analysis::{eavesdropping_test, rate_report, AnalysisError, RateReport, TestReport};
use crate::protocol::{run_session, RoundRecord, SessionConfig, SessionTranscript};
use crate::random::RandomStream;

pub const FORMAT: &str = "swapqkd-transcript";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TranscriptError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("line {line}: {msg}")]
    Layout { line: usize, msg: String },
    #[error(transparent)]
    Analysis(#[from] AnalysisError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Header {
    pub format: String,
    pub version: u32,
    pub generator: String,
    pub config: SessionConfig,
    pub quantum_seed: u64,
    pub coin_seed: u64,
}

impl Header {
    pub fn for_config(config: &SessionConfig) -> Self {
        Self {
            format: FORMAT.to_owned(),
            version: FORMAT_VERSION,
            generator: concat!("swapqkd ", env!("CARGO_PKG_VERSION")).to_owned(),
            config: config.clone(),
            quantum_seed: config.quantum_seed(),
            coin_seed: config.coin_seed(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub test: TestReport,
    pub rate: RateReport,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
enum Line {
    Header(Header),
    Round(Box<RoundRecord>),
    Summary(Summary),
}

/// A complete session as written to disk.
#[derive(Clone, Debug, PartialEq)]
pub struct Transcript {
    pub header: Header,
    pub session: SessionTranscript,
    pub summary: Summary,
}

impl Transcript {
    /// Runs the session described by `config` and its eavesdropping test.
    pub fn generate(config: &SessionConfig) -> Result<Self, TranscriptError> {
        let session = run_session(config, &BTreeMap::new()).map_err(AnalysisError::from)?;
        let mut coin = RandomStream::new(config.coin_seed());
        let test = eavesdropping_test(&session, config.test_fraction, &mut coin)?;
        let rate = rate_report(&session);
        Ok(Self {
            header: Header::for_config(config),
            session,
            summary: Summary { test, rate },
        })
    }

    pub fn write_jsonl<W: Write>(&self, mut out: W) -> Result<(), TranscriptError> {
        let mut put = |line: &Line| -> Result<(), TranscriptError> {
            serde_json::to_writer(&mut out, line).map_err(|source| TranscriptError::Json { line: 0, source })?;
            out.write_all(b"\n")?;
            Ok(())
        };
        put(&Line::Header(self.header.clone()))?;
        for r in &self.session.rounds {
            put(&Line::Round(Box::new(r.clone())))?;
        }
        put(&Line::Summary(self.summary.clone()))?;
        out.flush()?;
        Ok(())
    }

    pub fn to_jsonl(&self) -> Result<String, TranscriptError> {
        let mut buf = Vec::new();
        self.write_jsonl(&mut buf)?;
        Ok(String::from_utf8(buf).expect("serde_json writes utf-8"))
    }

    /// Parses a transcript. The final role map is recomputed from the last
    /// round, since it is a function of it.
    pub fn read_jsonl<R: BufRead>(input: R) -> Result<Self, TranscriptError> {
        let mut header = None;
        let mut rounds = Vec::new();
        let mut summary = None;
        for (i, line) in input.lines().enumerate() {
            let n = i + 1;
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let parsed: Line =
                serde_json::from_str(&line).map_err(|source| TranscriptError::Json { line: n, source })?;
            let layout = |msg: &str| TranscriptError::Layout { line: n, msg: msg.to_owned() };
            match parsed {
                Line::Header(h) if header.is_none() && n == 1 => header = Some(h),
                Line::Header(_) => return Err(layout("unexpected header")),
                Line::Round(_) | Line::Summary(_) if header.is_none() => {
                    return Err(layout("missing header"))
                }
                Line::Round(_) if summary.is_some() => return Err(layout("round after summary")),
                Line::Round(r) => rounds.push(*r),
                Line::Summary(_) if summary.is_some() => return Err(layout("duplicate summary")),
                Line::Summary(s) => summary = Some(s),
            }
        }
        let header = header.ok_or(TranscriptError::Layout { line: 0, msg: "empty transcript".into() })?;
        if header.format != FORMAT || header.version != FORMAT_VERSION {
            return Err(TranscriptError::Layout {
                line: 1,
                msg: format!("unsupported format {} v{}", header.format, header.version),
            });
        }
        let summary = summary.ok_or(TranscriptError::Layout { line: 0, msg: "missing summary".into() })?;
        let final_roles = rounds
            .last()
            .map(|r: &RoundRecord| r.roles.rotate())
            .unwrap_or_else(crate::protocol::RoleMap::initial);
        Ok(Self {
            header,
            session: SessionTranscript { rounds, final_roles },
            summary,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_with_and_without_eve() {
        for eve_enabled in [false, true] {
            let cfg = SessionConfig {
                rounds: 12,
                seed: 99,
                test_fraction: 0.25,
                eve_enabled,
                ..SessionConfig::default()
            };
            let t = Transcript::generate(&cfg).unwrap();
            let text = t.to_jsonl().unwrap();
            assert_eq!(text.lines().count(), 14);
            let back = Transcript::read_jsonl(text.as_bytes()).unwrap();
            assert_eq!(back, t);
            assert_eq!(back.to_jsonl().unwrap(), text);
            assert_eq!(text.contains("\"eve\":"), eve_enabled);
        }
    }

    #[test]
    fn rejects_bad_layout() {
        let cfg = SessionConfig { rounds: 2, ..SessionConfig::default() };
        let text = Transcript::generate(&cfg).unwrap().to_jsonl().unwrap();
        let lines: Vec<&str> = text.lines().collect();
        let no_header = lines[1..].join("\n");
        assert!(Transcript::read_jsonl(no_header.as_bytes()).is_err());
        let no_summary = lines[..3].join("\n");
        assert!(Transcript::read_jsonl(no_summary.as_bytes()).is_err());
        assert!(Transcript::read_jsonl("{not json".as_bytes()).is_err());
    }
}
