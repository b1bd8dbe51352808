//! Result files and transcript records.
//!
//! CSV columns are fixed (see [`CSV_HEADER`]); floats carry six significant
//! digits and absent values are empty cells. The text format is one JSON
//! object per row with the same field names.
//!
//! A transcript line is a JSON object with keys `protocol`, `params`
//! (`{m,n,p,q}`), `R_B`, `eta` (`+`/`x` per qubit), `P`, `x`, `R_x`, `Q`, `Pi`
//! (slot of each pre-scramble position), `b` and `result`. Bit strings are
//! written as `"0101"`; fields a run never reached are `null`.

use std::fs::File;
use std::io::{self, BufWriter, Read, Write};
use std::path::{Path, PathBuf};

use qbc_core::protocol::{
    run_honest, run_honest_prime, CommitBit, ProtocolParams, Transcript, Variant, Verdict,
};
use qbc_core::qstate::Basis;
use qbc_core::BitString;
use serde::{Deserialize, Serialize};

use crate::config::{ConfigError, ExperimentConfig};
use crate::run::{trial_rng, ResultRow};

pub const CSV_HEADER: [&str; 19] = [
    "protocol",
    "alice",
    "bob",
    "m",
    "n",
    "p",
    "q",
    "trials",
    "seed",
    "accept",
    "stderr",
    "beta0",
    "beta1",
    "lambda",
    "reject_mixing",
    "reject_unmarked",
    "reject_outcome",
    "reject_crosscheck",
    "ms",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

#[derive(Debug, thiserror::Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: io::Error,
    },
    #[error("malformed CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("malformed record: {0}")]
    Record(String),
}

/// Six significant digits, no exponent, trailing zeros trimmed.
pub fn sig6(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    if x == 0.0 {
        return "0".to_owned();
    }
    // Round in scientific form first so a carry (9.9999996 → 1.00000e1)
    // moves the exponent.
    let sci = format!("{x:.5e}");
    let exponent: i32 = sci
        .split_once('e')
        .and_then(|(_, e)| e.parse().ok())
        .expect("exponent");
    let rounded: f64 = sci.parse().expect("round trip");
    let decimals = (5 - exponent).max(0) as usize;
    let s = format!("{rounded:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_owned()
    } else {
        s
    }
}

fn opt(x: Option<f64>) -> String {
    x.map(sig6).unwrap_or_default()
}

fn csv_record(r: &ResultRow) -> Vec<String> {
    vec![
        r.protocol.clone(),
        r.alice.clone(),
        r.bob.clone(),
        r.m.to_string(),
        r.n.to_string(),
        r.p.to_string(),
        r.q.to_string(),
        r.trials.to_string(),
        r.seed.to_string(),
        sig6(r.accept),
        sig6(r.stderr),
        opt(r.beta0),
        opt(r.beta1),
        opt(r.lambda),
        r.reject_mixing.to_string(),
        r.reject_unmarked.to_string(),
        r.reject_outcome.to_string(),
        r.reject_crosscheck.to_string(),
        opt(r.ms),
    ]
}

pub fn write_rows<W: Write>(rows: &[ResultRow], format: Format, out: W) -> Result<(), OutputError> {
    match format {
        Format::Csv => {
            let mut w = csv::Writer::from_writer(out);
            w.write_record(CSV_HEADER)?;
            for r in rows {
                w.write_record(csv_record(r))?;
            }
            w.flush().map_err(|source| OutputError::Io {
                path: "<writer>".into(),
                source,
            })?;
        }
        Format::Text => {
            let mut out = out;
            for r in rows {
                let mut line = serde_json::to_string(r).map_err(|e| OutputError::Record(e.to_string()))?;
                line.push('\n');
                out.write_all(line.as_bytes()).map_err(|source| OutputError::Io {
                    path: "<writer>".into(),
                    source,
                })?;
            }
        }
    }
    Ok(())
}

/// Writes to `destination`, or stdout when it is `None`. I/O failures name
/// the destination.
pub fn emit(rows: &[ResultRow], format: Format, destination: Option<&Path>) -> Result<(), OutputError> {
    let label = destination.map_or_else(|| PathBuf::from("<stdout>"), Path::to_path_buf);
    let relabel = |e: OutputError| match e {
        OutputError::Io { source, .. } => OutputError::Io {
            path: label.display().to_string(),
            source,
        },
        OutputError::Csv(e) if e.is_io_error() => match e.into_kind() {
            csv::ErrorKind::Io(source) => OutputError::Io {
                path: label.display().to_string(),
                source,
            },
            _ => unreachable!("checked is_io_error"),
        },
        other => other,
    };
    match destination {
        Some(path) => {
            let file = File::create(path).map_err(|source| OutputError::Io {
                path: path.display().to_string(),
                source,
            })?;
            let mut w = BufWriter::new(file);
            write_rows(rows, format, &mut w).map_err(relabel)?;
            w.flush().map_err(|source| OutputError::Io {
                path: path.display().to_string(),
                source,
            })
        }
        None => write_rows(rows, format, io::stdout().lock()).map_err(relabel),
    }
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, i: usize) -> Result<T, OutputError> {
    rec.get(i)
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| OutputError::Record(format!("column {} ({:?})", CSV_HEADER[i], rec.get(i))))
}

fn opt_field(rec: &csv::StringRecord, i: usize) -> Result<Option<f64>, OutputError> {
    match rec.get(i) {
        Some("") => Ok(None),
        _ => field(rec, i).map(Some),
    }
}

/// Parses CSV produced by [`write_rows`].
pub fn read_csv<R: Read>(input: R) -> Result<Vec<ResultRow>, OutputError> {
    let mut reader = csv::Reader::from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().ne(CSV_HEADER.iter().copied()) {
        return Err(OutputError::Record(format!("unexpected header {header:?}")));
    }
    reader
        .records()
        .map(|rec| {
            let rec = rec?;
            Ok(ResultRow {
                protocol: field(&rec, 0)?,
                alice: field(&rec, 1)?,
                bob: field(&rec, 2)?,
                m: field(&rec, 3)?,
                n: field(&rec, 4)?,
                p: field(&rec, 5)?,
                q: field(&rec, 6)?,
                trials: field(&rec, 7)?,
                seed: field(&rec, 8)?,
                accept: field(&rec, 9)?,
                stderr: field(&rec, 10)?,
                beta0: opt_field(&rec, 11)?,
                beta1: opt_field(&rec, 12)?,
                lambda: opt_field(&rec, 13)?,
                reject_mixing: field(&rec, 14)?,
                reject_unmarked: field(&rec, 15)?,
                reject_outcome: field(&rec, 16)?,
                reject_crosscheck: field(&rec, 17)?,
                ms: opt_field(&rec, 18)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParamsRecord {
    pub m: usize,
    pub n: usize,
    pub p: usize,
    pub q: usize,
}

/// One run of an honest protocol, as written to a transcript file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub protocol: String,
    pub params: ParamsRecord,
    #[serde(rename = "R_B")]
    pub r_b: String,
    pub eta: String,
    #[serde(rename = "P")]
    pub p: Option<String>,
    pub x: Option<String>,
    #[serde(rename = "R_x")]
    pub r_x: Option<String>,
    #[serde(rename = "Q")]
    pub q: Option<String>,
    #[serde(rename = "Pi")]
    pub pi: Option<Vec<usize>>,
    pub b: u8,
    pub result: String,
}

fn bits(b: &Option<BitString>) -> Option<String> {
    b.as_ref().map(ToString::to_string)
}

impl From<&Transcript> for TranscriptRecord {
    fn from(t: &Transcript) -> Self {
        Self {
            protocol: match t.variant {
                Variant::Decoy => "p",
                Variant::Scrambled => "pprime",
            }
            .to_owned(),
            params: ParamsRecord {
                m: t.params.m(),
                n: t.params.n(),
                p: t.params.p(),
                q: t.params.q(),
            },
            r_b: t.bob.bits().to_string(),
            eta: t.bob.bases().iter().map(|b| b.symbol()).collect(),
            p: bits(&t.survivors),
            x: bits(&t.marks),
            r_x: bits(&t.outcomes),
            q: bits(&t.decoys),
            pi: t.permutation.as_ref().map(|p| p.targets().to_vec()),
            b: t.bit.as_u8(),
            result: t.verdict.name().to_owned(),
        }
    }
}

impl TranscriptRecord {
    /// Structural checks a replaying reader relies on.
    pub fn check(&self) -> Result<(), OutputError> {
        let bad = |what: &str| OutputError::Record(what.to_owned());
        let params = ProtocolParams::new(self.params.m, self.params.n, self.params.p, self.params.q)
            .map_err(|e| bad(&e.to_string()))?;
        let parse = |s: &str| s.parse::<BitString>().map_err(|e| bad(&e.to_string()));
        if parse(&self.r_b)?.len() != params.p() || self.eta.chars().count() != params.p() {
            return Err(bad("R_B/eta length"));
        }
        if self.eta.chars().any(|c| Basis::from_symbol(c).is_none()) {
            return Err(bad("eta symbol"));
        }
        if CommitBit::from_u8(self.b).is_none() || Verdict::from_name(&self.result).is_none() {
            return Err(bad("b/result"));
        }
        let checks = [
            (&self.p, params.p(), params.n()),
            (&self.x, params.n(), params.m()),
            (&self.q, params.q(), params.n()),
        ];
        for (mask, len, weight) in checks {
            if let Some(s) = mask {
                let m = parse(s)?;
                if m.len() != len || m.weight() != weight {
                    return Err(bad("mask length/weight"));
                }
            }
        }
        Ok(())
    }
}

/// Runs `config.trials` honest trials (first sweep point) and writes one
/// transcript line each. Uses the same per-trial generators as
/// [`crate::run_experiment`].
pub fn write_transcripts<W: Write>(config: &ExperimentConfig, out: W) -> Result<(), TranscriptError> {
    let (c, scenario) = config.validate()?.into_iter().next().expect("at least one point");
    if c.alice != qbc_core::adversary::AliceStrategy::Honest
        || c.bob != qbc_core::adversary::BobStrategy::Honest
    {
        return Err(ConfigError::TranscriptsNeedHonest.into());
    }
    let mut out = BufWriter::new(out);
    for i in 0..c.trials {
        let mut rng = trial_rng(c.seed, i);
        let bit = CommitBit::random(&mut rng);
        let (t, _) = match scenario.variant {
            Variant::Decoy => run_honest(&scenario.params, bit, &scenario.settings, &mut rng),
            Variant::Scrambled => {
                run_honest_prime(&scenario.params, bit, scenario.settings.threshold, &mut rng)
            }
        }
        .map_err(|e| TranscriptError::Run(e.to_string()))?;
        let line = serde_json::to_string(&TranscriptRecord::from(&t))
            .map_err(|e| TranscriptError::Run(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[derive(Debug, thiserror::Error)]
pub enum TranscriptError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("{0}")]
    Run(String),
}
