//! Machine-readable result records: CSV with a fixed header, or JSON lines
//! with the same field names.

use std::io::Write;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Jsonl,
}

#[derive(Debug, thiserror::Error)]
pub enum ReportError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub const BENCH_CSV_HEADER: &str = "lambda,h,trial,setup_ms,solve_ms,total_ms,rank,candidates,verified,timed_out";

/// One timed attack trial. Field order is the CSV column order.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub lambda: usize,
    /// MISR length; empty for direct scan-out.
    pub h: Option<usize>,
    pub trial: usize,
    /// Building the coefficient matrix.
    pub setup_ms: f64,
    pub solve_ms: f64,
    /// Whole trial, including oracle queries and verification.
    pub total_ms: f64,
    pub rank: usize,
    /// `2^(λ - rank)`, saturating at `u128::MAX`.
    pub candidates: u128,
    pub verified: bool,
    pub timed_out: bool,
}

/// Observations of one `simulate` trial, bit strings with element 0 first.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SimulationRecord {
    pub lambda: usize,
    pub h: Option<usize>,
    pub trial: usize,
    pub taps: String,
    pub seed: String,
    pub observations: String,
}

/// Writes `records` in the requested format. CSV output always carries the
/// header, even when there are no records.
pub fn emit_results<T, W: Write>(records: &[T], format: Format, out: W) -> Result<(), ReportError>
where
    T: Serialize + HeaderFields,
{
    match format {
        Format::Csv => {
            let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
            w.write_record(T::FIELDS)?;
            for r in records {
                w.serialize(r)?;
            }
            w.flush()?;
        }
        Format::Jsonl => {
            let mut out = out;
            for r in records {
                serde_json::to_writer(&mut out, r)?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
    }
    Ok(())
}

pub fn emit_to_string<T: Serialize + HeaderFields>(records: &[T], format: Format) -> Result<String, ReportError> {
    let mut buf = Vec::new();
    emit_results(records, format, &mut buf)?;
    Ok(String::from_utf8(buf).expect("csv and json output are utf-8"))
}

/// Reads records written by [`emit_results`].
pub fn parse_records<T: DeserializeOwned>(text: &str, format: Format) -> Result<Vec<T>, ReportError> {
    match format {
        Format::Csv => {
            let mut r = csv::Reader::from_reader(text.as_bytes());
            r.deserialize().map(|row| row.map_err(ReportError::from)).collect()
        }
        Format::Jsonl => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(ReportError::from))
            .collect(),
    }
}

/// Column names, written even for an empty record list.
pub trait HeaderFields {
    const FIELDS: &'static [&'static str];
}

impl HeaderFields for BenchRecord {
    const FIELDS: &'static [&'static str] = &[
        "lambda",
        "h",
        "trial",
        "setup_ms",
        "solve_ms",
        "total_ms",
        "rank",
        "candidates",
        "verified",
        "timed_out",
    ];
}

impl HeaderFields for SimulationRecord {
    const FIELDS: &'static [&'static str] = &["lambda", "h", "trial", "taps", "seed", "observations"];
}
