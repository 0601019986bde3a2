//! Emitted record shapes plus the line and CSV writers.
//!
//! Every record carries a `kind` discriminator and round-trips through
//! [`Record`], so downstream tooling can parse mixed streams line by line.

use anyhow::{Context, Result};
use mdi_qss::adversary::{AttackKind, DetectionStats};
use mdi_qss::protocol::{SessionConfig, Verdict};
use serde::{Deserialize, Serialize};
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Record {
    RunReport(RunReport),
    SweepCell(SweepCell),
    Decomposition(DecompositionLine),
    TableCheck(TableCheck),
    TableCheckSummary(TableCheckSummary),
    Detection(DetectionReport),
}

/// Summary of a single session, fully determined by (config, seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: SessionConfig,
    pub verdict: Verdict,
    pub check_error_rate: f64,
    pub analyzer_success_fraction: f64,
    pub usable_round_count: usize,
    /// Fraction of decoded message bits differing from the sent message;
    /// absent when nothing was encoded.
    pub message_bit_error_rate: Option<f64>,
    pub integrity_ok: Option<bool>,
    /// Never populated in emitted records, which must be byte-reproducible;
    /// timings go to standard error instead.
    pub wall_time: Option<f64>,
}

/// One grid cell of a sweep, kept flat so the CSV emitter can use it as-is.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCell {
    pub cell: usize,
    pub attack: AttackKind,
    pub noise_p: f64,
    pub n_receivers: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub check_error_rate: f64,
    pub analyzer_success_fraction: f64,
    pub usable_round_count: usize,
    pub message_bit_error_rate: Option<f64>,
    pub integrity_ok: Option<bool>,
}

/// One nonzero component of a product state in the entangled basis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionLine {
    pub photons: Vec<String>,
    pub label: String,
    pub amplitude_re: f64,
    pub amplitude_im: f64,
    pub magnitude: f64,
    pub probability: f64,
}

/// One closed-form-rule vs projection-oracle comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheck {
    pub label: String,
    pub receivers: Vec<String>,
    pub rule: String,
    pub oracle: String,
    pub agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableCheckSummary {
    pub cases: usize,
    pub agreements: usize,
    pub all_agree: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DetectionReport {
    pub attack: AttackKind,
    #[serde(flatten)]
    pub stats: DetectionStats,
}

fn open_writer(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("cannot create {}", path.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

/// Writes one JSON object per line through a single writer.
pub fn emit_lines(records: &[Record], out: Option<&Path>) -> Result<()> {
    let mut writer = open_writer(out)?;
    for record in records {
        serde_json::to_writer(&mut writer, record)?;
        writer.write_all(b"\n")?;
    }
    writer.flush()?;
    Ok(())
}

/// Writes sweep cells as CSV with a header row.
pub fn emit_csv(cells: &[SweepCell], out: Option<&Path>) -> Result<()> {
    let mut writer = csv::Writer::from_writer(open_writer(out)?);
    for cell in cells {
        writer.serialize(cell)?;
    }
    writer.flush()?;
    Ok(())
}
