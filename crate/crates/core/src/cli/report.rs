//! Line-delimited JSON report records.
//!
//! Every record carries a `record` tag. Floats are written in shortest
//! round-trip form, so parsing a report gives back the exact values.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::CliError;
use crate::embedding::EmbedderFingerprint;
use crate::engine::{AuditRecord, DeficitReport, LoopVerdict, Thresholds};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunHeader {
    pub command: String,
    pub tool_version: String,
    pub thresholds: Thresholds,
    pub embedder: Option<EmbedderFingerprint>,
    pub transformer: Option<String>,
    pub seed: Option<u64>,
    pub mock: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ErrorRecord {
    pub element_id: Option<String>,
    pub sequence_ref: Option<String>,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IngestRecord {
    pub model: String,
    pub dim: usize,
    pub n_texts: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "snake_case")]
pub enum ReportRecord {
    Run(RunHeader),
    DeficitReport(DeficitReport),
    Error(ErrorRecord),
    LoopVerdict(LoopVerdict),
    Audit(AuditRecord),
    Ingest(IngestRecord),
}

pub fn write_records(records: &[ReportRecord], mut w: impl Write) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_records(r: impl BufRead) -> Result<Vec<ReportRecord>, CliError> {
    let mut records = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line.map_err(|e| CliError::Config(format!("cannot read report: {e}")))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line)
            .map_err(|e| CliError::Config(format!("report line {}: {e}", i + 1)))?;
        records.push(record);
    }
    Ok(records)
}

/// Human-readable summary of a report, one table per record kind present.
pub fn render_table(records: &[ReportRecord]) -> String {
    let mut out = String::new();
    let mut deficits = Vec::new();
    let mut errors = Vec::new();
    for r in records {
        match r {
            ReportRecord::Run(h) => {
                let _ = writeln!(
                    out,
                    "run: {} (xi={}, epsilon={}, f_scale={}{})",
                    h.command,
                    h.thresholds.xi,
                    h.thresholds.epsilon,
                    h.thresholds.f_scale,
                    h.embedder
                        .as_ref()
                        .map(|e| format!(", embedder={} dim={}", e.model, e.dim))
                        .unwrap_or_default()
                );
            }
            ReportRecord::DeficitReport(d) => deficits.push(d),
            ReportRecord::Error(e) => errors.push(e),
            _ => {}
        }
    }
    if !deficits.is_empty() {
        let _ = writeln!(
            out,
            "\n{:<16} {:<14} {:>12} {:>12} {:>10} {:>16}  loop",
            "element", "sequence", "delta", "q_value", "gap", "signature"
        );
        for d in deficits {
            let s = &d.signature;
            let _ = writeln!(
                out,
                "{:<16} {:<14} {:>12.6e} {:>12.6e} {:>10.2e} {:>16}  {}",
                d.element_id,
                d.sequence_ref,
                d.delta,
                d.q_value,
                d.identity_gap,
                format!("({}, {}, {})", s.n_plus, s.n_zero, s.n_minus),
                if d.is_loop_member { "yes" } else { "no" }
            );
        }
    }
    for r in records {
        match r {
            ReportRecord::LoopVerdict(v) => {
                let _ = writeln!(
                    out,
                    "\nverdict {}: is_loop={} max={:.6e} mean={:.6e} xi={} n={}{}",
                    v.sequence_ref,
                    v.is_loop,
                    v.max_deficit,
                    v.mean_deficit,
                    v.xi,
                    v.n_elements,
                    if v.partial {
                        format!(" (partial, {} failed)", v.n_failed)
                    } else {
                        String::new()
                    }
                );
            }
            ReportRecord::Audit(a) => {
                let _ = writeln!(
                    out,
                    "\naudit {:?} of {} (inverse {}): passes={} pass_fraction={} bound={} n={}",
                    a.mode, a.step_id, a.inverse_step_id, a.passes, a.pass_fraction, a.bound, a.n_elements
                );
                for (id, d) in a.element_ids.iter().zip(&a.distances) {
                    let _ = writeln!(out, "  {id:<16} {d:.6e}");
                }
            }
            ReportRecord::Ingest(i) => {
                let _ = writeln!(
                    out,
                    "\ningest: {} texts, model {} (dim {})",
                    i.n_texts, i.model, i.dim
                );
            }
            _ => {}
        }
    }
    if !errors.is_empty() {
        let _ = writeln!(out, "\nerrors:");
        for e in errors {
            let _ = writeln!(out, "  {}: {}", e.element_id.as_deref().unwrap_or("-"), e.message);
        }
    }
    out
}
