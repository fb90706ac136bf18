//! Line-delimited JSON trajectory files.
//!
//! ```text
//! {"format_version":1,"dim":3,"model":"…","sequence_ref":"…","element_id":"…"}
//! {"step":0,"text":"…","vector":[…]}
//! {"step":1,"text":"…","vector":[…]}
//! ```
//!
//! Floats are written in shortest round-trip form and parsed with correct
//! rounding, so vectors survive a write/read cycle bit for bit.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::EmbedderFingerprint;
use crate::engine::Trajectory;
use crate::geometry::EmbeddingVector;

pub const TRAJECTORY_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum TrajectoryFileError {
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("line {line}: {message}")]
    Format { line: usize, message: String },
    #[error("trajectory format version {found} is not supported (this build reads version {supported})")]
    VersionMismatch { found: u64, supported: u32 },
}

#[derive(Serialize, Deserialize)]
struct Header {
    format_version: u32,
    dim: usize,
    model: String,
    sequence_ref: String,
    element_id: String,
}

#[derive(Serialize, Deserialize)]
struct StepLine {
    step: usize,
    text: String,
    vector: Vec<f64>,
}

pub fn write_trajectory(traj: &Trajectory, path: impl AsRef<Path>) -> Result<(), TrajectoryFileError> {
    let mut w = BufWriter::new(File::create(path)?);
    write_trajectory_to(traj, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_trajectory_to(traj: &Trajectory, mut w: impl Write) -> Result<(), TrajectoryFileError> {
    let header = Header {
        format_version: TRAJECTORY_FORMAT_VERSION,
        dim: traj.dim(),
        model: traj.embedder().model.clone(),
        sequence_ref: traj.sequence_ref().to_string(),
        element_id: traj.element_id().to_string(),
    };
    serde_json::to_writer(&mut w, &header).map_err(std::io::Error::from)?;
    writeln!(w)?;
    for (step, (text, vector)) in traj.texts().iter().zip(traj.vectors()).enumerate() {
        let line = StepLine {
            step,
            text: text.clone(),
            vector: vector.as_slice().to_vec(),
        };
        serde_json::to_writer(&mut w, &line).map_err(std::io::Error::from)?;
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_trajectory(path: impl AsRef<Path>) -> Result<Trajectory, TrajectoryFileError> {
    read_trajectory_from(File::open(path)?)
}

pub fn read_trajectory_from(r: impl Read) -> Result<Trajectory, TrajectoryFileError> {
    let format = |line: usize, message: String| TrajectoryFileError::Format { line, message };
    let mut lines = BufReader::new(r).lines().enumerate();

    let header_text = match lines.next() {
        Some((_, l)) => l?,
        None => return Err(format(1, "empty file".into())),
    };
    let raw: serde_json::Value =
        serde_json::from_str(&header_text).map_err(|e| format(1, format!("bad header: {e}")))?;
    let version = raw
        .get("format_version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| format(1, "header lacks an integer format_version".into()))?;
    if version != TRAJECTORY_FORMAT_VERSION as u64 {
        return Err(TrajectoryFileError::VersionMismatch {
            found: version,
            supported: TRAJECTORY_FORMAT_VERSION,
        });
    }
    let header: Header = serde_json::from_value(raw).map_err(|e| format(1, format!("bad header: {e}")))?;

    let mut texts = Vec::new();
    let mut vectors = Vec::new();
    let mut last_line = 1;
    for (i, line) in lines {
        let line_no = i + 1;
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        last_line = line_no;
        let step: StepLine =
            serde_json::from_str(&line).map_err(|e| format(line_no, format!("bad step record: {e}")))?;
        if step.step != texts.len() {
            return Err(format(
                line_no,
                format!("expected step {}, found step {}", texts.len(), step.step),
            ));
        }
        if step.vector.len() != header.dim {
            return Err(format(
                line_no,
                format!(
                    "vector has dimension {}, header says {}",
                    step.vector.len(),
                    header.dim
                ),
            ));
        }
        let vector = EmbeddingVector::new(step.vector).map_err(|e| format(line_no, e.to_string()))?;
        texts.push(step.text);
        vectors.push(vector);
    }

    let embedder = EmbedderFingerprint {
        model: header.model,
        dim: header.dim,
    };
    Trajectory::new(header.element_id, texts, vectors, header.sequence_ref, embedder)
        .map_err(|e| format(last_line, e.to_string()))
}
