//! Newline-delimited draw records: a meta line followed by one JSON record
//! per kept iteration. The format is append-only and crash-tolerant: a
//! truncated final line is detected and skipped, never mis-parsed.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inference::{DrawSnapshot, DrawsMeta, PosteriorDraws};

#[derive(Serialize, Deserialize)]
struct MetaRecord {
    meta: DrawsMeta,
}

/// Streams snapshots into an NDJSON file as they are produced.
pub struct DrawsWriter {
    inner: BufWriter<File>,
}

impl DrawsWriter {
    pub fn create(path: &Path, meta: &DrawsMeta) -> Result<Self> {
        let file = File::create(path)?;
        let mut inner = BufWriter::new(file);
        serde_json::to_writer(&mut inner, &MetaRecord { meta: meta.clone() })
            .map_err(|e| Error::data(format!("cannot serialize meta record: {e}")))?;
        inner.write_all(b"\n")?;
        Ok(DrawsWriter { inner })
    }

    pub fn write_snapshot(&mut self, snap: &DrawSnapshot) -> Result<()> {
        serde_json::to_writer(&mut self.inner, snap)
            .map_err(|e| Error::data(format!("cannot serialize draw record: {e}")))?;
        self.inner.write_all(b"\n")?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<()> {
        self.inner.flush()?;
        Ok(())
    }
}

/// Result of reading a draws file.
pub struct ReadOutcome {
    pub draws: PosteriorDraws,
    /// True when a truncated final line was skipped.
    pub skipped_partial: bool,
}

/// Read a draws file, validating every record against the meta line.
pub fn read_draws(path: &Path) -> Result<ReadOutcome> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::data(format!("cannot read {}: {e}", path.display())))?;
    let mut lines = text.split('\n').enumerate();
    let meta = match lines.next() {
        Some((_, first)) if !first.trim().is_empty() => {
            serde_json::from_str::<MetaRecord>(first)
                .map_err(|e| Error::data(format!("line 1: invalid meta record: {e}")))?
                .meta
        }
        _ => return Err(Error::data("draws file is missing its meta record")),
    };

    let mut draws = Vec::new();
    let mut skipped_partial = false;
    let complete = text.ends_with('\n');
    let last_index = text.trim_end_matches('\n').split('\n').count() - 1;
    for (idx, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        match serde_json::from_str::<DrawSnapshot>(line) {
            Ok(snap) => {
                validate_snapshot(&meta, &snap, idx + 1)?;
                draws.push(snap);
            }
            Err(e) => {
                if idx == last_index && !complete {
                    skipped_partial = true;
                } else {
                    return Err(Error::data(format!(
                        "line {}: invalid draw record: {e}",
                        idx + 1
                    )));
                }
            }
        }
    }
    Ok(ReadOutcome {
        draws: PosteriorDraws { meta, draws },
        skipped_partial,
    })
}

fn validate_snapshot(meta: &DrawsMeta, snap: &DrawSnapshot, line_no: usize) -> Result<()> {
    if snap.z.len() != meta.n_pops
        || snap.zeta.len() != meta.n_pops
        || snap
            .zeta
            .iter()
            .zip(meta.sizes.iter())
            .any(|(row, &size)| row.len() != size)
    {
        return Err(Error::data(format!(
            "line {line_no}: draw record shape disagrees with the meta record"
        )));
    }
    Ok(())
}
