use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use super::{Dataset, Observation, Role};
use crate::{Error, Result};

/// Writes a dataset as CSV: one `#` comment line (tool version and seed),
/// the column header, then one row per observation. Reals carry 17
/// significant digits so the file reads back bit-exactly.
pub fn write_dataset<O: Observation>(path: &Path, dataset: &Dataset<O>, seed: u64) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut out = BufWriter::new(file);
    write_dataset_to(&mut out, dataset, seed, &[]).map_err(|e| Error::io(path, e))?;
    out.flush().map_err(|e| Error::io(path, e))
}

/// [`write_dataset`] to any writer, with extra `#` lines after the first.
pub fn write_dataset_to<O: Observation, W: Write>(
    out: &mut W,
    dataset: &Dataset<O>,
    seed: u64,
    notes: &[String],
) -> std::io::Result<()> {
    writeln!(
        out,
        "# tsmc {} seed={} role={}",
        crate::VERSION,
        seed,
        dataset.role()
    )?;
    for n in notes {
        writeln!(out, "# {n}")?;
    }
    writeln!(out, "{}", O::COLUMNS.join(","))?;
    for o in dataset.observations() {
        writeln!(out, "{}", o.to_fields().join(","))?;
    }
    Ok(())
}

/// Reads a dataset written by [`write_dataset`]. `#` lines are skipped; the
/// header must match the observation type's columns.
pub fn read_dataset<O: Observation>(path: &Path, role: Role) -> Result<Dataset<O>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let reader = BufReader::new(file);
    let mut header_seen = false;
    let mut obs = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
        if !header_seen {
            if fields != O::COLUMNS {
                return Err(Error::InvalidArgument(format!(
                    "{}: header {:?} does not match expected {:?}",
                    path.display(),
                    fields,
                    O::COLUMNS
                )));
            }
            header_seen = true;
            continue;
        }
        let o = O::from_fields(&fields).map_err(|reason| Error::InvalidObservation {
            row: lineno + 1,
            reason,
        })?;
        obs.push(o);
    }
    Dataset::new(role, obs)
}
