use std::path::Path;

use csv::{ReaderBuilder, StringRecord, Trim};

use super::PairedSample;
use crate::error::{Error, Result};
use crate::seed::Seed;

fn csv_error(e: &csv::Error) -> Error {
    Error::Csv {
        line: e.position().map_or(0, |p| p.line()),
        reason: e.to_string(),
    }
}

fn open(path: &Path) -> Result<csv::Reader<std::fs::File>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    Ok(ReaderBuilder::new().trim(Trim::All).from_reader(file))
}

fn column(headers: &StringRecord, name: &str) -> Option<usize> {
    headers.iter().position(|h| h.eq_ignore_ascii_case(name))
}

/// Reads `label,ssdm,dssm` rows (header required).
pub fn read_pairs_csv(path: &Path) -> Result<Vec<PairedSample>> {
    let mut reader = open(path)?;
    let mut out = Vec::new();
    for row in reader.deserialize::<PairedSample>() {
        let row = row.map_err(|e| csv_error(&e))?;
        if !(row.ssdm.is_finite() && row.dssm.is_finite()) {
            return Err(Error::Csv {
                line: out.len() as u64 + 2,
                reason: "losses must be finite".into(),
            });
        }
        out.push(row);
    }
    if out.is_empty() {
        return Err(Error::Csv {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    Ok(out)
}

pub fn write_pairs_csv(path: &Path, pairs: &[PairedSample]) -> Result<()> {
    let mut w = csv::Writer::from_path(path).map_err(|e| match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::io(path, io),
        other => Error::invalid(format!("{other:?}")),
    })?;
    for p in pairs {
        w.serialize(p).map_err(|e| Error::invalid(e.to_string()))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeedRecords {
    pub seeds: Vec<Seed>,
    /// Present when the file has a `cpu` column.
    pub cpu_flags: Option<Vec<bool>>,
}

fn parse_flag(s: &str) -> Option<bool> {
    match s.to_ascii_lowercase().as_str() {
        "1" | "true" | "yes" => Some(true),
        "0" | "false" | "no" => Some(false),
        _ => None,
    }
}

/// Reads a `seed` column and an optional `cpu` column of booleans.
pub fn read_seeds_csv(path: &Path) -> Result<SeedRecords> {
    let mut reader = open(path)?;
    let headers = reader.headers().map_err(|e| csv_error(&e))?.clone();
    let seed_col = column(&headers, "seed").ok_or(Error::Csv {
        line: 1,
        reason: "missing `seed` column".into(),
    })?;
    let cpu_col = column(&headers, "cpu");
    let mut seeds = Vec::new();
    let mut flags = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_error(&e))?;
        let line = record.position().map_or(0, |p| p.line());
        let field = |i: usize| record.get(i).unwrap_or("");
        let seed = field(seed_col).parse::<u64>().map_err(|e| Error::Csv {
            line,
            reason: format!("seed {:?}: {e}", field(seed_col)),
        })?;
        seeds.push(Seed(seed));
        if let Some(c) = cpu_col {
            flags.push(parse_flag(field(c)).ok_or_else(|| Error::Csv {
                line,
                reason: format!("cpu flag {:?} is not a boolean", field(c)),
            })?);
        }
    }
    if seeds.is_empty() {
        return Err(Error::Csv {
            line: 1,
            reason: "no data rows".into(),
        });
    }
    Ok(SeedRecords {
        seeds,
        cpu_flags: cpu_col.map(|_| flags),
    })
}
