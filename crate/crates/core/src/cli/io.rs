use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::value::RawValue;

use crate::active::Candidate;
use crate::error::{Error, Result};
use crate::model::Dataset;

#[derive(Deserialize)]
struct LabeledRow {
    x: f64,
    y: f64,
}

#[derive(Deserialize)]
struct CandidateRow {
    x: f64,
    #[serde(default)]
    y: Option<f64>,
}

fn reader(path: &Path, required: &[&str]) -> Result<csv::Reader<fs::File>> {
    let file = fs::File::open(path).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))?;
    let mut rdr = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(file);
    let headers = rdr.headers()?.clone();
    for col in required {
        if !headers.iter().any(|h| h == *col) {
            return Err(Error::InvalidInput(format!("{}: missing '{col}' column in header", path.display())));
        }
    }
    Ok(rdr)
}

/// Labeled data with header `x,y`.
pub fn read_dataset(path: &Path) -> Result<Dataset> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for row in reader(path, &["x", "y"])?.deserialize() {
        let row: LabeledRow = row?;
        xs.push(row.x);
        ys.push(row.y);
    }
    if xs.is_empty() {
        return Err(Error::InvalidInput(format!("{}: no data rows", path.display())));
    }
    Dataset::from_scalars(&xs, &ys)
}

/// Candidates with header `x` and an optional `y` column.
pub fn read_candidates(path: &Path) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for row in reader(path, &["x"])?.deserialize() {
        let row: CandidateRow = row?;
        if !row.x.is_finite() || row.y.is_some_and(|y| !y.is_finite()) {
            return Err(Error::InvalidInput(format!("{}: non-finite candidate value", path.display())));
        }
        out.push(Candidate { x: row.x.into(), y: row.y });
    }
    Ok(out)
}

/// Shortest round-trip text for a float in CSV output.
pub fn csv_float(v: f64) -> String {
    format!("{v:e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// A JSON number with 17 significant digits.
pub fn json_float(v: f64) -> Result<Box<RawValue>> {
    if !v.is_finite() {
        return Err(Error::NumericalBreakdown(format!("cannot serialize non-finite value {v}")));
    }
    Ok(RawValue::from_string(format!("{v:.16e}"))?)
}

pub fn json_floats<'a>(values: impl IntoIterator<Item = &'a f64>) -> Result<Vec<Box<RawValue>>> {
    values.into_iter().map(|&v| json_float(v)).collect()
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(path, text)?;
    Ok(())
}

/// Record of one command-line run. Field order is the key order on disk.
#[derive(Debug, Serialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub inputs: Vec<PathBuf>,
    pub seed: u64,
    pub config: serde_json::Value,
    pub version: &'static str,
    pub outputs: Vec<PathBuf>,
    /// Seconds since the Unix epoch; the only non-deterministic field.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, seed: u64, config: serde_json::Value) -> Self {
        let timestamp = std::time::SystemTime::now()
            .duration_since(std::time::UNIX_EPOCH)
            .map(|d| d.as_secs())
            .unwrap_or(0);
        Self {
            subcommand: subcommand.to_string(),
            inputs: Vec::new(),
            seed,
            config,
            version: env!("CARGO_PKG_VERSION"),
            outputs: Vec::new(),
            timestamp,
        }
    }

    pub fn file_name(&self) -> String {
        format!("{}.manifest.json", self.subcommand)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_text_roundtrips() {
        for v in [0.1, -1.0 / 3.0, 1e-300, 123456.789, 0.0] {
            let raw = json_float(v).unwrap();
            assert_eq!(raw.get().parse::<f64>().unwrap(), v);
            assert_eq!(csv_float(v).parse::<f64>().unwrap(), v);
        }
        assert!(json_float(f64::NAN).is_err());
    }

    #[test]
    fn csv_requires_header_columns() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("d.csv");
        fs::write(&p, "a,b\n1,2\n").unwrap();
        assert!(matches!(read_dataset(&p), Err(Error::InvalidInput(_))));
        fs::write(&p, "x,y\n1,2\n3,oops\n").unwrap();
        assert!(matches!(read_dataset(&p), Err(Error::Csv(_))));
        fs::write(&p, "x,y\n1,2\n-0.5,1e-3\n").unwrap();
        assert_eq!(read_dataset(&p).unwrap().len(), 2);
        fs::write(&p, "x\n0.25\n").unwrap();
        let c = read_candidates(&p).unwrap();
        assert_eq!(c[0].y, None);
    }
}
