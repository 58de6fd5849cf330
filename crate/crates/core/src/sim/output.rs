use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rates::RateReport;

/// Aggregate of one sweep point over trials (and over the pass when time
/// averaging).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRecord {
    /// Axis value in file units.
    pub axis_value: f64,
    pub mean: RateReport,
    /// Sample standard deviation of each field.
    pub std: RateReport,
    pub num_trials: usize,
    pub config_digest: String,
}

/// Flat CSV form of a record. Per-stream SINRs are only kept in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub axis_value: f64,
    pub r_opt: f64,
    pub r_per: f64,
    pub r_lin_geo: f64,
    pub r_lin_opt_eq: f64,
    pub r_upper: f64,
    pub r_opt_std: f64,
    pub r_per_std: f64,
    pub r_lin_geo_std: f64,
    pub r_lin_opt_eq_std: f64,
    pub r_upper_std: f64,
    pub trials: usize,
    pub config_digest: String,
}

impl From<&SweepRecord> for CsvRow {
    fn from(r: &SweepRecord) -> Self {
        Self {
            axis_value: r.axis_value,
            r_opt: r.mean.r_opt,
            r_per: r.mean.r_per,
            r_lin_geo: r.mean.r_lin,
            r_lin_opt_eq: r.mean.r_lin_opt_eq,
            r_upper: r.mean.r_upper_geo,
            r_opt_std: r.std.r_opt,
            r_per_std: r.std.r_per,
            r_lin_geo_std: r.std.r_lin,
            r_lin_opt_eq_std: r.std.r_lin_opt_eq,
            r_upper_std: r.std.r_upper_geo,
            trials: r.num_trials,
            config_digest: r.config_digest.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

fn serialization(msg: impl std::fmt::Display) -> Error {
    Error::InvalidInput(format!("result serialization: {msg}"))
}

fn require_records<T>(records: &[T]) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidInput("no records to serialize".into()));
    }
    Ok(())
}

pub fn rows_to_csv(rows: &[CsvRow]) -> Result<Vec<u8>> {
    require_records(rows)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    for row in rows {
        w.serialize(row).map_err(serialization)?;
    }
    w.into_inner().map_err(serialization)
}

pub fn to_csv(records: &[SweepRecord]) -> Result<Vec<u8>> {
    rows_to_csv(&records.iter().map(CsvRow::from).collect::<Vec<_>>())
}

pub fn from_csv(bytes: &[u8]) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(bytes)
        .deserialize()
        .collect::<std::result::Result<Vec<CsvRow>, _>>()
        .map_err(serialization)
}

fn all_finite(r: &RateReport) -> bool {
    [r.r_opt, r.r_per, r.r_lin, r.r_lin_opt_eq, r.r_upper_geo]
        .iter()
        .chain(&r.per_stream_sinr)
        .all(|x| x.is_finite())
}

/// Pretty-printed JSON. JSON has no encoding for infinities or NaN, so those
/// are rejected instead of being written as `null`.
pub fn to_json(records: &[SweepRecord]) -> Result<Vec<u8>> {
    require_records(records)?;
    if let Some(r) = records
        .iter()
        .find(|r| !r.axis_value.is_finite() || !all_finite(&r.mean) || !all_finite(&r.std))
    {
        return Err(serialization(format!(
            "non-finite value in the record at axis value {}",
            r.axis_value
        )));
    }
    let mut bytes = serde_json::to_vec_pretty(records).map_err(serialization)?;
    bytes.push(b'\n');
    Ok(bytes)
}

pub fn from_json(bytes: &[u8]) -> Result<Vec<SweepRecord>> {
    serde_json::from_slice(bytes).map_err(serialization)
}

/// Writes `{dir}/{stem}-{digest}.{ext}` and returns the path.
pub fn write_results(
    records: &[SweepRecord],
    dir: &Path,
    stem: &str,
    format: OutputFormat,
) -> Result<PathBuf> {
    require_records(records)?;
    let bytes = match format {
        OutputFormat::Csv => to_csv(records)?,
        OutputFormat::Json => to_json(records)?,
    };
    let path = dir.join(format!(
        "{stem}-{}.{}",
        records[0].config_digest,
        format.extension()
    ));
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    std::fs::write(&path, bytes).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn report(x: f64) -> RateReport {
        RateReport {
            r_opt: x,
            r_per: x * 0.99,
            r_lin: x / 3.0,
            r_lin_opt_eq: x * 0.1 + 1e-300,
            r_upper_geo: std::f64::consts::PI * x,
            per_stream_sinr: vec![x, 1.0 / 7.0],
        }
    }

    fn record(x: f64) -> SweepRecord {
        SweepRecord {
            axis_value: x,
            mean: report(x),
            std: report(x * 1e-3),
            num_trials: 200,
            config_digest: "0123456789abcdef".into(),
        }
    }

    #[test]
    fn empty_is_an_error() {
        assert!(to_csv(&[]).is_err());
        assert!(to_json(&[]).is_err());
        let dir = std::env::temp_dir().join("beamswarm-empty-output");
        assert!(write_results(&[], &dir, "x", OutputFormat::Csv).is_err());
        assert!(!dir.exists());
    }

    #[test]
    fn json_rejects_infinity() {
        let mut r = record(1.0);
        r.mean.per_stream_sinr[0] = f64::INFINITY;
        assert!(to_json(&[r]).is_err());
    }

    #[test]
    fn csv_header() {
        let text = String::from_utf8(to_csv(&[record(1.0)]).unwrap()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "axis_value,r_opt,r_per,r_lin_geo,r_lin_opt_eq,r_upper,r_opt_std,r_per_std,\
             r_lin_geo_std,r_lin_opt_eq_std,r_upper_std,trials,config_digest"
        );
        assert_eq!(text.lines().count(), 2);
    }

    proptest! {
        #[test]
        fn csv_round_trip(xs in proptest::collection::vec(-1e12f64..1e12, 1..8)) {
            let records: Vec<_> = xs.iter().map(|&x| record(x)).collect();
            let bytes = to_csv(&records).unwrap();
            let rows = from_csv(&bytes).unwrap();
            prop_assert_eq!(&rows, &records.iter().map(CsvRow::from).collect::<Vec<_>>());
            prop_assert_eq!(rows_to_csv(&rows).unwrap(), bytes);
        }

        #[test]
        fn json_round_trip(xs in proptest::collection::vec(-1e300f64..1e300, 1..8)) {
            let records: Vec<_> = xs.iter().map(|&x| record(x)).collect();
            let bytes = to_json(&records).unwrap();
            let back = from_json(&bytes).unwrap();
            prop_assert_eq!(&back, &records);
            prop_assert_eq!(to_json(&back).unwrap(), bytes);
        }
    }
}
