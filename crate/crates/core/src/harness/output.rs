use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::runner::ResultRecord;
use crate::error::{Error, Result};

pub const CSV_HEADER: &str = "axis_name,axis_value,mean_capacity_bps,std_capacity_bps,baseline_capacity_bps,runs,seed,evaluations_mean";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum OutputFormat {
    Csv,
    Json,
}

fn sci(v: Option<f64>) -> String {
    match v {
        Some(x) => format!("{x:e}"),
        None => "NaN".into(),
    }
}

/// CSV rendering; floats use shortest round-trip scientific notation.
pub fn to_csv(records: &[ResultRecord]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            r.axis_name,
            sci(Some(r.axis_value)),
            sci(r.mean_capacity_bps),
            sci(r.std_capacity_bps),
            sci(Some(r.baseline_capacity_bps)),
            r.runs,
            r.seed,
            sci(Some(r.evaluations_mean)),
        );
    }
    out
}

pub fn to_json(records: &[ResultRecord]) -> Result<String> {
    serde_json::to_string_pretty(records).map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Writes `records` to `path` in the given format.
pub fn emit_results(records: &[ResultRecord], format: OutputFormat, path: impl AsRef<Path>) -> Result<()> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to emit".into()));
    }
    let body = match format {
        OutputFormat::Csv => to_csv(records),
        OutputFormat::Json => to_json(records)? + "\n",
    };
    let path = path.as_ref();
    std::fs::write(path, body).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

pub fn read_json_results(path: impl AsRef<Path>) -> Result<Vec<ResultRecord>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(e.to_string()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::{ExperimentConfig, Solver};
    use crate::harness::runner::run_monte_carlo;

    fn record() -> ResultRecord {
        let cfg = ExperimentConfig {
            num_subcarriers: 2,
            num_elements: 2,
            monte_carlo_runs: 2,
            solver: Solver::Aligned,
            ..Default::default()
        };
        run_monte_carlo(&cfg, 3).unwrap()
    }

    #[test]
    fn one_record_two_lines() {
        let csv = to_csv(&[record()]);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], CSV_HEADER);
        let fields: Vec<&str> = lines[1].split(',').collect();
        assert_eq!(fields.len(), 8);
        assert!(fields[2].contains('e'));
        let mean: f64 = fields[2].parse().unwrap();
        assert_eq!(Some(mean), record().mean_capacity_bps);
    }

    #[test]
    fn json_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("out.json");
        let rec = record();
        emit_results(std::slice::from_ref(&rec), OutputFormat::Json, &path).unwrap();
        assert_eq!(read_json_results(&path).unwrap(), vec![rec]);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let err = emit_results(&[record()], OutputFormat::Csv, "/nonexistent-dir/x.csv").unwrap_err();
        assert!(matches!(err, Error::Io { .. }));
        assert!(emit_results(&[], OutputFormat::Csv, "/tmp/x.csv").is_err());
    }
}
