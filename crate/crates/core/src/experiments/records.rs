use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Result, ShamError};
use crate::problem::io::write_atomic;

pub const CSV_HEADER: &str =
    "k,f_last,f_avg,feas_sq_last,feas_sq_avg,max_viol_last,alpha_k,sampled_j,step_norm_sq,wall_ns";

/// One row of a run trace. `*_avg` fields refer to the averaged iterate.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RunRecord {
    pub k: usize,
    pub f_last: f64,
    pub f_avg: f64,
    pub feas_sq_last: f64,
    pub feas_sq_avg: f64,
    pub max_viol_last: f64,
    pub alpha_k: f64,
    pub sampled_j: usize,
    pub step_norm_sq: f64,
    pub wall_ns: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RecordFormat {
    Csv,
    Jsonl,
}

impl RecordFormat {
    pub fn extension(self) -> &'static str {
        match self {
            RecordFormat::Csv => "csv",
            RecordFormat::Jsonl => "jsonl",
        }
    }
}

impl std::str::FromStr for RecordFormat {
    type Err = ShamError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(RecordFormat::Csv),
            "jsonl" => Ok(RecordFormat::Jsonl),
            other => Err(ShamError::InvalidInput(format!("unknown record format {other:?}"))),
        }
    }
}

fn encode(records: &[RunRecord], format: RecordFormat, path: &Path) -> Result<Vec<u8>> {
    match format {
        RecordFormat::Csv => {
            let mut wtr = csv::WriterBuilder::new()
                .has_headers(false)
                .from_writer(Vec::new());
            wtr.write_record(CSV_HEADER.split(','))
                .map_err(|e| ShamError::format(path, e))?;
            for r in records {
                wtr.serialize(r).map_err(|e| ShamError::format(path, e))?;
            }
            wtr.into_inner().map_err(|e| ShamError::format(path, e))
        }
        RecordFormat::Jsonl => {
            let mut out = Vec::new();
            for r in records {
                serde_json::to_writer(&mut out, r).map_err(|e| ShamError::format(path, e))?;
                out.push(b'\n');
            }
            Ok(out)
        }
    }
}

/// Writes `records` atomically. Floats use shortest round-trip decimals.
pub fn emit_records(records: &[RunRecord], path: &Path, format: RecordFormat) -> Result<()> {
    let bytes = encode(records, format, path)?;
    write_atomic(path, &bytes)
}

pub fn read_records(path: &Path, format: RecordFormat) -> Result<Vec<RunRecord>> {
    let text = fs::read_to_string(path).map_err(|e| ShamError::io(path, e))?;
    match format {
        RecordFormat::Csv => {
            let mut rdr = csv::Reader::from_reader(text.as_bytes());
            let header = rdr.headers().map_err(|e| ShamError::format(path, e))?;
            if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
                return Err(ShamError::format(path, "unexpected CSV header"));
            }
            rdr.deserialize()
                .map(|r| r.map_err(|e| ShamError::format(path, e)))
                .collect()
        }
        RecordFormat::Jsonl => text
            .lines()
            .filter(|l| !l.trim().is_empty())
            .map(|l| serde_json::from_str(l).map_err(|e| ShamError::format(path, e)))
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn sample(k: usize) -> RunRecord {
        RunRecord {
            k,
            f_last: 0.1 + k as f64 / 3.0,
            f_avg: -1.0 / 7.0,
            feas_sq_last: 1e-17,
            feas_sq_avg: 0.0,
            max_viol_last: 2.5e-300,
            alpha_k: 1.0 / (k as f64 + 1.0).sqrt(),
            sampled_j: k % 13,
            step_norm_sq: 123456.789,
            wall_ns: 42,
        }
    }

    #[test]
    fn empty_csv_is_header_only() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        emit_records(&[], &path, RecordFormat::Csv).unwrap();
        assert_eq!(fs::read_to_string(&path).unwrap(), format!("{CSV_HEADER}\n"));
        assert!(read_records(&path, RecordFormat::Csv).unwrap().is_empty());
    }

    #[test]
    fn files_end_with_newline() {
        let dir = tempfile::tempdir().unwrap();
        for format in [RecordFormat::Csv, RecordFormat::Jsonl] {
            let path = dir.path().join(format!("r.{}", format.extension()));
            emit_records(&[sample(1), sample(2)], &path, format).unwrap();
            let text = fs::read_to_string(&path).unwrap();
            assert!(text.ends_with('\n'));
            if format == RecordFormat::Jsonl {
                let first: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
                let keys: Vec<_> = first.as_object().unwrap().keys().cloned().collect();
                let mut expected: Vec<_> = CSV_HEADER.split(',').map(String::from).collect();
                expected.sort();
                let mut keys = keys;
                keys.sort();
                assert_eq!(keys, expected);
            }
        }
    }

    #[test]
    fn large_stream_parses_with_increasing_k() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("big.csv");
        let records: Vec<_> = (1..=100_000).map(sample).collect();
        emit_records(&records, &path, RecordFormat::Csv).unwrap();
        let back = read_records(&path, RecordFormat::Csv).unwrap();
        assert_eq!(back.len(), 100_000);
        assert!(back.windows(2).all(|w| w[0].k < w[1].k));
        assert_eq!(back, records);
    }

    #[test]
    fn rejects_foreign_header() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        fs::write(&path, "a,b\n1,2\n").unwrap();
        assert!(read_records(&path, RecordFormat::Csv).is_err());
    }

    fn finite() -> impl Strategy<Value = f64> {
        prop::num::f64::NORMAL | prop::num::f64::SUBNORMAL | prop::num::f64::ZERO
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn round_trip(
            k in 0usize..1_000_000,
            vals in prop::collection::vec(finite(), 7),
            j in 0usize..1000,
            ns in any::<u64>(),
            jsonl in any::<bool>(),
        ) {
            let r = RunRecord {
                k, f_last: vals[0], f_avg: vals[1], feas_sq_last: vals[2], feas_sq_avg: vals[3],
                max_viol_last: vals[4], alpha_k: vals[5], sampled_j: j, step_norm_sq: vals[6], wall_ns: ns,
            };
            let format = if jsonl { RecordFormat::Jsonl } else { RecordFormat::Csv };
            let dir = tempfile::tempdir().unwrap();
            let path = dir.path().join("one");
            emit_records(&[r], &path, format).unwrap();
            let back = read_records(&path, format).unwrap();
            prop_assert_eq!(back.len(), 1);
            for (a, b) in [
                (r.f_last, back[0].f_last), (r.f_avg, back[0].f_avg),
                (r.feas_sq_last, back[0].feas_sq_last), (r.feas_sq_avg, back[0].feas_sq_avg),
                (r.max_viol_last, back[0].max_viol_last), (r.alpha_k, back[0].alpha_k),
                (r.step_norm_sq, back[0].step_norm_sq),
            ] {
                prop_assert_eq!(a.to_bits(), b.to_bits());
            }
            prop_assert_eq!((r.k, r.sampled_j, r.wall_ns), (back[0].k, back[0].sampled_j, back[0].wall_ns));
        }
    }
}
