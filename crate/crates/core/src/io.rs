//! CSV and JSON artifacts.
//!
//! Every CSV starts with a `# schema: <name> v<version>` comment line.
//! Readers skip comment lines and match columns by header name, so files
//! with extra columns still load. Floats are written in shortest
//! round-trip form.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::adversarial::SweepTable;
use crate::bench::ClassificationResult;
use crate::driver::Trajectory;
use crate::error::{OluError, Result};
use crate::regret::RegretLedger;

pub const SCHEMA_LEDGER: &str = "olu.ledger v1";
pub const SCHEMA_SEQUENCE: &str = "olu.sequence v1";
pub const SCHEMA_TRAJECTORY: &str = "olu.trajectory v1";
pub const SCHEMA_SWEEP: &str = "olu.sweep v1";
pub const SCHEMA_TRACE: &str = "olu.trace v1";

fn schema_line(schema: &str) -> String {
    format!("# schema: {schema}\n")
}

/// Serializes `rows` to CSV bytes behind a schema comment line.
pub fn csv_bytes<T: Serialize>(schema: &str, rows: &[T]) -> Result<Vec<u8>> {
    let mut buf = schema_line(schema).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

pub fn write_csv<T: Serialize>(path: &Path, schema: &str, rows: &[T]) -> Result<()> {
    write_bytes(path, &csv_bytes(schema, rows)?)
}

/// Parses CSV bytes, returning the declared schema (if any) and the rows.
pub fn parse_csv<T: DeserializeOwned>(bytes: &[u8]) -> Result<(Option<String>, Vec<T>)> {
    let text = std::str::from_utf8(bytes).map_err(|e| OluError::Parse(e.to_string()))?;
    let schema = text
        .lines()
        .next()
        .and_then(|l| l.strip_prefix("# schema:"))
        .map(|s| s.trim().to_string());
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let rows = r.deserialize().collect::<std::result::Result<Vec<T>, _>>()?;
    Ok((schema, rows))
}

pub fn read_csv<T: DeserializeOwned>(path: &Path) -> Result<(Option<String>, Vec<T>)> {
    parse_csv(&fs::read(path)?)
}

/// Checks that a parsed schema names `expected` with the same major version.
pub fn check_schema(found: Option<&str>, expected: &str) -> Result<()> {
    match found {
        Some(s) if s == expected => Ok(()),
        other => Err(OluError::Parse(format!("expected schema {expected:?}, found {other:?}"))),
    }
}

pub fn write_bytes(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        if !dir.as_os_str().is_empty() {
            fs::create_dir_all(dir)?;
        }
    }
    let mut f = fs::File::create(path)?;
    f.write_all(bytes)?;
    Ok(())
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    write_bytes(path, &bytes)
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    Ok(serde_json::from_slice(&fs::read(path)?)?)
}

/// One round of a 1-D ledger: loss `v_t`, play `Δ_{t−1}`, comparator `u_{t−1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub t: usize,
    pub v: f64,
    pub play: f64,
    pub comparator: f64,
}

pub fn ledger_rows(ledger: &RegretLedger<f64>) -> Vec<LedgerRow> {
    (1..=ledger.horizon())
        .map(|t| LedgerRow {
            t,
            v: ledger.losses()[t - 1],
            play: ledger.plays()[t - 1],
            comparator: ledger.comparators()[t - 1],
        })
        .collect()
}

pub fn ledger_from_rows(rows: &[LedgerRow]) -> Result<RegretLedger<f64>> {
    if rows.iter().enumerate().any(|(k, r)| r.t != k + 1) {
        return Err(OluError::Parse("ledger rows must be numbered 1..T in order".into()));
    }
    RegretLedger::new(
        rows.iter().map(|r| r.v).collect(),
        rows.iter().map(|r| r.play).collect(),
        rows.iter().map(|r| r.comparator).collect(),
    )
}

/// A sequence of `d`-vectors (losses or comparators) in long form.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub t: usize,
    pub i: usize,
    pub value: f64,
}

pub fn sequence_rows(values: &[Vec<f64>], first_index: usize) -> Vec<SequenceRow> {
    values
        .iter()
        .enumerate()
        .flat_map(|(k, v)| v.iter().enumerate().map(move |(i, &value)| SequenceRow { t: k + first_index, i, value }))
        .collect()
}

/// Inverse of [`sequence_rows`]; rows must be ordered by `(t, i)` and dense.
pub fn sequence_from_rows(rows: &[SequenceRow]) -> Result<Vec<Vec<f64>>> {
    let Some(first) = rows.first() else {
        return Ok(Vec::new());
    };
    let dim = rows.iter().take_while(|r| r.t == first.t).count();
    if rows.len() % dim != 0 {
        return Err(OluError::Parse("ragged sequence rows".into()));
    }
    rows.chunks(dim)
        .enumerate()
        .map(|(k, chunk)| {
            let ok = chunk.iter().enumerate().all(|(i, r)| r.i == i && r.t == first.t + k);
            if !ok {
                return Err(OluError::Parse(format!("sequence rows out of order near t={}", first.t + k)));
            }
            Ok(chunk.iter().map(|r| r.value).collect())
        })
        .collect()
}

/// Wide trajectory table: `t, w0..w{d−1}, delta0.., g0.., s, F`, one row per
/// step `t = 0..T`. Row 0 carries `w_0` only; `F` is filled at evaluation
/// steps. Requires a fully recorded trajectory.
pub fn trajectory_csv_bytes(traj: &Trajectory<f64>) -> Result<Vec<u8>> {
    if !traj.is_full() {
        return Err(OluError::Unsupported("trajectory export needs a fully recorded run".into()));
    }
    let d = traj.dim;
    let mut buf = schema_line(SCHEMA_TRAJECTORY).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        let mut header = vec!["t".to_string()];
        for prefix in ["w", "delta", "g"] {
            header.extend((0..d).map(|i| format!("{prefix}{i}")));
        }
        header.push("s".into());
        header.push("F".into());
        w.write_record(&header)?;
        let mut values = traj.values.iter().peekable();
        for t in 0..=traj.horizon {
            let mut rec = vec![t.to_string()];
            rec.extend(traj.iterates[t].iter().map(f64::to_string));
            if t == 0 {
                rec.extend(std::iter::repeat(String::new()).take(2 * d + 1));
            } else {
                rec.extend(traj.updates[t - 1].iter().map(f64::to_string));
                rec.extend(traj.gradients[t - 1].iter().map(f64::to_string));
                rec.push(traj.s[t - 1].to_string());
            }
            match values.peek() {
                Some(&&(step, f)) if step == t => {
                    rec.push(f.to_string());
                    values.next();
                }
                _ => rec.push(String::new()),
            }
            w.write_record(&rec)?;
        }
        w.flush()?;
    }
    Ok(buf)
}

/// Parsed wide trajectory table.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryTable {
    pub iterates: Vec<Vec<f64>>,
    pub updates: Vec<Vec<f64>>,
    pub gradients: Vec<Vec<f64>>,
    pub s: Vec<f64>,
    pub values: Vec<(usize, f64)>,
}

pub fn parse_trajectory_csv(bytes: &[u8]) -> Result<TrajectoryTable> {
    let mut r = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(bytes);
    let header = r.headers()?.clone();
    let col = |name: &str| header.iter().position(|h| h == name);
    let d = (0..).take_while(|i| col(&format!("w{i}")).is_some()).count();
    let cols = |p: &str| (0..d).map(|i| col(&format!("{p}{i}"))).collect::<Option<Vec<_>>>();
    let missing = || OluError::Parse("trajectory header is missing columns".into());
    let (wc, dc, gc) = (cols("w").ok_or_else(missing)?, cols("delta").ok_or_else(missing)?, cols("g").ok_or_else(missing)?);
    let (sc, fc, tc) = (col("s").ok_or_else(missing)?, col("F").ok_or_else(missing)?, col("t").ok_or_else(missing)?);
    let num = |x: &str| x.parse::<f64>().map_err(|e| OluError::Parse(format!("{x:?}: {e}")));
    let mut table = TrajectoryTable { iterates: vec![], updates: vec![], gradients: vec![], s: vec![], values: vec![] };
    for (k, rec) in r.records().enumerate() {
        let rec = rec?;
        let t: usize = rec[tc].parse().map_err(|_| OluError::Parse(format!("bad step {:?}", &rec[tc])))?;
        if t != k {
            return Err(OluError::Parse(format!("expected step {k}, found {t}")));
        }
        table.iterates.push(wc.iter().map(|&c| num(&rec[c])).collect::<Result<_>>()?);
        if t > 0 {
            table.updates.push(dc.iter().map(|&c| num(&rec[c])).collect::<Result<_>>()?);
            table.gradients.push(gc.iter().map(|&c| num(&rec[c])).collect::<Result<_>>()?);
            table.s.push(num(&rec[sc])?);
        }
        if !rec[fc].is_empty() {
            table.values.push((t, num(&rec[fc])?));
        }
    }
    Ok(table)
}

/// JSON summary of one OLU run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    #[serde(rename = "T")]
    pub horizon: usize,
    pub d: usize,
    pub learner: String,
    pub total_loss: f64,
    #[serde(rename = "final_F")]
    pub final_f: f64,
    pub seed: u64,
}

/// Per-cell rows plus one summary row per learner carrying the slope.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepCsvRow {
    pub learner: String,
    #[serde(rename = "T")]
    pub horizon: Option<usize>,
    pub regret: Option<f64>,
    pub total_loss: Option<f64>,
    pub slope: Option<f64>,
    pub c: Option<f64>,
}

pub fn sweep_rows(table: &SweepTable) -> Vec<SweepCsvRow> {
    let mut rows: Vec<SweepCsvRow> = table
        .rows
        .iter()
        .map(|r| SweepCsvRow {
            learner: r.learner.clone(),
            horizon: Some(r.horizon),
            regret: Some(r.regret),
            total_loss: Some(r.total_loss),
            slope: None,
            c: r.c,
        })
        .collect();
    rows.extend(table.slopes.iter().map(|(name, slope)| SweepCsvRow {
        learner: name.clone(),
        horizon: None,
        regret: None,
        total_loss: None,
        slope: *slope,
        c: None,
    }));
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub learner: String,
    pub seed: u64,
    pub step: usize,
    #[serde(rename = "F")]
    pub f: f64,
}

pub fn trace_rows(result: &ClassificationResult) -> Vec<TraceRow> {
    let mut rows = Vec::new();
    for arm in &result.arms {
        for run in &arm.runs {
            for (&step, &f) in result.steps.iter().zip(&run.values) {
                rows.push(TraceRow { learner: arm.label.clone(), seed: run.seed, step, f });
            }
        }
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let rows = vec![
            LedgerRow { t: 1, v: 0.1, play: -1.0 / 3.0, comparator: 1e-300 },
            LedgerRow { t: 2, v: f64::MIN_POSITIVE, play: 2.0_f64.sqrt(), comparator: -0.0 },
        ];
        let bytes = csv_bytes(SCHEMA_LEDGER, &rows).unwrap();
        assert!(bytes.starts_with(b"# schema: olu.ledger v1\n"));
        let (schema, back): (_, Vec<LedgerRow>) = parse_csv(&bytes).unwrap();
        check_schema(schema.as_deref(), SCHEMA_LEDGER).unwrap();
        assert_eq!(back, rows);
    }

    #[test]
    fn extra_columns_are_tolerated() {
        let text = b"# schema: olu.ledger v1\nt,v,play,comparator,note\n1,1,0,0,x\n";
        let (_, rows): (_, Vec<LedgerRow>) = parse_csv(text).unwrap();
        assert_eq!(rows[0].v, 1.0);
    }

    #[test]
    fn sequence_round_trip() {
        let v = vec![vec![1.0, 2.0], vec![3.0, 4.0]];
        assert_eq!(sequence_from_rows(&sequence_rows(&v, 1)).unwrap(), v);
        let mut rows = sequence_rows(&v, 1);
        rows.swap(0, 1);
        assert!(sequence_from_rows(&rows).is_err());
    }
}
