//! CSV reports, run summaries and their merge.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

pub const SCHEMA_VERSION: u32 = 1;
pub const COLUMNS: [&str; 9] = ["experiment", "case", "seed", "params", "value", "gap", "threshold", "status", "witness"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    pub case: String,
    pub seed: u64,
    /// `key=value` pairs joined by `;`.
    pub params: String,
    pub value: f64,
    /// Distance from the accepted region; zero on passing rows.
    pub gap: f64,
    pub threshold: f64,
    pub pass: bool,
    /// JSON array with the offending input; required on FAIL rows.
    pub witness: String,
}

impl ReportRow {
    pub fn status(&self) -> &'static str {
        if self.pass {
            "PASS"
        } else {
            "FAIL"
        }
    }
}

/// Serializes a vector as a JSON array for the witness column.
pub fn witness(v: &[f64]) -> String {
    serde_json::to_string(v).expect("finite vectors serialize")
}

pub fn header_line(experiment: &str, run_id: &str) -> String {
    format!("# schema={SCHEMA_VERSION},experiment={experiment},run_id={run_id}\n")
}

pub fn format_csv(rows: &[ReportRow], experiment: &str, run_id: &str) -> String {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    w.write_record(COLUMNS).expect("in-memory write");
    for r in rows {
        w.write_record([
            r.experiment.as_str(),
            r.case.as_str(),
            &r.seed.to_string(),
            r.params.as_str(),
            &r.value.to_string(),
            &r.gap.to_string(),
            &r.threshold.to_string(),
            r.status(),
            r.witness.as_str(),
        ])
        .expect("in-memory write");
    }
    let body = String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields");
    header_line(experiment, run_id) + &body
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub run_id: String,
    pub experiment: String,
    pub pass: usize,
    pub fail: usize,
    pub worst_gap: f64,
    pub wall_time_s: f64,
}

impl RunSummary {
    pub fn new(rows: &[ReportRow], experiment: &str, run_id: &str, wall_time_s: f64) -> Self {
        let pass = rows.iter().filter(|r| r.pass).count();
        RunSummary {
            run_id: run_id.to_string(),
            experiment: experiment.to_string(),
            pass,
            fail: rows.len() - pass,
            worst_gap: rows.iter().map(|r| r.gap).fold(0.0, f64::max),
            wall_time_s,
        }
    }
}

/// A parsed report file.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub experiment: String,
    pub run_id: String,
    pub rows: Vec<ReportRow>,
}

pub fn parse_csv(text: &str, path: &Path) -> LabResult<Report> {
    let malformed = |line: u64, message: String| LabError::Malformed { path: path.to_path_buf(), line, message };
    let first = text.lines().next().unwrap_or("");
    let fields = first.strip_prefix("# ").ok_or_else(|| malformed(1, "missing `# schema=` header".into()))?;
    let mut meta = BTreeMap::new();
    for part in fields.split(',') {
        let (k, v) = part.split_once('=').ok_or_else(|| malformed(1, format!("bad header field `{part}`")))?;
        meta.insert(k, v);
    }
    if meta.get("schema") != Some(&SCHEMA_VERSION.to_string().as_str()) {
        return Err(malformed(1, format!("unsupported schema {:?}", meta.get("schema"))));
    }
    let (Some(experiment), Some(run_id)) = (meta.get("experiment"), meta.get("run_id")) else {
        return Err(malformed(1, "header needs experiment and run_id".into()));
    };

    let mut reader = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| malformed(2, e.to_string()))?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(malformed(2, format!("expected columns {}", COLUMNS.join(","))));
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let num = |i: usize| -> LabResult<f64> {
            record[i].parse().map_err(|_| malformed(line, format!("column `{}` is not a number: `{}`", COLUMNS[i], &record[i])))
        };
        let pass = match &record[7] {
            "PASS" => true,
            "FAIL" => false,
            other => return Err(malformed(line, format!("status `{other}` is neither PASS nor FAIL"))),
        };
        if !pass && record[8].is_empty() {
            return Err(malformed(line, "FAIL row without witness".into()));
        }
        if &record[0] != *experiment {
            return Err(malformed(line, format!("row of `{}` in a `{experiment}` report", &record[0])));
        }
        rows.push(ReportRow {
            experiment: record[0].to_string(),
            case: record[1].to_string(),
            seed: record[2].parse().map_err(|_| malformed(line, format!("seed `{}` is not an integer", &record[2])))?,
            params: record[3].to_string(),
            value: num(4)?,
            gap: num(5)?,
            threshold: num(6)?,
            pass,
            witness: record[8].to_string(),
        });
    }
    Ok(Report { experiment: experiment.to_string(), run_id: run_id.to_string(), rows })
}

pub fn read_csv(path: &Path) -> LabResult<Report> {
    let text = std::fs::read_to_string(path).map_err(|source| LabError::Io { path: path.to_path_buf(), source })?;
    parse_csv(&text, path)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentTotals {
    pub pass: usize,
    pub fail: usize,
    pub worst_gap: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FailureRecord {
    pub run_id: String,
    pub experiment: String,
    pub case: String,
    pub witness: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MergeSummary {
    pub status: String,
    pub runs: Vec<String>,
    pub experiments: BTreeMap<String, ExperimentTotals>,
    pub failures: Vec<FailureRecord>,
}

/// Combines reports; a run id seen twice is counted once.
pub fn merge_reports(reports: &[Report]) -> MergeSummary {
    let mut seen = BTreeSet::new();
    let mut experiments: BTreeMap<String, ExperimentTotals> = BTreeMap::new();
    let mut failures = Vec::new();
    let mut runs = Vec::new();
    for rep in reports {
        if !seen.insert(rep.run_id.clone()) {
            continue;
        }
        runs.push(rep.run_id.clone());
        let t = experiments.entry(rep.experiment.clone()).or_insert(ExperimentTotals { pass: 0, fail: 0, worst_gap: 0.0 });
        for r in &rep.rows {
            if r.pass {
                t.pass += 1;
            } else {
                t.fail += 1;
                failures.push(FailureRecord {
                    run_id: rep.run_id.clone(),
                    experiment: r.experiment.clone(),
                    case: r.case.clone(),
                    witness: r.witness.clone(),
                });
            }
            t.worst_gap = t.worst_gap.max(r.gap);
        }
    }
    let status = if failures.is_empty() { "PASS" } else { "FAIL" }.to_string();
    MergeSummary { status, runs, experiments, failures }
}

pub fn report_merge(paths: &[PathBuf]) -> LabResult<MergeSummary> {
    if paths.is_empty() {
        return Err(LabError::usage("paths", "nothing to merge"));
    }
    let reports = paths.iter().map(|p| read_csv(p)).collect::<LabResult<Vec<_>>>()?;
    Ok(merge_reports(&reports))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(case: &str, pass: bool, gap: f64) -> ReportRow {
        ReportRow {
            experiment: "renorm-audit".into(),
            case: case.into(),
            seed: 3,
            params: "n=8;k=1".into(),
            value: 0.1,
            gap,
            threshold: 0.0,
            pass,
            witness: if pass { String::new() } else { witness(&[1.0, -0.5]) },
        }
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row("x0", true, 0.0), row("x1", false, 0.25)];
        let text = format_csv(&rows, "renorm-audit", "abc");
        assert!(text.starts_with("# schema=1,experiment=renorm-audit,run_id=abc\nexperiment,case,seed,"));
        let rep = parse_csv(&text, Path::new("r.csv")).unwrap();
        assert_eq!(rep.rows, rows);
        assert_eq!(rep.run_id, "abc");
    }

    #[test]
    fn malformed_row_names_line() {
        let rows = vec![row("x0", true, 0.0), row("x1", true, 0.0)];
        let text = format_csv(&rows, "renorm-audit", "abc").replace("x1,3,", "x1,three,");
        let err = parse_csv(&text, Path::new("bad.csv")).unwrap_err();
        let msg = err.to_string();
        assert!(msg.starts_with("bad.csv:4:"), "{msg}");
        let text = format_csv(&[row("x0", false, 1.0)], "renorm-audit", "abc").replace("[1.0,-0.5]", "");
        assert!(parse_csv(&text, Path::new("w.csv")).unwrap_err().to_string().contains("without witness"));
    }

    #[test]
    fn merge_counts_runs_once() {
        let a = Report { experiment: "renorm-audit".into(), run_id: "a".into(), rows: vec![row("x0", true, 0.0)] };
        let b = Report { experiment: "renorm-audit".into(), run_id: "b".into(), rows: vec![row("x0", false, 0.5)] };
        let m = merge_reports(&[a.clone(), a.clone()]);
        assert_eq!((m.experiments["renorm-audit"].pass, m.status.as_str()), (1, "PASS"));
        let m = merge_reports(&[a, b]);
        assert_eq!(m.experiments["renorm-audit"].pass, 1);
        assert_eq!(m.experiments["renorm-audit"].fail, 1);
        assert_eq!(m.status, "FAIL");
        assert_eq!(m.failures[0].witness, "[1.0,-0.5]");
        assert!(report_merge(&[]).is_err());
    }
}
