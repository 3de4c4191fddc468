//! Experiment runner on top of `latlab-core`: JSON configs in, CSV reports out.

pub mod config;
pub mod error;
pub mod experiments;
pub mod io;
pub mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use config::{Experiment, ExperimentConfig};
pub use error::{LabError, LabResult};
pub use report::{ReportRow, RunSummary};

/// Files and totals of one finished run.
#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub rows: Vec<ReportRow>,
    pub summary: RunSummary,
    pub csv_path: PathBuf,
    pub summary_path: PathBuf,
}

impl RunOutcome {
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail == 0 {
            0
        } else {
            1
        }
    }
}

/// Runs `cfg` and writes `<experiment>.csv` and `<experiment>.json` under `out`.
pub fn run_to_dir(cfg: &ExperimentConfig, out: &Path) -> LabResult<RunOutcome> {
    let exp = cfg.validate()?;
    let run_id = cfg.run_id();
    let start = Instant::now();
    let rows = experiments::run(cfg)?;
    let summary = RunSummary::new(&rows, exp.name(), &run_id, start.elapsed().as_secs_f64());
    let csv_path = out.join(format!("{}.csv", exp.name()));
    let summary_path = out.join(format!("{}.json", exp.name()));
    io::write_atomic(&csv_path, report::format_csv(&rows, exp.name(), &run_id).as_bytes())?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    io::write_atomic(&summary_path, json.as_bytes())?;
    Ok(RunOutcome { rows, summary, csv_path, summary_path })
}
