use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use latlab::report::report_merge;
use latlab::{run_to_dir, Experiment, ExperimentConfig, LabError, LabResult};

/// Run one experiment from a JSON config.
#[derive(Parser, Debug)]
#[command(name = "latlab", version, after_help = "Use `latlab merge <csv>...` to combine reports.")]
struct RunArgs {
    /// One of: sup-construct, sup-construct-dual, normality-scan, mollifier-rate,
    /// boundary-chart-audit, pushin-audit, prop35-demo, extrapolation-demo, renorm-audit.
    experiment: String,
    #[arg(long)]
    config: PathBuf,
    /// Output directory; defaults to the config `output` field, then `.`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides the config seed.
    #[arg(long)]
    seed: Option<u64>,
}

/// Merge CSV reports into one JSON summary on stdout.
#[derive(Parser, Debug)]
#[command(name = "latlab merge")]
struct MergeArgs {
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    /// Write the summary here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn run(args: RunArgs) -> LabResult<i32> {
    if Experiment::parse(&args.experiment).is_none() {
        return Err(LabError::usage("experiment", format!("unknown experiment `{}`", args.experiment)));
    }
    let mut cfg = ExperimentConfig::load(&args.config)?;
    if cfg.experiment != args.experiment {
        return Err(LabError::usage(
            "experiment",
            format!("command line asks for `{}` but the config is for `{}`", args.experiment, cfg.experiment),
        ));
    }
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let out = args.out.or_else(|| cfg.output.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let outcome = run_to_dir(&cfg, &out)?;
    let s = &outcome.summary;
    println!(
        "{}: {} PASS, {} FAIL, worst gap {:e}, {:.2}s -> {}",
        s.experiment,
        s.pass,
        s.fail,
        s.worst_gap,
        s.wall_time_s,
        outcome.csv_path.display()
    );
    Ok(outcome.exit_code())
}

fn merge(args: MergeArgs) -> LabResult<i32> {
    let summary = report_merge(&args.reports)?;
    let json = serde_json::to_string_pretty(&summary).expect("summary serializes") + "\n";
    match &args.out {
        Some(path) => latlab::io::write_atomic(path, json.as_bytes())?,
        None => print!("{json}"),
    }
    Ok(if summary.status == "PASS" { 0 } else { 1 })
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let result = if argv.get(1).map(String::as_str) == Some("merge") {
        let rest = std::iter::once("latlab merge".to_string()).chain(argv.into_iter().skip(2));
        merge(MergeArgs::parse_from(rest))
    } else {
        run(RunArgs::parse_from(argv))
    };
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("latlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
