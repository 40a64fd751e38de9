//! Command implementations behind the `pathcount` binary.

pub mod config;
pub mod error;

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use num_bigint::BigUint;
use pathcount_core::expr::FileProblems;
use pathcount_core::problems::brute_force_count;
use pathcount_core::suites::{self, Proposition, Report};
use pathcount_core::{path_counts, Expr, PathCounts, ProblemInstance};

pub use config::Config;
pub use error::{exit, CliError};

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::io(path, e))
}

/// Parses the expression in `machine_file` and counts its paths on the
/// contents of `input_file` (empty input when absent). `PROB(...)`
/// references resolve relative to the machine file.
pub fn cmd_eval(
    machine_file: &Path,
    input_file: Option<&Path>,
    cfg: &Config,
) -> Result<PathCounts, CliError> {
    let expr = Expr::parse(&read(machine_file)?)?;
    let input = match input_file {
        Some(p) => read(p)?,
        None => String::new(),
    };
    let problems = FileProblems {
        base_dir: machine_file
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_default(),
        graph_kind: cfg.problem,
        caps: cfg.suite.caps,
    };
    let machine = expr.build(&problems)?;
    Ok(path_counts(machine.as_ref(), &input)?)
}

/// Exact brute-force count of the instance in `problem_file`.
pub fn cmd_count(problem_file: &Path, cfg: &Config) -> Result<BigUint, CliError> {
    let instance = ProblemInstance::parse(&read(problem_file)?, cfg.problem)?;
    Ok(brute_force_count(&instance, &cfg.suite.caps)?)
}

/// A suite report together with the file it was written to.
#[derive(Debug)]
pub struct WrittenReport {
    pub report: Report,
    pub path: PathBuf,
}

/// Runs the configured proposition (or every suite) and writes one new
/// report file per suite under the report directory.
pub fn cmd_check(cfg: &Config) -> Result<Vec<WrittenReport>, CliError> {
    let propositions = match cfg.proposition {
        Some(p) => vec![p],
        None => Proposition::SUITES.to_vec(),
    };
    fs::create_dir_all(&cfg.report_dir).map_err(|e| CliError::io(&cfg.report_dir, e))?;
    propositions
        .into_iter()
        .map(|p| {
            let report = suites::run(p, &cfg.suite)?;
            let path = write_report(&cfg.report_dir, &report)?;
            Ok(WrittenReport { report, path })
        })
        .collect()
}

/// Header line carrying the only run-dependent data of a report file.
pub fn timestamp_header() -> String {
    let secs = SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    format!("# generated-at={secs}")
}

/// Writes `report` to a fresh file; existing reports are never touched.
fn write_report(dir: &Path, report: &Report) -> Result<PathBuf, CliError> {
    let seed = report
        .parameters
        .split_whitespace()
        .find_map(|kv| kv.strip_prefix("seed="))
        .unwrap_or("0")
        .to_string();
    for n in 1.. {
        let path = dir.join(format!("{}-seed{seed}-{n:04}.txt", report.proposition));
        match fs::OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(mut f) => {
                writeln!(f, "{}", timestamp_header())
                    .and_then(|_| write!(f, "{report}"))
                    .map_err(|e| CliError::io(&path, e))?;
                return Ok(path);
            }
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => continue,
            Err(e) => return Err(CliError::io(&path, e)),
        }
    }
    unreachable!("unbounded search for a free report name")
}

/// Strips the timestamp header so that reports from different runs can be
/// compared.
pub fn without_timestamp(text: &str) -> &str {
    match text.split_once('\n') {
        Some((first, rest)) if first.starts_with("# generated-at=") => rest,
        _ => text,
    }
}
