//! Batch experiment runner: JSON configs in, `report.json` plus CSV tables out.
//!
//! Reports are a pure function of the config. Wall-clock per case goes to a
//! separate `timings.json` so reruns and `--jobs` settings never change the
//! report bytes.

mod acceptance;
mod config;
mod experiments;
mod report;

use std::path::{Path, PathBuf};
use std::time::Instant;

pub use acceptance::{report_bytes, run_criterion, run_selftest, Criterion, CriterionOutcome, CRITERIA, SUITE_SEED};
pub use config::*;
pub use report::{CaseRecord, Cell, Check, Report, Table};

use crate::error::{Error, Result};

/// Environment variable that overrides the config's output directory.
pub const OUT_ENV: &str = "EQUINET_OUT";

/// Runs the experiment on a pool of `jobs` threads (0 = rayon default).
/// The report is identical for every `jobs`.
pub fn run_experiment(cfg: &ExperimentConfig, jobs: usize) -> Result<(Report, f64)> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::param(format!("cannot build thread pool: {e}")))?;
    let start = Instant::now();
    let report = pool.install(|| experiments::run_kind(cfg));
    Ok((report, start.elapsed().as_secs_f64()))
}

/// Output directory: explicit override, then `EQUINET_OUT`, then the
/// config's `out_dir`, then `out/<kind>`.
pub fn resolve_out_dir(cfg: &ExperimentConfig, explicit: Option<&Path>) -> PathBuf {
    if let Some(p) = explicit {
        return p.to_path_buf();
    }
    if let Some(p) = std::env::var_os(OUT_ENV).filter(|v| !v.is_empty()) {
        return PathBuf::from(p);
    }
    cfg.out_dir.clone().unwrap_or_else(|| PathBuf::from("out").join(cfg.kind.name()))
}

/// Writes the report files plus `timings.json` into `dir`.
pub fn write_outputs(report: &Report, seconds: f64, dir: &Path) -> Result<Vec<PathBuf>> {
    let mut paths = report.write(dir)?;
    let t = dir.join("timings.json");
    std::fs::write(&t, format!("{}\n", serde_json::json!({ "wall_clock_seconds": seconds })))?;
    paths.push(t);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jobs_do_not_change_report() {
        let cfg = ExperimentConfig::from_json(r#"{"kind":"basic_equivariance","seed":5,"triples":6}"#).unwrap();
        let (a, _) = run_experiment(&cfg, 1).unwrap();
        let (b, _) = run_experiment(&cfg, 4).unwrap();
        assert_eq!(a.to_json(), b.to_json());
        assert!(a.passed(), "{}", a.to_json());
    }

    #[test]
    fn explicit_out_dir_wins() {
        let mut cfg = ExperimentConfig::default_for(ExperimentKind::CltSweep, 0);
        cfg.out_dir = Some("cfg_dir".into());
        assert_eq!(resolve_out_dir(&cfg, Some(Path::new("x"))), PathBuf::from("x"));
    }
}
