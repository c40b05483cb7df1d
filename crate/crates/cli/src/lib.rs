//! The `qrf` command-line driver: reads a JSON run configuration, runs one
//! command and writes its artifacts.
//!
//! Exit codes: 0 success, 1 a bound or margin check failed, 2 configuration
//! or contract error, 3 numerical adequacy guard (grid, window, mass).

pub mod config;

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use qrf_core::audit::{classical_limit_sweep, run_scenario, SweepRecord, URReport};
use qrf_core::measure::io::{format_float, measure2d_to_csv};
use qrf_core::phasespace::{husimi, husimi_at, margin_check};
use qrf_core::relativize::{
    conditioned_momentum, conditioned_position, joint_observable_distribution,
};
use serde::Serialize;
use thiserror::Error;

pub use config::RunConfig;

/// Largest L1 distance accepted by `margins`.
pub const MARGIN_TOLERANCE: f64 = 1e-4;
/// Displacement applied by the `corrupt_kernel` test hook.
pub const CORRUPTION_SHIFT: f64 = 0.1;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("{0}")]
    Core(#[from] qrf_core::Error),
    #[error("i/o error: {0}")]
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Core(e) if e.is_numerical_guard() => 3,
            _ => 2,
        }
    }
}

/// Result of a successful command run.
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub passed: bool,
    pub summary: Vec<String>,
    pub files: Vec<PathBuf>,
}

impl Outcome {
    pub fn exit_code(&self) -> i32 {
        if self.passed {
            0
        } else {
            1
        }
    }
}

#[derive(Serialize)]
struct AuditJson<'a> {
    seed: u64,
    all_pass: bool,
    reports: &'a [URReport],
}

#[derive(Serialize)]
struct MarginPair {
    q_l1: f64,
    p_l1: f64,
}

#[derive(Serialize)]
struct MarginsJson {
    seed: u64,
    tolerance: f64,
    husimi: MarginPair,
    joint: MarginPair,
    pass: bool,
}

fn write(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, CliError> {
    fs::create_dir_all(dir)
        .map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    fs::write(&path, contents)
        .map_err(|e| CliError::Io(format!("cannot write {}: {e}", path.display())))?;
    Ok(path)
}

/// Runs the configured scenarios; writes `report.csv` and `report.json`.
pub fn cmd_audit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rho = cfg.system()?;
    let frame = cfg.frame()?;
    let t = cfg.apparatus()?;
    let mut scenarios = cfg.scenarios();
    if matches!(cfg.scenarios, config::ScenarioSelection::All) && t.is_none() {
        scenarios.retain(|s| !s.needs_apparatus());
    }
    let reports = scenarios
        .iter()
        .map(|s| run_scenario(*s, &rho, &frame, t.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;
    let all_pass = reports.iter().all(|r| r.pass);

    let mut csv = String::from(URReport::CSV_HEADER);
    csv.push('\n');
    for r in &reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let json = serde_json::to_string_pretty(&AuditJson {
        seed: cfg.seed,
        all_pass,
        reports: &reports,
    })
    .expect("report serializes");
    let files = vec![
        write(&cfg.output_dir, "report.csv", &csv)?,
        write(&cfg.output_dir, "report.json", &json)?,
    ];
    let summary = reports
        .iter()
        .map(|r| {
            format!(
                "{:<18} product {:.6} bound {:.3} slack {:+.3e} {}",
                r.scenario.id(),
                r.product,
                r.bound,
                r.slack,
                if r.pass { "pass" } else { "FAIL" }
            )
        })
        .collect();
    Ok(Outcome {
        passed: all_pass,
        summary,
        files,
    })
}

/// Evaluates the `G^T` density of the system state; writes `husimi.csv`.
pub fn cmd_husimi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rho = cfg.system()?;
    let t = cfg
        .apparatus()?
        .ok_or_else(|| qrf_core::Error::MissingApparatusState("husimi".into()))?;
    let h = husimi(&rho, &t, &cfg.window()?)?;
    let csv = measure2d_to_csv(&h, ["q", "p", "density"]);
    let d = h.dense().expect("husimi density is dense");
    let mut best = (f64::MIN, 0, 0);
    for iq in 0..d.x_grid().n() {
        for ip in 0..d.y_grid().n() {
            if d.value(iq, ip) > best.0 {
                best = (d.value(iq, ip), iq, ip);
            }
        }
    }
    let (q, p) = (d.x_grid().point(best.1), d.y_grid().point(best.2));
    let files = vec![write(&cfg.output_dir, "husimi.csv", &csv)?];
    let summary = vec![
        format!("maximum {:.6e} at (q, p) = ({q:.4}, {p:.4})", best.0),
        format!("h(0, 0) = {:.6e}", husimi_at(&rho, &t, 0.0, 0.0)?),
    ];
    Ok(Outcome {
        passed: true,
        summary,
        files,
    })
}

/// Verifies the `G^T` margin identity and the joint-observable margins;
/// writes `margins.json`.
pub fn cmd_margins(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rho = cfg.system()?;
    let frame = cfg.frame()?;
    let window = cfg.window()?;
    let t = cfg
        .apparatus()?
        .ok_or_else(|| qrf_core::Error::MissingApparatusState("margins".into()))?;
    let (hq, hp) = margin_check(&rho, &t, &window)?;

    let mut cq = conditioned_position(&rho, &frame)?;
    let mut cp = conditioned_momentum(&rho, &frame)?;
    if cfg.test_hooks.corrupt_kernel {
        cq = cq.shift(CORRUPTION_SHIFT);
        cp = cp.shift(CORRUPTION_SHIFT);
    }
    let (jq, jp) = joint_observable_distribution(&rho, &frame, &window)?.margins();
    let joint = MarginPair {
        q_l1: jq.l1_distance(&cq),
        p_l1: jp.l1_distance(&cp),
    };
    let husimi = MarginPair { q_l1: hq, p_l1: hp };
    let pass = [husimi.q_l1, husimi.p_l1, joint.q_l1, joint.p_l1]
        .iter()
        .all(|d| *d < MARGIN_TOLERANCE);
    let summary = vec![
        format!(
            "G^T margins      L1 q {:.3e}  p {:.3e}",
            husimi.q_l1, husimi.p_l1
        ),
        format!(
            "joint observable L1 q {:.3e}  p {:.3e}",
            joint.q_l1, joint.p_l1
        ),
        format!(
            "tolerance {MARGIN_TOLERANCE:e}: {}",
            if pass { "pass" } else { "FAIL" }
        ),
    ];
    let json = serde_json::to_string_pretty(&MarginsJson {
        seed: cfg.seed,
        tolerance: MARGIN_TOLERANCE,
        husimi,
        joint,
        pass,
    })
    .expect("margins serialize");
    let files = vec![write(&cfg.output_dir, "margins.json", &json)?];
    Ok(Outcome {
        passed: pass,
        summary,
        files,
    })
}

/// Runs the frame-squeezing sweep; writes `sweep.csv`.
pub fn cmd_classical_limit(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.r_values.is_empty() {
        return Err(CliError::Config("r_values is empty".into()));
    }
    let rho = cfg.system()?;
    let rows = classical_limit_sweep(&rho, &cfg.r_values)?;
    let mut csv = String::from(SweepRecord::CSV_HEADER);
    csv.push('\n');
    let mut summary = Vec::new();
    for row in &rows {
        csv.push_str(&row.csv_row());
        csv.push('\n');
        let r = if row.r.is_infinite() {
            "classical".to_string()
        } else {
            format_float(row.r)
        };
        let mut line = String::new();
        let _ = write!(
            line,
            "r = {r:<24} {:<12} product {:.6}",
            row.report.scenario.id(),
            row.report.product
        );
        summary.push(line);
    }
    let passed = rows.iter().all(|r| r.report.pass);
    let files = vec![write(&cfg.output_dir, "sweep.csv", &csv)?];
    Ok(Outcome {
        passed,
        summary,
        files,
    })
}
