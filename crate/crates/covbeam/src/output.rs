//! `results.csv` and `manifest.json` for a sweep.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::sweep::{SweepResult, SweepSpec, METRICS};

pub const RESULTS_FILE: &str = "results.csv";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Column order of `results.csv`.
pub const COLUMNS: [&str; 8] = ["parameter", "value", "design", "metric", "mean", "stderr", "count", "failures"];

/// One line of `results.csv`. Empty `mean`/`stderr` cells mean absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub parameter: String,
    pub value: f64,
    pub design: String,
    pub metric: String,
    pub mean: Option<f64>,
    pub stderr: Option<f64>,
    pub count: usize,
    pub failures: usize,
}

/// Rows in grid order, then design order, then [`METRICS`] order. Metrics
/// that are undefined for a design (no trial produced them and none failed)
/// are skipped.
pub fn csv_rows(r: &SweepResult) -> Vec<CsvRow> {
    let mut rows = Vec::new();
    for p in &r.points {
        for d in &p.designs {
            for m in &d.metrics {
                let undefined = m.count == 0 && d.trials.iter().any(|t| t.is_ok());
                if undefined {
                    continue;
                }
                rows.push(CsvRow {
                    parameter: r.parameter.name().to_string(),
                    value: p.value,
                    design: d.design.name().to_string(),
                    metric: m.metric.to_string(),
                    mean: m.mean,
                    stderr: m.stderr,
                    count: m.count,
                    failures: d.failures,
                });
            }
        }
    }
    rows
}

pub fn write_csv(rows: &[CsvRow], path: &Path) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| HarnessError::io(path, e))?;
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
    let fail = |e: csv::Error| HarnessError::format(path, e);
    w.write_record(COLUMNS).map_err(fail)?;
    for r in rows {
        w.serialize(r).map_err(fail)?;
    }
    w.flush().map_err(|e| HarnessError::io(path, e))
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut r = csv::Reader::from_path(path).map_err(|e| HarnessError::format(path, e))?;
    let header = r.headers().map_err(|e| HarnessError::format(path, e))?.clone();
    if header.iter().ne(COLUMNS) {
        return Err(HarnessError::format(path, format!("unexpected header {header:?}")));
    }
    r.deserialize().map(|row| row.map_err(|e| HarnessError::format(path, e))).collect()
}

#[derive(Debug, Serialize)]
struct ScenarioEcho {
    n: usize,
    sigma_b2: f64,
    sigma_c2: f64,
    sigma_w2: f64,
    sigma1: f64,
    sigma2: f64,
    sigma3: f64,
    p_total: f64,
    p_c0: f64,
    epsilon: f64,
    v_w: f64,
}

#[derive(Debug, Serialize)]
struct SolverEcho {
    zeta: Option<f64>,
    r_upper_init: Option<f64>,
    max_outer: usize,
    polish: bool,
    randomization_trials: usize,
    gap_tol: f64,
    feas_tol: f64,
    max_iter: usize,
}

#[derive(Debug, Serialize)]
struct ConfigEcho {
    scenario: ScenarioEcho,
    swept_parameter: &'static str,
    grid: Vec<f64>,
    trials_per_point: usize,
    design_set: Vec<&'static str>,
    seed: u64,
    verify_samples: usize,
    solver: SolverEcho,
}

#[derive(Debug, Serialize)]
struct FailureEcho {
    value: f64,
    design: &'static str,
    failures: usize,
    trials: usize,
    flagged: bool,
    categories: BTreeMap<String, usize>,
}

#[derive(Debug, Serialize)]
struct Manifest {
    tool: &'static str,
    version: &'static str,
    seed: u64,
    config: ConfigEcho,
    columns: [&'static str; 8],
    metrics: [&'static str; 14],
    flagged: bool,
    failures: Vec<FailureEcho>,
}

fn manifest(spec: &SweepSpec, r: &SweepResult) -> Manifest {
    let s = &spec.scenario;
    let c = &spec.solver;
    let failures = r
        .points
        .iter()
        .flat_map(|p| {
            p.designs.iter().filter(|d| d.failures > 0).map(|d| FailureEcho {
                value: p.value,
                design: d.design.name(),
                failures: d.failures,
                trials: d.trials.len(),
                flagged: d.flagged,
                categories: d.failure_categories.clone(),
            })
        })
        .collect();
    Manifest {
        tool: env!("CARGO_PKG_NAME"),
        version: env!("CARGO_PKG_VERSION"),
        seed: spec.seed,
        config: ConfigEcho {
            scenario: ScenarioEcho {
                n: s.n,
                sigma_b2: s.sigma_b2,
                sigma_c2: s.sigma_c2,
                sigma_w2: s.sigma_w2,
                sigma1: s.sigma1,
                sigma2: s.sigma2,
                sigma3: s.sigma3,
                p_total: s.p_total,
                p_c0: s.p_c0,
                epsilon: s.epsilon,
                v_w: spec.v_w,
            },
            swept_parameter: spec.swept_parameter.name(),
            grid: spec.grid.clone(),
            trials_per_point: spec.trials_per_point,
            design_set: spec.design_set.iter().map(|d| d.name()).collect(),
            seed: spec.seed,
            verify_samples: spec.verify_samples,
            solver: SolverEcho {
                zeta: c.zeta,
                r_upper_init: c.r_upper_init,
                max_outer: c.max_outer,
                polish: c.polish,
                randomization_trials: c.randomization_trials,
                gap_tol: c.gap_tol,
                feas_tol: c.feas_tol,
                max_iter: c.max_iter,
            },
        },
        columns: COLUMNS,
        metrics: METRICS,
        flagged: r.flagged(),
        failures,
    }
}

/// Writes `results.csv` and `manifest.json` into `dir`, creating it if
/// needed, and returns both paths.
pub fn emit_results(spec: &SweepSpec, result: &SweepResult, dir: &Path) -> Result<(PathBuf, PathBuf)> {
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    let csv_path = dir.join(RESULTS_FILE);
    write_csv(&csv_rows(result), &csv_path)?;
    let man_path = dir.join(MANIFEST_FILE);
    let mut text = serde_json::to_string_pretty(&manifest(spec, result)).map_err(|e| HarnessError::format(&man_path, e))?;
    text.push('\n');
    fs::write(&man_path, text).map_err(|e| HarnessError::io(&man_path, e))?;
    Ok((csv_path, man_path))
}
