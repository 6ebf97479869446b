//! Seeded Monte-Carlo sweeps over one scenario parameter.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use covbeam_core::channel::ScenarioParams;
use covbeam_core::designs::BisectionConfig;
use covbeam_core::units::to_linear;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::run::{run_design, Design, Outcome, Trial};
use crate::seeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepParam {
    /// Grid in dBW.
    PTotal,
    /// `‖w_c0‖²/P_total`.
    PowerRatio,
    N,
    Epsilon,
    VW,
}

impl SweepParam {
    pub fn name(self) -> &'static str {
        match self {
            SweepParam::PTotal => "p_total",
            SweepParam::PowerRatio => "power_ratio",
            SweepParam::N => "n",
            SweepParam::Epsilon => "epsilon",
            SweepParam::VW => "v_w",
        }
    }
}

impl fmt::Display for SweepParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SweepParam {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        [SweepParam::PTotal, SweepParam::PowerRatio, SweepParam::N, SweepParam::Epsilon, SweepParam::VW]
            .into_iter()
            .find(|p| p.name() == s)
            .ok_or_else(|| {
                HarnessError::Config(format!(
                    "unknown sweep parameter {s:?}; expected p_total, power_ratio, n, epsilon or v_w"
                ))
            })
    }
}

pub const DEFAULT_TRIALS: usize = 200;
pub const DEFAULT_VERIFY_SAMPLES: usize = 1000;
pub const DEFAULT_V_W: f64 = 0.005;

#[derive(Clone, Debug)]
pub struct SweepSpec {
    pub scenario: ScenarioParams,
    /// CSI error radius for the designs that see `ĥ_w`.
    pub v_w: f64,
    pub swept_parameter: SweepParam,
    pub grid: Vec<f64>,
    pub trials_per_point: usize,
    pub design_set: Vec<Design>,
    pub seed: u64,
    pub solver: BisectionConfig,
    /// Ellipsoid samples per robust/non-robust trial for the violation fraction.
    pub verify_samples: usize,
}

impl SweepSpec {
    pub fn new(scenario: ScenarioParams, swept_parameter: SweepParam, grid: Vec<f64>, design_set: Vec<Design>) -> Self {
        SweepSpec {
            scenario,
            v_w: DEFAULT_V_W,
            swept_parameter,
            grid,
            trials_per_point: DEFAULT_TRIALS,
            design_set,
            seed: 0,
            solver: BisectionConfig::default(),
            verify_samples: DEFAULT_VERIFY_SAMPLES,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(HarnessError::Config("grid is empty".into()));
        }
        if self.grid.iter().any(|g| !g.is_finite()) {
            return Err(HarnessError::Config("grid values must be finite".into()));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(HarnessError::Config("grid must be strictly ascending".into()));
        }
        if self.trials_per_point == 0 {
            return Err(HarnessError::Config("trials per point must be at least 1".into()));
        }
        if self.design_set.is_empty() {
            return Err(HarnessError::Config("design set is empty".into()));
        }
        let mut seen = self.design_set.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.design_set.len() {
            return Err(HarnessError::Config("design set has duplicates".into()));
        }
        self.solver.validate()?;
        for &g in &self.grid {
            let (p, v_w) = self.params_at(g)?;
            p.validate()?;
            if !(v_w > 0.0) {
                return Err(HarnessError::Config(format!("v_w must be positive, got {v_w}")));
            }
        }
        Ok(())
    }

    /// Scenario and `v_w` at one grid value.
    pub fn params_at(&self, value: f64) -> Result<(ScenarioParams, f64)> {
        let mut p = self.scenario.clone();
        let mut v_w = self.v_w;
        match self.swept_parameter {
            SweepParam::PTotal => p.p_total = to_linear(value),
            SweepParam::PowerRatio => {
                if !(value > 0.0 && value <= 1.0) {
                    return Err(HarnessError::Config(format!("power ratio must lie in (0, 1], got {value}")));
                }
                p.p_c0 = value * p.p_total;
            }
            SweepParam::N => {
                if value < 1.0 || value.fract() != 0.0 {
                    return Err(HarnessError::Config(format!("antenna count must be a positive integer, got {value}")));
                }
                p.n = value as usize;
            }
            SweepParam::Epsilon => p.epsilon = value,
            SweepParam::VW => v_w = value,
        }
        Ok((p, v_w))
    }
}

/// Per-trial metrics, in [`METRICS`] order.
#[derive(Clone, Debug, PartialEq)]
pub struct TrialMetrics(pub Vec<Option<f64>>);

/// Metric names, in CSV order. `violation_fraction` is only defined for the
/// designs that see `ĥ_w`.
pub const METRICS: [&str; 14] = [
    "rate",
    "sinr",
    "power",
    "p_fa",
    "p_md",
    "xi",
    "kl01",
    "kl10",
    "violation_fraction",
    "max_residual",
    "sdp_solves",
    "ipm_iterations",
    "max_duality_gap",
    "max_sdp_violation",
];

impl TrialMetrics {
    pub fn from_outcome(o: &Outcome) -> Self {
        let s = &o.solution;
        TrialMetrics(vec![
            Some(s.rate()),
            Some(s.r_b),
            Some(s.power()),
            Some(o.detection.p_fa),
            Some(o.detection.p_md),
            Some(o.detection.xi),
            Some(o.kl01()),
            Some(o.kl10()),
            o.worst_case.as_ref().map(|w| w.violation_fraction),
            Some(s.max_residual()),
            Some(s.log.sdp_solves as f64),
            Some(s.log.ipm_iterations as f64),
            Some(s.log.max_duality_gap),
            Some(s.log.max_sdp_violation),
        ])
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        METRICS.iter().position(|m| *m == name).and_then(|i| self.0[i])
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MetricSummary {
    pub metric: &'static str,
    pub mean: Option<f64>,
    /// Absent below two samples.
    pub stderr: Option<f64>,
    pub count: usize,
}

fn summarize(metric: &'static str, xs: &[f64]) -> MetricSummary {
    let k = xs.len();
    let mean = (k > 0).then(|| xs.iter().sum::<f64>() / k as f64);
    let stderr = match (k >= 2, mean) {
        (true, Some(m)) => {
            let var = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (k - 1) as f64;
            Some((var / k as f64).sqrt())
        }
        _ => None,
    };
    MetricSummary { metric, mean, stderr, count: k }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DesignResult {
    pub design: Design,
    /// One entry per trial; failures carry the error category.
    pub trials: Vec<std::result::Result<TrialMetrics, String>>,
    pub metrics: Vec<MetricSummary>,
    pub failures: usize,
    pub failure_categories: BTreeMap<String, usize>,
    /// More than half of the trials failed.
    pub flagged: bool,
}

impl DesignResult {
    fn new(design: Design, trials: Vec<std::result::Result<TrialMetrics, String>>) -> Self {
        let mut failure_categories = BTreeMap::new();
        for t in &trials {
            if let Err(c) = t {
                *failure_categories.entry(c.clone()).or_insert(0) += 1;
            }
        }
        let failures = failure_categories.values().sum();
        let metrics = METRICS
            .iter()
            .enumerate()
            .map(|(i, m)| {
                let xs: Vec<f64> = trials.iter().filter_map(|t| t.as_ref().ok().and_then(|v| v.0[i])).collect();
                summarize(m, &xs)
            })
            .collect();
        DesignResult {
            design,
            flagged: 2 * failures > trials.len(),
            trials,
            metrics,
            failures,
            failure_categories,
        }
    }

    pub fn metric(&self, name: &str) -> Option<&MetricSummary> {
        self.metrics.iter().find(|m| m.metric == name)
    }

    /// Per-trial values of one metric; `None` for failed trials.
    pub fn values(&self, name: &str) -> Vec<Option<f64>> {
        self.trials.iter().map(|t| t.as_ref().ok().and_then(|m| m.get(name))).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PointResult {
    pub value: f64,
    pub designs: Vec<DesignResult>,
}

impl PointResult {
    pub fn design(&self, d: Design) -> Option<&DesignResult> {
        self.designs.iter().find(|r| r.design == d)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepResult {
    pub parameter: SweepParam,
    pub points: Vec<PointResult>,
}

impl SweepResult {
    pub fn flagged(&self) -> bool {
        self.points.iter().any(|p| p.designs.iter().any(|d| d.flagged))
    }
}

/// Runs every design on every (grid point, trial).
///
/// Trial `t` uses the same channel seed at every grid point and for every
/// design. Antenna sweeps therefore see nested draws, since the draw for `n`
/// antennas is a prefix of the draw for more.
pub fn run_sweep(spec: &SweepSpec) -> Result<SweepResult> {
    spec.validate()?;
    let trials = spec.trials_per_point;
    let jobs: Vec<(usize, usize)> = (0..spec.grid.len()).flat_map(|g| (0..trials).map(move |t| (g, t))).collect();
    let runs: Vec<Vec<std::result::Result<TrialMetrics, String>>> = jobs
        .par_iter()
        .map(|&(g, t)| run_trial(spec, spec.grid[g], t as u64))
        .collect::<Result<_>>()?;
    let mut points = Vec::with_capacity(spec.grid.len());
    for (g, &value) in spec.grid.iter().enumerate() {
        let block = &runs[g * trials..(g + 1) * trials];
        let designs = spec
            .design_set
            .iter()
            .enumerate()
            .map(|(k, &d)| DesignResult::new(d, block.iter().map(|r| r[k].clone()).collect()))
            .collect();
        points.push(PointResult { value, designs });
    }
    Ok(SweepResult { parameter: spec.swept_parameter, points })
}

/// All designs for one trial. Errors drawing the trial itself abort the
/// sweep; design errors are recorded.
fn run_trial(spec: &SweepSpec, value: f64, t: u64) -> Result<Vec<std::result::Result<TrialMetrics, String>>> {
    let (params, v_w) = spec.params_at(value)?;
    let trial = Trial::draw(&params, v_w, spec.seed, t)?;
    let cfg = BisectionConfig {
        seed: seeds::derive(spec.seed, seeds::STREAM_SOLVER, t),
        ..spec.solver.clone()
    };
    let verify_seed = seeds::derive(spec.seed, seeds::STREAM_VERIFY, t);
    Ok(spec
        .design_set
        .iter()
        .map(|&d| {
            let samples = if d.uses_estimate() { spec.verify_samples } else { 0 };
            run_design(&trial, d, &cfg, samples, verify_seed)
                .map(|o| TrialMetrics::from_outcome(&o))
                .map_err(|e| e.category().to_string())
        })
        .collect())
}
