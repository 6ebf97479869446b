//! Flat key/value run configuration. The CLI fills one [`RunConfig`] from its
//! flags, a TOML file fills another, and [`RunConfig::overlay`] lets the file
//! win.

use std::path::{Path, PathBuf};

use covbeam_core::channel::ScenarioParams;
use covbeam_core::designs::BisectionConfig;
use covbeam_core::robust::KlDirection;
use covbeam_core::units::to_linear;
use serde::Deserialize;

use crate::error::{HarnessError, Result};
use crate::run::Design;
use crate::sweep::{SweepParam, SweepSpec, DEFAULT_TRIALS, DEFAULT_VERIFY_SAMPLES, DEFAULT_V_W};

/// Detector Monte-Carlo draws per hypothesis when unset.
pub const DEFAULT_DRAWS: usize = 1_000_000;

/// Every key is optional. Powers are in dBW, variances linear.
#[derive(Clone, Debug, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub trials: Option<usize>,
    /// Ellipsoid samples for violation fractions.
    pub samples: Option<usize>,
    /// Detector Monte-Carlo draws per hypothesis.
    pub draws: Option<usize>,
    pub gap_tol: Option<f64>,
    pub feas_tol: Option<f64>,
    pub zeta: Option<f64>,
    pub randomization_trials: Option<usize>,
    pub max_iter: Option<usize>,
    pub output: Option<PathBuf>,

    pub n: Option<usize>,
    pub p_total_dbw: Option<f64>,
    pub p_c0_dbw: Option<f64>,
    /// `‖w_c0‖²/P_total`; exclusive with `p_c0_dbw`.
    pub power_ratio: Option<f64>,
    pub epsilon: Option<f64>,
    pub v_w: Option<f64>,
    pub sigma_b2: Option<f64>,
    pub sigma_c2: Option<f64>,
    pub sigma_w2: Option<f64>,
    pub sigma1: Option<f64>,
    pub sigma2: Option<f64>,
    pub sigma3: Option<f64>,

    pub direction: Option<String>,
    pub param: Option<String>,
    pub grid: Option<Vec<f64>>,
    pub designs: Option<Vec<String>>,
    pub lambda0: Option<f64>,
    pub lambda1: Option<f64>,
}

macro_rules! overlay_fields {
    ($base:expr, $top:expr, $($f:ident),*) => {
        $( if $top.$f.is_some() { $base.$f = $top.$f.clone(); } )*
    };
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))?;
        toml::from_str(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    /// Keys set in `top` replace those in `self`.
    pub fn overlay(mut self, top: &RunConfig) -> Self {
        overlay_fields!(
            self, top, seed, trials, samples, draws, gap_tol, feas_tol, zeta, randomization_trials, max_iter,
            output, n, p_total_dbw, p_c0_dbw, power_ratio, epsilon, v_w, sigma_b2, sigma_c2, sigma_w2, sigma1,
            sigma2, sigma3, direction, param, grid, designs, lambda0, lambda1
        );
        self
    }

    pub fn scenario(&self) -> Result<ScenarioParams> {
        let d = ScenarioParams::default();
        let p_total = self.p_total_dbw.map_or(d.p_total, to_linear);
        let p_c0 = match (self.p_c0_dbw, self.power_ratio) {
            (Some(_), Some(_)) => {
                return Err(HarnessError::Config("set either p_c0_dbw or power_ratio, not both".into()))
            }
            (Some(db), None) => to_linear(db),
            (None, Some(r)) => r * p_total,
            (None, None) => d.p_c0,
        };
        let p = ScenarioParams {
            n: self.n.unwrap_or(d.n),
            sigma_b2: self.sigma_b2.unwrap_or(d.sigma_b2),
            sigma_c2: self.sigma_c2.unwrap_or(d.sigma_c2),
            sigma_w2: self.sigma_w2.unwrap_or(d.sigma_w2),
            sigma1: self.sigma1.unwrap_or(d.sigma1),
            sigma2: self.sigma2.unwrap_or(d.sigma2),
            sigma3: self.sigma3.unwrap_or(d.sigma3),
            p_total,
            p_c0,
            epsilon: self.epsilon.unwrap_or(d.epsilon),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn solver(&self) -> Result<BisectionConfig> {
        let d = BisectionConfig::default();
        let c = BisectionConfig {
            zeta: self.zeta.or(d.zeta),
            gap_tol: self.gap_tol.unwrap_or(d.gap_tol),
            feas_tol: self.feas_tol.unwrap_or(d.feas_tol),
            randomization_trials: self.randomization_trials.unwrap_or(d.randomization_trials),
            max_iter: self.max_iter.unwrap_or(d.max_iter),
            seed: self.seed.unwrap_or(0),
            ..d
        };
        c.validate()?;
        Ok(c)
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(0)
    }

    pub fn v_w(&self) -> f64 {
        self.v_w.unwrap_or(DEFAULT_V_W)
    }

    pub fn samples(&self) -> usize {
        self.samples.unwrap_or(DEFAULT_VERIFY_SAMPLES)
    }

    pub fn draws(&self) -> usize {
        self.draws.unwrap_or(DEFAULT_DRAWS)
    }

    pub fn direction(&self) -> Result<KlDirection> {
        match &self.direction {
            Some(s) => Ok(s.parse()?),
            None => Err(HarnessError::Config("direction is required (kl01 or kl10)".into())),
        }
    }

    pub fn sweep_spec(&self) -> Result<SweepSpec> {
        let param: SweepParam = self
            .param
            .as_deref()
            .ok_or_else(|| HarnessError::Config("sweep parameter is required".into()))?
            .parse()?;
        let grid = self.grid.clone().ok_or_else(|| HarnessError::Config("sweep grid is required".into()))?;
        let designs = match &self.designs {
            Some(names) => names.iter().map(|s| s.parse()).collect::<Result<Vec<Design>>>()?,
            None => vec![Design::Covert, Design::Zf],
        };
        let mut spec = SweepSpec::new(self.scenario()?, param, grid, designs);
        spec.v_w = self.v_w();
        spec.trials_per_point = self.trials.unwrap_or(DEFAULT_TRIALS);
        spec.seed = self.seed();
        spec.solver = self.solver()?;
        spec.verify_samples = self.samples();
        spec.validate()?;
        Ok(spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_overrides_flags() {
        let flags = RunConfig { seed: Some(1), trials: Some(10), n: Some(4), ..Default::default() };
        let file = RunConfig::from_toml("seed = 9\nepsilon = 0.2\n").unwrap();
        let c = flags.overlay(&file);
        assert_eq!(c.seed, Some(9));
        assert_eq!(c.trials, Some(10));
        assert_eq!(c.n, Some(4));
        assert_eq!(c.scenario().unwrap().epsilon, 0.2);
    }

    #[test]
    fn unknown_keys_and_bad_values_are_rejected() {
        assert_eq!(RunConfig::from_toml("sed = 1").unwrap_err().category(), "config");
        assert!(RunConfig::from_toml("seed = \"x\"").is_err());
        let c = RunConfig { p_c0_dbw: Some(1.0), power_ratio: Some(0.5), ..Default::default() };
        assert!(c.scenario().is_err());
        let c = RunConfig { gap_tol: Some(-1.0), ..Default::default() };
        assert!(c.solver().is_err());
        assert!(RunConfig::default().direction().is_err());
        let c = RunConfig { param: Some("n".into()), grid: Some(vec![4.0, 3.0]), ..Default::default() };
        assert!(c.sweep_spec().is_err());
    }

    #[test]
    fn defaults_and_units() {
        let p = RunConfig::default().scenario().unwrap();
        assert_eq!(p, ScenarioParams::default());
        let c = RunConfig { p_total_dbw: Some(20.0), power_ratio: Some(0.25), ..Default::default() };
        let p = c.scenario().unwrap();
        assert!((p.p_total - 100.0).abs() < 1e-9);
        assert!((p.p_c0 - 25.0).abs() < 1e-9);
        let c = RunConfig {
            param: Some("p_total".into()),
            grid: Some(vec![2.0, 4.0]),
            designs: Some(vec!["zf".into(), "robust_kl10".into()]),
            ..Default::default()
        };
        let s = c.sweep_spec().unwrap();
        assert_eq!(s.design_set, vec![Design::Zf, Design::RobustKl10]);
        assert_eq!(s.trials_per_point, DEFAULT_TRIALS);
    }
}
