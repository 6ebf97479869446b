//! One trial: channel draw, the requested design, and its metrics.

use std::fmt;
use std::str::FromStr;

use covbeam_core::channel::{
    make_cover_beam, sample_channels, sample_error, ChannelSet, CoverBeam, CsiErrorEllipsoid, ScenarioParams,
};
use covbeam_core::covert_metrics::{detector, kl_01, kl_10, lambdas, DetectionStats, LikelihoodParams};
use covbeam_core::cxmat::ComplexVector;
use covbeam_core::designs::{covert_design, zf_design_with, BeamformerSolution, BisectionConfig};
use covbeam_core::robust::{
    nonrobust_baseline, robust_design, verify_worst_case, KlDirection, RobustProblemSpec, WorstCaseReport,
};
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::seeds;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Design {
    Covert,
    Zf,
    RobustKl01,
    RobustKl10,
    /// Interval constraint at `ĥ_w` only, `D(p₀‖p₁)` direction.
    Nonrobust,
}

impl Design {
    pub const ALL: [Design; 5] = [Design::Covert, Design::Zf, Design::RobustKl01, Design::RobustKl10, Design::Nonrobust];

    pub fn name(self) -> &'static str {
        match self {
            Design::Covert => "covert",
            Design::Zf => "zf",
            Design::RobustKl01 => "robust_kl01",
            Design::RobustKl10 => "robust_kl10",
            Design::Nonrobust => "nonrobust",
        }
    }

    /// Designs that only see the estimate `ĥ_w`.
    pub fn uses_estimate(self) -> bool {
        matches!(self, Design::RobustKl01 | Design::RobustKl10 | Design::Nonrobust)
    }

    pub fn direction(self) -> KlDirection {
        match self {
            Design::RobustKl10 => KlDirection::Kl10,
            _ => KlDirection::Kl01,
        }
    }
}

impl fmt::Display for Design {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Design {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        Design::ALL
            .into_iter()
            .find(|d| d.name() == s)
            .ok_or_else(|| HarnessError::Config(format!("unknown design {s:?}")))
    }
}

/// A drawn trial. `perfect` has `ĥ_w = h_w`; `estimated` keeps the same
/// `h_b`, `h_c`, `ĥ_w` and moves the true `h_w` inside the ellipsoid.
#[derive(Clone, Debug)]
pub struct Trial {
    pub params: ScenarioParams,
    pub perfect: ChannelSet,
    pub estimated: ChannelSet,
    pub cover: CoverBeam,
    pub ellipsoid: CsiErrorEllipsoid,
}

impl Trial {
    pub fn draw(params: &ScenarioParams, v_w: f64, seed: u64, trial: u64) -> Result<Trial> {
        let perfect = sample_channels(params, seeds::derive(seed, seeds::STREAM_CHANNEL, trial))?;
        let ellipsoid = CsiErrorEllipsoid::isotropic(params.n, v_w)?;
        let dh = sample_error(&ellipsoid, seeds::derive(seed, seeds::STREAM_ERROR, trial));
        let estimated = perfect.with_error(dh);
        let cover = make_cover_beam(params, &perfect)?;
        Ok(Trial { params: params.clone(), perfect, estimated, cover, ellipsoid })
    }

    pub fn channels_for(&self, d: Design) -> &ChannelSet {
        if d.uses_estimate() {
            &self.estimated
        } else {
            &self.perfect
        }
    }

    pub fn robust_spec(&self, d: Design) -> Result<RobustProblemSpec> {
        Ok(RobustProblemSpec::new(
            &self.params,
            &self.estimated,
            &self.cover,
            self.ellipsoid.clone(),
            d.direction(),
        )?)
    }
}

/// Design output with the warden's view at the true `h_w`.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub design: Design,
    pub solution: BeamformerSolution,
    pub likelihood: LikelihoodParams,
    pub detection: DetectionStats,
    pub worst_case: Option<WorstCaseReport>,
}

impl Outcome {
    pub fn kl01(&self) -> f64 {
        kl_01(&self.likelihood)
    }

    pub fn kl10(&self) -> f64 {
        kl_10(&self.likelihood)
    }
}

/// Runs `d` on the trial. `verify_samples = 0` skips the ellipsoid sampling.
pub fn run_design(t: &Trial, d: Design, cfg: &BisectionConfig, verify_samples: usize, verify_seed: u64) -> Result<Outcome> {
    let ch = t.channels_for(d);
    let (solution, spec) = match d {
        Design::Covert => (covert_design(&t.params, ch, &t.cover, cfg)?, None),
        Design::Zf => (zf_design_with(&t.params, ch, &t.cover, cfg)?, None),
        Design::RobustKl01 | Design::RobustKl10 => {
            let spec = t.robust_spec(d)?;
            (robust_design(&t.params, ch, &spec, cfg)?, Some(spec))
        }
        Design::Nonrobust => {
            let spec = t.robust_spec(d)?;
            (nonrobust_baseline(&t.params, ch, &spec, cfg)?, Some(spec))
        }
    };
    let likelihood = lambdas(&t.cover.w_c0, &solution.w_c1, &solution.w_b, &ch.h_w, t.params.sigma_w2)?;
    let worst_case = match (spec, verify_samples) {
        (Some(spec), n) if n > 0 => Some(verify_worst_case(&solution, &spec, n, verify_seed)),
        _ => None,
    };
    Ok(Outcome {
        design: d,
        detection: detector(&likelihood),
        likelihood,
        solution,
        worst_case,
    })
}

fn pairs(v: &ComplexVector) -> Vec<[f64; 2]> {
    v.entries().iter().map(|z| [z.re, z.im]).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct DetectionReport {
    pub lambda0: f64,
    pub lambda1: f64,
    pub threshold: f64,
    pub p_fa: f64,
    pub p_md: f64,
    pub xi: f64,
    pub kl01: f64,
    pub kl10: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct WorstCaseSummary {
    pub samples: usize,
    pub violation_fraction: f64,
    pub max_kl: f64,
    pub margin: f64,
    pub exact_ratio: (f64, f64),
    pub exact_max_kl: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct SolverReport {
    pub bisection_steps: usize,
    pub polish_steps: usize,
    pub sdp_solves: usize,
    pub ipm_iterations: usize,
    pub max_duality_gap: f64,
    pub max_sdp_violation: f64,
    pub randomized: bool,
    pub rank_gap_b: f64,
    pub rank_gap_c1: f64,
}

/// JSON shape printed by the `design-*` subcommands.
#[derive(Clone, Debug, Serialize)]
pub struct DesignReport {
    pub design: Design,
    pub n: usize,
    pub r_b: f64,
    pub rate: f64,
    pub r_sdr: f64,
    pub power: f64,
    pub w_c0: Vec<[f64; 2]>,
    pub w_c1: Vec<[f64; 2]>,
    pub w_b: Vec<[f64; 2]>,
    pub residuals: Vec<(String, f64)>,
    pub detection: DetectionReport,
    pub eta: Option<(f64, f64)>,
    pub lmi_min_eig: Option<(f64, f64)>,
    pub worst_case: Option<WorstCaseSummary>,
    pub solver: SolverReport,
}

impl DesignReport {
    pub fn new(t: &Trial, o: &Outcome) -> Self {
        let s = &o.solution;
        DesignReport {
            design: o.design,
            n: t.params.n,
            r_b: s.r_b,
            rate: s.rate(),
            r_sdr: s.r_sdr,
            power: s.power(),
            w_c0: pairs(&t.cover.w_c0),
            w_c1: pairs(&s.w_c1),
            w_b: pairs(&s.w_b),
            residuals: s.residuals.clone(),
            detection: DetectionReport {
                lambda0: o.likelihood.lambda0,
                lambda1: o.likelihood.lambda1,
                threshold: o.detection.threshold,
                p_fa: o.detection.p_fa,
                p_md: o.detection.p_md,
                xi: o.detection.xi,
                kl01: o.kl01(),
                kl10: o.kl10(),
            },
            eta: s.eta,
            lmi_min_eig: s.lmi_min_eig,
            worst_case: o.worst_case.as_ref().map(|w| WorstCaseSummary {
                samples: w.samples,
                violation_fraction: w.violation_fraction,
                max_kl: w.max_kl,
                margin: w.margin,
                exact_ratio: w.exact_ratio,
                exact_max_kl: w.exact_max_kl,
            }),
            solver: SolverReport {
                bisection_steps: s.log.bisection_steps,
                polish_steps: s.log.polish_steps,
                sdp_solves: s.log.sdp_solves,
                ipm_iterations: s.log.ipm_iterations,
                max_duality_gap: s.log.max_duality_gap,
                max_sdp_violation: s.log.max_sdp_violation,
                randomized: s.log.randomized,
                rank_gap_b: s.rank_gap_b,
                rank_gap_c1: s.rank_gap_c1,
            },
        }
    }
}
