//! Monte-Carlo check of the warden's detector.

use covbeam_core::covert_metrics::{detection_at_threshold, detector, LikelihoodParams};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{HarnessError, Result};
use crate::seeds;

pub const MIN_DRAWS: usize = 1000;
const CHUNK: usize = 1 << 16;
/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Empirical rate with its standard error and Wilson 95% interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Proportion {
    pub estimate: f64,
    pub stderr: f64,
    pub ci95: (f64, f64),
}

impl Proportion {
    pub fn from_counts(hits: u64, n: u64) -> Self {
        let nf = n as f64;
        let p = hits as f64 / nf;
        let z2 = Z95 * Z95;
        let centre = (p + z2 / (2.0 * nf)) / (1.0 + z2 / nf);
        let half = Z95 * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt() / (1.0 + z2 / nf);
        Proportion {
            estimate: p,
            stderr: (p * (1.0 - p) / nf).sqrt(),
            ci95: ((centre - half).max(0.0), (centre + half).min(1.0)),
        }
    }

    /// `|estimate − p| ≤ k·σ`, with `σ` the binomial standard error at the
    /// reference value `p`.
    pub fn within_sigmas(&self, p: f64, n: usize, k: f64) -> bool {
        let sd = (p * (1.0 - p) / n as f64).sqrt();
        (self.estimate - p).abs() <= k * sd
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DetectorMc {
    /// Draws per hypothesis.
    pub draws: usize,
    pub threshold: f64,
    pub p_fa: Proportion,
    pub p_md: Proportion,
    pub xi: f64,
}

/// Monte-Carlo error rates of the likelihood-ratio test at `φ*`.
pub fn run_detector_mc(lp: &LikelihoodParams, draws: usize, seed: u64) -> Result<DetectorMc> {
    run_detector_mc_at(lp, detector(lp).threshold, draws, seed)
}

/// Same as [`run_detector_mc`] at an arbitrary threshold.
///
/// `|y_w|²` is exponential with mean `λ₀` under H₀ and `λ₁` under H₁. The test
/// declares H₁ above the threshold when `λ₁ ≥ λ₀`, below it otherwise.
pub fn run_detector_mc_at(lp: &LikelihoodParams, phi: f64, draws: usize, seed: u64) -> Result<DetectorMc> {
    if draws < MIN_DRAWS {
        return Err(HarnessError::Config(format!("detector draws must be at least {MIN_DRAWS}, got {draws}")));
    }
    if !(phi >= 0.0) || !phi.is_finite() {
        return Err(HarnessError::Config(format!("threshold must be finite and non-negative, got {phi}")));
    }
    let upward = lp.lambda1 >= lp.lambda0;
    let says_h1 = |y: f64| if upward { y > phi } else { y < phi };
    let chunks = draws.div_ceil(CHUNK);
    let (fa, md) = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let len = CHUNK.min(draws - c * CHUNK);
            let mut rng = ChaCha8Rng::seed_from_u64(seeds::derive(seed, seeds::STREAM_DETECTOR, c as u64));
            let mut fa = 0u64;
            let mut md = 0u64;
            for _ in 0..len {
                let e0: f64 = Exp1.sample(&mut rng);
                let e1: f64 = Exp1.sample(&mut rng);
                fa += says_h1(lp.lambda0 * e0) as u64;
                md += !says_h1(lp.lambda1 * e1) as u64;
            }
            (fa, md)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold((0, 0), |(a, b), (x, y)| (a + x, b + y));
    let p_fa = Proportion::from_counts(fa, draws as u64);
    let p_md = Proportion::from_counts(md, draws as u64);
    Ok(DetectorMc {
        draws,
        threshold: phi,
        xi: p_fa.estimate + p_md.estimate,
        p_fa,
        p_md,
    })
}

/// Closed-form error rates at `phi`, for comparison with the Monte-Carlo.
pub fn closed_form_at(lp: &LikelihoodParams, phi: f64) -> (f64, f64) {
    let d = detection_at_threshold(lp, phi);
    (d.p_fa, d.p_md)
}
