//! Rates, KL divergences and Willie's energy detector.
//!
//! Under either hypothesis `|y_w|²` is exponential with mean `λ₀` (cover only)
//! or `λ₁` (cover plus covert stream).

#[allow(unused_imports)]
use num_traits::Float;

use crate::cxmat::ComplexVector;
use crate::error::{Error, Result};

/// `log₂(1 + s)`.
fn log2_1p(s: f64) -> f64 {
    s.ln_1p() / core::f64::consts::LN_2
}

/// Carol's rate when only the cover beam is on.
pub fn rate_carol_h0(w_c0: &ComplexVector, h_c: &ComplexVector, sigma_c2: f64) -> f64 {
    log2_1p(h_c.inner(w_c0).norm_sqr() / sigma_c2)
}

/// Carol's rate with the covert stream on; `w_b` is interference.
pub fn rate_carol_h1(w_c1: &ComplexVector, w_b: &ComplexVector, h_c: &ComplexVector, sigma_c2: f64) -> f64 {
    log2_1p(h_c.inner(w_c1).norm_sqr() / (h_c.inner(w_b).norm_sqr() + sigma_c2))
}

/// Bob's SINR; `w_c1` is interference.
pub fn sinr_bob(w_c1: &ComplexVector, w_b: &ComplexVector, h_b: &ComplexVector, sigma_b2: f64) -> f64 {
    h_b.inner(w_b).norm_sqr() / (h_b.inner(w_c1).norm_sqr() + sigma_b2)
}

pub fn rate_bob(w_c1: &ComplexVector, w_b: &ComplexVector, h_b: &ComplexVector, sigma_b2: f64) -> f64 {
    log2_1p(sinr_bob(w_c1, w_b, h_b, sigma_b2))
}

/// `log₂(1 + sinr)`.
pub fn rate_from_sinr(sinr: f64) -> f64 {
    log2_1p(sinr.max(0.0))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LikelihoodParams {
    pub lambda0: f64,
    pub lambda1: f64,
}

impl LikelihoodParams {
    pub fn new(lambda0: f64, lambda1: f64) -> Result<Self> {
        if !(lambda0 > 0.0 && lambda1 > 0.0) || !lambda0.is_finite() || !lambda1.is_finite() {
            return Err(Error::InvalidInput(alloc::format!(
                "likelihood parameters must be positive, got ({lambda0}, {lambda1})"
            )));
        }
        Ok(LikelihoodParams { lambda0, lambda1 })
    }

    /// `λ₁/λ₀`.
    pub fn ratio(&self) -> f64 {
        self.lambda1 / self.lambda0
    }
}

pub fn lambdas(
    w_c0: &ComplexVector,
    w_c1: &ComplexVector,
    w_b: &ComplexVector,
    h_w: &ComplexVector,
    sigma_w2: f64,
) -> Result<LikelihoodParams> {
    if !(sigma_w2 > 0.0) {
        return Err(Error::InvalidInput("sigma_w2 must be positive".into()));
    }
    LikelihoodParams::new(
        h_w.inner(w_c0).norm_sqr() + sigma_w2,
        h_w.inner(w_c1).norm_sqr() + h_w.inner(w_b).norm_sqr() + sigma_w2,
    )
}

/// `f(x) = ln x + 1/x − 1`, written to stay accurate near `x = 1`.
pub fn kl_shape(x: f64) -> f64 {
    let d = x - 1.0;
    // ln x + 1/x − 1 = ln(1+d) − d/(1+d)
    d.ln_1p() - d / x
}

/// `D(p₀‖p₁) = ln(λ₁/λ₀) + λ₀/λ₁ − 1`.
pub fn kl_01(lp: &LikelihoodParams) -> f64 {
    kl_shape(lp.lambda1 / lp.lambda0).max(0.0)
}

/// `D(p₁‖p₀) = ln(λ₀/λ₁) + λ₁/λ₀ − 1`.
pub fn kl_10(lp: &LikelihoodParams) -> f64 {
    kl_shape(lp.lambda0 / lp.lambda1).max(0.0)
}

/// Roots `ā ≤ 1 ≤ b̄` of `ln x + 1/x − 1 = 2ε²`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KlInterval {
    pub a_bar: f64,
    pub b_bar: f64,
}

impl KlInterval {
    pub fn contains(&self, x: f64) -> bool {
        self.a_bar <= x && x <= self.b_bar
    }
}

fn bisect(mut lo: f64, mut hi: f64, target: f64, increasing: bool) -> f64 {
    for _ in 0..400 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let above = kl_shape(mid) > target;
        if above == increasing {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    // pick the endpoint with the smaller residual
    if (kl_shape(lo) - target).abs() <= (kl_shape(hi) - target).abs() {
        lo
    } else {
        hi
    }
}

/// `kl_01 ≤ 2ε² ⇔ ā ≤ λ₁/λ₀ ≤ b̄`. `ε = 0` gives `(1, 1)`.
pub fn kl_interval(epsilon: f64) -> Result<KlInterval> {
    if !(epsilon >= 0.0) || !epsilon.is_finite() {
        return Err(Error::InvalidInput(alloc::format!("epsilon must be non-negative, got {epsilon}")));
    }
    if epsilon == 0.0 {
        return Ok(KlInterval { a_bar: 1.0, b_bar: 1.0 });
    }
    let target = 2.0 * epsilon * epsilon;
    // f decreases on (0, 1] from +∞ to 0
    let a_bar = if kl_shape(1e-12) <= target {
        1e-12
    } else {
        bisect(1e-12, 1.0, target, false)
    };
    let mut upper = 2.0;
    while kl_shape(upper) <= target {
        upper *= 2.0;
    }
    let b_bar = bisect(1.0, upper, target, true);
    Ok(KlInterval { a_bar, b_bar })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionStats {
    /// Optimal energy threshold `φ*`.
    pub threshold: f64,
    pub p_fa: f64,
    pub p_md: f64,
    /// `p_fa + p_md`.
    pub xi: f64,
}

/// Relative gap below which the two hypotheses are treated as identical.
const DEGENERATE_REL: f64 = 1e-12;

/// Likelihood-ratio test on `|y_w|²`.
///
/// For `λ₁ > λ₀` Willie declares H₁ above `φ*`; for `λ₁ < λ₀` the test
/// flips and he declares H₁ below `φ*`. Probabilities are evaluated from the
/// exponents `φ*/λ₀`, `φ*/λ₁` so extreme ratios do not overflow.
pub fn detector(lp: &LikelihoodParams) -> DetectionStats {
    let (l0, l1) = (lp.lambda0, lp.lambda1);
    let d = l1 - l0;
    if d.abs() <= DEGENERATE_REL * l0 {
        let e = (-1.0f64).exp();
        return DetectionStats {
            threshold: l0,
            p_fa: e,
            p_md: 1.0 - e,
            xi: 1.0,
        };
    }
    // φ*/λ₀ = λ₁ ln(λ₁/λ₀)/(λ₁−λ₀), φ*/λ₁ = λ₀ ln(λ₁/λ₀)/(λ₁−λ₀)
    let log_ratio_over_d = (d / l0).ln_1p() / d;
    let e0 = l1 * log_ratio_over_d;
    let e1 = l0 * log_ratio_over_d;
    let threshold = l0 * e0;
    // survival functions at φ*: exp(−φ*/λ)
    let s0 = (-e0).exp();
    let s1 = (-e1).exp();
    let (p_fa, p_md) = if d > 0.0 {
        (s0, -(-e1).exp_m1())
    } else {
        (-(-e0).exp_m1(), s1)
    };
    DetectionStats {
        threshold,
        p_fa,
        p_md,
        xi: p_fa + p_md,
    }
}

/// `V_T = 1 − ξ`, the total variation between the two received-signal laws.
pub fn total_variation(lp: &LikelihoodParams) -> f64 {
    1.0 - detector(lp).xi
}

/// Error probabilities of the same test at an arbitrary threshold `phi`.
pub fn detection_at_threshold(lp: &LikelihoodParams, phi: f64) -> DetectionStats {
    let s0 = (-phi / lp.lambda0).exp();
    let s1 = (-phi / lp.lambda1).exp();
    let (p_fa, p_md) = if lp.lambda1 >= lp.lambda0 {
        (s0, 1.0 - s1)
    } else {
        (1.0 - s0, s1)
    };
    DetectionStats {
        threshold: phi,
        p_fa,
        p_md,
        xi: p_fa + p_md,
    }
}
