//! Robust covert beamforming under an ellipsoidal error on Willie's channel.
//!
//! The covertness interval `lo ≤ λ₁/λ₀ ≤ hi` must hold for every
//! `h_w = ĥ_w + Δh` with `Δhᴴ C_w Δh ≤ v_w`. Each side is a quadratic
//! implication over the ellipsoid and becomes one `(N+1)`-dimensional LMI
//! with a non-negative multiplier (S-procedure).

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::channel::{ChannelSet, CoverBeam, CsiErrorEllipsoid, ScenarioParams};
use crate::conic::{ConicProblem, Relation, Sense};
use crate::covert_metrics::{kl_interval, kl_shape, KlInterval};
use crate::cxmat::{eig_hermitian, outer, ComplexVector, HermitianMatrix, C64};
use crate::designs::{
    bisect_sinr, finish, r_upper_bound, BeamformerSolution, BisectionConfig, CovertModel, SinrFamily, W_B, W_C1,
};
use crate::error::{Error, Result};

/// Relative shrink of the covertness interval inside the SDPs, so recovered
/// vectors keep a strict margin against roundoff.
pub const INTERVAL_BACKOFF: f64 = 1e-6;

/// Which divergence is bounded by `2ε²`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum KlDirection {
    /// `D(p₀‖p₁)`.
    Kl01,
    /// `D(p₁‖p₀)`.
    Kl10,
}

impl KlDirection {
    pub fn name(self) -> &'static str {
        match self {
            KlDirection::Kl01 => "kl01",
            KlDirection::Kl10 => "kl10",
        }
    }

    /// Bounds on `λ₁/λ₀` equivalent to the divergence constraint.
    pub fn ratio_bounds(self, iv: &KlInterval) -> (f64, f64) {
        match self {
            KlDirection::Kl01 => (iv.a_bar, iv.b_bar),
            KlDirection::Kl10 => (1.0 / iv.b_bar, 1.0 / iv.a_bar),
        }
    }

    /// The divergence at `λ₁/λ₀ = x`.
    pub fn kl_at_ratio(self, x: f64) -> f64 {
        match self {
            KlDirection::Kl01 => kl_shape(x),
            KlDirection::Kl10 => kl_shape(1.0 / x),
        }
    }
}

impl core::str::FromStr for KlDirection {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "kl01" => Ok(KlDirection::Kl01),
            "kl10" => Ok(KlDirection::Kl10),
            _ => Err(Error::InvalidInput(format!("unknown direction {s:?}; expected kl01 or kl10"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RobustProblemSpec {
    pub direction: KlDirection,
    /// Roots `ā ≤ 1 ≤ b̄` for `epsilon`.
    pub interval: KlInterval,
    pub epsilon: f64,
    pub ellipsoid: CsiErrorEllipsoid,
    pub h_w_hat: ComplexVector,
    pub cover: CoverBeam,
    pub sigma_w2: f64,
}

impl RobustProblemSpec {
    pub fn new(
        params: &ScenarioParams,
        ch: &ChannelSet,
        cover: &CoverBeam,
        ellipsoid: CsiErrorEllipsoid,
        direction: KlDirection,
    ) -> Result<Self> {
        params.validate()?;
        let spec = RobustProblemSpec {
            direction,
            interval: kl_interval(params.epsilon)?,
            epsilon: params.epsilon,
            ellipsoid,
            h_w_hat: ch.h_w_hat.clone(),
            cover: cover.clone(),
            sigma_w2: params.sigma_w2,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.h_w_hat.dim();
        if self.ellipsoid.dim() != n || self.cover.w_c0.dim() != n {
            return Err(Error::InvalidInput(format!(
                "dimension mismatch: ĥ_w {n}, ellipsoid {}, cover {}",
                self.ellipsoid.dim(),
                self.cover.w_c0.dim()
            )));
        }
        if !(self.sigma_w2 > 0.0) {
            return Err(Error::InvalidInput("sigma_w2 must be positive".into()));
        }
        let iv = kl_interval(self.epsilon)?;
        if (iv.a_bar - self.interval.a_bar).abs() > 1e-9 || (iv.b_bar - self.interval.b_bar).abs() > 1e-9 {
            return Err(Error::InvalidInput("interval does not match epsilon".into()));
        }
        Ok(())
    }

    /// `(lo, hi)` for `λ₁/λ₀`.
    pub fn ratio_bounds(&self) -> (f64, f64) {
        self.direction.ratio_bounds(&self.interval)
    }

    fn design_bounds(&self) -> (f64, f64) {
        let (lo, hi) = self.ratio_bounds();
        (lo * (1.0 + INTERVAL_BACKOFF), hi * (1.0 - INTERVAL_BACKOFF))
    }

    pub fn target(&self) -> f64 {
        2.0 * self.epsilon * self.epsilon
    }

    fn dim(&self) -> usize {
        self.h_w_hat.dim()
    }

    /// `T = [√v_w·C_w^{-1/2}; ĥ_wᴴ]`, row-major `(N+1) × N`.
    fn t_rows(&self) -> Vec<C64> {
        let n = self.dim();
        let s = self.ellipsoid.inv_sqrt();
        let rv = self.ellipsoid.v_w().sqrt();
        let mut t = vec![C64::new(0.0, 0.0); (n + 1) * n];
        for i in 0..n {
            for j in 0..n {
                t[i * n + j] = s.get(i, j) * rv;
            }
            t[n * n + i] = self.h_w_hat[i].conj();
        }
        t
    }
}

/// `sign·T(W_b + W_c1)Tᴴ + η·E + K` in whitened error coordinates
/// `Δh = √v_w·C_w^{-1/2}x`, `‖x‖ ≤ 1`.
///
/// This is the congruence of the `diag(C_w, −v_w)` form by
/// `diag(√v_w·C_w^{-1/2}, 1)`; the multiplier here is `v_w` times the
/// multiplier of that form.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineLmi {
    /// `+1` for the lower side, `−1` for the upper side.
    pub sign: f64,
    /// `T`, row-major `(N+1) × N`.
    pub t: Vec<C64>,
    /// `diag(I, −1)`.
    pub e_c: HermitianMatrix,
    pub constant: HermitianMatrix,
}

impl AffineLmi {
    pub fn dim(&self) -> usize {
        self.e_c.dim()
    }

    pub fn eval(&self, w_b: &HermitianMatrix, w_c1: &HermitianMatrix, eta: f64) -> HermitianMatrix {
        w_b.add(w_c1)
            .congruence(&self.t, self.dim())
            .scaled(self.sign)
            .add(&self.e_c.scaled(eta))
            .add(&self.constant)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LmiPair {
    pub lmi_lower: AffineLmi,
    pub lmi_upper: AffineLmi,
}

fn build_lmis_for(spec: &RobustProblemSpec, lo: f64, hi: f64) -> LmiPair {
    let n = spec.dim();
    let t = spec.t_rows();
    let mut d = vec![1.0; n + 1];
    d[n] = -1.0;
    let e_c = HermitianMatrix::diag(&d);
    let tw0 = outer(&spec.cover.w_c0).congruence(&t, n + 1);
    let corner = |s: f64| {
        let mut d = vec![0.0; n + 1];
        d[n] = s;
        HermitianMatrix::diag(&d)
    };
    let s2 = spec.sigma_w2;
    LmiPair {
        lmi_lower: AffineLmi {
            sign: 1.0,
            t: t.clone(),
            e_c: e_c.clone(),
            constant: tw0.scaled(-lo).add(&corner(s2 * (1.0 - lo))),
        },
        lmi_upper: AffineLmi {
            sign: -1.0,
            t,
            e_c,
            constant: tw0.scaled(hi).add(&corner(s2 * (hi - 1.0))),
        },
    }
}

/// The S-procedure LMI pair for the problem's interval.
pub fn build_lmis(spec: &RobustProblemSpec) -> LmiPair {
    let (lo, hi) = spec.ratio_bounds();
    build_lmis_for(spec, lo, hi)
}

/// Real coordinates of an `n × n` Hermitian matrix: `Re M_ij` for `i ≤ j`
/// and `Im M_ij` for `i < j`, as trace-inner-product duals.
fn hermitian_basis(n: usize) -> Vec<(String, HermitianMatrix)> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in i..n {
            let re = HermitianMatrix::from_upper(n, |a, b| {
                if (a, b) == (i, j) {
                    C64::new(if i == j { 1.0 } else { 0.5 }, 0.0)
                } else {
                    C64::new(0.0, 0.0)
                }
            });
            out.push((format!("[{i},{j},re]"), re));
            if i < j {
                let im = HermitianMatrix::from_upper(n, |a, b| {
                    if (a, b) == (i, j) {
                        C64::new(0.0, 0.5)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                });
                out.push((format!("[{i},{j},im]"), im));
            }
        }
    }
    out
}

const ETA_LOWER: usize = 2;
const ETA_UPPER: usize = 3;

impl AffineLmi {
    /// Adds `S = LMI(W_b, W_c1, η)` coordinate-wise with a fresh PSD slack `S`.
    fn add_to(&self, p: &mut ConicProblem, name: &str, eta: usize) {
        let m = self.dim();
        let n = m - 1;
        let slack = p.add_block(&format!("S_{name}"), m);
        // Tᴴ E T in row-major N × (N+1) form of Tᴴ
        let mut th = vec![C64::new(0.0, 0.0); n * m];
        for i in 0..n {
            for j in 0..m {
                th[i * m + j] = self.t[j * n + i].conj();
            }
        }
        for (suffix, e) in hermitian_basis(m) {
            let mut terms = vec![(slack, e.clone())];
            let tw = e.congruence(&th, n).scaled(-self.sign);
            if tw.norm() > 0.0 {
                terms.push((W_B, tw.clone()));
                terms.push((W_C1, tw));
            }
            let ec = e.trace_product(&self.e_c);
            if ec != 0.0 {
                terms.push((eta, HermitianMatrix::diag(&[-ec])));
            }
            p.add_constraint(&format!("{name}{suffix}"), terms, Relation::Eq, e.trace_product(&self.constant));
        }
    }
}

fn robust_base(m: &CovertModel, lmis: &LmiPair, sense: Sense) -> ConicProblem {
    let mut p = m.base(sense);
    let e1 = p.add_block("eta_lower", 1);
    let e2 = p.add_block("eta_upper", 1);
    debug_assert_eq!((e1, e2), (ETA_LOWER, ETA_UPPER));
    lmis.lmi_lower.add_to(&mut p, "lmi_lower", ETA_LOWER);
    lmis.lmi_upper.add_to(&mut p, "lmi_upper", ETA_UPPER);
    p
}

/// Robust design: bisection on Bob's SINR with the S-procedure LMIs in every
/// feasibility SDP. Recovered vectors are accepted only if the exact
/// worst case over the ellipsoid stays inside the interval.
pub fn robust_design(
    params: &ScenarioParams,
    ch: &ChannelSet,
    spec: &RobustProblemSpec,
    cfg: &BisectionConfig,
) -> Result<BeamformerSolution> {
    params.validate()?;
    spec.validate()?;
    if ch.dim() != spec.dim() {
        return Err(Error::InvalidInput("channel and spec dimensions differ".into()));
    }
    let (lo, hi) = spec.design_bounds();
    let lmis = build_lmis_for(spec, lo, hi);
    let m = CovertModel::new(params, ch, &spec.cover, &spec.h_w_hat);
    let feas = |r: f64| {
        let mut p = robust_base(&m, &lmis, Sense::Feasibility);
        m.add_sinr(&mut p, r);
        p
    };
    let polish = |r: f64| {
        let mut p = robust_base(&m, &lmis, Sense::Maximize);
        m.set_polish_objective(&mut p, r);
        p
    };
    let sinr = |b: &[HermitianMatrix]| m.sinr_blocks(b);
    let fam = SinrFamily {
        feasibility: &feas,
        polish: &polish,
        sinr: &sinr,
    };
    let r_hi = cfg.r_upper_init.unwrap_or_else(|| r_upper_bound(params, ch));
    let out = bisect_sinr(&fam, r_hi, cfg)?;
    let eta = (out.blocks[ETA_LOWER].get(0, 0).re, out.blocks[ETA_UPPER].get(0, 0).re);
    let v = spec.ellipsoid.v_w();
    let accept = |v: &[ComplexVector]| {
        let (l, u) = worst_case_margins(&v[1], &v[0], spec);
        l >= 0.0 && u >= 0.0
    };
    let problem = m.base(Sense::Feasibility);
    let mut sol = finish(&problem, out, ch, params.sigma_b2, cfg, &accept)?;
    let (wb, wc) = (outer(&sol.w_b), outer(&sol.w_c1));
    sol.lmi_min_eig = Some((
        lmis.lmi_lower.eval(&wb, &wc, eta.0).min_eigenvalue(),
        lmis.lmi_upper.eval(&wb, &wc, eta.1).min_eigenvalue(),
    ));
    sol.eta = Some((eta.0 / v, eta.1 / v));
    Ok(sol)
}

/// The perfect-WCSI pipeline run on `ĥ_w` with the perfect-cover equality
/// replaced by the problem's interval at `ĥ_w`. Ignores the ellipsoid.
pub fn nonrobust_baseline(
    params: &ScenarioParams,
    ch: &ChannelSet,
    spec: &RobustProblemSpec,
    cfg: &BisectionConfig,
) -> Result<BeamformerSolution> {
    params.validate()?;
    spec.validate()?;
    let (lo, hi) = spec.design_bounds();
    let m = CovertModel::new(params, ch, &spec.cover, &spec.h_w_hat);
    let lambda0 = spec.h_w_hat.inner(&spec.cover.w_c0).norm_sqr() + spec.sigma_w2;
    let with_interval = |sense: Sense| {
        let mut p = m.base(sense);
        let hw = outer(&spec.h_w_hat);
        let terms = vec![(W_B, hw.clone()), (W_C1, hw)];
        p.add_constraint("willie_lower", terms.clone(), Relation::Ge, lo * lambda0 - spec.sigma_w2);
        p.add_constraint("willie_upper", terms, Relation::Le, hi * lambda0 - spec.sigma_w2);
        p
    };
    let feas = |r: f64| {
        let mut p = with_interval(Sense::Feasibility);
        m.add_sinr(&mut p, r);
        p
    };
    let polish = |r: f64| {
        let mut p = with_interval(Sense::Maximize);
        m.set_polish_objective(&mut p, r);
        p
    };
    let sinr = |b: &[HermitianMatrix]| m.sinr_blocks(b);
    let fam = SinrFamily {
        feasibility: &feas,
        polish: &polish,
        sinr: &sinr,
    };
    let r_hi = cfg.r_upper_init.unwrap_or_else(|| r_upper_bound(params, ch));
    let out = bisect_sinr(&fam, r_hi, cfg)?;
    let problem = with_interval(Sense::Feasibility);
    finish(&problem, out, ch, params.sigma_b2, cfg, &|_| true)
}

// ---------------------------------------------------------------------------
// worst case

/// `min (ĥ+Δ)ᴴ M (ĥ+Δ) + c` over `Δᴴ C Δ ≤ v`, via the dual of the
/// trust-region subproblem (exact by the S-lemma).
pub fn min_quadratic_on_ellipsoid(
    m: &HermitianMatrix,
    c: f64,
    h_hat: &ComplexVector,
    ell: &CsiErrorEllipsoid,
) -> f64 {
    let s = ell.inv_sqrt();
    let v = ell.v_w();
    // Δ = √v S x, ‖x‖ ≤ 1
    let a = m.congruence(s.entries(), s.dim()).scaled(v);
    let g = s.apply(&m.apply(h_hat)).scaled_re(v.sqrt());
    let c0 = m.quad_form(h_hat) + c;
    let eig = eig_hermitian(&a);
    let alpha = eig.values;
    let gt: Vec<f64> = eig.vectors.iter().map(|u| u.inner(&g).norm_sqr()).collect();
    let scale = alpha.iter().fold(0.0f64, |acc, x| acc.max(x.abs())) + g.norm() + 1e-300;
    let amin = *alpha.last().expect("dimension ≥ 1");
    let mu_lo = (-amin).max(0.0);
    let tiny = 1e-13 * scale;
    // drop components whose weight vanishes next to the pole at μ_lo
    let active = |i: usize, mu: f64| !(alpha[i] + mu <= tiny && gt[i] <= 1e-26 * scale * scale);
    let phi = |mu: f64| -> f64 {
        (0..alpha.len())
            .filter(|&i| active(i, mu))
            .map(|i| {
                let d = alpha[i] + mu;
                if d <= 0.0 {
                    f64::INFINITY
                } else {
                    gt[i] / (d * d)
                }
            })
            .sum()
    };
    let dual = |mu: f64| -> f64 {
        c0 - mu
            - (0..alpha.len())
                .filter(|&i| active(i, mu))
                .map(|i| gt[i] / (alpha[i] + mu))
                .sum::<f64>()
    };
    if phi(mu_lo) <= 1.0 {
        return dual(mu_lo);
    }
    let (mut lo, mut hi) = (mu_lo, mu_lo + g.norm().max(tiny));
    while phi(hi) > 1.0 {
        hi = mu_lo + 2.0 * (hi - mu_lo);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    dual(hi)
}

/// `(min(λ₁ − lo·λ₀), min(hi·λ₀ − λ₁))` over the ellipsoid.
pub fn worst_case_margins(w_c1: &ComplexVector, w_b: &ComplexVector, spec: &RobustProblemSpec) -> (f64, f64) {
    let (lo, hi) = spec.ratio_bounds();
    let w = outer(w_c1).add(&outer(w_b));
    let w0 = outer(&spec.cover.w_c0);
    let s2 = spec.sigma_w2;
    let lower = min_quadratic_on_ellipsoid(&w.sub(&w0.scaled(lo)), s2 * (1.0 - lo), &spec.h_w_hat, &spec.ellipsoid);
    let upper = min_quadratic_on_ellipsoid(&w0.scaled(hi).sub(&w), s2 * (hi - 1.0), &spec.h_w_hat, &spec.ellipsoid);
    (lower, upper)
}

/// Exact range of `λ₁/λ₀` over the ellipsoid.
pub fn exact_ratio_range(w_c1: &ComplexVector, w_b: &ComplexVector, spec: &RobustProblemSpec) -> (f64, f64) {
    let w = outer(w_c1).add(&outer(w_b));
    let w0 = outer(&spec.cover.w_c0);
    let s2 = spec.sigma_w2;
    let h = &spec.h_w_hat;
    let ell = &spec.ellipsoid;
    // t ↦ min(λ₁ − tλ₀) is decreasing; its root is the smallest ratio
    let below = |t: f64| min_quadratic_on_ellipsoid(&w.sub(&w0.scaled(t)), s2 * (1.0 - t), h, ell);
    // t ↦ min(tλ₀ − λ₁) is increasing; its root is the largest ratio
    let above = |t: f64| min_quadratic_on_ellipsoid(&w0.scaled(t).sub(&w), s2 * (t - 1.0), h, ell);
    let root = |f: &dyn Fn(f64) -> f64, decreasing: bool| {
        let (mut lo, mut hi) = (0.0, 1.0);
        while (f(hi) >= 0.0) == decreasing {
            hi *= 2.0;
            if hi > 1e12 {
                return hi;
            }
        }
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if (f(mid) >= 0.0) == decreasing {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    (root(&below, true), root(&above, false))
}

#[derive(Clone, Debug, PartialEq)]
pub struct WorstCaseReport {
    pub samples: usize,
    /// Largest sampled divergence in the problem's KL direction.
    pub max_kl: f64,
    pub violation_fraction: f64,
    /// `2ε² − max_kl`.
    pub margin: f64,
    /// Exact extreme ratios over the ellipsoid.
    pub exact_ratio: (f64, f64),
    /// Divergence at the worse of the two exact extremes.
    pub exact_max_kl: f64,
}

/// Samples `Δh_w` in the ellipsoid, every fourth draw on its boundary, and
/// reports the realized divergence against `2ε²`.
pub fn verify_worst_case(
    sol: &BeamformerSolution,
    spec: &RobustProblemSpec,
    samples: usize,
    seed: u64,
) -> WorstCaseReport {
    let target = spec.target();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let w0 = &spec.cover.w_c0;
    let mut max_kl = 0.0f64;
    let mut bad = 0usize;
    for i in 0..samples {
        let dh = spec.ellipsoid.sample(&mut rng, i % 4 == 0);
        let h = spec.h_w_hat.add(&dh);
        let l0 = h.inner(w0).norm_sqr() + spec.sigma_w2;
        let l1 = h.inner(&sol.w_c1).norm_sqr() + h.inner(&sol.w_b).norm_sqr() + spec.sigma_w2;
        let kl = spec.direction.kl_at_ratio(l1 / l0);
        max_kl = max_kl.max(kl);
        if kl > target {
            bad += 1;
        }
    }
    let exact_ratio = exact_ratio_range(&sol.w_c1, &sol.w_b, spec);
    let exact_max_kl = spec
        .direction
        .kl_at_ratio(exact_ratio.0)
        .max(spec.direction.kl_at_ratio(exact_ratio.1));
    WorstCaseReport {
        samples,
        max_kl,
        violation_fraction: if samples == 0 { 0.0 } else { bad as f64 / samples as f64 },
        margin: target - max_kl,
        exact_ratio,
        exact_max_kl,
    }
}

#[cfg(test)]
mod tests;
