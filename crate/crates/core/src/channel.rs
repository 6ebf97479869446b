//! Scenario parameters, Rayleigh channel draws, the CSI error ellipsoid and the
//! cover beam.

use alloc::format;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::cxmat::{eig_hermitian, ComplexVector, HermitianMatrix, C64};
use crate::error::{Error, Result};
use crate::units::to_linear;

/// Scenario constants. Powers and variances are linear (watts).
#[derive(Clone, Debug, PartialEq)]
pub struct ScenarioParams {
    /// Transmit antennas at Alice.
    pub n: usize,
    pub sigma_b2: f64,
    pub sigma_c2: f64,
    pub sigma_w2: f64,
    /// Per-entry variance of `h_b`.
    pub sigma1: f64,
    /// Per-entry variance of `h_w`.
    pub sigma2: f64,
    /// Per-entry variance of `h_c`.
    pub sigma3: f64,
    pub p_total: f64,
    /// Cover beam power `‖w_c0‖²`.
    pub p_c0: f64,
    pub epsilon: f64,
}

impl Default for ScenarioParams {
    /// Five antennas, unit noise and channel variances, 10 dBW budget,
    /// 1 dBW cover beam, ε = 0.1.
    fn default() -> Self {
        ScenarioParams {
            n: 5,
            sigma_b2: 1.0,
            sigma_c2: 1.0,
            sigma_w2: 1.0,
            sigma1: 1.0,
            sigma2: 1.0,
            sigma3: 1.0,
            p_total: to_linear(10.0),
            p_c0: to_linear(1.0),
            epsilon: 0.1,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        if self.n == 0 {
            return Err(Error::InvalidInput("antenna count must be at least 1".into()));
        }
        let positive = [
            ("sigma_b2", self.sigma_b2),
            ("sigma_c2", self.sigma_c2),
            ("sigma_w2", self.sigma_w2),
            ("sigma1", self.sigma1),
            ("sigma2", self.sigma2),
            ("sigma3", self.sigma3),
            ("p_total", self.p_total),
            ("p_c0", self.p_c0),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidInput(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.p_c0 > self.p_total {
            return Err(Error::InvalidInput(format!(
                "cover power p_c0 = {} exceeds p_total = {}",
                self.p_c0, self.p_total
            )));
        }
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidInput(format!("epsilon must lie in [0, 1], got {}", self.epsilon)));
        }
        Ok(())
    }

    /// Zero-forcing needs at least three antennas.
    pub fn validate_for_zf(&self) -> Result<()> {
        self.validate()?;
        if self.n < 3 {
            return Err(Error::InvalidInput(format!(
                "zero-forcing needs at least 3 antennas, got {}",
                self.n
            )));
        }
        Ok(())
    }
}

/// Channels of one draw. `h_w = h_w_hat + dh_w` always holds.
#[derive(Clone, Debug, PartialEq)]
pub struct ChannelSet {
    pub h_b: ComplexVector,
    pub h_c: ComplexVector,
    pub h_w: ComplexVector,
    pub h_w_hat: ComplexVector,
    pub dh_w: ComplexVector,
}

impl ChannelSet {
    /// Perfect WCSI: estimate equals the true channel.
    pub fn perfect(h_b: ComplexVector, h_c: ComplexVector, h_w: ComplexVector) -> Result<Self> {
        let n = h_b.dim();
        if h_c.dim() != n || h_w.dim() != n {
            return Err(Error::InvalidInput("channel vectors have mismatched dimensions".into()));
        }
        Ok(ChannelSet {
            dh_w: ComplexVector::zeros(n),
            h_w_hat: h_w.clone(),
            h_b,
            h_c,
            h_w,
        })
    }

    /// Same draw with the true Willie channel moved to `h_w_hat + dh`.
    pub fn with_error(&self, dh: ComplexVector) -> ChannelSet {
        ChannelSet {
            h_w: self.h_w_hat.add(&dh),
            dh_w: dh,
            ..self.clone()
        }
    }

    pub fn dim(&self) -> usize {
        self.h_b.dim()
    }

    /// First `n` antennas of every channel.
    pub fn truncated(&self, n: usize) -> ChannelSet {
        let cut = |v: &ComplexVector| ComplexVector::new(v.entries()[..n].to_vec()).expect("n ≥ 1");
        ChannelSet {
            h_b: cut(&self.h_b),
            h_c: cut(&self.h_c),
            h_w: cut(&self.h_w),
            h_w_hat: cut(&self.h_w_hat),
            dh_w: cut(&self.dh_w),
        }
    }
}

fn cn(rng: &mut impl Rng, var: f64) -> C64 {
    let s = (var / 2.0).sqrt();
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    C64::new(s * re, s * im)
}

/// Rayleigh draw of `h_b`, `h_c`, `h_w` with perfect WCSI.
///
/// Entries are drawn antenna by antenna, so the draw for `n` antennas is a
/// prefix of the draw for any larger `n` under the same seed.
pub fn sample_channels(params: &ScenarioParams, seed: u64) -> Result<ChannelSet> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = params.n;
    let (mut hb, mut hc, mut hw) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for _ in 0..n {
        hb.push(cn(&mut rng, params.sigma1));
        hw.push(cn(&mut rng, params.sigma2));
        hc.push(cn(&mut rng, params.sigma3));
    }
    ChannelSet::perfect(
        ComplexVector::new(hb)?,
        ComplexVector::new(hc)?,
        ComplexVector::new(hw)?,
    )
}

/// `{Δh : Δhᴴ C_w Δh ≤ v_w}`.
#[derive(Clone, Debug, PartialEq)]
pub struct CsiErrorEllipsoid {
    c_w: HermitianMatrix,
    v_w: f64,
    /// `C_w^{-1/2}`, maps the unit ball onto the ellipsoid.
    inv_sqrt: HermitianMatrix,
}

impl CsiErrorEllipsoid {
    pub fn new(c_w: HermitianMatrix, v_w: f64) -> Result<Self> {
        if !(v_w > 0.0) || !v_w.is_finite() {
            return Err(Error::InvalidInput(format!("v_w must be positive, got {v_w}")));
        }
        let eig = eig_hermitian(&c_w);
        let lmin = *eig.values.last().expect("dimension ≥ 1");
        if !(lmin > 0.0) {
            return Err(Error::InvalidInput(format!(
                "C_w must be positive definite (min eigenvalue {lmin:e})"
            )));
        }
        let n = c_w.dim();
        let mut inv_sqrt = HermitianMatrix::zeros(n);
        for (l, u) in eig.values.iter().zip(&eig.vectors) {
            inv_sqrt = inv_sqrt.add(&crate::cxmat::outer(u).scaled(1.0 / l.sqrt()));
        }
        Ok(CsiErrorEllipsoid { c_w, v_w, inv_sqrt })
    }

    /// Ball of squared radius `v_w`.
    pub fn isotropic(n: usize, v_w: f64) -> Result<Self> {
        Self::new(HermitianMatrix::identity(n), v_w)
    }

    pub fn c_w(&self) -> &HermitianMatrix {
        &self.c_w
    }

    pub fn v_w(&self) -> f64 {
        self.v_w
    }

    pub fn dim(&self) -> usize {
        self.c_w.dim()
    }

    pub(crate) fn inv_sqrt(&self) -> &HermitianMatrix {
        &self.inv_sqrt
    }

    /// `Δhᴴ C_w Δh`.
    pub fn level(&self, dh: &ComplexVector) -> f64 {
        self.c_w.quad_form(dh)
    }

    pub fn contains(&self, dh: &ComplexVector) -> bool {
        self.level(dh) <= self.v_w
    }

    /// Uniform draw on the solid ellipsoid, or on its boundary when
    /// `boundary` is set.
    pub fn sample(&self, rng: &mut impl Rng, boundary: bool) -> ComplexVector {
        let n = self.dim();
        let z: Vec<C64> = (0..n).map(|_| cn(rng, 1.0)).collect();
        let z = ComplexVector::new(z).expect("finite draw");
        let norm = z.norm();
        let radius = if boundary {
            1.0
        } else {
            // 2n real dimensions
            let u: f64 = rng.random();
            u.powf(1.0 / (2 * n) as f64)
        };
        let z = z.scaled_re(radius * self.v_w.sqrt() / norm.max(1e-300));
        let mut dh = self.inv_sqrt.apply(&z);
        // roundoff in the map can leave the point a hair outside
        for _ in 0..4 {
            let q = self.level(&dh);
            if q <= self.v_w {
                break;
            }
            dh = dh.scaled_re((self.v_w / q).sqrt() * (1.0 - 1e-15));
        }
        dh
    }
}

/// One uniform draw from the solid ellipsoid.
pub fn sample_error(ell: &CsiErrorEllipsoid, seed: u64) -> ComplexVector {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    ell.sample(&mut rng, false)
}

#[derive(Clone, Debug, PartialEq)]
pub struct CoverBeam {
    pub w_c0: ComplexVector,
    /// `|h_cᴴ w_c0|²`.
    pub tau1: f64,
    /// `|ĥ_wᴴ w_c0|²` against the design-time estimate.
    pub tau2: f64,
}

/// Maximum-ratio cover beam toward Carol with power `p_c0`.
pub fn make_cover_beam(params: &ScenarioParams, ch: &ChannelSet) -> Result<CoverBeam> {
    let hn = ch.h_c.norm();
    if !(hn > 0.0) {
        return Err(Error::InvalidInput("h_c is zero; the cover beam has no direction".into()));
    }
    let w_c0 = ch.h_c.scaled_re(params.p_c0.sqrt() / hn);
    Ok(CoverBeam {
        tau1: ch.h_c.inner(&w_c0).norm_sqr(),
        tau2: ch.h_w_hat.inner(&w_c0).norm_sqr(),
        w_c0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::units::to_db;
    use proptest::prelude::*;

    #[test]
    fn paper_defaults() {
        let p = ScenarioParams::default();
        p.validate().unwrap();
        assert!((to_db(p.p_total) - 10.0).abs() < 1e-12);
        assert!((to_db(p.p_c0) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn determinism() {
        let p = ScenarioParams::default();
        assert_eq!(sample_channels(&p, 42).unwrap(), sample_channels(&p, 42).unwrap());
        assert_ne!(sample_channels(&p, 42).unwrap(), sample_channels(&p, 43).unwrap());
    }

    #[test]
    fn draws_are_nested_in_antenna_count() {
        let big = sample_channels(&ScenarioParams { n: 6, ..Default::default() }, 9).unwrap();
        let small = sample_channels(&ScenarioParams { n: 3, ..Default::default() }, 9).unwrap();
        assert_eq!(big.truncated(3), small);
    }

    #[test]
    fn zero_variance_is_rejected() {
        let p = ScenarioParams { sigma1: 0.0, ..Default::default() };
        assert!(matches!(sample_channels(&p, 1), Err(Error::InvalidInput(_))));
        let p = ScenarioParams { p_c0: 20.0, ..Default::default() };
        assert!(p.validate().is_err());
        let p = ScenarioParams { n: 2, ..Default::default() };
        assert!(p.validate_for_zf().is_err());
    }

    #[test]
    fn entry_variance_and_independence() {
        // 10⁵ draws of h_b[0] and h_w[0]
        let p = ScenarioParams::default();
        let draws = 100_000;
        let (mut var_b, mut cross_re, mut cross_im) = (0.0, 0.0, 0.0);
        let mut var_entries = [0.0; 5];
        for s in 0..draws {
            let ch = sample_channels(&p, s).unwrap();
            var_b += ch.h_b[0].norm_sqr();
            for (k, v) in var_entries.iter_mut().enumerate() {
                *v += ch.h_w[k].norm_sqr();
            }
            let x = ch.h_b[0] * ch.h_w[0].conj();
            cross_re += x.re;
            cross_im += x.im;
        }
        let d = draws as f64;
        assert!((var_b / d - 1.0).abs() < 0.02);
        for v in var_entries {
            assert!((v / d - 1.0).abs() < 0.02);
        }
        assert!((cross_re / d).abs() <= 0.02 && (cross_im / d).abs() <= 0.02);
    }

    #[test]
    fn error_samples_stay_inside() {
        let ell = CsiErrorEllipsoid::isotropic(5, 0.005).unwrap();
        for s in 0..10_000 {
            let dh = sample_error(&ell, s);
            assert!(dh.norm_sqr() <= 0.005);
        }
        let tiny = CsiErrorEllipsoid::isotropic(5, 1e-30).unwrap();
        assert!(sample_error(&tiny, 3).norm() <= 1e-14);
    }

    #[test]
    fn error_samples_reach_the_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let c = HermitianMatrix::from_upper(4, |i, j| {
            if i == j {
                C64::new(1.0 + i as f64, 0.0)
            } else {
                C64::new(0.1, 0.05)
            }
        });
        let ell = CsiErrorEllipsoid::new(c, 0.01).unwrap();
        let mut max = 0.0f64;
        for _ in 0..100_000 {
            let dh = ell.sample(&mut rng, false);
            let q = ell.level(&dh);
            assert!(q <= 0.01);
            max = max.max(q);
        }
        assert!(max >= 0.99 * 0.01);
        let b = ell.sample(&mut rng, true);
        assert!((ell.level(&b) / 0.01 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn non_pd_ellipsoid_is_rejected() {
        assert!(CsiErrorEllipsoid::new(HermitianMatrix::diag(&[1.0, 0.0]), 1.0).is_err());
        assert!(CsiErrorEllipsoid::isotropic(2, 0.0).is_err());
    }

    #[test]
    fn cover_beam_constants() {
        let p = ScenarioParams::default();
        let ch = sample_channels(&p, 7).unwrap();
        let cb = make_cover_beam(&p, &ch).unwrap();
        assert!((cb.w_c0.norm_sqr() - p.p_c0).abs() < 1e-12);
        assert!((cb.tau1 - p.p_c0 * ch.h_c.norm_sqr()).abs() < 1e-12 * cb.tau1);
        // brute-force inner product
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..p.n {
            acc += ch.h_w[k].conj() * cb.w_c0[k];
        }
        assert!((cb.tau2 - acc.norm_sqr()).abs() < 1e-12);
        let zero = ChannelSet { h_c: ComplexVector::zeros(p.n), ..ch };
        assert!(matches!(make_cover_beam(&p, &zero), Err(Error::InvalidInput(_))));
    }

    proptest! {
        #[test]
        fn estimate_plus_error_is_truth(seed in 0u64..1000, v in 1e-4f64..1.0) {
            let p = ScenarioParams::default();
            let ch = sample_channels(&p, seed).unwrap();
            let ell = CsiErrorEllipsoid::isotropic(p.n, v).unwrap();
            let e = ch.with_error(sample_error(&ell, seed));
            prop_assert_eq!(e.h_w.clone(), e.h_w_hat.add(&e.dh_w));
            prop_assert!(ell.contains(&e.dh_w));
        }
    }
}
