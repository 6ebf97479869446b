use super::*;
use crate::channel::{make_cover_beam, sample_channels, sample_error};
use crate::covert_metrics::{detector, lambdas};
use crate::units::to_linear;
use rand::Rng;

fn params() -> ScenarioParams {
    ScenarioParams { p_c0: to_linear(8.0), ..ScenarioParams::default() }
}

fn setup_with(p: &ScenarioParams, seed: u64, v_w: f64, dir: KlDirection) -> (ChannelSet, RobustProblemSpec) {
    let ch = sample_channels(p, seed).unwrap();
    let cb = make_cover_beam(p, &ch).unwrap();
    let ell = CsiErrorEllipsoid::isotropic(p.n, v_w).unwrap();
    let spec = RobustProblemSpec::new(p, &ch, &cb, ell, dir).unwrap();
    (ch, spec)
}

fn setup(seed: u64, dir: KlDirection) -> (ScenarioParams, ChannelSet, RobustProblemSpec) {
    let p = params();
    let (ch, spec) = setup_with(&p, seed, 0.005, dir);
    (p, ch, spec)
}

fn cn(rng: &mut ChaCha8Rng, n: usize, s: f64) -> ComplexVector {
    ComplexVector::new(
        (0..n)
            .map(|_| C64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5) * s)
            .collect(),
    )
    .unwrap()
}

/// Sampling oracle for `min (ĥ+Δ)ᴴM(ĥ+Δ) + c`: boundary and interior draws
/// refined by shrinking random perturbations kept inside the ellipsoid.
fn sampled_min(m: &HermitianMatrix, c: f64, h: &ComplexVector, ell: &CsiErrorEllipsoid, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let f = |d: &ComplexVector| m.quad_form(&h.add(d)) + c;
    let mut best_d = ComplexVector::zeros(h.dim());
    let mut best = f(&best_d);
    for i in 0..20_000 {
        let d = ell.sample(&mut rng, i % 2 == 0);
        let v = f(&d);
        if v < best {
            best = v;
            best_d = d;
        }
    }
    let mut step = 0.1 * ell.v_w().sqrt();
    while step > 1e-9 {
        let mut improved = false;
        for _ in 0..50 {
            let mut d = best_d.add(&cn(&mut rng, h.dim(), step));
            let q = ell.level(&d);
            if q > ell.v_w() {
                d = d.scaled_re((ell.v_w() / q).sqrt());
            }
            let v = f(&d);
            if v < best {
                best = v;
                best_d = d;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    best
}

#[test]
fn trust_region_minimum_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for k in 0..6 {
        let n = 3;
        let a = cn(&mut rng, n, 2.0);
        let b = cn(&mut rng, n, 2.0);
        // definite, semidefinite and indefinite cases
        let m = match k % 3 {
            0 => outer(&a).add(&outer(&b)).add(&HermitianMatrix::identity(n).scaled(0.1)),
            1 => outer(&a),
            _ => outer(&a).sub(&outer(&b).scaled(1.5)),
        };
        let h = cn(&mut rng, n, 1.0);
        let ell = CsiErrorEllipsoid::new(
            HermitianMatrix::diag(&[1.0, 2.0, 0.5]),
            0.3,
        )
        .unwrap();
        let exact = min_quadratic_on_ellipsoid(&m, 0.7, &h, &ell);
        let oracle = sampled_min(&m, 0.7, &h, &ell, k);
        let scale = 1.0 + oracle.abs();
        assert!(exact <= oracle + 1e-9 * scale, "case {k}: exact {exact} above sampled {oracle}");
        assert!(oracle - exact <= 1e-5 * scale, "case {k}: exact {exact} vs sampled {oracle}");
    }
}

#[test]
fn trust_region_hard_case() {
    // M = diag(1, −1), ĥ along the first axis: the linear term misses the
    // negative eigenvector
    let m = HermitianMatrix::diag(&[1.0, -1.0]);
    let h = ComplexVector::from_real(&[0.2, 0.0]).unwrap();
    let ell = CsiErrorEllipsoid::isotropic(2, 1.0).unwrap();
    let exact = min_quadratic_on_ellipsoid(&m, 0.0, &h, &ell);
    // Δ = (−a, √(1 − a²)): 2a² − 0.4a − 0.96, least at a = 0.1
    assert!((exact + 0.98).abs() <= 1e-9, "{exact}");
}

#[test]
fn lmis_collapse_to_scalar_bounds_for_tiny_ellipsoid() {
    let p = params();
    let (ch, spec) = setup_with(&p, 1, 1e-12, KlDirection::Kl01);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let wb = cn(&mut rng, p.n, 1.0);
    let wc = cn(&mut rng, p.n, 1.0);
    let (lo, hi) = spec.ratio_bounds();
    let l0 = ch.h_w_hat.inner(&spec.cover.w_c0).norm_sqr() + p.sigma_w2;
    let l1 = ch.h_w_hat.inner(&wc).norm_sqr() + ch.h_w_hat.inner(&wb).norm_sqr() + p.sigma_w2;
    let (ml, mu) = worst_case_margins(&wc, &wb, &spec);
    assert!((ml - (l1 - lo * l0)).abs() <= 1e-4 * l1);
    assert!((mu - (hi * l0 - l1)).abs() <= 1e-4 * l1);
    // the LMI corner entries equal the scalar margins with η = 0
    let lmis = build_lmis(&spec);
    let (bw, cw) = (outer(&wb), outer(&wc));
    let lower = lmis.lmi_lower.eval(&bw, &cw, 0.0);
    let upper = lmis.lmi_upper.eval(&bw, &cw, 0.0);
    let n = p.n;
    assert!((lower.get(n, n).re - (l1 - lo * l0)).abs() <= 1e-9 * l1);
    assert!((upper.get(n, n).re - (hi * l0 - l1)).abs() <= 1e-9 * l1);
}

#[test]
fn zero_epsilon_only_admits_cover_equivalent_beams() {
    let p = ScenarioParams { epsilon: 0.0, ..params() };
    let (_, spec) = setup_with(&p, 3, 0.01, KlDirection::Kl01);
    let lmis = build_lmis(&spec);
    let zero = ComplexVector::zeros(p.n);
    // w_c1 = w_c0, w_b = 0 makes λ₁ ≡ λ₀, so both LMIs vanish at η = 0
    let wc = outer(&spec.cover.w_c0);
    let zb = outer(&zero);
    assert!(lmis.lmi_lower.eval(&zb, &wc, 0.0).norm() <= 1e-9);
    assert!(lmis.lmi_upper.eval(&zb, &wc, 0.0).norm() <= 1e-9);
    let (ml, mu) = worst_case_margins(&spec.cover.w_c0, &zero, &spec);
    assert!(ml.abs() <= 1e-9 && mu.abs() <= 1e-9);
    // any extra power seen by the ellipsoid breaks one side
    let wb = spec.h_w_hat.scaled_re(0.1);
    let (ml, mu) = worst_case_margins(&spec.cover.w_c0, &wb, &spec);
    assert!(ml.min(mu) < 0.0);
    let mut best = f64::NEG_INFINITY;
    for k in 0..200 {
        let eta = 1e-3 * 1.1f64.powi(k);
        let e = lmis.lmi_upper.eval(&outer(&wb), &wc, eta).min_eigenvalue();
        best = best.max(e);
    }
    assert!(best < 0.0);
}

#[test]
fn psd_lmis_imply_sampled_covertness() {
    let (p, ch, spec) = setup(2, KlDirection::Kl01);
    let s = robust_design(&p, &ch, &spec, &BisectionConfig::default()).unwrap();
    let (e1, e2) = s.lmi_min_eig.unwrap();
    assert!(e1 >= -1e-7 && e2 >= -1e-7, "{e1} {e2}");
    let (eta1, eta2) = s.eta.unwrap();
    assert!(eta1 >= -1e-9 && eta2 >= -1e-9);
    let (lo, hi) = spec.ratio_bounds();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for i in 0..10_000 {
        let h = ch.h_w_hat.add(&spec.ellipsoid.sample(&mut rng, i % 4 == 0));
        let l0 = h.inner(&spec.cover.w_c0).norm_sqr() + p.sigma_w2;
        let l1 = h.inner(&s.w_c1).norm_sqr() + h.inner(&s.w_b).norm_sqr() + p.sigma_w2;
        assert!(lo <= l1 / l0 && l1 / l0 <= hi, "ratio {} outside [{lo}, {hi}]", l1 / l0);
    }
}

#[test]
fn robust_holds_and_baseline_breaks() {
    for dir in [KlDirection::Kl01, KlDirection::Kl10] {
        let (p, ch, spec) = setup(1, dir);
        let cfg = BisectionConfig::default();
        let r = robust_design(&p, &ch, &spec, &cfg).unwrap();
        let b = nonrobust_baseline(&p, &ch, &spec, &cfg).unwrap();
        let vr = verify_worst_case(&r, &spec, 10_000, 7);
        let vb = verify_worst_case(&b, &spec, 10_000, 7);
        assert_eq!(vr.violation_fraction, 0.0);
        assert!(vr.margin > 0.0 && vr.exact_max_kl <= spec.target());
        assert!(vr.max_kl <= vr.exact_max_kl + 1e-12);
        assert!((0.3..=0.7).contains(&vb.violation_fraction), "{}", vb.violation_fraction);
        assert!(r.rate() <= b.rate() + 1e-6);
    }
}

#[test]
fn kl01_rate_at_least_kl10_rate() {
    for seed in [1, 4] {
        let (p, ch, s01) = setup(seed, KlDirection::Kl01);
        let s10 = RobustProblemSpec { direction: KlDirection::Kl10, ..s01.clone() };
        let cfg = BisectionConfig::default();
        let a = robust_design(&p, &ch, &s01, &cfg).unwrap();
        let b = robust_design(&p, &ch, &s10, &cfg).unwrap();
        assert!(a.rate() >= b.rate() - 1e-6, "seed {seed}: {} < {}", a.rate(), b.rate());
    }
}

#[test]
fn tiny_ellipsoid_matches_baseline() {
    let p = params();
    let (ch, spec) = setup_with(&p, 4, 1e-12, KlDirection::Kl01);
    let cfg = BisectionConfig::default();
    let r = robust_design(&p, &ch, &spec, &cfg).unwrap();
    let b = nonrobust_baseline(&p, &ch, &spec, &cfg).unwrap();
    assert!((r.rate() - b.rate()).abs() <= 0.01 * b.rate(), "{} vs {}", r.rate(), b.rate());
}

#[test]
fn rate_shrinks_as_ellipsoid_grows() {
    let p = params();
    let cfg = BisectionConfig::default();
    let rates: Vec<f64> = [0.001, 0.005, 0.02]
        .iter()
        .map(|&v| {
            let (ch, spec) = setup_with(&p, 2, v, KlDirection::Kl01);
            robust_design(&p, &ch, &spec, &cfg).unwrap().rate()
        })
        .collect();
    assert!(rates.windows(2).all(|w| w[1] <= w[0] + 1e-6), "{rates:?}");
}

#[test]
fn detector_at_true_channel_stays_blind() {
    let (p, ch, spec) = setup(2, KlDirection::Kl01);
    let s = robust_design(&p, &ch, &spec, &BisectionConfig::default()).unwrap();
    for k in 0..20 {
        let dh = sample_error(&spec.ellipsoid, 100 + k);
        let truth = ch.h_w_hat.add(&dh);
        let lp = lambdas(&spec.cover.w_c0, &s.w_c1, &s.w_b, &truth, p.sigma_w2).unwrap();
        assert!(detector(&lp).xi >= 1.0 - p.epsilon);
    }
}

#[test]
fn spec_checks() {
    let (p, ch, spec) = setup(0, KlDirection::Kl01);
    assert_eq!("kl10".parse::<KlDirection>().unwrap(), KlDirection::Kl10);
    assert!("kl11".parse::<KlDirection>().is_err());
    let bad = RobustProblemSpec {
        ellipsoid: CsiErrorEllipsoid::isotropic(3, 0.1).unwrap(),
        ..spec.clone()
    };
    assert_eq!(bad.validate().unwrap_err().category(), "invalid-input");
    let wrong = RobustProblemSpec { epsilon: 0.3, ..spec.clone() };
    assert!(wrong.validate().is_err());
    let (lo, hi) = RobustProblemSpec { direction: KlDirection::Kl10, ..spec.clone() }.ratio_bounds();
    assert!((lo - 1.0 / spec.interval.b_bar).abs() < 1e-15 && (hi - 1.0 / spec.interval.a_bar).abs() < 1e-15);
    let short = ch.truncated(3);
    assert!(robust_design(&p, &short, &spec, &BisectionConfig::default()).is_err());
}

#[test]
fn hermitian_basis_recovers_entries() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let a = cn(&mut rng, 3, 1.0);
    let b = cn(&mut rng, 3, 1.0);
    let m = outer(&a).sub(&outer(&b));
    let coords: Vec<f64> = hermitian_basis(3).iter().map(|(_, e)| e.trace_product(&m)).collect();
    assert_eq!(coords.len(), 9);
    let mut k = 0;
    for i in 0..3 {
        for j in i..3 {
            assert!((coords[k] - m.get(i, j).re).abs() < 1e-12);
            k += 1;
            if i < j {
                assert!((coords[k] - m.get(i, j).im).abs() < 1e-12);
                k += 1;
            }
        }
    }
}
