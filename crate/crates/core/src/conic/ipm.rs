//! Primal-dual interior-point method for real block SDPs in standard form
//!
//! ```text
//! minimize ⟨C, X⟩  s.t.  ⟨A_i, X⟩ = b_i,  X = diag(X_1, …, X_K) ⪰ 0
//! ```
//!
//! Infeasible-start Mehrotra predictor-corrector with Nesterov–Todd scaling.

use alloc::vec;
use alloc::vec::Vec;


use crate::dense::{self, Mat, SpdFactor};
#[allow(unused_imports)]
use num_traits::Float;

pub(crate) struct RealSdp {
    pub dims: Vec<usize>,
    pub c: Vec<Option<Mat>>,
    /// Sparse rows: `(block, coefficient)` pairs.
    pub rows: Vec<Vec<(usize, Mat)>>,
    pub b: Vec<f64>,
}

#[derive(Clone, Copy, Debug)]
pub(crate) struct IpmOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum IpmStatus {
    Optimal,
    PrimalInfeasible,
    DualInfeasible,
    MaxIterations,
    /// The monitor asked to stop.
    Stopped,
}

#[derive(Clone, Debug)]
pub(crate) struct IpmResult {
    pub status: IpmStatus,
    pub x: Vec<Mat>,
    pub y: Vec<f64>,
    pub dobj: f64,
    pub gap: f64,
    pub iterations: usize,
}

/// Snapshot handed to the per-iteration monitor.
pub(crate) struct Iterate<'a> {
    pub x: &'a [Mat],
    pub dobj: f64,
    pub dinf_abs: f64,
}

impl RealSdp {
    fn apply_a(&self, x: &[Mat]) -> Vec<f64> {
        self.rows
            .iter()
            .map(|row| row.iter().map(|(k, a)| a.dot(&x[*k])).sum())
            .collect()
    }

    fn apply_at(&self, y: &[f64]) -> Vec<Mat> {
        let mut out: Vec<Mat> = self.dims.iter().map(|&n| Mat::zeros(n, n)).collect();
        for (row, &yi) in self.rows.iter().zip(y) {
            if yi == 0.0 {
                continue;
            }
            for (k, a) in row {
                out[*k].axpy(yi, a);
            }
        }
        out
    }

    fn c_dot(&self, x: &[Mat]) -> f64 {
        self.c
            .iter()
            .zip(x)
            .filter_map(|(c, x)| c.as_ref().map(|c| c.dot(x)))
            .sum()
    }

    fn c_norm(&self) -> f64 {
        self.c
            .iter()
            .flatten()
            .map(|c| c.dot(c))
            .sum::<f64>()
            .sqrt()
    }

    fn initial_point(&self) -> (Vec<Mat>, Vec<Mat>) {
        let row_norms: Vec<f64> = self
            .rows
            .iter()
            .map(|row| row.iter().map(|(_, a)| a.dot(a)).sum::<f64>().sqrt())
            .collect();
        let mut xs = Vec::with_capacity(self.dims.len());
        let mut zs = Vec::with_capacity(self.dims.len());
        for (k, &n) in self.dims.iter().enumerate() {
            let nf = n as f64;
            let mut xi = 10f64.max(nf.sqrt());
            let mut eta = 10f64.max(nf.sqrt());
            for ((row, &bi), &rn) in self.rows.iter().zip(&self.b).zip(&row_norms) {
                for (blk, a) in row {
                    if *blk == k {
                        let an = a.frob();
                        xi = xi.max(nf * (1.0 + bi.abs()) / (1.0 + an));
                        // rows whose bound is large next to their coefficients
                        if rn > 0.0 {
                            xi = xi.max(bi.abs() / rn * nf.sqrt());
                        }
                        eta = eta.max(an);
                    }
                }
            }
            if let Some(c) = &self.c[k] {
                eta = eta.max(c.frob());
            }
            xs.push(Mat::scaled_identity(n, xi));
            zs.push(Mat::scaled_identity(n, eta));
        }
        (xs, zs)
    }
}

fn blocks_dot(a: &[Mat], b: &[Mat]) -> f64 {
    a.iter().zip(b).map(|(a, b)| a.dot(b)).sum()
}

fn blocks_frob(a: &[Mat]) -> f64 {
    a.iter().map(|m| m.dot(m)).sum::<f64>().sqrt()
}

/// Largest step `α` keeping `diag(λ) + α·Δ ⪰ 0` (may be infinite).
fn max_step(lambda: &[f64], delta: &Mat) -> f64 {
    let n = lambda.len();
    let mut s = Mat::zeros(n, n);
    for i in 0..n {
        for j in 0..n {
            s[(i, j)] = delta[(i, j)] / (lambda[i] * lambda[j]).sqrt();
        }
    }
    let m = dense::min_eigenvalue(&s);
    if m < 0.0 {
        -1.0 / m
    } else {
        f64::INFINITY
    }
}

struct Scaling {
    g: Vec<Mat>,
    lambda: Vec<Vec<f64>>,
}

/// NT scaling `G` with `G⁻¹XG⁻ᵀ = GᵀZG = diag(λ)`.
fn nt_scaling(x: &[Mat], z: &[Mat]) -> Option<Scaling> {
    let mut g = Vec::with_capacity(x.len());
    let mut lambda = Vec::with_capacity(x.len());
    for (xk, zk) in x.iter().zip(z) {
        let l = dense::cholesky(xk)?;
        let r = dense::cholesky(zk)?;
        let (sig, v) = dense::svd_right(&r.t_matmul(&l));
        if sig.iter().any(|s| !(*s > 0.0) || !s.is_finite()) {
            return None;
        }
        let mut gk = l.matmul(&v);
        for j in 0..gk.cols {
            let f = 1.0 / sig[j].sqrt();
            for i in 0..gk.rows {
                gk[(i, j)] *= f;
            }
        }
        g.push(gk);
        lambda.push(sig);
    }
    Some(Scaling { g, lambda })
}

struct Direction {
    dy: Vec<f64>,
    dxt: Vec<Mat>,
    dzt: Vec<Mat>,
}

struct NewtonSystem<'a> {
    p: &'a RealSdp,
    /// Scaled coefficients `GᵀA_iG`, aligned with `p.rows`.
    scaled: Vec<Vec<(usize, Mat)>>,
    rd_scaled: Vec<Mat>,
    rp: &'a [f64],
    schur: Mat,
    factor: SpdFactor,
}

impl<'a> NewtonSystem<'a> {
    fn new(p: &'a RealSdp, sc: &Scaling, rd: &[Mat], rp: &'a [f64]) -> Self {
        let m = p.rows.len();
        let scaled: Vec<Vec<(usize, Mat)>> = p
            .rows
            .iter()
            .map(|row| row.iter().map(|(k, a)| (*k, a.congruence(&sc.g[*k]))).collect())
            .collect();
        let mut schur = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let mut s = 0.0;
                for (ki, pi) in &scaled[i] {
                    for (kj, pj) in &scaled[j] {
                        if ki == kj {
                            s += pi.dot(pj);
                        }
                    }
                }
                schur[(i, j)] = s;
                schur[(j, i)] = s;
            }
        }
        let rd_scaled = rd
            .iter()
            .zip(&sc.g)
            .map(|(r, g)| r.congruence(g))
            .collect();
        let factor = SpdFactor::new(&schur);
        NewtonSystem {
            p,
            scaled,
            rd_scaled,
            rp,
            schur,
            factor,
        }
    }

    /// Solves for the direction whose scaled sum `ΔX̃ + ΔZ̃` equals `d`.
    fn solve(&self, d: &[Mat]) -> Direction {
        let m = self.p.rows.len();
        let mut rhs = vec![0.0; m];
        for i in 0..m {
            let mut s = self.rp[i];
            for (k, pi) in &self.scaled[i] {
                s += pi.dot(&self.rd_scaled[*k]) - pi.dot(&d[*k]);
            }
            rhs[i] = s;
        }
        let mut dy = self.factor.solve(&rhs);
        // one step of iterative refinement
        let mut res = rhs.clone();
        for i in 0..m {
            for j in 0..m {
                res[i] -= self.schur[(i, j)] * dy[j];
            }
        }
        let corr = self.factor.solve(&res);
        for (a, c) in dy.iter_mut().zip(corr) {
            *a += c;
        }
        let mut dzt = self.rd_scaled.clone();
        for (i, row) in self.scaled.iter().enumerate() {
            for (k, pi) in row {
                dzt[*k].axpy(-dy[i], pi);
            }
        }
        let dxt = d
            .iter()
            .zip(&dzt)
            .map(|(dk, zk)| {
                let mut m = dk.clone();
                m.axpy(-1.0, zk);
                m
            })
            .collect();
        Direction { dy, dxt, dzt }
    }
}

fn step_lengths(sc: &Scaling, dir: &Direction) -> (f64, f64) {
    let mut ap = f64::INFINITY;
    let mut ad = f64::INFINITY;
    for (k, lam) in sc.lambda.iter().enumerate() {
        ap = ap.min(max_step(lam, &dir.dxt[k]));
        ad = ad.min(max_step(lam, &dir.dzt[k]));
    }
    (ap, ad)
}

pub(crate) fn solve(
    p: &RealSdp,
    opts: &IpmOptions,
    mut monitor: impl FnMut(&Iterate<'_>) -> bool,
) -> IpmResult {
    let n_total: f64 = p.dims.iter().sum::<usize>() as f64;
    let (mut x, mut z) = p.initial_point();
    let mut y = vec![0.0; p.rows.len()];
    let cnorm = p.c_norm();
    let mut prev_alpha = 0.0f64;
    let mut best: Option<(f64, IpmResult)> = None;

    for iter in 0..=opts.max_iter {
        let ax = p.apply_a(&x);
        let rp: Vec<f64> = p.b.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let aty = p.apply_at(&y);
        let rd: Vec<Mat> = (0..p.dims.len())
            .map(|k| {
                let mut r = match &p.c[k] {
                    Some(c) => c.clone(),
                    None => Mat::zeros(p.dims[k], p.dims[k]),
                };
                r.axpy(-1.0, &aty[k]);
                r.axpy(-1.0, &z[k]);
                r
            })
            .collect();
        let pobj = p.c_dot(&x);
        let dobj: f64 = p.b.iter().zip(&y).map(|(b, y)| b * y).sum();
        let xz = blocks_dot(&x, &z);
        let mu = xz / n_total;
        let pinf = rp.iter().fold(0.0f64, |acc, r| acc.max(r.abs()));
        let dinf_abs = blocks_frob(&rd);
        let dinf = dinf_abs / (1.0 + cnorm);
        let gap = xz.max((pobj - dobj).abs()) / (1.0 + pobj.abs() + dobj.abs());
        if !(pinf.is_finite() && dinf_abs.is_finite() && gap.is_finite()) {
            break;
        }

        let snapshot = |status| IpmResult {
            status,
            x: x.clone(),
            y: y.clone(),
            dobj,
            gap,
            iterations: iter,
        };
        let merit = (pinf / opts.feas_tol)
            .max(dinf / opts.feas_tol)
            .max(gap / opts.gap_tol);
        if best.as_ref().map_or(true, |(m, _)| merit < *m) {
            best = Some((merit, snapshot(IpmStatus::MaxIterations)));
        }

        if monitor(&Iterate {
            x: &x,
            dobj,
            dinf_abs,
        }) {
            return snapshot(IpmStatus::Stopped);
        }
        if pinf <= opts.feas_tol && dinf <= opts.feas_tol && gap <= opts.gap_tol {
            return snapshot(IpmStatus::Optimal);
        }
        // Farkas ray for the primal: Aᵀy = C − R_d − Z, so λmax(Aᵀy)/bᵀy → 0.
        if dobj > 0.0 {
            let ray: f64 = (0..p.dims.len())
                .map(|k| {
                    let mut m = match &p.c[k] {
                        Some(c) => c.clone(),
                        None => Mat::zeros(p.dims[k], p.dims[k]),
                    };
                    m.axpy(-1.0, &rd[k]);
                    m.frob()
                })
                .fold(0.0, f64::max);
            if ray / dobj <= opts.feas_tol && dobj > 1.0 / opts.feas_tol.sqrt() {
                return snapshot(IpmStatus::PrimalInfeasible);
            }
        }
        // Improving primal ray: ‖A(X)‖ / (−⟨C,X⟩) → 0.
        if pobj < 0.0 {
            let an = ax.iter().map(|a| a * a).sum::<f64>().sqrt();
            if an / -pobj <= opts.feas_tol && -pobj > 1.0 / opts.feas_tol.sqrt() {
                return snapshot(IpmStatus::DualInfeasible);
            }
        }
        if iter == opts.max_iter {
            break;
        }

        let Some(sc) = nt_scaling(&x, &z) else { break };
        let sys = NewtonSystem::new(p, &sc, &rd, &rp);

        // predictor
        let d_aff: Vec<Mat> = sc.lambda.iter().map(|l| Mat::diag(&l.iter().map(|v| -v).collect::<Vec<_>>())).collect();
        let aff = sys.solve(&d_aff);
        let (ap, ad) = step_lengths(&sc, &aff);
        let (ap, ad) = (ap.min(1.0), ad.min(1.0));
        let mut mu_aff = 0.0;
        for (k, lam) in sc.lambda.iter().enumerate() {
            let mut xa = Mat::diag(lam);
            xa.axpy(ap, &aff.dxt[k]);
            let mut za = Mat::diag(lam);
            za.axpy(ad, &aff.dzt[k]);
            mu_aff += xa.dot(&za);
        }
        mu_aff /= n_total;
        let sigma = if mu > 0.0 { (mu_aff / mu).max(0.0).min(1.0).powi(3) } else { 0.0 };

        // corrector
        let d_cor: Vec<Mat> = sc
            .lambda
            .iter()
            .enumerate()
            .map(|(k, lam)| {
                let n = lam.len();
                let mut prod = aff.dxt[k].matmul(&aff.dzt[k]);
                prod.symmetrize();
                let mut d = Mat::zeros(n, n);
                for i in 0..n {
                    for j in 0..n {
                        let mut rc = -prod[(i, j)];
                        if i == j {
                            rc += sigma * mu - lam[i] * lam[i];
                        }
                        d[(i, j)] = 2.0 * rc / (lam[i] + lam[j]);
                    }
                }
                d
            })
            .collect();
        let dir = sys.solve(&d_cor);
        let (ap, ad) = step_lengths(&sc, &dir);
        let gamma = 0.9 + 0.09 * prev_alpha;
        let ap = (gamma * ap).min(1.0);
        let ad = (gamma * ad).min(1.0);
        prev_alpha = ap.min(ad);

        for k in 0..x.len() {
            let dx = dir.dxt[k].congruence_t(&sc.g[k]);
            x[k].axpy(ap, &dx);
            x[k].symmetrize();
        }
        for (yi, d) in y.iter_mut().zip(&dir.dy) {
            *yi += ad * d;
        }
        let atdy = p.apply_at(&dir.dy);
        for k in 0..z.len() {
            let mut dz = rd[k].clone();
            dz.axpy(-1.0, &atdy[k]);
            z[k].axpy(ad, &dz);
            z[k].symmetrize();
        }
    }
    let (_, mut r) = best.expect("at least one iterate is recorded");
    r.status = IpmStatus::MaxIterations;
    r
}
