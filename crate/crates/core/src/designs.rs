//! Beamformer synthesis under perfect WCSI: the SDR + bisection covert design,
//! the zero-forcing design and rank-one recovery.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

#[allow(unused_imports)]
use num_traits::Float;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::{ChannelSet, CoverBeam, ScenarioParams};
use crate::conic::{
    self, check_feasible_with, solve_sdp, ConicProblem, ConicSolution, Feasibility, Relation, Sense,
    SocpProblem, SocpRow, SolveStatus,
};
use crate::covert_metrics::{rate_from_sinr, sinr_bob};
use crate::cxmat::{eig_hermitian, null_projector, orthogonal_complement, orthonormal_basis, outer};
use crate::cxmat::{ComplexVector, HermitianMatrix, C64};
use crate::dense::{cholesky, Mat, SpdFactor};
use crate::error::{Error, Result};

/// Eigenvalue ratio `λ₂/λ₁` at or below which a block counts as rank one.
pub const RANK_ONE_GAP: f64 = 1e-6;

/// Normalized residual accepted for recovered vectors.
pub const RECOVERY_TOL: f64 = 1e-5;

#[derive(Clone, Debug, PartialEq)]
pub struct BisectionConfig {
    /// Bracket width at which bisection stops (linear SINR). `None` uses
    /// `1e-4 · r_upper`.
    pub zeta: Option<f64>,
    /// Upper end of the initial bracket. `None` uses [`r_upper_bound`].
    pub r_upper_init: Option<f64>,
    pub max_outer: usize,
    /// Refine the bisection point by maximizing the SINR numerator at fixed
    /// ratio until the ratio stops improving.
    pub polish: bool,
    pub randomization_trials: usize,
    pub seed: u64,
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
}

impl Default for BisectionConfig {
    fn default() -> Self {
        BisectionConfig {
            zeta: None,
            r_upper_init: None,
            max_outer: 60,
            polish: true,
            randomization_trials: 200,
            seed: 0,
            gap_tol: 1e-9,
            feas_tol: 1e-9,
            max_iter: conic::DEFAULT_MAX_ITER,
        }
    }
}

impl BisectionConfig {
    pub fn validate(&self) -> Result<()> {
        if let Some(z) = self.zeta {
            if !(z > 0.0) {
                return Err(Error::InvalidInput(format!("zeta must be positive, got {z}")));
            }
        }
        if let Some(r) = self.r_upper_init {
            if !(r >= 0.0) {
                return Err(Error::InvalidInput(format!("r_upper_init must be non-negative, got {r}")));
            }
        }
        if !(self.gap_tol > 0.0 && self.feas_tol > 0.0) {
            return Err(Error::InvalidInput("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

/// Diagnostics collected while solving.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct SolveLog {
    pub bisection_steps: usize,
    pub polish_steps: usize,
    pub sdp_solves: usize,
    pub ipm_iterations: usize,
    /// Largest duality gap among accepted optimal SDP solutions.
    pub max_duality_gap: f64,
    /// Largest constraint violation among accepted SDP solutions.
    pub max_sdp_violation: f64,
    /// `true` when Gaussian randomization produced the vectors.
    pub randomized: bool,
}

impl SolveLog {
    fn record(&mut self, s: &ConicSolution) {
        self.sdp_solves += 1;
        self.ipm_iterations += s.iterations;
        if s.status == SolveStatus::Optimal {
            self.max_duality_gap = self.max_duality_gap.max(s.duality_gap);
            self.max_sdp_violation = self.max_sdp_violation.max(s.max_constraint_violation);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BeamformerSolution {
    pub w_c1: ComplexVector,
    pub w_b: ComplexVector,
    /// Lifted SDR solutions.
    pub big_w_c1: HermitianMatrix,
    pub big_w_b: HermitianMatrix,
    /// Bob's SINR achieved by the vectors.
    pub r_b: f64,
    /// SINR of the lifted blocks before recovery.
    pub r_sdr: f64,
    pub rank_gap_c1: f64,
    pub rank_gap_b: f64,
    /// `(constraint label, normalized violation)` at the vectors.
    pub residuals: Vec<(String, f64)>,
    /// S-procedure multipliers `(η₁, η₂)` for robust designs.
    pub eta: Option<(f64, f64)>,
    /// Minimum eigenvalues of the robust LMI pair at the vectors.
    pub lmi_min_eig: Option<(f64, f64)>,
    pub log: SolveLog,
}

impl BeamformerSolution {
    /// `log₂(1 + r_b)`.
    pub fn rate(&self) -> f64 {
        rate_from_sinr(self.r_b)
    }

    pub fn power(&self) -> f64 {
        self.w_c1.norm_sqr() + self.w_b.norm_sqr()
    }

    pub fn max_residual(&self) -> f64 {
        self.residuals.iter().map(|(_, v)| *v).fold(0.0, f64::max)
    }
}

/// `P_total·‖h_b‖²/σ_b²`: SINR with all power on Bob and no interference.
pub fn r_upper_bound(params: &ScenarioParams, ch: &ChannelSet) -> f64 {
    params.p_total * ch.h_b.norm_sqr() / params.sigma_b2
}

/// `λ₂/λ₁` of a PSD block (0 for a zero block).
pub fn rank_gap(w: &HermitianMatrix) -> f64 {
    let e = eig_hermitian(w);
    let l1 = e.values[0];
    if !(l1 > 0.0) {
        return 0.0;
    }
    let l2 = e.values.get(1).copied().unwrap_or(0.0).max(0.0);
    l2 / l1
}

// ---------------------------------------------------------------------------
// rank-one recovery

/// Result of recovering vectors from lifted blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct Recovered {
    pub vectors: Vec<ComplexVector>,
    pub randomized: bool,
    pub max_violation: f64,
}

/// How candidates are ranked; larger is better.
pub(crate) type Score<'a> = &'a dyn Fn(&[ComplexVector]) -> f64;
/// Extra acceptance test beyond the constraint residuals.
pub(crate) type Accept<'a> = &'a dyn Fn(&[ComplexVector]) -> bool;

fn principal(w: &HermitianMatrix) -> ComplexVector {
    let e = eig_hermitian(w);
    let l1 = e.values[0].max(0.0);
    e.vectors[0].scaled_re(l1.sqrt())
}

/// `W^{1/2}` factor columns for Gaussian draws: returns `(U, √λ)`.
fn sqrt_factor(w: &HermitianMatrix) -> (Vec<ComplexVector>, Vec<f64>) {
    let e = eig_hermitian(w);
    let s = e.values.iter().map(|l| l.max(0.0).sqrt()).collect();
    (e.vectors, s)
}

/// Rows of `problem` touching only `blocks`, in the order they appear.
fn restricted_rows<'a>(problem: &'a ConicProblem, blocks: &[usize]) -> Vec<&'a conic::Constraint> {
    problem
        .constraints
        .iter()
        .filter(|c| c.terms.iter().all(|(k, _)| blocks.contains(k)))
        .collect()
}

fn lift(vectors: &[ComplexVector], blocks: &[usize], problem: &ConicProblem) -> Vec<HermitianMatrix> {
    let mut lifted: Vec<HermitianMatrix> = problem.blocks.iter().map(|b| HermitianMatrix::zeros(b.dim)).collect();
    for (v, &k) in vectors.iter().zip(blocks) {
        lifted[k] = outer(v);
    }
    lifted
}

/// Rescales each candidate vector by `√s_k ≥ 0` so the equality rows hold,
/// choosing the `s` nearest to all-ones. Returns `None` if some `s_k < 0`.
///
/// If an inequality row is then violated, the vectors are moved onto it and
/// the equality rows jointly by [`project_onto_rows`].
fn rescale_to_equalities(
    vectors: &[ComplexVector],
    blocks: &[usize],
    rows: &[&conic::Constraint],
) -> Option<Vec<ComplexVector>> {
    let eq: Vec<&&conic::Constraint> = rows.iter().filter(|c| c.relation == Relation::Eq).collect();
    if eq.is_empty() {
        return Some(vectors.to_vec());
    }
    let nb = blocks.len();
    let m = eq.len();
    // e[i][k] = v_kᴴ A_ik v_k
    let mut e = vec![vec![0.0; nb]; m];
    let mut resid = vec![0.0; m];
    for (i, c) in eq.iter().enumerate() {
        for (k, a) in &c.terms {
            let j = blocks.iter().position(|b| b == k).expect("restricted row");
            e[i][j] += a.quad_form(&vectors[j]);
        }
        resid[i] = c.bound - e[i].iter().sum::<f64>();
    }
    let mut eet = Mat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            eet[(i, j)] = (0..nb).map(|k| e[i][k] * e[j][k]).sum();
        }
    }
    let nu = SpdFactor::new(&eet).solve(&resid);
    let mut out = Vec::with_capacity(nb);
    for k in 0..nb {
        let s = 1.0 + (0..m).map(|i| e[i][k] * nu[i]).sum::<f64>();
        if s < 0.0 {
            return None;
        }
        out.push(vectors[k].scaled_re(s.sqrt()));
    }
    let mut active: Vec<&conic::Constraint> = eq.into_iter().copied().collect();
    let n_eq = active.len();
    active.extend(rows.iter().copied().filter(|c| match c.relation {
        Relation::Le => row_value(c, &out, blocks) > c.bound,
        Relation::Ge => row_value(c, &out, blocks) < c.bound,
        Relation::Eq => false,
    }));
    if active.len() > n_eq {
        project_onto_rows(&mut out, blocks, &active);
    }
    Some(out)
}

fn row_value(c: &conic::Constraint, vectors: &[ComplexVector], blocks: &[usize]) -> f64 {
    c.terms
        .iter()
        .map(|(k, a)| a.quad_form(&vectors[blocks.iter().position(|b| b == k).expect("restricted row")]))
        .sum()
}

/// Gauss-Newton steps of least norm onto `Σ_k v_kᴴ A_ik v_k = b_i` for every
/// row in `rows`. Leaves the vectors alone if the system is rank deficient.
fn project_onto_rows(vectors: &mut [ComplexVector], blocks: &[usize], rows: &[&conic::Constraint]) {
    let m = rows.len();
    for _ in 0..8 {
        // g[i][j] = 2 A_ij v_j, the gradient of row i in block j
        let zero: Vec<ComplexVector> = vectors.iter().map(|v| ComplexVector::zeros(v.dim())).collect();
        let mut g = vec![zero; m];
        let mut resid = vec![0.0; m];
        for (i, c) in rows.iter().enumerate() {
            for (k, a) in &c.terms {
                let j = blocks.iter().position(|b| b == k).expect("restricted row");
                g[i][j] = g[i][j].add(&a.apply(&vectors[j]).scaled_re(2.0));
            }
            resid[i] = c.bound - row_value(c, vectors, blocks);
        }
        let scale = rows.iter().map(|c| c.bound.abs().max(1.0)).fold(0.0, f64::max);
        if resid.iter().all(|r| r.abs() <= 1e-15 * scale) {
            return;
        }
        let mut jjt = Mat::zeros(m, m);
        for i in 0..m {
            for l in 0..m {
                jjt[(i, l)] = (0..blocks.len()).map(|j| g[i][j].inner(&g[l][j]).re).sum();
            }
        }
        if cholesky(&jjt).is_none() {
            return;
        }
        let nu = SpdFactor::new(&jjt).solve(&resid);
        for (j, v) in vectors.iter_mut().enumerate() {
            let mut step = ComplexVector::zeros(v.dim());
            for i in 0..m {
                step = step.add(&g[i][j].scaled_re(nu[i]));
            }
            *v = v.add(&step);
        }
    }
}

fn violation(problem_rows: &[&conic::Constraint], lifted: &[HermitianMatrix]) -> f64 {
    problem_rows.iter().map(|c| c.violation(lifted)).fold(0.0, f64::max)
}

/// Recovers one vector per listed block from lifted PSD blocks.
///
/// Only constraints whose terms lie entirely in `blocks` are enforced. When
/// every block is numerically rank one the principal eigenvectors are used;
/// otherwise `trials` Gaussian candidates with covariance `W_k` are drawn.
/// Each candidate is rescaled onto the equality rows and rejected if any
/// other row is violated by more than [`RECOVERY_TOL`] or `accept` refuses it.
/// The best `score` wins; ties go to the smaller total power.
pub(crate) fn recover_vectors(
    lifted: &[HermitianMatrix],
    problem: &ConicProblem,
    blocks: &[usize],
    trials: usize,
    seed: u64,
    score: Score<'_>,
    accept: Accept<'_>,
) -> Result<Recovered> {
    let rows = restricted_rows(problem, blocks);
    let check = |cand: &[ComplexVector]| -> Option<(Vec<ComplexVector>, f64)> {
        let scaled = rescale_to_equalities(cand, blocks, &rows)?;
        let v = violation(&rows, &lift(&scaled, blocks, problem));
        (v <= RECOVERY_TOL && accept(&scaled)).then_some((scaled, v))
    };

    let all_rank_one = blocks.iter().all(|&k| rank_gap(&lifted[k]) <= RANK_ONE_GAP);
    if all_rank_one {
        let cand: Vec<ComplexVector> = blocks.iter().map(|&k| principal(&lifted[k])).collect();
        if let Some((vectors, v)) = check(&cand) {
            return Ok(Recovered {
                vectors,
                randomized: false,
                max_violation: v,
            });
        }
    }

    let factors: Vec<(Vec<ComplexVector>, Vec<f64>)> = blocks.iter().map(|&k| sqrt_factor(&lifted[k])).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<(f64, f64, Vec<ComplexVector>, f64)> = None;
    let mut least_bad = f64::INFINITY;
    for _ in 0..trials {
        let cand: Vec<ComplexVector> = factors
            .iter()
            .map(|(u, s)| {
                let n = u[0].dim();
                let mut acc = ComplexVector::zeros(n);
                for (uk, sk) in u.iter().zip(s) {
                    let g = C64::new(
                        StandardNormal.sample(&mut rng),
                        StandardNormal.sample(&mut rng),
                    ) * (0.5f64).sqrt();
                    acc = acc.add(&uk.scaled(g * *sk));
                }
                acc
            })
            .collect();
        let Some(scaled) = rescale_to_equalities(&cand, blocks, &rows) else { continue };
        let v = violation(&rows, &lift(&scaled, blocks, problem));
        least_bad = least_bad.min(v);
        if v > RECOVERY_TOL || !accept(&scaled) {
            continue;
        }
        let sc = score(&scaled);
        let pw: f64 = scaled.iter().map(|x| x.norm_sqr()).sum();
        let better = match &best {
            None => true,
            Some((bs, bp, _, _)) => sc > *bs || (sc == *bs && pw < *bp),
        };
        if better {
            best = Some((sc, pw, scaled, v));
        }
    }
    match best {
        Some((_, _, vectors, v)) => Ok(Recovered {
            vectors,
            randomized: true,
            max_violation: v,
        }),
        None => Err(Error::RecoveryFailed { violation: least_bad }),
    }
}

/// Recovers a vector from the single block of a one-block problem.
///
/// Uses the principal eigenvector when `λ₂/λ₁ ≤ 1e-6`, otherwise Gaussian
/// randomization with `trials` draws. Candidates are ranked by the problem's
/// objective (smallest power for feasibility problems).
pub fn rank_one_recover(
    w: &HermitianMatrix,
    problem: &ConicProblem,
    trials: usize,
    seed: u64,
) -> Result<ComplexVector> {
    problem.validate()?;
    if problem.blocks.len() != 1 || problem.blocks[0].dim != w.dim() {
        return Err(Error::InvalidInput("rank_one_recover expects a one-block problem matching W".into()));
    }
    let sign = match problem.sense {
        Sense::Maximize => 1.0,
        Sense::Minimize => -1.0,
        Sense::Feasibility => 0.0,
    };
    let score = |v: &[ComplexVector]| {
        if sign == 0.0 {
            -v[0].norm_sqr()
        } else {
            sign * problem.objective_value(&[outer(&v[0])])
        }
    };
    let r = recover_vectors(core::slice::from_ref(w), problem, &[0], trials, seed, &score, &|_| true)?;
    Ok(r.vectors.into_iter().next().expect("one block"))
}

// ---------------------------------------------------------------------------
// bisection driver shared with the robust design

/// Builders for one SINR-maximization family.
pub(crate) struct SinrFamily<'a> {
    /// Feasibility problem at SINR level `r`.
    pub feasibility: &'a dyn Fn(f64) -> ConicProblem,
    /// Maximize `Tr(H_b W_b) − r·Tr(H_b W_c1)` under the non-SINR constraints.
    pub polish: &'a dyn Fn(f64) -> ConicProblem,
    /// SINR of lifted blocks (block 0 = `W_b`, block 1 = `W_c1`).
    pub sinr: &'a dyn Fn(&[HermitianMatrix]) -> f64,
}

pub(crate) struct BisectionOutcome {
    pub r: f64,
    pub blocks: Vec<HermitianMatrix>,
    pub log: SolveLog,
}

fn feasible_at(
    fam: &SinrFamily<'_>,
    r: f64,
    cfg: &BisectionConfig,
    log: &mut SolveLog,
) -> Result<Option<ConicSolution>> {
    let p = (fam.feasibility)(r);
    match check_feasible_with(&p, cfg.feas_tol.max(1e-9), cfg.max_iter)? {
        Feasibility::Feasible(s) => {
            log.sdp_solves += 1;
            log.ipm_iterations += s.iterations;
            log.max_sdp_violation = log.max_sdp_violation.max(s.max_constraint_violation);
            Ok(Some(s))
        }
        Feasibility::Infeasible(_) => {
            log.sdp_solves += 1;
            Ok(None)
        }
        Feasibility::Undecided(s) => {
            log.sdp_solves += 1;
            log.ipm_iterations += s.iterations;
            Ok(None)
        }
    }
}

/// Constraint group of a label: the part before any `[`.
fn group(label: &str) -> &str {
    label.split('[').next().unwrap_or(label)
}

/// Names the constraint group whose removal restores feasibility at `r`.
fn blame(fam: &SinrFamily<'_>, r: f64, cfg: &BisectionConfig) -> String {
    let p = (fam.feasibility)(r);
    let mut groups: Vec<&str> = Vec::new();
    for c in &p.constraints {
        let g = group(&c.label);
        if !groups.contains(&g) {
            groups.push(g);
        }
    }
    for g in groups {
        let mut q = p.clone();
        q.constraints.retain(|c| group(&c.label) != g);
        if q.constraints.is_empty() {
            return String::from(g);
        }
        if matches!(check_feasible_with(&q, cfg.feas_tol.max(1e-9), cfg.max_iter), Ok(f) if f.is_feasible()) {
            return String::from(g);
        }
    }
    String::from("joint constraint set")
}

pub(crate) fn bisect_sinr(fam: &SinrFamily<'_>, r_hi: f64, cfg: &BisectionConfig) -> Result<BisectionOutcome> {
    cfg.validate()?;
    let mut log = SolveLog::default();
    let Some(mut best) = feasible_at(fam, 0.0, cfg, &mut log)? else {
        return Err(Error::InfeasibleScenario {
            constraint: blame(fam, 0.0, cfg),
        });
    };
    let zeta = cfg.zeta.unwrap_or(1e-4 * r_hi).max(1e-300);
    let (mut lo, mut hi) = (0.0, r_hi);
    while hi - lo > zeta && log.bisection_steps < cfg.max_outer {
        log.bisection_steps += 1;
        let mid = 0.5 * (lo + hi);
        match feasible_at(fam, mid, cfg, &mut log)? {
            Some(s) => {
                lo = mid;
                best = s;
            }
            None => hi = mid,
        }
    }
    let mut r = lo;
    let mut blocks = best.blocks;
    if cfg.polish {
        for _ in 0..30 {
            let p = (fam.polish)(r);
            let s = solve_sdp(&p, cfg.gap_tol, cfg.feas_tol, cfg.max_iter)?;
            log.record(&s);
            if s.status != SolveStatus::Optimal {
                break;
            }
            log.polish_steps += 1;
            let r_new = (fam.sinr)(&s.blocks);
            if !(r_new >= r) {
                // numerical noise at the fixed point; keep the better iterate
                if r_new >= r * (1.0 - 1e-9) {
                    blocks = s.blocks;
                }
                break;
            }
            blocks = s.blocks;
            let done = r_new - r <= 1e-10 * r.max(1e-12);
            r = r_new;
            if done {
                break;
            }
        }
    }
    Ok(BisectionOutcome { r, blocks, log })
}

// ---------------------------------------------------------------------------
// covert design

/// Constants of the SDR family for one channel draw.
pub(crate) struct CovertModel {
    pub n: usize,
    pub hb: HermitianMatrix,
    pub hc: HermitianMatrix,
    pub hw: HermitianMatrix,
    pub sigma_b2: f64,
    pub sigma_c2: f64,
    pub tau1: f64,
    pub tau2: f64,
    pub p_total: f64,
}

pub(crate) const W_B: usize = 0;
pub(crate) const W_C1: usize = 1;

impl CovertModel {
    pub fn new(params: &ScenarioParams, ch: &ChannelSet, cover: &CoverBeam, h_w: &ComplexVector) -> Self {
        CovertModel {
            n: ch.dim(),
            hb: outer(&ch.h_b),
            hc: outer(&ch.h_c),
            hw: outer(h_w),
            sigma_b2: params.sigma_b2,
            sigma_c2: params.sigma_c2,
            tau1: cover.tau1,
            tau2: cover.tau2,
            p_total: params.p_total,
        }
    }

    /// Blocks, QoS equality and power; the Willie-side rows are added by callers.
    pub fn base(&self, sense: Sense) -> ConicProblem {
        let mut p = ConicProblem::new(sense);
        p.add_block("W_b", self.n);
        p.add_block("W_c1", self.n);
        p.add_constraint(
            "qos",
            vec![(W_C1, self.hc.scaled(self.sigma_c2)), (W_B, self.hc.scaled(-self.tau1))],
            Relation::Eq,
            self.tau1 * self.sigma_c2,
        );
        let id = HermitianMatrix::identity(self.n);
        p.add_constraint("power", vec![(W_B, id.clone()), (W_C1, id)], Relation::Le, self.p_total);
        p
    }

    pub fn add_sinr(&self, p: &mut ConicProblem, r: f64) {
        p.add_constraint(
            "sinr",
            vec![(W_B, self.hb.clone()), (W_C1, self.hb.scaled(-r))],
            Relation::Ge,
            r * self.sigma_b2,
        );
    }

    pub fn set_polish_objective(&self, p: &mut ConicProblem, r: f64) {
        p.add_objective_term(W_B, self.hb.clone());
        p.add_objective_term(W_C1, self.hb.scaled(-r));
    }

    fn add_cover(&self, p: &mut ConicProblem) {
        p.add_constraint(
            "cover",
            vec![(W_B, self.hw.clone()), (W_C1, self.hw.clone())],
            Relation::Eq,
            self.tau2,
        );
    }

    pub fn sinr_blocks(&self, blocks: &[HermitianMatrix]) -> f64 {
        let num = self.hb.trace_product(&blocks[W_B]);
        let den = self.hb.trace_product(&blocks[W_C1]) + self.sigma_b2;
        (num / den).max(0.0)
    }
}

/// Runs recovery on the `W_b`, `W_c1` blocks and packages the solution.
pub(crate) fn finish(
    problem: &ConicProblem,
    outcome: BisectionOutcome,
    ch: &ChannelSet,
    sigma_b2: f64,
    cfg: &BisectionConfig,
    accept: Accept<'_>,
) -> Result<BeamformerSolution> {
    let score = |v: &[ComplexVector]| sinr_bob(&v[1], &v[0], &ch.h_b, sigma_b2);
    let rec = recover_vectors(
        &outcome.blocks,
        problem,
        &[W_B, W_C1],
        cfg.randomization_trials,
        cfg.seed,
        &score,
        accept,
    )?;
    let mut log = outcome.log;
    log.randomized = rec.randomized;
    let w_b = rec.vectors[0].clone();
    let w_c1 = rec.vectors[1].clone();
    let lifted = lift(&rec.vectors, &[W_B, W_C1], problem);
    let residuals = restricted_rows(problem, &[W_B, W_C1])
        .iter()
        .map(|c| (c.label.clone(), c.violation(&lifted)))
        .collect();
    Ok(BeamformerSolution {
        r_b: sinr_bob(&w_c1, &w_b, &ch.h_b, sigma_b2),
        r_sdr: outcome.r,
        rank_gap_b: rank_gap(&outcome.blocks[W_B]),
        rank_gap_c1: rank_gap(&outcome.blocks[W_C1]),
        big_w_b: outcome.blocks[W_B].clone(),
        big_w_c1: outcome.blocks[W_C1].clone(),
        w_b,
        w_c1,
        residuals,
        eta: None,
        lmi_min_eig: None,
        log,
    })
}

/// SDR + bisection covert design with the perfect-cover equality
/// `|h_wᴴw_c1|² + |h_wᴴw_b|² = τ₂`, which makes `λ₁ = λ₀`.
pub fn covert_design(
    params: &ScenarioParams,
    ch: &ChannelSet,
    cover: &CoverBeam,
    cfg: &BisectionConfig,
) -> Result<BeamformerSolution> {
    params.validate()?;
    cfg.validate()?;
    let m = CovertModel::new(params, ch, cover, &ch.h_w);
    let feas = |r: f64| {
        let mut p = m.base(Sense::Feasibility);
        m.add_cover(&mut p);
        m.add_sinr(&mut p, r);
        p
    };
    let polish = |r: f64| {
        let mut p = m.base(Sense::Maximize);
        m.add_cover(&mut p);
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
    let mut problem = m.base(Sense::Feasibility);
    m.add_cover(&mut problem);
    finish(&problem, out, ch, params.sigma_b2, cfg, &|_| true)
}

// ---------------------------------------------------------------------------
// zero-forcing design

/// Zero-forcing design.
///
/// Stage 1 finds the least-power `w_c1 ⊥ h_b` meeting both τ equalities; the
/// SDR is posed on the complement of `h_b` so that the null constraint does not
/// pin the PSD cone to its boundary. Stage 2 puts the remaining power on the
/// projection of `h_b` onto `span{h_w, h_c}⊥`, checked against the SOCP solver.
pub fn zf_design(params: &ScenarioParams, ch: &ChannelSet, cover: &CoverBeam) -> Result<BeamformerSolution> {
    zf_design_with(params, ch, cover, &BisectionConfig::default())
}

pub fn zf_design_with(
    params: &ScenarioParams,
    ch: &ChannelSet,
    cover: &CoverBeam,
    cfg: &BisectionConfig,
) -> Result<BeamformerSolution> {
    params.validate_for_zf()?;
    let n = ch.dim();
    let span = orthonormal_basis(&[ch.h_b.clone(), ch.h_c.clone(), ch.h_w.clone()])?;
    if span.len() < 3 {
        return Err(Error::DegenerateGeometry(
            "h_b, h_c, h_w are linearly dependent".into(),
        ));
    }
    let mut log = SolveLog::default();

    // stage 1 on the face W = B Y Bᴴ, B an orthonormal basis of h_b⊥
    let basis = orthogonal_complement(&[ch.h_b.clone()])?;
    let k = basis.len();
    let reduce = |h: &ComplexVector| {
        ComplexVector::new(basis.iter().map(|b| b.inner(h)).collect()).expect("finite")
    };
    let gc = reduce(&ch.h_c);
    let gw = reduce(&ch.h_w);
    let mut p = ConicProblem::new(Sense::Minimize);
    let y = p.add_block("Y_c1", k);
    p.add_objective_term(y, HermitianMatrix::identity(k));
    p.add_constraint("carol", vec![(y, outer(&gc))], Relation::Eq, cover.tau1);
    p.add_constraint("willie", vec![(y, outer(&gw))], Relation::Eq, cover.tau2);
    let s = solve_sdp(&p, cfg.gap_tol, cfg.feas_tol, cfg.max_iter)?;
    log.record(&s);
    if s.status != SolveStatus::Optimal {
        return Err(Error::Solver(format!(
            "zero-forcing stage 1 ended with {:?} after {} iterations",
            s.status, s.iterations
        )));
    }
    let score = |v: &[ComplexVector]| -v[0].norm_sqr();
    let rec = recover_vectors(&s.blocks, &p, &[y], cfg.randomization_trials, cfg.seed, &score, &|_| true)?;
    log.randomized = rec.randomized;
    let yv = &rec.vectors[0];
    let mut w_c1 = ComplexVector::zeros(n);
    for (b, c) in basis.iter().zip(yv.entries()) {
        w_c1 = w_c1.add(&b.scaled(*c));
    }
    let lift_basis = |m: &HermitianMatrix| {
        HermitianMatrix::from_upper(n, |i, j| {
            let mut acc = C64::new(0.0, 0.0);
            for a in 0..k {
                for b in 0..k {
                    acc += basis[a][i] * m.get(a, b) * basis[b][j].conj();
                }
            }
            acc
        })
    };
    let big_w_c1 = lift_basis(&s.blocks[0]);
    let p_c = w_c1.norm_sqr();
    if p_c > params.p_total {
        return Err(Error::InfeasibleScenario {
            constraint: format!("power: zero-forcing cover needs {p_c} > p_total {}", params.p_total),
        });
    }

    // stage 2
    let budget = params.p_total - p_c;
    let proj = null_projector(&[ch.h_w.clone(), ch.h_c.clone()])?.apply(&ch.h_b);
    let pn = proj.norm();
    if !(pn > 1e-12 * ch.h_b.norm()) {
        return Err(Error::DegenerateGeometry("h_b lies in span{h_w, h_c}".into()));
    }
    let w_b = proj.scaled_re(budget.sqrt() / pn);
    let socp = conic::solve_socp(&SocpProblem {
        objective: ch.h_b.clone(),
        rows: vec![
            SocpRow::Complex(ch.h_w.clone()),
            SocpRow::Complex(ch.h_c.clone()),
            SocpRow::Imag(ch.h_b.clone()),
        ],
        rho: budget,
    })?;
    let scale = w_b.norm().max(1e-300);
    let disagreement = socp.sub(&w_b).norm() / scale;
    if budget > 0.0 && disagreement > 1e-8 {
        return Err(Error::Solver(format!(
            "closed-form and SOCP zero-forcing beams disagree ({disagreement:e})"
        )));
    }

    let residuals = vec![
        (String::from("null_willie"), ch.h_w.inner(&w_b).norm()),
        (String::from("null_carol"), ch.h_c.inner(&w_b).norm()),
        (String::from("null_bob"), ch.h_b.inner(&w_c1).norm()),
        (String::from("carol"), (ch.h_c.inner(&w_c1).norm_sqr() - cover.tau1).abs()),
        (String::from("willie"), (ch.h_w.inner(&w_c1).norm_sqr() - cover.tau2).abs()),
        (String::from("socp_agreement"), disagreement),
    ];
    Ok(BeamformerSolution {
        r_b: sinr_bob(&w_c1, &w_b, &ch.h_b, params.sigma_b2),
        r_sdr: sinr_bob(&w_c1, &w_b, &ch.h_b, params.sigma_b2),
        rank_gap_c1: rank_gap(&s.blocks[0]),
        rank_gap_b: 0.0,
        big_w_b: outer(&w_b),
        big_w_c1,
        w_b,
        w_c1,
        residuals,
        eta: None,
        lmi_min_eig: None,
        log,
    })
}

/// Output of [`multiplexing_gain_probe`].
#[derive(Clone, Debug, PartialEq)]
pub struct MultiplexingProbe {
    /// Least-squares slope of `R_b` against `log₂((P_total − P_c)/σ_b²)`.
    pub slope: f64,
    /// `(P_total, log₂ SNR, R_b)` of the points used.
    pub points: Vec<(f64, f64, f64)>,
    /// Powers whose design failed, with the error category.
    pub skipped: Vec<(f64, &'static str)>,
}

/// High-power slope of the zero-forcing rate.
pub fn multiplexing_gain_probe(
    params: &ScenarioParams,
    ch: &ChannelSet,
    powers: &[f64],
) -> Result<MultiplexingProbe> {
    let mut points = Vec::new();
    let mut skipped = Vec::new();
    for &pt in powers {
        let p = ScenarioParams { p_total: pt, ..params.clone() };
        let res = crate::channel::make_cover_beam(&p, ch).and_then(|cb| zf_design(&p, ch, &cb));
        match res {
            Ok(sol) => {
                let p_c = sol.w_c1.norm_sqr();
                let snr = (pt - p_c) / params.sigma_b2;
                if snr > 0.0 {
                    points.push((pt, snr.log2(), sol.rate()));
                } else {
                    skipped.push((pt, "infeasible-scenario"));
                }
            }
            Err(e) => skipped.push((pt, e.category())),
        }
    }
    if points.len() < 3 {
        return Err(Error::InvalidInput(format!(
            "need at least 3 usable power points, got {}",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.1).sum::<f64>() / n;
    let my = points.iter().map(|p| p.2).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.1 - mx) * (p.1 - mx)).sum();
    let sxy: f64 = points.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    if !(sxx > 1e-12) {
        return Err(Error::InvalidInput("power points do not spread; slope undefined".into()));
    }
    Ok(MultiplexingProbe {
        slope: sxy / sxx,
        points,
        skipped,
    })
}
