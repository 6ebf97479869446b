//! Small dense conic solver over Hermitian PSD blocks.
//!
//! Problems are stated over complex Hermitian variables and solved through the
//! real symmetric embedding by a primal-dual interior-point method. Inequality
//! rows get 1×1 slack blocks; equality rows enter the Newton system as they are.
//!
//! All residuals are measured on *normalized* rows: each constraint is divided
//! by `max(‖A‖_F, |b|)` (Frobenius norm over all its blocks).

mod dump;
mod ipm;
mod socp;

use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;


use crate::cxmat::{self, HermitianMatrix};
use crate::dense::Mat;
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub use dump::dump_problem;
pub use socp::{solve_socp, SocpProblem, SocpRow};

pub const DEFAULT_GAP_TOL: f64 = 1e-7;
pub const DEFAULT_FEAS_TOL: f64 = 1e-7;
pub const DEFAULT_MAX_ITER: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
    Feasibility,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn symbol(self) -> &'static str {
        match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BlockSpec {
    pub name: String,
    pub dim: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Constraint {
    pub label: String,
    /// `(block index, coefficient)`; blocks not listed have zero coefficient.
    pub terms: Vec<(usize, HermitianMatrix)>,
    pub relation: Relation,
    pub bound: f64,
}

impl Constraint {
    /// `Σ_k Tr(A_k W_k)`.
    pub fn lhs(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.terms.iter().map(|(k, a)| a.trace_product(&blocks[*k])).sum()
    }

    /// `max(‖A‖_F, |b|)`, or 1 for an all-zero row.
    pub fn scale(&self) -> f64 {
        let an = self
            .terms
            .iter()
            .map(|(_, a)| a.norm() * a.norm())
            .sum::<f64>()
            .sqrt();
        let s = an.max(self.bound.abs());
        if s > 0.0 {
            s
        } else {
            1.0
        }
    }

    /// Normalized violation (zero when satisfied).
    pub fn violation(&self, blocks: &[HermitianMatrix]) -> f64 {
        let d = self.lhs(blocks) - self.bound;
        if !d.is_finite() {
            return f64::INFINITY;
        }
        let v = match self.relation {
            Relation::Le => d.max(0.0),
            Relation::Ge => (-d).max(0.0),
            Relation::Eq => d.abs(),
        };
        v / self.scale()
    }
}

/// Linear program over Hermitian PSD blocks.
#[derive(Clone, Debug, PartialEq)]
pub struct ConicProblem {
    pub sense: Sense,
    pub blocks: Vec<BlockSpec>,
    pub objective: Vec<(usize, HermitianMatrix)>,
    pub objective_offset: f64,
    pub constraints: Vec<Constraint>,
}

impl ConicProblem {
    pub fn new(sense: Sense) -> Self {
        ConicProblem {
            sense,
            blocks: Vec::new(),
            objective: Vec::new(),
            objective_offset: 0.0,
            constraints: Vec::new(),
        }
    }

    /// Adds a Hermitian PSD block and returns its index.
    pub fn add_block(&mut self, name: &str, dim: usize) -> usize {
        self.blocks.push(BlockSpec {
            name: name.to_string(),
            dim,
        });
        self.blocks.len() - 1
    }

    pub fn add_objective_term(&mut self, block: usize, coeff: HermitianMatrix) {
        self.objective.push((block, coeff));
    }

    pub fn add_constraint(
        &mut self,
        label: &str,
        terms: Vec<(usize, HermitianMatrix)>,
        relation: Relation,
        bound: f64,
    ) -> usize {
        self.constraints.push(Constraint {
            label: label.to_string(),
            terms,
            relation,
            bound,
        });
        self.constraints.len() - 1
    }

    pub fn validate(&self) -> Result<()> {
        if self.blocks.is_empty() {
            return Err(Error::InvalidInput("problem has no variable blocks".into()));
        }
        if let Some(b) = self.blocks.iter().find(|b| b.dim == 0) {
            return Err(Error::InvalidInput(alloc::format!("block {} has dimension 0", b.name)));
        }
        if self.sense == Sense::Feasibility && self.constraints.is_empty() {
            return Err(Error::InvalidInput("feasibility problem without constraints".into()));
        }
        if !self.objective_offset.is_finite() {
            return Err(Error::InvalidInput("objective offset must be finite".into()));
        }
        let check_terms = |terms: &[(usize, HermitianMatrix)], what: &str| -> Result<()> {
            for (k, a) in terms {
                let b = self.blocks.get(*k).ok_or_else(|| {
                    Error::InvalidInput(alloc::format!("{what} references unknown block {k}"))
                })?;
                if a.dim() != b.dim {
                    return Err(Error::InvalidInput(alloc::format!(
                        "{what}: coefficient for block {} has dimension {}, expected {}",
                        b.name,
                        a.dim(),
                        b.dim
                    )));
                }
            }
            Ok(())
        };
        check_terms(&self.objective, "objective")?;
        for c in &self.constraints {
            check_terms(&c.terms, &c.label)?;
            if !c.bound.is_finite() {
                return Err(Error::InvalidInput(alloc::format!("{}: bound is not finite", c.label)));
            }
        }
        Ok(())
    }

    /// `Σ_k Tr(C_k W_k) + offset`.
    pub fn objective_value(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.objective
            .iter()
            .map(|(k, c)| c.trace_product(&blocks[*k]))
            .sum::<f64>()
            + self.objective_offset
    }

    /// Largest normalized constraint violation.
    pub fn max_violation(&self, blocks: &[HermitianMatrix]) -> f64 {
        self.constraints
            .iter()
            .map(|c| c.violation(blocks))
            .fold(0.0, f64::max)
    }

    /// Multiplies every constraint row and the objective by `s > 0`.
    pub fn scaled(&self, s: f64) -> ConicProblem {
        let mut p = self.clone();
        for (_, c) in &mut p.objective {
            *c = c.scaled(s);
        }
        p.objective_offset *= s;
        for c in &mut p.constraints {
            for (_, a) in &mut c.terms {
                *a = a.scaled(s);
            }
            c.bound *= s;
        }
        p
    }

    fn real_dims(&self) -> Vec<usize> {
        self.blocks.iter().map(|b| 2 * b.dim).collect()
    }

    /// Real rows `⟨embed(A)/2, X⟩` normalized by their real norm.
    fn real_rows(&self) -> Vec<(Vec<(usize, Mat)>, f64)> {
        self.constraints
            .iter()
            .map(|c| {
                let terms: Vec<(usize, Mat)> = c
                    .terms
                    .iter()
                    .map(|(k, a)| {
                        let mut m = cxmat::embed_mat(a);
                        m.scale(0.5);
                        (*k, m)
                    })
                    .collect();
                let an = terms.iter().map(|(_, m)| m.dot(m)).sum::<f64>().sqrt();
                let s = an.max(c.bound.abs());
                let d = if s > 0.0 { 1.0 / s } else { 1.0 };
                let terms = terms
                    .into_iter()
                    .map(|(k, mut m)| {
                        m.scale(d);
                        (k, m)
                    })
                    .collect();
                (terms, c.bound * d)
            })
            .collect()
    }

    fn unembed_blocks(&self, x: &[Mat]) -> Vec<HermitianMatrix> {
        (0..self.blocks.len()).map(|k| cxmat::unembed_mat(&x[k])).collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Optimal,
    Infeasible,
    Unbounded,
    MaxIterations,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CertificateKind {
    /// Dual improving ray: `bᵀy = 1`, `Aᵀy ⪯ ε·I`. No feasible point has
    /// total trace below `margin = 1/ε`.
    FarkasRay,
    /// Phase-I dual bound: every point in the trace-capped region violates
    /// some normalized row by at least `margin`.
    MinViolation,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InfeasibilityCertificate {
    pub kind: CertificateKind,
    /// One multiplier per constraint of the original problem.
    pub multipliers: Vec<f64>,
    pub margin: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConicSolution {
    pub status: SolveStatus,
    pub blocks: Vec<HermitianMatrix>,
    pub objective_value: f64,
    /// Objective bound from the dual iterate, in the problem's own sense.
    pub dual_objective: f64,
    /// Relative duality gap of the normalized problem.
    pub duality_gap: f64,
    pub max_constraint_violation: f64,
    pub iterations: usize,
    pub certificate: Option<InfeasibilityCertificate>,
}

impl ConicSolution {
    pub fn min_block_eigenvalue(&self) -> f64 {
        self.blocks
            .iter()
            .map(|b| b.min_eigenvalue())
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_tols(gap_tol: f64, feas_tol: f64) -> Result<()> {
    if !(gap_tol > 0.0) || !(feas_tol > 0.0) {
        return Err(Error::InvalidInput("tolerances must be positive".into()));
    }
    Ok(())
}

/// Solves a conic problem with the primal-dual interior-point method.
pub fn solve_sdp(
    p: &ConicProblem,
    gap_tol: f64,
    feas_tol: f64,
    max_iter: usize,
) -> Result<ConicSolution> {
    p.validate()?;
    check_tols(gap_tol, feas_tol)?;
    let nb = p.blocks.len();
    let mut dims = p.real_dims();
    let mut rows = Vec::with_capacity(p.constraints.len());
    let mut b = Vec::with_capacity(p.constraints.len());
    for (c, (mut terms, bi)) in p.constraints.iter().zip(p.real_rows()) {
        let sign = match c.relation {
            Relation::Le => Some(1.0),
            Relation::Ge => Some(-1.0),
            Relation::Eq => None,
        };
        if let Some(sg) = sign {
            dims.push(1);
            terms.push((dims.len() - 1, Mat::diag(&[sg])));
        }
        rows.push(terms);
        b.push(bi);
    }
    let sign = if p.sense == Sense::Maximize { -1.0 } else { 1.0 };
    let mut c: Vec<Option<Mat>> = vec![None; dims.len()];
    if p.sense != Sense::Feasibility {
        for (k, ck) in &p.objective {
            let mut m = cxmat::embed_mat(ck);
            m.scale(0.5 * sign);
            match &mut c[*k] {
                Some(acc) => acc.axpy(1.0, &m),
                slot => *slot = Some(m),
            }
        }
    }
    let cn = c.iter().flatten().map(|m| m.dot(m)).sum::<f64>().sqrt();
    let cscale = if cn > 0.0 { cn } else { 1.0 };
    for m in c.iter_mut().flatten() {
        m.scale(1.0 / cscale);
    }
    let sdp = ipm::RealSdp { dims, c, rows, b };
    let opts = ipm::IpmOptions {
        gap_tol,
        feas_tol,
        max_iter,
    };
    let r = ipm::solve(&sdp, &opts, |_| false);

    let blocks = p.unembed_blocks(&r.x[..nb]);
    let status = match r.status {
        ipm::IpmStatus::Optimal => SolveStatus::Optimal,
        ipm::IpmStatus::PrimalInfeasible => SolveStatus::Infeasible,
        ipm::IpmStatus::DualInfeasible => SolveStatus::Unbounded,
        ipm::IpmStatus::MaxIterations | ipm::IpmStatus::Stopped => SolveStatus::MaxIterations,
    };
    let certificate = (status == SolveStatus::Infeasible).then(|| {
        let ynorm: Vec<f64> = r.y.iter().map(|v| v / r.dobj).collect();
        let aty = sdp_apply_at(&sdp, &ynorm);
        let eps = aty
            .iter()
            .map(|m| crate::dense::sym_eig(m).0[0])
            .fold(0.0f64, f64::max);
        // back to multipliers on the unnormalized rows
        let multipliers = p
            .constraints
            .iter()
            .zip(&ynorm)
            .map(|(c, yi)| yi * real_row_factor(c))
            .collect();
        InfeasibilityCertificate {
            kind: CertificateKind::FarkasRay,
            multipliers,
            margin: if eps > 0.0 { 1.0 / eps } else { f64::INFINITY },
        }
    });
    let dual_objective = if p.sense == Sense::Feasibility {
        p.objective_offset
    } else {
        sign * cscale * r.dobj + p.objective_offset
    };
    Ok(ConicSolution {
        status,
        objective_value: p.objective_value(&blocks),
        dual_objective,
        duality_gap: r.gap,
        max_constraint_violation: p.max_violation(&blocks),
        blocks,
        iterations: r.iterations,
        certificate,
    })
}

fn real_row_factor(c: &Constraint) -> f64 {
    let an = c
        .terms
        .iter()
        .map(|(_, a)| a.norm() * a.norm())
        .sum::<f64>()
        .sqrt()
        / 2f64.sqrt();
    let s = an.max(c.bound.abs());
    if s > 0.0 {
        1.0 / s
    } else {
        1.0
    }
}

fn sdp_apply_at(p: &ipm::RealSdp, y: &[f64]) -> Vec<Mat> {
    let mut out: Vec<Mat> = p.dims.iter().map(|&n| Mat::zeros(n, n)).collect();
    for (row, &yi) in p.rows.iter().zip(y) {
        for (k, a) in row {
            out[*k].axpy(yi, a);
        }
    }
    out
}

/// Outcome of [`check_feasible`].
#[derive(Clone, Debug, PartialEq)]
pub enum Feasibility {
    Feasible(ConicSolution),
    Infeasible(InfeasibilityCertificate),
    /// The phase-I solve stopped before either side could be certified.
    Undecided(ConicSolution),
}

impl Feasibility {
    pub fn is_feasible(&self) -> bool {
        matches!(self, Feasibility::Feasible(_))
    }
}

/// Phase-I feasibility check.
///
/// Minimizes the largest normalized row violation `t` over PSD blocks whose
/// total trace is capped at a radius far beyond the problem's natural scale.
/// The problem is feasible iff the attained `t ≤ feas_tol`.
pub fn check_feasible(p: &ConicProblem, feas_tol: f64) -> Result<Feasibility> {
    check_feasible_with(p, feas_tol, DEFAULT_MAX_ITER)
}

pub fn check_feasible_with(p: &ConicProblem, feas_tol: f64, max_iter: usize) -> Result<Feasibility> {
    p.validate()?;
    check_tols(feas_tol, feas_tol)?;
    if p.sense != Sense::Feasibility {
        return Err(Error::InvalidInput("check_feasible expects a feasibility problem".into()));
    }
    let nb = p.blocks.len();
    let mut dims = p.real_dims();
    let u = dims.len();
    dims.push(1);
    let mut rows: Vec<Vec<(usize, Mat)>> = Vec::new();
    let mut b = Vec::new();
    // (original constraint, sign) for each generated row, to fold multipliers back
    let mut origin: Vec<(usize, f64)> = Vec::new();
    let mut ratio = 1.0f64;
    for (ci, (c, (terms, bi))) in p.constraints.iter().zip(p.real_rows()).enumerate() {
        let an = terms.iter().map(|(_, m)| m.dot(m)).sum::<f64>().sqrt();
        if an > 0.0 {
            ratio = ratio.max(bi.abs() / an);
        }
        let mut push = |sg: f64| {
            // sg = +1: a − u + s = b − 1 ; sg = −1: a + u − s = b + 1
            dims.push(1);
            let s = dims.len() - 1;
            let mut r = terms.clone();
            r.push((u, Mat::diag(&[-sg])));
            r.push((s, Mat::diag(&[sg])));
            rows.push(r);
            b.push(bi - sg);
            origin.push((ci, sg));
        };
        match c.relation {
            Relation::Le => push(1.0),
            Relation::Ge => push(-1.0),
            Relation::Eq => {
                push(1.0);
                push(-1.0);
            }
        }
    }
    let total: usize = dims[..nb].iter().sum();
    let radius = 1e3 * ratio * total as f64;
    {
        let mut r: Vec<(usize, Mat)> = dims[..nb]
            .iter()
            .enumerate()
            .map(|(k, &n)| (k, Mat::scaled_identity(n, 1.0 / radius)))
            .collect();
        dims.push(1);
        r.push((dims.len() - 1, Mat::diag(&[1.0])));
        rows.push(r);
        b.push(1.0);
    }
    let mut c: Vec<Option<Mat>> = vec![None; dims.len()];
    c[u] = Some(Mat::diag(&[1.0]));
    let sdp = ipm::RealSdp { dims, c, rows, b };
    let opts = ipm::IpmOptions {
        gap_tol: 1e-10,
        feas_tol: 1e-10,
        max_iter,
    };

    let mut found = false;
    let mut lower = f64::NEG_INFINITY;
    let r = ipm::solve(&sdp, &opts, |it| {
        let blocks = p.unembed_blocks(&it.x[..nb]);
        if p.max_violation(&blocks) <= feas_tol {
            found = true;
            return true;
        }
        // dual lower bound on t* = u* − 1 once the dual iterate is feasible
        let bound = it.dobj - 1.0;
        if it.dinf_abs <= 1e-9 && bound > feas_tol {
            lower = bound;
            return true;
        }
        false
    });
    let blocks = p.unembed_blocks(&r.x[..nb]);
    let violation = p.max_violation(&blocks);
    let sol = ConicSolution {
        status: if found || r.status == ipm::IpmStatus::Optimal {
            SolveStatus::Optimal
        } else {
            SolveStatus::MaxIterations
        },
        objective_value: p.objective_value(&blocks),
        dual_objective: p.objective_offset,
        duality_gap: r.gap,
        max_constraint_violation: violation,
        blocks,
        iterations: r.iterations,
        certificate: None,
    };
    if found || violation <= feas_tol {
        return Ok(Feasibility::Feasible(sol));
    }
    let margin = if lower.is_finite() { lower } else { r.dobj - 1.0 };
    if (r.status == ipm::IpmStatus::Optimal || lower.is_finite()) && margin > 0.0 {
        let mut multipliers = vec![0.0; p.constraints.len()];
        for ((ci, sg), yi) in origin.iter().zip(&r.y) {
            multipliers[*ci] += sg * yi * real_row_factor(&p.constraints[*ci]);
        }
        return Ok(Feasibility::Infeasible(InfeasibilityCertificate {
            kind: CertificateKind::MinViolation,
            multipliers,
            margin,
        }));
    }
    Ok(Feasibility::Undecided(sol))
}

#[cfg(test)]
mod tests;
