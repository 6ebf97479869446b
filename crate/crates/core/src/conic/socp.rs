//! Linear objective over a norm ball cut by homogeneous linear equalities.

use alloc::vec;
use alloc::vec::Vec;


use crate::cxmat::{ComplexVector, C64};
use crate::dense::{Mat, SpdFactor};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

/// A homogeneous equality row on `x`.
#[derive(Clone, Debug, PartialEq)]
pub enum SocpRow {
    /// `aᴴx = 0`.
    Complex(ComplexVector),
    /// `Re(aᴴx) = 0`.
    Real(ComplexVector),
    /// `Im(aᴴx) = 0`.
    Imag(ComplexVector),
}

/// `maximize Re(cᴴx)  s.t.  rows(x) = 0,  ‖x‖² ≤ ρ`.
#[derive(Clone, Debug, PartialEq)]
pub struct SocpProblem {
    pub objective: ComplexVector,
    pub rows: Vec<SocpRow>,
    pub rho: f64,
}

impl SocpProblem {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidInput("norm bound must be finite and non-negative".into()));
        }
        let n = self.objective.dim();
        let bad = self.rows.iter().any(|r| match r {
            SocpRow::Complex(a) | SocpRow::Real(a) | SocpRow::Imag(a) => a.dim() != n,
        });
        if bad {
            return Err(Error::InvalidInput("constraint row dimension mismatch".into()));
        }
        Ok(())
    }
}

/// Real gradient of `Re(aᴴx)` in the `[Re x; Im x]` coordinates.
fn re_row(a: &ComplexVector) -> Vec<f64> {
    let n = a.dim();
    let mut r = vec![0.0; 2 * n];
    for k in 0..n {
        r[k] = a[k].re;
        r[k + n] = a[k].im;
    }
    r
}

/// Real gradient of `Im(aᴴx)`.
fn im_row(a: &ComplexVector) -> Vec<f64> {
    let n = a.dim();
    let mut r = vec![0.0; 2 * n];
    for k in 0..n {
        r[k] = -a[k].im;
        r[k + n] = a[k].re;
    }
    r
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solves the problem from its KKT conditions.
///
/// Stationarity gives `x = (c − Aᵀν)/μ`; the multipliers `ν` of the equality
/// rows solve the normal equations `AAᵀν = Ac`, and `μ` is fixed by the active
/// norm bound. An objective orthogonal to the feasible subspace returns `0`.
pub fn solve_socp(p: &SocpProblem) -> Result<ComplexVector> {
    p.validate()?;
    let n = p.objective.dim();
    if p.rho == 0.0 {
        return Ok(ComplexVector::zeros(n));
    }
    let mut a: Vec<Vec<f64>> = Vec::new();
    for r in &p.rows {
        match r {
            SocpRow::Complex(v) => {
                a.push(re_row(v));
                a.push(im_row(v));
            }
            SocpRow::Real(v) => a.push(re_row(v)),
            SocpRow::Imag(v) => a.push(im_row(v)),
        }
    }
    let c = re_row(&p.objective);
    let m = a.len();
    let mut g = c.clone();
    if m > 0 {
        let mut aat = Mat::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = dot(&a[i], &a[j]);
                aat[(i, j)] = v;
                aat[(j, i)] = v;
            }
        }
        let f = SpdFactor::new(&aat);
        // two passes: the second removes what the first left in the row space
        for _ in 0..2 {
            let rhs: Vec<f64> = a.iter().map(|r| dot(r, &g)).collect();
            let nu = f.solve(&rhs);
            for (row, nui) in a.iter().zip(&nu) {
                for (gk, rk) in g.iter_mut().zip(row) {
                    *gk -= nui * rk;
                }
            }
        }
    }
    let gn = dot(&g, &g).sqrt();
    let cn = dot(&c, &c).sqrt();
    if !(gn > 1e-13 * cn.max(1e-300)) {
        return Ok(ComplexVector::zeros(n));
    }
    let s = p.rho.sqrt() / gn;
    ComplexVector::new((0..n).map(|k| C64::new(g[k] * s, g[k + n] * s)).collect())
}
