//! Dense complex linear algebra: vectors, Hermitian matrices, eigendecomposition,
//! span-orthogonal projectors and the real symmetric embedding.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::Index;

use num_complex::Complex64;
#[allow(unused_imports)]
use num_traits::Float;
use num_traits::Zero;

use crate::dense::{self, Mat};
use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Hermitian symmetry tolerance, scaled by `max(1, max |entry|)`.
pub const HERMITIAN_TOL: f64 = 1e-12;

/// Residual norm below which a Gram–Schmidt vector is treated as dependent.
const DEPENDENT_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexVector(Vec<C64>);

impl ComplexVector {
    pub fn new(entries: Vec<C64>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidInput("vector must have at least one entry".into()));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("vector entries must be finite".into()));
        }
        Ok(ComplexVector(entries))
    }

    pub fn from_real(entries: &[f64]) -> Result<Self> {
        Self::new(entries.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(dim: usize) -> Self {
        assert!(dim >= 1, "dimension must be positive");
        ComplexVector(vec![C64::zero(); dim])
    }

    /// The `i`-th standard basis vector.
    pub fn basis(dim: usize, i: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.0[i] = C64::new(1.0, 0.0);
        v
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn entries(&self) -> &[C64] {
        &self.0
    }

    pub fn into_entries(self) -> Vec<C64> {
        self.0
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    /// Inner product `selfᴴ · other`.
    pub fn inner(&self, other: &ComplexVector) -> C64 {
        debug_assert_eq!(self.dim(), other.dim());
        self.0
            .iter()
            .zip(&other.0)
            .map(|(a, b)| a.conj() * b)
            .fold(C64::zero(), |acc, x| acc + x)
    }

    pub fn scaled(&self, s: C64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn scaled_re(&self, s: f64) -> ComplexVector {
        ComplexVector(self.0.iter().map(|z| z * s).collect())
    }

    pub fn add(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &ComplexVector) -> ComplexVector {
        ComplexVector(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn normalized(&self) -> Option<ComplexVector> {
        let n = self.norm();
        (n > 0.0).then(|| self.scaled_re(1.0 / n))
    }
}

impl Index<usize> for ComplexVector {
    type Output = C64;
    fn index(&self, i: usize) -> &C64 {
        &self.0[i]
    }
}

/// Dense Hermitian matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl HermitianMatrix {
    /// Validates Hermitian symmetry and stores the exactly symmetrized matrix.
    pub fn new(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidInput("matrix dimension must be positive".into()));
        }
        if entries.len() != dim * dim {
            return Err(Error::InvalidInput(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::InvalidInput("matrix entries must be finite".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                if d > HERMITIAN_TOL * scale {
                    return Err(Error::InvalidInput(format!(
                        "matrix is not Hermitian: |M[{i}][{j}] - conj(M[{j}][{i}])| = {d:e}"
                    )));
                }
            }
        }
        let mut m = HermitianMatrix { dim, data: entries };
        m.symmetrize();
        Ok(m)
    }

    /// Builds from the upper triangle; `f(i, j)` is only called for `i <= j`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(dim >= 1);
        let mut data = vec![C64::zero(); dim * dim];
        for i in 0..dim {
            for j in i..dim {
                let z = if i == j { C64::new(f(i, j).re, 0.0) } else { f(i, j) };
                data[i * dim + j] = z;
                data[j * dim + i] = z.conj();
            }
        }
        HermitianMatrix { dim, data }
    }

    pub fn zeros(dim: usize) -> Self {
        Self::from_upper(dim, |_, _| C64::zero())
    }

    pub fn identity(dim: usize) -> Self {
        Self::from_upper(dim, |i, j| if i == j { C64::new(1.0, 0.0) } else { C64::zero() })
    }

    pub fn diag(values: &[f64]) -> Self {
        Self::from_upper(values.len(), |i, j| {
            if i == j {
                C64::new(values[i], 0.0)
            } else {
                C64::zero()
            }
        })
    }

    fn symmetrize(&mut self) {
        let n = self.dim;
        for i in 0..n {
            self.data[i * n + i].im = 0.0;
            for j in (i + 1)..n {
                let z = (self.data[i * n + j] + self.data[j * n + i].conj()) * 0.5;
                self.data[i * n + j] = z;
                self.data[j * n + i] = z.conj();
            }
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.dim + j]
    }

    pub fn entries(&self) -> &[C64] {
        &self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.dim).map(|i| self.get(i, i).re).sum()
    }

    /// `Tr(self · other)`, real for Hermitian arguments.
    pub fn trace_product(&self, other: &HermitianMatrix) -> f64 {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let a = self.data[i * n + j];
                let b = other.data[j * n + i];
                s += a.re * b.re - a.im * b.im;
            }
        }
        s
    }

    /// `vᴴ · self · v`.
    pub fn quad_form(&self, v: &ComplexVector) -> f64 {
        v.inner(&self.apply(v)).re
    }

    /// `self · v`.
    pub fn apply(&self, v: &ComplexVector) -> ComplexVector {
        let n = self.dim;
        debug_assert_eq!(v.dim(), n);
        ComplexVector(
            (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| self.data[i * n + j] * v.0[j])
                        .fold(C64::zero(), |a, b| a + b)
                })
                .collect(),
        )
    }

    pub fn add(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &HermitianMatrix) -> HermitianMatrix {
        HermitianMatrix {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn scaled(&self, s: f64) -> HermitianMatrix {
        HermitianMatrix {
            dim: self.dim,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// Frobenius norm.
    pub fn norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `T · self · Tᴴ` where `t` is given row-major with `rows × self.dim` entries.
    pub fn congruence(&self, t: &[C64], rows: usize) -> HermitianMatrix {
        let n = self.dim;
        debug_assert_eq!(t.len(), rows * n);
        let mut tm = vec![C64::zero(); rows * n];
        for r in 0..rows {
            for j in 0..n {
                tm[r * n + j] = (0..n)
                    .map(|k| t[r * n + k] * self.data[k * n + j])
                    .fold(C64::zero(), |a, b| a + b);
            }
        }
        HermitianMatrix::from_upper(rows, |i, j| {
            (0..n)
                .map(|k| tm[i * n + k] * t[j * n + k].conj())
                .fold(C64::zero(), |a, b| a + b)
        })
    }

    pub fn min_eigenvalue(&self) -> f64 {
        dense::min_eigenvalue(&embed_mat(self))
    }

    pub fn is_psd(&self, tol: f64) -> bool {
        self.min_eigenvalue() >= -tol
    }
}

/// `v · vᴴ`.
pub fn outer(v: &ComplexVector) -> HermitianMatrix {
    HermitianMatrix::from_upper(v.dim(), |i, j| v.0[i] * v.0[j].conj())
}

/// Eigendecomposition of a Hermitian matrix.
#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Real eigenvalues, descending.
    pub values: Vec<f64>,
    /// Orthonormal eigenvectors matching `values`.
    pub vectors: Vec<ComplexVector>,
}

impl HermitianEig {
    pub fn reconstruct(&self) -> HermitianMatrix {
        let n = self.vectors[0].dim();
        let mut m = HermitianMatrix::zeros(n);
        for (lambda, u) in self.values.iter().zip(&self.vectors) {
            m = m.add(&outer(u).scaled(*lambda));
        }
        m
    }
}

/// Eigendecomposition through cyclic Jacobi on the real embedding.
///
/// Each complex eigenpair appears twice in the embedding (`[x; y]` and
/// `[-y; x]`); the duplicate is removed by complex Gram–Schmidt.
pub fn eig_hermitian(m: &HermitianMatrix) -> HermitianEig {
    let n = m.dim;
    let (_, vecs) = dense::sym_eig(&embed_mat(m));
    let mut chosen: Vec<ComplexVector> = Vec::with_capacity(n);
    for col in 0..2 * n {
        let mut u = ComplexVector((0..n).map(|k| C64::new(vecs[(k, col)], vecs[(k + n, col)])).collect());
        for _pass in 0..2 {
            for q in &chosen {
                let c = q.inner(&u);
                u = u.sub(&q.scaled(c));
            }
        }
        let r = u.norm();
        if r > 0.5 {
            chosen.push(u.scaled_re(1.0 / r));
            if chosen.len() == n {
                break;
            }
        }
    }
    let mut pairs: Vec<(f64, ComplexVector)> = chosen
        .into_iter()
        .map(|u| (m.quad_form(&u), u))
        .collect();
    pairs.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(core::cmp::Ordering::Equal));
    let (values, vectors) = pairs.into_iter().unzip();
    HermitianEig { values, vectors }
}

fn check_columns(columns: &[ComplexVector]) -> Result<usize> {
    let first = columns
        .first()
        .ok_or_else(|| Error::InvalidInput("at least one column is required".into()))?;
    let n = first.dim();
    if columns.iter().any(|c| c.dim() != n) {
        return Err(Error::InvalidInput("columns have mismatched dimensions".into()));
    }
    Ok(n)
}

/// Orthonormal basis of the span of `columns`, by Gram–Schmidt with one
/// re-orthogonalization pass. Dependent columns are dropped.
pub fn orthonormal_basis(columns: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    check_columns(columns)?;
    Ok(gram_schmidt(columns, &[]))
}

fn gram_schmidt(columns: &[ComplexVector], seed: &[ComplexVector]) -> Vec<ComplexVector> {
    let mut basis: Vec<ComplexVector> = seed.to_vec();
    let start = basis.len();
    for c in columns {
        let norm0 = c.norm();
        if norm0 == 0.0 {
            continue;
        }
        let mut u = c.clone();
        for _pass in 0..2 {
            for q in &basis {
                let coef = q.inner(&u);
                u = u.sub(&q.scaled(coef));
            }
        }
        let r = u.norm();
        if r / norm0 >= DEPENDENT_TOL {
            basis.push(u.scaled_re(1.0 / r));
        }
    }
    basis.split_off(start)
}

/// Orthonormal basis of the orthogonal complement of `span(columns)`.
pub fn orthogonal_complement(columns: &[ComplexVector]) -> Result<Vec<ComplexVector>> {
    let n = check_columns(columns)?;
    let span = gram_schmidt(columns, &[]);
    let ids: Vec<ComplexVector> = (0..n).map(|i| ComplexVector::basis(n, i)).collect();
    let mut comp = gram_schmidt(&ids, &span);
    comp.truncate(n - span.len());
    Ok(comp)
}

/// Orthogonal projector onto the complement of `span(columns)`.
pub fn null_projector(columns: &[ComplexVector]) -> Result<HermitianMatrix> {
    let n = check_columns(columns)?;
    let q = gram_schmidt(columns, &[]);
    let mut p = HermitianMatrix::identity(n);
    for v in &q {
        p = p.sub(&outer(v));
    }
    Ok(p)
}

/// Real symmetric matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct RealSymmetric {
    dim: usize,
    data: Vec<f64>,
}

impl RealSymmetric {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.dim + j]
    }

    /// Eigenvalues, descending.
    pub fn eigenvalues(&self) -> Vec<f64> {
        dense::sym_eig(&self.as_mat()).0
    }

    pub fn min_eigenvalue(&self) -> f64 {
        dense::min_eigenvalue(&self.as_mat())
    }

    pub(crate) fn as_mat(&self) -> Mat {
        Mat {
            rows: self.dim,
            cols: self.dim,
            data: self.data.clone(),
        }
    }
}

/// `[[Re M, −Im M], [Im M, Re M]]`.
pub fn real_embed(m: &HermitianMatrix) -> RealSymmetric {
    let e = embed_mat(m);
    RealSymmetric {
        dim: e.rows,
        data: e.data,
    }
}

pub(crate) fn embed_mat(m: &HermitianMatrix) -> Mat {
    let n = m.dim;
    let mut e = Mat::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            e[(i, j)] = z.re;
            e[(i + n, j + n)] = z.re;
            e[(i, j + n)] = -z.im;
            e[(i + n, j)] = z.im;
        }
    }
    e
}

/// Inverse of the embedding for a possibly unstructured real PSD matrix:
/// averages the two copies, which is the projection onto embedded matrices.
pub(crate) fn unembed_mat(x: &Mat) -> HermitianMatrix {
    let n = x.rows / 2;
    HermitianMatrix::from_upper(n, |i, j| {
        C64::new(
            0.5 * (x[(i, j)] + x[(i + n, j + n)]),
            0.5 * (x[(i + n, j)] - x[(i, j + n)]),
        )
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn random_vector(rng: &mut ChaCha8Rng, n: usize) -> ComplexVector {
        ComplexVector::new(
            (0..n)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap()
    }

    fn random_hermitian(rng: &mut ChaCha8Rng, n: usize) -> HermitianMatrix {
        HermitianMatrix::from_upper(n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn outer_of_basis_vector() {
        let m = outer(&ComplexVector::from_real(&[1.0, 0.0]).unwrap());
        assert_eq!(m, HermitianMatrix::diag(&[1.0, 0.0]));
        let z = outer(&ComplexVector::zeros(2));
        assert_eq!(z, HermitianMatrix::zeros(2));
    }

    #[test]
    fn outer_hand_computed() {
        // v = (1, i)/√2: v vᴴ = ½ [[1, -i], [i, 1]]
        let s = 1.0 / 2f64.sqrt();
        let v = ComplexVector::new(vec![c(s, 0.0), c(0.0, s)]).unwrap();
        let m = outer(&v);
        assert!((m.get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m.get(0, 1) - c(0.0, -0.5)).norm() < 1e-15);
        assert!((m.get(1, 0) - c(0.0, 0.5)).norm() < 1e-15);
        assert!((m.get(1, 1) - c(0.5, 0.0)).norm() < 1e-15);
        assert!((m.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn rejects_non_hermitian() {
        let bad = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)]);
        assert!(matches!(bad, Err(Error::InvalidInput(_))));
        let ok = HermitianMatrix::new(2, vec![c(1.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(1.0, 0.0)]);
        assert!(ok.is_ok());
    }

    #[test]
    fn eig_identity_and_diag() {
        let e = eig_hermitian(&HermitianMatrix::identity(3));
        for v in &e.values {
            assert!((v - 1.0).abs() < 1e-14);
        }
        let e = eig_hermitian(&HermitianMatrix::diag(&[1.0, 3.0]));
        assert!((e.values[0] - 3.0).abs() < 1e-14 && (e.values[1] - 1.0).abs() < 1e-14);
        assert!((e.vectors[0][1].norm() - 1.0).abs() < 1e-14);
        assert!((e.vectors[1][0].norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_random_reconstructs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let m = random_hermitian(&mut rng, 5);
            let e = eig_hermitian(&m);
            let scale = m.norm();
            assert!(e.reconstruct().sub(&m).norm() <= 1e-9 * scale);
            for (lambda, u) in e.values.iter().zip(&e.vectors) {
                let r = m.apply(u).sub(&u.scaled_re(*lambda)).norm();
                assert!(r <= 1e-9 * scale);
            }
            for i in 0..5 {
                for j in 0..5 {
                    let g = e.vectors[i].inner(&e.vectors[j]);
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((g - c(want, 0.0)).norm() < 1e-10);
                }
            }
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn eig_degenerate_complex_spectrum() {
        // Rank-one matrix: eigenvalue ‖v‖² once, zero with multiplicity 3.
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let v = random_vector(&mut rng, 4);
        let e = eig_hermitian(&outer(&v));
        assert!((e.values[0] - v.norm_sqr()).abs() < 1e-12);
        assert!(e.values[1..].iter().all(|x| x.abs() < 1e-12));
        assert!((e.vectors[0].inner(&v).norm() - v.norm()).abs() < 1e-12);
    }

    #[test]
    fn projector_examples() {
        let e1 = ComplexVector::basis(3, 0);
        let e2 = ComplexVector::basis(3, 1);
        let p = null_projector(&[e1.clone()]).unwrap();
        assert!(p.sub(&HermitianMatrix::diag(&[0.0, 1.0, 1.0])).norm() < 1e-15);
        let p = null_projector(&[e1, e2]).unwrap();
        assert!(p.sub(&HermitianMatrix::diag(&[0.0, 0.0, 1.0])).norm() < 1e-15);
    }

    #[test]
    fn projector_rejects_mismatch() {
        let r = null_projector(&[ComplexVector::zeros(2), ComplexVector::zeros(3)]);
        assert!(matches!(r, Err(Error::InvalidInput(_))));
        assert!(null_projector(&[]).is_err());
    }

    #[test]
    fn projector_annihilates_random_columns() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let hw = random_vector(&mut rng, 5);
            let hc = random_vector(&mut rng, 5);
            let p = null_projector(&[hw.clone(), hc.clone()]).unwrap();
            assert!(p.apply(&hw).norm() <= 1e-10);
            assert!(p.apply(&hc).norm() <= 1e-10);
            // idempotent
            let x = random_vector(&mut rng, 5);
            let px = p.apply(&x);
            assert!(p.apply(&px).sub(&px).norm() <= 1e-10);
        }
    }

    #[test]
    fn complement_is_orthonormal_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = random_vector(&mut rng, 4);
        let comp = orthogonal_complement(&[h.clone()]).unwrap();
        assert_eq!(comp.len(), 3);
        for q in &comp {
            assert!(q.inner(&h).norm() < 1e-12);
            assert!((q.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn embed_examples() {
        let m = HermitianMatrix::diag(&[2.0, 3.0]);
        let e = real_embed(&m);
        assert_eq!(e.get(0, 0), 2.0);
        assert_eq!(e.get(3, 3), 3.0);
        assert_eq!(e.get(0, 2), 0.0);
        let id = real_embed(&HermitianMatrix::identity(2));
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(id.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
        // [[0, i], [-i, 0]] has eigenvalues ±1, each doubled in the embedding.
        let m = HermitianMatrix::new(2, vec![c(0.0, 0.0), c(0.0, 1.0), c(0.0, -1.0), c(0.0, 0.0)]).unwrap();
        let vals = real_embed(&m).eigenvalues();
        let want = [1.0, 1.0, -1.0, -1.0];
        for (v, w) in vals.iter().zip(want) {
            assert!((v - w).abs() < 1e-14);
        }
    }

    #[test]
    fn embedding_preserves_psd_sign() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..1000 {
            let n = rng.random_range(1..5);
            let m = random_hermitian(&mut rng, n);
            let a = eig_hermitian(&m).values.last().copied().unwrap();
            let b = real_embed(&m).min_eigenvalue();
            assert!((a - b).abs() < 1e-10);
            assert_eq!(a >= 0.0, b >= -1e-12 && a >= -1e-12 || b >= 0.0 && a >= 0.0);
        }
    }

    #[test]
    fn unembed_inverts_embed() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let m = random_hermitian(&mut rng, 4);
        assert!(unembed_mat(&embed_mat(&m)).sub(&m).norm() < 1e-15);
    }

    proptest! {
        #[test]
        fn outer_trace_is_norm_sqr(re in proptest::collection::vec(-3.0f64..3.0, 1..6), seed in 0u64..1000) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let v = ComplexVector::new(re.iter().map(|&x| c(x, rng.random_range(-3.0..3.0))).collect()).unwrap();
            let m = outer(&v);
            prop_assert!((m.trace() - v.norm_sqr()).abs() <= 1e-12 * (1.0 + v.norm_sqr()));
            prop_assert!(m.min_eigenvalue() >= -1e-12 * (1.0 + v.norm_sqr()));
        }

        #[test]
        fn projector_is_idempotent_hermitian(seed in 0u64..500, k in 1usize..4) {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cols: Vec<_> = (0..k).map(|_| random_vector(&mut rng, 5)).collect();
            let p = null_projector(&cols).unwrap();
            let p2 = HermitianMatrix::from_upper(5, |i, j| {
                (0..5).map(|l| p.get(i, l) * p.get(l, j)).fold(C64::zero(), |a, b| a + b)
            });
            prop_assert!(p2.sub(&p).norm() <= 1e-10);
            for col in &cols {
                prop_assert!(p.apply(col).norm() <= 1e-10);
            }
        }
    }
}
