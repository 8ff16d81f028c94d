//! Dense complex linear algebra foundation.
//!
//! Matrices are stored row-major. The reshaping convention is fixed so that
//! `vec(A B C) = tensor(A, C.transpose()) * vec(B)`, which makes
//! `vec(I_d / sqrt(d))` the maximally entangled state and keeps every
//! operator identity in the crate basis-exact.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::{Error, Result};

/// Relative Hermiticity tolerance used when none is supplied.
pub const HERMITIAN_RTOL: f64 = 1e-12;

/// Dense complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<Complex64>,
}

/// Dense complex vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CVector {
    entries: Vec<Complex64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            entries: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim, dim);
        for i in 0..dim {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_entries(rows: usize, cols: usize, entries: Vec<Complex64>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch {
                context: "matrix entry count",
                expected: rows * cols,
                got: entries.len(),
            });
        }
        Ok(Self { rows, cols, entries })
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        let complex = entries.iter().map(|&r| Complex64::new(r, 0.0)).collect();
        Self::from_entries(rows, cols, complex)
    }

    pub fn diagonal(values: &[Complex64]) -> Self {
        let mut m = Self::zeros(values.len(), values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Rank-one projection |v><v| onto a unit vector.
    pub fn projector(v: &CVector) -> Self {
        let d = v.dim();
        let mut m = Self::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                m[(i, j)] = v[i] * v[j].conj();
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "inner dimensions must agree");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..other.cols {
                    out[(i, j)] += a * other[(k, j)];
                }
            }
        }
        out
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &CVector) -> CVector {
        assert_eq!(self.cols, v.dim(), "matrix-vector dimensions must agree");
        let mut out = vec![Complex64::new(0.0, 0.0); self.rows];
        for i in 0..self.rows {
            let mut acc = Complex64::new(0.0, 0.0);
            for j in 0..self.cols {
                acc += self[(i, j)] * v[j];
            }
            out[i] = acc;
        }
        CVector::new(out)
    }

    /// Entrywise transpose (no conjugation).
    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)];
            }
        }
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    /// Entrywise complex conjugate.
    pub fn conjugate(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(|e| e.conj()).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        assert!(self.is_square(), "trace requires a square matrix");
        (0..self.rows).map(|i| self[(i, i)]).sum()
    }

    pub fn norm_fro(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Operator (spectral) norm via the largest singular value.
    pub fn norm_op(&self) -> f64 {
        if self.entries.iter().all(|e| e.norm_sqr() == 0.0) {
            return 0.0;
        }
        let m = self.to_nalgebra();
        m.singular_values().iter().cloned().fold(0.0, f64::max)
    }

    /// Frobenius distance from the conjugate transpose.
    pub fn hermiticity_defect(&self) -> f64 {
        assert!(self.is_square(), "Hermiticity only defined for square matrices");
        self.sub(&self.adjoint()).norm_fro()
    }

    /// Frobenius inner product <A, B> = Tr(A^* B).
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    fn to_nalgebra(&self) -> DMatrix<Complex64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| self[(i, j)])
    }

    fn from_nalgebra(m: &DMatrix<Complex64>) -> Self {
        let mut out = Self::zeros(m.nrows(), m.ncols());
        for i in 0..m.nrows() {
            for j in 0..m.ncols() {
                out[(i, j)] = m[(i, j)];
            }
        }
        out
    }
}

impl std::ops::Index<(usize, usize)> for CMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.entries[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for CMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.entries[i * self.cols + j]
    }
}

impl CVector {
    pub fn new(entries: Vec<Complex64>) -> Self {
        Self { entries }
    }

    pub fn zeros(dim: usize) -> Self {
        Self {
            entries: vec![Complex64::new(0.0, 0.0); dim],
        }
    }

    pub fn basis_state(dim: usize, index: usize) -> Self {
        let mut v = Self::zeros(dim);
        v.entries[index] = Complex64::new(1.0, 0.0);
        v
    }

    pub fn from_real(entries: &[f64]) -> Self {
        Self {
            entries: entries.iter().map(|&r| Complex64::new(r, 0.0)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub fn norm(&self) -> f64 {
        self.entries.iter().map(|e| e.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Checks |‖v‖ − 1| ≤ tol.
    pub fn is_unit(&self, tol: f64) -> bool {
        (self.norm() - 1.0).abs() <= tol
    }

    pub fn assert_unit(&self, tol: f64) -> Result<()> {
        if self.is_unit(tol) {
            Ok(())
        } else {
            Err(Error::NotUnit {
                norm: self.norm(),
                tolerance: tol,
            })
        }
    }

    pub fn normalize(&self) -> Self {
        let n = self.norm();
        self.scale(Complex64::new(1.0 / n, 0.0))
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            entries: self.entries.iter().map(|e| e * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.dim(), other.dim());
        Self {
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Inner product <self, other>, conjugate-linear in `self`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        assert_eq!(self.dim(), other.dim());
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// Kronecker product of two vectors.
    pub fn tensor(&self, other: &Self) -> Self {
        let mut out = Vec::with_capacity(self.dim() * other.dim());
        for a in &self.entries {
            for b in &other.entries {
                out.push(a * b);
            }
        }
        Self::new(out)
    }
}

impl std::ops::Index<usize> for CVector {
    type Output = Complex64;
    fn index(&self, i: usize) -> &Complex64 {
        &self.entries[i]
    }
}

impl std::ops::IndexMut<usize> for CVector {
    fn index_mut(&mut self, i: usize) -> &mut Complex64 {
        &mut self.entries[i]
    }
}

/// Trace-one positive semidefinite operator.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validation tolerance for positivity and normalization.
    pub const TOL: f64 = 1e-10;

    pub fn new(matrix: CMatrix) -> Result<Self> {
        if !matrix.is_square() {
            return Err(Error::NotSquare {
                rows: matrix.rows(),
                cols: matrix.cols(),
            });
        }
        let trace_defect = (matrix.trace().re - 1.0).abs() + matrix.trace().im.abs();
        if trace_defect > Self::TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: "trace is not 1",
                residual: trace_defect,
            });
        }
        let (vals, _) = eigh_with_tol(&matrix, 1e-8)?;
        let min = vals.last().copied().unwrap_or(0.0);
        if min < -Self::TOL {
            return Err(Error::InvalidDensityMatrix {
                reason: "not positive semidefinite",
                residual: -min,
            });
        }
        Ok(Self { matrix })
    }

    /// Pure-state density matrix |v><v|.
    pub fn pure(v: &CVector) -> Result<Self> {
        v.assert_unit(1e-10)?;
        Ok(Self {
            matrix: CMatrix::projector(v),
        })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    /// Maximally mixed state I/d.
    pub fn maximally_mixed(dim: usize) -> Self {
        Self {
            matrix: CMatrix::identity(dim).scale(Complex64::new(1.0 / dim as f64, 0.0)),
        }
    }
}

/// Kronecker product with the (i⊗k, j⊗l) ↦ a[i,j]·b[k,l] index convention.
pub fn tensor(a: &CMatrix, b: &CMatrix) -> CMatrix {
    let mut out = CMatrix::zeros(a.rows() * b.rows(), a.cols() * b.cols());
    for i in 0..a.rows() {
        for j in 0..a.cols() {
            let s = a[(i, j)];
            if s == Complex64::new(0.0, 0.0) {
                continue;
            }
            for k in 0..b.rows() {
                for l in 0..b.cols() {
                    out[(i * b.rows() + k, j * b.cols() + l)] = s * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Row-stacking reshape of a square matrix into a vector, chosen so that
/// `vec(A B C) = tensor(A, C.transpose()) * vec(B)`.
pub fn vec_of(m: &CMatrix) -> Result<CVector> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(CVector::new(m.entries().to_vec()))
}

/// Inverse of [`vec_of`]: reshapes a d²-dimensional vector into d×d.
pub fn mat_of(v: &CVector) -> Result<CMatrix> {
    let d2 = v.dim();
    let d = (d2 as f64).sqrt().round() as usize;
    if d * d != d2 {
        return Err(Error::DimensionMismatch {
            context: "mat reshape (length must be a perfect square)",
            expected: d * d,
            got: d2,
        });
    }
    CMatrix::from_entries(d, d, v.entries().to_vec())
}

/// Reshapes a bipartite vector on C^{da}⊗C^{db} into a da×db matrix, so that
/// `v = Σ M[i,k] |i>|k>`.
pub fn bipartite_mat(v: &CVector, da: usize, db: usize) -> Result<CMatrix> {
    if v.dim() != da * db {
        return Err(Error::DimensionMismatch {
            context: "bipartite reshape",
            expected: da * db,
            got: v.dim(),
        });
    }
    CMatrix::from_entries(da, db, v.entries().to_vec())
}

/// Hermitian eigendecomposition with eigenvalues in descending order.
///
/// Eigenvectors are orthonormal, paired with the eigenvalues, and the phase
/// of each is fixed by making its first nonzero component real positive.
/// Rejects input whose Hermiticity defect exceeds `rtol · ‖m‖_F`.
pub fn eigh_with_tol(m: &CMatrix, rtol: f64) -> Result<(Vec<f64>, Vec<CVector>)> {
    if !m.is_square() {
        return Err(Error::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let scale = m.norm_fro().max(1.0);
    let defect = m.hermiticity_defect();
    if defect > rtol * scale {
        return Err(Error::NotHermitian {
            defect,
            tolerance: rtol * scale,
        });
    }
    let d = m.rows();
    // Symmetrize before handing off so tiny asymmetries cannot leak into
    // complex eigenvalues.
    let herm = m.add(&m.adjoint()).scale(Complex64::new(0.5, 0.0));
    let na = herm.to_nalgebra();
    let se = na.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| {
        se.eigenvalues[j]
            .partial_cmp(&se.eigenvalues[i])
            .expect("eigenvalues are finite")
    });
    let mut values = Vec::with_capacity(d);
    let mut vectors = Vec::with_capacity(d);
    for &k in &order {
        values.push(se.eigenvalues[k]);
        let col = se.eigenvectors.column(k);
        let mut v: Vec<Complex64> = col.iter().cloned().collect();
        if let Some(first) = v.iter().find(|c| c.norm() > 1e-14) {
            let phase = first / first.norm();
            let correction = phase.conj();
            for c in &mut v {
                *c *= correction;
            }
        }
        vectors.push(CVector::new(v));
    }
    Ok((values, vectors))
}

/// Hermitian eigendecomposition at the default Hermiticity tolerance.
pub fn eigh(m: &CMatrix) -> Result<(Vec<f64>, Vec<CVector>)> {
    eigh_with_tol(m, HERMITIAN_RTOL)
}

/// Which tensor factor [`partial_trace`] keeps.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Keep {
    A,
    B,
}

/// Partial trace of an operator on C^{da}⊗C^{db} over the discarded factor.
pub fn partial_trace(m: &CMatrix, da: usize, db: usize, keep: Keep) -> Result<CMatrix> {
    if m.rows() != da * db || m.cols() != da * db {
        return Err(Error::DimensionMismatch {
            context: "partial trace",
            expected: da * db,
            got: m.rows(),
        });
    }
    match keep {
        Keep::A => {
            let mut out = CMatrix::zeros(da, da);
            for i in 0..da {
                for j in 0..da {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for k in 0..db {
                        acc += m[(i * db + k, j * db + k)];
                    }
                    out[(i, j)] = acc;
                }
            }
            Ok(out)
        }
        Keep::B => {
            let mut out = CMatrix::zeros(db, db);
            for k in 0..db {
                for l in 0..db {
                    let mut acc = Complex64::new(0.0, 0.0);
                    for i in 0..da {
                        acc += m[(i * db + k, i * db + l)];
                    }
                    out[(k, l)] = acc;
                }
            }
            Ok(out)
        }
    }
}

/// State seminorm ‖x‖_ρ = sqrt(Tr(ρ x†x)).
pub fn rho_seminorm(x: &CMatrix, rho: &DensityMatrix) -> Result<f64> {
    if x.rows() != rho.dim() || x.cols() != rho.dim() {
        return Err(Error::DimensionMismatch {
            context: "state seminorm",
            expected: rho.dim(),
            got: x.rows(),
        });
    }
    let val = rho.matrix().mul(&x.adjoint().mul(x)).trace().re;
    Ok(val.max(0.0).sqrt())
}

/// Schmidt decomposition of a bipartite vector.
#[derive(Debug, Clone)]
pub struct Schmidt {
    /// Nonnegative coefficients in descending order, including zeros.
    pub coefficients: Vec<f64>,
    /// Orthonormal left vectors on C^{da}, paired with the coefficients.
    pub left: Vec<CVector>,
    /// Orthonormal right vectors on C^{db}, paired with the coefficients.
    pub right: Vec<CVector>,
}

impl Schmidt {
    /// Number of coefficients exceeding `rtol` relative to the largest.
    pub fn rank(&self, rtol: f64) -> usize {
        let top = self.coefficients.first().copied().unwrap_or(0.0);
        self.coefficients.iter().filter(|&&c| c > rtol * top).count()
    }
}

/// Relative cutoff separating genuine Schmidt coefficients from noise.
pub const SCHMIDT_RTOL: f64 = 1e-10;

/// Schmidt decomposition: `v = Σ s_i (left_i ⊗ right_i)`.
pub fn schmidt(v: &CVector, da: usize, db: usize) -> Result<Schmidt> {
    let m = bipartite_mat(v, da, db)?;
    let na = m.to_nalgebra();
    let svd = na.svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let k = da.min(db);
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| {
        svd.singular_values[j]
            .partial_cmp(&svd.singular_values[i])
            .expect("singular values are finite")
    });
    let mut coefficients = Vec::with_capacity(k);
    let mut left = Vec::with_capacity(k);
    let mut right = Vec::with_capacity(k);
    for &s in &order {
        coefficients.push(svd.singular_values[s]);
        left.push(CVector::new(u.column(s).iter().cloned().collect()));
        // M = U Σ V^†, so the right Schmidt vectors are the rows of V^†.
        right.push(CVector::new(vt.row(s).iter().cloned().collect()));
    }
    Ok(Schmidt {
        coefficients,
        left,
        right,
    })
}

/// Orthonormal basis of the right nullspace of `m`: right singular vectors
/// whose singular value is at most `rtol` times the largest (or `rtol` when
/// the matrix is numerically zero).
pub fn nullspace(m: &CMatrix, rtol: f64) -> Vec<CVector> {
    let na = m.to_nalgebra();
    let svd = na.svd(false, true);
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cutoff = rtol * smax.max(1.0);
    let mut basis = Vec::new();
    for (i, &s) in svd.singular_values.iter().enumerate() {
        if s <= cutoff {
            basis.push(CVector::new(vt.row(i).iter().map(|c| c.conj()).collect()));
        }
    }
    // Rows of V^T beyond the singular-value count also span the kernel when
    // the matrix has fewer rows than columns.
    for i in svd.singular_values.len()..vt.nrows() {
        basis.push(CVector::new(vt.row(i).iter().map(|c| c.conj()).collect()));
    }
    basis
}

/// Closest isometry to `g` (rows ≥ cols) in Frobenius norm: U V† from the
/// thin singular value decomposition g = U Σ V†.
pub fn polar_isometry(g: &CMatrix) -> CMatrix {
    assert!(g.rows() >= g.cols(), "polar factor needs rows >= cols");
    let na = g.to_nalgebra();
    let svd = na.svd(true, true);
    let u = svd.u.as_ref().expect("left singular vectors requested");
    let vt = svd.v_t.as_ref().expect("right singular vectors requested");
    let prod = u * vt;
    CMatrix::from_nalgebra(&prod)
}

/// Haar-distributed random unitary via QR of a complex Gaussian matrix.
pub fn random_unitary(rng: &mut impl rand::Rng, dim: usize) -> CMatrix {
    use rand_distr::StandardNormal;
    let entries: Vec<Complex64> = (0..dim * dim)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    let g = CMatrix::from_entries(dim, dim, entries).expect("shape fixed above");
    // Gram-Schmidt with positive diagonal keeps the distribution Haar.
    let mut cols: Vec<CVector> = Vec::with_capacity(dim);
    for j in 0..dim {
        let mut v = CVector::new((0..dim).map(|i| g[(i, j)]).collect());
        for c in &cols {
            let overlap = c.inner(&v);
            v = v.sub(&c.scale(overlap));
        }
        cols.push(v.normalize());
    }
    columns_to_matrix(&cols)
}

/// Random complex Gaussian matrix with unit-variance entries.
pub fn random_gaussian(rng: &mut impl rand::Rng, rows: usize, cols: usize) -> CMatrix {
    use rand_distr::StandardNormal;
    let entries: Vec<Complex64> = (0..rows * cols)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re, im)
        })
        .collect();
    CMatrix::from_entries(rows, cols, entries).expect("shape fixed above")
}

/// Columns form an isometry: stacks the given vectors as matrix columns.
pub fn columns_to_matrix(cols: &[CVector]) -> CMatrix {
    let rows = cols.first().map(|c| c.dim()).unwrap_or(0);
    let mut m = CMatrix::zeros(rows, cols.len());
    for (j, c) in cols.iter().enumerate() {
        assert_eq!(c.dim(), rows, "all columns must share a dimension");
        for i in 0..rows {
            m[(i, j)] = c[i];
        }
    }
    m
}

/// Isometry defect ‖V†V − I‖_F.
pub fn isometry_defect(v: &CMatrix) -> f64 {
    let gram = v.adjoint().mul(v);
    gram.sub(&CMatrix::identity(v.cols())).norm_fro()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    const TOL: f64 = 1e-12;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> CMatrix {
        let entries = (0..rows * cols)
            .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        CMatrix::from_entries(rows, cols, entries).unwrap()
    }

    fn random_hermitian(rng: &mut impl Rng, dim: usize) -> CMatrix {
        let g = random_matrix(rng, dim, dim);
        g.add(&g.adjoint()).scale(c(0.5, 0.0))
    }

    fn random_unit(rng: &mut impl Rng, dim: usize) -> CVector {
        let v = CVector::new(
            (0..dim)
                .map(|_| c(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect(),
        );
        v.normalize()
    }

    #[test]
    fn tensor_identity_case() {
        let i2 = CMatrix::identity(2);
        assert_eq!(tensor(&i2, &i2), CMatrix::identity(4));
    }

    #[test]
    fn tensor_diagonal_case() {
        let a = CMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let b = CMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0)]);
        let expected = CMatrix::diagonal(&[c(0.0, 0.0), c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        assert_eq!(tensor(&a, &b), expected);
    }

    #[test]
    fn tensor_spectrum_is_product_of_spectra() {
        // Oracle: eigendecompose both factors and the product separately.
        let mut rng = StdRng::seed_from_u64(7);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 2);
        let (ea, _) = eigh(&a).unwrap();
        let (eb, _) = eigh(&b).unwrap();
        let mut products: Vec<f64> = ea.iter().flat_map(|x| eb.iter().map(move |y| x * y)).collect();
        products.sort_by(|x, y| y.partial_cmp(x).unwrap());
        let (et, _) = eigh(&tensor(&a, &b)).unwrap();
        for (p, t) in products.iter().zip(&et) {
            assert!((p - t).abs() < 1e-10, "spectrum mismatch: {p} vs {t}");
        }
    }

    #[test]
    fn vec_of_identity_gives_maximally_entangled() {
        let d = CMatrix::identity(2).scale(c(1.0 / 2.0_f64.sqrt(), 0.0));
        let v = vec_of(&d).unwrap();
        let expected = 1.0 / 2.0_f64.sqrt();
        assert!((v[0].re - expected).abs() < TOL);
        assert!(v[1].norm() < TOL);
        assert!(v[2].norm() < TOL);
        assert!((v[3].re - expected).abs() < TOL);
    }

    #[test]
    fn vec_rejects_non_square() {
        let m = CMatrix::zeros(2, 3);
        assert!(matches!(vec_of(&m), Err(Error::NotSquare { .. })));
    }

    #[test]
    fn vec_abc_identity() {
        let mut rng = StdRng::seed_from_u64(11);
        for _ in 0..20 {
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 2, 2);
            let cm = random_matrix(&mut rng, 2, 2);
            let lhs = vec_of(&a.mul(&b).mul(&cm)).unwrap();
            let rhs = tensor(&a, &cm.transpose()).mul_vec(&vec_of(&b).unwrap());
            assert!(lhs.sub(&rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn eigh_diagonal_case() {
        let m = CMatrix::diagonal(&[c(3.0, 0.0), c(1.0, 0.0), c(2.0, 0.0)]);
        let (vals, vecs) = eigh(&m).unwrap();
        assert!((vals[0] - 3.0).abs() < TOL);
        assert!((vals[1] - 2.0).abs() < TOL);
        assert!((vals[2] - 1.0).abs() < TOL);
        assert!((vecs[0][0].re - 1.0).abs() < 1e-10);
        assert!((vecs[1][2].re - 1.0).abs() < 1e-10);
    }

    #[test]
    fn eigh_pauli_x() {
        let x = CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap();
        let (vals, vecs) = eigh(&x).unwrap();
        assert!((vals[0] - 1.0).abs() < TOL && (vals[1] + 1.0).abs() < TOL);
        let s = 1.0 / 2.0_f64.sqrt();
        assert!((vecs[0][0].re - s).abs() < 1e-10 && (vecs[0][1].re - s).abs() < 1e-10);
        assert!((vecs[1][0].re - s).abs() < 1e-10 && (vecs[1][1].re + s).abs() < 1e-10);
    }

    #[test]
    fn eigh_rejects_non_hermitian() {
        let m = CMatrix::from_real(2, 2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert!(matches!(eigh(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn eigh_residuals_up_to_dim_64() {
        let mut rng = StdRng::seed_from_u64(3);
        for dim in [2usize, 5, 16, 64] {
            let m = random_hermitian(&mut rng, dim);
            let (vals, vecs) = eigh(&m).unwrap();
            let scale = m.norm_op();
            for (lambda, v) in vals.iter().zip(&vecs) {
                let res = m.mul_vec(v).sub(&v.scale(c(*lambda, 0.0))).norm();
                assert!(res <= 1e-9 * scale.max(1.0), "residual {res} at dim {dim}");
            }
            for i in 0..vecs.len() {
                for j in 0..vecs.len() {
                    let ip = vecs[i].inner(&vecs[j]).norm();
                    let target = if i == j { 1.0 } else { 0.0 };
                    assert!((ip - target).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn partial_trace_of_product() {
        let mut rng = StdRng::seed_from_u64(5);
        let a = random_hermitian(&mut rng, 2);
        let b = random_hermitian(&mut rng, 3);
        let t = tensor(&a, &b);
        let ta = partial_trace(&t, 2, 3, Keep::A).unwrap();
        let expected = a.scale(b.trace());
        assert!(ta.sub(&expected).norm_fro() < 1e-12);
        let tb = partial_trace(&t, 2, 3, Keep::B).unwrap();
        assert!(tb.sub(&b.scale(a.trace())).norm_fro() < 1e-12);
    }

    #[test]
    fn partial_trace_maximally_entangled() {
        let d = CMatrix::identity(2).scale(c(1.0 / 2.0_f64.sqrt(), 0.0));
        let psi = vec_of(&d).unwrap();
        let rho = CMatrix::projector(&psi);
        let ra = partial_trace(&rho, 2, 2, Keep::A).unwrap();
        assert!(ra.sub(&CMatrix::identity(2).scale(c(0.5, 0.0))).norm_fro() < TOL);
    }

    #[test]
    fn partial_trace_dimension_mismatch() {
        let m = CMatrix::identity(5);
        assert!(partial_trace(&m, 2, 3, Keep::A).is_err());
    }

    #[test]
    fn reduced_spectra_agree_via_schmidt() {
        // Oracle: Schmidt coefficients squared are the common reduced spectra.
        let mut rng = StdRng::seed_from_u64(9);
        let psi = random_unit(&mut rng, 6);
        let rho = CMatrix::projector(&psi);
        let ra = partial_trace(&rho, 2, 3, Keep::A).unwrap();
        let rb = partial_trace(&rho, 2, 3, Keep::B).unwrap();
        let (ea, _) = eigh(&ra).unwrap();
        let (eb, _) = eigh(&rb).unwrap();
        let sc = schmidt(&psi, 2, 3).unwrap();
        for (i, s) in sc.coefficients.iter().enumerate() {
            assert!((ea[i] - s * s).abs() < 1e-10);
            assert!((eb[i] - s * s).abs() < 1e-10);
        }
    }

    #[test]
    fn rho_seminorm_cases() {
        let rho = DensityMatrix::maximally_mixed(2);
        assert!(rho_seminorm(&CMatrix::zeros(2, 2), &rho).unwrap() < TOL);
        assert!((rho_seminorm(&CMatrix::identity(2), &rho).unwrap() - 1.0).abs() < TOL);
        let x = CMatrix::diagonal(&[c(1.0, 0.0), c(0.0, 0.0)]);
        let expected = 1.0 / 2.0_f64.sqrt();
        assert!((rho_seminorm(&x, &rho).unwrap() - expected).abs() < TOL);
    }

    #[test]
    fn schmidt_product_state() {
        let v = CVector::from_real(&[1.0, 0.0]).tensor(&CVector::from_real(&[0.0, 1.0]));
        let sc = schmidt(&v, 2, 2).unwrap();
        assert!((sc.coefficients[0] - 1.0).abs() < TOL);
        assert_eq!(sc.rank(SCHMIDT_RTOL), 1);
    }

    #[test]
    fn schmidt_maximally_entangled_d3() {
        let d = CMatrix::identity(3).scale(c(1.0 / 3.0_f64.sqrt(), 0.0));
        let v = vec_of(&d).unwrap();
        let sc = schmidt(&v, 3, 3).unwrap();
        for s in &sc.coefficients {
            assert!((s - 1.0 / 3.0_f64.sqrt()).abs() < TOL);
        }
    }

    #[test]
    fn schmidt_reconstructs_and_matches_svd() {
        let mut rng = StdRng::seed_from_u64(13);
        let v = random_unit(&mut rng, 4);
        let sc = schmidt(&v, 2, 2).unwrap();
        let mut rebuilt = CVector::zeros(4);
        for (i, s) in sc.coefficients.iter().enumerate() {
            rebuilt = rebuilt.add(&sc.left[i].tensor(&sc.right[i]).scale(c(*s, 0.0)));
        }
        assert!(rebuilt.sub(&v).norm() < 1e-10);
        let sum_sq: f64 = sc.coefficients.iter().map(|s| s * s).sum();
        assert!((sum_sq - 1.0).abs() < 1e-10);
    }

    #[test]
    fn density_matrix_rejects_bad_trace() {
        let m = CMatrix::identity(2);
        assert!(DensityMatrix::new(m).is_err());
    }

    proptest! {
        #[test]
        fn vec_mat_roundtrip(seed in 0u64..500) {
            let mut rng = StdRng::seed_from_u64(seed);
            let m = random_matrix(&mut rng, 3, 3);
            let back = mat_of(&vec_of(&m).unwrap()).unwrap();
            prop_assert_eq!(back, m);
        }

        #[test]
        fn seminorm_triangle_and_op_bound(seed in 0u64..200) {
            let mut rng = StdRng::seed_from_u64(seed);
            let x = random_matrix(&mut rng, 3, 3);
            let y = random_matrix(&mut rng, 3, 3);
            let psi = random_unit(&mut rng, 9);
            let rho_full = CMatrix::projector(&psi);
            let rho = DensityMatrix::new(partial_trace(&rho_full, 3, 3, Keep::A).unwrap()).unwrap();
            let nx = rho_seminorm(&x, &rho).unwrap();
            let ny = rho_seminorm(&y, &rho).unwrap();
            let nxy = rho_seminorm(&x.add(&y), &rho).unwrap();
            prop_assert!(nxy <= nx + ny + 1e-12);
            prop_assert!(nx <= x.norm_op() + 1e-12);
        }

        #[test]
        fn partial_trace_of_tensor_scales(seed in 0u64..200) {
            let mut rng = StdRng::seed_from_u64(seed);
            let a = random_matrix(&mut rng, 2, 2);
            let b = random_matrix(&mut rng, 2, 2);
            let t = tensor(&a, &b);
            let ta = partial_trace(&t, 2, 2, Keep::A).unwrap();
            prop_assert!(ta.sub(&a.scale(b.trace())).norm_fro() < 1e-12);
        }
    }
}
