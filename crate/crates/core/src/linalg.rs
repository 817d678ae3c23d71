//! Dense complex linear algebra for the small dimensions used here (d ≤ 16).
//!
//! [`ComplexMatrix`] is a plain row-major square matrix. [`HermitianMatrix`]
//! wraps one that has been checked (and symmetrized) on construction, and is
//! the input type of the eigensolver and of [`trace_norm`].

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);

/// Defects at or below this (relative to `1 + max|M|`) are symmetrized silently.
pub const HERMITIAN_SILENT_TOL: f64 = 1e-12;
/// Defects above this are rejected as non-Hermitian input.
pub const HERMITIAN_REJECT_TOL: f64 = 1e-9;

const JACOBI_TOL: f64 = 1e-14;
const JACOBI_MAX_SWEEPS: usize = 100;

/// Square complex matrix stored row-major.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<C64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    pub fn from_row_major(dim: usize, data: Vec<C64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidData("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidData(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            )));
        }
        Ok(Self { dim, data })
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = C64::new(d, 0.0);
        }
        m
    }

    pub fn from_diagonal(diag: &[C64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    /// `|u⟩⟨v|`.
    pub fn outer(u: &[C64], v: &[C64]) -> Self {
        assert_eq!(u.len(), v.len(), "outer product of unequal lengths");
        let dim = u.len();
        let mut data = Vec::with_capacity(dim * dim);
        for ui in u {
            for vj in v {
                data.push(ui * vj.conj());
            }
        }
        Self { dim, data }
    }

    /// `|k⟩⟨l|` in dimension `dim`.
    pub fn unit(dim: usize, k: usize, l: usize) -> Self {
        let mut m = Self::zeros(dim);
        m[(k, l)] = ONE;
        m
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, i)]).collect()
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    pub fn adjoint(&self) -> Self {
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            for j in 0..n {
                out[(j, i)] = self[(i, j)].conj();
            }
        }
        out
    }

    pub fn trace(&self) -> C64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|x| x * s).collect(),
        }
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a + b))
    }

    pub fn try_sub(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.zip_with(other, |a, b| a - b))
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        self.check_dim(other)?;
        Ok(self.matmul_unchecked(other))
    }

    /// `Tr(A·B)` without forming the product.
    pub fn trace_of_product(&self, other: &Self) -> Result<C64> {
        self.check_dim(other)?;
        Ok(self.trace_product_unchecked(other))
    }

    pub(crate) fn trace_product_unchecked(&self, other: &Self) -> C64 {
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * other.data[k * n + i];
            }
        }
        acc
    }

    /// `Re Tr(A·B)`, the real inner product used for Hermitian arguments.
    pub(crate) fn re_trace_product(&self, other: &Self) -> f64 {
        let n = self.dim;
        let mut acc = 0.0;
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                let b = other.data[k * n + i];
                acc += a.re * b.re - a.im * b.im;
            }
        }
        acc
    }

    pub(crate) fn matmul_unchecked(&self, other: &Self) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &other.data[k * n..(k + 1) * n];
                let dst = &mut out[i * n..(i + 1) * n];
                for (d, b) in dst.iter_mut().zip(row) {
                    *d += a * b;
                }
            }
        }
        Self { dim: n, data: out }
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `max |M_ij − conj(M_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut defect = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                defect = defect.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        defect
    }

    /// `(M + M†)/2`.
    pub fn hermitian_part(&self) -> Self {
        let n = self.dim;
        let mut out = self.clone();
        for i in 0..n {
            out[(i, i)] = C64::new(self[(i, i)].re, 0.0);
            for j in (i + 1)..n {
                let v = (self[(i, j)] + self[(j, i)].conj()) * 0.5;
                out[(i, j)] = v;
                out[(j, i)] = v.conj();
            }
        }
        out
    }

    pub fn apply(&self, v: &[C64]) -> Vec<C64> {
        let n = self.dim;
        assert_eq!(v.len(), n);
        (0..n)
            .map(|i| (0..n).map(|k| self.data[i * n + k] * v[k]).sum())
            .collect()
    }

    fn check_dim(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                got: other.dim,
            });
        }
        Ok(())
    }

    fn zip_with(&self, other: &Self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator forms panic on mismatched dimensions, like the usual dense
// matrix libraries; the `try_*` methods return `DimensionMismatch` instead.
impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: Self) -> ComplexMatrix {
        self.try_add(rhs).expect("matrix add")
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: Self) -> ComplexMatrix {
        self.try_sub(rhs).expect("matrix sub")
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: Self) -> ComplexMatrix {
        self.try_matmul(rhs).expect("matrix mul")
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for ComplexMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ComplexMatrix({}x{}) [", self.dim, self.dim)?;
        for i in 0..self.dim {
            write!(f, "  ")?;
            for j in 0..self.dim {
                let z = self[(i, j)];
                write!(f, "{:+.6}{:+.6}i  ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A complex matrix known to be Hermitian.
#[derive(Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    /// Validates Hermiticity and symmetrizes. Defects above
    /// [`HERMITIAN_SILENT_TOL`] are logged; above [`HERMITIAN_REJECT_TOL`]
    /// the input is rejected.
    pub fn new(m: ComplexMatrix) -> Result<Self> {
        let defect = m.hermiticity_defect();
        let scale = 1.0 + m.max_abs();
        if !defect.is_finite() || defect > HERMITIAN_REJECT_TOL * scale {
            return Err(Error::NonHermitianInput { defect });
        }
        if defect > HERMITIAN_SILENT_TOL * scale {
            log::warn!("symmetrizing matrix with Hermiticity defect {defect:e}");
        }
        Ok(Self(m.hermitian_part()))
    }

    /// Caller guarantees Hermiticity (e.g. sums or congruences of Hermitian
    /// matrices); the result is symmetrized to remove rounding asymmetry.
    pub(crate) fn new_unchecked(m: ComplexMatrix) -> Self {
        Self(m.hermitian_part())
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        Self(ComplexMatrix::from_real_diagonal(diag))
    }

    pub fn identity(dim: usize) -> Self {
        Self(ComplexMatrix::identity(dim))
    }

    pub fn zeros(dim: usize) -> Self {
        Self(ComplexMatrix::zeros(dim))
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn trace(&self) -> f64 {
        self.0.trace().re
    }

    /// `Tr(A·B)` for two Hermitian matrices (always real).
    pub fn inner(&self, other: &HermitianMatrix) -> Result<f64> {
        Ok(self.0.trace_of_product(&other.0)?.re)
    }

    pub fn try_sub(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(Self::new_unchecked(self.0.try_sub(&other.0)?))
    }

    pub fn try_add(&self, other: &HermitianMatrix) -> Result<HermitianMatrix> {
        Ok(Self::new_unchecked(self.0.try_add(&other.0)?))
    }

    pub fn scale(&self, s: f64) -> HermitianMatrix {
        Self(self.0.scale_real(s))
    }

    /// `U·M·U†`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<HermitianMatrix> {
        let um = u.try_matmul(&self.0)?;
        Ok(Self::new_unchecked(um.matmul_unchecked(&u.adjoint())))
    }

    pub fn eigh(&self) -> Result<EigenDecomposition> {
        jacobi_eigh(&self.0)
    }

    pub fn eigenvalues(&self) -> Result<Vec<f64>> {
        Ok(self.eigh()?.eigenvalues)
    }

    /// Applies `f` to the spectrum: `V f(Λ) V†`.
    pub fn map_spectrum(&self, f: impl Fn(f64) -> f64) -> Result<HermitianMatrix> {
        let eig = self.eigh()?;
        Ok(eig.reconstruct_with(f))
    }
}

impl fmt::Debug for HermitianMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Hermitian{:?}", self.0)
    }
}

/// Eigenvalues in ascending order with matching unit eigenvectors as columns.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl EigenDecomposition {
    /// `V f(Λ) V†`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> HermitianMatrix {
        let n = self.eigenvalues.len();
        let v = &self.eigenvectors;
        let mut out = ComplexMatrix::zeros(n);
        for (k, &lam) in self.eigenvalues.iter().enumerate() {
            let w = f(lam);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let vik = v[(i, k)] * w;
                for j in 0..n {
                    out[(i, j)] += vik * v[(j, k)].conj();
                }
            }
        }
        HermitianMatrix::new_unchecked(out)
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.reconstruct_with(|x| x)
    }

    pub fn min(&self) -> f64 {
        self.eigenvalues[0]
    }

    pub fn max(&self) -> f64 {
        *self.eigenvalues.last().expect("non-empty spectrum")
    }

    /// Eigenvector for the `k`-th (ascending) eigenvalue.
    pub fn vector(&self, k: usize) -> Vec<C64> {
        self.eigenvectors.column(k)
    }
}

/// Hermitian eigendecomposition of an arbitrary complex matrix, which is
/// validated first.
pub fn eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    HermitianMatrix::new(m.clone())?.eigh()
}

/// Sum of absolute eigenvalues.
pub fn trace_norm(m: &HermitianMatrix) -> Result<f64> {
    Ok(m.eigenvalues()?.iter().map(|l| l.abs()).sum())
}

/// Largest absolute eigenvalue.
pub fn operator_norm(m: &HermitianMatrix) -> Result<f64> {
    let eig = m.eigh()?;
    Ok(eig.min().abs().max(eig.max().abs()))
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                s += a[(i, j)].norm_sqr();
            }
        }
    }
    s.sqrt()
}

/// Cyclic Jacobi for complex Hermitian input.
///
/// Each rotation first removes the phase of the pivot `a_pq` with a diagonal
/// unitary, then applies the classical real rotation that zeroes it.
fn jacobi_eigh(m: &ComplexMatrix) -> Result<EigenDecomposition> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let scale = m.frobenius_norm();
    let target = JACOBI_TOL * scale;

    let mut sweeps = 0;
    loop {
        let off = off_diagonal_norm(&a);
        if off <= target || off == 0.0 {
            break;
        }
        if sweeps == JACOBI_MAX_SWEEPS {
            return Err(Error::EigenNotConverged { sweeps, off_norm: off });
        }
        sweeps += 1;
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let app = a[(p, p)].re;
                let aqq = a[(q, q)].re;
                // Skip pivots already negligible against the diagonal.
                if sweeps > 4 && mag < 1e-18 * (app.abs() + aqq.abs()) {
                    a[(p, q)] = ZERO;
                    a[(q, p)] = ZERO;
                    continue;
                }
                let phase = apq / mag; // e^{iφ}
                let tau = (aqq - app) / (2.0 * mag);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                // J = diag(1, e^{-iφ}) · [[c, s], [-s, c]] on the (p, q) plane.
                let jpp = C64::new(c, 0.0);
                let jpq = C64::new(s, 0.0);
                let jqp = phase.conj() * (-s);
                let jqq = phase.conj() * c;

                // A ← A·J
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = akp * jpp + akq * jqp;
                    a[(k, q)] = akp * jpq + akq * jqq;
                }
                // A ← J†·A
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
                    a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
                }
                a[(p, q)] = ZERO;
                a[(q, p)] = ZERO;
                a[(p, p)] = C64::new(a[(p, p)].re, 0.0);
                a[(q, q)] = C64::new(a[(q, q)].re, 0.0);
                // V ← V·J
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * jpp + vkq * jqp;
                    v[(k, q)] = vkp * jpq + vkq * jqq;
                }
            }
        }
    }

    // Stable ascending sort keeps ties in input order.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let eigenvalues = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut eigenvectors = ComplexMatrix::zeros(n);
    for (col, &src) in order.iter().enumerate() {
        for row in 0..n {
            eigenvectors[(row, col)] = v[(row, src)];
        }
    }
    Ok(EigenDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// Cholesky solve of a real symmetric positive-definite system, row-major.
/// Adds a small diagonal shift if the factorization breaks down.
pub(crate) fn solve_spd(matrix: &[f64], rhs: &[f64]) -> Option<Vec<f64>> {
    let n = rhs.len();
    debug_assert_eq!(matrix.len(), n * n);
    let max_diag = (0..n).map(|i| matrix[i * n + i].abs()).fold(0.0, f64::max);
    let mut shift = 0.0;
    for _ in 0..8 {
        if let Some(l) = cholesky(matrix, n, shift) {
            let mut y = vec![0.0; n];
            for i in 0..n {
                let mut s = rhs[i];
                for k in 0..i {
                    s -= l[i * n + k] * y[k];
                }
                y[i] = s / l[i * n + i];
            }
            let mut x = vec![0.0; n];
            for i in (0..n).rev() {
                let mut s = y[i];
                for k in (i + 1)..n {
                    s -= l[k * n + i] * x[k];
                }
                x[i] = s / l[i * n + i];
            }
            if x.iter().all(|v| v.is_finite()) {
                return Some(x);
            }
        }
        shift = if shift == 0.0 {
            1e-14 * max_diag.max(1e-300)
        } else {
            shift * 100.0
        };
    }
    None
}

fn cholesky(a: &[f64], n: usize, shift: f64) -> Option<Vec<f64>> {
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let mut d = a[j * n + j] + shift;
        for k in 0..j {
            d -= l[j * n + k] * l[j * n + k];
        }
        if d <= 0.0 || !d.is_finite() {
            return None;
        }
        let d = d.sqrt();
        l[j * n + j] = d;
        for i in (j + 1)..n {
            let mut s = a[i * n + j];
            for k in 0..j {
                s -= l[i * n + k] * l[j * n + k];
            }
            l[i * n + j] = s / d;
        }
    }
    Some(l)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_hermitian(n: usize, rng: &mut impl Rng) -> HermitianMatrix {
        let mut m = ComplexMatrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                m[(i, j)] = C64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
            }
        }
        HermitianMatrix::new_unchecked(m)
    }

    fn assert_close(a: &ComplexMatrix, b: &ComplexMatrix, tol: f64) {
        let d = (a - b).max_abs();
        assert!(d <= tol, "matrices differ by {d:e}\n{a:?}\n{b:?}");
    }

    #[test]
    fn identity_eigenvalues() {
        let e = HermitianMatrix::identity(3).eigh().unwrap();
        assert_eq!(e.eigenvalues, vec![1.0, 1.0, 1.0]);
    }

    #[test]
    fn diagonal_input_gives_permuted_basis() {
        let e = HermitianMatrix::from_real_diagonal(&[2.0, 0.0, 1.0]).eigh().unwrap();
        assert_eq!(e.eigenvalues, vec![0.0, 1.0, 2.0]);
        // Columns are standard basis vectors in the sorted order (1, 2, 0).
        for (col, src) in [1usize, 2, 0].into_iter().enumerate() {
            for row in 0..3 {
                let expect = if row == src { 1.0 } else { 0.0 };
                assert!((e.eigenvectors[(row, col)].norm() - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn random_reconstruction_and_unitarity() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in [1usize, 2, 3, 5, 8, 16] {
            for _ in 0..20 {
                let h = random_hermitian(n, &mut rng);
                let e = h.eigh().unwrap();
                assert!(e.eigenvalues.windows(2).all(|w| w[0] <= w[1]));
                let scale = 1.0 + h.matrix().max_abs();
                assert_close(e.reconstruct().matrix(), h.matrix(), 1e-10 * scale);
                let v = &e.eigenvectors;
                assert_close(&(&v.adjoint() * v), &ComplexMatrix::identity(n), 1e-10);
            }
        }
    }

    #[test]
    fn degenerate_spectrum() {
        // Rank-one projector in d=4: eigenvalues 0,0,0,1.
        let psi = [
            C64::new(0.5, 0.0),
            C64::new(0.0, 0.5),
            C64::new(-0.5, 0.0),
            C64::new(0.0, -0.5),
        ];
        let h = HermitianMatrix::new(ComplexMatrix::outer(&psi, &psi)).unwrap();
        let e = h.eigh().unwrap();
        for (got, want) in e.eigenvalues.iter().zip([0.0, 0.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::zeros(2);
        m[(0, 1)] = ONE;
        assert!(matches!(eigh(&m), Err(Error::NonHermitianInput { .. })));
        assert!(matches!(HermitianMatrix::new(m), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn small_defects_are_symmetrized() {
        let mut m = ComplexMatrix::identity(2);
        m[(0, 1)] = C64::new(0.25, 1e-13);
        m[(1, 0)] = C64::new(0.25, 0.0);
        let h = HermitianMatrix::new(m).unwrap();
        assert_eq!(h.matrix().hermiticity_defect(), 0.0);
    }

    #[test]
    fn trace_norm_examples() {
        assert_eq!(trace_norm(&HermitianMatrix::zeros(3)).unwrap(), 0.0);
        let a = HermitianMatrix::from_real_diagonal(&[-1.0 / 3.0, -1.0 / 3.0, 2.0 / 3.0]);
        assert!((trace_norm(&a).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        let b = HermitianMatrix::from_real_diagonal(&[-0.5, 0.0, 0.5]);
        assert!((trace_norm(&b).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn algebra_basics() {
        assert_eq!(ComplexMatrix::identity(3).trace(), C64::new(3.0, 0.0));
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut a = ComplexMatrix::zeros(4);
        let mut b = ComplexMatrix::zeros(4);
        for i in 0..4 {
            for j in 0..4 {
                a[(i, j)] = C64::new(rng.random(), rng.random());
                b[(i, j)] = C64::new(rng.random(), rng.random());
            }
        }
        assert_eq!(a.adjoint().adjoint(), a);
        let ab = (&a * &b).trace();
        let ba = (&b * &a).trace();
        assert!((ab - ba).norm() < 1e-12);
        assert!((a.trace_of_product(&b).unwrap() - ab).norm() < 1e-12);
        assert!(matches!(
            a.try_matmul(&ComplexMatrix::zeros(3)),
            Err(Error::DimensionMismatch { expected: 4, got: 3 })
        ));
    }

    #[test]
    fn spd_solver() {
        let m = [4.0, 1.0, 0.5, 1.0, 3.0, 0.2, 0.5, 0.2, 2.0];
        let x = solve_spd(&m, &[1.0, 2.0, 3.0]).unwrap();
        for i in 0..3 {
            let r: f64 = (0..3).map(|k| m[i * 3 + k] * x[k]).sum();
            assert!((r - [1.0, 2.0, 3.0][i]).abs() < 1e-12);
        }
    }
}
