//! Dense complex matrices and the spectral routines built on them.
//!
//! Storage is row-major: `data[i * dim + j]` holds `M[i, j]`. Dimensions are
//! expected to be small (a few dozen at most), so every routine is a plain
//! loop with no blocking or external BLAS.

mod eigen;

use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub use eigen::{
    hermitian_eigendecomposition, hermitian_eigenpairs, psd_sqrt, EigenDecomposition, EigenPairs,
};

pub const ZERO: Complex64 = Complex64::new(0.0, 0.0);
pub const ONE: Complex64 = Complex64::new(1.0, 0.0);
pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Square complex matrix.
#[derive(Clone, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
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

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        ComplexMatrix {
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

    /// Builds a matrix from row-major entries, rejecting NaN/Inf.
    pub fn from_vec(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidShape("dimension must be positive".into()));
        }
        if data.len() != dim * dim {
            return Err(Error::InvalidShape(format!(
                "expected {} entries for a {dim}x{dim} matrix, found {}",
                dim * dim,
                data.len()
            )));
        }
        if let Some(k) = data
            .iter()
            .position(|z| !z.re.is_finite() || !z.im.is_finite())
        {
            return Err(Error::NonFinite {
                row: k / dim,
                col: k % dim,
            });
        }
        Ok(ComplexMatrix { dim, data })
    }

    /// Builds a matrix from rows of complex entries.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if let Some(r) = rows.iter().position(|r| r.len() != dim) {
            return Err(Error::InvalidShape(format!(
                "row {r} has {} entries, expected {dim}",
                rows[r].len()
            )));
        }
        Self::from_vec(dim, rows.iter().flatten().copied().collect())
    }

    /// Builds a matrix from real row-major entries.
    pub fn from_real(dim: usize, data: &[f64]) -> Result<Self> {
        Self::from_vec(dim, data.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        ComplexMatrix { dim, data }
    }

    pub fn diag_real(values: &[f64]) -> Self {
        let mut m = Self::zeros(values.len());
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = Complex64::new(v, 0.0);
        }
        m
    }

    /// The rank-one operator `|u><v|`.
    pub fn outer(u: &[Complex64], v: &[Complex64]) -> Self {
        assert_eq!(
            u.len(),
            v.len(),
            "outer product of vectors with different lengths"
        );
        Self::from_fn(u.len(), |i, j| u[i] * v[j].conj())
    }

    /// The projector `|u><u| / <u,u>`.
    pub fn projector(u: &[Complex64]) -> Self {
        let norm_sq: f64 = u.iter().map(|z| z.norm_sqr()).sum();
        Self::outer(u, u).scale_real(1.0 / norm_sq)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn column(&self, j: usize) -> Vec<Complex64> {
        (0..self.dim).map(|i| self[(i, j)]).collect()
    }

    fn check_dims(&self, other: &ComplexMatrix) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found: other.dim,
            });
        }
        Ok(())
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn mul(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(self.mul_unchecked(rhs))
    }

    pub fn add(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a + b))
    }

    pub fn sub(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(self.zip_with(rhs, |a, b| a - b))
    }

    pub fn scale(&self, alpha: Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    pub fn scale_real(&self, alpha: f64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * alpha).collect(),
        }
    }

    /// `AB - BA`.
    pub fn commutator(&self, rhs: &ComplexMatrix) -> Result<Self> {
        self.check_dims(rhs)?;
        Ok(self
            .mul_unchecked(rhs)
            .zip_with(&rhs.mul_unchecked(self), |a, b| a - b))
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    /// `tr(self * rhs)` without forming the product.
    pub fn trace_product(&self, rhs: &ComplexMatrix) -> Result<Complex64> {
        self.check_dims(rhs)?;
        let n = self.dim;
        let mut acc = ZERO;
        for i in 0..n {
            for k in 0..n {
                acc += self.data[i * n + k] * rhs.data[k * n + i];
            }
        }
        Ok(acc)
    }

    /// Max absolute entry.
    pub fn norm_max(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn norm_frobenius(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Max entrywise distance to `other`.
    pub fn max_abs_diff(&self, other: &ComplexMatrix) -> f64 {
        assert_eq!(self.dim, other.dim, "max_abs_diff: dimension mismatch");
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    /// `max |M - M*|` over entries.
    pub fn hermitian_residual(&self) -> f64 {
        let n = self.dim;
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Hermitian check scaled by `max(1, ||M||)`.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermitian_residual() <= tol * self.norm_max().max(1.0)
    }

    /// `(M + M*) / 2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.dim, |i, j| (self[(i, j)] + self[(j, i)].conj()) * 0.5)
    }

    /// `U M U*`.
    pub fn conjugate_by(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(u.mul(self)?.mul_unchecked(&u.adjoint()))
    }

    /// `U* M U`.
    pub fn conjugate_by_adjoint(&self, u: &ComplexMatrix) -> Result<Self> {
        Ok(u.adjoint().mul(self)?.mul_unchecked(u))
    }

    fn mul_unchecked(&self, rhs: &ComplexMatrix) -> Self {
        let n = self.dim;
        let mut out = vec![ZERO; n * n];
        for i in 0..n {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let row = &rhs.data[k * n..(k + 1) * n];
                for (o, &b) in out[i * n..(i + 1) * n].iter_mut().zip(row) {
                    *o += a * b;
                }
            }
        }
        ComplexMatrix { dim: n, data: out }
    }

    fn zip_with(&self, rhs: &ComplexMatrix, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        ComplexMatrix {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

// Operator forms panic on a dimension mismatch; the `mul`/`add`/`sub`
// methods return `Error::DimensionMismatch` instead.

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix product: dimension mismatch");
        self.mul_unchecked(rhs)
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix sum: dimension mismatch");
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.dim, rhs.dim, "matrix difference: dimension mismatch");
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &ComplexMatrix {
    type Output = ComplexMatrix;
    fn neg(self) -> ComplexMatrix {
        self.scale_real(-1.0)
    }
}

/// Sum of a nonempty family of equally sized matrices.
pub fn sum<M: std::borrow::Borrow<ComplexMatrix>>(
    dim: usize,
    items: impl IntoIterator<Item = M>,
) -> ComplexMatrix {
    items
        .into_iter()
        .fold(ComplexMatrix::zeros(dim), |acc, m| &acc + m.borrow())
}

pub fn pauli_x() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[0.0, 1.0, 1.0, 0.0]).unwrap()
}

/// `[[0, -i], [i, 0]]`, so that `σx σy = i σz`.
pub fn pauli_y() -> ComplexMatrix {
    ComplexMatrix::from_vec(2, vec![ZERO, -I, I, ZERO]).unwrap()
}

pub fn pauli_z() -> ComplexMatrix {
    ComplexMatrix::from_real(2, &[1.0, 0.0, 0.0, -1.0]).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn adjoint_examples() {
        assert_eq!(
            ComplexMatrix::identity(2).adjoint(),
            ComplexMatrix::identity(2)
        );
        // [[0, i], [-i, 0]] is Hermitian
        let s = ComplexMatrix::from_vec(2, vec![ZERO, I, -I, ZERO]).unwrap();
        assert_eq!(s.adjoint(), s);
        let n = ComplexMatrix::from_real(2, &[0.0, 1.0, 0.0, 0.0]).unwrap();
        assert_eq!(
            n.adjoint(),
            ComplexMatrix::from_real(2, &[0.0, 0.0, 1.0, 0.0]).unwrap()
        );
        let m =
            ComplexMatrix::from_vec(2, vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.0), c(0.0, 7.0)])
                .unwrap();
        assert_eq!(m.adjoint().adjoint(), m);
    }

    #[test]
    fn pauli_algebra() {
        let xy = pauli_x().mul(&pauli_y()).unwrap();
        assert_eq!(xy, pauli_z().scale(I));
        let m =
            ComplexMatrix::from_vec(2, vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.0), c(0.0, 7.0)])
                .unwrap();
        assert_eq!(m.mul(&ComplexMatrix::identity(2)).unwrap(), m);
    }

    #[test]
    fn product_of_rank_one_projectors() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let phi = [ZERO, ONE];
        let psi = [c(s, 0.0), c(s, 0.0)];
        let a = ComplexMatrix::outer(&phi, &phi);
        let b = ComplexMatrix::outer(&psi, &psi);
        let expected = ComplexMatrix::outer(&phi, &psi).scale_real(s);
        assert!(a.mul(&b).unwrap().max_abs_diff(&expected) < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let a = ComplexMatrix::identity(2);
        let b = ComplexMatrix::identity(3);
        assert_eq!(
            a.mul(&b),
            Err(Error::DimensionMismatch {
                expected: 2,
                found: 3
            })
        );
        assert!(a.add(&b).is_err());
        assert!(a.sub(&b).is_err());
        assert!(a.commutator(&b).is_err());
    }

    #[test]
    fn trace_examples() {
        assert_eq!(ComplexMatrix::identity(3).trace(), c(3.0, 0.0));
        assert_eq!(pauli_z().trace(), ZERO);
        let m =
            ComplexMatrix::from_vec(2, vec![c(1.0, 2.0), c(3.0, -1.0), c(0.5, 0.0), c(0.0, 7.0)])
                .unwrap();
        assert_eq!(m.adjoint().trace(), m.trace().conj());
        let p = pauli_x();
        assert_eq!(m.trace_product(&p).unwrap(), m.mul(&p).unwrap().trace());
    }

    #[test]
    fn commutator_examples() {
        let a = ComplexMatrix::from_vec(
            2,
            vec![c(1.0, 0.0), c(0.3, 0.2), c(0.3, -0.2), c(-2.0, 0.0)],
        )
        .unwrap();
        assert_eq!(a.commutator(&a).unwrap().norm_max(), 0.0);
        let d1 = ComplexMatrix::diag_real(&[1.0, 2.0, 3.0]);
        let d2 = ComplexMatrix::diag_real(&[-1.0, 0.5, 4.0]);
        assert_eq!(d1.commutator(&d2).unwrap().norm_max(), 0.0);

        // [2A - I, 2B - I] = 4[A, B]
        let id = ComplexMatrix::identity(2);
        let a1 = (&id + &pauli_x().scale_real(0.6)).scale_real(0.5);
        let b1 = (&id + &pauli_y().scale_real(0.6)).scale_real(0.5);
        let lhs = (&a1.scale_real(2.0) - &id)
            .commutator(&(&b1.scale_real(2.0) - &id))
            .unwrap();
        let rhs = a1.commutator(&b1).unwrap().scale_real(4.0);
        assert!(lhs.max_abs_diff(&rhs) < 1e-15);
        let ba = b1.commutator(&a1).unwrap();
        assert!((&a1.commutator(&b1).unwrap() + &ba).norm_max() < 1e-15);
    }

    #[test]
    fn rejects_bad_shapes_and_non_finite() {
        assert!(ComplexMatrix::from_real(2, &[1.0, 2.0, 3.0]).is_err());
        assert!(ComplexMatrix::from_real(0, &[]).is_err());
        assert_eq!(
            ComplexMatrix::from_real(2, &[1.0, f64::NAN, 0.0, 1.0]),
            Err(Error::NonFinite { row: 0, col: 1 })
        );
        assert!(ComplexMatrix::from_rows(&[vec![ONE, ZERO], vec![ONE]]).is_err());
    }
}
