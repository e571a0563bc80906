//! Density operators, the state-dependent sesquilinear form, faithfulness
//! and the qubit Bloch parametrization.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{hermitian_eigenpairs, ComplexMatrix, EigenPairs, I, ONE};
use crate::tolerance::Tolerances;

/// A validated state: Hermitian, positive semi-definite, unit trace.
#[derive(Debug, Clone)]
pub struct DensityOperator {
    matrix: ComplexMatrix,
    eigen: EigenPairs,
}

impl DensityOperator {
    pub fn new(matrix: ComplexMatrix) -> Result<Self> {
        Self::with_tolerances(matrix, &Tolerances::default())
    }

    pub fn with_tolerances(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let residual = matrix.hermitian_residual();
        if residual > tol.lin * matrix.norm_max().max(1.0) {
            return Err(Error::NotHermitian { residual });
        }
        let trace = matrix.trace().re;
        if (trace - 1.0).abs() > tol.lin {
            return Err(Error::TraceNotOne {
                trace,
                violation: (trace - 1.0).abs(),
            });
        }
        let eigen = hermitian_eigenpairs(&matrix, tol.lin)?;
        if eigen.min() < -tol.psd {
            return Err(Error::NotPsd {
                min_eigenvalue: eigen.min(),
            });
        }
        Ok(DensityOperator {
            matrix: matrix.hermitian_part(),
            eigen,
        })
    }

    /// Normalizes a subnormalized post-measurement output `M / tr(M)`;
    /// `None` when the trace is not above `tol.lin`.
    pub fn normalized(matrix: &ComplexMatrix, tol: &Tolerances) -> Option<Result<Self>> {
        let trace = matrix.trace().re;
        if trace <= tol.lin {
            return None;
        }
        Some(Self::with_tolerances(matrix.scale_real(1.0 / trace), tol))
    }

    /// `I / d`.
    pub fn maximally_mixed(dim: usize) -> Self {
        assert!(dim >= 1, "state dimension must be positive");
        let p = 1.0 / dim as f64;
        let matrix = ComplexMatrix::identity(dim).scale_real(p);
        let eigen = EigenPairs {
            values: vec![p; dim],
            vectors: (0..dim)
                .map(|k| {
                    let mut e = vec![Complex64::new(0.0, 0.0); dim];
                    e[k] = ONE;
                    e
                })
                .collect(),
        };
        DensityOperator { matrix, eigen }
    }

    /// The pure state `|psi><psi|` for a nonzero vector (normalized here).
    pub fn pure(psi: &[Complex64]) -> Result<Self> {
        Self::new(ComplexMatrix::projector(psi))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    /// Ascending spectrum.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigen.values
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigen.min()
    }

    /// Strictly positive spectrum, with `tol` as the numerical cut.
    pub fn is_faithful(&self, tol: f64) -> bool {
        self.min_eigenvalue() > tol
    }

    /// A nonzero `C` with `<C, C>_rho ~ 0` when the state is not faithful:
    /// the projector onto an eigenvector of the smallest eigenvalue.
    pub fn null_witness(&self, tol: f64) -> Option<ComplexMatrix> {
        if self.is_faithful(tol) {
            return None;
        }
        Some(ComplexMatrix::projector(&self.eigen.vectors[0]))
    }

    /// `tr(rho A)`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<Complex64> {
        self.matrix.trace_product(a)
    }

    /// `<C, D>_rho = tr(rho C* D)`.
    pub fn state_form(&self, c: &ComplexMatrix, d: &ComplexMatrix) -> Result<Complex64> {
        let cd = c.adjoint().mul(d)?;
        self.matrix.trace_product(&cd)
    }
}

/// A point of the closed unit ball parametrizing qubit states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlochVector {
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
}

impl BlochVector {
    pub fn new(r1: f64, r2: f64, r3: f64) -> Result<Self> {
        Self::with_tolerance(r1, r2, r3, crate::tolerance::DEFAULT_LIN)
    }

    pub fn with_tolerance(r1: f64, r2: f64, r3: f64, tol_lin: f64) -> Result<Self> {
        let r = BlochVector { r1, r2, r3 };
        let norm = r.norm();
        if !norm.is_finite() || norm > 1.0 + tol_lin {
            return Err(Error::OutsideBlochBall { norm });
        }
        Ok(r)
    }

    pub fn norm(&self) -> f64 {
        (self.r1 * self.r1 + self.r2 * self.r2 + self.r3 * self.r3).sqrt()
    }

    /// `(I + r . sigma) / 2 = 1/2 [[1 + r3, r1 - i r2], [r1 + i r2, 1 - r3]]`.
    pub fn matrix(&self) -> ComplexMatrix {
        let h = 0.5;
        ComplexMatrix::from_vec(
            2,
            vec![
                Complex64::new(h * (1.0 + self.r3), 0.0),
                (Complex64::new(self.r1, 0.0) - I * self.r2) * h,
                (Complex64::new(self.r1, 0.0) + I * self.r2) * h,
                Complex64::new(h * (1.0 - self.r3), 0.0),
            ],
        )
        .expect("finite Bloch components")
    }
}

/// Qubit state with Bloch vector `r`.
pub fn bloch_state(r: &BlochVector) -> Result<DensityOperator> {
    DensityOperator::new(r.matrix())
}
