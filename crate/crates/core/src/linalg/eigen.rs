//! Cyclic Jacobi eigensolver for Hermitian matrices.
//!
//! Each rotation first removes the phase of the pivot `a_pq` with a diagonal
//! unitary and then applies a real Givens rotation, so the iteration works on
//! complex entries directly without a real 2n x 2n embedding.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::error::{Error, Result};
use crate::tolerance::Tolerances;

const MAX_SWEEPS: usize = 100;
const OFF_DIAGONAL_REL: f64 = 1e-13;

/// Raw eigenpairs, eigenvalues ascending, eigenvectors orthonormal.
#[derive(Debug, Clone)]
pub struct EigenPairs {
    pub values: Vec<f64>,
    pub vectors: Vec<Vec<Complex64>>,
}

/// Spectral decomposition `M = sum_i eigenvalues[i] * projections[i]` over
/// distinct (clustered) eigenvalues.
#[derive(Debug, Clone)]
pub struct EigenDecomposition {
    pub eigenvalues: Vec<f64>,
    pub projections: Vec<ComplexMatrix>,
    pub multiplicities: Vec<usize>,
}

impl EigenPairs {
    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    /// Merges eigenvalues whose consecutive gaps are at most `cluster_tol`.
    /// The merged eigenvalue is the mean of its members and the projection
    /// is the sum of their rank-one projectors, which does not depend on the
    /// basis chosen inside a degenerate eigenspace.
    pub fn cluster(&self, cluster_tol: f64) -> EigenDecomposition {
        let n = self.dim();
        let mut eigenvalues = Vec::new();
        let mut projections = Vec::new();
        let mut multiplicities = Vec::new();
        let mut start = 0;
        while start < n {
            let mut end = start + 1;
            while end < n && self.values[end] - self.values[end - 1] <= cluster_tol {
                end += 1;
            }
            let members = start..end;
            let mean = self.values[members.clone()].iter().sum::<f64>() / (end - start) as f64;
            let mut p = ComplexMatrix::zeros(n);
            for k in members {
                let v = &self.vectors[k];
                for i in 0..n {
                    for j in 0..n {
                        p[(i, j)] += v[i] * v[j].conj();
                    }
                }
            }
            eigenvalues.push(mean);
            projections.push(p);
            multiplicities.push(end - start);
            start = end;
        }
        EigenDecomposition {
            eigenvalues,
            projections,
            multiplicities,
        }
    }

    /// `sum_k g(lambda_k) |v_k><v_k|`.
    pub fn apply_function(&self, g: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.dim();
        let mut out = ComplexMatrix::zeros(n);
        for (lambda, v) in self.values.iter().zip(&self.vectors) {
            let w = g(*lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                for j in 0..n {
                    out[(i, j)] += v[i] * v[j].conj() * w;
                }
            }
        }
        out.hermitian_part()
    }
}

impl EigenDecomposition {
    pub fn reconstruct(&self) -> ComplexMatrix {
        let n = self.projections[0].dim();
        self.eigenvalues
            .iter()
            .zip(&self.projections)
            .fold(ComplexMatrix::zeros(n), |acc, (&l, p)| {
                &acc + &p.scale_real(l)
            })
    }
}

/// Eigenpairs of a Hermitian matrix. Fails with `NotHermitian` when
/// `max |M - M*| > tol_lin * max(1, ||M||)`.
pub fn hermitian_eigenpairs(m: &ComplexMatrix, tol_lin: f64) -> Result<EigenPairs> {
    let residual = m.hermitian_residual();
    if residual > tol_lin * m.norm_max().max(1.0) {
        return Err(Error::NotHermitian { residual });
    }
    jacobi(&m.hermitian_part())
}

/// Spectral decomposition over distinct eigenvalues, clustering with
/// `tol.cluster_for(||M||)`.
pub fn hermitian_eigendecomposition(
    m: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<EigenDecomposition> {
    let pairs = hermitian_eigenpairs(m, tol.lin)?;
    Ok(pairs.cluster(tol.cluster_for(m.norm_max())))
}

/// Square root of a positive semi-definite matrix. Eigenvalues in
/// `[-tol.psd, 0)` are clipped to zero.
pub fn psd_sqrt(m: &ComplexMatrix, tol: &Tolerances) -> Result<ComplexMatrix> {
    let pairs = hermitian_eigenpairs(m, tol.lin)?;
    if pairs.min() < -tol.psd {
        return Err(Error::NotPsd {
            min_eigenvalue: pairs.min(),
        });
    }
    // eigenvalues within roundoff of zero are zero; sqrt would amplify them
    let floor = m.dim() as f64 * f64::EPSILON * m.norm_max().max(1.0);
    Ok(pairs.apply_function(|l| if l <= floor { 0.0 } else { l.sqrt() }))
}

fn jacobi(m: &ComplexMatrix) -> Result<EigenPairs> {
    let n = m.dim();
    let mut a = m.clone();
    let mut v = ComplexMatrix::identity(n);
    let threshold = OFF_DIAGONAL_REL * m.norm_frobenius();

    let mut converged = false;
    let mut off = off_diagonal_norm(&a);
    for _ in 0..MAX_SWEEPS {
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                rotate(&mut a, &mut v, p, q);
            }
        }
        off = off_diagonal_norm(&a);
    }
    if !converged && off > threshold {
        return Err(Error::ConvergenceFailure {
            sweeps: MAX_SWEEPS,
            off_diagonal: off,
        });
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    Ok(EigenPairs {
        values: order.iter().map(|&i| a[(i, i)].re).collect(),
        vectors: order.iter().map(|&i| v.column(i)).collect(),
    })
}

fn off_diagonal_norm(a: &ComplexMatrix) -> f64 {
    let n = a.dim();
    let mut acc = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                acc += a[(i, j)].norm_sqr();
            }
        }
    }
    acc.sqrt()
}

fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize) {
    let apq = a[(p, q)];
    let mag = apq.norm();
    if mag == 0.0 {
        return;
    }
    let phase = apq / mag;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let tau = (aqq - app) / (2.0 * mag);
    let t = if tau >= 0.0 {
        1.0 / (tau + tau.hypot(1.0))
    } else {
        -1.0 / (-tau + tau.hypot(1.0))
    };
    let c = 1.0 / t.hypot(1.0);
    let s = t * c;

    // U = diag(1, e^{-i phi}) * [[c, s], [-s, c]] acting on coordinates (p, q).
    let conj_phase = phase.conj();
    let u11 = Complex64::new(c, 0.0);
    let u12 = Complex64::new(s, 0.0);
    let u21 = conj_phase * -s;
    let u22 = conj_phase * c;

    let n = a.dim();
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * u11 + akq * u21;
        a[(k, q)] = akp * u12 + akq * u22;
    }
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = u11.conj() * apk + u21.conj() * aqk;
        a[(q, k)] = u12.conj() * apk + u22.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)].im = 0.0;
    a[(q, q)].im = 0.0;

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * u11 + vkq * u21;
        v[(k, q)] = vkp * u12 + vkq * u22;
    }
}
