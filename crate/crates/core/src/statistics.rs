//! State-dependent statistics and the uncertainty principle.
//!
//! Every function accepts either a Hermitian matrix or a [`RealObservable`];
//! an observable is replaced by its stochastic operator `sum_x x A_x`, so
//! both go through one code path.

use std::borrow::Cow;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::ComplexMatrix;
use crate::observables::RealObservable;
use crate::states::DensityOperator;
use crate::tolerance::Tolerances;

/// Something with a (Hermitian) operator to take statistics of.
pub trait AsOperator {
    fn operator(&self) -> Cow<'_, ComplexMatrix>;
}

impl AsOperator for ComplexMatrix {
    fn operator(&self) -> Cow<'_, ComplexMatrix> {
        Cow::Borrowed(self)
    }
}

impl AsOperator for RealObservable {
    fn operator(&self) -> Cow<'_, ComplexMatrix> {
        Cow::Owned(self.stochastic_operator())
    }
}

impl<T: AsOperator + ?Sized> AsOperator for &T {
    fn operator(&self) -> Cow<'_, ComplexMatrix> {
        (**self).operator()
    }
}

fn check_dim(rho: &DensityOperator, a: &ComplexMatrix) -> Result<()> {
    if rho.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: a.dim(),
        });
    }
    Ok(())
}

fn average_op(rho: &DensityOperator, a: &ComplexMatrix) -> Result<f64> {
    check_dim(rho, a)?;
    Ok(rho.expectation(a)?.re)
}

fn deviation_op(rho: &DensityOperator, a: &ComplexMatrix) -> Result<ComplexMatrix> {
    let mean = average_op(rho, a)?;
    Ok(a - &ComplexMatrix::identity(a.dim()).scale_real(mean))
}

fn correlation_op(
    rho: &DensityOperator,
    a: &ComplexMatrix,
    b: &ComplexMatrix,
) -> Result<Complex64> {
    let da = deviation_op(rho, a)?;
    let db = deviation_op(rho, b)?;
    rho.matrix().trace_product(&(&da * &db))
}

/// `<A>_rho = tr(rho A)`.
pub fn average(rho: &DensityOperator, a: &impl AsOperator) -> Result<f64> {
    average_op(rho, &a.operator())
}

/// `D_rho(A) = A - <A>_rho I`.
pub fn deviation(rho: &DensityOperator, a: &impl AsOperator) -> Result<ComplexMatrix> {
    deviation_op(rho, &a.operator())
}

/// `Cor_rho(A, B) = tr(rho D_rho(A) D_rho(B))`.
pub fn correlation(
    rho: &DensityOperator,
    a: &impl AsOperator,
    b: &impl AsOperator,
) -> Result<Complex64> {
    correlation_op(rho, &a.operator(), &b.operator())
}

/// `Re Cor_rho(A, B)`.
pub fn covariance(rho: &DensityOperator, a: &impl AsOperator, b: &impl AsOperator) -> Result<f64> {
    Ok(correlation(rho, a, b)?.re)
}

/// `Cor_rho(A, A)`, real for Hermitian `A`.
pub fn variance(rho: &DensityOperator, a: &impl AsOperator) -> Result<f64> {
    let a = a.operator();
    Ok(correlation_op(rho, &a, &a)?.re)
}

/// `tr(rho [A, B])`, purely imaginary for Hermitian `A`, `B`.
pub fn commutator_expectation(
    rho: &DensityOperator,
    a: &impl AsOperator,
    b: &impl AsOperator,
) -> Result<Complex64> {
    let (a, b) = (a.operator(), b.operator());
    check_dim(rho, &a)?;
    check_dim(rho, &b)?;
    rho.expectation(&a.commutator(&b)?)
}

/// The four terms of the uncertainty principle for one `(rho, A, B)`.
///
/// `commutator_term + covariance_sq = correlation_sq` is an identity and
/// `correlation_sq <= variance_product` an inequality; the residual and
/// slack fields measure both.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UncertaintyReport {
    /// `|tr(rho [A, B])|^2 / 4`
    pub commutator_term: f64,
    /// `Delta_rho(A, B)^2`
    pub covariance_sq: f64,
    /// `|Cor_rho(A, B)|^2`
    pub correlation_sq: f64,
    /// `Delta_rho(A) Delta_rho(B)`
    pub variance_product: f64,
    pub equation_residual: f64,
    pub inequality_slack: f64,
    pub tolerance: f64,
}

impl UncertaintyReport {
    pub fn scale(&self) -> f64 {
        self.correlation_sq.max(1.0)
    }

    pub fn equation_holds(&self) -> bool {
        self.equation_residual.abs() <= self.tolerance * self.scale()
    }

    pub fn inequality_holds(&self) -> bool {
        self.inequality_slack >= -self.tolerance * self.scale()
    }

    /// `Delta(A) Delta(B) - |tr(rho [A, B])|^2 / 4`, the slack of the
    /// classical Robertson-Heisenberg bound.
    pub fn robertson_slack(&self) -> f64 {
        self.variance_product - self.commutator_term
    }

    /// The uncertainty inequality is tight.
    pub fn is_equality(&self) -> bool {
        self.inequality_slack.abs() <= self.tolerance * self.scale()
    }
}

/// Computes all four terms through independent routes: the commutator term
/// from `tr(rho [A, B])`, the others from `Cor_rho` and the variances.
pub fn uncertainty_report(
    rho: &DensityOperator,
    a: &impl AsOperator,
    b: &impl AsOperator,
    tol: &Tolerances,
) -> Result<UncertaintyReport> {
    let (a, b) = (a.operator(), b.operator());
    let comm = commutator_expectation(rho, &*a, &*b)?;
    let cor = correlation_op(rho, &a, &b)?;
    let var_a = correlation_op(rho, &a, &a)?.re;
    let var_b = correlation_op(rho, &b, &b)?.re;

    let commutator_term = 0.25 * comm.norm_sqr();
    let covariance_sq = cor.re * cor.re;
    let correlation_sq = cor.norm_sqr();
    let variance_product = var_a * var_b;
    Ok(UncertaintyReport {
        commutator_term,
        covariance_sq,
        correlation_sq,
        variance_product,
        equation_residual: commutator_term + covariance_sq - correlation_sq,
        inequality_slack: variance_product - correlation_sq,
        tolerance: tol.stat,
    })
}

/// Least-squares fit of `B ~ alpha A + beta I` in the Hilbert-Schmidt inner
/// product.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearFit {
    pub alpha: f64,
    pub beta: f64,
    /// `||B - alpha A - beta I||` (max entry).
    pub residual: f64,
    /// Whether the residual is within `lin * max(1, ||B||)`.
    pub related: bool,
}

/// `alpha`, `beta` and residual of an exact linear relation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LinearRelation {
    pub alpha: f64,
    pub beta: f64,
    pub residual: f64,
}

impl LinearFit {
    pub fn relation(&self) -> Option<LinearRelation> {
        self.related.then_some(LinearRelation {
            alpha: self.alpha,
            beta: self.beta,
            residual: self.residual,
        })
    }
}

/// Decides whether `B = alpha A + beta I` for real `alpha`, `beta`.
pub fn linear_relation(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> Result<LinearFit> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let d = a.dim() as f64;
    let id = ComplexMatrix::identity(a.dim());
    let tr_a = a.trace().re;
    let tr_b = b.trace().re;
    let a0 = a - &id.scale_real(tr_a / d);
    let b0 = b - &id.scale_real(tr_b / d);
    let threshold = tol.lin * b.norm_max().max(1.0);

    if a0.norm_max() <= tol.lin {
        let residual = b0.norm_max();
        return Ok(LinearFit {
            alpha: 0.0,
            beta: tr_b / d,
            residual,
            related: residual <= threshold,
        });
    }
    let alpha = a0.trace_product(&b0)?.re / a0.trace_product(&a0)?.re;
    let beta = (tr_b - alpha * tr_a) / d;
    let fitted = &a.scale_real(alpha) + &id.scale_real(beta);
    let residual = b.max_abs_diff(&fitted);
    Ok(LinearFit {
        alpha,
        beta,
        residual,
        related: residual <= threshold,
    })
}

/// Raw facts about when the uncertainty inequality is tight.
///
/// For faithful states the inequality is tight exactly when the deviations
/// of `A` and `B` are linearly dependent, that is when `B = alpha A + beta I`
/// or `A = alpha B + beta I`; the second form covers `A` a multiple of `I`.
/// `consistent` is vacuously true for non-faithful states.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EqualityDiagnosis {
    pub faithful: bool,
    pub min_eigenvalue: f64,
    /// `B ~ alpha A + beta I`.
    pub fit: LinearFit,
    /// `A ~ alpha B + beta I`.
    pub reverse_fit: LinearFit,
    pub report: UncertaintyReport,
    /// `correlation_sq = variance_product` within tolerance.
    pub inequality_is_equality: bool,
    /// `covariance_sq = correlation_sq = variance_product` within tolerance.
    pub three_way_equality: bool,
    pub consistent: bool,
}

impl EqualityDiagnosis {
    pub fn related(&self) -> bool {
        self.fit.related || self.reverse_fit.related
    }
}

pub fn equality_diagnosis(
    rho: &DensityOperator,
    a: &impl AsOperator,
    b: &impl AsOperator,
    tol: &Tolerances,
) -> Result<EqualityDiagnosis> {
    let (a, b) = (a.operator(), b.operator());
    let report = uncertainty_report(rho, &*a, &*b, tol)?;
    let fit = linear_relation(&a, &b, tol)?;
    let reverse_fit = linear_relation(&b, &a, tol)?;
    let faithful = rho.is_faithful(tol.psd);
    let bound = tol.stat * report.scale();
    let inequality_is_equality = report.is_equality();
    let three_way_equality =
        inequality_is_equality && (report.covariance_sq - report.correlation_sq).abs() <= bound;
    Ok(EqualityDiagnosis {
        faithful,
        min_eigenvalue: rho.min_eigenvalue(),
        fit,
        reverse_fit,
        report,
        inequality_is_equality,
        three_way_equality,
        consistent: !faithful || inequality_is_equality == (fit.related || reverse_fit.related),
    })
}
