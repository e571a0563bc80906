//! Effects, real-valued and general observables, sharp versions, conjugates,
//! joint observables and coarse graining.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigendecomposition, hermitian_eigenpairs, ComplexMatrix};
use crate::states::DensityOperator;
use crate::tolerance::Tolerances;

/// An outcome of a measurement: a real number or an opaque label.
#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Real(f64),
    Label(String),
}

impl Outcome {
    pub fn as_real(&self) -> Option<f64> {
        match *self {
            Outcome::Real(x) => Some(x),
            Outcome::Label(_) => None,
        }
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::Real(x) => write!(f, "{x}"),
            Outcome::Label(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Outcome {
    fn from(x: f64) -> Self {
        Outcome::Real(x)
    }
}

impl From<&str> for Outcome {
    fn from(s: &str) -> Self {
        Outcome::Label(s.to_owned())
    }
}

/// Maps `-0.0` to `0.0` so that outcome equality is bitwise.
pub(crate) fn canonical(x: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else {
        x
    }
}

/// A Hermitian operator with `0 <= C <= I`.
#[derive(Debug, Clone, PartialEq)]
pub struct Effect(ComplexMatrix);

impl Effect {
    pub fn new(matrix: ComplexMatrix, tol: &Tolerances) -> Result<Self> {
        let violation = effect_violation(&matrix, tol)?;
        if violation > 0.0 {
            return Err(Error::NotAnEffect {
                index: 0,
                violation,
            });
        }
        Ok(Effect(matrix.hermitian_part()))
    }

    pub fn matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }
}

/// Amount by which `matrix` escapes `[-psd, 1 + psd]` (zero when it does
/// not). A non-Hermitian input reports its Hermiticity residual.
fn effect_violation(matrix: &ComplexMatrix, tol: &Tolerances) -> Result<f64> {
    let pairs = match hermitian_eigenpairs(matrix, tol.lin) {
        Ok(p) => p,
        Err(Error::NotHermitian { residual }) => return Ok(residual),
        Err(e) => return Err(e),
    };
    let below = -pairs.min() - tol.psd;
    let above = pairs.max() - 1.0 - tol.psd;
    Ok(below.max(above).max(0.0))
}

fn completeness_residual(dim: usize, effects: &[Effect]) -> f64 {
    linalg::sum(dim, effects.iter().map(Effect::matrix)).max_abs_diff(&ComplexMatrix::identity(dim))
}

fn validate_effects(matrices: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Vec<Effect>> {
    let dim = matrices.first().ok_or(Error::Empty)?.dim();
    let mut effects = Vec::with_capacity(matrices.len());
    for (index, m) in matrices.into_iter().enumerate() {
        if m.dim() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        let effect = Effect::new(m, tol).map_err(|e| match e {
            Error::NotAnEffect { violation, .. } => Error::NotAnEffect { index, violation },
            other => other,
        })?;
        effects.push(effect);
    }
    let residual = completeness_residual(dim, &effects);
    if residual > tol.lin {
        return Err(Error::CompletenessViolation { residual });
    }
    Ok(effects)
}

/// Common view of observables with real or labelled outcomes.
pub trait Povm {
    fn dim(&self) -> usize;
    fn len(&self) -> usize;
    fn outcome(&self, i: usize) -> Outcome;
    fn effect(&self, i: usize) -> &ComplexMatrix;

    /// Same outcomes with replaced effects, without validation.
    fn with_effects_unchecked(&self, effects: Vec<ComplexMatrix>) -> Self
    where
        Self: Sized;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// `tr(rho A_x)` for every outcome.
    fn probabilities(&self, rho: &DensityOperator) -> Result<Vec<f64>> {
        (0..self.len())
            .map(|i| rho.expectation(self.effect(i)).map(|z| z.re))
            .collect()
    }

    /// `max |sum_x A_x - I|`.
    fn completeness_residual(&self) -> f64 {
        let dim = self.dim();
        linalg::sum(dim, (0..self.len()).map(|i| self.effect(i)))
            .max_abs_diff(&ComplexMatrix::identity(dim))
    }
}

/// A finite POVM with distinct real outcomes, stored in ascending outcome
/// order.
#[derive(Debug, Clone, PartialEq)]
pub struct RealObservable {
    outcomes: Vec<f64>,
    effects: Vec<Effect>,
}

impl RealObservable {
    pub fn new(pairs: Vec<(f64, ComplexMatrix)>) -> Result<Self> {
        Self::with_tolerances(pairs, &Tolerances::default())
    }

    pub fn with_tolerances(pairs: Vec<(f64, ComplexMatrix)>, tol: &Tolerances) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty);
        }
        let (outcomes, matrices): (Vec<f64>, Vec<ComplexMatrix>) = pairs.into_iter().unzip();
        if let Some(x) = outcomes.iter().find(|x| !x.is_finite()) {
            return Err(Error::InvalidArgument(format!("outcome {x} is not finite")));
        }
        let outcomes: Vec<f64> = outcomes.into_iter().map(canonical).collect();
        let mut sorted = outcomes.clone();
        sorted.sort_by(f64::total_cmp);
        if let Some(w) = sorted.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::DuplicateOutcome(w[0].to_string()));
        }
        let effects = validate_effects(matrices, tol)?;
        Ok(Self::sorted(outcomes.into_iter().zip(effects).collect()))
    }

    /// Assembles an observable from outcomes already known to be distinct
    /// and effects already known to be valid.
    pub(crate) fn from_parts_unchecked(pairs: Vec<(f64, ComplexMatrix)>) -> Self {
        Self::sorted(
            pairs
                .into_iter()
                .map(|(x, m)| (canonical(x), Effect(m)))
                .collect(),
        )
    }

    fn sorted(mut pairs: Vec<(f64, Effect)>) -> Self {
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (outcomes, effects) = pairs.into_iter().unzip();
        RealObservable { outcomes, effects }
    }

    /// The one-outcome observable `{(c, I)}`.
    pub fn constant(value: f64, dim: usize) -> Self {
        Self::from_parts_unchecked(vec![(value, ComplexMatrix::identity(dim))])
    }

    /// Dichotomic observable `{(1, A1), (-1, I - A1)}`.
    pub fn dichotomic(a1: ComplexMatrix) -> Result<Self> {
        let rest = &ComplexMatrix::identity(a1.dim()) - &a1;
        Self::new(vec![(1.0, a1), (-1.0, rest)])
    }

    pub fn outcomes(&self) -> &[f64] {
        &self.outcomes
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn iter(&self) -> impl Iterator<Item = (f64, &ComplexMatrix)> {
        self.outcomes
            .iter()
            .copied()
            .zip(self.effects.iter().map(Effect::matrix))
    }

    /// `sum_x x A_x`.
    pub fn stochastic_operator(&self) -> ComplexMatrix {
        let dim = Povm::dim(self);
        self.iter()
            .fold(ComplexMatrix::zeros(dim), |acc, (x, e)| {
                &acc + &e.scale_real(x)
            })
            .hermitian_part()
    }

    /// Every effect is a projection (`||A_x^2 - A_x|| <= lin`).
    pub fn is_sharp(&self, tol: &Tolerances) -> bool {
        self.effects.iter().all(|e| {
            let m = e.matrix();
            (m * m).max_abs_diff(m) <= tol.lin
        })
    }

    /// Effects commute pairwise.
    pub fn is_commutative(&self, tol: &Tolerances) -> bool {
        let n = self.effects.len();
        (0..n).all(|i| {
            (i + 1..n).all(|j| {
                let a = self.effects[i].matrix();
                let b = self.effects[j].matrix();
                commutator_within(a, b, tol).is_ok()
            })
        })
    }

    /// Projection-valued observable from the spectral decomposition of the
    /// stochastic operator: outcomes are its distinct eigenvalues.
    pub fn sharp_version(&self, tol: &Tolerances) -> Result<RealObservable> {
        let decomposition = hermitian_eigendecomposition(&self.stochastic_operator(), tol)?;
        Ok(Self::from_parts_unchecked(
            decomposition
                .eigenvalues
                .into_iter()
                .zip(decomposition.projections)
                .collect(),
        ))
    }

    /// The conjugate observable `B_x = sum_i P_i A_x P_i`, where `P_i` are
    /// the sharp version's projections.
    pub fn conjugate(&self, tol: &Tolerances) -> Result<RealObservable> {
        let sharp = self.sharp_version(tol)?;
        let pairs = self
            .iter()
            .map(|(x, a)| {
                let b = linalg::sum(
                    a.dim(),
                    sharp.effects.iter().map(|p| p.matrix() * &(a * p.matrix())),
                );
                (x, b.hermitian_part())
            })
            .collect();
        Ok(Self::from_parts_unchecked(pairs))
    }

    /// Joint observable `C_{(i, x)} = P_i A_x P_i` of the conjugate and the
    /// sharp version. Keys are `(index into sharp outcomes, outcome of A)`.
    pub fn conjugate_joint(&self, tol: &Tolerances) -> Result<Vec<((usize, f64), ComplexMatrix)>> {
        let sharp = self.sharp_version(tol)?;
        let mut joint = Vec::with_capacity(sharp.effects.len() * self.effects.len());
        for (i, p) in sharp.effects.iter().enumerate() {
            for (x, a) in self.iter() {
                let c = p.matrix() * &(a * p.matrix());
                joint.push(((i, x), c.hermitian_part()));
            }
        }
        Ok(joint)
    }

    /// Joint observable `C_{(x, y)} = A_x B_y` for observables whose effects
    /// commute pairwise.
    pub fn commuting_joint(
        &self,
        other: &RealObservable,
        tol: &Tolerances,
    ) -> Result<Vec<((f64, f64), ComplexMatrix)>> {
        if Povm::dim(self) != Povm::dim(other) {
            return Err(Error::DimensionMismatch {
                expected: Povm::dim(self),
                found: Povm::dim(other),
            });
        }
        let mut joint = Vec::with_capacity(self.effects.len() * other.effects.len());
        for (x, a) in self.iter() {
            for (y, b) in other.iter() {
                commutator_within(a, b, tol).map_err(|norm| Error::NotCommuting { x, y, norm })?;
                joint.push(((x, y), (a * b).hermitian_part()));
            }
        }
        Ok(joint)
    }

    /// `f(A)_z = sum { A_x : f(x) = z }`.
    pub fn coarse_grain(&self, f: impl Fn(f64) -> f64) -> Result<RealObservable> {
        coarse_grain(self, |o| o.as_real().map(&f))
    }

    /// Relabels outcomes as strings (their decimal representation).
    pub fn to_general(&self) -> GeneralObservable {
        GeneralObservable {
            labels: self.outcomes.iter().map(|x| x.to_string()).collect(),
            effects: self.effects.clone(),
        }
    }

    /// Same outcome list and effects within `tol` entrywise.
    pub fn approx_eq(&self, other: &RealObservable, tol: f64) -> bool {
        self.outcomes == other.outcomes
            && self
                .effects
                .iter()
                .zip(&other.effects)
                .all(|(a, b)| a.matrix().max_abs_diff(b.matrix()) <= tol)
    }

    /// Largest entrywise distance between matching effects.
    pub fn max_effect_diff(&self, other: &RealObservable) -> f64 {
        self.effects
            .iter()
            .zip(&other.effects)
            .map(|(a, b)| a.matrix().max_abs_diff(b.matrix()))
            .fold(0.0, f64::max)
    }
}

impl Povm for RealObservable {
    fn dim(&self) -> usize {
        self.effects[0].matrix().dim()
    }

    fn len(&self) -> usize {
        self.effects.len()
    }

    fn outcome(&self, i: usize) -> Outcome {
        Outcome::Real(self.outcomes[i])
    }

    fn effect(&self, i: usize) -> &ComplexMatrix {
        self.effects[i].matrix()
    }

    fn with_effects_unchecked(&self, effects: Vec<ComplexMatrix>) -> Self {
        assert_eq!(effects.len(), self.effects.len());
        RealObservable {
            outcomes: self.outcomes.clone(),
            effects: effects.into_iter().map(Effect).collect(),
        }
    }
}

/// `Ok` when `||[a, b]|| <= lin * max(1, ||a|| ||b||)`, else the norm.
fn commutator_within(
    a: &ComplexMatrix,
    b: &ComplexMatrix,
    tol: &Tolerances,
) -> std::result::Result<(), f64> {
    let norm = (&(a * b) - &(b * a)).norm_max();
    if norm <= tol.lin * (a.norm_max() * b.norm_max()).max(1.0) {
        Ok(())
    } else {
        Err(norm)
    }
}

/// A finite POVM whose outcomes are arbitrary distinct labels, in input order.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneralObservable {
    labels: Vec<String>,
    effects: Vec<Effect>,
}

impl GeneralObservable {
    pub fn new(pairs: Vec<(String, ComplexMatrix)>) -> Result<Self> {
        Self::with_tolerances(pairs, &Tolerances::default())
    }

    pub fn with_tolerances(pairs: Vec<(String, ComplexMatrix)>, tol: &Tolerances) -> Result<Self> {
        if pairs.is_empty() {
            return Err(Error::Empty);
        }
        let (labels, matrices): (Vec<String>, Vec<ComplexMatrix>) = pairs.into_iter().unzip();
        check_distinct_labels(&labels)?;
        let effects = validate_effects(matrices, tol)?;
        Ok(GeneralObservable { labels, effects })
    }

    pub(crate) fn from_parts_unchecked(pairs: Vec<(String, ComplexMatrix)>) -> Self {
        let (labels, effects): (Vec<String>, Vec<ComplexMatrix>) = pairs.into_iter().unzip();
        GeneralObservable {
            labels,
            effects: effects.into_iter().map(Effect).collect(),
        }
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn effects(&self) -> &[Effect] {
        &self.effects
    }

    pub fn effect_for(&self, label: &str) -> Option<&ComplexMatrix> {
        self.labels
            .iter()
            .position(|l| l == label)
            .map(|i| self.effects[i].matrix())
    }

    /// Coarse graining through a label function; `None` means undefined.
    pub fn coarse_grain(&self, f: impl Fn(&str) -> Option<f64>) -> Result<RealObservable> {
        coarse_grain(self, |o| match o {
            Outcome::Label(s) => f(s),
            Outcome::Real(x) => f(&x.to_string()),
        })
    }

    pub fn coarse_grain_map(&self, f: &BTreeMap<String, f64>) -> Result<RealObservable> {
        self.coarse_grain(|label| f.get(label).copied())
    }
}

impl Povm for GeneralObservable {
    fn dim(&self) -> usize {
        self.effects[0].matrix().dim()
    }

    fn len(&self) -> usize {
        self.effects.len()
    }

    fn outcome(&self, i: usize) -> Outcome {
        Outcome::Label(self.labels[i].clone())
    }

    fn effect(&self, i: usize) -> &ComplexMatrix {
        self.effects[i].matrix()
    }

    fn with_effects_unchecked(&self, effects: Vec<ComplexMatrix>) -> Self {
        assert_eq!(effects.len(), self.effects.len());
        GeneralObservable {
            labels: self.labels.clone(),
            effects: effects.into_iter().map(Effect).collect(),
        }
    }
}

pub(crate) fn check_distinct_labels(labels: &[String]) -> Result<()> {
    let mut seen = std::collections::BTreeSet::new();
    for l in labels {
        if !seen.insert(l.as_str()) {
            return Err(Error::DuplicateOutcome(l.clone()));
        }
    }
    Ok(())
}

/// Real-valued coarse graining `f(A)_z = sum { A_x : f(x) = z }`.
///
/// Outcomes of the result are the range of `f`; `f` returning `None` on
/// some outcome is a `MissingLabel` error.
pub fn coarse_grain<P: Povm>(
    obs: &P,
    f: impl Fn(&Outcome) -> Option<f64>,
) -> Result<RealObservable> {
    let dim = obs.dim();
    let mut fibers: Vec<(f64, ComplexMatrix)> = Vec::new();
    for i in 0..obs.len() {
        let outcome = obs.outcome(i);
        let z = f(&outcome).ok_or_else(|| Error::MissingLabel(outcome.to_string()))?;
        if !z.is_finite() {
            return Err(Error::InvalidArgument(format!(
                "coarse graining maps {outcome} to non-finite value {z}"
            )));
        }
        let z = canonical(z);
        match fibers.iter_mut().find(|(v, _)| *v == z) {
            Some((_, acc)) => *acc = &*acc + obs.effect(i),
            None => fibers.push((z, obs.effect(i).clone())),
        }
    }
    debug_assert!(fibers.iter().all(|(_, m)| m.dim() == dim));
    Ok(RealObservable::from_parts_unchecked(fibers))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{pauli_x, pauli_y};
    use crate::random::{random_observable, seeded_rng};

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    fn noisy(axis: &ComplexMatrix, mu: f64) -> RealObservable {
        RealObservable::dichotomic(
            (&ComplexMatrix::identity(2) + &axis.scale_real(mu)).scale_real(0.5),
        )
        .unwrap()
    }

    fn trine() -> RealObservable {
        let pairs = (0..3)
            .map(|k| {
                let theta = 2.0 * std::f64::consts::PI * k as f64 / 3.0;
                let n = &pauli_x().scale_real(theta.cos()) + &pauli_y().scale_real(theta.sin());
                (
                    k as f64,
                    (&ComplexMatrix::identity(2) + &n).scale_real(1.0 / 3.0),
                )
            })
            .collect();
        RealObservable::new(pairs).unwrap()
    }

    #[test]
    fn construction_examples() {
        let a1 = ComplexMatrix::diag_real(&[0.7, 0.3]);
        let a = RealObservable::dichotomic(a1.clone()).unwrap();
        assert_eq!(a.outcomes(), &[-1.0, 1.0]);
        assert_eq!(a.effect(1), &a1);

        let one = RealObservable::new(vec![(5.0, ComplexMatrix::identity(3))]).unwrap();
        assert_eq!(one.len(), 1);

        let id = ComplexMatrix::identity(2);
        let err = RealObservable::new(vec![(1.0, id.scale_real(2.0)), (-1.0, id.scale_real(-1.0))])
            .unwrap_err();
        assert!(matches!(err, Error::NotAnEffect { index: 0, .. }));

        let err = RealObservable::new(vec![(1.0, id.scale_real(0.5)), (-1.0, id.scale_real(0.4))])
            .unwrap_err();
        assert!(matches!(err, Error::CompletenessViolation { .. }));

        let err = RealObservable::new(vec![(1.0, id.scale_real(0.5)), (1.0, id.scale_real(0.5))])
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateOutcome(_)));

        let err = RealObservable::new(vec![(0.0, id.scale_real(0.5)), (-0.0, id.scale_real(0.5))])
            .unwrap_err();
        assert!(matches!(err, Error::DuplicateOutcome(_)));

        assert!(matches!(RealObservable::new(vec![]), Err(Error::Empty)));
    }

    #[test]
    fn stochastic_operator_examples() {
        let a1 = ComplexMatrix::diag_real(&[0.7, 0.3]);
        let a = RealObservable::dichotomic(a1.clone()).unwrap();
        let expected = &a1.scale_real(2.0) - &ComplexMatrix::identity(2);
        assert!(a.stochastic_operator().max_abs_diff(&expected) < 1e-15);

        let spin = noisy(&pauli_x(), 0.3);
        assert!(
            spin.stochastic_operator()
                .max_abs_diff(&pauli_x().scale_real(0.3))
                < 1e-15
        );

        let c = RealObservable::constant(2.5, 3);
        assert_eq!(
            c.stochastic_operator(),
            ComplexMatrix::identity(3).scale_real(2.5)
        );
    }

    #[test]
    fn sharpness_and_commutativity() {
        let proj = RealObservable::new(vec![
            (1.0, ComplexMatrix::diag_real(&[1.0, 0.0])),
            (2.0, ComplexMatrix::diag_real(&[0.0, 1.0])),
        ])
        .unwrap();
        assert!(proj.is_sharp(&tol()) && proj.is_commutative(&tol()));

        let spin = noisy(&pauli_x(), 0.5);
        assert!(!spin.is_sharp(&tol()) && spin.is_commutative(&tol()));

        assert!(!trine().is_commutative(&tol()));
    }

    #[test]
    fn sharp_version_examples() {
        let a = RealObservable::dichotomic(ComplexMatrix::diag_real(&[0.7, 0.3])).unwrap();
        let s = a.sharp_version(&tol()).unwrap();
        assert_eq!(s.len(), 2);
        assert!((s.outcomes()[0] + 0.4).abs() < 1e-15 && (s.outcomes()[1] - 0.4).abs() < 1e-15);
        assert!(
            s.effect(0)
                .max_abs_diff(&ComplexMatrix::diag_real(&[0.0, 1.0]))
                < 1e-15
        );
        assert!(
            s.effect(1)
                .max_abs_diff(&ComplexMatrix::diag_real(&[1.0, 0.0]))
                < 1e-15
        );
        assert!(s.is_sharp(&tol()));

        let proj = RealObservable::new(vec![
            (-2.0, ComplexMatrix::diag_real(&[1.0, 0.0, 0.0])),
            (3.0, ComplexMatrix::diag_real(&[0.0, 1.0, 1.0])),
        ])
        .unwrap();
        assert!(proj.sharp_version(&tol()).unwrap().approx_eq(&proj, 1e-14));

        let spin = noisy(&pauli_x(), 0.8);
        let s = spin.sharp_version(&tol()).unwrap();
        assert!((s.outcomes()[0] + 0.8).abs() < 1e-14 && (s.outcomes()[1] - 0.8).abs() < 1e-14);
        let id = ComplexMatrix::identity(2);
        assert!(
            s.effect(0)
                .max_abs_diff(&(&id - &pauli_x()).scale_real(0.5))
                < 1e-14
        );
        assert!(
            s.effect(1)
                .max_abs_diff(&(&id + &pauli_x()).scale_real(0.5))
                < 1e-14
        );
    }

    #[test]
    fn zero_effects_vanish_from_sharp_version() {
        let a = RealObservable::new(vec![
            (7.0, ComplexMatrix::zeros(2)),
            (1.0, ComplexMatrix::identity(2)),
        ])
        .unwrap();
        let s = a.sharp_version(&tol()).unwrap();
        assert_eq!(s.outcomes(), &[1.0]);
    }

    #[test]
    fn conjugate_examples() {
        let spin = noisy(&pauli_x(), 0.5);
        assert!(spin.conjugate(&tol()).unwrap().approx_eq(&spin, 1e-12));

        let t = trine();
        let b = t.conjugate(&tol()).unwrap();
        assert!(b.max_effect_diff(&t) > 0.1);
        let sa = t.sharp_version(&tol()).unwrap();
        let sb = b.sharp_version(&tol()).unwrap();
        assert_eq!(sa.len(), sb.len());
        for i in 0..sa.len() {
            assert!((sa.outcomes()[i] - sb.outcomes()[i]).abs() < 1e-12);
            assert!(sa.effect(i).max_abs_diff(sb.effect(i)) < 1e-12);
        }

        let proj = RealObservable::new(vec![
            (0.0, ComplexMatrix::diag_real(&[1.0, 0.0])),
            (1.0, ComplexMatrix::diag_real(&[0.0, 1.0])),
        ])
        .unwrap();
        assert!(proj.conjugate(&tol()).unwrap().approx_eq(&proj, 1e-15));
    }

    #[test]
    fn conjugate_joint_marginals() {
        let t = trine();
        let joint = t.conjugate_joint(&tol()).unwrap();
        let b = t.conjugate(&tol()).unwrap();
        let sharp = t.sharp_version(&tol()).unwrap();
        for (k, &x) in t.outcomes().iter().enumerate() {
            let row = linalg::sum(
                2,
                joint.iter().filter(|((_, y), _)| *y == x).map(|(_, c)| c),
            );
            assert!(row.max_abs_diff(b.effect(k)) < 1e-12);
        }
        for i in 0..sharp.len() {
            let col = linalg::sum(
                2,
                joint.iter().filter(|((j, _), _)| *j == i).map(|(_, c)| c),
            );
            assert!(col.max_abs_diff(sharp.effect(i)) < 1e-12);
        }
        let total = linalg::sum(2, joint.iter().map(|(_, c)| c));
        assert!(total.max_abs_diff(&ComplexMatrix::identity(2)) < 1e-12);

        let proj = RealObservable::new(vec![
            (0.0, ComplexMatrix::diag_real(&[1.0, 0.0])),
            (1.0, ComplexMatrix::diag_real(&[0.0, 1.0])),
        ])
        .unwrap();
        for ((i, x), c) in proj.conjugate_joint(&tol()).unwrap() {
            let expected = if i as f64 == x {
                proj.effect(i).clone()
            } else {
                ComplexMatrix::zeros(2)
            };
            assert!(c.max_abs_diff(&expected) < 1e-15);
        }

        let one = RealObservable::constant(4.0, 3)
            .conjugate_joint(&tol())
            .unwrap();
        assert_eq!(one.len(), 1);
        assert!(one[0].1.max_abs_diff(&ComplexMatrix::identity(3)) < 1e-15);
    }

    #[test]
    fn commuting_joint_examples() {
        let a = RealObservable::new(vec![
            (0.0, ComplexMatrix::diag_real(&[0.2, 0.9])),
            (1.0, ComplexMatrix::diag_real(&[0.8, 0.1])),
        ])
        .unwrap();
        let b = RealObservable::new(vec![
            (-1.0, ComplexMatrix::diag_real(&[0.5, 0.25])),
            (2.0, ComplexMatrix::diag_real(&[0.5, 0.75])),
        ])
        .unwrap();
        let joint = a.commuting_joint(&b, &tol()).unwrap();
        for (x, ax) in a.iter() {
            let m = linalg::sum(
                2,
                joint.iter().filter(|((xx, _), _)| *xx == x).map(|(_, c)| c),
            );
            assert!(m.max_abs_diff(ax) < 1e-15);
        }
        for (y, by) in b.iter() {
            let m = linalg::sum(
                2,
                joint.iter().filter(|((_, yy), _)| *yy == y).map(|(_, c)| c),
            );
            assert!(m.max_abs_diff(by) < 1e-15);
        }

        let spin = noisy(&pauli_x(), 0.6);
        let self_joint = spin.commuting_joint(&spin, &tol()).unwrap();
        for ((x, y), c) in &self_joint {
            let ax = spin.iter().find(|(o, _)| o == x).unwrap().1;
            let ay = spin.iter().find(|(o, _)| o == y).unwrap().1;
            assert!(c.max_abs_diff(&(ax * ay)) < 1e-15);
        }

        let err = noisy(&pauli_x(), 1.0)
            .commuting_joint(&noisy(&pauli_y(), 1.0), &tol())
            .unwrap_err();
        assert!(matches!(err, Error::NotCommuting { .. }));
    }

    #[test]
    fn coarse_grain_examples() {
        let mut rng = seeded_rng(11, 0);
        let a = random_observable(&mut rng, 3, 4);
        let c = a.coarse_grain(|_| 2.0).unwrap();
        assert_eq!(c.outcomes(), &[2.0]);
        assert!(c.effect(0).max_abs_diff(&ComplexMatrix::identity(3)) < 1e-12);

        assert!(a.coarse_grain(|x| x).unwrap().approx_eq(&a, 0.0));

        let d = RealObservable::dichotomic(ComplexMatrix::diag_real(&[0.7, 0.3])).unwrap();
        let sq = d.coarse_grain(|x| x * x).unwrap();
        assert_eq!(sq.outcomes(), &[1.0]);
        assert!(sq.effect(0).max_abs_diff(&ComplexMatrix::identity(2)) < 1e-15);

        let f = |x: f64| (x * 3.0).floor();
        let g = a.coarse_grain(f).unwrap();
        let direct = a.iter().fold(ComplexMatrix::zeros(3), |acc, (x, e)| {
            &acc + &e.scale_real(f(x))
        });
        assert!(g.stochastic_operator().max_abs_diff(&direct) < 1e-12);
        assert!(g.completeness_residual() < 1e-12);
    }

    #[test]
    fn general_observable_coarse_grain() {
        let id = ComplexMatrix::identity(2);
        let g = GeneralObservable::new(vec![
            ("up".into(), ComplexMatrix::diag_real(&[1.0, 0.0])),
            ("down".into(), ComplexMatrix::diag_real(&[0.0, 1.0])),
        ])
        .unwrap();
        let mut f = BTreeMap::new();
        f.insert("up".to_string(), 0.5);
        assert_eq!(
            g.coarse_grain_map(&f),
            Err(Error::MissingLabel("down".into()))
        );
        f.insert("down".to_string(), -0.5);
        let r = g.coarse_grain_map(&f).unwrap();
        assert_eq!(r.outcomes(), &[-0.5, 0.5]);
        assert!(
            r.stochastic_operator()
                .max_abs_diff(&crate::linalg::pauli_z().scale_real(0.5))
                < 1e-15
        );

        let dup = GeneralObservable::new(vec![
            ("a".into(), id.scale_real(0.5)),
            ("a".into(), id.scale_real(0.5)),
        ]);
        assert!(matches!(dup, Err(Error::DuplicateOutcome(_))));
    }
}
