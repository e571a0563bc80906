//! Finite instruments in operator-sum form.
//!
//! An instrument assigns to each outcome an operation
//! `rho -> sum_j K_j rho K_j*`; the operations sum to a channel. Complete
//! positivity holds by construction. The dual (Heisenberg picture) of each
//! operation is `C -> sum_j K_j* C K_j`.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::linalg::{self, hermitian_eigenpairs, psd_sqrt, ComplexMatrix};
use crate::observables::{self, canonical, GeneralObservable, Outcome, Povm, RealObservable};
use crate::states::DensityOperator;
use crate::tolerance::Tolerances;

/// A trace non-increasing completely positive map given by Kraus operators.
#[derive(Debug, Clone, PartialEq)]
pub struct OperationMap {
    kraus: Vec<ComplexMatrix>,
}

impl OperationMap {
    pub fn new(kraus: Vec<ComplexMatrix>, tol: &Tolerances) -> Result<Self> {
        let op = Self::from_kraus_unchecked(kraus)?;
        let pairs =
            hermitian_eigenpairs(&op.dual_apply(&ComplexMatrix::identity(op.dim())), tol.lin)?;
        if pairs.max() > 1.0 + tol.psd {
            return Err(Error::NotAnOperation {
                max_eigenvalue: pairs.max(),
            });
        }
        Ok(op)
    }

    fn from_kraus_unchecked(kraus: Vec<ComplexMatrix>) -> Result<Self> {
        let dim = kraus.first().ok_or(Error::Empty)?.dim();
        if let Some(k) = kraus.iter().find(|k| k.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k.dim(),
            });
        }
        Ok(OperationMap { kraus })
    }

    pub fn kraus(&self) -> &[ComplexMatrix] {
        &self.kraus
    }

    pub fn dim(&self) -> usize {
        self.kraus[0].dim()
    }

    /// `sum_j K_j rho K_j*`.
    pub fn apply(&self, rho: &ComplexMatrix) -> ComplexMatrix {
        linalg::sum(
            self.dim(),
            self.kraus.iter().map(|k| &(k * rho) * &k.adjoint()),
        )
    }

    /// `sum_j K_j* C K_j`.
    pub fn dual_apply(&self, c: &ComplexMatrix) -> ComplexMatrix {
        linalg::sum(
            self.dim(),
            self.kraus.iter().map(|k| &(&k.adjoint() * c) * k),
        )
    }

    fn concat(ops: &[&OperationMap]) -> OperationMap {
        OperationMap {
            kraus: ops.iter().flat_map(|o| o.kraus.iter().cloned()).collect(),
        }
    }
}

/// A finite instrument: distinct outcomes with one operation each, summing
/// to a trace-preserving map.
#[derive(Debug, Clone, PartialEq)]
pub struct Instrument {
    outcomes: Vec<Outcome>,
    maps: Vec<OperationMap>,
}

impl Instrument {
    /// Validates distinct outcomes, per-outcome operations and trace
    /// preservation of the total map.
    pub fn new(
        outcomes: Vec<Outcome>,
        kraus: Vec<Vec<ComplexMatrix>>,
        tol: &Tolerances,
    ) -> Result<Self> {
        if outcomes.is_empty() {
            return Err(Error::Empty);
        }
        if outcomes.len() != kraus.len() {
            return Err(Error::InvalidShape(format!(
                "{} outcomes but {} Kraus lists",
                outcomes.len(),
                kraus.len()
            )));
        }
        let outcomes: Vec<Outcome> = outcomes
            .into_iter()
            .map(|o| match o {
                Outcome::Real(x) if !x.is_finite() => {
                    Err(Error::InvalidArgument(format!("outcome {x} is not finite")))
                }
                Outcome::Real(x) => Ok(Outcome::Real(canonical(x))),
                other => Ok(other),
            })
            .collect::<Result<_>>()?;
        observables::check_distinct_labels(
            &outcomes.iter().map(|o| o.to_string()).collect::<Vec<_>>(),
        )?;
        let maps: Vec<OperationMap> = kraus
            .into_iter()
            .map(|k| OperationMap::new(k, tol))
            .collect::<Result<_>>()?;
        let dim = maps[0].dim();
        if let Some(m) = maps.iter().find(|m| m.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: m.dim(),
            });
        }
        let instrument = Instrument { outcomes, maps };
        let residual = instrument.trace_preservation_residual();
        if residual > tol.lin {
            return Err(Error::NotTracePreserving { residual });
        }
        Ok(instrument)
    }

    /// `I_x(rho) = omega(x) rho`, measuring the trivial observable
    /// `A_x = omega(x) I`.
    pub fn trivial(weights: Vec<(Outcome, f64)>, dim: usize, tol: &Tolerances) -> Result<Self> {
        if let Some((o, w)) = weights
            .iter()
            .find(|(_, w)| !w.is_finite() || *w < -tol.lin)
        {
            return Err(Error::NotAProbability(format!(
                "weight {w} for outcome {o}"
            )));
        }
        let total: f64 = weights.iter().map(|(_, w)| w).sum();
        if (total - 1.0).abs() > tol.lin {
            return Err(Error::NotAProbability(format!("weights sum to {total}")));
        }
        let id = ComplexMatrix::identity(dim);
        let (outcomes, kraus) = weights
            .into_iter()
            .map(|(o, w)| (o, vec![id.scale_real(w.max(0.0).sqrt())]))
            .unzip();
        Self::new(outcomes, kraus, tol)
    }

    /// `H_x(rho) = tr(rho A_x) alpha_x` with Kraus operators
    /// `sqrt(l_j) |v_j><e_k| A_x^{1/2}` where `alpha_x = sum_j l_j |v_j><v_j|`.
    pub fn holevo<P: Povm>(
        observable: &P,
        states: &[DensityOperator],
        tol: &Tolerances,
    ) -> Result<Self> {
        if states.len() != observable.len() {
            return Err(Error::InvalidShape(format!(
                "{} outcomes but {} post-measurement states",
                observable.len(),
                states.len()
            )));
        }
        let dim = observable.dim();
        let mut kraus = Vec::with_capacity(observable.len());
        for (i, alpha) in states.iter().enumerate() {
            if alpha.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: alpha.dim(),
                });
            }
            let root = psd_sqrt(observable.effect(i), tol)?;
            let pairs = hermitian_eigenpairs(alpha.matrix(), tol.lin)?;
            let mut ks = Vec::new();
            for (lambda, v) in pairs.values.iter().zip(&pairs.vectors) {
                if *lambda <= 0.0 {
                    continue;
                }
                let weight = lambda.sqrt();
                for k in 0..dim {
                    // |v><e_k| A^{1/2}: row i is v_i times row k of A^{1/2}
                    let root_row = root.row(k);
                    ks.push(ComplexMatrix::from_fn(dim, |r, c| {
                        v[r] * root_row[c] * weight
                    }));
                }
            }
            kraus.push(ks);
        }
        let outcomes = (0..observable.len())
            .map(|i| observable.outcome(i))
            .collect();
        Self::new(outcomes, kraus, tol)
    }

    /// `L_x(rho) = A_x^{1/2} rho A_x^{1/2}`.
    pub fn lueders<P: Povm>(observable: &P, tol: &Tolerances) -> Result<Self> {
        let kraus = (0..observable.len())
            .map(|i| psd_sqrt(observable.effect(i), tol).map(|k| vec![k]))
            .collect::<Result<Vec<_>>>()?;
        let outcomes = (0..observable.len())
            .map(|i| observable.outcome(i))
            .collect();
        Self::new(outcomes, kraus, tol)
    }

    pub fn outcomes(&self) -> &[Outcome] {
        &self.outcomes
    }

    pub fn maps(&self) -> &[OperationMap] {
        &self.maps
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn is_real_valued(&self) -> bool {
        self.outcomes.iter().all(|o| o.as_real().is_some())
    }

    fn index_of(&self, x: &Outcome) -> Result<usize> {
        let key = x.to_string();
        self.outcomes
            .iter()
            .position(|o| o.to_string() == key)
            .ok_or(Error::UnknownOutcome(key))
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found,
            });
        }
        Ok(())
    }

    /// `max |sum_x sum_j K* K - I|`.
    pub fn trace_preservation_residual(&self) -> f64 {
        let id = ComplexMatrix::identity(self.dim());
        linalg::sum(self.dim(), self.maps.iter().map(|m| m.dual_apply(&id))).max_abs_diff(&id)
    }

    /// Subnormalized post-measurement output `I_x(rho)`.
    pub fn apply(&self, x: &Outcome, rho: &DensityOperator) -> Result<ComplexMatrix> {
        self.check_dim(rho.dim())?;
        Ok(self.maps[self.index_of(x)?].apply(rho.matrix()))
    }

    /// Heisenberg-picture `I_x*(C)`.
    pub fn dual_apply(&self, x: &Outcome, c: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(c.dim())?;
        Ok(self.maps[self.index_of(x)?].dual_apply(c))
    }

    /// `sum_x I_x(rho)`.
    pub fn channel_apply(
        &self,
        rho: &DensityOperator,
        tol: &Tolerances,
    ) -> Result<DensityOperator> {
        self.check_dim(rho.dim())?;
        let out = linalg::sum(self.dim(), self.maps.iter().map(|m| m.apply(rho.matrix())));
        DensityOperator::with_tolerances(out, tol)
    }

    /// `sum_x I_x*(C)`.
    pub fn channel_dual_apply(&self, c: &ComplexMatrix) -> Result<ComplexMatrix> {
        self.check_dim(c.dim())?;
        Ok(linalg::sum(
            self.dim(),
            self.maps.iter().map(|m| m.dual_apply(c)),
        ))
    }

    /// Effects `J(I)_x = I_x*(I)` of the measured observable, in outcome order.
    pub fn measured_effects(&self) -> Vec<ComplexMatrix> {
        let id = ComplexMatrix::identity(self.dim());
        self.maps
            .iter()
            .map(|m| m.dual_apply(&id).hermitian_part())
            .collect()
    }

    /// The measured observable with labels for outcomes.
    pub fn measured_observable(&self) -> GeneralObservable {
        GeneralObservable::from_parts_unchecked(
            self.outcomes
                .iter()
                .map(|o| o.to_string())
                .zip(self.measured_effects())
                .collect(),
        )
    }

    /// The measured observable of a real-valued instrument.
    pub fn measured_real_observable(&self) -> Result<RealObservable> {
        let values = self.real_outcomes()?;
        Ok(RealObservable::from_parts_unchecked(
            values.into_iter().zip(self.measured_effects()).collect(),
        ))
    }

    fn real_outcomes(&self) -> Result<Vec<f64>> {
        self.outcomes
            .iter()
            .map(|o| {
                o.as_real()
                    .ok_or_else(|| Error::NotRealValued(o.to_string()))
            })
            .collect()
    }

    /// `f(I)_z = sum { I_x : f(x) = z }`, Kraus lists concatenated per fiber.
    pub fn coarse_grain(&self, f: impl Fn(&Outcome) -> Option<f64>) -> Result<Instrument> {
        let mut fibers: Vec<(f64, Vec<&OperationMap>)> = Vec::new();
        for (o, m) in self.outcomes.iter().zip(&self.maps) {
            let z = f(o).ok_or_else(|| Error::MissingLabel(o.to_string()))?;
            if !z.is_finite() {
                return Err(Error::InvalidArgument(format!(
                    "coarse graining maps {o} to {z}"
                )));
            }
            let z = canonical(z);
            match fibers.iter_mut().find(|(v, _)| *v == z) {
                Some((_, ms)) => ms.push(m),
                None => fibers.push((z, vec![m])),
            }
        }
        fibers.sort_by(|a, b| a.0.total_cmp(&b.0));
        let (outcomes, maps) = fibers
            .into_iter()
            .map(|(z, ms)| (Outcome::Real(z), OperationMap::concat(&ms)))
            .unzip();
        Ok(Instrument { outcomes, maps })
    }

    /// Coarse graining by a map keyed on outcome labels.
    pub fn coarse_grain_map(&self, f: &BTreeMap<String, f64>) -> Result<Instrument> {
        self.coarse_grain(|o| f.get(&o.to_string()).copied())
    }

    /// `<I>_rho = tr(sum_x x I_x(rho))`, computed in the Schrodinger picture.
    pub fn mean(&self, rho: &DensityOperator) -> Result<f64> {
        self.check_dim(rho.dim())?;
        let values = self.real_outcomes()?;
        let weighted = values
            .iter()
            .zip(&self.maps)
            .fold(ComplexMatrix::zeros(self.dim()), |acc, (&x, m)| {
                &acc + &m.apply(rho.matrix()).scale_real(x)
            });
        Ok(weighted.trace().re)
    }

    /// `Delta_rho(I)`, defined as the variance of the measured observable.
    pub fn variance(&self, rho: &DensityOperator) -> Result<f64> {
        crate::statistics::variance(rho, &self.measured_real_observable()?)
    }

    /// The instrument product `(A o B)_{(x, y)} = I_x*(B_y)`.
    pub fn sequential_product<P: Povm>(&self, b: &P) -> Result<SequentialProduct> {
        self.check_dim(b.dim())?;
        let effects = self
            .maps
            .iter()
            .map(|m| {
                (0..b.len())
                    .map(|j| m.dual_apply(b.effect(j)).hermitian_part())
                    .collect()
            })
            .collect();
        Ok(SequentialProduct {
            first: self.outcomes.clone(),
            second: (0..b.len()).map(|j| b.outcome(j)).collect(),
            effects,
        })
    }

    /// `(B | A)_y = sum_x I_x*(B_y)`, on the outcome space of `B`.
    pub fn conditioned_observable<P: Povm>(&self, b: &P) -> Result<P> {
        self.check_dim(b.dim())?;
        let effects = (0..b.len())
            .map(|j| {
                self.channel_dual_apply(b.effect(j))
                    .map(|m| m.hermitian_part())
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(b.with_effects_unchecked(effects))
    }

    /// Mean, variance and observable of `f(A, B) = f(A o B)`.
    pub fn product_statistics<P: Povm>(
        &self,
        b: &P,
        f: impl Fn(&Outcome, &Outcome) -> Option<f64>,
        rho: &DensityOperator,
    ) -> Result<ProductStatistics> {
        self.check_dim(rho.dim())?;
        let product = self.sequential_product(b)?;
        let observable = product.coarse_grain(&f)?;

        let mut weighted = ComplexMatrix::zeros(self.dim());
        let mut mean = 0.0;
        for (x, y, effect) in product.iter() {
            let v = f(x, y).ok_or_else(|| Error::MissingLabel(format!("{x},{y}")))?;
            mean += v * rho.expectation(effect)?.re;
            weighted = &weighted + &effect.scale_real(v);
        }
        let variance = rho.expectation(&(&weighted * &weighted))?.re - mean * mean;
        Ok(ProductStatistics {
            mean,
            variance,
            observable,
        })
    }

    /// `sum_x g(x) I_x*(h(B)~)`, the stochastic operator of `f(A, B)` for a
    /// product function `f(x, y) = g(x) h(y)`.
    pub fn product_function_operator<P: Povm>(
        &self,
        b: &P,
        g: impl Fn(&Outcome) -> Option<f64>,
        h: impl Fn(&Outcome) -> Option<f64>,
    ) -> Result<ComplexMatrix> {
        self.check_dim(b.dim())?;
        let hb = observables::coarse_grain(b, h)?.stochastic_operator();
        let mut out = ComplexMatrix::zeros(self.dim());
        for (o, m) in self.outcomes.iter().zip(&self.maps) {
            let gx = g(o).ok_or_else(|| Error::MissingLabel(o.to_string()))?;
            out = &out + &m.dual_apply(&hb).scale_real(gx);
        }
        Ok(out.hermitian_part())
    }
}

/// Effects `I_x*(B_y)` indexed by the outcome pair `(x, y)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SequentialProduct {
    first: Vec<Outcome>,
    second: Vec<Outcome>,
    effects: Vec<Vec<ComplexMatrix>>,
}

impl SequentialProduct {
    pub fn first_outcomes(&self) -> &[Outcome] {
        &self.first
    }

    pub fn second_outcomes(&self) -> &[Outcome] {
        &self.second
    }

    pub fn effect(&self, i: usize, j: usize) -> &ComplexMatrix {
        &self.effects[i][j]
    }

    pub fn dim(&self) -> usize {
        self.effects[0][0].dim()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Outcome, &Outcome, &ComplexMatrix)> {
        self.first
            .iter()
            .zip(&self.effects)
            .flat_map(move |(x, row)| self.second.iter().zip(row).map(move |(y, e)| (x, y, e)))
    }

    /// `max |sum_{x,y} (A o B)_{(x,y)} - I|`.
    pub fn completeness_residual(&self) -> f64 {
        linalg::sum(self.dim(), self.iter().map(|(_, _, e)| e))
            .max_abs_diff(&ComplexMatrix::identity(self.dim()))
    }

    /// Marginal over the second outcome: `sum_y (A o B)_{(x,y)}` per `x`.
    pub fn first_marginal(&self) -> Vec<ComplexMatrix> {
        self.effects
            .iter()
            .map(|row| linalg::sum(self.dim(), row.iter()))
            .collect()
    }

    /// As an observable over labels `"x,y"`.
    pub fn to_general(&self) -> GeneralObservable {
        GeneralObservable::from_parts_unchecked(
            self.iter()
                .map(|(x, y, e)| (pair_label(x, y), e.clone()))
                .collect(),
        )
    }

    /// `f(A, B)_z = sum { (A o B)_{(x,y)} : f(x, y) = z }`.
    pub fn coarse_grain(
        &self,
        f: impl Fn(&Outcome, &Outcome) -> Option<f64>,
    ) -> Result<RealObservable> {
        let mut fibers: Vec<(f64, ComplexMatrix)> = Vec::new();
        for (x, y, e) in self.iter() {
            let z = f(x, y).ok_or_else(|| Error::MissingLabel(pair_label(x, y)))?;
            if !z.is_finite() {
                return Err(Error::InvalidArgument(format!("f({x},{y}) = {z}")));
            }
            let z = canonical(z);
            match fibers.iter_mut().find(|(v, _)| *v == z) {
                Some((_, acc)) => *acc = &*acc + e,
                None => fibers.push((z, e.clone())),
            }
        }
        Ok(RealObservable::from_parts_unchecked(fibers))
    }
}

/// Label of an outcome pair in a sequential product.
pub fn pair_label(x: &Outcome, y: &Outcome) -> String {
    format!("{x},{y}")
}

/// Statistics of a real-valued function of a sequential measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct ProductStatistics {
    pub mean: f64,
    pub variance: f64,
    pub observable: RealObservable,
}
