//! Randomized property checks over seeded instances.
//!
//! Every instance is generated as a JSON document and evaluated from that
//! document, so a dumped instance replays to identical residuals.

use std::collections::BTreeMap;
use std::path::PathBuf;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instruments::Instrument;
use crate::linalg::ComplexMatrix;
use crate::observables::{Outcome, RealObservable};
use crate::random::{
    random_commutative_observable, random_density, random_faithful_density, random_hermitian,
    random_observable, random_outcomes, random_probabilities, random_sharp_observable, seeded_rng,
    PRNG_ALGORITHM,
};
use crate::statistics::{average, linear_relation, uncertainty_report};
use crate::tolerance::Tolerances;

use super::io::{
    AnyObservable, Diagnostic, FamilyJson, InstrumentJson, Located, MatrixJson, ObservableJson,
    StateJson, SCHEMA,
};

/// Minimum eigenvalue of the faithful states used for related pairs.
pub const FAITHFUL_FLOOR: f64 = 0.05;
/// Accuracy required when recovering `alpha`, `beta` of a related pair.
pub const RECOVERY_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub trials: usize,
    pub dims: Vec<usize>,
    #[serde(default)]
    pub tolerances: Tolerances,
    /// Where the summary goes; stdout when absent. Not part of the summary.
    #[serde(default, skip_serializing)]
    pub output: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            seed: 42,
            trials: 1000,
            dims: (2..=6).collect(),
            tolerances: Tolerances::default(),
            output: None,
        }
    }
}

impl RunConfig {
    pub fn validate(&self) -> std::result::Result<(), Diagnostic> {
        if self.trials == 0 {
            return Err(Diagnostic::argument("trials", "trials must be at least 1"));
        }
        if self.dims.is_empty() {
            return Err(Diagnostic::argument("dims", "dims must be nonempty"));
        }
        if let Some(d) = self.dims.iter().find(|&&d| d == 0) {
            return Err(Diagnostic::argument(
                "dims",
                format!("dimension {d} must be at least 1"),
            ));
        }
        Ok(())
    }
}

/// Parses `"2..6"` (inclusive) or `"2,3,5"`.
pub fn parse_dims(text: &str) -> std::result::Result<Vec<usize>, String> {
    let bad = |_| format!("invalid dimension list `{text}`");
    if let Some((lo, hi)) = text.split_once("..") {
        let lo: usize = lo.trim().parse().map_err(bad)?;
        let hi: usize = hi.trim().trim_start_matches('=').parse().map_err(bad)?;
        if lo > hi {
            return Err(format!("empty dimension range `{text}`"));
        }
        return Ok((lo..=hi).collect());
    }
    text.split(',')
        .map(|s| s.trim().parse().map_err(bad))
        .collect()
}

/// A self-contained fuzz instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Instance {
    Uncertainty {
        state: StateJson,
        a: ObservableJson,
        b: ObservableJson,
    },
    /// `B = alpha A + beta` as a relabelling of `A`, under a faithful state.
    RelatedPair {
        state: StateJson,
        a: ObservableJson,
        alpha: f64,
        beta: f64,
    },
    SharpConjugate {
        a: ObservableJson,
        commutative: bool,
    },
    Instrument {
        instrument: InstrumentJson,
        state: StateJson,
        b: ObservableJson,
        c: MatrixJson,
        /// Coarse graining of the instrument's outcomes, keyed by label.
        f: BTreeMap<String, f64>,
    },
}

/// One checked quantity: violated when `residual` is not `<= limit`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Measurement {
    pub property: &'static str,
    pub residual: f64,
    pub limit: f64,
}

impl Measurement {
    /// Non-finite residuals are recorded as `f64::MAX` so that summaries stay
    /// valid JSON; they always count as violations.
    fn new(property: &'static str, residual: f64, limit: f64) -> Self {
        Measurement {
            property,
            residual: if residual.is_finite() {
                residual
            } else {
                MISMATCH
            },
            limit,
        }
    }

    /// A pass/fail check: residual 1 on failure against limit 1/2.
    fn flag(property: &'static str, failed: bool) -> Self {
        Measurement::new(property, f64::from(u8::from(failed)), 0.5)
    }

    pub fn violated(&self) -> bool {
        self.residual.is_nan() || self.residual > self.limit
    }

    /// `residual / limit`, saturating at `f64::MAX`.
    pub fn ratio(&self) -> f64 {
        (self.residual / self.limit).min(MISMATCH)
    }
}

/// Residual used when two results differ structurally (outcome sets differ).
const MISMATCH: f64 = f64::MAX;

fn located(l: Located) -> Error {
    l.error
}

fn real(o: &ObservableJson, tol: &Tolerances) -> Result<RealObservable> {
    match o.to_observable(tol).map_err(located)? {
        AnyObservable::Real(a) => Ok(a),
        AnyObservable::General(_) => Err(Error::NotRealValued("labelled fuzz observable".into())),
    }
}

fn observable_gap(x: &RealObservable, y: &RealObservable) -> f64 {
    if x.outcomes() != y.outcomes() {
        return MISMATCH;
    }
    x.max_effect_diff(y)
}

/// Evaluates every property of an instance.
pub fn evaluate(instance: &Instance, tol: &Tolerances) -> Vec<Measurement> {
    let result = match instance {
        Instance::Uncertainty { state, a, b } => evaluate_uncertainty(state, a, b, tol),
        Instance::RelatedPair {
            state,
            a,
            alpha,
            beta,
        } => evaluate_related(state, a, *alpha, *beta, tol),
        Instance::SharpConjugate { a, commutative } => evaluate_sharp(a, *commutative, tol),
        Instance::Instrument {
            instrument,
            state,
            b,
            c,
            f,
        } => evaluate_instrument(instrument, state, b, c, f, tol),
    };
    result.unwrap_or_else(|_| vec![Measurement::flag("evaluation_error", true)])
}

fn evaluate_uncertainty(
    state: &StateJson,
    a: &ObservableJson,
    b: &ObservableJson,
    tol: &Tolerances,
) -> Result<Vec<Measurement>> {
    let rho = state.to_state(tol).map_err(located)?;
    let (a, b) = (real(a, tol)?, real(b, tol)?);
    let report = uncertainty_report(&rho, &a, &b, tol)?;
    let bound = tol.stat * report.scale();
    let mut out = vec![
        Measurement::new(
            "uncertainty_equation",
            report.equation_residual.abs(),
            bound,
        ),
        Measurement::new(
            "uncertainty_inequality",
            (-report.inequality_slack).max(0.0),
            bound,
        ),
        Measurement::new(
            "robertson_bound",
            (-report.robertson_slack()).max(0.0),
            tol.stat * report.variance_product.max(1.0),
        ),
    ];
    if rho.is_faithful(tol.psd) {
        let (at, bt) = (a.stochastic_operator(), b.stochastic_operator());
        let related =
            linear_relation(&at, &bt, tol)?.related || linear_relation(&bt, &at, tol)?.related;
        let inconsistent = report.is_equality() != related;
        out.push(Measurement::flag("equality_characterization", inconsistent));
    }
    Ok(out)
}

fn evaluate_related(
    state: &StateJson,
    a: &ObservableJson,
    alpha: f64,
    beta: f64,
    tol: &Tolerances,
) -> Result<Vec<Measurement>> {
    let rho = state.to_state(tol).map_err(located)?;
    let a = real(a, tol)?;
    let b = a.coarse_grain(|x| alpha * x + beta)?;
    let report = uncertainty_report(&rho, &a, &b, tol)?;
    let (at, bt) = (a.stochastic_operator(), b.stochastic_operator());
    let fit = linear_relation(&at, &bt, tol)?;
    let mut out = vec![
        Measurement::new(
            "related_pair_equality",
            (report.variance_product - report.correlation_sq).abs(),
            tol.stat * report.scale(),
        ),
        Measurement::new(
            "relation_detected",
            fit.residual,
            tol.lin * bt.norm_max().max(1.0),
        ),
    ];
    // alpha is only identifiable when A is not a multiple of I
    let traceless =
        &at - &ComplexMatrix::identity(at.dim()).scale_real(at.trace().re / at.dim() as f64);
    if traceless.norm_max() > tol.lin {
        out.push(Measurement::new(
            "relation_recovery",
            (fit.alpha - alpha).abs().max((fit.beta - beta).abs()),
            RECOVERY_TOLERANCE,
        ));
    }
    Ok(out)
}

fn evaluate_sharp(
    a: &ObservableJson,
    commutative: bool,
    tol: &Tolerances,
) -> Result<Vec<Measurement>> {
    let a = real(a, tol)?;
    let at = a.stochastic_operator();
    let scale = tol.lin * at.norm_max().max(1.0);
    let sharp = a.sharp_version(tol)?;
    let idempotence = sharp
        .iter()
        .map(|(_, p)| (p * p).max_abs_diff(p))
        .fold(0.0, f64::max);
    let conj = a.conjugate(tol)?;
    let conj_sharp = conj.sharp_version(tol)?;
    let eigen_gap = if conj_sharp.outcomes().len() == sharp.outcomes().len() {
        conj_sharp
            .outcomes()
            .iter()
            .zip(sharp.outcomes())
            .map(|(x, y)| (x - y).abs())
            .fold(0.0, f64::max)
    } else {
        MISMATCH
    };
    let projection_gap = if eigen_gap == MISMATCH {
        MISMATCH
    } else {
        sharp
            .iter()
            .zip(conj_sharp.iter())
            .map(|((_, p), (_, q))| p.max_abs_diff(q))
            .fold(0.0, f64::max)
    };
    let mut out = vec![
        Measurement::new(
            "sharp_version",
            sharp.stochastic_operator().max_abs_diff(&at),
            scale,
        ),
        Measurement::new("sharp_idempotence", idempotence, tol.lin),
        Measurement::new(
            "conjugate_stochastic",
            conj.stochastic_operator().max_abs_diff(&at),
            scale,
        ),
        Measurement::new(
            "conjugate_eigenvalues",
            eigen_gap,
            tol.cluster_for(at.norm_max()),
        ),
        Measurement::new("conjugate_projections", projection_gap, tol.lin),
    ];
    if commutative {
        out.push(Measurement::new(
            "commutative_conjugate",
            observable_gap(&conj, &a),
            tol.lin,
        ));
    }
    Ok(out)
}

fn evaluate_instrument(
    instrument: &InstrumentJson,
    state: &StateJson,
    b: &ObservableJson,
    c: &MatrixJson,
    f: &BTreeMap<String, f64>,
    tol: &Tolerances,
) -> Result<Vec<Measurement>> {
    let ins = instrument.to_instrument(tol).map_err(located)?;
    let rho = state.to_state(tol).map_err(located)?;
    let b = real(b, tol)?;
    let c = c.to_matrix("c").map_err(located)?;
    let j = ins.measured_real_observable()?;
    // effects in instrument outcome order
    let effects = ins.measured_effects();

    let mut probability: f64 = 0.0;
    let mut adjoint: f64 = 0.0;
    for (x, jx) in ins.outcomes().iter().zip(&effects) {
        let out = ins.apply(x, &rho)?;
        probability = probability.max((out.trace().re - rho.expectation(jx)?.re).abs());
        let heisenberg = rho.expectation(&ins.dual_apply(x, &c)?)?;
        let schrodinger = out.trace_product(&c)?;
        adjoint = adjoint.max((heisenberg - schrodinger).norm());
    }

    let channel = ins.channel_dual_apply(&ComplexMatrix::identity(ins.dim()))?;
    let total = linalg_channel(&ins, &rho);
    let min_eig = crate::linalg::hermitian_eigenpairs(&total, tol.lin)?.min();

    let product = ins.sequential_product(&b)?;
    let marginal = product
        .first_marginal()
        .iter()
        .zip(&effects)
        .map(|(m, e)| m.max_abs_diff(e))
        .fold(0.0, f64::max);

    let lookup = |o: &Outcome| f.get(&o.to_string()).copied();
    let lhs = ins.coarse_grain(lookup)?.measured_real_observable()?;
    let rhs = crate::observables::coarse_grain(&j, |o| lookup(o))?;

    let max_outcome = j.outcomes().iter().fold(1.0_f64, |m, x| m.max(x.abs()));
    let mut out = vec![
        Measurement::new("probability_reproduction", probability, tol.lin),
        Measurement::new("adjointness", adjoint, tol.lin * c.norm_max().max(1.0)),
        Measurement::new(
            "trace_preservation",
            channel.max_abs_diff(&ComplexMatrix::identity(ins.dim())),
            tol.lin,
        ),
        Measurement::new("channel_trace", (total.trace().re - 1.0).abs(), tol.lin),
        Measurement::new("channel_positivity", (-min_eig).max(0.0), tol.psd),
        Measurement::new(
            "sequential_completeness",
            product.completeness_residual(),
            tol.lin,
        ),
        Measurement::new("sequential_marginal", marginal, tol.lin),
        Measurement::new("coarse_grain_commutes", observable_gap(&lhs, &rhs), tol.lin),
        Measurement::new(
            "instrument_mean",
            (ins.mean(&rho)? - average(&rho, &j)?).abs(),
            tol.lin * max_outcome,
        ),
    ];
    if let InstrumentJson {
        family: FamilyJson::Trivial { .. },
        ..
    } = instrument
    {
        let cond = ins.conditioned_observable(&b)?;
        out.push(Measurement::new(
            "trivial_conditioning",
            cond.max_effect_diff(&b),
            tol.lin,
        ));
    }
    Ok(out)
}

/// `sum_x I_x(rho)` without re-validating it as a state.
fn linalg_channel(ins: &Instrument, rho: &crate::states::DensityOperator) -> ComplexMatrix {
    crate::linalg::sum(ins.dim(), ins.maps().iter().map(|m| m.apply(rho.matrix())))
}

fn random_real_observable<R: Rng>(rng: &mut R, dim: usize) -> RealObservable {
    match rng.random_range(0..3) {
        0 => {
            let n = rng.random_range(1..=4);
            random_observable(rng, dim, n)
        }
        1 => {
            let n = rng.random_range(1..=dim);
            random_sharp_observable(rng, dim, n)
        }
        _ => {
            let n = rng.random_range(1..=4);
            random_commutative_observable(rng, dim, n)
        }
    }
}

/// The instances of one trial: one per property group. The instrument family
/// cycles with the trial index.
pub fn generate(seed: u64, trial: u64, dims: &[usize]) -> Vec<Instance> {
    let mut rng = seeded_rng(seed, trial);
    let dim = dims[rng.random_range(0..dims.len())];

    let rank = rng.random_range(1..=dim);
    let rho = random_density(&mut rng, dim, rank);
    let a = random_real_observable(&mut rng, dim);
    let b = random_real_observable(&mut rng, dim);
    let uncertainty = Instance::Uncertainty {
        state: StateJson::density(&rho),
        a: (&a).into(),
        b: (&b).into(),
    };

    let faithful = random_faithful_density(&mut rng, dim, FAITHFUL_FLOOR);
    let n = rng.random_range(2..=4);
    let base = random_observable(&mut rng, dim, n);
    let related = Instance::RelatedPair {
        state: StateJson::density(&faithful),
        a: (&base).into(),
        alpha: rng.random_range(-3.0..=3.0),
        beta: rng.random_range(-3.0..=3.0),
    };

    let commutative = rng.random_bool(0.5);
    let n = rng.random_range(1..=4);
    let target = if commutative {
        random_commutative_observable(&mut rng, dim, n)
    } else {
        random_observable(&mut rng, dim, n)
    };
    let sharp = Instance::SharpConjugate {
        a: (&target).into(),
        commutative,
    };

    vec![
        uncertainty,
        related,
        sharp,
        instrument_instance(&mut rng, dim, trial % 3),
    ]
}

fn instrument_instance<R: Rng>(rng: &mut R, dim: usize, family: u64) -> Instance {
    let n = rng.random_range(1..=3);
    let measured = random_observable(rng, dim, n);
    let family = match family {
        0 => {
            let outcomes = random_outcomes(rng, n);
            let omega = outcomes
                .iter()
                .zip(random_probabilities(rng, n))
                .map(|(x, w)| (Outcome::Real(*x).to_string(), w))
                .collect();
            FamilyJson::Trivial { dim, omega }
        }
        1 => FamilyJson::Holevo {
            observable: (&measured).into(),
            states: (0..n)
                .map(|_| {
                    let rank = rng.random_range(1..=dim);
                    StateJson::density(&random_density(rng, dim, rank))
                })
                .collect(),
        },
        _ => FamilyJson::Lueders {
            observable: (&measured).into(),
        },
    };
    let instrument = InstrumentJson::new(family);
    let labels: Vec<String> = match &instrument.family {
        FamilyJson::Trivial { omega, .. } => omega.keys().cloned().collect(),
        _ => measured
            .outcomes()
            .iter()
            .map(|x| Outcome::Real(*x).to_string())
            .collect(),
    };
    let f = labels
        .into_iter()
        .map(|l| (l, f64::from(rng.random_range(-1i32..=2))))
        .collect();
    let rank = rng.random_range(1..=dim);
    let state = StateJson::density(&random_density(rng, dim, rank));
    let b = random_real_observable(rng, dim);
    Instance::Instrument {
        instrument,
        state,
        b: (&b).into(),
        c: (&random_hermitian(rng, dim, 1.0)).into(),
        f,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct PropertyStats {
    pub instances: usize,
    pub violations: usize,
    pub max_residual: f64,
    /// Largest `residual / limit`.
    pub max_ratio: f64,
    pub worst_trial: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Counts {
    pub trials: usize,
    pub instances: usize,
    pub measurements: usize,
    pub violations: usize,
}

/// The instance with the largest `residual / limit` over the run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WorstInstance {
    pub property: String,
    pub trial: u64,
    pub residual: f64,
    pub limit: f64,
    pub tolerances: Tolerances,
    pub instance: Instance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FuzzSummary {
    pub schema: u32,
    pub prng: String,
    pub config: RunConfig,
    pub counts: Counts,
    pub properties: BTreeMap<String, PropertyStats>,
    pub worst: WorstInstance,
}

impl FuzzSummary {
    pub fn passed(&self) -> bool {
        self.counts.violations == 0
    }
}

/// Runs all trials (in parallel) and reduces the results in trial order.
pub fn run(config: &RunConfig) -> FuzzSummary {
    let tol = config.tolerances;
    let trials: Vec<Vec<(Instance, Vec<Measurement>)>> = (0..config.trials as u64)
        .into_par_iter()
        .map(|t| {
            generate(config.seed, t, &config.dims)
                .into_iter()
                .map(|inst| {
                    let m = evaluate(&inst, &tol);
                    (inst, m)
                })
                .collect()
        })
        .collect();

    let mut properties: BTreeMap<String, PropertyStats> = BTreeMap::new();
    let mut counts = Counts {
        trials: config.trials,
        instances: 0,
        measurements: 0,
        violations: 0,
    };
    let mut worst: Option<(f64, u64, Measurement, &Instance)> = None;
    for (t, instances) in trials.iter().enumerate() {
        let t = t as u64;
        for (inst, measurements) in instances {
            counts.instances += 1;
            for m in measurements {
                counts.measurements += 1;
                let stats = properties.entry(m.property.to_owned()).or_default();
                stats.instances += 1;
                let ratio = m.ratio();
                if m.violated() {
                    stats.violations += 1;
                    counts.violations += 1;
                }
                if stats.instances == 1 || m.residual > stats.max_residual {
                    stats.max_residual = m.residual;
                }
                if stats.instances == 1 || ratio > stats.max_ratio {
                    stats.max_ratio = ratio;
                    stats.worst_trial = t;
                }
                let worse = match &worst {
                    None => true,
                    Some((r, ..)) => ratio > *r,
                };
                if worse {
                    worst = Some((ratio, t, *m, inst));
                }
            }
        }
    }
    let (_, trial, m, inst) = worst.expect("at least one trial with measurements");
    FuzzSummary {
        schema: SCHEMA,
        prng: PRNG_ALGORITHM.to_owned(),
        config: config.clone(),
        counts,
        properties,
        worst: WorstInstance {
            property: m.property.to_owned(),
            trial,
            residual: m.residual,
            limit: m.limit,
            tolerances: tol,
            instance: inst.clone(),
        },
    }
}

/// Result of re-evaluating a dumped instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Replay {
    pub schema: u32,
    pub property: String,
    pub trial: u64,
    pub recorded_residual: f64,
    pub residual: Option<f64>,
    pub identical: bool,
}

pub fn replay(worst: &WorstInstance) -> Replay {
    let residual = evaluate(&worst.instance, &worst.tolerances)
        .into_iter()
        .find(|m| m.property == worst.property)
        .map(|m| m.residual);
    Replay {
        schema: SCHEMA,
        property: worst.property.clone(),
        trial: worst.trial,
        recorded_residual: worst.residual,
        residual,
        identical: residual.is_some_and(|r| r.to_bits() == worst.residual.to_bits()),
    }
}
