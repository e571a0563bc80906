//! Worked examples: each demo computes quantities through the library and
//! places them next to their closed forms.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::Result;
use crate::instruments::Instrument;
use crate::linalg::{pauli_x, pauli_y, psd_sqrt, ComplexMatrix};
use crate::observables::{Outcome, Povm, RealObservable};
use crate::random::{
    random_density, random_hermitian, random_observable, random_probabilities, seeded_rng,
};
use crate::states::{bloch_state, BlochVector, DensityOperator};
use crate::statistics::{
    average, commutator_expectation, correlation, covariance, uncertainty_report, variance,
};
use crate::tolerance::Tolerances;

use super::io::SCHEMA;

/// Largest absolute difference a demo tolerates between computed and
/// closed-form values.
pub const DEMO_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum DemoName {
    Example1,
    Example2,
    Example3,
    Example4,
    Example5,
    Example6,
    Example7,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoParams {
    pub mu: f64,
    pub bloch: [f64; 3],
    pub dim: usize,
    pub seed: u64,
}

impl Default for DemoParams {
    fn default() -> Self {
        DemoParams {
            mu: 0.5,
            bloch: [0.3, 0.4, 0.2],
            dim: 2,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Check {
    pub quantity: String,
    pub computed: f64,
    pub closed_form: f64,
    pub abs_diff: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub schema: u32,
    pub demo: String,
    pub params: Value,
    pub checks: Vec<Check>,
    pub facts: BTreeMap<String, Value>,
    pub max_abs_diff: f64,
    pub tolerance: f64,
    pub pass: bool,
}

struct Builder {
    checks: Vec<Check>,
    facts: BTreeMap<String, Value>,
}

impl Builder {
    fn new() -> Self {
        Builder {
            checks: Vec::new(),
            facts: BTreeMap::new(),
        }
    }

    fn check(&mut self, quantity: &str, computed: f64, closed_form: f64) {
        self.checks.push(Check {
            quantity: quantity.to_owned(),
            computed,
            closed_form,
            abs_diff: (computed - closed_form).abs(),
        });
    }

    fn check_complex(&mut self, quantity: &str, computed: Complex64, closed_form: Complex64) {
        self.check(&format!("{quantity}.re"), computed.re, closed_form.re);
        self.check(&format!("{quantity}.im"), computed.im, closed_form.im);
    }

    /// Records `max |computed - closed_form|` over entries as a check against zero.
    fn check_matrix(
        &mut self,
        quantity: &str,
        computed: &ComplexMatrix,
        closed_form: &ComplexMatrix,
    ) {
        self.check(quantity, computed.max_abs_diff(closed_form), 0.0);
    }

    fn fact(&mut self, name: &str, value: Value) {
        self.facts.insert(name.to_owned(), value);
    }

    fn finish(self, demo: DemoName, params: Value, tolerance: f64) -> DemoReport {
        let max_abs_diff = self.checks.iter().map(|c| c.abs_diff).fold(0.0, f64::max);
        DemoReport {
            schema: SCHEMA,
            demo: demo_label(demo).to_owned(),
            params,
            checks: self.checks,
            facts: self.facts,
            max_abs_diff,
            tolerance,
            pass: max_abs_diff <= tolerance,
        }
    }
}

fn demo_label(demo: DemoName) -> &'static str {
    match demo {
        DemoName::Example1 => "example1",
        DemoName::Example2 => "example2",
        DemoName::Example3 => "example3",
        DemoName::Example4 => "example4",
        DemoName::Example5 => "example5",
        DemoName::Example6 => "example6",
        DemoName::Example7 => "example7",
    }
}

pub fn run_demo(demo: DemoName, params: &DemoParams, tol: &Tolerances) -> Result<DemoReport> {
    match demo {
        DemoName::Example1 => example1(tol),
        DemoName::Example2 => example2(params, tol),
        DemoName::Example3 => example3(params, tol),
        DemoName::Example4 => example4(params, tol),
        DemoName::Example5 | DemoName::Example6 | DemoName::Example7 => {
            instrument_demo(demo, params, tol)
        }
    }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// The effect `(I + mu sigma) / 2` of a noisy spin observable.
pub fn noisy_spin_effect(axis: &ComplexMatrix, mu: f64) -> ComplexMatrix {
    (&ComplexMatrix::identity(2) + &axis.scale_real(mu)).scale_real(0.5)
}

/// Noncommuting rank-one projections that are uncorrelated in `|alpha>`.
fn example1(tol: &Tolerances) -> Result<DemoReport> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let alpha = [c(1.0), c(0.0)];
    let phi = [c(0.0), c(1.0)];
    let psi = [c(s), c(s)];
    let rho = DensityOperator::pure(&alpha)?;
    let a = ComplexMatrix::projector(&phi);
    let b = ComplexMatrix::projector(&psi);

    let mut out = Builder::new();
    let ab = a.mul(&b)?;
    out.check_matrix(
        "AB - <phi,psi>|phi><psi|",
        &ab,
        &ComplexMatrix::outer(&phi, &psi).scale_real(s),
    );
    out.check("tr(rho A B)", rho.expectation(&ab)?.re, 0.0);
    out.check("<A><B>", average(&rho, &a)? * average(&rho, &b)?, 0.0);
    out.check_complex("Cor", correlation(&rho, &a, &b)?, c(0.0));
    let comm = a.commutator(&b)?;
    let closed =
        (&ComplexMatrix::outer(&phi, &psi) - &ComplexMatrix::outer(&psi, &phi)).norm_max() * s;
    out.check("||[A,B]||", comm.norm_max(), closed);
    out.fact("commutator_norm", json!(comm.norm_max()));
    out.fact(
        "uncorrelated",
        json!(correlation(&rho, &a, &b)?.norm() <= tol.stat),
    );
    out.fact("commuting", json!(comm.norm_max() <= tol.lin));
    Ok(out.finish(DemoName::Example1, json!({}), DEMO_TOLERANCE))
}

/// The maximally mixed state turns every statistic into a trace formula.
fn example2(p: &DemoParams, tol: &Tolerances) -> Result<DemoReport> {
    let n = p.dim;
    let nf = n as f64;
    let mut rng = seeded_rng(p.seed, 0);
    let a = random_hermitian(&mut rng, n, 1.0);
    let b = random_hermitian(&mut rng, n, 1.0);
    let rho = DensityOperator::maximally_mixed(n);

    let tr_a = a.trace().re;
    let tr_b = b.trace().re;
    let tr_ab = a.trace_product(&b)?;
    let tr_a2 = a.trace_product(&a)?.re;

    let mut out = Builder::new();
    out.check_complex(
        "<A,B>_rho",
        rho.state_form(&a, &b)?,
        a.adjoint().trace_product(&b)? / nf,
    );
    out.check("<A>", average(&rho, &a)?, tr_a / nf);
    let cor_closed = tr_ab / nf - c(tr_a * tr_b / (nf * nf));
    out.check_complex("Cor", correlation(&rho, &a, &b)?, cor_closed);
    out.check(
        "Delta(A,B)",
        covariance(&rho, &a, &b)?,
        tr_ab.re / nf - tr_a * tr_b / (nf * nf),
    );
    out.check(
        "Delta(A)",
        variance(&rho, &a)?,
        tr_a2 / nf - (tr_a / nf).powi(2),
    );
    out.check_complex(
        "tr(rho[A,B])",
        commutator_expectation(&rho, &a, &b)?,
        Complex64::new(0.0, 2.0 * tr_ab.im / nf),
    );
    let lhs = tr_ab.im.powi(2) + (tr_ab.re - tr_a * tr_b / nf).powi(2);
    let rhs = (tr_ab - c(tr_a * tr_b / nf)).norm_sqr();
    out.check("equation: Im^2 + Re^2 - |.|^2", lhs - rhs, 0.0);
    let report = uncertainty_report(&rho, &a, &b, tol)?;
    out.fact("faithful", json!(rho.is_faithful(tol.psd)));
    out.fact(
        "report",
        serde_json::to_value(report).expect("finite report"),
    );
    Ok(out.finish(
        DemoName::Example2,
        json!({"dim": n, "seed": p.seed}),
        DEMO_TOLERANCE,
    ))
}

/// Dichotomic observables `{A1, I - A1}` with outcomes `1, -1`.
fn example3(p: &DemoParams, tol: &Tolerances) -> Result<DemoReport> {
    let d = p.dim;
    let mut rng = seeded_rng(p.seed, 0);
    let a1 = random_observable(&mut rng, d, 2).effect(0).clone();
    let b1 = random_observable(&mut rng, d, 2).effect(0).clone();
    let rho = random_density(&mut rng, d, d);
    let a = RealObservable::dichotomic(a1.clone())?;
    let b = RealObservable::dichotomic(b1.clone())?;
    let id = ComplexMatrix::identity(d);

    let ta = rho.expectation(&a1)?.re;
    let tb = rho.expectation(&b1)?.re;
    let tab = rho.expectation(&a1.mul(&b1)?)?;
    let ta2 = rho.expectation(&a1.mul(&a1)?)?.re;

    let mut out = Builder::new();
    out.check_matrix(
        "A~ - (2A1 - I)",
        &a.stochastic_operator(),
        &(&a1.scale_real(2.0) - &id),
    );
    out.check("<A>", average(&rho, &a)?, 2.0 * ta - 1.0);
    out.check_complex("Cor", correlation(&rho, &a, &b)?, (tab - c(ta * tb)) * 4.0);
    out.check(
        "Delta(A,B)",
        covariance(&rho, &a, &b)?,
        4.0 * (tab.re - ta * tb),
    );
    out.check("Delta(A)", variance(&rho, &a)?, 4.0 * (ta2 - ta * ta));
    let comm = a
        .stochastic_operator()
        .commutator(&b.stochastic_operator())?;
    out.check_matrix(
        "[A~,B~] - 4[A1,B1]",
        &comm,
        &a1.commutator(&b1)?.scale_real(4.0),
    );

    let effect = uncertainty_report(&rho, &a1, &b1, tol)?;
    out.check("commutator term", effect.commutator_term, tab.im.powi(2));
    out.check(
        "covariance term",
        effect.covariance_sq,
        (tab.re - ta * tb).powi(2),
    );
    out.check(
        "correlation term",
        effect.correlation_sq,
        (tab - c(ta * tb)).norm_sqr(),
    );
    out.check(
        "variance product",
        effect.variance_product,
        (ta2 - ta * ta) * (rho.expectation(&b1.mul(&b1)?)?.re - tb * tb),
    );
    out.fact("inequality_slack", json!(effect.inequality_slack));
    out.fact("commuting", json!(comm.norm_max() <= tol.lin));
    Ok(out.finish(
        DemoName::Example3,
        json!({"dim": d, "seed": p.seed}),
        DEMO_TOLERANCE,
    ))
}

/// Closed forms for noisy spin-x and spin-y observables in a Bloch state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoisySpinClosedForm {
    pub mean_a: f64,
    pub mean_b: f64,
    pub variance_a: f64,
    pub variance_b: f64,
    pub correlation: [f64; 2],
    /// Terms of the uncertainty relation for the effects `A1`, `B1`.
    pub commutator_term: f64,
    pub covariance_sq: f64,
    pub correlation_sq: f64,
    pub variance_product: f64,
    pub inequality_slack: f64,
}

impl NoisySpinClosedForm {
    pub fn new(mu: f64, r: &BlochVector) -> Self {
        let (r1, r2, r3) = (r.r1, r.r2, r.r3);
        let mu2 = mu * mu;
        let mu4 = mu2 * mu2;
        NoisySpinClosedForm {
            mean_a: r1 * mu,
            mean_b: r2 * mu,
            variance_a: (1.0 - r1 * r1) * mu2,
            variance_b: (1.0 - r2 * r2) * mu2,
            correlation: [-r1 * r2 * mu2, r3 * mu2],
            commutator_term: r3 * r3 * mu4 / 16.0,
            covariance_sq: r1 * r1 * r2 * r2 * mu4 / 16.0,
            correlation_sq: (r3 * r3 + r1 * r1 * r2 * r2) * mu4 / 16.0,
            variance_product: (1.0 - r1 * r1) * (1.0 - r2 * r2) * mu4 / 16.0,
            inequality_slack: ((1.0 - r1 * r1) * (1.0 - r2 * r2) - r3 * r3 - r1 * r1 * r2 * r2)
                * mu4
                / 16.0,
        }
    }
}

fn example4(p: &DemoParams, tol: &Tolerances) -> Result<DemoReport> {
    let mu = p.mu;
    let r = BlochVector::with_tolerance(p.bloch[0], p.bloch[1], p.bloch[2], tol.lin)?;
    let rho = bloch_state(&r)?;
    let a1 = noisy_spin_effect(&pauli_x(), mu);
    let b1 = noisy_spin_effect(&pauli_y(), mu);
    let a = RealObservable::dichotomic(a1.clone())?;
    let b = RealObservable::dichotomic(b1.clone())?;
    let closed = NoisySpinClosedForm::new(mu, &r);

    let mut out = Builder::new();
    out.check(
        "tr(rho A1)",
        rho.expectation(&a1)?.re,
        0.5 * (1.0 + r.r1 * mu),
    );
    out.check("<A>", average(&rho, &a)?, closed.mean_a);
    out.check("<B>", average(&rho, &b)?, closed.mean_b);
    out.check("Delta(A)", variance(&rho, &a)?, closed.variance_a);
    out.check("Delta(B)", variance(&rho, &b)?, closed.variance_b);
    out.check_complex(
        "Cor",
        correlation(&rho, &a, &b)?,
        Complex64::new(closed.correlation[0], closed.correlation[1]),
    );
    let effect = uncertainty_report(&rho, &a1, &b1, tol)?;
    out.check(
        "commutator term",
        effect.commutator_term,
        closed.commutator_term,
    );
    out.check(
        "covariance term",
        effect.covariance_sq,
        closed.covariance_sq,
    );
    out.check(
        "correlation term",
        effect.correlation_sq,
        closed.correlation_sq,
    );
    out.check(
        "variance product",
        effect.variance_product,
        closed.variance_product,
    );
    out.check(
        "inequality slack",
        effect.inequality_slack,
        closed.inequality_slack,
    );
    out.check(
        "slack - (1 - |r|^2) mu^4 / 16",
        effect.inequality_slack,
        (1.0 - r.norm().powi(2)) * mu.powi(4) / 16.0,
    );
    out.fact("bloch_norm", json!(r.norm()));
    out.fact(
        "equality",
        json!(effect.inequality_slack.abs() <= DEMO_TOLERANCE),
    );
    out.fact(
        "commutator_vanishes",
        json!(effect.commutator_term <= DEMO_TOLERANCE),
    );
    let observable = uncertainty_report(&rho, &a, &b, tol)?;
    out.fact(
        "observable_report",
        serde_json::to_value(observable).expect("finite report"),
    );
    Ok(out.finish(
        DemoName::Example4,
        json!({"mu": mu, "bloch": [r.r1, r.r2, r.r3]}),
        DEMO_TOLERANCE,
    ))
}

/// Trivial, Holevo and Lueders instruments measuring a random observable,
/// followed by a second random observable.
fn instrument_demo(demo: DemoName, p: &DemoParams, tol: &Tolerances) -> Result<DemoReport> {
    let d = p.dim;
    let mut rng = seeded_rng(p.seed, 0);
    let rho = random_density(&mut rng, d, d);
    let b = random_observable(&mut rng, d, 3);
    let f = |x: f64, y: f64| x * y + x;

    // (outcome x, effect of the measured observable, closed form of I_x*(C))
    type Dual = Box<dyn Fn(&ComplexMatrix) -> ComplexMatrix>;
    let (instrument, parts): (Instrument, Vec<(f64, ComplexMatrix, Dual)>) = match demo {
        DemoName::Example5 => {
            let omega = random_probabilities(&mut rng, 3);
            let xs = [-1.0, 0.5, 2.0];
            let ins = Instrument::trivial(
                xs.iter()
                    .zip(&omega)
                    .map(|(&x, &w)| (Outcome::Real(x), w))
                    .collect(),
                d,
                tol,
            )?;
            let parts = xs
                .iter()
                .zip(omega)
                .map(|(&x, w)| {
                    let dual: Dual = Box::new(move |m: &ComplexMatrix| m.scale_real(w));
                    (x, ComplexMatrix::identity(d).scale_real(w), dual)
                })
                .collect();
            (ins, parts)
        }
        DemoName::Example6 => {
            let a = random_observable(&mut rng, d, 2);
            let alphas: Vec<DensityOperator> = (0..a.len())
                .map(|_| random_density(&mut rng, d, d))
                .collect();
            let ins = Instrument::holevo(&a, &alphas, tol)?;
            let parts = a
                .iter()
                .zip(alphas)
                .map(|((x, ax), alpha)| {
                    let ax2 = ax.clone();
                    let dual: Dual = Box::new(move |m: &ComplexMatrix| {
                        ax2.scale_real(alpha.expectation(m).expect("same dimension").re)
                    });
                    (x, ax.clone(), dual)
                })
                .collect();
            (ins, parts)
        }
        _ => {
            let a = random_observable(&mut rng, d, 2);
            let ins = Instrument::lueders(&a, tol)?;
            let parts = a
                .iter()
                .map(|(x, ax)| {
                    let root = psd_sqrt(ax, tol)?;
                    let dual: Dual = Box::new(move |m: &ComplexMatrix| &(&root * m) * &root);
                    Ok((x, ax.clone(), dual))
                })
                .collect::<Result<Vec<_>>>()?;
            (ins, parts)
        }
    };

    let mut out = Builder::new();

    let probability_gap = parts
        .iter()
        .map(|(x, ax, _)| {
            let tr = instrument.apply(&Outcome::Real(*x), &rho)?.trace().re;
            Ok((tr - rho.expectation(ax)?.re).abs())
        })
        .collect::<Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    out.check("max |tr I_x(rho) - tr(rho A_x)|", probability_gap, 0.0);

    let product = instrument.sequential_product(&b)?;
    let mut product_gap: f64 = 0.0;
    for (i, (_, _, dual)) in parts.iter().enumerate() {
        for j in 0..b.len() {
            product_gap = product_gap.max(product.effect(i, j).max_abs_diff(&dual(b.effect(j))));
        }
    }
    out.check("max |(A o B)_(x,y) - closed form|", product_gap, 0.0);

    let mut tilde = ComplexMatrix::zeros(d);
    for (x, _, dual) in &parts {
        for (y, by) in b.iter() {
            tilde = &tilde + &dual(by).scale_real(f(*x, y));
        }
    }
    let mean_closed = rho.expectation(&tilde)?.re;
    let var_closed = rho.expectation(&tilde.mul(&tilde)?)?.re - mean_closed * mean_closed;
    let stats =
        instrument.product_statistics(&b, |x, y| Some(f(x.as_real()?, y.as_real()?)), &rho)?;
    out.check_matrix(
        "f(A,B)~ - closed form",
        &stats.observable.stochastic_operator(),
        &tilde,
    );
    out.check("<f(A,B)>", stats.mean, mean_closed);
    out.check("Delta f(A,B)", stats.variance, var_closed);

    let cond = instrument.conditioned_observable(&b)?;
    let mut cond_gap: f64 = 0.0;
    for (j, (_, by)) in b.iter().enumerate() {
        let closed = parts
            .iter()
            .fold(ComplexMatrix::zeros(d), |acc, (_, _, dual)| {
                &acc + &dual(by)
            });
        cond_gap = cond_gap.max(cond.effect(j).max_abs_diff(&closed));
    }
    out.check("max |(B|A)_y - closed form|", cond_gap, 0.0);
    if demo == DemoName::Example5 {
        out.check("max |(B|A)_y - B_y|", cond.max_effect_diff(&b), 0.0);
    }
    out.fact(
        "completeness_residual",
        json!(product.completeness_residual()),
    );
    out.fact("function", json!("f(x, y) = x y + x"));
    Ok(out.finish(demo, json!({"dim": d, "seed": p.seed}), DEMO_TOLERANCE))
}
