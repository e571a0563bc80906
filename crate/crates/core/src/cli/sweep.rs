//! Parameter sweep of the noisy spin uncertainty terms over `mu` and Bloch
//! vectors.

use serde::Serialize;

use crate::error::Result;
use crate::linalg::{pauli_x, pauli_y};
use crate::random::{random_bloch, seeded_rng, PRNG_ALGORITHM};
use crate::states::{bloch_state, BlochVector};
use crate::statistics::uncertainty_report;
use crate::tolerance::Tolerances;

use super::demo::{noisy_spin_effect, NoisySpinClosedForm, DEMO_TOLERANCE};
use super::io::SCHEMA;

pub const DEFAULT_MU_GRID: [f64; 5] = [0.0, 0.25, 0.5, 0.75, 1.0];

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub mu_grid: Vec<f64>,
    /// Random Bloch vectors drawn when `bloch` is empty.
    pub samples: usize,
    /// How many of the random samples lie on the unit sphere.
    pub unit_samples: usize,
    /// Explicit Bloch vectors, used instead of random samples.
    pub bloch: Vec<[f64; 3]>,
    pub seed: u64,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            mu_grid: DEFAULT_MU_GRID.to_vec(),
            samples: 50,
            unit_samples: 10,
            bloch: Vec::new(),
            seed: 42,
        }
    }
}

/// One `(mu, r)` grid point: computed terms for the effects `A1`, `B1`
/// beside their closed forms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    pub mu: f64,
    pub r1: f64,
    pub r2: f64,
    pub r3: f64,
    pub norm: f64,
    pub commutator_term: f64,
    pub commutator_closed: f64,
    pub covariance_sq: f64,
    pub covariance_closed: f64,
    pub correlation_sq: f64,
    pub correlation_closed: f64,
    pub variance_product: f64,
    pub variance_closed: f64,
    pub inequality_slack: f64,
    pub slack_closed: f64,
    pub max_delta: f64,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub schema: u32,
    pub prng: &'static str,
    pub seed: u64,
    pub tolerance: f64,
    pub max_delta: f64,
    pub min_slack: f64,
    pub equality_rows: usize,
    pub pass: bool,
    pub rows: Vec<SweepRow>,
}

pub fn bloch_samples(config: &SweepConfig) -> Result<Vec<BlochVector>> {
    if !config.bloch.is_empty() {
        return config
            .bloch
            .iter()
            .map(|r| BlochVector::new(r[0], r[1], r[2]))
            .collect();
    }
    let mut rng = seeded_rng(config.seed, 0);
    Ok((0..config.samples)
        .map(|k| random_bloch(&mut rng, k < config.unit_samples))
        .collect())
}

pub fn sweep(config: &SweepConfig, tol: &Tolerances) -> Result<SweepTable> {
    let samples = bloch_samples(config)?;
    let mut rows = Vec::with_capacity(config.mu_grid.len() * samples.len());
    for &mu in &config.mu_grid {
        let a1 = noisy_spin_effect(&pauli_x(), mu);
        let b1 = noisy_spin_effect(&pauli_y(), mu);
        for r in &samples {
            let rho = bloch_state(r)?;
            let report = uncertainty_report(&rho, &a1, &b1, tol)?;
            let closed = NoisySpinClosedForm::new(mu, r);
            let pairs = [
                (report.commutator_term, closed.commutator_term),
                (report.covariance_sq, closed.covariance_sq),
                (report.correlation_sq, closed.correlation_sq),
                (report.variance_product, closed.variance_product),
                (report.inequality_slack, closed.inequality_slack),
            ];
            let max_delta = pairs.iter().map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
            rows.push(SweepRow {
                mu,
                r1: r.r1,
                r2: r.r2,
                r3: r.r3,
                norm: r.norm(),
                commutator_term: report.commutator_term,
                commutator_closed: closed.commutator_term,
                covariance_sq: report.covariance_sq,
                covariance_closed: closed.covariance_sq,
                correlation_sq: report.correlation_sq,
                correlation_closed: closed.correlation_sq,
                variance_product: report.variance_product,
                variance_closed: closed.variance_product,
                inequality_slack: report.inequality_slack,
                slack_closed: closed.inequality_slack,
                max_delta,
                equality: report.inequality_slack.abs() <= DEMO_TOLERANCE,
            });
        }
    }
    let max_delta = rows.iter().map(|r| r.max_delta).fold(0.0, f64::max);
    let min_slack = rows
        .iter()
        .map(|r| r.inequality_slack)
        .fold(f64::INFINITY, f64::min);
    Ok(SweepTable {
        schema: SCHEMA,
        prng: PRNG_ALGORITHM,
        seed: config.seed,
        tolerance: DEMO_TOLERANCE,
        max_delta,
        min_slack,
        equality_rows: rows.iter().filter(|r| r.equality).count(),
        pass: max_delta <= DEMO_TOLERANCE && min_slack >= -DEMO_TOLERANCE,
        rows,
    })
}

const CSV_HEADER: &str = "mu,r1,r2,r3,norm,commutator_term,commutator_closed,covariance_sq,covariance_closed,\
correlation_sq,correlation_closed,variance_product,variance_closed,inequality_slack,slack_closed,max_delta,equality";

/// CSV with one line per row; floats use shortest round-trip formatting.
pub fn to_csv(table: &SweepTable) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in &table.rows {
        let fields = [
            r.mu,
            r.r1,
            r.r2,
            r.r3,
            r.norm,
            r.commutator_term,
            r.commutator_closed,
            r.covariance_sq,
            r.covariance_closed,
            r.correlation_sq,
            r.correlation_closed,
            r.variance_product,
            r.variance_closed,
            r.inequality_slack,
            r.slack_closed,
            r.max_delta,
        ];
        let line: Vec<String> = fields.iter().map(|x| format!("{x:?}")).collect();
        out.push_str(&line.join(","));
        out.push_str(if r.equality { ",true\n" } else { ",false\n" });
    }
    out
}
