//! Command-line front end. Every command reads JSON documents, writes a
//! JSON (or CSV) report to stdout and signals failures through its exit code:
//! 0 success, 1 a checked invariant failed, 2 invalid input.

// `Diagnostic` is a flat report that only travels up to `main`.
#![allow(clippy::result_large_err)]

pub mod commands;
pub mod demo;
pub mod fuzz;
pub mod io;
pub mod sweep;

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::tolerance::Tolerances;
use demo::DemoName;
use io::Diagnostic;

#[derive(Debug, Parser)]
#[command(
    name = "qobs",
    version,
    about = "Quantum observables, uncertainty relations and instruments"
)]
pub struct Cli {
    #[command(flatten)]
    pub global: GlobalArgs,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GlobalArgs {
    /// Tolerance for structural checks (Hermiticity, completeness).
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_lin: Option<f64>,
    /// Tolerance on spectra (positivity, effect bounds).
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_psd: Option<f64>,
    /// Tolerance for statistical identities.
    #[arg(long, global = true, value_name = "TOL")]
    pub tol_stat: Option<f64>,
    /// Absolute eigenvalue clustering threshold.
    #[arg(long, global = true, value_name = "TOL")]
    pub cluster_tol: Option<f64>,
    /// Seed for random fixtures.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Emit compact single-line JSON (CSV commands switch to JSON).
    #[arg(long, global = true)]
    pub json: bool,
}

impl GlobalArgs {
    /// Applies the tolerance flags on top of `base`.
    pub fn apply(&self, base: Tolerances) -> Result<Tolerances, Diagnostic> {
        let check = |name: &str, v: Option<f64>| -> Result<Option<f64>, Diagnostic> {
            match v {
                Some(x) if !(x.is_finite() && x > 0.0) => Err(Diagnostic::argument(
                    name,
                    format!("{name} must be positive and finite, got {x}"),
                )),
                other => Ok(other),
            }
        };
        Ok(Tolerances {
            lin: check("tol-lin", self.tol_lin)?.unwrap_or(base.lin),
            psd: check("tol-psd", self.tol_psd)?.unwrap_or(base.psd),
            stat: check("tol-stat", self.tol_stat)?.unwrap_or(base.stat),
            cluster: check("cluster-tol", self.cluster_tol)?.or(base.cluster),
        })
    }

    pub fn tolerances(&self) -> Result<Tolerances, Diagnostic> {
        self.apply(Tolerances::default())
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Uncertainty report for a state and two real observables.
    Uncertainty {
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        obs_a: PathBuf,
        #[arg(long)]
        obs_b: PathBuf,
        /// Overrides --tol-stat for this report.
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Worked examples with computed values beside closed forms.
    Demo {
        name: DemoName,
        /// Noise parameter of the example4 spin observables.
        #[arg(long, default_value_t = 0.5)]
        mu: f64,
        /// Bloch vector `r1,r2,r3` for example4.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        bloch: Option<[f64; 3]>,
        /// Dimension of random fixtures.
        #[arg(long, default_value_t = 2)]
        dim: usize,
    },
    /// Randomized property checks.
    Fuzz {
        /// RunConfig JSON; flags override its fields.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long)]
        trials: Option<usize>,
        /// Dimensions, `2..6` or `2,3,5`.
        #[arg(long)]
        dims: Option<String>,
        /// Write the summary here instead of stdout.
        #[arg(long)]
        output: Option<PathBuf>,
        /// Re-evaluate the worst instance of a summary (or a bare instance dump).
        #[arg(long, conflicts_with_all = ["config", "trials", "dims"])]
        replay: Option<PathBuf>,
    },
    /// Noisy spin terms over a grid of mu and Bloch vectors.
    #[command(name = "sweep-example4")]
    SweepExample4 {
        /// Comma-separated mu values.
        #[arg(long, allow_hyphen_values = true)]
        mu_grid: Option<String>,
        /// Random Bloch vectors per mu.
        #[arg(long, default_value_t = 50)]
        samples: usize,
        /// How many random samples lie on the unit sphere.
        #[arg(long, default_value_t = 10)]
        unit_samples: usize,
        /// Explicit Bloch vector `r1,r2,r3`; repeatable, replaces random samples.
        #[arg(long, value_parser = parse_triple, allow_hyphen_values = true)]
        bloch: Vec<[f64; 3]>,
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Sharp version of a real observable.
    Sharp {
        #[arg(long)]
        obs: PathBuf,
    },
    /// Conjugate of a real observable.
    Conjugate {
        #[arg(long)]
        obs: PathBuf,
    },
    /// Coarse graining of an observable or instrument by a label map.
    #[command(name = "coarse-grain")]
    CoarseGrain {
        #[arg(
            long,
            required_unless_present = "instrument",
            conflicts_with = "instrument"
        )]
        obs: Option<PathBuf>,
        #[arg(long)]
        instrument: Option<PathBuf>,
        /// JSON map `{"label": value}`.
        #[arg(long)]
        map: PathBuf,
    },
    /// Sequential product of an instrument followed by an observable.
    Sequential {
        #[arg(long)]
        instrument: PathBuf,
        #[arg(long)]
        obs_b: PathBuf,
        /// JSON map from `"x,y"` labels to values.
        #[arg(long)]
        map: Option<PathBuf>,
        /// State for the mean and variance of the mapped observable.
        #[arg(long, requires = "map")]
        state: Option<PathBuf>,
    },
    /// Observable conditioned on a preceding instrument.
    Conditioned {
        #[arg(long)]
        instrument: PathBuf,
        #[arg(long)]
        obs_b: PathBuf,
        #[arg(long)]
        state: Option<PathBuf>,
    },
    /// Validates state, observable and instrument documents.
    Validate {
        #[arg(required = true)]
        files: Vec<PathBuf>,
    },
}

/// Parses `r1,r2,r3`.
pub fn parse_triple(text: &str) -> Result<[f64; 3], String> {
    let parts: Vec<f64> = text
        .split(',')
        .map(|s| s.trim().parse::<f64>().map_err(|e| format!("`{s}`: {e}")))
        .collect::<Result<_, _>>()?;
    <[f64; 3]>::try_from(parts).map_err(|p| format!("expected three components, got {}", p.len()))
}

/// Outcome of a command that ran to completion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Ok,
    ChecksFailed,
}

pub fn run(cli: &Cli, out: &mut dyn Write) -> Result<Status, Diagnostic> {
    commands::dispatch(cli, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn cli_definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn triples() {
        assert_eq!(parse_triple("0.3,-0.4, 0.2").unwrap(), [0.3, -0.4, 0.2]);
        assert!(parse_triple("1,2").is_err());
        assert!(parse_triple("1,x,2").is_err());
    }

    #[test]
    fn tolerance_flags() {
        let g = GlobalArgs {
            tol_stat: Some(1e-6),
            ..GlobalArgs::default()
        };
        let t = g.tolerances().unwrap();
        assert_eq!(t.stat, 1e-6);
        assert_eq!(t.lin, Tolerances::default().lin);
        let bad = GlobalArgs {
            tol_lin: Some(-1.0),
            ..GlobalArgs::default()
        };
        assert_eq!(
            bad.tolerances().unwrap_err().field.as_deref(),
            Some("tol-lin")
        );
    }
}
