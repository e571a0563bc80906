//! Command handlers.

use std::fs;
use std::io::Write;
use std::path::Path;

use serde::Serialize;
use serde_json::{json, Value};

use crate::instruments::{pair_label, Instrument};
use crate::observables::{coarse_grain, Outcome, RealObservable};
use crate::statistics::{average, equality_diagnosis};
use crate::tolerance::Tolerances;

use super::demo::{run_demo, DemoParams};
use super::fuzz::{self, parse_dims, FuzzSummary, RunConfig, WorstInstance};
use super::io::{
    self, load, load_instrument, load_map, load_observable, load_real_observable, load_state,
    to_text, AnyObservable, Diagnostic, DocumentKind, FamilyJson, InstrumentJson, Located,
    MatrixJson, ObservableJson, OutcomeJson, SCHEMA,
};
use super::sweep::{sweep, to_csv, SweepConfig};
use super::{Cli, Command, Status};

type CmdResult = Result<Status, Diagnostic>;

pub fn dispatch(cli: &Cli, out: &mut dyn Write) -> CmdResult {
    let g = &cli.global;
    let tol = g.tolerances()?;
    let compact = g.json;
    match &cli.command {
        Command::Uncertainty {
            state,
            obs_a,
            obs_b,
            tol: stat,
        } => {
            let mut tol = tol;
            if let Some(s) = *stat {
                tol = super::GlobalArgs {
                    tol_stat: Some(s),
                    ..Default::default()
                }
                .apply(tol)
                .map_err(|mut d| {
                    d.field = Some("tol".into());
                    d
                })?;
            }
            uncertainty(state, obs_a, obs_b, &tol, compact, out)
        }
        Command::Demo {
            name,
            mu,
            bloch,
            dim,
        } => {
            if *dim == 0 {
                return Err(Diagnostic::argument("dim", "dim must be at least 1"));
            }
            let params = DemoParams {
                mu: *mu,
                bloch: bloch.unwrap_or(DemoParams::default().bloch),
                dim: *dim,
                seed: g.seed.unwrap_or(DemoParams::default().seed),
            };
            let report = run_demo(*name, &params, &tol)
                .map_err(|e| Diagnostic::argument("demo", e.to_string()))?;
            emit(out, &report, compact)?;
            Ok(if report.pass {
                Status::Ok
            } else {
                Status::ChecksFailed
            })
        }
        Command::Fuzz {
            config,
            trials,
            dims,
            output,
            replay,
        } => {
            if let Some(path) = replay {
                return replay_cmd(path, compact, out);
            }
            let mut cfg = match config {
                Some(path) => load::<RunConfig>(path)?,
                None => RunConfig::default(),
            };
            if let Some(seed) = g.seed {
                cfg.seed = seed;
            }
            if let Some(t) = trials {
                cfg.trials = *t;
            }
            if let Some(d) = dims {
                cfg.dims = parse_dims(d).map_err(|m| Diagnostic::argument("dims", m))?;
            }
            if output.is_some() {
                cfg.output = output.clone();
            }
            cfg.tolerances = g.apply(cfg.tolerances)?;
            cfg.validate()?;
            let summary = fuzz::run(&cfg);
            write_to(cfg.output.as_deref(), out, &to_text(&summary, compact))?;
            Ok(if summary.passed() {
                Status::Ok
            } else {
                Status::ChecksFailed
            })
        }
        Command::SweepExample4 {
            mu_grid,
            samples,
            unit_samples,
            bloch,
            output,
        } => {
            let mut config = SweepConfig {
                samples: *samples,
                unit_samples: *unit_samples,
                bloch: bloch.clone(),
                seed: g.seed.unwrap_or(SweepConfig::default().seed),
                ..SweepConfig::default()
            };
            if let Some(grid) = mu_grid {
                config.mu_grid = grid
                    .split(',')
                    .map(|s| s.trim().parse::<f64>())
                    .collect::<Result<_, _>>()
                    .map_err(|e| Diagnostic::argument("mu-grid", format!("{grid}: {e}")))?;
            }
            if config.mu_grid.is_empty() || (config.bloch.is_empty() && config.samples == 0) {
                return Err(Diagnostic::argument("mu-grid", "the sweep grid is empty"));
            }
            let table = sweep(&config, &tol)
                .map_err(|e| Diagnostic::validation(None, Located::new("bloch", e)))?;
            let text = if compact {
                to_text(&table, true)
            } else {
                to_csv(&table)
            };
            write_to(output.as_deref(), out, text.trim_end())?;
            Ok(if table.pass {
                Status::Ok
            } else {
                Status::ChecksFailed
            })
        }
        Command::Sharp { obs } => {
            let a = load_real_observable(obs, &tol)?;
            let sharp = a.sharp_version(&tol).map_err(|e| computed(obs, e))?;
            let residual = sharp
                .stochastic_operator()
                .max_abs_diff(&a.stochastic_operator());
            emit(
                out,
                &json!({
                    "schema": SCHEMA,
                    "input_is_sharp": a.is_sharp(&tol),
                    "stochastic_residual": residual,
                    "sharp_version": ObservableJson::from(&sharp),
                }),
                compact,
            )?;
            Ok(Status::Ok)
        }
        Command::Conjugate { obs } => {
            let a = load_real_observable(obs, &tol)?;
            let conj = a.conjugate(&tol).map_err(|e| computed(obs, e))?;
            let residual = conj
                .stochastic_operator()
                .max_abs_diff(&a.stochastic_operator());
            emit(
                out,
                &json!({
                    "schema": SCHEMA,
                    "input_is_commutative": a.is_commutative(&tol),
                    "stochastic_residual": residual,
                    "conjugate": ObservableJson::from(&conj),
                }),
                compact,
            )?;
            Ok(Status::Ok)
        }
        Command::CoarseGrain {
            obs,
            instrument,
            map,
        } => {
            let f = load_map(map)?;
            let lookup = |o: &Outcome| f.get(&o.to_string()).copied();
            if let Some(path) = obs {
                let a = load_observable(path, &tol)?;
                let result = match &a {
                    AnyObservable::Real(a) => coarse_grain(a, lookup),
                    AnyObservable::General(a) => coarse_grain(a, lookup),
                }
                .map_err(|e| Diagnostic::validation(Some(map), Located::new("$", e)))?;
                emit(
                    out,
                    &json!({"schema": SCHEMA, "observable": ObservableJson::from(&result)}),
                    compact,
                )?;
            } else {
                let path = instrument
                    .as_deref()
                    .expect("clap requires --obs or --instrument");
                let ins = load_instrument(path, &tol)?;
                let grained = ins
                    .coarse_grain(lookup)
                    .map_err(|e| Diagnostic::validation(Some(map), Located::new("$", e)))?;
                let measured = grained
                    .measured_real_observable()
                    .map_err(|e| computed(path, e))?;
                let direct = coarse_grain(&ins.measured_observable(), lookup)
                    .map_err(|e| Diagnostic::validation(Some(map), Located::new("$", e)))?;
                emit(
                    out,
                    &json!({
                        "schema": SCHEMA,
                        "instrument": kraus_json(&grained),
                        "measured_observable": ObservableJson::from(&measured),
                        "commutation_residual": observable_gap(&measured, &direct),
                    }),
                    compact,
                )?;
            }
            Ok(Status::Ok)
        }
        Command::Sequential {
            instrument,
            obs_b,
            map,
            state,
        } => {
            let ins = load_instrument(instrument, &tol)?;
            let b = load_observable(obs_b, &tol)?;
            let product = match &b {
                AnyObservable::Real(b) => ins.sequential_product(b),
                AnyObservable::General(b) => ins.sequential_product(b),
            }
            .map_err(|e| mismatch(obs_b, e))?;
            let mut doc = json!({
                "schema": SCHEMA,
                "product": ObservableJson::from(&product.to_general()),
                "completeness_residual": product.completeness_residual(),
            });
            if let Some(map_path) = map {
                let f = load_map(map_path)?;
                let pair = |x: &Outcome, y: &Outcome| f.get(&pair_label(x, y)).copied();
                let mapped = product
                    .coarse_grain(pair)
                    .map_err(|e| Diagnostic::validation(Some(map_path), Located::new("$", e)))?;
                doc["function"] =
                    serde_json::to_value(ObservableJson::from(&mapped)).expect("finite");
                if let Some(state_path) = state {
                    let rho = load_state(state_path, &tol)?;
                    let stats = match &b {
                        AnyObservable::Real(b) => ins.product_statistics(b, pair, &rho),
                        AnyObservable::General(b) => ins.product_statistics(b, pair, &rho),
                    }
                    .map_err(|e| mismatch(state_path, e))?;
                    doc["mean"] = json!(stats.mean);
                    doc["variance"] = json!(stats.variance);
                }
            }
            emit(out, &doc, compact)?;
            Ok(Status::Ok)
        }
        Command::Conditioned {
            instrument,
            obs_b,
            state,
        } => {
            let ins = load_instrument(instrument, &tol)?;
            let b = load_observable(obs_b, &tol)?;
            let cond = match &b {
                AnyObservable::Real(b) => ins.conditioned_observable(b).map(AnyObservable::Real),
                AnyObservable::General(b) => {
                    ins.conditioned_observable(b).map(AnyObservable::General)
                }
            }
            .map_err(|e| mismatch(obs_b, e))?;
            let mut doc = json!({"schema": SCHEMA, "conditioned": ObservableJson::from(&cond)});
            if let (Some(path), AnyObservable::Real(b), AnyObservable::Real(c)) = (state, &b, &cond)
            {
                let rho = load_state(path, &tol)?;
                let after = ins
                    .channel_apply(&rho, &tol)
                    .map_err(|e| mismatch(path, e))?;
                doc["mean"] = json!(average(&rho, c).map_err(|e| mismatch(path, e))?);
                doc["mean_after_channel"] =
                    json!(average(&after, b).map_err(|e| mismatch(path, e))?);
            }
            emit(out, &doc, compact)?;
            Ok(Status::Ok)
        }
        Command::Validate { files } => {
            let mut documents = Vec::new();
            for path in files {
                documents.push(validate_file(path, &tol)?);
            }
            emit(
                out,
                &json!({"schema": SCHEMA, "documents": documents}),
                compact,
            )?;
            Ok(Status::Ok)
        }
    }
}

fn uncertainty(
    state: &Path,
    obs_a: &Path,
    obs_b: &Path,
    tol: &Tolerances,
    compact: bool,
    out: &mut dyn Write,
) -> CmdResult {
    let rho = load_state(state, tol)?;
    let a = load_real_observable(obs_a, tol)?;
    let b = load_real_observable(obs_b, tol)?;
    let d = equality_diagnosis(&rho, &a, &b, tol).map_err(|e| mismatch(obs_b, e))?;
    let r = d.report;
    emit(
        out,
        &json!({
            "schema": SCHEMA,
            "report": r,
            "scale": r.scale(),
            "equation_holds": r.equation_holds(),
            "inequality_holds": r.inequality_holds(),
            "equality": d.inequality_is_equality,
            "three_way_equality": d.three_way_equality,
            "robertson_slack": r.robertson_slack(),
            "faithful": d.faithful,
            "min_eigenvalue": d.min_eigenvalue,
            "linear_relation": d.fit,
            "reverse_relation": d.reverse_fit,
            "consistent": d.consistent,
        }),
        compact,
    )?;
    Ok(
        if r.equation_holds() && r.inequality_holds() && d.consistent {
            Status::Ok
        } else {
            Status::ChecksFailed
        },
    )
}

fn replay_cmd(path: &Path, compact: bool, out: &mut dyn Write) -> CmdResult {
    let text = io::read(path)?;
    let value: Value = io::parse(&text, Some(path))?;
    let worst: WorstInstance = if value.get("worst").is_some() {
        io::parse::<FuzzSummary>(&text, Some(path))?.worst
    } else {
        io::parse(&text, Some(path))?
    };
    let replay = fuzz::replay(&worst);
    emit(out, &replay, compact)?;
    Ok(if replay.identical {
        Status::Ok
    } else {
        Status::ChecksFailed
    })
}

fn validate_file(path: &Path, tol: &Tolerances) -> Result<Value, Diagnostic> {
    let text = io::read(path)?;
    let (kind, dim) = match io::document_kind(&text, path)? {
        DocumentKind::State => ("state", load_state(path, tol)?.dim()),
        DocumentKind::Observable => ("observable", load_observable(path, tol)?.dim()),
        DocumentKind::Instrument => ("instrument", load_instrument(path, tol)?.dim()),
    };
    Ok(json!({"file": path.display().to_string(), "type": kind, "dim": dim, "valid": true}))
}

/// An instrument as an explicit Kraus document.
fn kraus_json(ins: &Instrument) -> InstrumentJson {
    InstrumentJson::new(FamilyJson::Kraus {
        outcomes: ins.outcomes().iter().map(OutcomeJson::from).collect(),
        kraus: ins
            .maps()
            .iter()
            .map(|m| m.kraus().iter().map(MatrixJson::from).collect())
            .collect(),
    })
}

fn observable_gap(x: &RealObservable, y: &RealObservable) -> Option<f64> {
    (x.outcomes() == y.outcomes()).then(|| x.max_effect_diff(y))
}

fn computed(path: &Path, e: crate::error::Error) -> Diagnostic {
    Diagnostic::validation(Some(path), Located::new("$", e))
}

/// Inputs that are individually valid but incompatible, e.g. in dimension.
fn mismatch(path: &Path, e: crate::error::Error) -> Diagnostic {
    Diagnostic::validation(Some(path), Located::new("$", e))
}

fn emit<T: Serialize>(out: &mut dyn Write, value: &T, compact: bool) -> Result<(), Diagnostic> {
    writeln!(out, "{}", to_text(value, compact))
        .map_err(|e| Diagnostic::io(Path::new("<stdout>"), &e))
}

fn write_to(path: Option<&Path>, out: &mut dyn Write, text: &str) -> Result<(), Diagnostic> {
    match path {
        Some(p) => fs::write(p, format!("{text}\n")).map_err(|e| Diagnostic::io(p, &e)),
        None => writeln!(out, "{text}").map_err(|e| Diagnostic::io(Path::new("<stdout>"), &e)),
    }
}
