//! JSON documents read and written by the command-line tool, and the
//! diagnostics emitted when they fail to parse or validate.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::instruments::Instrument;
use crate::linalg::ComplexMatrix;
use crate::observables::{GeneralObservable, Outcome, Povm, RealObservable};
use crate::states::{bloch_state, BlochVector, DensityOperator};
use crate::tolerance::Tolerances;

/// Version stamped on every document the tool writes.
pub const SCHEMA: u32 = 1;

/// `{"dim": d, "re": [[..]], "im": [[..]]}`, row-major; `im` defaults to zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixJson {
    pub dim: usize,
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl From<&ComplexMatrix> for MatrixJson {
    fn from(m: &ComplexMatrix) -> Self {
        let d = m.dim();
        let rows = |f: fn(&num_complex::Complex64) -> f64| -> Vec<Vec<f64>> {
            (0..d).map(|i| m.row(i).iter().map(f).collect()).collect()
        };
        let im = rows(|z| z.im);
        MatrixJson {
            dim: d,
            re: rows(|z| z.re),
            im: im.iter().flatten().any(|&x| x != 0.0).then_some(im),
        }
    }
}

impl MatrixJson {
    pub fn to_matrix(&self, field: &str) -> Result<ComplexMatrix, Located> {
        let shape = |part: &str, rows: &[Vec<f64>]| -> Result<(), Located> {
            if rows.len() != self.dim {
                return Err(Located::new(
                    format!("{field}.{part}"),
                    Error::InvalidShape(format!("{} rows for dim {}", rows.len(), self.dim)),
                ));
            }
            if let Some((i, r)) = rows.iter().enumerate().find(|(_, r)| r.len() != self.dim) {
                return Err(Located::new(
                    format!("{field}.{part}[{i}]"),
                    Error::InvalidShape(format!("{} columns for dim {}", r.len(), self.dim)),
                ));
            }
            Ok(())
        };
        shape("re", &self.re)?;
        if let Some(im) = &self.im {
            shape("im", im)?;
        }
        let data = (0..self.dim * self.dim)
            .map(|k| {
                let (i, j) = (k / self.dim, k % self.dim);
                let im = self.im.as_ref().map_or(0.0, |m| m[i][j]);
                num_complex::Complex64::new(self.re[i][j], im)
            })
            .collect();
        ComplexMatrix::from_vec(self.dim, data).map_err(|e| Located::new(field, e))
    }
}

/// `{"type": "density", "matrix": ..}` or `{"type": "bloch", "r": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", try_from = "StateDoc")]
pub enum StateJson {
    Density { matrix: MatrixJson },
    Bloch { r: [f64; 3] },
}

// Tagged enums buffer their content and lose field paths on error; the flat
// document forms below keep them.

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum StateKind {
    Density,
    Bloch,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct StateDoc {
    #[serde(rename = "type")]
    kind: StateKind,
    matrix: Option<MatrixJson>,
    r: Option<[f64; 3]>,
}

fn required<T>(value: Option<T>, what: &str) -> Result<T, String> {
    value.ok_or_else(|| format!("missing field `{what}`"))
}

impl TryFrom<StateDoc> for StateJson {
    type Error = String;

    fn try_from(doc: StateDoc) -> Result<Self, String> {
        match doc.kind {
            StateKind::Density if doc.r.is_none() => Ok(StateJson::Density {
                matrix: required(doc.matrix, "matrix")?,
            }),
            StateKind::Bloch if doc.matrix.is_none() => Ok(StateJson::Bloch {
                r: required(doc.r, "r")?,
            }),
            _ => Err("a state has either `matrix` (density) or `r` (bloch)".to_owned()),
        }
    }
}

impl StateJson {
    pub fn density(rho: &DensityOperator) -> Self {
        StateJson::Density {
            matrix: rho.matrix().into(),
        }
    }

    pub fn to_state(&self, tol: &Tolerances) -> Result<DensityOperator, Located> {
        match self {
            StateJson::Density { matrix } => {
                let m = matrix.to_matrix("matrix")?;
                DensityOperator::with_tolerances(m, tol).map_err(|e| Located::new("matrix", e))
            }
            StateJson::Bloch { r } => BlochVector::with_tolerance(r[0], r[1], r[2], tol.lin)
                .and_then(|b| bloch_state(&b))
                .map_err(|e| Located::new("r", e)),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObservableTag {
    #[default]
    Observable,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InstrumentTag {
    #[default]
    Instrument,
}

/// Real outcomes under `outcomes` or string outcomes under `labels`, one
/// effect per outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ObservableJson {
    #[serde(rename = "type")]
    pub kind: ObservableTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outcomes: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    pub effects: Vec<MatrixJson>,
}

/// A validated observable of either outcome kind.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyObservable {
    Real(RealObservable),
    General(GeneralObservable),
}

impl AnyObservable {
    pub fn dim(&self) -> usize {
        match self {
            AnyObservable::Real(a) => a.dim(),
            AnyObservable::General(a) => a.dim(),
        }
    }

    pub fn to_general(&self) -> GeneralObservable {
        match self {
            AnyObservable::Real(a) => a.to_general(),
            AnyObservable::General(a) => a.clone(),
        }
    }
}

impl From<&RealObservable> for ObservableJson {
    fn from(a: &RealObservable) -> Self {
        ObservableJson {
            kind: ObservableTag::Observable,
            outcomes: Some(a.outcomes().to_vec()),
            labels: None,
            effects: a.iter().map(|(_, e)| e.into()).collect(),
        }
    }
}

impl From<&GeneralObservable> for ObservableJson {
    fn from(a: &GeneralObservable) -> Self {
        ObservableJson {
            kind: ObservableTag::Observable,
            outcomes: None,
            labels: Some(a.labels().to_vec()),
            effects: a.effects().iter().map(|e| e.matrix().into()).collect(),
        }
    }
}

impl From<&AnyObservable> for ObservableJson {
    fn from(a: &AnyObservable) -> Self {
        match a {
            AnyObservable::Real(a) => a.into(),
            AnyObservable::General(a) => a.into(),
        }
    }
}

impl ObservableJson {
    pub fn to_observable(&self, tol: &Tolerances) -> Result<AnyObservable, Located> {
        let (key, count) = match (&self.outcomes, &self.labels) {
            (Some(o), None) => ("outcomes", o.len()),
            (None, Some(l)) => ("labels", l.len()),
            (Some(_), Some(_)) => {
                return Err(Located::new(
                    "labels",
                    Error::InvalidShape("give either outcomes or labels, not both".into()),
                ))
            }
            (None, None) => {
                return Err(Located::new(
                    "outcomes",
                    Error::InvalidShape("missing outcomes or labels".into()),
                ))
            }
        };
        if count != self.effects.len() {
            return Err(Located::new(
                "effects",
                Error::InvalidShape(format!("{count} {key} but {} effects", self.effects.len())),
            ));
        }
        let effects = self
            .effects
            .iter()
            .enumerate()
            .map(|(i, m)| m.to_matrix(&format!("effects[{i}]")))
            .collect::<Result<Vec<_>, _>>()?;
        let locate = |e: Error| {
            let field = match &e {
                Error::NotAnEffect { index, .. } => format!("effects[{index}]"),
                Error::DuplicateOutcome(_) | Error::InvalidArgument(_) => key.to_owned(),
                _ => "effects".to_owned(),
            };
            Located::new(field, e)
        };
        match (&self.outcomes, &self.labels) {
            (Some(o), _) => {
                RealObservable::with_tolerances(o.iter().copied().zip(effects).collect(), tol)
                    .map(AnyObservable::Real)
                    .map_err(locate)
            }
            (_, Some(l)) => {
                GeneralObservable::with_tolerances(l.iter().cloned().zip(effects).collect(), tol)
                    .map(AnyObservable::General)
                    .map_err(locate)
            }
            _ => unreachable!(),
        }
    }
}

/// A number or a string outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum OutcomeJson {
    Real(f64),
    Label(String),
}

impl From<OutcomeJson> for Outcome {
    fn from(o: OutcomeJson) -> Self {
        match o {
            OutcomeJson::Real(x) => Outcome::Real(x),
            OutcomeJson::Label(s) => Outcome::Label(s),
        }
    }
}

impl From<&Outcome> for OutcomeJson {
    fn from(o: &Outcome) -> Self {
        match o {
            Outcome::Real(x) => OutcomeJson::Real(*x),
            Outcome::Label(s) => OutcomeJson::Label(s.clone()),
        }
    }
}

/// Reads a map key as a real outcome when it parses as a finite number.
pub fn outcome_from_key(key: &str) -> Outcome {
    match key.parse::<f64>() {
        Ok(x) if x.is_finite() => Outcome::Real(x),
        _ => Outcome::Label(key.to_owned()),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstrumentDoc")]
pub struct InstrumentJson {
    #[serde(rename = "type")]
    pub kind: InstrumentTag,
    #[serde(flatten)]
    pub family: FamilyJson,
}

#[derive(Deserialize)]
#[serde(rename_all = "lowercase")]
enum FamilyKind {
    Trivial,
    Holevo,
    Lueders,
    Kraus,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct InstrumentDoc {
    #[serde(rename = "type")]
    kind: InstrumentTag,
    family: FamilyKind,
    dim: Option<usize>,
    omega: Option<BTreeMap<String, f64>>,
    observable: Option<ObservableJson>,
    states: Option<Vec<StateJson>>,
    outcomes: Option<Vec<OutcomeJson>>,
    kraus: Option<Vec<Vec<MatrixJson>>>,
}

impl TryFrom<InstrumentDoc> for InstrumentJson {
    type Error = String;

    fn try_from(d: InstrumentDoc) -> Result<Self, String> {
        let present = [
            ("dim", d.dim.is_some()),
            ("omega", d.omega.is_some()),
            ("observable", d.observable.is_some()),
            ("states", d.states.is_some()),
            ("outcomes", d.outcomes.is_some()),
            ("kraus", d.kraus.is_some()),
        ];
        let (family, allowed): (FamilyJson, &[&str]) = match d.family {
            FamilyKind::Trivial => (
                FamilyJson::Trivial {
                    dim: required(d.dim, "dim")?,
                    omega: required(d.omega, "omega")?,
                },
                &["dim", "omega"],
            ),
            FamilyKind::Holevo => (
                FamilyJson::Holevo {
                    observable: required(d.observable, "observable")?,
                    states: required(d.states, "states")?,
                },
                &["observable", "states"],
            ),
            FamilyKind::Lueders => (
                FamilyJson::Lueders {
                    observable: required(d.observable, "observable")?,
                },
                &["observable"],
            ),
            FamilyKind::Kraus => (
                FamilyJson::Kraus {
                    outcomes: required(d.outcomes, "outcomes")?,
                    kraus: required(d.kraus, "kraus")?,
                },
                &["outcomes", "kraus"],
            ),
        };
        if let Some((name, _)) = present.iter().find(|(n, p)| *p && !allowed.contains(n)) {
            return Err(format!(
                "field `{name}` does not belong to this instrument family"
            ));
        }
        Ok(InstrumentJson {
            kind: d.kind,
            family,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "lowercase")]
pub enum FamilyJson {
    /// `omega` maps outcome labels to probabilities.
    Trivial {
        dim: usize,
        omega: BTreeMap<String, f64>,
    },
    /// One post-measurement state per outcome of `observable`.
    Holevo {
        observable: ObservableJson,
        states: Vec<StateJson>,
    },
    Lueders {
        observable: ObservableJson,
    },
    /// Explicit Kraus lists, one per outcome.
    Kraus {
        outcomes: Vec<OutcomeJson>,
        kraus: Vec<Vec<MatrixJson>>,
    },
}

impl InstrumentJson {
    pub fn new(family: FamilyJson) -> Self {
        InstrumentJson {
            kind: InstrumentTag::Instrument,
            family,
        }
    }

    pub fn to_instrument(&self, tol: &Tolerances) -> Result<Instrument, Located> {
        match &self.family {
            FamilyJson::Trivial { dim, omega } => {
                if *dim == 0 {
                    return Err(Located::new(
                        "dim",
                        Error::InvalidShape("dim must be positive".into()),
                    ));
                }
                let weights = omega
                    .iter()
                    .map(|(k, &w)| (outcome_from_key(k), w))
                    .collect();
                Instrument::trivial(weights, *dim, tol).map_err(|e| Located::new("omega", e))
            }
            FamilyJson::Holevo { observable, states } => {
                let a = observable
                    .to_observable(tol)
                    .map_err(|l| l.within("observable"))?;
                let alphas = states
                    .iter()
                    .enumerate()
                    .map(|(i, s)| {
                        s.to_state(tol)
                            .map_err(|l| l.within(&format!("states[{i}]")))
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                match &a {
                    AnyObservable::Real(a) => Instrument::holevo(a, &alphas, tol),
                    AnyObservable::General(a) => Instrument::holevo(a, &alphas, tol),
                }
                .map_err(|e| Located::new("states", e))
            }
            FamilyJson::Lueders { observable } => {
                let a = observable
                    .to_observable(tol)
                    .map_err(|l| l.within("observable"))?;
                match &a {
                    AnyObservable::Real(a) => Instrument::lueders(a, tol),
                    AnyObservable::General(a) => Instrument::lueders(a, tol),
                }
                .map_err(|e| Located::new("observable", e))
            }
            FamilyJson::Kraus { outcomes, kraus } => {
                let lists = kraus
                    .iter()
                    .enumerate()
                    .map(|(i, list)| {
                        list.iter()
                            .enumerate()
                            .map(|(j, m)| m.to_matrix(&format!("kraus[{i}][{j}]")))
                            .collect::<Result<Vec<_>, _>>()
                    })
                    .collect::<Result<Vec<_>, _>>()?;
                let outcomes = outcomes.iter().cloned().map(Outcome::from).collect();
                Instrument::new(outcomes, lists, tol).map_err(|e| {
                    let field = match e {
                        Error::DuplicateOutcome(_) | Error::InvalidArgument(_) => "outcomes",
                        _ => "kraus",
                    };
                    Located::new(field, e)
                })
            }
        }
    }
}

/// A domain error together with the JSON path of the offending field.
#[derive(Debug, Clone, PartialEq)]
pub struct Located {
    pub field: String,
    pub error: Error,
}

impl Located {
    pub fn new(field: impl Into<String>, error: Error) -> Self {
        Located {
            field: field.into(),
            error,
        }
    }

    /// Prefixes the field path with an enclosing field.
    pub fn within(self, outer: &str) -> Self {
        Located {
            field: format!("{outer}.{}", self.field),
            error: self.error,
        }
    }
}

/// Machine-readable description of a failure, printed on stderr.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostic {
    pub schema: u32,
    /// `io`, `parse`, `validation` or `argument`.
    pub error: &'static str,
    pub file: Option<String>,
    pub field: Option<String>,
    pub invariant: String,
    pub violation: Option<f64>,
    pub message: String,
}

impl Diagnostic {
    pub fn validation(file: Option<&Path>, located: Located) -> Self {
        Diagnostic {
            schema: SCHEMA,
            error: "validation",
            file: file.map(|p| p.display().to_string()),
            field: Some(located.field),
            invariant: located.error.invariant().to_owned(),
            violation: located.error.violation(),
            message: located.error.to_string(),
        }
    }

    pub fn argument(field: &str, message: impl Into<String>) -> Self {
        Diagnostic {
            schema: SCHEMA,
            error: "argument",
            file: None,
            field: Some(field.to_owned()),
            invariant: "argument".to_owned(),
            violation: None,
            message: message.into(),
        }
    }

    pub fn io(file: &Path, err: &std::io::Error) -> Self {
        Diagnostic {
            schema: SCHEMA,
            error: "io",
            file: Some(file.display().to_string()),
            field: None,
            invariant: "readable".to_owned(),
            violation: None,
            message: err.to_string(),
        }
    }

    /// An error from the library not tied to a single input field.
    pub fn computation(error: &Error) -> Self {
        Diagnostic {
            schema: SCHEMA,
            error: "validation",
            file: None,
            field: None,
            invariant: error.invariant().to_owned(),
            violation: error.violation(),
            message: error.to_string(),
        }
    }
}

/// Deserializes a document, reporting the JSON path of the first bad field.
pub fn parse<T: DeserializeOwned>(text: &str, file: Option<&Path>) -> Result<T, Diagnostic> {
    let diagnostic = |field: String, message: String| Diagnostic {
        schema: SCHEMA,
        error: "parse",
        file: file.map(|p| p.display().to_string()),
        field: Some(field),
        invariant: "schema".to_owned(),
        violation: None,
        message,
    };
    let mut de = serde_json::Deserializer::from_str(text);
    let value = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let path = e.path().to_string();
        let field = if path == "." { "$".to_owned() } else { path };
        diagnostic(field, e.into_inner().to_string())
    })?;
    de.end()
        .map_err(|e| diagnostic("$".to_owned(), e.to_string()))?;
    Ok(value)
}

pub fn read(path: &Path) -> Result<String, Diagnostic> {
    fs::read_to_string(path).map_err(|e| Diagnostic::io(path, &e))
}

pub fn load<T: DeserializeOwned>(path: &Path) -> Result<T, Diagnostic> {
    parse(&read(path)?, Some(path))
}

pub fn load_state(path: &Path, tol: &Tolerances) -> Result<DensityOperator, Diagnostic> {
    load::<StateJson>(path)?
        .to_state(tol)
        .map_err(|l| Diagnostic::validation(Some(path), l))
}

pub fn load_observable(path: &Path, tol: &Tolerances) -> Result<AnyObservable, Diagnostic> {
    load::<ObservableJson>(path)?
        .to_observable(tol)
        .map_err(|l| Diagnostic::validation(Some(path), l))
}

pub fn load_real_observable(path: &Path, tol: &Tolerances) -> Result<RealObservable, Diagnostic> {
    match load_observable(path, tol)? {
        AnyObservable::Real(a) => Ok(a),
        AnyObservable::General(_) => Err(Diagnostic::validation(
            Some(path),
            Located::new(
                "labels",
                Error::NotRealValued("observable has labelled outcomes".into()),
            ),
        )),
    }
}

pub fn load_instrument(path: &Path, tol: &Tolerances) -> Result<Instrument, Diagnostic> {
    load::<InstrumentJson>(path)?
        .to_instrument(tol)
        .map_err(|l| Diagnostic::validation(Some(path), l))
}

/// A coarse-graining function `{"label": value}`.
pub fn load_map(path: &Path) -> Result<BTreeMap<String, f64>, Diagnostic> {
    load(path)
}

/// Document kinds accepted by `validate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DocumentKind {
    State,
    Observable,
    Instrument,
}

/// Determines the kind of a document from its `type` field.
pub fn document_kind(text: &str, file: &Path) -> Result<DocumentKind, Diagnostic> {
    #[derive(Deserialize)]
    struct Tagged {
        #[serde(rename = "type")]
        kind: String,
    }
    let tagged: Tagged = parse(text, Some(file))?;
    match tagged.kind.as_str() {
        "density" | "bloch" => Ok(DocumentKind::State),
        "observable" => Ok(DocumentKind::Observable),
        "instrument" => Ok(DocumentKind::Instrument),
        other => Err(Diagnostic {
            schema: SCHEMA,
            error: "parse",
            file: Some(file.display().to_string()),
            field: Some("type".to_owned()),
            invariant: "schema".to_owned(),
            violation: None,
            message: format!("unknown document type `{other}`"),
        }),
    }
}

/// Serializes output, compact when `compact` is set.
pub fn to_text<T: Serialize>(value: &T, compact: bool) -> String {
    if compact {
        serde_json::to_string(value)
    } else {
        serde_json::to_string_pretty(value)
    }
    .expect("output documents contain only finite numbers")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tol() -> Tolerances {
        Tolerances::default()
    }

    #[test]
    fn matrix_roundtrip() {
        let m = ComplexMatrix::from_rows(&[
            vec![
                num_complex::Complex64::new(0.1, 0.0),
                num_complex::Complex64::new(0.3, -0.7),
            ],
            vec![
                num_complex::Complex64::new(1.0 / 3.0, 0.0),
                num_complex::Complex64::new(-2.0, 1e-300),
            ],
        ])
        .unwrap();
        let text = serde_json::to_string(&MatrixJson::from(&m)).unwrap();
        let back: MatrixJson = parse(&text, None).unwrap();
        assert_eq!(back.to_matrix("m").unwrap(), m);

        let real: MatrixJson = parse(r#"{"dim":2,"re":[[1,0],[0,1]]}"#, None).unwrap();
        assert!(real.im.is_none());
        assert_eq!(MatrixJson::from(&real.to_matrix("m").unwrap()), real);
    }

    #[test]
    fn shape_errors_name_the_row() {
        let m: MatrixJson = parse(r#"{"dim":2,"re":[[1,0],[0]]}"#, None).unwrap();
        let err = m.to_matrix("matrix").unwrap_err();
        assert_eq!(err.field, "matrix.re[1]");
        assert_eq!(err.error.invariant(), "shape");
    }

    #[test]
    fn parse_errors_name_the_field() {
        let err = parse::<StateJson>(
            r#"{"type":"density","matrix":{"dim":2,"re":[[1,0],[0,"x"]]}}"#,
            None,
        )
        .unwrap_err();
        assert_eq!(err.error, "parse");
        assert_eq!(err.field.as_deref(), Some("matrix.re[1][1]"));
        let err = parse::<StateJson>(r#"{"type":"bloch","r":[0,0]}"#, None).unwrap_err();
        assert_eq!(err.field.as_deref(), Some("r"));
        let err = parse::<StateJson>("{\"type\":\"bloch\",", None).unwrap_err();
        assert_eq!(err.invariant, "schema");
    }

    #[test]
    fn states() {
        let s: StateJson = parse(r#"{"type":"bloch","r":[0,0,1]}"#, None).unwrap();
        let rho = s.to_state(&tol()).unwrap();
        assert_eq!(rho.matrix(), &ComplexMatrix::diag_real(&[1.0, 0.0]));

        let s: StateJson = parse(
            r#"{"type":"density","matrix":{"dim":2,"re":[[0.6,0],[0,0.6]]}}"#,
            None,
        )
        .unwrap();
        let err = s.to_state(&tol()).unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("matrix", "trace_one")
        );
        assert!((err.error.violation().unwrap() - 0.2).abs() < 1e-12);

        let s: StateJson = parse(r#"{"type":"bloch","r":[1,1,0]}"#, None).unwrap();
        let err = s.to_state(&tol()).unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("r", "bloch_ball")
        );
    }

    #[test]
    fn observables() {
        let text = r#"{"type":"observable","outcomes":[1,-1],
            "effects":[{"dim":2,"re":[[1,0],[0,0]]},{"dim":2,"re":[[0,0],[0,1]]}]}"#;
        let a = parse::<ObservableJson>(text, None)
            .unwrap()
            .to_observable(&tol())
            .unwrap();
        let AnyObservable::Real(real) = &a else {
            panic!("expected real outcomes")
        };
        assert_eq!(real.outcomes(), &[-1.0, 1.0]);
        let back = ObservableJson::from(&a).to_observable(&tol()).unwrap();
        assert_eq!(back, a);

        let text = r#"{"type":"observable","outcomes":[1,-1],
            "effects":[{"dim":2,"re":[[1,0],[0,0]]},{"dim":2,"re":[[0,0],[0,1.5]]}]}"#;
        let err = parse::<ObservableJson>(text, None)
            .unwrap()
            .to_observable(&tol())
            .unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("effects[1]", "effect_bounds")
        );

        let text = r#"{"type":"observable","labels":["up","up"],
            "effects":[{"dim":1,"re":[[0.5]]},{"dim":1,"re":[[0.5]]}]}"#;
        let err = parse::<ObservableJson>(text, None)
            .unwrap()
            .to_observable(&tol())
            .unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("labels", "distinct_outcomes")
        );

        let text = r#"{"type":"observable","outcomes":[0,1],
            "effects":[{"dim":1,"re":[[0.5]]},{"dim":1,"re":[[0.4]]}]}"#;
        let err = parse::<ObservableJson>(text, None)
            .unwrap()
            .to_observable(&tol())
            .unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("effects", "completeness")
        );
    }

    #[test]
    fn instruments() {
        let text =
            r#"{"type":"instrument","family":"trivial","dim":2,"omega":{"0":0.25,"1":0.75}}"#;
        let ins = parse::<InstrumentJson>(text, None)
            .unwrap()
            .to_instrument(&tol())
            .unwrap();
        assert!(ins.is_real_valued());
        assert_eq!(ins.len(), 2);

        let text = r#"{"type":"instrument","family":"kraus","outcomes":["a"],
            "kraus":[[{"dim":2,"re":[[1,0],[0,1]]},{"dim":2,"re":[[1,0],[0,0]]}]]}"#;
        let err = parse::<InstrumentJson>(text, None)
            .unwrap()
            .to_instrument(&tol())
            .unwrap_err();
        assert_eq!(
            (err.field.as_str(), err.error.invariant()),
            ("kraus", "trace_nonincreasing")
        );

        let text = r#"{"type":"instrument","family":"lueders","observable":{"type":"observable",
            "outcomes":[0,1],"effects":[{"dim":1,"re":[[0.5]]},{"dim":1,"re":[[0.6]]}]}}"#;
        let err = parse::<InstrumentJson>(text, None)
            .unwrap()
            .to_instrument(&tol())
            .unwrap_err();
        assert_eq!(err.field, "observable.effects");

        let err = parse::<InstrumentJson>(r#"{"type":"instrument","family":"teleport"}"#, None)
            .unwrap_err();
        assert_eq!(err.invariant, "schema");
    }

    #[test]
    fn map_keys() {
        assert_eq!(outcome_from_key("-1.5"), Outcome::Real(-1.5));
        assert_eq!(outcome_from_key("up"), Outcome::Label("up".into()));
        assert_eq!(outcome_from_key("NaN"), Outcome::Label("NaN".into()));
    }
}
