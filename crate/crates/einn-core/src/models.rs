//! Model specification format, validation, and the built-in zoo.
//!
//! A model is a TOML document (schema version 1): declared state variables,
//! one right-hand-side expression per state variable, a fixed-parameter
//! table, the designated bifurcation parameter, the candidate coordinate and
//! window swept by the EINN, and one-sided feasibility bounds used to filter
//! reported predictions. All expressions are parsed eagerly so malformed
//! models fail at load time, not mid-run.

use crate::exprdsl::{self, Expr, ExprError};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::fmt;
use thiserror::Error;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("config parse error: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("config serialize error: {0}")]
    TomlSer(#[from] toml::ser::Error),
    #[error("unsupported schema_version {found} (this build reads {supported})")]
    SchemaVersion { found: u32, supported: u32 },
    #[error("equation for '{equation}': {source}")]
    ExpressionParse {
        equation: String,
        source: ExprError,
    },
    #[error("closed-form inverse for '{model}': {source}")]
    ClosedFormParse { model: String, source: ExprError },
    #[error("feasibility constraint '{0}' is not of the form '<symbol> >= <number>' or '<symbol> <= <number>'")]
    BadConstraint(String),
    #[error("invalid model '{id}':\n{}", diagnostics.iter().map(|d| format!("  {d}")).collect::<Vec<_>>().join("\n"))]
    Invalid {
        id: String,
        diagnostics: Vec<Diagnostic>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// A validation finding: where in the document, how bad, and what.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub severity: Severity,
    pub location: String,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        write!(f, "{sev} [{}]: {}", self.location, self.message)
    }
}

fn error(location: &str, message: String) -> Diagnostic {
    Diagnostic {
        severity: Severity::Error,
        location: location.to_string(),
        message,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundKind {
    AtLeast,
    AtMost,
}

/// One-sided bound on a single symbol, e.g. `r >= 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub symbol: String,
    pub kind: BoundKind,
    pub bound: f64,
}

impl Constraint {
    pub fn parse(text: &str) -> Result<Constraint, ModelError> {
        let (kind, sep) = if text.contains(">=") {
            (BoundKind::AtLeast, ">=")
        } else if text.contains("<=") {
            (BoundKind::AtMost, "<=")
        } else {
            return Err(ModelError::BadConstraint(text.to_string()));
        };
        let mut parts = text.splitn(2, sep);
        let symbol = parts.next().unwrap_or("").trim();
        let bound = parts.next().unwrap_or("").trim();
        if symbol.is_empty() {
            return Err(ModelError::BadConstraint(text.to_string()));
        }
        let bound: f64 = bound
            .parse()
            .map_err(|_| ModelError::BadConstraint(text.to_string()))?;
        Ok(Constraint {
            symbol: symbol.to_string(),
            kind,
            bound,
        })
    }

    pub fn satisfied(&self, value: f64) -> bool {
        match self.kind {
            BoundKind::AtLeast => value >= self.bound,
            BoundKind::AtMost => value <= self.bound,
        }
    }
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sep = match self.kind {
            BoundKind::AtLeast => ">=",
            BoundKind::AtMost => "<=",
        };
        write!(f, "{} {} {}", self.symbol, sep, self.bound)
    }
}

/// Raw document shape, one-to-one with the TOML schema.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelDoc {
    pub schema_version: u32,
    pub id: String,
    pub state_vars: Vec<String>,
    pub bifurcation_param: String,
    #[serde(default)]
    pub feasibility: Vec<String>,
    #[serde(default)]
    pub notes: String,
    pub candidate: CandidateDoc,
    pub equations: BTreeMap<String, String>,
    #[serde(default)]
    pub parameters: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateDoc {
    pub coordinate: String,
    pub window: [f64; 2],
}

/// A validated model: equations parsed, names resolved, constraints split.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelSpec {
    pub id: String,
    pub state_vars: Vec<String>,
    /// One per state variable, same order.
    pub equations: Vec<Expr>,
    pub equation_sources: Vec<String>,
    pub parameters: BTreeMap<String, f64>,
    pub bifurcation_param: String,
    pub candidate_coordinate: String,
    pub candidate_window: (f64, f64),
    pub feasibility: Vec<Constraint>,
    pub notes: String,
}

impl ModelSpec {
    /// Declared names in canonical slot order: state variables, then fixed
    /// parameters, then the bifurcation parameter.
    pub fn declared_names(&self) -> Vec<String> {
        let mut names = self.state_vars.clone();
        names.extend(self.parameters.keys().cloned());
        names.push(self.bifurcation_param.clone());
        names
    }

    pub fn n_equations(&self) -> usize {
        self.state_vars.len()
    }

    pub fn candidate_index(&self) -> usize {
        self.state_vars
            .iter()
            .position(|v| v == &self.candidate_coordinate)
            .expect("validated spec has candidate among state vars")
    }

    /// State variables other than the candidate coordinate, in declaration
    /// order. These are the companion components the network emits.
    pub fn companion_names(&self) -> Vec<String> {
        self.state_vars
            .iter()
            .filter(|v| *v != &self.candidate_coordinate)
            .cloned()
            .collect()
    }

    /// Returns a copy with one parameter overridden (e.g. the timescale
    /// separation factor in sweeps).
    pub fn with_parameter(&self, name: &str, value: f64) -> ModelSpec {
        let mut spec = self.clone();
        spec.parameters.insert(name.to_string(), value);
        spec
    }

    /// True when every feasibility constraint holds for the given symbol
    /// lookup.
    pub fn feasible(&self, lookup: impl Fn(&str) -> Option<f64>) -> bool {
        self.feasibility
            .iter()
            .all(|c| lookup(&c.symbol).map(|v| c.satisfied(v)).unwrap_or(true))
    }

    pub fn to_doc(&self) -> ModelDoc {
        ModelDoc {
            schema_version: SCHEMA_VERSION,
            id: self.id.clone(),
            state_vars: self.state_vars.clone(),
            bifurcation_param: self.bifurcation_param.clone(),
            feasibility: self.feasibility.iter().map(|c| c.to_string()).collect(),
            notes: self.notes.clone(),
            candidate: CandidateDoc {
                coordinate: self.candidate_coordinate.clone(),
                window: [self.candidate_window.0, self.candidate_window.1],
            },
            equations: self
                .state_vars
                .iter()
                .cloned()
                .zip(self.equation_sources.iter().cloned())
                .collect(),
            parameters: self.parameters.clone(),
        }
    }

    /// Canonical TOML form; `load_spec` reads it back to an equal spec.
    pub fn serialize(&self) -> Result<String, ModelError> {
        Ok(toml::to_string(&self.to_doc())?)
    }
}

/// Parses and fully validates a model config document. All expressions are
/// parsed here so errors carry the equation name and source position.
pub fn load_spec(document: &str) -> Result<ModelSpec, ModelError> {
    let doc: ModelDoc = toml::from_str(document)?;
    if doc.schema_version != SCHEMA_VERSION {
        return Err(ModelError::SchemaVersion {
            found: doc.schema_version,
            supported: SCHEMA_VERSION,
        });
    }
    spec_from_doc(&doc)
}

fn spec_from_doc(doc: &ModelDoc) -> Result<ModelSpec, ModelError> {
    let mut declared = doc.state_vars.clone();
    declared.extend(doc.parameters.keys().cloned());
    declared.push(doc.bifurcation_param.clone());

    let mut equations = Vec::with_capacity(doc.state_vars.len());
    let mut equation_sources = Vec::with_capacity(doc.state_vars.len());
    let mut structural: Vec<Diagnostic> = Vec::new();
    for var in &doc.state_vars {
        match doc.equations.get(var) {
            Some(src) => {
                let expr = exprdsl::parse_source(src, &declared).map_err(|e| {
                    ModelError::ExpressionParse {
                        equation: var.clone(),
                        source: e,
                    }
                })?;
                equations.push(expr);
                equation_sources.push(src.clone());
            }
            None => structural.push(error(
                "equations",
                format!("no equation given for state variable '{var}'"),
            )),
        }
    }
    for key in doc.equations.keys() {
        if !doc.state_vars.contains(key) {
            structural.push(error(
                "equations",
                format!("equation given for undeclared state variable '{key}'"),
            ));
        }
    }
    if !structural.is_empty() {
        return Err(ModelError::Invalid {
            id: doc.id.clone(),
            diagnostics: structural,
        });
    }

    let feasibility = doc
        .feasibility
        .iter()
        .map(|s| Constraint::parse(s))
        .collect::<Result<Vec<_>, _>>()?;

    let spec = ModelSpec {
        id: doc.id.clone(),
        state_vars: doc.state_vars.clone(),
        equations,
        equation_sources,
        parameters: doc.parameters.clone(),
        bifurcation_param: doc.bifurcation_param.clone(),
        candidate_coordinate: doc.candidate.coordinate.clone(),
        candidate_window: (doc.candidate.window[0], doc.candidate.window[1]),
        feasibility,
        notes: doc.notes.trim().to_string(),
    };
    let diagnostics = validate(&spec);
    if diagnostics.iter().any(|d| d.severity == Severity::Error) {
        return Err(ModelError::Invalid {
            id: spec.id,
            diagnostics,
        });
    }
    Ok(spec)
}

/// Invariant checks on a constructed spec. Empty iff the spec is usable;
/// diagnostics carry severity and the offending location.
pub fn validate(spec: &ModelSpec) -> Vec<Diagnostic> {
    let mut out = Vec::new();
    if spec.id.is_empty() {
        out.push(error("id", "model id must be non-empty".into()));
    }
    if spec.state_vars.is_empty() {
        out.push(error("state_vars", "at least one state variable required".into()));
    }
    for (i, v) in spec.state_vars.iter().enumerate() {
        if spec.state_vars[..i].contains(v) {
            out.push(error("state_vars", format!("duplicate state variable '{v}'")));
        }
        if spec.parameters.contains_key(v) {
            out.push(error(
                "parameters",
                format!("'{v}' is both a state variable and a parameter"),
            ));
        }
    }
    if spec.parameters.contains_key(&spec.bifurcation_param) {
        out.push(error(
            "bifurcation_param",
            format!(
                "bifurcation parameter '{}' must not appear in the parameter table",
                spec.bifurcation_param
            ),
        ));
    }
    if spec.state_vars.contains(&spec.bifurcation_param) {
        out.push(error(
            "bifurcation_param",
            format!(
                "bifurcation parameter '{}' must not be a state variable",
                spec.bifurcation_param
            ),
        ));
    }
    if !spec.state_vars.contains(&spec.candidate_coordinate) {
        out.push(error(
            "candidate.coordinate",
            format!(
                "candidate coordinate '{}' is not a declared state variable",
                spec.candidate_coordinate
            ),
        ));
    }
    let (lo, hi) = spec.candidate_window;
    if !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        out.push(error(
            "candidate.window",
            format!("window [{lo}, {hi}] is degenerate"),
        ));
    }
    if spec.equations.len() != spec.state_vars.len() {
        out.push(error(
            "equations",
            format!(
                "{} equations for {} state variables",
                spec.equations.len(),
                spec.state_vars.len()
            ),
        ));
    }
    let declared = spec.declared_names();
    for (var, eq) in spec.state_vars.iter().zip(&spec.equations) {
        for name in eq.variables() {
            if !declared.contains(&name) {
                out.push(error(
                    "equations",
                    format!("equation for '{var}' references undeclared name '{name}'"),
                ));
            }
        }
    }
    for c in &spec.feasibility {
        if !declared.contains(&c.symbol) {
            out.push(error(
                "feasibility",
                format!("constraint bounds undeclared symbol '{}'", c.symbol),
            ));
        }
    }
    out
}

/// A zoo model plus its verification metadata.
#[derive(Debug, Clone)]
pub struct ZooEntry {
    pub spec: ModelSpec,
    /// Analytic rearrangement of the equilibrium condition, giving the
    /// bifurcation parameter directly in terms of the candidate coordinate.
    /// Expressed over the candidate coordinate and the fixed parameters.
    pub closed_form_inverse: Option<ClosedFormInverse>,
    pub reference_thresholds: Vec<ReferenceThreshold>,
}

#[derive(Debug, Clone)]
pub struct ClosedFormInverse {
    pub source: String,
    pub expr: Expr,
}

/// A known threshold location used in tests and overlays. `provenance` is
/// either `published` (printed in the source literature) or `derived`
/// (computed from the closed form by bracketed bisection).
#[derive(Debug, Clone, PartialEq)]
pub struct ReferenceThreshold {
    pub u_star: f64,
    pub lambda: f64,
    pub provenance: &'static str,
}

fn entry(
    toml_text: &str,
    closed_form: Option<&str>,
    reference: &[(f64, f64, &'static str)],
) -> ZooEntry {
    let spec = load_spec(toml_text).expect("built-in zoo model must load");
    let closed_form_inverse = closed_form.map(|src| {
        let mut declared = vec![spec.candidate_coordinate.clone()];
        declared.extend(spec.parameters.keys().cloned());
        let expr = exprdsl::parse_source(src, &declared).expect("built-in closed form must parse");
        ClosedFormInverse {
            source: src.to_string(),
            expr,
        }
    });
    ZooEntry {
        spec,
        closed_form_inverse,
        reference_thresholds: reference
            .iter()
            .map(|&(u_star, lambda, provenance)| ReferenceThreshold {
                u_star,
                lambda,
                provenance,
            })
            .collect(),
    }
}

/// The built-in model zoo. Entries are shipped as config files and parsed
/// through the same loader as user models.
pub fn zoo() -> Vec<ZooEntry> {
    vec![
        entry(
            include_str!("../zoo/scheffer.toml"),
            Some("(beta*u - alpha)*(u^p + h^p)/u^p"),
            &[(0.4395, 1.7869, "published"), (0.1025, 2.6049, "published")],
        ),
        entry(
            include_str!("../zoo/may.toml"),
            Some("(1 - u)*(u^2 + alpha^2)/u"),
            &[
                (0.113781, 0.178723, "derived"),
                (0.478128, 0.260437, "derived"),
            ],
        ),
        entry(
            include_str!("../zoo/abeta_ca.toml"),
            Some("(k1*u - a1)*(((b1 + b2*u)/k2)^2 + alpha^2)/((b1 + b2*u)/k2)^2"),
            &[(1.831144, 2.984426, "derived")],
        ),
        entry(include_str!("../zoo/linear_toy.toml"), Some("u"), &[]),
    ]
}

/// Looks up a built-in model by id.
pub fn find_zoo(id: &str) -> Option<ZooEntry> {
    zoo().into_iter().find(|e| e.spec.id == id)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zoo_loads_and_validates() {
        let entries = zoo();
        assert_eq!(entries.len(), 4);
        for e in &entries {
            assert!(validate(&e.spec).is_empty(), "diagnostics for {}", e.spec.id);
        }
        let ids: Vec<&str> = entries.iter().map(|e| e.spec.id.as_str()).collect();
        assert_eq!(ids, vec!["scheffer", "may", "abeta_ca", "linear_toy"]);
    }

    #[test]
    fn zoo_scheffer_fields() {
        let e = find_zoo("scheffer").unwrap();
        assert_eq!(e.spec.state_vars, vec!["u"]);
        assert_eq!(e.spec.bifurcation_param, "r");
        assert_eq!(e.spec.candidate_window, (0.0, 1.5));
        assert_eq!(e.spec.parameters["alpha"], 0.1);
        assert_eq!(e.spec.parameters["beta"], 2.0);
        assert_eq!(e.spec.parameters["h"], 0.5);
        assert_eq!(e.spec.parameters["p"], 2.0);
    }

    #[test]
    fn zoo_abeta_parameters_match_source_values() {
        let e = find_zoo("abeta_ca").unwrap();
        let p = &e.spec.parameters;
        assert_eq!(p["a1"], 0.25);
        assert_eq!(p["alpha"], 1.0);
        assert_eq!(p["k1"], 0.35);
        assert_eq!(p["b1"], 0.11);
        assert_eq!(p["b2"], 1.0);
        assert_eq!(p["k2"], 5.0);
        assert_eq!(p["eps"], 1.0);
        assert_eq!(e.spec.state_vars, vec!["u", "v"]);
        assert_eq!(e.spec.bifurcation_param, "a2");
    }

    #[test]
    fn zoo_may_window_and_parameter() {
        let e = find_zoo("may").unwrap();
        assert_eq!(e.spec.parameters["alpha"], 0.1);
        assert_eq!(e.spec.bifurcation_param, "beta");
        assert_eq!(e.spec.candidate_window, (0.02, 1.0));
    }

    // Every zoo equation evaluated at an equilibrium produced by its own
    // closed-form inverse must vanish to near machine precision.
    #[test]
    fn zoo_equations_vanish_at_closed_form_equilibria() {
        for e in zoo() {
            let Some(cf) = &e.closed_form_inverse else { continue };
            let spec = &e.spec;
            let u_samples: Vec<f64> = match spec.id.as_str() {
                "scheffer" => vec![0.25, 0.5, 1.0, 1.4],
                "may" => vec![0.1, 0.3, 0.7, 0.95],
                "abeta_ca" => vec![0.8, 1.0, 2.0, 2.9],
                _ => vec![0.2, 0.5, 0.9],
            };
            for u in u_samples {
                let mut bind: BTreeMap<String, f64> = spec.parameters.clone();
                bind.insert(spec.candidate_coordinate.clone(), u);
                let lambda = exprdsl::eval(&cf.expr, &bind).unwrap();
                bind.insert(spec.bifurcation_param.clone(), lambda);
                // companions: for the two-equation model v solves its own
                // linear equation exactly
                if spec.id == "abeta_ca" {
                    let v = (spec.parameters["b1"] + spec.parameters["b2"] * u)
                        / spec.parameters["k2"];
                    bind.insert("v".to_string(), v);
                }
                for (var, eq) in spec.state_vars.iter().zip(&spec.equations) {
                    let r = exprdsl::eval(eq, &bind).unwrap();
                    assert!(
                        r.abs() <= 1e-10,
                        "{}: residual {r} for '{var}' at u={u}, lambda={lambda}",
                        spec.id
                    );
                }
            }
        }
    }

    #[test]
    fn load_spec_missing_bifurcation_param_is_schema_error() {
        let doc = r#"
schema_version = 1
id = "broken"
state_vars = ["u"]

[candidate]
coordinate = "u"
window = [0.0, 1.0]

[equations]
u = "1 - u"
"#;
        assert!(matches!(load_spec(doc), Err(ModelError::Toml(_))));
    }

    #[test]
    fn load_spec_undeclared_name_in_equation_names_it() {
        let doc = r#"
schema_version = 1
id = "broken"
state_vars = ["u"]
bifurcation_param = "lambda"

[candidate]
coordinate = "u"
window = [0.0, 1.0]

[equations]
u = "lambda - z"
"#;
        match load_spec(doc) {
            Err(ModelError::ExpressionParse { equation, source }) => {
                assert_eq!(equation, "u");
                assert!(matches!(
                    source,
                    ExprError::UndeclaredIdentifier { ref name, .. } if name == "z"
                ));
            }
            other => panic!("expected expression parse error, got {other:?}"),
        }
    }

    #[test]
    fn load_spec_rejects_wrong_schema_version() {
        let doc = r#"
schema_version = 99
id = "m"
state_vars = ["u"]
bifurcation_param = "lambda"

[candidate]
coordinate = "u"
window = [0.0, 1.0]

[equations]
u = "lambda - u"
"#;
        assert!(matches!(
            load_spec(doc),
            Err(ModelError::SchemaVersion { found: 99, .. })
        ));
    }

    #[test]
    fn validate_flags_degenerate_window() {
        let mut spec = find_zoo("linear_toy").unwrap().spec;
        spec.candidate_window = (1.0, 1.0);
        let diags = validate(&spec);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.location == "candidate.window"));
    }

    #[test]
    fn validate_flags_equation_count_mismatch() {
        let mut spec = find_zoo("linear_toy").unwrap().spec;
        spec.equations.clear();
        spec.equation_sources.clear();
        let diags = validate(&spec);
        assert!(diags
            .iter()
            .any(|d| d.severity == Severity::Error && d.location == "equations"));
    }

    #[test]
    fn serialize_round_trips_field_by_field() {
        for e in zoo() {
            let text = e.spec.serialize().unwrap();
            let back = load_spec(&text).unwrap();
            assert_eq!(e.spec, back, "round trip for {}", e.spec.id);
        }
    }

    #[test]
    fn constraint_parsing_and_evaluation() {
        let c = Constraint::parse("r >= 0").unwrap();
        assert!(c.satisfied(0.0));
        assert!(c.satisfied(1.0));
        assert!(!c.satisfied(-1e-9));
        let c = Constraint::parse("u <= 2.5").unwrap();
        assert!(c.satisfied(2.5));
        assert!(!c.satisfied(2.6));
        assert!(Constraint::parse("r > 0").is_err());
    }
}
