//! Scenario files: one chart, an optional carrier and bundle, named
//! connections and a task list.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

/// A square matrix of polynomial strings, row-major.
pub type MatrixSpec = Vec<Vec<String>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    /// Coordinate names.
    pub chart: Vec<String>,
    /// Defaults to the tangent carrier of the chart.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub carrier: Option<CarrierSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bundle: Option<BundleSpec>,
    #[serde(default)]
    pub connections: BTreeMap<String, ConnSpec>,
    #[serde(default)]
    pub tasks: Vec<TaskSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe_degree: Option<u32>,
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub normalize: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CarrierSpec {
    pub rank: usize,
    /// `anchor[i]` lists the coefficients of `ρ(e_{i+1})` along the
    /// coordinate vector fields.
    pub anchor: Vec<Vec<String>>,
    /// Triples `(i, j, k, c)`, 1-based with `i < j`: `c` is the `e_k`
    /// coefficient of `[e_i, e_j]`.
    #[serde(default)]
    pub structure: Vec<(usize, usize, usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BundleSpec {
    pub r0: usize,
    pub r1: usize,
    /// `E⁰ → E¹` block: `r1` rows of `r0` entries.
    #[serde(default)]
    pub forward: Vec<Vec<String>>,
    /// `E¹ → E⁰` block: `r0` rows of `r1` entries.
    #[serde(default)]
    pub backward: Vec<Vec<String>>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Over {
    /// The scenario's carrier.
    #[default]
    Carrier,
    /// The tangent carrier of the chart.
    Tangent,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BundleRef {
    /// The scenario's bundle block.
    #[default]
    Scenario,
    /// The adjoint complex of the scenario's carrier.
    Adjoint,
}

fn is_default<T: Default + PartialEq>(v: &T) -> bool {
    *v == T::default()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "kebab-case", deny_unknown_fields)]
pub enum ConnSpec {
    /// `theta[i]` is the matrix of `θ(e_{i+1})`; an empty list is the flat
    /// connection.
    Matrix {
        #[serde(default, skip_serializing_if = "is_default")]
        over: Over,
        #[serde(default, skip_serializing_if = "is_default")]
        bundle: BundleRef,
        #[serde(default)]
        theta: Vec<MatrixSpec>,
    },
    Uth {
        #[serde(default, skip_serializing_if = "is_default")]
        over: Over,
        #[serde(default, skip_serializing_if = "is_default")]
        bundle: BundleRef,
        #[serde(default)]
        theta: Vec<MatrixSpec>,
        #[serde(rename = "H", default)]
        h: Vec<HBlockSpec>,
    },
    CanonicalAdjoint {},
    Superconn {
        core: String,
        omega0: MatrixSpec,
        #[serde(default)]
        higher: Vec<HigherSpec>,
    },
}

impl ConnSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            ConnSpec::Matrix { .. } => "matrix",
            ConnSpec::Uth { .. } => "uth",
            ConnSpec::CanonicalAdjoint {} => "canonical-adjoint",
            ConnSpec::Superconn { .. } => "superconn",
        }
    }
}

/// One block `Θ` of `H(f, g e_j) = P(f) g Θ`, where `P(f)` is `f` or its
/// derivative along `derivative`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HBlockSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub derivative: Option<String>,
    /// 1-based frame index.
    pub j: usize,
    pub block: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HigherSpec {
    pub degree: usize,
    pub form: Vec<FormTermSpec>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FormTermSpec {
    /// 1-based, strictly increasing frame indices.
    pub indices: Vec<usize>,
    pub coeff: MatrixSpec,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "kebab-case", deny_unknown_fields)]
pub enum TaskSpec {
    Check { connection: String },
    Chern { connection: String, p: Vec<usize> },
    Transgress { from: String, to: String, p: Vec<usize> },
    Adjoint { aux: String, p_max: usize },
    Super { connection: String, p: Vec<usize> },
}

impl TaskSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            TaskSpec::Check { .. } => "check",
            TaskSpec::Chern { .. } => "chern",
            TaskSpec::Transgress { .. } => "transgress",
            TaskSpec::Adjoint { .. } => "adjoint",
            TaskSpec::Super { .. } => "super",
        }
    }
}

/// A problem found while reading or validating a scenario. `path` locates
/// it inside the document; `line`/`column` are set for syntax errors.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub path: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub line: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub column: Option<usize>,
    pub message: String,
}

impl Diagnostic {
    pub fn at(path: impl Into<String>, message: impl Into<String>) -> Self {
        Diagnostic {
            path: path.into(),
            line: None,
            column: None,
            message: message.into(),
        }
    }
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.line, self.column) {
            (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {}", self.message),
            _ if self.path.is_empty() => write!(f, "{}", self.message),
            _ => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

/// Reads a scenario without building anything; see
/// [`crate::model::Model::build`] for validation.
pub fn parse_scenario(text: &str) -> Result<Scenario, Vec<Diagnostic>> {
    serde_json::from_str(text).map_err(|e| {
        vec![Diagnostic {
            path: String::new(),
            line: Some(e.line()),
            column: Some(e.column()),
            message: e.to_string(),
        }]
    })
}

impl Scenario {
    /// Pretty JSON; parsing it back gives an equal scenario.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenarios serialize")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn connection_blocks() {
        let s = parse_scenario(
            r#"{"chart": ["x"], "connections": {
                "a": {"type": "matrix", "over": "tangent", "bundle": "adjoint"},
                "b": {"type": "uth", "H": [{"derivative": "x", "j": 1, "block": [["0"]]}]},
                "c": {"type": "canonical-adjoint"},
                "d": {"type": "superconn", "core": "a", "omega0": [["0"]]}}}"#,
        )
        .unwrap();
        let kinds: Vec<&str> = s.connections.values().map(ConnSpec::kind).collect();
        assert_eq!(kinds, ["matrix", "uth", "canonical-adjoint", "superconn"]);
        assert!(matches!(s.connections["a"], ConnSpec::Matrix { over: Over::Tangent, bundle: BundleRef::Adjoint, .. }));
    }

    #[test]
    fn unknown_fields_are_rejected() {
        let d = parse_scenario(r#"{"chart": ["x"], "bundel": {}}"#).unwrap_err();
        assert!(d[0].message.contains("bundel"));
        let d = parse_scenario(r#"{"chart": ["x"], "tasks": [{"task": "chern", "conection": "a", "p": [1]}]}"#).unwrap_err();
        assert!(d[0].message.contains("conection"));
    }

    #[test]
    fn defaults_are_not_serialized() {
        let s = parse_scenario(r#"{"chart": ["x"], "connections": {"a": {"type": "matrix"}}}"#).unwrap();
        assert_eq!(
            serde_json::to_string(&s).unwrap(),
            r#"{"chart":["x"],"connections":{"a":{"type":"matrix","theta":[]}},"tasks":[]}"#
        );
    }

    #[test]
    fn diagnostic_display() {
        assert_eq!(Diagnostic::at("tasks[0].p", "empty list of powers").to_string(), "tasks[0].p: empty list of powers");
        let d = Diagnostic { path: String::new(), line: Some(3), column: Some(7), message: "oops".into() };
        assert_eq!(d.to_string(), "line 3, column 7: oops");
    }
}
