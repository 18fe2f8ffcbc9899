//! JSON report types. Field order is fixed by the struct definitions and
//! form terms are sorted, so equal inputs give byte-identical output.

use homochern_core::check::CheckReport;
use homochern_core::forms::TrueForm;
use homochern_core::ring::{Chart, Poly};
use serde::Serialize;

/// One term `coeff · e^{i₁} ∧ … ∧ e^{iₙ}` with 1-based indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FormTerm {
    pub indices: Vec<usize>,
    pub coeff: String,
}

pub fn form_json(form: &TrueForm<Poly>) -> Vec<FormTerm> {
    let chart = form.carrier().chart();
    form.entries_one_based()
        .into_iter()
        .map(|(indices, c)| FormTerm {
            indices,
            coeff: chart.fmt_poly(c),
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Component {
    pub component: String,
    pub value: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ViolationJson {
    pub identity: String,
    pub probe: String,
    pub residual: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CheckJson {
    pub name: String,
    pub probe_degree: u32,
    pub checks_run: usize,
    pub passed: bool,
    pub violations: Vec<ViolationJson>,
}

impl CheckJson {
    pub fn new(report: &CheckReport, chart: &Chart) -> Self {
        CheckJson {
            name: report.name.clone(),
            probe_degree: report.probe_degree,
            checks_run: report.checks_run,
            passed: report.passed(),
            violations: report
                .violations
                .iter()
                .map(|v| ViolationJson {
                    identity: v.identity.clone(),
                    probe: v.probe.clone(),
                    residual: v
                        .residual
                        .iter()
                        .map(|(c, p)| Component {
                            component: c.clone(),
                            value: chart.fmt_poly(p),
                        })
                        .collect(),
                })
                .collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ChernEntry {
    pub p: usize,
    pub form: Vec<FormTerm>,
    /// `d` of the raw form.
    pub closedness_residual: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TransgressEntry {
    pub p: usize,
    pub cs: Vec<FormTerm>,
    pub chern_from: Vec<FormTerm>,
    pub chern_to: Vec<FormTerm>,
    /// `d cs − (Ch(to) − Ch(from))` before any normalization.
    pub exactness_residual: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperComponent {
    pub degree: usize,
    pub form: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuperEntry {
    pub p: usize,
    pub components: Vec<SuperComponent>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Orientation {
    pub chern_canonical: Vec<FormTerm>,
    pub chern_induced: Vec<FormTerm>,
    pub pullback: Vec<FormTerm>,
    pub cs: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct AdjointEntry {
    pub p: usize,
    /// `E⁰ = 𝔤`, `E¹ = TM`.
    pub g_minus_tm: Orientation,
    pub tm_minus_g: Orientation,
    pub exactness_residual: Vec<FormTerm>,
    pub pullback_residual: Vec<FormTerm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "task", rename_all = "kebab-case")]
#[allow(clippy::large_enum_variant)]
pub enum TaskReport {
    Check {
        connection: String,
        kind: String,
        passed: bool,
        #[serde(skip_serializing_if = "Option::is_none")]
        sign: Option<i8>,
        checks: Vec<CheckJson>,
        /// Reported for information; not required to pass.
        informational: Vec<CheckJson>,
    },
    Chern {
        connection: String,
        passed: bool,
        normalized: bool,
        results: Vec<ChernEntry>,
    },
    Transgress {
        from: String,
        to: String,
        passed: bool,
        normalized: bool,
        results: Vec<TransgressEntry>,
    },
    Adjoint {
        aux: String,
        passed: bool,
        sign: i8,
        carrier_check: CheckJson,
        uth: CheckJson,
        opposite_sign: CheckJson,
        higher: CheckJson,
        canonical_flatness: CheckJson,
        normalized: bool,
        per_p: Vec<AdjointEntry>,
    },
    Super {
        connection: String,
        passed: bool,
        normalized: bool,
        results: Vec<SuperEntry>,
    },
    Error {
        kind: String,
        passed: bool,
        error: String,
    },
}

impl TaskReport {
    pub fn passed(&self) -> bool {
        match self {
            TaskReport::Check { passed, .. }
            | TaskReport::Chern { passed, .. }
            | TaskReport::Transgress { passed, .. }
            | TaskReport::Adjoint { passed, .. }
            | TaskReport::Super { passed, .. }
            | TaskReport::Error { passed, .. } => *passed,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub chart: Vec<String>,
    pub probe_degree: u32,
    pub normalize: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub carrier_check: Option<CheckJson>,
    pub tasks: Vec<TaskReport>,
    pub passed: bool,
}

impl Report {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("reports serialize");
        s.push('\n');
        s
    }
}

#[cfg(test)]
mod tests {
    use homochern_core::carrier::Carrier;
    use homochern_core::ring::Chart;

    use super::*;

    #[test]
    fn forms_use_one_based_indices() {
        let chart = Chart::euclidean(3);
        let tm = Carrier::tangent(&chart);
        let f = TrueForm::from_terms(&tm, 2, Poly::zero(), [(vec![2, 0], chart.parse("x*y").unwrap())]).unwrap();
        let expected = FormTerm {
            indices: vec![1, 3],
            coeff: "-x*y".into(),
        };
        assert_eq!(form_json(&f), vec![expected]);
    }

    #[test]
    fn check_reports_keep_residual_labels() {
        let chart = Chart::euclidean(1);
        let mut r = CheckReport::new("demo", 2);
        r.record("a = b", "e1", [("residual[1]".to_string(), chart.parse("x - 1").unwrap()), ("residual[2]".into(), Poly::zero())]);
        let j = CheckJson::new(&r, &chart);
        assert!(!j.passed);
        assert_eq!(j.violations[0].residual, vec![Component { component: "residual[1]".into(), value: "x - 1".into() }]);
    }
}
