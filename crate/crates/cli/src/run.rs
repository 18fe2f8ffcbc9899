//! Task execution.

use homochern_core::adjoint::{flatness_report, vanishing_report, VanishingTerm};
use homochern_core::check::CheckReport;
use homochern_core::conn::{check_connection, check_form_up_to_homotopy, check_higher, check_uth, ChernForms, Conn, ConnVariant};
use homochern_core::error::Result;
use homochern_core::forms::TrueForm;
use homochern_core::ring::{Poly, Rational};

use crate::model::{Built, Model};
use crate::report::{
    form_json, AdjointEntry, CheckJson, ChernEntry, Orientation, Report, SuperComponent, SuperEntry, TaskReport,
    TransgressEntry,
};
use crate::scenario::TaskSpec;

fn factorial(p: usize) -> Rational {
    (2..=p).fold(Rational::from_integer(1.into()), |acc, k| acc * Rational::from_integer(k.into()))
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Options {
    /// Divide every `p`-th power form by `p!`.
    pub normalize: bool,
}

pub fn run(model: &Model, options: Options) -> Report {
    let normalize = options.normalize || model.scenario.normalize;
    let chart = &model.chart;
    let carrier_check = model
        .custom_carrier
        .then(|| CheckJson::new(&model.carrier.check(model.probes.degree), chart));
    let mut runner = Runner { model, normalize };
    let tasks: Vec<TaskReport> = model
        .scenario
        .tasks
        .iter()
        .map(|t| {
            runner.task(t).unwrap_or_else(|e| TaskReport::Error {
                kind: t.kind().into(),
                passed: false,
                error: e.to_string(),
            })
        })
        .collect();
    let passed = carrier_check.as_ref().is_none_or(|c| c.passed) && tasks.iter().all(TaskReport::passed);
    Report {
        name: model.scenario.name.clone(),
        chart: model.scenario.chart.clone(),
        probe_degree: model.probes.degree,
        normalize,
        carrier_check,
        tasks,
        passed,
    }
}

#[derive(Debug, thiserror::Error)]
enum TaskError {
    #[error(transparent)]
    Core(#[from] homochern_core::error::Error),
    #[error("{0}")]
    Other(String),
}

struct Runner<'a> {
    model: &'a Model,
    normalize: bool,
}

impl Runner<'_> {
    fn built(&self, name: &str) -> std::result::Result<&Built, TaskError> {
        match self.model.connections.get(name) {
            Some(Built::Failed(m)) => Err(TaskError::Other(format!("connection {name:?} could not be built: {m}"))),
            Some(b) => Ok(b),
            None => Err(TaskError::Other(format!("unknown connection {name:?}"))),
        }
    }

    fn conn(&self, name: &str) -> std::result::Result<&Conn, TaskError> {
        match self.built(name)? {
            Built::Super(_) => Err(TaskError::Other(format!("{name:?} is a superconnection; use the super task"))),
            b => Ok(b.conn().expect("built connections carry a connection")),
        }
    }

    fn scaled(&self, form: &TrueForm<Poly>, p: usize) -> TrueForm<Poly> {
        if self.normalize {
            form.scale_rational(&(Rational::from_integer(1.into()) / factorial(p)))
        } else {
            form.clone()
        }
    }

    fn task(&mut self, task: &TaskSpec) -> std::result::Result<TaskReport, TaskError> {
        let m = self.model;
        let chart = &m.chart;
        let probes = &m.probes;
        Ok(match task {
            TaskSpec::Check { connection } => {
                let built = self.built(connection)?;
                let conn = built.conn().expect("built connections carry a connection");
                let (mut checks, mut informational) = conn_checks(conn, probes);
                let mut sign = None;
                if let Built::Canonical(c) = built {
                    sign = Some(c.sign);
                    let mut rejected = c.rejected.clone();
                    rejected.name = format!("{} with the opposite sign", rejected.name);
                    informational.push(rejected);
                }
                if let Built::Super(s) = built {
                    for (_, w) in s.higher() {
                        checks.push(check_form_up_to_homotopy(s.core(), w, probes));
                    }
                }
                let passed = checks.iter().all(CheckReport::passed);
                TaskReport::Check {
                    connection: connection.clone(),
                    kind: m.scenario.connections[connection].kind().into(),
                    passed,
                    sign,
                    checks: checks.iter().map(|c| CheckJson::new(c, chart)).collect(),
                    informational: informational.iter().map(|c| CheckJson::new(c, chart)).collect(),
                }
            }
            TaskSpec::Chern { connection, p } => {
                let conn = self.conn(connection)?;
                let mut cf = ChernForms::new(conn, probes.degree);
                let mut results = Vec::new();
                let mut passed = true;
                for &p in p {
                    let form = cf.chern_form(p)?;
                    let d = form.exterior_d();
                    passed &= d.is_zero();
                    results.push(ChernEntry {
                        p,
                        form: form_json(&self.scaled(&form, p)),
                        closedness_residual: form_json(&d),
                    });
                }
                TaskReport::Chern {
                    connection: connection.clone(),
                    passed,
                    normalized: self.normalize,
                    results,
                }
            }
            TaskSpec::Transgress { from, to, p } => {
                let c0 = self.conn(from)?;
                let c1 = self.conn(to)?;
                let mut ch0 = ChernForms::new(c0, probes.degree);
                let mut ch1 = ChernForms::new(c1, probes.degree);
                let mut path = ChernForms::new(&homochern_core::conn::affine_path(c0, c1)?, probes.degree);
                let mut results = Vec::new();
                let mut passed = true;
                for &p in p {
                    let a = ch0.chern_form(p)?;
                    let b = ch1.chern_form(p)?;
                    let cs = path.chern_form(p)?.fiber_integrate()?;
                    let residual = cs.exterior_d().sub(&b.sub(&a)?)?;
                    passed &= residual.is_zero();
                    results.push(TransgressEntry {
                        p,
                        cs: form_json(&self.scaled(&cs, p)),
                        chern_from: form_json(&self.scaled(&a, p)),
                        chern_to: form_json(&self.scaled(&b, p)),
                        exactness_residual: form_json(&residual),
                    });
                }
                TaskReport::Transgress {
                    from: from.clone(),
                    to: to.clone(),
                    passed,
                    normalized: self.normalize,
                    results,
                }
            }
            TaskSpec::Adjoint { aux, p_max } => {
                let aux_conn = self.conn(aux)?;
                let r = vanishing_report(&m.carrier, aux_conn, *p_max, probes)?;
                let orient = |t: &VanishingTerm| Orientation {
                    chern_canonical: form_json(&self.scaled(&t.chern_canonical, t.p)),
                    chern_induced: form_json(&self.scaled(&t.chern_induced, t.p)),
                    pullback: form_json(&self.scaled(&t.pullback, t.p)),
                    cs: form_json(&self.scaled(&t.cs, t.p)),
                };
                TaskReport::Adjoint {
                    aux: aux.clone(),
                    passed: r.passed(),
                    sign: r.sign,
                    carrier_check: CheckJson::new(&r.carrier_check, chart),
                    uth: CheckJson::new(&r.uth, chart),
                    opposite_sign: CheckJson::new(&r.opposite_sign, chart),
                    higher: CheckJson::new(&r.higher, chart),
                    canonical_flatness: CheckJson::new(&r.canonical_flatness, chart),
                    normalized: self.normalize,
                    per_p: r
                        .per_p
                        .iter()
                        .map(|t| AdjointEntry {
                            p: t.p,
                            g_minus_tm: orient(t),
                            tm_minus_g: orient(&t.reversed()),
                            exactness_residual: form_json(&t.exactness_residual),
                            pullback_residual: form_json(&t.pullback_residual),
                        })
                        .collect(),
                }
            }
            TaskSpec::Super { connection, p } => {
                let Built::Super(s) = self.built(connection)? else {
                    return Err(TaskError::Other(format!("{connection:?} is not a superconnection")));
                };
                let results = p
                    .iter()
                    .map(|&p| -> Result<SuperEntry> {
                        Ok(SuperEntry {
                            p,
                            components: s
                                .super_chern_form(p, probes.degree)?
                                .into_iter()
                                .map(|(degree, f)| SuperComponent {
                                    degree,
                                    form: form_json(&self.scaled(&f, p)),
                                })
                                .collect(),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                TaskReport::Super {
                    connection: connection.clone(),
                    passed: true,
                    normalized: self.normalize,
                    results,
                }
            }
        })
    }
}

/// Required and informational checks for a connection, by variant.
fn conn_checks(conn: &Conn, probes: &homochern_core::check::Probes) -> (Vec<CheckReport>, Vec<CheckReport>) {
    let r = check_connection(conn, probes);
    match conn.variant() {
        ConnVariant::Matrix => (vec![r.parity, r.leibniz, r.linearity], Vec::new()),
        ConnVariant::CanonicalAdjoint => {
            let h = conn.homotopy();
            let checks = vec![
                r.parity,
                r.leibniz,
                check_uth(conn, &h, probes),
                check_higher(conn, &h, None, probes),
                flatness_report(conn, probes),
            ];
            (checks, vec![r.linearity])
        }
        _ => {
            let uth = check_uth(conn, &conn.homotopy(), probes);
            (vec![r.parity, r.leibniz, uth], vec![r.linearity])
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorials() {
        assert_eq!(factorial(0), Rational::from_integer(1.into()));
        assert_eq!(factorial(4), Rational::from_integer(24.into()));
    }
}
