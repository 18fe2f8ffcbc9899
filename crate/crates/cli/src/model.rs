//! Validated scenarios: every polynomial parsed, every shape and name
//! checked, every connection constructed.

use std::collections::BTreeMap;

use homochern_core::adjoint::{canonical_adjoint_conn, AdjointComplex, CanonicalAdjoint};
use homochern_core::carrier::Carrier;
use homochern_core::check::Probes;
use homochern_core::conn::{Conn, HTemplate, SuperConn};
use homochern_core::error::Error;
use homochern_core::forms::TrueForm;
use homochern_core::ring::{Chart, Poly, VField};
use homochern_core::superlin::{EndMap, SuperBundle};

use crate::scenario::{BundleRef, ConnSpec, Diagnostic, MatrixSpec, Over, Scenario, TaskSpec};

pub const DEFAULT_PROBE_DEGREE: u32 = 2;

#[derive(Clone, Debug)]
pub enum Built {
    Conn(Conn),
    Canonical(CanonicalAdjoint),
    Super(SuperConn),
    /// Construction failed for a reason that is a check failure rather
    /// than malformed input, e.g. a broken carrier.
    Failed(String),
}

impl Built {
    /// The underlying connection, if any.
    pub fn conn(&self) -> Option<&Conn> {
        match self {
            Built::Conn(c) => Some(c),
            Built::Canonical(c) => Some(&c.conn),
            Built::Super(s) => Some(s.core()),
            Built::Failed(_) => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Model {
    pub scenario: Scenario,
    pub chart: Chart,
    pub carrier: Carrier,
    /// Whether the carrier came from a carrier block.
    pub custom_carrier: bool,
    pub bundle: Option<SuperBundle>,
    pub adjoint: AdjointComplex,
    pub probes: Probes,
    pub connections: BTreeMap<String, Built>,
}

struct Ctx<'a> {
    chart: &'a Chart,
    diags: Vec<Diagnostic>,
}

impl Ctx<'_> {
    fn poly(&mut self, path: &str, text: &str) -> Option<Poly> {
        match self.chart.parse(text) {
            Ok(p) => Some(p),
            Err(Error::Parse { position, message }) => {
                self.diags.push(Diagnostic::at(path, format!("{message} at character {position} of {text:?}")));
                None
            }
            Err(e) => {
                self.diags.push(Diagnostic::at(path, e.to_string()));
                None
            }
        }
    }

    fn rows(&mut self, path: &str, rows: &[Vec<String>], n_rows: usize, n_cols: usize) -> Option<Vec<Vec<Poly>>> {
        if rows.len() != n_rows {
            self.diags.push(Diagnostic::at(path, format!("expected {n_rows} rows, found {}", rows.len())));
            return None;
        }
        let mut out = Vec::with_capacity(n_rows);
        let mut ok = true;
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_cols {
                self.diags.push(Diagnostic::at(
                    format!("{path}[{i}]"),
                    format!("expected {n_cols} entries, found {}", row.len()),
                ));
                ok = false;
                continue;
            }
            let mut r = Vec::with_capacity(n_cols);
            for (j, e) in row.iter().enumerate() {
                match self.poly(&format!("{path}[{i}][{j}]"), e) {
                    Some(p) => r.push(p),
                    None => ok = false,
                }
            }
            out.push(r);
        }
        ok.then_some(out)
    }

    fn endmap(&mut self, path: &str, m: &MatrixSpec, r0: usize, r1: usize) -> Option<EndMap> {
        let n = r0 + r1;
        let rows = self.rows(path, m, n, n)?;
        match EndMap::from_rows(r0, r1, rows) {
            Ok(e) => Some(e),
            Err(e) => {
                self.diags.push(Diagnostic::at(path, e.to_string()));
                None
            }
        }
    }

    fn fail(&mut self, path: impl Into<String>, message: impl Into<String>) {
        self.diags.push(Diagnostic::at(path, message));
    }
}

impl Model {
    /// Validates `scenario` and builds everything it declares. All
    /// problems are collected before returning.
    pub fn build(scenario: &Scenario, probe_degree: Option<u32>) -> Result<Model, Vec<Diagnostic>> {
        let chart = Chart::new(scenario.chart.iter().map(String::as_str))
            .map_err(|e| vec![Diagnostic::at("chart", e.to_string())])?;
        let mut cx = Ctx {
            chart: &chart,
            diags: Vec::new(),
        };
        let probes = Probes::with_degree(probe_degree.or(scenario.probe_degree).unwrap_or(DEFAULT_PROBE_DEGREE));

        let (carrier, custom_carrier) = match &scenario.carrier {
            None => (Carrier::tangent(&chart), false),
            Some(spec) => {
                let mut anchor = Vec::new();
                if spec.anchor.len() != spec.rank {
                    cx.fail("carrier.anchor", format!("expected {} columns, found {}", spec.rank, spec.anchor.len()));
                }
                for (i, col) in spec.anchor.iter().enumerate() {
                    if col.len() != chart.dim() {
                        cx.fail(
                            format!("carrier.anchor[{i}]"),
                            format!("expected {} entries, found {}", chart.dim(), col.len()),
                        );
                        continue;
                    }
                    let cs: Vec<Option<Poly>> =
                        col.iter().enumerate().map(|(a, e)| cx.poly(&format!("carrier.anchor[{i}][{a}]"), e)).collect();
                    if cs.iter().all(Option::is_some) {
                        anchor.push(VField::new(cs.into_iter().flatten().collect()));
                    }
                }
                let mut triples = Vec::new();
                for (n, (i, j, k, c)) in spec.structure.iter().enumerate() {
                    let path = format!("carrier.structure[{n}]");
                    if !(1 <= *i && i < j && *j <= spec.rank && 1 <= *k && *k <= spec.rank) {
                        cx.fail(&path, format!("triple ({i}, {j}, {k}) needs 1 <= i < j <= {0} and 1 <= k <= {0}", spec.rank));
                        continue;
                    }
                    if let Some(p) = cx.poly(&format!("{path}[3]"), c) {
                        triples.push((i - 1, j - 1, k - 1, p));
                    }
                }
                if !cx.diags.is_empty() {
                    return Err(cx.diags);
                }
                match Carrier::new(&chart, anchor, &triples) {
                    Ok(c) => (c, true),
                    Err(e) => return Err(vec![Diagnostic::at("carrier", e.to_string())]),
                }
            }
        };
        let adjoint = AdjointComplex::unchecked(&carrier);

        let bundle = scenario.bundle.as_ref().and_then(|spec| {
            // an omitted block is zero
            let mut block = |path: &str, rows: &[Vec<String>], n_rows: usize, n_cols: usize| {
                if rows.is_empty() {
                    Some(Vec::new())
                } else {
                    cx.rows(path, rows, n_rows, n_cols)
                }
            };
            let forward = block("bundle.forward", &spec.forward, spec.r1, spec.r0);
            let backward = block("bundle.backward", &spec.backward, spec.r0, spec.r1);
            let forward = forward?;
            let backward = backward?;
            match SuperBundle::new(spec.r0, spec.r1, &forward, &backward) {
                Ok(b) => Some(b),
                Err(e) => {
                    cx.fail("bundle", e.to_string());
                    None
                }
            }
        });

        let mut model = Model {
            scenario: scenario.clone(),
            chart: chart.clone(),
            carrier,
            custom_carrier,
            bundle,
            adjoint,
            probes,
            connections: BTreeMap::new(),
        };

        // superconnections refer to other connections, so build them last
        let mut order: Vec<(&String, &ConnSpec)> = scenario.connections.iter().collect();
        order.sort_by_key(|(_, s)| matches!(s, ConnSpec::Superconn { .. }));
        for (name, spec) in order {
            let path = format!("connections.{name}");
            if let Some(b) = model.build_conn(&mut cx, &path, spec) {
                model.connections.insert(name.clone(), b);
            }
        }

        for (n, task) in scenario.tasks.iter().enumerate() {
            let path = format!("tasks[{n}]");
            let mut refer = |field: &str, name: &str| {
                if !scenario.connections.contains_key(name) {
                    cx.fail(format!("{path}.{field}"), format!("unknown connection {name:?}"));
                }
            };
            match task {
                TaskSpec::Check { connection } => refer("connection", connection),
                TaskSpec::Chern { connection, p } | TaskSpec::Super { connection, p } => {
                    refer("connection", connection);
                    if p.is_empty() {
                        cx.fail(format!("{path}.p"), "empty list of powers");
                    }
                }
                TaskSpec::Transgress { from, to, p } => {
                    refer("from", from);
                    refer("to", to);
                    if p.is_empty() {
                        cx.fail(format!("{path}.p"), "empty list of powers");
                    }
                }
                TaskSpec::Adjoint { aux, .. } => refer("aux", aux),
            }
            let is_super = |name: &str| matches!(scenario.connections.get(name), Some(ConnSpec::Superconn { .. }));
            match task {
                TaskSpec::Super { connection, .. } if scenario.connections.contains_key(connection) && !is_super(connection) => {
                    cx.fail(format!("{path}.connection"), format!("{connection:?} is not a superconnection"));
                }
                TaskSpec::Chern { connection, .. } if is_super(connection) => {
                    cx.fail(format!("{path}.connection"), format!("{connection:?} is a superconnection; use the super task"));
                }
                TaskSpec::Transgress { from, to, .. } => {
                    for (field, name) in [("from", from), ("to", to)] {
                        if is_super(name) {
                            cx.fail(format!("{path}.{field}"), format!("{name:?} is a superconnection"));
                        }
                    }
                }
                TaskSpec::Adjoint { aux, .. } => match scenario.connections.get(aux) {
                    Some(ConnSpec::Matrix { over: Over::Tangent, bundle: BundleRef::Adjoint, .. }) | None => {}
                    Some(_) => cx.fail(
                        format!("{path}.aux"),
                        format!("{aux:?} must be a matrix connection over the tangent carrier on the adjoint bundle"),
                    ),
                },
                _ => {}
            }
        }

        if cx.diags.is_empty() {
            Ok(model)
        } else {
            Err(cx.diags)
        }
    }

    fn base(&self, cx: &mut Ctx, path: &str, over: Over, bundle: BundleRef) -> Option<(Carrier, SuperBundle)> {
        let carrier = match over {
            Over::Carrier => self.carrier.clone(),
            Over::Tangent => Carrier::tangent(&self.chart),
        };
        let bundle = match bundle {
            BundleRef::Adjoint => self.adjoint.bundle().clone(),
            BundleRef::Scenario => match &self.bundle {
                Some(b) => b.clone(),
                None => {
                    if self.scenario.bundle.is_none() {
                        cx.fail(path, "no bundle block declared");
                    }
                    return None;
                }
            },
        };
        Some((carrier, bundle))
    }

    fn thetas(&self, cx: &mut Ctx, path: &str, carrier: &Carrier, b: &SuperBundle, theta: &[MatrixSpec]) -> Option<Vec<EndMap>> {
        if theta.is_empty() {
            return Some(vec![EndMap::zeros(b.r0(), b.r1()); carrier.rank()]);
        }
        if theta.len() != carrier.rank() {
            cx.fail(format!("{path}.theta"), format!("expected {} matrices, one per frame element, found {}", carrier.rank(), theta.len()));
            return None;
        }
        let ms: Vec<Option<EndMap>> = theta
            .iter()
            .enumerate()
            .map(|(i, m)| cx.endmap(&format!("{path}.theta[{i}]"), m, b.r0(), b.r1()))
            .collect();
        ms.into_iter().collect()
    }

    fn build_conn(&self, cx: &mut Ctx, path: &str, spec: &ConnSpec) -> Option<Built> {
        let wrap = |cx: &mut Ctx, r: Result<Conn, Error>| match r {
            Ok(c) => Some(Built::Conn(c)),
            Err(e) => {
                cx.fail(path, e.to_string());
                None
            }
        };
        match spec {
            ConnSpec::Matrix { over, bundle, theta } => {
                let (carrier, b) = self.base(cx, path, *over, *bundle)?;
                let thetas = self.thetas(cx, path, &carrier, &b, theta)?;
                wrap(cx, Conn::from_frame(&carrier, &b, thetas))
            }
            ConnSpec::Uth { over, bundle, theta, h } => {
                let (carrier, b) = self.base(cx, path, *over, *bundle)?;
                let thetas = self.thetas(cx, path, &carrier, &b, theta);
                let mut tmpl = HTemplate::zero(self.chart.dim(), carrier.rank(), b.r0(), b.r1());
                let mut ok = true;
                for (n, blk) in h.iter().enumerate() {
                    let bpath = format!("{path}.H[{n}]");
                    let a = match &blk.derivative {
                        None => Some(0),
                        Some(v) => match self.chart.var_index(v) {
                            Some(i) => Some(i + 1),
                            None => {
                                cx.fail(format!("{bpath}.derivative"), format!("unknown variable {v:?}"));
                                None
                            }
                        },
                    };
                    if blk.j == 0 || blk.j > carrier.rank() {
                        cx.fail(format!("{bpath}.j"), format!("frame index {} out of range 1..={}", blk.j, carrier.rank()));
                        ok = false;
                        continue;
                    }
                    let m = cx.endmap(&format!("{bpath}.block"), &blk.block, b.r0(), b.r1());
                    match (a, m) {
                        (Some(a), Some(m)) => {
                            if let Err(e) = tmpl.set(a, blk.j - 1, m) {
                                cx.fail(&bpath, e.to_string());
                                ok = false;
                            }
                        }
                        _ => ok = false,
                    }
                }
                let thetas = thetas?;
                if !ok {
                    return None;
                }
                let z = EndMap::zeros(b.r0(), b.r1());
                let form = TrueForm::from_terms(&carrier, 1, z, thetas.into_iter().enumerate().map(|(i, m)| (vec![i], m)));
                wrap(cx, form.and_then(|f| Conn::template(&carrier, &b, f, tmpl)))
            }
            ConnSpec::CanonicalAdjoint {} => Some(match canonical_adjoint_conn(&self.adjoint, &self.probes) {
                Ok(c) => Built::Canonical(c),
                Err(e) => Built::Failed(e.to_string()),
            }),
            ConnSpec::Superconn { core, omega0, higher } => {
                let core_conn = match self.scenario.connections.get(core) {
                    None => {
                        cx.fail(format!("{path}.core"), format!("unknown connection {core:?}"));
                        return None;
                    }
                    Some(ConnSpec::Superconn { .. }) => {
                        cx.fail(format!("{path}.core"), format!("{core:?} is itself a superconnection"));
                        return None;
                    }
                    Some(_) => self.connections.get(core).cloned(),
                };
                // the core failed validation or construction; already reported
                let core_conn = match core_conn? {
                    Built::Failed(m) => return Some(Built::Failed(format!("core {core:?}: {m}"))),
                    b => b.conn().cloned()?,
                };
                let b = core_conn.bundle().clone();
                let carrier = core_conn.carrier().clone();
                let w0 = cx.endmap(&format!("{path}.omega0"), omega0, b.r0(), b.r1())?;
                let mut sc = match SuperConn::new(&core_conn, w0) {
                    Ok(s) => s,
                    Err(e) => {
                        cx.fail(format!("{path}.omega0"), e.to_string());
                        return None;
                    }
                };
                for (n, hs) in higher.iter().enumerate() {
                    let hpath = format!("{path}.higher[{n}]");
                    let mut terms = Vec::new();
                    for (t, term) in hs.form.iter().enumerate() {
                        let tpath = format!("{hpath}.form[{t}]");
                        if term.indices.len() != hs.degree || term.indices.iter().any(|&i| i == 0 || i > carrier.rank()) {
                            cx.fail(
                                format!("{tpath}.indices"),
                                format!("need {} frame indices in 1..={}", hs.degree, carrier.rank()),
                            );
                            continue;
                        }
                        if let Some(m) = cx.endmap(&format!("{tpath}.coeff"), &term.coeff, b.r0(), b.r1()) {
                            terms.push((term.indices.iter().map(|i| i - 1).collect::<Vec<_>>(), m));
                        }
                    }
                    let form = match TrueForm::from_terms(&carrier, hs.degree, EndMap::zeros(b.r0(), b.r1()), terms) {
                        Ok(f) => f,
                        Err(e) => {
                            cx.fail(&hpath, e.to_string());
                            return None;
                        }
                    };
                    sc = match sc.with(form.to_nlform()) {
                        Ok(s) => s,
                        Err(e) => {
                            cx.fail(&hpath, e.to_string());
                            return None;
                        }
                    };
                }
                Some(Built::Super(sc))
            }
        }
    }
}
