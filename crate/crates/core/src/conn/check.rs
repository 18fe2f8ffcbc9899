use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use super::{Conn, Homotopy, SecondHomotopy};
use crate::carrier::CSection;
use crate::check::{dense_coeffs, CheckReport, Probes};
use crate::error::{Error, Result};
use crate::forms::{increasing_tuples, NLForm, Session, Value};
use crate::ring::{Chart, Poly, Rational};
use crate::superlin::{EndMap, Parity, Section};

/// One report per connection axiom.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConnectionReport {
    /// (i) `∇_X` is even and commutes with `∂`.
    pub parity: CheckReport,
    /// (ii) `∇_X(f s) = f ∇_X s + ρ(X)(f) s`.
    pub leibniz: CheckReport,
    /// (iii) `∇_{fX} = f ∇_X`.
    pub linearity: CheckReport,
}

impl ConnectionReport {
    pub fn passed(&self) -> bool {
        self.parity.passed() && self.leibniz.passed() && self.linearity.passed()
    }
}

fn nonconstant_monomials(chart: &Chart, degree: u32) -> Vec<Poly> {
    chart.monomials(degree).into_iter().filter(|m| !m.is_constant()).collect()
}

/// Carrier probe sections with labels: the frame and, optionally, one dense
/// section.
fn carrier_probes(conn: &Conn, probes: &Probes) -> Vec<(String, CSection)> {
    let c = conn.carrier();
    let mut out: Vec<(String, CSection)> = (0..c.rank()).map(|i| (format!("e{}", i + 1), c.basis(i))).collect();
    if probes.dense_section && c.rank() > 0 {
        out.push(("X*".into(), CSection::new(dense_coeffs(c.dim(), c.rank()))));
    }
    out
}

fn bundle_probes(conn: &Conn, probes: &Probes) -> Vec<(String, Section)> {
    let b = conn.bundle();
    let mut out: Vec<(String, Section)> = b
        .frame()
        .into_iter()
        .enumerate()
        .map(|(k, s)| (format!("s{}", k + 1), s))
        .collect();
    if probes.dense_section && b.size() > 0 {
        let comps = dense_coeffs(conn.carrier().dim(), b.size());
        out.push(("s*".into(), Section::new(comps[..b.r0()].to_vec(), comps[b.r0()..].to_vec())));
    }
    out
}

fn labelled_section(s: &Section, name: &str) -> Vec<(String, Poly)> {
    Value::Section(s.clone()).labelled(name)
}

/// Checks the three connection axioms on probes.
///
/// Probe vectors are frame elements, their multiples by nonconstant
/// monomials and one dense section; probe functions are nonconstant
/// monomials up to the probe degree.
pub fn check_connection(conn: &Conn, probes: &Probes) -> ConnectionReport {
    let chart = conn.carrier().chart();
    let partial = conn.bundle().partial();
    let monomials = nonconstant_monomials(chart, probes.degree);
    let xs = carrier_probes(conn, probes);
    let ss = bundle_probes(conn, probes);

    let mut parity = CheckReport::new("axiom (i): even, commutes with partial", probes.degree);
    let mut xs_scaled = xs.clone();
    for (label, x) in &xs {
        for f in &monomials {
            xs_scaled.push((format!("({})*{label}", chart.fmt_poly(f)), x.scale(f)));
        }
    }
    for (label, x) in &xs_scaled {
        let a = conn.potential(x);
        parity.record("nabla_X is even", label.clone(), a.odd_part().labelled("odd part"));
        // ∇_X ∂ − ∂ ∇_X = ρX(∂) + A_X ∂ − ∂ A_X
        let rx = conn.carrier().anchor(x);
        let comm = &partial.derive_along(&rx) + &a.commutator(partial);
        parity.record("nabla_X commutes with partial", label.clone(), comm.labelled("[nabla_X, partial]"));
    }

    let mut leibniz = CheckReport::new("axiom (ii): Leibniz", probes.degree);
    for (xl, x) in &xs {
        let rx = conn.carrier().anchor(x);
        for (sl, s) in &ss {
            let base = conn.apply(x, s);
            for f in &monomials {
                let lhs = conn.apply(x, &s.scale(f));
                let rhs = &base.scale(f) + &s.scale(&rx.apply(f));
                leibniz.record(
                    "nabla_X(f s) = f nabla_X s + X(f) s",
                    format!("f = {}, X = {xl}, s = {sl}", chart.fmt_poly(f)),
                    labelled_section(&(&lhs - &rhs), "residual"),
                );
            }
        }
    }

    let mut linearity = CheckReport::new("axiom (iii): function-linear in X", probes.degree);
    for (xl, x) in &xs {
        for f in &monomials {
            let fx = x.scale(f);
            for (sl, s) in &ss {
                let lhs = conn.apply(&fx, s);
                let rhs = conn.apply(x, s).scale(f);
                linearity.record(
                    "nabla_{fX} s = f nabla_X s",
                    format!("f = {}, X = {xl}, s = {sl}", chart.fmt_poly(f)),
                    labelled_section(&(&lhs - &rhs), "residual"),
                );
            }
        }
    }

    ConnectionReport {
        parity,
        leibniz,
        linearity,
    }
}

/// Checks `∇_{fX} s − f ∇_X s − [H(f, X), ∂] s = 0` on probes, with
/// `[H, ∂] = H∂ + ∂H` for odd `H`.
pub fn check_uth(conn: &Conn, h: &Homotopy, probes: &Probes) -> CheckReport {
    let chart = conn.carrier().chart();
    let b = conn.bundle();
    let partial = b.partial();
    let mut report = CheckReport::new("linear up to homotopy", probes.degree);
    let mut fs = nonconstant_monomials(chart, probes.degree);
    if probes.dense_section && chart.dim() > 0 {
        fs.push(dense_coeffs(chart.dim(), 1).remove(0));
    }
    let xs = carrier_probes(conn, probes);
    let ss = bundle_probes(conn, probes);
    for (xl, x) in &xs {
        for f in &fs {
            let fx = x.scale(f);
            let hm = h.eval(f, x, b.r0(), b.r1());
            let hp = hm.scommutator_with(Parity::Odd, partial, Parity::Odd);
            for (sl, s) in &ss {
                let lhs = conn.apply(&fx, s);
                let rhs = &conn.apply(x, s).scale(f) + &hp.apply(s);
                report.record(
                    "nabla_{fX} = f nabla_X + [H(f,X), partial]",
                    format!("f = {}, X = {xl}, s = {sl}", chart.fmt_poly(f)),
                    labelled_section(&(&lhs - &rhs), "residual"),
                );
            }
        }
    }
    report
}

/// Checks `f H¹(g, X) − H¹(fg, X) + H¹(f, gX) = [H²(f, g, X), ∂]` on probe
/// triples, with `[H², ∂] = H²∂ − ∂H²` for even `H²`.
pub fn check_higher(conn: &Conn, h1: &Homotopy, h2: Option<&SecondHomotopy>, probes: &Probes) -> CheckReport {
    let chart = conn.carrier().chart();
    let b = conn.bundle();
    let partial = b.partial();
    let mut report = CheckReport::new("higher homotopy", probes.degree);
    let fs = nonconstant_monomials(chart, probes.degree);
    let xs = carrier_probes(conn, probes);
    for (xl, x) in &xs {
        for f in &fs {
            for g in &fs {
                let a = h1.eval(g, x, b.r0(), b.r1()).scale(f);
                let bb = h1.eval(&(f * g), x, b.r0(), b.r1());
                let c = h1.eval(f, &x.scale(g), b.r0(), b.r1());
                let mut lhs = &(&a - &bb) + &c;
                if let Some(h2) = h2 {
                    let m = h2.eval(f, g, x);
                    lhs = &lhs - &m.commutator(partial);
                }
                report.record(
                    "f H(g,X) - H(fg,X) + H(f,gX) = [H2(f,g,X), partial]",
                    format!("f = {}, g = {}, X = {xl}", chart.fmt_poly(f), chart.fmt_poly(g)),
                    lhs.labelled("residual"),
                );
            }
        }
    }
    report
}

/// Checks that an endomorphism-valued form behaves like a form up to
/// homotopy: its values supercommute with `∂` on frame tuples, and each
/// linearity defect `ω(…, f eᵢ, …) − f ω(…, eᵢ, …)` supercommutes with `∂`,
/// as every `[H, ∂]` does.
pub fn check_form_up_to_homotopy(conn: &Conn, omega: &NLForm, probes: &Probes) -> CheckReport {
    let carrier = conn.carrier();
    let chart = carrier.chart();
    let partial = conn.bundle().partial();
    let mut report = CheckReport::new("form up to homotopy", probes.degree);
    let mut session = Session::new();
    let monomials = nonconstant_monomials(chart, probes.degree);
    let comm = |m: &EndMap| -> EndMap {
        let even = m.even_part().commutator(partial);
        let odd = m.odd_part().scommutator_with(Parity::Odd, partial, Parity::Odd);
        &even + &odd
    };
    for tuple in increasing_tuples(carrier.rank(), omega.degree()) {
        let frame: Vec<CSection> = tuple.iter().map(|&i| carrier.basis(i)).collect();
        let label: Vec<String> = tuple.iter().map(|i| format!("e{}", i + 1)).collect();
        let label = label.join(", ");
        let base = match omega.eval_in(&mut session, &frame) {
            Ok(Value::Endo(m)) => m,
            _ => {
                report.record("endomorphism-valued", label, [("value".into(), Poly::one())]);
                continue;
            }
        };
        report.record("[omega, partial] = 0", label.clone(), comm(&base).labelled("[omega, partial]"));
        for slot in 0..frame.len() {
            for f in &monomials {
                let mut probe = frame.clone();
                probe[slot] = frame[slot].scale(f);
                let v = omega.eval_in(&mut session, &probe).ok().and_then(|v| v.into_endo());
                if let Some(v) = v {
                    let defect = &v - &base.scale(f);
                    report.record(
                        "[linearity defect, partial] = 0",
                        format!("{label}; slot {} scaled by {}", slot + 1, chart.fmt_poly(f)),
                        comm(&defect).labelled("[defect, partial]"),
                    );
                }
            }
        }
    }
    report
}

/// Compares two forms of equal degree and shape on every increasing frame
/// tuple and, when enabled, on tuples whose first slot is a dense section.
pub fn check_form_identity(identity: &str, lhs: &NLForm, rhs: &NLForm, probes: &Probes) -> Result<CheckReport> {
    if lhs.degree() != rhs.degree() || lhs.shape() != rhs.shape() || lhs.carrier() != rhs.carrier() {
        return Err(Error::Shape(format!("{identity}: sides differ in degree, shape or carrier")));
    }
    let carrier = lhs.carrier();
    let mut report = CheckReport::new(identity, probes.degree);
    let mut session = Session::new();
    let dense = CSection::new(dense_coeffs(carrier.dim(), carrier.rank()));
    for tuple in increasing_tuples(carrier.rank(), lhs.degree()) {
        let frame: Vec<CSection> = tuple.iter().map(|&i| carrier.basis(i)).collect();
        let label: Vec<String> = tuple.iter().map(|i| format!("e{}", i + 1)).collect();
        let mut cases = vec![(label.join(", "), frame.clone())];
        if probes.dense_section && !frame.is_empty() {
            let mut args = frame;
            args[0] = dense.clone();
            let mut label = label;
            label[0] = "X*".into();
            cases.push((label.join(", "), args));
        }
        for (label, args) in cases {
            let l = lhs.eval_in(&mut session, &args)?;
            let r = rhs.eval_in(&mut session, &args)?;
            report.record(identity, label, l.sub(&r).labelled("residual"));
        }
    }
    Ok(report)
}

/// The identities satisfied by the covariant derivative of a connection:
/// Leibniz for `d_∇(ω η)`, `d_∇² ω = [k, ω]`, `d_∇ k = 0` and
/// `Tr_s d_∇ ω = d Tr_s ω`. `omega` and `eta` are endomorphism-valued
/// probe forms of homogeneous parity.
pub fn check_covariant_derivative(conn: &Conn, omega: &NLForm, eta: &NLForm, probes: &Probes) -> Result<CheckReport> {
    let mut report = CheckReport::new("covariant derivative", probes.degree);
    let sign = if omega.parity().ok_or(Error::MixedParity)?.is_odd() { -1 } else { 1 };
    let one = Rational::from_integer(1.into());

    let lhs = conn.d_nabla(&omega.product(eta)?)?;
    let rhs = NLForm::sum(&[
        (one.clone(), conn.d_nabla(omega)?.product(eta)?),
        (Rational::from_integer(sign.into()), omega.product(&conn.d_nabla(eta)?)?),
    ])?;
    report.merge(check_form_identity("d(omega eta) = d(omega) eta + (-1)^|omega| omega d(eta)", &lhs, &rhs, probes)?);

    let k = conn.curvature();
    for w in [omega, eta] {
        let lhs = conn.d_nabla(&conn.d_nabla(w)?)?;
        report.merge(check_form_identity("d^2 omega = [k, omega]", &lhs, &k.graded_commutator(w)?, probes)?);
    }

    let bianchi = conn.d_nabla(&k)?;
    let zero = NLForm::sum(&[(Rational::from_integer(0.into()), bianchi.clone())])?;
    report.merge(check_form_identity("d k = 0", &bianchi, &zero, probes)?);

    for w in [omega, eta] {
        let lhs = conn.d_nabla(w)?.supertrace()?;
        let rhs = w.supertrace()?.d_carrier();
        report.merge(check_form_identity("str d omega = d str omega", &lhs, &rhs, probes)?);
    }
    Ok(report)
}
