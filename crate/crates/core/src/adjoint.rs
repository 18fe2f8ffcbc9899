//! The adjoint complex `𝔤 → TM` of a carrier, its canonical flat
//! connection up to homotopy, and the constructive vanishing pipeline: the
//! Chern forms of the induced connection are exhibited as exact, with an
//! explicit primitive.

use alloc::format;
use alloc::vec::Vec;

use crate::carrier::{CSection, Carrier};
use crate::check::{dense_coeffs, CheckReport, Probes};
use crate::conn::{affine_path, check_connection, check_higher, check_uth, Conn, ChernForms, ConnVariant};
use crate::error::{Error, Result};
use crate::forms::{anchor_pullback, TrueForm};
use crate::ring::Poly;
use crate::superlin::{EndMap, SuperBundle};

/// `E⁰ = 𝔤` (the carrier), `E¹ = TM`, `∂ = ρ` from `E⁰` to `E¹` and zero
/// back.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AdjointComplex {
    carrier: Carrier,
    bundle: SuperBundle,
}

impl AdjointComplex {
    /// Builds the complex after checking the carrier axioms.
    pub fn new(carrier: &Carrier, probe_degree: u32) -> Result<Self> {
        let report = carrier.check(probe_degree);
        if let Some(v) = report.violations.first() {
            return Err(Error::CarrierCheck(v.describe(carrier.chart())));
        }
        Ok(AdjointComplex::unchecked(carrier))
    }

    /// Builds the complex without checking the carrier.
    pub fn unchecked(carrier: &Carrier) -> Self {
        let r = carrier.rank();
        let n = carrier.dim();
        let forward: Vec<Vec<Poly>> = (0..n)
            .map(|a| (0..r).map(|i| carrier.anchor_of(i).coeffs()[a].clone()).collect())
            .collect();
        let forward = if r == 0 || n == 0 { Vec::new() } else { forward };
        let bundle = SuperBundle::new(r, n, &forward, &[]).expect("anchor matrix has the right shape");
        AdjointComplex {
            carrier: carrier.clone(),
            bundle,
        }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn bundle(&self) -> &SuperBundle {
        &self.bundle
    }

    /// The bracket-defined connection with homotopy sign `sign` (±1),
    /// without resolving the sign.
    pub fn connection_with_sign(&self, sign: i8) -> Conn {
        Conn::adjoint(&self.carrier, &self.bundle, sign)
    }
}

/// The canonical connection with the homotopy sign fixed by the
/// up-to-homotopy check, plus the evidence.
#[derive(Clone, Debug)]
pub struct CanonicalAdjoint {
    pub conn: Conn,
    /// `σ` in `H(f, X)(V) = σ V(f) X`.
    pub sign: i8,
    /// The up-to-homotopy check with the adopted sign (passes).
    pub accepted: CheckReport,
    /// The same check with the opposite sign.
    pub rejected: CheckReport,
}

/// Builds `∇_X(Y) = [X, Y]`, `∇_X(V) = [ρ(X), V]` and resolves the sign of
/// `H(f, X)(V) = ±V(f) X` by running the up-to-homotopy check with both.
pub fn canonical_adjoint_conn(complex: &AdjointComplex, probes: &Probes) -> Result<CanonicalAdjoint> {
    let plus = complex.connection_with_sign(1);
    let minus = complex.connection_with_sign(-1);
    let rp = check_uth(&plus, &plus.homotopy(), probes);
    let rm = check_uth(&minus, &minus.homotopy(), probes);
    let (conn, sign, accepted, rejected) = if rm.passed() {
        (minus, -1, rm, rp)
    } else if rp.passed() {
        (plus, 1, rp, rm)
    } else {
        let v = &rm.violations[0];
        return Err(Error::Axiom(format!(
            "canonical connection is not up to homotopy with either sign: {}",
            v.describe(complex.carrier.chart())
        )));
    };
    Ok(CanonicalAdjoint {
        conn,
        sign,
        accepted,
        rejected,
    })
}

/// `∇^𝔤_X = aux_{ρ(X)}` for a classical connection `aux` on the adjoint
/// bundle, over the tangent carrier of the same chart.
pub fn g_connection_from_classical(complex: &AdjointComplex, aux: &Conn, probes: &Probes) -> Result<Conn> {
    let c = complex.carrier();
    if !aux.carrier().is_tangent() || aux.carrier().chart() != c.chart() {
        return Err(Error::ChartMismatch("auxiliary connection must live on the tangent carrier of the same chart".into()));
    }
    if aux.bundle() != complex.bundle() {
        return Err(Error::Shape("auxiliary connection must act on the adjoint bundle".into()));
    }
    if aux.variant() != ConnVariant::Matrix {
        return Err(Error::ValueKind("auxiliary connection must be a matrix connection".into()));
    }
    let aux_report = check_connection(aux, probes);
    if !aux_report.passed() {
        return Err(Error::Axiom("auxiliary connection fails the connection axioms".into()));
    }
    let thetas: Vec<EndMap> = (0..c.rank())
        .map(|i| aux.potential(&CSection::from(c.anchor_of(i).clone())))
        .collect();
    let induced = Conn::from_frame(c, complex.bundle(), thetas)?;
    let report = check_connection(&induced, probes);
    if !report.passed() {
        return Err(Error::Axiom("induced connection fails the connection axioms".into()));
    }
    Ok(induced)
}

/// Forms for one power `p`, oriented as `𝔤 − TM` (`E⁰ = 𝔤`).
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingTerm {
    pub p: usize,
    pub chern_canonical: TrueForm<Poly>,
    pub chern_induced: TrueForm<Poly>,
    /// `ρ*` of the auxiliary connection's Chern form.
    pub pullback: TrueForm<Poly>,
    /// The primitive `cs_p(canonical, induced)`.
    pub cs: TrueForm<Poly>,
    /// `d cs_p − (Ch(induced) − Ch(canonical))`.
    pub exactness_residual: TrueForm<Poly>,
    /// `Ch(induced) − ρ* Ch(aux)`.
    pub pullback_residual: TrueForm<Poly>,
}

impl VanishingTerm {
    pub fn passed(&self) -> bool {
        self.chern_canonical.is_zero() && self.exactness_residual.is_zero() && self.pullback_residual.is_zero()
    }

    /// The same forms for the opposite orientation `TM − 𝔤`.
    pub fn reversed(&self) -> VanishingTerm {
        VanishingTerm {
            p: self.p,
            chern_canonical: self.chern_canonical.neg(),
            chern_induced: self.chern_induced.neg(),
            pullback: self.pullback.neg(),
            cs: self.cs.neg(),
            exactness_residual: self.exactness_residual.neg(),
            pullback_residual: self.pullback_residual.neg(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct VanishingReport {
    pub carrier_check: CheckReport,
    pub sign: i8,
    pub uth: CheckReport,
    pub opposite_sign: CheckReport,
    pub higher: CheckReport,
    /// Curvature of the canonical connection on probe pairs.
    pub canonical_flatness: CheckReport,
    pub induced: Conn,
    pub per_p: Vec<VanishingTerm>,
}

impl VanishingReport {
    pub fn passed(&self) -> bool {
        self.carrier_check.passed()
            && self.uth.passed()
            && self.higher.passed()
            && self.canonical_flatness.passed()
            && self.per_p.iter().all(VanishingTerm::passed)
    }
}

/// Evaluates the curvature of `conn` on frame pairs and on pairs with one
/// dense section.
pub fn flatness_report(conn: &Conn, probes: &Probes) -> CheckReport {
    let c = conn.carrier();
    let mut report = CheckReport::new("curvature vanishes", probes.degree);
    let mut xs: Vec<(alloc::string::String, CSection)> = (0..c.rank()).map(|i| (format!("e{}", i + 1), c.basis(i))).collect();
    if probes.dense_section && c.rank() > 0 {
        xs.push(("X*".into(), CSection::new(dense_coeffs(c.dim(), c.rank()))));
    }
    let monomials: Vec<Poly> = c.chart().monomials(probes.degree);
    for (i, (lx, x)) in xs.iter().enumerate() {
        for (ly, y) in xs.iter().skip(i + 1) {
            for f in &monomials {
                let fx = x.scale(f);
                let k = conn.curvature_at(&fx, y);
                report.record(
                    "k(X, Y) = 0",
                    format!("X = ({})*{lx}, Y = {ly}", c.chart().fmt_poly(f)),
                    k.labelled("k"),
                );
            }
        }
    }
    report
}

/// Runs the vanishing pipeline for `p = 1..=p_max`.
pub fn vanishing_report(carrier: &Carrier, aux: &Conn, p_max: usize, probes: &Probes) -> Result<VanishingReport> {
    let carrier_check = carrier.check(probes.degree);
    if !carrier_check.passed() {
        return Err(Error::CarrierCheck(carrier_check.violations[0].describe(carrier.chart())));
    }
    let complex = AdjointComplex::unchecked(carrier);
    let canonical = canonical_adjoint_conn(&complex, probes)?;
    let conn = &canonical.conn;
    let higher = check_higher(conn, &conn.homotopy(), None, probes);
    let canonical_flatness = flatness_report(conn, probes);
    let induced = g_connection_from_classical(&complex, aux, probes)?;

    let mut ch_canonical = ChernForms::new(conn, probes.degree);
    let mut ch_induced = ChernForms::new(&induced, probes.degree);
    let mut ch_aux = ChernForms::new(aux, probes.degree);
    let mut ch_path = ChernForms::new(&affine_path(conn, &induced)?, probes.degree);
    let mut per_p = Vec::new();
    for p in 1..=p_max {
        let chern_canonical = ch_canonical.chern_form(p)?;
        let chern_induced = ch_induced.chern_form(p)?;
        let pullback = anchor_pullback(carrier, &ch_aux.chern_form(p)?)?;
        let cs = ch_path.chern_form(p)?.fiber_integrate()?;
        let exactness_residual = cs.exterior_d().sub(&chern_induced.sub(&chern_canonical)?)?;
        let pullback_residual = chern_induced.sub(&pullback)?;
        per_p.push(VanishingTerm {
            p,
            chern_canonical,
            chern_induced,
            pullback,
            cs,
            exactness_residual,
            pullback_residual,
        });
    }
    Ok(VanishingReport {
        carrier_check,
        sign: canonical.sign,
        uth: canonical.accepted,
        opposite_sign: canonical.rejected,
        higher,
        canonical_flatness,
        induced,
        per_p,
    })
}
