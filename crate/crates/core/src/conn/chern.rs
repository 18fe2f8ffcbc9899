use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

use super::{check_theta_parts, Conn, ConnData, ConnKind};
use crate::error::{Error, Result};
use crate::forms::{NLForm, Session, TrueForm};
use crate::ring::Poly;
use crate::superlin::EndMap;

/// Chern character forms of one connection, sharing the curvature node and
/// the evaluation cache across powers.
#[derive(Debug)]
pub struct ChernForms {
    conn: Conn,
    curvature: NLForm,
    session: Session,
    probe_degree: u32,
}

impl ChernForms {
    pub fn new(conn: &Conn, probe_degree: u32) -> Self {
        ChernForms {
            conn: conn.clone(),
            curvature: conn.curvature(),
            session: Session::new(),
            probe_degree,
        }
    }

    pub fn conn(&self) -> &Conn {
        &self.conn
    }

    pub fn curvature(&self) -> &NLForm {
        &self.curvature
    }

    pub fn session(&mut self) -> &mut Session {
        &mut self.session
    }

    /// `Tr_s(k^p)` as a true form of degree `2p`, checked to be closed.
    /// `p = 0` gives the constant `r₀ − r₁`.
    pub fn chern_form(&mut self, p: usize) -> Result<TrueForm<Poly>> {
        let carrier = self.conn.carrier();
        if p == 0 {
            let b = self.conn.bundle();
            let rank = b.r0() as i64 - b.r1() as i64;
            return Ok(TrueForm::function(carrier, Poly::from_int(rank)));
        }
        if 2 * p > carrier.rank() {
            return Ok(TrueForm::scalar_zero(carrier, 2 * p));
        }
        let form = self.curvature.power(p)?.supertrace()?;
        let alpha = form.assemble_scalar(&mut self.session, self.probe_degree)?;
        let d = alpha.exterior_d();
        if !d.is_zero() {
            return Err(Error::ClosednessViolation { p, residual: d.display() });
        }
        Ok(alpha)
    }
}

/// `Tr_s(k_∇^p)`.
pub fn chern_form(conn: &Conn, p: usize, probe_degree: u32) -> Result<TrueForm<Poly>> {
    ChernForms::new(conn, probe_degree).chern_form(p)
}

/// The matrix connection agreeing with `conn` on the frame:
/// `θ(eᵢ) = ∇_{eᵢ} − ρ(eᵢ)`. Fails if the resulting `θ` is not even or
/// does not commute with `∂`.
pub fn linearize(conn: &Conn) -> Result<Conn> {
    if let ConnKind::Matrix(_) = &conn.0.kind {
        return Ok(conn.clone());
    }
    let c = conn.carrier();
    let thetas: Vec<EndMap> = (0..c.rank()).map(|i| conn.potential(&c.basis(i))).collect();
    let lin = Conn::from_frame(c, conn.bundle(), thetas)?;
    check_theta_parts(&lin)?;
    Ok(lin)
}

/// `(1 − t)∇₀ + t∇₁` on the cylinder carrier, acting by `∂/∂t` along `∂_t`.
pub fn affine_path(c0: &Conn, c1: &Conn) -> Result<Conn> {
    if c0.carrier() != c1.carrier() {
        return Err(Error::ChartMismatch("path endpoints live on different carriers".into()));
    }
    if c0.bundle() != c1.bundle() {
        return Err(Error::Shape("path endpoints act on different bundles".into()));
    }
    let cylinder = c0.carrier().cylinder()?;
    Ok(Conn(Arc::new(ConnData {
        carrier: cylinder,
        bundle: c0.bundle().clone(),
        kind: ConnKind::Path(c0.clone(), c1.clone()),
    })))
}

/// `cs_p(∇₀, ∇₁) = ∫₀¹ Tr_s(k_{∇_t}^p)`, with `d cs_p = Tr_s(k₁^p) − Tr_s(k₀^p)`.
pub fn chern_simons(c0: &Conn, c1: &Conn, p: usize, probe_degree: u32) -> Result<TrueForm<Poly>> {
    if p == 0 {
        return Err(Error::Shape(format!("transgression needs p ≥ 1, got {p}")));
    }
    let path = affine_path(c0, c1)?;
    chern_form(&path, p, probe_degree)?.fiber_integrate()
}
