//! Connections, connections up to homotopy and superconnections over a
//! carrier.
//!
//! Every variant is reduced to its potential: an even endomorphism `A_X`
//! with `∇_X s = ρ(X)(s) + A_X s`. The potential may depend on derivatives
//! of the coefficients of `X`, which is how connections up to homotopy
//! fail to be function-linear in `X`.

mod check;
mod chern;
mod superconn;

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::format;
use alloc::sync::Arc;
use alloc::vec::Vec;

pub use check::{
    check_connection, check_covariant_derivative, check_form_identity, check_form_up_to_homotopy, check_higher, check_uth,
    ConnectionReport,
};
pub use chern::{affine_path, chern_form, chern_simons, linearize, ChernForms};
pub use superconn::SuperConn;

use crate::carrier::{CSection, Carrier};
use crate::error::{Error, Result};
use crate::forms::{NLForm, TrueForm};
use crate::ring::Poly;
use crate::superlin::{EndMap, Parity, Section, SuperBundle};

/// `H(f, Σ gⱼ eⱼ) = Σ_{a,j} P_a(f) gⱼ Θ_{a,j}` with `P₀(f) = f` and
/// `P_a(f) = ∂f/∂x_a` (`a` 1-based in the chart).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HTemplate {
    dim: usize,
    rank: usize,
    r0: usize,
    r1: usize,
    blocks: BTreeMap<(usize, usize), EndMap>,
}

impl HTemplate {
    pub fn zero(dim: usize, rank: usize, r0: usize, r1: usize) -> Self {
        HTemplate {
            dim,
            rank,
            r0,
            r1,
            blocks: BTreeMap::new(),
        }
    }

    /// Sets `Θ_{a,j}`; `a ∈ 0..=dim`, `j` is a 0-based frame index. The
    /// block must be odd.
    pub fn set(&mut self, a: usize, j: usize, theta: EndMap) -> Result<()> {
        if a > self.dim {
            return Err(Error::IndexOutOfRange { index: a, dim: self.dim });
        }
        if j >= self.rank {
            return Err(Error::IndexOutOfRange { index: j, dim: self.rank });
        }
        if theta.r0() != self.r0 || theta.r1() != self.r1 {
            return Err(Error::Shape(format!("homotopy block must act on ranks ({}, {})", self.r0, self.r1)));
        }
        if !theta.even_part().is_zero() {
            return Err(Error::Axiom(format!("homotopy block ({a}, {}) is not odd", j + 1)));
        }
        if theta.is_zero() {
            self.blocks.remove(&(a, j));
        } else {
            self.blocks.insert((a, j), theta);
        }
        Ok(())
    }

    pub fn with(mut self, a: usize, j: usize, theta: EndMap) -> Result<Self> {
        self.set(a, j, theta)?;
        Ok(self)
    }

    pub fn is_zero(&self) -> bool {
        self.blocks.is_empty()
    }

    pub fn blocks(&self) -> impl Iterator<Item = (&(usize, usize), &EndMap)> {
        self.blocks.iter()
    }

    pub fn eval(&self, f: &Poly, x: &CSection) -> EndMap {
        let mut acc = EndMap::zeros(self.r0, self.r1);
        for ((a, j), theta) in &self.blocks {
            let g = match x.coeffs().get(*j) {
                Some(g) if !g.is_zero() => g,
                _ => continue,
            };
            let pf = if *a == 0 { f.clone() } else { f.derive(a - 1) };
            if pf.is_zero() {
                continue;
            }
            acc = &acc + &theta.scale(&(&pf * g));
        }
        acc
    }
}

/// The homotopy `H` of a connection up to homotopy.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Homotopy {
    Zero,
    Template(HTemplate),
    /// `(1 − t) H₀(f, X_b) + t H₁(f, X_b)` on a cylinder, where `X_b` drops
    /// the `∂_t` component and `t` is chart variable `t_var`.
    Path {
        h0: Box<Homotopy>,
        h1: Box<Homotopy>,
        t_var: usize,
        base_rank: usize,
    },
}

impl Homotopy {
    pub fn eval(&self, f: &Poly, x: &CSection, r0: usize, r1: usize) -> EndMap {
        match self {
            Homotopy::Zero => EndMap::zeros(r0, r1),
            Homotopy::Template(h) => h.eval(f, x),
            Homotopy::Path { h0, h1, t_var, base_rank } => {
                let xb = CSection::new(x.coeffs()[..*base_rank].to_vec());
                let t = Poly::var(*t_var);
                let a = h0.eval(f, &xb, r0, r1).scale(&(&Poly::one() - &t));
                let b = h1.eval(f, &xb, r0, r1).scale(&t);
                &a + &b
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Homotopy::Zero => true,
            Homotopy::Template(h) => h.is_zero(),
            Homotopy::Path { h0, h1, .. } => h0.is_zero() && h1.is_zero(),
        }
    }
}

/// Second homotopy `H²(f, g, Σ gⱼ eⱼ) = Σ P_a(f) P_b(g) gⱼ Θ_{a,b,j}` with
/// even blocks.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SecondHomotopy {
    dim: usize,
    rank: usize,
    r0: usize,
    r1: usize,
    blocks: BTreeMap<(usize, usize, usize), EndMap>,
}

impl SecondHomotopy {
    pub fn zero(dim: usize, rank: usize, r0: usize, r1: usize) -> Self {
        SecondHomotopy {
            dim,
            rank,
            r0,
            r1,
            blocks: BTreeMap::new(),
        }
    }

    pub fn set(&mut self, a: usize, b: usize, j: usize, theta: EndMap) -> Result<()> {
        if a > self.dim || b > self.dim {
            return Err(Error::IndexOutOfRange {
                index: a.max(b),
                dim: self.dim,
            });
        }
        if j >= self.rank {
            return Err(Error::IndexOutOfRange { index: j, dim: self.rank });
        }
        if theta.r0() != self.r0 || theta.r1() != self.r1 {
            return Err(Error::Shape(format!("homotopy block must act on ranks ({}, {})", self.r0, self.r1)));
        }
        if !theta.odd_part().is_zero() {
            return Err(Error::Axiom("second homotopy blocks must be even".into()));
        }
        self.blocks.insert((a, b, j), theta);
        Ok(())
    }

    pub fn eval(&self, f: &Poly, g: &Poly, x: &CSection) -> EndMap {
        let p = |h: &Poly, a: usize| if a == 0 { h.clone() } else { h.derive(a - 1) };
        let mut acc = EndMap::zeros(self.r0, self.r1);
        for ((a, b, j), theta) in &self.blocks {
            let w = &(&p(f, *a) * &p(g, *b)) * &x.coeffs()[*j];
            if !w.is_zero() {
                acc = &acc + &theta.scale(&w);
            }
        }
        acc
    }
}

#[derive(Debug)]
enum ConnKind {
    Matrix(TrueForm<EndMap>),
    Template(TrueForm<EndMap>, HTemplate),
    Adjoint { sign: i8 },
    Path(Conn, Conn),
}

#[derive(Debug)]
struct ConnData {
    carrier: Carrier,
    bundle: SuperBundle,
    kind: ConnKind,
}

/// A connection-like operator `∇_X` on `(E, ∂)` over a carrier. Cloning is
/// cheap.
#[derive(Clone, Debug)]
pub struct Conn(Arc<ConnData>);

impl PartialEq for Conn {
    fn eq(&self, other: &Conn) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
    }
}

/// The tag of a connection's representation.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ConnVariant {
    Matrix,
    Template,
    CanonicalAdjoint,
    AffinePath,
}

fn check_theta(carrier: &Carrier, bundle: &SuperBundle, theta: &TrueForm<EndMap>) -> Result<()> {
    if theta.carrier() != carrier {
        return Err(Error::ChartMismatch("connection form lives on another carrier".into()));
    }
    if theta.degree() != 1 {
        return Err(Error::Shape("connection form must have degree 1".into()));
    }
    bundle.check_endmap(theta.zero_coeff())
}

impl Conn {
    /// `∇_X = ρ(X) + θ(X)` for a degree-1 endomorphism-valued true form `θ`.
    pub fn matrix(carrier: &Carrier, bundle: &SuperBundle, theta: TrueForm<EndMap>) -> Result<Conn> {
        check_theta(carrier, bundle, &theta)?;
        Ok(Conn(Arc::new(ConnData {
            carrier: carrier.clone(),
            bundle: bundle.clone(),
            kind: ConnKind::Matrix(theta),
        })))
    }

    /// `θ` given by its values `θ(eᵢ)` on the frame.
    pub fn from_frame(carrier: &Carrier, bundle: &SuperBundle, thetas: Vec<EndMap>) -> Result<Conn> {
        if thetas.len() != carrier.rank() {
            return Err(Error::RankMismatch {
                expected: carrier.rank(),
                found: thetas.len(),
            });
        }
        let zero = EndMap::zeros(bundle.r0(), bundle.r1());
        let terms = thetas.into_iter().enumerate().map(|(i, m)| (alloc::vec![i], m));
        let theta = TrueForm::from_terms(carrier, 1, zero, terms)?;
        Conn::matrix(carrier, bundle, theta)
    }

    /// The trivial connection `∇_X = ρ(X)` entrywise.
    pub fn flat(carrier: &Carrier, bundle: &SuperBundle) -> Conn {
        let zero = EndMap::zeros(bundle.r0(), bundle.r1());
        Conn::matrix(carrier, bundle, TrueForm::zero(carrier, 1, zero)).expect("zero form fits")
    }

    /// A connection up to homotopy:
    /// `∇_X = ρ(X) + θ(X) + Σⱼ [H(gⱼ, eⱼ), ∂]` for `X = Σ gⱼ eⱼ`.
    pub fn template(carrier: &Carrier, bundle: &SuperBundle, theta: TrueForm<EndMap>, h: HTemplate) -> Result<Conn> {
        check_theta(carrier, bundle, &theta)?;
        if h.dim != carrier.dim() || h.rank != carrier.rank() || h.r0 != bundle.r0() || h.r1 != bundle.r1() {
            return Err(Error::Shape("homotopy template does not match the carrier and bundle".into()));
        }
        Ok(Conn(Arc::new(ConnData {
            carrier: carrier.clone(),
            bundle: bundle.clone(),
            kind: ConnKind::Template(theta, h),
        })))
    }

    /// The bracket-defined connection on the adjoint complex `𝔤 → TM`:
    /// `∇_X(Y) = [X, Y]`, `∇_X(V) = [ρ(X), V]`, with homotopy
    /// `H(f, X)(V) = sign · V(f) X`.
    pub(crate) fn adjoint(carrier: &Carrier, bundle: &SuperBundle, sign: i8) -> Conn {
        Conn(Arc::new(ConnData {
            carrier: carrier.clone(),
            bundle: bundle.clone(),
            kind: ConnKind::Adjoint { sign },
        }))
    }

    pub fn carrier(&self) -> &Carrier {
        &self.0.carrier
    }

    pub fn bundle(&self) -> &SuperBundle {
        &self.0.bundle
    }

    pub fn variant(&self) -> ConnVariant {
        match &self.0.kind {
            ConnKind::Matrix(_) => ConnVariant::Matrix,
            ConnKind::Template(..) => ConnVariant::Template,
            ConnKind::Adjoint { .. } => ConnVariant::CanonicalAdjoint,
            ConnKind::Path(..) => ConnVariant::AffinePath,
        }
    }

    /// The connection form of a matrix connection.
    pub fn theta(&self) -> Option<&TrueForm<EndMap>> {
        match &self.0.kind {
            ConnKind::Matrix(t) | ConnKind::Template(t, _) => Some(t),
            _ => None,
        }
    }

    /// The built-in homotopy of the variant.
    pub fn homotopy(&self) -> Homotopy {
        match &self.0.kind {
            ConnKind::Matrix(_) => Homotopy::Zero,
            ConnKind::Template(_, h) => Homotopy::Template(h.clone()),
            ConnKind::Adjoint { sign } => Homotopy::Template(adjoint_template(self.carrier(), *sign)),
            ConnKind::Path(a, b) => Homotopy::Path {
                h0: Box::new(a.homotopy()),
                h1: Box::new(b.homotopy()),
                t_var: self.carrier().chart().time_index().expect("cylinder chart"),
                base_rank: a.carrier().rank(),
            },
        }
    }

    /// The endpoints of an affine path.
    pub fn endpoints(&self) -> Option<(&Conn, &Conn)> {
        match &self.0.kind {
            ConnKind::Path(a, b) => Some((a, b)),
            _ => None,
        }
    }

    /// The sign of the built-in homotopy of a canonical adjoint connection.
    pub fn adjoint_sign(&self) -> Option<i8> {
        match &self.0.kind {
            ConnKind::Adjoint { sign } => Some(*sign),
            _ => None,
        }
    }

    /// The potential `A_X = ∇_X − ρ(X)`.
    pub fn potential(&self, x: &CSection) -> EndMap {
        let b = self.bundle();
        match &self.0.kind {
            ConnKind::Matrix(theta) => theta.eval(core::slice::from_ref(x)),
            ConnKind::Template(theta, h) => {
                let mut acc = theta.eval(core::slice::from_ref(x));
                let partial = b.partial();
                for j in 0..x.rank() {
                    let g = x.coeff(j);
                    if g.is_zero() {
                        continue;
                    }
                    let hm = h.eval(g, &self.carrier().basis(j));
                    if !hm.is_zero() {
                        acc = &acc + &hm.scommutator_with(Parity::Odd, partial, Parity::Odd);
                    }
                }
                acc
            }
            ConnKind::Adjoint { .. } => {
                let c = self.carrier();
                let r = c.rank();
                let n = c.dim();
                let rx = c.anchor(x);
                let mut cols = Vec::with_capacity(r + n);
                for k in 0..r {
                    let br = c.bracket_unchecked(x, &c.basis(k));
                    let mut comps = br.coeffs().to_vec();
                    comps.resize(r + n, Poly::zero());
                    cols.push(Section::new(comps[..r].to_vec(), comps[r..].to_vec()));
                }
                for a in 0..n {
                    // [ρX, ∂_a] = −Σ_b ∂_a(ρX^b) ∂_b
                    let odd: Vec<Poly> = rx.coeffs().iter().map(|p| -p.derive(a)).collect();
                    cols.push(Section::new(alloc::vec![Poly::zero(); r], odd));
                }
                EndMap::from_columns(r, n, &cols)
            }
            ConnKind::Path(c0, c1) => {
                let base_rank = c0.carrier().rank();
                let xb = CSection::new(x.coeffs()[..base_rank].to_vec());
                let t = Poly::var(self.carrier().chart().time_index().expect("cylinder chart"));
                let a = c0.potential(&xb).scale(&(&Poly::one() - &t));
                let b = c1.potential(&xb).scale(&t);
                &a + &b
            }
        }
    }

    /// `∇_X s`.
    pub fn apply(&self, x: &CSection, s: &Section) -> Section {
        let rx = self.carrier().anchor(x);
        &s.derive_along(&rx) + &self.potential(x).apply(s)
    }

    /// `∇̃_X T = [∇_X, T] = ρ(X)(T) + [A_X, T]`.
    pub fn derive_endo(&self, x: &CSection, t: &EndMap) -> EndMap {
        let rx = self.carrier().anchor(x);
        &t.derive_along(&rx) + &self.potential(x).commutator(t)
    }

    /// `k(X, Y) = ρX(A_Y) − ρY(A_X) + [A_X, A_Y] − A_{[X,Y]}`, which is
    /// `[∇_X, ∇_Y] − ∇_{[X,Y]}` applied to constant frame sections.
    pub fn curvature_at(&self, x: &CSection, y: &CSection) -> EndMap {
        let c = self.carrier();
        let ax = self.potential(x);
        let ay = self.potential(y);
        let rx = c.anchor(x);
        let ry = c.anchor(y);
        let br = c.bracket_unchecked(x, y);
        let mut k = &ay.derive_along(&rx) - &ax.derive_along(&ry);
        k = &k + &ax.commutator(&ay);
        &k - &self.potential(&br)
    }

    /// The curvature as a nonlinear form.
    pub fn curvature(&self) -> NLForm {
        NLForm::curvature(self)
    }

    /// `d_∇` on an endomorphism- or section-valued nonlinear form.
    pub fn d_nabla(&self, omega: &NLForm) -> Result<NLForm> {
        omega.d_conn(self)
    }

    /// Direct sum of two matrix connections over the same carrier.
    pub fn direct_sum(&self, other: &Conn) -> Result<Conn> {
        let (ta, tb) = match (self.theta(), other.theta(), &self.0.kind, &other.0.kind) {
            (Some(a), Some(b), ConnKind::Matrix(_), ConnKind::Matrix(_)) => (a, b),
            _ => return Err(Error::ValueKind("direct sums are defined for matrix connections".into())),
        };
        if self.carrier() != other.carrier() {
            return Err(Error::ChartMismatch("direct sum over different carriers".into()));
        }
        let bundle = self.bundle().direct_sum(other.bundle());
        let thetas = (0..self.carrier().rank())
            .map(|i| {
                let e = self.carrier().basis(i);
                EndMap::direct_sum(&ta.eval(core::slice::from_ref(&e)), &tb.eval(core::slice::from_ref(&e)))
            })
            .collect();
        Conn::from_frame(self.carrier(), &bundle, thetas)
    }

    /// For a matrix connection on a bundle with `∂ = 0` and block-diagonal
    /// `θ`: the connections induced on `E⁰` and `E¹`, each as a purely even
    /// bundle.
    pub fn even_odd_split(&self) -> Result<(Conn, Conn)> {
        let theta = match &self.0.kind {
            ConnKind::Matrix(t) => t,
            _ => return Err(Error::ValueKind("splitting is defined for matrix connections".into())),
        };
        if !self.bundle().partial().is_zero() {
            return Err(Error::Axiom("splitting needs ∂ = 0".into()));
        }
        let c = self.carrier();
        let mut even = Vec::new();
        let mut odd = Vec::new();
        for i in 0..c.rank() {
            let m = theta.eval(&[c.basis(i)]);
            if !m.odd_part().is_zero() {
                return Err(Error::Axiom(format!("θ(e{}) is not block-diagonal", i + 1)));
            }
            even.push(m.even_block());
            odd.push(m.odd_block());
        }
        let b0 = SuperBundle::split(self.bundle().r0(), 0);
        let b1 = SuperBundle::split(self.bundle().r1(), 0);
        Ok((Conn::from_frame(c, &b0, even)?, Conn::from_frame(c, &b1, odd)?))
    }
}

/// Axiom (i) for a matrix connection, on the frame: each `θ(eᵢ)` is even
/// and `ρ(eᵢ)(∂) + [θ(eᵢ), ∂] = 0`.
pub(crate) fn check_theta_parts(conn: &Conn) -> Result<()> {
    let c = conn.carrier();
    let partial = conn.bundle().partial();
    for i in 0..c.rank() {
        let e = c.basis(i);
        let a = conn.potential(&e);
        if !a.odd_part().is_zero() {
            return Err(Error::Axiom(format!("θ(e{}) is not even", i + 1)));
        }
        let comm = &partial.derive_along(c.anchor_of(i)) + &a.commutator(partial);
        if !comm.is_zero() {
            return Err(Error::Axiom(format!("θ(e{}) does not commute with the differential", i + 1)));
        }
    }
    Ok(())
}

/// `Θ_{a,j}` maps `∂_a ∈ E¹` to `sign · eⱼ ∈ E⁰`.
fn adjoint_template(carrier: &Carrier, sign: i8) -> HTemplate {
    let r = carrier.rank();
    let n = carrier.dim();
    let mut h = HTemplate::zero(n, r, r, n);
    for a in 0..n {
        for j in 0..r {
            let mut m = EndMap::zeros(r, n);
            m.set(j, r + a, Poly::from_int(sign as i64));
            h.set(a + 1, j, m).expect("odd block");
        }
    }
    h
}
