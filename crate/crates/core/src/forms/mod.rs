//! Nonlinear forms: antisymmetric ℝ-multilinear maps on tuples of carrier
//! sections, valued in functions, sections of `E` or endomorphisms of `E`.
//!
//! Forms are expression trees evaluated on demand. A [`Session`] memoizes
//! node values keyed by the sorted argument tuple, so shuffle sums reuse
//! the evaluations of their factors.

mod true_form;
mod value;

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;
use core::sync::atomic::{AtomicUsize, Ordering};

pub use true_form::{anchor_pullback, increasing_tuples, Coefficient, TrueForm};
pub use value::{Shape, Value, ValueKind};

use crate::carrier::{CSection, Carrier};
use crate::conn::Conn;
use crate::error::{Error, Result};
use crate::ring::{Poly, Rational};
use crate::superlin::Parity;
use true_form::sort_with_sign;

static NEXT_ID: AtomicUsize = AtomicUsize::new(0);

type RuleFn = dyn Fn(&[CSection]) -> Value + Send + Sync;

/// What supplies the derivative terms of the differential.
#[derive(Clone, Debug)]
pub enum DiffCtx {
    /// The anchor acting entrywise (the trivial flat connection).
    Carrier(Carrier),
    /// A connection: `∇` on sections, `[∇, −]` on endomorphisms, the anchor
    /// on functions.
    Conn(Conn),
}

impl DiffCtx {
    pub fn carrier(&self) -> &Carrier {
        match self {
            DiffCtx::Carrier(c) => c,
            DiffCtx::Conn(c) => c.carrier(),
        }
    }

    fn derive(&self, x: &CSection, v: &Value) -> Value {
        match (self, v) {
            (DiffCtx::Carrier(c), v) => v.derive_along(&c.anchor(x)),
            (DiffCtx::Conn(c), Value::Scalar(f)) => Value::Scalar(c.carrier().anchor(x).apply(f)),
            (DiffCtx::Conn(c), Value::Section(s)) => Value::Section(c.apply(x, s)),
            (DiffCtx::Conn(c), Value::Endo(t)) => Value::Endo(c.derive_endo(x, t)),
        }
    }
}

enum Op {
    Scalar(TrueForm<Poly>),
    Endo(TrueForm<crate::superlin::EndMap>),
    Section(TrueForm<crate::superlin::Section>),
    Curvature(Conn),
    Product(NLForm, NLForm),
    Differential(DiffCtx, NLForm),
    Supertrace(NLForm),
    Sum(Vec<(Rational, NLForm)>),
    Rule(String, Arc<RuleFn>),
}

struct Node {
    id: usize,
    degree: usize,
    shape: Shape,
    e_parity: Option<Parity>,
    carrier: Carrier,
    op: Op,
}

/// A nonlinear form. Cloning is cheap.
#[derive(Clone)]
pub struct NLForm(Arc<Node>);

impl fmt::Debug for NLForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match &self.0.op {
            Op::Scalar(_) => "scalar",
            Op::Endo(_) => "endo",
            Op::Section(_) => "section",
            Op::Curvature(_) => "curvature",
            Op::Product(..) => "product",
            Op::Differential(..) => "d",
            Op::Supertrace(_) => "str",
            Op::Sum(_) => "sum",
            Op::Rule(name, _) => name.as_str(),
        };
        write!(f, "NLForm#{}({kind}, degree {})", self.0.id, self.0.degree)
    }
}

/// Evaluation cache. Results are identical with or without memoization.
#[derive(Debug)]
pub struct Session {
    memo: bool,
    cache: BTreeMap<(usize, Vec<CSection>), Value>,
}

impl Default for Session {
    fn default() -> Self {
        Session::new()
    }
}

impl Session {
    pub fn new() -> Self {
        Session {
            memo: true,
            cache: BTreeMap::new(),
        }
    }

    /// A session that recomputes every node on every call.
    pub fn without_memo() -> Self {
        Session {
            memo: false,
            cache: BTreeMap::new(),
        }
    }

    pub fn cached(&self) -> usize {
        self.cache.len()
    }
}

impl NLForm {
    fn build(degree: usize, shape: Shape, e_parity: Option<Parity>, carrier: &Carrier, op: Op) -> NLForm {
        NLForm(Arc::new(Node {
            id: NEXT_ID.fetch_add(1, Ordering::Relaxed),
            degree,
            shape,
            e_parity,
            carrier: carrier.clone(),
            op,
        }))
    }

    /// A function-linear scalar form.
    pub fn scalar(alpha: &TrueForm<Poly>) -> NLForm {
        NLForm::build(alpha.degree(), Shape::scalar(), Some(Parity::Even), alpha.carrier(), Op::Scalar(alpha.clone()))
    }

    /// A function-linear endomorphism-valued form.
    pub fn endo(alpha: &TrueForm<crate::superlin::EndMap>) -> NLForm {
        let z = alpha.zero_coeff();
        let e = common_parity(alpha.terms().map(|(_, c)| c.parity()));
        NLForm::build(alpha.degree(), Shape::endo(z.r0(), z.r1()), e, alpha.carrier(), Op::Endo(alpha.clone()))
    }

    /// A function-linear section-valued form.
    pub fn section(alpha: &TrueForm<crate::superlin::Section>) -> NLForm {
        let z = alpha.zero_coeff();
        let e = common_parity(alpha.terms().map(|(_, c)| c.parity()));
        NLForm::build(alpha.degree(), Shape::section(z.r0(), z.r1()), e, alpha.carrier(), Op::Section(alpha.clone()))
    }

    /// An opaque rule. It is evaluated literally on the given arguments,
    /// so its antisymmetry and multilinearity are the caller's promise.
    pub fn rule<F>(carrier: &Carrier, degree: usize, shape: Shape, e_parity: Option<Parity>, name: &str, f: F) -> NLForm
    where
        F: Fn(&[CSection]) -> Value + Send + Sync + 'static,
    {
        NLForm::build(degree, shape, e_parity, carrier, Op::Rule(name.into(), Arc::new(f)))
    }

    /// The curvature `k(X, Y) = [∇_X, ∇_Y] − ∇_{[X,Y]}`.
    pub fn curvature(conn: &Conn) -> NLForm {
        let b = conn.bundle();
        NLForm::build(
            2,
            Shape::endo(b.r0(), b.r1()),
            Some(Parity::Even),
            conn.carrier(),
            Op::Curvature(conn.clone()),
        )
    }

    pub fn id(&self) -> usize {
        self.0.id
    }

    pub fn degree(&self) -> usize {
        self.0.degree
    }

    pub fn shape(&self) -> Shape {
        self.0.shape
    }

    pub fn kind(&self) -> ValueKind {
        self.0.shape.kind
    }

    pub fn carrier(&self) -> &Carrier {
        &self.0.carrier
    }

    /// Parity of the values in `E`; `None` when mixed.
    pub fn e_parity(&self) -> Option<Parity> {
        self.0.e_parity
    }

    /// Total parity: form degree plus `E`-parity.
    pub fn parity(&self) -> Option<Parity> {
        self.0.e_parity.map(|e| e + Parity::of(self.0.degree))
    }

    /// The shuffle product: for `ω` of degree `n` and `η`
    /// of degree `m`,
    /// `(ωη)(X₁…X_{n+m}) = Σ_σ sgn σ · ω'(X_{σ(1)}…) · η(X_{σ(n+1)}…)`,
    /// where `ω'` is `ω` with its odd `E`-component negated when `m` is odd.
    pub fn product(&self, other: &NLForm) -> Result<NLForm> {
        if self.carrier() != other.carrier() {
            return Err(Error::ChartMismatch("product of forms on different carriers".into()));
        }
        let shape = self.shape().product(&other.shape())?;
        let e = match (self.e_parity(), other.e_parity()) {
            (Some(a), Some(b)) => Some(a + b),
            _ => None,
        };
        Ok(NLForm::build(
            self.degree() + other.degree(),
            shape,
            e,
            self.carrier(),
            Op::Product(self.clone(), other.clone()),
        ))
    }

    /// The differential: Koszul-type formula with the context's derivative.
    pub fn d(ctx: &DiffCtx, omega: &NLForm) -> Result<NLForm> {
        if ctx.carrier() != omega.carrier() {
            return Err(Error::ChartMismatch("differential context lives on another carrier".into()));
        }
        if let DiffCtx::Conn(c) = ctx {
            let b = c.bundle();
            let s = omega.shape();
            if s.kind != ValueKind::Scalar && (s.r0 != b.r0() || s.r1 != b.r1()) {
                return Err(Error::Shape("form values do not match the connection's bundle".into()));
            }
        }
        Ok(NLForm::build(
            omega.degree() + 1,
            omega.shape(),
            omega.e_parity(),
            omega.carrier(),
            Op::Differential(ctx.clone(), omega.clone()),
        ))
    }

    /// `d` with the anchor as derivative.
    pub fn d_carrier(&self) -> NLForm {
        NLForm::d(&DiffCtx::Carrier(self.carrier().clone()), self).expect("same carrier")
    }

    /// `d_∇`.
    pub fn d_conn(&self, conn: &Conn) -> Result<NLForm> {
        NLForm::d(&DiffCtx::Conn(conn.clone()), self)
    }

    /// Pointwise supertrace of an endomorphism-valued form.
    pub fn supertrace(&self) -> Result<NLForm> {
        if self.kind() != ValueKind::Endo {
            return Err(Error::ValueKind("supertrace needs an endomorphism-valued form".into()));
        }
        Ok(NLForm::build(
            self.degree(),
            Shape::scalar(),
            Some(Parity::Even),
            self.carrier(),
            Op::Supertrace(self.clone()),
        ))
    }

    /// A rational linear combination of forms of equal degree and shape.
    pub fn sum(terms: &[(Rational, NLForm)]) -> Result<NLForm> {
        let first = &terms
            .first()
            .ok_or_else(|| Error::Shape("empty sum of forms".into()))?
            .1;
        let mut e = first.e_parity();
        for (_, t) in terms {
            if t.degree() != first.degree() || t.shape() != first.shape() || t.carrier() != first.carrier() {
                return Err(Error::Shape("summands differ in degree, value shape or carrier".into()));
            }
            if t.e_parity() != e {
                e = None;
            }
        }
        Ok(NLForm::build(
            first.degree(),
            first.shape(),
            e,
            first.carrier(),
            Op::Sum(terms.to_vec()),
        ))
    }

    pub fn add(&self, other: &NLForm) -> Result<NLForm> {
        let one = Rational::from_integer(1.into());
        NLForm::sum(&[(one.clone(), self.clone()), (one, other.clone())])
    }

    pub fn sub(&self, other: &NLForm) -> Result<NLForm> {
        let one = Rational::from_integer(1.into());
        NLForm::sum(&[(one.clone(), self.clone()), (-one, other.clone())])
    }

    /// `[ω, η] = ωη − (−1)^{|ω||η|} ηω` with total parities.
    pub fn graded_commutator(&self, other: &NLForm) -> Result<NLForm> {
        let pa = self.parity().ok_or(Error::MixedParity)?;
        let pb = other.parity().ok_or(Error::MixedParity)?;
        let one = Rational::from_integer(1.into());
        let sign = if pa.is_odd() && pb.is_odd() { one.clone() } else { -one.clone() };
        NLForm::sum(&[(one, self.product(other)?), (sign, other.product(self)?)])
    }

    /// `ω^p` for `p ≥ 1`.
    pub fn power(&self, p: usize) -> Result<NLForm> {
        if p == 0 {
            return Err(Error::Shape("power needs p ≥ 1".into()));
        }
        let mut acc = self.clone();
        for _ in 1..p {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    /// Evaluates with a fresh session.
    pub fn eval(&self, args: &[CSection]) -> Result<Value> {
        self.eval_in(&mut Session::new(), args)
    }

    pub fn eval_in(&self, session: &mut Session, args: &[CSection]) -> Result<Value> {
        if args.len() != self.degree() {
            return Err(Error::Arity {
                expected: self.degree(),
                found: args.len(),
            });
        }
        for a in args {
            self.carrier().check_section(a)?;
        }
        Ok(self.value(session, args))
    }

    fn value(&self, session: &mut Session, args: &[CSection]) -> Value {
        if let Op::Rule(_, f) = &self.0.op {
            return f(args);
        }
        if args.len() < 2 {
            return self.compute(session, args);
        }
        let mut order: Vec<usize> = (0..args.len()).collect();
        order.sort_by(|&a, &b| args[a].cmp(&args[b]));
        let sorted: Vec<CSection> = order.iter().map(|&k| args[k].clone()).collect();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return self.0.shape.zero();
        }
        let negative = sort_with_sign(&order).map(|(_, n)| n).unwrap_or(false);
        let v = if session.memo {
            let key = (self.0.id, sorted);
            match session.cache.get(&key) {
                Some(v) => v.clone(),
                None => {
                    let v = self.compute(session, &key.1);
                    session.cache.insert(key, v.clone());
                    v
                }
            }
        } else {
            self.compute(session, &sorted)
        };
        if negative {
            v.neg()
        } else {
            v
        }
    }

    fn compute(&self, session: &mut Session, args: &[CSection]) -> Value {
        match &self.0.op {
            Op::Scalar(a) => Value::Scalar(a.eval(args)),
            Op::Endo(a) => Value::Endo(a.eval(args)),
            Op::Section(a) => Value::Section(a.eval(args)),
            Op::Rule(_, f) => f(args),
            Op::Curvature(c) => Value::Endo(c.curvature_at(&args[0], &args[1])),
            Op::Supertrace(w) => {
                let v = w.value(session, args);
                Value::Scalar(v.as_endo().expect("endomorphism value").supertrace())
            }
            Op::Sum(terms) => {
                let mut acc = self.0.shape.zero();
                for (c, t) in terms {
                    acc = acc.add(&t.value(session, args).scale_rational(c));
                }
                acc
            }
            Op::Product(w, e) => product_value(session, w, e, args),
            Op::Differential(ctx, w) => differential_value(session, ctx, w, args),
        }
    }

    /// Reads off a true form from frame values after probing function
    /// linearity in every slot.
    ///
    /// For each increasing frame tuple, each slot and each nonconstant
    /// monomial `f` of degree ≤ `probe_degree`, checks
    /// `ω(…, f eᵢ, …) = f ω(…, eᵢ, …)`.
    pub fn assemble<C: Coefficient>(&self, session: &mut Session, probe_degree: u32, zero: C) -> Result<TrueForm<C>> {
        if zero.shape() != self.shape() {
            return Err(Error::ValueKind(format!(
                "cannot assemble a {:?}-valued form into {:?} coefficients",
                self.shape(),
                zero.shape()
            )));
        }
        let carrier = self.carrier();
        let chart = carrier.chart();
        let monomials: Vec<Poly> = chart
            .monomials(probe_degree)
            .into_iter()
            .filter(|m| !m.is_constant())
            .collect();
        let mut terms = Vec::new();
        for tuple in increasing_tuples(carrier.rank(), self.degree()) {
            let frame: Vec<CSection> = tuple.iter().map(|&i| carrier.basis(i)).collect();
            let base = self.value(session, &frame);
            for slot in 0..frame.len() {
                for f in &monomials {
                    let mut probe = frame.clone();
                    probe[slot] = frame[slot].scale(f);
                    let lhs = self.value(session, &probe);
                    let residual = lhs.sub(&base.scale(f));
                    if !residual.is_zero() {
                        let e = frame[slot]
                            .coeffs()
                            .iter()
                            .position(|c| !c.is_zero())
                            .map_or(0, |k| k + 1);
                        return Err(Error::LinearityViolation {
                            slot: slot + 1,
                            probe: format!("{}*e{e} at frame tuple {:?}", chart.fmt_poly(f), one_based(&tuple)),
                            residual: residual.display(chart),
                        });
                    }
                }
            }
            let c = C::from_value(base).expect("shape checked");
            terms.push((tuple, c));
        }
        TrueForm::from_terms(carrier, self.degree(), zero, terms)
    }

    /// Scalar assembly with default probes.
    pub fn assemble_scalar(&self, session: &mut Session, probe_degree: u32) -> Result<TrueForm<Poly>> {
        self.assemble(session, probe_degree, Poly::zero())
    }
}

/// The shared parity of homogeneous values; `None` if any is mixed or two
/// differ. An empty list counts as even.
fn common_parity(parities: impl Iterator<Item = Option<Parity>>) -> Option<Parity> {
    let mut out = Parity::Even;
    for (k, p) in parities.enumerate() {
        let p = p?;
        if k > 0 && p != out {
            return None;
        }
        out = p;
    }
    Some(out)
}

fn one_based(t: &[usize]) -> Vec<usize> {
    t.iter().map(|i| i + 1).collect()
}

/// Calls `visit(positions of the first block, positions of the second block, negative)`
/// for every `(n, m)`-shuffle.
fn for_each_shuffle(n: usize, m: usize, mut visit: impl FnMut(&[usize], &[usize], bool)) {
    let total = n + m;
    type Visitor<'a> = dyn FnMut(&[usize], &[usize], bool) + 'a;
    let mut first: Vec<usize> = Vec::with_capacity(n);
    fn go(
        start: usize,
        total: usize,
        n: usize,
        first: &mut Vec<usize>,
        visit: &mut Visitor<'_>,
    ) {
        if first.len() == n {
            let second: Vec<usize> = (0..total).filter(|k| !first.contains(k)).collect();
            // sign of the shuffle: inversions between the two blocks
            let inversions: usize = first.iter().enumerate().map(|(k, &p)| p - k).sum();
            visit(first, &second, inversions % 2 == 1);
            return;
        }
        for p in start..total {
            if total - p < n - first.len() {
                break;
            }
            first.push(p);
            go(p + 1, total, n, first, visit);
            first.pop();
        }
    }
    go(0, total, n, &mut first, &mut visit);
}

fn product_value(session: &mut Session, w: &NLForm, e: &NLForm, args: &[CSection]) -> Value {
    let n = w.degree();
    let m = e.degree();
    let flip = m % 2 == 1;
    let shape = w.shape().product(&e.shape()).expect("checked at construction");
    let mut acc = shape.zero();
    let mut pairs = Vec::new();
    for_each_shuffle(n, m, |a, b, negative| pairs.push((a.to_vec(), b.to_vec(), negative)));
    for (a, b, negative) in pairs {
        let xa: Vec<CSection> = a.iter().map(|&k| args[k].clone()).collect();
        let xb: Vec<CSection> = b.iter().map(|&k| args[k].clone()).collect();
        let mut left = w.value(session, &xa);
        if left.is_zero() {
            continue;
        }
        if flip {
            left = left.flip_odd();
        }
        let right = e.value(session, &xb);
        if right.is_zero() {
            continue;
        }
        let term = left.mul(&right);
        acc = if negative { acc.sub(&term) } else { acc.add(&term) };
    }
    acc
}

/// `(Dω)(X₀…X_n) = Σ_{i<j} (−1)^{i+j} ω([Xᵢ, Xⱼ], …) + Σᵢ (−1)^i D_{Xᵢ}(ω(…X̂ᵢ…))`.
fn differential_value(session: &mut Session, ctx: &DiffCtx, w: &NLForm, args: &[CSection]) -> Value {
    let carrier = w.carrier();
    let len = args.len();
    let mut acc = w.shape().zero();
    for i in 0..len {
        for j in (i + 1)..len {
            let br = carrier.bracket_unchecked(&args[i], &args[j]);
            if br.is_zero() {
                continue;
            }
            let mut rest = Vec::with_capacity(len - 1);
            rest.push(br);
            rest.extend(args.iter().enumerate().filter(|&(k, _)| k != i && k != j).map(|(_, a)| a.clone()));
            let v = w.value(session, &rest);
            acc = if (i + j) % 2 == 0 { acc.add(&v) } else { acc.sub(&v) };
        }
    }
    for i in 0..len {
        let rest: Vec<CSection> = args.iter().enumerate().filter(|&(k, _)| k != i).map(|(_, a)| a.clone()).collect();
        let v = w.value(session, &rest);
        let dv = ctx.derive(&args[i], &v);
        acc = if i % 2 == 0 { acc.add(&dv) } else { acc.sub(&dv) };
    }
    acc
}

impl<C: Coefficient> TrueForm<C> {
    /// The true form viewed as a nonlinear form.
    pub fn to_nlform(&self) -> NLForm {
        let v = self.zero_coeff().to_value();
        match v {
            Value::Scalar(_) => NLForm::scalar(&self.clone().convert::<Poly>()),
            Value::Endo(_) => NLForm::endo(&self.clone().convert::<crate::superlin::EndMap>()),
            Value::Section(_) => NLForm::section(&self.clone().convert::<crate::superlin::Section>()),
        }
    }

    fn convert<D: Coefficient>(self) -> TrueForm<D> {
        let zero = D::from_value(self.zero_coeff().to_value()).expect("matching kind");
        let terms: Vec<(Vec<usize>, D)> = self
            .terms()
            .map(|(i, c)| (i.clone(), D::from_value(c.to_value()).expect("matching kind")))
            .collect();
        TrueForm::from_terms(self.carrier(), self.degree(), zero, terms).expect("same layout")
    }
}
