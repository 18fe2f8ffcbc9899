use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::Debug;

use crate::carrier::{CSection, Carrier};
use crate::error::{Error, Result};
use crate::forms::{Shape, Value};
use crate::ring::{Poly, Rational, VField};
use crate::superlin::{EndMap, Section};

/// Coefficients a true form may carry.
pub trait Coefficient: Clone + PartialEq + Debug + Send + Sync + 'static {
    fn is_zero(&self) -> bool;
    fn plus(&self, other: &Self) -> Self;
    fn negated(&self) -> Self;
    fn times(&self, f: &Poly) -> Self;
    fn derived(&self, v: &VField) -> Self;
    fn shape(&self) -> Shape;
    fn to_value(&self) -> Value;
    fn from_value(v: Value) -> Option<Self>;
}

impl Coefficient for Poly {
    fn is_zero(&self) -> bool {
        Poly::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn times(&self, f: &Poly) -> Self {
        self * f
    }
    fn derived(&self, v: &VField) -> Self {
        v.apply(self)
    }
    fn shape(&self) -> Shape {
        Shape::scalar()
    }
    fn to_value(&self) -> Value {
        Value::Scalar(self.clone())
    }
    fn from_value(v: Value) -> Option<Self> {
        v.into_scalar()
    }
}

impl Coefficient for EndMap {
    fn is_zero(&self) -> bool {
        EndMap::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn times(&self, f: &Poly) -> Self {
        self.scale(f)
    }
    fn derived(&self, v: &VField) -> Self {
        self.derive_along(v)
    }
    fn shape(&self) -> Shape {
        Shape::endo(self.r0(), self.r1())
    }
    fn to_value(&self) -> Value {
        Value::Endo(self.clone())
    }
    fn from_value(v: Value) -> Option<Self> {
        v.into_endo()
    }
}

impl Coefficient for Section {
    fn is_zero(&self) -> bool {
        Section::is_zero(self)
    }
    fn plus(&self, other: &Self) -> Self {
        self + other
    }
    fn negated(&self) -> Self {
        -self
    }
    fn times(&self, f: &Poly) -> Self {
        self.scale(f)
    }
    fn derived(&self, v: &VField) -> Self {
        self.derive_along(v)
    }
    fn shape(&self) -> Shape {
        Shape::section(self.r0(), self.r1())
    }
    fn to_value(&self) -> Value {
        Value::Section(self.clone())
    }
    fn from_value(v: Value) -> Option<Self> {
        match v {
            Value::Section(s) => Some(s),
            _ => None,
        }
    }
}

/// Sorts an index tuple, returning the permutation sign, or `None` when an
/// index repeats.
pub(crate) fn sort_with_sign(indices: &[usize]) -> Option<(Vec<usize>, bool)> {
    let mut v = indices.to_vec();
    let mut negative = false;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            negative = !negative;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, negative))
    }
}

/// A function-linear form `Σ c_I e^{i₁}∧…∧e^{iₙ}` on a carrier, stored by
/// strictly increasing index tuples over the dual frame.
#[derive(Clone, Debug, PartialEq)]
pub struct TrueForm<C: Coefficient = Poly> {
    carrier: Carrier,
    degree: usize,
    zero: C,
    terms: BTreeMap<Vec<usize>, C>,
}

impl<C: Coefficient> TrueForm<C> {
    /// The zero form; `zero` fixes the coefficient shape.
    pub fn zero(carrier: &Carrier, degree: usize, zero: C) -> Self {
        TrueForm {
            carrier: carrier.clone(),
            degree,
            zero,
            terms: BTreeMap::new(),
        }
    }

    /// Builds from `(indices, coeff)` pairs. Indices are 0-based; unsorted
    /// tuples are sorted with sign, tuples with repeats contribute nothing.
    pub fn from_terms<I>(carrier: &Carrier, degree: usize, zero: C, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vec<usize>, C)>,
    {
        let mut form = TrueForm::zero(carrier, degree, zero);
        for (idx, c) in terms {
            if idx.len() != degree {
                return Err(Error::Shape(format!(
                    "index tuple of length {} in a form of degree {degree}",
                    idx.len()
                )));
            }
            if let Some(&bad) = idx.iter().find(|&&i| i >= carrier.rank()) {
                return Err(Error::IndexOutOfRange {
                    index: bad,
                    dim: carrier.rank(),
                });
            }
            if c.shape() != form.zero.shape() {
                return Err(Error::Shape("coefficient shape differs from the form's".into()));
            }
            if let Some((sorted, negative)) = sort_with_sign(&idx) {
                let c = if negative { c.negated() } else { c };
                form.add_term(sorted, c);
            }
        }
        Ok(form)
    }

    fn add_term(&mut self, idx: Vec<usize>, c: C) {
        if c.is_zero() {
            return;
        }
        let next = match self.terms.get(&idx) {
            Some(old) => old.plus(&c),
            None => c,
        };
        if next.is_zero() {
            self.terms.remove(&idx);
        } else {
            self.terms.insert(idx, next);
        }
    }

    pub fn carrier(&self) -> &Carrier {
        &self.carrier
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn zero_coeff(&self) -> &C {
        &self.zero
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<usize>, &C)> {
        self.terms.iter()
    }

    /// Coefficient at an arbitrary index tuple (sorted with sign).
    pub fn coeff(&self, idx: &[usize]) -> C {
        match sort_with_sign(idx) {
            None => self.zero.clone(),
            Some((sorted, negative)) => match self.terms.get(&sorted) {
                None => self.zero.clone(),
                Some(c) if negative => c.negated(),
                Some(c) => c.clone(),
            },
        }
    }

    fn same_space(&self, other: &TrueForm<C>) -> Result<()> {
        if self.carrier != other.carrier || self.degree != other.degree || self.zero.shape() != other.zero.shape() {
            return Err(Error::Shape("forms live in different spaces".into()));
        }
        Ok(())
    }

    pub fn add(&self, other: &TrueForm<C>) -> Result<TrueForm<C>> {
        self.same_space(other)?;
        let mut out = self.clone();
        for (idx, c) in &other.terms {
            out.add_term(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &TrueForm<C>) -> Result<TrueForm<C>> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> TrueForm<C> {
        TrueForm {
            carrier: self.carrier.clone(),
            degree: self.degree,
            zero: self.zero.clone(),
            terms: self.terms.iter().map(|(i, c)| (i.clone(), c.negated())).collect(),
        }
    }

    pub fn scale(&self, f: &Poly) -> TrueForm<C> {
        let mut out = TrueForm::zero(&self.carrier, self.degree, self.zero.clone());
        for (i, c) in &self.terms {
            out.add_term(i.clone(), c.times(f));
        }
        out
    }

    /// `α(X₁, …, Xₙ) = Σ_I c_I det(X_k^{I_l})`.
    ///
    /// The determinants are the Plücker coordinates of `X₁∧…∧Xₙ`, built
    /// one argument at a time.
    pub fn eval(&self, args: &[CSection]) -> C {
        debug_assert_eq!(args.len(), self.degree);
        if self.terms.is_empty() {
            return self.zero.clone();
        }
        let mut wedge: BTreeMap<Vec<usize>, Poly> = BTreeMap::new();
        wedge.insert(Vec::new(), Poly::one());
        for x in args {
            let mut next: BTreeMap<Vec<usize>, Poly> = BTreeMap::new();
            for (idx, w) in &wedge {
                for (i, xi) in x.coeffs().iter().enumerate() {
                    if xi.is_zero() || idx.contains(&i) {
                        continue;
                    }
                    let pos = idx.partition_point(|&j| j < i);
                    // moving eᵢ past the indices greater than i
                    let negative = (idx.len() - pos) % 2 == 1;
                    let mut key = idx.clone();
                    key.insert(pos, i);
                    let mut term = w * xi;
                    if negative {
                        term = -term;
                    }
                    let slot = next.entry(key).or_default();
                    *slot += &term;
                }
            }
            next.retain(|_, p| !p.is_zero());
            wedge = next;
        }
        let mut acc = self.zero.clone();
        for (idx, c) in &self.terms {
            if let Some(w) = wedge.get(idx) {
                acc = acc.plus(&c.times(w));
            }
        }
        acc
    }

    /// The carrier differential, computed on the frame:
    /// `dα(e_J) = Σ (−1)^k ρ(e_{j_k})(α(e_{J∖j_k})) + Σ_{k<l} (−1)^{k+l} α([e_{j_k}, e_{j_l}], e_{J∖{j_k,j_l}})`.
    pub fn exterior_d(&self) -> TrueForm<C> {
        let carrier = &self.carrier;
        let r = carrier.rank();
        let n = self.degree + 1;
        let mut out = TrueForm::zero(carrier, n, self.zero.clone());
        if self.terms.is_empty() {
            return out;
        }
        for tuple in increasing_tuples(r, n) {
            let mut acc = self.zero.clone();
            for k in 0..n {
                let rest: Vec<usize> = tuple.iter().enumerate().filter(|&(m, _)| m != k).map(|(_, &j)| j).collect();
                let c = self.coeff(&rest);
                if !c.is_zero() {
                    let d = c.derived(carrier.anchor_of(tuple[k]));
                    acc = if k % 2 == 0 { acc.plus(&d) } else { acc.plus(&d.negated()) };
                }
            }
            for k in 0..n {
                for l in (k + 1)..n {
                    let bracket = carrier.structure(tuple[k], tuple[l]);
                    if bracket.is_zero() {
                        continue;
                    }
                    let rest: Vec<usize> = tuple
                        .iter()
                        .enumerate()
                        .filter(|&(m, _)| m != k && m != l)
                        .map(|(_, &j)| j)
                        .collect();
                    for (c_idx, c_fn) in bracket.coeffs().iter().enumerate() {
                        if c_fn.is_zero() {
                            continue;
                        }
                        let mut idx = vec![c_idx];
                        idx.extend_from_slice(&rest);
                        let v = self.coeff(&idx);
                        if v.is_zero() {
                            continue;
                        }
                        let term = v.times(c_fn);
                        acc = if (k + l) % 2 == 0 { acc.plus(&term) } else { acc.plus(&term.negated()) };
                    }
                }
            }
            out.add_term(tuple, acc);
        }
        out
    }

    /// The value at frame tuples, for display: `(1-based indices, coeff)`.
    pub fn entries_one_based(&self) -> Vec<(Vec<usize>, &C)> {
        self.terms
            .iter()
            .map(|(i, c)| (i.iter().map(|k| k + 1).collect(), c))
            .collect()
    }
}

impl TrueForm<Poly> {
    pub fn scalar_zero(carrier: &Carrier, degree: usize) -> Self {
        TrueForm::zero(carrier, degree, Poly::zero())
    }

    /// A 0-form.
    pub fn function(carrier: &Carrier, f: Poly) -> Self {
        let mut out = TrueForm::scalar_zero(carrier, 0);
        out.add_term(Vec::new(), f);
        out
    }

    /// The dual frame element `eⁱ`.
    pub fn coframe(carrier: &Carrier, i: usize) -> Self {
        let mut out = TrueForm::scalar_zero(carrier, 1);
        out.add_term(vec![i], Poly::one());
        out
    }

    pub fn wedge(&self, other: &TrueForm<Poly>) -> Result<TrueForm<Poly>> {
        if self.carrier != other.carrier {
            return Err(Error::Shape("wedge of forms on different carriers".into()));
        }
        let mut out = TrueForm::scalar_zero(&self.carrier, self.degree + other.degree);
        for (a, ca) in &self.terms {
            for (b, cb) in &other.terms {
                let mut idx = a.clone();
                idx.extend_from_slice(b);
                if let Some((sorted, negative)) = sort_with_sign(&idx) {
                    let c = ca * cb;
                    out.add_term(sorted, if negative { -c } else { c });
                }
            }
        }
        Ok(out)
    }

    pub fn scale_rational(&self, c: &Rational) -> TrueForm<Poly> {
        self.scale(&Poly::constant(c.clone()))
    }

    /// Integration over the interval fiber of a cylinder form.
    ///
    /// Writes `α = dt∧β + γ` with `dt` moved to the front and returns
    /// `∫₀¹ β dt` on the base carrier; `γ` is discarded. With this
    /// orientation `∫∘d + d∘∫ = (restriction at 1) − (restriction at 0)`.
    pub fn fiber_integrate(&self) -> Result<TrueForm<Poly>> {
        let base = self.carrier.cylinder_base().ok_or(Error::NotCylinder)?;
        let t_frame = base.rank();
        let t_var = self.carrier.chart().time_index().ok_or(Error::NotCylinder)?;
        if self.degree == 0 {
            return Ok(TrueForm::scalar_zero(base, 0));
        }
        let mut out = TrueForm::scalar_zero(base, self.degree - 1);
        for (idx, c) in &self.terms {
            if idx.last() != Some(&t_frame) {
                continue;
            }
            let rest = idx[..idx.len() - 1].to_vec();
            // e^{rest} ∧ dt = (−1)^{|rest|} dt ∧ e^{rest}
            let integral = c.integrate_unit(t_var);
            let signed = if rest.len() % 2 == 1 { -integral } else { integral };
            out.add_term(rest, signed);
        }
        Ok(out)
    }

    /// Pullback of a cylinder form to the slice `t = value`.
    pub fn restrict(&self, value: &Rational) -> Result<TrueForm<Poly>> {
        let base = self.carrier.cylinder_base().ok_or(Error::NotCylinder)?;
        let t_frame = base.rank();
        let t_var = self.carrier.chart().time_index().ok_or(Error::NotCylinder)?;
        let mut out = TrueForm::scalar_zero(base, self.degree);
        for (idx, c) in &self.terms {
            if idx.contains(&t_frame) {
                continue;
            }
            out.add_term(idx.clone(), c.substitute(t_var, value));
        }
        Ok(out)
    }

    /// Pullback of a base form to the cylinder (coefficients independent of `t`).
    pub fn to_cylinder(&self, cylinder: &Carrier) -> Result<TrueForm<Poly>> {
        if cylinder.cylinder_base() != Some(&self.carrier) {
            return Err(Error::NotCylinder);
        }
        let mut out = TrueForm::scalar_zero(cylinder, self.degree);
        for (idx, c) in &self.terms {
            out.add_term(idx.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn display(&self) -> String {
        let chart = self.carrier.chart();
        if self.terms.is_empty() {
            return "0".into();
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(idx, c)| {
                let basis: Vec<String> = idx.iter().map(|i| format!("e{}", i + 1)).collect();
                format!("({})*{}", chart.fmt_poly(c), if basis.is_empty() { "1".into() } else { basis.join("^") })
            })
            .collect();
        parts.join(" + ")
    }
}

/// Pullback along the anchor: `(ρ*α)(e_I) = α(ρe_{i₁}, …, ρe_{iₙ})`.
pub fn anchor_pullback(carrier: &Carrier, alpha: &TrueForm<Poly>) -> Result<TrueForm<Poly>> {
    let source = alpha.carrier();
    if !source.is_tangent() || source.chart() != carrier.chart() {
        return Err(Error::ChartMismatch(
            "anchor pullback needs a form on the tangent carrier of the same chart".into(),
        ));
    }
    let n = alpha.degree();
    let mut out = TrueForm::scalar_zero(carrier, n);
    for tuple in increasing_tuples(carrier.rank(), n) {
        let args: Vec<CSection> = tuple.iter().map(|&i| CSection::from(carrier.anchor_of(i).clone())).collect();
        out.add_term(tuple, alpha.eval(&args));
    }
    Ok(out)
}

/// All strictly increasing tuples of length `n` drawn from `0..r`.
pub fn increasing_tuples(r: usize, n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(n);
    fn go(start: usize, r: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..r {
            if r - i < n - cur.len() {
                break;
            }
            cur.push(i);
            go(i + 1, r, n, cur, out);
            cur.pop();
        }
    }
    go(0, r, n, &mut cur, &mut out);
    out
}
