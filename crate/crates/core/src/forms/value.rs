use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::ring::{Chart, Poly, Rational, VField};
use crate::superlin::{EndMap, Parity, Section};

/// What a form takes values in.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ValueKind {
    Scalar,
    Section,
    Endo,
}

/// Value kind together with the bundle ranks needed to build a zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Shape {
    pub kind: ValueKind,
    pub r0: usize,
    pub r1: usize,
}

impl Shape {
    pub fn scalar() -> Shape {
        Shape {
            kind: ValueKind::Scalar,
            r0: 0,
            r1: 0,
        }
    }

    pub fn section(r0: usize, r1: usize) -> Shape {
        Shape {
            kind: ValueKind::Section,
            r0,
            r1,
        }
    }

    pub fn endo(r0: usize, r1: usize) -> Shape {
        Shape {
            kind: ValueKind::Endo,
            r0,
            r1,
        }
    }

    pub fn zero(&self) -> Value {
        match self.kind {
            ValueKind::Scalar => Value::Scalar(Poly::zero()),
            ValueKind::Section => Value::Section(Section::zero(self.r0, self.r1)),
            ValueKind::Endo => Value::Endo(EndMap::zeros(self.r0, self.r1)),
        }
    }

    /// Shape of the product of a `self`-valued form with an `rhs`-valued one.
    pub fn product(&self, rhs: &Shape) -> Result<Shape> {
        use ValueKind::*;
        let bundle_ok = |a: &Shape, b: &Shape| a.r0 == b.r0 && a.r1 == b.r1;
        match (self.kind, rhs.kind) {
            (Scalar, _) => Ok(*rhs),
            (Endo, Scalar) | (Section, Scalar) => Ok(*self),
            (Endo, Endo) | (Endo, Section) if bundle_ok(self, rhs) => Ok(*rhs),
            (Endo, Endo) | (Endo, Section) => Err(Error::Shape(format!(
                "bundle ranks ({}, {}) and ({}, {}) differ",
                self.r0, self.r1, rhs.r0, rhs.r1
            ))),
            (a, b) => Err(Error::ValueKind(format!("cannot multiply {a:?}-valued by {b:?}-valued forms"))),
        }
    }
}

/// The value of a form on a tuple of arguments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Scalar(Poly),
    Section(Section),
    Endo(EndMap),
}

impl Value {
    pub fn kind(&self) -> ValueKind {
        match self {
            Value::Scalar(_) => ValueKind::Scalar,
            Value::Section(_) => ValueKind::Section,
            Value::Endo(_) => ValueKind::Endo,
        }
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Value::Scalar(p) => p.is_zero(),
            Value::Section(s) => s.is_zero(),
            Value::Endo(m) => m.is_zero(),
        }
    }

    pub fn as_scalar(&self) -> Option<&Poly> {
        match self {
            Value::Scalar(p) => Some(p),
            _ => None,
        }
    }

    pub fn as_section(&self) -> Option<&Section> {
        match self {
            Value::Section(s) => Some(s),
            _ => None,
        }
    }

    pub fn as_endo(&self) -> Option<&EndMap> {
        match self {
            Value::Endo(m) => Some(m),
            _ => None,
        }
    }

    pub fn into_scalar(self) -> Option<Poly> {
        match self {
            Value::Scalar(p) => Some(p),
            _ => None,
        }
    }

    pub fn into_endo(self) -> Option<EndMap> {
        match self {
            Value::Endo(m) => Some(m),
            _ => None,
        }
    }

    /// E-parity of the value; scalars are even, mixed values give `None`.
    pub fn parity(&self) -> Option<Parity> {
        match self {
            Value::Scalar(_) => Some(Parity::Even),
            Value::Section(s) => s.parity(),
            Value::Endo(m) => m.parity(),
        }
    }

    pub fn add(&self, other: &Value) -> Value {
        match (self, other) {
            (Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(a + b),
            (Value::Section(a), Value::Section(b)) => Value::Section(a + b),
            (Value::Endo(a), Value::Endo(b)) => Value::Endo(a + b),
            _ => panic!("adding values of different kinds"),
        }
    }

    pub fn sub(&self, other: &Value) -> Value {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(-a),
            Value::Section(a) => Value::Section(-a),
            Value::Endo(a) => Value::Endo(-a),
        }
    }

    pub fn scale_rational(&self, c: &Rational) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(a.scale(c)),
            Value::Section(a) => Value::Section(a.scale_rational(c)),
            Value::Endo(a) => Value::Endo(a.scale_rational(c)),
        }
    }

    pub fn scale(&self, f: &Poly) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(a * f),
            Value::Section(a) => Value::Section(a.scale(f)),
            Value::Endo(a) => Value::Endo(a.scale(f)),
        }
    }

    pub fn derive_along(&self, v: &VField) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(v.apply(a)),
            Value::Section(a) => Value::Section(a.derive_along(v)),
            Value::Endo(a) => Value::Endo(a.derive_along(v)),
        }
    }

    /// Negates the odd E-component.
    pub fn flip_odd(&self) -> Value {
        match self {
            Value::Scalar(a) => Value::Scalar(a.clone()),
            Value::Section(a) => Value::Section(a.flip_odd()),
            Value::Endo(a) => Value::Endo(a.flip_odd()),
        }
    }

    /// Pointwise product of already-signed values (composition for
    /// endomorphisms, action on sections, scaling by scalars).
    pub fn mul(&self, rhs: &Value) -> Value {
        match (self, rhs) {
            (Value::Scalar(a), v) => v.scale(a),
            (Value::Endo(a), Value::Scalar(b)) => Value::Endo(a.scale(b)),
            (Value::Section(a), Value::Scalar(b)) => Value::Section(a.scale(b)),
            (Value::Endo(a), Value::Endo(b)) => Value::Endo(a * b),
            (Value::Endo(a), Value::Section(s)) => Value::Section(a.apply(s)),
            _ => panic!("product of incompatible value kinds"),
        }
    }

    /// Nonzero components labelled for reports.
    pub fn labelled(&self, name: &str) -> Vec<(String, Poly)> {
        match self {
            Value::Scalar(p) => alloc::vec![(String::from(name), p.clone())],
            Value::Section(s) => s
                .comps()
                .iter()
                .enumerate()
                .filter(|(_, p)| !p.is_zero())
                .map(|(k, p)| (format!("{name}[{}]", k + 1), p.clone()))
                .collect(),
            Value::Endo(m) => m.labelled(name),
        }
    }

    pub fn display(&self, chart: &Chart) -> String {
        let parts: Vec<String> = self
            .labelled("v")
            .into_iter()
            .filter(|(_, p)| !p.is_zero())
            .map(|(l, p)| format!("{l} = {}", chart.fmt_poly(&p)))
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(", ")
        }
    }
}
