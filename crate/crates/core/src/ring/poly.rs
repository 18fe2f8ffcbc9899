use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt::{self, Write as _};
use core::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::Rational;

/// Exponent vector of a monomial. Trailing zeros are trimmed, so a monomial
/// has exactly one representation whatever the ambient number of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Exponent(Vec<u32>);

impl Exponent {
    pub fn new(mut powers: Vec<u32>) -> Self {
        while powers.last() == Some(&0) {
            powers.pop();
        }
        Exponent(powers)
    }

    pub fn one() -> Self {
        Exponent(Vec::new())
    }

    pub fn var(index: usize) -> Self {
        let mut powers = vec![0; index + 1];
        powers[index] = 1;
        Exponent(powers)
    }

    pub fn power(&self, index: usize) -> u32 {
        self.0.get(index).copied().unwrap_or(0)
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// One past the highest variable index that occurs.
    pub fn span(&self) -> usize {
        self.0.len()
    }

    fn mul(&self, other: &Exponent) -> Exponent {
        let (long, short) = if self.0.len() >= other.0.len() {
            (&self.0, &other.0)
        } else {
            (&other.0, &self.0)
        };
        let mut out = long.clone();
        for (slot, p) in out.iter_mut().zip(short) {
            *slot += p;
        }
        Exponent(out)
    }

    fn with_power(&self, index: usize, power: u32) -> Exponent {
        let mut powers = self.0.clone();
        if powers.len() <= index {
            powers.resize(index + 1, 0);
        }
        powers[index] = power;
        Exponent::new(powers)
    }
}

/// Sparse multivariate polynomial with exact rational coefficients.
///
/// Terms live in a `BTreeMap` keyed by trimmed exponent vectors and zero
/// coefficients are never stored, so structural equality is mathematical
/// equality.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Poly {
    terms: BTreeMap<Exponent, Rational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(Rational::one())
    }

    pub fn constant(c: Rational) -> Self {
        Poly::monomial(Exponent::one(), c)
    }

    pub fn from_int(c: i64) -> Self {
        Poly::constant(Rational::from_integer(BigInt::from(c)))
    }

    pub fn from_ratio(num: i64, den: i64) -> Self {
        Poly::constant(Rational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn var(index: usize) -> Self {
        Poly::monomial(Exponent::var(index), Rational::one())
    }

    pub fn monomial(exp: Exponent, coeff: Rational) -> Self {
        let mut terms = BTreeMap::new();
        if !coeff.is_zero() {
            terms.insert(exp, coeff);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1
            && self
                .terms
                .get(&Exponent::one())
                .is_some_and(|c| c.is_one())
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.span() == 0)
    }

    pub fn constant_term(&self) -> Rational {
        self.terms
            .get(&Exponent::one())
            .cloned()
            .unwrap_or_else(Rational::zero)
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &Rational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Total degree; the zero polynomial has degree 0.
    pub fn degree(&self) -> u32 {
        self.terms.keys().map(Exponent::degree).max().unwrap_or(0)
    }

    /// One past the highest variable index occurring in any term.
    pub fn span(&self) -> usize {
        self.terms.keys().map(Exponent::span).max().unwrap_or(0)
    }

    fn add_term(&mut self, exp: Exponent, coeff: Rational) {
        if coeff.is_zero() {
            return;
        }
        match self.terms.get_mut(&exp) {
            Some(c) => {
                *c += coeff;
                if c.is_zero() {
                    self.terms.remove(&exp);
                }
            }
            None => {
                self.terms.insert(exp, coeff);
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, k)| (e.clone(), k * c))
                .collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut out = Poly::one();
        for _ in 0..n {
            out = &out * self;
        }
        out
    }

    /// Exact partial derivative with respect to variable `index`.
    pub fn derive(&self, index: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let k = e.power(index);
            if k == 0 {
                continue;
            }
            out.add_term(e.with_power(index, k - 1), c * Rational::from_integer(BigInt::from(k)));
        }
        out
    }

    /// Substitutes a rational value for variable `index`.
    pub fn substitute(&self, index: usize, value: &Rational) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let k = e.power(index);
            let factor = pow_rational(value, k);
            out.add_term(e.with_power(index, 0), c * factor);
        }
        out
    }

    /// Exact integral over `[0, 1]` in variable `index`.
    pub fn integrate_unit(&self, index: usize) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in &self.terms {
            let k = e.power(index);
            out.add_term(
                e.with_power(index, 0),
                c / Rational::from_integer(BigInt::from(k + 1)),
            );
        }
        out
    }

    /// Renders the polynomial with the given variable names. Indices past
    /// the end of `names` print as `x<i+1>`.
    pub fn display<'a>(&'a self, names: &'a [String]) -> PolyDisplay<'a> {
        PolyDisplay { poly: self, names }
    }
}

fn pow_rational(value: &Rational, k: u32) -> Rational {
    let mut out = Rational::one();
    for _ in 0..k {
        out *= value;
    }
    out
}

impl From<Rational> for Poly {
    fn from(c: Rational) -> Self {
        Poly::constant(c)
    }
}

impl From<i64> for Poly {
    fn from(c: i64) -> Self {
        Poly::from_int(c)
    }
}

impl AddAssign<&Poly> for Poly {
    fn add_assign(&mut self, rhs: &Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), c.clone());
        }
    }
}

impl SubAssign<&Poly> for Poly {
    fn sub_assign(&mut self, rhs: &Poly) {
        for (e, c) in &rhs.terms {
            self.add_term(e.clone(), -c.clone());
        }
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl Add for Poly {
    type Output = Poly;
    fn add(mut self, rhs: Poly) -> Poly {
        self += &rhs;
        self
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl Sub for Poly {
    type Output = Poly;
    fn sub(mut self, rhs: Poly) -> Poly {
        self -= &rhs;
        self
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(e, c)| (e.clone(), -c.clone()))
                .collect(),
        }
    }
}

impl Neg for Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        -&self
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        let mut out = Poly::zero();
        if self.is_zero() || rhs.is_zero() {
            return out;
        }
        for (ea, ca) in &self.terms {
            for (eb, cb) in &rhs.terms {
                out.add_term(ea.mul(eb), ca * cb);
            }
        }
        out
    }
}

impl Mul for Poly {
    type Output = Poly;
    fn mul(self, rhs: Poly) -> Poly {
        &self * &rhs
    }
}

pub struct PolyDisplay<'a> {
    poly: &'a Poly,
    names: &'a [String],
}

impl PolyDisplay<'_> {
    fn write_monomial(&self, f: &mut fmt::Formatter<'_>, e: &Exponent) -> fmt::Result {
        let mut first = true;
        for (i, &k) in e.powers().iter().enumerate() {
            if k == 0 {
                continue;
            }
            if !first {
                f.write_char('*')?;
            }
            first = false;
            match self.names.get(i) {
                Some(name) => f.write_str(name)?,
                None => write!(f, "x{}", i + 1)?,
            }
            if k > 1 {
                write!(f, "^{k}")?;
            }
        }
        Ok(())
    }
}

impl fmt::Display for PolyDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.poly.is_zero() {
            return f.write_str("0");
        }
        // Highest total degree first, then reverse lexicographic on exponents.
        let mut terms: Vec<_> = self.poly.terms.iter().collect();
        terms.sort_by(|(a, _), (b, _)| b.degree().cmp(&a.degree()).then_with(|| b.cmp(a)));
        for (n, (e, c)) in terms.into_iter().enumerate() {
            let negative = c.is_negative();
            let abs = c.abs();
            if n == 0 {
                if negative {
                    f.write_char('-')?;
                }
            } else {
                f.write_str(if negative { " - " } else { " + " })?;
            }
            let is_unit = abs.is_one();
            if e.span() == 0 {
                write!(f, "{abs}")?;
            } else {
                if !is_unit {
                    write!(f, "{abs}*")?;
                }
                self.write_monomial(f, e)?;
            }
        }
        Ok(())
    }
}
