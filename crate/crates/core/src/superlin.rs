//! ℤ₂-graded linear algebra over the polynomial ring: the super bundle
//! `(E, ∂)`, its sections, block endomorphisms, the supercommutator and
//! the supertrace.
//!
//! Indices `0..r0` span `E⁰` and `r0..r0+r1` span `E¹`. An endomorphism is
//! stored densely; its even and odd components are the diagonal and
//! off-diagonal blocks, and graded operations act on those components.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::ops::{Add, Mul, Neg, Sub};

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::ring::{Chart, Poly, Rational, VField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(n: usize) -> Parity {
        if n.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn is_odd(self) -> bool {
        self == Parity::Odd
    }

    pub fn bit(self) -> usize {
        match self {
            Parity::Even => 0,
            Parity::Odd => 1,
        }
    }
}

impl Add for Parity {
    type Output = Parity;
    fn add(self, rhs: Parity) -> Parity {
        Parity::of(self.bit() + rhs.bit())
    }
}

fn block_parity(r0: usize, i: usize, j: usize) -> Parity {
    if (i < r0) == (j < r0) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

/// A section of `E = E⁰ ⊕ E¹`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Section {
    r0: usize,
    comps: Vec<Poly>,
}

impl Section {
    pub fn new(even: Vec<Poly>, odd: Vec<Poly>) -> Self {
        let r0 = even.len();
        let mut comps = even;
        comps.extend(odd);
        Section { r0, comps }
    }

    pub fn zero(r0: usize, r1: usize) -> Self {
        Section {
            r0,
            comps: vec![Poly::zero(); r0 + r1],
        }
    }

    /// The `k`-th frame section (`k < r0` is even, otherwise odd).
    pub fn basis(r0: usize, r1: usize, k: usize) -> Self {
        let mut s = Section::zero(r0, r1);
        s.comps[k] = Poly::one();
        s
    }

    pub(crate) fn from_comps(r0: usize, comps: Vec<Poly>) -> Self {
        Section { r0, comps }
    }

    pub fn r0(&self) -> usize {
        self.r0
    }

    pub fn r1(&self) -> usize {
        self.comps.len() - self.r0
    }

    pub fn even(&self) -> &[Poly] {
        &self.comps[..self.r0]
    }

    pub fn odd(&self) -> &[Poly] {
        &self.comps[self.r0..]
    }

    pub fn comps(&self) -> &[Poly] {
        &self.comps
    }

    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(Poly::is_zero)
    }

    /// `None` for mixed sections; the zero section counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let even = self.even().iter().any(|p| !p.is_zero());
        let odd = self.odd().iter().any(|p| !p.is_zero());
        match (even, odd) {
            (true, true) => None,
            (false, true) => Some(Parity::Odd),
            _ => Some(Parity::Even),
        }
    }

    pub fn part(&self, parity: Parity) -> Section {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, p)| {
                if (k >= self.r0) == parity.is_odd() {
                    p.clone()
                } else {
                    Poly::zero()
                }
            })
            .collect();
        Section { r0: self.r0, comps }
    }

    /// Negates the odd components.
    pub fn flip_odd(&self) -> Section {
        let comps = self
            .comps
            .iter()
            .enumerate()
            .map(|(k, p)| if k >= self.r0 { -p } else { p.clone() })
            .collect();
        Section { r0: self.r0, comps }
    }

    pub fn scale(&self, f: &Poly) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().map(|c| c * f).collect(),
        }
    }

    pub fn scale_rational(&self, c: &Rational) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().map(|p| p.scale(c)).collect(),
        }
    }

    /// Componentwise derivative along a vector field.
    pub fn derive_along(&self, v: &VField) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().map(|c| v.apply(c)).collect(),
        }
    }

    pub fn display(&self, chart: &Chart) -> String {
        let fmt = |ps: &[Poly]| -> String {
            ps.iter().map(|p| chart.fmt_poly(p)).collect::<Vec<_>>().join(", ")
        };
        format!("[{} | {}]", fmt(self.even()), fmt(self.odd()))
    }
}

impl Add for &Section {
    type Output = Section;
    fn add(self, rhs: &Section) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &Section {
    type Output = Section;
    fn sub(self, rhs: &Section) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().zip(&rhs.comps).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &Section {
    type Output = Section;
    fn neg(self) -> Section {
        Section {
            r0: self.r0,
            comps: self.comps.iter().map(|a| -a).collect(),
        }
    }
}

/// A polynomial-entry endomorphism of `E⁰ ⊕ E¹`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EndMap {
    r0: usize,
    r1: usize,
    entries: Vec<Poly>,
}

impl EndMap {
    pub fn zeros(r0: usize, r1: usize) -> Self {
        let n = r0 + r1;
        EndMap {
            r0,
            r1,
            entries: vec![Poly::zero(); n * n],
        }
    }

    pub fn identity(r0: usize, r1: usize) -> Self {
        let mut m = EndMap::zeros(r0, r1);
        for i in 0..r0 + r1 {
            m.set(i, i, Poly::one());
        }
        m
    }

    /// Builds from full rows (`(r0+r1)` rows of `(r0+r1)` entries).
    pub fn from_rows(r0: usize, r1: usize, rows: Vec<Vec<Poly>>) -> Result<Self> {
        let n = r0 + r1;
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape(format!("expected a {n}×{n} matrix")));
        }
        Ok(EndMap {
            r0,
            r1,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds from the four blocks `A₀₀ (r0×r0)`, `A₀₁ (r0×r1)`,
    /// `A₁₀ (r1×r0)`, `A₁₁ (r1×r1)`, each given as rows.
    pub fn from_blocks(
        r0: usize,
        r1: usize,
        a00: &[Vec<Poly>],
        a01: &[Vec<Poly>],
        a10: &[Vec<Poly>],
        a11: &[Vec<Poly>],
    ) -> Result<Self> {
        let mut m = EndMap::zeros(r0, r1);
        let mut put = |block: &[Vec<Poly>], rows: usize, cols: usize, di: usize, dj: usize, name: &str| {
            // an empty block stands for zero
            if block.is_empty() {
                return Ok(());
            }
            if block.len() != rows || block.iter().any(|r| r.len() != cols) {
                return Err(Error::Shape(format!("block {name} must be {rows}×{cols}")));
            }
            for (i, row) in block.iter().enumerate() {
                for (j, p) in row.iter().enumerate() {
                    m.set(di + i, dj + j, p.clone());
                }
            }
            Ok(())
        };
        put(a00, r0, r0, 0, 0, "A00")?;
        put(a01, r0, r1, 0, r0, "A01")?;
        put(a10, r1, r0, r0, 0, "A10")?;
        put(a11, r1, r1, r0, r0, "A11")?;
        Ok(m)
    }

    /// Block-diagonal sum: `(E⁰ ⊕ F⁰) ⊕ (E¹ ⊕ F¹)`.
    pub fn direct_sum(a: &EndMap, b: &EndMap) -> EndMap {
        let (r0, r1) = (a.r0 + b.r0, a.r1 + b.r1);
        let mut m = EndMap::zeros(r0, r1);
        let place = |k: usize, first: bool| -> usize {
            if first {
                if k < a.r0 {
                    k
                } else {
                    r0 + (k - a.r0)
                }
            } else if k < b.r0 {
                a.r0 + k
            } else {
                r0 + a.r1 + (k - b.r0)
            }
        };
        for i in 0..a.size() {
            for j in 0..a.size() {
                m.set(place(i, true), place(j, true), a.get(i, j).clone());
            }
        }
        for i in 0..b.size() {
            for j in 0..b.size() {
                m.set(place(i, false), place(j, false), b.get(i, j).clone());
            }
        }
        m
    }

    pub fn r0(&self) -> usize {
        self.r0
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn size(&self) -> usize {
        self.r0 + self.r1
    }

    pub fn get(&self, i: usize, j: usize) -> &Poly {
        &self.entries[i * self.size() + j]
    }

    pub fn set(&mut self, i: usize, j: usize, p: Poly) {
        let n = self.size();
        self.entries[i * n + j] = p;
    }

    pub fn entries(&self) -> &[Poly] {
        &self.entries
    }

    pub fn rows(&self) -> Vec<Vec<Poly>> {
        self.entries.chunks(self.size().max(1)).map(<[Poly]>::to_vec).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(Poly::is_zero)
    }

    pub fn same_shape(&self, other: &EndMap) -> bool {
        self.r0 == other.r0 && self.r1 == other.r1
    }

    /// Homogeneous parity, `None` when both components are nonzero. The
    /// zero map counts as even.
    pub fn parity(&self) -> Option<Parity> {
        let n = self.size();
        let mut even = false;
        let mut odd = false;
        for i in 0..n {
            for j in 0..n {
                if !self.get(i, j).is_zero() {
                    match block_parity(self.r0, i, j) {
                        Parity::Even => even = true,
                        Parity::Odd => odd = true,
                    }
                }
            }
        }
        match (even, odd) {
            (true, true) => None,
            (false, true) => Some(Parity::Odd),
            _ => Some(Parity::Even),
        }
    }

    pub fn part(&self, parity: Parity) -> EndMap {
        let n = self.size();
        let mut m = self.clone();
        for i in 0..n {
            for j in 0..n {
                if block_parity(self.r0, i, j) != parity {
                    m.set(i, j, Poly::zero());
                }
            }
        }
        m
    }

    pub fn even_part(&self) -> EndMap {
        self.part(Parity::Even)
    }

    pub fn odd_part(&self) -> EndMap {
        self.part(Parity::Odd)
    }

    /// Negates the odd component (the grading automorphism applied to it).
    pub fn flip_odd(&self) -> EndMap {
        let n = self.size();
        let mut m = self.clone();
        for i in 0..n {
            for j in 0..n {
                if block_parity(self.r0, i, j) == Parity::Odd {
                    m.set(i, j, -self.get(i, j));
                }
            }
        }
        m
    }

    pub fn scale(&self, f: &Poly) -> EndMap {
        self.map(|p| p * f)
    }

    pub fn scale_rational(&self, c: &Rational) -> EndMap {
        self.map(|p| p.scale(c))
    }

    /// Entrywise derivative along a vector field.
    pub fn derive_along(&self, v: &VField) -> EndMap {
        self.map(|p| v.apply(p))
    }

    pub fn map(&self, f: impl Fn(&Poly) -> Poly) -> EndMap {
        EndMap {
            r0: self.r0,
            r1: self.r1,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn apply(&self, s: &Section) -> Section {
        let n = self.size();
        let comps = (0..n)
            .map(|i| {
                let mut acc = Poly::zero();
                for (j, sj) in s.comps().iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !sj.is_zero() {
                        acc += &(a * sj);
                    }
                }
                acc
            })
            .collect();
        Section::from_comps(self.r0, comps)
    }

    /// The section in column `k` (image of the `k`-th frame section).
    pub fn column(&self, k: usize) -> Section {
        Section::from_comps(self.r0, (0..self.size()).map(|i| self.get(i, k).clone()).collect())
    }

    /// Assembles a map from its column images.
    pub fn from_columns(r0: usize, r1: usize, cols: &[Section]) -> EndMap {
        let mut m = EndMap::zeros(r0, r1);
        for (k, c) in cols.iter().enumerate() {
            for (i, p) in c.comps().iter().enumerate() {
                m.set(i, k, p.clone());
            }
        }
        m
    }

    pub fn trace(&self) -> Poly {
        let mut acc = Poly::zero();
        for i in 0..self.size() {
            acc += self.get(i, i);
        }
        acc
    }

    /// `Tr(A₀₀) − Tr(A₁₁)`.
    pub fn supertrace(&self) -> Poly {
        let mut acc = Poly::zero();
        for i in 0..self.r0 {
            acc += self.get(i, i);
        }
        for i in self.r0..self.size() {
            acc -= self.get(i, i);
        }
        acc
    }

    /// Plain commutator `AB − BA`.
    pub fn commutator(&self, other: &EndMap) -> EndMap {
        &(self * other) - &(other * self)
    }

    /// Supercommutator `AB − (−1)^{|A||B|} BA` of homogeneous maps.
    pub fn scommutator(&self, other: &EndMap) -> Result<EndMap> {
        let pa = self.parity().ok_or(Error::MixedParity)?;
        let pb = other.parity().ok_or(Error::MixedParity)?;
        Ok(self.scommutator_with(pa, other, pb))
    }

    pub(crate) fn scommutator_with(&self, pa: Parity, other: &EndMap, pb: Parity) -> EndMap {
        if pa.is_odd() && pb.is_odd() {
            &(self * other) + &(other * self)
        } else {
            self.commutator(other)
        }
    }

    /// The `E⁰` block as an endomorphism of a purely even bundle.
    pub fn even_block(&self) -> EndMap {
        let mut m = EndMap::zeros(self.r0, 0);
        for i in 0..self.r0 {
            for j in 0..self.r0 {
                m.set(i, j, self.get(i, j).clone());
            }
        }
        m
    }

    /// The `E¹` block as an endomorphism of a purely even bundle.
    pub fn odd_block(&self) -> EndMap {
        let mut m = EndMap::zeros(self.r1, 0);
        for i in 0..self.r1 {
            for j in 0..self.r1 {
                m.set(i, j, self.get(self.r0 + i, self.r0 + j).clone());
            }
        }
        m
    }

    /// Nonzero entries labelled `name[i,j]` (1-based), for reports.
    pub fn labelled(&self, name: &str) -> Vec<(String, Poly)> {
        let n = self.size();
        let mut out = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let p = self.get(i, j);
                if !p.is_zero() {
                    out.push((format!("{name}[{},{}]", i + 1, j + 1), p.clone()));
                }
            }
        }
        out
    }
}

impl Add for &EndMap {
    type Output = EndMap;
    fn add(self, rhs: &EndMap) -> EndMap {
        EndMap {
            r0: self.r0,
            r1: self.r1,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a + b).collect(),
        }
    }
}

impl Sub for &EndMap {
    type Output = EndMap;
    fn sub(self, rhs: &EndMap) -> EndMap {
        EndMap {
            r0: self.r0,
            r1: self.r1,
            entries: self.entries.iter().zip(&rhs.entries).map(|(a, b)| a - b).collect(),
        }
    }
}

impl Neg for &EndMap {
    type Output = EndMap;
    fn neg(self) -> EndMap {
        self.map(|p| -p)
    }
}

impl Mul for &EndMap {
    type Output = EndMap;
    fn mul(self, rhs: &EndMap) -> EndMap {
        let n = self.size();
        let mut out = EndMap::zeros(self.r0, self.r1);
        for i in 0..n {
            for k in 0..n {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..n {
                    let b = rhs.get(k, j);
                    if !b.is_zero() {
                        let idx = i * n + j;
                        out.entries[idx] += &(a * b);
                    }
                }
            }
        }
        out
    }
}

/// A trivialized super vector bundle `E⁰ ⊕ E¹` with an odd differential.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuperBundle {
    r0: usize,
    r1: usize,
    partial: EndMap,
}

impl SuperBundle {
    /// `forward` is the `E⁰ → E¹` block (`r1` rows of `r0` entries) and
    /// `backward` the `E¹ → E⁰` block (`r0` rows of `r1` entries). Empty
    /// blocks stand for zero.
    pub fn new(r0: usize, r1: usize, forward: &[Vec<Poly>], backward: &[Vec<Poly>]) -> Result<Self> {
        let partial = EndMap::from_blocks(r0, r1, &[], backward, forward, &[])?;
        Ok(SuperBundle { r0, r1, partial })
    }

    /// A bundle with `∂ = 0`.
    pub fn split(r0: usize, r1: usize) -> Self {
        SuperBundle {
            r0,
            r1,
            partial: EndMap::zeros(r0, r1),
        }
    }

    /// Wraps an arbitrary map as `∂`; use [`SuperBundle::check_partial`]
    /// to test that it is an odd square-zero differential.
    pub fn with_partial(partial: EndMap) -> Self {
        SuperBundle {
            r0: partial.r0,
            r1: partial.r1,
            partial,
        }
    }

    pub fn r0(&self) -> usize {
        self.r0
    }

    pub fn r1(&self) -> usize {
        self.r1
    }

    pub fn size(&self) -> usize {
        self.r0 + self.r1
    }

    pub fn partial(&self) -> &EndMap {
        &self.partial
    }

    pub fn frame(&self) -> Vec<Section> {
        (0..self.size()).map(|k| Section::basis(self.r0, self.r1, k)).collect()
    }

    pub fn direct_sum(&self, other: &SuperBundle) -> SuperBundle {
        SuperBundle::with_partial(EndMap::direct_sum(&self.partial, &other.partial))
    }

    /// Confirms `∂` is odd and `∂∘∂ = 0`.
    pub fn check_partial(&self) -> CheckReport {
        let mut report = CheckReport::new("differential", 0);
        report.record("partial is odd", "blocks A00, A11", self.partial.even_part().labelled("even part"));
        let square = &self.partial * &self.partial;
        report.record("partial^2 = 0", "frame", square.labelled("partial^2"));
        report
    }

    pub fn check_endmap(&self, m: &EndMap) -> Result<()> {
        if m.r0 != self.r0 || m.r1 != self.r1 {
            return Err(Error::Shape(format!(
                "endomorphism of ranks ({}, {}) on a bundle of ranks ({}, {})",
                m.r0, m.r1, self.r0, self.r1
            )));
        }
        Ok(())
    }

    pub fn check_section(&self, s: &Section) -> Result<()> {
        if s.r0() != self.r0 || s.r1() != self.r1 {
            return Err(Error::Shape(format!(
                "section of ranks ({}, {}) on a bundle of ranks ({}, {})",
                s.r0(),
                s.r1(),
                self.r0,
                self.r1
            )));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(chart: &Chart, s: &str) -> Poly {
        chart.parse(s).unwrap()
    }

    fn offdiag(a: Poly, b: Poly) -> EndMap {
        EndMap::from_blocks(1, 1, &[], &[vec![a]], &[vec![b]], &[]).unwrap()
    }

    #[test]
    fn supertrace_examples() {
        assert!(EndMap::identity(2, 1).supertrace().is_one());
        let ch = Chart::euclidean(2);
        let a = EndMap::from_blocks(
            2,
            1,
            &[vec![c(&ch, "x"), Poly::zero()], vec![Poly::zero(), c(&ch, "y")]],
            &[],
            &[],
            &[vec![c(&ch, "x*y")]],
        )
        .unwrap();
        assert_eq!(a.supertrace(), c(&ch, "x + y - x*y"));
    }

    #[test]
    fn odd_anticommutator_by_hand() {
        // offdiag(a; b) with a in the E1→E0 slot and b in the E0→E1 slot
        let ch = Chart::new(["a", "b", "c", "d"]).unwrap();
        let (pa, pb, pc, pd) = (c(&ch, "a"), c(&ch, "b"), c(&ch, "c"), c(&ch, "d"));
        let a = offdiag(pa, pb);
        let b = offdiag(pc, pd);
        let comm = a.scommutator(&b).unwrap();
        let expected = EndMap::from_blocks(
            1,
            1,
            &[vec![c(&ch, "a*d + c*b")]],
            &[],
            &[],
            &[vec![c(&ch, "b*c + d*a")]],
        )
        .unwrap();
        assert_eq!(comm, expected);
        assert!(comm.supertrace().is_zero());
        assert_eq!(comm.parity(), Some(Parity::Even));
    }

    #[test]
    fn identity_is_central() {
        let ch = Chart::euclidean(1);
        let id = EndMap::identity(1, 1);
        let odd = offdiag(c(&ch, "x"), c(&ch, "x^2 + 1"));
        assert!(odd.scommutator(&id).unwrap().is_zero());
        let even = EndMap::from_blocks(1, 1, &[vec![c(&ch, "x")]], &[], &[], &[vec![c(&ch, "3")]]).unwrap();
        assert!(even.scommutator(&id).unwrap().is_zero());
        let even2 = EndMap::from_blocks(1, 1, &[vec![c(&ch, "2")]], &[], &[], &[vec![c(&ch, "x")]]).unwrap();
        assert!(even.scommutator(&even2).unwrap().is_zero());
    }

    #[test]
    fn mixed_parity_rejected() {
        let mut m = EndMap::identity(1, 1);
        m.set(0, 1, Poly::one());
        assert_eq!(m.parity(), None);
        assert_eq!(m.scommutator(&EndMap::identity(1, 1)), Err(Error::MixedParity));
        assert_eq!(&m.even_part() + &m.odd_part(), m);
    }

    #[test]
    fn check_partial_examples() {
        assert!(SuperBundle::split(2, 1).check_partial().passed());
        let ch = Chart::euclidean(1);
        let adjoint_like =
            SuperBundle::new(2, 1, &[vec![Poly::one(), c(&ch, "x")]], &[]).unwrap();
        assert!(adjoint_like.check_partial().passed());
        let both = SuperBundle::new(1, 1, &[vec![Poly::one()]], &[vec![Poly::one()]]).unwrap();
        let report = both.check_partial();
        assert!(!report.passed());
        assert_eq!(report.violations[0].identity, "partial^2 = 0");
        assert_eq!(report.violations[0].residual.len(), 2);
        let even = SuperBundle::with_partial(EndMap::identity(1, 1));
        assert!(even.check_partial().violations.iter().any(|v| v.identity == "partial is odd"));
    }

    #[test]
    fn direct_sum_places_blocks() {
        let ch = Chart::euclidean(1);
        let a = EndMap::from_blocks(1, 1, &[vec![c(&ch, "x")]], &[], &[], &[vec![c(&ch, "2")]]).unwrap();
        let b = EndMap::from_blocks(1, 0, &[vec![c(&ch, "5")]], &[], &[], &[]).unwrap();
        let s = EndMap::direct_sum(&a, &b);
        assert_eq!((s.r0(), s.r1()), (2, 1));
        assert_eq!(s.get(0, 0), &c(&ch, "x"));
        assert_eq!(s.get(1, 1), &c(&ch, "5"));
        assert_eq!(s.get(2, 2), &c(&ch, "2"));
        assert_eq!(s.supertrace(), &a.supertrace() + &b.supertrace());
    }

    #[test]
    fn section_parity_and_apply() {
        let ch = Chart::euclidean(1);
        let s = Section::new(vec![c(&ch, "x")], vec![Poly::zero()]);
        assert_eq!(s.parity(), Some(Parity::Even));
        let odd = offdiag(Poly::zero(), Poly::one());
        let image = odd.apply(&s);
        assert_eq!(image.parity(), Some(Parity::Odd));
        assert_eq!(image.odd(), &[c(&ch, "x")]);
    }
}
