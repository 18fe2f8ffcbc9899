//! Exact polynomial arithmetic over a coordinate chart and polynomial
//! vector fields acting on it as derivations.

mod parse;
mod poly;

use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec;
use alloc::vec::Vec;

pub use poly::{Exponent, Poly, PolyDisplay};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// Reserved name of the interval coordinate on a cylinder chart.
pub const CYLINDER_VAR: &str = "t";

/// A coordinate chart: an ordered list of coordinate names.
///
/// Cylinder charts carry the reserved coordinate `t` as their last
/// variable; base charts may never use that name.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Chart {
    vars: Vec<String>,
    cylinder: bool,
}

impl Chart {
    pub fn new<I, S>(vars: I) -> Result<Self>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let vars: Vec<String> = vars.into_iter().map(Into::into).collect();
        for (i, v) in vars.iter().enumerate() {
            if v == CYLINDER_VAR {
                return Err(Error::InvalidChart(format!(
                    "coordinate name '{CYLINDER_VAR}' is reserved for the cylinder"
                )));
            }
            let mut chars = v.chars();
            let valid_start = chars
                .next()
                .is_some_and(|c| c.is_ascii_alphabetic() || c == '_');
            if !valid_start || !chars.all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(Error::InvalidChart(format!("'{v}' is not an identifier")));
            }
            if vars[..i].contains(v) {
                return Err(Error::InvalidChart(format!("duplicate coordinate '{v}'")));
            }
        }
        Ok(Chart {
            vars,
            cylinder: false,
        })
    }

    /// `ℝⁿ` with coordinates `x, y, z` for `n ≤ 3`, else `x1 … xn`.
    pub fn euclidean(n: usize) -> Self {
        let vars = match n {
            0..=3 => ["x", "y", "z"][..n].iter().map(|s| s.to_string()).collect(),
            _ => (1..=n).map(|i| format!("x{i}")).collect(),
        };
        Chart {
            vars,
            cylinder: false,
        }
    }

    /// The zero-dimensional chart (a point).
    pub fn point() -> Self {
        Chart {
            vars: Vec::new(),
            cylinder: false,
        }
    }

    pub fn dim(&self) -> usize {
        self.vars.len()
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn is_cylinder(&self) -> bool {
        self.cylinder
    }

    /// Index of `t` on a cylinder chart.
    pub fn time_index(&self) -> Option<usize> {
        self.cylinder.then(|| self.vars.len() - 1)
    }

    /// `M × I`: appends the reserved coordinate `t`.
    pub fn cylinder(&self) -> Result<Chart> {
        if self.cylinder {
            return Err(Error::InvalidChart("chart is already a cylinder".into()));
        }
        let mut vars = self.vars.clone();
        vars.push(CYLINDER_VAR.to_string());
        Ok(Chart {
            vars,
            cylinder: true,
        })
    }

    /// Drops `t` from a cylinder chart.
    pub fn base(&self) -> Chart {
        if !self.cylinder {
            return self.clone();
        }
        Chart {
            vars: self.vars[..self.vars.len() - 1].to_vec(),
            cylinder: false,
        }
    }

    pub fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v == name)
    }

    pub fn parse(&self, text: &str) -> Result<Poly> {
        parse::parse(self, text)
    }

    pub fn fmt_poly(&self, p: &Poly) -> String {
        p.display(&self.vars).to_string()
    }

    /// Checks that `p` only involves this chart's coordinates.
    pub fn contains(&self, p: &Poly) -> Result<()> {
        if p.span() > self.dim() {
            return Err(Error::ChartMismatch(format!(
                "polynomial uses coordinate {} on a chart of dimension {}",
                p.span(),
                self.dim()
            )));
        }
        Ok(())
    }

    /// Exact partial derivative `∂p/∂xᵢ`.
    pub fn derive(&self, p: &Poly, i: usize) -> Result<Poly> {
        if i >= self.dim() {
            return Err(Error::IndexOutOfRange {
                index: i,
                dim: self.dim(),
            });
        }
        Ok(p.derive(i))
    }

    /// `X(f) = Σ aᵢ ∂f/∂xᵢ`, with chart checks on both arguments.
    pub fn apply(&self, x: &VField, f: &Poly) -> Result<Poly> {
        self.check_field(x)?;
        self.contains(f)?;
        Ok(x.apply(f))
    }

    pub fn bracket(&self, x: &VField, y: &VField) -> Result<VField> {
        self.check_field(x)?;
        self.check_field(y)?;
        x.bracket(y)
    }

    fn check_field(&self, x: &VField) -> Result<()> {
        if x.dim() != self.dim() {
            return Err(Error::ChartMismatch(format!(
                "vector field of dimension {} on a chart of dimension {}",
                x.dim(),
                self.dim()
            )));
        }
        x.coeffs().iter().try_for_each(|c| self.contains(c))
    }

    /// All monomials of total degree ≤ `max_degree`, constant first.
    pub fn monomials(&self, max_degree: u32) -> Vec<Poly> {
        let mut out = Vec::new();
        let mut powers = vec![0u32; self.dim()];
        collect_monomials(&mut powers, 0, max_degree, &mut out);
        out.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| b.cmp(a)));
        out
    }
}

fn collect_monomials(powers: &mut Vec<u32>, at: usize, budget: u32, out: &mut Vec<Poly>) {
    if at == powers.len() {
        out.push(Poly::monomial(
            Exponent::new(powers.clone()),
            Rational::from_integer(1.into()),
        ));
        return;
    }
    for k in 0..=budget {
        powers[at] = k;
        collect_monomials(powers, at + 1, budget - k, out);
    }
    powers[at] = 0;
}

/// A polynomial vector field `Σ aᵢ ∂/∂xᵢ`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VField {
    coeffs: Vec<Poly>,
}

impl VField {
    pub fn new(coeffs: Vec<Poly>) -> Self {
        VField { coeffs }
    }

    pub fn zero(dim: usize) -> Self {
        VField {
            coeffs: vec![Poly::zero(); dim],
        }
    }

    /// The coordinate field `∂/∂xᵢ`.
    pub fn coordinate(dim: usize, i: usize) -> Self {
        let mut v = VField::zero(dim);
        v.coeffs[i] = Poly::one();
        v
    }

    pub fn dim(&self) -> usize {
        self.coeffs.len()
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Poly> {
        self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Poly::is_zero)
    }

    /// Derivation action on a polynomial. Variables beyond the field's
    /// dimension are treated as parameters.
    pub fn apply(&self, f: &Poly) -> Poly {
        let mut out = Poly::zero();
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let d = f.derive(i);
            if !d.is_zero() {
                out += &(a * &d);
            }
        }
        out
    }

    /// Commutator of derivations: coefficient `k` is `X(Y_k) − Y(X_k)`.
    pub fn bracket(&self, other: &VField) -> Result<VField> {
        if self.dim() != other.dim() {
            return Err(Error::ChartMismatch(format!(
                "bracket of fields of dimension {} and {}",
                self.dim(),
                other.dim()
            )));
        }
        Ok(VField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(xk, yk)| &self.apply(yk) - &other.apply(xk))
                .collect(),
        })
    }

    pub fn scale(&self, f: &Poly) -> VField {
        VField {
            coeffs: self.coeffs.iter().map(|c| c * f).collect(),
        }
    }

    pub fn add(&self, other: &VField) -> VField {
        VField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &VField) -> VField {
        VField {
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    /// Pads with zero coefficients up to `dim`.
    pub fn extend(&self, dim: usize) -> VField {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(dim, Poly::zero());
        VField { coeffs }
    }

    pub fn display(&self, chart: &Chart) -> String {
        let parts: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let name = chart
                    .vars()
                    .get(i)
                    .cloned()
                    .unwrap_or_else(|| format!("x{}", i + 1));
                format!("({})*d/d{}", chart.fmt_poly(c), name)
            })
            .collect();
        if parts.is_empty() {
            "0".into()
        } else {
            parts.join(" + ")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r2() -> Chart {
        Chart::euclidean(2)
    }

    fn p(chart: &Chart, s: &str) -> Poly {
        chart.parse(s).unwrap()
    }

    #[test]
    fn derive_power_rule() {
        let c = Chart::new(["x1", "x2"]).unwrap();
        assert_eq!(c.derive(&p(&c, "x1^2*x2"), 0).unwrap(), p(&c, "2*x1*x2"));
        assert_eq!(c.derive(&p(&c, "x1 + 3/2*x2^3"), 1).unwrap(), p(&c, "9/2*x2^2"));
        for i in 0..2 {
            assert!(c.derive(&p(&c, "7/3"), i).unwrap().is_zero());
        }
    }

    #[test]
    fn derive_out_of_range() {
        let c = r2();
        assert_eq!(
            c.derive(&Poly::one(), 2),
            Err(Error::IndexOutOfRange { index: 2, dim: 2 })
        );
    }

    #[test]
    fn vector_field_action() {
        let c = r2();
        let x = p(&c, "x");
        let y = p(&c, "y");
        let x_dx = VField::new(vec![x.clone(), Poly::zero()]);
        assert_eq!(c.apply(&x_dx, &p(&c, "x^2")).unwrap(), p(&c, "2*x^2"));
        assert!(c.apply(&VField::coordinate(2, 0), &y).unwrap().is_zero());
        let sym = VField::new(vec![y, x]);
        assert_eq!(c.apply(&sym, &p(&c, "x*y")).unwrap(), p(&c, "x^2 + y^2"));
    }

    #[test]
    fn apply_rejects_foreign_polynomial() {
        let c = Chart::euclidean(1);
        let y = Poly::var(1);
        assert!(matches!(
            c.apply(&VField::coordinate(1, 0), &y),
            Err(Error::ChartMismatch(_))
        ));
        assert!(c.apply(&VField::coordinate(2, 0), &Poly::one()).is_err());
    }

    #[test]
    fn bracket_examples() {
        let c = Chart::euclidean(1);
        let dx = VField::coordinate(1, 0);
        let x_dx = VField::new(vec![p(&c, "x")]);
        let x2_dx = VField::new(vec![p(&c, "x^2")]);
        assert_eq!(c.bracket(&dx, &x_dx).unwrap(), dx);
        assert_eq!(c.bracket(&x_dx, &x2_dx).unwrap(), x2_dx);
        let c2 = r2();
        assert!(c2
            .bracket(&VField::coordinate(2, 0), &VField::coordinate(2, 1))
            .unwrap()
            .is_zero());
    }

    #[test]
    fn parser_round_trip_and_errors() {
        let c = Chart::new(["x1", "x2", "x3"]).unwrap();
        let q = p(&c, "3/2*x1^2*x2 - x3 + 1");
        assert_eq!(c.fmt_poly(&q), "3/2*x1^2*x2 - x3 + 1");
        assert_eq!(p(&c, &c.fmt_poly(&q)), q);
        assert_eq!(p(&c, "(x1 + 1)^2"), p(&c, "x1^2 + 2*x1 + 1"));
        assert_eq!(p(&c, "-x1 + 1"), p(&c, "1 - x1"));
        match c.parse("x1 + w") {
            Err(Error::Parse { position, message }) => {
                assert_eq!(position, 5);
                assert!(message.contains("'w'"));
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(c.parse("").is_err());
        assert!(c.parse("1/0").is_err());
        assert!(c.parse("x1 +").is_err());
        assert!(c.parse("x1 x2").is_err());
    }

    #[test]
    fn chart_validation() {
        assert!(Chart::new(["x", "t"]).is_err());
        assert!(Chart::new(["x", "x"]).is_err());
        assert!(Chart::new(["1x"]).is_err());
        let cyl = r2().cylinder().unwrap();
        assert_eq!(cyl.vars(), ["x", "y", "t"]);
        assert_eq!(cyl.time_index(), Some(2));
        assert!(cyl.cylinder().is_err());
        assert_eq!(cyl.base(), r2());
        assert_eq!(Chart::point().dim(), 0);
    }

    #[test]
    fn monomial_probes() {
        let c = r2();
        let m = c.monomials(2);
        assert_eq!(m.len(), 6);
        assert!(m[0].is_one());
        assert_eq!(Chart::point().monomials(2).len(), 1);
    }

    #[test]
    fn substitute_and_integrate() {
        let c = r2().cylinder().unwrap();
        let q = p(&c, "t^2*x + 3*t - y");
        let half = Rational::new(1.into(), 2.into());
        assert_eq!(q.substitute(2, &half), p(&c, "1/4*x + 3/2 - y"));
        assert_eq!(q.integrate_unit(2), p(&c, "1/3*x + 3/2 - y"));
    }
}
