//! Lie–Rinehart carriers: trivialized Lie algebroids over a chart.
//!
//! A carrier is a free module of rank `r` over the chart's polynomial ring
//! with a chosen frame `e₁ … e_r`, an anchor sending each `eᵢ` to a
//! polynomial vector field, and structure functions `[eᵢ, eⱼ] = Σ cᵢⱼᵏ eₖ`.
//! The tangent bundle, Lie algebras (over a point) and action algebroids
//! are all carriers, so every downstream formula is written once.

use alloc::format;
use alloc::string::String;
use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

use crate::check::CheckReport;
use crate::error::{Error, Result};
use crate::ring::{Chart, Poly, VField};

/// A section of a carrier, in frame coordinates.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CSection(Vec<Poly>);

impl CSection {
    pub fn new(coeffs: Vec<Poly>) -> Self {
        CSection(coeffs)
    }

    pub fn zero(rank: usize) -> Self {
        CSection(vec![Poly::zero(); rank])
    }

    /// The frame element `eᵢ`.
    pub fn basis(rank: usize, i: usize) -> Self {
        let mut s = CSection::zero(rank);
        s.0[i] = Poly::one();
        s
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coeffs(&self) -> &[Poly] {
        &self.0
    }

    pub fn coeff(&self, i: usize) -> &Poly {
        &self.0[i]
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Poly::is_zero)
    }

    pub fn scale(&self, f: &Poly) -> CSection {
        CSection(self.0.iter().map(|c| c * f).collect())
    }

    pub fn add(&self, other: &CSection) -> CSection {
        CSection(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn sub(&self, other: &CSection) -> CSection {
        CSection(self.0.iter().zip(&other.0).map(|(a, b)| a - b).collect())
    }

    pub fn neg(&self) -> CSection {
        CSection(self.0.iter().map(|a| -a).collect())
    }

    /// Splits a cylinder section into its base part and its `∂_t` coefficient.
    pub fn split_last(&self) -> (CSection, Poly) {
        let (last, base) = self.0.split_last().expect("cylinder section has rank ≥ 1");
        (CSection(base.to_vec()), last.clone())
    }

    pub fn display(&self, chart: &Chart) -> String {
        let parts: Vec<String> = self.0.iter().map(|c| chart.fmt_poly(c)).collect();
        format!("({})", parts.join(", "))
    }
}

impl From<VField> for CSection {
    fn from(v: VField) -> Self {
        CSection(v.into_coeffs())
    }
}

#[derive(Debug, PartialEq, Eq)]
struct CarrierData {
    chart: Chart,
    anchor: Vec<VField>,
    structure: Vec<Vec<CSection>>,
    tangent: bool,
    base: Option<Carrier>,
}

/// A trivialized Lie algebroid. Cloning is cheap.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Carrier(Arc<CarrierData>);

impl Carrier {
    /// The tangent bundle with the coordinate frame: anchor is the identity
    /// and all structure functions vanish.
    pub fn tangent(chart: &Chart) -> Carrier {
        let n = chart.dim();
        Carrier(Arc::new(CarrierData {
            chart: chart.clone(),
            anchor: (0..n).map(|i| VField::coordinate(n, i)).collect(),
            structure: vec![vec![CSection::zero(n); n]; n],
            tangent: true,
            base: None,
        }))
    }

    /// Builds a carrier from anchor columns and sparse structure triples
    /// `(i, j, k, c)` meaning `c` is the `eₖ` coefficient of `[eᵢ, eⱼ]`,
    /// with `i < j` (0-based). The table is filled antisymmetrically.
    pub fn new(chart: &Chart, anchor: Vec<VField>, triples: &[(usize, usize, usize, Poly)]) -> Result<Carrier> {
        let r = anchor.len();
        let mut table = vec![vec![CSection::zero(r); r]; r];
        for (i, j, k, c) in triples {
            let (i, j, k) = (*i, *j, *k);
            if i >= j || j >= r || k >= r {
                return Err(Error::Shape(format!(
                    "structure triple ({i}, {j}, {k}) invalid for rank {r} (need i < j < rank, k < rank)"
                )));
            }
            chart.contains(c)?;
            table[i][j].0[k] += c;
            table[j][i].0[k] -= c;
        }
        Carrier::from_table(chart, anchor, table)
    }

    /// Builds a carrier from a full structure table without enforcing
    /// antisymmetry (use [`Carrier::check`] to test it).
    pub fn from_table(chart: &Chart, anchor: Vec<VField>, table: Vec<Vec<CSection>>) -> Result<Carrier> {
        let r = anchor.len();
        for a in &anchor {
            if a.dim() != chart.dim() {
                return Err(Error::ChartMismatch(format!(
                    "anchor column of dimension {} on a chart of dimension {}",
                    a.dim(),
                    chart.dim()
                )));
            }
            a.coeffs().iter().try_for_each(|c| chart.contains(c))?;
        }
        if table.len() != r || table.iter().any(|row| row.len() != r || row.iter().any(|s| s.rank() != r)) {
            return Err(Error::Shape(format!("structure table must be {r}×{r}×{r}")));
        }
        Ok(Carrier(Arc::new(CarrierData {
            chart: chart.clone(),
            anchor,
            structure: table,
            tangent: false,
            base: None,
        })))
    }

    /// A Lie algebra as a carrier over a point: zero anchor, constant
    /// structure table.
    pub fn lie_algebra(rank: usize, triples: &[(usize, usize, usize, Poly)]) -> Result<Carrier> {
        for (_, _, _, c) in triples {
            if !c.is_constant() {
                return Err(Error::Shape("Lie algebra structure constants must be constant".into()));
            }
        }
        Carrier::new(&Chart::point(), vec![VField::zero(0); rank], triples)
    }

    pub fn chart(&self) -> &Chart {
        &self.0.chart
    }

    pub fn rank(&self) -> usize {
        self.0.anchor.len()
    }

    pub fn dim(&self) -> usize {
        self.0.chart.dim()
    }

    /// True for carriers built by [`Carrier::tangent`].
    pub fn is_tangent(&self) -> bool {
        self.0.tangent
    }

    /// `ρ(eᵢ)`.
    pub fn anchor_of(&self, i: usize) -> &VField {
        &self.0.anchor[i]
    }

    pub fn anchor_columns(&self) -> &[VField] {
        &self.0.anchor
    }

    /// `[eᵢ, eⱼ]`.
    pub fn structure(&self, i: usize, j: usize) -> &CSection {
        &self.0.structure[i][j]
    }

    pub fn basis(&self, i: usize) -> CSection {
        CSection::basis(self.rank(), i)
    }

    pub fn frame(&self) -> Vec<CSection> {
        (0..self.rank()).map(|i| self.basis(i)).collect()
    }

    pub fn check_section(&self, s: &CSection) -> Result<()> {
        if s.rank() != self.rank() {
            return Err(Error::RankMismatch {
                expected: self.rank(),
                found: s.rank(),
            });
        }
        Ok(())
    }

    /// `ρ(X) = Σ Xⁱ ρ(eᵢ)`.
    pub fn anchor(&self, x: &CSection) -> VField {
        let mut out = VField::zero(self.dim());
        for (c, col) in x.coeffs().iter().zip(&self.0.anchor) {
            if !c.is_zero() {
                out = out.add(&col.scale(c));
            }
        }
        out
    }

    /// The bracket on sections, extended from the frame by the Leibniz rule:
    /// `[X, Y] = Σ XⁱYʲ cᵢⱼ + Σ ρ(X)(Yʲ) eⱼ − Σ ρ(Y)(Xⁱ) eᵢ`.
    pub fn bracket(&self, x: &CSection, y: &CSection) -> Result<CSection> {
        self.check_section(x)?;
        self.check_section(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &CSection, y: &CSection) -> CSection {
        let r = self.rank();
        let mut out = vec![Poly::zero(); r];
        for (i, xi) in x.coeffs().iter().enumerate() {
            if xi.is_zero() {
                continue;
            }
            for (j, yj) in y.coeffs().iter().enumerate() {
                if yj.is_zero() {
                    continue;
                }
                let c = &self.0.structure[i][j];
                if c.is_zero() {
                    continue;
                }
                let w = xi * yj;
                for (k, ck) in c.coeffs().iter().enumerate() {
                    if !ck.is_zero() {
                        out[k] += &(&w * ck);
                    }
                }
            }
        }
        let rx = self.anchor(x);
        let ry = self.anchor(y);
        for (k, o) in out.iter_mut().enumerate() {
            *o += &rx.apply(y.coeff(k));
            *o -= &ry.apply(x.coeff(k));
        }
        CSection(out)
    }

    /// `M × I`: adds the frame element `∂_t` with anchor `∂/∂t` and no new
    /// brackets. The new element is the last frame element.
    #[allow(clippy::needless_range_loop)]
    pub fn cylinder(&self) -> Result<Carrier> {
        let chart = self.chart().cylinder()?;
        let n = chart.dim();
        let r = self.rank();
        let mut anchor: Vec<VField> = self.0.anchor.iter().map(|a| a.extend(n)).collect();
        anchor.push(VField::coordinate(n, n - 1));
        let mut structure = vec![vec![CSection::zero(r + 1); r + 1]; r + 1];
        for i in 0..r {
            for j in 0..r {
                let mut c = self.0.structure[i][j].0.clone();
                c.push(Poly::zero());
                structure[i][j] = CSection(c);
            }
        }
        Ok(Carrier(Arc::new(CarrierData {
            chart,
            anchor,
            structure,
            tangent: false,
            base: Some(self.clone()),
        })))
    }

    pub fn is_cylinder(&self) -> bool {
        self.0.base.is_some()
    }

    /// The carrier a cylinder was built from.
    pub fn cylinder_base(&self) -> Option<&Carrier> {
        self.0.base.as_ref()
    }

    /// Checks antisymmetry of the structure table, the Jacobi identity on
    /// basis triples and on monomial probe triples, the Leibniz expansion
    /// on probes `(f eᵢ, eⱼ)`, and that the anchor maps brackets to
    /// brackets.
    pub fn check(&self, probe_degree: u32) -> CheckReport {
        let mut report = CheckReport::new("carrier", probe_degree);
        let r = self.rank();
        let chart = self.chart();
        let comps = |s: &CSection, tag: &str| -> Vec<(String, Poly)> {
            s.coeffs()
                .iter()
                .enumerate()
                .map(|(k, p)| (format!("{tag}[e{}]", k + 1), p.clone()))
                .collect()
        };

        for i in 0..r {
            for j in i..r {
                let sum = self.structure(i, j).add(self.structure(j, i));
                report.record(
                    "antisymmetry c_ij + c_ji = 0",
                    format!("(e{}, e{})", i + 1, j + 1),
                    comps(&sum, "residual"),
                );
            }
        }

        let jacobiator = |a: &CSection, b: &CSection, c: &CSection| -> CSection {
            let ab = self.bracket_unchecked(a, b);
            let bc = self.bracket_unchecked(b, c);
            let ca = self.bracket_unchecked(c, a);
            self.bracket_unchecked(&ab, c)
                .add(&self.bracket_unchecked(&bc, a))
                .add(&self.bracket_unchecked(&ca, b))
        };

        for i in 0..r {
            for j in (i + 1)..r {
                for k in (j + 1)..r {
                    let jac = jacobiator(&self.basis(i), &self.basis(j), &self.basis(k));
                    report.record(
                        "Jacobi",
                        format!("(e{}, e{}, e{})", i + 1, j + 1, k + 1),
                        comps(&jac, "jacobiator"),
                    );
                }
            }
        }

        let probes: Vec<Poly> = chart
            .monomials(probe_degree)
            .into_iter()
            .filter(|m| !m.is_constant())
            .collect();
        for f in &probes {
            for i in 0..r {
                let fe = self.basis(i).scale(f);
                for j in 0..r {
                    for k in (j + 1)..r {
                        let jac = jacobiator(&fe, &self.basis(j), &self.basis(k));
                        report.record(
                            "Jacobi",
                            format!("({}*e{}, e{}, e{})", chart.fmt_poly(f), i + 1, j + 1, k + 1),
                            comps(&jac, "jacobiator"),
                        );
                    }
                }
            }
        }

        for f in &probes {
            for i in 0..r {
                for j in 0..r {
                    let ei = self.basis(i);
                    let ej = self.basis(j);
                    let base = self.structure(i, j).scale(f);
                    // [eᵢ, f eⱼ] = f[eᵢ, eⱼ] + ρ(eᵢ)(f) eⱼ
                    let lhs = self.bracket_unchecked(&ei, &ej.scale(f));
                    let rhs = base.add(&ej.scale(&self.anchor_of(i).apply(f)));
                    report.record(
                        "Leibniz [X, fY] = f[X,Y] + rho(X)(f) Y",
                        format!("(e{}, {}*e{})", i + 1, chart.fmt_poly(f), j + 1),
                        comps(&lhs.sub(&rhs), "residual"),
                    );
                    // [f eᵢ, eⱼ] = f[eᵢ, eⱼ] − ρ(eⱼ)(f) eᵢ
                    let lhs = self.bracket_unchecked(&ei.scale(f), &ej);
                    let rhs = base.sub(&ei.scale(&self.anchor_of(j).apply(f)));
                    report.record(
                        "Leibniz [fX, Y] = f[X,Y] - rho(Y)(f) X",
                        format!("({}*e{}, e{})", chart.fmt_poly(f), i + 1, j + 1),
                        comps(&lhs.sub(&rhs), "residual"),
                    );
                }
            }
        }

        for i in 0..r {
            for j in (i + 1)..r {
                let lhs = self
                    .anchor_of(i)
                    .bracket(self.anchor_of(j))
                    .expect("anchor columns share the chart dimension");
                let rhs = self.anchor(self.structure(i, j));
                let residual = lhs.sub(&rhs);
                report.record(
                    "anchor morphism [rho e_i, rho e_j] - rho([e_i, e_j]) = 0",
                    format!("(e{}, e{})", i + 1, j + 1),
                    residual
                        .coeffs()
                        .iter()
                        .enumerate()
                        .map(|(a, p)| (format!("d/d{}", chart.vars()[a]), p.clone())),
                );
            }
        }
        report
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// aff(1) acting on the line: ρ(e₁) = ∂ₓ, ρ(e₂) = x∂ₓ, [e₁, e₂] = e₁.
    fn aff1(c12: &str) -> Carrier {
        let chart = Chart::euclidean(1);
        let x = chart.parse("x").unwrap();
        Carrier::new(
            &chart,
            vec![VField::new(vec![Poly::one()]), VField::new(vec![x])],
            &[(0, 1, 0, chart.parse(c12).unwrap())],
        )
        .unwrap()
    }

    #[test]
    fn tangent_carrier_shape() {
        let c = Carrier::tangent(&Chart::euclidean(2));
        assert_eq!(c.rank(), 2);
        assert_eq!(c.anchor_of(0), &VField::coordinate(2, 0));
        assert_eq!(c.anchor_of(1), &VField::coordinate(2, 1));
        assert!(c.structure(0, 1).is_zero());
        assert_eq!(Carrier::tangent(&Chart::point()).rank(), 0);
        assert!(c.check(2).passed());
    }

    #[test]
    fn tangent_bracket_matches_vector_fields() {
        let chart = Chart::euclidean(1);
        let c = Carrier::tangent(&chart);
        let x_dx = CSection::new(vec![chart.parse("x").unwrap()]);
        let x2_dx = CSection::new(vec![chart.parse("x^2").unwrap()]);
        assert_eq!(c.bracket(&x_dx, &x2_dx).unwrap(), x2_dx);
        let dx = c.basis(0);
        assert_eq!(c.bracket(&dx, &x_dx).unwrap(), dx);
    }

    #[test]
    fn aff1_leibniz_cancellation() {
        let c = aff1("1");
        let x = c.chart().parse("x").unwrap();
        let xe1 = c.basis(0).scale(&x);
        assert!(c.bracket(&xe1, &c.basis(1)).unwrap().is_zero());
        assert_eq!(c.bracket(&c.basis(0), &c.basis(1)).unwrap(), c.basis(0));
    }

    #[test]
    fn aff1_passes_check() {
        let report = aff1("1").check(2);
        assert!(report.passed(), "{:?}", report.violations);
        assert!(report.checks_run > 0);
    }

    #[test]
    fn corrupted_aff1_flags_anchor_residual() {
        let c = aff1("x");
        let report = c.check(2);
        assert!(!report.passed());
        let anchor = report
            .violations
            .iter()
            .find(|v| v.identity.starts_with("anchor morphism"))
            .expect("anchor violation reported");
        let chart = c.chart();
        assert_eq!(anchor.residual, vec![("d/dx".into(), chart.parse("1 - x").unwrap())]);
        // the corruption also breaks Jacobi on function-weighted probes
        assert!(report.violations.iter().any(|v| v.identity == "Jacobi"));
    }

    #[test]
    fn lie_algebra_over_point() {
        // so(3): [e1,e2]=e3, [e2,e3]=e1, [e1,e3]=-e2
        let one = Poly::one();
        let c = Carrier::lie_algebra(
            3,
            &[(0, 1, 2, one.clone()), (1, 2, 0, one.clone()), (0, 2, 1, -one)],
        )
        .unwrap();
        assert_eq!(c.bracket(&c.basis(1), &c.basis(0)).unwrap(), c.basis(2).neg());
        assert!(c.check(2).passed());
        // [e1,e2] = e1, [e2,e3] = e2 has jacobiator -e1
        let broken = Carrier::lie_algebra(3, &[(0, 1, 0, Poly::one()), (1, 2, 1, Poly::one())]).unwrap();
        assert!(broken.check(2).violations.iter().any(|v| v.identity == "Jacobi"));
    }

    #[test]
    fn antisymmetry_violation_is_reported() {
        let chart = Chart::euclidean(1);
        let mut table = vec![vec![CSection::zero(2); 2]; 2];
        table[0][1] = CSection::basis(2, 0);
        let c = Carrier::from_table(&chart, vec![VField::zero(1), VField::zero(1)], table).unwrap();
        assert!(c
            .check(1)
            .violations
            .iter()
            .any(|v| v.identity.starts_with("antisymmetry")));
    }

    #[test]
    fn cylinder_extends_frame() {
        let c = aff1("1").cylinder().unwrap();
        assert_eq!(c.rank(), 3);
        assert_eq!(c.anchor_of(2), &VField::coordinate(2, 1));
        assert_eq!(c.anchor_of(1).coeffs()[1], Poly::zero());
        assert!(c.check(1).passed());
    }

    #[test]
    fn bad_triples_rejected() {
        let chart = Chart::euclidean(1);
        let anchor = vec![VField::zero(1), VField::zero(1)];
        assert!(Carrier::new(&chart, anchor.clone(), &[(1, 0, 0, Poly::one())]).is_err());
        assert!(Carrier::new(&chart, anchor, &[(0, 1, 2, Poly::one())]).is_err());
        assert!(Carrier::new(&chart, vec![VField::zero(2)], &[]).is_err());
    }
}
