use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use super::Conn;
use crate::error::{Error, Result};
use crate::forms::{NLForm, Session, TrueForm, ValueKind};
use crate::ring::{Poly, Rational};
use crate::superlin::EndMap;

/// `∇ = ω₀ + ∇_core + ω₂ + ω₃ + …` with `ω₀` an odd endomorphism and `ωᵢ`
/// endomorphism-valued forms of degree `i`.
#[derive(Clone, Debug)]
pub struct SuperConn {
    core: Conn,
    omega0: EndMap,
    higher: BTreeMap<usize, NLForm>,
}

impl SuperConn {
    pub fn new(core: &Conn, omega0: EndMap) -> Result<Self> {
        core.bundle().check_endmap(&omega0)?;
        if omega0.parity().is_none() {
            return Err(Error::MixedParity);
        }
        Ok(SuperConn {
            core: core.clone(),
            omega0,
            higher: BTreeMap::new(),
        })
    }

    /// Adds `ω_i` for `i ≥ 2`. Components of equal degree are summed.
    pub fn with(mut self, omega: NLForm) -> Result<Self> {
        let i = omega.degree();
        if i < 2 {
            return Err(Error::Shape("higher components need degree ≥ 2".into()));
        }
        if omega.kind() != ValueKind::Endo || omega.carrier() != self.core.carrier() {
            return Err(Error::ValueKind("higher components must be endomorphism-valued forms on the core's carrier".into()));
        }
        let b = self.core.bundle();
        if omega.shape().r0 != b.r0() || omega.shape().r1 != b.r1() {
            return Err(Error::Shape("higher component acts on another bundle".into()));
        }
        if omega.parity().is_none() {
            return Err(Error::MixedParity);
        }
        let next = match self.higher.remove(&i) {
            Some(old) => old.add(&omega)?,
            None => omega,
        };
        self.higher.insert(i, next);
        Ok(self)
    }

    pub fn core(&self) -> &Conn {
        &self.core
    }

    pub fn omega0(&self) -> &EndMap {
        &self.omega0
    }

    pub fn higher(&self) -> impl Iterator<Item = (&usize, &NLForm)> {
        self.higher.iter()
    }

    /// The homogeneous components `F_n` of the curvature of the total
    /// operator, for `n ≤ max_degree`:
    /// `F = ω₀² + d_∇ω₀ + k + Σ d_∇ωᵢ + Σ [ω₀, ωᵢ] + Σ_{i,j≥2} ωᵢωⱼ`.
    pub fn curvature_components(&self, max_degree: usize) -> Result<BTreeMap<usize, NLForm>> {
        let carrier = self.core.carrier();
        let w0 = TrueForm::from_terms(
            carrier,
            0,
            EndMap::zeros(self.omega0.r0(), self.omega0.r1()),
            [(Vec::new(), self.omega0.clone())],
        )?
        .to_nlform();
        let mut parts: BTreeMap<usize, Vec<NLForm>> = BTreeMap::new();
        let mut push = |n: usize, f: NLForm| {
            if n <= max_degree {
                parts.entry(n).or_default().push(f);
            }
        };
        push(0, w0.product(&w0)?);
        push(1, self.core.d_nabla(&w0)?);
        push(2, self.core.curvature());
        for (&i, w) in &self.higher {
            if i < max_degree {
                push(i + 1, self.core.d_nabla(w)?);
            }
            push(i, w0.graded_commutator(w)?);
            for (&j, v) in &self.higher {
                if i + j <= max_degree {
                    push(i + j, w.product(v)?);
                }
            }
        }
        let one = Rational::from_integer(1.into());
        let mut out = BTreeMap::new();
        for (n, fs) in parts {
            let terms: Vec<(Rational, NLForm)> = fs.into_iter().map(|f| (one.clone(), f)).collect();
            out.insert(n, NLForm::sum(&terms)?);
        }
        Ok(out)
    }

    /// Homogeneous components `(degree, Tr_s(F^p)_degree)` of the super
    /// Chern form, for degrees up to the carrier rank. Each is checked to
    /// be closed.
    pub fn super_chern_form(&self, p: usize, probe_degree: u32) -> Result<Vec<(usize, TrueForm<Poly>)>> {
        if p == 0 {
            return Err(Error::Shape("super Chern forms need p ≥ 1".into()));
        }
        let carrier = self.core.carrier();
        let max = carrier.rank();
        let f = self.curvature_components(max)?;
        let mut power = f.clone();
        for _ in 1..p {
            let mut next: BTreeMap<usize, Vec<NLForm>> = BTreeMap::new();
            for (&a, x) in &power {
                for (&b, y) in &f {
                    if a + b <= max {
                        next.entry(a + b).or_default().push(x.product(y)?);
                    }
                }
            }
            let one = Rational::from_integer(1.into());
            power = next
                .into_iter()
                .map(|(n, fs)| {
                    let terms: Vec<(Rational, NLForm)> = fs.into_iter().map(|f| (one.clone(), f)).collect();
                    NLForm::sum(&terms).map(|s| (n, s))
                })
                .collect::<Result<_>>()?;
        }
        let mut session = Session::new();
        let mut out = Vec::new();
        for (n, form) in power {
            let alpha = form.supertrace()?.assemble_scalar(&mut session, probe_degree)?;
            let d = alpha.exterior_d();
            if !d.is_zero() {
                return Err(Error::ClosednessViolation { p, residual: d.display() });
            }
            out.push((n, alpha));
        }
        Ok(out)
    }
}
