//! Reports produced by the identity checkers.
//!
//! Checkers never fail with an error when an identity is violated; they
//! collect every violation with its labelled nonzero residual components.

use alloc::string::String;
use alloc::vec::Vec;

use crate::ring::{Chart, Poly};

/// One violated identity on one probe.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Violation {
    pub identity: String,
    pub probe: String,
    /// Nonzero components of the residual, labelled by position.
    pub residual: Vec<(String, Poly)>,
}

impl Violation {
    pub fn describe(&self, chart: &Chart) -> String {
        let parts: Vec<String> = self
            .residual
            .iter()
            .map(|(label, p)| alloc::format!("{label} = {}", chart.fmt_poly(p)))
            .collect();
        alloc::format!("{} on {}: {}", self.identity, self.probe, parts.join(", "))
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckReport {
    pub name: String,
    /// Probe functions are all monomials up to this total degree.
    pub probe_degree: u32,
    pub checks_run: usize,
    pub violations: Vec<Violation>,
}

impl CheckReport {
    pub fn new(name: impl Into<String>, probe_degree: u32) -> Self {
        CheckReport {
            name: name.into(),
            probe_degree,
            checks_run: 0,
            violations: Vec::new(),
        }
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    /// Records one evaluated identity. `residual` lists labelled components;
    /// zero components are dropped and the check passes iff none remain.
    pub fn record<I>(&mut self, identity: &str, probe: impl Into<String>, residual: I)
    where
        I: IntoIterator<Item = (String, Poly)>,
    {
        self.checks_run += 1;
        let residual: Vec<(String, Poly)> =
            residual.into_iter().filter(|(_, p)| !p.is_zero()).collect();
        if !residual.is_empty() {
            self.violations.push(Violation {
                identity: identity.into(),
                probe: probe.into(),
                residual,
            });
        }
    }

    pub fn merge(&mut self, other: CheckReport) {
        self.checks_run += other.checks_run;
        self.violations.extend(other.violations);
    }
}

/// Probe configuration shared by the linearity and axiom checkers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Probes {
    /// Probe functions are all monomials of total degree ≤ `degree`.
    pub degree: u32,
    /// Also probe with one dense polynomial section besides the frame.
    pub dense_section: bool,
}

impl Default for Probes {
    fn default() -> Self {
        Probes {
            degree: 2,
            dense_section: true,
        }
    }
}

impl Probes {
    pub fn with_degree(degree: u32) -> Self {
        Probes {
            degree,
            ..Probes::default()
        }
    }
}

/// A deterministic dense polynomial vector of length `len` over a chart of
/// dimension `dim`, used as the non-frame probe section.
pub(crate) fn dense_coeffs(dim: usize, len: usize) -> Vec<Poly> {
    (0..len)
        .map(|k| {
            let mut p = Poly::from_int(1 + k as i64);
            for a in 0..dim {
                let w = ((a + 2 * k) % 3) as i64 + 1;
                p += &Poly::var(a).scale(&crate::ring::Rational::from_integer(w.into()));
            }
            if dim > 0 {
                let a = k % dim;
                let b = (k + 1) % dim;
                p += &(&Poly::var(a) * &Poly::var(b));
            }
            p
        })
        .collect()
}
