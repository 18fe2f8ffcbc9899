#![allow(dead_code)]

use homochern_core::carrier::Carrier;
use homochern_core::ring::{Chart, Exponent, Poly, Rational, VField};
use homochern_core::superlin::{EndMap, Parity};
use proptest::prelude::*;

pub fn p(chart: &Chart, s: &str) -> Poly {
    chart.parse(s).unwrap()
}

pub fn aff1() -> Carrier {
    let chart = Chart::new(["x"]).unwrap();
    Carrier::new(
        &chart,
        vec![VField::new(vec![Poly::one()]), VField::new(vec![Poly::var(0)])],
        &[(0, 1, 0, Poly::one())],
    )
    .unwrap()
}

/// Infinitesimal rotations of ℝ³.
pub fn rotations() -> Carrier {
    let chart = Chart::euclidean(3);
    let rx = VField::new(vec![Poly::zero(), p(&chart, "z"), p(&chart, "-y")]);
    let ry = VField::new(vec![p(&chart, "-z"), Poly::zero(), p(&chart, "x")]);
    let rz = VField::new(vec![p(&chart, "y"), p(&chart, "-x"), Poly::zero()]);
    Carrier::new(
        &chart,
        vec![rx, ry, rz],
        &[(0, 1, 2, Poly::one()), (1, 2, 0, Poly::one()), (0, 2, 1, Poly::from_int(-1))],
    )
    .unwrap()
}

/// Polynomials of degree ≤ `deg` in `dim` variables with small integer coefficients.
pub fn poly(dim: usize, deg: u32) -> impl Strategy<Value = Poly> {
    let monos: Vec<Vec<u32>> = monomial_exponents(dim, deg);
    let n = monos.len();
    proptest::collection::vec(-2i64..=2, n).prop_map(move |cs| {
        let mut out = Poly::zero();
        for (c, e) in cs.iter().zip(&monos) {
            if *c != 0 {
                out = out + Poly::monomial(Exponent::new(e.clone()), Rational::from_integer((*c).into()));
            }
        }
        out
    })
}

/// Sparse variant: most coefficients vanish.
pub fn sparse_poly(dim: usize, deg: u32) -> impl Strategy<Value = Poly> {
    prop_oneof![2 => Just(Poly::zero()), 1 => poly(dim, deg)]
}

fn monomial_exponents(dim: usize, deg: u32) -> Vec<Vec<u32>> {
    let mut out = vec![vec![0; dim]];
    for i in 0..dim {
        let mut next = Vec::new();
        for e in &out {
            let used: u32 = e.iter().sum();
            for k in 0..=(deg - used) {
                let mut f = e.clone();
                f[i] = k;
                next.push(f);
            }
        }
        out = next;
    }
    out
}

pub fn endmap(r0: usize, r1: usize, dim: usize, deg: u32) -> impl Strategy<Value = EndMap> {
    let n = r0 + r1;
    proptest::collection::vec(sparse_poly(dim, deg), n * n).prop_map(move |es| {
        let rows = es.chunks(n).map(|r| r.to_vec()).collect();
        EndMap::from_rows(r0, r1, rows).unwrap()
    })
}

pub fn homogeneous(r0: usize, r1: usize, dim: usize, deg: u32, parity: Parity) -> impl Strategy<Value = EndMap> {
    endmap(r0, r1, dim, deg).prop_map(move |m| m.part(parity))
}

pub fn parity() -> impl Strategy<Value = Parity> {
    prop_oneof![Just(Parity::Even), Just(Parity::Odd)]
}
