mod common;

use common::*;
use homochern_core::carrier::Carrier;
use homochern_core::conn::{chern_form, chern_simons, Conn};
use homochern_core::forms::{anchor_pullback, NLForm, Session, TrueForm};
use homochern_core::ring::{Chart, Poly, Rational};
use homochern_core::superlin::{EndMap, Parity, SuperBundle};
use proptest::prelude::*;

fn sign(a: Parity, b: Parity) -> Rational {
    Rational::from_integer(if a.is_odd() && b.is_odd() { (-1).into() } else { 1.into() })
}

fn form(carrier: &Carrier, degree: usize, coeffs: Vec<Poly>) -> TrueForm<Poly> {
    let tuples = homochern_core::forms::increasing_tuples(degree, carrier.rank());
    TrueForm::from_terms(carrier, degree, Poly::zero(), tuples.into_iter().zip(coeffs)).unwrap()
}

fn conn_r2(thetas: Vec<EndMap>, r0: usize, r1: usize) -> Conn {
    let tm = Carrier::tangent(&Chart::euclidean(2));
    Conn::from_frame(&tm, &SuperBundle::split(r0, r1), thetas).unwrap()
}

fn even_thetas(r0: usize, r1: usize) -> impl Strategy<Value = Vec<EndMap>> {
    proptest::collection::vec(homogeneous(r0, r1, 2, 1, Parity::Even), 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn supertrace_kills_supercommutators(
        pa in parity(), pb in parity(), a in endmap(2, 2, 2, 1), b in endmap(2, 2, 2, 1),
    ) {
        prop_assert!(a.part(pa).scommutator(&b.part(pb)).unwrap().supertrace().is_zero());
    }

    #[test]
    fn graded_jacobi(
        pa in parity(), pb in parity(), pc in parity(),
        a in endmap(2, 1, 1, 1), b in endmap(2, 1, 1, 1), c in endmap(2, 1, 1, 1),
    ) {
        let (a, b, c) = (a.part(pa), b.part(pb), c.part(pc));
        let lhs = a.scommutator(&b.scommutator(&c).unwrap()).unwrap();
        let rhs = &a.scommutator(&b).unwrap().scommutator(&c).unwrap()
            + &b.scommutator(&a.scommutator(&c).unwrap()).unwrap().scale_rational(&sign(pa, pb));
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn parity_is_additive(pa in parity(), pb in parity(), a in endmap(1, 2, 1, 1), b in endmap(1, 2, 1, 1)) {
        let prod = &a.part(pa) * &b.part(pb);
        let expected = if pa.is_odd() != pb.is_odd() { Parity::Odd } else { Parity::Even };
        prop_assert!(prod.is_zero() || prod.parity() == Some(expected));
    }

    #[test]
    fn d_squared_vanishes(f in poly(3, 2), coeffs in proptest::collection::vec(poly(3, 1), 3)) {
        let c = rotations();
        let zero = TrueForm::function(&c, f);
        prop_assert!(zero.exterior_d().exterior_d().is_zero());
        let one = form(&c, 1, coeffs);
        prop_assert!(one.exterior_d().exterior_d().is_zero());
    }

    #[test]
    fn pullback_is_cochain_map(coeffs in proptest::collection::vec(poly(3, 2), 3)) {
        let c = rotations();
        let tm = Carrier::tangent(c.chart());
        let alpha = form(&tm, 1, coeffs);
        prop_assert_eq!(
            anchor_pullback(&c, &alpha.exterior_d()).unwrap(),
            anchor_pullback(&c, &alpha).unwrap().exterior_d()
        );
    }

    #[test]
    fn stokes_on_cylinder(coeffs in proptest::collection::vec(poly(3, 2), 3)) {
        let cyl = Carrier::tangent(&Chart::euclidean(2)).cylinder().unwrap();
        let alpha = form(&cyl, 1, coeffs);
        let lhs = alpha.exterior_d().fiber_integrate().unwrap()
            .add(&alpha.fiber_integrate().unwrap().exterior_d()).unwrap();
        let rhs = alpha.restrict(&Rational::from_integer(1.into())).unwrap()
            .sub(&alpha.restrict(&Rational::from_integer(0.into())).unwrap()).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn memo_does_not_change_results(thetas in even_thetas(2, 1)) {
        let conn = conn_r2(thetas, 2, 1);
        let k = NLForm::curvature(&conn);
        let tr = k.power(2).unwrap().supertrace().unwrap();
        let a = tr.assemble_scalar(&mut Session::new(), 2).unwrap();
        let b = tr.assemble_scalar(&mut Session::without_memo(), 2).unwrap();
        prop_assert_eq!(a, b);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn chern_forms_are_closed(thetas in even_thetas(2, 1)) {
        let conn = conn_r2(thetas, 2, 1);
        for p in 0..=1 {
            prop_assert!(chern_form(&conn, p, 2).unwrap().exterior_d().is_zero());
        }
    }

    #[test]
    fn transgression_both_ways(t0 in even_thetas(1, 1), t1 in even_thetas(1, 1)) {
        let c0 = conn_r2(t0, 1, 1);
        let c1 = conn_r2(t1, 1, 1);
        let cs01 = chern_simons(&c0, &c1, 1, 2).unwrap();
        let cs10 = chern_simons(&c1, &c0, 1, 2).unwrap();
        let diff = chern_form(&c1, 1, 2).unwrap().sub(&chern_form(&c0, 1, 2).unwrap()).unwrap();
        prop_assert_eq!(cs01.exterior_d(), diff);
        prop_assert!(cs01.add(&cs10).unwrap().exterior_d().is_zero());
    }

    #[test]
    fn chern_is_additive_on_direct_sums(t0 in even_thetas(1, 0), t1 in even_thetas(1, 1)) {
        let a = conn_r2(t0, 1, 0);
        let b = conn_r2(t1, 1, 1);
        let sum = a.direct_sum(&b).unwrap();
        prop_assert_eq!(
            chern_form(&sum, 1, 2).unwrap(),
            chern_form(&a, 1, 2).unwrap().add(&chern_form(&b, 1, 2).unwrap()).unwrap()
        );
    }
}

#[test]
fn rotation_carrier_is_lie_rinehart() {
    assert!(rotations().check(2).passed());
}
