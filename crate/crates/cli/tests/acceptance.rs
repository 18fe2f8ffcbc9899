//! The acceptance suite: one PASS/FAIL line per criterion, exact equality
//! throughout. Run with `cargo test -p homochern --test acceptance`.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::{Command, ExitCode};
use std::time::Instant;

use homochern_core::adjoint::{canonical_adjoint_conn, flatness_report, g_connection_from_classical, AdjointComplex};
use homochern_core::carrier::Carrier;
use homochern_core::check::Probes;
use homochern_core::conn::{
    check_connection, check_covariant_derivative, check_higher, check_uth, chern_form, chern_simons, Conn, SuperConn,
};
use homochern_core::forms::{anchor_pullback, TrueForm};
use homochern_core::ring::{Chart, Exponent, Poly, Rational, VField};
use homochern_core::superlin::{EndMap, Parity, SuperBundle};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn ensure(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn p(chart: &Chart, s: &str) -> Poly {
    chart.parse(s).unwrap()
}

/// Entries given as strings, `"0"` allowed.
fn blocks(chart: &Chart, r0: usize, r1: usize, rows: &[&[&str]]) -> EndMap {
    let rows = rows.iter().map(|r| r.iter().map(|e| p(chart, e)).collect()).collect();
    EndMap::from_rows(r0, r1, rows).unwrap()
}

fn random_poly(rng: &mut ChaCha8Rng, dim: usize) -> Poly {
    let mut out = Poly::zero();
    for _ in 0..rng.gen_range(0..=4) {
        let mut powers = vec![0u32; dim];
        let deg = rng.gen_range(0..=2);
        for _ in 0..deg {
            powers[rng.gen_range(0..dim)] += 1;
        }
        let c = Rational::new(rng.gen_range(-5i64..=5).into(), rng.gen_range(1i64..=3).into());
        out = out + Poly::monomial(Exponent::new(powers), c);
    }
    out
}

fn random_endmap(rng: &mut ChaCha8Rng, r0: usize, r1: usize, parity: Parity) -> EndMap {
    let n = r0 + r1;
    let rows = (0..n).map(|_| (0..n).map(|_| random_poly(rng, 3)).collect()).collect();
    EndMap::from_rows(r0, r1, rows).unwrap().part(parity)
}

fn criterion_1() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut nonzero = 0;
    for case in 0..200 {
        let (r0, r1) = loop {
            let r = (rng.gen_range(0..=3), rng.gen_range(0..=3));
            if r != (0, 0) {
                break r;
            }
        };
        let pa = if rng.gen_bool(0.5) { Parity::Odd } else { Parity::Even };
        let pb = if rng.gen_bool(0.5) { Parity::Odd } else { Parity::Even };
        let a = random_endmap(&mut rng, r0, r1, pa);
        let b = random_endmap(&mut rng, r0, r1, pb);
        let c = a.scommutator(&b).map_err(|e| e.to_string())?;
        if !c.is_zero() {
            nonzero += 1;
        }
        let s = c.supertrace();
        ensure(s.is_zero(), format!("case {case}: supertrace = {}", Chart::euclidean(3).fmt_poly(&s)))?;
    }
    Ok(format!("200 pairs, {nonzero} with nonzero supercommutator"))
}

/// Rank (2,1) over ℝ³, `∂ = (0 1)`, `θ⁰⁰ = [[x dy, z dx], [0, y dz]]`,
/// `θ¹¹ = y dz`.
fn rank21(chart: &Chart, tm: &Carrier) -> Conn {
    let b = SuperBundle::new(2, 1, &[vec![Poly::zero(), Poly::one()]], &[]).unwrap();
    let thetas = vec![
        blocks(chart, 2, 1, &[&["0", "z", "0"], &["0", "0", "0"], &["0", "0", "0"]]),
        blocks(chart, 2, 1, &[&["x", "0", "0"], &["0", "0", "0"], &["0", "0", "0"]]),
        blocks(chart, 2, 1, &[&["0", "0", "0"], &["0", "y", "0"], &["0", "0", "y"]]),
    ];
    Conn::from_frame(tm, &b, thetas).unwrap()
}

fn criterion_2() -> Outcome {
    let chart = Chart::euclidean(3);
    let tm = Carrier::tangent(&chart);
    let conn = rank21(&chart, &tm);
    ensure(check_connection(&conn, &Probes::default()).passed(), "setup is not a connection")?;
    let z = EndMap::zeros(2, 1);
    let even = blocks(&chart, 2, 1, &[&["y", "0", "0"], &["x*z", "1", "0"], &["0", "0", "x"]]);
    let odd = blocks(&chart, 2, 1, &[&["0", "0", "z"], &["0", "0", "0"], &["x^2", "y", "0"]]);
    let omega = TrueForm::from_terms(&tm, 1, z.clone(), [(vec![0], even.clone()), (vec![2], even.scale(&p(&chart, "y")))])
        .unwrap()
        .to_nlform();
    let eta = TrueForm::from_terms(&tm, 1, z.clone(), [(vec![1], odd)]).unwrap().to_nlform();
    let zero_form = TrueForm::from_terms(&tm, 0, z, [(vec![], even)]).unwrap().to_nlform();
    let mut checks = 0;
    for (a, b) in [(&omega, &eta), (&eta, &omega), (&zero_form, &eta)] {
        let r = check_covariant_derivative(&conn, a, b, &Probes::default()).map_err(|e| e.to_string())?;
        if let Some(v) = r.violations.first() {
            return Err(v.describe(&chart));
        }
        checks += r.checks_run;
    }
    for p in 1..=3 {
        let ch = chern_form(&conn, p, 2).map_err(|e| e.to_string())?;
        ensure(ch.exterior_d().is_zero(), format!("d Tr_s(k^{p}) = {}", ch.exterior_d().display()))?;
    }
    Ok(format!("{checks} identity evaluations, Tr_s(k^p) closed for p = 1, 2, 3"))
}

fn criterion_3() -> Outcome {
    let chart = Chart::euclidean(2);
    let tm = Carrier::tangent(&chart);
    let complex = AdjointComplex::new(&tm, 2).map_err(|e| e.to_string())?;
    let canon = canonical_adjoint_conn(&complex, &Probes::default()).map_err(|e| e.to_string())?;
    let conn = &canon.conn;
    let r = check_connection(conn, &Probes::default());
    ensure(r.parity.passed() && r.leibniz.passed(), "axioms (i)/(ii) fail")?;
    ensure(!r.linearity.passed(), "axiom (iii) unexpectedly holds")?;
    ensure(check_uth(conn, &conn.homotopy(), &Probes::default()).passed(), "check_uth fails")?;
    for p in 1..=2 {
        let ch = chern_form(conn, p, 2).map_err(|e| e.to_string())?;
        ensure(ch.is_zero(), format!("Tr_s(k^{p}) = {}", ch.display()))?;
    }
    Ok(format!("sign {}, (iii) fails on {} probes, Tr_s(k^p) = 0", canon.sign, r.linearity.violations.len()))
}

fn criterion_4() -> Outcome {
    let chart = Chart::euclidean(2);
    let tm = Carrier::tangent(&chart);
    let line = SuperBundle::split(1, 0);
    let c0 = Conn::flat(&tm, &line);
    let c1 = Conn::from_frame(&tm, &line, vec![EndMap::zeros(1, 0), blocks(&chart, 1, 0, &[&["x"]])]).unwrap();
    let cs = chern_simons(&c0, &c1, 1, 2).map_err(|e| e.to_string())?;
    let xdy = TrueForm::from_terms(&tm, 1, Poly::zero(), [(vec![1], p(&chart, "x"))]).unwrap();
    ensure(cs == xdy, format!("cs_1 = {}", cs.display()))?;
    let dxdy = TrueForm::from_terms(&tm, 2, Poly::zero(), [(vec![0, 1], Poly::one())]).unwrap();
    ensure(cs.exterior_d() == dxdy, "d cs_1 != dx^dy")?;
    let diff = chern_form(&c1, 1, 2).unwrap().sub(&chern_form(&c0, 1, 2).unwrap()).unwrap();
    ensure(diff == dxdy, format!("Ch difference = {}", diff.display()))?;

    let chart = Chart::euclidean(3);
    let tm = Carrier::tangent(&chart);
    let a = rank21(&chart, &tm);
    let thetas = vec![
        blocks(&chart, 2, 1, &[&["y", "x", "0"], &["0", "0", "0"], &["0", "0", "0"]]),
        blocks(&chart, 2, 1, &[&["0", "0", "0"], &["0", "z", "0"], &["0", "0", "z"]]),
        blocks(&chart, 2, 1, &[&["0", "x*y", "0"], &["0", "0", "0"], &["0", "0", "0"]]),
    ];
    let b = Conn::from_frame(&tm, a.bundle(), thetas).unwrap();
    ensure(check_connection(&b, &Probes::default()).passed(), "second connection fails the axioms")?;
    for p in 1..=2 {
        let cs = chern_simons(&a, &b, p, 2).map_err(|e| e.to_string())?;
        let diff = chern_form(&b, p, 2).unwrap().sub(&chern_form(&a, p, 2).unwrap()).unwrap();
        ensure(cs.exterior_d() == diff, format!("p = {p}: d cs = {}, difference = {}", cs.exterior_d().display(), diff.display()))?;
    }
    Ok("cs_1 = x dy, d cs_1 = dx^dy; rank (2,1) pair exact for p = 1, 2".into())
}

fn criterion_5() -> Outcome {
    let chart = Chart::new(["x", "y", "z", "w"]).unwrap();
    let tm = Carrier::tangent(&chart);
    // θ⁰ = diag(x dy + z dw, z dw) + w dx in the corner, θ¹ = x dw
    let t0 = [["0", "w"], ["0", "0"]];
    let t0 = [t0, [["x", "0"], ["0", "0"]], [["0", "0"], ["0", "0"]], [["z", "0"], ["0", "z"]]];
    let t1 = ["0", "0", "0", "x"];
    let e0: Vec<EndMap> = t0.iter().map(|m| blocks(&chart, 2, 0, &[&m[0], &m[1]])).collect();
    let e1: Vec<EndMap> = t1.iter().map(|m| blocks(&chart, 1, 0, &[&[m]])).collect();
    let full: Vec<EndMap> = e0.iter().zip(&e1).map(|(a, b)| EndMap::direct_sum(a, b)).collect();
    let full: Vec<EndMap> = full.into_iter().map(|m| EndMap::from_rows(2, 1, m.rows()).unwrap()).collect();
    let conn = Conn::from_frame(&tm, &SuperBundle::split(2, 1), full).unwrap();
    let c0 = Conn::from_frame(&tm, &SuperBundle::split(2, 0), e0).unwrap();
    let c1 = Conn::from_frame(&tm, &SuperBundle::split(1, 0), e1).unwrap();
    for p in 1..=2 {
        let lhs = chern_form(&conn, p, 2).map_err(|e| e.to_string())?;
        let rhs = chern_form(&c0, p, 2).unwrap().sub(&chern_form(&c1, p, 2).unwrap()).unwrap();
        ensure(lhs == rhs, format!("p = {p}: {} vs {}", lhs.display(), rhs.display()))?;
        ensure(!lhs.is_zero(), format!("p = {p}: form vanishes"))?;
    }
    Ok("Ch(E) = Ch(E0) - Ch(E1) for p = 1, 2 (both nonzero)".into())
}

fn aff1() -> Carrier {
    let chart = Chart::new(["x"]).unwrap();
    Carrier::new(
        &chart,
        vec![VField::new(vec![Poly::one()]), VField::new(vec![Poly::var(0)])],
        &[(0, 1, 0, Poly::one())],
    )
    .unwrap()
}

fn induced_pipeline(c: &Carrier, aux: &Conn, complex: &AdjointComplex, canon: &Conn) -> Result<TrueForm<Poly>, String> {
    let probes = Probes::default();
    let induced = g_connection_from_classical(complex, aux, &probes).map_err(|e| e.to_string())?;
    let ch = chern_form(&induced, 1, 2).map_err(|e| e.to_string())?;
    ensure(ch.exterior_d().is_zero(), "Ch(induced) not closed")?;
    let pulled = anchor_pullback(c, &chern_form(aux, 1, 2).map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    ensure(ch == pulled, format!("Ch(induced) = {}, pullback = {}", ch.display(), pulled.display()))?;
    let cs = chern_simons(canon, &induced, 1, 2).map_err(|e| e.to_string())?;
    ensure(cs.exterior_d() == ch, format!("d cs_1 = {}", cs.exterior_d().display()))?;
    Ok(ch)
}

fn criterion_6() -> Outcome {
    let probes = Probes::default();
    let c = aff1();
    ensure(c.check(2).passed(), "carrier check fails")?;
    let complex = AdjointComplex::new(&c, 2).map_err(|e| e.to_string())?;
    let canon = canonical_adjoint_conn(&complex, &probes).map_err(|e| e.to_string())?;
    ensure(canon.accepted.passed(), "check_uth fails with the adopted sign")?;
    let witness = canon.rejected.violations.first().ok_or("the opposite sign passes too")?;
    let conn = &canon.conn;
    ensure(check_higher(conn, &conn.homotopy(), None, &probes).passed(), "check_higher fails with H2 = 0")?;
    ensure(flatness_report(conn, &probes).passed(), "canonical curvature is not zero")?;

    let x = Poly::var(0);
    let m = EndMap::from_blocks(2, 1, &[vec![x.clone(), Poly::one()], vec![Poly::zero(), x.clone()]], &[], &[], &[vec![x]])
        .unwrap();
    let aux = Conn::from_frame(&Carrier::tangent(c.chart()), complex.bundle(), vec![m]).unwrap();
    let ch = induced_pipeline(&c, &aux, &complex, conn)?;

    // a carrier with 2-forms on its base, so that the induced form is nonzero
    let chart = Chart::euclidean(2);
    let demo = Carrier::new(&chart, vec![VField::coordinate(2, 0), VField::coordinate(2, 1), VField::zero(2)], &[]).unwrap();
    let dcomplex = AdjointComplex::new(&demo, 2).map_err(|e| e.to_string())?;
    let dcanon = canonical_adjoint_conn(&dcomplex, &probes).map_err(|e| e.to_string())?;
    ensure(flatness_report(&dcanon.conn, &probes).passed(), "demo canonical curvature is not zero")?;
    let mut s = EndMap::zeros(3, 2);
    s.set(2, 2, Poly::var(0));
    let daux = Conn::from_frame(&Carrier::tangent(&chart), dcomplex.bundle(), vec![EndMap::zeros(3, 2), s]).unwrap();
    let dch = induced_pipeline(&demo, &daux, &dcomplex, &dcanon.conn)?;
    ensure(!dch.is_zero(), "demo induced form vanishes")?;

    Ok(format!(
        "sign {}, opposite sign fails ({}); aff(1) Ch = {}; R^2 demo Ch = {}",
        canon.sign,
        witness.describe(c.chart()),
        ch.display(),
        dch.display()
    ))
}

fn criterion_7() -> Outcome {
    let chart = Chart::euclidean(2);
    let tm = Carrier::tangent(&chart);
    let b = SuperBundle::new(2, 2, &[vec![Poly::zero(), Poly::zero()], vec![Poly::zero(), Poly::one()]], &[]).unwrap();
    let diag = |e: [&str; 4]| blocks(&chart, 2, 2, &[&[e[0], "0", "0", "0"], &["0", e[1], "0", "0"], &["0", "0", e[2], "0"], &["0", "0", "0", e[3]]]);
    let core = Conn::from_frame(&tm, &b, vec![diag(["0", "y", "0", "y"]), diag(["x", "0", "0", "0"])]).unwrap();
    ensure(check_connection(&core, &Probes::default()).passed(), "core fails the axioms")?;
    let ch = chern_form(&core, 1, 2).map_err(|e| e.to_string())?;
    let c = Poly::from_ratio(3, 2);
    let w2 = TrueForm::from_terms(&tm, 2, EndMap::zeros(2, 2), [(vec![0, 1], EndMap::identity(2, 2).scale(&c))])
        .unwrap()
        .to_nlform();
    let sc = SuperConn::new(&core, b.partial().clone()).and_then(|s| s.with(w2)).map_err(|e| e.to_string())?;
    let comps = sc.super_chern_form(1, 2).map_err(|e| e.to_string())?;
    for (n, f) in &comps {
        let expected = if *n == 2 { ch.clone() } else { TrueForm::scalar_zero(&tm, *n) };
        ensure(f == &expected, format!("degree {n}: {} vs {}", f.display(), expected.display()))?;
    }
    ensure(!ch.is_zero(), "core Chern form vanishes")?;
    Ok(format!("super Chern form = core Chern form = {}", ch.display()))
}

fn criterion_8() -> Outcome {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    let bin = env!("CARGO_BIN_EXE_homochern");
    let good = root.join("scenarios/aff1.json");
    let a = Command::new(bin).arg(&good).output().map_err(|e| e.to_string())?;
    let b = Command::new(bin).arg(&good).output().map_err(|e| e.to_string())?;
    ensure(a.status.code() == Some(0), format!("exit status {:?}", a.status.code()))?;
    ensure(a.stdout == b.stdout, "reports differ between runs")?;
    let golden = std::fs::read(root.join("tests/golden/aff1.json")).map_err(|e| e.to_string())?;
    ensure(a.stdout == golden, "report differs from the golden file")?;

    let bad = Command::new(bin).arg(root.join("scenarios/aff1_corrupted.json")).output().map_err(|e| e.to_string())?;
    ensure(bad.status.code() == Some(1), format!("corrupted: exit status {:?}", bad.status.code()))?;
    let stderr = String::from_utf8_lossy(&bad.stderr);
    let line = stderr
        .lines()
        .find(|l| l.contains("Jacobi on"))
        .ok_or_else(|| format!("no Jacobi residual printed:\n{stderr}"))?;
    ensure(stderr.contains("anchor morphism"), "no anchor residual printed")?;
    Ok(format!("{} identical bytes; corrupted exits 1 with `{}`", a.stdout.len(), line.trim()))
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("supertrace of supercommutators vanishes", criterion_1),
        ("covariant derivative identities on a rank (2,1) bundle over R^3", criterion_2),
        ("canonical adjoint connection on TR^2 is flat up to homotopy", criterion_3),
        ("Chern-Simons transgression", criterion_4),
        ("split bundle consistency", criterion_5),
        ("aff(1) vanishing pipeline", criterion_6),
        ("superconnection with partial and a 2-form part", criterion_7),
        ("CLI determinism and golden files", criterion_8),
    ];
    // failures are reported on the criterion line
    std::panic::set_hook(Box::new(|_| {}));
    let total = Instant::now();
    let mut failed = 0;
    for (n, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS criterion {}: {name} [{secs:.2}s] {detail}", n + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {}: {name} [{secs:.2}s] {why}", n + 1);
            }
        }
    }
    println!("{} of 8 criteria passed in {:.2}s", 8 - failed, total.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
