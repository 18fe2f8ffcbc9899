use std::path::PathBuf;
use std::process::{Command, Output};

use homochern::report::{FormTerm, TaskReport};
use homochern::{parse_scenario, run, Model, Options};

fn scenario_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("scenarios").join(name)
}

fn homochern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homochern")).args(args).output().unwrap()
}

fn run_text(text: &str) -> homochern::Report {
    let s = parse_scenario(text).unwrap();
    run(&Model::build(&s, None).unwrap(), Options::default())
}

fn term(indices: &[usize], coeff: &str) -> FormTerm {
    FormTerm {
        indices: indices.to_vec(),
        coeff: coeff.into(),
    }
}

#[test]
fn minimal_scenario() {
    let r = run_text(
        r#"{"chart": ["x"], "bundle": {"r0": 1, "r1": 0},
            "connections": {"nabla": {"type": "matrix", "theta": [[["0"]]]}},
            "tasks": [{"task": "chern", "connection": "nabla", "p": [1]}]}"#,
    );
    assert!(r.passed);
    let TaskReport::Chern { results, .. } = &r.tasks[0] else { panic!() };
    assert!(results[0].form.is_empty());
}

#[test]
fn dangling_reference() {
    let s = parse_scenario(
        r#"{"chart": ["x"], "bundle": {"r0": 1, "r1": 0},
            "connections": {"nabla": {"type": "matrix"}},
            "tasks": [{"task": "chern", "connection": "nabla2", "p": [1]}]}"#,
    )
    .unwrap();
    let diags = Model::build(&s, None).unwrap_err();
    assert_eq!(diags.len(), 1);
    assert_eq!(diags[0].path, "tasks[0].connection");
    assert!(diags[0].message.contains("nabla2"));
}

#[test]
fn unknown_variable_is_positioned() {
    let s = parse_scenario(
        r#"{"chart": ["x", "y"], "bundle": {"r0": 1, "r1": 0},
            "connections": {"nabla": {"type": "matrix", "theta": [[["0"]], [["x + q"]]]}}}"#,
    )
    .unwrap();
    let diags = Model::build(&s, None).unwrap_err();
    assert_eq!(diags[0].path, "connections.nabla.theta[1][0][0]");
    assert!(diags[0].message.contains("\"x + q\""), "{}", diags[0].message);
}

#[test]
fn shape_mismatch_is_reported() {
    let s = parse_scenario(
        r#"{"chart": ["x"], "bundle": {"r0": 1, "r1": 1},
            "connections": {"nabla": {"type": "matrix", "theta": [[["0"]]]}}}"#,
    )
    .unwrap();
    let diags = Model::build(&s, None).unwrap_err();
    assert_eq!(diags[0].path, "connections.nabla.theta[0]");
    assert_eq!(diags[0].message, "expected 2 rows, found 1");
}

#[test]
fn syntax_error_has_line_and_column() {
    let diags = parse_scenario("{\n  \"chart\": [\"x\",]\n}").unwrap_err();
    assert_eq!(diags[0].line, Some(2));
    assert!(diags[0].column.is_some());
}

#[test]
fn bundled_scenarios_round_trip() {
    for name in ["aff1.json", "aff1_corrupted.json", "line_xdy.json", "superconn.json", "tm_plus_line.json"] {
        let text = std::fs::read_to_string(scenario_path(name)).unwrap();
        let s = parse_scenario(&text).unwrap();
        assert_eq!(parse_scenario(&s.to_json()).unwrap(), s, "{name}");
    }
}

#[test]
fn line_xdy_chern_and_transgression() {
    let r = run_text(&std::fs::read_to_string(scenario_path("line_xdy.json")).unwrap());
    assert!(r.passed);
    let TaskReport::Chern { results, .. } = &r.tasks[1] else { panic!() };
    assert_eq!(results[0].form, vec![term(&[1, 2], "1")]);
    let TaskReport::Transgress { results, .. } = &r.tasks[2] else { panic!() };
    assert_eq!(results[0].cs, vec![term(&[2], "x")]);
    assert!(results[0].exactness_residual.is_empty());
}

#[test]
fn adjoint_task_on_aff1() {
    let r = run_text(&std::fs::read_to_string(scenario_path("aff1.json")).unwrap());
    let TaskReport::Adjoint { passed, sign, canonical_flatness, per_p, .. } = &r.tasks[3] else { panic!() };
    assert!(passed);
    assert_eq!(*sign, -1);
    assert!(canonical_flatness.passed);
    for t in per_p {
        assert!(t.g_minus_tm.chern_canonical.is_empty());
        assert!(t.exactness_residual.is_empty() && t.pullback_residual.is_empty());
    }
}

#[test]
fn golden_report_and_determinism() {
    let path = scenario_path("aff1.json");
    let a = homochern(&[path.to_str().unwrap()]);
    let b = homochern(&[path.to_str().unwrap()]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let golden = std::fs::read(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden/aff1.json")).unwrap();
    assert_eq!(a.stdout, golden);
}

#[test]
fn corrupted_structure_fails_with_residual() {
    let out = homochern(&[scenario_path("aff1_corrupted.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8(out.stderr).unwrap();
    assert!(stderr.contains("Jacobi on (x*e1, e1, e2): jacobiator[e1] = x - 1"), "{stderr}");
    assert!(stderr.contains("anchor morphism"), "{stderr}");
}

#[test]
fn invalid_scenario_exits_2() {
    let dir = std::env::temp_dir().join(format!("homochern-invalid-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("bad.json");
    std::fs::write(&file, r#"{"chart": ["x"], "tasks": [{"task": "check", "connection": "nope"}]}"#).unwrap();
    let out = homochern(&[file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8(out.stderr).unwrap().contains("tasks[0].connection: unknown connection \"nope\""));
}

#[test]
fn normalize_divides_by_factorial() {
    let text = r#"{"chart": ["x", "y", "z", "w"], "bundle": {"r0": 1, "r1": 0},
        "connections": {"nabla": {"type": "matrix", "theta": [[["0"]], [["x"]], [["0"]], [["z"]]]}},
        "tasks": [{"task": "chern", "connection": "nabla", "p": [2]}]}"#;
    let s = parse_scenario(text).unwrap();
    let m = Model::build(&s, None).unwrap();
    let raw = run(&m, Options::default());
    let norm = run(&m, Options { normalize: true });
    let get = |r: &homochern::Report| match &r.tasks[0] {
        TaskReport::Chern { results, .. } => results[0].form.clone(),
        _ => panic!(),
    };
    assert_eq!(get(&raw), vec![term(&[1, 2, 3, 4], "2")]);
    assert_eq!(get(&norm), vec![term(&[1, 2, 3, 4], "1")]);
}

#[test]
fn text_format_and_out_file() {
    let dir = std::env::temp_dir().join(format!("homochern-out-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let file = dir.join("report.txt");
    let out = homochern(&[
        scenario_path("superconn.json").to_str().unwrap(),
        "--format",
        "text",
        "--probe-degree",
        "1",
        "--out",
        file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&file).unwrap();
    assert!(text.contains("probe degree 1"));
    assert!(text.contains("p = 1, degree 2: (1)·e^1∧e^2"), "{text}");
}
