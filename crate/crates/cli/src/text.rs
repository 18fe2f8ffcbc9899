//! Human-readable summaries of reports.

use std::fmt::Write;

use crate::report::{CheckJson, FormTerm, Report, TaskReport};

fn verdict(passed: bool) -> &'static str {
    if passed {
        "ok"
    } else {
        "FAILED"
    }
}

/// `coeff·e^1∧e^2 + …`, or `0`.
pub fn form(terms: &[FormTerm]) -> String {
    if terms.is_empty() {
        return "0".into();
    }
    terms
        .iter()
        .map(|t| {
            let basis: Vec<String> = t.indices.iter().map(|i| format!("e^{i}")).collect();
            if basis.is_empty() {
                format!("({})", t.coeff)
            } else {
                format!("({})·{}", t.coeff, basis.join("∧"))
            }
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

fn check(out: &mut String, c: &CheckJson, indent: &str) {
    let _ = writeln!(out, "{indent}{}: {} ({} checks)", c.name, verdict(c.passed), c.checks_run);
    for v in &c.violations {
        let parts: Vec<String> = v.residual.iter().map(|r| format!("{} = {}", r.component, r.value)).collect();
        let _ = writeln!(out, "{indent}  {} on {}: {}", v.identity, v.probe, parts.join(", "));
    }
}

pub fn render(report: &Report) -> String {
    let mut out = String::new();
    if let Some(name) = &report.name {
        let _ = writeln!(out, "scenario {name}");
    }
    let _ = writeln!(
        out,
        "chart ({}), probe degree {}{}",
        report.chart.join(", "),
        report.probe_degree,
        if report.normalize { ", normalized by 1/p!" } else { "" }
    );
    if let Some(c) = &report.carrier_check {
        check(&mut out, c, "");
    }
    for (n, task) in report.tasks.iter().enumerate() {
        let n = n + 1;
        match task {
            TaskReport::Check { connection, kind, passed, sign, checks, informational } => {
                let sign = sign.map(|s| format!(", homotopy sign {s:+}")).unwrap_or_default();
                let _ = writeln!(out, "[{n}] check {connection} ({kind}{sign}): {}", verdict(*passed));
                for c in checks {
                    check(&mut out, c, "    ");
                }
                for c in informational {
                    let _ = writeln!(out, "    (informational) {}: {} ({} checks)", c.name, if c.passed { "holds" } else { "fails" }, c.checks_run);
                }
            }
            TaskReport::Chern { connection, passed, results, .. } => {
                let _ = writeln!(out, "[{n}] chern {connection}: {}", verdict(*passed));
                for r in results {
                    let _ = writeln!(out, "    p = {}: {}", r.p, form(&r.form));
                    if !r.closedness_residual.is_empty() {
                        let _ = writeln!(out, "      d = {}", form(&r.closedness_residual));
                    }
                }
            }
            TaskReport::Transgress { from, to, passed, results, .. } => {
                let _ = writeln!(out, "[{n}] transgress {from} -> {to}: {}", verdict(*passed));
                for r in results {
                    let _ = writeln!(out, "    p = {}: cs = {}", r.p, form(&r.cs));
                    if !r.exactness_residual.is_empty() {
                        let _ = writeln!(out, "      residual = {}", form(&r.exactness_residual));
                    }
                }
            }
            TaskReport::Adjoint { aux, passed, sign, carrier_check, uth, higher, canonical_flatness, per_p, .. } => {
                let _ = writeln!(out, "[{n}] adjoint with {aux}: {}, homotopy sign {sign:+}", verdict(*passed));
                for c in [carrier_check, uth, higher, canonical_flatness] {
                    check(&mut out, c, "    ");
                }
                for t in per_p {
                    let _ = writeln!(out, "    p = {} (g - TM): Ch canonical = {}", t.p, form(&t.g_minus_tm.chern_canonical));
                    let _ = writeln!(out, "      Ch induced = {}", form(&t.g_minus_tm.chern_induced));
                    let _ = writeln!(out, "      cs = {}", form(&t.g_minus_tm.cs));
                    let _ = writeln!(out, "      exactness residual = {}", form(&t.exactness_residual));
                    let _ = writeln!(out, "      pullback residual = {}", form(&t.pullback_residual));
                }
            }
            TaskReport::Super { connection, passed, results, .. } => {
                let _ = writeln!(out, "[{n}] super {connection}: {}", verdict(*passed));
                for r in results {
                    for c in &r.components {
                        let _ = writeln!(out, "    p = {}, degree {}: {}", r.p, c.degree, form(&c.form));
                    }
                }
            }
            TaskReport::Error { kind, error, .. } => {
                let _ = writeln!(out, "[{n}] {kind}: FAILED: {error}");
            }
        }
    }
    let _ = writeln!(out, "{}", if report.passed { "all checks passed" } else { "some checks FAILED" });
    out
}

/// Every violated check and failed task, one block per failure.
pub fn failures(report: &Report) -> String {
    let mut out = String::new();
    if let Some(c) = report.carrier_check.as_ref().filter(|c| !c.passed) {
        check(&mut out, c, "");
    }
    for (n, task) in report.tasks.iter().enumerate().filter(|(_, t)| !t.passed()) {
        let n = n + 1;
        match task {
            TaskReport::Check { connection, checks, .. } => {
                let _ = writeln!(out, "[{n}] check {connection} failed");
                for c in checks.iter().filter(|c| !c.passed) {
                    check(&mut out, c, "    ");
                }
            }
            TaskReport::Adjoint { carrier_check, uth, higher, canonical_flatness, per_p, .. } => {
                let _ = writeln!(out, "[{n}] adjoint failed");
                for c in [carrier_check, uth, higher, canonical_flatness].into_iter().filter(|c| !c.passed) {
                    check(&mut out, c, "    ");
                }
                for t in per_p {
                    let _ = writeln!(out, "    p = {}: exactness residual = {}, pullback residual = {}", t.p, form(&t.exactness_residual), form(&t.pullback_residual));
                }
            }
            TaskReport::Error { kind, error, .. } => {
                let _ = writeln!(out, "[{n}] {kind}: {error}");
            }
            other => {
                let _ = writeln!(out, "[{n}] {} failed", task_kind(other));
            }
        }
    }
    out
}

fn task_kind(t: &TaskReport) -> &'static str {
    match t {
        TaskReport::Check { .. } => "check",
        TaskReport::Chern { .. } => "chern",
        TaskReport::Transgress { .. } => "transgress",
        TaskReport::Adjoint { .. } => "adjoint",
        TaskReport::Super { .. } => "super",
        TaskReport::Error { .. } => "task",
    }
}
