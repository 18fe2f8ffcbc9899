//! Scenario-driven front end for `homochern-core`: JSON scenario files,
//! validation with positioned diagnostics, task execution and reports.

pub mod model;
pub mod report;
pub mod run;
pub mod scenario;
pub mod text;

pub use model::Model;
pub use report::Report;
pub use run::{run, Options};
pub use scenario::{parse_scenario, Diagnostic, Scenario};

/// Process exit status for a finished run.
pub fn exit_code(report: &Report) -> i32 {
    if report.passed {
        0
    } else {
        1
    }
}

/// Exit status for malformed or invalid scenarios.
pub const EXIT_INVALID: i32 = 2;
