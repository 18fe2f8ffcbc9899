use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use homochern::{exit_code, parse_scenario, run, text, Diagnostic, Model, Options, EXIT_INVALID};

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Text,
}

/// Run the checks and computations listed in a scenario file.
#[derive(Parser, Debug)]
#[command(name = "homochern", version)]
struct Cli {
    /// Scenario file (JSON).
    scenario: PathBuf,
    /// Probe functions are all monomials up to this degree.
    #[arg(long)]
    probe_degree: Option<u32>,
    /// Divide each Tr_s(k^p) by p!.
    #[arg(long)]
    normalize: bool,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

fn invalid(file: &str, diags: &[Diagnostic]) -> ExitCode {
    for d in diags {
        eprintln!("{file}: {d}");
    }
    ExitCode::from(EXIT_INVALID as u8)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let file = cli.scenario.display().to_string();
    let source = match fs::read_to_string(&cli.scenario) {
        Ok(s) => s,
        Err(e) => return invalid(&file, &[Diagnostic::at("", e.to_string())]),
    };
    let scenario = match parse_scenario(&source) {
        Ok(s) => s,
        Err(d) => return invalid(&file, &d),
    };
    let model = match Model::build(&scenario, cli.probe_degree) {
        Ok(m) => m,
        Err(d) => return invalid(&file, &d),
    };
    let report = run(&model, Options { normalize: cli.normalize });
    let body = match cli.format {
        Format::Json => report.to_json(),
        Format::Text => text::render(&report),
    };
    let written = match &cli.out {
        Some(path) => fs::write(path, body.as_bytes()),
        None => std::io::stdout().lock().write_all(body.as_bytes()),
    };
    if let Err(e) = written {
        eprintln!("cannot write report: {e}");
        return ExitCode::from(EXIT_INVALID as u8);
    }
    if !report.passed {
        eprint!("{}", text::failures(&report));
    }
    ExitCode::from(exit_code(&report) as u8)
}
