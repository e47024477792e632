//! Command-line front end: reads loop files, runs the analysis and prints
//! reports.

pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use loopcase_core::driver::{analyze, check_report, AnalysisReport, Config};
use loopcase_core::linarith::Semantics;
use loopcase_core::model::{parse_loop_spec, LoopSpec};
use loopcase_core::oracle::cross_validate;

pub use report::{render_text, ReportDto};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_VIOLATION: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "loopcase", version, about = "Termination case analysis for single linear loops")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Analyze loop files and print one report per file.
    Analyze(AnalyzeArgs),
}

#[derive(clap::Args, Debug, Clone)]
pub struct AnalyzeArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, default_value_t = 4)]
    pub max_depth: usize,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..))]
    pub max_support: u64,
    /// Override the semantics declared in the file.
    #[arg(long, value_enum)]
    pub semantics: Option<SemanticsArg>,
    /// Re-check the report and cross-validate it against concrete runs.
    #[arg(long)]
    pub validate: bool,
    #[arg(long, default_value_t = 1000)]
    pub samples: usize,
    #[arg(long, default_value_t = 100_000)]
    pub fuel: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Text,
    Json,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum SemanticsArg {
    Int,
    Rat,
}

/// Parses `argv` and runs the command. Returns the process exit code.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{text}");
            } else {
                let _ = write!(out, "{text}");
            }
            return code;
        }
    };
    match cli.command {
        Command::Analyze(args) => run_analyze(&args, out, err),
    }
}

/// Reads and parses one loop file. Errors are formatted `file:line:col: msg`.
pub fn load(path: &Path, semantics: Option<SemanticsArg>) -> Result<LoopSpec, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut spec = parse_loop_spec(&text).map_err(|e| format!("{}:{e}", path.display()))?;
    spec.name = path.file_stem().map_or_else(|| "loop".into(), |s| s.to_string_lossy().into_owned());
    match semantics {
        Some(SemanticsArg::Int) => spec.semantics = Semantics::Int,
        Some(SemanticsArg::Rat) => spec.semantics = Semantics::Rat,
        None => {}
    }
    Ok(spec)
}

fn run_analyze(args: &AnalyzeArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let cfg = Config { max_depth: args.max_depth, max_support: args.max_support as usize };
    let mut code = EXIT_OK;
    for path in &args.files {
        let spec = match load(path, args.semantics) {
            Ok(s) => s,
            Err(msg) => {
                let _ = writeln!(err, "error: {msg}");
                code = code.max(EXIT_USAGE);
                continue;
            }
        };
        let report = analyze(&spec, cfg);
        let mut problems = check_report(&spec, &report);
        let mut validation = None;
        if args.validate {
            match cross_validate(&spec, &report, args.samples, args.fuel, args.seed) {
                Ok(cs) => {
                    for c in &cs {
                        let state: Vec<String> = c.state.iter().map(|(v, q)| format!("{v} = {q}")).collect();
                        problems.push(format!(
                            "[{}] claimed {} but the run from {} gave {:?}",
                            c.region,
                            c.claimed,
                            state.join(", "),
                            c.outcome
                        ));
                    }
                    validation = Some(format!("validation: {} contradictions", cs.len()));
                }
                Err(e) => validation = Some(format!("validation: skipped ({e})")),
            }
        }
        let _ = write!(out, "{}", format_report(&report, args.format, validation.as_deref()));
        for p in &problems {
            let _ = writeln!(err, "{}: violation: {p}", path.display());
        }
        if !problems.is_empty() {
            code = EXIT_VIOLATION;
        }
    }
    code
}

/// The text form ends with `overall: STATUS`; the JSON form is one pretty
/// printed object followed by a newline.
pub fn format_report(report: &AnalysisReport, format: Format, validation: Option<&str>) -> String {
    match format {
        Format::Text => {
            let mut s = render_text(report);
            if let Some(v) = validation {
                s.push_str(v);
                s.push('\n');
            }
            s.push_str(&format!("overall: {}\n", report.overall));
            s
        }
        Format::Json => {
            let mut s = serde_json::to_string_pretty(&ReportDto::from(report)).expect("report serializes");
            s.push('\n');
            s
        }
    }
}
