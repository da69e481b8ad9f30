use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::coverage::{aggregation_balance_unchecked, category_summary, coverage_map_unchecked, gap_report};
use crate::diagnostic::Diagnostic;
use crate::dsl::{parse_bytes, serialize, ParseResult};
use crate::lifecycle::{readiness_review, ExposureLedger, ReadinessDecision};
use crate::validator::{parse_threshold, validate_parsed, RuleConfig};

use super::heatmap::render_heatmap;
use super::machine::{render_machine, InputDigest, ReportDocument};
use super::text::{render_coverage, render_review, render_text, summary_line};
use super::trace::{render_trace, trace_matrix};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FINDINGS: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "aurcase", version, about = "Check, analyze and gate automated-driving safety cases")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Text,
    Machine,
}

#[derive(Debug, Args)]
struct Common {
    /// Safety case document
    file: PathBuf,
    /// Rule configuration file
    #[arg(long, env = "AURCASE_CONFIG")]
    config: Option<PathBuf>,
    /// Require the lifecycle context fields
    #[arg(long)]
    review_ready: bool,
    /// Minimum fraction of the behavioral space with any signal
    #[arg(long, value_parser = threshold)]
    coverage_threshold: Option<f64>,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
}

fn threshold(s: &str) -> Result<f64, String> {
    parse_threshold(s)
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse and validate
    Check(Common),
    /// Coverage of the behavioral space, gaps and aggregation balance
    Coverage(Common),
    /// Hazard to evidence traceability matrix
    Trace(Common),
    /// Readiness gate against an exposure ledger
    Review {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ledger: PathBuf,
    },
    /// Write every report into a directory
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        ledger: Option<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print the canonical form of a document
    Fmt {
        file: PathBuf,
    },
}

/// Failure that ends the run with exit code 2.
struct Usage(String);

struct Loaded {
    display: String,
    parsed: ParseResult,
    config: RuleConfig,
    diagnostics: Vec<Diagnostic>,
    digests: Vec<InputDigest>,
}

fn read(path: &Path, what: &str) -> Result<Vec<u8>, Usage> {
    std::fs::read(path).map_err(|e| Usage(format!("cannot read {what} `{}`: {e}", path.display())))
}

fn base_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
}

fn load(common: &Common) -> Result<Loaded, Usage> {
    let display = common.file.display().to_string();
    let bytes = read(&common.file, "document")?;
    let mut digests = vec![InputDigest::of("case", base_name(&common.file), &bytes)];
    let mut config = match &common.config {
        Some(path) => {
            let text = read(path, "config")?;
            digests.push(InputDigest::of("config", base_name(path), &text));
            let text = String::from_utf8(text).map_err(|_| Usage(format!("config `{}` is not UTF-8", path.display())))?;
            RuleConfig::parse(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))?
        }
        None => RuleConfig::default(),
    };
    config.review_ready |= common.review_ready;
    if common.coverage_threshold.is_some() {
        config.coverage_threshold = common.coverage_threshold;
    }
    let parsed = parse_bytes(&bytes, &display);
    let diagnostics = validate_parsed(&parsed, &config);
    Ok(Loaded { display, parsed, config, diagnostics, digests })
}

fn load_ledger(path: &Path, digests: &mut Vec<InputDigest>) -> Result<ExposureLedger, Usage> {
    let bytes = read(path, "ledger")?;
    digests.push(InputDigest::of("ledger", base_name(path), &bytes));
    let text = String::from_utf8(bytes).map_err(|_| Usage(format!("ledger `{}` is not UTF-8", path.display())))?;
    ExposureLedger::parse(&text).map_err(|e| Usage(format!("{}: {e}", path.display())))
}

fn timestamp() -> String {
    chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Secs, true)
}

fn has_errors(diagnostics: &[Diagnostic]) -> bool {
    diagnostics.iter().any(Diagnostic::is_error)
}

fn document(l: &Loaded, review: Option<ReadinessDecision>) -> ReportDocument {
    ReportDocument::new(l.parsed.case.as_ref(), &l.diagnostics, review, l.digests.clone(), timestamp())
}

/// Parse failures stop every subcommand with the diagnostics on the error
/// stream.
fn require_case(l: &Loaded, err: &mut dyn Write) -> Result<(), i32> {
    if l.parsed.is_fatal() {
        let _ = err.write_all(render_text(&l.diagnostics, &l.display).as_bytes());
        return Err(EXIT_USAGE);
    }
    Ok(())
}

fn report_errors(l: &Loaded, err: &mut dyn Write) -> i32 {
    let errors: Vec<Diagnostic> = l.diagnostics.iter().filter(|d| d.is_error()).cloned().collect();
    if errors.is_empty() {
        EXIT_OK
    } else {
        let _ = err.write_all(render_text(&errors, &l.display).as_bytes());
        EXIT_FINDINGS
    }
}

/// Run the command line. Exit codes: 0 clean, 1 error diagnostics or a
/// blocked review, 2 usage or parse failure.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                let _ = err.write_all(text.as_bytes());
                EXIT_USAGE
            } else {
                let _ = out.write_all(text.as_bytes());
                EXIT_OK
            };
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(code) => code,
        Err(Usage(message)) => {
            let _ = writeln!(err, "aurcase: {message}");
            EXIT_USAGE
        }
    }
}

fn dispatch(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Usage> {
    let io = |e: std::io::Error| Usage(format!("write failed: {e}"));
    match command {
        Command::Check(common) => {
            let l = load(&common)?;
            let text = match common.format {
                Format::Text => render_text(&l.diagnostics, &l.display),
                Format::Machine => render_machine(&document(&l, None)),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if l.parsed.is_fatal() {
                EXIT_USAGE
            } else if has_errors(&l.diagnostics) {
                EXIT_FINDINGS
            } else {
                EXIT_OK
            })
        }
        Command::Coverage(common) => {
            let l = load(&common)?;
            if let Err(code) = require_case(&l, err) {
                return Ok(code);
            }
            let case = l.parsed.case.as_ref().expect("case present");
            let text = match common.format {
                Format::Text => render_coverage(
                    &gap_report(&coverage_map_unchecked(case)),
                    aggregation_balance_unchecked(case),
                    &category_summary(case),
                ),
                Format::Machine => render_machine(&document(&l, None)),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(report_errors(&l, err))
        }
        Command::Trace(common) => {
            let l = load(&common)?;
            if let Err(code) = require_case(&l, err) {
                return Ok(code);
            }
            let case = l.parsed.case.as_ref().expect("case present");
            let text = match common.format {
                Format::Text => render_trace(&trace_matrix(case)),
                Format::Machine => render_machine(&document(&l, None)),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(report_errors(&l, err))
        }
        Command::Review { common, ledger } => {
            let mut l = load(&common)?;
            let ledger = load_ledger(&ledger, &mut l.digests)?;
            if let Err(code) = require_case(&l, err) {
                return Ok(code);
            }
            let case = l.parsed.case.as_ref().expect("case present");
            let decision = readiness_review(case, &ledger, &l.config);
            let approved = decision.is_approved();
            let text = match common.format {
                Format::Text => render_review(&decision),
                Format::Machine => render_machine(&document(&l, Some(decision))),
            };
            out.write_all(text.as_bytes()).map_err(io)?;
            Ok(if approved { EXIT_OK } else { EXIT_FINDINGS })
        }
        Command::Report { common, ledger, out: dir } => {
            let mut l = load(&common)?;
            let ledger = ledger.map(|p| load_ledger(&p, &mut l.digests)).transpose()?;
            if let Err(code) = require_case(&l, err) {
                return Ok(code);
            }
            let case = l.parsed.case.as_ref().expect("case present");
            let decision = ledger.map(|ledger| readiness_review(case, &ledger, &l.config));
            let map = coverage_map_unchecked(case);
            let trace = render_trace(&trace_matrix(case));

            let mut text = format!("safety case {}\n\ndiagnostics\n", case.id());
            text.push_str(&render_text(&l.diagnostics, &l.display));
            text.push('\n');
            text.push_str(&render_coverage(&gap_report(&map), aggregation_balance_unchecked(case), &category_summary(case)));
            text.push_str("\ntraceability\n");
            text.push_str(&trace);
            if let Some(d) = &decision {
                text.push('\n');
                text.push_str(&render_review(d));
            }

            let blocked = decision.as_ref().is_some_and(|d| !d.is_approved());
            let machine = render_machine(&document(&l, decision));
            std::fs::create_dir_all(&dir).map_err(|e| Usage(format!("cannot create `{}`: {e}", dir.display())))?;
            for (name, body) in [
                ("report.txt", text),
                ("report.json", machine),
                ("heatmap.svg", render_heatmap(&map)),
                ("trace.txt", trace),
            ] {
                let path = dir.join(name);
                std::fs::write(&path, body).map_err(|e| Usage(format!("cannot write `{}`: {e}", path.display())))?;
            }
            writeln!(out, "wrote report.txt, report.json, heatmap.svg, trace.txt to {}", dir.display()).map_err(io)?;
            writeln!(out, "{}", summary_line(&l.diagnostics)).map_err(io)?;
            Ok(if has_errors(&l.diagnostics) || blocked { EXIT_FINDINGS } else { EXIT_OK })
        }
        Command::Fmt { file } => {
            let display = file.display().to_string();
            let parsed = parse_bytes(&read(&file, "document")?, &display);
            match &parsed.case {
                Some(case) => {
                    out.write_all(serialize(case).as_bytes()).map_err(io)?;
                    Ok(EXIT_OK)
                }
                None => {
                    err.write_all(render_text(&parsed.diagnostics, &display).as_bytes()).map_err(io)?;
                    Ok(EXIT_USAGE)
                }
            }
        }
    }
}
