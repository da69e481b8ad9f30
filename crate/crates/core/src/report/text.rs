use std::fmt::Write;

use crate::coverage::{BalanceClass, CategorySummary, GapReport};
use crate::diagnostic::{self, Diagnostic, Severity};
use crate::lifecycle::{ReadinessDecision, TargetCheck};
use crate::space::DIMENSIONS;

/// `file:line:col: severity[RULE]: message`, one per line, then a summary.
/// Diagnostics without a location are reported against `file`.
pub fn render_text(diagnostics: &[Diagnostic], file: &str) -> String {
    let mut sorted = diagnostics.to_vec();
    diagnostic::sort(&mut sorted);
    let mut out = String::new();
    for d in &sorted {
        match &d.span {
            Some(span) => write!(out, "{span}: "),
            None => write!(out, "{file}: "),
        }
        .unwrap();
        writeln!(out, "{}[{}]: {}", d.severity, d.rule_id, d.message).unwrap();
    }
    out.push_str(&summary_line(&sorted));
    out.push('\n');
    out
}

pub fn summary_line(diagnostics: &[Diagnostic]) -> String {
    let errors = diagnostics.iter().filter(|d| d.severity == Severity::Error).count();
    let warnings = diagnostics.len() - errors;
    format!("{} {}, {} {}", errors, plural(errors, "error"), warnings, plural(warnings, "warning"))
}

fn plural(n: usize, word: &str) -> String {
    if n == 1 {
        word.to_string()
    } else {
        format!("{word}s")
    }
}

pub fn render_coverage(gaps: &GapReport, balance: BalanceClass, categories: &[CategorySummary]) -> String {
    let mut out = String::new();
    writeln!(out, "behavioral space coverage").unwrap();
    writeln!(out, "  covered  {}", gaps.overall).unwrap();
    writeln!(out, "  strong   {}", gaps.strong).unwrap();
    writeln!(out, "  weak     {}", gaps.weak).unwrap();
    writeln!(out).unwrap();
    writeln!(out, "{:<12} {:<22} {:>8} {:>8}", "dimension", "value", "covered", "strong").unwrap();
    for dim in DIMENSIONS {
        for m in gaps.marginals.iter().filter(|m| m.dimension == dim) {
            writeln!(out, "{:<12} {:<22} {:>8} {:>8}", m.dimension, m.value, m.covered.to_string(), m.strong.to_string())
                .unwrap();
        }
    }
    writeln!(out).unwrap();
    writeln!(out, "aggregation balance: {balance}").unwrap();
    let advisory = balance.advisory();
    if !advisory.is_empty() {
        writeln!(out, "  {advisory}").unwrap();
    }
    writeln!(out).unwrap();
    writeln!(out, "hazard categories").unwrap();
    for c in categories {
        writeln!(out, "  {:<24} {} hazards, {} criteria; {}", c.category.to_string(), c.hazards, c.criteria, c.note)
            .unwrap();
    }
    out
}

fn check_line(c: &TargetCheck) -> String {
    let bound = c.upper_bound.map_or_else(|| "n/a".to_string(), |ub| format!("{ub:.6e}"));
    format!(
        "  {} {}: upper bound {} per {} at {} confidence, target {:e} ({} `{}` events over {} {})",
        c.criterion_id, c.status, bound, c.exposure_unit, c.confidence, c.target, c.events, c.event_definition,
        c.exposure, c.exposure_unit
    )
}

pub fn render_review(decision: &ReadinessDecision) -> String {
    let mut out = String::new();
    writeln!(out, "readiness review: {}", decision.status).unwrap();
    if !decision.checks.is_empty() {
        writeln!(out, "target checks").unwrap();
        for c in &decision.checks {
            writeln!(out, "{}", check_line(c)).unwrap();
        }
    }
    if !decision.blockers.is_empty() {
        writeln!(out, "blockers").unwrap();
        for b in &decision.blockers {
            writeln!(out, "  {} [{}]: {}", b.subject, b.cause, b.reason).unwrap();
        }
    }
    out
}
