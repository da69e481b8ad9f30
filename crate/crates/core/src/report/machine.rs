use std::collections::BTreeSet;

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coverage::{
    aggregation_balance_unchecked, category_summary, coverage_map_unchecked, gap_report, BalanceClass, CategorySummary,
    Fraction, Marginal, Signal,
};
use crate::diagnostic::{self, Diagnostic};
use crate::lifecycle::ReadinessDecision;
use crate::model::{ContextBlock, SafetyCase};

use super::trace::{trace_matrix, TraceMatrix};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ToolInfo {
    pub name: &'static str,
    pub version: &'static str,
}

impl ToolInfo {
    pub fn current() -> Self {
        ToolInfo { name: env!("CARGO_PKG_NAME"), version: env!("CARGO_PKG_VERSION") }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct InputDigest {
    /// `case`, `ledger` or `config`.
    pub role: &'static str,
    pub name: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(role: &'static str, name: impl Into<String>, bytes: &[u8]) -> Self {
        InputDigest { role, name: name.into(), sha256: hex::encode(Sha256::digest(bytes)) }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseSummary {
    pub id: String,
    pub context: ContextBlock,
    pub hazards: Vec<String>,
    pub methodologies: Vec<String>,
    pub indicators: Vec<String>,
    pub criteria: Vec<String>,
    pub evidence: Vec<String>,
    pub claims: Vec<String>,
    pub categories: Vec<CategorySummary>,
}

impl CaseSummary {
    pub fn of(case: &SafetyCase) -> Self {
        fn ids<T>(items: &[T], id: impl Fn(&T) -> &String) -> Vec<String> {
            items.iter().map(|x| id(x).clone()).collect()
        }
        CaseSummary {
            id: case.id().to_string(),
            context: case.context().clone(),
            hazards: ids(case.hazards(), |x| &x.id),
            methodologies: ids(case.methodologies(), |x| &x.id),
            indicators: ids(case.indicators(), |x| &x.id),
            criteria: ids(case.criteria(), |x| &x.id),
            evidence: ids(case.evidence(), |x| &x.id),
            claims: ids(case.claims(), |x| &x.id),
            categories: category_summary(case),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosticsSection {
    pub errors: usize,
    pub warnings: usize,
    pub items: Vec<Diagnostic>,
}

impl DiagnosticsSection {
    pub fn of(diagnostics: &[Diagnostic]) -> Self {
        let mut items = diagnostics.to_vec();
        diagnostic::sort(&mut items);
        let errors = items.iter().filter(|d| d.is_error()).count();
        DiagnosticsSection { errors, warnings: items.len() - errors, items }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CellEntry {
    pub cell: String,
    pub signal: Signal,
    pub contributors: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Balance {
    pub class: BalanceClass,
    pub advisory: &'static str,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CoverageSection {
    pub overall: Fraction,
    pub strong: Fraction,
    pub weak: Fraction,
    pub cells: Vec<CellEntry>,
    pub uncovered: Vec<String>,
    pub marginals: Vec<Marginal>,
    pub balance: Balance,
}

impl CoverageSection {
    pub fn of(case: &SafetyCase) -> Self {
        let map = coverage_map_unchecked(case);
        let gaps = gap_report(&map);
        let class = aggregation_balance_unchecked(case);
        CoverageSection {
            overall: gaps.overall,
            strong: gaps.strong,
            weak: gaps.weak,
            cells: map
                .iter()
                .map(|(cell, signal)| CellEntry { cell: cell.key(), signal, contributors: map.contributors(&cell) })
                .collect(),
            uncovered: gaps.uncovered.iter().map(|c| c.key()).collect(),
            marginals: gaps.marginals,
            balance: Balance { class, advisory: class.advisory() },
        }
    }
}

/// Everything known about one invocation. Regenerating from the same inputs
/// gives the same document apart from `generated_at`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReportDocument {
    pub tool: ToolInfo,
    pub input_digests: Vec<InputDigest>,
    pub case: Option<CaseSummary>,
    pub diagnostics: DiagnosticsSection,
    pub coverage: Option<CoverageSection>,
    pub trace: Option<TraceMatrix>,
    pub review: Option<ReadinessDecision>,
    pub generated_at: String,
}

impl ReportDocument {
    pub fn new(
        case: Option<&SafetyCase>,
        diagnostics: &[Diagnostic],
        review: Option<ReadinessDecision>,
        input_digests: Vec<InputDigest>,
        generated_at: impl Into<String>,
    ) -> Self {
        ReportDocument {
            tool: ToolInfo::current(),
            input_digests,
            case: case.map(CaseSummary::of),
            diagnostics: DiagnosticsSection::of(diagnostics),
            coverage: case.map(CoverageSection::of),
            trace: case.map(trace_matrix),
            review,
            generated_at: generated_at.into(),
        }
    }
}

/// Pretty-printed JSON with a trailing newline.
pub fn render_machine(report: &ReportDocument) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serializes");
    out.push('\n');
    out
}
