use std::collections::BTreeSet;
use std::fmt::Write;

use serde::Serialize;

use crate::model::SafetyCase;

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceRow {
    pub hazard_id: String,
    pub criterion_ids: Vec<String>,
    pub claim_ids: Vec<String>,
    pub evidence_ids: Vec<String>,
    /// Every stage of the chain is non-empty.
    pub complete: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TraceMatrix {
    pub rows: Vec<TraceRow>,
}

impl TraceMatrix {
    pub fn row(&self, hazard_id: &str) -> Option<&TraceRow> {
        self.rows.iter().find(|r| r.hazard_id == hazard_id)
    }

    pub fn is_complete(&self) -> bool {
        self.rows.iter().all(|r| r.complete)
    }
}

fn sorted(set: BTreeSet<String>) -> Vec<String> {
    let mut v: Vec<String> = set.into_iter().collect();
    v.sort_by(|a, b| natord::compare(a, b));
    v
}

/// One row per hazard: hazard, the criteria naming it, the top claims
/// arguing those criteria, and the evidence cited anywhere in those claims.
pub fn trace_matrix(case: &SafetyCase) -> TraceMatrix {
    let rows = case
        .hazards()
        .iter()
        .map(|h| {
            let criteria: BTreeSet<String> = case
                .criteria()
                .iter()
                .filter(|c| c.hazard_ids.contains(&h.id))
                .map(|c| c.id.clone())
                .collect();
            let claims: Vec<_> = case
                .claims()
                .iter()
                .filter(|c| c.criterion_id.as_ref().is_some_and(|id| criteria.contains(id)))
                .collect();
            let evidence: BTreeSet<String> = claims.iter().flat_map(|c| c.cited_evidence()).collect();
            let claim_ids: BTreeSet<String> = claims.iter().map(|c| c.id.clone()).collect();
            let complete = !criteria.is_empty() && !claim_ids.is_empty() && !evidence.is_empty();
            TraceRow {
                hazard_id: h.id.clone(),
                criterion_ids: sorted(criteria),
                claim_ids: sorted(claim_ids),
                evidence_ids: sorted(evidence),
                complete,
            }
        })
        .collect();
    TraceMatrix { rows }
}

pub fn render_trace(matrix: &TraceMatrix) -> String {
    let cols = ["hazard", "criteria", "claims", "evidence", "complete"];
    let cells: Vec<[String; 5]> = matrix
        .rows
        .iter()
        .map(|r| {
            let list = |v: &[String]| if v.is_empty() { "-".to_string() } else { v.join(",") };
            [
                r.hazard_id.clone(),
                list(&r.criterion_ids),
                list(&r.claim_ids),
                list(&r.evidence_ids),
                if r.complete { "yes" } else { "no" }.to_string(),
            ]
        })
        .collect();
    let mut widths = cols.map(str::len);
    for row in &cells {
        for (w, c) in widths.iter_mut().zip(row) {
            *w = (*w).max(c.chars().count());
        }
    }
    let mut out = String::new();
    let mut line = |fields: &[&str]| {
        let parts: Vec<String> = fields.iter().zip(widths).map(|(f, w)| format!("{f:<w$}")).collect();
        writeln!(out, "{}", parts.join("  ").trim_end()).unwrap();
    };
    line(&cols);
    for row in &cells {
        line(&row.each_ref().map(String::as_str));
    }
    let complete = matrix.rows.iter().filter(|r| r.complete).count();
    writeln!(out, "{complete}/{} hazards fully traced", matrix.rows.len()).unwrap();
    out
}
