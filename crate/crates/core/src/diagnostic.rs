//! Diagnostics and the registry of rule identifiers.

use std::cmp::Ordering;

use serde::Serialize;

use crate::keyword::keyword_enum;
use crate::model::ReferenceField;
use crate::span::SourceSpan;

keyword_enum! {
    /// Stable rule identifiers. Never renumber; retired ids stay reserved.
    pub enum RuleId: "rule id" {
        E001 => "E001",
        E002 => "E002",
        E003 => "E003",
        E004 => "E004",
        E005 => "E005",
        E006 => "E006",
        E007 => "E007",
        E008 => "E008",
        E009 => "E009",
        E010 => "E010",
        E011 => "E011",
        E012 => "E012",
        W101 => "W101",
        W102 => "W102",
        W103 => "W103",
        W104 => "W104",
        W105 => "W105",
        W106 => "W106",
        W107 => "W107",
    }
}

keyword_enum! {
    pub enum Severity: "severity" {
        Error => "error",
        Warning => "warning",
    }
}

/// Where in a document a diagnostic points, resolved to a span through a
/// [`crate::dsl::SpanIndex`].
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Locator {
    /// The span was set directly by the parser.
    Source,
    Case,
    Context,
    ContextField(&'static str),
    /// An element id or an argument row key.
    Element(String),
    Reference {
        referrer: String,
        field: ReferenceField,
        target: String,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub rule_id: RuleId,
    pub severity: Severity,
    pub message: String,
    pub span: Option<SourceSpan>,
    pub subject_id: String,
    #[serde(skip)]
    pub locator: Locator,
}

impl Diagnostic {
    /// A diagnostic at the rule's default severity.
    pub fn new(rule_id: RuleId, subject_id: impl Into<String>, message: impl Into<String>, locator: Locator) -> Self {
        Diagnostic {
            rule_id,
            severity: rule_info(rule_id).default_severity,
            message: message.into(),
            span: None,
            subject_id: subject_id.into(),
            locator,
        }
    }

    /// A parser diagnostic with a known span.
    pub fn at(rule_id: RuleId, subject_id: impl Into<String>, message: impl Into<String>, span: SourceSpan) -> Self {
        Diagnostic {
            span: Some(span),
            ..Diagnostic::new(rule_id, subject_id, message, Locator::Source)
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

/// Report ordering: by file and position, then rule id (so errors precede
/// warnings at equal spans), then subject.
pub fn compare(a: &Diagnostic, b: &Diagnostic) -> Ordering {
    let pos = |d: &Diagnostic| {
        d.span
            .as_ref()
            .map(|s| (s.file.clone(), s.start_line, s.start_col, s.end_line, s.end_col))
    };
    pos(a)
        .cmp(&pos(b))
        .then(a.rule_id.cmp(&b.rule_id))
        .then_with(|| a.subject_id.cmp(&b.subject_id))
        .then_with(|| a.message.cmp(&b.message))
}

pub fn sort(diagnostics: &mut [Diagnostic]) {
    diagnostics.sort_by(compare);
}

/// Registry entry for one rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct RuleInfo {
    pub rule_id: RuleId,
    pub default_severity: Severity,
    pub title: &'static str,
    /// The part of the safety-case method the rule enforces.
    pub anchor: &'static str,
}

const fn rule(rule_id: RuleId, default_severity: Severity, title: &'static str, anchor: &'static str) -> RuleInfo {
    RuleInfo { rule_id, default_severity, title, anchor }
}

use Severity::{Error, Warning};

static CATALOG: [RuleInfo; 19] = [
    rule(RuleId::E001, Error, "no acceptance criteria declared",
        "aggregation matrix: no argumentation is possible in the absence of acceptance criteria"),
    rule(RuleId::E002, Error, "top claim lacks a reasonableness subclaim",
        "claim structure, argument credibility: the stated acceptance criterion is reasonable"),
    rule(RuleId::E003, Error, "top claim lacks a satisfaction subclaim",
        "claim structure, evidence credibility: the methodology provides credible evidence that the criterion is met"),
    rule(RuleId::E004, Error, "satisfaction subclaim lacks a coverage assessment",
        "case credibility assessment, evidence credibility: coverage assessment"),
    rule(RuleId::E005, Error, "satisfaction subclaim lacks a confidence assessment",
        "case credibility assessment, evidence credibility: confidence assessment"),
    rule(RuleId::E006, Error, "argument row links no evidence",
        "argument table: evidence column linking each argument to internal evidence"),
    rule(RuleId::E007, Error, "hazard traces to no acceptance criterion",
        "acceptance-criteria framework: traceability between identified hazards and acceptance criteria"),
    rule(RuleId::E008, Error, "malformed document",
        "document grammar and structural well-formedness of the claim skeleton"),
    rule(RuleId::E009, Error, "dangling reference",
        "traceability: every cross-reference between hazards, criteria, claims and evidence resolves"),
    rule(RuleId::E010, Error, "duplicate identifier",
        "traceability: identifiers are unique within a safety case"),
    rule(RuleId::E011, Error, "review-ready case is missing lifecycle context",
        "safety determination lifecycle: vehicle configuration, operational configuration, ODD selection and deployment scale"),
    rule(RuleId::E012, Error, "acceptance criterion has no top claim",
        "claim structure: one top claim per acceptance criterion"),
    rule(RuleId::W101, Warning, "argument row has no counter-argument",
        "argument table: counter-argument column recording rejected alternatives"),
    rule(RuleId::W102, Warning, "argument row has no limitations statement",
        "argument table: limitations and scope column"),
    rule(RuleId::W103, Warning, "evidence is declared but never cited",
        "evidence credibility: declared evidence supports some argument"),
    rule(RuleId::W104, Warning, "behavioral criteria are aggregate-level only",
        "aggregation matrix: aggregate-only criteria may not capture risk in individual scenarios"),
    rule(RuleId::W105, Warning, "behavioral criteria are event-level only",
        "aggregation matrix: event-only criteria preclude a holistic assessment of residual risk"),
    rule(RuleId::W106, Warning, "acceptance-criteria space coverage below threshold",
        "acceptance-criteria framework: coverage of the behavioral space"),
    rule(RuleId::W107, Warning, "confidence assessment lacks a required facet",
        "claim structure: confidence assessment facets such as scoring confidence or technical validity of benchmark"),
];

/// Every registered rule in stable order.
pub fn rule_catalog() -> &'static [RuleInfo] {
    &CATALOG
}

pub fn rule_info(rule_id: RuleId) -> &'static RuleInfo {
    CATALOG
        .iter()
        .find(|r| r.rule_id == rule_id)
        .expect("every rule id is registered")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::keyword::Keyword;

    #[test]
    fn catalog_covers_every_rule_once() {
        let ids: Vec<RuleId> = rule_catalog().iter().map(|r| r.rule_id).collect();
        assert_eq!(ids, RuleId::ALL);
        let names: Vec<&str> = ids.iter().map(|r| r.as_str()).collect();
        for n in 1..=12 {
            assert!(names.contains(&format!("E{n:03}").as_str()));
        }
        for n in 101..=107 {
            assert!(names.contains(&format!("W{n}").as_str()));
        }
    }

    #[test]
    fn coverage_rule_anchor() {
        assert!(rule_info(RuleId::E004).anchor.contains("coverage assessment"));
        assert!(rule_info(RuleId::E005).anchor.contains("confidence assessment"));
    }

    #[test]
    fn default_severity_follows_prefix() {
        for r in rule_catalog() {
            let expected = if r.rule_id.as_str().starts_with('E') { Severity::Error } else { Severity::Warning };
            assert_eq!(r.default_severity, expected);
            assert!(!r.anchor.is_empty() && !r.title.is_empty());
        }
    }

    #[test]
    fn errors_sort_before_warnings_at_equal_span() {
        let span = SourceSpan::new("f", (1, 1), (1, 2));
        let w = Diagnostic::at(RuleId::W101, "x", "w", span.clone());
        let e = Diagnostic::at(RuleId::E006, "x", "e", span);
        let mut v = vec![w, e];
        sort(&mut v);
        assert_eq!(v[0].rule_id, RuleId::E006);
    }
}
