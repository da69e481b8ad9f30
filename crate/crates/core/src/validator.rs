//! Structural credibility rules over a parsed safety case.
//!
//! Argument suitability is approximated by the conjunction of the
//! structural rules; the text of arguments is never interpreted.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::coverage::{self, BalanceClass};
pub use crate::diagnostic::{rule_catalog, rule_info, Diagnostic, Locator, RuleId, RuleInfo, Severity};
use crate::diagnostic;
use crate::dsl::ParseResult;
use crate::keyword::Keyword;
use crate::model::{resolve_references, row_key, ClaimKind, ClaimNode, SafetyCase};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuleSetting {
    Severity(Severity),
    Off,
}

/// Rules reported by the parser; their severity is fixed.
const PARSER_RULES: [RuleId; 2] = [RuleId::E008, RuleId::E010];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RuleConfig {
    pub overrides: BTreeMap<RuleId, RuleSetting>,
    /// Facet labels every confidence assessment must carry.
    pub required_facets: BTreeSet<String>,
    /// Enables the lifecycle context check.
    pub review_ready: bool,
    /// Minimum fraction of the behavioral space with any signal.
    pub coverage_threshold: Option<f64>,
    /// Refuse to validate a case with dangling references instead of
    /// reporting each one.
    pub require_resolved: bool,
    /// Do not require evidence links on rows under a reasonableness subclaim.
    pub evidence_exempt_reasonableness: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("config line {line}: {message}")]
pub struct ConfigError {
    pub line: usize,
    pub message: String,
}

impl RuleConfig {
    /// Parse the `key = value` rule configuration format. `#` starts a
    /// comment; unknown keys are errors.
    ///
    /// ```text
    /// rule.W101.severity = error
    /// rule.E006.severity = off
    /// facets.required = Scoring confidence, Technical validity of benchmark
    /// ```
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut config = RuleConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let err = |message: String| ConfigError { line, message };
            let content = raw.split('#').next().unwrap_or_default().trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "facets.required" => {
                    config.required_facets = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(String::from)
                        .collect();
                }
                "review_ready" => config.review_ready = parse_bool(value).map_err(err)?,
                "references.require_resolved" => config.require_resolved = parse_bool(value).map_err(err)?,
                "rule.E006.exempt_reasonableness" => {
                    config.evidence_exempt_reasonableness = parse_bool(value).map_err(err)?
                }
                "coverage.threshold" => {
                    let t = parse_threshold(value).map_err(err)?;
                    config.coverage_threshold = Some(t);
                }
                _ => {
                    let rule = key
                        .strip_prefix("rule.")
                        .and_then(|r| r.strip_suffix(".severity"))
                        .ok_or_else(|| err(format!("unknown key `{key}`")))?;
                    let rule = RuleId::from_keyword(rule).map_err(|e| err(e.to_string()))?;
                    if PARSER_RULES.contains(&rule) {
                        return Err(err(format!("rule {rule} is reported by the parser and cannot be reconfigured")));
                    }
                    let setting = match value {
                        "error" => RuleSetting::Severity(Severity::Error),
                        "warning" => RuleSetting::Severity(Severity::Warning),
                        "off" => RuleSetting::Off,
                        other => return Err(err(format!("severity must be error, warning or off, found `{other}`"))),
                    };
                    config.overrides.insert(rule, setting);
                }
            }
        }
        Ok(config)
    }

    pub fn is_enabled(&self, rule: RuleId) -> bool {
        self.overrides.get(&rule) != Some(&RuleSetting::Off)
    }

    pub fn severity_of(&self, rule: RuleId) -> Severity {
        match self.overrides.get(&rule) {
            Some(RuleSetting::Severity(s)) => *s,
            _ => rule_info(rule).default_severity,
        }
    }
}

fn parse_bool(value: &str) -> Result<bool, String> {
    match value {
        "true" => Ok(true),
        "false" => Ok(false),
        other => Err(format!("expected true or false, found `{other}`")),
    }
}

pub fn parse_threshold(value: &str) -> Result<f64, String> {
    match value.parse::<f64>() {
        Ok(t) if (0.0..=1.0).contains(&t) => Ok(t),
        _ => Err(format!("coverage threshold must be a number in [0, 1], found `{value}`")),
    }
}

/// Check a case against every enabled rule. The result is sorted and
/// depends only on the arguments.
pub fn validate(case: &SafetyCase, config: &RuleConfig) -> Vec<Diagnostic> {
    let dangling = resolve_references(case);
    if config.require_resolved && !dangling.is_empty() {
        let message = format!(
            "refusing to validate: {} unresolved reference(s), first: {}",
            dangling.len(),
            dangling[0]
        );
        return vec![Diagnostic::new(RuleId::E009, case.id(), message, Locator::Case)];
    }

    let mut out = Vec::new();
    let mut emit = |d: Diagnostic| out.push(d);

    if case.criteria().is_empty() {
        emit(Diagnostic::new(
            RuleId::E001,
            case.id(),
            "no acceptance criteria declared; no argumentation is possible in the absence of acceptance criteria",
            Locator::Case,
        ));
    }

    for root in case.claims() {
        check_claim_tree(root, config, &mut emit);
    }

    for h in case.hazards() {
        if !case.criteria().iter().any(|c| c.hazard_ids.contains(&h.id)) {
            emit(Diagnostic::new(
                RuleId::E007,
                &h.id,
                format!("hazard `{}` traces to no acceptance criterion", h.id),
                Locator::Element(h.id.clone()),
            ));
        }
    }

    for d in dangling {
        emit(Diagnostic::new(
            RuleId::E009,
            d.referrer.clone(),
            d.to_string(),
            Locator::Reference { referrer: d.referrer, field: d.field, target: d.missing },
        ));
    }

    if config.review_ready {
        for field in case.context().missing_lifecycle_fields() {
            emit(Diagnostic::new(
                RuleId::E011,
                case.id(),
                format!("case is marked review-ready but context field `{field}` is empty"),
                Locator::ContextField(field),
            ));
        }
    }

    for c in case.criteria() {
        if !case.claims().iter().any(|root| root.criterion_id.as_deref() == Some(c.id.as_str())) {
            emit(Diagnostic::new(
                RuleId::E012,
                &c.id,
                format!("acceptance criterion `{}` is not argued by any top claim", c.id),
                Locator::Element(c.id.clone()),
            ));
        }
    }

    let cited: BTreeSet<String> = case.claims().iter().flat_map(|c| c.cited_evidence()).collect();
    for e in case.evidence() {
        if !cited.contains(&e.id) {
            emit(Diagnostic::new(
                RuleId::W103,
                &e.id,
                format!("evidence `{}` is declared but no argument cites it", e.id),
                Locator::Element(e.id.clone()),
            ));
        }
    }

    match coverage::aggregation_balance_unchecked(case) {
        BalanceClass::AggregateOnly => emit(Diagnostic::new(
            RuleId::W104,
            case.id(),
            format!("all behavioral acceptance criteria are aggregate-level: {}", BalanceClass::AggregateOnly.advisory()),
            Locator::Case,
        )),
        BalanceClass::EventOnly => emit(Diagnostic::new(
            RuleId::W105,
            case.id(),
            format!("all behavioral acceptance criteria are event-level: {}", BalanceClass::EventOnly.advisory()),
            Locator::Case,
        )),
        BalanceClass::Balanced | BalanceClass::None => {}
    }

    if let Some(threshold) = config.coverage_threshold {
        let report = coverage::gap_report(&coverage::coverage_map_unchecked(case));
        if report.overall.as_f64() < threshold {
            emit(Diagnostic::new(
                RuleId::W106,
                case.id(),
                format!(
                    "behavioral acceptance-criteria space coverage {} ({:.4}) is below the threshold {}; {} cells have no signal",
                    report.overall,
                    report.overall.as_f64(),
                    threshold,
                    report.uncovered.len()
                ),
                Locator::Case,
            ));
        }
    }

    let mut out: Vec<Diagnostic> = out
        .into_iter()
        .filter(|d| config.is_enabled(d.rule_id))
        .map(|mut d| {
            d.severity = config.severity_of(d.rule_id);
            d
        })
        .collect();
    diagnostic::sort(&mut out);
    out
}

fn check_claim_tree(root: &ClaimNode, config: &RuleConfig, emit: &mut impl FnMut(Diagnostic)) {
    if !root.has_child(ClaimKind::Reasonableness) {
        emit(Diagnostic::new(
            RuleId::E002,
            &root.id,
            format!("claim `{}` has no reasonableness subclaim arguing that the acceptance criterion is reasonable", root.id),
            Locator::Element(root.id.clone()),
        ));
    }
    if !root.has_child(ClaimKind::Satisfaction) {
        emit(Diagnostic::new(
            RuleId::E003,
            &root.id,
            format!(
                "claim `{}` has no satisfaction subclaim arguing that the methodology provides credible evidence the criterion is met",
                root.id
            ),
            Locator::Element(root.id.clone()),
        ));
    }
    visit(root, false, config, emit);
}

fn visit(node: &ClaimNode, in_reasonableness: bool, config: &RuleConfig, emit: &mut impl FnMut(Diagnostic)) {
    let in_reasonableness = in_reasonableness || node.kind == ClaimKind::Reasonableness;

    if node.kind == ClaimKind::Satisfaction {
        if !node.has_child(ClaimKind::CoverageAssessment) {
            emit(Diagnostic::new(
                RuleId::E004,
                &node.id,
                format!("satisfaction subclaim `{}` has no coverage assessment", node.id),
                Locator::Element(node.id.clone()),
            ));
        }
        if !node.has_child(ClaimKind::ConfidenceAssessment) {
            emit(Diagnostic::new(
                RuleId::E005,
                &node.id,
                format!("satisfaction subclaim `{}` has no confidence assessment", node.id),
                Locator::Element(node.id.clone()),
            ));
        }
    }

    if node.kind == ClaimKind::ConfidenceAssessment {
        let present: BTreeSet<&str> = node
            .children
            .iter()
            .filter(|c| c.kind == ClaimKind::Facet)
            .filter_map(|c| c.facet_label.as_deref())
            .collect();
        for facet in &config.required_facets {
            if !present.contains(facet.as_str()) {
                emit(Diagnostic::new(
                    RuleId::W107,
                    &node.id,
                    format!("confidence assessment `{}` lacks the required facet \"{facet}\"", node.id),
                    Locator::Element(node.id.clone()),
                ));
            }
        }
    }

    for row in &node.rows {
        let key = row_key(&node.id, &row.label);
        let exempt = in_reasonableness && config.evidence_exempt_reasonableness;
        if row.evidence_ids.is_empty() && !exempt {
            emit(Diagnostic::new(
                RuleId::E006,
                &key,
                format!("argument `{}` under `{}` links no evidence", row.label, node.id),
                Locator::Element(key.clone()),
            ));
        }
        if row.counter_argument.trim().is_empty() {
            emit(Diagnostic::new(
                RuleId::W101,
                &key,
                format!("argument `{}` under `{}` states no counter-argument or rejected alternative", row.label, node.id),
                Locator::Element(key.clone()),
            ));
        }
        if row.limitations.trim().is_empty() {
            emit(Diagnostic::new(
                RuleId::W102,
                &key,
                format!("argument `{}` under `{}` states no limitations or scope", row.label, node.id),
                Locator::Element(key.clone()),
            ));
        }
    }

    for child in &node.children {
        visit(child, in_reasonableness, config, emit);
    }
}

/// Parse diagnostics plus rule diagnostics, with spans attached. A fatal
/// parse yields only the parse diagnostics.
pub fn validate_parsed(parsed: &ParseResult, config: &RuleConfig) -> Vec<Diagnostic> {
    let Some(case) = &parsed.case else {
        return parsed.diagnostics.clone();
    };
    let mut out: Vec<Diagnostic> = parsed
        .diagnostics
        .iter()
        .filter(|d| d.rule_id != RuleId::E009)
        .cloned()
        .collect();
    let mut rules = validate(case, config);
    parsed.span_index.attach(&mut rules);
    out.extend(rules);
    diagnostic::sort(&mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::fixtures::{minimal_parts, node, row};
    use crate::model::{AcceptanceCriterion, Aggregation, SafetyCaseParts};

    fn event_level_partner(parts: &mut SafetyCaseParts) {
        let mut ac2: AcceptanceCriterion = parts.criteria[0].clone();
        ac2.id = "AC2".into();
        ac2.aggregation = Aggregation::EventLevel;
        parts.criteria.push(ac2);
        let mut c2 = parts.claims[0].clone();
        c2.id = "C2".into();
        c2.criterion_id = Some("AC2".into());
        rename(&mut c2, "C1", "C2");
        parts.claims.push(c2);
    }

    fn rename(n: &mut ClaimNode, from: &str, to: &str) {
        n.id = n.id.replacen(from, to, 1);
        for c in &mut n.children {
            rename(c, from, to);
        }
    }

    fn clean_parts() -> SafetyCaseParts {
        let mut parts = minimal_parts();
        event_level_partner(&mut parts);
        parts
    }

    fn rules(parts: SafetyCaseParts, config: &RuleConfig) -> Vec<RuleId> {
        validate(&SafetyCase::new(parts).unwrap(), config).iter().map(|d| d.rule_id).collect()
    }

    #[test]
    fn clean_case_has_no_findings() {
        assert_eq!(rules(clean_parts(), &RuleConfig::default()), vec![]);
    }

    #[test]
    fn single_aggregate_criterion_warns() {
        assert_eq!(rules(minimal_parts(), &RuleConfig::default()), vec![RuleId::W104]);
    }

    #[test]
    fn missing_reasonableness() {
        let mut parts = clean_parts();
        parts.claims[0].children.remove(0);
        let case = SafetyCase::new(parts).unwrap();
        let diags = validate(&case, &RuleConfig::default());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule_id, RuleId::E002);
        assert_eq!(diags[0].subject_id, "C1");
    }

    #[test]
    fn empty_case_reports_e001() {
        let parts = SafetyCaseParts { id: "empty".into(), ..SafetyCaseParts::default() };
        let diags = validate(&SafetyCase::new(parts).unwrap(), &RuleConfig::default());
        assert_eq!(diags.len(), 1);
        assert_eq!(diags[0].rule_id, RuleId::E001);
        assert!(diags[0].message.contains("no acceptance criteria declared"));
    }

    #[test]
    fn row_rules() {
        let mut parts = clean_parts();
        let r = &mut parts.claims[0].children[0].rows[0];
        r.evidence_ids.clear();
        r.counter_argument.clear();
        r.limitations.clear();
        assert_eq!(
            rules(parts.clone(), &RuleConfig::default()),
            vec![RuleId::E006, RuleId::W101, RuleId::W102]
        );
        let config = RuleConfig { evidence_exempt_reasonableness: true, ..RuleConfig::default() };
        assert_eq!(rules(parts, &config), vec![RuleId::W101, RuleId::W102]);
    }

    #[test]
    fn severity_override_and_disable() {
        let mut parts = clean_parts();
        parts.claims[0].children[0].rows[0].counter_argument.clear();
        parts.claims[0].children[0].rows[0].evidence_ids.clear();
        let case = SafetyCase::new(parts).unwrap();
        let base = validate(&case, &RuleConfig::default());

        let mut config = RuleConfig::default();
        config.overrides.insert(RuleId::W101, RuleSetting::Severity(Severity::Error));
        let raised = validate(&case, &config);
        assert_eq!(raised.len(), base.len());
        assert!(raised.iter().all(|d| d.is_error()));

        config.overrides.insert(RuleId::W101, RuleSetting::Off);
        let disabled = validate(&case, &config);
        assert_eq!(disabled, base.into_iter().filter(|d| d.rule_id != RuleId::W101).collect::<Vec<_>>());
    }

    #[test]
    fn required_facets() {
        let mut parts = clean_parts();
        parts.claims[0].children[1].children[1]
            .children
            .push(node("F", ClaimKind::Facet, vec![], vec![]));
        let config = RuleConfig {
            required_facets: ["facet F".to_string(), "Robustness".to_string()].into(),
            ..RuleConfig::default()
        };
        let diags = validate(&SafetyCase::new(parts).unwrap(), &config);
        // C1 has "facet F" but not "Robustness"; C2 has neither.
        assert_eq!(diags.iter().filter(|d| d.rule_id == RuleId::W107).count(), 3);
    }

    #[test]
    fn review_ready_context() {
        let mut parts = clean_parts();
        parts.context.odd_selection.clear();
        assert_eq!(rules(parts.clone(), &RuleConfig::default()), vec![]);
        let config = RuleConfig { review_ready: true, ..RuleConfig::default() };
        assert_eq!(rules(parts, &config), vec![RuleId::E011]);
    }

    #[test]
    fn require_resolved_refuses() {
        let mut parts = clean_parts();
        parts.claims[0].children[0].rows.push(row("A.2", &["E9"]));
        let case = SafetyCase::new(parts).unwrap();
        let config = RuleConfig { require_resolved: true, ..RuleConfig::default() };
        let diags = validate(&case, &config);
        assert_eq!(diags.len(), 1);
        assert!(diags[0].message.starts_with("refusing"));
        let lenient = validate(&case, &RuleConfig::default());
        assert_eq!(lenient.iter().map(|d| d.rule_id).collect::<Vec<_>>(), vec![RuleId::E009]);
    }

    #[test]
    fn config_file_format() {
        let config = RuleConfig::parse(
            "# rules\nrule.W101.severity = error\nrule.E006.severity=off\nfacets.required = Scoring confidence, Fidelity\ncoverage.threshold = 0.5\nreview_ready = true\n",
        )
        .unwrap();
        assert_eq!(config.severity_of(RuleId::W101), Severity::Error);
        assert!(!config.is_enabled(RuleId::E006));
        assert_eq!(config.required_facets.len(), 2);
        assert_eq!(config.coverage_threshold, Some(0.5));
        assert!(config.review_ready);

        assert_eq!(RuleConfig::parse("rule.E999.severity = off").unwrap_err().line, 1);
        assert!(RuleConfig::parse("\nrule.W101.severity = loud").is_err());
        assert!(RuleConfig::parse("colour = blue").is_err());
        assert!(RuleConfig::parse("rule.E008.severity = warning").is_err());
        assert!(RuleConfig::parse("coverage.threshold = 1.5").is_err());
    }
}
