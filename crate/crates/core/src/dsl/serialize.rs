use std::collections::BTreeSet;
use std::fmt::Write;

use crate::keyword::Keyword;
use crate::model::{
    AcSpaceRegion, AcceptanceCriterion, ArgumentRow, ClaimKind, ClaimNode, ContextBlock, Evidence,
    Hazard, Indicator, Methodology, SafetyCase, SeverityLevel, ValidationTarget,
};

use super::parser::default_child_id;

/// Canonical text for a case: fixed field order, two-space indentation,
/// elements grouped by kind in identifier order.
pub fn serialize(case: &SafetyCase) -> String {
    let mut w = Writer::default();
    w.line(0, &format!("safety_case {} {{", quote(case.id())));
    context(&mut w, case.context());
    for h in case.hazards() {
        w.blank();
        hazard(&mut w, h);
    }
    for m in case.methodologies() {
        w.blank();
        methodology(&mut w, m);
    }
    for i in case.indicators() {
        w.blank();
        indicator(&mut w, i);
    }
    for c in case.criteria() {
        w.blank();
        criterion(&mut w, c);
    }
    for e in case.evidence() {
        w.blank();
        evidence(&mut w, e);
    }
    for c in case.claims() {
        w.blank();
        let head = format!(
            "claim {} criterion = {}",
            c.id,
            c.criterion_id.as_deref().unwrap_or_default()
        );
        claim(&mut w, c, head, 1);
    }
    w.line(0, "}");
    w.out
}

#[derive(Default)]
struct Writer {
    out: String,
}

impl Writer {
    fn line(&mut self, depth: usize, text: &str) {
        for _ in 0..depth {
            self.out.push_str("  ");
        }
        self.out.push_str(text);
        self.out.push('\n');
    }

    fn blank(&mut self) {
        self.out.push('\n');
    }

    fn field(&mut self, depth: usize, key: &str, value: &str) {
        self.line(depth, &format!("{key} = {}", quote(value)));
    }
}

fn context(w: &mut Writer, ctx: &ContextBlock) {
    w.line(1, "context {");
    for field in ContextBlock::FIELDS {
        w.field(2, field, ctx.get(field).unwrap_or_default());
    }
    w.line(1, "}");
}

fn hazard(w: &mut Writer, h: &Hazard) {
    let mut head = format!("hazard {} category = {}", h.id, h.primary_category);
    if !h.secondary_categories.is_empty() {
        write!(head, " also = {}", join(&h.secondary_categories)).unwrap();
    }
    head.push_str(" {");
    w.line(1, &head);
    w.field(2, "description", &h.description);
    w.line(1, "}");
}

fn methodology(w: &mut Writer, m: &Methodology) {
    w.line(1, &format!("methodology {} {{", m.id));
    w.field(2, "name", &m.name);
    if !m.hazard_categories.is_empty() {
        w.line(2, &format!("categories = {}", join(&m.hazard_categories)));
    }
    if let Some(r) = &m.region {
        region(w, r, 2);
    }
    w.line(1, "}");
}

fn region(w: &mut Writer, r: &AcSpaceRegion, depth: usize) {
    w.line(depth, "region {");
    w.line(depth + 1, &format!("severity = {}", severity_set(&r.severities)));
    w.line(depth + 1, &format!("role = {}", join(&r.roles)));
    w.line(depth + 1, &format!("capability = {}", join(&r.capabilities)));
    w.line(depth + 1, &format!("status = {}", join(&r.statuses)));
    w.line(depth + 1, &format!("aggregation = {}", join(&r.aggregations)));
    let mut remaining = r.weak_cells.clone();
    for &level in &r.severities {
        let slice = r.cells_at(level);
        if !slice.is_empty() && slice.iter().all(|c| r.weak_cells.contains(c)) {
            w.line(depth + 1, &format!("weak({level})"));
            for c in &slice {
                remaining.remove(c);
            }
        }
    }
    for c in remaining {
        w.line(
            depth + 1,
            &format!(
                "weak_cell({}, {}, {}, {}, {})",
                c.severity, c.role, c.capability, c.status, c.aggregation
            ),
        );
    }
    w.line(depth, "}");
}

fn severity_set(set: &BTreeSet<SeverityLevel>) -> String {
    let levels: Vec<SeverityLevel> = set.iter().copied().collect();
    let contiguous = levels.len() >= 2
        && levels.windows(2).all(|p| {
            let pos = |s: SeverityLevel| SeverityLevel::ALL.iter().position(|x| *x == s);
            pos(p[1]) == pos(p[0]).map(|i| i + 1)
        });
    if contiguous {
        format!("{}..{}", levels[0], levels[levels.len() - 1])
    } else {
        join(set)
    }
}

fn indicator(w: &mut Writer, i: &Indicator) {
    w.line(1, &format!("indicator {} stage = {} {{", i.id, i.causal_stage));
    w.field(2, "description", &i.description);
    w.line(1, "}");
}

fn criterion(w: &mut Writer, c: &AcceptanceCriterion) {
    w.line(
        1,
        &format!(
            "criterion {} hazard = {} methodology = {} aggregation = {} {{",
            c.id,
            join_ids(&c.hazard_ids),
            c.methodology_id,
            c.aggregation
        ),
    );
    w.field(2, "statement", &c.statement);
    match &c.target {
        Some(ValidationTarget::Qualitative(text)) => {
            w.line(2, &format!("target qualitative({})", quote(text)));
        }
        Some(ValidationTarget::RateBound(rb)) => w.line(
            2,
            &format!(
                "target rate_bound(events = {}, max = {}, per = {}, confidence = {})",
                quote(&rb.event_definition),
                number(rb.max_rate),
                quote(&rb.exposure_unit),
                number(rb.confidence)
            ),
        ),
        None => {}
    }
    if let Some(r) = &c.region {
        region(w, r, 2);
    }
    if !c.indicator_ids.is_empty() {
        w.line(2, &format!("indicator = {}", join_ids(&c.indicator_ids)));
    }
    w.line(1, "}");
}

fn evidence(w: &mut Writer, e: &Evidence) {
    w.line(
        1,
        &format!("evidence {} methodology = {} strength = {} {{", e.id, e.methodology_id, e.strength),
    );
    w.field(2, "kind", &e.kind);
    w.field(2, "uri", &e.uri);
    w.line(1, "}");
}

fn claim(w: &mut Writer, node: &ClaimNode, head: String, depth: usize) {
    w.line(depth, &format!("{head} {{"));
    if !node.statement.is_empty() {
        w.field(depth + 1, "statement", &node.statement);
    }
    for (i, child) in node.children.iter().enumerate() {
        let mut head = child.kind.as_str().to_string();
        if let (ClaimKind::Facet, Some(label)) = (child.kind, &child.facet_label) {
            write!(head, " {}", quote(label)).unwrap();
        }
        if child.id != default_child_id(&node.id, i) {
            write!(head, " {}", child.id).unwrap();
        }
        claim(w, child, head, depth + 1);
    }
    for r in &node.rows {
        row(w, r, depth + 1);
    }
    w.line(depth, "}");
}

fn row(w: &mut Writer, r: &ArgumentRow, depth: usize) {
    w.line(depth, &format!("argument {} {{", r.label));
    w.field(depth + 1, "text", &r.argument);
    if !r.evidence_ids.is_empty() {
        w.line(depth + 1, &format!("evidence = {}", join_ids(&r.evidence_ids)));
    }
    if !r.limitations.is_empty() {
        w.field(depth + 1, "limitations", &r.limitations);
    }
    if !r.counter_argument.is_empty() {
        w.field(depth + 1, "counter", &r.counter_argument);
    }
    w.line(depth, "}");
}

fn join<K: Keyword>(set: &BTreeSet<K>) -> String {
    set.iter().map(|k| k.as_str()).collect::<Vec<_>>().join(", ")
}

fn join_ids(set: &BTreeSet<String>) -> String {
    let mut ids: Vec<&str> = set.iter().map(String::as_str).collect();
    ids.sort_by(|a, b| natord::compare(a, b));
    ids.join(", ")
}

/// Shortest text that reads back as the same value.
pub(crate) fn number(value: f64) -> String {
    let magnitude = value.abs();
    if magnitude == 0.0 || (1e-4..1e15).contains(&magnitude) {
        format!("{value}")
    } else {
        format!("{value:e}")
    }
}

pub(crate) fn quote(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if c.is_control() => write!(out, "\\u{{{:x}}}", c as u32).unwrap(),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_read_back_exactly() {
        for v in [5e-6, 0.95, 1.0, 0.0, 123456.789, 1e-300, 2.5e20] {
            let text = number(v);
            assert_eq!(text.parse::<f64>().unwrap(), v, "{text}");
        }
        assert_eq!(number(5e-6), "5e-6");
        assert_eq!(number(0.95), "0.95");
    }

    #[test]
    fn quoting_escapes_control_characters() {
        assert_eq!(quote("a\"b\\c\nd\u{1}"), "\"a\\\"b\\\\c\\nd\\u{1}\"");
    }

    #[test]
    fn severity_sets() {
        let all: BTreeSet<_> = SeverityLevel::ALL.iter().copied().collect();
        assert_eq!(severity_set(&all), "S0..S3");
        let gap: BTreeSet<_> = [SeverityLevel::S0, SeverityLevel::S2].into_iter().collect();
        assert_eq!(severity_set(&gap), "S0, S2");
        let one: BTreeSet<_> = [SeverityLevel::S1].into_iter().collect();
        assert_eq!(severity_set(&one), "S1");
    }
}
