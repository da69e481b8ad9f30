#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::PathBuf;

use aurcase::dsl::default_child_id;
use aurcase::model::{
    AcSpaceRegion, AcceptanceCriterion, Aggregation, ArgumentRow, Capability, CausalStage, Cell, ClaimKind, ClaimNode,
    ContextBlock, Evidence, EvidenceStrength, FunctionalityStatus, Hazard, HazardCategory, Indicator, Methodology,
    RateBound, Role, SafetyCase, SafetyCaseParts, SeverityLevel, ValidationTarget,
};
use aurcase::lifecycle::{ExposureLedger, LedgerEntry, Phase};
use aurcase::Keyword;
use proptest::prelude::*;
use proptest::sample::subsequence;

pub fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn read_fixture(name: &str) -> String {
    std::fs::read_to_string(fixture(name)).unwrap_or_else(|e| panic!("{name}: {e}"))
}

fn text() -> impl Strategy<Value = String> {
    prop_oneof![
        3 => "[ -~]{0,24}",
        1 => any::<String>(),
        1 => Just("quote \" backslash \\ newline \n tab \t cr \r nul \u{0}".to_string()),
    ]
}

fn nonblank() -> impl Strategy<Value = String> {
    text().prop_map(|s| format!("x{s}"))
}

fn keyword_set<K: Keyword + std::fmt::Debug>() -> impl Strategy<Value = BTreeSet<K>> {
    subsequence(K::ALL.to_vec(), 1..=K::ALL.len()).prop_map(|v| v.into_iter().collect())
}

fn keyword<K: Keyword + std::fmt::Debug>() -> impl Strategy<Value = K> {
    proptest::sample::select(K::ALL.to_vec())
}

fn id_suffix() -> impl Strategy<Value = String> {
    "[A-Za-z0-9_+-]{0,5}"
}

fn region() -> impl Strategy<Value = AcSpaceRegion> {
    (
        keyword_set::<SeverityLevel>(),
        keyword_set::<Role>(),
        keyword_set::<Capability>(),
        keyword_set::<FunctionalityStatus>(),
        keyword_set::<Aggregation>(),
        prop::collection::vec(any::<prop::sample::Index>(), 0..6),
        prop::collection::vec(keyword::<SeverityLevel>(), 0..2),
    )
        .prop_map(|(severities, roles, capabilities, statuses, aggregations, weak, weak_levels)| {
            let mut r = AcSpaceRegion { severities, roles, capabilities, statuses, aggregations, weak_cells: BTreeSet::new() };
            let cells: Vec<Cell> = Cell::all().filter(|c| r.contains(c)).collect();
            for i in weak {
                r.weak_cells.insert(*i.get(&cells));
            }
            for level in weak_levels {
                r.weak_cells.extend(r.cells_at(level));
            }
            r
        })
}

#[derive(Debug, Clone)]
struct RowGen {
    label: String,
    argument: String,
    evidence: Vec<prop::sample::Index>,
    limitations: String,
    counter: String,
}

fn row_gen() -> impl Strategy<Value = RowGen> {
    (
        "[A-Za-z0-9_+-]{1,3}",
        nonblank(),
        prop::collection::vec(any::<prop::sample::Index>(), 0..3),
        prop_oneof![Just(String::new()), text()],
        prop_oneof![Just(String::new()), text()],
    )
        .prop_map(|(label, argument, evidence, limitations, counter)| RowGen { label, argument, evidence, limitations, counter })
}

#[derive(Debug, Clone)]
struct Shape {
    kind: ClaimKind,
    label: Option<String>,
    statement: String,
    explicit_id: bool,
    rows: Vec<RowGen>,
    children: Vec<Shape>,
}

fn child_kinds(kind: ClaimKind) -> Vec<ClaimKind> {
    use ClaimKind::*;
    match kind {
        Satisfaction => vec![CoverageAssessment, ConfidenceAssessment, ConfidenceAssessment, Reasonableness, Satisfaction],
        ConfidenceAssessment => vec![Facet, Facet, Facet, Reasonableness],
        TopClaim => vec![Reasonableness, Satisfaction, Satisfaction],
        _ => vec![Reasonableness, Satisfaction],
    }
}

fn shape(kind: ClaimKind, depth: u32) -> BoxedStrategy<Shape> {
    let children: BoxedStrategy<Vec<Shape>> = if depth == 0 {
        Just(Vec::new()).boxed()
    } else {
        let options: Vec<BoxedStrategy<Shape>> = child_kinds(kind).into_iter().map(|k| shape(k, depth - 1)).collect();
        prop::collection::vec(proptest::strategy::Union::new(options), 0..4).boxed()
    };
    let label = if kind == ClaimKind::Facet { nonblank().prop_map(Some).boxed() } else { Just(None).boxed() };
    (label, prop_oneof![Just(String::new()), text()], any::<bool>(), prop::collection::vec(row_gen(), 0..3), children)
        .prop_map(move |(label, statement, explicit_id, rows, children)| Shape {
            kind,
            label,
            statement,
            explicit_id,
            rows,
            children,
        })
        .boxed()
}

#[derive(Debug, Clone)]
struct Gen {
    case_id: String,
    context: Vec<String>,
    hazards: Vec<(String, HazardCategory, BTreeSet<HazardCategory>, String)>,
    methodologies: Vec<(String, String, Option<AcSpaceRegion>, BTreeSet<HazardCategory>)>,
    indicators: Vec<(String, CausalStage, String)>,
    criteria: Vec<CriterionGen>,
    evidence: Vec<(String, prop::sample::Index, EvidenceStrength, String, String)>,
    claims: Vec<(String, prop::sample::Index, Shape)>,
}

#[derive(Debug, Clone)]
struct CriterionGen {
    suffix: String,
    statement: String,
    hazards: Vec<prop::sample::Index>,
    methodology: prop::sample::Index,
    indicators: Vec<prop::sample::Index>,
    region: Option<AcSpaceRegion>,
    aggregation: Aggregation,
    target: Option<ValidationTarget>,
}

fn target() -> impl Strategy<Value = Option<ValidationTarget>> {
    prop_oneof![
        Just(None),
        text().prop_map(|t| Some(ValidationTarget::Qualitative(t))),
        (text(), 1e-12f64..1e6, text(), 1e-4f64..0.9999).prop_map(|(e, max_rate, u, confidence)| {
            Some(ValidationTarget::RateBound(RateBound { event_definition: e, max_rate, exposure_unit: u, confidence }))
        }),
    ]
}

fn criterion_gen() -> impl Strategy<Value = CriterionGen> {
    (
        id_suffix(),
        text(),
        prop::collection::vec(any::<prop::sample::Index>(), 1..3),
        any::<prop::sample::Index>(),
        prop::collection::vec(any::<prop::sample::Index>(), 0..3),
        prop::option::of(region()),
        keyword::<Aggregation>(),
        target(),
    )
        .prop_map(|(suffix, statement, hazards, methodology, indicators, region, aggregation, target)| CriterionGen {
            suffix,
            statement,
            hazards,
            methodology,
            indicators,
            region,
            aggregation,
            target,
        })
}

fn gen() -> impl Strategy<Value = Gen> {
    (
        text(),
        prop::collection::vec(text(), 7),
        prop::collection::vec(
            (id_suffix(), keyword::<HazardCategory>(), prop::collection::btree_set(keyword::<HazardCategory>(), 0..3), text()),
            1..4,
        ),
        prop::collection::vec(
            (id_suffix(), text(), prop::option::of(region()), prop::collection::btree_set(keyword::<HazardCategory>(), 0..3)),
            1..4,
        ),
        prop::collection::vec((id_suffix(), keyword::<CausalStage>(), text()), 0..3),
        prop::collection::vec(criterion_gen(), 0..4),
        prop::collection::vec(
            (id_suffix(), any::<prop::sample::Index>(), keyword::<EvidenceStrength>(), text(), text()),
            0..4,
        ),
        prop::collection::vec((id_suffix(), any::<prop::sample::Index>(), shape(ClaimKind::TopClaim, 3)), 0..3),
    )
        .prop_map(|(case_id, context, hazards, methodologies, indicators, criteria, evidence, claims)| Gen {
            case_id,
            context,
            hazards,
            methodologies,
            indicators,
            criteria,
            evidence,
            claims,
        })
}

fn pick(ids: &[String], idx: &[prop::sample::Index]) -> BTreeSet<String> {
    if ids.is_empty() {
        return BTreeSet::new();
    }
    idx.iter().map(|i| i.get(ids).clone()).collect()
}

fn build_node(shape: &Shape, id: String, evidence: &[String], counter: &mut usize) -> ClaimNode {
    let rows = shape
        .rows
        .iter()
        .enumerate()
        .map(|(i, r)| ArgumentRow {
            label: format!("{}{i}", r.label),
            argument: r.argument.clone(),
            evidence_ids: pick(evidence, &r.evidence),
            limitations: r.limitations.clone(),
            counter_argument: r.counter.clone(),
        })
        .collect();
    let children = shape
        .children
        .iter()
        .enumerate()
        .map(|(i, child)| {
            let cid = if child.explicit_id {
                *counter += 1;
                format!("N{counter}")
            } else {
                default_child_id(&id, i)
            };
            build_node(child, cid, evidence, counter)
        })
        .collect();
    ClaimNode {
        id,
        criterion_id: None,
        kind: shape.kind,
        facet_label: shape.label.clone(),
        statement: shape.statement.clone(),
        children,
        rows,
    }
}

fn build(g: Gen) -> SafetyCaseParts {
    let mut context = ContextBlock::default();
    for (field, value) in ContextBlock::FIELDS.iter().zip(&g.context) {
        *context.get_mut(field).unwrap() = value.clone();
    }
    let hazards: Vec<Hazard> = g
        .hazards
        .into_iter()
        .enumerate()
        .map(|(i, (s, primary, mut secondary, description))| {
            secondary.remove(&primary);
            Hazard { id: format!("H{i}{s}"), description, primary_category: primary, secondary_categories: secondary }
        })
        .collect();
    let methodologies: Vec<Methodology> = g
        .methodologies
        .into_iter()
        .enumerate()
        .map(|(i, (s, name, region, mut categories))| {
            if region.is_some() {
                categories.insert(HazardCategory::Behavioral);
            }
            Methodology { id: format!("M{i}{s}"), name, region, hazard_categories: categories }
        })
        .collect();
    let indicators: Vec<Indicator> = g
        .indicators
        .into_iter()
        .enumerate()
        .map(|(i, (s, causal_stage, description))| Indicator { id: format!("I{i}{s}"), description, causal_stage })
        .collect();
    let hazard_ids: Vec<String> = hazards.iter().map(|h| h.id.clone()).collect();
    let methodology_ids: Vec<String> = methodologies.iter().map(|m| m.id.clone()).collect();
    let indicator_ids: Vec<String> = indicators.iter().map(|x| x.id.clone()).collect();
    let criteria: Vec<AcceptanceCriterion> = g
        .criteria
        .into_iter()
        .enumerate()
        .map(|(i, c)| {
            let mut region = c.region;
            if let Some(r) = &mut region {
                r.aggregations.insert(c.aggregation);
            }
            AcceptanceCriterion {
                id: format!("AC{i}{}", c.suffix),
                statement: c.statement,
                hazard_ids: pick(&hazard_ids, &c.hazards),
                methodology_id: c.methodology.get(&methodology_ids).clone(),
                indicator_ids: pick(&indicator_ids, &c.indicators),
                region,
                aggregation: c.aggregation,
                target: c.target,
            }
        })
        .collect();
    let evidence: Vec<Evidence> = g
        .evidence
        .into_iter()
        .enumerate()
        .map(|(i, (s, m, strength, kind, uri))| Evidence {
            id: format!("E{i}{s}"),
            methodology_id: m.get(&methodology_ids).clone(),
            kind,
            uri,
            strength,
        })
        .collect();
    let evidence_ids: Vec<String> = evidence.iter().map(|e| e.id.clone()).collect();
    let criterion_ids: Vec<String> = criteria.iter().map(|c| c.id.clone()).collect();
    let mut counter = 0;
    let claims: Vec<ClaimNode> = if criterion_ids.is_empty() {
        Vec::new()
    } else {
        g.claims
            .into_iter()
            .enumerate()
            .map(|(i, (s, c, shape))| {
                let mut node = build_node(&shape, format!("C{i}{s}"), &evidence_ids, &mut counter);
                node.criterion_id = Some(c.get(&criterion_ids).clone());
                node
            })
            .collect()
    };
    SafetyCaseParts {
        id: g.case_id,
        context,
        hazards,
        methodologies,
        indicators,
        criteria,
        evidence,
        claims,
    }
}

/// Random reference-resolved cases that satisfy every model invariant.
pub fn arb_case() -> impl Strategy<Value = SafetyCase> {
    gen().prop_map(|g| {
        let parts = build(g);
        SafetyCase::new(parts.clone()).unwrap_or_else(|e| panic!("generator built an invalid case: {e}\n{parts:#?}"))
    })
}

/// Upper rate bound by plain pmf summation and fixed-iteration bisection on
/// the event mean.
pub fn oracle_upper_bound(count: u64, exposure: f64, confidence: f64) -> f64 {
    let cdf = |mean: f64| {
        let mut p = (-mean).exp();
        let mut total = p;
        for i in 1..=count {
            p *= mean / i as f64;
            total += p;
        }
        total
    };
    let alpha = 1.0 - confidence;
    let mut hi = 1.0;
    while cdf(hi) > alpha {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) > alpha {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi) / exposure
}

pub const CORPUS: [&str; 8] = [
    "golden_cat.aur",
    "missing_sc1.aur",
    "corpus/balanced.aur",
    "corpus/aggregate_only.aur",
    "corpus/event_only.aur",
    "corpus/no_criteria.aur",
    "corpus/multi_category.aur",
    "corpus/dangling.aur",
];

/// Ledgers over the event definitions and units the corpus uses, plus
/// some it does not.
pub fn ledger_strategy() -> impl Strategy<Value = ExposureLedger> {
    let events = prop::sample::select(vec![
        "injury collision",
        "unmitigated actuation fault",
        "near miss",
    ]);
    let unit = prop::sample::select(vec!["miles", "hours", "km"]);
    let entry = (
        prop::sample::select(vec![Phase::Predicted, Phase::Observed]),
        prop_oneof![1e2f64..1e5, 1e5f64..1e8],
        unit,
        prop::collection::btree_map(events, 0u64..4, 0..3),
    );
    prop::collection::vec(entry, 0..5).prop_map(|rows| {
        let mut entries: Vec<LedgerEntry> = Vec::new();
        for (i, (phase, exposure, unit, counts)) in rows.into_iter().enumerate() {
            entries.push(LedgerEntry {
                release: format!("r{i}"),
                phase,
                exposure,
                exposure_unit: unit.to_string(),
                event_counts: counts.into_iter().map(|(k, v)| (k.to_string(), v)).collect::<BTreeMap<_, _>>(),
            });
        }
        ExposureLedger::new(entries).unwrap()
    })
}
