//! Safety-case data model.
//!
//! A [`SafetyCase`] is built once through [`SafetyCase::new`], which checks
//! every structural invariant except cross-references. Dangling references
//! are reported as findings by [`resolve_references`] so that a document with
//! a typo can still be loaded and diagnosed.

use std::collections::BTreeSet;
use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::keyword::{keyword_enum, Keyword};
pub use crate::space::{Aggregation, Capability, Cell, FunctionalityStatus, Role, SeverityLevel};

keyword_enum! {
    /// The three (overlapping) hazard categories.
    pub enum HazardCategory: "hazard category" {
        Architectural => "architectural",
        Behavioral => "behavioral",
        InServiceOperational => "in_service_operational",
    }
}

keyword_enum! {
    /// Position of an indicator on the causal chain from triggering
    /// condition to harm. Ordered; `Harm` is the maximum.
    pub enum CausalStage: "causal stage" {
        TriggeringCondition => "triggering_condition",
        HazardousBehavior => "hazardous_behavior",
        Hazard => "hazard",
        HazardousEvent => "hazardous_event",
        Harm => "harm",
    }
}

keyword_enum! {
    pub enum IndicatorClass: "indicator class" {
        Leading => "leading",
        Lagging => "lagging",
    }
}

keyword_enum! {
    pub enum EvidenceStrength: "evidence strength" {
        Strong => "strong",
        Weak => "weak",
    }
}

keyword_enum! {
    pub enum ClaimKind: "claim kind" {
        TopClaim => "claim",
        Reasonableness => "reasonableness",
        Satisfaction => "satisfaction",
        CoverageAssessment => "coverage_assessment",
        ConfidenceAssessment => "confidence_assessment",
        Facet => "facet",
    }
}

/// Indicators measuring harm itself (collision counts and the like) are
/// lagging; everything upstream of harm is leading.
pub fn classify_indicator(stage: CausalStage) -> IndicatorClass {
    match stage {
        CausalStage::Harm => IndicatorClass::Lagging,
        _ => IndicatorClass::Leading,
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ContextBlock {
    pub use_case: String,
    pub vehicle_configuration: String,
    pub operational_configuration: String,
    pub odd_selection: String,
    pub deployment_scale: String,
    pub platform: String,
    pub release: String,
}

impl ContextBlock {
    /// Field names in canonical order.
    pub const FIELDS: [&'static str; 7] = [
        "use_case",
        "vehicle_configuration",
        "operational_configuration",
        "odd_selection",
        "deployment_scale",
        "platform",
        "release",
    ];

    /// The four fields that frame a development cycle and must be settled
    /// before a readiness review.
    pub const LIFECYCLE_FIELDS: [&'static str; 4] = [
        "vehicle_configuration",
        "operational_configuration",
        "odd_selection",
        "deployment_scale",
    ];

    pub fn get(&self, field: &str) -> Option<&str> {
        Some(match field {
            "use_case" => &self.use_case,
            "vehicle_configuration" => &self.vehicle_configuration,
            "operational_configuration" => &self.operational_configuration,
            "odd_selection" => &self.odd_selection,
            "deployment_scale" => &self.deployment_scale,
            "platform" => &self.platform,
            "release" => &self.release,
            _ => return None,
        })
    }

    pub fn get_mut(&mut self, field: &str) -> Option<&mut String> {
        Some(match field {
            "use_case" => &mut self.use_case,
            "vehicle_configuration" => &mut self.vehicle_configuration,
            "operational_configuration" => &mut self.operational_configuration,
            "odd_selection" => &mut self.odd_selection,
            "deployment_scale" => &mut self.deployment_scale,
            "platform" => &mut self.platform,
            "release" => &mut self.release,
            _ => return None,
        })
    }

    /// Lifecycle fields that are blank.
    pub fn missing_lifecycle_fields(&self) -> Vec<&'static str> {
        Self::LIFECYCLE_FIELDS
            .iter()
            .copied()
            .filter(|f| self.get(f).is_none_or(|v| v.trim().is_empty()))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hazard {
    pub id: String,
    pub description: String,
    pub primary_category: HazardCategory,
    pub secondary_categories: BTreeSet<HazardCategory>,
}

impl Hazard {
    pub fn has_category(&self, category: HazardCategory) -> bool {
        self.primary_category == category || self.secondary_categories.contains(&category)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Indicator {
    pub id: String,
    pub description: String,
    pub causal_stage: CausalStage,
}

impl Indicator {
    pub fn class(&self) -> IndicatorClass {
        classify_indicator(self.causal_stage)
    }
}

/// A subset of the behavioral acceptance-criteria space: the cartesian
/// product of the five dimension sets, with some cells marked as carrying
/// only weak signal.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AcSpaceRegion {
    pub severities: BTreeSet<SeverityLevel>,
    pub roles: BTreeSet<Role>,
    pub capabilities: BTreeSet<Capability>,
    pub statuses: BTreeSet<FunctionalityStatus>,
    pub aggregations: BTreeSet<Aggregation>,
    pub weak_cells: BTreeSet<Cell>,
}

impl AcSpaceRegion {
    /// The region spanning every value of every dimension.
    pub fn full() -> Self {
        AcSpaceRegion {
            severities: SeverityLevel::ALL.iter().copied().collect(),
            roles: Role::ALL.iter().copied().collect(),
            capabilities: Capability::ALL.iter().copied().collect(),
            statuses: FunctionalityStatus::ALL.iter().copied().collect(),
            aggregations: Aggregation::ALL.iter().copied().collect(),
            weak_cells: BTreeSet::new(),
        }
    }

    /// Names of the dimensions whose value set is empty.
    pub fn empty_dimensions(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        if self.severities.is_empty() {
            out.push("severity");
        }
        if self.roles.is_empty() {
            out.push("role");
        }
        if self.capabilities.is_empty() {
            out.push("capability");
        }
        if self.statuses.is_empty() {
            out.push("status");
        }
        if self.aggregations.is_empty() {
            out.push("aggregation");
        }
        out
    }

    /// Whether `cell` lies in the product of the dimension sets.
    pub fn contains(&self, cell: &Cell) -> bool {
        self.severities.contains(&cell.severity)
            && self.roles.contains(&cell.role)
            && self.capabilities.contains(&cell.capability)
            && self.statuses.contains(&cell.status)
            && self.aggregations.contains(&cell.aggregation)
    }

    /// Cells of the region at one severity level.
    pub fn cells_at(&self, severity: SeverityLevel) -> Vec<Cell> {
        Cell::all()
            .filter(|c| c.severity == severity && self.contains(c))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Methodology {
    pub id: String,
    pub name: String,
    /// Absent for methodologies that address no behavioral hazards.
    pub region: Option<AcSpaceRegion>,
    pub hazard_categories: BTreeSet<HazardCategory>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateBound {
    pub event_definition: String,
    /// Events per exposure unit.
    pub max_rate: f64,
    pub exposure_unit: String,
    pub confidence: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ValidationTarget {
    Qualitative(String),
    RateBound(RateBound),
}

#[derive(Debug, Clone, PartialEq)]
pub struct AcceptanceCriterion {
    pub id: String,
    pub statement: String,
    pub hazard_ids: BTreeSet<String>,
    pub methodology_id: String,
    pub indicator_ids: BTreeSet<String>,
    pub region: Option<AcSpaceRegion>,
    pub aggregation: Aggregation,
    pub target: Option<ValidationTarget>,
}

impl AcceptanceCriterion {
    pub fn rate_bound(&self) -> Option<&RateBound> {
        match &self.target {
            Some(ValidationTarget::RateBound(rb)) => Some(rb),
            _ => None,
        }
    }
}

/// One row of the argument table: an argument, the evidence it cites, its
/// stated limitations and the alternatives that were considered and
/// rejected.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ArgumentRow {
    pub label: String,
    pub argument: String,
    pub evidence_ids: BTreeSet<String>,
    pub limitations: String,
    pub counter_argument: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClaimNode {
    pub id: String,
    /// Only top claims name a criterion.
    pub criterion_id: Option<String>,
    pub kind: ClaimKind,
    /// Only facets carry a label, e.g. "Scoring confidence".
    pub facet_label: Option<String>,
    /// Free-text claim statement; may be empty.
    pub statement: String,
    pub children: Vec<ClaimNode>,
    pub rows: Vec<ArgumentRow>,
}

impl ClaimNode {
    /// Depth-first walk over this node and its descendants.
    pub fn walk<'a>(&'a self, visit: &mut dyn FnMut(&'a ClaimNode, Option<&'a ClaimNode>)) {
        fn go<'a>(
            node: &'a ClaimNode,
            parent: Option<&'a ClaimNode>,
            visit: &mut dyn FnMut(&'a ClaimNode, Option<&'a ClaimNode>),
        ) {
            visit(node, parent);
            for child in &node.children {
                go(child, Some(node), visit);
            }
        }
        go(self, None, visit);
    }

    /// Evidence ids cited by any row in this subtree.
    pub fn cited_evidence(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.walk(&mut |node, _| {
            for row in &node.rows {
                out.extend(row.evidence_ids.iter().cloned());
            }
        });
        out
    }

    pub fn has_child(&self, kind: ClaimKind) -> bool {
        self.children.iter().any(|c| c.kind == kind)
    }
}

/// Key used for an argument row wherever a row needs an identity.
pub fn row_key(node_id: &str, label: &str) -> String {
    format!("{node_id}#{label}")
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub id: String,
    pub methodology_id: String,
    pub kind: String,
    pub uri: String,
    pub strength: EvidenceStrength,
}

/// What a [`SafetyCase`] is assembled from.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct SafetyCaseParts {
    pub id: String,
    pub context: ContextBlock,
    pub hazards: Vec<Hazard>,
    pub methodologies: Vec<Methodology>,
    pub indicators: Vec<Indicator>,
    pub criteria: Vec<AcceptanceCriterion>,
    pub evidence: Vec<Evidence>,
    pub claims: Vec<ClaimNode>,
}

/// A structural invariant broken while assembling a case.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("identifier `{id}` is declared more than once")]
    DuplicateId { id: String },
    #[error("argument label `{label}` is used more than once under `{node}`")]
    DuplicateRowLabel { node: String, label: String },
    #[error("hazard `{hazard}` lists its primary category among its secondary categories")]
    PrimaryAlsoSecondary { hazard: String },
    #[error("region of `{owner}` has no values for dimension `{dimension}`")]
    EmptyRegionDimension { owner: String, dimension: &'static str },
    #[error("region of `{owner}` marks weak cells that lie outside the region")]
    WeakCellOutsideRegion { owner: String },
    #[error("methodology `{methodology}` maps a region but does not address behavioral hazards")]
    RegionWithoutBehavioral { methodology: String },
    #[error("criterion `{criterion}` uses aggregation `{aggregation}` which its region excludes")]
    AggregationOutsideRegion { criterion: String, aggregation: Aggregation },
    #[error("criterion `{criterion}` traces to no hazard")]
    NoHazards { criterion: String },
    #[error("criterion `{criterion}` has an invalid rate target: {reason}")]
    InvalidRateTarget { criterion: String, reason: String },
    #[error("`{node}` is a top claim and must name exactly one criterion")]
    TopClaimWithoutCriterion { node: String },
    #[error("only top claims may name a criterion, but `{node}` does")]
    CriterionOnSubclaim { node: String },
    #[error("`{node}` of kind `{kind}` cannot appear {placement}")]
    MisplacedClaim { node: String, kind: ClaimKind, placement: String },
    #[error("facet `{node}` has no label")]
    FacetWithoutLabel { node: String },
    #[error("`{node}` is not a facet but carries a facet label")]
    LabelOnNonFacet { node: String },
    #[error("argument `{row}` has no argument text")]
    EmptyArgument { row: String },
}

impl ModelError {
    /// The element the error is about, as used by span lookups.
    pub fn subject(&self) -> String {
        match self {
            ModelError::DuplicateId { id } => id.clone(),
            ModelError::DuplicateRowLabel { node, label } => row_key(node, label),
            ModelError::PrimaryAlsoSecondary { hazard } => hazard.clone(),
            ModelError::EmptyRegionDimension { owner, .. }
            | ModelError::WeakCellOutsideRegion { owner } => owner.clone(),
            ModelError::RegionWithoutBehavioral { methodology } => methodology.clone(),
            ModelError::AggregationOutsideRegion { criterion, .. }
            | ModelError::NoHazards { criterion }
            | ModelError::InvalidRateTarget { criterion, .. } => criterion.clone(),
            ModelError::TopClaimWithoutCriterion { node }
            | ModelError::CriterionOnSubclaim { node }
            | ModelError::MisplacedClaim { node, .. }
            | ModelError::FacetWithoutLabel { node }
            | ModelError::LabelOnNonFacet { node } => node.clone(),
            ModelError::EmptyArgument { row } => row.clone(),
        }
    }
}

/// All invariant violations found while assembling a case.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ModelErrors(pub Vec<ModelError>);

impl fmt::Display for ModelErrors {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{e}")?;
        }
        Ok(())
    }
}

/// Root of a safety case. Immutable once built; top-level collections are
/// kept in natural identifier order.
#[derive(Debug, Clone, PartialEq)]
pub struct SafetyCase {
    parts: SafetyCaseParts,
}

impl SafetyCase {
    pub fn new(mut parts: SafetyCaseParts) -> Result<Self, ModelErrors> {
        let errors = check_invariants(&parts);
        if !errors.is_empty() {
            return Err(ModelErrors(errors));
        }
        fn by_id<T>(items: &mut [T], id: impl Fn(&T) -> &str) {
            items.sort_by(|a, b| natord::compare(id(a), id(b)));
        }
        by_id(&mut parts.hazards, |h| &h.id);
        by_id(&mut parts.methodologies, |m| &m.id);
        by_id(&mut parts.indicators, |i| &i.id);
        by_id(&mut parts.criteria, |c| &c.id);
        by_id(&mut parts.evidence, |e| &e.id);
        by_id(&mut parts.claims, |c| &c.id);
        Ok(SafetyCase { parts })
    }

    pub fn into_parts(self) -> SafetyCaseParts {
        self.parts
    }

    pub fn parts(&self) -> &SafetyCaseParts {
        &self.parts
    }

    pub fn id(&self) -> &str {
        &self.parts.id
    }

    pub fn context(&self) -> &ContextBlock {
        &self.parts.context
    }

    pub fn hazards(&self) -> &[Hazard] {
        &self.parts.hazards
    }

    pub fn methodologies(&self) -> &[Methodology] {
        &self.parts.methodologies
    }

    pub fn indicators(&self) -> &[Indicator] {
        &self.parts.indicators
    }

    pub fn criteria(&self) -> &[AcceptanceCriterion] {
        &self.parts.criteria
    }

    pub fn evidence(&self) -> &[Evidence] {
        &self.parts.evidence
    }

    /// Top claims.
    pub fn claims(&self) -> &[ClaimNode] {
        &self.parts.claims
    }

    pub fn hazard(&self, id: &str) -> Option<&Hazard> {
        self.parts.hazards.iter().find(|h| h.id == id)
    }

    pub fn methodology(&self, id: &str) -> Option<&Methodology> {
        self.parts.methodologies.iter().find(|m| m.id == id)
    }

    pub fn criterion(&self, id: &str) -> Option<&AcceptanceCriterion> {
        self.parts.criteria.iter().find(|c| c.id == id)
    }

    pub fn evidence_item(&self, id: &str) -> Option<&Evidence> {
        self.parts.evidence.iter().find(|e| e.id == id)
    }

    pub fn indicator(&self, id: &str) -> Option<&Indicator> {
        self.parts.indicators.iter().find(|i| i.id == id)
    }

    /// A criterion is behavioral when any hazard it covers carries the
    /// behavioral category, primary or secondary.
    pub fn is_behavioral(&self, criterion: &AcceptanceCriterion) -> bool {
        criterion
            .hazard_ids
            .iter()
            .filter_map(|id| self.hazard(id))
            .any(|h| h.has_category(HazardCategory::Behavioral))
    }

    /// Every claim node of every tree, depth first, with its parent.
    pub fn walk_claims<'a>(&'a self, visit: &mut dyn FnMut(&'a ClaimNode, Option<&'a ClaimNode>)) {
        for root in &self.parts.claims {
            root.walk(visit);
        }
    }
}

fn check_invariants(parts: &SafetyCaseParts) -> Vec<ModelError> {
    let mut errors = Vec::new();

    let mut ids: Vec<&str> = Vec::new();
    ids.extend(parts.hazards.iter().map(|h| h.id.as_str()));
    ids.extend(parts.methodologies.iter().map(|m| m.id.as_str()));
    ids.extend(parts.indicators.iter().map(|i| i.id.as_str()));
    ids.extend(parts.criteria.iter().map(|c| c.id.as_str()));
    ids.extend(parts.evidence.iter().map(|e| e.id.as_str()));
    for root in &parts.claims {
        root.walk(&mut |node, _| ids.push(node.id.as_str()));
    }
    let mut unique: BTreeSet<&str> = BTreeSet::new();
    for id in ids {
        if !unique.insert(id) {
            errors.push(ModelError::DuplicateId { id: id.to_string() });
        }
    }

    for h in &parts.hazards {
        if h.secondary_categories.contains(&h.primary_category) {
            errors.push(ModelError::PrimaryAlsoSecondary { hazard: h.id.clone() });
        }
    }

    for m in &parts.methodologies {
        if let Some(region) = &m.region {
            check_region(&m.id, region, &mut errors);
            if !m.hazard_categories.contains(&HazardCategory::Behavioral) {
                errors.push(ModelError::RegionWithoutBehavioral { methodology: m.id.clone() });
            }
        }
    }

    for c in &parts.criteria {
        if c.hazard_ids.is_empty() {
            errors.push(ModelError::NoHazards { criterion: c.id.clone() });
        }
        if let Some(region) = &c.region {
            check_region(&c.id, region, &mut errors);
            if !region.aggregations.is_empty() && !region.aggregations.contains(&c.aggregation) {
                errors.push(ModelError::AggregationOutsideRegion {
                    criterion: c.id.clone(),
                    aggregation: c.aggregation,
                });
            }
        }
        if let Some(rb) = c.rate_bound() {
            let reason = if !(rb.max_rate.is_finite() && rb.max_rate > 0.0) {
                Some(format!("max rate must be positive, got {}", rb.max_rate))
            } else if !(rb.confidence > 0.0 && rb.confidence < 1.0) {
                Some(format!("confidence must lie strictly between 0 and 1, got {}", rb.confidence))
            } else {
                None
            };
            if let Some(reason) = reason {
                errors.push(ModelError::InvalidRateTarget { criterion: c.id.clone(), reason });
            }
        }
    }

    for root in &parts.claims {
        check_claim(root, None, &mut errors);
    }

    errors
}

fn check_region(owner: &str, region: &AcSpaceRegion, errors: &mut Vec<ModelError>) {
    for dimension in region.empty_dimensions() {
        errors.push(ModelError::EmptyRegionDimension { owner: owner.to_string(), dimension });
    }
    if region.weak_cells.iter().any(|c| !region.contains(c)) {
        errors.push(ModelError::WeakCellOutsideRegion { owner: owner.to_string() });
    }
}

fn check_claim(node: &ClaimNode, parent: Option<ClaimKind>, errors: &mut Vec<ModelError>) {
    use ClaimKind::*;

    let placement_ok = match (node.kind, parent) {
        (TopClaim, None) => true,
        (TopClaim, Some(_)) | (_, None) => false,
        (CoverageAssessment | ConfidenceAssessment, Some(p)) => p == Satisfaction,
        (Facet, Some(p)) => p == ConfidenceAssessment,
        (Reasonableness | Satisfaction, Some(_)) => true,
    };
    if !placement_ok {
        let placement = match (node.kind, parent) {
            (_, None) => "at the root of a claim tree".to_string(),
            (TopClaim, Some(_)) => "beneath another claim".to_string(),
            (_, Some(p)) => format!("beneath a `{}` node", p.as_str()),
        };
        errors.push(ModelError::MisplacedClaim {
            node: node.id.clone(),
            kind: node.kind,
            placement,
        });
    }

    match (node.kind, &node.criterion_id) {
        (TopClaim, None) => errors.push(ModelError::TopClaimWithoutCriterion { node: node.id.clone() }),
        (TopClaim, Some(c)) if c.is_empty() => {
            errors.push(ModelError::TopClaimWithoutCriterion { node: node.id.clone() })
        }
        (k, Some(_)) if k != TopClaim => {
            errors.push(ModelError::CriterionOnSubclaim { node: node.id.clone() })
        }
        _ => {}
    }

    match (node.kind, &node.facet_label) {
        (Facet, None) => errors.push(ModelError::FacetWithoutLabel { node: node.id.clone() }),
        (Facet, Some(l)) if l.trim().is_empty() => {
            errors.push(ModelError::FacetWithoutLabel { node: node.id.clone() })
        }
        (k, Some(_)) if k != Facet => errors.push(ModelError::LabelOnNonFacet { node: node.id.clone() }),
        _ => {}
    }

    let mut labels = BTreeSet::new();
    for row in &node.rows {
        if !labels.insert(row.label.as_str()) {
            errors.push(ModelError::DuplicateRowLabel {
                node: node.id.clone(),
                label: row.label.clone(),
            });
        }
        if row.argument.trim().is_empty() {
            errors.push(ModelError::EmptyArgument { row: row_key(&node.id, &row.label) });
        }
    }

    for child in &node.children {
        check_claim(child, Some(node.kind), errors);
    }
}

keyword_enum! {
    /// The field of a referrer that holds a cross-reference.
    pub enum ReferenceField: "reference field" {
        HazardIds => "hazard_ids",
        MethodologyId => "methodology_id",
        IndicatorIds => "indicator_ids",
        EvidenceIds => "evidence_ids",
        CriterionId => "criterion_id",
    }
}

/// A cross-reference that names no existing element.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct DanglingReference {
    /// Element id, or a row key for argument rows.
    pub referrer: String,
    pub field: ReferenceField,
    pub missing: String,
}

impl fmt::Display for DanglingReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "`{}` refers to `{}` in `{}`, but no such element is declared",
            self.referrer, self.missing, self.field
        )
    }
}

/// Returned by analyses that require every reference to resolve.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("case has {} unresolved reference(s), first: {}", .0.len(), .0[0])]
pub struct UnresolvedCase(pub Vec<DanglingReference>);

impl SafetyCase {
    pub fn ensure_resolved(&self) -> Result<(), UnresolvedCase> {
        let dangling = resolve_references(self);
        if dangling.is_empty() {
            Ok(())
        } else {
            Err(UnresolvedCase(dangling))
        }
    }
}

/// Every cross-reference that does not resolve, in document order.
pub fn resolve_references(case: &SafetyCase) -> Vec<DanglingReference> {
    let mut out = Vec::new();
    let mut dangle = |referrer: &str, field: ReferenceField, missing: &str| {
        out.push(DanglingReference {
            referrer: referrer.to_string(),
            field,
            missing: missing.to_string(),
        })
    };

    for c in case.criteria() {
        for h in &c.hazard_ids {
            if case.hazard(h).is_none() {
                dangle(&c.id, ReferenceField::HazardIds, h);
            }
        }
        if case.methodology(&c.methodology_id).is_none() {
            dangle(&c.id, ReferenceField::MethodologyId, &c.methodology_id);
        }
        for i in &c.indicator_ids {
            if case.indicator(i).is_none() {
                dangle(&c.id, ReferenceField::IndicatorIds, i);
            }
        }
    }
    for e in case.evidence() {
        if case.methodology(&e.methodology_id).is_none() {
            dangle(&e.id, ReferenceField::MethodologyId, &e.methodology_id);
        }
    }
    case.walk_claims(&mut |node, _| {
        if let Some(criterion) = &node.criterion_id {
            if case.criterion(criterion).is_none() {
                dangle(&node.id, ReferenceField::CriterionId, criterion);
            }
        }
        for row in &node.rows {
            for e in &row.evidence_ids {
                if case.evidence_item(e).is_none() {
                    dangle(&row_key(&node.id, &row.label), ReferenceField::EvidenceIds, e);
                }
            }
        }
    });
    out
}

#[cfg(test)]
pub(crate) mod fixtures {
    use super::*;

    pub fn set<T: Ord + Clone>(items: &[T]) -> BTreeSet<T> {
        items.iter().cloned().collect()
    }

    pub fn ids(items: &[&str]) -> BTreeSet<String> {
        items.iter().map(|s| s.to_string()).collect()
    }

    pub fn row(label: &str, evidence: &[&str]) -> ArgumentRow {
        ArgumentRow {
            label: label.into(),
            argument: format!("argument {label}"),
            evidence_ids: ids(evidence),
            limitations: "scope limited".into(),
            counter_argument: "alternative rejected".into(),
        }
    }

    pub fn node(id: &str, kind: ClaimKind, children: Vec<ClaimNode>, rows: Vec<ArgumentRow>) -> ClaimNode {
        ClaimNode {
            id: id.into(),
            criterion_id: None,
            kind,
            facet_label: (kind == ClaimKind::Facet).then(|| format!("facet {id}")),
            statement: String::new(),
            children,
            rows,
        }
    }

    pub fn cat_region() -> AcSpaceRegion {
        AcSpaceRegion {
            severities: set(SeverityLevel::ALL),
            roles: set(&[Role::Responder]),
            capabilities: set(&[Capability::CollisionAvoidance]),
            statuses: set(&[FunctionalityStatus::Nominal]),
            aggregations: set(&[Aggregation::AggregateLevel]),
            weak_cells: BTreeSet::new(),
        }
    }

    /// One hazard, one methodology, one criterion, one complete claim tree.
    pub fn minimal_parts() -> SafetyCaseParts {
        let claim = ClaimNode {
            criterion_id: Some("AC1".into()),
            ..node(
                "C1",
                ClaimKind::TopClaim,
                vec![
                    node("C1.1", ClaimKind::Reasonableness, vec![], vec![row("A.1", &["E1"])]),
                    node(
                        "C1.2",
                        ClaimKind::Satisfaction,
                        vec![
                            node("C1.2.1", ClaimKind::CoverageAssessment, vec![], vec![row("A.1", &["E1"])]),
                            node("C1.2.2", ClaimKind::ConfidenceAssessment, vec![], vec![row("A.1", &["E1"])]),
                        ],
                        vec![],
                    ),
                ],
                vec![],
            )
        };
        SafetyCaseParts {
            id: "minimal".into(),
            context: ContextBlock {
                use_case: "ride-hailing".into(),
                vehicle_configuration: "platform A".into(),
                operational_configuration: "rider-only".into(),
                odd_selection: "urban".into(),
                deployment_scale: "100 vehicles".into(),
                platform: "A".into(),
                release: "1.0".into(),
            },
            hazards: vec![Hazard {
                id: "H1".into(),
                description: "collision".into(),
                primary_category: HazardCategory::Behavioral,
                secondary_categories: BTreeSet::new(),
            }],
            methodologies: vec![Methodology {
                id: "M1".into(),
                name: "collision avoidance testing".into(),
                region: Some(cat_region()),
                hazard_categories: set(&[HazardCategory::Behavioral]),
            }],
            indicators: vec![],
            criteria: vec![AcceptanceCriterion {
                id: "AC1".into(),
                statement: "comparable or better than reference".into(),
                hazard_ids: ids(&["H1"]),
                methodology_id: "M1".into(),
                indicator_ids: BTreeSet::new(),
                region: None,
                aggregation: Aggregation::AggregateLevel,
                target: None,
            }],
            evidence: vec![Evidence {
                id: "E1".into(),
                methodology_id: "M1".into(),
                kind: "report".into(),
                uri: "doc://cat".into(),
                strength: EvidenceStrength::Strong,
            }],
            claims: vec![claim],
        }
    }
}
