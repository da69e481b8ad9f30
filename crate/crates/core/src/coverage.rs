//! Region algebra over the behavioral acceptance-criteria space.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::keyword::{keyword_enum, Keyword};
use crate::model::{AcSpaceRegion, Aggregation, HazardCategory, SafetyCase, UnresolvedCase};
pub use crate::space::{Cell, DIMENSIONS, SPACE_SIZE};

keyword_enum! {
    /// Per-cell signal; ordered `none < weak < strong`.
    pub enum Signal: "signal" {
        None => "none",
        Weak => "weak",
        Strong => "strong",
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CoverageError {
    #[error("invalid region: no values for {}", .0.join(", "))]
    InvalidRegion(Vec<&'static str>),
}

/// Exactly the cartesian product of the region's dimension sets.
pub fn region_cells(region: &AcSpaceRegion) -> Result<BTreeSet<Cell>, CoverageError> {
    let empty = region.empty_dimensions();
    if !empty.is_empty() {
        return Err(CoverageError::InvalidRegion(empty));
    }
    let mut cells = BTreeSet::new();
    for &severity in &region.severities {
        for &role in &region.roles {
            for &capability in &region.capabilities {
                for &status in &region.statuses {
                    for &aggregation in &region.aggregations {
                        cells.insert(Cell { severity, role, capability, status, aggregation });
                    }
                }
            }
        }
    }
    Ok(cells)
}

/// Signal and contributing methodologies for every cell of the space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverageMap {
    signals: BTreeMap<Cell, Signal>,
    contributors: BTreeMap<Cell, BTreeSet<String>>,
}

impl Default for CoverageMap {
    fn default() -> Self {
        CoverageMap::empty()
    }
}

impl CoverageMap {
    /// Every cell at `none`.
    pub fn empty() -> Self {
        CoverageMap {
            signals: Cell::all().map(|c| (c, Signal::None)).collect(),
            contributors: BTreeMap::new(),
        }
    }

    /// Join one methodology's region into the map.
    pub fn add(&mut self, methodology_id: &str, region: &AcSpaceRegion) -> Result<(), CoverageError> {
        for cell in region_cells(region)? {
            let signal = if region.weak_cells.contains(&cell) { Signal::Weak } else { Signal::Strong };
            let slot = self.signals.entry(cell).or_insert(Signal::None);
            *slot = (*slot).max(signal);
            self.contributors.entry(cell).or_default().insert(methodology_id.to_string());
        }
        Ok(())
    }

    pub fn signal(&self, cell: &Cell) -> Signal {
        self.signals.get(cell).copied().unwrap_or(Signal::None)
    }

    pub fn contributors(&self, cell: &Cell) -> BTreeSet<String> {
        self.contributors.get(cell).cloned().unwrap_or_default()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Cell, Signal)> + '_ {
        self.signals.iter().map(|(c, s)| (*c, *s))
    }

    pub fn count(&self, signal: Signal) -> usize {
        self.signals.values().filter(|s| **s == signal).count()
    }

    pub fn covered(&self) -> BTreeSet<Cell> {
        self.iter().filter(|(_, s)| *s != Signal::None).map(|(c, _)| c).collect()
    }
}

/// Coverage of the whole case, joined over every methodology that maps a
/// region. Refuses a case with unresolved references.
pub fn coverage_map(case: &SafetyCase) -> Result<CoverageMap, UnresolvedCase> {
    case.ensure_resolved()?;
    Ok(coverage_map_unchecked(case))
}

pub(crate) fn coverage_map_unchecked(case: &SafetyCase) -> CoverageMap {
    let mut map = CoverageMap::empty();
    for m in case.methodologies() {
        if let Some(region) = &m.region {
            // Regions in a built case always have non-empty dimensions.
            let _ = map.add(&m.id, region);
        }
    }
    map
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Fraction {
    pub numerator: usize,
    pub denominator: usize,
}

impl Fraction {
    pub fn new(numerator: usize, denominator: usize) -> Self {
        Fraction { numerator, denominator }
    }

    pub fn as_f64(&self) -> f64 {
        if self.denominator == 0 {
            0.0
        } else {
            self.numerator as f64 / self.denominator as f64
        }
    }
}

impl std::fmt::Display for Fraction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}/{}", self.numerator, self.denominator)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Marginal {
    pub dimension: &'static str,
    pub value: &'static str,
    pub covered: Fraction,
    pub strong: Fraction,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct GapReport {
    pub overall: Fraction,
    pub strong: Fraction,
    pub weak: Fraction,
    /// Cells with no signal, in canonical order.
    pub uncovered: Vec<Cell>,
    /// Uncovered cells grouped by dimension, then by value.
    pub gaps_by_dimension: BTreeMap<&'static str, BTreeMap<&'static str, Vec<Cell>>>,
    pub marginals: Vec<Marginal>,
}

impl GapReport {
    pub fn marginal(&self, dimension: &str, value: &str) -> Option<&Marginal> {
        self.marginals.iter().find(|m| m.dimension == dimension && m.value == value)
    }
}

pub fn gap_report(map: &CoverageMap) -> GapReport {
    let total = SPACE_SIZE;
    let uncovered: Vec<Cell> = map.iter().filter(|(_, s)| *s == Signal::None).map(|(c, _)| c).collect();

    let mut gaps_by_dimension: BTreeMap<&'static str, BTreeMap<&'static str, Vec<Cell>>> = BTreeMap::new();
    for dim in DIMENSIONS {
        let groups = gaps_by_dimension.entry(dim).or_default();
        for cell in &uncovered {
            let value = cell.value_of(dim).expect("known dimension");
            groups.entry(value).or_default().push(*cell);
        }
    }

    let mut marginals = Vec::new();
    for dim in DIMENSIONS {
        for &value in crate::space::dimension_values(dim) {
            let in_slice: Vec<Signal> = map
                .iter()
                .filter(|(c, _)| c.value_of(dim) == Some(value))
                .map(|(_, s)| s)
                .collect();
            let n = in_slice.len();
            marginals.push(Marginal {
                dimension: dim,
                value,
                covered: Fraction::new(in_slice.iter().filter(|s| **s != Signal::None).count(), n),
                strong: Fraction::new(in_slice.iter().filter(|s| **s == Signal::Strong).count(), n),
            });
        }
    }

    GapReport {
        overall: Fraction::new(total - uncovered.len(), total),
        strong: Fraction::new(map.count(Signal::Strong), total),
        weak: Fraction::new(map.count(Signal::Weak), total),
        uncovered,
        gaps_by_dimension,
        marginals,
    }
}

keyword_enum! {
    /// Quadrants of the event-level / aggregate-level outcome matrix.
    pub enum BalanceClass: "balance class" {
        Balanced => "balanced",
        AggregateOnly => "aggregate_only",
        EventOnly => "event_only",
        None => "none",
    }
}

impl BalanceClass {
    /// What each quadrant means for the argument.
    pub fn advisory(self) -> &'static str {
        match self {
            BalanceClass::Balanced => {
                "an appropriate balance of event-level and aggregate-level acceptance criteria"
            }
            BalanceClass::AggregateOnly => {
                "aggregate-level criteria alone may not capture some risk posed by the ADS in individual scenarios"
            }
            BalanceClass::EventOnly => {
                "relying on event-level criteria alone precludes the holistic assessment of residual risk"
            }
            BalanceClass::None => {
                "no argumentation is possible in the absence of acceptance criteria"
            }
        }
    }
}

/// Classify a multiset of aggregation levels.
pub fn classify_balance(levels: impl IntoIterator<Item = Aggregation>) -> BalanceClass {
    let (mut event, mut aggregate) = (false, false);
    for level in levels {
        match level {
            Aggregation::EventLevel => event = true,
            Aggregation::AggregateLevel => aggregate = true,
        }
    }
    match (event, aggregate) {
        (true, true) => BalanceClass::Balanced,
        (false, true) => BalanceClass::AggregateOnly,
        (true, false) => BalanceClass::EventOnly,
        (false, false) => BalanceClass::None,
    }
}

/// Balance over the behavioral criteria of a case.
pub fn aggregation_balance(case: &SafetyCase) -> Result<BalanceClass, UnresolvedCase> {
    case.ensure_resolved()?;
    Ok(aggregation_balance_unchecked(case))
}

pub(crate) fn aggregation_balance_unchecked(case: &SafetyCase) -> BalanceClass {
    classify_balance(
        case.criteria()
            .iter()
            .filter(|c| case.is_behavioral(c))
            .map(|c| c.aggregation),
    )
}

/// Criteria and hazards per category. Only the behavioral category has a
/// defined acceptance-criteria space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CategorySummary {
    pub category: HazardCategory,
    pub hazards: usize,
    pub criteria: usize,
    pub space_defined: bool,
    pub note: &'static str,
}

pub fn category_summary(case: &SafetyCase) -> Vec<CategorySummary> {
    HazardCategory::ALL
        .iter()
        .map(|&category| {
            let hazards: BTreeSet<&str> = case
                .hazards()
                .iter()
                .filter(|h| h.has_category(category))
                .map(|h| h.id.as_str())
                .collect();
            let criteria = case
                .criteria()
                .iter()
                .filter(|c| c.hazard_ids.iter().any(|h| hazards.contains(h.as_str())))
                .count();
            let space_defined = category == HazardCategory::Behavioral;
            CategorySummary {
                category,
                hazards: hazards.len(),
                criteria,
                space_defined,
                note: if space_defined {
                    "mapped onto the five-dimensional behavioral space"
                } else {
                    "no framework space defined; reported by count and traceability only"
                },
            }
        })
        .collect()
}
