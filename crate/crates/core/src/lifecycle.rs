//! Exposure ledger, quantitative target checks and the readiness gate.
//!
//! Rate targets are checked with the exact one-sided Poisson upper
//! confidence bound on the event rate: for `k` events over exposure `E`, the
//! bound is the rate `λ` at which observing `k` or fewer events has
//! probability `1 - confidence`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::diagnostic::RuleId;
use crate::keyword::{keyword_enum, Keyword};
use crate::model::{AcceptanceCriterion, SafetyCase};
use crate::validator::{validate, RuleConfig};

keyword_enum! {
    pub enum Phase: "ledger phase" {
        Predicted => "predicted",
        Observed => "observed",
    }
}

keyword_enum! {
    pub enum TargetStatus: "target status" {
        Met => "met",
        Unmet => "unmet",
        InsufficientData => "insufficient_data",
    }
}

keyword_enum! {
    pub enum ReviewStatus: "review status" {
        Approved => "approved",
        Blocked => "blocked",
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LifecycleError {
    #[error("{0}")]
    Domain(String),
    #[error("criterion `{0}` has no quantitative rate target")]
    NotApplicable(String),
    #[error("criterion `{criterion}` counts exposure in `{expected}` but release `{release}` records `{found}`")]
    UnitMismatch {
        criterion: String,
        release: String,
        expected: String,
        found: String,
    },
    #[error("ledger line {line}: {message}")]
    Ledger { line: usize, message: String },
}

/// Relative width at which the bisection stops.
pub const BOUND_TOLERANCE: f64 = 1e-9;

/// `ln P(X <= count)` for `X ~ Poisson(mean)`, summed in log space.
fn log_poisson_cdf(count: u64, mean: f64) -> f64 {
    if mean == 0.0 {
        return 0.0;
    }
    let ln_mean = mean.ln();
    let mut log_term = -mean;
    let mut acc = log_term;
    for i in 1..=count {
        log_term += ln_mean - (i as f64).ln();
        // log-sum-exp of (acc, log_term)
        let (hi, lo) = if acc > log_term { (acc, log_term) } else { (log_term, acc) };
        acc = hi + (lo - hi).exp().ln_1p();
    }
    acc
}

/// Exact one-sided upper confidence bound on an event rate.
pub fn rate_upper_bound(count: u64, exposure: f64, confidence: f64) -> Result<f64, LifecycleError> {
    if !(exposure.is_finite() && exposure > 0.0) {
        return Err(LifecycleError::Domain(format!("exposure must be positive and finite, got {exposure}")));
    }
    if !(confidence > 0.0 && confidence < 1.0) {
        return Err(LifecycleError::Domain(format!(
            "confidence must lie strictly between 0 and 1, got {confidence}"
        )));
    }
    // P(X <= 0) = exp(-mean) = 1 - confidence
    if count == 0 {
        return Ok(-(-confidence).ln_1p() / exposure);
    }

    let log_alpha = (-confidence).ln_1p();
    let above = |mean: f64| log_poisson_cdf(count, mean) < log_alpha;
    let mut lo = 0.0_f64;
    let mut hi = count as f64 + 1.0;
    while !above(hi) {
        lo = hi;
        hi *= 2.0;
    }
    while hi - lo > BOUND_TOLERANCE * hi {
        let mid = 0.5 * (lo + hi);
        if above(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(0.5 * (lo + hi) / exposure)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LedgerEntry {
    pub release: String,
    pub phase: Phase,
    pub exposure: f64,
    pub exposure_unit: String,
    pub event_counts: BTreeMap<String, u64>,
}

/// Per-release exposure and event counts.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct ExposureLedger {
    entries: Vec<LedgerEntry>,
}

pub const LEDGER_HEADER: [&str; 6] = ["release", "phase", "exposure", "exposure_unit", "event_definition", "count"];

impl ExposureLedger {
    pub fn new(entries: Vec<LedgerEntry>) -> Result<Self, LifecycleError> {
        let mut seen = BTreeSet::new();
        for (i, e) in entries.iter().enumerate() {
            let err = |message: String| LifecycleError::Ledger { line: i + 1, message };
            if !(e.exposure.is_finite() && e.exposure > 0.0) {
                return Err(err(format!("release `{}` has non-positive exposure {}", e.release, e.exposure)));
            }
            if !seen.insert((e.phase, e.release.clone())) {
                return Err(err(format!("release `{}` appears twice in the {} phase", e.release, e.phase)));
            }
        }
        Ok(ExposureLedger { entries })
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn phase(&self, phase: Phase) -> impl Iterator<Item = &LedgerEntry> {
        self.entries.iter().filter(move |e| e.phase == phase)
    }

    /// Parse the comma separated ledger file. Rows of the same release and
    /// phase form one entry and must agree on exposure and unit.
    pub fn parse(text: &str) -> Result<Self, LifecycleError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let header_err = |message: String| LifecycleError::Ledger { line: 1, message };
        let headers = reader.headers().map_err(|e| header_err(e.to_string()))?;
        if headers.iter().collect::<Vec<_>>() != LEDGER_HEADER {
            return Err(header_err(format!("expected header `{}`", LEDGER_HEADER.join(","))));
        }

        let mut entries: Vec<LedgerEntry> = Vec::new();
        for record in reader.records() {
            let record = record.map_err(|e| LifecycleError::Ledger {
                line: e.position().map_or(0, |p| p.line() as usize),
                message: e.to_string(),
            })?;
            let line = record.position().map_or(0, |p| p.line() as usize);
            let err = |message: String| LifecycleError::Ledger { line, message };
            let release = record[0].to_string();
            let phase = Phase::from_keyword(&record[1]).map_err(|e| err(e.to_string()))?;
            let exposure: f64 = record[2]
                .parse()
                .ok()
                .filter(|x: &f64| x.is_finite() && *x > 0.0)
                .ok_or_else(|| err(format!("exposure must be a positive number, found `{}`", &record[2])))?;
            let unit = record[3].to_string();
            let event = record[4].to_string();
            let count: u64 = record[5]
                .parse()
                .map_err(|_| err(format!("count must be a non-negative integer, found `{}`", &record[5])))?;
            if release.is_empty() || unit.is_empty() || event.is_empty() {
                return Err(err("release, exposure_unit and event_definition must be non-empty".into()));
            }

            match entries.iter_mut().find(|e| e.release == release && e.phase == phase) {
                Some(entry) => {
                    if entry.exposure != exposure || entry.exposure_unit != unit {
                        return Err(err(format!(
                            "release `{release}` ({phase}) records conflicting exposure {exposure} {unit}, earlier {} {}",
                            entry.exposure, entry.exposure_unit
                        )));
                    }
                    if entry.event_counts.insert(event.clone(), count).is_some() {
                        return Err(err(format!("release `{release}` ({phase}) counts `{event}` twice")));
                    }
                }
                None => entries.push(LedgerEntry {
                    release,
                    phase,
                    exposure,
                    exposure_unit: unit,
                    event_counts: BTreeMap::from([(event, count)]),
                }),
            }
        }
        ExposureLedger::new(entries)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TargetCheck {
    pub criterion_id: String,
    pub phase: Phase,
    pub event_definition: String,
    pub events: u64,
    pub exposure: f64,
    pub exposure_unit: String,
    pub confidence: f64,
    /// Absent when there is no data to bound.
    pub upper_bound: Option<f64>,
    pub target: f64,
    pub status: TargetStatus,
}

/// Bound the event rate of one criterion over every entry of a phase that
/// counts the criterion's event definition.
pub fn check_target(
    criterion: &AcceptanceCriterion,
    ledger: &ExposureLedger,
    phase: Phase,
) -> Result<TargetCheck, LifecycleError> {
    let target = criterion
        .rate_bound()
        .ok_or_else(|| LifecycleError::NotApplicable(criterion.id.clone()))?;
    let (mut exposure, mut events, mut entries) = (0.0, 0u64, 0usize);
    for entry in ledger.phase(phase) {
        let Some(&count) = entry.event_counts.get(&target.event_definition) else {
            continue;
        };
        if entry.exposure_unit != target.exposure_unit {
            return Err(LifecycleError::UnitMismatch {
                criterion: criterion.id.clone(),
                release: entry.release.clone(),
                expected: target.exposure_unit.clone(),
                found: entry.exposure_unit.clone(),
            });
        }
        exposure += entry.exposure;
        events += count;
        entries += 1;
    }

    let (upper_bound, status) = if entries == 0 {
        (None, TargetStatus::InsufficientData)
    } else {
        let ub = rate_upper_bound(events, exposure, target.confidence)?;
        let status = if ub <= target.max_rate { TargetStatus::Met } else { TargetStatus::Unmet };
        (Some(ub), status)
    };
    Ok(TargetCheck {
        criterion_id: criterion.id.clone(),
        phase,
        event_definition: target.event_definition.clone(),
        events,
        exposure,
        exposure_unit: target.exposure_unit.clone(),
        confidence: target.confidence,
        upper_bound,
        target: target.max_rate,
        status,
    })
}

/// Why a review is blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockerCause {
    Rule(RuleId),
    Target(TargetStatus),
    /// The target could not be checked at all (unit mismatch and the like).
    TargetError,
}

impl fmt::Display for BlockerCause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BlockerCause::Rule(r) => f.write_str(r.as_str()),
            BlockerCause::Target(s) => write!(f, "target_{s}"),
            BlockerCause::TargetError => f.write_str("target_error"),
        }
    }
}

impl Serialize for BlockerCause {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Blocker {
    /// Criterion, claim or other element id the blocker is about.
    pub subject: String,
    pub cause: BlockerCause,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReadinessDecision {
    pub status: ReviewStatus,
    pub blockers: Vec<Blocker>,
    pub checks: Vec<TargetCheck>,
}

impl ReadinessDecision {
    pub fn is_approved(&self) -> bool {
        self.status == ReviewStatus::Approved
    }
}

/// The readiness gate: the structural rules (with lifecycle context
/// enforced) plus every quantitative target on predicted-phase data.
pub fn readiness_review(case: &SafetyCase, ledger: &ExposureLedger, config: &RuleConfig) -> ReadinessDecision {
    let mut config = config.clone();
    config.review_ready = true;
    config.overrides.remove(&RuleId::E011);

    let mut blockers: Vec<Blocker> = validate(case, &config)
        .into_iter()
        .filter(|d| d.is_error())
        .map(|d| Blocker { subject: d.subject_id, cause: BlockerCause::Rule(d.rule_id), reason: d.message })
        .collect();

    let mut checks = Vec::new();
    for criterion in case.criteria().iter().filter(|c| c.rate_bound().is_some()) {
        match check_target(criterion, ledger, Phase::Predicted) {
            Ok(check) => {
                let reason = match (check.status, check.upper_bound) {
                    (TargetStatus::Met, _) => None,
                    (TargetStatus::Unmet, Some(ub)) => Some(format!(
                        "upper bound {ub:.6e} per {} at {} confidence exceeds the target {:e} ({} events over {} {})",
                        check.exposure_unit, check.confidence, check.target, check.events, check.exposure, check.exposure_unit
                    )),
                    _ => Some(format!(
                        "no predicted-phase exposure records `{}`",
                        check.event_definition
                    )),
                };
                if let Some(reason) = reason {
                    blockers.push(Blocker {
                        subject: criterion.id.clone(),
                        cause: BlockerCause::Target(check.status),
                        reason,
                    });
                }
                checks.push(check);
            }
            Err(e) => blockers.push(Blocker {
                subject: criterion.id.clone(),
                cause: BlockerCause::TargetError,
                reason: e.to_string(),
            }),
        }
    }

    let status = if blockers.is_empty() { ReviewStatus::Approved } else { ReviewStatus::Blocked };
    ReadinessDecision { status, blockers, checks }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DriftFinding {
    pub criterion_id: String,
    pub target: f64,
    /// Absent when there is no predicted-phase data.
    pub predicted_upper_bound: Option<f64>,
    pub predicted_status: TargetStatus,
    pub observed_upper_bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum DriftOutcome {
    Drift(DriftFinding),
    NoDrift(DriftFinding),
    InsufficientData { criterion_id: String },
}

/// Compare observed performance after deployment with the target the
/// prediction was gated on. Drift means the observed-phase upper bound
/// exceeds the target.
pub fn drift_check(criterion: &AcceptanceCriterion, ledger: &ExposureLedger) -> Result<DriftOutcome, LifecycleError> {
    let observed = check_target(criterion, ledger, Phase::Observed)?;
    let Some(observed_upper_bound) = observed.upper_bound else {
        return Ok(DriftOutcome::InsufficientData { criterion_id: criterion.id.clone() });
    };
    let predicted = check_target(criterion, ledger, Phase::Predicted)?;
    let finding = DriftFinding {
        criterion_id: criterion.id.clone(),
        target: observed.target,
        predicted_upper_bound: predicted.upper_bound,
        predicted_status: predicted.status,
        observed_upper_bound,
    };
    Ok(if observed.status == TargetStatus::Unmet {
        DriftOutcome::Drift(finding)
    } else {
        DriftOutcome::NoDrift(finding)
    })
}
