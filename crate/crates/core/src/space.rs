//! The discretized five-dimensional acceptance-criteria space for behavioral
//! hazards: severity potential, conflict role, behavioral capability,
//! functionality status and aggregation level.
//!
//! Severity is continuous in practice (injury potential grows smoothly with
//! impact energy); here it is cut into four ordered classes `S0 < S1 < S2 < S3`
//! in the style of ISO 26262. Raw AIS scores and delta-v are inputs to injury
//! models outside this crate and have no representation here.

use serde::Serialize;

use crate::keyword::{keyword_enum, Keyword};

keyword_enum! {
    /// Ordered severity class; `S3` is the most severe.
    pub enum SeverityLevel: "severity level" {
        S0 => "S0",
        S1 => "S1",
        S2 => "S2",
        S3 => "S3",
    }
}

keyword_enum! {
    /// Whether the ADS initiated the conflict or responds to one initiated by
    /// another road user.
    pub enum Role: "conflict role" {
        Initiator => "initiator",
        Responder => "responder",
    }
}

keyword_enum! {
    /// Behavioral capability, in the sequence a conflict escalates through.
    pub enum Capability: "behavioral capability" {
        RegulatoryCompliance => "regulatory_compliance",
        ConflictAvoidance => "conflict_avoidance",
        CollisionAvoidance => "collision_avoidance",
    }
}

keyword_enum! {
    pub enum FunctionalityStatus: "functionality status" {
        Nominal => "nominal",
        Degraded => "degraded",
    }
}

keyword_enum! {
    pub enum Aggregation: "aggregation level" {
        EventLevel => "event_level",
        AggregateLevel => "aggregate_level",
    }
}

/// One point of the discretized space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct Cell {
    pub severity: SeverityLevel,
    pub role: Role,
    pub capability: Capability,
    pub status: FunctionalityStatus,
    pub aggregation: Aggregation,
}

/// Number of cells in the full space under the default discretization.
pub const SPACE_SIZE: usize = 4 * 2 * 3 * 2 * 2;

/// Names of the five dimensions, in canonical order.
pub const DIMENSIONS: [&str; 5] = ["severity", "role", "capability", "status", "aggregation"];

impl Cell {
    /// Every cell of the space in canonical (lexicographic) order.
    pub fn all() -> impl Iterator<Item = Cell> {
        SeverityLevel::ALL.iter().flat_map(|&severity| {
            Role::ALL.iter().flat_map(move |&role| {
                Capability::ALL.iter().flat_map(move |&capability| {
                    FunctionalityStatus::ALL.iter().flat_map(move |&status| {
                        Aggregation::ALL.iter().map(move |&aggregation| Cell {
                            severity,
                            role,
                            capability,
                            status,
                            aggregation,
                        })
                    })
                })
            })
        })
    }

    /// The value this cell takes on the named dimension.
    pub fn value_of(&self, dimension: &str) -> Option<&'static str> {
        Some(match dimension {
            "severity" => self.severity.as_str(),
            "role" => self.role.as_str(),
            "capability" => self.capability.as_str(),
            "status" => self.status.as_str(),
            "aggregation" => self.aggregation.as_str(),
            _ => return None,
        })
    }

    /// `S3/responder/collision_avoidance/nominal/aggregate_level`
    pub fn key(&self) -> String {
        format!(
            "{}/{}/{}/{}/{}",
            self.severity, self.role, self.capability, self.status, self.aggregation
        )
    }
}

/// All values of the named dimension, in canonical order.
pub fn dimension_values(dimension: &str) -> &'static [&'static str] {
    match dimension {
        "severity" => &["S0", "S1", "S2", "S3"],
        "role" => &["initiator", "responder"],
        "capability" => &["regulatory_compliance", "conflict_avoidance", "collision_avoidance"],
        "status" => &["nominal", "degraded"],
        "aggregation" => &["event_level", "aggregate_level"],
        _ => &[],
    }
}
