//! The `aurcase` text format.
//!
//! A document is one `safety_case` block. Its blocks follow the argument
//! table (argument, evidence, limitations, counter-argument) and the claim
//! skeleton (top claim, reasonableness, satisfaction with coverage and
//! confidence assessments, facets) one to one:
//!
//! ```text
//! safety_case "example" {
//!   context { use_case = "ride-hailing" deployment_scale = "100 vehicles" }
//!   hazard H1 category = behavioral { description = "collision with road user" }
//!   methodology M1 {
//!     name = "collision avoidance testing"
//!     region {
//!       severity = S0..S3
//!       role = responder
//!       capability = collision_avoidance
//!       status = nominal
//!       aggregation = aggregate_level
//!       weak(S3)
//!     }
//!   }
//!   criterion AC1 hazard = H1 methodology = M1 aggregation = aggregate_level {
//!     statement = "..."
//!   }
//!   evidence E1 methodology = M1 strength = strong { kind = "report" uri = "doc://cat" }
//!   claim C1 criterion = AC1 {
//!     reasonableness { argument A.1 { text = "..." evidence = E1 } }
//!     satisfaction {
//!       coverage_assessment { argument A.1 { text = "..." evidence = E1 } }
//!       confidence_assessment {
//!         facet "Scoring confidence" { }
//!         argument A.1 { text = "..." evidence = E1 }
//!       }
//!     }
//!   }
//! }
//! ```
//!
//! Unknown keys are errors. Subclaims without an explicit id are numbered
//! after their parent (`C1.2.1`).

mod lexer;
mod parser;
mod serialize;

pub use parser::{default_child_id, parse, parse_bytes, ParseResult, SpanIndex, MAX_CLAIM_DEPTH};
pub use serialize::serialize;
