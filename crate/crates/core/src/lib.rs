//! Safety cases for automated driving systems: a data model, a text format,
//! structural credibility rules, coverage of the behavioral
//! acceptance-criteria space, traceability and the release readiness gate.
//!
//! ```
//! let source = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/golden_cat.aur")).unwrap();
//! let parsed = aurcase::dsl::parse(&source, "golden_cat.aur");
//! let case = parsed.case.as_ref().unwrap();
//! let map = aurcase::coverage::coverage_map(case).unwrap();
//! assert_eq!(aurcase::coverage::gap_report(&map).overall.to_string(), "4/96");
//! ```

mod keyword;

pub mod coverage;
pub mod diagnostic;
pub mod dsl;
pub mod lifecycle;
pub mod model;
pub mod report;
pub mod space;
pub mod span;
pub mod validator;

pub use keyword::{Keyword, UnknownKeyword};
pub use report::cli::run;
