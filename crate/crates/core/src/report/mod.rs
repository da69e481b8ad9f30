//! Rendering and the command line.

pub mod cli;
mod heatmap;
mod machine;
mod text;
mod trace;

pub use heatmap::{fill, render_heatmap};
pub use machine::{
    render_machine, Balance, CaseSummary, CellEntry, CoverageSection, DiagnosticsSection, InputDigest, ReportDocument,
    ToolInfo,
};
pub use text::{render_coverage, render_review, render_text, summary_line};
pub use trace::{render_trace, trace_matrix, TraceMatrix, TraceRow};
