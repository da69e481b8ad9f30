use std::fmt::Write;

use crate::coverage::{CoverageMap, Signal};
use crate::keyword::Keyword;
use crate::space::{Aggregation, Capability, Cell, FunctionalityStatus, Role, SeverityLevel};

pub fn fill(signal: Signal) -> &'static str {
    match signal {
        Signal::None => "#d9d9d9",
        Signal::Weak => "#f0b429",
        Signal::Strong => "#1f7a4d",
    }
}

const CELL_W: usize = 44;
const CELL_H: usize = 24;
const LABEL_W: usize = 150;
const TITLE_H: usize = 20;
const HEADER_H: usize = 16;
const GAP: usize = 24;
const MARGIN: usize = 16;
const LEGEND_H: usize = 40;

const PANEL_W: usize = LABEL_W + 4 * CELL_W;
const PANEL_H: usize = TITLE_H + HEADER_H + 3 * CELL_H;

/// One grid per (role, status, aggregation) slice, severity across and
/// capability down. Every cell rect carries `data-cell` and `data-signal`.
pub fn render_heatmap(map: &CoverageMap) -> String {
    let width = 2 * MARGIN + 2 * PANEL_W + GAP;
    let height = 2 * MARGIN + 4 * PANEL_H + 3 * GAP + LEGEND_H;
    let mut out = String::new();
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif" font-size="11">"#
    )
    .unwrap();
    writeln!(out, "  <title>Behavioral space coverage</title>").unwrap();
    writeln!(out, r##"  <rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##).unwrap();

    let slices = FunctionalityStatus::ALL
        .iter()
        .flat_map(|&s| Aggregation::ALL.iter().map(move |&a| (s, a)));
    for (row, (status, aggregation)) in slices.enumerate() {
        for (col, &role) in Role::ALL.iter().enumerate() {
            let x = MARGIN + col * (PANEL_W + GAP);
            let y = MARGIN + row * (PANEL_H + GAP);
            panel(&mut out, map, x, y, role, status, aggregation);
        }
    }

    let ly = height - MARGIN - LEGEND_H + 12;
    writeln!(out, r#"  <g class="legend">"#).unwrap();
    for (i, &signal) in Signal::ALL.iter().enumerate() {
        let lx = MARGIN + i * 110;
        writeln!(
            out,
            r#"    <rect x="{lx}" y="{ly}" width="16" height="16" fill="{}" data-legend="{signal}"/>"#,
            fill(signal)
        )
        .unwrap();
        writeln!(out, r#"    <text x="{}" y="{}">{signal}</text>"#, lx + 22, ly + 12).unwrap();
    }
    writeln!(out, "  </g>").unwrap();
    out.push_str("</svg>\n");
    out
}

fn panel(
    out: &mut String,
    map: &CoverageMap,
    x: usize,
    y: usize,
    role: Role,
    status: FunctionalityStatus,
    aggregation: Aggregation,
) {
    writeln!(out, r#"  <g class="slice" data-slice="{role}/{status}/{aggregation}">"#).unwrap();
    writeln!(out, r#"    <text x="{x}" y="{}" font-weight="bold">{role} / {status} / {aggregation}</text>"#, y + 13)
        .unwrap();
    for (i, sev) in SeverityLevel::ALL.iter().enumerate() {
        let cx = x + LABEL_W + i * CELL_W + CELL_W / 2;
        writeln!(out, r#"    <text x="{cx}" y="{}" text-anchor="middle">{sev}</text>"#, y + TITLE_H + 12).unwrap();
    }
    for (j, &capability) in Capability::ALL.iter().enumerate() {
        let ry = y + TITLE_H + HEADER_H + j * CELL_H;
        writeln!(out, r#"    <text x="{x}" y="{}">{capability}</text>"#, ry + 16).unwrap();
        for (i, &severity) in SeverityLevel::ALL.iter().enumerate() {
            let cell = Cell { severity, role, capability, status, aggregation };
            let signal = map.signal(&cell);
            writeln!(
                out,
                r##"    <rect x="{}" y="{ry}" width="{}" height="{}" fill="{}" stroke="#ffffff" data-cell="{}" data-signal="{signal}"/>"##,
                x + LABEL_W + i * CELL_W,
                CELL_W,
                CELL_H,
                fill(signal),
                cell.key()
            )
            .unwrap();
        }
    }
    writeln!(out, "  </g>").unwrap();
}
