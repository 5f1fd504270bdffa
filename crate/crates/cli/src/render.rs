//! SVG heatmaps of importance matrices.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::Result;
use sset_core::{Explanation, ImportanceMatrix};

use crate::commands::{read_json, write_atomic};

const CELL: usize = 20;
const TOP: usize = 30;
const RIGHT: usize = 10;
const BOTTOM: usize = 40;
const CHAR_WIDTH: usize = 7;

/// Color of score 1.
pub const DARKEST: (u8, u8, u8) = (8, 48, 107);

/// Linear blend from white at 0 to [`DARKEST`] at 1; scores are clamped.
pub fn score_color(score: f64) -> (u8, u8, u8) {
    let s = if score.is_finite() {
        score.clamp(0.0, 1.0)
    } else {
        0.0
    };
    let mix = |end: u8| (255.0 + (f64::from(end) - 255.0) * s).round() as u8;
    (mix(DARKEST.0), mix(DARKEST.1), mix(DARKEST.2))
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for ch in text.chars() {
        match ch {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            _ => out.push(ch),
        }
    }
    out
}

/// Heatmap with one column per time step and one row per signal.
pub fn render_svg(title: &str, signal_names: &[String], importance: &ImportanceMatrix) -> String {
    let (time_steps, signals) = importance.scores.dim();
    let names: Vec<String> = (0..signals)
        .map(|s| {
            signal_names
                .get(s)
                .cloned()
                .unwrap_or_else(|| format!("s{s}"))
        })
        .collect();
    let left = names.iter().map(|n| n.chars().count()).max().unwrap_or(0) * CHAR_WIDTH + 12;
    let width = left + time_steps * CELL + RIGHT;
    let height = TOP + signals * CELL + BOTTOM;

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(
        svg,
        r##"<rect width="{width}" height="{height}" fill="#ffffff"/>"##
    );
    let _ = writeln!(
        svg,
        r#"<text x="{left}" y="18" font-size="12">{}</text>"#,
        escape(title)
    );
    for (s, name) in names.iter().enumerate() {
        let y = TOP + s * CELL + CELL / 2 + 4;
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{y}" font-size="11" text-anchor="end">{}</text>"#,
            left - 6,
            escape(name)
        );
    }
    for s in 0..signals {
        for t in 0..time_steps {
            let (r, g, b) = score_color(importance.scores[[t, s]]);
            let _ = writeln!(
                svg,
                r##"<rect x="{}" y="{}" width="{CELL}" height="{CELL}" fill="#{r:02x}{g:02x}{b:02x}" stroke="#d0d0d0" stroke-width="0.5"/>"##,
                left + t * CELL,
                TOP + s * CELL
            );
        }
    }
    let axis_y = TOP + signals * CELL + 14;
    for t in 0..time_steps {
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="{axis_y}" font-size="9" text-anchor="middle">{t}</text>"#,
            left + t * CELL + CELL / 2
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="{}" font-size="11" text-anchor="middle">time step</text>"#,
        left + time_steps * CELL / 2,
        axis_y + 18
    );
    svg.push_str("</svg>\n");
    svg
}

/// Renders the importance matrix of an explanation file.
pub fn run_render(explanation: &Path, out: &Path) -> Result<()> {
    let e: Explanation = read_json(explanation)?;
    let title = format!("{} (class {})", e.instance_id, e.winner_class);
    let svg = render_svg(&title, &e.signal_names, &e.importance);
    write_atomic(out, svg.as_bytes())
}
