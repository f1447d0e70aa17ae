//! Mirrored horizontal bar chart of one pyramid.

use std::fmt::Write;

use crate::demographics::{AgeBin, AgePyramid, AGE_BIN_COUNT};

const WIDTH: f64 = 640.0;
const BAR_HEIGHT: f64 = 18.0;
const GAP: f64 = 2.0;
const TOP: f64 = 48.0;
const LABEL_COL: f64 = 60.0;
const VALUE_COL: f64 = 70.0;

/// Renders the pyramid as percent shares. The data are both sexes
/// combined, so each side of the axis shows half of the bin's share.
pub fn pyramid_svg(pyramid: &AgePyramid, title: &str) -> String {
    let shares = pyramid.percentages();
    let max_share = shares.iter().copied().fold(0.0, f64::max);
    let half_span = (WIDTH - LABEL_COL - VALUE_COL) / 2.0 - 10.0;
    let centre = LABEL_COL + 10.0 + half_span;
    let scale = if max_share > 0.0 {
        half_span / (max_share / 2.0)
    } else {
        0.0
    };
    let chart_h = AGE_BIN_COUNT as f64 * (BAR_HEIGHT + GAP);
    let height = TOP + chart_h + 40.0;

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{height}" viewBox="0 0 {WIDTH} {height}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(s, "<title>{}</title>", escape(title));
    let _ = writeln!(
        s,
        "<desc>Age structure in percent of total population. Values are both sexes combined; \
         each side of the axis draws half of the share (mirroring is stylistic only).</desc>"
    );
    let _ = writeln!(
        s,
        r#"<text x="{:.1}" y="20" text-anchor="middle" font-size="14">{}</text>"#,
        WIDTH / 2.0,
        escape(title)
    );

    // Oldest group on top.
    for (row, bin) in AgeBin::all().collect::<Vec<_>>().into_iter().rev().enumerate() {
        let share = shares[bin.index()];
        let y = TOP + row as f64 * (BAR_HEIGHT + GAP);
        let half = share / 2.0 * scale;
        let _ = writeln!(
            s,
            r##"<g class="bin" data-age="{label}" data-share="{share:.2}"><text x="{lx:.1}" y="{ty:.1}" text-anchor="end">{label}</text><rect x="{left:.2}" y="{y:.1}" width="{half:.2}" height="{BAR_HEIGHT}" fill="#4e79a7"/><rect x="{centre:.2}" y="{y:.1}" width="{half:.2}" height="{BAR_HEIGHT}" fill="#f28e2b"/><text x="{vx:.1}" y="{ty:.1}">{share:.2}%</text></g>"##,
            label = bin.label(),
            lx = LABEL_COL,
            ty = y + BAR_HEIGHT - 5.0,
            left = centre - half,
            vx = centre + half_span + 6.0,
        );
    }

    let axis_y = TOP + chart_h + 4.0;
    let _ = writeln!(
        s,
        r#"<line x1="{:.2}" y1="{axis_y:.1}" x2="{:.2}" y2="{axis_y:.1}" stroke="black"/>"#,
        centre - half_span,
        centre + half_span
    );
    let _ = writeln!(
        s,
        r#"<line x1="{centre:.2}" y1="{TOP:.1}" x2="{centre:.2}" y2="{axis_y:.1}" stroke="black"/>"#
    );
    let tick = nice_tick(max_share / 2.0);
    if tick > 0.0 {
        let mut v = 0.0;
        while v <= max_share / 2.0 + 1e-12 {
            for side in [-1.0, 1.0] {
                if v == 0.0 && side < 0.0 {
                    continue;
                }
                let x = centre + side * v * scale;
                let _ = writeln!(
                    s,
                    r#"<text x="{x:.2}" y="{:.1}" text-anchor="middle">{v:.1}</text>"#,
                    axis_y + 14.0
                );
            }
            v += tick;
        }
    }
    let _ = writeln!(
        s,
        r#"<text x="{centre:.2}" y="{:.1}" text-anchor="middle">percent (half share per side)</text>"#,
        axis_y + 30.0
    );
    s.push_str("</svg>\n");
    s
}

fn nice_tick(span: f64) -> f64 {
    if span.is_nan() || span <= 0.0 {
        return 0.0;
    }
    let raw = span / 4.0;
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let step = if norm < 1.5 {
        1.0
    } else if norm < 3.5 {
        2.0
    } else if norm < 7.5 {
        5.0
    } else {
        10.0
    };
    step * mag
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}
