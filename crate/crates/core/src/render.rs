//! SVG heatmap grid: up to six network cells in two rows of three, each a
//! 2×2 TG/BG matrix.
//!
//! Cosine values map to gray with luminance `round(255 · (1 − (v + 1) / 2))`,
//! so similarity 1 is black. Squared Mahalanobis values are displayed as
//! `log10(max(v, 1e-12))` and mapped linearly from blue (smallest displayed
//! value in the figure) to red (largest). Each square carries the raw value
//! to four significant digits.

use alloc::string::String;
use core::fmt::Write;

use thiserror::Error;

use crate::metrics::{Cell, Metric};
use crate::numfmt::format_display;
use crate::report::AnalysisReport;

pub const DISPLAY_FLOOR: f64 = 1e-12;
pub const GRID_COLUMNS: usize = 3;
pub const GRID_ROWS: usize = 2;

const CELL_W: u32 = 240;
const CELL_H: u32 = 250;
const SQUARE: u32 = 90;
const MARGIN: u32 = 10;
const TITLE_H: u32 = 40;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RenderOptions {
    /// Light-high grayscale for cosine figures.
    pub invert: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("report has no networks to render")]
    NoNetworks,
    #[error("grid holds at most 6 networks, report has {0}")]
    TooManyNetworks(usize),
}

/// Gray level for a cosine value.
pub fn cosine_gray(value: f64, invert: bool) -> u8 {
    let v = value.clamp(-1.0, 1.0);
    let level = libm::round(255.0 * (1.0 - (v + 1.0) / 2.0)) as u8;
    if invert {
        255 - level
    } else {
        level
    }
}

/// Displayed value for a squared Mahalanobis cell.
pub fn log_display(value: f64) -> f64 {
    libm::log10(value.max(DISPLAY_FLOOR))
}

/// Blue-to-red colour at position `t` in `[0, 1]`.
pub fn gradient(t: f64) -> (u8, u8, u8) {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.5 };
    (libm::round(255.0 * t) as u8, 0, libm::round(255.0 * (1.0 - t)) as u8)
}

fn escape(text: &str) -> String {
    let mut out = String::with_capacity(text.len());
    for c in text.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

pub fn render_heatmap_svg(report: &AnalysisReport, metric: Metric, options: RenderOptions) -> Result<String, RenderError> {
    let count = report.networks.len();
    if count == 0 {
        return Err(RenderError::NoNetworks);
    }
    if count > GRID_ROWS * GRID_COLUMNS {
        return Err(RenderError::TooManyNetworks(count));
    }

    let (lo, hi) = report
        .networks
        .iter()
        .flat_map(|n| Cell::ALL.map(|c| log_display(n.mahalanobis_sq.cells.get(c))))
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)));

    let width = 2 * MARGIN + GRID_COLUMNS as u32 * CELL_W;
    let height = TITLE_H + GRID_ROWS as u32 * CELL_H + MARGIN;
    let title = match metric {
        Metric::Cosine => "cosine similarity",
        Metric::MahalanobisSq => "log10 squared Mahalanobis distance",
    };

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="sans-serif">"#
    );
    let _ = writeln!(svg, r##"<rect x="0" y="0" width="{width}" height="{height}" fill="#ffffff"/>"##);
    let _ = writeln!(
        svg,
        r#"<text x="{}" y="26" font-size="16" text-anchor="middle">{} ({}): {}</text>"#,
        width / 2,
        escape(&report.dataset),
        escape(&report.plan),
        title
    );

    for slot in 0..GRID_ROWS * GRID_COLUMNS {
        let (row, col) = ((slot / GRID_COLUMNS) as u32, (slot % GRID_COLUMNS) as u32);
        let x = MARGIN + col * CELL_W;
        let y = TITLE_H + row * CELL_H;
        let Some(network) = report.networks.get(slot) else {
            let _ = writeln!(
                svg,
                r##"<rect class="empty" x="{}" y="{}" width="{}" height="{}" fill="none" stroke="#dddddd" stroke-dasharray="4 4"/>"##,
                x + 4,
                y + 4,
                CELL_W - 8,
                CELL_H - 8
            );
            continue;
        };
        let matrix = network.matrix(metric);
        let _ = writeln!(svg, r#"<g class="network" transform="translate({x},{y})">"#);
        let _ = writeln!(
            svg,
            r#"<text x="{}" y="24" font-size="14" text-anchor="middle">{}</text>"#,
            CELL_W / 2,
            escape(&network.network)
        );
        let (ox, oy) = (45u32, 50u32);
        for (i, label) in ["TG", "BG"].iter().enumerate() {
            let i = i as u32;
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="12" text-anchor="middle">{label}</text>"#,
                ox + i * SQUARE + SQUARE / 2,
                oy - 6
            );
            let _ = writeln!(
                svg,
                r#"<text x="{}" y="{}" font-size="12" text-anchor="end">{label}</text>"#,
                ox - 6,
                oy + i * SQUARE + SQUARE / 2 + 4
            );
        }
        for r in 0..2usize {
            for c in 0..2usize {
                let cell = Cell::at(r, c);
                let value = matrix.cells.get(cell);
                let ((red, green, blue), text) = match metric {
                    Metric::Cosine => {
                        let g = cosine_gray(value, options.invert);
                        ((g, g, g), if g < 128 { "#ffffff" } else { "#000000" })
                    }
                    Metric::MahalanobisSq => {
                        let span = hi - lo;
                        let t = if span > 0.0 { (log_display(value) - lo) / span } else { 0.5 };
                        (gradient(t), "#ffffff")
                    }
                };
                let sx = ox + c as u32 * SQUARE;
                let sy = oy + r as u32 * SQUARE;
                let _ = writeln!(
                    svg,
                    r##"<rect x="{sx}" y="{sy}" width="{SQUARE}" height="{SQUARE}" fill="rgb({red},{green},{blue})" stroke="#444444"/>"##
                );
                let _ = writeln!(
                    svg,
                    r#"<text x="{}" y="{}" font-size="13" text-anchor="middle" fill="{text}" data-cell="{}">{}</text>"#,
                    sx + SQUARE / 2,
                    sy + SQUARE / 2 + 5,
                    cell.label(),
                    format_display(value)
                );
            }
        }
        let _ = writeln!(svg, "</g>");
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::report::fixtures::report;
    use alloc::vec::Vec;

    #[test]
    fn gray_levels() {
        assert_eq!(cosine_gray(1.0, false), 0);
        assert_eq!(cosine_gray(-1.0, false), 255);
        assert_eq!(cosine_gray(0.0, false), 128);
        assert_eq!(cosine_gray(1.0, true), 255);
        let levels: Vec<u8> = (-10..=10).map(|i| cosine_gray(f64::from(i) / 10.0, false)).collect();
        assert!(levels.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn log_mapping() {
        assert_eq!(log_display(1e7), 7.0);
        assert_eq!(log_display(1e9), 9.0);
        assert_eq!(log_display(0.0), -12.0);
        assert_eq!(gradient(0.0), (0, 0, 255));
        assert_eq!(gradient(1.0), (255, 0, 0));
    }

    fn fills(svg: &str) -> Vec<&str> {
        svg.split("fill=\"rgb(").skip(1).map(|s| &s[..s.find(')').unwrap()]).collect()
    }

    #[test]
    fn mahalanobis_extremes() {
        let mut r = report(&["ResNet50"]);
        let cells = &mut r.networks[0].mahalanobis_sq.cells;
        (cells.tg_tg, cells.tg_bg, cells.bg_bg) = (1e7, 1e8, 1e9);
        let svg = render_heatmap_svg(&r, Metric::MahalanobisSq, RenderOptions::default()).unwrap();
        // Row-major squares: TG-TG, TG-BG, TG-BG, BG-BG.
        assert_eq!(fills(&svg), vec!["0,0,255", "128,0,128", "128,0,128", "255,0,0"]);
        assert!(svg.contains(">1e+07<") && svg.contains(">1e+09<"));
    }

    #[test]
    fn grid_padding_and_limits() {
        let svg = render_heatmap_svg(&report(&["a", "b"]), Metric::Cosine, RenderOptions::default()).unwrap();
        assert_eq!(svg.matches("class=\"network\"").count(), 2);
        assert_eq!(svg.matches("class=\"empty\"").count(), 4);
        assert_eq!(
            render_heatmap_svg(&report(&["a", "b", "c", "d", "e", "f", "g"]), Metric::Cosine, RenderOptions::default()),
            Err(RenderError::TooManyNetworks(7))
        );
        assert_eq!(render_heatmap_svg(&report(&[]), Metric::Cosine, RenderOptions::default()), Err(RenderError::NoNetworks));
    }

    #[test]
    fn printed_values_use_four_digits() {
        let r = report(&["x<y"]);
        let svg = render_heatmap_svg(&r, Metric::Cosine, RenderOptions::default()).unwrap();
        assert!(svg.contains("x&lt;y"));
        for cell in Cell::ALL {
            let expected = alloc::format!("data-cell=\"{}\">{}<", cell.label(), format_display(r.networks[0].cosine.cells.get(cell)));
            assert!(svg.contains(&expected), "{expected}");
        }
        assert_eq!(svg, render_heatmap_svg(&r, Metric::Cosine, RenderOptions::default()).unwrap());
    }
}
