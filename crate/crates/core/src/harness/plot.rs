//! Log-log SVG plot of mesh size against errors.

use std::fs;
use std::path::Path;

use super::{ConvergenceRow, HarnessError};

const WIDTH: f64 = 720.0;
const HEIGHT: f64 = 540.0;
const MARGIN_LEFT: f64 = 70.0;
const MARGIN_RIGHT: f64 = 170.0;
const MARGIN_TOP: f64 = 30.0;
const MARGIN_BOTTOM: f64 = 55.0;

struct Series<'a> {
    label: &'a str,
    color: &'a str,
    dashed: bool,
    class: Option<&'a str>,
    points: Vec<(f64, f64)>, // (log10 h, log10 err)
}

/// Render the convergence rows as an SVG log-log plot. The h axis runs
/// from coarse to fine; reference lines of slopes 1 and 2 are anchored
/// at the finest energy and L2 points.
pub fn svg_string(rows: &[ConvergenceRow]) -> Result<String, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyRows);
    }
    let logh: Vec<f64> = rows.iter().map(|r| r.h.log10()).collect();
    let pick = |f: fn(&ConvergenceRow) -> f64| -> Vec<(f64, f64)> {
        rows.iter()
            .zip(&logh)
            .map(|(r, &x)| (x, f(r).max(1e-300).log10()))
            .collect()
    };

    let energy = pick(|r| r.dec.energy);
    let l2 = pick(|r| r.dec.l2);
    let (x_fine, e_fine) = *energy.last().expect("rows nonempty");
    let (_, l2_fine) = *l2.last().expect("rows nonempty");
    let x_coarse = logh[0];

    // err = C h^s becomes a straight line of slope s in log-log space.
    let reference = |slope: f64, anchor: f64| {
        vec![
            (x_coarse, anchor + slope * (x_coarse - x_fine) + 0.15),
            (x_fine, anchor + 0.15),
        ]
    };

    let series = [
        Series {
            label: "energy error (dec)",
            color: "#1f77b4",
            dashed: false,
            class: None,
            points: energy,
        },
        Series {
            label: "l2 error (dec)",
            color: "#d62728",
            dashed: false,
            class: None,
            points: l2,
        },
        Series {
            label: "energy error (fem)",
            color: "#17becf",
            dashed: true,
            class: None,
            points: pick(|r| r.fem.energy),
        },
        Series {
            label: "l2 error (fem)",
            color: "#e377c2",
            dashed: true,
            class: None,
            points: pick(|r| r.fem.l2),
        },
        Series {
            label: "slope 1",
            color: "#7f7f7f",
            dashed: true,
            class: Some("ref-slope-1"),
            points: reference(1.0, e_fine),
        },
        Series {
            label: "slope 2",
            color: "#bcbd22",
            dashed: true,
            class: Some("ref-slope-2"),
            points: reference(2.0, l2_fine),
        },
    ];

    let (mut x_min, mut x_max) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut y_min, mut y_max) = (f64::INFINITY, f64::NEG_INFINITY);
    for s in &series {
        for &(x, y) in &s.points {
            x_min = x_min.min(x);
            x_max = x_max.max(x);
            y_min = y_min.min(y);
            y_max = y_max.max(y);
        }
    }
    let pad = 0.08;
    let x_span = (x_max - x_min).max(1e-9);
    let y_span = (y_max - y_min).max(1e-9);
    x_min -= pad * x_span;
    x_max += pad * x_span;
    y_min -= pad * y_span;
    y_max += pad * y_span;

    let plot_w = WIDTH - MARGIN_LEFT - MARGIN_RIGHT;
    let plot_h = HEIGHT - MARGIN_TOP - MARGIN_BOTTOM;
    let to_px = |x: f64, y: f64| {
        (
            MARGIN_LEFT + (x - x_min) / (x_max - x_min) * plot_w,
            MARGIN_TOP + (y_max - y) / (y_max - y_min) * plot_h,
        )
    };

    let mut svg = String::new();
    svg.push_str(&format!(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n"
    ));
    svg.push_str("<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n");
    svg.push_str(&format!(
        "<rect x=\"{MARGIN_LEFT}\" y=\"{MARGIN_TOP}\" width=\"{plot_w}\" height=\"{plot_h}\" fill=\"none\" stroke=\"#333\"/>\n"
    ));
    svg.push_str(&format!(
        "<text x=\"{:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\">log10 h</text>\n",
        MARGIN_LEFT + plot_w / 2.0,
        HEIGHT - 14.0
    ));
    svg.push_str(&format!(
        "<text x=\"16\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"13\" transform=\"rotate(-90 16 {:.1})\">log10 error</text>\n",
        MARGIN_TOP + plot_h / 2.0,
        MARGIN_TOP + plot_h / 2.0
    ));

    // Tick marks: one per refinement level on the h axis.
    for (r, &x) in rows.iter().zip(&logh) {
        let (px, _) = to_px(x, y_min);
        svg.push_str(&format!(
            "<line x1=\"{px:.1}\" y1=\"{:.1}\" x2=\"{px:.1}\" y2=\"{:.1}\" stroke=\"#999\"/>\n",
            MARGIN_TOP + plot_h,
            MARGIN_TOP + plot_h + 5.0
        ));
        svg.push_str(&format!(
            "<text x=\"{px:.1}\" y=\"{:.1}\" text-anchor=\"middle\" font-size=\"11\">1/{}</text>\n",
            MARGIN_TOP + plot_h + 18.0,
            r.n
        ));
    }

    for (i, s) in series.iter().enumerate() {
        let pts: Vec<String> = s
            .points
            .iter()
            .map(|&(x, y)| {
                let (px, py) = to_px(x, y);
                format!("{px:.2},{py:.2}")
            })
            .collect();
        let dash = if s.dashed {
            " stroke-dasharray=\"6,4\""
        } else {
            ""
        };
        let class = s
            .class
            .map(|c| format!(" class=\"{c}\""))
            .unwrap_or_default();
        svg.push_str(&format!(
            "<polyline{class} points=\"{}\" fill=\"none\" stroke=\"{}\" stroke-width=\"1.6\"{dash}/>\n",
            pts.join(" "),
            s.color
        ));
        if s.class.is_none() {
            for &(x, y) in &s.points {
                let (px, py) = to_px(x, y);
                svg.push_str(&format!(
                    "<circle cx=\"{px:.2}\" cy=\"{py:.2}\" r=\"2.6\" fill=\"{}\"/>\n",
                    s.color
                ));
            }
        }
        let ly = MARGIN_TOP + 16.0 + 18.0 * i as f64;
        let lx = WIDTH - MARGIN_RIGHT + 12.0;
        svg.push_str(&format!(
            "<line x1=\"{lx:.1}\" y1=\"{ly:.1}\" x2=\"{:.1}\" y2=\"{ly:.1}\" stroke=\"{}\" stroke-width=\"1.6\"{dash}/>\n",
            lx + 22.0,
            s.color
        ));
        svg.push_str(&format!(
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\">{}</text>\n",
            lx + 28.0,
            ly + 3.5,
            s.label
        ));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Write the SVG plot; nothing is created when `rows` is empty.
pub fn emit_svg_plot(rows: &[ConvergenceRow], path: impl AsRef<Path>) -> Result<(), HarnessError> {
    let text = svg_string(rows)?;
    let path = path.as_ref();
    fs::write(path, text).map_err(|source| HarnessError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::super::{run_convergence, ExperimentConfig};
    use super::*;
    use crate::mesh::Pattern;

    #[test]
    fn plot_contains_both_reference_slopes() {
        let mut cfg = ExperimentConfig::new(Pattern::Crisscross, 2);
        cfg.base_n = 2;
        let rows = run_convergence(&cfg).unwrap();
        let svg = svg_string(&rows).unwrap();
        assert!(svg.contains("class=\"ref-slope-1\""));
        assert!(svg.contains("class=\"ref-slope-2\""));
        assert!(svg.starts_with("<svg"));
    }

    #[test]
    fn empty_rows_create_no_plot() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("plot.svg");
        assert!(matches!(
            emit_svg_plot(&[], &path),
            Err(HarnessError::EmptyRows)
        ));
        assert!(!path.exists());
    }
}
