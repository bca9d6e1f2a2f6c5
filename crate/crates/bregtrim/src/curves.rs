//! Cost-curve export: CSV rows `k,q,cost,score` and an SVG line plot.

use std::fmt::Write as _;

use bregtrim_core::selection::{CostCurve, SelectionReport};

/// One row per grid cell. `score` is the slope jump at that `q` (empty at
/// the ends of a curve); `cost` is empty for cells where every restart
/// failed.
pub fn curves_csv(curves: &[CostCurve]) -> String {
    let mut out = String::from("k,q,cost,score\n");
    for curve in curves {
        let scores = curve.scores();
        for entry in &curve.entries {
            let cost = entry.cost.map(|c| c.to_string()).unwrap_or_default();
            let score = scores
                .iter()
                .find(|(q, _)| *q == entry.q)
                .and_then(|(_, s)| *s)
                .map(|s| s.to_string())
                .unwrap_or_default();
            writeln!(out, "{},{},{cost},{score}", curve.k, entry.q).expect("writing to a string");
        }
    }
    out
}

/// Ranked candidates as aligned text, best first.
pub fn candidates_table(report: &SelectionReport) -> String {
    let mut out = String::from("rank  k     q  score     elbow     knee_gap  slope_ratio\n");
    for (i, c) in report.candidates.iter().enumerate() {
        let (gap, ratio) = match c.knee {
            Some(kn) => (format!("{:.6}", kn.gap), format!("{:.3}", kn.slope_ratio)),
            None => ("-".into(), "-".into()),
        };
        writeln!(
            out,
            "{:<5} {:<3} {:>5}  {:<9.6} {:<9.6} {:<9} {}{}",
            i + 1,
            c.k,
            c.q,
            c.score,
            c.elbow,
            gap,
            ratio,
            if c.low_confidence() { "  (no cut-point; largest scanned q)" } else { "" }
        )
        .expect("writing to a string");
    }
    if report.degenerate {
        out.push_str("all costs are zero: the data are degenerate for this divergence\n");
    }
    out
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 420.0;
const MARGIN: f64 = 60.0;
const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// SVG 1.1 plot with one polyline per `k`.
pub fn curves_svg(curves: &[CostCurve]) -> String {
    let points: Vec<(usize, f64)> = curves.iter().flat_map(|c| c.points()).collect();
    let q_min = points.iter().map(|p| p.0).min().unwrap_or(0) as f64;
    let q_max = points.iter().map(|p| p.0).max().unwrap_or(1) as f64;
    let c_max = points.iter().map(|p| p.1).filter(|c| c.is_finite()).fold(0.0, f64::max);
    let q_span = if q_max > q_min { q_max - q_min } else { 1.0 };
    let c_span = if c_max > 0.0 { c_max } else { 1.0 };
    let x = |q: f64| MARGIN + (q - q_min) / q_span * (WIDTH - 2.0 * MARGIN);
    let y = |c: f64| HEIGHT - MARGIN - c / c_span * (HEIGHT - 2.0 * MARGIN);

    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    writeln!(
        s,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">"
    )
    .unwrap();
    writeln!(s, "<rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>").unwrap();
    let (x0, y0, x1, y1) = (MARGIN, HEIGHT - MARGIN, WIDTH - MARGIN, MARGIN);
    writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x1}\" y2=\"{y0}\" stroke=\"black\"/>").unwrap();
    writeln!(s, "<line x1=\"{x0}\" y1=\"{y0}\" x2=\"{x0}\" y2=\"{y1}\" stroke=\"black\"/>").unwrap();
    for t in 0..=4 {
        let f = t as f64 / 4.0;
        let q = q_min + f * q_span;
        let c = f * c_span;
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"middle\">{:.0}</text>",
            x(q),
            y0 + 16.0,
            q
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"11\" text-anchor=\"end\">{:.3}</text>",
            x0 - 6.0,
            y(c) + 4.0,
            c
        )
        .unwrap();
    }
    writeln!(
        s,
        "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\">q</text>",
        (x0 + x1) / 2.0,
        HEIGHT - 16.0
    )
    .unwrap();
    writeln!(
        s,
        "<text x=\"16\" y=\"{:.1}\" font-size=\"13\" text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1})\">cost</text>",
        (y0 + y1) / 2.0,
        (y0 + y1) / 2.0
    )
    .unwrap();
    for (i, curve) in curves.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let coords: Vec<String> = curve
            .points()
            .into_iter()
            .filter(|(_, c)| c.is_finite())
            .map(|(q, c)| format!("{:.2},{:.2}", x(q as f64), y(c)))
            .collect();
        writeln!(
            s,
            "<polyline fill=\"none\" stroke=\"{colour}\" stroke-width=\"1.5\" points=\"{}\"/>",
            coords.join(" ")
        )
        .unwrap();
        writeln!(
            s,
            "<text x=\"{:.1}\" y=\"{:.1}\" font-size=\"12\" fill=\"{colour}\">k = {}</text>",
            x0 + 10.0,
            y1 + 14.0 * (i as f64 + 1.0),
            curve.k
        )
        .unwrap();
    }
    s.push_str("</svg>\n");
    s
}
