//! Static SVG plots: seriated heatmap, modelled surface with contours, ECDF.

use std::fmt::Write;

use coresat_core::rbf::RbfModel;
use coresat_core::segmentation::{EcdfCurve, Kink};
use coresat_core::SeriatedMatrix;

const CELL: f64 = 16.0;
const MARGIN: f64 = 60.0;

/// White (0) to black (1).
fn gray(v: f64) -> String {
    let g = (255.0 * (1.0 - v.clamp(0.0, 1.0))).round() as u8;
    format!("#{g:02x}{g:02x}{g:02x}")
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

fn open(out: &mut String, w: f64, h: f64) {
    writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="10">"#
    )
    .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="white"/>"#).unwrap();
}

fn axis_labels(out: &mut String, labels: &[String]) {
    for (k, l) in labels.iter().enumerate() {
        let c = MARGIN + (k as f64 + 0.5) * CELL;
        writeln!(
            out,
            r#"<text x="{x}" y="{c}" text-anchor="end" dominant-baseline="middle">{t}</text>"#,
            x = MARGIN - 4.0,
            t = escape(l)
        )
        .unwrap();
        writeln!(
            out,
            r#"<text transform="translate({c},{y}) rotate(-90)" dominant-baseline="middle">{t}</text>"#,
            y = MARGIN - 4.0,
            t = escape(l)
        )
        .unwrap();
    }
}

/// Normalised distances in seriated order, small white to large black.
pub fn heatmap(s: &SeriatedMatrix) -> String {
    let n = s.len();
    let side = 2.0 * MARGIN + n as f64 * CELL;
    let mut out = String::new();
    open(&mut out, side, side);
    for i in 0..n {
        for j in 0..n {
            writeln!(
                out,
                r#"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{f}"/>"#,
                x = MARGIN + j as f64 * CELL,
                y = MARGIN + i as f64 * CELL,
                f = gray(s.get(i, j))
            )
            .unwrap();
        }
    }
    axis_labels(&mut out, &s.labels);
    writeln!(
        out,
        r#"<text x="{MARGIN}" y="{y}">{m}: normalised DTW distance, max raw {r:.4}</text>"#,
        y = side - MARGIN / 3.0,
        m = s.metric,
        r = s.max_raw
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// Line segments of the `level` set of a grid sampled at `xs` x `ys`.
fn contour_segments(xs: &[f64], ys: &[f64], z: &[Vec<f64>], level: f64) -> Vec<[(f64, f64); 2]> {
    let mut segs = Vec::new();
    let lerp = |a: (f64, f64, f64), b: (f64, f64, f64)| {
        let t = (level - a.2) / (b.2 - a.2);
        (a.0 + t * (b.0 - a.0), a.1 + t * (b.1 - a.1))
    };
    for i in 0..xs.len() - 1 {
        for j in 0..ys.len() - 1 {
            // corners counter-clockwise from (x_i, y_j)
            let c = [
                (xs[i], ys[j], z[i][j]),
                (xs[i + 1], ys[j], z[i + 1][j]),
                (xs[i + 1], ys[j + 1], z[i + 1][j + 1]),
                (xs[i], ys[j + 1], z[i][j + 1]),
            ];
            let crossings: Vec<(f64, f64)> = (0..4)
                .filter_map(|k| {
                    let (a, b) = (c[k], c[(k + 1) % 4]);
                    ((a.2 > level) != (b.2 > level)).then(|| lerp(a, b))
                })
                .collect();
            match crossings.len() {
                2 => segs.push([crossings[0], crossings[1]]),
                4 => {
                    let centre = c.iter().map(|p| p.2).sum::<f64>() / 4.0;
                    // pair the crossings around the corners on the minority side
                    if (centre > level) == (c[0].2 > level) {
                        segs.push([crossings[0], crossings[3]]);
                        segs.push([crossings[1], crossings[2]]);
                    } else {
                        segs.push([crossings[0], crossings[1]]);
                        segs.push([crossings[2], crossings[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

fn path(segs: &[[(f64, f64); 2]], to_px: impl Fn(f64) -> f64) -> String {
    let mut d = String::new();
    for [a, b] in segs {
        write!(d, "M{:.2} {:.2}L{:.2} {:.2}", to_px(a.0), to_px(a.1), to_px(b.0), to_px(b.1)).unwrap();
    }
    d
}

/// Modelled surface shaded white to black, dashed white contours every 0.2
/// and the `d_bound` contour in red; the core block is outlined.
pub fn surface(model: &RbfModel, s: &SeriatedMatrix, d_bound: f64, core_size: usize) -> String {
    let n = s.len();
    let side = 2.0 * MARGIN + n as f64 * CELL;
    // matrix coordinate 1 sits at the centre of the first cell
    let to_px = |v: f64| MARGIN + (v - 0.5) * CELL;
    let per_cell = 4;
    let steps = n * per_cell;
    let coords: Vec<f64> = (0..=steps).map(|k| 0.5 + k as f64 / per_cell as f64).collect();
    let z: Vec<Vec<f64>> = coords
        .iter()
        .map(|&x| coords.iter().map(|&y| model.evaluate(x, y)).collect())
        .collect();
    let mut out = String::new();
    open(&mut out, side, side);
    let px = CELL / per_cell as f64;
    for a in 0..steps {
        for b in 0..steps {
            let h = (z[a][b] + z[a + 1][b] + z[a][b + 1] + z[a + 1][b + 1]) / 4.0;
            writeln!(
                out,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{px}" height="{px}" fill="{f}"/>"#,
                x = to_px(coords[b]),
                y = to_px(coords[a]),
                f = gray(h)
            )
            .unwrap();
        }
    }
    // rows run down the page: swap so x is the column index
    let zt: Vec<Vec<f64>> = (0..=steps).map(|b| (0..=steps).map(|a| z[a][b]).collect()).collect();
    for level in [0.2, 0.4, 0.6, 0.8] {
        let segs = contour_segments(&coords, &coords, &zt, level);
        writeln!(
            out,
            r#"<path d="{d}" stroke="white" stroke-width="1" stroke-dasharray="4 3" fill="none"/>"#,
            d = path(&segs, to_px)
        )
        .unwrap();
    }
    let segs = contour_segments(&coords, &coords, &zt, d_bound);
    writeln!(
        out,
        r#"<path d="{d}" stroke="red" stroke-width="2" fill="none"/>"#,
        d = path(&segs, to_px)
    )
    .unwrap();
    if core_size > 0 {
        let w = core_size as f64 * CELL;
        writeln!(
            out,
            r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" stroke="red" stroke-width="1" stroke-dasharray="2 2" fill="none"/>"#
        )
        .unwrap();
    }
    axis_labels(&mut out, &s.labels);
    writeln!(
        out,
        r#"<text x="{MARGIN}" y="{y}">{m}: RBF surface, contours every 0.2, d_bound = {d_bound:.3}, core size {core_size}</text>"#,
        y = side - MARGIN / 3.0,
        m = s.metric
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}

/// Step plot of the ECDF with the threshold and the detected kink.
pub fn ecdf(curve: &EcdfCurve, d_bound: f64, p_used: f64, kink: Option<&Kink>, title: &str) -> String {
    let (w, h, m) = (480.0, 360.0, 50.0);
    let x = |v: f64| m + v * (w - 2.0 * m);
    let y = |p: f64| h - m - p * (h - 2.0 * m);
    let mut out = String::new();
    open(&mut out, w, h);
    writeln!(
        out,
        r#"<path d="M{x0} {y0}H{x1}M{x0} {y0}V{y1}" stroke="black" fill="none"/>"#,
        x0 = x(0.0),
        y0 = y(0.0),
        x1 = x(1.0),
        y1 = y(1.0)
    )
    .unwrap();
    for t in [0.0, 0.2, 0.4, 0.6, 0.8, 1.0] {
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="middle">{t:.1}</text>"#, x(t), y(0.0) + 14.0).unwrap();
        writeln!(out, r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">{t:.1}</text>"#, x(0.0) - 4.0, y(t)).unwrap();
    }
    let mut d = format!("M{:.2} {:.2}", x(0.0), y(0.0));
    for (k, v) in curve.values().iter().enumerate() {
        write!(d, "H{:.2}V{:.2}", x(*v), y(curve.probability(k))).unwrap();
    }
    write!(d, "H{:.2}", x(1.0)).unwrap();
    writeln!(out, r#"<path d="{d}" stroke="black" stroke-width="1.2" fill="none"/>"#).unwrap();
    writeln!(
        out,
        r#"<path d="M{x0} {yp}H{xb}V{y0}" stroke="red" stroke-dasharray="4 3" fill="none"/>"#,
        x0 = x(0.0),
        yp = y(p_used),
        xb = x(d_bound),
        y0 = y(0.0)
    )
    .unwrap();
    if let Some(k) = kink {
        writeln!(
            out,
            r#"<circle cx="{:.2}" cy="{:.2}" r="4" stroke="red" fill="none"/>"#,
            x(k.value),
            y(k.p)
        )
        .unwrap();
    }
    writeln!(
        out,
        r#"<text x="{m}" y="{ty}">{t}: p = {p_used:.3}, d_bound = {d_bound:.3}{k}</text>"#,
        ty = m / 2.0,
        t = escape(title),
        k = if kink.is_some() { " (kink)" } else { " (fixed p)" }
    )
    .unwrap();
    out.push_str("</svg>\n");
    out
}
