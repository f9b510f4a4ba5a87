//! Plain SVG renderings of the hierarchy and its inertia gains.

use crate::tree::{leaf_order, node_heights};
use baryclust::{Dendrogram, Partition};
use std::fmt::Write;

const WIDTH: f64 = 900.0;
const HEIGHT: f64 = 500.0;
const MARGIN: f64 = 50.0;
const PALETTE: [&str; 8] = [
    "#d62728", "#1f77b4", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf",
];

fn header(out: &mut String, title: &str) {
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="sans-serif" font-size="11">"#
    );
    let _ = writeln!(out, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        out,
        r#"<text x="{}" y="20" text-anchor="middle" font-size="14">{title}</text>"#,
        WIDTH / 2.0
    );
}

/// Dendrogram with leaves on the bottom axis and merge costs as heights.
/// With `cut`, the clusters of that partition are boxed.
pub fn dendrogram_svg(d: &Dendrogram, row_ids: &[usize], cut: Option<&Partition>) -> String {
    let n = d.leaves();
    let heights = node_heights(d);
    let top = heights.iter().copied().fold(0.0, f64::max);
    let scale = if top > 0.0 { top } else { 1.0 };
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let y = |h: f64| MARGIN + (1.0 - h / scale) * plot_h;
    let order = leaf_order(d);
    let step = (WIDTH - 2.0 * MARGIN) / n as f64;
    let mut x = vec![0.0; 2 * n - 1];
    for (pos, &leaf) in order.iter().enumerate() {
        x[leaf] = MARGIN + (pos as f64 + 0.5) * step;
    }
    for m in d.merges() {
        x[m.node] = (x[m.left] + x[m.right]) / 2.0;
    }

    let mut out = String::new();
    header(&mut out, "Ward hierarchy (chi-square)");
    if let Some(p) = cut {
        let k = p.k();
        // cut line halfway between the last kept merge and the first undone one
        let undone = if k > 1 { d.merges()[n - k].cost } else { top * 1.05 };
        let kept = if k < n { d.merges()[n - k - 1].cost } else { 0.0 };
        let cut_y = y((undone + kept) / 2.0);
        for c in 1..=k {
            let positions: Vec<usize> = order
                .iter()
                .enumerate()
                .filter(|(_, &leaf)| p.labels()[leaf] == c)
                .map(|(pos, _)| pos)
                .collect();
            let lo = *positions.iter().min().expect("non-empty cluster") as f64;
            let hi = *positions.iter().max().expect("non-empty cluster") as f64;
            let _ = writeln!(
                out,
                r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="{}" stroke-width="2"/>"#,
                MARGIN + lo * step + 1.0,
                cut_y,
                (hi - lo + 1.0) * step - 2.0,
                HEIGHT - MARGIN - cut_y + 4.0,
                PALETTE[(c - 1) % PALETTE.len()]
            );
        }
    }
    for m in d.merges() {
        let _ = writeln!(
            out,
            r#"<path d="M{:.2} {:.2} V{:.2} H{:.2} V{:.2}" fill="none" stroke="black" stroke-width="1"/>"#,
            x[m.left],
            y(heights[m.left]),
            y(m.cost),
            x[m.right],
            y(heights[m.right])
        );
    }
    if n <= 60 {
        for &leaf in &order {
            let _ = writeln!(
                out,
                r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{}</text>"#,
                x[leaf],
                HEIGHT - MARGIN + 15.0,
                row_ids[leaf]
            );
        }
    }
    out.push_str("</svg>\n");
    out
}

/// Bar chart of `Delta(K)` for the first few K, highlighting `selected`.
pub fn gains_svg(gains: &[(usize, f64)], selected: Option<usize>, max_k: usize) -> String {
    let shown: Vec<(usize, f64)> = gains.iter().copied().filter(|&(k, _)| k <= max_k).collect();
    let top = shown.iter().map(|g| g.1).fold(0.0, f64::max);
    let scale = if top > 0.0 { top } else { 1.0 };
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let slot = (WIDTH - 2.0 * MARGIN) / shown.len().max(1) as f64;
    let mut out = String::new();
    header(&mut out, "Inertia gain by number of clusters");
    for (i, &(k, g)) in shown.iter().enumerate() {
        let h = g / scale * plot_h;
        let fill = if Some(k) == selected { "#d62728" } else { "#7f7f7f" };
        let left = MARGIN + i as f64 * slot;
        let _ = writeln!(
            out,
            r#"<rect x="{:.2}" y="{:.2}" width="{:.2}" height="{:.2}" fill="{fill}"/>"#,
            left + slot * 0.15,
            HEIGHT - MARGIN - h,
            slot * 0.7,
            h
        );
        let _ = writeln!(
            out,
            r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">{k}</text>"#,
            left + slot / 2.0,
            HEIGHT - MARGIN + 15.0
        );
    }
    let _ = writeln!(
        out,
        r#"<text x="{:.2}" y="{:.2}" text-anchor="middle">K</text>"#,
        WIDTH / 2.0,
        HEIGHT - MARGIN + 32.0
    );
    out.push_str("</svg>\n");
    out
}
