use std::fmt::Write;

use super::{ConflictReport, EdgeKind};

const TOP_N: usize = 10;

/// Human-readable summary: totals, then the top conflicting license pairs for
/// each edge kind side by side.
pub fn render_table(report: &ConflictReport) -> String {
    let t = &report.totals;
    let mut out = String::new();
    let _ = writeln!(
        out,
        "chains: {} total, {} conflicted ({:.2}%)",
        t.chains_total,
        t.chains_conflicted,
        t.conflict_rate * 100.0
    );
    let _ = writeln!(
        out,
        "  two-layer: {}/{}  three-layer: {}/{}",
        t.two_layer_conflicted, t.two_layer_total, t.three_layer_conflicted, t.three_layer_total
    );
    let _ = writeln!(
        out,
        "edges: {} checked, {} conflicted",
        t.edges_checked, t.edges_conflicted
    );
    if !report.skipped.is_empty() {
        let _ = writeln!(out, "skipped edges: {}", report.skipped.len());
    }
    if !report.cycles.is_empty() {
        let _ = writeln!(out, "base-model cycles: {}", report.cycles.len());
    }

    let columns: Vec<Vec<String>> = EdgeKind::ALL
        .iter()
        .map(|kind| {
            report
                .top_pairs
                .get(kind)
                .map(|pairs| {
                    pairs
                        .iter()
                        .take(TOP_N)
                        .map(|p| {
                            format!(
                                "{} -> {}  {:.2}%",
                                p.downstream,
                                p.upstream,
                                p.share * 100.0
                            )
                        })
                        .collect()
                })
                .unwrap_or_default()
        })
        .collect();
    let rows = columns.iter().map(Vec::len).max().unwrap_or(0);
    if rows == 0 {
        let _ = writeln!(out, "\nno conflicting license pairs");
        return out;
    }
    let widths: Vec<usize> = EdgeKind::ALL
        .iter()
        .zip(&columns)
        .map(|(k, col)| {
            col.iter()
                .map(String::len)
                .chain([k.label().len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    out.push('\n');
    let _ = write!(out, "{:<4}", "#");
    for (k, w) in EdgeKind::ALL.iter().zip(&widths) {
        let _ = write!(out, " | {:<w$}", k.label(), w = *w);
    }
    out.push('\n');
    let _ = write!(out, "{}", "-".repeat(4));
    for w in &widths {
        let _ = write!(out, "-+-{}", "-".repeat(*w));
    }
    out.push('\n');
    for r in 0..rows {
        let _ = write!(out, "{:<4}", r + 1);
        for (col, w) in columns.iter().zip(&widths) {
            let cell = col.get(r).map(String::as_str).unwrap_or("");
            let _ = write!(out, " | {:<w$}", cell, w = *w);
        }
        out.push('\n');
    }
    out
}
