//! Plateau summary and table formatting.

use super::{Plateau, RunRecord};
use crate::point::FieldMode;

/// Table in the layout: mode, sorted run #, numer, denom, f, |Z_eps|,
/// ||d||. For every plateau the first and last member rows are shown; the
/// plateau endpoints are approximate cluster boundaries, not exact onset
/// indices.
pub fn format_table(records: &[RunRecord], sorted: &[(usize, f64, usize)], plateaus: &[Plateau]) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:>2} {:>6}  {:>11} {:>11}  {:>14} {:>7} {:>11}\n",
        "", "run#", "numer", "denom", "f", "|Z_eps|", "||d||"
    ));
    for p in plateaus {
        for rank in [p.rank_first, p.rank_last] {
            let Some(&(_, _, run_idx)) = sorted.get(rank - 1) else {
                continue;
            };
            let Some(rec) = records.iter().find(|r| r.run_index == run_idx) else {
                continue;
            };
            out.push_str(&format_row(rec, rank));
        }
        out.push('\n');
    }
    out
}

fn format_row(rec: &RunRecord, rank: usize) -> String {
    let mode = match rec.field_mode {
        FieldMode::Real => "R",
        FieldMode::Complex => "C",
    };
    let numer = rec
        .numerator
        .map(|v| format!("{v:.3e}"))
        .unwrap_or_else(|| "-".to_string());
    let denom = rec
        .denominator
        .map(|v| format!("{v:.3e}"))
        .unwrap_or_else(|| "-".to_string());
    let f = rec
        .f
        .map(|v| format!("{v:.10}"))
        .unwrap_or_else(|| "-".to_string());
    let zc = rec
        .z_count
        .map(|v| v.to_string())
        .unwrap_or_else(|| "-".to_string());
    let dn = rec
        .d_norm
        .map(|v| format!("{v:.3e}"))
        .unwrap_or_else(|| "-".to_string());
    format!("{mode:>2} {rank:>6}  {numer:>11} {denom:>11}  {f:>14} {zc:>7} {dn:>11}\n")
}

/// Full report: plateau summary lines followed by the table.
pub fn format_report(records: &[RunRecord], sorted: &[(usize, f64, usize)], plateaus: &[Plateau]) -> String {
    let mut out = String::new();
    let succeeded = records.iter().filter(|r| r.f.is_some()).count();
    out.push_str(&format!(
        "runs: {} total, {} evaluated, {} failed\n",
        records.len(),
        succeeded,
        records.len() - succeeded
    ));
    out.push_str(&format!("plateaus detected: {}\n", plateaus.len()));
    for p in plateaus {
        out.push_str(&format!(
            "  value={:.10}  count={:4}  spread={:.3e}  ranks {}..{}\n",
            p.value,
            p.count,
            p.f_last - p.f_first,
            p.rank_first,
            p.rank_last
        ));
    }
    out.push('\n');
    out.push_str(&format_table(records, sorted, plateaus));
    out
}
