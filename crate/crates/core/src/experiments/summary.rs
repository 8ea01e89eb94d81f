use std::fmt::Write as _;

use super::{SingleSeedSummary, SweepResult, VARIANTS};
use crate::contact_net::Variant;

/// A CSV table with a header row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SummaryTable {
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
}

impl SummaryTable {
    fn new(header: Vec<&'static str>) -> Self {
        Self { header, rows: Vec::new() }
    }

    pub fn to_csv(&self) -> String {
        let mut s = self.header.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }
}

/// Fixed six-decimal rendering; negative zero prints as zero.
pub fn format_f64(x: f64) -> String {
    let mut s = String::new();
    write!(s, "{:.6}", if x == 0.0 { 0.0 } else { x }).unwrap();
    s
}

fn mean_sd(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

/// Per-day series of a (P, variant) group: prevalence and cumulative for each run.
fn series(result: &SweepResult, p_index: usize, variant: Variant) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut prev = Vec::new();
    let mut cum = Vec::new();
    for r in result.runs_for(p_index, variant) {
        for d in &r.daily {
            let i = d.day as usize;
            if prev.len() <= i {
                prev.resize(i + 1, Vec::new());
                cum.resize(i + 1, Vec::new());
            }
            prev[i].push(d.prevalence as f64);
            cum[i].push(d.cumulative as f64);
        }
    }
    (prev, cum)
}

fn mean_curve(columns: &[Vec<f64>]) -> Vec<f64> {
    columns.iter().map(|c| mean_sd(c).0).collect()
}

/// First day on which `curve` reaches `threshold`.
pub fn days_to_threshold(curve: &[f64], threshold: f64) -> Option<u32> {
    curve.iter().position(|&v| v >= threshold).map(|d| d as u32)
}

/// Mean and standard deviation of prevalence and cumulative infections by day.
pub fn prevalence_table(result: &SweepResult) -> SummaryTable {
    let mut t = SummaryTable::new(vec![
        "variant",
        "p",
        "day",
        "mean_prevalence",
        "sd_prevalence",
        "mean_cumulative",
        "sd_cumulative",
    ]);
    for variant in VARIANTS {
        for (pi, p) in result.p_values.iter().enumerate() {
            let (prev, cum) = series(result, pi, variant);
            for (day, (pv, cv)) in prev.iter().zip(&cum).enumerate() {
                let (mp, sp) = mean_sd(pv);
                let (mc, sc) = mean_sd(cv);
                t.rows.push(vec![
                    variant.to_string(),
                    p.to_string(),
                    day.to_string(),
                    format_f64(mp),
                    format_f64(sp),
                    format_f64(mc),
                    format_f64(sc),
                ]);
            }
        }
    }
    t
}

/// Day on which the mean cumulative curve first reaches each threshold.
pub fn threshold_day_table(result: &SweepResult, thresholds: &[u32]) -> SummaryTable {
    let mut t = SummaryTable::new(vec!["variant", "p", "threshold", "day"]);
    for variant in VARIANTS {
        for (pi, p) in result.p_values.iter().enumerate() {
            let curve = mean_curve(&series(result, pi, variant).1);
            for &th in thresholds {
                let day = match days_to_threshold(&curve, th as f64) {
                    Some(d) => d.to_string(),
                    None => "not reached".to_string(),
                };
                t.rows.push(vec![variant.to_string(), p.to_string(), th.to_string(), day]);
            }
        }
    }
    t
}

/// SPDT minus SPST mean outbreak size and mean peak prevalence for each P.
pub fn outbreak_difference_table(result: &SweepResult) -> SummaryTable {
    let mut t = SummaryTable::new(vec![
        "p",
        "spdt_mean_outbreak",
        "spst_mean_outbreak",
        "outbreak_difference",
        "spdt_mean_peak_prevalence",
        "spst_mean_peak_prevalence",
        "peak_prevalence_difference",
    ]);
    for (pi, p) in result.p_values.iter().enumerate() {
        let stats = |variant| {
            let mut outbreak = Vec::new();
            let mut peak = Vec::new();
            for r in result.runs_for(pi, variant) {
                outbreak.push(r.outbreak_size() as f64);
                peak.push(r.daily.iter().map(|d| d.prevalence).max().unwrap_or(0) as f64);
            }
            (mean_sd(&outbreak).0, mean_sd(&peak).0)
        };
        let (o_dt, p_dt) = stats(Variant::Spdt);
        let (o_st, p_st) = stats(Variant::Spst);
        t.rows.push(vec![
            p.to_string(),
            format_f64(o_dt),
            format_f64(o_st),
            format_f64(o_dt - o_st),
            format_f64(p_dt),
            format_f64(p_st),
            format_f64(p_dt - p_st),
        ]);
    }
    t
}

/// Nodes whose largest outbreak or peak prevalence exceeds each threshold.
pub fn node_count_table(cells: &[(String, Variant, SingleSeedSummary)], thresholds: &[u32]) -> SummaryTable {
    let mut t = SummaryTable::new(vec![
        "scenario",
        "variant",
        "threshold",
        "nodes_outbreak_above",
        "nodes_prevalence_above",
        "max_outbreak",
    ]);
    for (scenario, variant, summary) in cells {
        for &th in thresholds {
            let by_outbreak = summary.nodes.iter().filter(|o| o.max_outbreak > th).count();
            let by_prevalence = summary.nodes.iter().filter(|o| o.max_prevalence > th).count();
            t.rows.push(vec![
                scenario.clone(),
                variant.to_string(),
                th.to_string(),
                by_outbreak.to_string(),
                by_prevalence.to_string(),
                summary.max_outbreak.to_string(),
            ]);
        }
    }
    t
}
