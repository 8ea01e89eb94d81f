//! Structural and statistical checks on trace files.

use std::collections::BTreeMap;

use super::io::TraceRecords;
use super::sampling::{StepGeometric, TruncatedGeometric};
use super::trace::{SpdtLink, Variant};
use super::GeneratorConfig;
use crate::gof::{chi_square_discrete, ks_test, GofResult};
use crate::stream::{hash_words, unit_f64};

/// Per-test significance used when validating a trace.
pub const VALIDATION_SIGNIFICANCE: f64 = 1e-3;
/// Fewest samples for which a goodness-of-fit test is attempted.
pub const MIN_GOF_SAMPLES: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub line: usize,
    pub kind: &'static str,
    pub detail: String,
}

#[derive(Debug, Clone)]
pub struct FitCheck {
    pub law: &'static str,
    pub result: GofResult,
}

#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub links: usize,
    pub violations: Vec<Violation>,
    pub fits: Vec<FitCheck>,
    pub warnings: Vec<String>,
}

impl ValidationReport {
    pub fn failed_fits(&self) -> impl Iterator<Item = &FitCheck> {
        self.fits
            .iter()
            .filter(|f| !f.result.passes(VALIDATION_SIGNIFICANCE))
    }

    pub fn passed(&self) -> bool {
        self.violations.is_empty() && self.failed_fits().next().is_none()
    }

    /// Violation counts keyed by kind.
    pub fn counts(&self) -> BTreeMap<&'static str, usize> {
        let mut m = BTreeMap::new();
        for v in &self.violations {
            *m.entry(v.kind).or_insert(0) += 1;
        }
        m
    }
}

pub fn check_link(config: &GeneratorConfig, variant: Variant, link: &SpdtLink) -> Vec<(&'static str, String)> {
    let mut out = Vec::new();
    let l = link;
    if l.host >= config.nodes || l.neighbor >= config.nodes {
        out.push(("node-range", format!("node id out of range 0..{}", config.nodes)));
    }
    if l.host == l.neighbor {
        out.push(("self-link", format!("host {} links to itself", l.host)));
    }
    if l.t_a < 1 {
        out.push(("host-stay", "t_a must be at least 1".into()));
    }
    if l.t_d < 1 {
        out.push(("neighbor-stay", "t_d must be at least 1".into()));
    }
    if l.t_c as u64 > l.t_a as u64 + l.delta as u64 {
        out.push((
            "arrival-window",
            format!("t_c={} exceeds t_a+delta={}", l.t_c, l.t_a as u64 + l.delta as u64),
        ));
    }
    if l.start_step as u64 + l.t_a as u64 > config.steps as u64 {
        out.push(("horizon", format!("host stay ends after step {}", config.steps)));
    }
    if l.start_step as u64 + l.t_c as u64 + l.t_d as u64 > config.steps as u64 {
        out.push(("horizon", format!("neighbor stay ends after step {}", config.steps)));
    }
    match variant {
        Variant::Spdt => {
            if l.delta != config.delta {
                out.push(("delta", format!("delta={} but header says {}", l.delta, config.delta)));
            }
        }
        Variant::Spst => {
            if l.delta != 0 {
                out.push(("delta", "SPST links carry delta=0".into()));
            }
            if l.t_c as u64 + l.t_d as u64 > l.t_a as u64 {
                out.push(("co-presence", "SPST link extends past the host's stay".into()));
            }
        }
    }
    out
}

/// Check every link invariant and, for SPDT traces, the generator laws.
pub fn validate_records(records: &TraceRecords) -> ValidationReport {
    let cfg = &records.config;
    let mut report = ValidationReport {
        links: records.links.len(),
        ..Default::default()
    };
    for (line, link) in &records.links {
        for (kind, detail) in check_link(cfg, records.variant, link) {
            report.violations.push(Violation {
                line: *line,
                kind,
                detail,
            });
        }
    }
    if records.links.is_empty() {
        report.warnings.push("trace contains zero links".into());
        return report;
    }
    if records.variant == Variant::Spst {
        report
            .warnings
            .push("SPST projection: generator laws do not apply, fit checks skipped".into());
        return report;
    }
    if !report.violations.is_empty() {
        return report;
    }

    // Links whose period starts within a day of the horizon may have been clipped.
    let cutoff = cfg.steps_per_day().min(cfg.steps);
    let settled = |l: &SpdtLink| l.start_step as u64 + cutoff as u64 + cfg.delta as u64 <= cfg.steps as u64;

    let mut periods: Vec<(u32, u32, u32)> = records
        .links
        .iter()
        .map(|(_, l)| l)
        .filter(|l| settled(l))
        .map(|l| (l.host, l.start_step, l.t_a))
        .collect();
    periods.sort_unstable();
    periods.dedup();
    let stays: Vec<u64> = periods.iter().map(|p| p.2 as u64).collect();
    let settled_links: Vec<&SpdtLink> = records.links.iter().map(|(_, l)| l).filter(|l| settled(l)).collect();

    if stays.len() >= MIN_GOF_SAMPLES {
        if let Ok(law) = StepGeometric::new(cfg.lambda, "lambda") {
            report.fits.push(FitCheck {
                law: "active duration ~ geometric(lambda)",
                result: chi_square_discrete(&stays, 1, |k| law.pmf(k)),
            });
        }
    }
    if settled_links.len() >= MIN_GOF_SAMPLES {
        if let Ok(law) = StepGeometric::new(cfg.p_b, "p_b") {
            let durations: Vec<u64> = settled_links.iter().map(|l| l.t_d as u64).collect();
            report.fits.push(FitCheck {
                law: "link duration ~ geometric(p_b)",
                result: chi_square_discrete(&durations, 1, |k| law.pmf(k)),
            });
        }
        // Randomised probability integral transform of each delay under its own window.
        let pit: Vec<f64> = settled_links
            .iter()
            .filter_map(|l| {
                let law = TruncatedGeometric::new(cfg.p_c, l.t_a + l.delta).ok()?;
                let below = if l.t_c == 0 { 0.0 } else { law.cdf(l.t_c as u64 - 1) };
                let v = unit_f64(hash_words(cfg.master_seed, &l.event_key()));
                Some(below + v * law.pmf(l.t_c as u64))
            })
            .collect();
        report.fits.push(FitCheck {
            law: "link delay ~ truncated geometric(p_c, t_a+delta)",
            result: ks_test(&pit, |x| x.clamp(0.0, 1.0)),
        });
    }
    if report.fits.is_empty() {
        report
            .warnings
            .push("too few settled links for goodness-of-fit checks".into());
    }
    report
}
