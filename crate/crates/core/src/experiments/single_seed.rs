use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PairedNetwork, ScenarioConfig, VARIANTS};
use crate::contact_net::Variant;
use crate::error::{Error, Result};
use crate::seir::{EpidemicConfig, EpidemicModel, SafetyAudit, SeedSpec};
use crate::stream::{hash_words, purpose_tag};

const TAG_SINGLE: u64 = purpose_tag("single-seed-run");

/// A seed triggers an outbreak when its outbreak size exceeds this.
pub const OUTBREAK_TRIGGER: u32 = 10;

fn default_trigger() -> u32 {
    OUTBREAK_TRIGGER
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SingleSeedSpec {
    pub scenarios: Vec<ScenarioConfig>,
    pub infectious_days: u32,
    pub reps_per_node: u32,
    #[serde(default = "default_trigger")]
    pub trigger: u32,
}

impl SingleSeedSpec {
    pub fn validate(&self) -> Result<()> {
        if self.scenarios.is_empty() {
            return Err(Error::config("scenarios", "must list at least one scenario"));
        }
        if self.infectious_days == 0 {
            return Err(Error::config("infectious_days", "must be at least 1"));
        }
        if self.reps_per_node == 0 {
            return Err(Error::config("reps_per_node", "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SingleSeedRecord {
    pub node: u32,
    pub rep: u32,
    pub outbreak_size: u32,
    pub peak_prevalence: u32,
    pub audit: SafetyAudit,
}

/// Per-node aggregate over repetitions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeOutcome {
    pub node: u32,
    pub max_outbreak: u32,
    pub max_prevalence: u32,
    pub triggering_runs: u32,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SingleSeedSummary {
    /// Nodes with at least one run whose outbreak exceeds the trigger.
    pub triggering_nodes: u32,
    pub max_outbreak: u32,
    pub nodes: Vec<NodeOutcome>,
}

/// Epidemic seed for one (node, repetition), shared across scenarios and variants.
pub fn single_seed_run_seed(master: u64, node: u32, rep: u32) -> u64 {
    hash_words(master, &[TAG_SINGLE, node as u64, rep as u64])
}

/// All runs of one (scenario, variant) cell, ordered by node then repetition.
pub fn run_single_seed_cell(
    net: &PairedNetwork,
    model: &EpidemicModel,
    nodes: &[u32],
    spec: &SingleSeedSpec,
    variant: Variant,
    master: u64,
) -> Result<Vec<SingleSeedRecord>> {
    let index = net.variant(variant);
    let jobs: Vec<(u32, u32)> = nodes
        .iter()
        .flat_map(|&n| (0..spec.reps_per_node).map(move |r| (n, r)))
        .collect();
    jobs.into_par_iter()
        .map(|(node, rep)| {
            let run = model.run(index, &[SeedSpec::new(node, spec.infectious_days)], single_seed_run_seed(master, node, rep))?;
            Ok(SingleSeedRecord {
                node,
                rep,
                outbreak_size: run.outbreak_size(),
                peak_prevalence: run.peak_prevalence(),
                audit: run.audit,
            })
        })
        .collect()
}

/// Runs of every scenario on both variants, in scenario-then-variant order.
pub fn run_single_seed_study(
    net: &PairedNetwork,
    base: &EpidemicConfig,
    nodes: &[u32],
    spec: &SingleSeedSpec,
    master: u64,
) -> Result<Vec<(String, Variant, Vec<SingleSeedRecord>)>> {
    spec.validate()?;
    if nodes.is_empty() {
        return Err(Error::config("seed_set", "must not be empty"));
    }
    let mut out = Vec::new();
    for scenario in &spec.scenarios {
        let model = EpidemicModel::new(&scenario.apply(base)?)?;
        for variant in VARIANTS {
            let records = run_single_seed_cell(net, &model, nodes, spec, variant, master)?;
            out.push((scenario.name.clone(), variant, records));
        }
    }
    Ok(out)
}

/// Per-node aggregates and the triggering count. Records must be grouped by node.
pub fn summarize_single_seed(records: &[SingleSeedRecord], trigger: u32) -> SingleSeedSummary {
    let mut nodes: Vec<NodeOutcome> = Vec::new();
    for r in records {
        let hit = (r.outbreak_size > trigger) as u32;
        match nodes.last_mut() {
            Some(o) if o.node == r.node => {
                o.max_outbreak = o.max_outbreak.max(r.outbreak_size);
                o.max_prevalence = o.max_prevalence.max(r.peak_prevalence);
                o.triggering_runs += hit;
            }
            _ => nodes.push(NodeOutcome {
                node: r.node,
                max_outbreak: r.outbreak_size,
                max_prevalence: r.peak_prevalence,
                triggering_runs: hit,
            }),
        }
    }
    SingleSeedSummary {
        triggering_nodes: nodes.iter().filter(|o| o.triggering_runs > 0).count() as u32,
        max_outbreak: nodes.iter().map(|o| o.max_outbreak).max().unwrap_or(0),
        nodes,
    }
}
