use std::collections::HashSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{PairedNetwork, PoolKind, ScenarioConfig, SeedPools, VARIANTS};
use crate::contact_net::Variant;
use crate::error::{Error, Result};
use crate::seir::{seed_infectious_duration, DailyMetrics, EpidemicConfig, EpidemicModel, SafetyAudit, SeedSpec};
use crate::stream::{hash_words, purpose_tag};

const TAG_SWEEP_SEEDS: u64 = purpose_tag("p-sweep-seeds");
const TAG_SWEEP_RUN: u64 = purpose_tag("p-sweep-run");

fn default_seed_range() -> (u32, u32) {
    (1, 5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    /// Hidden fractions of the seed set.
    pub p_values: Vec<f64>,
    pub n_seeds: u32,
    pub reps: u32,
    pub scenario: ScenarioConfig,
    #[serde(default = "default_seed_range")]
    pub seed_infectious_range: (u32, u32),
}

impl SweepSpec {
    pub fn new(p_values: Vec<f64>, n_seeds: u32, reps: u32, scenario: ScenarioConfig) -> Self {
        Self {
            p_values,
            n_seeds,
            reps,
            scenario,
            seed_infectious_range: default_seed_range(),
        }
    }

    /// Hidden-seed count for each P value; errors unless `P * n_seeds` is integral.
    pub fn hidden_counts(&self) -> Result<Vec<u32>> {
        if self.p_values.is_empty() {
            return Err(Error::config("p_values", "must not be empty"));
        }
        if self.n_seeds == 0 {
            return Err(Error::config("n_seeds", "must be at least 1"));
        }
        if self.reps == 0 {
            return Err(Error::config("reps", "must be at least 1"));
        }
        self.p_values
            .iter()
            .map(|&p| {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::config("p_values", format!("{p} is outside [0, 1]")));
                }
                let exact = p * self.n_seeds as f64;
                let count = exact.round();
                if (exact - count).abs() > 1e-9 {
                    return Err(Error::config(
                        "p_values",
                        format!("{p} x {} seeds is not a whole number of hidden seeds", self.n_seeds),
                    ));
                }
                Ok(count as u32)
            })
            .collect()
    }

    /// Grid cells in output order: P, then repetition, then variant.
    pub fn cells(&self) -> Vec<SweepCell> {
        let mut cells = Vec::with_capacity(self.p_values.len() * self.reps as usize * 2);
        for p_index in 0..self.p_values.len() {
            for rep in 0..self.reps {
                for variant in VARIANTS {
                    cells.push(SweepCell { p_index, rep, variant });
                }
            }
        }
        cells
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SweepCell {
    pub p_index: usize,
    pub rep: u32,
    pub variant: Variant,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRun {
    pub p: f64,
    pub rep: u32,
    pub variant: Variant,
    pub rng_seed: u64,
    pub seeds: Vec<SeedSpec>,
    pub daily: Vec<DailyMetrics>,
    pub audit: SafetyAudit,
}

impl SweepRun {
    pub fn outbreak_size(&self) -> u32 {
        self.daily.last().map(|d| d.cumulative).unwrap_or(0)
    }

    pub fn new_infections(&self) -> u32 {
        self.outbreak_size() - self.seeds.len() as u32
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub p_values: Vec<f64>,
    pub reps: u32,
    pub runs: Vec<SweepRun>,
}

impl SweepResult {
    pub fn runs_for(&self, p_index: usize, variant: Variant) -> impl Iterator<Item = &SweepRun> {
        let p = self.p_values[p_index];
        self.runs.iter().filter(move |r| r.p == p && r.variant == variant)
    }

    pub fn mean_outbreak(&self, p_index: usize, variant: Variant) -> f64 {
        let (sum, n) = self
            .runs_for(p_index, variant)
            .fold((0.0, 0usize), |(s, n), r| (s + r.outbreak_size() as f64, n + 1));
        sum / n as f64
    }

    pub fn audit(&self) -> SafetyAudit {
        let mut total = SafetyAudit::default();
        for r in &self.runs {
            total.merge(&r.audit);
        }
        total
    }
}

fn pick(
    rng: &mut ChaCha8Rng,
    pools: &SeedPools,
    kind: PoolKind,
    w: u32,
    wanted: u32,
    chosen: &mut HashSet<u32>,
) -> Result<u32> {
    let pool = pools.pool(kind, w)?;
    let free: Vec<u32> = pool.iter().copied().filter(|n| !chosen.contains(n)).collect();
    if free.is_empty() {
        return Err(Error::config(
            format!("{}_pool_w{w}", kind.as_str()),
            format!(
                "{} pool for a {w}-day window has {} nodes, too few for {wanted} {} seeds",
                kind.as_str(),
                pool.len(),
                kind.as_str()
            ),
        ));
    }
    let node = free[rng.random_range(0..free.len())];
    chosen.insert(node);
    Ok(node)
}

/// Seed set for one (P, repetition): durations first, then nodes classified on
/// each seed's own window.
pub fn draw_sweep_seeds(pools: &SeedPools, spec: &SweepSpec, p_index: usize, rep: u32, master: u64) -> Result<Vec<SeedSpec>> {
    let hidden = spec.hidden_counts()?[p_index];
    let mut rng = ChaCha8Rng::seed_from_u64(hash_words(master, &[TAG_SWEEP_SEEDS, p_index as u64, rep as u64]));
    let mut chosen = HashSet::with_capacity(spec.n_seeds as usize);
    let mut seeds = Vec::with_capacity(spec.n_seeds as usize);
    for i in 0..spec.n_seeds {
        let w = seed_infectious_duration(&mut rng, spec.seed_infectious_range)?;
        let (kind, wanted) = if i < hidden {
            (PoolKind::Hidden, hidden)
        } else {
            (PoolKind::NonHidden, spec.n_seeds - hidden)
        };
        let node = pick(&mut rng, pools, kind, w, wanted, &mut chosen)?;
        seeds.push(SeedSpec::new(node, w));
    }
    Ok(seeds)
}

/// Epidemic seed shared by both variants of a (P, repetition) pair.
pub fn sweep_run_seed(master: u64, p_index: usize, rep: u32) -> u64 {
    hash_words(master, &[TAG_SWEEP_RUN, p_index as u64, rep as u64])
}

pub fn run_sweep_cell(
    net: &PairedNetwork,
    pools: &SeedPools,
    model: &EpidemicModel,
    spec: &SweepSpec,
    cell: SweepCell,
    master: u64,
) -> Result<SweepRun> {
    let seeds = draw_sweep_seeds(pools, spec, cell.p_index, cell.rep, master)?;
    let rng_seed = sweep_run_seed(master, cell.p_index, cell.rep);
    let run = model.run(net.variant(cell.variant), &seeds, rng_seed)?;
    Ok(SweepRun {
        p: spec.p_values[cell.p_index],
        rep: cell.rep,
        variant: cell.variant,
        rng_seed,
        seeds,
        daily: run.daily,
        audit: run.audit,
    })
}

/// Every (P, repetition) on both variants with paired seeds and draws.
pub fn run_p_sweep(
    net: &PairedNetwork,
    pools: &SeedPools,
    base: &EpidemicConfig,
    spec: &SweepSpec,
    master: u64,
) -> Result<SweepResult> {
    spec.hidden_counts()?;
    let model = EpidemicModel::new(&spec.scenario.apply(base)?)?;
    let runs = spec
        .cells()
        .into_par_iter()
        .map(|cell| run_sweep_cell(net, pools, &model, spec, cell, master))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult {
        p_values: spec.p_values.clone(),
        reps: spec.reps,
        runs,
    })
}
