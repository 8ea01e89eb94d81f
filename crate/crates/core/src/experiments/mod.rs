//! Hidden-spreader studies on paired SPDT and SPST traces.

mod scenario;
mod seeds;
mod single_seed;
mod summary;
mod sweep;

pub use scenario::ScenarioConfig;
pub use seeds::{classify_seed, find_low_connectivity_set, PoolKind, SeedClass, SeedPools};
pub use single_seed::{
    run_single_seed_cell, run_single_seed_study, single_seed_run_seed, summarize_single_seed, NodeOutcome, SingleSeedRecord,
    SingleSeedSpec, SingleSeedSummary, OUTBREAK_TRIGGER,
};
pub use summary::{
    days_to_threshold, format_f64, node_count_table, outbreak_difference_table, prevalence_table,
    threshold_day_table, SummaryTable,
};
pub use sweep::{draw_sweep_seeds, run_p_sweep, run_sweep_cell, sweep_run_seed, SweepCell, SweepResult, SweepRun, SweepSpec};

use crate::contact_net::{project_spst, ContactTrace, HostIndex, Variant};

/// An SPDT trace indexed together with its SPST projection.
#[derive(Debug, Clone)]
pub struct PairedNetwork {
    spdt: HostIndex,
    spst: HostIndex,
}

impl PairedNetwork {
    /// Index `trace` and its projection. `trace` must be an SPDT trace.
    pub fn new(trace: &ContactTrace) -> Self {
        let spst = project_spst(trace);
        Self {
            spdt: HostIndex::new(trace),
            spst: HostIndex::new(&spst),
        }
    }

    pub fn variant(&self, variant: Variant) -> &HostIndex {
        match variant {
            Variant::Spdt => &self.spdt,
            Variant::Spst => &self.spst,
        }
    }

    pub fn spdt(&self) -> &HostIndex {
        &self.spdt
    }

    pub fn spst(&self) -> &HostIndex {
        &self.spst
    }

    pub fn nodes(&self) -> u32 {
        self.spdt.nodes()
    }
}

/// Both network variants in output order.
pub const VARIANTS: [Variant; 2] = [Variant::Spdt, Variant::Spst];
