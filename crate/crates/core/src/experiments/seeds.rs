use std::collections::HashSet;
use std::ops::Range;

use crate::contact_net::HostIndex;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SeedClass {
    /// Every hosted link in the window is indirect-only.
    Hidden,
    /// Some hosted link in the window has a direct component.
    NonHidden,
    /// No hosted links in the window.
    Isolated,
}

/// Class of `node` given the SPDT links it hosts on `window` days.
pub fn classify_seed(index: &HostIndex, node: u32, window: Range<u32>) -> SeedClass {
    let links = index.hosted_within(node, window);
    if links.is_empty() {
        SeedClass::Isolated
    } else if links.iter().any(|l| l.has_direct_component()) {
        SeedClass::NonHidden
    } else {
        SeedClass::Hidden
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PoolKind {
    Hidden,
    NonHidden,
}

impl PoolKind {
    pub fn as_str(self) -> &'static str {
        match self {
            PoolKind::Hidden => "hidden",
            PoolKind::NonHidden => "non-hidden",
        }
    }
}

/// Hidden and non-hidden node pools for every infectious window `0..w`.
#[derive(Debug, Clone)]
pub struct SeedPools {
    max_window: u32,
    // Indexed by w - 1.
    hidden: Vec<Vec<u32>>,
    non_hidden: Vec<Vec<u32>>,
    isolated: Vec<usize>,
}

impl SeedPools {
    pub fn build(index: &HostIndex, max_window: u32) -> Self {
        let w_max = max_window as usize;
        let mut hidden = vec![Vec::new(); w_max];
        let mut non_hidden = vec![Vec::new(); w_max];
        let mut isolated = vec![0; w_max];
        for node in 0..index.nodes() {
            for w in 1..=max_window {
                match classify_seed(index, node, 0..w) {
                    SeedClass::Hidden => hidden[w as usize - 1].push(node),
                    SeedClass::NonHidden => non_hidden[w as usize - 1].push(node),
                    SeedClass::Isolated => isolated[w as usize - 1] += 1,
                }
            }
        }
        Self {
            max_window,
            hidden,
            non_hidden,
            isolated,
        }
    }

    pub fn max_window(&self) -> u32 {
        self.max_window
    }

    /// Nodes of `kind` for a window of `w` days, sorted ascending.
    pub fn pool(&self, kind: PoolKind, w: u32) -> Result<&[u32]> {
        if w == 0 || w > self.max_window {
            return Err(Error::config(
                "seed_infectious_range",
                format!("window of {w} days is outside the classified range 1..={}", self.max_window),
            ));
        }
        let pools = match kind {
            PoolKind::Hidden => &self.hidden,
            PoolKind::NonHidden => &self.non_hidden,
        };
        Ok(&pools[w as usize - 1])
    }

    pub fn isolated_count(&self, w: u32) -> usize {
        self.isolated[w as usize - 1]
    }
}

/// Nodes whose distinct hosted neighbors on the projected trace over the
/// first `window_days` days number between 1 and `max_direct_neighbors`.
pub fn find_low_connectivity_set(spst: &HostIndex, window_days: u32, max_direct_neighbors: usize) -> Result<Vec<u32>> {
    if window_days == 0 || window_days > spst.days() {
        return Err(Error::config(
            "window_days",
            format!("must lie in 1..={} for this trace, got {window_days}", spst.days()),
        ));
    }
    let mut out = Vec::new();
    let mut seen = HashSet::new();
    for node in 0..spst.nodes() {
        seen.clear();
        for l in spst.hosted_within(node, 0..window_days) {
            if l.has_direct_component() {
                seen.insert(l.neighbor);
            }
        }
        if (1..=max_direct_neighbors).contains(&seen.len()) {
            out.push(node);
        }
    }
    Ok(out)
}
