use std::ops::Range;

use crate::contact_net::GeneratorConfig;
use crate::exposure::{classify_link_case, LinkCase, LinkTiming};

/// One directed host-to-neighbor co-location event.
///
/// Times are in steps. The host is present on `[start_step, start_step + t_a)`,
/// the neighbor on `[start_step + t_c, start_step + t_c + t_d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SpdtLink {
    pub host: u32,
    pub neighbor: u32,
    pub start_step: u32,
    pub t_a: u32,
    pub t_c: u32,
    pub t_d: u32,
    pub delta: u32,
}

impl SpdtLink {
    pub fn exposure_start(&self) -> u32 {
        self.start_step + self.t_c
    }

    pub fn exposure_end(&self) -> u32 {
        self.start_step + self.t_c + self.t_d
    }

    pub fn case(&self) -> LinkCase {
        classify_link_case(self.t_a as f64, self.t_c as f64, self.t_d as f64)
    }

    /// True when the neighbor arrives while the host is still present.
    pub fn has_direct_component(&self) -> bool {
        self.t_c < self.t_a
    }

    pub fn timing(&self, step_hours: f64) -> LinkTiming {
        LinkTiming {
            host_stay: self.t_a as f64 * step_hours,
            arrival_delay: self.t_c as f64 * step_hours,
            neighbor_stay: self.t_d as f64 * step_hours,
        }
    }

    /// Identity of the underlying co-location event, unchanged by SPST projection.
    pub fn event_key(&self) -> [u64; 3] {
        [
            ((self.host as u64) << 32) | self.neighbor as u64,
            ((self.start_step as u64) << 32) | self.t_c as u64,
            self.t_a as u64,
        ]
    }

    fn order_key(&self) -> (u32, u32, u32, u32, u32, u32, u32) {
        (
            self.exposure_start(),
            self.host,
            self.neighbor,
            self.start_step,
            self.t_a,
            self.t_c,
            self.t_d,
        )
    }
}

/// Whether a trace carries the full SPDT links or only their co-present portions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Spdt,
    Spst,
}

impl Variant {
    pub fn as_str(&self) -> &'static str {
        match self {
            Variant::Spdt => "spdt",
            Variant::Spst => "spst",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "spdt" => Some(Variant::Spdt),
            "spst" => Some(Variant::Spst),
            _ => None,
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A time-ordered collection of links among `config.nodes` nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct ContactTrace {
    pub config: GeneratorConfig,
    pub variant: Variant,
    links: Vec<SpdtLink>,
    day_index: Vec<usize>,
}

impl ContactTrace {
    /// Sorts the links into canonical order and builds the per-day index.
    pub fn new(config: GeneratorConfig, variant: Variant, mut links: Vec<SpdtLink>) -> Self {
        links.sort_unstable_by_key(SpdtLink::order_key);
        let day_index = build_day_index(&links, config.steps_per_day(), config.days());
        Self {
            config,
            variant,
            links,
            day_index,
        }
    }

    pub fn links(&self) -> &[SpdtLink] {
        &self.links
    }

    pub fn node_count(&self) -> u32 {
        self.config.nodes
    }

    pub fn days(&self) -> u32 {
        self.config.days()
    }

    /// Day to which a link is attributed: the day its neighbor arrives.
    pub fn day_of(&self, link: &SpdtLink) -> u32 {
        link.exposure_start() / self.config.steps_per_day()
    }

    /// Index range of the links attributed to `day`.
    pub fn day_range(&self, day: u32) -> Range<usize> {
        let d = day as usize;
        if d + 1 >= self.day_index.len() {
            return self.links.len()..self.links.len();
        }
        self.day_index[d]..self.day_index[d + 1]
    }

    pub fn day_links(&self, day: u32) -> &[SpdtLink] {
        &self.links[self.day_range(day)]
    }
}

fn build_day_index(links: &[SpdtLink], steps_per_day: u32, days: u32) -> Vec<usize> {
    let mut offsets = Vec::with_capacity(days as usize + 1);
    let mut i = 0;
    for day in 0..days {
        offsets.push(i);
        let end = (day + 1) * steps_per_day;
        while i < links.len() && links[i].exposure_start() < end {
            i += 1;
        }
    }
    offsets.push(links.len());
    offsets
}

/// Keep only the co-present portion of every link.
///
/// Links whose neighbor arrives after the host left are dropped; the rest are
/// cut at the host's departure and lose their indirect window.
pub fn project_spst(trace: &ContactTrace) -> ContactTrace {
    let links = trace
        .links
        .iter()
        .filter(|l| l.t_c < l.t_a)
        .map(|l| SpdtLink {
            t_d: (l.t_c + l.t_d).min(l.t_a) - l.t_c,
            delta: 0,
            ..*l
        })
        .collect();
    ContactTrace::new(trace.config.clone(), Variant::Spst, links)
}

/// Host-major view of a trace: for each host, its links grouped by attributed day.
#[derive(Debug, Clone)]
pub struct HostIndex {
    days: u32,
    nodes: u32,
    steps_per_day: u32,
    step_hours: f64,
    variant: Variant,
    links: Vec<SpdtLink>,
    // offsets[host * (days + 1) + day]
    offsets: Vec<u32>,
}

impl HostIndex {
    pub fn new(trace: &ContactTrace) -> Self {
        let days = trace.days();
        let nodes = trace.node_count() as usize;
        let spd = trace.config.steps_per_day();
        let mut links: Vec<SpdtLink> = trace
            .links
            .iter()
            .filter(|l| l.exposure_start() / spd < days)
            .copied()
            .collect();
        links.sort_by_key(|l| (l.host, l.exposure_start() / spd));
        let stride = days as usize + 1;
        let mut offsets = vec![0u32; nodes * stride];
        let mut i = 0usize;
        for host in 0..nodes {
            for day in 0..days as usize {
                offsets[host * stride + day] = i as u32;
                while i < links.len()
                    && links[i].host as usize == host
                    && (links[i].exposure_start() / spd) as usize == day
                {
                    i += 1;
                }
            }
            offsets[host * stride + days as usize] = i as u32;
        }
        debug_assert_eq!(i, links.len());
        Self {
            days,
            nodes: trace.node_count(),
            steps_per_day: spd,
            step_hours: trace.config.step_hours(),
            variant: trace.variant,
            links,
            offsets,
        }
    }

    pub fn days(&self) -> u32 {
        self.days
    }

    pub fn nodes(&self) -> u32 {
        self.nodes
    }

    pub fn steps_per_day(&self) -> u32 {
        self.steps_per_day
    }

    pub fn step_hours(&self) -> f64 {
        self.step_hours
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    /// Links hosted by `host` and attributed to `day`.
    pub fn hosted_on(&self, host: u32, day: u32) -> &[SpdtLink] {
        if day >= self.days {
            return &[];
        }
        let base = host as usize * (self.days as usize + 1) + day as usize;
        &self.links[self.offsets[base] as usize..self.offsets[base + 1] as usize]
    }

    /// Links hosted by `host` and attributed to any day in `days`.
    pub fn hosted_within(&self, host: u32, days: Range<u32>) -> &[SpdtLink] {
        let lo = days.start.min(self.days);
        let hi = days.end.min(self.days);
        if lo >= hi {
            return &[];
        }
        let stride = self.days as usize + 1;
        let base = host as usize * stride;
        &self.links[self.offsets[base + lo as usize] as usize..self.offsets[base + hi as usize] as usize]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn link(host: u32, neighbor: u32, start: u32, t_a: u32, t_c: u32, t_d: u32) -> SpdtLink {
        SpdtLink {
            host,
            neighbor,
            start_step: start,
            t_a,
            t_c,
            t_d,
            delta: 4,
        }
    }

    fn toy(links: Vec<SpdtLink>) -> ContactTrace {
        let mut cfg = GeneratorConfig::desk();
        cfg.nodes = 4;
        cfg.steps = 3 * 288;
        ContactTrace::new(cfg, Variant::Spdt, links)
    }

    #[test]
    fn projection_examples() {
        let t = toy(vec![
            link(0, 1, 0, 5, 6, 3),
            link(0, 2, 10, 5, 0, 4),
            link(1, 3, 20, 5, 3, 10),
        ]);
        let p = project_spst(&t);
        assert_eq!(p.variant, Variant::Spst);
        assert_eq!(p.links().len(), 2);
        assert_eq!(p.links()[0], SpdtLink { delta: 0, ..link(0, 2, 10, 5, 0, 4) });
        assert_eq!(p.links()[1], SpdtLink { delta: 0, ..link(1, 3, 20, 5, 3, 2) });
        assert_eq!(project_spst(&p), p);
        assert_eq!(p.node_count(), t.node_count());
    }

    #[test]
    fn day_index_partitions_links() {
        let t = toy(vec![
            link(0, 1, 287, 5, 0, 3),
            link(0, 1, 286, 5, 2, 3),
            link(2, 1, 600, 5, 0, 3),
            link(3, 0, 0, 2, 1, 1),
        ]);
        assert_eq!(t.day_links(0).len(), 2);
        assert_eq!(t.day_links(1).len(), 1);
        assert_eq!(t.day_links(2).len(), 1);
        assert_eq!(t.day_links(9).len(), 0);
        let total: usize = (0..t.days()).map(|d| t.day_links(d).len()).sum();
        assert_eq!(total, t.links().len());
        for d in 0..t.days() {
            assert!(t.day_links(d).iter().all(|l| t.day_of(l) == d));
        }
    }

    #[test]
    fn host_index_groups_by_host_and_day() {
        let t = toy(vec![
            link(0, 1, 0, 5, 0, 3),
            link(0, 2, 300, 5, 0, 3),
            link(0, 3, 310, 5, 0, 3),
            link(2, 1, 600, 5, 0, 3),
        ]);
        let idx = HostIndex::new(&t);
        assert_eq!(idx.hosted_on(0, 0).len(), 1);
        assert_eq!(idx.hosted_on(0, 1).len(), 2);
        assert_eq!(idx.hosted_on(1, 1).len(), 0);
        assert_eq!(idx.hosted_on(2, 2).len(), 1);
        assert_eq!(idx.hosted_within(0, 0..3).len(), 3);
        assert_eq!(idx.hosted_within(0, 1..99).len(), 2);
        assert_eq!(idx.hosted_on(3, 7).len(), 0);
    }
}
