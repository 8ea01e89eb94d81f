//! Activity-driven generation of SPDT contact traces.

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashSet};

use rand::distr::weighted::WeightedIndex;
use rand::Rng;
use rand_distr::Distribution;

use super::sampling::{DegreeLaw, StepGeometric, TruncatedGeometric, TruncatedPowerLaw};
use super::trace::{ContactTrace, SpdtLink, Variant};
use super::GeneratorConfig;
use crate::error::{Error, Result};
use crate::stream::stream_rng;

/// Rejection attempts before the new-neighbor draw enumerates candidates explicitly.
const REJECTION_ATTEMPTS: usize = 64;

/// Static heterogeneity of a node plus the memory it accumulates while links are generated.
#[derive(Debug, Clone)]
pub struct NodeProfile {
    pub node_id: u32,
    /// Activation potential: geometric scale of inactive periods.
    pub rho: f64,
    /// Propensity to visit public places.
    pub mu: f64,
    contacts: Vec<u32>,
    contact_lookup: HashSet<u32>,
    inbound: HashSet<u32>,
    // Inbound selectors not yet contacted back; stale entries are dropped lazily.
    reciprocal_queue: Vec<u32>,
}

impl NodeProfile {
    pub fn new(node_id: u32, rho: f64, mu: f64) -> Self {
        Self {
            node_id,
            rho,
            mu,
            contacts: Vec::new(),
            contact_lookup: HashSet::new(),
            inbound: HashSet::new(),
            reciprocal_queue: Vec::new(),
        }
    }

    /// Previously contacted nodes in first-contact order.
    pub fn contacts(&self) -> &[u32] {
        &self.contacts
    }

    pub fn has_contacted(&self, node: u32) -> bool {
        self.contact_lookup.contains(&node)
    }

    /// Nodes that have chosen this node as a neighbor.
    pub fn inbound_selectors(&self) -> &HashSet<u32> {
        &self.inbound
    }
}

/// All node profiles together with the population-level selection weights.
#[derive(Debug, Clone)]
pub struct Population {
    nodes: Vec<NodeProfile>,
    selection: WeightedIndex<f64>,
    mean_mu: f64,
    theta: f64,
    phi: f64,
}

impl Population {
    pub fn new(nodes: Vec<NodeProfile>, theta: f64, phi: f64) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::config("nodes", "population needs at least 2 nodes"));
        }
        let selection = WeightedIndex::new(nodes.iter().map(|n| n.mu))
            .map_err(|e| Error::config("mu_bounds", e))?;
        let mean_mu = nodes.iter().map(|n| n.mu).sum::<f64>() / nodes.len() as f64;
        Ok(Self {
            nodes,
            selection,
            mean_mu,
            theta,
            phi,
        })
    }

    pub fn nodes(&self) -> &[NodeProfile] {
        &self.nodes
    }

    pub fn into_nodes(self) -> Vec<NodeProfile> {
        self.nodes
    }

    /// Population mean propensity, fixed at construction.
    pub fn mean_mu(&self) -> f64 {
        self.mean_mu
    }

    /// Chance that `host` contacts a node it has never contacted before.
    pub fn new_neighbor_probability(&self, host: u32) -> f64 {
        let h = &self.nodes[host as usize];
        let weight = h.mu * self.theta;
        weight / (h.contacts.len() as f64 + weight)
    }

    fn is_fresh(&self, host: u32, candidate: u32) -> bool {
        candidate != host && !self.nodes[host as usize].has_contacted(candidate)
    }

    fn pick_reciprocal<R: Rng + ?Sized>(&mut self, host: u32, rng: &mut R) -> Option<u32> {
        loop {
            let queue_len = self.nodes[host as usize].reciprocal_queue.len();
            if queue_len == 0 {
                return None;
            }
            let at = rng.random_range(0..queue_len);
            let candidate = self.nodes[host as usize].reciprocal_queue[at];
            if self.is_fresh(host, candidate) {
                return Some(candidate);
            }
            self.nodes[host as usize].reciprocal_queue.swap_remove(at);
        }
    }

    /// Draw a never-contacted node with probability proportional to its propensity.
    fn pick_weighted<R: Rng + ?Sized>(&self, host: u32, rng: &mut R) -> Option<u32> {
        for _ in 0..REJECTION_ATTEMPTS {
            let candidate = self.selection.sample(rng) as u32;
            if self.is_fresh(host, candidate) {
                return Some(candidate);
            }
        }
        let candidates: Vec<u32> = (0..self.nodes.len() as u32)
            .filter(|&j| self.is_fresh(host, j))
            .collect();
        if candidates.is_empty() {
            return None;
        }
        let weights = WeightedIndex::new(candidates.iter().map(|&j| self.nodes[j as usize].mu)).ok()?;
        Some(candidates[weights.sample(rng)])
    }

    fn record(&mut self, host: u32, neighbor: u32) {
        let h = &mut self.nodes[host as usize];
        if h.contact_lookup.insert(neighbor) {
            h.contacts.push(neighbor);
        }
        let n = &mut self.nodes[neighbor as usize];
        if n.inbound.insert(host) && !n.has_contacted(host) {
            n.reciprocal_queue.push(host);
        }
    }
}

/// Choose the neighbor of one link hosted by `host` and update both nodes' memories.
///
/// With probability `mu_i theta / (n_t + mu_i theta)` a new node is contacted:
/// first, with probability `phi`, one that previously selected the host, otherwise
/// one drawn with weight `mu_j`. Otherwise a past contact is revisited uniformly.
pub fn select_neighbor<R: Rng + ?Sized>(host: u32, population: &mut Population, rng: &mut R) -> u32 {
    let n_t = population.nodes[host as usize].contacts.len();
    let everyone_known = n_t + 1 >= population.nodes.len();
    let explore = n_t == 0 || (!everyone_known && rng.random::<f64>() < population.new_neighbor_probability(host));
    let mut chosen = None;
    if explore {
        if population.phi > 0.0 && rng.random::<f64>() < population.phi {
            chosen = population.pick_reciprocal(host, rng);
        }
        if chosen.is_none() {
            chosen = population.pick_weighted(host, rng);
        }
    }
    let neighbor = match chosen {
        Some(j) => j,
        None => {
            let contacts = &population.nodes[host as usize].contacts;
            contacts[rng.random_range(0..contacts.len())]
        }
    };
    population.record(host, neighbor);
    neighbor
}

/// A generated trace together with the node heterogeneity behind it.
#[derive(Debug, Clone)]
pub struct GeneratedNetwork {
    pub trace: ContactTrace,
    pub nodes: Vec<NodeProfile>,
}

pub fn generate_trace(config: &GeneratorConfig) -> Result<ContactTrace> {
    Ok(generate_network(config)?.trace)
}

pub fn generate_network(config: &GeneratorConfig) -> Result<GeneratedNetwork> {
    config.validate()?;
    let mut rng = stream_rng(config.master_seed, "generator", 0);
    let rho_law = TruncatedPowerLaw::new(config.alpha, config.rho_bounds.0, config.rho_bounds.1, "rho_bounds")?;
    let mu_law = TruncatedPowerLaw::new(config.beta, config.mu_bounds.0, config.mu_bounds.1, "mu_bounds")?;
    let active = StepGeometric::new(config.lambda, "lambda")?;
    let duration = StepGeometric::new(config.p_b, "p_b")?;

    let mut profiles = Vec::with_capacity(config.nodes as usize);
    let mut inactive = Vec::with_capacity(config.nodes as usize);
    let mut degree = Vec::with_capacity(config.nodes as usize);
    for id in 0..config.nodes {
        let rho = rho_law.sample(&mut rng);
        let mu = mu_law.sample(&mut rng);
        inactive.push(StepGeometric::new(rho, "rho_bounds")?);
        degree.push(DegreeLaw::new(mu)?);
        profiles.push(NodeProfile::new(id, rho, mu));
    }
    let mut population = Population::new(profiles, config.theta, config.phi)?;

    // Every node opens with an inactive period; the heap holds next activations.
    let mut schedule = BinaryHeap::with_capacity(config.nodes as usize);
    for (id, law) in inactive.iter().enumerate() {
        let start = law.sample(&mut rng);
        if start < config.steps {
            schedule.push(Reverse((start, id as u32)));
        }
    }

    let horizon = config.steps;
    let mut delay_laws: Vec<Option<TruncatedGeometric>> = Vec::new();
    let mut links = Vec::new();
    while let Some(Reverse((start, host))) = schedule.pop() {
        let t_a = active.sample(&mut rng).min(horizon - start);
        let window = t_a + config.delta;
        if delay_laws.len() <= window as usize {
            delay_laws.resize(window as usize + 1, None);
        }
        let delay = match delay_laws[window as usize] {
            Some(law) => law,
            None => {
                let law = TruncatedGeometric::new(config.p_c, window)?;
                delay_laws[window as usize] = Some(law);
                law
            }
        };
        let d = degree[host as usize].sample(&mut rng);
        for _ in 0..d {
            let t_c = delay.sample(&mut rng);
            let t_d = duration.sample(&mut rng);
            let arrival = start as u64 + t_c as u64;
            if arrival >= horizon as u64 {
                continue;
            }
            let t_d = t_d.min(horizon - start - t_c);
            let neighbor = select_neighbor(host, &mut population, &mut rng);
            links.push(SpdtLink {
                host,
                neighbor,
                start_step: start,
                t_a,
                t_c,
                t_d,
                delta: config.delta,
            });
        }
        let next = start as u64 + t_a as u64 + inactive[host as usize].sample(&mut rng) as u64;
        if next < horizon as u64 {
            schedule.push(Reverse((next as u32, host)));
        }
    }

    Ok(GeneratedNetwork {
        trace: ContactTrace::new(config.clone(), Variant::Spdt, links),
        nodes: population.into_nodes(),
    })
}
