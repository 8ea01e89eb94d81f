//! Daily SEIR propagation over a contact trace.
//!
//! Each day, every infectious host's links attributed to that day deliver a dose
//! to susceptible neighbors; doses are summed per neighbor and one infection
//! draw is made per exposed node at the end of the day. Newly infected nodes
//! are exposed for `latent_days`, infectious for `infectious_days`, then recovered.

use std::io::{BufRead, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::contact_net::{ContactTrace, HostIndex, SpdtLink, Variant};
use crate::error::{Error, Result};
use crate::exposure::{infection_probability, DiseaseParams, DoseKernel, EnvConfig, EnvironmentSampler, LinkTiming};
use crate::exposure::particle_rate;
use crate::stream::{hash_words, purpose_tag, unit_f64};

const TAG_ENV_B: u64 = purpose_tag("environment-b");
const TAG_ENV_G: u64 = purpose_tag("environment-g");
const TAG_INFECT: u64 = purpose_tag("infection");
const TAG_LATENT: u64 = purpose_tag("latent-days");
const TAG_INFECTIOUS: u64 = purpose_tag("infectious-days");
const TAG_SEED_DURATION: u64 = purpose_tag("seed-infectious-days");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum HealthState {
    Susceptible,
    Exposed,
    Infectious,
    Recovered,
}

impl HealthState {
    fn rank(self) -> u8 {
        match self {
            HealthState::Susceptible => 0,
            HealthState::Exposed => 1,
            HealthState::Infectious => 2,
            HealthState::Recovered => 3,
        }
    }
}

/// Disease history of one node. Seeds start infectious with `latent_days == 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeDiseaseRecord {
    pub state: HealthState,
    pub day_exposed: Option<u32>,
    pub latent_days: u32,
    pub infectious_days: u32,
    /// First day on which the node is infectious.
    pub day_infectious: Option<u32>,
}

impl NodeDiseaseRecord {
    const SUSCEPTIBLE: Self = Self {
        state: HealthState::Susceptible,
        day_exposed: None,
        latent_days: 0,
        infectious_days: 0,
        day_infectious: None,
    };

    /// Days `[first, end)` on which the node is infectious.
    pub fn infectious_window(&self) -> Option<(u32, u32)> {
        self.day_infectious.map(|d| (d, d + self.infectious_days))
    }
}

/// A seed node; without an explicit duration one is drawn from the seed range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SeedSpec {
    pub node: u32,
    #[serde(default)]
    pub infectious_days: Option<u32>,
}

impl SeedSpec {
    pub fn new(node: u32, infectious_days: u32) -> Self {
        Self {
            node,
            infectious_days: Some(infectious_days),
        }
    }
}

fn default_latent() -> (u32, u32) {
    (1, 2)
}
fn default_infectious() -> (u32, u32) {
    (3, 5)
}
fn default_seed_infectious() -> (u32, u32) {
    (1, 5)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpidemicConfig {
    #[serde(default)]
    pub seed_nodes: Vec<SeedSpec>,
    pub horizon_days: u32,
    #[serde(default = "default_latent")]
    pub latent_range: (u32, u32),
    #[serde(default = "default_infectious")]
    pub infectious_range: (u32, u32),
    #[serde(default = "default_seed_infectious")]
    pub seed_infectious_range: (u32, u32),
    pub env: EnvConfig,
    pub disease: DiseaseParams,
    pub rng_seed: u64,
}

impl EpidemicConfig {
    pub fn new(horizon_days: u32, env: EnvConfig, disease: DiseaseParams, rng_seed: u64) -> Self {
        Self {
            seed_nodes: Vec::new(),
            horizon_days,
            latent_range: default_latent(),
            infectious_range: default_infectious(),
            seed_infectious_range: default_seed_infectious(),
            env,
            disease,
            rng_seed,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct DailyMetrics {
    pub day: u32,
    pub new_infections: u32,
    /// Nodes infectious on this day.
    pub prevalence: u32,
    pub cumulative: u32,
}

/// Counts of safety-property violations observed while a run executed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct SafetyAudit {
    /// Days on which `#S + #E + #I + #R != M`.
    pub conservation: u32,
    /// Node-days on which a state moved backwards.
    pub backward_transitions: u32,
    /// Doses emitted by a host that was not infectious.
    pub non_infectious_emitters: u32,
}

impl SafetyAudit {
    pub fn is_clean(&self) -> bool {
        *self == Self::default()
    }

    pub fn merge(&mut self, other: &Self) {
        self.conservation += other.conservation;
        self.backward_transitions += other.backward_transitions;
        self.non_infectious_emitters += other.non_infectious_emitters;
    }
}

#[derive(Debug, Clone)]
pub struct EpidemicRun {
    pub daily: Vec<DailyMetrics>,
    pub records: Vec<NodeDiseaseRecord>,
    pub audit: SafetyAudit,
    pub seed_count: u32,
}

impl EpidemicRun {
    /// Cumulative infections including seeds.
    pub fn outbreak_size(&self) -> u32 {
        self.daily.last().map(|d| d.cumulative).unwrap_or(0)
    }

    /// Infections beyond the seeds.
    pub fn secondary_infections(&self) -> u32 {
        self.outbreak_size() - self.seed_count
    }

    pub fn peak_prevalence(&self) -> u32 {
        self.daily.iter().map(|d| d.prevalence).max().unwrap_or(0)
    }
}

fn check_range(field: &str, (lo, hi): (u32, u32)) -> Result<()> {
    if lo < 1 || lo > hi {
        Err(Error::config(field, format!("must be a non-empty range of positive days, got ({lo}, {hi})")))
    } else {
        Ok(())
    }
}

#[inline]
fn uniform_days(h: u64, (lo, hi): (u32, u32)) -> u32 {
    let span = (hi - lo + 1) as f64;
    lo + ((unit_f64(h) * span) as u32).min(hi - lo)
}

/// Uniform integer duration on an inclusive day range.
pub fn seed_infectious_duration<R: Rng + ?Sized>(rng: &mut R, range: (u32, u32)) -> Result<u32> {
    check_range("seed_infectious_range", range)?;
    Ok(rng.random_range(range.0..=range.1))
}

/// Disease, environment and duration laws shared by many runs.
#[derive(Debug, Clone)]
pub struct EpidemicModel {
    env: EnvironmentSampler,
    emission: f64,
    ventilation: f64,
    sigma: f64,
    latent_range: (u32, u32),
    infectious_range: (u32, u32),
    seed_infectious_range: (u32, u32),
    horizon_days: u32,
}

impl EpidemicModel {
    pub fn new(cfg: &EpidemicConfig) -> Result<Self> {
        cfg.disease.validate()?;
        check_range("latent_range", cfg.latent_range)?;
        check_range("infectious_range", cfg.infectious_range)?;
        check_range("seed_infectious_range", cfg.seed_infectious_range)?;
        if cfg.horizon_days < 1 {
            return Err(Error::config("horizon_days", "must be at least 1"));
        }
        Ok(Self {
            env: EnvironmentSampler::new(&cfg.env)?,
            emission: particle_rate(&cfg.disease),
            ventilation: cfg.disease.ventilation,
            sigma: cfg.disease.sigma,
            latent_range: cfg.latent_range,
            infectious_range: cfg.infectious_range,
            seed_infectious_range: cfg.seed_infectious_range,
            horizon_days: cfg.horizon_days,
        })
    }

    pub fn horizon_days(&self) -> u32 {
        self.horizon_days
    }

    /// Dose carried by `link` from a host infectious on steps `[win_start, win_end)`.
    fn link_dose(&self, link: &SpdtLink, win_start: u32, win_end: u32, variant: Variant, step_hours: f64, seed: u64) -> f64 {
        let emit_start = link.start_step.max(win_start);
        let emit_end = (link.start_step + link.t_a).min(win_end);
        if emit_end <= emit_start {
            return 0.0;
        }
        let arrival = link.start_step + link.t_c;
        let from = arrival.max(emit_start);
        let mut to = arrival + link.t_d;
        if variant == Variant::Spst {
            to = to.min(emit_end);
        }
        if to <= from {
            return 0.0;
        }
        let timing = LinkTiming::new(
            (emit_end - emit_start) as f64 * step_hours,
            (from - emit_start) as f64 * step_hours,
            (to - from) as f64 * step_hours,
        );
        let key = link.event_key();
        let env = self.env.from_uniforms(
            unit_f64(hash_words(seed, &[TAG_ENV_B, key[0], key[1], key[2]])),
            unit_f64(hash_words(seed, &[TAG_ENV_G, key[0], key[1], key[2]])),
        );
        match DoseKernel::from_parts(self.emission, self.ventilation, env.r, env.volume) {
            Ok(kernel) => kernel.link(&timing).total,
            Err(_) => 0.0,
        }
    }

    /// Run one epidemic over an indexed trace.
    pub fn run(&self, index: &HostIndex, seeds: &[SeedSpec], rng_seed: u64) -> Result<EpidemicRun> {
        let m = index.nodes() as usize;
        let spd = index.steps_per_day();
        let step_hours = index.step_hours();
        let variant = index.variant();

        let mut records = vec![NodeDiseaseRecord::SUSCEPTIBLE; m];
        let mut infectious: Vec<u32> = Vec::with_capacity(seeds.len());
        for s in seeds {
            if s.node as usize >= m {
                return Err(Error::config("seeds", format!("seed node {} is not in the trace (nodes 0..{m})", s.node)));
            }
            if records[s.node as usize].state != HealthState::Susceptible {
                return Err(Error::config("seeds", format!("seed node {} is listed twice", s.node)));
            }
            let days = match s.infectious_days {
                Some(d) if d >= 1 => d,
                Some(_) => return Err(Error::config("seeds", format!("seed node {} needs at least 1 infectious day", s.node))),
                None => uniform_days(
                    hash_words(rng_seed, &[TAG_SEED_DURATION, s.node as u64]),
                    self.seed_infectious_range,
                ),
            };
            records[s.node as usize] = NodeDiseaseRecord {
                state: HealthState::Infectious,
                day_exposed: None,
                latent_days: 0,
                infectious_days: days,
                day_infectious: Some(0),
            };
            infectious.push(s.node);
        }

        let mut audit = SafetyAudit::default();
        let mut exposed: Vec<u32> = Vec::new();
        let mut dose = vec![0.0f64; m];
        let mut touched: Vec<u32> = Vec::new();
        let mut newly: Vec<u32> = Vec::new();
        let mut ranks: Vec<u8> = records.iter().map(|r| r.state.rank()).collect();
        let mut daily = Vec::with_capacity(self.horizon_days as usize);
        let mut cumulative = 0u32;

        for day in 0..self.horizon_days {
            let prevalence = infectious.len() as u32;
            for &host in &infectious {
                let rec = records[host as usize];
                let Some((first, end)) = rec.infectious_window() else {
                    audit.non_infectious_emitters += 1;
                    continue;
                };
                if rec.state != HealthState::Infectious || day < first || day >= end {
                    audit.non_infectious_emitters += 1;
                    continue;
                }
                let (win_start, win_end) = (first * spd, end.saturating_mul(spd));
                for link in index.hosted_on(host, day) {
                    let nb = link.neighbor as usize;
                    if records[nb].state != HealthState::Susceptible {
                        continue;
                    }
                    let d = self.link_dose(link, win_start, win_end, variant, step_hours, rng_seed);
                    if d > 0.0 {
                        if dose[nb] == 0.0 {
                            touched.push(link.neighbor);
                        }
                        dose[nb] += d;
                    }
                }
            }
            for &nb in &touched {
                let p = infection_probability(dose[nb as usize], self.sigma)?;
                let u = unit_f64(hash_words(rng_seed, &[TAG_INFECT, nb as u64, day as u64]));
                if u < p {
                    newly.push(nb);
                }
                dose[nb as usize] = 0.0;
            }
            touched.clear();

            let mut new_infections = newly.len() as u32;
            if day == 0 {
                new_infections += seeds.len() as u32;
            }
            cumulative += new_infections;
            daily.push(DailyMetrics {
                day,
                new_infections,
                prevalence,
                cumulative,
            });

            // End-of-day updates produce the states of the next day.
            let next = day + 1;
            infectious.retain(|&n| {
                let rec = &mut records[n as usize];
                if rec.day_infectious.unwrap_or(0) + rec.infectious_days <= next {
                    rec.state = HealthState::Recovered;
                    false
                } else {
                    true
                }
            });
            for &n in &newly {
                let latent = uniform_days(hash_words(rng_seed, &[TAG_LATENT, n as u64]), self.latent_range);
                let duration = uniform_days(hash_words(rng_seed, &[TAG_INFECTIOUS, n as u64]), self.infectious_range);
                records[n as usize] = NodeDiseaseRecord {
                    state: HealthState::Exposed,
                    day_exposed: Some(day),
                    latent_days: latent,
                    infectious_days: duration,
                    day_infectious: Some(day + latent),
                };
                exposed.push(n);
            }
            newly.clear();
            exposed.retain(|&n| {
                let rec = &mut records[n as usize];
                if rec.day_infectious.unwrap_or(u32::MAX) <= next {
                    rec.state = HealthState::Infectious;
                    infectious.push(n);
                    false
                } else {
                    true
                }
            });

            let mut counts = [0u32; 4];
            for (rec, rank) in records.iter().zip(ranks.iter_mut()) {
                let r = rec.state.rank();
                counts[r as usize] += 1;
                if r < *rank {
                    audit.backward_transitions += 1;
                }
                *rank = r;
            }
            if counts.iter().sum::<u32>() as usize != m
                || counts[1] as usize != exposed.len()
                || counts[2] as usize != infectious.len()
            {
                audit.conservation += 1;
            }

            if infectious.is_empty() && exposed.is_empty() {
                for rest in next..self.horizon_days {
                    daily.push(DailyMetrics {
                        day: rest,
                        new_infections: 0,
                        prevalence: 0,
                        cumulative,
                    });
                }
                break;
            }
        }

        Ok(EpidemicRun {
            daily,
            records,
            audit,
            seed_count: seeds.len() as u32,
        })
    }
}

/// Run one epidemic described entirely by `cfg`.
pub fn run_epidemic(trace: &ContactTrace, cfg: &EpidemicConfig) -> Result<EpidemicRun> {
    let model = EpidemicModel::new(cfg)?;
    let index = HostIndex::new(trace);
    model.run(&index, &cfg.seed_nodes, cfg.rng_seed)
}

pub const METRICS_COLUMNS: &str = "day,new_infections,prevalence,cumulative";

/// Write daily metrics as CSV with `# key=value` metadata lines first.
pub fn write_metrics_csv<W: Write>(daily: &[DailyMetrics], metadata: &[(&str, String)], mut out: W) -> Result<()> {
    for (k, v) in metadata {
        writeln!(out, "# {k}={v}")?;
    }
    writeln!(out, "{METRICS_COLUMNS}")?;
    for d in daily {
        writeln!(out, "{},{},{},{}", d.day, d.new_infections, d.prevalence, d.cumulative)?;
    }
    out.flush()?;
    Ok(())
}

/// Parsed metrics CSV: metadata pairs plus rows.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsFile {
    pub metadata: Vec<(String, String)>,
    pub daily: Vec<DailyMetrics>,
}

impl MetricsFile {
    pub fn meta(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }
}

pub fn read_metrics_csv<R: BufRead>(input: R) -> Result<MetricsFile> {
    let mut metadata = Vec::new();
    let mut daily = Vec::new();
    let mut seen_columns = false;
    for (i, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = i + 1;
        if let Some(rest) = line.strip_prefix("# ") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| Error::parse(line_no, "metadata lines look like `# key=value`"))?;
            metadata.push((k.to_string(), v.to_string()));
            continue;
        }
        if !seen_columns {
            if line != METRICS_COLUMNS {
                return Err(Error::parse(line_no, format!("expected column header `{METRICS_COLUMNS}`")));
            }
            seen_columns = true;
            continue;
        }
        let vals: Vec<u32> = line
            .split(',')
            .map(|v| v.parse::<u32>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::parse(line_no, e))?;
        let [day, new_infections, prevalence, cumulative] = vals[..] else {
            return Err(Error::parse(line_no, "expected 4 columns"));
        };
        daily.push(DailyMetrics {
            day,
            new_infections,
            prevalence,
            cumulative,
        });
    }
    if !seen_columns {
        return Err(Error::parse(1, "missing column header"));
    }
    Ok(MetricsFile { metadata, daily })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::contact_net::{project_spst, GeneratorConfig};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn trace(nodes: u32, days: u32, links: Vec<SpdtLink>) -> ContactTrace {
        let mut cfg = GeneratorConfig::desk();
        cfg.nodes = nodes;
        cfg.steps = days * 288;
        ContactTrace::new(cfg, Variant::Spdt, links)
    }

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

    fn config(seeds: Vec<SeedSpec>, sigma: f64, rng_seed: u64) -> EpidemicConfig {
        let mut disease = DiseaseParams::influenza();
        disease.sigma = sigma;
        let mut cfg = EpidemicConfig::new(8, EnvConfig::default(), disease, rng_seed);
        cfg.seed_nodes = seeds;
        cfg
    }

    #[test]
    fn zero_seeds_give_all_zero_days() {
        let t = trace(3, 8, vec![link(0, 1, 10, 5, 0, 5)]);
        let run = run_epidemic(&t, &config(vec![], 0.69, 1)).unwrap();
        assert_eq!(run.daily.len(), 8);
        assert!(run.daily.iter().all(|d| (d.new_infections, d.prevalence, d.cumulative) == (0, 0, 0)));
    }

    #[test]
    fn seed_without_links_stays_alone() {
        let t = trace(3, 8, vec![link(1, 2, 10, 5, 0, 5)]);
        let run = run_epidemic(&t, &config(vec![SeedSpec::new(0, 3)], 0.69, 1)).unwrap();
        assert!(run.daily.iter().all(|d| d.cumulative == 1));
        assert_eq!(run.daily[0].new_infections, 1);
        assert_eq!(run.daily.iter().map(|d| d.prevalence).collect::<Vec<_>>(), [1, 1, 1, 0, 0, 0, 0, 0]);
        assert_eq!(run.records[0].state, HealthState::Recovered);
    }

    #[test]
    fn overwhelming_dose_always_infects() {
        // Eight hours of co-presence: the dose times sigma is far above 30.
        let t = trace(2, 8, vec![link(0, 1, 10, 96, 0, 96)]);
        let model = EpidemicModel::new(&config(vec![], 1.0, 0)).unwrap();
        let index = HostIndex::new(&t);
        for s in 0..2000 {
            let run = model.run(&index, &[SeedSpec::new(0, 1)], s).unwrap();
            assert_eq!(run.outbreak_size(), 2, "rng seed {s}");
            let rec = run.records[1];
            assert_eq!(rec.day_exposed, Some(0));
            assert!((1..=2).contains(&rec.latent_days));
            assert!((3..=5).contains(&rec.infectious_days));
        }
    }

    #[test]
    fn infected_nodes_emit_from_the_next_day_at_the_earliest() {
        // Node 1 is infected on day 0 and hosts a strong link later that day and
        // on days 1 and 2.
        let mut links = vec![link(0, 1, 10, 96, 0, 96), link(1, 2, 150, 96, 0, 96)];
        links.push(link(1, 3, 288 + 10, 96, 0, 96));
        links.push(link(1, 4, 2 * 288 + 10, 96, 0, 96));
        let t = trace(5, 8, links);
        let model = EpidemicModel::new(&config(vec![], 1.0, 0)).unwrap();
        let index = HostIndex::new(&t);
        for s in 0..200 {
            let run = model.run(&index, &[SeedSpec::new(0, 1)], s).unwrap();
            assert_eq!(run.records[2].state, HealthState::Susceptible);
            let latent = run.records[1].latent_days;
            assert_eq!(run.records[3].day_exposed.is_some(), latent == 1);
            assert_eq!(run.records[4].day_exposed, Some(2));
            assert!(run.audit.is_clean());
        }
    }

    #[test]
    fn emission_stops_when_the_host_recovers() {
        // The seed is infectious on day 0 only; its day-1 link never counts and
        // a link straddling midnight only emits until the end of day 0.
        let t = trace(3, 4, vec![link(0, 1, 288 + 10, 96, 0, 96)]);
        let model = EpidemicModel::new(&config(vec![], 1.0, 0)).unwrap();
        let run = model.run(&HostIndex::new(&t), &[SeedSpec::new(0, 1)], 3).unwrap();
        assert_eq!(run.outbreak_size(), 1);

        let late = link(0, 1, 287, 96, 0, 96);
        let t = trace(3, 4, vec![late]);
        let full = model.link_dose(&late, 0, 4 * 288, Variant::Spdt, 1.0 / 12.0, 9);
        let clipped = model.link_dose(&late, 0, 288, Variant::Spdt, 1.0 / 12.0, 9);
        assert!(clipped > 0.0 && clipped < full);
        let run = model.run(&HostIndex::new(&t), &[SeedSpec::new(0, 1)], 3).unwrap();
        assert!(run.audit.is_clean());
    }

    #[test]
    fn hidden_seed_on_projection_infects_nobody() {
        let links = vec![link(0, 1, 10, 2, 3, 90), link(0, 2, 40, 3, 5, 90)];
        let spdt = trace(3, 8, links);
        let spst = project_spst(&spdt);
        assert!(spst.links().is_empty());
        let cfg = config(vec![SeedSpec::new(0, 5)], 1.0, 4);
        assert_eq!(run_epidemic(&spst, &cfg).unwrap().outbreak_size(), 1);
        assert!(run_epidemic(&spdt, &cfg).unwrap().outbreak_size() > 1);
    }

    #[test]
    fn reruns_are_identical() {
        let mut links = Vec::new();
        for k in 0..40u32 {
            links.push(link(k % 7, (k * 3 + 1) % 9, k * 37 % 2000, 6, k % 8, 6));
        }
        let t = trace(9, 8, links);
        let cfg = config(vec![SeedSpec::new(0, 3), SeedSpec { node: 4, infectious_days: None }], 0.69, 77);
        let a = run_epidemic(&t, &cfg).unwrap();
        let b = run_epidemic(&t, &cfg).unwrap();
        assert_eq!(a.daily, b.daily);
        assert_eq!(a.records, b.records);
        assert!((1..=5).contains(&a.records[4].infectious_days));
    }

    #[test]
    fn bad_seeds_are_config_errors() {
        let t = trace(3, 8, vec![]);
        let err = run_epidemic(&t, &config(vec![SeedSpec::new(7, 3)], 0.69, 1)).unwrap_err();
        assert!(err.to_string().contains("seed node 7"), "{err}");
        let dup = config(vec![SeedSpec::new(1, 3), SeedSpec::new(1, 2)], 0.69, 1);
        assert!(run_epidemic(&t, &dup).is_err());
        let mut empty = config(vec![], 0.69, 1);
        empty.horizon_days = 0;
        assert!(run_epidemic(&t, &empty).is_err());
    }

    #[test]
    fn seed_duration_law() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        assert!((0..1000).all(|_| seed_infectious_duration(&mut rng, (5, 5)).unwrap() == 5));
        assert!((0..1000).all(|_| (3..=5).contains(&seed_infectious_duration(&mut rng, (3, 5)).unwrap())));
        let mut counts = [0u32; 5];
        let n = 1_000_000;
        for _ in 0..n {
            counts[seed_infectious_duration(&mut rng, (1, 5)).unwrap() as usize - 1] += 1;
        }
        for c in counts {
            assert!((c as f64 / n as f64 - 0.2).abs() < 2e-3, "{counts:?}");
        }
        assert!(seed_infectious_duration(&mut rng, (4, 3)).is_err());
        assert!(seed_infectious_duration(&mut rng, (0, 3)).is_err());
    }

    #[test]
    fn hashed_durations_cover_their_range() {
        let mut seen = [false; 5];
        for h in 0..1000u64 {
            let d = uniform_days(hash_words(h, &[1]), (1, 5));
            seen[d as usize - 1] = true;
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn metrics_csv_round_trip() {
        let daily = vec![
            DailyMetrics {
                day: 0,
                new_infections: 3,
                prevalence: 3,
                cumulative: 3,
            },
            DailyMetrics {
                day: 1,
                new_infections: 1,
                prevalence: 4,
                cumulative: 4,
            },
        ];
        let mut buf = Vec::new();
        write_metrics_csv(&daily, &[("config_hash", "abc".into()), ("rng_seed", "9".into())], &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# config_hash=abc\n# rng_seed=9\nday,new_infections,prevalence,cumulative\n0,3,3,3\n"));
        let back = read_metrics_csv(buf.as_slice()).unwrap();
        assert_eq!(back.daily, daily);
        assert_eq!(back.meta("rng_seed"), Some("9"));
        let err = read_metrics_csv("day,new_infections,prevalence,cumulative\n1,2\n".as_bytes()).unwrap_err();
        assert!(err.to_string().contains("line 2"));
    }
}
