use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use spdt_core::contact_net::{generate_trace, io::read_trace, ContactTrace, GeneratorConfig, Variant};
use spdt_core::experiments::{
    find_low_connectivity_set, node_count_table, outbreak_difference_table, prevalence_table, run_single_seed_cell,
    run_sweep_cell, summarize_single_seed, threshold_day_table, PairedNetwork, PoolKind, ScenarioConfig, SeedPools,
    SingleSeedRecord, SingleSeedSpec, SummaryTable, SweepResult, SweepRun, SweepSpec, VARIANTS,
};
use spdt_core::exposure::{DiseaseParams, EnvConfig, RemovalMode};
use spdt_core::seir::{read_metrics_csv, write_metrics_csv, EpidemicConfig, EpidemicModel, SafetyAudit, SeedSpec};

use crate::error::{CliError, CliResult};
use crate::manifest::{config_hash, create_dir, file_digest, write_file, RunManifest, MANIFEST_NAME};
use crate::Preset;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    PSweep,
    LowConnectivity,
    HiddenSeed,
}

impl ExperimentKind {
    fn as_str(self) -> &'static str {
        match self {
            ExperimentKind::PSweep => "p-sweep",
            ExperimentKind::LowConnectivity => "low-connectivity",
            ExperimentKind::HiddenSeed => "hidden-seed",
        }
    }
}

/// A scenario given by its standard name or spelled out in full.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum ScenarioRef {
    Name(String),
    Custom(ScenarioConfig),
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct EpidemicBase {
    horizon_days: Option<u32>,
    latent_range: Option<(u32, u32)>,
    infectious_range: Option<(u32, u32)>,
    env: Option<EnvConfig>,
    disease: Option<DiseaseParams>,
}

/// Experiment file as written by the user; unset fields come from the preset.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct ExperimentFile {
    kind: ExperimentKind,
    trace: Option<PathBuf>,
    output: Option<PathBuf>,
    master_seed: Option<u64>,
    generator: Option<GeneratorConfig>,
    epidemic: Option<EpidemicBase>,
    scenarios: Option<Vec<ScenarioRef>>,
    p_values: Option<Vec<f64>>,
    n_seeds: Option<u32>,
    reps: Option<u32>,
    seed_infectious_range: Option<(u32, u32)>,
    infectious_days: Option<u32>,
    reps_per_node: Option<u32>,
    window_days: Option<u32>,
    max_direct_neighbors: Option<usize>,
    cumulative_thresholds: Option<Vec<u32>>,
    node_thresholds: Option<Vec<u32>>,
}

/// Where the trace comes from; part of the hashed plan.
#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "kebab-case")]
enum TraceSource {
    File { sha256: String },
    Generated { generator: GeneratorConfig },
}

/// Fully resolved experiment; its canonical JSON is the config hash input.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentPlan {
    kind: ExperimentKind,
    master_seed: u64,
    trace: TraceSource,
    epidemic: EpidemicConfig,
    scenarios: Vec<ScenarioConfig>,
    p_values: Vec<f64>,
    n_seeds: u32,
    reps: u32,
    seed_infectious_range: (u32, u32),
    infectious_days: u32,
    reps_per_node: u32,
    window_days: u32,
    max_direct_neighbors: usize,
    cumulative_thresholds: Vec<u32>,
    node_thresholds: Vec<u32>,
}

/// Environment used by experiments unless the file overrides it.
pub fn experiment_env() -> EnvConfig {
    EnvConfig {
        r_mode: RemovalMode::AdditivePhysical,
        ..EnvConfig::default()
    }
}

fn p_grid(step: f64) -> Vec<f64> {
    let n = (1.0 / step).round() as u32;
    (0..=n).map(|i| (i as f64 * step * 1e9).round() / 1e9).collect()
}

fn resolve_scenarios(refs: Option<Vec<ScenarioRef>>, kind: ExperimentKind) -> CliResult<Vec<ScenarioConfig>> {
    let Some(refs) = refs else {
        return Ok(match kind {
            ExperimentKind::PSweep => vec![ScenarioConfig::s1()],
            _ => ScenarioConfig::standard(),
        });
    };
    refs.into_iter()
        .map(|r| match r {
            ScenarioRef::Name(n) => ScenarioConfig::by_name(&n).ok_or_else(|| {
                CliError::Config(format!("`scenarios`: unknown scenario `{n}` (expected S-1, S-2 or S-3)"))
            }),
            ScenarioRef::Custom(s) => Ok(s),
        })
        .collect()
}

pub struct LoadedExperiment {
    pub plan: ExperimentPlan,
    pub hash: String,
    pub output: PathBuf,
    pub trace_path: Option<PathBuf>,
}

pub fn load_experiment(
    path: &Path,
    preset: Preset,
    seed: Option<u64>,
    trace: Option<&Path>,
    out: Option<&Path>,
) -> CliResult<LoadedExperiment> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    let file: ExperimentFile =
        toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))?;
    let base_dir = path.parent().unwrap_or(Path::new(""));
    let kind = file.kind;

    let (generator, reps, p_step) = match preset {
        Preset::Desk => (GeneratorConfig::desk(), 20, 0.2),
        Preset::Paper => (GeneratorConfig::paper_scale(), 200, 0.1),
    };
    // A `--trace` flag is taken relative to the working directory, a `trace` key to the config.
    let trace_path = match trace {
        Some(t) => Some(t.to_path_buf()),
        None => file.trace.map(|t| if t.is_relative() { base_dir.join(t) } else { t }),
    };
    let trace = match &trace_path {
        Some(p) => TraceSource::File { sha256: file_digest(p)? },
        None => {
            let g = file.generator.unwrap_or(generator);
            g.validate()?;
            TraceSource::Generated { generator: g }
        }
    };
    let epi = file.epidemic.unwrap_or(EpidemicBase {
        horizon_days: None,
        latent_range: None,
        infectious_range: None,
        env: None,
        disease: None,
    });
    let master_seed = seed.or(file.master_seed).unwrap_or(1);
    let mut epidemic = EpidemicConfig::new(
        epi.horizon_days.unwrap_or(32),
        epi.env.unwrap_or_else(experiment_env),
        epi.disease.unwrap_or_default(),
        master_seed,
    );
    if let Some(r) = epi.latent_range {
        epidemic.latent_range = r;
    }
    if let Some(r) = epi.infectious_range {
        epidemic.infectious_range = r;
    }

    let plan = ExperimentPlan {
        kind,
        master_seed,
        trace,
        epidemic,
        scenarios: resolve_scenarios(file.scenarios, kind)?,
        p_values: file.p_values.unwrap_or_else(|| p_grid(p_step)),
        n_seeds: file.n_seeds.unwrap_or(200),
        reps: file.reps.unwrap_or(reps),
        seed_infectious_range: file.seed_infectious_range.unwrap_or((1, 5)),
        infectious_days: file.infectious_days.unwrap_or(5),
        reps_per_node: file.reps_per_node.unwrap_or(match kind {
            ExperimentKind::HiddenSeed => 10,
            _ => 1,
        }),
        window_days: file.window_days.unwrap_or(5),
        max_direct_neighbors: file.max_direct_neighbors.unwrap_or(2),
        cumulative_thresholds: file
            .cumulative_thresholds
            .unwrap_or_else(|| vec![100, 500, 1000, 2000, 5000, 10000]),
        node_thresholds: file
            .node_thresholds
            .unwrap_or_else(|| vec![10, 20, 50, 100, 200, 500, 1000, 2000, 5000, 10000]),
    };
    plan.check()?;
    let hash = config_hash(&plan)?;
    let output = match (out, file.output) {
        (Some(o), _) => o.to_path_buf(),
        (None, Some(o)) if o.is_relative() => base_dir.join(o),
        (None, Some(o)) => o,
        (None, None) => return Err(CliError::Config("`output`: no output directory (set `output` or pass --out)".into())),
    };
    Ok(LoadedExperiment {
        plan,
        hash,
        output,
        trace_path,
    })
}

impl ExperimentPlan {
    fn check(&self) -> CliResult<()> {
        EpidemicModel::new(&self.epidemic)?;
        for s in &self.scenarios {
            EpidemicModel::new(&s.apply(&self.epidemic)?)?;
        }
        match self.kind {
            ExperimentKind::PSweep => {
                if self.scenarios.len() != 1 {
                    return Err(CliError::Config("`scenarios`: a P-sweep takes exactly one scenario".into()));
                }
                self.sweep_spec().hidden_counts()?;
            }
            _ => self.single_spec().validate()?,
        }
        Ok(())
    }

    fn sweep_spec(&self) -> SweepSpec {
        SweepSpec {
            p_values: self.p_values.clone(),
            n_seeds: self.n_seeds,
            reps: self.reps,
            scenario: self.scenarios[0].clone(),
            seed_infectious_range: self.seed_infectious_range,
        }
    }

    fn single_spec(&self) -> SingleSeedSpec {
        SingleSeedSpec {
            scenarios: self.scenarios.clone(),
            infectious_days: self.infectious_days,
            reps_per_node: self.reps_per_node,
            trigger: spdt_core::experiments::OUTBREAK_TRIGGER,
        }
    }
}

fn load_trace(loaded: &LoadedExperiment) -> CliResult<ContactTrace> {
    let trace = match (&loaded.plan.trace, &loaded.trace_path) {
        (TraceSource::File { .. }, Some(p)) => {
            let f = File::open(p).map_err(|e| CliError::io(p, e))?;
            read_trace(BufReader::new(f)).map_err(|e| CliError::from_core(e, Some(p)))?
        }
        (TraceSource::Generated { generator }, _) => generate_trace(generator)?,
        _ => return Err(CliError::Internal("trace source without a path".into())),
    };
    if trace.variant != Variant::Spdt {
        return Err(CliError::Config("`trace`: experiments need an SPDT trace, got a projected one".into()));
    }
    Ok(trace)
}

fn audit_text(a: &SafetyAudit) -> String {
    format!(
        "conservation:{},backward:{},non_infectious_emitters:{}",
        a.conservation, a.backward_transitions, a.non_infectious_emitters
    )
}

fn parse_audit(s: &str) -> Option<SafetyAudit> {
    let mut vals = s.split(',').map(|kv| kv.split_once(':').and_then(|(_, v)| v.parse().ok()));
    Some(SafetyAudit {
        conservation: vals.next()??,
        backward_transitions: vals.next()??,
        non_infectious_emitters: vals.next()??,
    })
}

fn seeds_text(seeds: &[SeedSpec]) -> String {
    let mut s = String::new();
    for (i, seed) in seeds.iter().enumerate() {
        if i > 0 {
            s.push(';');
        }
        write!(s, "{}:{}", seed.node, seed.infectious_days.unwrap_or(0)).unwrap();
    }
    s
}

fn parse_seeds(s: &str) -> Option<Vec<SeedSpec>> {
    if s.is_empty() {
        return Some(Vec::new());
    }
    s.split(';')
        .map(|kv| {
            let (n, d) = kv.split_once(':')?;
            Some(SeedSpec::new(n.parse().ok()?, d.parse().ok()?))
        })
        .collect()
}

/// Hash recorded in the first line of a raw CSV, if any.
fn recorded_hash(path: &Path) -> Option<String> {
    let f = File::open(path).ok()?;
    let mut first = String::new();
    BufReader::new(f).read_line(&mut first).ok()?;
    first.trim_end().strip_prefix("# config_hash=").map(str::to_string)
}

fn sweep_cell_name(p: f64, rep: u32, variant: Variant) -> String {
    format!("p{p}_rep{rep:03}_{variant}")
}

fn single_cell_name(scenario: &str, variant: Variant) -> String {
    format!("{scenario}_{variant}")
}

pub struct ExperimentOutcome {
    pub computed: usize,
    pub skipped: usize,
    pub audit: SafetyAudit,
}

pub fn run_experiment(loaded: &LoadedExperiment, config_path: &Path) -> CliResult<ExperimentOutcome> {
    let plan = &loaded.plan;
    let out = &loaded.output;
    let raw_dir = out.join("raw");
    let summary_dir = out.join("summary");
    create_dir(&raw_dir)?;
    create_dir(&summary_dir)?;
    let mut manifest = RunManifest::new("experiment", loaded.hash.clone(), plan.master_seed);
    manifest.inputs.push(config_path.display().to_string());
    if let Some(p) = &loaded.trace_path {
        manifest.inputs.push(p.display().to_string());
    }

    let trace = load_trace(loaded)?;
    let net = PairedNetwork::new(&trace);
    drop(trace);

    let outcome = match plan.kind {
        ExperimentKind::PSweep => run_sweep(plan, &loaded.hash, &net, &raw_dir, &summary_dir, &mut manifest)?,
        _ => run_single(plan, &loaded.hash, &net, &raw_dir, &summary_dir, &mut manifest)?,
    };
    manifest.finish(&out.join(MANIFEST_NAME))?;
    Ok(outcome)
}

fn write_table(dir: &Path, name: &str, table: &SummaryTable, manifest: &mut RunManifest) -> CliResult<()> {
    write_file(&dir.join(name), table.to_csv().as_bytes())?;
    manifest.outputs.push(format!("summary/{name}"));
    Ok(())
}

fn run_sweep(
    plan: &ExperimentPlan,
    hash: &str,
    net: &PairedNetwork,
    raw_dir: &Path,
    summary_dir: &Path,
    manifest: &mut RunManifest,
) -> CliResult<ExperimentOutcome> {
    let spec = plan.sweep_spec();
    let max_w = plan.seed_infectious_range.1;
    let pools = SeedPools::build(net.spdt(), max_w);
    let model = EpidemicModel::new(&spec.scenario.apply(&plan.epidemic)?)?;
    let cells = spec.cells();
    let path_of = |c: &spdt_core::experiments::SweepCell| {
        raw_dir.join(format!("{}.csv", sweep_cell_name(spec.p_values[c.p_index], c.rep, c.variant)))
    };
    let todo: Vec<_> = cells
        .iter()
        .filter(|c| recorded_hash(&path_of(c)).as_deref() != Some(hash))
        .copied()
        .collect();
    let computed = todo.len();
    todo.par_iter().try_for_each(|&cell| -> CliResult<()> {
        let run = run_sweep_cell(net, &pools, &model, &spec, cell, plan.master_seed)?;
        let meta = [
            ("config_hash", hash.to_string()),
            ("rng_seed", run.rng_seed.to_string()),
            ("kind", plan.kind.as_str().to_string()),
            ("scenario", spec.scenario.name.clone()),
            ("p", run.p.to_string()),
            ("rep", run.rep.to_string()),
            ("variant", run.variant.to_string()),
            ("audit", audit_text(&run.audit)),
            ("seeds", seeds_text(&run.seeds)),
        ];
        let mut buf = Vec::new();
        write_metrics_csv(&run.daily, &meta, &mut buf)?;
        write_file(&path_of(&cell), &buf)
    })?;

    // Summaries always come from the raw files on disk.
    let mut runs = Vec::with_capacity(cells.len());
    let mut audit = SafetyAudit::default();
    for cell in &cells {
        let path = path_of(cell);
        let f = File::open(&path).map_err(|e| CliError::io(&path, e))?;
        let m = read_metrics_csv(BufReader::new(f)).map_err(|e| CliError::from_core(e, Some(&path)))?;
        let bad = || CliError::Malformed(format!("{}: incomplete run metadata", path.display()));
        let run_audit = parse_audit(m.meta("audit").ok_or_else(bad)?).ok_or_else(bad)?;
        audit.merge(&run_audit);
        runs.push(SweepRun {
            p: spec.p_values[cell.p_index],
            rep: cell.rep,
            variant: cell.variant,
            rng_seed: m.meta("rng_seed").and_then(|s| s.parse().ok()).ok_or_else(bad)?,
            seeds: parse_seeds(m.meta("seeds").ok_or_else(bad)?).ok_or_else(bad)?,
            daily: m.daily,
            audit: run_audit,
        });
        manifest.outputs.push(format!("raw/{}", path.file_name().unwrap().to_string_lossy()));
        manifest.completed_cells.push(sweep_cell_name(spec.p_values[cell.p_index], cell.rep, cell.variant));
    }
    let result = SweepResult {
        p_values: spec.p_values.clone(),
        reps: spec.reps,
        runs,
    };
    write_table(summary_dir, "fig1_prevalence_cumulative.csv", &prevalence_table(&result), manifest)?;
    write_table(
        summary_dir,
        "fig2ab_days_to_threshold.csv",
        &threshold_day_table(&result, &plan.cumulative_thresholds),
        manifest,
    )?;
    write_table(summary_dir, "fig2cd_spdt_spst_difference.csv", &outbreak_difference_table(&result), manifest)?;
    Ok(ExperimentOutcome {
        computed,
        skipped: cells.len() - computed,
        audit,
    })
}

const SINGLE_COLUMNS: &str = "node,rep,outbreak_size,peak_prevalence";

fn write_single_csv(path: &Path, meta: &[(&str, String)], records: &[SingleSeedRecord]) -> CliResult<()> {
    let mut s = String::new();
    for (k, v) in meta {
        writeln!(s, "# {k}={v}").unwrap();
    }
    writeln!(s, "{SINGLE_COLUMNS}").unwrap();
    for r in records {
        writeln!(s, "{},{},{},{}", r.node, r.rep, r.outbreak_size, r.peak_prevalence).unwrap();
    }
    write_file(path, s.as_bytes())
}

fn read_single_csv(path: &Path) -> CliResult<(SafetyAudit, Vec<SingleSeedRecord>)> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut audit = None;
    let mut records = Vec::new();
    let mut header = false;
    for (i, line) in BufReader::new(f).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let bad = |what: &str| CliError::Malformed(format!("{}: line {}: {what}", path.display(), i + 1));
        if let Some(rest) = line.strip_prefix("# ") {
            if let Some(a) = rest.strip_prefix("audit=") {
                audit = Some(parse_audit(a).ok_or_else(|| bad("bad audit field"))?);
            }
            continue;
        }
        if !header {
            if line != SINGLE_COLUMNS {
                return Err(bad("missing column header"));
            }
            header = true;
            continue;
        }
        let v: Vec<u32> = line
            .split(',')
            .map(|x| x.parse())
            .collect::<Result<_, _>>()
            .map_err(|_| bad("expected integers"))?;
        let [node, rep, outbreak_size, peak_prevalence] = v[..] else {
            return Err(bad("expected 4 columns"));
        };
        records.push(SingleSeedRecord {
            node,
            rep,
            outbreak_size,
            peak_prevalence,
            audit: SafetyAudit::default(),
        });
    }
    let audit = audit.ok_or_else(|| CliError::Malformed(format!("{}: missing audit field", path.display())))?;
    Ok((audit, records))
}

fn run_single(
    plan: &ExperimentPlan,
    hash: &str,
    net: &PairedNetwork,
    raw_dir: &Path,
    summary_dir: &Path,
    manifest: &mut RunManifest,
) -> CliResult<ExperimentOutcome> {
    let spec = plan.single_spec();
    let seed_set: Vec<u32> = match plan.kind {
        ExperimentKind::LowConnectivity => find_low_connectivity_set(net.spst(), plan.window_days, plan.max_direct_neighbors)?,
        _ => SeedPools::build(net.spdt(), plan.window_days)
            .pool(PoolKind::Hidden, plan.window_days)?
            .to_vec(),
    };
    if seed_set.is_empty() {
        return Err(CliError::Config(format!("the {} seed set is empty for this trace", plan.kind.as_str())));
    }
    let mut listing = String::from("node\n");
    for n in &seed_set {
        writeln!(listing, "{n}").unwrap();
    }
    write_file(&raw_dir.join("seed_set.csv"), listing.as_bytes())?;
    manifest.outputs.push("raw/seed_set.csv".into());

    let mut computed = 0;
    let mut skipped = 0;
    let mut audit = SafetyAudit::default();
    let mut cells = Vec::new();
    let mut summary_rows = SummaryTable {
        header: vec!["scenario", "variant", "seed_nodes", "triggering_nodes", "max_outbreak"],
        rows: Vec::new(),
    };
    for scenario in &plan.scenarios {
        let model = EpidemicModel::new(&scenario.apply(&plan.epidemic)?)?;
        for variant in VARIANTS {
            let name = single_cell_name(&scenario.name, variant);
            let path = raw_dir.join(format!("{name}.csv"));
            if recorded_hash(&path).as_deref() == Some(hash) {
                skipped += 1;
            } else {
                let records = run_single_seed_cell(net, &model, &seed_set, &spec, variant, plan.master_seed)?;
                let mut cell_audit = SafetyAudit::default();
                for r in &records {
                    cell_audit.merge(&r.audit);
                }
                let meta = [
                    ("config_hash", hash.to_string()),
                    ("kind", plan.kind.as_str().to_string()),
                    ("scenario", scenario.name.clone()),
                    ("variant", variant.to_string()),
                    ("infectious_days", spec.infectious_days.to_string()),
                    ("reps_per_node", spec.reps_per_node.to_string()),
                    ("audit", audit_text(&cell_audit)),
                ];
                write_single_csv(&path, &meta, &records)?;
                computed += 1;
            }
            let (cell_audit, records) = read_single_csv(&path)?;
            audit.merge(&cell_audit);
            let summary = summarize_single_seed(&records, spec.trigger);
            summary_rows.rows.push(vec![
                scenario.name.clone(),
                variant.to_string(),
                seed_set.len().to_string(),
                summary.triggering_nodes.to_string(),
                summary.max_outbreak.to_string(),
            ]);
            cells.push((scenario.name.clone(), variant, summary));
            manifest.outputs.push(format!("raw/{name}.csv"));
            manifest.completed_cells.push(name);
        }
    }
    let fig = match plan.kind {
        ExperimentKind::LowConnectivity => "fig3_node_counts.csv",
        _ => "fig4_node_counts.csv",
    };
    write_table(summary_dir, fig, &node_count_table(&cells, &plan.node_thresholds), manifest)?;
    write_table(summary_dir, "single_seed_summary.csv", &summary_rows, manifest)?;
    Ok(ExperimentOutcome {
        computed,
        skipped,
        audit,
    })
}
