//! `spdt`: generate SPDT contact traces, project them, run epidemics and
//! experiments, and validate trace files.

mod error;
mod experiment;
mod manifest;

use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use spdt_core::contact_net::io::{read_trace, read_trace_records, write_trace};
use spdt_core::contact_net::validate::{validate_records, VALIDATION_SIGNIFICANCE};
use spdt_core::contact_net::{generate_trace, project_spst, ContactTrace, GeneratorConfig};
use spdt_core::seir::{run_epidemic, write_metrics_csv, EpidemicConfig};

use error::{CliError, CliResult};
use manifest::{config_hash, create_dir, file_digest, sidecar, RunManifest, MANIFEST_NAME};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Preset {
    Desk,
    Paper,
}

#[derive(Parser)]
#[command(name = "spdt", version, about = "Airborne disease spread over SPDT contact networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Configuration file (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file or directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Input trace file.
    #[arg(long, global = true)]
    trace: Option<PathBuf>,
    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for parallel sections.
    #[arg(long, global = true)]
    workers: Option<usize>,
    /// Built-in defaults to start from.
    #[arg(long, global = true, value_enum, default_value = "desk")]
    preset: Preset,
}

#[derive(Subcommand)]
enum Command {
    /// Generate an SPDT trace.
    Generate,
    /// Write the SPST projection of a trace.
    Project,
    /// Run one epidemic over a trace.
    Simulate,
    /// Run a P-sweep, low-connectivity or hidden-seed experiment.
    Experiment,
    /// Check trace invariants and sampling laws.
    Validate,
}

fn required<'a>(v: &'a Option<PathBuf>, flag: &str) -> CliResult<&'a Path> {
    v.as_deref()
        .ok_or_else(|| CliError::Config(format!("missing required flag --{flag}")))
}

fn parse_toml<T: serde::de::DeserializeOwned>(path: &Path) -> CliResult<T> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    toml::from_str(&text).map_err(|e| CliError::Config(format!("{}: {}", path.display(), e)))
}

fn open_trace(path: &Path) -> CliResult<ContactTrace> {
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    read_trace(BufReader::new(f)).map_err(|e| CliError::from_core(e, Some(path)))
}

fn save_trace(trace: &ContactTrace, path: &Path) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        create_dir(dir)?;
    }
    let f = File::create(path).map_err(|e| CliError::io(path, e))?;
    let mut w = BufWriter::new(f);
    write_trace(trace, &mut w).map_err(|e| CliError::from_core(e, Some(path)))?;
    w.flush().map_err(|e| CliError::io(path, e))
}

fn cmd_generate(cli: &Cli) -> CliResult<()> {
    let out = required(&cli.out, "out")?;
    let mut cfg: GeneratorConfig = match &cli.config {
        Some(p) => parse_toml(p)?,
        None => match cli.preset {
            Preset::Desk => GeneratorConfig::desk(),
            Preset::Paper => GeneratorConfig::paper_scale(),
        },
    };
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }
    cfg.validate()?;
    let mut manifest = RunManifest::new("generate", config_hash(&cfg)?, cfg.master_seed);
    let trace = generate_trace(&cfg)?;
    save_trace(&trace, out)?;
    if let Some(p) = &cli.config {
        manifest.inputs.push(p.display().to_string());
    }
    manifest.outputs.push(out.display().to_string());
    manifest.finish(&sidecar(out))?;
    println!("wrote {} links for {} nodes to {}", trace.links().len(), cfg.nodes, out.display());
    Ok(())
}

fn cmd_project(cli: &Cli) -> CliResult<()> {
    let input = required(&cli.trace, "trace")?;
    let out = required(&cli.out, "out")?;
    let trace = open_trace(input)?;
    let projected = project_spst(&trace);
    save_trace(&projected, out)?;
    #[derive(Serialize)]
    struct Hashed<'a> {
        command: &'a str,
        trace_sha256: String,
    }
    let hash = config_hash(&Hashed {
        command: "project",
        trace_sha256: file_digest(input)?,
    })?;
    let mut manifest = RunManifest::new("project", hash, trace.config.master_seed);
    manifest.inputs.push(input.display().to_string());
    manifest.outputs.push(out.display().to_string());
    manifest.finish(&sidecar(out))?;
    println!(
        "kept {} of {} links in {}",
        projected.links().len(),
        trace.links().len(),
        out.display()
    );
    Ok(())
}

fn cmd_simulate(cli: &Cli) -> CliResult<()> {
    let trace_path = required(&cli.trace, "trace")?;
    let config_path = required(&cli.config, "config")?;
    let out = required(&cli.out, "out")?;
    let mut cfg: EpidemicConfig = parse_toml(config_path)?;
    if let Some(seed) = cli.seed {
        cfg.rng_seed = seed;
    }
    let trace = open_trace(trace_path)?;
    #[derive(Serialize)]
    struct Hashed<'a> {
        epidemic: &'a EpidemicConfig,
        trace_sha256: String,
    }
    let hash = config_hash(&Hashed {
        epidemic: &cfg,
        trace_sha256: file_digest(trace_path)?,
    })?;
    let mut manifest = RunManifest::new("simulate", hash.clone(), cfg.rng_seed);
    let run = run_epidemic(&trace, &cfg)?;
    create_dir(out)?;
    let metrics = out.join("metrics.csv");
    let mut buf = Vec::new();
    let meta = [("config_hash", hash), ("rng_seed", cfg.rng_seed.to_string())];
    write_metrics_csv(&run.daily, &meta, &mut buf)?;
    manifest::write_file(&metrics, &buf)?;
    manifest.inputs.push(trace_path.display().to_string());
    manifest.inputs.push(config_path.display().to_string());
    manifest.outputs.push("metrics.csv".into());
    manifest.finish(&out.join(MANIFEST_NAME))?;
    if !run.audit.is_clean() {
        return Err(CliError::Internal(format!("safety audit failed: {:?}", run.audit)));
    }
    println!(
        "outbreak size {} (peak prevalence {}) over {} days",
        run.outbreak_size(),
        run.peak_prevalence(),
        run.daily.len()
    );
    Ok(())
}

fn cmd_experiment(cli: &Cli) -> CliResult<()> {
    let config_path = required(&cli.config, "config")?;
    let loaded = experiment::load_experiment(config_path, cli.preset, cli.seed, cli.trace.as_deref(), cli.out.as_deref())?;
    let outcome = experiment::run_experiment(&loaded, config_path)?;
    if !outcome.audit.is_clean() {
        return Err(CliError::Internal(format!("safety audit failed: {:?}", outcome.audit)));
    }
    println!(
        "{} cells computed, {} reused; results in {}",
        outcome.computed,
        outcome.skipped,
        loaded.output.display()
    );
    Ok(())
}

fn cmd_validate(cli: &Cli) -> CliResult<()> {
    let path = required(&cli.trace, "trace")?;
    let f = File::open(path).map_err(|e| CliError::io(path, e))?;
    let records = read_trace_records(BufReader::new(f)).map_err(|e| CliError::from_core(e, Some(path)))?;
    let report = validate_records(&records);
    println!("{}: {} links", path.display(), report.links);
    for w in &report.warnings {
        println!("warning: {w}");
    }
    for v in &report.violations {
        println!("line {}: {}: {}", v.line, v.kind, v.detail);
    }
    for (kind, n) in report.counts() {
        println!("{kind}: {n} violation(s)");
    }
    for fit in &report.fits {
        let verdict = if fit.result.passes(VALIDATION_SIGNIFICANCE) { "ok" } else { "FAIL" };
        println!(
            "fit {}: statistic {:.4}, p = {:.4e}, n = {} [{verdict}]",
            fit.law, fit.result.statistic, fit.result.p_value, fit.result.samples
        );
    }
    if report.passed() {
        println!("trace is valid");
        Ok(())
    } else {
        let fits = report.failed_fits().count();
        Err(CliError::Validation(format!(
            "{} invariant violation(s), {fits} failed fit(s)",
            report.violations.len()
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.workers {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(1);
        }
    }
    let result = match cli.command {
        Command::Generate => cmd_generate(&cli),
        Command::Project => cmd_project(&cli),
        Command::Simulate => cmd_simulate(&cli),
        Command::Experiment => cmd_experiment(&cli),
        Command::Validate => cmd_validate(&cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
