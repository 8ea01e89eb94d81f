use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn spdt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spdt"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("spawn spdt")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generator_toml(nodes: u32, steps: u32, seed: u64) -> String {
    format!(
        "nodes = {nodes}\nsteps = {steps}\nstep_minutes = 5.0\nlambda = 0.25\nalpha = 1.5\nrho_bounds = [0.001, 0.05]\n\
         beta = 1.5\nmu_bounds = [0.05, 0.8]\ndelta = 4\np_c = 0.1\np_b = 0.1\ntheta = 5.0\nphi = 0.5\nmaster_seed = {seed}\n"
    )
}

const EPIDEMIC_TOML: &str = r#"
horizon_days = 32
rng_seed = 3
seed_nodes = [{ node = 0, infectious_days = 5 }, { node = 1, infectious_days = 3 }]

[env]
b_range = [0.005, 0.05]
b_mean = 0.01
g_range = [0.25, 5.0]
g_median = 1.0
proximity_radius = 40.0
ceiling_height = 3.0
r_mode = "additive-physical"

[disease]
cough_frequency = 18.0
cough_volume = 6.7e-9
concentration = 3.7e12
ventilation = 0.45
sigma = 0.69
"#;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self {
            dir: TempDir::new().unwrap(),
        }
    }

    fn path(&self, name: &str) -> PathBuf {
        self.dir.path().join(name)
    }

    fn write(&self, name: &str, text: &str) -> PathBuf {
        let p = self.path(name);
        fs::write(&p, text).unwrap();
        p
    }

    fn run(&self, args: &[&str]) -> Output {
        spdt(self.dir.path(), args)
    }

    fn generate(&self, name: &str, nodes: u32, steps: u32) {
        self.write("gen.toml", &generator_toml(nodes, steps, 42));
        let o = self.run(&["generate", "--config", "gen.toml", "--out", name]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
}

#[test]
fn generate_is_reproducible_and_writes_a_manifest() {
    let ws = Workspace::new();
    ws.generate("a.txt", 500, 3 * 288);
    ws.generate("b.txt", 500, 3 * 288);
    assert_eq!(fs::read(ws.path("a.txt")).unwrap(), fs::read(ws.path("b.txt")).unwrap());
    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path("a.txt.manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "generate");
    assert_eq!(manifest["master_seed"], 42);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn seed_flag_changes_config_hash() {
    let ws = Workspace::new();
    ws.write("gen.toml", &generator_toml(200, 288, 42));
    assert!(ws.run(&["generate", "--config", "gen.toml", "--out", "a.txt"]).status.success());
    assert!(ws.run(&["generate", "--config", "gen.toml", "--out", "b.txt", "--seed", "7"]).status.success());
    let hash = |f: &str| {
        let m: serde_json::Value = serde_json::from_str(&fs::read_to_string(ws.path(f)).unwrap()).unwrap();
        m["config_hash"].as_str().unwrap().to_string()
    };
    assert_ne!(hash("a.txt.manifest.json"), hash("b.txt.manifest.json"));
}

#[test]
fn missing_field_is_named() {
    let ws = Workspace::new();
    let text: String = generator_toml(10, 288, 1).lines().filter(|l| !l.starts_with("lambda")).map(|l| format!("{l}\n")).collect();
    ws.write("bad.toml", &text);
    let o = ws.run(&["generate", "--config", "bad.toml", "--out", "t.txt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("lambda"), "{}", stderr(&o));

    ws.write("bad2.toml", &generator_toml(10, 288, 1).replace("lambda = 0.25", "lambda = 1.5"));
    let o = ws.run(&["generate", "--config", "bad2.toml", "--out", "t.txt"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("lambda"));
}

#[test]
fn unwritable_destination_is_an_io_error() {
    let ws = Workspace::new();
    ws.write("gen.toml", &generator_toml(10, 288, 1));
    ws.write("blocker", "");
    let o = ws.run(&["generate", "--config", "gen.toml", "--out", "blocker/t.txt"]);
    assert_eq!(o.status.code(), Some(4), "{}", stderr(&o));
}

#[test]
fn toy_network_validates() {
    let ws = Workspace::new();
    ws.generate("toy.txt", 2, 10);
    let o = ws.run(&["validate", "--trace", "toy.txt"]);
    assert!(o.status.success(), "{}", stdout(&o));
}

#[test]
fn fresh_trace_validates_and_corruption_is_located() {
    let ws = Workspace::new();
    ws.generate("t.txt", 2000, 4 * 288);
    let o = ws.run(&["validate", "--trace", "t.txt"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("fit "));

    let text = fs::read_to_string(ws.path("t.txt")).unwrap();
    let mut lines: Vec<String> = text.lines().map(str::to_string).collect();
    let f: Vec<u32> = lines[5].split(' ').map(|x| x.parse().unwrap()).collect();
    lines[5] = format!("{} {} {} {} {} {} {}", f[0], f[1], f[2], f[3], f[3] + f[6] + 1, f[5], f[6]);
    ws.write("bad.txt", &(lines.join("\n") + "\n"));
    let o = ws.run(&["validate", "--trace", "bad.txt"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stdout(&o).contains("line 6: arrival-window"), "{}", stdout(&o));

    lines[5] = "1 2 three 4 5 6 7".into();
    ws.write("garbled.txt", &(lines.join("\n") + "\n"));
    let o = ws.run(&["validate", "--trace", "garbled.txt"]);
    assert_eq!(o.status.code(), Some(6));
    assert!(stderr(&o).contains("line 6"), "{}", stderr(&o));
}

#[test]
fn empty_trace_passes_with_warning() {
    let ws = Workspace::new();
    ws.generate("t.txt", 50, 288);
    let header = fs::read_to_string(ws.path("t.txt")).unwrap().lines().next().unwrap().to_string();
    ws.write("empty.txt", &(header + "\n"));
    let o = ws.run(&["validate", "--trace", "empty.txt"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("warning: trace contains zero links"));
}

#[test]
fn projection_is_idempotent() {
    let ws = Workspace::new();
    ws.generate("t.txt", 800, 3 * 288);
    assert!(ws.run(&["project", "--trace", "t.txt", "--out", "p1.txt"]).status.success());
    assert!(ws.run(&["project", "--trace", "p1.txt", "--out", "p2.txt"]).status.success());
    let p1 = fs::read_to_string(ws.path("p1.txt")).unwrap();
    assert_eq!(p1, fs::read_to_string(ws.path("p2.txt")).unwrap());
    let original = fs::read_to_string(ws.path("t.txt")).unwrap();
    assert!(p1.lines().count() <= original.lines().count());
    assert!(p1.lines().next().unwrap().contains("variant=spst"));
    assert!(ws.run(&["validate", "--trace", "p1.txt"]).status.success());
}

#[test]
fn indirect_only_trace_projects_to_empty_links() {
    let ws = Workspace::new();
    ws.generate("t.txt", 50, 288);
    let header = fs::read_to_string(ws.path("t.txt")).unwrap().lines().next().unwrap().to_string();
    ws.write("ind.txt", &format!("{header}\n0 1 10 2 3 5 4\n1 2 20 3 6 2 4\n"));
    assert!(ws.run(&["project", "--trace", "ind.txt", "--out", "p.txt"]).status.success());
    let p = fs::read_to_string(ws.path("p.txt")).unwrap();
    assert_eq!(p.lines().count(), 1);
    assert_eq!(p.lines().next().unwrap(), header.replace("variant=spdt", "variant=spst"));
}

#[test]
fn simulate_writes_thirty_two_rows_deterministically() {
    let ws = Workspace::new();
    ws.generate("t.txt", 1000, 32 * 288);
    ws.write("epi.toml", EPIDEMIC_TOML);
    for out in ["s1", "s2"] {
        let o = ws.run(&["simulate", "--trace", "t.txt", "--config", "epi.toml", "--out", out]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let a = fs::read_to_string(ws.path("s1/metrics.csv")).unwrap();
    assert_eq!(a, fs::read_to_string(ws.path("s2/metrics.csv")).unwrap());
    let rows: Vec<&str> = a.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 32);
    assert!(a.starts_with("# config_hash="));
    assert!(a.contains("# rng_seed=3\n"));
    assert!(ws.path("s1/manifest.json").exists());
}

#[test]
fn simulate_without_seeds_is_all_zero() {
    let ws = Workspace::new();
    ws.generate("t.txt", 300, 32 * 288);
    ws.write("epi.toml", &EPIDEMIC_TOML.replace("seed_nodes = [{ node = 0, infectious_days = 5 }, { node = 1, infectious_days = 3 }]", ""));
    let o = ws.run(&["simulate", "--trace", "t.txt", "--config", "epi.toml", "--out", "s"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(ws.path("s/metrics.csv")).unwrap();
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 32);
    for (d, row) in rows.iter().enumerate() {
        assert_eq!(*row, format!("{d},0,0,0"));
    }
}

#[test]
fn unknown_seed_node_is_named() {
    let ws = Workspace::new();
    ws.generate("t.txt", 300, 288);
    ws.write("epi.toml", &EPIDEMIC_TOML.replace("node = 1,", "node = 9999,"));
    let o = ws.run(&["simulate", "--trace", "t.txt", "--config", "epi.toml", "--out", "s"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("9999"), "{}", stderr(&o));
}

fn sweep_spec() -> String {
    format!(
        "kind = \"p-sweep\"\noutput = \"out\"\nmaster_seed = 11\np_values = [0.0, 1.0]\nreps = 2\nn_seeds = 10\n\n[generator]\n{}",
        generator_toml(3000, 12 * 288, 5)
    )
}

#[test]
fn experiment_grid_and_resume() {
    let ws = Workspace::new();
    ws.write("exp.toml", &sweep_spec());
    let o = ws.run(&["experiment", "--config", "exp.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("8 cells computed, 0 reused"), "{}", stdout(&o));
    let raw: Vec<_> = fs::read_dir(ws.path("out/raw")).unwrap().collect();
    assert_eq!(raw.len(), 8);
    for f in ["fig1_prevalence_cumulative.csv", "fig2ab_days_to_threshold.csv", "fig2cd_spdt_spst_difference.csv"] {
        assert!(ws.path("out/summary").join(f).exists(), "{f}");
    }
    let diff = fs::read_to_string(ws.path("out/summary/fig2cd_spdt_spst_difference.csv")).unwrap();
    let ps: Vec<&str> = diff.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(ps, ["0", "1"]);
    let summary_before = fs::read(ws.path("out/summary/fig1_prevalence_cumulative.csv")).unwrap();

    fs::remove_file(ws.path("out/raw/p1_rep001_spst.csv")).unwrap();
    let o = ws.run(&["experiment", "--config", "exp.toml"]);
    assert!(stdout(&o).contains("1 cells computed, 7 reused"), "{}", stdout(&o));
    assert_eq!(summary_before, fs::read(ws.path("out/summary/fig1_prevalence_cumulative.csv")).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(ws.path("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["completed_cells"].as_array().unwrap().len(), 8);

    // A changed seed invalidates every cell.
    let o = ws.run(&["experiment", "--config", "exp.toml", "--seed", "12"]);
    assert!(stdout(&o).contains("8 cells computed, 0 reused"), "{}", stdout(&o));
}

#[test]
fn experiment_reports_short_pools() {
    let ws = Workspace::new();
    ws.write("exp.toml", &sweep_spec().replace("n_seeds = 10", "n_seeds = 2000"));
    let o = ws.run(&["experiment", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(3));
    let err = stderr(&o);
    assert!(err.contains("_pool_w") && err.contains("too few for"), "{err}");
}

#[test]
fn experiment_rejects_unknown_keys_and_scenarios() {
    let ws = Workspace::new();
    ws.write("exp.toml", &sweep_spec().replace("reps = 2", "reps = 2\nrepz = 3"));
    let o = ws.run(&["experiment", "--config", "exp.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("repz"));
    ws.write("exp2.toml", &sweep_spec().replace("reps = 2", "reps = 2\nscenarios = [\"S-9\"]"));
    let o = ws.run(&["experiment", "--config", "exp2.toml"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("S-9"));
}

#[test]
fn single_seed_experiment_writes_tables() {
    let ws = Workspace::new();
    let spec = format!(
        "kind = \"hidden-seed\"\noutput = \"out\"\nreps_per_node = 2\nscenarios = [\"S-1\", \"S-3\"]\n\n[generator]\n{}",
        generator_toml(2000, 8 * 288, 5)
    );
    ws.write("exp.toml", &spec);
    let o = ws.run(&["experiment", "--config", "exp.toml"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("4 cells computed"));
    let summary = fs::read_to_string(ws.path("out/summary/single_seed_summary.csv")).unwrap();
    let spst_rows: Vec<&str> = summary.lines().filter(|l| l.contains(",spst,")).collect();
    assert_eq!(spst_rows.len(), 2);
    for row in spst_rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols[3], "0", "{row}");
        assert_eq!(cols[4], "1", "{row}");
    }
    assert!(ws.path("out/summary/fig4_node_counts.csv").exists());
    assert!(ws.path("out/raw/seed_set.csv").exists());
}

#[test]
fn trace_flag_overrides_generated_network() {
    let ws = Workspace::new();
    ws.generate("t.txt", 1500, 8 * 288);
    ws.write("exp.toml", "kind = \"low-connectivity\"\noutput = \"out\"\nscenarios = [\"S-1\"]\n[epidemic]\nhorizon_days = 8\n");
    let o = ws.run(&["experiment", "--config", "exp.toml", "--trace", "t.txt"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("2 cells computed"));
    let manifest = fs::read_to_string(ws.path("out/manifest.json")).unwrap();
    assert!(manifest.contains("t.txt"), "{manifest}");
    let seeds = fs::read_to_string(ws.path("out/raw/seed_set.csv")).unwrap();
    assert!(seeds.lines().skip(1).all(|l| l.trim().parse::<u32>().map_or(true, |n| n < 1500)));
}
