use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use rmean_cli::config::{ConfigErrors, RunConfig};
use rmean_cli::execute;
use rmean_core::io::read_table;
use tempfile::TempDir;

fn config(text: &str, out: &Path) -> RunConfig {
    let mut cfg = RunConfig::from_toml(text, out).expect("config parses");
    cfg.output.dir = out.to_path_buf();
    cfg
}

fn field_paths(text: &str, base: &Path) -> Vec<String> {
    let errs: ConfigErrors =
        RunConfig::from_toml(text, base).and_then(|c| c.validate()).expect_err("config is invalid");
    errs.paths().into_iter().map(String::from).collect()
}

fn repo_configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

const ALGEBRA: &str = r#"
command = "verify-algebra"
seed = 42
[verify_algebra]
m = 5
samples = 1000
"#;

#[test]
fn verify_algebra_seed_42_meets_residual_bound() {
    let dir = TempDir::new().unwrap();
    let report = execute(&config(ALGEBRA, dir.path())).unwrap();
    let stage = report.stage("trace_identities").unwrap();
    assert_eq!(stage.verdict, "PASS");
    assert_eq!(stage.detail["samples"], 1000);
    let worst = stage.detail["max_relative"].as_f64().unwrap();
    assert!(worst <= 1e-10, "max relative residual {worst:e}");
    assert!(stage.detail["pm_relative"].as_f64().unwrap() <= 1e-10);
    assert_eq!(report.stage("newton_inequalities").unwrap().verdict, "PASS");
    assert_eq!(report.stage("potential_bound").unwrap().verdict, "HOLDS");
    assert_eq!(report.provenance.seed, Some(42));
    assert!(report.conclusion.is_none());
    let table = read_table(&dir.path().join("algebra_samples.csv")).unwrap();
    assert_eq!(table.rows.len(), 1000);
    assert!(table.rows.iter().all(|r| r[0] == 5.0));
}

#[test]
fn paper_constant_is_violated_on_random_spectra() {
    let dir = TempDir::new().unwrap();
    let mut cfg = config(ALGEBRA, dir.path());
    cfg.constant_mode = rmean_core::curvature::ConstantMode::Paper;
    let report = execute(&cfg).unwrap();
    let stage = report.stage("potential_bound").unwrap();
    assert_eq!(stage.verdict, "VIOLATED");
    assert!(stage.detail["paper_violations"].as_u64().unwrap() > 0);
    assert_eq!(stage.detail["corrected_violations"], 0);
}

#[test]
fn reports_are_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = config(ALGEBRA, dir.path());
    let read = || {
        (fs::read(dir.path().join("report.json")).unwrap(), fs::read(dir.path().join("algebra_samples.csv")).unwrap())
    };
    execute(&cfg).unwrap();
    let first = read();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    pool.install(|| execute(&cfg)).unwrap();
    assert_eq!(first, read());
}

const OSCILLATE: &str = r#"
command = "oscillate"
t_max = 10.0
[oscillate]
v = { kind = "power", exponent = 2.0 }
a = { kind = "constant", value = 1.0 }
"#;

#[test]
fn oscillate_writes_zeros_at_multiples_of_pi() {
    let dir = TempDir::new().unwrap();
    let report = execute(&config(OSCILLATE, dir.path())).unwrap();
    let zeros = read_table(&dir.path().join("zeros.csv")).unwrap();
    let got: Vec<f64> = zeros.rows.iter().map(|r| r[0]).collect();
    assert_eq!(got.len(), 3);
    for (n, z) in got.iter().enumerate() {
        assert!((z - (n + 1) as f64 * PI).abs() < 1e-6, "zero {n}: {z}");
    }
    assert_eq!(report.stage("solve").unwrap().detail["start_kind"], "singular_origin");
    assert_eq!(report.stage("certificates").unwrap().verdict, "CERTIFIED");
    // z = sin t / t at the stored nodes
    let sol = read_table(&dir.path().join("solution.csv")).unwrap();
    assert_eq!(sol.header.as_deref(), Some(&["t".to_string(), "z".into(), "w".into()][..]));
    for r in sol.rows.iter().filter(|r| r[0] > 0.1) {
        assert!((r[1] - r[0].sin() / r[0]).abs() < 1e-8, "z({}) = {}", r[0], r[1]);
    }
}

#[test]
fn zero_potential_is_solved_but_not_judged() {
    let dir = TempDir::new().unwrap();
    let text = OSCILLATE.replace("value = 1.0", "value = 0.0");
    let report = execute(&config(&text, dir.path())).unwrap();
    assert!(report.stage("criteria").is_none());
    assert!(report.provenance.notes.iter().any(|n| n.contains("criteria not applicable")));
    let sol = read_table(&dir.path().join("solution.csv")).unwrap();
    assert!(sol.rows.iter().all(|r| r[1] == 1.0 && r[2] == 0.0));
}

#[test]
fn csv_profiles_are_loaded_and_negative_rows_rejected() {
    let dir = TempDir::new().unwrap();
    let rows: String = (0..=400).map(|i| format!("{},{}\n", i as f64 / 40.0, 1.0)).collect();
    fs::write(dir.path().join("v.csv"), format!("t,v\n{rows}")).unwrap();
    let text = r#"
command = "oscillate"
t_max = 10.0
[oscillate]
v = { kind = "csv", path = "v.csv" }
a = { kind = "constant", value = 1.0 }
start = { kind = "interior", t0 = 0.0, z0 = 0.0, zp0 = 1.0 }
"#;
    let mut cfg = RunConfig::from_toml(text, dir.path()).unwrap();
    cfg.output.dir = dir.path().join("out");
    let report = execute(&cfg).unwrap();
    assert_eq!(report.provenance.data, rmean_cli::report::DataKind::Sampled);
    let zeros = read_table(&cfg.output.dir.join("zeros.csv")).unwrap();
    for (n, r) in zeros.rows.iter().enumerate() {
        assert!((r[0] - n as f64 * PI).abs() < 1e-6, "zero {n}: {}", r[0]);
    }

    fs::write(dir.path().join("v.csv"), "t,v\n0,1\n1,1\n2,-1\n3,1\n").unwrap();
    let err = execute(&cfg).unwrap_err();
    let msg = format!("{err:#}");
    assert!(msg.contains("line 4"), "{msg}");
}

#[test]
fn exponential_battery_concludes() {
    let text = fs::read_to_string(repo_configs().join("check-theorem1.toml")).unwrap();
    for mode in ["paper", "corrected"] {
        let dir = TempDir::new().unwrap();
        let mut cfg = config(&text, dir.path());
        cfg.constant_mode = if mode == "paper" {
            rmean_core::curvature::ConstantMode::Paper
        } else {
            rmean_core::curvature::ConstantMode::Corrected
        };
        let report = execute(&cfg).unwrap();
        assert_eq!(report.stage("hypotheses").unwrap().verdict, "SATISFIED", "{mode}");
        assert_eq!(report.stage("criteria").unwrap().verdict, "OSCILLATORY", "{mode}");
        assert_eq!(report.stage("certificates").unwrap().verdict, "CERTIFIED", "{mode}");
        let c = report.conclusion.as_ref().unwrap();
        assert_eq!(c.stage, "gate");
        assert_eq!(c.verdict, "CONCLUSION");
        assert_eq!(c.statement.as_deref(), Some("Gauss map meets every equator outside every compact"));
        assert!(report.provenance.notes.iter().any(|n| n.contains(mode)), "{mode}");
        for f in ["solution.csv", "zeros.csv", "certificates.csv", "ratio_trace.csv", "report.json"] {
            assert!(dir.path().join(f).is_file(), "{f}");
        }
    }
}

#[test]
fn catenoid_gate_withholds_conclusion() {
    let text = fs::read_to_string(repo_configs().join("check-theorem2.toml")).unwrap();
    let dir = TempDir::new().unwrap();
    let report = execute(&config(&text, dir.path())).unwrap();
    assert_eq!(report.stage("criteria").unwrap().verdict, "INCONCLUSIVE");
    let c = report.conclusion.as_ref().unwrap();
    assert_eq!(c.verdict, "NO_CONCLUSION");
    assert!(c.statement.is_none());
    assert_eq!(report.provenance.data, rmean_cli::report::DataKind::Geometric);
}

#[test]
fn conclusions_only_follow_a_satisfied_gate() {
    // v_j = t^2, v_1 = 1/t: branch ii fails, so no statement whatever the criteria say
    let text = r#"
command = "check-theorem1"
t_max = 100.0
[theorem1]
branch = "ii"
data = { kind = "synthetic", m = 3, j = 1, hj1 = 1.0, v_j = { kind = "power", exponent = 2.0 }, v_1 = { kind = "power", exponent = -1.0 } }
"#;
    let dir = TempDir::new().unwrap();
    let report = execute(&config(text, dir.path())).unwrap();
    assert_eq!(report.stage("hypotheses").unwrap().verdict, "NOT_SATISFIED");
    let c = report.conclusion.as_ref().unwrap();
    assert_eq!(c.verdict, "NO_CONCLUSION");
    assert!(c.statement.is_none());
}

#[test]
fn config_errors_name_their_fields() {
    let base = Path::new(".");
    let bad_j = r#"
command = "check-theorem1"
t_max = 100.0
tol = -1.0
[theorem1]
branch = "ii"
data = { kind = "synthetic", m = 3, j = 2, hj1 = 1.0, v_j = { kind = "constant", value = 1.0 } }
"#;
    let paths = field_paths(bad_j, base);
    assert!(paths.contains(&"theorem1.data.j".to_string()), "{paths:?}");
    assert!(paths.contains(&"tol".to_string()), "{paths:?}");

    let no_seed = "command = \"verify-algebra\"\n[verify_algebra]\nm = 5\nsamples = 10\n";
    assert_eq!(field_paths(no_seed, base), vec!["seed"]);

    let bad_tmax = OSCILLATE.replace("t_max = 10.0", "t_max = 0.0");
    assert_eq!(field_paths(&bad_tmax, base), vec!["t_max"]);

    let missing_file =
        OSCILLATE.replace(r#"{ kind = "power", exponent = 2.0 }"#, r#"{ kind = "csv", path = "nope.csv" }"#);
    assert_eq!(field_paths(&missing_file, base), vec!["oscillate.v.path"]);

    let surface_j = r#"
command = "check-theorem2"
[theorem2.data]
kind = "surface"
j = 1
surface = { m = 2, profile = { kind = "catenoid", range = [0.0, 10.0] } }
"#;
    assert_eq!(field_paths(surface_j, base), vec!["theorem2.data.j"]);

    let no_section = "command = \"probe-gauss\"\n";
    assert_eq!(field_paths(no_section, base), vec!["probe_gauss"]);

    let wrong_vector = r#"
command = "probe-envelope"
[probe_envelope]
surface = { m = 2, profile = { kind = "sphere", range = [0.0, 3.0] } }
vector = [1.0, 0.0]
window = [0.5, 1.0]
"#;
    assert_eq!(field_paths(wrong_vector, base), vec!["probe_envelope.vector"]);

    let unknown = "command = \"oscillate\"\nt_maximum = 3.0\n";
    let errs = RunConfig::from_toml(unknown, base).unwrap_err();
    assert!(errs.to_string().contains("t_maximum"), "{errs}");
}

#[test]
fn shipped_configs_validate() {
    let mut n = 0;
    for entry in fs::read_dir(repo_configs()).unwrap() {
        let path = entry.unwrap().path();
        if path.extension().is_some_and(|e| e == "toml") {
            RunConfig::load(&path).and_then(|c| c.validate()).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
            n += 1;
        }
    }
    assert_eq!(n, 6);
}

#[test]
fn probes_report_crossings_and_coverage() {
    let dir = TempDir::new().unwrap();
    let text = fs::read_to_string(repo_configs().join("probe-gauss.toml")).unwrap();
    let report = execute(&config(&text, dir.path())).unwrap();
    let stage = report.stage("equator_crossings").unwrap();
    // ⟨a, ν⟩ vanishes somewhere on the parallel iff |s| <= 1
    assert_eq!(stage.detail["crossing_count"], 21);
    let table = read_table(&dir.path().join("crossings.csv")).unwrap();
    for r in &table.rows {
        assert_eq!(r[1] == 1.0, r[0] <= 1.0 + 1e-12, "s = {}", r[0]);
    }

    let text = fs::read_to_string(repo_configs().join("probe-envelope.toml")).unwrap();
    let report = execute(&config(&text, dir.path())).unwrap();
    let stage = report.stage("tangent_envelope").unwrap();
    assert_eq!(stage.verdict, "COVERED");
    assert!(stage.detail["witness"]["residual"].as_f64().unwrap() < 1e-10);
}

fn rmean(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_rmean")).args(args).output().unwrap()
}

#[test]
fn binary_applies_flag_overrides() {
    let dir = TempDir::new().unwrap();
    let cfg = repo_configs().join("verify-algebra.toml");
    let out = rmean(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--seed",
        "7",
        "--constant-mode",
        "paper",
        "--tol",
        "1e-9",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&fs::read(dir.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 7);
    assert_eq!(report["provenance"]["constant_mode"], "paper");
    assert_eq!(report["config"]["tol"].as_f64(), Some(1e-9));
    // 17 significant digits in the file itself
    let text = fs::read_to_string(dir.path().join("report.json")).unwrap();
    assert!(text.contains("\"tol\": 1.0000000000000001e-9"), "{}", &text[..400]);
}

#[test]
fn binary_exit_status_tracks_errors_not_verdicts() {
    let dir = TempDir::new().unwrap();
    let cfg = repo_configs().join("check-theorem2.toml");
    let out = rmean(&["--config", cfg.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("NO_CONCLUSION"));

    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "command = \"oscillate\"\ntol = 0.0\n[oscillate]\nv = { kind = \"constant\", value = 1.0 }\na = { kind = \"constant\", value = 1.0 }\n").unwrap();
    let out = rmean(&["--config", bad.to_str().unwrap(), "--out", dir.path().to_str().unwrap()]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("tol: must be positive") && err.contains("t_max: required"), "{err}");

    let out = rmean(&["--config", "/nonexistent/run.toml"]);
    assert!(!out.status.success());

    let out = rmean(&[
        "--config",
        bad.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
        "--tmax",
        "5",
        "--tol",
        "1e-10",
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
