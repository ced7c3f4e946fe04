use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::time::{Duration, Instant};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_cascade-scope"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn cascade-scope")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

const FORCED: &str = r#"
[simulation]
n = 24
l = 6.283185307179586
nu = 0.05
horizon = 1.0
spin_up = 0.5
cadence = 0.05

[simulation.forcing]
k_f = 1.0
seed = 1
target = { norm = 2.0 }

[simulation.initial]
kind = "random"
rms = 0.5
k_lo = 1.0
k_hi = 4.0
seed = 2

[analysis]
scales = [1.2, 1.5707963267948966]
coverings_per_scale = 2
"#;

const ZERO: &str = r#"
[simulation]
n = 24
l = 6.283185307179586
nu = 0.1
horizon = 0.5
spin_up = 0.0
cadence = 0.1

[analysis]
scales = [1.5707963267948966]
coverings_per_scale = 1
"#;

fn write_config(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

fn simulate(config: &Path, out: &Path) -> Output {
    run(&["simulate", "--config", config.to_str().unwrap(), "--out", out.to_str().unwrap()])
}

fn analyze(run_dir: &Path) -> Output {
    run(&["analyze", "--run", run_dir.to_str().unwrap()])
}

#[test]
fn simulate_then_analyze() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "forced.toml", FORCED);
    let out = tmp.path().join("run");
    let t = Instant::now();
    let s = simulate(&cfg, &out);
    assert_eq!(code(&s), 0, "{}", String::from_utf8_lossy(&s.stderr));
    assert!(t.elapsed() < Duration::from_secs(10));
    for f in ["manifest.json", "series.json", "series.csv", "summary.json", "force.bin"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let manifest: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("manifest.json")).unwrap()).unwrap();
    let snaps = manifest["files"]["snapshots"].as_array().unwrap();
    assert_eq!(snaps.len(), 21);
    assert!(snaps.iter().all(|p| out.join(p.as_str().unwrap()).exists()));
    // Defaults are echoed.
    assert_eq!(manifest["config"]["simulation"]["cfl"], 0.4);
    assert_eq!(manifest["config"]["analysis"]["delta"], 0.75);

    let series_before = std::fs::read(out.join("series.json")).unwrap();
    let a = analyze(&out);
    assert_ne!(code(&a), 1, "{}", String::from_utf8_lossy(&a.stdout));
    let report = std::fs::read(out.join("analysis/report.json")).unwrap();
    let again = analyze(&out);
    assert_eq!(code(&a), code(&again));
    assert_eq!(report, std::fs::read(out.join("analysis/report.json")).unwrap());
    assert_eq!(series_before, std::fs::read(out.join("series.json")).unwrap());
    let profile = std::fs::read_to_string(out.join("analysis/profile.csv")).unwrap();
    assert_eq!(profile.lines().count(), 5);
}

#[test]
fn same_seed_gives_identical_series() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "forced.toml", FORCED);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    assert_eq!(code(&simulate(&cfg, &a)), 0);
    assert_eq!(code(&simulate(&cfg, &b)), 0);
    assert_eq!(
        std::fs::read(a.join("series.json")).unwrap(),
        std::fs::read(b.join("series.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(a.join("series.csv")).unwrap(),
        std::fs::read(b.join("series.csv")).unwrap()
    );
}

#[test]
fn invalid_viscosity_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "bad.toml", &FORCED.replace("nu = 0.05", "nu = -1.0"));
    let o = simulate(&cfg, &tmp.path().join("run"));
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("invalid simulation"));
    assert!(!tmp.path().join("run").exists());
}

#[test]
fn zero_field_has_zero_budgets() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", ZERO);
    let out = tmp.path().join("run");
    assert_eq!(code(&simulate(&cfg, &out)), 0);
    let a = analyze(&out);
    assert_ne!(code(&a), 1, "{}", String::from_utf8_lossy(&a.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(out.join("analysis/report.json")).unwrap()).unwrap();
    for key in ["e0", "eps0", "fsq0"] {
        assert_eq!(report["globals"][key], 0.0, "{key}");
    }
    for row in report["profile"].as_array().unwrap() {
        for key in ["e", "eps", "flux", "fsq", "fu"] {
            assert_eq!(row[key], 0.0, "{key}");
        }
    }
}

#[test]
fn missing_snapshot_is_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "zero.toml", ZERO);
    let out = tmp.path().join("run");
    assert_eq!(code(&simulate(&cfg, &out)), 0);
    std::fs::remove_file(out.join("snapshots/snap_00002.bin")).unwrap();
    let a = analyze(&out);
    assert_eq!(code(&a), 1);
    let err = String::from_utf8_lossy(&a.stderr);
    assert!(err.contains("snap_00002.bin") && err.contains("missing"), "{err}");
}

#[test]
fn sweep_writes_one_row_per_grashof_number() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "forced.toml",
        &FORCED.replace("scales = [1.2, 1.5707963267948966]", "scales = []"),
    );
    let out = tmp.path().join("sweep");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--gr",
        "200,400,800",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_ne!(code(&o), 1, "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("Gr,e0,eps0,K_meas,tau0,tau_m1,alignment"));
    let rows: Vec<f64> = lines.map(|l| l.split(',').next().unwrap().parse().unwrap()).collect();
    assert_eq!(rows.len(), 3);
    for (got, want) in rows.iter().zip([200.0, 400.0, 800.0]) {
        assert!((got - want).abs() < 1e-8 * want, "{got}");
    }
    let scaling: serde_json::Value = serde_json::from_slice(&std::fs::read(out.join("scaling.json")).unwrap()).unwrap();
    assert!(scaling["scaling"]["energy_slope"]["slope_stderr"].is_number());

    let single = tmp.path().join("single");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--gr", "300", "--out", single.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&o.stdout).contains("slope fit skipped"));
}

#[test]
fn toy1d_prints_csv() {
    let o = run(&["toy1d", "--M", "1", "--N", "100", "--scales", "0.1,0.5"]);
    assert_eq!(code(&o), 0);
    let out = String::from_utf8(o.stdout).unwrap();
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("R,strategy,average"));
    assert_eq!(lines.count(), 6);
    let o = run(&["toy1d", "--N", "5", "--scales", "0.1"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_components_pass() {
    for c in ["cutoffs", "covering", "spectral"] {
        let o = run(&["verify", "--component", c]);
        assert_eq!(code(&o), 0, "{c}: {}", String::from_utf8_lossy(&o.stdout));
        assert!(!String::from_utf8_lossy(&o.stdout).contains("FAIL"));
    }
    assert_eq!(code(&run(&["verify", "--component", "solver"])), 2);
}
