use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_skewlab"))
}

fn tiny(verifiers: Value) -> Value {
    json!({
        "scenario": "custom",
        "seed": 5,
        "frequencies": [1.0],
        "reaction": {"form": "bistable", "a": {"constant": 0.3}},
        "grid": {"x": [-10.0, 10.0, 101]},
        "state_bounds": [-0.5, 1.5],
        "integrator": {"dt": 0.05, "boundary": "dirichlet_limits"},
        "initial": {"kind": "gaussian", "amplitude": 0.8, "center": [0.0], "widths": [1.5]},
        "transient": 1.0,
        "verifiers": verifiers
    })
}

fn write(dir: &Path, name: &str, v: &Value) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, serde_json::to_string_pretty(v).unwrap()).unwrap();
    p
}

fn run(cfg: &Path, out: &Path) -> Output {
    bin().arg("run").arg(cfg).arg("--out").arg(out).output().unwrap()
}

fn strip_timing(v: &mut Value) {
    match v {
        Value::Object(m) => {
            m.remove("runtime_s");
            m.remove("wall_clock_s");
            m.values_mut().for_each(strip_timing);
        }
        Value::Array(a) => a.iter_mut().for_each(strip_timing),
        _ => {}
    }
}

#[test]
fn empty_selection_runs_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &tiny(json!({})));
    let out = dir.path().join("out");
    let o = run(&cfg, &out);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report: Value = serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["verifiers"], json!([]));
    for f in [
        "summary.md",
        "trajectory.csv",
        "plot/manifest.json",
        "plot/cover_profile.csv",
    ] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    assert!(!out.join(".skewlab.lock").exists());
}

#[test]
fn failing_verifier_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &tiny(json!({"total_order": {"shifts": [-0.5, 0.0, 0.5], "tol": 1e-8}})),
    );
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL"));
}

#[test]
fn unmet_hypothesis_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    // shifts need the declared translation invariance
    let cfg = write(
        dir.path(),
        "c.json",
        &tiny(json!({"equivariance": {"elements": [0.2], "t_end": 0.5, "tol": 1e-12}})),
    );
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn invalid_config_exits_two_with_pointer() {
    let dir = tempfile::tempdir().unwrap();
    let mut v = tiny(json!({}));
    v["grid"]["x"] = json!([-10.0, 10.0, "many"]);
    let cfg = write(dir.path(), "c.json", &v);
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("/grid/x/2"));
    let o = run(&cfg, &dir.path().join("out"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn radial_without_dissipation_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/radial_2d_default.json")).unwrap();
    let mut v: Value = serde_json::from_str(&text).unwrap();
    v["reaction"]["alpha"] = json!(0.0);
    let cfg = write(dir.path(), "r.json", &v);
    let o = bin().arg("validate").arg(&cfg).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(
        err.contains("/reaction/alpha") && err.contains("outer dissipativity requires positive alpha"),
        "{err}"
    );
}

#[test]
fn bundled_configs_validate() {
    for name in ["wave_1d_default.json", "radial_2d_default.json"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("configs").join(name);
        let o = bin().arg("validate").arg(&path).output().unwrap();
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("valid"));
    }
}

#[test]
fn runs_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let v = tiny(json!({
        "monotone": {"pairs": 8, "t_end": 2.0},
        "spatial_monotonicity": {"tol": 1e-8}
    }));
    let cfg = write(dir.path(), "c.json", &v);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    run(&cfg, &a);
    run(&cfg, &b);
    let load = |d: &Path| {
        let mut v: Value = serde_json::from_str(&std::fs::read_to_string(d.join("report.json")).unwrap()).unwrap();
        strip_timing(&mut v);
        v
    };
    assert_eq!(load(&a), load(&b));
    assert_eq!(
        std::fs::read(a.join("trajectory.csv")).unwrap(),
        std::fs::read(b.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn locked_directory_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(dir.path(), "c.json", &tiny(json!({})));
    let out = dir.path().join("out");
    std::fs::create_dir_all(&out).unwrap();
    std::fs::write(out.join(".skewlab.lock"), "1").unwrap();
    let o = run(&cfg, &out);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("locked"));
    assert!(!out.join("report.json").exists());
}

#[test]
fn report_rerenders_summary() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write(
        dir.path(),
        "c.json",
        &tiny(json!({"monotone": {"pairs": 4, "t_end": 1.0}})),
    );
    let out = dir.path().join("out");
    assert_eq!(run(&cfg, &out).status.code(), Some(0));
    let before = std::fs::read_to_string(out.join("summary.md")).unwrap();
    std::fs::remove_file(out.join("summary.md")).unwrap();
    let o = bin().arg("report").arg(&out).output().unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(std::fs::read_to_string(out.join("summary.md")).unwrap(), before);
}
