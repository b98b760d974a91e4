//! Config → run → report → validate/plotdata roundtrips.

use std::fs;
use std::path::Path;

use topodyn_cli::{execute_run, parse_config, plotdata, validate, write_report, PlotSeries};

const CONFIG: &str = r#"
[[run]]
name = "shift-classify"
output = "OUTDIR/shift.json"

[run.system]
kind = "full_shift"
sides = "one"

[run.query]
horizon = 800
resolution = 3
seed = 42

[[run.ops]]
op = "classify"

[[run.ops]]
op = "sensitivity_times"
delta = 0.5
[run.ops.set]
kind = "cylinder"
word = "01"
offset = 0

[[run.ops]]
op = "diam_profile"
[run.ops.set]
kind = "cylinder"
word = "01"
offset = 0

[[run]]
name = "rotation-classify"
output = "OUTDIR/rotation.json"

[run.system]
kind = "rotation"
[run.system.alpha]
kind = "golden"

[run.query]
horizon = 800
resolution = 3
seed = 42

[[run.ops]]
op = "classify"

[[run.ops]]
op = "return_times"
[run.ops.point]
kind = "circle"
angle = 0.0
[run.ops.set]
kind = "ball"
radius = 0.0625
[run.ops.set.center]
kind = "circle"
angle = 0.0
"#;

fn write_config(dir: &Path) -> std::path::PathBuf {
    let cfg = CONFIG.replace("OUTDIR", dir.to_str().unwrap());
    let path = dir.join("experiment.toml");
    fs::write(&path, cfg).unwrap();
    path
}

#[test]
fn run_validate_roundtrip_and_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path());
    let code = topodyn_cli::run(&cfg_path, Some(2));
    assert_eq!(code, 0, "all predictions match");

    for name in ["shift.json", "rotation.json"] {
        let path = dir.path().join(name);
        assert!(path.exists());
        assert_eq!(validate(&path), 0, "untampered report validates");
    }

    // NDJSON dump exists for the run with time sets
    let nd = dir.path().join("shift.ndjson");
    let lines = fs::read_to_string(&nd).unwrap();
    assert!(lines.lines().count() >= 1);
    for line in lines.lines() {
        let v: serde_json::Value = serde_json::from_str(line).unwrap();
        assert!(v.get("members_rle").is_some());
    }
}

#[test]
fn determinism_byte_identical_modulo_wall_clock() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path());
    let cfg = parse_config(&cfg_path).unwrap();
    let a = execute_run(&cfg.run[0]).unwrap();
    let b = execute_run(&cfg.run[0]).unwrap();
    let mut ja = serde_json::to_value(&a).unwrap();
    let mut jb = serde_json::to_value(&b).unwrap();
    ja["wall_clock_ms"] = 0.into();
    jb["wall_clock_ms"] = 0.into();
    assert_eq!(ja, jb, "identical config and seed give identical reports");
    assert_eq!(a.digest, b.digest);
}

#[test]
fn tampered_reports_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path());
    let cfg = parse_config(&cfg_path).unwrap();
    let report = execute_run(&cfg.run[0]).unwrap();
    let path = dir.path().join("tamper.json");
    write_report(&path, &report).unwrap();

    // flip one hex digit of the digest
    let raw = fs::read_to_string(&path).unwrap();
    let tampered = raw.replacen("\"horizon\": 800", "\"horizon\": 801", 1);
    assert_ne!(raw, tampered);
    fs::write(&path, tampered).unwrap();
    assert_ne!(validate(&path), 0, "single-field tamper must be rejected");

    // schema version error is explicit
    let old = raw.replace("\"schema_version\": 1", "\"schema_version\": 99");
    fs::write(&path, old).unwrap();
    assert_eq!(validate(&path), 2, "unknown schema version is a schema error");
}

#[test]
fn plotdata_series() {
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = write_config(dir.path());
    let cfg = parse_config(&cfg_path).unwrap();
    let report = execute_run(&cfg.run[0]).unwrap();
    let path = dir.path().join("plot.json");
    write_report(&path, &report).unwrap();

    let mut buf = Vec::new();
    assert_eq!(plotdata(&path, PlotSeries::Timeset, 0, &mut buf), 0);
    let csv = String::from_utf8(buf).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("n,member"));
    // S_σ([01], 0.5): rows (1,0),(2,1),(3,1),…
    assert_eq!(lines.next(), Some("1,0"));
    assert_eq!(lines.next(), Some("2,1"));
    assert_eq!(lines.next(), Some("3,1"));

    let mut buf = Vec::new();
    assert_eq!(plotdata(&path, PlotSeries::DiamProfile, 0, &mut buf), 0);
    let csv = String::from_utf8(buf).unwrap();
    assert!(csv.starts_with("n,diam\n1,0.5\n2,1\n"), "{csv}");

    let mut buf = Vec::new();
    assert_eq!(plotdata(&path, PlotSeries::Gaps, 0, &mut buf), 0);

    // missing series
    let mut buf = Vec::new();
    assert_ne!(plotdata(&path, PlotSeries::DiamProfile, 5, &mut buf), 0);
}

#[test]
fn schema_errors_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    fs::write(&bad, "[[run]]\nname = \"x\"\nunknown_field = 3\n").unwrap();
    assert_eq!(topodyn_cli::run(&bad, None), 2);

    let empty = dir.path().join("empty.toml");
    fs::write(&empty, "\n").unwrap();
    assert_eq!(topodyn_cli::run(&empty, None), 2);
}

#[test]
fn corrupted_witness_detected_semantically() {
    // break a relation witness, then re-finalize the digest so only the
    // semantic re-validation can catch it
    const VEECH: &str = r#"
[[run]]
name = "veech"
output = "OUTDIR/veech.json"

[run.system]
kind = "full_shift"
sides = "two"

[run.query]
horizon = 600
resolution = 2
seed = 9

[[run.ops]]
op = "rp_veech"
[run.ops.x]
kind = "champernowne"
[run.ops.y]
kind = "periodic"
word = "10"
[run.ops.set_u]
kind = "cylinder"
word = "01"
offset = 0
[run.ops.set_v]
kind = "cylinder"
word = "10"
offset = 0
"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg_path = dir.path().join("veech.toml");
    fs::write(&cfg_path, VEECH.replace("OUTDIR", dir.path().to_str().unwrap())).unwrap();
    let cfg = parse_config(&cfg_path).unwrap();
    let report = execute_run(&cfg.run[0]).unwrap();

    // sanity: witness present and the clean report validates
    let clean = dir.path().join("clean.json");
    write_report(&clean, &report).unwrap();
    assert_eq!(validate(&clean), 0);

    // corrupt the witness time and re-finalize: digest is consistent, so the
    // rejection must come from replaying the witness inequalities
    let mut v = serde_json::to_value(&report).unwrap();
    let w = &mut v["results"][0]["verdict"]["status"];
    assert_eq!(w["status"], "veech_witness");
    let n = w["n"].as_u64().unwrap();
    w["n"] = (n ^ 1).into();
    let corrupted: topodyn::report::RunReport = serde_json::from_value(v).unwrap();
    let refinalized = corrupted.finalize(7).unwrap();
    let bad = dir.path().join("bad.json");
    write_report(&bad, &refinalized).unwrap();
    assert_ne!(validate(&bad), 0, "semantic witness replay must reject the flip");
}
