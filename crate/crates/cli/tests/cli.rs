use serde_json::Value;
use std::f64::consts::PI;
use std::path::Path;
use std::process::{Command, Output};

fn obslab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_obslab"))
        .env_remove("OBSLAB_OUT")
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn report(dir: &Path, command: &str) -> Value {
    serde_json::from_slice(&std::fs::read(dir.join(format!("{command}.json"))).unwrap()).unwrap()
}

fn without_wall_clock(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("wall_clock");
    v
}

fn schema() -> jsonschema::JSONSchema {
    let load = |name: &str| -> Value {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("schema").join(name);
        serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
    };
    let mut report = load("report.schema.json");
    let mut config = load("run-config.schema.json");
    config.as_object_mut().unwrap().remove("$id");
    config.as_object_mut().unwrap().remove("$schema");
    // Inline the config schema and lift its definitions so the nested $refs resolve.
    let defs = config.as_object_mut().unwrap().remove("definitions").unwrap();
    report["properties"]["config"] = config;
    report["definitions"] = defs;
    jsonschema::JSONSchema::options().with_draft(jsonschema::Draft::Draft7).compile(&report).unwrap()
}

fn assert_valid(doc: &Value) {
    let s = schema();
    let msgs: Vec<String> = match s.validate(doc) {
        Ok(()) => return,
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    panic!("report violates schema: {msgs:?}");
}

#[test]
fn harmonic_spectrum_lists_odd_integers() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(dir.path(), &["spectrum", "--m", "1", "--K", "10"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(dir.path(), "spectrum");
    let pairs = doc["results"]["table"]["pairs"].as_array().unwrap();
    assert_eq!(pairs.len(), 10);
    for (i, p) in pairs.iter().enumerate() {
        let lam = p["lambda"].as_f64().unwrap();
        assert!((lam - (2 * i + 1) as f64).abs() < 1e-6, "λ_{} = {lam}", i + 1);
    }
    let csv = std::fs::read_to_string(dir.path().join("spectrum_eigenvalues.csv")).unwrap();
    assert_eq!(csv.lines().count(), 11);
    assert!(dir.path().join("spectrum_eigenfunctions.csv").exists());
    assert_valid(&doc);
}

#[test]
fn zero_levels_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(dir.path(), &["spectrum", "--m", "1", "--K", "0"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!dir.path().join("spectrum.json").exists());
}

#[test]
fn malformed_flags_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(obslab(dir.path(), &["spectrum", "--m", "1"]).status.code(), Some(2));
    assert_eq!(obslab(dir.path(), &["mintime", "--set", "halfline:1", "--T", "pie", "--k", "5"]).status.code(), Some(2));
    assert_eq!(obslab(dir.path(), &["setmass", "--m", "1", "--set", "nowhere:1"]).status.code(), Some(2));
}

#[test]
fn numeric_failure_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    // 150 modes cannot capture a bump of width 1.
    let out = obslab(dir.path(), &["twotime", "--r", "1", "--T", "1.0", "--family", "1", "--K", "150"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn identical_configs_give_identical_reports() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let args = ["setmass", "--m", "1", "--set", "periodic:1", "--K", "12"];
    assert!(obslab(a.path(), &args).status.success());
    assert!(obslab(b.path(), &args).status.success());
    let (mut ra, mut rb) = (without_wall_clock(report(a.path(), "setmass")), without_wall_clock(report(b.path(), "setmass")));
    ra["config"]["out_dir"] = Value::Null;
    rb["config"]["out_dir"] = Value::Null;
    assert_eq!(ra, rb);
    assert_eq!(
        std::fs::read(a.path().join("setmass_masses.csv")).unwrap(),
        std::fs::read(b.path().join("setmass_masses.csv")).unwrap()
    );
}

#[test]
fn replaying_a_report_reproduces_it() {
    let dir = tempfile::tempdir().unwrap();
    assert!(obslab(dir.path(), &["--seed", "3", "spectrum", "--m", "2", "--K", "12"]).status.success());
    let first = std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap();
    let stored = dir.path().join("first.json");
    std::fs::write(&stored, &first).unwrap();
    let out = obslab(dir.path(), &["run", "--config", stored.to_str().unwrap()]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let second = std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap();
    let strip = |s: &str| -> String { s.lines().filter(|l| !l.contains("_ms\"")).collect::<Vec<_>>().join("\n") };
    assert_eq!(strip(&first), strip(&second));
    assert_eq!(report(dir.path(), "spectrum")["config"]["seed"], 3);
}

#[test]
fn floats_are_written_with_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    assert!(obslab(dir.path(), &["spectrum", "--m", "1", "--K", "3"]).status.success());
    let text = std::fs::read_to_string(dir.path().join("spectrum.json")).unwrap();
    let line = text.lines().find(|l| l.trim_start().starts_with("\"lambda\":")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().replace(['-', '.'], "");
    assert_eq!(mantissa.len(), 17, "{number}");
}

#[test]
fn half_pi_token_is_exact_in_the_scan() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(dir.path(), &["mintime", "--set", "halfline:1", "--T", "pi/2,1.9", "--k", "5"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(dir.path(), "mintime");
    assert_eq!(doc["config"]["t_grid"][0], "pi/2");
    assert_eq!(doc["results"]["scan"]["t_list"][0].as_f64().unwrap().to_bits(), (PI / 2.0).to_bits());
    let q = &doc["results"]["scan"]["q"][0];
    assert!(q[0].as_f64().unwrap() < 0.05 && q[1].as_f64().unwrap() > 0.1, "{q}");
    let csv = std::fs::read_to_string(dir.path().join("mintime_q.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3 + 2);
    assert_valid(&doc);
}

#[test]
fn half_line_masses_are_one_half() {
    let dir = tempfile::tempdir().unwrap();
    assert!(obslab(dir.path(), &["setmass", "--m", "1", "--set", "halfline:0", "--K", "10", "--levels", "5,10"]).status.success());
    let doc = report(dir.path(), "setmass");
    for e in doc["results"]["masses"]["masses"].as_array().unwrap() {
        assert!((e.as_f64().unwrap() - 0.5).abs() < 1e-9);
    }
    assert_eq!(doc["results"]["thickness"]["weakly_thick"]["verdict"], "weakly_thick");
    assert_eq!(doc["results"]["decompositions"].as_array().unwrap().len(), 2);
    assert_valid(&doc);
}

#[test]
fn set_files_match_inline_sets() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("set.json");
    std::fs::write(&file, r#"{"intervals": [[-1.0, 1.0], [2.0, 3.0]]}"#).unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert!(obslab(&a, &["setmass", "--m", "1", "--set-file", file.to_str().unwrap(), "--K", "8"]).status.success());
    assert!(obslab(&b, &["setmass", "--m", "1", "--set", "intervals:-1,1;2,3", "--K", "8"]).status.success());
    assert_eq!(report(&a, "setmass")["results"]["masses"], report(&b, "setmass")["results"]["masses"]);
}

#[test]
fn wkb_reports_scaling_exponents() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(dir.path(), &["wkb", "--m", "2", "--k", "25..28"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(dir.path(), "wkb");
    let slope = doc["results"]["scaling"]["osc_slope"].as_f64().unwrap();
    assert!((slope - 0.5).abs() < 0.1, "{slope}");
    assert_eq!(doc["files"].as_array().unwrap().len(), 4);
    let csv = std::fs::read_to_string(dir.path().join("wkb_k25.csv")).unwrap();
    assert!(csv.starts_with("x,phi,wkb,error_bound\n"));
    assert_valid(&doc);
}

#[test]
fn resolvent_writes_a_margin_curve() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(
        dir.path(),
        &["resolvent", "--set", "periodic:1", "--lambda", "0..20", "--lambda-step", "10", "--half-width", "10", "--nodes", "400", "--M", "1", "--mw", "10"],
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.path().join("resolvent_margins.csv")).unwrap();
    assert_eq!(csv.lines().next().unwrap(), "lambda,margin_M1_mw10");
    assert_eq!(csv.lines().count(), 4);
    let doc = report(dir.path(), "resolvent");
    assert!(doc["results"]["best"]["min_margin"].as_f64().unwrap() > 0.0);
    assert_valid(&doc);
}

#[test]
fn twotime_flags_resonant_times() {
    let dir = tempfile::tempdir().unwrap();
    let out = obslab(dir.path(), &["twotime", "--r", "5", "--T", "1.0,pi/2", "--family", "1", "--K", "150"]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let doc = report(dir.path(), "twotime");
    let recs = doc["results"]["records"].as_array().unwrap();
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[0]["regime"], "generic");
    assert_eq!(recs[1]["regime"], "resonant");
    assert_eq!(recs[1]["T_token"], "pi/2");
    assert!(recs[1]["quotient"].as_f64().unwrap() > 1e4 * recs[0]["quotient"].as_f64().unwrap());
    assert_valid(&doc);
}

#[test]
fn output_directory_falls_back_to_the_environment() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_obslab"))
        .env("OBSLAB_OUT", dir.path())
        .args(["spectrum", "--m", "1", "--K", "2"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("spectrum.json").exists());
}
