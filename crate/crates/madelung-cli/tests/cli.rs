//! End-to-end tests of the command-line interface: exit codes, artifact
//! shape, documented defaults, and determinism of the emitted files.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn temp_dir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("madelung-cli-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_config(dir: &Path, json: &str) -> PathBuf {
    // One file per distinct body, so earlier paths stay valid.
    let digest: u64 = json.bytes().fold(0, |h, b| h.wrapping_mul(31).wrapping_add(b as u64));
    let path = dir.join(format!("config-{digest:x}.json"));
    std::fs::write(&path, json).unwrap();
    path
}

fn run(suite: &str, config: &Path, out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madelung"))
        .args([suite, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .expect("binary runs")
}

fn run_seeded(suite: &str, config: &Path, out: &Path, seed: u64) -> Output {
    Command::new(env!("CARGO_BIN_EXE_madelung"))
        .args([suite, "--config"])
        .arg(config)
        .arg("--out")
        .arg(out)
        .args(["--seed", &seed.to_string()])
        .output()
        .expect("binary runs")
}

fn results(out: &Path) -> Value {
    let text = std::fs::read_to_string(out.join("results.json")).expect("results.json written");
    serde_json::from_str(&text).expect("results.json parses")
}

fn check<'a>(results: &'a Value, name: &str) -> &'a Value {
    results["checks"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["name"] == name)
        .unwrap_or_else(|| panic!("check {name} missing"))
}

/// Everything before the metadata block, which holds the timestamp and
/// is the only part allowed to differ between identical runs.
fn stable_prefix(text: &str) -> &str {
    let idx = text.find("\"metadata\"").expect("metadata block present");
    &text[..idx]
}

#[test]
fn gaussian_check_passes_with_defaults() {
    let dir = temp_dir("gaussian");
    let config = write_config(&dir, r#"{"grid": {"points": 16}}"#);
    let out = dir.join("out");
    let output = run("gaussian-check", &config, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let r = results(&out);
    assert_eq!(r["suite"], "gaussian-check");
    assert_eq!(r["seed"], 7);
    assert_eq!(r["generator"], "chacha8");
    assert_eq!(r["pass"], true);
    let identity = check(&r, "quantization_identity");
    assert!(identity["measured"].as_f64().unwrap() < 1e-8);
    assert_eq!(identity["pass"], true);
}

#[test]
fn stationary_configuration_keeps_energy_constant() {
    let dir = temp_dir("stationary");
    let config = write_config(
        &dir,
        r#"{
            "grid": {"points": 64},
            "dt": 0.001,
            "t_final": 1.0,
            "record_every": 100,
            "potential": {"kind": "stationary"},
            "initial": {"density_contrast": 0.3, "phase_amplitude": 0.0},
            "tolerances": {"energy_drift": 1e-9}
        }"#,
    );
    let out = dir.join("out");
    let output = run("evolve", &config, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let r = results(&out);
    let energy = check(&r, "energy_drift");
    assert_eq!(energy["tolerance"].as_f64().unwrap(), 1e-9);
    assert_eq!(energy["pass"], true);
    assert_eq!(check(&r, "stationary_drift")["pass"], true);

    let csv = std::fs::read_to_string(out.join("energy.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,value"));
    assert!(lines.count() >= 2, "energy series has recorded rows");
}

#[test]
fn malformed_configurations_exit_two_naming_the_field() {
    let dir = temp_dir("malformed");
    let out = dir.join("out");

    let negative_dt = write_config(&dir, r#"{"grid": {"points": 64}, "dt": -0.001}"#);
    let output = run("evolve", &negative_dt, &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("\"dt\""));

    let missing_dt = write_config(&dir, r#"{"grid": {"points": 64}}"#);
    let output = run("evolve", &missing_dt, &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("\"dt\""));

    let unknown_key = write_config(&dir, r#"{"grid": {"points": 64}, "step": 0.001}"#);
    let output = run("evolve", &unknown_key, &out);
    assert_eq!(output.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&output.stderr).contains("unknown field"));

    let output = run("evolve", &dir.join("absent.json"), &out);
    assert_eq!(output.status.code(), Some(2));

    // The static suites do not need a step size.
    let geometry_out = dir.join("geometry-out");
    let output = run("verify-geometry", &missing_dt, &geometry_out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");
}

#[test]
fn minimal_configuration_applies_documented_defaults() {
    let dir = temp_dir("defaults");
    let config = write_config(&dir, r#"{"grid": {"points": 32}}"#);
    let out = dir.join("out");
    let output = run("verify-geometry", &config, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let effective = &results(&out)["effective_config"];
    assert_eq!(effective["hbar"].as_f64().unwrap(), 0.5);
    assert_eq!(effective["t_final"].as_f64().unwrap(), 1.0);
    assert_eq!(effective["record_every"], 10);
    assert_eq!(effective["trials"], 20);
    assert!(
        (effective["grid"]["length"].as_f64().unwrap() - std::f64::consts::TAU).abs() < 1e-15
    );
    assert_eq!(effective["potential"]["kind"], "cosine");
    assert_eq!(effective["potential"]["amplitude"].as_f64().unwrap(), 1.0);
    assert_eq!(
        effective["initial"]["density_contrast"].as_f64().unwrap(),
        0.3
    );
    assert_eq!(
        effective["initial"]["phase_amplitude"].as_f64().unwrap(),
        0.2
    );
}

#[test]
fn identical_runs_emit_identical_artifacts() {
    let dir = temp_dir("determinism");
    let config = write_config(
        &dir,
        r#"{"grid": {"points": 32}, "dt": 0.001, "t_final": 0.1}"#,
    );
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("evolve", &config, &out_a).status.code(), Some(0));
    assert_eq!(run("evolve", &config, &out_b).status.code(), Some(0));

    let text_a = std::fs::read_to_string(out_a.join("results.json")).unwrap();
    let text_b = std::fs::read_to_string(out_b.join("results.json")).unwrap();
    assert_eq!(stable_prefix(&text_a), stable_prefix(&text_b));
    for series in ["energy", "mass_error", "min_density"] {
        let csv_a = std::fs::read(out_a.join(format!("{series}.csv"))).unwrap();
        let csv_b = std::fs::read(out_b.join(format!("{series}.csv"))).unwrap();
        assert_eq!(csv_a, csv_b, "{series}.csv differs between identical runs");
    }

    // Different seeds move the randomized measurements.
    let geometry = write_config(&dir, r#"{"grid": {"points": 32}, "trials": 5}"#);
    let (out_c, out_d) = (dir.join("c"), dir.join("d"));
    assert_eq!(
        run_seeded("verify-geometry", &geometry, &out_c, 1).status.code(),
        Some(0)
    );
    assert_eq!(
        run_seeded("verify-geometry", &geometry, &out_d, 2).status.code(),
        Some(0)
    );
    let round_trip_c = check(&results(&out_c), "elliptic_round_trip")["measured"]
        .as_f64()
        .unwrap();
    let round_trip_d = check(&results(&out_d), "elliptic_round_trip")["measured"]
        .as_f64()
        .unwrap();
    assert_ne!(round_trip_c, round_trip_d);
}

#[test]
fn effective_config_reproduces_the_run() {
    let dir = temp_dir("round-trip");
    let config = write_config(
        &dir,
        r#"{"grid": {"points": 32}, "dt": 0.001, "t_final": 0.1, "potential": {"kind": "zero"}}"#,
    );
    let (out_a, out_b) = (dir.join("a"), dir.join("b"));
    assert_eq!(run("evolve", &config, &out_a).status.code(), Some(0));

    let emitted = results(&out_a)["effective_config"].clone();
    let replay = dir.join("replay.json");
    std::fs::write(&replay, serde_json::to_string(&emitted).unwrap()).unwrap();
    assert_eq!(run("evolve", &replay, &out_b).status.code(), Some(0));

    let text_a = std::fs::read_to_string(out_a.join("results.json")).unwrap();
    let text_b = std::fs::read_to_string(out_b.join("results.json")).unwrap();
    assert_eq!(stable_prefix(&text_a), stable_prefix(&text_b));
}

#[test]
fn crossval_emits_comparison_series() {
    let dir = temp_dir("crossval");
    let config = write_config(
        &dir,
        r#"{"grid": {"points": 128}, "dt": 0.0001, "t_final": 0.05, "record_every": 100}"#,
    );
    let out = dir.join("out");
    let output = run("crossval", &config, &out);
    assert_eq!(output.status.code(), Some(0), "{output:?}");

    let r = results(&out);
    assert_eq!(check(&r, "density_gap")["pass"], true);
    assert_eq!(check(&r, "projective_distance")["pass"], true);
    assert_eq!(check(&r, "flow_halving_factor_floor")["pass"], true);

    for series in ["density_gap", "projective_distance"] {
        let csv = std::fs::read_to_string(out.join(format!("{series}.csv"))).unwrap();
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some("t,value"), "{series}.csv header");
        assert!(lines.count() >= 3, "{series}.csv has recorded rows");
    }
}

#[test]
fn tolerance_violations_exit_one() {
    let dir = temp_dir("violation");
    // RK4 does not conserve energy exactly, so an absurdly tight gate
    // must trip while the run itself completes.
    let config = write_config(
        &dir,
        r#"{
            "grid": {"points": 32},
            "dt": 0.001,
            "t_final": 0.1,
            "tolerances": {"energy_drift": 1e-18}
        }"#,
    );
    let out = dir.join("out");
    let output = run("evolve", &config, &out);
    assert_eq!(output.status.code(), Some(1), "{output:?}");

    let r = results(&out);
    assert_eq!(r["pass"], false);
    assert_eq!(check(&r, "energy_drift")["pass"], false);
    assert_eq!(check(&r, "steps_remaining")["pass"], true);
}
