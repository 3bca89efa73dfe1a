use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use maxess_core::helmholtz::read_field;
use maxess_core::symbol::{membership, Component, SpectrumSet};
use maxess_core::Complex64;
use serde_json::{json, Value};

fn run(dir: &Path, config: &Value, extra: &[&str]) -> Output {
    let cfg = dir.join("run.json");
    fs::write(&cfg, serde_json::to_string_pretty(config).unwrap()).unwrap();
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_maxess"));
    cmd.arg("--config").arg(&cfg).arg("--out").arg(dir.join("out")).args(extra);
    cmd.output().unwrap()
}

fn vacuum(domain: Value) -> Value {
    json!({
        "domain": domain,
        "coefficients": {
            "eps": {"kind": "constant", "value": 1.0},
            "mu": {"kind": "constant", "value": 1.0},
            "sigma": {"kind": "constant", "value": 0.0},
            "lambda": 1.0,
            "at_infinity": {"eps0": 1.0, "mu0": 1.0, "sigma0": 0.0}
        },
        "command": "spectrum",
        "command_params": {"samples": 100, "extent": 3.0}
    })
}

fn stderr_json(o: &Output) -> Value {
    serde_json::from_slice(o.stderr.trim_ascii()).unwrap_or_else(|e| panic!("stderr is not JSON ({e}): {}", String::from_utf8_lossy(&o.stderr)))
}

#[test]
fn full_space_vacuum_is_the_real_line() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &vacuum(json!({"kind": "full-space"})), &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/spectrum.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    let comps = v["components"].as_array().unwrap();
    assert_eq!(comps.len(), 1);
    assert_eq!(comps[0]["kind"], "real-segment");
    assert_eq!(comps[0]["a"], "-inf");
    assert_eq!(comps[0]["b"], "inf");
    let manifest: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "spectrum");
    assert_eq!(manifest["config_sha256"].as_str().unwrap().len(), 64);
    let names: Vec<&str> = manifest["artifacts"].as_array().unwrap().iter().map(|a| a["path"].as_str().unwrap()).collect();
    assert_eq!(names, ["spectrum.json", "spectrum_samples.csv"]);
    let csv = fs::read_to_string(dir.path().join("out/spectrum_samples.csv")).unwrap();
    assert!(csv.starts_with("component,provenance,re,im\n"));
}

#[test]
fn negative_length_is_a_validation_error_naming_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(dir.path(), &vacuum(json!({"kind": "slab", "L": -1.0})), &[]);
    assert_eq!(o.status.code(), Some(2));
    let e = stderr_json(&o);
    assert_eq!(e["error"]["kind"], "validation");
    assert_eq!(e["error"]["field"], "domain.L");
    assert!(!dir.path().join("out").exists());
}

#[test]
fn unknown_keys_and_missing_files_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = vacuum(json!({"kind": "full-space"}));
    cfg["colour"] = json!("blue");
    assert_eq!(run(dir.path(), &cfg, &[]).status.code(), Some(2));

    let mut cfg = vacuum(json!({"kind": "full-space"}));
    cfg["command_params"]["sampels"] = json!(3);
    assert_eq!(run(dir.path(), &cfg, &[]).status.code(), Some(2));

    let mut cfg = vacuum(json!({"kind": "full-space"}));
    cfg["coefficients"]["eps"] = json!({"kind": "grid", "data": "missing.bin"});
    let o = run(dir.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr_json(&o)["error"]["message"].as_str().unwrap().contains("missing.bin"));

    let mut cfg = vacuum(json!({"kind": "bounded-box", "L": [1.0, 1.0, 1.0]}));
    let o = run(dir.path(), &cfg, &[]);
    assert_eq!(stderr_json(&o)["error"]["field"], "coefficients.at_infinity");
    cfg["coefficients"].as_object_mut().unwrap().remove("at_infinity");
    assert!(run(dir.path(), &cfg, &[]).status.success());
}

#[test]
fn spectrum_json_round_trips_with_identical_membership() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = vacuum(json!({"kind": "cylinder", "L": [1.0, 2.0]}));
    cfg["coefficients"]["sigma"] = json!({"kind": "radial", "base": 0.3, "terms": [{"amplitude": [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 0.5]], "shape": {"profile": "gaussian", "width": 0.4}, "center": [0.0, 0.5, 1.0]}]});
    cfg["coefficients"]["lambda"] = json!(10.0);
    cfg["coefficients"]["at_infinity"] = json!({"eps0": 1.0, "mu0": 1.0, "sigma0": 0.3});
    let o = run(dir.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/spectrum.json")).unwrap();
    let set: SpectrumSet = serde_json::from_str(&text).unwrap();
    assert!(set.components.iter().any(|c| matches!(c.component, Component::ImagSegment { .. })));
    // the re-serialized set parses to the same membership decisions
    let again: SpectrumSet = serde_json::from_str(&serde_json::to_string(&set).unwrap()).unwrap();
    let probes = set.sample(20, 10.0).into_iter().chain((-40..=40).flat_map(|i| (-20..=20).map(move |j| Complex64::new(i as f64 * 0.25, j as f64 * 0.1))));
    for w in probes {
        assert_eq!(membership(w, &set), membership(w, &again), "{w}");
    }
    assert!(membership(Complex64::new(0.0, -0.3), &set));
}

#[test]
fn identical_config_and_seed_give_identical_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "domain": {"kind": "cylinder", "L": [3.141592653589793, 3.141592653589793]},
        "coefficients": {
            "eps": {"kind": "constant", "value": 1.0},
            "mu": {"kind": "constant", "value": 1.0},
            "sigma": {"kind": "constant", "value": 0.0},
            "lambda": 1.0,
            "at_infinity": {"eps0": 1.0, "mu0": 1.0, "sigma0": 0.0}
        },
        "command": "sweep",
        "command_params": {"grid": {"cells": [8, 4, 4], "periods": [6.0, 1.0, 1.0]}, "omegas": [[0.5, 0.0], [1.05, 0.0]], "allow_dense": false}
    });
    let a = run(dir.path(), &cfg, &["--seed", "7", "--workers", "1"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let first = fs::read(dir.path().join("out/sweep.csv")).unwrap();
    let b = run(dir.path(), &cfg, &["--seed", "7", "--workers", "2"]);
    assert!(b.status.success());
    assert_eq!(first, fs::read(dir.path().join("out/sweep.csv")).unwrap());
    let text = String::from_utf8(first).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re_omega,im_omega,sigma_min,grid_n,converged"));
    let rows: Vec<Vec<&str>> = lines.map(|l| l.split(',').collect()).collect();
    assert_eq!(rows.len(), 2);
    assert!(rows.iter().all(|r| r[4] == "1"));

    let spec = vacuum(json!({"kind": "half-space"}));
    run(dir.path(), &spec, &[]);
    let one = fs::read(dir.path().join("out/spectrum.json")).unwrap();
    run(dir.path(), &spec, &[]);
    assert_eq!(one, fs::read(dir.path().join("out/spectrum.json")).unwrap());
}

#[test]
fn weyl_constant_indefinite_schedule_has_monotone_decay() {
    let dir = tempfile::tempdir().unwrap();
    // νε + σ = diag(−1, 1, 0) at ν = −2
    let cfg = json!({
        "domain": {"kind": "full-space"},
        "coefficients": {
            "eps": {"kind": "constant", "value": 1.0},
            "mu": {"kind": "constant", "value": 1.0},
            "sigma": {"kind": "constant", "value": [[1.0, 0.0, 0.0], [0.0, 3.0, 0.0], [0.0, 0.0, 2.0]]},
            "lambda": 4.0,
            "at_infinity": {"eps0": 1.0, "mu0": 1.0, "sigma0": 2.0}
        },
        "command": "weyl",
        "command_params": {"x0": [0.0, 0.0, 0.0], "nu": -2.0, "schedule": {"delta0": 0.4, "halvings": 2, "r_rule": "delta^-2.5"}, "box_n": 128}
    });
    let o = run(dir.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/decay.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("r,delta,N,B,ratio"));
    let n: Vec<f64> = lines.map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
    assert_eq!(n.len(), 3);
    assert!(n.windows(2).all(|w| w[1] < w[0]), "{n:?}");
    let report: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/weyl.json")).unwrap()).unwrap();
    assert_eq!(report["table"]["bound_holds"], true);
}

#[test]
fn definite_coefficient_is_a_computation_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = json!({
        "domain": {"kind": "full-space"},
        "coefficients": {
            "eps": {"kind": "constant", "value": 1.0},
            "mu": {"kind": "constant", "value": 1.0},
            "sigma": {"kind": "constant", "value": 1.0},
            "lambda": 1.0,
            "at_infinity": {"eps0": 1.0, "mu0": 1.0, "sigma0": 1.0}
        },
        "command": "weyl",
        "command_params": {"x0": [0.0, 0.0, 0.0], "nu": 1.0, "schedule": {"delta0": 0.4, "halvings": 0, "r_rule": "delta^-2.5"}}
    });
    let o = run(dir.path(), &cfg, &[]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(stderr_json(&o)["error"]["kind"], "computation");
}

#[test]
fn helmholtz_random_field_writes_potential_and_coefficients() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = vacuum(json!({"kind": "slab", "L": 1.5}));
    cfg["command"] = json!("helmholtz");
    cfg["command_params"] = json!({"field": {"random": {"modes": [8, 6, 10], "periods": [3.0, 2.0, 0.0]}}, "operator": "potential", "bc": "tangential-zero"});
    let o = run(dir.path(), &cfg, &["--seed", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/potential.json")).unwrap()).unwrap();
    let f_norm = summary["f_norm"].as_f64().unwrap();
    for k in ["residual_curl", "residual_div", "boundary_residual"] {
        assert!(summary[k].as_f64().unwrap() <= 1e-10 * f_norm, "{k}");
    }
    assert_eq!(summary["apriori"]["passed"], true);
    let psi = read_field(&dir.path().join("out/psi.bin")).unwrap();
    assert_eq!(psi.grid.shape(), [8, 6, 10]);

    // feed the potential back in as a file input for T_N
    let mut cfg2 = cfg.clone();
    fs::copy(dir.path().join("out/psi.bin"), dir.path().join("psi_in.bin")).unwrap();
    fs::copy(dir.path().join("out/psi.json"), dir.path().join("psi_in.json")).unwrap();
    cfg2["command_params"] = json!({"field": {"file": "psi_in.bin"}, "operator": "potential", "bc": "tangential-zero"});
    let o = run(dir.path(), &cfg2, &[]);
    // ψ has the dual parity of what the potential operator expects
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn divform_and_symbol_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = vacuum(json!({"kind": "full-space"}));
    cfg["command"] = json!("divform");
    cfg["coefficients"]["sigma"] = json!({"kind": "radial", "base": 0.0, "terms": [{"amplitude": [[1.0, 0.0, 0.0], [0.0, 2.0, 0.0], [0.0, 0.0, 3.0]], "shape": {"profile": "bump", "radius": 1.0}}]});
    cfg["coefficients"]["lambda"] = json!(4.0);
    cfg["command_params"] = json!({"samples": 500, "extent": 2.0});
    let o = run(dir.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let v: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("out/divform.json")).unwrap()).unwrap();
    let iv = &v["intervals"][0];
    assert!(iv["nu_min"].as_f64().unwrap() < -2.5);
    assert_eq!(iv["nu_max"].as_f64().unwrap(), 0.0);
    assert_eq!(iv["witness"].as_array().unwrap().len(), 3);

    let mut cfg = vacuum(json!({"kind": "cylinder", "L": [1.0, 2.0]}));
    cfg["command"] = json!("symbol");
    cfg["command_params"] = json!({"omega": [1.2, 0.0], "cylinder_mode": {"n": [0, 1], "xi": 0.5}});
    let o = run(dir.path(), &cfg, &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = fs::read_to_string(dir.path().join("out/symbol.json")).unwrap();
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["matrix"].as_array().unwrap().len(), 6);
    assert_eq!(v["constant_spectrum"]["components"].as_array().unwrap().len(), 3);
    // 17 significant digits
    assert!(text.contains("1.2000000000000000e0"));

    cfg["command_params"] = json!({"omega": [1.2, 0.0]});
    assert_eq!(run(dir.path(), &cfg, &[]).status.code(), Some(2));
}
