use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn scratch(name: &str) -> PathBuf {
    let d = std::env::temp_dir().join(format!("finlab-cli-{}-{name}", std::process::id()));
    let _ = fs::remove_dir_all(&d);
    d
}

fn finlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_finlab"))
        .args(args)
        .env_remove("FINLAB_OUT")
        .output()
        .unwrap()
}

fn run_in(out: &Path, args: &[&str]) -> Output {
    let mut all = vec!["--out", out.to_str().unwrap(), "-q"];
    all.extend_from_slice(args);
    finlab(&all)
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn report(dir: &Path) -> serde_json::Value {
    serde_json::from_slice(&fs::read(dir.join("report.json")).unwrap()).unwrap()
}

#[test]
fn hitman_reports_the_table_values() {
    let d = scratch("hitman");
    let out = run_in(&d, &["hitman"]);
    assert_eq!(out.status.code(), Some(0));
    let csv = fs::read_to_string(d.join("metrics.csv")).unwrap();
    assert!(csv.starts_with("name,value,expected,tolerance,pass\n"));
    assert!(csv.contains("shoot,0.764,0.764"));
    assert!(csv.contains("hold,0.36,0.36"));
    assert!(csv.contains("decision,shoot,shoot"));
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn enumerate_srv_lists_two_matches() {
    let d = scratch("srv");
    assert_eq!(run_in(&d, &["enumerate-srv"]).status.code(), Some(0));
    let rows = fs::read_to_string(d.join("matches.csv")).unwrap();
    assert_eq!(rows.lines().count(), 3);
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn reruns_are_byte_identical() {
    for args in [
        &["delusion63", "--steps", "200"][..],
        &["arena", "--games", "3000", "--seeds", "3"],
        &["learn", "--mode", "recovery", "--seeds", "4"],
        &["selfmod", "--max-horizon", "2"],
        &["sigma", "--instances", "50"],
    ] {
        let (a, b) = (scratch("rerun-a"), scratch("rerun-b"));
        let ra = run_in(&a, args);
        let rb = run_in(&b, args);
        assert_eq!(ra.status.code(), rb.status.code(), "{args:?}");
        assert_eq!(files(&a), files(&b), "{args:?}");
        fs::remove_dir_all(a).unwrap();
        fs::remove_dir_all(b).unwrap();
    }
}

#[test]
fn delusion63_emits_a_plot_series() {
    let d = scratch("series");
    run_in(&d, &["delusion63", "--steps", "50"]);
    let s = fs::read_to_string(d.join("series.csv")).unwrap();
    assert_eq!(s.lines().count(), 51);
    assert!(s.lines().next().unwrap().contains("utility"));
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn arena_sweep_has_one_row_per_seed() {
    let d = scratch("sweep");
    run_in(&d, &["arena", "--games", "2000", "--seeds", "4"]);
    let runs = fs::read_dir(&d)
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| {
            fs::read_to_string(p).is_ok_and(|s| s.starts_with("seed,") || s.contains(",seed,"))
        })
        .expect("a per-seed table");
    assert_eq!(fs::read_to_string(runs).unwrap().lines().count(), 5);
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn exit_codes_follow_the_outcome() {
    let d = scratch("codes");
    assert_eq!(run_in(&d, &["prob41"]).status.code(), Some(0));
    // Ten observations are far too few to pin the model down.
    assert_eq!(
        run_in(
            &d,
            &["learn", "--mode", "map", "--steps", "10", "--seeds", "3"]
        )
        .status
        .code(),
        Some(1)
    );
    assert_eq!(
        run_in(&d, &["logic", "--node-cap", "10"]).status.code(),
        Some(3)
    );
    assert_eq!(finlab(&["no-such-command"]).status.code(), Some(2));
    assert_eq!(
        run_in(&d, &["delusion63", "--alpha", "2"]).status.code(),
        Some(2)
    );
    assert_eq!(
        run_in(&d, &["prob41", "--model", "nowhere.model"])
            .status
            .code(),
        Some(2)
    );
    let bad = d.join("bad.json");
    fs::create_dir_all(&d).unwrap();
    fs::write(&bad, "{ not json").unwrap();
    assert_eq!(
        finlab(&["--config", bad.to_str().unwrap(), "hitman"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        finlab(&["--config", "/nonexistent/cfg.json", "hitman"])
            .status
            .code(),
        Some(2)
    );
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn flags_override_config_which_overrides_defaults() {
    let d = scratch("precedence");
    fs::create_dir_all(&d).unwrap();
    let cfg = d.join("cfg.json");
    fs::write(&cfg, r#"{"steps": 7, "horizon": 2, "seed": 5}"#).unwrap();
    let out = d.join("out");
    let o = finlab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
        "-q",
        "delusion64",
        "--steps",
        "9",
    ]);
    assert!(o.status.code().is_some());
    let c = &report(&out)["config"];
    assert_eq!(c["steps"], 9);
    assert_eq!(c["horizon"], 2);
    assert_eq!(c["seed"], 5);
    assert_eq!(c["gamma"], 0.9);

    let o = finlab(&[
        "--config",
        cfg.to_str().unwrap(),
        "--seed",
        "11",
        "--out",
        out.to_str().unwrap(),
        "-q",
        "delusion64",
    ]);
    assert!(o.status.code().is_some());
    let c = &report(&out)["config"];
    assert_eq!(
        (c["steps"].as_u64(), c["seed"].as_u64()),
        (Some(7), Some(11))
    );
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn output_directory_comes_from_the_environment() {
    let d = scratch("env");
    let o = Command::new(env!("CARGO_BIN_EXE_finlab"))
        .args(["-q", "hitman"])
        .env("FINLAB_OUT", &d)
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(d.join("hitman").join("report.json").exists());
    fs::remove_dir_all(d).unwrap();
}

#[test]
fn every_experiment_accepts_its_defaults_from_json() {
    // Each subcommand reads an empty config object.
    let d = scratch("empty");
    fs::create_dir_all(&d).unwrap();
    let cfg = d.join("empty.json");
    fs::write(&cfg, "{}").unwrap();
    for cmd in ["hitman", "prob41", "markov", "enumerate-srv", "values"] {
        let o = finlab(&[
            "--config",
            cfg.to_str().unwrap(),
            "--out",
            d.join(cmd).to_str().unwrap(),
            "-q",
            cmd,
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{cmd}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
        assert_eq!(report(&d.join(cmd))["experiment"], cmd);
    }
    fs::remove_dir_all(d).unwrap();
}
