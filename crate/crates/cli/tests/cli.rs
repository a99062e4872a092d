use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use feint_core::ActionSet64;

fn data(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(rel)
}

fn feint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_feint")).args(args).output().unwrap()
}

fn feint_out(args: &[&str], out: &Path) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    all.extend(["--out", out.to_str().unwrap()]);
    feint(&all)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Relative path → bytes for every file under `dir`.
fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<PathBuf, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let p = entry.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                out.insert(p.strip_prefix(root).unwrap().to_owned(), std::fs::read(&p).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

fn manifest(dir: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// The manifest lists exactly the other files in the directory.
fn assert_manifest_complete(dir: &Path) {
    let listed: Vec<PathBuf> = manifest(dir)["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| PathBuf::from(v.as_str().unwrap()))
        .collect();
    let mut present: Vec<PathBuf> = snapshot(dir)
        .into_keys()
        .filter(|p| p != Path::new("manifest.json"))
        .collect();
    let mut listed_sorted = listed.clone();
    listed_sorted.sort();
    present.sort();
    assert_eq!(listed_sorted, present);
}

#[test]
fn solve_boxing_set() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("solve");
    let o = feint_out(
        &[
            "solve",
            "--actions",
            data("boxing.json").to_str().unwrap(),
            "--lookahead",
            "5.5",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let policy = std::fs::read_to_string(out.join("policy.csv")).unwrap();
    assert_eq!(policy.lines().count(), 18);
    let value: f64 = std::fs::read_to_string(out.join("value.txt"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(value.abs() < 1e-9);
    assert_manifest_complete(&out);
    let m = manifest(&out);
    assert_eq!(m["command"], "solve");
    assert_eq!(m["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn solve_with_feints_is_still_fair() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("solve");
    let actions = data("boxing.json");
    let args = [
        "solve",
        "--actions",
        actions.to_str().unwrap(),
        "--max-feints",
        "1",
        "--alignment",
        "action_pairs",
    ];
    let o = feint_out(&args, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let combos = std::fs::read_to_string(out.join("combinations.csv")).unwrap();
    assert_eq!(combos.lines().count(), 50);
    let value: f64 = std::fs::read_to_string(out.join("value.txt"))
        .unwrap()
        .trim()
        .parse()
        .unwrap();
    assert!(value.abs() < 1e-9);
}

#[test]
fn short_lookahead_is_infeasible() {
    let tmp = tempfile::tempdir().unwrap();
    let o = feint_out(
        &[
            "solve",
            "--actions",
            data("boxing.json").to_str().unwrap(),
            "--lookahead",
            "0.5",
        ],
        &tmp.path().join("x"),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("no admissible combinations"));
}

#[test]
fn gen_feints_needs_frames() {
    let tmp = tempfile::tempdir().unwrap();
    let o = feint_out(
        &["gen-feints", "--actions", data("boxing.json").to_str().unwrap()],
        &tmp.path().join("x"),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("frame data required for feint generation"));
}

#[test]
fn gen_feints_output_reloads() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let o = feint_out(
        &["gen-feints", "--actions", data("synthetic_jab.json").to_str().unwrap()],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let set = ActionSet64::load(out.join("feints.json")).unwrap();
    assert_eq!(set.len(), 7);
    assert!(set.actions().iter().all(|a| a.is_feint() && a.damage == 0.0));
    assert_manifest_complete(&out);
}

#[test]
fn empty_duration_range_gives_empty_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("g");
    let actions = data("synthetic_jab.json");
    let args = [
        "gen-feints",
        "--actions",
        actions.to_str().unwrap(),
        "--min-duration",
        "0",
        "--max-duration",
        "0",
    ];
    let o = feint_out(&args, &out);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("feints.json")).unwrap()).unwrap();
    assert_eq!(v["actions"].as_array().unwrap().len(), 0);
}

#[test]
fn zero_episodes_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let o = feint_out(
        &[
            "simulate",
            "--config",
            data("scenarios/basic_vs_basic.json").to_str().unwrap(),
            "--episodes",
            "0",
        ],
        &tmp.path().join("x"),
    );
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn malformed_config_is_a_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("bad.json");
    std::fs::write(&cfg, r#"{"scenario":"basic_vs_basic","episode_length":-1}"#).unwrap();
    let o = feint_out(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&cfg, r#"{"scenario":"basic_vs_basic","typo":1}"#).unwrap();
    let o = feint_out(&["simulate", "--config", cfg.to_str().unwrap()], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn every_scenario_writes_a_summary() {
    let tmp = tempfile::tempdir().unwrap();
    for name in ["basic_vs_basic", "feint_vs_basic", "feint_vs_feint"] {
        let out = tmp.path().join(name);
        let cfg = data(&format!("scenarios/{name}.json"));
        let o = feint_out(
            &["simulate", "--config", cfg.to_str().unwrap(), "--episodes", "20"],
            &out,
        );
        assert!(o.status.success(), "{}", stderr(&o));
        let summary = std::fs::read_to_string(out.join("summary.csv")).unwrap();
        assert_eq!(summary.lines().count(), 22);
        assert!(summary.lines().last().unwrap().starts_with("mean,"));
        for line in summary.lines().skip(1) {
            let cols: Vec<&str> = line.split(',').collect();
            let (a, b): (f64, f64) = (cols[1].parse().unwrap(), cols[2].parse().unwrap());
            assert_eq!(a + b, 0.0);
        }
        let m = manifest(&out);
        assert_eq!(m["seed"], 2023);
        assert_eq!(m["inputs"].as_array().unwrap().len(), 2);
        assert_manifest_complete(&out);
    }
}

#[test]
fn seed_flag_wins_over_config() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("s");
    let cfg = data("scenarios/feint_vs_feint.json");
    let o = feint_out(
        &[
            "simulate",
            "--config",
            cfg.to_str().unwrap(),
            "--episodes",
            "2",
            "--seed",
            "5",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(manifest(&out)["seed"], 5);
    assert_eq!(manifest(&out)["config"]["seed"], 5);
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let actions = data("boxing.json");
    let cfg = data("scenarios/feint_vs_feint.json");
    let commands: Vec<Vec<&str>> = vec![
        vec!["solve", "--actions", actions.to_str().unwrap(), "--max-feints", "1"],
        vec!["simulate", "--config", cfg.to_str().unwrap(), "--episodes", "30"],
        vec!["sweep", "--actions", actions.to_str().unwrap(), "--episodes", "5"],
    ];
    for (i, args) in commands.iter().enumerate() {
        let a = tmp.path().join(format!("{i}a"));
        let b = tmp.path().join(format!("{i}b"));
        assert!(feint_out(args, &a).status.success());
        assert!(feint_out(args, &b).status.success());
        assert_eq!(snapshot(&a), snapshot(&b), "{args:?}");
    }
}

#[test]
fn different_seeds_change_simulation_logs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = data("scenarios/feint_vs_feint.json");
    let run = |seed: &str, dir: &str| {
        let out = tmp.path().join(dir);
        let o = feint_out(
            &[
                "simulate",
                "--config",
                cfg.to_str().unwrap(),
                "--episodes",
                "30",
                "--seed",
                seed,
            ],
            &out,
        );
        assert!(o.status.success());
        std::fs::read(out.join("summary.csv")).unwrap()
    };
    assert_ne!(run("1", "a"), run("2", "b"));
}

#[test]
fn sweep_table_has_three_regimes_in_order() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("sw");
    let o = feint_out(
        &[
            "sweep",
            "--actions",
            data("boxing.json").to_str().unwrap(),
            "--episodes",
            "3",
        ],
        &out,
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(out.join("sweep.csv")).unwrap();
    let regimes: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(4).unwrap()).collect();
    assert_eq!(regimes.len(), 31);
    let mut collapsed = regimes.clone();
    collapsed.dedup();
    assert_eq!(collapsed, vec!["too_short", "proper", "too_long"]);
    assert_eq!(regimes.iter().position(|r| *r == "proper"), Some(6));
    assert_eq!(regimes.iter().position(|r| *r == "too_long"), Some(16));
}

#[test]
fn missing_input_is_an_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let o = feint_out(&["solve", "--actions", "/no/such/file.json"], &tmp.path().join("x"));
    assert_eq!(o.status.code(), Some(4));
}
