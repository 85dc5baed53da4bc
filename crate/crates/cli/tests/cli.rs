use std::path::Path;
use std::process::{Command, Output};

use tspqa_core::instances::{instance_to_json, City, TspInstance};

fn tspqa(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tspqa"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// Twelve cities in two tight hexagons far apart, so every city's five
/// nearest neighbours are the rest of its own cluster.
fn two_clusters() -> TspInstance {
    let mut cities = Vec::new();
    for (cx, cy) in [(0.2, 0.2), (0.8, 0.8)] {
        for k in 0..6 {
            let a = k as f64 * std::f64::consts::PI / 3.0;
            cities.push(City { x: cx + 0.05 * a.cos(), y: cy + 0.05 * a.sin() });
        }
    }
    TspInstance::from_cities(cities, 0).unwrap()
}

#[test]
fn gen_writes_one_file_per_instance() {
    let dir = tempfile::tempdir().unwrap();
    let o = tspqa(dir.path(), &["gen", "--n", "12", "--count", "100", "--seed", "0", "--out", "inst"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let files = std::fs::read_dir(dir.path().join("inst")).unwrap().count();
    assert_eq!(files, 100);
    let text = std::fs::read_to_string(dir.path().join("inst/inst_n12_seed0.json")).unwrap();
    assert!(text.contains("\"command\": \"tspqa gen --n 12 --count 100 --seed 0 --out inst\""));
}

#[test]
fn encode_truncated_edge_model_on_clusters() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("f.json"), instance_to_json(&two_clusters(), None)).unwrap();
    let o = tspqa(
        dir.path(),
        &["encode", "--mapping", "edge", "--L", "5", "--instance", "f.json", "--out", "m.txt"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stderr(&o).contains("variables 30 "), "{}", stderr(&o));
    let model = std::fs::read_to_string(dir.path().join("m.txt")).unwrap();
    assert!(model.contains("\n# command: tspqa encode --mapping edge --L 5"));
}

#[test]
fn subtour_fraction_experiment_writes_csv_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let o = tspqa(
        dir.path(),
        &["experiment", "subtour-fraction", "--n", "12", "--count", "100", "--seed", "0", "--out", "res"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("split_fraction"), "{}", stdout(&o));
    let csv = std::fs::read_to_string(dir.path().join("res/subtour-fraction.csv")).unwrap();
    assert!(csv.starts_with("# command: tspqa experiment subtour-fraction"));
    assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 101);

    let check = tspqa(dir.path(), &["report", "res/subtour-fraction.json", "--check"]);
    assert!(check.status.success(), "{}", stderr(&check));
    assert!(stdout(&check).contains("summary recomputes from 100 rows"));
}

#[test]
fn identical_commands_give_identical_artifacts() {
    let args = ["experiment", "subtour-fraction", "--n", "8", "--count", "20", "--seed", "3", "--out", "res"];
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for d in [&a, &b] {
        assert!(tspqa(d.path(), &args).status.success());
    }
    let read = |d: &tempfile::TempDir, f: &str| std::fs::read_to_string(d.path().join("res").join(f)).unwrap();
    assert_eq!(read(&a, "subtour-fraction.csv"), read(&b, "subtour-fraction.csv"));

    let strip = |text: String| {
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        v.as_object_mut().unwrap().remove("wall_time_seconds");
        v
    };
    assert_eq!(strip(read(&a, "subtour-fraction.json")), strip(read(&b, "subtour-fraction.json")));

    let loop_args = ["loop", "--instance", "i.json", "--solver", "sa", "--mcs", "200", "--seed", "5", "--out", "l.json"];
    for d in [&a, &b] {
        std::fs::write(d.path().join("i.json"), instance_to_json(&two_clusters(), None)).unwrap();
        assert!(tspqa(d.path(), &loop_args).status.success());
    }
    let strip_times = |text: String| {
        let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for log in v["outcome"]["logs"].as_array_mut().unwrap() {
            log.as_object_mut().unwrap().remove("elapsed_seconds");
        }
        v
    };
    assert_eq!(
        strip_times(std::fs::read_to_string(a.path().join("l.json")).unwrap()),
        strip_times(std::fs::read_to_string(b.path().join("l.json")).unwrap())
    );
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bogus = tspqa(dir.path(), &["frobnicate"]);
    assert_eq!(bogus.status.code(), Some(1));
    assert!(!stderr(&bogus).is_empty());

    let unknown_flag = tspqa(dir.path(), &["gen", "--bogus"]);
    assert_eq!(unknown_flag.status.code(), Some(1));

    std::fs::write(dir.path().join("f.json"), instance_to_json(&two_clusters(), None)).unwrap();
    let weak = tspqa(dir.path(), &["encode", "--mapping", "permutation", "--instance", "f.json", "--eta", "0.001"]);
    assert_eq!(weak.status.code(), Some(2), "{}", stderr(&weak));

    let big = tspqa(dir.path(), &["digital", "--instance", "f.json", "--steps", "1"]);
    assert_eq!(big.status.code(), Some(2), "{}", stderr(&big));
}

#[test]
fn version_names_tool_and_formats() {
    let o = tspqa(Path::new("."), &["--version"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("tspqa "));
    assert!(text.contains("instance format 1") && text.contains("model format 1"));
}

#[test]
fn defaulted_seed_is_echoed() {
    let dir = tempfile::tempdir().unwrap();
    let o = tspqa(dir.path(), &["gen", "--n", "5", "--count", "1", "--out", "x"]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("seed: 0 (default)"));
}

#[test]
fn flags_win_over_config_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("c.json"), r#"{"n": 7, "count": 3, "seed": 4, "out": "cfg"}"#).unwrap();
    let o = tspqa(dir.path(), &["--config", "c.json", "gen", "--n", "6"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let mut names: Vec<String> = std::fs::read_dir(dir.path().join("cfg"))
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["inst_n6_seed4.json", "inst_n6_seed5.json", "inst_n6_seed6.json"]);
}
