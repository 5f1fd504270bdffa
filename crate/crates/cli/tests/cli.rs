use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sset_core::{
    load_dataset, save_dataset, DatasetMeta, Explanation, LabeledDataset, LabeledInstance,
    TimeSeriesInstance,
};
use tempfile::TempDir;

const SSET: &str = env!("CARGO_BIN_EXE_sset");
const MODEL: &str = env!("CARGO_BIN_EXE_sset-model");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn sset(args: &[&str]) -> Output {
    Command::new(SSET).args(args).output().expect("run sset")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status,
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn small_spec(dir: &Path) -> PathBuf {
    let path = dir.join("spec.json");
    let body = r#"{"T": 12, "V": 3, "C": 2, "n_train": 40, "n_test": 20, "seed": 11,
        "signal_groups": [],
        "planted": [{"signal": 0, "start": 2, "end": 5, "amplitude": 0.4},
                    {"signal": 2, "start": 6, "end": 9, "amplitude": 0.4}]}"#;
    fs::write(&path, body).unwrap();
    path
}

fn synth(dir: &Path) -> PathBuf {
    let spec = small_spec(dir);
    let data = dir.join("data");
    ok(&sset(&["synth", "--spec", p(&spec), "--out", p(&data)]));
    data
}

fn json_files(dir: &Path) -> Vec<String> {
    let mut names: Vec<String> = fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n.ends_with(".json"))
        .collect();
    names.sort();
    names
}

#[test]
fn synth_default_spec_is_loadable_and_repeatable() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(&spec, "{}").unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&sset(&["synth", "--spec", p(&spec), "--out", p(&a)]));
    ok(&sset(&["synth", "--spec", p(&spec), "--out", p(&b)]));
    let data = load_dataset(&a).unwrap();
    assert_eq!(
        (data.meta.time_steps, data.meta.signals, data.meta.classes),
        (30, 8, 3)
    );
    assert_eq!((data.train.len(), data.test.len()), (300, 100));
    for file in ["meta.json", "train.csv", "test.csv", "ground_truth.json"] {
        assert_eq!(
            fs::read(a.join(file)).unwrap(),
            fs::read(b.join(file)).unwrap(),
            "{file}"
        );
    }
}

#[test]
fn synth_rejects_reversed_interval() {
    let dir = TempDir::new().unwrap();
    let spec = dir.path().join("spec.json");
    fs::write(
        &spec,
        r#"{"C": 1, "planted": [{"signal": 0, "start": 9, "end": 3, "amplitude": 0.4}]}"#,
    )
    .unwrap();
    let out = sset(&[
        "synth",
        "--spec",
        p(&spec),
        "--out",
        p(&dir.path().join("d")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));
}

#[test]
fn sample_zero_writes_nothing() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let out = dir.path().join("ex");
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--sample",
        "0",
        "--out",
        p(&out),
    ]));
    assert!(!out.exists());
}

#[test]
fn explain_writes_manifest_json_and_csv_per_instance() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let out = dir.path().join("ex");
    let stdout = ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--sample",
        "15",
        "--seed",
        "4",
        "--out",
        p(&out),
        "--jobs",
        "3",
    ]));
    let files = json_files(&out);
    assert_eq!(files.len(), 16);
    assert!(files.contains(&"manifest.json".to_string()));
    let mut counted = 0;
    for name in files.iter().filter(|n| *n != "manifest.json") {
        let e: Explanation =
            serde_json::from_str(&fs::read_to_string(out.join(name)).unwrap()).unwrap();
        assert_eq!(format!("{}.json", e.instance_id), *name);
        let csv = fs::read_to_string(out.join(format!("{}.csv", e.instance_id))).unwrap();
        assert_eq!(csv, e.importance.to_csv());
        counted += 1;
    }
    assert_eq!(counted, 15);
    assert!(stdout.starts_with("instances: 15 "), "{stdout}");

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 4);
    assert_eq!(manifest["selection"]["sample"], 15);
    assert_eq!(manifest["oracle"], "builtin:5");
    assert_eq!(manifest["config"]["thr_c"], 0.5);
    assert_eq!(manifest["instances"].as_array().unwrap().len(), 15);
}

#[test]
fn explicit_ids_and_unknown_ids() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let out = dir.path().join("ex");
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--ids",
        "test-0003,train-0001",
        "--out",
        p(&out),
    ]));
    assert_eq!(
        json_files(&out),
        ["manifest.json", "test-0003.json", "train-0001.json"]
    );

    let bad = sset(&[
        "explain",
        "--data",
        p(&data),
        "--ids",
        "nope",
        "--out",
        p(&dir.path().join("x")),
    ]);
    assert!(!bad.status.success());
    assert!(String::from_utf8_lossy(&bad.stderr).contains("nope"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let config = dir.path().join("config.json");
    fs::write(&config, r#"{"thr_c": 0.4, "threshold": 1}"#).unwrap();
    let out = sset(&[
        "explain",
        "--data",
        p(&data),
        "--config",
        p(&config),
        "--sample",
        "1",
        "--out",
        p(&dir.path().join("ex")),
    ]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("threshold"));
}

#[test]
fn selection_is_required_and_exclusive() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let ex = dir.path().join("ex");
    assert!(!sset(&["explain", "--data", p(&data), "--out", p(&ex)])
        .status
        .success());
    let both = sset(&[
        "explain",
        "--data",
        p(&data),
        "--ids",
        "a",
        "--sample",
        "1",
        "--out",
        p(&ex),
    ]);
    assert!(!both.status.success());
}

/// Two signals whose means are 0.25 in every instance, exactly, so the echo
/// model answers the same probabilities for any swap.
fn flat_dataset(dir: &Path, classes: usize) -> PathBuf {
    let meta = DatasetMeta {
        time_steps: 4,
        signals: 2,
        classes,
        signal_names: vec!["a".into(), "b".into()],
        class_names: (0..classes).map(|c| format!("k{c}")).collect(),
        signal_groups: vec![],
    };
    let item = |prefix: &str, i: usize| {
        let v = 0.125 * (i % 4) as f64;
        let rows = vec![
            vec![0.0, 0.0],
            vec![v, 0.5],
            vec![0.5, v],
            vec![0.5 - v, 0.5 - v],
        ];
        LabeledInstance {
            instance: TimeSeriesInstance::from_rows(format!("{prefix}-{i}"), &rows).unwrap(),
            label: i % classes,
        }
    };
    let dataset = LabeledDataset {
        meta,
        train: (0..12).map(|i| item("tr", i)).collect(),
        test: (0..4).map(|i| item("te", i)).collect(),
    };
    let path = dir.join("flat");
    save_dataset(&dataset, &path).unwrap();
    path
}

#[test]
fn constant_oracle_gives_no_salient_signal() {
    let dir = TempDir::new().unwrap();
    let data = flat_dataset(dir.path(), 2);
    let out = dir.path().join("ex");
    let oracle = format!("cmd:{MODEL} --echo 2");
    let stdout = ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--oracle",
        &oracle,
        "--ids",
        "te-1",
        "--out",
        p(&out),
    ]));
    assert!(stdout.contains("NoSalientSignal: 1"), "{stdout}");
    let e: Explanation =
        serde_json::from_str(&fs::read_to_string(out.join("te-1.json")).unwrap()).unwrap();
    assert!(e.importance.is_zero());
    assert!(e.salient_signals.is_empty());
}

#[test]
fn failing_oracle_leaves_an_error_record() {
    let dir = TempDir::new().unwrap();
    let data = flat_dataset(dir.path(), 3);
    let out = dir.path().join("ex");
    // Declares three classes but answers with two probabilities.
    let oracle = format!("cmd:{MODEL} --echo 3");
    let res = sset(&[
        "explain",
        "--data",
        p(&data),
        "--oracle",
        &oracle,
        "--ids",
        "te-2",
        "--out",
        p(&out),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("te-2"));
    let record: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("te-2.error.json")).unwrap()).unwrap();
    assert_eq!(record["instance_id"], "te-2");
    assert!(!out.join("te-2.json").exists());
}

#[test]
fn unreachable_oracle_fails() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let res = sset(&[
        "explain",
        "--data",
        p(&data),
        "--oracle",
        "cmd:/nonexistent/model",
        "--sample",
        "2",
        "--out",
        p(&dir.path().join("ex")),
    ]);
    assert!(!res.status.success());
}

#[test]
fn subprocess_model_matches_builtin() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--sample",
        "6",
        "--seed",
        "2",
        "--out",
        p(&a),
    ]));
    let oracle = format!("cmd:{MODEL} --data {}", p(&data));
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--oracle",
        &oracle,
        "--sample",
        "6",
        "--seed",
        "2",
        "--out",
        p(&b),
        "--jobs",
        "2",
    ]));
    for name in json_files(&a).iter().filter(|n| *n != "manifest.json") {
        assert_eq!(
            fs::read(a.join(name)).unwrap(),
            fs::read(b.join(name)).unwrap(),
            "{name}"
        );
    }
}

#[test]
fn report_single_explanation_and_baseline() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let ex = dir.path().join("ex");
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--ids",
        "test-0000",
        "--out",
        p(&ex),
    ]));

    let rep = dir.path().join("rep");
    let stdout = ok(&sset(&[
        "report",
        "--explanations",
        p(&ex),
        "--data",
        p(&data),
        "--out",
        p(&rep),
    ]));
    assert!(stdout.starts_with("| Explainer | Precision | Informativeness | Similarity |\n"));
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(rep.join("report.json")).unwrap()).unwrap();
    let quality = report["quality"].as_array().unwrap();
    assert_eq!(quality.len(), 1);
    assert_eq!(
        quality[0]["n_explained"].as_u64().unwrap() + quality[0]["n_failed"].as_u64().unwrap(),
        1
    );
    assert!(fs::read_to_string(rep.join("report.md"))
        .unwrap()
        .contains("| SSET |"));

    let rep2 = dir.path().join("rep2");
    ok(&sset(&[
        "report",
        "--explanations",
        p(&ex),
        "--data",
        p(&data),
        "--with-baseline",
        "--out",
        p(&rep2),
    ]));
    let md = fs::read_to_string(rep2.join("report.md")).unwrap();
    assert!(md.contains("| SSET |") && md.contains("| Occlusion |"));
}

#[test]
fn report_rejects_mixed_shapes_and_empty_dirs() {
    let dir = TempDir::new().unwrap();
    let data = synth(dir.path());
    let ex = dir.path().join("ex");
    ok(&sset(&[
        "explain",
        "--data",
        p(&data),
        "--ids",
        "test-0000",
        "--out",
        p(&ex),
    ]));
    fs::copy(fixture("explanation.json"), ex.join("fixture-0.json")).unwrap();
    let res = sset(&[
        "report",
        "--explanations",
        p(&ex),
        "--data",
        p(&data),
        "--out",
        p(&dir.path().join("r")),
    ]);
    assert!(!res.status.success());
    assert!(String::from_utf8_lossy(&res.stderr).contains("shape"));

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let res = sset(&[
        "report",
        "--explanations",
        p(&empty),
        "--data",
        p(&data),
        "--out",
        p(&dir.path().join("r")),
    ]);
    assert!(!res.status.success());
}

#[test]
fn render_matches_golden_svg() {
    let dir = TempDir::new().unwrap();
    let out = dir.path().join("heat.svg");
    ok(&sset(&[
        "render",
        "--explanation",
        p(&fixture("explanation.json")),
        "--out",
        p(&out),
    ]));
    assert_eq!(
        fs::read_to_string(out).unwrap(),
        fs::read_to_string(fixture("explanation.svg")).unwrap()
    );
}

#[test]
fn render_rejects_malformed_file() {
    let dir = TempDir::new().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"instance_id": "x"}"#).unwrap();
    let res = sset(&[
        "render",
        "--explanation",
        p(&bad),
        "--out",
        p(&dir.path().join("o.svg")),
    ]);
    assert!(!res.status.success());
}
