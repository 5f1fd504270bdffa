//! Engine side of the wire protocol against small shell-script models.

use ndarray::Array2;
use sset_core::oracle::predict_checked;
use sset_core::{
    explain, DatasetMeta, Error, LabeledDataset, LabeledInstance, PredictionOracle, RandomSource,
    SsetConfig, Status, SubprocessOracle, TimeSeriesInstance,
};

/// A model answering `reply` (with `$n` as the request counter) to each predict.
fn sh_model(reply: &str) -> String {
    let script = format!(
        r#"read line; echo '{{"type":"ready","C":2}}'; n=0;
        while read line; do
          case "$line" in *shutdown*) exit 0;; esac
          n=$((n+1)); {reply}
        done"#
    );
    format!("sh -c '{}'", script.replace('\'', r"'\''"))
}

fn constant_model() -> String {
    sh_model(r#"echo "{\"type\":\"probs\",\"id\":\"r$n\",\"probs\":[0.25,0.75]}""#)
}

fn x() -> Array2<f64> {
    Array2::from_elem((3, 2), 0.5)
}

#[test]
fn constant_model_round_trip() {
    let oracle = SubprocessOracle::spawn(&constant_model(), 3, 2).unwrap();
    assert_eq!(oracle.classes(), 2);
    assert_eq!(oracle.command()[0], "sh");
    for _ in 0..3 {
        assert_eq!(oracle.predict(&x()).unwrap(), vec![0.25, 0.75]);
    }
    oracle.shutdown().unwrap();
}

#[test]
fn shape_is_checked_before_sending() {
    let oracle = SubprocessOracle::spawn(&constant_model(), 3, 2).unwrap();
    let err = oracle.predict(&Array2::zeros((2, 2))).unwrap_err();
    assert!(matches!(err, Error::ShapeMismatch { .. }), "{err}");
}

#[test]
fn non_json_output_is_a_protocol_error() {
    let oracle = SubprocessOracle::spawn(&sh_model("echo hello"), 3, 2).unwrap();
    assert!(oracle.predict(&x()).is_err());
}

#[test]
fn mismatched_id_is_rejected() {
    let model = sh_model(r#"echo "{\"type\":\"probs\",\"id\":\"other\",\"probs\":[0.5,0.5]}""#);
    let oracle = SubprocessOracle::spawn(&model, 3, 2).unwrap();
    let err = oracle.predict(&x()).unwrap_err();
    assert!(matches!(err, Error::Protocol(_)), "{err}");
    assert!(err.to_string().contains("other"));
}

#[test]
fn early_exit_is_reported() {
    let oracle = SubprocessOracle::spawn(&sh_model("exit 3"), 3, 2).unwrap();
    let err = oracle.predict(&x()).unwrap_err();
    assert!(
        matches!(err, Error::Protocol(_) | Error::Oracle(_)),
        "{err}"
    );
}

#[test]
fn wrong_probability_count_is_invalid() {
    let model = sh_model(r#"echo "{\"type\":\"probs\",\"id\":\"r$n\",\"probs\":[1.0]}""#);
    let oracle = SubprocessOracle::spawn(&model, 3, 2).unwrap();
    let err = predict_checked(&oracle, &x(), 2).unwrap_err();
    assert!(matches!(err, Error::InvalidPrediction(_)), "{err}");
}

#[test]
fn missing_program_fails_to_spawn() {
    assert!(matches!(
        SubprocessOracle::spawn("/nonexistent/model --flag", 3, 2),
        Err(Error::Oracle(_))
    ));
    assert!(SubprocessOracle::spawn("", 3, 2).is_err());
}

#[test]
fn bad_handshake_fails() {
    let model = r#"sh -c 'read line; echo "{\"type\":\"ready\",\"C\":0}"'"#;
    assert!(SubprocessOracle::spawn(model, 3, 2).is_err());
}

#[test]
fn nonzero_exit_on_shutdown_is_an_error() {
    let model = r#"sh -c 'read line; echo "{\"type\":\"ready\",\"C\":2}"; read line; exit 4'"#;
    let oracle = SubprocessOracle::spawn(model, 3, 2).unwrap();
    assert!(oracle.shutdown().is_err());
}

#[test]
fn constant_subprocess_model_finds_nothing() {
    let meta = DatasetMeta {
        time_steps: 3,
        signals: 2,
        classes: 2,
        signal_names: vec!["a".into(), "b".into()],
        class_names: vec!["k0".into(), "k1".into()],
        signal_groups: vec![],
    };
    let item = |i: usize| LabeledInstance {
        instance: TimeSeriesInstance::new(
            format!("i{i}"),
            Array2::from_elem((3, 2), 0.1 * i as f64),
        ),
        label: i % 2,
    };
    let dataset = LabeledDataset {
        meta,
        train: (0..6).map(item).collect(),
        test: vec![item(7)],
    };
    let oracle = SubprocessOracle::spawn(&constant_model(), 3, 2).unwrap();
    let config = SsetConfig::default();
    let e = explain(
        &dataset.test[0].instance,
        &dataset,
        &oracle,
        &config,
        &mut RandomSource::new(1),
    )
    .unwrap();
    assert_eq!(e.status, Status::NoSalientSignal);
    assert_eq!(e.winner_class, 1);
    assert!(e.importance.is_zero());
    oracle.shutdown().unwrap();
}
