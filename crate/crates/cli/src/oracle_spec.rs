use std::fmt;
use std::str::FromStr;

use anyhow::{bail, ensure, Context, Result};
use sset_core::oracle::fit_centroid_classifier;
use sset_core::{CentroidClassifier, LabeledDataset, PredictionOracle, SubprocessOracle};

/// Which black box to explain: `builtin[:TEMPERATURE]` fits the reference
/// centroid classifier on the training split; `cmd:COMMAND` runs an external
/// model over the NDJSON protocol.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleSpec {
    Builtin { temperature: f64 },
    Command(String),
}

impl FromStr for OracleSpec {
    type Err = anyhow::Error;

    fn from_str(s: &str) -> Result<Self> {
        if s == "builtin" {
            return Ok(Self::Builtin {
                temperature: CentroidClassifier::DEFAULT_TEMPERATURE,
            });
        }
        if let Some(t) = s.strip_prefix("builtin:") {
            let temperature: f64 = t
                .parse()
                .with_context(|| format!("bad temperature `{t}`"))?;
            ensure!(temperature > 0.0, "temperature must be positive");
            return Ok(Self::Builtin { temperature });
        }
        if let Some(cmd) = s.strip_prefix("cmd:") {
            let cmd = cmd.trim();
            ensure!(!cmd.is_empty(), "empty model command");
            return Ok(Self::Command(cmd.to_string()));
        }
        bail!("oracle must be `builtin`, `builtin:TEMPERATURE` or `cmd:COMMAND`, got `{s}`")
    }
}

impl fmt::Display for OracleSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Builtin { temperature } => write!(f, "builtin:{temperature}"),
            Self::Command(cmd) => write!(f, "cmd:{cmd}"),
        }
    }
}

/// Fitted builtin model, shared by all workers.
pub fn fit_builtin(dataset: &LabeledDataset, temperature: f64) -> Result<CentroidClassifier> {
    Ok(fit_centroid_classifier(
        &dataset.train,
        dataset.meta.classes,
        temperature,
    )?)
}

/// Starts a model process and checks that its class count matches the dataset.
pub fn spawn_command(cmd: &str, dataset: &LabeledDataset) -> Result<SubprocessOracle> {
    let meta = &dataset.meta;
    let oracle = SubprocessOracle::spawn(cmd, meta.time_steps, meta.signals)
        .with_context(|| format!("starting model `{cmd}`"))?;
    ensure!(
        oracle.classes() == meta.classes,
        "model reports C = {} but the dataset has C = {}",
        oracle.classes(),
        meta.classes
    );
    Ok(oracle)
}

/// One oracle per worker: the builtin model is borrowed, commands are spawned.
pub enum WorkerOracle<'a> {
    Shared(&'a CentroidClassifier),
    Owned(SubprocessOracle),
}

impl WorkerOracle<'_> {
    pub fn as_dyn(&self) -> &dyn PredictionOracle {
        match self {
            Self::Shared(m) => *m,
            Self::Owned(o) => o,
        }
    }
}
