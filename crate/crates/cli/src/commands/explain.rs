use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicBool, AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{anyhow, bail, ensure, Context, Result};
use serde::{Deserialize, Serialize};
use sset_core::explain::Status;
use sset_core::{
    explain, load_dataset, Explanation, LabeledDataset, RandomSource, SsetConfig,
    TimeSeriesInstance,
};

use super::{read_json, to_json, write_atomic, MANIFEST_FILE};
use crate::oracle_spec::{fit_builtin, spawn_command, OracleSpec, WorkerOracle};

/// Which test instances to explain.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Selection {
    Ids(Vec<String>),
    /// Uniform draw without replacement from the test split.
    Sample(usize),
}

#[derive(Debug, Clone)]
pub struct ExplainOptions {
    pub data: PathBuf,
    pub oracle: OracleSpec,
    pub config: Option<PathBuf>,
    pub selection: Selection,
    pub seed: u64,
    pub out: PathBuf,
    pub jobs: usize,
}

/// Everything needed to repeat an explanation run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunManifest {
    pub tool_version: String,
    pub data: PathBuf,
    pub oracle: String,
    pub config: SsetConfig,
    pub seed: u64,
    pub selection: Selection,
    /// Instance ids in the order they were selected.
    pub instances: Vec<String>,
    pub out: PathBuf,
}

impl RunManifest {
    pub fn read(dir: &Path) -> Result<Self> {
        read_json(&dir.join(MANIFEST_FILE))
    }

    pub fn oracle_spec(&self) -> Result<OracleSpec> {
        self.oracle.parse()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct RunSummary {
    pub explained: usize,
    pub no_salient_signal: usize,
    pub no_salient_subsequence: usize,
}

impl RunSummary {
    fn add(&mut self, status: Status) {
        match status {
            Status::Explained => self.explained += 1,
            Status::NoSalientSignal => self.no_salient_signal += 1,
            Status::NoSalientSubsequence => self.no_salient_subsequence += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.explained + self.no_salient_signal + self.no_salient_subsequence
    }
}

#[derive(Serialize)]
struct ErrorRecord<'a> {
    instance_id: &'a str,
    error: String,
}

fn check_id(id: &str) -> Result<()> {
    let bad = id.is_empty()
        || id.starts_with('.')
        || id == "manifest"
        || id == "report"
        || id.contains(['/', '\\']);
    ensure!(!bad, "instance id `{id}` cannot be used as a file name");
    Ok(())
}

fn select<'a>(
    dataset: &'a LabeledDataset,
    selection: &Selection,
    seed: u64,
) -> Result<Vec<&'a TimeSeriesInstance>> {
    let picked: Vec<_> = match selection {
        Selection::Ids(ids) => ids
            .iter()
            .map(|id| {
                dataset
                    .find(id)
                    .map(|item| &item.instance)
                    .ok_or_else(|| anyhow!("unknown instance id `{id}`"))
            })
            .collect::<Result<_>>()?,
        Selection::Sample(n) => {
            let mut rng = RandomSource::new(seed).derive("sample");
            rng.sample_indices(dataset.test.len(), *n)
                .into_iter()
                .map(|i| &dataset.test[i].instance)
                .collect()
        }
    };
    for x in &picked {
        check_id(&x.id)?;
    }
    Ok(picked)
}

fn write_explanation(out: &Path, e: &Explanation) -> Result<()> {
    write_atomic(
        &out.join(format!("{}.json", e.instance_id)),
        to_json(e)?.as_bytes(),
    )?;
    write_atomic(
        &out.join(format!("{}.csv", e.instance_id)),
        e.importance.to_csv().as_bytes(),
    )
}

/// Explains the selected instances and writes one JSON and one CSV file per
/// instance. The first failing instance stops further work and leaves an
/// `<id>.error.json` record.
pub fn run_explain(opts: &ExplainOptions) -> Result<RunSummary> {
    ensure!(opts.jobs > 0, "--jobs must be at least 1");
    let config = match &opts.config {
        Some(path) => read_json::<SsetConfig>(path)?,
        None => SsetConfig::default(),
    };
    config.validate()?;
    let dataset = load_dataset(&opts.data)?;
    let selected = select(&dataset, &opts.selection, opts.seed)?;
    if selected.is_empty() {
        return Ok(RunSummary::default());
    }

    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        data: opts.data.clone(),
        oracle: opts.oracle.to_string(),
        config: config.clone(),
        seed: opts.seed,
        selection: opts.selection.clone(),
        instances: selected.iter().map(|x| x.id.clone()).collect(),
        out: opts.out.clone(),
    };
    write_atomic(
        &opts.out.join(MANIFEST_FILE),
        to_json(&manifest)?.as_bytes(),
    )?;

    let builtin = match &opts.oracle {
        OracleSpec::Builtin { temperature } => Some(fit_builtin(&dataset, *temperature)?),
        OracleSpec::Command(_) => None,
    };
    let root = RandomSource::new(opts.seed);
    let next = AtomicUsize::new(0);
    let failed = AtomicBool::new(false);
    let summary = Mutex::new(RunSummary::default());

    let worker = || -> Result<()> {
        let oracle = match (&builtin, &opts.oracle) {
            (Some(model), _) => WorkerOracle::Shared(model),
            (None, OracleSpec::Command(cmd)) => WorkerOracle::Owned(spawn_command(cmd, &dataset)?),
            (None, OracleSpec::Builtin { .. }) => unreachable!("builtin model is fitted up front"),
        };
        while !failed.load(Ordering::SeqCst) {
            let i = next.fetch_add(1, Ordering::SeqCst);
            let Some(x) = selected.get(i) else { break };
            let mut rng = root.derive(&x.id);
            let outcome = explain(x, &dataset, oracle.as_dyn(), &config, &mut rng)
                .map_err(anyhow::Error::from)
                .and_then(|e| write_explanation(&opts.out, &e).map(|_| e.status));
            match outcome {
                Ok(status) => summary.lock().unwrap().add(status),
                Err(err) => {
                    failed.store(true, Ordering::SeqCst);
                    let record = ErrorRecord {
                        instance_id: &x.id,
                        error: format!("{err:#}"),
                    };
                    write_atomic(
                        &opts.out.join(format!("{}.error.json", x.id)),
                        to_json(&record)?.as_bytes(),
                    )?;
                    return Err(err.context(format!("instance `{}`", x.id)));
                }
            }
        }
        if let WorkerOracle::Owned(process) = oracle {
            process.shutdown()?;
        }
        Ok(())
    };

    let jobs = opts.jobs.min(selected.len());
    let results: Vec<Result<()>> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..jobs).map(|_| scope.spawn(worker)).collect();
        handles
            .into_iter()
            .map(|h| h.join().unwrap_or_else(|_| Err(anyhow!("worker panicked"))))
            .collect()
    });
    let errors: Vec<_> = results.into_iter().filter_map(Result::err).collect();
    if let Some(first) = errors.into_iter().next() {
        return Err(first);
    }
    let summary = summary.into_inner().unwrap();
    if summary.total() != selected.len() {
        bail!(
            "{} of {} instances were not explained",
            selected.len() - summary.total(),
            selected.len()
        );
    }
    Ok(summary)
}
