use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, ensure, Context, Result};
use sset_core::baseline::{occlusion_explain, OcclusionConfig};
use sset_core::eval::{analyze, markdown_table, occlusion_quality, Analysis, QualityReport};
use sset_core::{load_dataset, Explanation, LabeledDataset};

use super::explain::RunManifest;
use super::{read_json, to_json, write_atomic, MANIFEST_FILE};
use crate::oracle_spec::{fit_builtin, spawn_command, OracleSpec, WorkerOracle};

#[derive(Debug, Clone)]
pub struct ReportOptions {
    pub explanations: PathBuf,
    pub data: PathBuf,
    pub with_baseline: bool,
    pub out: PathBuf,
}

fn is_explanation_file(path: &Path) -> bool {
    let Some(name) = path.file_name().and_then(|n| n.to_str()) else {
        return false;
    };
    name.ends_with(".json")
        && !name.starts_with('.')
        && !name.ends_with(".error.json")
        && name != MANIFEST_FILE
        && name != "report.json"
}

/// Reads every explanation JSON in `dir`, sorted by instance id.
pub fn load_explanations(dir: &Path) -> Result<Vec<Explanation>> {
    let mut paths = Vec::new();
    for entry in fs::read_dir(dir).with_context(|| format!("reading {}", dir.display()))? {
        let path = entry?.path();
        if path.is_file() && is_explanation_file(&path) {
            paths.push(path);
        }
    }
    let mut explanations = paths
        .iter()
        .map(|p| read_json::<Explanation>(p))
        .collect::<Result<Vec<_>>>()?;
    explanations.sort_by(|a, b| a.instance_id.cmp(&b.instance_id));
    Ok(explanations)
}

fn check_shapes(explanations: &[Explanation], dataset: &LabeledDataset) -> Result<()> {
    let expected = (dataset.meta.time_steps, dataset.meta.signals);
    for e in explanations {
        let actual = e.importance.scores.dim();
        ensure!(
            actual == expected,
            "explanation `{}` has shape {actual:?} but the dataset has {expected:?}",
            e.instance_id
        );
    }
    Ok(())
}

fn baseline_report(
    explanations: &[Explanation],
    dataset: &LabeledDataset,
    oracle: &OracleSpec,
) -> Result<QualityReport> {
    let builtin;
    let oracle = match oracle {
        OracleSpec::Builtin { temperature } => {
            builtin = fit_builtin(dataset, *temperature)?;
            WorkerOracle::Shared(&builtin)
        }
        OracleSpec::Command(cmd) => WorkerOracle::Owned(spawn_command(cmd, dataset)?),
    };
    let config = OcclusionConfig::default();
    let mut results = Vec::with_capacity(explanations.len());
    for e in explanations {
        let x = &dataset
            .find(&e.instance_id)
            .with_context(|| format!("instance `{}` is not in the dataset", e.instance_id))?
            .instance
            .values;
        let r = occlusion_explain(
            x,
            oracle.as_dyn(),
            dataset.meta.classes,
            e.winner_class,
            &dataset.train,
            &config,
        )
        .with_context(|| format!("occlusion of `{}`", e.instance_id))?;
        results.push((e.instance_id.clone(), r));
    }
    if let WorkerOracle::Owned(process) = oracle {
        process.shutdown()?;
    }
    Ok(occlusion_quality(&results, dataset)?)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "n/a".to_string(), |v| format!("{v:.2}"))
}

/// Markdown rendering of an analysis.
pub fn render_markdown(analysis: &Analysis) -> String {
    let mut md = String::from("# Explanation report\n\n## Quality\n\n");
    md.push_str(&markdown_table(&analysis.quality));
    md.push('\n');
    for q in &analysis.quality {
        let _ = writeln!(
            md,
            "{}: {} explained, {} failed, precision counting failures as 0: {}",
            q.explainer,
            q.n_explained,
            q.n_failed,
            opt(q.precision_pessimistic)
        );
    }
    md.push_str("\n## Status\n\n| Status | Count |\n|---|---|\n");
    for (status, n) in &analysis.status_counts {
        let _ = writeln!(md, "| {status:?} | {n} |");
    }
    md.push_str("\n## Salient signals\n\n| Signal | Count |\n|---|---|\n");
    for (name, n) in &analysis.salient_signal_histogram {
        let _ = writeln!(md, "| {name} | {n} |");
    }
    md.push_str("\n## Minimal window sizes\n\n| Window | Count |\n|---|---|\n");
    for (w, n) in &analysis.window_sizes.histogram {
        let _ = writeln!(md, "| {w} | {n} |");
    }
    let _ = writeln!(
        md,
        "\nMean window size: {}",
        opt(analysis.window_sizes.mean)
    );
    match (
        &analysis.distance_window_correlation,
        &analysis.correlation_error,
    ) {
        (Some(r), _) => {
            let _ = writeln!(md, "\nNeighbor distance vs window size correlation: {r:.4}");
        }
        (None, Some(why)) => {
            let _ = writeln!(
                md,
                "\nNeighbor distance vs window size correlation: n/a ({why})"
            );
        }
        (None, None) => {}
    }
    md
}

/// Builds `report.json` and `report.md` in `out` and returns the analysis.
pub fn run_report(opts: &ReportOptions) -> Result<Analysis> {
    let dataset = load_dataset(&opts.data)?;
    let explanations = load_explanations(&opts.explanations)?;
    if explanations.is_empty() {
        bail!("no explanation files in {}", opts.explanations.display());
    }
    check_shapes(&explanations, &dataset)?;
    let baseline = if opts.with_baseline {
        let manifest = RunManifest::read(&opts.explanations)
            .context("the baseline uses the oracle recorded in the run manifest")?;
        Some(baseline_report(
            &explanations,
            &dataset,
            &manifest.oracle_spec()?,
        )?)
    } else {
        None
    };
    let analysis = analyze(&explanations, &dataset, baseline)?;
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    write_atomic(
        &opts.out.join("report.json"),
        to_json(&analysis)?.as_bytes(),
    )?;
    write_atomic(
        &opts.out.join("report.md"),
        render_markdown(&analysis).as_bytes(),
    )?;
    Ok(analysis)
}
