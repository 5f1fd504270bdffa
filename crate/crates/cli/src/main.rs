use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{ArgGroup, Parser, Subcommand};
use sset_cli::commands::{
    run_explain, run_report, run_synth, ExplainOptions, ReportOptions, Selection,
};
use sset_cli::oracle_spec::OracleSpec;
use sset_cli::render::run_render;
use sset_core::eval::markdown_table;

#[derive(Parser)]
#[command(
    name = "sset",
    version,
    about = "Counterfactual explanations for multivariate time-series classifiers"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic dataset with planted class signatures.
    Synth {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Explain test instances of a dataset.
    #[command(group(ArgGroup::new("selection").required(true).args(["ids", "sample"])))]
    Explain {
        #[arg(long)]
        data: PathBuf,
        /// `builtin`, `builtin:TEMPERATURE` or `cmd:COMMAND`.
        #[arg(long, default_value = "builtin")]
        oracle: OracleSpec,
        /// JSON file with explainer settings.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Comma-separated instance ids.
        #[arg(long, value_delimiter = ',')]
        ids: Option<Vec<String>>,
        /// Number of test instances drawn at random.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        jobs: usize,
    },
    /// Summarize a directory of explanations.
    Report {
        #[arg(long)]
        explanations: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Also run the occlusion baseline with the run's oracle.
        #[arg(long)]
        with_baseline: bool,
        #[arg(long)]
        out: PathBuf,
    },
    /// Draw the importance heatmap of one explanation as SVG.
    Render {
        #[arg(long)]
        explanation: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { spec, out } => {
            let spec = run_synth(&spec, &out)?;
            println!(
                "wrote {} train and {} test instances to {}",
                spec.n_train,
                spec.n_test,
                out.display()
            );
        }
        Command::Explain {
            data,
            oracle,
            config,
            ids,
            sample,
            seed,
            out,
            jobs,
        } => {
            let selection = match (ids, sample) {
                (Some(ids), _) => Selection::Ids(ids),
                (None, Some(n)) => Selection::Sample(n),
                (None, None) => unreachable!("clap requires a selection"),
            };
            let opts = ExplainOptions {
                data,
                oracle,
                config,
                selection,
                seed,
                out,
                jobs,
            };
            let summary = run_explain(&opts)?;
            println!(
                "instances: {} Explained: {} NoSalientSignal: {} NoSalientSubsequence: {}",
                summary.total(),
                summary.explained,
                summary.no_salient_signal,
                summary.no_salient_subsequence
            );
        }
        Command::Report {
            explanations,
            data,
            with_baseline,
            out,
        } => {
            let opts = ReportOptions {
                explanations,
                data,
                with_baseline,
                out,
            };
            let analysis = run_report(&opts)?;
            print!("{}", markdown_table(&analysis.quality));
        }
        Command::Render { explanation, out } => run_render(&explanation, &out)?,
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::FAILURE
        }
    }
}
