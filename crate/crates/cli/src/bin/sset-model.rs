//! Reference model speaking the NDJSON prediction protocol on stdin/stdout.

use std::io::{self, BufReader};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::Parser;
use sset_cli::echo::echo_probabilities;
use sset_core::oracle::protocol::serve;
use sset_core::oracle::{fit_centroid_classifier, FnOracle};
use sset_core::{load_dataset, CentroidClassifier};

#[derive(Parser)]
#[command(
    name = "sset-model",
    version,
    about = "Serve a classifier over the prediction protocol"
)]
struct Args {
    /// Fit the centroid classifier on this dataset's training split.
    #[arg(long, required_unless_present = "echo")]
    data: Option<PathBuf>,
    #[arg(long, default_value_t = CentroidClassifier::DEFAULT_TEMPERATURE)]
    temperature: f64,
    /// Serve the echo model instead, declaring C classes. Needs V = C.
    #[arg(long, value_name = "C", conflicts_with = "data")]
    echo: Option<usize>,
}

fn run(args: Args) -> Result<()> {
    let stdin = BufReader::new(io::stdin().lock());
    let stdout = io::stdout().lock();
    if let Some(classes) = args.echo {
        serve(&FnOracle(echo_probabilities), classes, stdin, stdout)?;
        return Ok(());
    }
    let dir = args.data.expect("clap requires --data without --echo");
    let dataset = load_dataset(&dir).with_context(|| format!("loading {}", dir.display()))?;
    let model = fit_centroid_classifier(&dataset.train, dataset.meta.classes, args.temperature)?;
    serve(&model, dataset.meta.classes, stdin, stdout)?;
    Ok(())
}

fn main() -> ExitCode {
    match run(Args::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("sset-model: {err:#}");
            ExitCode::FAILURE
        }
    }
}
