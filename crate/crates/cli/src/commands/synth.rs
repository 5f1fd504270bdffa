use std::fs;
use std::path::Path;

use anyhow::{Context, Result};
use sset_core::eval::{generate_synthetic, SyntheticSpec};
use sset_core::save_dataset;

use super::{read_json, to_json, write_atomic};

pub const GROUND_TRUTH_FILE: &str = "ground_truth.json";

/// Generates a synthetic dataset from the spec file into `out`.
pub fn run_synth(spec_path: &Path, out: &Path) -> Result<SyntheticSpec> {
    let spec: SyntheticSpec = read_json(spec_path)?;
    let generated = generate_synthetic(&spec)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    save_dataset(&generated.dataset, out)?;
    write_atomic(
        &out.join(GROUND_TRUTH_FILE),
        to_json(&generated.ground_truth)?.as_bytes(),
    )?;
    Ok(spec)
}
