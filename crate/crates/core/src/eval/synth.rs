use std::f64::consts::PI;

use ndarray::Array2;
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::data::{DatasetMeta, LabeledDataset, LabeledInstance, Series, TimeSeriesInstance};
use crate::error::{Error, Result};
use crate::rng::RandomSource;

/// Lag-one correlation of the per-signal noise.
const NOISE_SMOOTHING: f64 = 0.6;

/// A class signature: `amplitude` added to `signal` over steps `start..=end`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlantedSignal {
    pub signal: usize,
    pub start: usize,
    pub end: usize,
    pub amplitude: f64,
}

/// Generator settings. Missing keys take the default values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SyntheticSpec {
    #[serde(rename = "T")]
    pub time_steps: usize,
    #[serde(rename = "V")]
    pub signals: usize,
    #[serde(rename = "C")]
    pub classes: usize,
    /// One planted signature per class.
    pub planted: Vec<PlantedSignal>,
    pub noise_sigma: f64,
    pub n_train: usize,
    pub n_test: usize,
    pub seed: u64,
    pub signal_groups: Vec<Vec<usize>>,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        let bump = |signal, start, end| PlantedSignal {
            signal,
            start,
            end,
            amplitude: 0.35,
        };
        Self {
            time_steps: 30,
            signals: 8,
            classes: 3,
            planted: vec![bump(1, 4, 11), bump(3, 12, 19), bump(6, 20, 27)],
            noise_sigma: 0.05,
            n_train: 300,
            n_test: 100,
            seed: 7,
            signal_groups: vec![vec![0, 1, 2], vec![3, 4]],
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if self.time_steps == 0 || self.signals == 0 || self.classes == 0 {
            return bad("T, V and C must be positive".into());
        }
        if self.planted.len() != self.classes {
            return bad(format!(
                "{} planted signatures for C = {}",
                self.planted.len(),
                self.classes
            ));
        }
        for (c, p) in self.planted.iter().enumerate() {
            if p.signal >= self.signals {
                return bad(format!("class {c}: signal {} out of range", p.signal));
            }
            if p.start > p.end || p.end >= self.time_steps {
                return bad(format!(
                    "class {c}: interval [{}, {}] must satisfy 0 <= a <= b <= T - 1",
                    p.start, p.end
                ));
            }
            if !(p.amplitude.is_finite() && p.amplitude.abs() <= 1.0) {
                return bad(format!(
                    "class {c}: amplitude {} outside [-1, 1]",
                    p.amplitude
                ));
            }
            let duplicate = self.planted[..c]
                .iter()
                .any(|q| (q.signal, q.start, q.end) == (p.signal, p.start, p.end));
            if duplicate {
                return bad(format!(
                    "class {c} repeats another class's signal and interval"
                ));
            }
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!(
                "noise_sigma must be non-negative, got {}",
                self.noise_sigma
            ));
        }
        self.meta()
            .validate()
            .map_err(|e| Error::InvalidSpec(e.to_string()))
    }

    fn meta(&self) -> DatasetMeta {
        DatasetMeta {
            time_steps: self.time_steps,
            signals: self.signals,
            classes: self.classes,
            signal_names: (0..self.signals).map(|s| format!("sig{s}")).collect(),
            class_names: (0..self.classes).map(|c| format!("class{c}")).collect(),
            signal_groups: self.signal_groups.clone(),
        }
    }
}

/// Known saliency of a generated dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub spec: SyntheticSpec,
    /// Smooth per-signal curve shared by every instance before noise.
    pub baseline: Vec<Vec<f64>>,
}

impl GroundTruth {
    pub fn planted_for(&self, class: usize) -> &PlantedSignal {
        &self.spec.planted[class]
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticDataset {
    pub dataset: LabeledDataset,
    pub ground_truth: GroundTruth,
}

fn baseline_curve(spec: &SyntheticSpec, rng: &mut RandomSource) -> Series {
    let t_len = spec.time_steps as f64;
    let mut base = Array2::zeros((spec.time_steps, spec.signals));
    for s in 0..spec.signals {
        let phase = 2.0 * PI * rng.uniform();
        let freq = if rng.uniform() < 0.5 { 1.0 } else { 2.0 };
        for t in 0..spec.time_steps {
            base[[t, s]] = 0.5 + 0.15 * (2.0 * PI * freq * t as f64 / t_len + phase).sin();
        }
    }
    base
}

fn instance(spec: &SyntheticSpec, base: &Series, class: usize, rng: &mut RandomSource) -> Series {
    let mut values = base.clone();
    if spec.noise_sigma > 0.0 {
        let keep = (1.0 - NOISE_SMOOTHING * NOISE_SMOOTHING).sqrt();
        for s in 0..spec.signals {
            let mut e = 0.0;
            for t in 0..spec.time_steps {
                let z: f64 = rng.rng().sample(StandardNormal);
                e = if t == 0 {
                    z
                } else {
                    NOISE_SMOOTHING * e + keep * z
                };
                values[[t, s]] += spec.noise_sigma * e;
            }
        }
    }
    let p = &spec.planted[class];
    for t in p.start..=p.end {
        values[[t, p.signal]] += p.amplitude;
    }
    values.mapv_inplace(|v| v.clamp(0.0, 1.0));
    values
}

/// Generates a labeled dataset where class `c` differs from the shared
/// baseline by its planted bump. Labels cycle through the classes.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticDataset> {
    spec.validate()?;
    let root = RandomSource::new(spec.seed);
    let base = baseline_curve(spec, &mut root.derive("baseline"));
    let split = |prefix: &str, n: usize| -> Vec<LabeledInstance> {
        (0..n)
            .map(|i| {
                let id = format!("{prefix}-{i:04}");
                let label = i % spec.classes;
                let values = instance(spec, &base, label, &mut root.derive(&id));
                LabeledInstance {
                    instance: TimeSeriesInstance::new(id, values),
                    label,
                }
            })
            .collect()
    };
    let dataset = LabeledDataset {
        meta: spec.meta(),
        train: split("train", spec.n_train),
        test: split("test", spec.n_test),
    };
    dataset.validate()?;
    Ok(SyntheticDataset {
        dataset,
        ground_truth: GroundTruth {
            spec: spec.clone(),
            baseline: crate::data::series_to_rows(&base),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::rows_to_series;

    fn small(noise: f64, amplitude: f64) -> SyntheticSpec {
        let mut spec = SyntheticSpec {
            n_train: 6,
            n_test: 3,
            noise_sigma: noise,
            ..SyntheticSpec::default()
        };
        for p in &mut spec.planted {
            p.amplitude = amplitude;
        }
        spec
    }

    #[test]
    fn degenerate_spec_gives_identical_instances() {
        let ds = generate_synthetic(&small(0.0, 0.0)).unwrap().dataset;
        let first = &ds.train[0].instance.values;
        assert!(ds
            .train
            .iter()
            .chain(&ds.test)
            .all(|i| i.instance.values == *first));
    }

    #[test]
    fn noiseless_instances_differ_only_on_the_plant() {
        let syn = generate_synthetic(&small(0.0, 0.3)).unwrap();
        let base = rows_to_series(&syn.ground_truth.baseline).unwrap();
        for item in &syn.dataset.train {
            let p = syn.ground_truth.planted_for(item.label);
            for ((t, s), &v) in item.instance.values.indexed_iter() {
                let inside = s == p.signal && (p.start..=p.end).contains(&t);
                assert_eq!(
                    v != base[[t, s]],
                    inside,
                    "cell ({t}, {s}) of {}",
                    item.instance.id
                );
            }
        }
    }

    #[test]
    fn values_stay_in_unit_range_and_repeat_per_seed() {
        let spec = SyntheticSpec {
            noise_sigma: 0.4,
            n_train: 30,
            n_test: 5,
            ..SyntheticSpec::default()
        };
        let a = generate_synthetic(&spec).unwrap().dataset;
        let b = generate_synthetic(&spec).unwrap().dataset;
        assert_eq!(a, b);
        assert!(a
            .train
            .iter()
            .all(|i| i.instance.values.iter().all(|v| (0.0..=1.0).contains(v))));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let mut spec = SyntheticSpec::default();
        spec.planted[0].start = 12;
        spec.planted[0].end = 11;
        assert!(matches!(
            generate_synthetic(&spec),
            Err(Error::InvalidSpec(_))
        ));

        let mut spec = SyntheticSpec::default();
        spec.planted[1] = spec.planted[0];
        assert!(generate_synthetic(&spec).is_err());

        let mut spec = SyntheticSpec::default();
        spec.planted.pop();
        assert!(generate_synthetic(&spec).is_err());
    }
}
