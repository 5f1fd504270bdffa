//! Domain types and the on-disk dataset format.
//!
//! A dataset directory holds `meta.json` plus `train.csv` and `test.csv` in a
//! long layout: one row per `(instance, t)` with header
//! `instance_id,label,t,s0,...,s{V-1}`.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A `T x V` matrix of values indexed `[t, s]`.
pub type Series = Array2<f64>;

/// One multivariate series: `values[[t, s]]` is signal `s` at time step `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSeriesInstance {
    pub id: String,
    pub values: Series,
}

impl TimeSeriesInstance {
    pub fn new(id: impl Into<String>, values: Series) -> Self {
        Self {
            id: id.into(),
            values,
        }
    }

    /// Builds an instance from row-major nested vectors (`rows[t][s]`).
    pub fn from_rows(id: impl Into<String>, rows: &[Vec<f64>]) -> Result<Self> {
        Ok(Self::new(id, rows_to_series(rows)?))
    }

    pub fn time_steps(&self) -> usize {
        self.values.nrows()
    }

    pub fn signals(&self) -> usize {
        self.values.ncols()
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.values.nrows(), self.values.ncols())
    }
}

/// Converts nested rows into a dense series, rejecting ragged input.
pub fn rows_to_series(rows: &[Vec<f64>]) -> Result<Series> {
    let t = rows.len();
    let v = rows.first().map_or(0, Vec::len);
    if t == 0 || v == 0 {
        return Err(Error::ShapeMismatch {
            expected: (1, 1),
            actual: (t, v),
        });
    }
    let mut flat = Vec::with_capacity(t * v);
    for row in rows {
        if row.len() != v {
            return Err(Error::ShapeMismatch {
                expected: (t, v),
                actual: (t, row.len()),
            });
        }
        flat.extend_from_slice(row);
    }
    Ok(Array2::from_shape_vec((t, v), flat).expect("length checked above"))
}

pub fn series_to_rows(series: &Series) -> Vec<Vec<f64>> {
    series.rows().into_iter().map(|r| r.to_vec()).collect()
}

/// Shape and naming metadata shared by every instance of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DatasetMeta {
    #[serde(rename = "T")]
    pub time_steps: usize,
    #[serde(rename = "V")]
    pub signals: usize,
    #[serde(rename = "C")]
    pub classes: usize,
    pub signal_names: Vec<String>,
    pub class_names: Vec<String>,
    /// Disjoint groups of correlated signals. Signals outside every group
    /// form the non-correlated set.
    #[serde(default)]
    pub signal_groups: Vec<Vec<usize>>,
}

impl DatasetMeta {
    pub fn validate(&self) -> Result<()> {
        if self.time_steps == 0 || self.signals == 0 || self.classes == 0 {
            return Err(Error::InvalidMeta("T, V and C must be positive".into()));
        }
        if self.signal_names.len() != self.signals {
            return Err(Error::InvalidMeta(format!(
                "{} signal names for V = {}",
                self.signal_names.len(),
                self.signals
            )));
        }
        if self.class_names.len() != self.classes {
            return Err(Error::InvalidMeta(format!(
                "{} class names for C = {}",
                self.class_names.len(),
                self.classes
            )));
        }
        let mut seen = HashSet::new();
        for group in &self.signal_groups {
            for &s in group {
                if s >= self.signals {
                    return Err(Error::InvalidMeta(format!(
                        "signal group index {s} out of range for V = {}",
                        self.signals
                    )));
                }
                if !seen.insert(s) {
                    return Err(Error::InvalidMeta(format!(
                        "signal {s} appears in more than one group"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Signals that belong to no declared group, ascending.
    pub fn non_correlated_signals(&self) -> Vec<usize> {
        let grouped: HashSet<usize> = self.signal_groups.iter().flatten().copied().collect();
        (0..self.signals).filter(|s| !grouped.contains(s)).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledInstance {
    pub instance: TimeSeriesInstance,
    pub label: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub meta: DatasetMeta,
    pub train: Vec<LabeledInstance>,
    pub test: Vec<LabeledInstance>,
}

impl LabeledDataset {
    /// Checks every dataset invariant: metadata, shapes, value range, labels
    /// and id uniqueness.
    pub fn validate(&self) -> Result<()> {
        self.meta.validate()?;
        let expected = (self.meta.time_steps, self.meta.signals);
        let mut ids = HashSet::new();
        for (split, items) in [("train", &self.train), ("test", &self.test)] {
            for item in items {
                if item.instance.shape() != expected {
                    return Err(Error::ShapeMismatch {
                        expected,
                        actual: item.instance.shape(),
                    });
                }
                if item.label >= self.meta.classes {
                    return Err(Error::InvalidMeta(format!(
                        "{split} instance `{}` has label {} >= C = {}",
                        item.instance.id, item.label, self.meta.classes
                    )));
                }
                if let Some(v) = item
                    .instance
                    .values
                    .iter()
                    .find(|v| !(0.0..=1.0).contains(*v))
                {
                    return Err(Error::InvalidMeta(format!(
                        "{split} instance `{}` has value {v} outside [0, 1]",
                        item.instance.id
                    )));
                }
                if !ids.insert(item.instance.id.as_str()) {
                    return Err(Error::InvalidMeta(format!(
                        "duplicate instance id `{}`",
                        item.instance.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Looks an instance up by id, test split first.
    pub fn find(&self, id: &str) -> Option<&LabeledInstance> {
        self.test
            .iter()
            .chain(self.train.iter())
            .find(|item| item.instance.id == id)
    }
}

/// Loads and validates a dataset directory.
pub fn load_dataset(dir: impl AsRef<Path>) -> Result<LabeledDataset> {
    let dir = dir.as_ref();
    let meta_path = dir.join("meta.json");
    let text = read_required(&meta_path)?;
    let meta: DatasetMeta = serde_json::from_str(&text).map_err(|e| Error::Malformed {
        file: "meta.json".into(),
        line: e.line() as u64,
        field: "meta".into(),
        message: e.to_string(),
    })?;
    meta.validate()?;

    let train = read_split(dir, "train.csv", &meta)?;
    let test = read_split(dir, "test.csv", &meta)?;
    let dataset = LabeledDataset { meta, train, test };
    dataset.validate()?;
    Ok(dataset)
}

/// Writes a dataset directory in the format read by [`load_dataset`].
pub fn save_dataset(dataset: &LabeledDataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let meta = serde_json::to_string_pretty(&dataset.meta)?;
    let meta_path = dir.join("meta.json");
    fs::write(&meta_path, meta + "\n").map_err(|e| Error::io(&meta_path, e))?;
    write_split(&dir.join("train.csv"), &dataset.train, dataset.meta.signals)?;
    write_split(&dir.join("test.csv"), &dataset.test, dataset.meta.signals)?;
    Ok(())
}

fn read_required(path: &Path) -> Result<String> {
    match fs::read_to_string(path) {
        Ok(s) => Ok(s),
        Err(e) if e.kind() == std::io::ErrorKind::NotFound => {
            Err(Error::MissingFile(path.to_path_buf()))
        }
        Err(e) => Err(Error::io(path, e)),
    }
}

fn header(signals: usize) -> Vec<String> {
    let mut h = vec!["instance_id".to_string(), "label".into(), "t".into()];
    h.extend((0..signals).map(|s| format!("s{s}")));
    h
}

fn write_split(path: &Path, items: &[LabeledInstance], signals: usize) -> Result<()> {
    let csv_err = |e: csv::Error| Error::io(path, std::io::Error::other(e));
    let mut w = csv::Writer::from_path(path).map_err(csv_err)?;
    w.write_record(header(signals)).map_err(csv_err)?;
    for item in items {
        for (t, row) in item.instance.values.rows().into_iter().enumerate() {
            let mut rec = vec![
                item.instance.id.clone(),
                item.label.to_string(),
                t.to_string(),
            ];
            rec.extend(row.iter().map(|v| v.to_string()));
            w.write_record(&rec).map_err(csv_err)?;
        }
    }
    w.flush().map_err(|e| Error::io(path, e))
}

struct PendingInstance {
    id: String,
    label: usize,
    first_line: u64,
    rows: Vec<f64>,
    steps: usize,
}

fn read_split(dir: &Path, name: &str, meta: &DatasetMeta) -> Result<Vec<LabeledInstance>> {
    let path = dir.join(name);
    if !path.exists() {
        return Err(Error::MissingFile(path));
    }
    let malformed = |line: u64, field: &str, message: String| Error::Malformed {
        file: name.to_string(),
        line,
        field: field.to_string(),
        message,
    };

    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(&path)
        .map_err(|e| Error::io(&path, std::io::Error::other(e)))?;
    let found: Vec<String> = reader
        .headers()
        .map_err(|e| malformed(1, "header", e.to_string()))?
        .iter()
        .map(str::to_string)
        .collect();
    if found != header(meta.signals) {
        return Err(malformed(
            1,
            "header",
            format!("expected `{}`", header(meta.signals).join(",")),
        ));
    }

    let (t_len, v_len) = (meta.time_steps, meta.signals);
    let mut out = Vec::new();
    let mut seen_ids = HashSet::new();
    let mut pending: Option<PendingInstance> = None;

    let finish = |p: PendingInstance| -> Result<LabeledInstance> {
        if p.steps != t_len {
            return Err(malformed(
                p.first_line,
                "t",
                format!(
                    "instance `{}` has {} rows, expected T = {t_len}",
                    p.id, p.steps
                ),
            ));
        }
        let values = Array2::from_shape_vec((t_len, v_len), p.rows).expect("row count checked");
        Ok(LabeledInstance {
            instance: TimeSeriesInstance::new(p.id, values),
            label: p.label,
        })
    };

    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            malformed(line, "row", e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let id = record[0].to_string();
        let label: usize = record[1].trim().parse().map_err(|_| {
            malformed(
                line,
                "label",
                format!("`{}` is not a class index", &record[1]),
            )
        })?;
        if label >= meta.classes {
            return Err(Error::LabelOutOfRange {
                file: name.to_string(),
                line,
                label,
                classes: meta.classes,
            });
        }
        let t: usize = record[2]
            .trim()
            .parse()
            .map_err(|_| malformed(line, "t", format!("`{}` is not a time step", &record[2])))?;

        let continues = pending.as_ref().is_some_and(|p| p.id == id);
        if !continues {
            if let Some(p) = pending.take() {
                out.push(finish(p)?);
            }
            if !seen_ids.insert(id.clone()) {
                return Err(malformed(
                    line,
                    "instance_id",
                    format!("rows of instance `{id}` are not contiguous or the id is duplicated"),
                ));
            }
            pending = Some(PendingInstance {
                id: id.clone(),
                label,
                first_line: line,
                rows: Vec::with_capacity(t_len * v_len),
                steps: 0,
            });
        }
        let p = pending.as_mut().expect("set above");
        if p.label != label {
            return Err(malformed(
                line,
                "label",
                format!("label changes within instance `{id}`"),
            ));
        }
        if t != p.steps || t >= t_len {
            return Err(malformed(
                line,
                "t",
                format!("expected t = {} for instance `{id}`, got {t}", p.steps),
            ));
        }
        for s in 0..v_len {
            let field = format!("s{s}");
            let raw = record[3 + s].trim();
            let value: f64 = raw
                .parse()
                .map_err(|_| malformed(line, &field, format!("`{raw}` is not a number")))?;
            if !(0.0..=1.0).contains(&value) {
                return Err(Error::ValueOutOfRange {
                    file: name.to_string(),
                    line,
                    field,
                    value,
                });
            }
            p.rows.push(value);
        }
        p.steps += 1;
    }
    if let Some(p) = pending.take() {
        out.push(finish(p)?);
    }
    Ok(out)
}
