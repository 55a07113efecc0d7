//! Tabular ingestion, encoding, splitting and threshold sets.

use std::collections::HashMap;
use std::io::Read;
use std::path::Path;

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{self, Purpose};
use crate::tree::{node_depth, TreeParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Numeric,
    Categorical,
    Label,
}

/// Column tags for a CSV file. The label column is named explicitly, listed
/// columns are categorical and every other column is numeric.
#[derive(Debug, Clone, Default)]
pub struct Schema {
    pub label: String,
    pub categorical: Vec<String>,
}

impl Schema {
    pub fn new(label: impl Into<String>) -> Self {
        Self {
            label: label.into(),
            categorical: Vec::new(),
        }
    }

    pub fn with_categorical<I, S>(mut self, names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        self.categorical.extend(names.into_iter().map(Into::into));
        self
    }

    fn resolve(&self, header: &[String]) -> Result<Vec<ColumnKind>> {
        let labels = header.iter().filter(|h| **h == self.label).count();
        if labels != 1 {
            return Err(Error::Schema(format!(
                "expected exactly one label column named {:?}, found {labels}",
                self.label
            )));
        }
        for name in &self.categorical {
            if !header.contains(name) {
                return Err(Error::Schema(format!("categorical column {name:?} not in header")));
            }
            if *name == self.label {
                return Err(Error::Schema(format!("{name:?} is both label and categorical")));
            }
        }
        Ok(header
            .iter()
            .map(|h| {
                if *h == self.label {
                    ColumnKind::Label
                } else if self.categorical.contains(h) {
                    ColumnKind::Categorical
                } else {
                    ColumnKind::Numeric
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Text(Vec<String>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Column {
    pub name: String,
    pub kind: ColumnKind,
    pub data: ColumnData,
}

/// Typed columns straight from a CSV file, in file row order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawTable {
    columns: Vec<Column>,
    n_rows: usize,
}

impl RawTable {
    pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(file, path, schema)
    }

    /// Parses comma-separated text with a header row. `source` only labels
    /// error messages.
    pub fn parse(reader: impl Read, source: impl AsRef<Path>, schema: &Schema) -> Result<Self> {
        let source = source.as_ref();
        let parse_err = |line: u64, message: String| Error::Parse {
            path: source.to_path_buf(),
            line,
            message,
        };
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let header: Vec<String> = rdr
            .headers()
            .map_err(|e| parse_err(1, e.to_string()))?
            .iter()
            .map(str::to_owned)
            .collect();
        let kinds = schema.resolve(&header)?;
        let mut columns: Vec<Column> = header
            .iter()
            .zip(&kinds)
            .map(|(name, &kind)| Column {
                name: name.clone(),
                kind,
                data: match kind {
                    ColumnKind::Numeric => ColumnData::Numeric(Vec::new()),
                    _ => ColumnData::Text(Vec::new()),
                },
            })
            .collect();

        let mut n_rows = 0;
        for record in rdr.records() {
            let record = record.map_err(|e| {
                let line = e.position().map_or(0, |p| p.line());
                parse_err(line, e.to_string())
            })?;
            let line = record.position().map_or(0, |p| p.line());
            if record.len() != header.len() {
                return Err(parse_err(
                    line,
                    format!("expected {} fields, found {}", header.len(), record.len()),
                ));
            }
            for (col, field) in columns.iter_mut().zip(record.iter()) {
                if field.is_empty() || field == "?" {
                    return Err(parse_err(line, format!("missing value in column {:?}", col.name)));
                }
                match &mut col.data {
                    ColumnData::Numeric(v) => {
                        let value: f64 = field
                            .parse()
                            .map_err(|_| parse_err(line, format!("non-numeric {field:?} in column {:?}", col.name)))?;
                        if !value.is_finite() {
                            return Err(parse_err(line, format!("non-finite value in column {:?}", col.name)));
                        }
                        v.push(value);
                    }
                    ColumnData::Text(v) => v.push(field.to_owned()),
                }
            }
            n_rows += 1;
        }
        Ok(Self { columns, n_rows })
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn labels(&self) -> &[String] {
        self.columns
            .iter()
            .find_map(|c| match (&c.kind, &c.data) {
                (ColumnKind::Label, ColumnData::Text(v)) => Some(v.as_slice()),
                _ => None,
            })
            .expect("schema guarantees one label column")
    }

    /// Rows at `indices`, in that order.
    pub fn select(&self, indices: &[usize]) -> Self {
        let columns = self
            .columns
            .iter()
            .map(|c| Column {
                name: c.name.clone(),
                kind: c.kind,
                data: match &c.data {
                    ColumnData::Numeric(v) => ColumnData::Numeric(indices.iter().map(|&i| v[i]).collect()),
                    ColumnData::Text(v) => ColumnData::Text(indices.iter().map(|&i| v[i].clone()).collect()),
                },
            })
            .collect();
        Self {
            columns,
            n_rows: indices.len(),
        }
    }
}

/// How one input column maps onto scaled feature columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FeatureEncoding {
    MinMax { name: String, min: f64, max: f64 },
    OneHot { name: String, levels: Vec<String> },
}

impl FeatureEncoding {
    fn width(&self) -> usize {
        match self {
            Self::MinMax { .. } => 1,
            Self::OneHot { levels, .. } => levels.len(),
        }
    }
}

/// Scaling statistics and dictionaries learned from one table (normally the
/// training rows) and applied to any table with the same columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Encoder {
    pub features: Vec<FeatureEncoding>,
    /// Class names; class id `k` is `classes[k - 1]`.
    pub classes: Vec<String>,
}

impl Encoder {
    pub fn fit(raw: &RawTable) -> Self {
        let mut features = Vec::new();
        for col in raw.columns() {
            match (&col.kind, &col.data) {
                (ColumnKind::Numeric, ColumnData::Numeric(v)) => {
                    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
                    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                    let (min, max) = if v.is_empty() { (0.0, 0.0) } else { (min, max) };
                    features.push(FeatureEncoding::MinMax {
                        name: col.name.clone(),
                        min,
                        max,
                    });
                }
                (ColumnKind::Categorical, ColumnData::Text(v)) => features.push(FeatureEncoding::OneHot {
                    name: col.name.clone(),
                    levels: first_occurrence(v),
                }),
                _ => {}
            }
        }
        Self {
            features,
            classes: first_occurrence(raw.labels()),
        }
    }

    pub fn n_features(&self) -> usize {
        self.features.iter().map(FeatureEncoding::width).sum()
    }

    /// Scales `raw` with the fitted statistics. Values outside the fitted
    /// range are clamped into [0, 1]; unseen categorical levels encode as all
    /// zeros; unseen labels get fresh ids after the fitted dictionary.
    pub fn transform(&self, raw: &RawTable) -> Dataset {
        let n = raw.n_rows();
        let p = self.n_features();
        let mut x = vec![0.0; n * p];
        let mut offset = 0;
        let inputs = raw.columns().iter().filter(|c| c.kind != ColumnKind::Label);
        for (enc, col) in self.features.iter().zip(inputs) {
            match (enc, &col.data) {
                (FeatureEncoding::MinMax { min, max, .. }, ColumnData::Numeric(v)) => {
                    let range = max - min;
                    for (i, &value) in v.iter().enumerate() {
                        x[i * p + offset] = if range > 0.0 {
                            ((value - min) / range).clamp(0.0, 1.0)
                        } else {
                            0.0
                        };
                    }
                }
                (FeatureEncoding::OneHot { levels, .. }, ColumnData::Text(v)) => {
                    for (i, value) in v.iter().enumerate() {
                        if let Some(j) = levels.iter().position(|l| l == value) {
                            x[i * p + offset + j] = 1.0;
                        }
                    }
                }
                _ => unreachable!("encoder fitted on a table with different column kinds"),
            }
            offset += enc.width();
        }

        let mut dictionary: HashMap<&str, u32> = self
            .classes
            .iter()
            .enumerate()
            .map(|(k, name)| (name.as_str(), k as u32 + 1))
            .collect();
        let mut n_classes = self.classes.len();
        let y = raw
            .labels()
            .iter()
            .map(|label| {
                *dictionary.entry(label.as_str()).or_insert_with(|| {
                    n_classes += 1;
                    n_classes as u32
                })
            })
            .collect();
        Dataset {
            x,
            y,
            n_features: p,
            n_classes: n_classes.max(1),
        }
    }
}

fn first_occurrence(values: &[String]) -> Vec<String> {
    let mut seen = Vec::new();
    for v in values {
        if !seen.contains(v) {
            seen.push(v.clone());
        }
    }
    seen
}

/// One-hot encodes categoricals, min-max scales numerics and densely
/// re-indexes labels 1..K in first-occurrence order.
pub fn encode_and_scale(raw: &RawTable) -> Dataset {
    Encoder::fit(raw).transform(raw)
}

/// Scaled feature matrix (row-major, values in [0, 1]) with class ids in
/// 1..=K.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    x: Vec<f64>,
    y: Vec<u32>,
    n_features: usize,
    n_classes: usize,
}

impl Dataset {
    pub fn new(rows: Vec<Vec<f64>>, labels: Vec<u32>, n_classes: usize) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Schema(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        let n_features = rows.first().map_or(0, Vec::len);
        let mut x = Vec::with_capacity(rows.len() * n_features);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n_features {
                return Err(Error::Schema(format!(
                    "row {i} has {} features, expected {n_features}",
                    row.len()
                )));
            }
            if let Some(v) = row.iter().find(|v| !(0.0..=1.0).contains(*v)) {
                return Err(Error::Schema(format!("row {i} has value {v} outside [0, 1]")));
            }
            x.extend_from_slice(row);
        }
        if let Some(k) = labels.iter().find(|&&k| k == 0 || k as usize > n_classes) {
            return Err(Error::Schema(format!("class id {k} outside 1..={n_classes}")));
        }
        Ok(Self {
            x,
            y: labels,
            n_features,
            n_classes,
        })
    }

    pub fn n_samples(&self) -> usize {
        self.y.len()
    }

    pub fn n_features(&self) -> usize {
        self.n_features
    }

    pub fn n_classes(&self) -> usize {
        self.n_classes
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.n_features..(i + 1) * self.n_features]
    }

    pub fn label(&self, i: usize) -> u32 {
        self.y[i]
    }

    pub fn labels(&self) -> &[u32] {
        &self.y
    }

    /// Value of 1-based feature `p` for sample `i`.
    pub fn value(&self, i: usize, p: usize) -> f64 {
        self.x[i * self.n_features + p - 1]
    }

    pub fn select(&self, indices: &[usize]) -> Self {
        let mut x = Vec::with_capacity(indices.len() * self.n_features);
        for &i in indices {
            x.extend_from_slice(self.row(i));
        }
        Self {
            x,
            y: indices.iter().map(|&i| self.y[i]).collect(),
            n_features: self.n_features,
            n_classes: self.n_classes,
        }
    }

    pub fn class_counts(&self) -> Vec<u64> {
        let mut counts = vec![0; self.n_classes];
        for &k in &self.y {
            counts[k as usize - 1] += 1;
        }
        counts
    }

    pub fn distinct_labels(&self) -> usize {
        self.class_counts().iter().filter(|&&c| c > 0).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitSpec {
    pub train_fraction: f64,
    pub validation_fraction: f64,
    pub seed: u64,
}

impl SplitSpec {
    pub fn train_test(train_fraction: f64, seed: u64) -> Self {
        Self {
            train_fraction,
            validation_fraction: 0.0,
            seed,
        }
    }

    fn validate(&self) -> Result<()> {
        let ok = self.train_fraction > 0.0
            && self.validation_fraction >= 0.0
            && self.train_fraction + self.validation_fraction <= 1.0;
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("invalid split fractions {self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitIndices {
    pub train: Vec<usize>,
    pub validation: Vec<usize>,
    pub test: Vec<usize>,
}

fn part_size(n: usize, fraction: f64) -> usize {
    // Guards products like 100 * 0.29 = 28.999999999999996.
    (n as f64 * fraction + 1e-9).floor() as usize
}

/// Seeded shuffle of `0..n` cut into train, validation and test. Sizes are
/// floored; the remainder goes to test. Each part is returned in ascending
/// index order.
pub fn split_indices(n: usize, spec: &SplitSpec) -> Result<SplitIndices> {
    spec.validate()?;
    let n_train = part_size(n, spec.train_fraction);
    let n_val = part_size(n, spec.validation_fraction);
    if n_train < 2 {
        return Err(Error::EmptyPartition(format!(
            "train would hold {n_train} of {n} samples"
        )));
    }
    if spec.validation_fraction > 0.0 && n_val == 0 {
        return Err(Error::EmptyPartition(format!("validation would be empty for n = {n}")));
    }
    if n_train + n_val >= n {
        return Err(Error::EmptyPartition(format!("test would be empty for n = {n}")));
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng::stream(spec.seed, Purpose::Split));
    let mut train = order[..n_train].to_vec();
    let mut validation = order[n_train..n_train + n_val].to_vec();
    let mut test = order[n_train + n_val..].to_vec();
    train.sort_unstable();
    validation.sort_unstable();
    test.sort_unstable();
    Ok(SplitIndices {
        train,
        validation,
        test,
    })
}

pub fn split(ds: &Dataset, spec: &SplitSpec) -> Result<(Dataset, Dataset, Dataset)> {
    let parts = split_indices(ds.n_samples(), spec)?;
    Ok((
        ds.select(&parts.train),
        ds.select(&parts.validation),
        ds.select(&parts.test),
    ))
}

/// Candidate thresholds per feature: 0, the midpoints of adjacent distinct
/// values, and 1.
#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdSets {
    sets: Vec<Vec<f64>>,
}

impl ThresholdSets {
    pub fn build(train: &Dataset) -> Self {
        let sets = (1..=train.n_features())
            .map(|p| {
                let mut values: Vec<f64> = (0..train.n_samples()).map(|i| train.value(i, p)).collect();
                values.sort_by(f64::total_cmp);
                values.dedup();
                let mut set = Vec::with_capacity(values.len() + 1);
                set.push(0.0);
                set.extend(values.windows(2).map(|w| (w[0] + w[1]) / 2.0));
                set.push(1.0);
                set
            })
            .collect();
        Self { sets }
    }

    pub fn from_sets(sets: Vec<Vec<f64>>) -> Self {
        Self { sets }
    }

    pub fn n_features(&self) -> usize {
        self.sets.len()
    }

    /// Sorted thresholds of 1-based feature `p`.
    pub fn get(&self, p: usize) -> &[f64] {
        &self.sets[p - 1]
    }

    /// Number of distinct training values of feature `p` (set length - 1).
    pub fn unique_count(&self, p: usize) -> usize {
        self.sets[p - 1].len() - 1
    }

    pub fn total_len(&self) -> usize {
        self.sets.iter().map(Vec::len).sum()
    }
}

pub fn build_threshold_sets(train: &Dataset) -> ThresholdSets {
    ThresholdSets::build(train)
}

/// Indices of the samples whose path passes through node `t`, in dataset
/// order.
pub fn path_indices(ds: &Dataset, tree: &TreeParams, t: usize) -> Vec<usize> {
    let steps = node_depth(t);
    (0..ds.n_samples())
        .filter(|&i| {
            let x = ds.row(i);
            let mut node = 1;
            for _ in 0..steps {
                node = tree.child(node, x);
            }
            node == t
        })
        .collect()
}

pub fn subset_by_path(ds: &Dataset, tree: &TreeParams, t: usize) -> Dataset {
    ds.select(&path_indices(ds, tree, t))
}
