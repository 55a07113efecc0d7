use std::fs::File;
use std::io::Write;
use std::path::Path;

use mhdeoct::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::config::ReportFormat;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RepetitionReport {
    pub repetition: usize,
    pub seed: u64,
    pub alpha: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub fitness: f64,
    pub active_splits: usize,
    /// Wall time of training, warm starts and tuning included.
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub alpha: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub fitness: f64,
    pub active_splits: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub dataset: String,
    pub method: String,
    pub depth: usize,
    pub mh_depth: Option<usize>,
    pub n_min: usize,
    pub mode: String,
    pub tuned: bool,
    pub repetitions: Vec<RepetitionReport>,
    pub mean: Summary,
    /// Sample standard deviation (zero for a single repetition).
    pub std: Summary,
    /// Best-fitness histories of every DEOCT run, in run order.
    #[serde(skip)]
    pub histories: Vec<Vec<f64>>,
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, var.sqrt())
}

impl Summary {
    /// Mean and sample standard deviation of each metric over `rows`.
    pub fn aggregate(rows: &[RepetitionReport]) -> (Self, Self) {
        let col = |f: &dyn Fn(&RepetitionReport) -> f64| mean_std(&rows.iter().map(f).collect::<Vec<_>>());
        let alpha = col(&|r| r.alpha);
        let train = col(&|r| r.train_accuracy);
        let test = col(&|r| r.test_accuracy);
        let fitness = col(&|r| r.fitness);
        let splits = col(&|r| r.active_splits as f64);
        let seconds = col(&|r| r.seconds);
        let validation = rows
            .iter()
            .map(|r| r.validation_accuracy)
            .collect::<Option<Vec<f64>>>()
            .map(|v| mean_std(&v));
        let pick = |second: bool| {
            let s = |p: (f64, f64)| if second { p.1 } else { p.0 };
            Summary {
                alpha: s(alpha),
                train_accuracy: s(train),
                validation_accuracy: validation.map(s),
                test_accuracy: s(test),
                fitness: s(fitness),
                active_splits: s(splits),
                seconds: s(seconds),
            }
        };
        (pick(false), pick(true))
    }
}

impl RunReport {
    /// Copy with every wall-time field zeroed, for reproducibility checks.
    pub fn without_timing(&self) -> Self {
        let mut r = self.clone();
        r.repetitions.iter_mut().for_each(|row| row.seconds = 0.0);
        r.mean.seconds = 0.0;
        r.std.seconds = 0.0;
        r
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per repetition, then `mean` and `std` rows. Accuracies use
    /// two decimals.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        let csv_err = |e: csv::Error| Error::Schema(format!("csv output: {e}"));
        w.write_record(CSV_HEADER).map_err(csv_err)?;
        let acc = |v: f64| format!("{v:.2}");
        let opt = |v: Option<f64>| v.map(acc).unwrap_or_default();
        for r in &self.repetitions {
            w.write_record([
                r.repetition.to_string(),
                r.seed.to_string(),
                r.alpha.to_string(),
                acc(r.train_accuracy),
                opt(r.validation_accuracy),
                acc(r.test_accuracy),
                r.fitness.to_string(),
                r.active_splits.to_string(),
                format!("{:.6}", r.seconds),
            ])
            .map_err(csv_err)?;
        }
        for (label, s) in [("mean", &self.mean), ("std", &self.std)] {
            w.write_record([
                label.to_string(),
                String::new(),
                s.alpha.to_string(),
                acc(s.train_accuracy),
                opt(s.validation_accuracy),
                acc(s.test_accuracy),
                s.fitness.to_string(),
                s.active_splits.to_string(),
                format!("{:.6}", s.seconds),
            ])
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::Schema(format!("csv output: {e}")))?;
        Ok(String::from_utf8(bytes).expect("csv writer emits utf-8"))
    }
}

const CSV_HEADER: [&str; 9] = [
    "repetition",
    "seed",
    "alpha",
    "train_accuracy",
    "validation_accuracy",
    "test_accuracy",
    "fitness",
    "active_splits",
    "seconds",
];

/// One parsed line of a CSV report; `repetition` is an index, `mean` or
/// `std`.
#[derive(Debug, Clone, PartialEq, Deserialize)]
pub struct CsvRow {
    pub repetition: String,
    pub seed: Option<u64>,
    pub alpha: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
    pub test_accuracy: f64,
    pub fitness: f64,
    pub active_splits: f64,
    pub seconds: f64,
}

pub fn parse_csv(text: &str) -> Result<Vec<CsvRow>> {
    csv::Reader::from_reader(text.as_bytes())
        .deserialize()
        .collect::<std::result::Result<_, _>>()
        .map_err(|e| Error::Schema(format!("csv report: {e}")))
}

/// Writes `report` to `path`, or to stdout when `path` is `None`.
pub fn emit_report(report: &RunReport, format: ReportFormat, path: Option<&Path>) -> Result<()> {
    let mut text = match format {
        ReportFormat::Json => report.to_json()?,
        ReportFormat::Csv => report.to_csv()?,
    };
    if !text.ends_with('\n') {
        text.push('\n');
    }
    match path {
        Some(path) => {
            let io = |source| Error::Io {
                path: path.to_path_buf(),
                source,
            };
            File::create(path).map_err(io)?.write_all(text.as_bytes()).map_err(io)
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
