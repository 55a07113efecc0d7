use std::path::PathBuf;

use mhdeoct::{DeConfig, DeMode, Error, Result, WarmStartPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Cart,
    Deoct,
    MhDeoct,
    OracleD1,
    OracleD2,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Cart => "cart",
            Method::Deoct => "deoct",
            Method::MhDeoct => "mh-deoct",
            Method::OracleD1 => "oracle-d1",
            Method::OracleD2 => "oracle-d2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Json,
    Csv,
}

/// Penalty selection. Grid values are normalized: the penalty used on a
/// training set of `n` samples is `g * n`.
#[derive(Debug, Clone, PartialEq)]
pub enum AlphaSpec {
    Fixed(f64),
    Grid(Vec<f64>),
}

impl AlphaSpec {
    /// 21 points spaced evenly over `[0, 0.05]`.
    pub fn default_grid() -> Vec<f64> {
        (0..=20).map(|i| i as f64 * 0.0025).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub data: PathBuf,
    pub label_col: String,
    pub categorical: Vec<String>,
    pub method: Method,
    pub depth: usize,
    pub mh_depth: usize,
    pub alpha: AlphaSpec,
    pub n_min: usize,
    pub mode: DeMode,
    pub pop: Option<usize>,
    pub gens: Option<usize>,
    pub crossover_rate: f64,
    pub warm: WarmStartPolicy,
    pub reps: usize,
    pub seed: u64,
    /// `None` uses every available core.
    pub workers: Option<usize>,
    pub stride: usize,
    pub train_fraction: f64,
}

impl ExperimentConfig {
    pub fn new(data: impl Into<PathBuf>, method: Method) -> Self {
        Self {
            data: data.into(),
            label_col: "class".into(),
            categorical: Vec::new(),
            method,
            depth: 2,
            mh_depth: 2,
            alpha: AlphaSpec::Fixed(0.0),
            n_min: 1,
            mode: DeMode::Normal,
            pop: None,
            gens: None,
            crossover_rate: mhdeoct::de::DEFAULT_CROSSOVER_RATE,
            warm: WarmStartPolicy::ALL,
            reps: 10,
            seed: 0,
            workers: None,
            stride: mhdeoct::fitness::DEFAULT_STRIDE,
            train_fraction: 0.75,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.reps < 1 {
            return fail("at least one repetition is required".into());
        }
        if self.depth < 1 {
            return fail("depth must be at least 1".into());
        }
        if self.method == Method::MhDeoct && !(1..=self.depth).contains(&self.mh_depth) {
            return fail(format!(
                "--mh-depth must lie in 1..={}, got {}",
                self.depth, self.mh_depth
            ));
        }
        let required = match self.method {
            Method::OracleD1 => Some(1),
            Method::OracleD2 => Some(2),
            _ => None,
        };
        if let Some(d) = required.filter(|&d| d != self.depth) {
            return fail(format!(
                "{} builds depth-{d} trees; got --depth {}",
                self.method.name(),
                self.depth
            ));
        }
        match &self.alpha {
            AlphaSpec::Fixed(a) if !(a.is_finite() && *a >= 0.0) => {
                return fail(format!("alpha must be >= 0, got {a}"))
            }
            AlphaSpec::Grid(g) if g.is_empty() => return fail("alpha grid is empty".into()),
            AlphaSpec::Grid(g) if g.iter().any(|a| !(a.is_finite() && *a >= 0.0)) => {
                return fail("alpha grid values must be >= 0".into())
            }
            _ => {}
        }
        if self.n_min < 1 {
            return fail("--nmin must be at least 1".into());
        }
        if self.stride < 1 {
            return fail("--stride must be at least 1".into());
        }
        if self.workers == Some(0) {
            return fail("--workers must be at least 1".into());
        }
        if !(self.train_fraction > 0.0 && self.train_fraction < 1.0) {
            return fail(format!(
                "train fraction must lie in (0, 1), got {}",
                self.train_fraction
            ));
        }
        self.de_config(0).validate()
    }

    pub fn de_config(&self, seed: u64) -> DeConfig {
        let base = DeConfig::new(self.mode, seed);
        DeConfig {
            pop_size: self.pop.unwrap_or(base.pop_size),
            generations: self.gens.unwrap_or(base.generations),
            crossover_rate: self.crossover_rate,
            seed,
        }
    }
}
