use std::time::Instant;

use mhdeoct::data::split_indices;
use mhdeoct::de::run_deoct;
use mhdeoct::greedy::{best_split_misclass, cart_train_with, exact_depth2};
use mhdeoct::mh::run_mh_deoct;
use mhdeoct::rng::derive_seed;
use mhdeoct::{
    Backend, Dataset, Encoder, EvalConfig, Impurity, MhConfig, RawTable, Result, Schema, SplitSpec, ThresholdSets,
    TreeParams,
};

use crate::config::{AlphaSpec, ExperimentConfig, Method};
use crate::report::{RepetitionReport, RunReport, Summary};

/// Salts deriving per-repetition sub-seeds from `base_seed + i`.
const SPLIT_SALT: u64 = 1;
const LEARNER_SALT: u64 = 2;

pub struct Trained {
    pub tree: TreeParams,
    pub seconds: f64,
    pub histories: Vec<Vec<f64>>,
}

fn eval_config(cfg: &ExperimentConfig, alpha: f64) -> EvalConfig {
    EvalConfig {
        stride: cfg.stride,
        alpha,
        n_min: cfg.n_min,
        backend: cfg.workers.map_or(Backend::Threads(0), Backend::Threads),
    }
}

/// Fits one tree with `cfg.method`. Timing covers warm-start construction.
pub fn train(cfg: &ExperimentConfig, ds: &Dataset, th: &ThresholdSets, alpha: f64, seed: u64) -> Result<Trained> {
    let start = Instant::now();
    let eval = eval_config(cfg, alpha);
    let mut histories = Vec::new();
    let tree = match cfg.method {
        Method::Cart => cart_train_with(ds, th, cfg.depth, cfg.n_min, Impurity::Gini),
        Method::Deoct => {
            let warm: Vec<TreeParams> = if cfg.warm.cart_in_de {
                vec![cart_train_with(ds, th, cfg.depth, cfg.n_min, Impurity::Gini)]
            } else {
                Vec::new()
            };
            let result = run_deoct(ds, th, cfg.depth, &eval, &cfg.de_config(seed), &warm)?;
            histories.push(result.history);
            result.tree
        }
        Method::MhDeoct => {
            let mh = MhConfig {
                depth: cfg.depth,
                mh_depth: cfg.mh_depth,
                eval,
                de: cfg.de_config(seed),
                warm: cfg.warm,
            };
            let (tree, report) = run_mh_deoct(ds, th, &mh)?;
            histories = report.histories;
            tree
        }
        Method::OracleD1 => {
            let mut tree = TreeParams::new(1);
            if let Some(split) = best_split_misclass(ds, th) {
                let mut split_tree = TreeParams::new(1);
                split_tree.set_split(1, split.feature, split.threshold)?;
                let f = |t: &TreeParams| t.objective(ds, alpha, cfg.n_min).fitness;
                if f(&split_tree) < f(&tree) {
                    tree = split_tree;
                }
            }
            tree.with_leaf_classes(ds)
        }
        Method::OracleD2 => exact_depth2(ds, th, alpha, cfg.n_min)?,
    };
    Ok(Trained {
        tree,
        seconds: start.elapsed().as_secs_f64(),
        histories,
    })
}

struct Prepared {
    train: Dataset,
    validation: Option<Dataset>,
    test: Dataset,
}

/// Scales every part with statistics fitted on `fit_rows` only.
fn prepare(raw: &RawTable, fit_rows: &[usize], validation: Option<&[usize]>, test: &[usize]) -> Prepared {
    let encoder = Encoder::fit(&raw.select(fit_rows));
    Prepared {
        train: encoder.transform(&raw.select(fit_rows)),
        validation: validation.map(|v| encoder.transform(&raw.select(v))),
        test: encoder.transform(&raw.select(test)),
    }
}

fn load(cfg: &ExperimentConfig) -> Result<RawTable> {
    let schema = Schema::new(cfg.label_col.clone()).with_categorical(cfg.categorical.iter().cloned());
    RawTable::load_csv(&cfg.data, &schema)
}

fn plain_repetition(
    cfg: &ExperimentConfig,
    raw: &RawTable,
    i: usize,
    alpha: f64,
) -> Result<(RepetitionReport, Vec<Vec<f64>>)> {
    let seed = cfg.seed.wrapping_add(i as u64);
    let parts = split_indices(
        raw.n_rows(),
        &SplitSpec::train_test(cfg.train_fraction, derive_seed(seed, SPLIT_SALT)),
    )?;
    let data = prepare(raw, &parts.train, None, &parts.test);
    let th = ThresholdSets::build(&data.train);
    let fit = train(cfg, &data.train, &th, alpha, derive_seed(seed, LEARNER_SALT))?;
    let row = RepetitionReport {
        repetition: i,
        seed,
        alpha,
        train_accuracy: fit.tree.accuracy(&data.train),
        validation_accuracy: None,
        test_accuracy: fit.tree.accuracy(&data.test),
        fitness: fit.tree.objective(&data.train, alpha, cfg.n_min).fitness,
        active_splits: fit.tree.active_splits(),
        seconds: fit.seconds,
    };
    Ok((row, fit.histories))
}

/// Train/validation/retrain on a 50/25/25 split: every normalized penalty
/// `g` is fitted on train with `alpha = g * n_train` and scored on
/// validation; the best `g` (smallest on ties) is refitted on train plus
/// validation.
fn tuned_repetition(
    cfg: &ExperimentConfig,
    raw: &RawTable,
    i: usize,
    grid: &[f64],
) -> Result<(RepetitionReport, Vec<Vec<f64>>)> {
    let start = Instant::now();
    let seed = cfg.seed.wrapping_add(i as u64);
    let spec = SplitSpec {
        train_fraction: 0.5,
        validation_fraction: 0.25,
        seed: derive_seed(seed, SPLIT_SALT),
    };
    let parts = split_indices(raw.n_rows(), &spec)?;
    let learner_seed = derive_seed(seed, LEARNER_SALT);
    let mut histories = Vec::new();

    let data = prepare(raw, &parts.train, Some(&parts.validation), &parts.test);
    let validation = data.validation.as_ref().expect("validation part requested");
    let th = ThresholdSets::build(&data.train);
    let n_train = data.train.n_samples() as f64;
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut best = (sorted[0], f64::NEG_INFINITY);
    for &g in &sorted {
        let fit = train(cfg, &data.train, &th, g * n_train, learner_seed)?;
        histories.extend(fit.histories);
        let acc = fit.tree.accuracy(validation);
        if acc > best.1 {
            best = (g, acc);
        }
    }

    let mut refit_rows: Vec<usize> = parts.train.iter().chain(&parts.validation).copied().collect();
    refit_rows.sort_unstable();
    let data = prepare(raw, &refit_rows, None, &parts.test);
    let th = ThresholdSets::build(&data.train);
    let alpha = best.0 * data.train.n_samples() as f64;
    let fit = train(cfg, &data.train, &th, alpha, learner_seed)?;
    histories.extend(fit.histories);
    let row = RepetitionReport {
        repetition: i,
        seed,
        alpha,
        train_accuracy: fit.tree.accuracy(&data.train),
        validation_accuracy: Some(best.1),
        test_accuracy: fit.tree.accuracy(&data.test),
        fitness: fit.tree.objective(&data.train, alpha, cfg.n_min).fitness,
        active_splits: fit.tree.active_splits(),
        seconds: start.elapsed().as_secs_f64(),
    };
    Ok((row, histories))
}

fn assemble(cfg: &ExperimentConfig, rows: Vec<(RepetitionReport, Vec<Vec<f64>>)>, tuned: bool) -> RunReport {
    let (repetitions, histories): (Vec<_>, Vec<_>) = rows.into_iter().unzip();
    let (mean, std) = Summary::aggregate(&repetitions);
    RunReport {
        dataset: cfg
            .data
            .file_stem()
            .map_or_else(String::new, |s| s.to_string_lossy().into_owned()),
        method: cfg.method.name().into(),
        depth: cfg.depth,
        mh_depth: (cfg.method == Method::MhDeoct).then_some(cfg.mh_depth),
        n_min: cfg.n_min,
        mode: format!("{:?}", cfg.mode).to_lowercase(),
        tuned,
        repetitions,
        mean,
        std,
        histories: histories.into_iter().flatten().collect(),
    }
}

/// Runs `cfg.reps` repetitions; repetition `i` uses seed `cfg.seed + i`.
/// A penalty grid switches every repetition to [`tune_alpha`]'s protocol.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunReport> {
    cfg.validate()?;
    match &cfg.alpha {
        AlphaSpec::Fixed(alpha) => {
            let raw = load(cfg)?;
            let rows = (0..cfg.reps)
                .map(|i| plain_repetition(cfg, &raw, i, *alpha))
                .collect::<Result<Vec<_>>>()?;
            Ok(assemble(cfg, rows, false))
        }
        AlphaSpec::Grid(_) => tune_alpha(cfg).map(|(_, report)| report),
    }
}

/// Tuned run over `cfg.alpha`'s grid (the default 21-point grid when the
/// config holds a fixed penalty). Returns the selected penalty per
/// repetition alongside the report.
pub fn tune_alpha(cfg: &ExperimentConfig) -> Result<(Vec<f64>, RunReport)> {
    cfg.validate()?;
    let grid = match &cfg.alpha {
        AlphaSpec::Grid(g) => g.clone(),
        AlphaSpec::Fixed(_) => AlphaSpec::default_grid(),
    };
    let raw = load(cfg)?;
    let rows = (0..cfg.reps)
        .map(|i| tuned_repetition(cfg, &raw, i, &grid))
        .collect::<Result<Vec<_>>>()?;
    let report = assemble(cfg, rows, true);
    Ok((report.repetitions.iter().map(|r| r.alpha).collect(), report))
}
