//! Batched population fitness.
//!
//! The dataset is cut into contiguous strides of `stride` samples. Each
//! stride is read once and routed through every tree of the population,
//! accumulating per-(tree, leaf, class) counts; stride results are summed
//! into one count tensor. Integer addition makes the result independent of
//! the stride length and of how strides are scheduled over workers.

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rayon::prelude::*;

use crate::codec::Individual;
use crate::data::{Dataset, ThresholdSets};
use crate::tree::{majority, violates_min_leaf, TreeParams};

pub const DEFAULT_STRIDE: usize = 32;

/// Where stride work runs. Every backend yields identical counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Backend {
    Sequential,
    /// Rayon workers; 0 uses the global pool.
    Threads(usize),
}

impl Default for Backend {
    fn default() -> Self {
        Backend::Threads(0)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalConfig {
    pub stride: usize,
    pub alpha: f64,
    pub n_min: usize,
    pub backend: Backend,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            stride: DEFAULT_STRIDE,
            alpha: 0.0,
            n_min: 1,
            backend: Backend::default(),
        }
    }
}

impl EvalConfig {
    pub fn new(alpha: f64, n_min: usize) -> Self {
        Self {
            alpha,
            n_min,
            ..Self::default()
        }
    }
}

/// Class counts of shape `(trees, leaves, classes)`, row-major.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClassCountTensor {
    pub counts: Vec<u32>,
    pub n_trees: usize,
    pub n_leaves: usize,
    pub n_classes: usize,
}

impl ClassCountTensor {
    fn zeros(n_trees: usize, n_leaves: usize, n_classes: usize) -> Self {
        Self {
            counts: vec![0; n_trees * n_leaves * n_classes],
            n_trees,
            n_leaves,
            n_classes,
        }
    }

    /// `leaves * classes` counts of tree `r`.
    pub fn slice(&self, r: usize) -> &[u32] {
        let len = self.n_leaves * self.n_classes;
        &self.counts[r * len..(r + 1) * len]
    }

    pub fn get(&self, r: usize, leaf: usize, k: usize) -> u32 {
        self.counts[(r * self.n_leaves + leaf) * self.n_classes + k]
    }

    fn add(mut self, other: &Self) -> Self {
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            *a += b;
        }
        self
    }
}

/// Flattened split arrays for the inner routing loop. Artificial nodes get
/// a `-inf` threshold on feature 0 so the comparison always goes right.
struct FlatTree {
    feature: Vec<usize>,
    threshold: Vec<f64>,
}

impl FlatTree {
    fn new(tree: &TreeParams) -> Self {
        let (feature, threshold) = tree
            .features()
            .iter()
            .zip(tree.thresholds())
            .map(|(&a, &b)| if a == 0 { (0, f64::NEG_INFINITY) } else { (a - 1, b) })
            .unzip();
        Self { feature, threshold }
    }

    #[inline]
    fn leaf(&self, x: &[f64]) -> usize {
        let sb = self.feature.len();
        let mut t = 1;
        while t <= sb {
            let go_right = x[self.feature[t - 1]] >= self.threshold[t - 1];
            t = 2 * t + go_right as usize;
        }
        t - sb - 1
    }
}

fn pool(workers: usize) -> Arc<rayon::ThreadPool> {
    static POOLS: OnceLock<Mutex<HashMap<usize, Arc<rayon::ThreadPool>>>> = OnceLock::new();
    let mut pools = POOLS.get_or_init(Default::default).lock().unwrap();
    pools
        .entry(workers)
        .or_insert_with(|| {
            Arc::new(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(workers)
                    .build()
                    .expect("thread pool"),
            )
        })
        .clone()
}

/// Counts of one stride for all trees.
fn stride_counts(trees: &[FlatTree], ds: &Dataset, range: std::ops::Range<usize>, acc: &mut ClassCountTensor) {
    let k = acc.n_classes;
    let per_tree = acc.n_leaves * k;
    for (r, tree) in trees.iter().enumerate() {
        let base = r * per_tree;
        for i in range.clone() {
            let leaf = tree.leaf(ds.row(i));
            acc.counts[base + leaf * k + ds.label(i) as usize - 1] += 1;
        }
    }
}

/// Per-(tree, leaf, class) sample counts. All trees must share one depth.
pub fn class_count_tensor(trees: &[TreeParams], ds: &Dataset, cfg: &EvalConfig) -> ClassCountTensor {
    assert!(cfg.stride >= 1, "stride must be positive");
    let n_leaves = trees.first().map_or(0, TreeParams::n_leaves);
    assert!(
        trees.iter().all(|t| t.n_leaves() == n_leaves),
        "trees in one batch must share a depth"
    );
    let flat: Vec<FlatTree> = trees.iter().map(FlatTree::new).collect();
    let n = ds.n_samples();
    let n_strides = n.div_ceil(cfg.stride);
    let zeros = || ClassCountTensor::zeros(trees.len(), n_leaves, ds.n_classes());
    let range = |j: usize| j * cfg.stride..((j + 1) * cfg.stride).min(n);

    let run = || {
        (0..n_strides)
            .into_par_iter()
            .with_min_len((n_strides / (4 * rayon::current_num_threads())).max(1))
            .fold(zeros, |mut acc, j| {
                stride_counts(&flat, ds, range(j), &mut acc);
                acc
            })
            .reduce(zeros, |a, b| a.add(&b))
    };
    match cfg.backend {
        Backend::Sequential => {
            let mut acc = zeros();
            for j in 0..n_strides {
                stride_counts(&flat, ds, range(j), &mut acc);
            }
            acc
        }
        Backend::Threads(0) => run(),
        Backend::Threads(w) => pool(w).install(run),
    }
}

/// Fitness of one tree from its `leaves * classes` count slice:
/// misclassified + alpha * active splits + undersized non-empty leaves.
pub fn fitness_from_counts(counts: &[u32], n_classes: usize, tree: &TreeParams, cfg: &EvalConfig) -> f64 {
    let mut n = 0u64;
    let mut correct = 0u64;
    let mut violations = 0u64;
    let mut leaf = vec![0u64; n_classes];
    for chunk in counts.chunks(n_classes) {
        for (dst, &c) in leaf.iter_mut().zip(chunk) {
            *dst = c as u64;
        }
        let n_t: u64 = leaf.iter().sum();
        n += n_t;
        correct += majority(&leaf).1;
        violations += violates_min_leaf(n_t, cfg.n_min) as u64;
    }
    (n - correct) as f64 + cfg.alpha * tree.active_splits() as f64 + violations as f64
}

/// Decodes every individual once and scores the batch in a single pass over
/// the dataset.
pub fn evaluate_population(pop: &[Individual], ds: &Dataset, th: &ThresholdSets, cfg: &EvalConfig) -> Vec<f64> {
    let trees: Vec<TreeParams> = pop.iter().map(|ind| ind.decode(th)).collect();
    evaluate_trees(&trees, ds, cfg)
}

pub fn evaluate_trees(trees: &[TreeParams], ds: &Dataset, cfg: &EvalConfig) -> Vec<f64> {
    let tensor = class_count_tensor(trees, ds, cfg);
    trees
        .iter()
        .enumerate()
        .map(|(r, tree)| fitness_from_counts(tensor.slice(r), tensor.n_classes, tree, cfg))
        .collect()
}
