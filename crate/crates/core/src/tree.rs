//! Complete binary trees of fixed depth.
//!
//! Nodes are numbered from 1 in breadth-first order: node `t` has children
//! `2t` and `2t + 1`. A depth-`D` tree has `2^D - 1` branch nodes followed by
//! `2^D` leaves. Feature ids are 1-based; feature 0 marks an artificial node
//! that sends every sample to its right child.

use serde::{Deserialize, Serialize};

use crate::data::{Dataset, Encoder, FeatureEncoding};
use crate::error::{Error, Result};

/// Depth of node `t`, root at 0.
pub fn node_depth(t: usize) -> usize {
    debug_assert!(t >= 1);
    (usize::BITS - 1 - t.leading_zeros()) as usize
}

pub fn branch_count(depth: usize) -> usize {
    (1 << depth) - 1
}

pub fn leaf_count(depth: usize) -> usize {
    1 << depth
}

/// Majority class of a per-class count vector as `(class id, count)`;
/// ties go to the smallest id and an all-zero vector yields class 1.
pub fn majority(counts: &[u64]) -> (u32, u64) {
    let mut best = (1, 0);
    for (k, &c) in counts.iter().enumerate() {
        if c > best.1 {
            best = (k as u32 + 1, c);
        }
    }
    best
}

/// A non-empty leaf below the minimum occupancy.
pub fn violates_min_leaf(n_t: u64, n_min: usize) -> bool {
    n_t > 0 && n_t < n_min as u64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    depth: usize,
    a: Vec<usize>,
    b: Vec<f64>,
    c: Vec<u32>,
}

impl TreeParams {
    /// A tree of artificial nodes whose leaves all predict class 1.
    pub fn new(depth: usize) -> Self {
        assert!(depth >= 1, "tree depth must be at least 1");
        Self {
            depth,
            a: vec![0; branch_count(depth)],
            b: vec![0.0; branch_count(depth)],
            c: vec![1; leaf_count(depth)],
        }
    }

    pub fn from_parts(depth: usize, a: Vec<usize>, mut b: Vec<f64>, c: Vec<u32>) -> Result<Self> {
        if depth == 0 || a.len() != branch_count(depth) || b.len() != a.len() || c.len() != leaf_count(depth) {
            return Err(Error::Config(format!(
                "depth {depth} needs {} splits and {} leaves, got a={}, b={}, c={}",
                branch_count(depth),
                leaf_count(depth),
                a.len(),
                b.len(),
                c.len()
            )));
        }
        for (at, bt) in a.iter().zip(b.iter_mut()) {
            if *at == 0 {
                *bt = 0.0;
            }
        }
        Ok(Self { depth, a, b, c })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn n_branches(&self) -> usize {
        self.a.len()
    }

    pub fn n_leaves(&self) -> usize {
        self.c.len()
    }

    pub fn n_nodes(&self) -> usize {
        self.a.len() + self.c.len()
    }

    pub fn is_branch(&self, t: usize) -> bool {
        (1..=self.n_branches()).contains(&t)
    }

    /// Split feature of branch node `t` (0 when artificial).
    pub fn feature(&self, t: usize) -> usize {
        self.a[t - 1]
    }

    pub fn threshold(&self, t: usize) -> f64 {
        self.b[t - 1]
    }

    pub fn features(&self) -> &[usize] {
        &self.a
    }

    pub fn thresholds(&self) -> &[f64] {
        &self.b
    }

    pub fn leaf_classes(&self) -> &[u32] {
        &self.c
    }

    pub fn set_split(&mut self, t: usize, feature: usize, threshold: f64) -> Result<()> {
        if !self.is_branch(t) {
            return Err(Error::NodeOutOfRange {
                node: t,
                depth: 1,
                tree_depth: self.depth,
            });
        }
        self.a[t - 1] = feature;
        self.b[t - 1] = if feature == 0 { 0.0 } else { threshold };
        Ok(())
    }

    pub fn active_splits(&self) -> usize {
        self.a.iter().filter(|&&a| a >= 1).count()
    }

    /// Next node after branch `t` for sample `x`.
    #[inline]
    pub fn child(&self, t: usize, x: &[f64]) -> usize {
        let a = self.a[t - 1];
        if a != 0 && x[a - 1] < self.b[t - 1] {
            2 * t
        } else {
            2 * t + 1
        }
    }

    /// Leaf node index reached by `x`.
    pub fn route(&self, x: &[f64]) -> usize {
        let mut t = 1;
        while t <= self.n_branches() {
            t = self.child(t, x);
        }
        t
    }

    pub fn predict(&self, x: &[f64]) -> u32 {
        self.c[self.route(x) - self.n_branches() - 1]
    }

    /// Per-leaf class counts, `counts[leaf][k - 1]`.
    pub fn leaf_class_counts(&self, ds: &Dataset) -> Vec<Vec<u64>> {
        let mut counts = vec![vec![0; ds.n_classes()]; self.n_leaves()];
        for i in 0..ds.n_samples() {
            let leaf = self.route(ds.row(i)) - self.n_branches() - 1;
            counts[leaf][ds.label(i) as usize - 1] += 1;
        }
        counts
    }

    /// Labels every leaf with its majority class on `ds` and returns the
    /// per-leaf class counts used.
    pub fn assign_leaf_classes(&mut self, ds: &Dataset) -> Vec<Vec<u64>> {
        let counts = self.leaf_class_counts(ds);
        for (c, leaf) in self.c.iter_mut().zip(&counts) {
            *c = majority(leaf).0;
        }
        counts
    }

    pub fn with_leaf_classes(mut self, ds: &Dataset) -> Self {
        self.assign_leaf_classes(ds);
        self
    }

    pub fn accuracy(&self, ds: &Dataset) -> f64 {
        if ds.is_empty() {
            return 0.0;
        }
        let correct = (0..ds.n_samples())
            .filter(|&i| self.predict(ds.row(i)) == ds.label(i))
            .count();
        100.0 * correct as f64 / ds.n_samples() as f64
    }

    /// Penalized misclassification objective with leaves labelled by
    /// majority vote (the stored leaf classes are not consulted).
    pub fn objective(&self, ds: &Dataset, alpha: f64, n_min: usize) -> ObjectiveReport {
        ObjectiveReport::from_counts(self.leaf_class_counts(ds), self.active_splits(), alpha, n_min)
    }

    /// The `d`-level subtree rooted at branch node `t`, re-indexed so `t`
    /// becomes node 1. Leaf classes are copied where the subtree's leaves are
    /// leaves of `self`, otherwise default to 1.
    pub fn subtree_at(&self, t: usize, d: usize) -> Result<Self> {
        if t == 0 || !self.is_branch(t) || d == 0 || node_depth(t) + d > self.depth {
            return Err(Error::NodeOutOfRange {
                node: t,
                depth: d,
                tree_depth: self.depth,
            });
        }
        let mut sub = Self::new(d);
        let sub_branches = sub.n_branches();
        for j in 1..=sub.n_nodes() {
            let level = node_depth(j);
            let original = (t << level) + (j - (1 << level));
            if j <= sub_branches {
                sub.a[j - 1] = self.a[original - 1];
                sub.b[j - 1] = self.b[original - 1];
            } else if original > self.n_branches() {
                sub.c[j - sub_branches - 1] = self.c[original - self.n_branches() - 1];
            }
        }
        Ok(sub)
    }

    /// Copies the root split of `sub` into branch node `t`.
    pub fn graft_first_node(&mut self, t: usize, sub: &Self) -> Result<()> {
        self.set_split(t, sub.feature(1), sub.threshold(1))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveReport {
    pub misclassified: u64,
    pub active_splits: usize,
    pub violations: usize,
    pub leaf_counts: Vec<u64>,
    pub class_counts: Vec<Vec<u64>>,
    pub fitness: f64,
}

impl ObjectiveReport {
    pub fn from_counts(class_counts: Vec<Vec<u64>>, active_splits: usize, alpha: f64, n_min: usize) -> Self {
        let leaf_counts: Vec<u64> = class_counts.iter().map(|c| c.iter().sum()).collect();
        let n: u64 = leaf_counts.iter().sum();
        let correct: u64 = class_counts.iter().map(|c| majority(c).1).sum();
        let violations = leaf_counts.iter().filter(|&&n_t| violates_min_leaf(n_t, n_min)).count();
        let misclassified = n - correct;
        Self {
            misclassified,
            active_splits,
            violations,
            leaf_counts,
            class_counts,
            fitness: misclassified as f64 + alpha * active_splits as f64 + violations as f64,
        }
    }
}

/// Serialized model: the tree plus everything needed to score raw rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelArtifact {
    pub depth: usize,
    pub a: Vec<usize>,
    pub b: Vec<f64>,
    pub c: Vec<u32>,
    pub class_dictionary: Vec<String>,
    pub scaling_stats: Vec<FeatureEncoding>,
}

impl ModelArtifact {
    pub fn new(tree: &TreeParams, encoder: &Encoder) -> Self {
        Self {
            depth: tree.depth,
            a: tree.a.clone(),
            b: tree.b.clone(),
            c: tree.c.clone(),
            class_dictionary: encoder.classes.clone(),
            scaling_stats: encoder.features.clone(),
        }
    }

    pub fn tree(&self) -> Result<TreeParams> {
        TreeParams::from_parts(self.depth, self.a.clone(), self.b.clone(), self.c.clone())
    }

    pub fn encoder(&self) -> Encoder {
        Encoder {
            features: self.scaling_stats.clone(),
            classes: self.class_dictionary.clone(),
        }
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}
