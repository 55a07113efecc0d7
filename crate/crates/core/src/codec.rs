//! Mapping between DE individuals and trees.
//!
//! An individual for a depth-`D` tree holds `2 * SB` genes (`SB = 2^D - 1`):
//! first one feature gene per branch node in `[0, P + 1)`, then one threshold
//! gene per branch node in `[0, 1)`. The feature gene is floored to a feature
//! id; the threshold gene picks a cell of the feature's threshold set, so all
//! thresholds between the same pair of adjacent training values decode to
//! one tree.

use crate::data::ThresholdSets;
use crate::tree::{branch_count, TreeParams};

#[derive(Debug, Clone, PartialEq)]
pub struct Individual {
    pub genes: Vec<f64>,
}

/// Largest `f64` strictly below a positive `bound`.
fn below(bound: f64) -> f64 {
    debug_assert!(bound > 0.0);
    f64::from_bits(bound.to_bits() - 1)
}

impl Individual {
    pub fn new(genes: Vec<f64>) -> Self {
        Self { genes }
    }

    pub fn len_for_depth(depth: usize) -> usize {
        2 * branch_count(depth)
    }

    pub fn n_branches(&self) -> usize {
        self.genes.len() / 2
    }

    pub fn feature_genes(&self) -> &[f64] {
        &self.genes[..self.n_branches()]
    }

    pub fn threshold_genes(&self) -> &[f64] {
        &self.genes[self.n_branches()..]
    }

    /// Projects every gene into its half-open box. NaN maps to the lower
    /// bound.
    pub fn clamp(&mut self, n_features: usize) {
        let sb = self.n_branches();
        let feature_max = below((n_features + 1) as f64);
        let threshold_max = below(1.0);
        for (q, g) in self.genes.iter_mut().enumerate() {
            let hi = if q < sb { feature_max } else { threshold_max };
            *g = if g.is_nan() { 0.0 } else { g.clamp(0.0, hi) };
        }
    }

    pub fn clamped(mut self, n_features: usize) -> Self {
        self.clamp(n_features);
        self
    }

    /// Decodes a clamped individual into a tree with default leaf classes.
    pub fn decode(&self, th: &ThresholdSets) -> TreeParams {
        let sb = self.n_branches();
        let depth = (sb + 1).trailing_zeros() as usize;
        let p = th.n_features();
        let mut a = Vec::with_capacity(sb);
        let mut b = Vec::with_capacity(sb);
        for (&fa, &fb) in self.feature_genes().iter().zip(self.threshold_genes()) {
            let feature = (fa.floor().max(0.0) as usize).min(p);
            a.push(feature);
            b.push(if feature == 0 {
                0.0
            } else {
                pick_threshold(th.get(feature), fb)
            });
        }
        TreeParams::from_parts(depth, a, b, vec![1; sb + 1]).expect("gene count matches a complete tree")
    }

    /// Places every split at the centre of the gene cell that decodes to it.
    /// Thresholds missing from the set snap to the nearest member.
    pub fn encode(tree: &TreeParams, th: &ThresholdSets) -> Self {
        let sb = tree.n_branches();
        let mut genes = vec![0.0; 2 * sb];
        for t in 1..=sb {
            let feature = tree.feature(t);
            if feature == 0 {
                genes[t - 1] = 0.25;
                genes[sb + t - 1] = 0.0;
            } else {
                let set = th.get(feature);
                let i = nearest_index(set, tree.threshold(t));
                genes[t - 1] = feature as f64 + 0.5;
                genes[sb + t - 1] = (i as f64 + 0.5) / set.len() as f64;
            }
        }
        Self { genes }
    }
}

/// Threshold selected by gene `g` in a set of `n_p + 1` candidates.
fn pick_threshold(set: &[f64], g: f64) -> f64 {
    let cell = (g * set.len() as f64).floor().max(0.0) as usize;
    set[cell.min(set.len() - 1)]
}

/// 0-based index of the element of sorted `set` closest to `value`
/// (lower index on ties).
fn nearest_index(set: &[f64], value: f64) -> usize {
    let upper = set.partition_point(|&s| s < value);
    if upper == 0 {
        0
    } else if upper == set.len() {
        set.len() - 1
    } else if value - set[upper - 1] <= set[upper] - value {
        upper - 1
    } else {
        upper
    }
}

pub fn clamp(ind: &Individual, n_features: usize) -> Individual {
    ind.clone().clamped(n_features)
}

pub fn decode(ind: &Individual, th: &ThresholdSets) -> TreeParams {
    ind.decode(th)
}

pub fn encode(tree: &TreeParams, th: &ThresholdSets) -> Individual {
    Individual::encode(tree, th)
}
