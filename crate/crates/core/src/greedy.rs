//! Greedy and exhaustive tree builders plus the naive fitness oracle.
//!
//! Everything here shares one sweep engine: samples of a node are kept in
//! per-feature sorted order, and a single pass over a feature's threshold
//! set moves samples from the right child's class counts to the left's.
//! Only the first threshold of each distinct partition is scored, which is
//! also the lowest threshold producing it, so ties resolve to the lower
//! feature and then the lower threshold.

use crate::data::{Dataset, ThresholdSets};
use crate::error::{Error, Result};
use crate::tree::{branch_count, majority, violates_min_leaf, TreeParams};

/// Candidate budget for [`exact_depth2`], in total threshold-set entries.
pub const EXACT_DEPTH2_BUDGET: usize = 5000;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitCandidate {
    pub feature: usize,
    pub threshold: f64,
    pub loss: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Impurity {
    #[default]
    Gini,
    Misclassification,
}

/// Sample indices sorted by each feature, ties in index order.
#[derive(Debug, Clone)]
pub struct SortedSamples {
    orders: Vec<Vec<usize>>,
}

impl SortedSamples {
    pub fn new(ds: &Dataset) -> Self {
        let all: Vec<usize> = (0..ds.n_samples()).collect();
        Self::for_subset(ds, &all)
    }

    fn for_subset(ds: &Dataset, samples: &[usize]) -> Self {
        let orders = (1..=ds.n_features())
            .map(|p| {
                let mut order = samples.to_vec();
                order.sort_by(|&i, &j| ds.value(i, p).total_cmp(&ds.value(j, p)).then(i.cmp(&j)));
                order
            })
            .collect();
        Self { orders }
    }

    /// Keeps only samples with `mask[i]`, preserving sorted order.
    fn filter(&self, mask: &[bool]) -> Self {
        Self {
            orders: self
                .orders
                .iter()
                .map(|o| o.iter().copied().filter(|&i| mask[i]).collect())
                .collect(),
        }
    }

    fn len(&self) -> usize {
        self.orders.first().map_or(0, Vec::len)
    }

    fn samples(&self) -> &[usize] {
        self.orders.first().map_or(&[], Vec::as_slice)
    }
}

fn class_counts(ds: &Dataset, samples: &[usize]) -> Vec<u64> {
    let mut counts = vec![0; ds.n_classes()];
    for &i in samples {
        counts[ds.label(i) as usize - 1] += 1;
    }
    counts
}

fn misclassified(counts: &[u64]) -> u64 {
    counts.iter().sum::<u64>() - majority(counts).1
}

fn gini_mass(counts: &[u64]) -> f64 {
    let n: u64 = counts.iter().sum();
    if n == 0 {
        return 0.0;
    }
    let sq: f64 = counts.iter().map(|&c| (c * c) as f64).sum();
    n as f64 - sq / n as f64
}

/// Calls `visit(feature, threshold, left, right)` once per distinct
/// partition of the node's samples, lowest threshold first.
fn sweep(
    ds: &Dataset,
    sorted: &SortedSamples,
    th: &ThresholdSets,
    total: &[u64],
    mut visit: impl FnMut(usize, f64, &[u64], &[u64]),
) {
    let mut left = vec![0u64; total.len()];
    let mut right = total.to_vec();
    for (p, order) in (1..).zip(&sorted.orders) {
        left.iter_mut().for_each(|c| *c = 0);
        right.copy_from_slice(total);
        let mut moved = 0;
        let mut last_moved = usize::MAX;
        for &beta in th.get(p) {
            while moved < order.len() && ds.value(order[moved], p) < beta {
                let k = ds.label(order[moved]) as usize - 1;
                left[k] += 1;
                right[k] -= 1;
                moved += 1;
            }
            if moved != last_moved {
                last_moved = moved;
                visit(p, beta, &left, &right);
            }
        }
    }
}

/// Exhaustive depth-1 search under 0-1 loss with majority-labelled
/// children. `None` when no split beats labelling the whole node with its
/// majority class.
pub fn best_split_misclass(ds: &Dataset, th: &ThresholdSets) -> Option<SplitCandidate> {
    let sorted = SortedSamples::new(ds);
    best_split_sorted(ds, &sorted, th)
}

fn best_split_sorted(ds: &Dataset, sorted: &SortedSamples, th: &ThresholdSets) -> Option<SplitCandidate> {
    let total = class_counts(ds, sorted.samples());
    let baseline = misclassified(&total);
    let mut best: Option<SplitCandidate> = None;
    sweep(ds, sorted, th, &total, |feature, threshold, l, r| {
        let loss = misclassified(l) + misclassified(r);
        if loss < best.map_or(baseline, |b| b.loss) {
            best = Some(SplitCandidate {
                feature,
                threshold,
                loss,
            });
        }
    });
    best
}

/// Best depth-1 subtree for one node under the penalized objective:
/// `(split, cost)` where `None` is the artificial node.
fn best_stump(
    ds: &Dataset,
    sorted: &SortedSamples,
    th: &ThresholdSets,
    alpha: f64,
    n_min: usize,
) -> (Option<(usize, f64)>, f64) {
    let leaf_cost = |c: &[u64]| misclassified(c) as f64 + violates_min_leaf(c.iter().sum(), n_min) as u64 as f64;
    let total = class_counts(ds, sorted.samples());
    let mut best = (None, leaf_cost(&total));
    if sorted.len() == 0 {
        return best;
    }
    sweep(ds, sorted, th, &total, |feature, threshold, l, r| {
        let cost = alpha + leaf_cost(l) + leaf_cost(r);
        if cost < best.1 {
            best = (Some((feature, threshold)), cost);
        }
    });
    best
}

/// Global optimum of the penalized objective over all depth-2 trees whose
/// thresholds come from `th`. Root-split ties prefer no split, then lower
/// feature and threshold.
pub fn exact_depth2(ds: &Dataset, th: &ThresholdSets, alpha: f64, n_min: usize) -> Result<TreeParams> {
    let size = th.total_len();
    if size > EXACT_DEPTH2_BUDGET {
        return Err(Error::Budget(format!(
            "exact depth-2 search needs total threshold-set size <= {EXACT_DEPTH2_BUDGET}, got {size}"
        )));
    }
    let sorted = SortedSamples::new(ds);
    let total = class_counts(ds, sorted.samples());

    // Root artificial: every sample reaches node 3.
    let (stump, mut best_cost) = best_stump(ds, &sorted, th, alpha, n_min);
    let mut best = (None, None, stump);

    let mut roots = Vec::new();
    sweep(ds, &sorted, th, &total, |p, beta, _, _| roots.push((p, beta)));
    let mut mask = vec![false; ds.n_samples()];
    for (p, beta) in roots {
        for &i in sorted.samples() {
            mask[i] = ds.value(i, p) < beta;
        }
        let left = sorted.filter(&mask);
        mask.iter_mut().for_each(|m| *m = !*m);
        let right = sorted.filter(&mask);
        let (ls, lc) = best_stump(ds, &left, th, alpha, n_min);
        if alpha + lc >= best_cost {
            continue;
        }
        let (rs, rc) = best_stump(ds, &right, th, alpha, n_min);
        let cost = alpha + lc + rc;
        if cost < best_cost {
            best_cost = cost;
            best = (Some((p, beta)), ls, rs);
        }
    }

    let mut tree = TreeParams::new(2);
    for (t, split) in [(1, best.0), (2, best.1), (3, best.2)] {
        if let Some((p, beta)) = split {
            tree.set_split(t, p, beta)?;
        }
    }
    Ok(tree.with_leaf_classes(ds))
}

/// Greedy top-down induction with thresholds drawn from the dataset's own
/// threshold sets.
pub fn cart_train(ds: &Dataset, depth: usize, n_min: usize, impurity: Impurity) -> TreeParams {
    cart_train_with(ds, &ThresholdSets::build(ds), depth, n_min, impurity)
}

/// Greedy induction with explicit candidate thresholds. A node becomes
/// artificial when it holds at most `n_min` samples, is label-pure, or has no
/// split that strictly lowers impurity.
pub fn cart_train_with(ds: &Dataset, th: &ThresholdSets, depth: usize, n_min: usize, impurity: Impurity) -> TreeParams {
    let mut tree = TreeParams::new(depth);
    let sb = branch_count(depth);
    let mut node_sets: Vec<Option<SortedSamples>> = vec![None; sb + 1];
    node_sets[1] = Some(SortedSamples::new(ds));
    let mut mask = vec![false; ds.n_samples()];

    for t in 1..=sb {
        let sorted = node_sets[t].take().expect("parents visited first");
        let total = class_counts(ds, sorted.samples());
        let pure = total.iter().filter(|&&c| c > 0).count() <= 1;
        let split = if sorted.len() <= n_min || pure {
            None
        } else {
            match impurity {
                Impurity::Misclassification => best_split_sorted(ds, &sorted, th).map(|c| (c.feature, c.threshold)),
                Impurity::Gini => best_gini_split(ds, &sorted, th, &total),
            }
        };

        let (left, right) = match split {
            Some((p, beta)) => {
                tree.set_split(t, p, beta).expect("t is a branch node");
                for &i in sorted.samples() {
                    mask[i] = ds.value(i, p) < beta;
                }
                let left = sorted.filter(&mask);
                mask.iter_mut().for_each(|m| *m = !*m);
                (left, sorted.filter(&mask))
            }
            None => (
                SortedSamples {
                    orders: vec![Vec::new(); ds.n_features()],
                },
                sorted,
            ),
        };
        if 2 * t <= sb {
            node_sets[2 * t] = Some(left);
            node_sets[2 * t + 1] = Some(right);
        }
    }
    tree.with_leaf_classes(ds)
}

fn best_gini_split(ds: &Dataset, sorted: &SortedSamples, th: &ThresholdSets, total: &[u64]) -> Option<(usize, f64)> {
    const TOL: f64 = 1e-9;
    let parent = gini_mass(total);
    let mut best: Option<(usize, f64)> = None;
    let mut best_mass = parent - TOL;
    sweep(ds, sorted, th, total, |p, beta, l, r| {
        let mass = gini_mass(l) + gini_mass(r);
        if mass < best_mass - TOL || (best.is_none() && mass < best_mass) {
            best_mass = mass;
            best = Some((p, beta));
        }
    });
    best
}

/// Reference fitness: routes each sample on its own, tallies leaf counts
/// and applies the penalized objective. Kept free of any batching so it can
/// check the batched evaluator.
pub fn naive_fitness_oracle(tree: &TreeParams, ds: &Dataset, alpha: f64, n_min: usize) -> f64 {
    let sb = tree.n_branches();
    let mut counts = vec![vec![0u64; ds.n_classes()]; sb + 1];
    for i in 0..ds.n_samples() {
        let x = ds.row(i);
        let mut t = 1;
        while t <= sb {
            let a = tree.feature(t);
            t = if a >= 1 && x[a - 1] < tree.threshold(t) {
                2 * t
            } else {
                2 * t + 1
            };
        }
        counts[t - sb - 1][ds.label(i) as usize - 1] += 1;
    }
    let mut loss = 0u64;
    let mut violations = 0u64;
    for leaf in &counts {
        let n_t: u64 = leaf.iter().sum();
        let best = leaf.iter().copied().max().unwrap_or(0);
        loss += n_t - best;
        if n_t != 0 && n_t < n_min as u64 {
            violations += 1;
        }
    }
    let splits = tree.features().iter().filter(|&&a| a != 0).count();
    loss as f64 + alpha * splits as f64 + violations as f64
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> Dataset {
        Dataset::new(vec![vec![0.0], vec![0.2], vec![0.6], vec![1.0]], vec![1, 1, 2, 2], 2).unwrap()
    }

    fn xor() -> Dataset {
        Dataset::new(
            vec![vec![0.0, 0.0], vec![0.0, 1.0], vec![1.0, 0.0], vec![1.0, 1.0]],
            vec![1, 2, 2, 1],
            2,
        )
        .unwrap()
    }

    #[test]
    fn toy_best_split() {
        let ds = toy();
        let c = best_split_misclass(&ds, &ThresholdSets::build(&ds)).unwrap();
        assert_eq!((c.feature, c.threshold, c.loss), (1, 0.4, 0));
    }

    #[test]
    fn no_split_cases() {
        let pure = Dataset::new(vec![vec![0.0], vec![1.0]], vec![2, 2], 2).unwrap();
        assert!(best_split_misclass(&pure, &ThresholdSets::build(&pure)).is_none());
        let flat = Dataset::new(vec![vec![0.0, 0.0]; 4], vec![1, 2, 1, 2], 2).unwrap();
        assert!(best_split_misclass(&flat, &ThresholdSets::build(&flat)).is_none());
    }

    #[test]
    fn xor_needs_depth_two() {
        let ds = xor();
        // Each axis split leaves a 1-1 tie on both sides, no better than
        // the majority label.
        let d1 = cart_train(&ds, 1, 1, Impurity::Misclassification);
        assert_eq!(d1.objective(&ds, 0.0, 1).misclassified, 2);
        let d2 = exact_depth2(&ds, &ThresholdSets::build(&ds), 0.0, 1).unwrap();
        assert_eq!(d2.objective(&ds, 0.0, 1).misclassified, 0);
    }

    #[test]
    fn separable_cart_is_perfect() {
        let ds = toy();
        for imp in [Impurity::Gini, Impurity::Misclassification] {
            let t = cart_train(&ds, 1, 1, imp);
            assert_eq!(t.accuracy(&ds), 100.0);
            assert_eq!((t.feature(1), t.threshold(1)), (1, 0.4));
        }
        let deep = cart_train(&ds, 3, 1, Impurity::Gini);
        assert_eq!(deep.active_splits(), 1);
    }

    #[test]
    fn cart_gates() {
        let ds = toy();
        assert_eq!(cart_train(&ds, 2, 4, Impurity::Gini).active_splits(), 0);
        let pure = Dataset::new(vec![vec![0.0], vec![1.0]], vec![2, 2], 2).unwrap();
        let t = cart_train(&pure, 2, 1, Impurity::Gini);
        assert_eq!(t.active_splits(), 0);
        assert_eq!(t.accuracy(&pure), 100.0);
    }

    #[test]
    fn oracle_examples() {
        let ds = toy();
        let mut t = TreeParams::new(1);
        assert_eq!(naive_fitness_oracle(&t, &ds, 0.0, 1), 2.0);
        t.set_split(1, 1, 0.4).unwrap();
        assert_eq!(naive_fitness_oracle(&t, &ds, 0.0, 1), 0.0);
        assert_eq!(naive_fitness_oracle(&t, &ds, 2.5, 3), 4.5);
    }

    #[test]
    fn exact_depth2_respects_alpha() {
        let ds = xor();
        let th = ThresholdSets::build(&ds);
        let t = exact_depth2(&ds, &th, 10.0, 1).unwrap();
        assert_eq!(t.active_splits(), 0);
        assert_eq!(t.objective(&ds, 10.0, 1).fitness, 2.0);
    }

    #[test]
    fn exact_depth2_budget() {
        let rows: Vec<Vec<f64>> = (0..3000)
            .map(|i| vec![i as f64 / 2999.0, (i * 7 % 3000) as f64 / 2999.0])
            .collect();
        let ds = Dataset::new(rows, vec![1; 3000], 1).unwrap();
        let err = exact_depth2(&ds, &ThresholdSets::build(&ds), 0.0, 1).unwrap_err();
        assert!(matches!(err, Error::Budget(ref m) if m.contains("5000")));
    }
}
