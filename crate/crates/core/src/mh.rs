//! Moving-horizon driver.
//!
//! Branch nodes are fixed one at a time in index order. Each node sees the
//! training samples routed to it by its already-fixed ancestors, optimizes a
//! shallow subtree rooted there and keeps only that subtree's root split.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::data::{path_indices, Dataset, ThresholdSets};
use crate::de::{run_deoct, DeConfig};
use crate::error::{Error, Result};
use crate::fitness::EvalConfig;
use crate::greedy::{best_split_misclass, cart_train_with, Impurity, SplitCandidate};
use crate::rng::derive_seed;
use crate::tree::{branch_count, node_depth, TreeParams};

/// Which warm starts feed the subtree solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct WarmStartPolicy {
    /// Seed the full-depth DEOCT pool run with the global CART tree.
    pub cart_in_de: bool,
    /// Harvest subtrees from one full-depth DEOCT run made before the loop.
    pub de_warm: bool,
    /// Harvest subtrees from the global CART tree and add a CART solve of
    /// each node's own subproblem.
    pub cart_warm: bool,
}

impl WarmStartPolicy {
    pub const ALL: Self = Self {
        cart_in_de: true,
        de_warm: true,
        cart_warm: true,
    };
    pub const NONE: Self = Self {
        cart_in_de: false,
        de_warm: false,
        cart_warm: false,
    };
}

impl Default for WarmStartPolicy {
    fn default() -> Self {
        Self::ALL
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MhConfig {
    pub depth: usize,
    pub mh_depth: usize,
    pub eval: EvalConfig,
    pub de: DeConfig,
    pub warm: WarmStartPolicy,
}

impl MhConfig {
    pub fn validate(&self) -> Result<()> {
        if self.mh_depth < 1 || self.mh_depth > self.depth {
            return Err(Error::Config(format!(
                "moving-horizon depth must lie in 1..={}, got {}",
                self.depth, self.mh_depth
            )));
        }
        self.de.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeSolve {
    Artificial,
    Exhaustive,
    Deoct,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeRecord {
    pub node: usize,
    pub samples: usize,
    /// Subtree depth optimized here; 0 for an artificial node.
    pub horizon: usize,
    pub solve: NodeSolve,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct MhReport {
    pub nodes: Vec<NodeRecord>,
    pub warm_start_seconds: f64,
    pub total_seconds: f64,
    /// Best-fitness history of every DEOCT run, warm-start run first.
    #[serde(skip)]
    pub histories: Vec<Vec<f64>>,
}

/// Depth of the subtree optimized at a node `node_level` levels below the
/// root.
pub fn effective_depth(mh_depth: usize, depth: usize, node_level: usize) -> usize {
    debug_assert!(node_level < depth);
    mh_depth.min(depth - node_level)
}

/// The `d`-level subtree at node `t` of every pool tree, in pool order.
pub fn harvest_warm_subtrees(pools: &[TreeParams], t: usize, d: usize) -> Result<Vec<TreeParams>> {
    pools.iter().map(|tree| tree.subtree_at(t, d)).collect()
}

/// Whether grafting `split` lowers the node's local objective below that of
/// an artificial node. With `alpha = 0` and `n_min = 1` this holds for every
/// split that reduces misclassification.
fn beats_artificial(ds: &Dataset, split: &SplitCandidate, eval: &EvalConfig) -> bool {
    let mut stump = TreeParams::new(1);
    stump
        .set_split(1, split.feature, split.threshold)
        .expect("node 1 is a branch");
    let f = |t: &TreeParams| t.objective(ds, eval.alpha, eval.n_min).fitness;
    f(&stump) < f(&TreeParams::new(1))
}

/// Builds a depth-`cfg.depth` tree node by node. Warm-start time counts
/// toward the reported total.
pub fn run_mh_deoct(ds: &Dataset, th: &ThresholdSets, cfg: &MhConfig) -> Result<(TreeParams, MhReport)> {
    cfg.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptyPartition("training set is empty".into()));
    }
    let start = Instant::now();
    let depth = cfg.depth;
    let n_min = cfg.eval.n_min;

    let mut pools = Vec::new();
    let mut histories = Vec::new();
    let cart =
        (cfg.warm.cart_warm || cfg.warm.cart_in_de).then(|| cart_train_with(ds, th, depth, n_min, Impurity::Gini));
    if cfg.warm.cart_warm {
        pools.extend(cart.clone());
    }
    if cfg.warm.de_warm {
        let seeds: Vec<TreeParams> = if cfg.warm.cart_in_de {
            cart.into_iter().collect()
        } else {
            Vec::new()
        };
        let de = cfg.de.with_seed(derive_seed(cfg.de.seed, 0));
        let result = run_deoct(ds, th, depth, &cfg.eval, &de, &seeds)?;
        pools.push(result.tree);
        histories.push(result.history);
    }
    let mut report = MhReport {
        warm_start_seconds: start.elapsed().as_secs_f64(),
        histories,
        ..MhReport::default()
    };

    let mut tree = TreeParams::new(depth);
    for t in 1..=branch_count(depth) {
        let node_start = Instant::now();
        let sub = ds.select(&path_indices(ds, &tree, t));
        let (solve, horizon) = if sub.n_samples() > n_min && sub.distinct_labels() > 1 {
            let d = effective_depth(cfg.mh_depth, depth, node_depth(t));
            if d > 1 {
                let mut warm = harvest_warm_subtrees(&pools, t, d)?;
                if cfg.warm.cart_warm {
                    warm.push(cart_train_with(&sub, th, d, n_min, Impurity::Gini));
                }
                let de = cfg.de.with_seed(derive_seed(cfg.de.seed, t as u64));
                let result = run_deoct(&sub, th, d, &cfg.eval, &de, &warm)?;
                tree.graft_first_node(t, &result.tree)?;
                report.histories.push(result.history);
                (NodeSolve::Deoct, d)
            } else if let Some(split) = best_split_misclass(&sub, th).filter(|s| beats_artificial(&sub, s, &cfg.eval)) {
                tree.set_split(t, split.feature, split.threshold)?;
                (NodeSolve::Exhaustive, 1)
            } else {
                (NodeSolve::Artificial, 0)
            }
        } else {
            (NodeSolve::Artificial, 0)
        };
        report.nodes.push(NodeRecord {
            node: t,
            samples: sub.n_samples(),
            horizon,
            solve,
            seconds: node_start.elapsed().as_secs_f64(),
        });
    }
    tree.assign_leaf_classes(ds);
    report.total_seconds = start.elapsed().as_secs_f64();
    Ok((tree, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::de::DeMode;
    use crate::fitness::Backend;

    fn toy() -> Dataset {
        Dataset::new(vec![vec![0.0], vec![0.2], vec![0.6], vec![1.0]], vec![1, 1, 2, 2], 2).unwrap()
    }

    fn small_de(seed: u64) -> DeConfig {
        DeConfig {
            pop_size: 20,
            generations: 30,
            ..DeConfig::new(DeMode::Normal, seed)
        }
    }

    fn cfg(depth: usize, mh_depth: usize, warm: WarmStartPolicy) -> MhConfig {
        MhConfig {
            depth,
            mh_depth,
            eval: EvalConfig {
                backend: Backend::Sequential,
                ..EvalConfig::new(0.0, 1)
            },
            de: small_de(7),
            warm,
        }
    }

    #[test]
    fn effective_depth_examples() {
        assert_eq!(effective_depth(2, 3, node_depth(6)), 1);
        assert_eq!(effective_depth(5, 4, 0), 4);
        assert_eq!(effective_depth(3, 8, 4), 3);
    }

    #[test]
    fn harvest_examples() {
        let ds = toy();
        let th = ThresholdSets::build(&ds);
        let cart = cart_train_with(&ds, &th, 2, 1, Impurity::Gini);
        assert_eq!(
            harvest_warm_subtrees(std::slice::from_ref(&cart), 1, 2).unwrap()[0].features(),
            cart.features()
        );
        assert!(harvest_warm_subtrees(&[], 1, 2).unwrap().is_empty());
        let mut other = TreeParams::new(2);
        other.set_split(3, 1, 0.9).unwrap();
        let both = harvest_warm_subtrees(&[cart.clone(), other], 3, 1).unwrap();
        assert_eq!(both.len(), 2);
        assert_eq!((both[0].feature(1), both[1].feature(1)), (cart.feature(3), 1));
    }

    #[test]
    fn toy_reaches_zero() {
        let ds = toy();
        let th = ThresholdSets::build(&ds);
        let (tree, report) = run_mh_deoct(&ds, &th, &cfg(2, 2, WarmStartPolicy::NONE)).unwrap();
        assert_eq!(tree.objective(&ds, 0.0, 1).fitness, 0.0);
        assert_eq!(report.nodes.len(), 3);
        assert_eq!(report.nodes[0].solve, NodeSolve::Deoct);
    }

    #[test]
    fn pure_nodes_become_artificial() {
        let ds = toy();
        let th = ThresholdSets::build(&ds);
        let (tree, report) = run_mh_deoct(&ds, &th, &cfg(2, 1, WarmStartPolicy::ALL)).unwrap();
        assert_eq!((tree.feature(1), tree.threshold(1)), (1, 0.4));
        assert_eq!((tree.feature(2), tree.feature(3)), (0, 0));
        assert!(report.nodes[1..].iter().all(|r| r.solve == NodeSolve::Artificial));
    }

    #[test]
    fn rejects_bad_horizon() {
        let ds = toy();
        let th = ThresholdSets::build(&ds);
        assert!(matches!(
            run_mh_deoct(&ds, &th, &cfg(2, 3, WarmStartPolicy::NONE)),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            run_mh_deoct(&ds, &th, &cfg(2, 0, WarmStartPolicy::NONE)),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn root_matches_single_deoct_solve() {
        let rows: Vec<Vec<f64>> = (0..40)
            .map(|i| vec![(i % 7) as f64 / 6.0, (i * 3 % 11) as f64 / 10.0])
            .collect();
        let labels: Vec<u32> = (0..40)
            .map(|i| if (i % 7) * (i * 3 % 11) > 20 { 2 } else { 1 })
            .collect();
        let ds = Dataset::new(rows, labels, 2).unwrap();
        let th = ThresholdSets::build(&ds);
        let c = cfg(2, 2, WarmStartPolicy::NONE);
        let (tree, _) = run_mh_deoct(&ds, &th, &c).unwrap();
        let direct = run_deoct(&ds, &th, 2, &c.eval, &c.de.with_seed(derive_seed(c.de.seed, 1)), &[]).unwrap();
        assert_eq!(
            (tree.feature(1), tree.threshold(1)),
            (direct.tree.feature(1), direct.tree.threshold(1))
        );
    }
}
