mod common;

use common::{random_dataset, random_tree, rng};
use mhdeoct::greedy::{best_split_misclass, cart_train, exact_depth2, naive_fitness_oracle};
use mhdeoct::{Dataset, Impurity, ThresholdSets, TreeParams};

/// Direct count of misclassified samples for every (feature, threshold).
fn brute_best_split(ds: &Dataset, th: &ThresholdSets) -> Option<(usize, f64, u64)> {
    let errors = |side: &[u32]| -> u64 {
        let mut counts = vec![0u64; ds.n_classes()];
        side.iter().for_each(|&y| counts[y as usize - 1] += 1);
        side.len() as u64 - counts.iter().max().copied().unwrap_or(0)
    };
    let baseline = errors(ds.labels());
    let mut best: Option<(usize, f64, u64)> = None;
    for p in 1..=ds.n_features() {
        for &beta in th.get(p) {
            let (l, r): (Vec<usize>, Vec<usize>) = (0..ds.n_samples()).partition(|&i| ds.value(i, p) < beta);
            let ly: Vec<u32> = l.iter().map(|&i| ds.label(i)).collect();
            let ry: Vec<u32> = r.iter().map(|&i| ds.label(i)).collect();
            let loss = errors(&ly) + errors(&ry);
            if loss < best.map_or(baseline, |b| b.2) {
                best = Some((p, beta, loss));
            }
        }
    }
    best
}

/// Every depth-2 tree over `th`, for tiny inputs only.
fn all_depth2_trees(th: &ThresholdSets) -> Vec<TreeParams> {
    let mut options = vec![(0, 0.0)];
    for p in 1..=th.n_features() {
        options.extend(th.get(p).iter().map(|&b| (p, b)));
    }
    let mut trees = Vec::new();
    for &r in &options {
        for &l in &options {
            for &rr in &options {
                let mut t = TreeParams::new(2);
                for (node, (a, b)) in [(1, r), (2, l), (3, rr)] {
                    if a != 0 {
                        t.set_split(node, a, b).unwrap();
                    }
                }
                trees.push(t);
            }
        }
    }
    trees
}

#[test]
fn best_split_matches_brute_force() {
    let mut rng = rng(11);
    for case in 0..50 {
        let ds = random_dataset(&mut rng, 10 + case, 1 + case % 4, 2 + case % 3, 6);
        let th = ThresholdSets::build(&ds);
        let fast = best_split_misclass(&ds, &th).map(|c| (c.feature, c.threshold, c.loss));
        assert_eq!(fast, brute_best_split(&ds, &th), "case {case}");
    }
}

#[test]
fn exact_depth2_matches_enumeration() {
    let mut rng = rng(12);
    for case in 0..12 {
        let ds = random_dataset(&mut rng, 8 + case, 2, 2 + case % 2, 4);
        let th = ThresholdSets::build(&ds);
        let (alpha, n_min) = [(0.0, 1), (0.5, 1), (0.0, 3), (1.5, 2)][case % 4];
        let exact = exact_depth2(&ds, &th, alpha, n_min).unwrap();
        let best = all_depth2_trees(&th)
            .iter()
            .map(|t| naive_fitness_oracle(t, &ds, alpha, n_min))
            .fold(f64::INFINITY, f64::min);
        assert_eq!(naive_fitness_oracle(&exact, &ds, alpha, n_min), best, "case {case}");
    }
}

#[test]
fn exact_depth2_beats_random_trees() {
    let mut rng = rng(13);
    let ds = random_dataset(&mut rng, 60, 3, 3, 10);
    let th = ThresholdSets::build(&ds);
    let exact = naive_fitness_oracle(&exact_depth2(&ds, &th, 0.0, 1).unwrap(), &ds, 0.0, 1);
    for _ in 0..10_000 {
        let t = random_tree(&mut rng, 2, &th);
        assert!(exact <= naive_fitness_oracle(&t, &ds, 0.0, 1));
    }
}

#[test]
fn exact_and_greedy_ordering() {
    let mut rng = rng(14);
    for case in 0..20 {
        let ds = random_dataset(&mut rng, 40, 3, 2 + case % 3, 8);
        let th = ThresholdSets::build(&ds);
        let f = |t: &TreeParams| naive_fitness_oracle(t, &ds, 0.0, 1);
        let exact = f(&exact_depth2(&ds, &th, 0.0, 1).unwrap());
        for imp in [Impurity::Gini, Impurity::Misclassification] {
            let d1 = f(&cart_train(&ds, 1, 1, imp));
            let d2 = f(&cart_train(&ds, 2, 1, imp));
            assert!(exact <= d2 && d2 <= d1, "case {case}: {exact} {d2} {d1}");
        }
    }
}

#[test]
fn cart_error_is_monotone_in_depth() {
    let mut rng = rng(15);
    for case in 0..10 {
        let ds = random_dataset(&mut rng, 80, 4, 3, 12);
        let errors: Vec<u64> = (1..=5)
            .map(|d| {
                cart_train(&ds, d, 1, Impurity::Gini)
                    .objective(&ds, 0.0, 1)
                    .misclassified
            })
            .collect();
        assert!(errors.windows(2).all(|w| w[1] <= w[0]), "case {case}: {errors:?}");
    }
}

#[test]
fn cart_respects_min_samples_gate() {
    let mut rng = rng(16);
    let ds = random_dataset(&mut rng, 100, 3, 2, 20);
    let tree = cart_train(&ds, 4, 10, Impurity::Gini);
    let counts = tree.leaf_class_counts(&ds);
    // A split only happens above the gate, so any split parent held > 10.
    for t in 1..=tree.n_branches() {
        if tree.feature(t) != 0 {
            let n: u64 = mhdeoct::data::path_indices(&ds, &tree, t).len() as u64;
            assert!(n > 10);
        }
    }
    assert_eq!(counts.iter().flatten().sum::<u64>(), 100);
}
