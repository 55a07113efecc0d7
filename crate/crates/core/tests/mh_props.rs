mod common;

use common::{random_dataset, rng};
use mhdeoct::de::run_deoct;
use mhdeoct::greedy::{cart_train, cart_train_with, exact_depth2, naive_fitness_oracle};
use mhdeoct::mh::run_mh_deoct;
use mhdeoct::rng::derive_seed;
use mhdeoct::{Backend, DeConfig, DeMode, EvalConfig, Impurity, MhConfig, ThresholdSets, WarmStartPolicy};

fn config(depth: usize, mh_depth: usize, warm: WarmStartPolicy, seed: u64) -> MhConfig {
    MhConfig {
        depth,
        mh_depth,
        eval: EvalConfig::new(0.0, 1),
        de: DeConfig {
            pop_size: 30,
            generations: 60,
            ..DeConfig::new(DeMode::Normal, seed)
        },
        warm,
    }
}

#[test]
fn unit_horizon_equals_misclassification_cart() {
    let mut rng = rng(31);
    for case in 0..5 {
        let ds = random_dataset(&mut rng, 60 + 10 * case, 3, 2 + case % 3, 10);
        let th = ThresholdSets::build(&ds);
        let (mh, _) = run_mh_deoct(&ds, &th, &config(3, 1, WarmStartPolicy::ALL, 1)).unwrap();
        assert_eq!(mh, cart_train(&ds, 3, 1, Impurity::Misclassification), "case {case}");
    }
}

#[test]
fn unit_horizon_never_grafts_a_losing_split() {
    let mut rng = rng(35);
    for case in 0..6 {
        let ds = random_dataset(&mut rng, 50, 3, 2, 10);
        let th = ThresholdSets::build(&ds);
        let mut cfg = config(3, 1, WarmStartPolicy::NONE, 1);
        cfg.eval.n_min = 4 + case;
        cfg.eval.alpha = [0.0, 1.0, 2.5][case % 3];
        let (mh, _) = run_mh_deoct(&ds, &th, &cfg).unwrap();
        for t in 1..=mh.n_branches() {
            if mh.feature(t) == 0 {
                continue;
            }
            // Re-score the node's stump against an artificial node on the
            // samples that reach it.
            let sub = ds.select(&mhdeoct::data::path_indices(&ds, &mh, t));
            let mut stump = mhdeoct::TreeParams::new(1);
            stump.set_split(1, mh.feature(t), mh.threshold(t)).unwrap();
            let f = |tr: &mhdeoct::TreeParams| naive_fitness_oracle(tr, &sub, cfg.eval.alpha, cfg.eval.n_min);
            assert!(f(&stump) < f(&mhdeoct::TreeParams::new(1)), "case {case} node {t}");
        }
    }
}

#[test]
fn depth2_lies_between_exact_and_cart() {
    let mut rng = rng(32);
    for case in 0..8 {
        let ds = random_dataset(&mut rng, 30 + 5 * case as usize, 2, 2, 6);
        let th = ThresholdSets::build(&ds);
        let (mh, _) = run_mh_deoct(&ds, &th, &config(2, 2, WarmStartPolicy::ALL, case)).unwrap();
        let f = |t: &mhdeoct::TreeParams| naive_fitness_oracle(t, &ds, 0.0, 1);
        let exact = f(&exact_depth2(&ds, &th, 0.0, 1).unwrap());
        let cart = f(&cart_train(&ds, 2, 1, Impurity::Gini));
        assert!(
            exact <= f(&mh) && f(&mh) <= cart,
            "case {case}: {exact} {} {cart}",
            f(&mh)
        );
    }
}

#[test]
fn root_solve_dominates_cart_warm_start() {
    let mut rng = rng(33);
    for case in 0..5 {
        let ds = random_dataset(&mut rng, 90, 4, 3, 12);
        let th = ThresholdSets::build(&ds);
        let cfg = config(
            3,
            3,
            WarmStartPolicy {
                cart_in_de: false,
                de_warm: false,
                cart_warm: true,
            },
            case,
        );
        let (mh, _) = run_mh_deoct(&ds, &th, &cfg).unwrap();
        // Replays the root solve: global CART subtree plus the local CART
        // solve, which coincide at the root.
        let cart = cart_train_with(&ds, &th, 3, 1, Impurity::Gini);
        let de = cfg.de.with_seed(derive_seed(cfg.de.seed, 1));
        let root = run_deoct(&ds, &th, 3, &cfg.eval, &de, &[cart.clone(), cart.clone()]).unwrap();
        assert!(root.fitness <= naive_fitness_oracle(&cart, &ds, 0.0, 1), "case {case}");
        assert_eq!(
            (mh.feature(1), mh.threshold(1)),
            (root.tree.feature(1), root.tree.threshold(1))
        );
    }
}

#[test]
fn output_is_complete_and_deterministic() {
    let mut rng = rng(34);
    let ds = random_dataset(&mut rng, 120, 3, 3, 15);
    let th = ThresholdSets::build(&ds);
    let mut cfg = config(4, 2, WarmStartPolicy::ALL, 9);
    let (a, report) = run_mh_deoct(&ds, &th, &cfg).unwrap();
    cfg.eval.backend = Backend::Sequential;
    let (b, _) = run_mh_deoct(&ds, &th, &cfg).unwrap();
    assert_eq!(a, b);
    assert_eq!(report.nodes.len(), a.n_branches());
    assert!(report.total_seconds >= report.warm_start_seconds);
    for i in 0..ds.n_samples() {
        let class = a.predict(ds.row(i));
        assert!((1..=3).contains(&class));
    }
}
