#![allow(dead_code)]

use mhdeoct::{Dataset, ThresholdSets, TreeParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random dataset on a coarse grid so ties and duplicate values are common.
pub fn random_dataset(rng: &mut ChaCha8Rng, n: usize, p: usize, k: usize, levels: u32) -> Dataset {
    let rows = (0..n)
        .map(|_| {
            (0..p)
                .map(|_| rng.gen_range(0..=levels) as f64 / levels as f64)
                .collect()
        })
        .collect();
    let labels = (0..n).map(|_| rng.gen_range(1..=k as u32)).collect();
    Dataset::new(rows, labels, k).unwrap()
}

/// Random tree whose thresholds come from `th`, with roughly one in four
/// nodes artificial.
pub fn random_tree(rng: &mut ChaCha8Rng, depth: usize, th: &ThresholdSets) -> TreeParams {
    let mut tree = TreeParams::new(depth);
    for t in 1..=tree.n_branches() {
        if rng.gen_bool(0.75) {
            let p = rng.gen_range(1..=th.n_features());
            let set = th.get(p);
            tree.set_split(t, p, set[rng.gen_range(0..set.len())]).unwrap();
        }
    }
    tree
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
