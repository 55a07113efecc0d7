//! Synthetic inputs shared by the benchmarks.

use mhdeoct::{Dataset, Individual};

/// Deterministic `n × p` dataset with `k` classes and no external RNG.
pub fn synthetic(n: usize, p: usize, k: usize) -> Dataset {
    let mut state = 0x9e37_79b9_7f4a_7c15u64;
    let mut next = move || {
        state ^= state << 13;
        state ^= state >> 7;
        state ^= state << 17;
        (state >> 11) as f64 / (1u64 << 53) as f64
    };
    let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| next()).collect()).collect();
    let labels = rows
        .iter()
        .map(|r| 1 + ((r[0] * 3.0 + r[p - 1]) * k as f64) as u32 % k as u32)
        .collect();
    Dataset::new(rows, labels, k).expect("valid synthetic data")
}

/// `size` individuals with genes spread over the full box.
pub fn population(size: usize, depth: usize, p: usize) -> Vec<Individual> {
    let len = Individual::len_for_depth(depth);
    (0..size)
        .map(|r| {
            let genes = (0..len)
                .map(|q| {
                    let u = ((r * 31 + q * 17) % 97) as f64 / 97.0;
                    if q < len / 2 {
                        u * (p + 1) as f64
                    } else {
                        u
                    }
                })
                .collect();
            Individual::new(genes)
        })
        .collect()
}
