//! Fixed-order parallel reductions.
//!
//! Partial sums are taken over fixed-size index blocks and then combined
//! left to right, so results are bitwise identical for any worker count.

use rayon::prelude::*;

const BLOCK: usize = 1 << 14;

pub fn sum_by<F>(n: usize, f: F) -> f64
where
    F: Fn(usize) -> f64 + Sync,
{
    let blocks = n.div_ceil(BLOCK);
    let partial: Vec<f64> = (0..blocks)
        .into_par_iter()
        .map(|b| {
            let end = ((b + 1) * BLOCK).min(n);
            (b * BLOCK..end).map(&f).sum()
        })
        .collect();
    partial.iter().sum()
}

pub fn sum(values: &[f64]) -> f64 {
    sum_by(values.len(), |i| values[i])
}
