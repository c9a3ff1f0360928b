use rand::Rng;

use crate::rng;

/// Bag size for `n` items: `round(fraction * n)`, at least one.
pub fn bag_size(n: usize, fraction: f64) -> usize {
    ((fraction * n as f64).round() as usize).max(1)
}

/// `m` bootstrap samples of indices into a pool of `n` items, each of
/// [`bag_size`] draws with replacement. Bag `b` uses sub-seed `b` of `seed`.
pub fn bootstrap_indices(n: usize, fraction: f64, m: usize, seed: u64) -> Vec<Vec<usize>> {
    assert!(n > 0, "cannot bag an empty pool");
    assert!(fraction > 0.0 && fraction <= 1.0, "bag fraction must lie in (0, 1]");
    let size = bag_size(n, fraction);
    (0..m)
        .map(|b| {
            let mut rng = rng::rng_from(rng::sub_seed(seed, b as u64));
            (0..size).map(|_| rng.random_range(0..n)).collect()
        })
        .collect()
}

/// Bootstrap bags of whole items, so input/target pairing is preserved.
pub fn bootstrap_bags<T: Clone>(items: &[T], fraction: f64, m: usize, seed: u64) -> Vec<Vec<T>> {
    bootstrap_indices(items.len(), fraction, m, seed)
        .into_iter()
        .map(|bag| bag.into_iter().map(|i| items[i].clone()).collect())
        .collect()
}
