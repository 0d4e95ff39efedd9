//! Selection helpers that break exact ties uniformly at random.
//!
//! Randomness is consumed only when the extreme itself is tied, so the
//! choice does not depend on keys that cannot win.

use crate::rng::RngStream;

/// Index of the largest key; ties resolved uniformly at random.
pub fn argmax<I>(items: I, rng: &mut RngStream) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    select(items, rng, |a, b| a > b)
}

/// Index of the smallest key; ties resolved uniformly at random.
pub fn argmin<I>(items: I, rng: &mut RngStream) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f64)>,
{
    select(items, rng, |a, b| a < b)
}

fn select<I, F>(items: I, rng: &mut RngStream, better: F) -> Option<usize>
where
    I: IntoIterator<Item = (usize, f64)>,
    F: Fn(f64, f64) -> bool,
{
    let items: Vec<(usize, f64)> = items.into_iter().collect();
    let mut best = items.first()?.1;
    let mut tied = 0usize;
    for &(_, key) in &items {
        if better(key, best) {
            best = key;
            tied = 1;
        } else if key == best {
            tied += 1;
        }
    }
    let pick = if tied > 1 { rng.below(tied) } else { 0 };
    items
        .iter()
        .filter(|(_, key)| *key == best)
        .nth(pick)
        .map(|(idx, _)| *idx)
}

/// Sorts `indices` by `key` descending, shuffling each block of equal keys.
pub fn sort_desc<F>(indices: &mut [usize], key: F, rng: &mut RngStream)
where
    F: Fn(usize) -> f64,
{
    indices.sort_by(|&a, &b| key(b).total_cmp(&key(a)).then(a.cmp(&b)));
    let mut start = 0;
    while start < indices.len() {
        let v = key(indices[start]);
        let mut end = start + 1;
        while end < indices.len() && key(indices[end]) == v {
            end += 1;
        }
        shuffle(&mut indices[start..end], rng);
        start = end;
    }
}

fn shuffle(block: &mut [usize], rng: &mut RngStream) {
    for i in (1..block.len()).rev() {
        let j = rng.below(i + 1);
        block.swap(i, j);
    }
}
