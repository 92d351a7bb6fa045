//! Three-way dataset splitting.
//!
//! Multi-format training assigns each example to exactly one input format;
//! this split produces the three parts. The partition is a seeded shuffle
//! dealt into near-equal parts, with any remainder going to earlier parts.

use rand::seq::SliceRandom;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::seeding;

/// Splits into three disjoint parts covering the input, sizes differing by
/// at most one. Deterministic given the seed.
pub fn split_three_way(dataset: &Dataset, seed: u64) -> Result<(Dataset, Dataset, Dataset)> {
    if dataset.is_empty() {
        return Err(Error::Data("cannot split an empty dataset".into()));
    }
    let n = dataset.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut seeding::rng(seed));

    let base = n / 3;
    let remainder = n % 3;
    let sizes = [
        base + usize::from(remainder > 0),
        base + usize::from(remainder > 1),
        base,
    ];

    let mut parts = Vec::with_capacity(3);
    let mut start = 0;
    for size in sizes {
        let examples = order[start..start + size]
            .iter()
            .map(|&i| dataset.examples[i].clone())
            .collect();
        parts.push(Dataset::new(examples, dataset.provenance)?);
        start += size;
    }
    let third = parts.pop().expect("three parts");
    let second = parts.pop().expect("three parts");
    let first = parts.pop().expect("three parts");
    Ok((first, second, third))
}
