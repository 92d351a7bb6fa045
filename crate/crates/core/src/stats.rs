//! Small shared statistics helpers: average-tie ranks and z-scoring.
//!
//! Both the score-normalization pipeline and the correlation metrics rank
//! with average ties, so the ranking lives here and is written once.

/// Ascending 0-based ranks with ties assigned the average of the positions
/// they occupy. `[0.2, 0.9, 0.5]` ranks to `[0.0, 2.0, 1.0]`;
/// `[1.0, 1.0, 2.0]` ranks to `[0.5, 0.5, 2.0]`.
///
/// All values must be finite (callers validate; comparison is total on
/// finite floats).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).expect("finite values"));

    let mut ranks = vec![0.0; n];
    let mut i = 0;
    while i < n {
        let mut j = i;
        while j + 1 < n && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0;
        for &idx in &order[i..=j] {
            ranks[idx] = avg;
        }
        i = j + 1;
    }
    ranks
}

pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Population (N-denominator) standard deviation.
pub fn population_std(values: &[f64]) -> f64 {
    let m = mean(values);
    (values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / values.len() as f64).sqrt()
}

/// Z-scores with population standard deviation. An all-equal input has zero
/// spread and maps to all zeros rather than dividing by zero.
pub fn z_scores(values: &[f64]) -> Vec<f64> {
    let m = mean(values);
    let s = population_std(values);
    if s == 0.0 {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - m) / s).collect()
}
