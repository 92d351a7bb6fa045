//! Ranking-based score normalization.
//!
//! Raw scores from different scorers and translation directions live on
//! incompatible scales. Replacing scores by their rank indexes and z-scoring
//! the ranks makes them comparable: the result depends only on the ordering,
//! so any strictly increasing rescaling of the inputs is invisible.

use crate::corpus::Dataset;
use crate::datagen::ScoreMatrix;
use crate::error::{Error, Result};
use crate::stats::{average_ranks, z_scores};

/// Ascending average-tie ranks, z-scored with the population standard
/// deviation. An all-equal input maps to all zeros.
pub fn rank_z_normalize(scores: &[f64]) -> Result<Vec<f64>> {
    if scores.len() < 2 {
        return Err(Error::Data(format!(
            "rank normalization needs at least 2 scores, got {}",
            scores.len()
        )));
    }
    if let Some(v) = scores.iter().find(|v| !v.is_finite()) {
        return Err(Error::Numeric(format!(
            "cannot rank-normalize non-finite score {v}"
        )));
    }
    Ok(z_scores(&average_ranks(scores)))
}

/// Collapses a score matrix to one score per example: each scorer's column
/// is rank-z normalized, then columns are averaged per example.
pub fn aggregate(matrix: &ScoreMatrix) -> Result<Vec<f64>> {
    let n = matrix.n_examples();
    let m = matrix.n_scorers();
    let mut normalized = Vec::with_capacity(m);
    for j in 0..m {
        normalized.push(rank_z_normalize(&matrix.column(j))?);
    }
    Ok((0..n)
        .map(|i| normalized.iter().map(|col| col[i]).sum::<f64>() / m as f64)
        .collect())
}

/// Replaces every score by its rank-z normalization computed within its
/// language pair. Used after pruning reshapes the score distribution.
pub fn renormalize(dataset: &Dataset) -> Result<Dataset> {
    dataset.require_scores()?;
    let mut out = dataset.clone();
    for (lp, _) in dataset.language_pairs() {
        let indices: Vec<usize> = dataset
            .examples
            .iter()
            .enumerate()
            .filter(|(_, ex)| ex.lp == lp)
            .map(|(i, _)| i)
            .collect();
        let scores: Vec<f64> = indices
            .iter()
            .map(|&i| dataset.examples[i].score.expect("checked above"))
            .collect();
        let normalized = rank_z_normalize(&scores)
            .map_err(|e| Error::Data(format!("language pair {lp}: {e}")))?;
        for (&i, &z) in indices.iter().zip(&normalized) {
            out.examples[i].score = Some(z);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, LanguagePair, Provenance};
    use proptest::prelude::*;

    const Z3: f64 = 1.224_744_871_391_589; // sqrt(3/2), the z of rank 2 among ranks {0,1,2}

    #[test]
    fn three_distinct_scores() {
        let z = rank_z_normalize(&[0.2, 0.9, 0.5]).unwrap();
        assert!((z[0] + Z3).abs() < 1e-9);
        assert!((z[1] - Z3).abs() < 1e-9);
        assert!(z[2].abs() < 1e-9);
    }

    #[test]
    fn all_equal_maps_to_zeros() {
        assert_eq!(rank_z_normalize(&[7.0, 7.0, 7.0]).unwrap(), vec![0.0; 3]);
    }

    #[test]
    fn too_short_input_is_an_error() {
        assert!(rank_z_normalize(&[1.0]).is_err());
        assert!(rank_z_normalize(&[]).is_err());
    }

    #[test]
    fn invariant_under_strictly_increasing_transforms() {
        let xs = [0.3_f64, -1.0, 2.0, 0.7, 0.7, -0.2];
        let fx: Vec<f64> = xs.iter().map(|x| (3.0 * x).exp() + 5.0).collect();
        assert_eq!(
            rank_z_normalize(&xs).unwrap(),
            rank_z_normalize(&fx).unwrap()
        );
    }

    fn matrix(columns: &[&[f64]]) -> ScoreMatrix {
        let n = columns[0].len();
        let m = columns.len();
        let mut values = Vec::with_capacity(n * m);
        for i in 0..n {
            for col in columns {
                values.push(col[i]);
            }
        }
        ScoreMatrix::new(
            (0..n).map(|i| format!("e{i}")).collect(),
            (0..m).map(|j| format!("s{j}")).collect(),
            values,
        )
        .unwrap()
    }

    #[test]
    fn aggregate_of_one_column_is_its_rank_z() {
        let m = matrix(&[&[0.2, 0.9, 0.5]]);
        assert_eq!(
            aggregate(&m).unwrap(),
            rank_z_normalize(&[0.2, 0.9, 0.5]).unwrap()
        );
    }

    #[test]
    fn opposite_columns_cancel() {
        let m = matrix(&[&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]]);
        for v in aggregate(&m).unwrap() {
            assert!(v.abs() < 1e-12);
        }
    }

    #[test]
    fn duplicated_column_matches_single_column() {
        let col = [0.4, -0.3, 1.2, 0.0];
        let single = aggregate(&matrix(&[&col])).unwrap();
        let double = aggregate(&matrix(&[&col, &col])).unwrap();
        for (a, b) in single.iter().zip(&double) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    fn scored_dataset(pairs: &[(&str, f64)]) -> Dataset {
        let examples = pairs
            .iter()
            .enumerate()
            .map(|(i, (lp, q))| Example {
                id: format!("e{i}"),
                lp: LanguagePair::parse(lp).unwrap(),
                src: "s".into(),
                hyp: "h".into(),
                reference: None,
                score: Some(*q),
            })
            .collect();
        Dataset::new(examples, Provenance::Synthetic).unwrap()
    }

    #[test]
    fn renormalize_is_idempotent_on_distinct_scores() {
        let ds = scored_dataset(&[("de-en", 0.2), ("de-en", 0.9), ("de-en", 0.5)]);
        let once = renormalize(&ds).unwrap();
        let twice = renormalize(&once).unwrap();
        for (a, b) in once.examples.iter().zip(&twice.examples) {
            assert!((a.score.unwrap() - b.score.unwrap()).abs() < 1e-12);
        }
        let zs: Vec<f64> = once.examples.iter().map(|e| e.score.unwrap()).collect();
        assert!((zs[0] + Z3).abs() < 1e-9);
        assert!((zs[1] - Z3).abs() < 1e-9);
        assert!(zs[2].abs() < 1e-9);
    }

    #[test]
    fn renormalize_is_independent_per_language_pair() {
        let ds = scored_dataset(&[
            ("de-en", 100.0),
            ("de-en", 200.0),
            ("de-en", 300.0),
            ("zh-en", 0.001),
            ("zh-en", 0.002),
            ("zh-en", 0.003),
        ]);
        let normed = renormalize(&ds).unwrap();
        let scores: Vec<f64> = normed.examples.iter().map(|e| e.score.unwrap()).collect();
        for i in 0..3 {
            assert!((scores[i] - scores[i + 3]).abs() < 1e-12);
        }
    }

    #[test]
    fn renormalize_requires_scores() {
        let mut ds = scored_dataset(&[("de-en", 1.0), ("de-en", 2.0)]);
        ds.examples[1].score = None;
        assert!(renormalize(&ds).is_err());
    }

    proptest! {
        /// Mean of the output is 0 and, for all-distinct inputs, population
        /// std is 1.
        #[test]
        fn rank_z_moments(xs in proptest::collection::vec(-1e6_f64..1e6, 2..60)) {
            let z = rank_z_normalize(&xs).unwrap();
            let mean = z.iter().sum::<f64>() / z.len() as f64;
            prop_assert!(mean.abs() < 1e-9);
            let distinct = {
                let mut s = xs.clone();
                s.sort_by(|a, b| a.partial_cmp(b).unwrap());
                s.windows(2).all(|w| w[0] != w[1])
            };
            if distinct {
                let var = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
                prop_assert!((var.sqrt() - 1.0).abs() < 1e-9);
            }
        }

        /// Exact invariance under a sampled strictly increasing transform.
        #[test]
        fn rank_z_monotone_invariance(
            xs in proptest::collection::vec(-1e3_f64..1e3, 2..50),
            scale in 0.01_f64..100.0,
            shift in -1e3_f64..1e3,
        ) {
            let fx: Vec<f64> = xs.iter().map(|x| scale * x + shift).collect();
            prop_assert_eq!(rank_z_normalize(&xs).unwrap(), rank_z_normalize(&fx).unwrap());
        }
    }
}
