//! Quality-bin pruning.
//!
//! Synthetic scores skew low compared to human-annotated test data, so the
//! score distribution is reshaped: per language pair, examples are sorted by
//! score, split into five bins, and a fixed fraction of each bin is dropped,
//! discarding most of the worst bin and nothing from the best.

use rand::seq::SliceRandom;

use crate::corpus::Dataset;
use crate::error::{Error, Result};
use crate::seeding;

/// Fraction dropped per ascending-quality bin.
pub const PAPER_DROP_RATIOS: [f64; 5] = [0.9, 0.8, 0.6, 0.2, 0.0];

/// Prunes per language pair: sort ascending by score, partition into 5 bins
/// as equal as possible (lower-score bins take the remainder), and remove
/// exactly `round(drop_ratios[i] * bin_size)` examples from bin `i`, sampled
/// without replacement. Kept examples come back in their original dataset
/// order. Deterministic given the seed.
pub fn bin_prune(dataset: &Dataset, drop_ratios: &[f64; 5], seed: u64) -> Result<Dataset> {
    dataset.require_scores()?;
    if let Some(bad) = drop_ratios.iter().find(|r| !(0.0..=1.0).contains(*r)) {
        return Err(Error::Config(format!(
            "drop ratio {bad} is outside [0, 1]"
        )));
    }

    let mut keep = vec![false; dataset.len()];
    for (lp, count) in dataset.language_pairs() {
        if count < 5 {
            return Err(Error::Data(format!(
                "language pair {lp} has only {count} examples; pruning needs at least 5"
            )));
        }
        // Sort this pair's indices by (score, id) so ties break stably.
        let mut indices: Vec<usize> = dataset
            .examples
            .iter()
            .enumerate()
            .filter(|(_, ex)| ex.lp == lp)
            .map(|(i, _)| i)
            .collect();
        indices.sort_by(|&a, &b| {
            let ea = &dataset.examples[a];
            let eb = &dataset.examples[b];
            ea.score
                .partial_cmp(&eb.score)
                .expect("scores checked finite")
                .then_with(|| ea.id.cmp(&eb.id))
        });

        let base = count / 5;
        let remainder = count % 5;
        let mut rng = seeding::labeled_stream(seed, &lp.to_string());
        let mut start = 0;
        for (bin, ratio) in drop_ratios.iter().enumerate() {
            let bin_size = base + usize::from(bin < remainder);
            let bin_indices = &indices[start..start + bin_size];
            start += bin_size;

            let drop_count = (ratio * bin_size as f64).round() as usize;
            let mut shuffled: Vec<usize> = bin_indices.to_vec();
            shuffled.shuffle(&mut rng);
            for &idx in shuffled.iter().skip(drop_count) {
                keep[idx] = true;
            }
        }
    }

    let examples = dataset
        .examples
        .iter()
        .enumerate()
        .filter(|(i, _)| keep[*i])
        .map(|(_, ex)| ex.clone())
        .collect();
    Dataset::new(examples, dataset.provenance)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Example, LanguagePair, Provenance};
    use std::collections::BTreeSet;

    fn scored(lp: &str, n: usize, offset: usize) -> Vec<Example> {
        (0..n)
            .map(|i| Example {
                id: format!("{lp}-{i:04}"),
                lp: LanguagePair::parse(lp).unwrap(),
                src: "s".into(),
                hyp: "h".into(),
                reference: None,
                score: Some((i + offset) as f64 * 0.01),
            })
            .collect()
    }

    fn dataset(lp: &str, n: usize) -> Dataset {
        Dataset::new(scored(lp, n, 0), Provenance::Synthetic).unwrap()
    }

    #[test]
    fn thousand_examples_keep_five_hundred() {
        let ds = dataset("en-de", 1000);
        let pruned = bin_prune(&ds, &PAPER_DROP_RATIOS, 3).unwrap();
        assert_eq!(pruned.len(), 500);

        // Kept counts per ascending bin of 200: (20, 40, 80, 160, 200).
        let mut per_bin = [0usize; 5];
        for ex in &pruned.examples {
            let rank: usize = ex.id["en-de-".len()..].parse().unwrap();
            per_bin[rank / 200] += 1;
        }
        assert_eq!(per_bin, [20, 40, 80, 160, 200]);
    }

    #[test]
    fn top_bin_survives_untouched() {
        let ds = dataset("en-de", 1000);
        let pruned = bin_prune(&ds, &PAPER_DROP_RATIOS, 3).unwrap();
        let kept: BTreeSet<&str> = pruned.examples.iter().map(|e| e.id.as_str()).collect();
        for i in 800..1000 {
            assert!(kept.contains(format!("en-de-{i:04}").as_str()));
        }
    }

    #[test]
    fn zero_ratios_are_identity() {
        let ds = dataset("en-de", 47);
        let pruned = bin_prune(&ds, &[0.0; 5], 9).unwrap();
        assert_eq!(pruned, ds);
    }

    #[test]
    fn same_seed_keeps_identical_id_sets() {
        let ds = dataset("en-de", 333);
        let a = bin_prune(&ds, &PAPER_DROP_RATIOS, 5).unwrap();
        let b = bin_prune(&ds, &PAPER_DROP_RATIOS, 5).unwrap();
        assert_eq!(a, b);
        let c = bin_prune(&ds, &PAPER_DROP_RATIOS, 6).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn prunes_each_language_pair_independently() {
        let mut examples = scored("en-de", 1000, 0);
        examples.extend(scored("zh-en", 500, 2000));
        let ds = Dataset::new(examples, Provenance::Synthetic).unwrap();
        let pruned = bin_prune(&ds, &PAPER_DROP_RATIOS, 3).unwrap();
        let en_de = pruned.examples.iter().filter(|e| e.id.starts_with("en-de")).count();
        let zh_en = pruned.examples.iter().filter(|e| e.id.starts_with("zh-en")).count();
        assert_eq!(en_de, 500);
        assert_eq!(zh_en, 250);
    }

    #[test]
    fn remainder_goes_to_lower_bins() {
        // 23 = 5*4 + 3: bins of (5, 5, 5, 4, 4). Drop ratios of 1.0
        // everywhere make kept counts zero; use 0.5 on the first bin only.
        let ds = dataset("en-de", 23);
        let pruned = bin_prune(&ds, &[1.0, 1.0, 1.0, 1.0, 0.0], 1).unwrap();
        // Only the last bin (4 highest scores) survives.
        assert_eq!(pruned.len(), 4);
        let kept: Vec<&str> = pruned.examples.iter().map(|e| e.id.as_str()).collect();
        assert_eq!(kept, ["en-de-0019", "en-de-0020", "en-de-0021", "en-de-0022"]);
    }

    #[test]
    fn unscored_example_is_an_error() {
        let mut ds = dataset("en-de", 10);
        ds.examples[3].score = None;
        assert!(bin_prune(&ds, &PAPER_DROP_RATIOS, 1).is_err());
    }

    #[test]
    fn tiny_language_pair_is_an_error() {
        let ds = dataset("en-de", 4);
        let err = bin_prune(&ds, &PAPER_DROP_RATIOS, 1).unwrap_err();
        assert!(err.to_string().contains("at least 5"), "{err}");
    }

    #[test]
    fn output_preserves_input_order() {
        let ds = dataset("en-de", 100);
        let pruned = bin_prune(&ds, &PAPER_DROP_RATIOS, 12).unwrap();
        let positions: Vec<usize> = pruned
            .examples
            .iter()
            .map(|e| ds.examples.iter().position(|o| o.id == e.id).unwrap())
            .collect();
        assert!(positions.windows(2).all(|w| w[0] < w[1]));
    }
}
