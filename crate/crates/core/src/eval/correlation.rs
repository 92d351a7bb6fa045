//! Spearman, Pearson, and Kendall tau-b correlation coefficients.
//!
//! All three error on constant inputs rather than returning 0 — a constant
//! prediction vector means the evaluation is degenerate, and a silent zero
//! would mask that.

use crate::error::{Error, Result};
use crate::stats::average_ranks;

fn validate(x: &[f64], y: &[f64]) -> Result<()> {
    if x.len() != y.len() {
        return Err(Error::Data(format!(
            "correlation needs equal lengths, got {} and {}",
            x.len(),
            y.len()
        )));
    }
    if x.len() < 2 {
        return Err(Error::Data(format!(
            "correlation needs at least 2 points, got {}",
            x.len()
        )));
    }
    for v in x.iter().chain(y) {
        if !v.is_finite() {
            return Err(Error::Numeric("correlation input is not finite".into()));
        }
    }
    let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
    if constant(x) || constant(y) {
        return Err(Error::Numeric(
            "correlation is undefined for a constant vector".into(),
        ));
    }
    Ok(())
}

/// Product-moment correlation coefficient.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    validate(x, y)?;
    let n = x.len() as f64;
    let mean_x = x.iter().sum::<f64>() / n;
    let mean_y = y.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut var_x = 0.0;
    let mut var_y = 0.0;
    for (a, b) in x.iter().zip(y) {
        let dx = a - mean_x;
        let dy = b - mean_y;
        cov += dx * dy;
        var_x += dx * dx;
        var_y += dy * dy;
    }
    Ok((cov / (var_x * var_y).sqrt()).clamp(-1.0, 1.0))
}

/// Pearson correlation of average-tie ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    validate(x, y)?;
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Kendall's tau-b, with tie corrections:
/// `(nc − nd) / sqrt((n0 − tx)(n0 − ty))` over all pairs, where `tx`/`ty`
/// count pairs tied in x / in y.
pub fn kendall_b(x: &[f64], y: &[f64]) -> Result<f64> {
    validate(x, y)?;
    let n = x.len();
    let mut concordant = 0i64;
    let mut discordant = 0i64;
    let mut ties_x = 0i64;
    let mut ties_y = 0i64;
    for i in 0..n {
        for j in i + 1..n {
            let dx = x[i] - x[j];
            let dy = y[i] - y[j];
            if dx == 0.0 {
                ties_x += 1;
            }
            if dy == 0.0 {
                ties_y += 1;
            }
            if dx == 0.0 || dy == 0.0 {
                continue;
            }
            if (dx > 0.0) == (dy > 0.0) {
                concordant += 1;
            } else {
                discordant += 1;
            }
        }
    }
    let total = (n * (n - 1) / 2) as i64;
    let denom = ((total - ties_x) as f64 * (total - ties_y) as f64).sqrt();
    Ok(((concordant - discordant) as f64 / denom).clamp(-1.0, 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn perfect_monotone_and_reversed() {
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(spearman(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
        assert_eq!(kendall_b(&[1.0, 2.0, 3.0], &[10.0, 20.0, 30.0]).unwrap(), 1.0);
        assert_eq!(kendall_b(&[1.0, 2.0, 3.0], &[3.0, 2.0, 1.0]).unwrap(), -1.0);
    }

    #[test]
    fn spearman_tie_case() {
        let rho = spearman(&[1.0, 2.0, 2.0, 3.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!((rho - 0.948_683).abs() < 1e-6, "{rho}");
    }

    #[test]
    fn pearson_hand_values() {
        assert!((pearson(&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]).unwrap() - 1.0).abs() < 1e-12);
        assert!((pearson(&[1.0, 2.0, 3.0], &[4.0, 3.0, 2.0]).unwrap() + 1.0).abs() < 1e-12);
        let r = pearson(&[0.0, 1.0, 2.0], &[0.0, 1.0, 4.0]).unwrap();
        assert!((r - 0.960_769).abs() < 1e-6, "{r}");
    }

    #[test]
    fn constant_vectors_are_errors() {
        assert!(spearman(&[1.0, 1.0, 1.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[5.0, 5.0]).is_err());
        assert!(kendall_b(&[2.0, 2.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn length_checks() {
        assert!(spearman(&[1.0], &[1.0]).is_err());
        assert!(pearson(&[1.0, 2.0], &[1.0, 2.0, 3.0]).is_err());
    }

    /// Definitional oracle: average ranks then textbook Pearson.
    fn spearman_oracle(x: &[f64], y: &[f64]) -> f64 {
        let rx = average_ranks(x);
        let ry = average_ranks(y);
        let n = rx.len() as f64;
        let mx = rx.iter().sum::<f64>() / n;
        let my = ry.iter().sum::<f64>() / n;
        let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
        let vx: f64 = rx.iter().map(|a| (a - mx) * (a - mx)).sum();
        let vy: f64 = ry.iter().map(|b| (b - my) * (b - my)).sum();
        cov / (vx * vy).sqrt()
    }

    /// Brute-force tau-b over all pairs.
    fn kendall_oracle(x: &[f64], y: &[f64]) -> f64 {
        let n = x.len();
        let (mut nc, mut nd, mut tx, mut ty) = (0.0, 0.0, 0.0, 0.0);
        for i in 0..n {
            for j in i + 1..n {
                let s = (x[i] - x[j]) * (y[i] - y[j]);
                if x[i] == x[j] {
                    tx += 1.0;
                }
                if y[i] == y[j] {
                    ty += 1.0;
                }
                if x[i] != x[j] && y[i] != y[j] {
                    if s > 0.0 {
                        nc += 1.0;
                    } else {
                        nd += 1.0;
                    }
                }
            }
        }
        let n0 = (n * (n - 1)) as f64 / 2.0;
        (nc - nd) / ((n0 - tx) * (n0 - ty)).sqrt()
    }

    #[test]
    fn kendall_matches_pair_counting_oracle_on_random_six_vectors() {
        use rand::Rng;
        let mut rng = crate::seeding::rng(42);
        for _ in 0..200 {
            let x: Vec<f64> = (0..6).map(|_| f64::from(rng.gen_range(0..4))).collect();
            let y: Vec<f64> = (0..6).map(|_| f64::from(rng.gen_range(0..4))).collect();
            let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
            if constant(&x) || constant(&y) {
                continue;
            }
            assert_eq!(kendall_b(&x, &y).unwrap(), kendall_oracle(&x, &y).clamp(-1.0, 1.0));
        }
    }

    proptest! {
        #[test]
        fn spearman_matches_definitional_oracle(
            pairs in proptest::collection::vec((-50_i32..50, -50_i32..50), 2..40)
        ) {
            let x: Vec<f64> = pairs.iter().map(|(a, _)| f64::from(*a)).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, b)| f64::from(*b)).collect();
            let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
            prop_assume!(!constant(&x) && !constant(&y));
            let rho = spearman(&x, &y).unwrap();
            prop_assert!((rho - spearman_oracle(&x, &y)).abs() < 1e-12);
            prop_assert!((-1.0..=1.0).contains(&rho));
        }

        #[test]
        fn spearman_invariant_under_monotone_transforms(
            xs in proptest::collection::vec(-100_f64..100.0, 3..30),
            ys in proptest::collection::vec(-100_f64..100.0, 3..30),
        ) {
            let n = xs.len().min(ys.len());
            let (x, y) = (&xs[..n], &ys[..n]);
            let constant = |v: &[f64]| v.iter().all(|a| *a == v[0]);
            prop_assume!(!constant(x) && !constant(y));
            let fx: Vec<f64> = x.iter().map(|v| v.exp()).collect();
            let gy: Vec<f64> = y.iter().map(|v| 3.0 * v + 7.0).collect();
            prop_assert_eq!(spearman(x, y).unwrap(), spearman(&fx, &gy).unwrap());
        }

        #[test]
        fn pearson_affine_equivariance(
            pairs in proptest::collection::vec((-100_f64..100.0, -100_f64..100.0), 3..30),
            a in prop_oneof![-10.0_f64..-0.1, 0.1_f64..10.0],
            b in -100_f64..100.0,
        ) {
            let x: Vec<f64> = pairs.iter().map(|(v, _)| *v).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, w)| *w).collect();
            let constant = |v: &[f64]| v.iter().all(|q| *q == v[0]);
            prop_assume!(!constant(&x) && !constant(&y));
            let ax: Vec<f64> = x.iter().map(|v| a * v + b).collect();
            let base = pearson(&x, &y).unwrap();
            let scaled = pearson(&ax, &y).unwrap();
            prop_assert!((scaled - a.signum() * base).abs() < 1e-9);
        }

        #[test]
        fn coefficients_are_symmetric_and_bounded(
            pairs in proptest::collection::vec((-20_i32..20, -20_i32..20), 2..25)
        ) {
            let x: Vec<f64> = pairs.iter().map(|(v, _)| f64::from(*v)).collect();
            let y: Vec<f64> = pairs.iter().map(|(_, w)| f64::from(*w)).collect();
            let constant = |v: &[f64]| v.iter().all(|q| *q == v[0]);
            prop_assume!(!constant(&x) && !constant(&y));
            for f in [spearman, pearson, kendall_b] {
                let ab = f(&x, &y).unwrap();
                let ba = f(&y, &x).unwrap();
                prop_assert!((ab - ba).abs() < 1e-12);
                prop_assert!((-1.0..=1.0).contains(&ab));
            }
        }
    }
}
