//! Parameter storage: a minimal row-major matrix and the full parameter set
//! of one model, with named-section access shared by the optimizer, the
//! checkpoint writer, and gradient checking.

use rand::Rng;

use crate::model::ModelConfig;
use crate::seeding;

/// Dense row-major f64 matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// `self (rows×cols) · x (cols)`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut out = vec![0.0; self.rows];
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, xi) in row.iter().zip(x) {
                acc += w * xi;
            }
            *o = acc;
        }
        out
    }

    /// `selfᵀ · y`, i.e. out (cols) with out_j = Σ_r self[r][j] y_r.
    pub fn transpose_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, yr) in y.iter().enumerate() {
            let row = self.row(r);
            for (o, w) in out.iter_mut().zip(row) {
                *o += w * yr;
            }
        }
        out
    }

    /// `self += y ⊗ x` (outer product; y indexes rows, x columns).
    pub fn add_outer(&mut self, y: &[f64], x: &[f64]) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert_eq!(x.len(), self.cols);
        for (r, yr) in y.iter().enumerate() {
            let row = self.row_mut(r);
            for (w, xi) in row.iter_mut().zip(x) {
                *w += yr * xi;
            }
        }
    }
}

/// One feedforward layer: `weight (out×in)` and `bias (out)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Dense {
    pub weight: Mat,
    pub bias: Vec<f64>,
}

/// All trainable parameters of one model.
///
/// Sections, in the fixed order used everywhere (optimizer, checkpoints,
/// gradient checking): `embedding`, `encoder.weight`, `encoder.bias`, then
/// `head.{i}.weight` / `head.{i}.bias` per layer.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub embedding: Mat,
    pub enc_weight: Mat,
    pub enc_bias: Vec<f64>,
    pub head: Vec<Dense>,
}

impl ModelParams {
    /// Seeded initialization: weight matrices uniform in ±1/√d, biases zero.
    pub fn init(config: &ModelConfig) -> Self {
        let d = config.d;
        let id_count = config.id_count();
        let mut rng = seeding::rng(config.seed);
        let scale = 1.0 / (d as f64).sqrt();
        let mut fill = |mat: &mut Mat| {
            for w in mat.data_mut() {
                *w = rng.gen_range(-scale..scale);
            }
        };

        let mut embedding = Mat::zeros(id_count, d);
        fill(&mut embedding);
        let mut enc_weight = Mat::zeros(d, d);
        fill(&mut enc_weight);
        let enc_bias = vec![0.0; d];

        let mut head = Vec::with_capacity(config.head_dims.len());
        let mut fan_in = d;
        for &out in &config.head_dims {
            let mut weight = Mat::zeros(out, fan_in);
            fill(&mut weight);
            head.push(Dense {
                weight,
                bias: vec![0.0; out],
            });
            fan_in = out;
        }

        ModelParams {
            embedding,
            enc_weight,
            enc_bias,
            head,
        }
    }

    pub fn zeros_like(&self) -> Self {
        ModelParams {
            embedding: Mat::zeros(self.embedding.rows(), self.embedding.cols()),
            enc_weight: Mat::zeros(self.enc_weight.rows(), self.enc_weight.cols()),
            enc_bias: vec![0.0; self.enc_bias.len()],
            head: self
                .head
                .iter()
                .map(|l| Dense {
                    weight: Mat::zeros(l.weight.rows(), l.weight.cols()),
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// Named sections in fixed order.
    pub fn sections(&self) -> Vec<(String, &[f64])> {
        let mut out: Vec<(String, &[f64])> = vec![
            ("embedding".into(), self.embedding.data()),
            ("encoder.weight".into(), self.enc_weight.data()),
            ("encoder.bias".into(), &self.enc_bias),
        ];
        for (i, layer) in self.head.iter().enumerate() {
            out.push((format!("head.{i}.weight"), layer.weight.data()));
            out.push((format!("head.{i}.bias"), &layer.bias));
        }
        out
    }

    pub fn sections_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = vec![
            ("embedding".into(), self.embedding.data_mut()),
            ("encoder.weight".into(), self.enc_weight.data_mut()),
            ("encoder.bias".into(), &mut self.enc_bias),
        ];
        for (i, layer) in self.head.iter_mut().enumerate() {
            out.push((format!("head.{i}.weight"), layer.weight.data_mut()));
            out.push((format!("head.{i}.bias"), &mut layer.bias));
        }
        out
    }

    /// Total scalar parameter count.
    pub fn flat_len(&self) -> usize {
        self.sections().iter().map(|(_, s)| s.len()).sum()
    }

    pub fn flat_get(&self, mut index: usize) -> f64 {
        for (_, s) in self.sections() {
            if index < s.len() {
                return s[index];
            }
            index -= s.len();
        }
        panic!("flat index out of range");
    }

    pub fn flat_add(&mut self, mut index: usize, delta: f64) {
        for (_, s) in self.sections_mut() {
            if index < s.len() {
                s[index] += delta;
                return;
            }
            index -= s.len();
        }
        panic!("flat index out of range");
    }

    pub fn all_finite(&self) -> bool {
        self.sections()
            .iter()
            .all(|(_, s)| s.iter().all(|v| v.is_finite()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matvec_and_transpose_agree_with_hand_computation() {
        let mut m = Mat::zeros(2, 3);
        m.data_mut().copy_from_slice(&[1.0, 2.0, 3.0, 4.0, 5.0, 6.0]);
        assert_eq!(m.matvec(&[1.0, 0.0, -1.0]), vec![-2.0, -2.0]);
        assert_eq!(m.transpose_matvec(&[1.0, -1.0]), vec![-3.0, -3.0, -3.0]);
    }

    #[test]
    fn add_outer_accumulates() {
        let mut m = Mat::zeros(2, 2);
        m.add_outer(&[1.0, 2.0], &[3.0, 4.0]);
        m.add_outer(&[1.0, 0.0], &[1.0, 1.0]);
        assert_eq!(m.data(), &[4.0, 5.0, 6.0, 8.0]);
    }

    #[test]
    fn init_is_seeded_and_bounded() {
        let config = ModelConfig {
            seed: 3,
            ..ModelConfig::desk()
        };
        let a = ModelParams::init(&config);
        let b = ModelParams::init(&config);
        assert_eq!(a, b);
        let c = ModelParams::init(&ModelConfig {
            seed: 4,
            ..ModelConfig::desk()
        });
        assert_ne!(a, c);

        let bound = 1.0 / (config.d as f64).sqrt();
        for (name, s) in a.sections() {
            if name.ends_with("bias") {
                assert!(s.iter().all(|&v| v == 0.0));
            } else {
                assert!(s.iter().all(|&v| v.abs() < bound));
            }
        }
    }

    #[test]
    fn flat_access_covers_every_section() {
        let mut p = ModelParams::init(&ModelConfig {
            d: 4,
            vocab_buckets: 8,
            head_dims: vec![3, 1],
            ..ModelConfig::desk()
        });
        let n = p.flat_len();
        assert_eq!(n, 12 * 4 + 16 + 4 + (12 + 3) + (3 + 1));
        let before = p.flat_get(n - 1);
        p.flat_add(n - 1, 0.5);
        assert_eq!(p.flat_get(n - 1), before + 0.5);
    }
}
