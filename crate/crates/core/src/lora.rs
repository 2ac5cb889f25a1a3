//! Low-rank adapter arithmetic on small dense matrices.

use std::ops::{Index, IndexMut};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const INIT_STD: f64 = 0.02;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LoraError {
    #[error("rank {r} must satisfy 1 <= r < min({d}, {k})")]
    RankTooLarge { d: usize, k: usize, r: usize },
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("matrix data must be finite and have rows*cols entries")]
    InvalidMatrix,
}

/// Row-major dense matrix of finite f64 values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        DenseMatrix { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self, LoraError> {
        if rows == 0 || cols == 0 || data.len() != rows * cols || data.iter().any(|v| !v.is_finite()) {
            return Err(LoraError::InvalidMatrix);
        }
        Ok(DenseMatrix { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn matmul(&self, rhs: &DenseMatrix) -> Result<DenseMatrix, LoraError> {
        if self.cols != rhs.rows {
            return Err(LoraError::ShapeMismatch(format!(
                "{}x{} * {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let mut out = DenseMatrix::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for p in 0..self.cols {
                let a = self[(i, p)];
                for j in 0..rhs.cols {
                    out.data[i * rhs.cols + j] += a * rhs[(p, j)];
                }
            }
        }
        Ok(out)
    }

    /// `self + s * rhs`
    pub fn add_scaled(&self, rhs: &DenseMatrix, s: f64) -> Result<DenseMatrix, LoraError> {
        if (self.rows, self.cols) != (rhs.rows, rhs.cols) {
            return Err(LoraError::ShapeMismatch(format!(
                "{}x{} + {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a + s * b).collect();
        Ok(DenseMatrix { rows: self.rows, cols: self.cols, data })
    }

    pub fn max_abs_diff(&self, rhs: &DenseMatrix) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Update pair for a d×k weight: `B` is d×r, `A` is r×k.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoraAdapter {
    pub a: DenseMatrix,
    pub b: DenseMatrix,
    pub rank: usize,
    pub scale: f64,
}

impl LoraAdapter {
    pub fn new(a: DenseMatrix, b: DenseMatrix, scale: f64) -> Result<Self, LoraError> {
        let (d, r, k) = (b.rows, a.rows, a.cols);
        if b.cols != r {
            return Err(LoraError::ShapeMismatch(format!("B is {}x{}, A is {}x{}", b.rows, b.cols, r, k)));
        }
        check_rank(d, k, r)?;
        Ok(LoraAdapter { a, b, rank: r, scale })
    }

    pub fn d(&self) -> usize {
        self.b.rows
    }

    pub fn k(&self) -> usize {
        self.a.cols
    }

    pub fn delta(&self) -> DenseMatrix {
        let ba = self.b.matmul(&self.a).expect("adapter shapes are checked on construction");
        DenseMatrix::zeros(ba.rows, ba.cols).add_scaled(&ba, self.scale).unwrap()
    }
}

fn check_rank(d: usize, k: usize, r: usize) -> Result<(), LoraError> {
    if r == 0 || r >= d.min(k) {
        return Err(LoraError::RankTooLarge { d, k, r });
    }
    Ok(())
}

pub fn init_adapter(d: usize, k: usize, r: usize, seed: u64) -> Result<LoraAdapter, LoraError> {
    check_rank(d, k, r)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let normal = Normal::new(0.0, INIT_STD).expect("std is positive");
    let a = DenseMatrix::from_fn(r, k, |_, _| normal.sample(&mut rng));
    Ok(LoraAdapter { a, b: DenseMatrix::zeros(d, r), rank: r, scale: 1.0 })
}

fn check_w0(adapter: &LoraAdapter, w0: &DenseMatrix) -> Result<(), LoraError> {
    if (w0.rows, w0.cols) != (adapter.d(), adapter.k()) {
        return Err(LoraError::ShapeMismatch(format!(
            "W0 is {}x{}, adapter is {}x{}",
            w0.rows,
            w0.cols,
            adapter.d(),
            adapter.k()
        )));
    }
    Ok(())
}

/// `W0·X + scale·(B·(A·X))`
pub fn forward(adapter: &LoraAdapter, w0: &DenseMatrix, x: &DenseMatrix) -> Result<DenseMatrix, LoraError> {
    check_w0(adapter, w0)?;
    let h = w0.matmul(x)?;
    let ax = adapter.a.matmul(x)?;
    let bax = adapter.b.matmul(&ax)?;
    h.add_scaled(&bax, adapter.scale)
}

pub fn merge(adapter: &LoraAdapter, w0: &DenseMatrix) -> Result<DenseMatrix, LoraError> {
    check_w0(adapter, w0)?;
    let ba = adapter.b.matmul(&adapter.a)?;
    w0.add_scaled(&ba, adapter.scale)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hyperparams {
    pub optimizer: String,
    pub lr: f64,
    pub lora_r: u32,
    pub lora_alpha: u32,
    pub max_in: u32,
    pub max_out: u32,
    pub seed: u64,
    pub batch: u32,
}

pub fn paper_hyperparams() -> Hyperparams {
    Hyperparams {
        optimizer: "AdamW".into(),
        lr: 2e-4,
        lora_r: 32,
        lora_alpha: 16,
        max_in: 512,
        max_out: 512,
        seed: 42,
        batch: 1,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: usize, cols: usize, v: &[f64]) -> DenseMatrix {
        DenseMatrix::from_vec(rows, cols, v.to_vec()).unwrap()
    }

    #[test]
    fn fresh_adapter_has_zero_delta() {
        let ad = init_adapter(8, 8, 2, 7).unwrap();
        assert_eq!((ad.b.rows(), ad.b.cols()), (8, 2));
        assert!(ad.b.is_zero());
        let delta = ad.delta();
        assert_eq!((delta.rows(), delta.cols()), (8, 8));
        assert!(delta.is_zero());
    }

    #[test]
    fn rank_bounds() {
        assert_eq!(init_adapter(8, 4, 4, 0).unwrap_err(), LoraError::RankTooLarge { d: 8, k: 4, r: 4 });
        assert!(init_adapter(8, 4, 0, 0).is_err());
        assert!(init_adapter(8, 4, 3, 0).is_ok());
    }

    #[test]
    fn seeded_init_is_reproducible() {
        assert_eq!(init_adapter(6, 5, 2, 3).unwrap().a, init_adapter(6, 5, 2, 3).unwrap().a);
        assert_ne!(init_adapter(6, 5, 2, 3).unwrap().a, init_adapter(6, 5, 2, 4).unwrap().a);
    }

    #[test]
    fn scalar_forward() {
        // rank must be below min(d,k), so the 1x1 case is built by hand and skips the rank check
        let ad = LoraAdapter { a: m(1, 1, &[4.0]), b: m(1, 1, &[3.0]), rank: 1, scale: 1.0 };
        let out = forward(&ad, &m(1, 1, &[2.0]), &m(1, 1, &[5.0])).unwrap();
        assert_eq!(out.data(), &[70.0]);
    }

    #[test]
    fn shape_errors() {
        let ad = init_adapter(4, 3, 1, 0).unwrap();
        assert!(matches!(merge(&ad, &DenseMatrix::zeros(3, 4)), Err(LoraError::ShapeMismatch(_))));
        assert!(forward(&ad, &DenseMatrix::zeros(4, 3), &DenseMatrix::zeros(2, 2)).is_err());
        assert!(DenseMatrix::from_vec(2, 2, vec![1.0, f64::NAN, 0.0, 0.0]).is_err());
    }

    #[test]
    fn scale_zero_leaves_w0() {
        let mut ad = init_adapter(4, 4, 2, 1).unwrap();
        ad.b = DenseMatrix::from_fn(4, 2, |i, j| (i + j) as f64);
        ad.scale = 0.0;
        let w0 = DenseMatrix::from_fn(4, 4, |i, j| (i * 4 + j) as f64);
        assert_eq!(merge(&ad, &w0).unwrap(), w0);
    }

    #[test]
    fn table_one_values() {
        let h = paper_hyperparams();
        assert_eq!((h.lora_r, h.lora_alpha, h.seed, h.batch), (32, 16, 42, 1));
        assert_eq!(h.lr, 2e-4);
        assert_eq!(h.optimizer, "AdamW");
        assert_eq!((h.max_in, h.max_out), (512, 512));
    }
}
