//! Fixed-point encoding into the ring Z_q with q = 2^L, plus the
//! preprocessing steps (standardization, label folding) that feed it.

use crate::matrix::Matrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Element of Z_q, always held as the representative in [0, q).
pub type RingValue = u64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EncodingError {
    #[error("ring size L={ring_bits} outside 2..={max}", max = FixedPointParams::MAX_RING_BITS)]
    RingSizeOutOfRange { ring_bits: u32 },
    #[error("fractional bits b={frac_bits} leave no room in a {ring_bits}-bit ring")]
    FracBitsTooLarge { frac_bits: u32, ring_bits: u32 },
    #[error("{value} does not fit a {ring_bits}-bit ring with {frac_bits} fractional bits")]
    Overflow {
        value: f64,
        frac_bits: u32,
        ring_bits: u32,
    },
    #[error("cannot encode non-finite value {0}")]
    NonFinite(f64),
    #[error("dataset has no records")]
    EmptyDataset,
    #[error("every feature column is constant")]
    AllColumnsConstant,
    #[error("expected {expected} columns, got {found}")]
    ColumnMismatch { expected: usize, found: usize },
    #[error("label {value} at record {index} is not +1 or -1")]
    InvalidLabel { index: usize, value: i8 },
    #[error("{rows} rows but {labels} labels")]
    LabelCountMismatch { rows: usize, labels: usize },
}

/// Which power of the scale factor a ring value carries: encoded inputs
/// carry 2^b, products of two encoded values carry 2^(2b).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ScaleLevel {
    Single,
    Double,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FixedPointParams {
    frac_bits: u32,
    ring_bits: u32,
}

impl FixedPointParams {
    /// Products of two ring values must fit in a u128.
    pub const MAX_RING_BITS: u32 = 62;

    pub fn new(frac_bits: u32, ring_bits: u32) -> Result<Self, EncodingError> {
        if !(2..=Self::MAX_RING_BITS).contains(&ring_bits) {
            return Err(EncodingError::RingSizeOutOfRange { ring_bits });
        }
        if frac_bits + 1 >= ring_bits {
            return Err(EncodingError::FracBitsTooLarge {
                frac_bits,
                ring_bits,
            });
        }
        Ok(Self {
            frac_bits,
            ring_bits,
        })
    }

    /// Smallest ring in which any inner product of length `dims` between
    /// vectors bounded by `lhs_bound` and `rhs_bound` (in absolute value)
    /// keeps its sign.
    pub fn for_products(
        frac_bits: u32,
        dims: usize,
        lhs_bound: f64,
        rhs_bound: f64,
    ) -> Result<Self, EncodingError> {
        let scale = 2f64.powi(frac_bits as i32);
        let a = (lhs_bound.abs() * scale).floor().max(1.0) as u128;
        let c = (rhs_bound.abs() * scale).floor().max(1.0) as u128;
        let sum_bound = (dims.max(1) as u128)
            .checked_mul(a)
            .and_then(|v| v.checked_mul(c))
            .ok_or(EncodingError::RingSizeOutOfRange { ring_bits: 128 })?;
        let bits = 128 - sum_bound.leading_zeros();
        Self::new(frac_bits, bits + 1)
    }

    /// Ring for data and weights in [-1, 1]: L = 2b + ceil(log2 dims) + 1.
    pub fn for_dimension(frac_bits: u32, dims: usize) -> Result<Self, EncodingError> {
        Self::for_products(frac_bits, dims, 1.0, 1.0)
    }

    pub fn frac_bits(&self) -> u32 {
        self.frac_bits
    }

    pub fn ring_bits(&self) -> u32 {
        self.ring_bits
    }

    pub fn modulus(&self) -> u64 {
        1u64 << self.ring_bits
    }

    pub fn mask(&self) -> u64 {
        self.modulus() - 1
    }

    pub fn scale(&self) -> f64 {
        2f64.powi(self.frac_bits as i32)
    }

    /// Negative values map to q - floor(|x| 2^b).
    pub fn encode(&self, x: f64) -> Result<RingValue, EncodingError> {
        if !x.is_finite() {
            return Err(EncodingError::NonFinite(x));
        }
        let mag = (x.abs() * self.scale()).floor();
        if mag >= (self.modulus() / 2) as f64 {
            return Err(EncodingError::Overflow {
                value: x,
                frac_bits: self.frac_bits,
                ring_bits: self.ring_bits,
            });
        }
        let mag = mag as u64;
        Ok(if x < 0.0 {
            self.modulus().wrapping_sub(mag) & self.mask()
        } else {
            mag
        })
    }

    pub fn encode_slice(&self, xs: &[f64]) -> Result<Vec<RingValue>, EncodingError> {
        xs.iter().map(|&x| self.encode(x)).collect()
    }

    pub fn encode_matrix(&self, m: &Matrix<f64>) -> Result<Matrix<RingValue>, EncodingError> {
        m.try_map(|&x| self.encode(x))
    }

    /// Top bit of the L-bit representative.
    pub fn is_negative(&self, v: RingValue) -> bool {
        (v >> (self.ring_bits - 1)) & 1 == 1
    }

    /// Signed integer the ring value stands for.
    pub fn to_signed(&self, v: RingValue) -> i64 {
        let v = v & self.mask();
        if self.is_negative(v) {
            v as i64 - self.modulus() as i64
        } else {
            v as i64
        }
    }

    pub fn decode(&self, v: RingValue, level: ScaleLevel) -> f64 {
        let shift = match level {
            ScaleLevel::Single => self.frac_bits,
            ScaleLevel::Double => 2 * self.frac_bits,
        };
        self.to_signed(v) as f64 / 2f64.powi(shift as i32)
    }

    pub fn reduce(&self, v: u128) -> RingValue {
        (v & self.mask() as u128) as u64
    }

    pub fn add(&self, a: RingValue, b: RingValue) -> RingValue {
        a.wrapping_add(b) & self.mask()
    }

    pub fn sub(&self, a: RingValue, b: RingValue) -> RingValue {
        a.wrapping_sub(b) & self.mask()
    }

    pub fn mul(&self, a: RingValue, b: RingValue) -> RingValue {
        self.reduce(a as u128 * b as u128)
    }

    pub fn dot(&self, a: &[RingValue], b: &[RingValue]) -> RingValue {
        debug_assert_eq!(a.len(), b.len());
        let mut acc = 0u64;
        for (&x, &y) in a.iter().zip(b) {
            acc = self.add(acc, self.mul(x, y));
        }
        acc
    }
}

/// Per-column z-scoring fitted on one split and reused on others.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardizer {
    input_cols: usize,
    kept: Vec<usize>,
    mean: Vec<f64>,
    std: Vec<f64>,
}

impl Standardizer {
    /// Population statistics; constant columns are dropped.
    pub fn fit(x: &Matrix<f64>) -> Result<Self, EncodingError> {
        let n = x.rows();
        if n == 0 {
            return Err(EncodingError::EmptyDataset);
        }
        let mut kept = Vec::new();
        let mut mean = Vec::new();
        let mut std = Vec::new();
        for j in 0..x.cols() {
            let first = x.get(0, j);
            if x.iter_rows().all(|r| r[j] == first) {
                continue;
            }
            let mu = x.iter_rows().map(|r| r[j]).sum::<f64>() / n as f64;
            let var = x.iter_rows().map(|r| (r[j] - mu).powi(2)).sum::<f64>() / n as f64;
            kept.push(j);
            mean.push(mu);
            std.push(var.sqrt());
        }
        if kept.is_empty() {
            return Err(EncodingError::AllColumnsConstant);
        }
        Ok(Self {
            input_cols: x.cols(),
            kept,
            mean,
            std,
        })
    }

    pub fn apply(&self, x: &Matrix<f64>) -> Result<Matrix<f64>, EncodingError> {
        if x.cols() != self.input_cols {
            return Err(EncodingError::ColumnMismatch {
                expected: self.input_cols,
                found: x.cols(),
            });
        }
        let mut out = x.select_cols(&self.kept);
        for i in 0..out.rows() {
            for (v, (mu, sd)) in out.row_mut(i).iter_mut().zip(self.mean.iter().zip(&self.std)) {
                *v = (*v - mu) / sd;
            }
        }
        Ok(out)
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        self.kept
            .iter()
            .zip(self.mean.iter().zip(&self.std))
            .map(|(&j, (mu, sd))| (row[j] - mu) / sd)
            .collect()
    }

    /// Width of the raw records this was fitted on.
    pub fn input_cols(&self) -> usize {
        self.input_cols
    }

    pub fn kept_columns(&self) -> &[usize] {
        &self.kept
    }

    pub fn dropped_columns(&self) -> Vec<usize> {
        (0..self.input_cols)
            .filter(|j| !self.kept.contains(j))
            .collect()
    }

    pub fn means(&self) -> &[f64] {
        &self.mean
    }

    pub fn stds(&self) -> &[f64] {
        &self.std
    }
}

pub fn standardize(x: &Matrix<f64>) -> Result<(Matrix<f64>, Standardizer), EncodingError> {
    let s = Standardizer::fit(x)?;
    Ok((s.apply(x)?, s))
}

/// Row i becomes (x_i, 1) * y_i, so that a linear classifier w is right on
/// record i exactly when z_i . w > 0.
pub fn fold_labels(x: &Matrix<f64>, y: &[i8]) -> Result<Matrix<f64>, EncodingError> {
    if x.rows() != y.len() {
        return Err(EncodingError::LabelCountMismatch {
            rows: x.rows(),
            labels: y.len(),
        });
    }
    let k = x.cols();
    let mut data = Vec::with_capacity(x.rows() * (k + 1));
    for (index, (row, &label)) in x.iter_rows().zip(y).enumerate() {
        if label != 1 && label != -1 {
            return Err(EncodingError::InvalidLabel {
                index,
                value: label,
            });
        }
        let s = f64::from(label);
        data.extend(row.iter().map(|v| v * s));
        data.push(s);
    }
    Ok(Matrix::new(x.rows(), k + 1, data).expect("shape computed above"))
}

/// Largest absolute entry, used to size the ring.
pub fn max_abs(m: &Matrix<f64>) -> f64 {
    m.as_slice().iter().fold(0.0, |a, v| a.max(v.abs()))
}
