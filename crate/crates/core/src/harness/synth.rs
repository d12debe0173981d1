//! Radially separated two-class data: no hyperplane does much better than
//! guessing, but the classes are easy to tell apart by radius.

use super::HarnessError;
use crate::dataset::Dataset;
use crate::matrix::Matrix;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SynthParams {
    /// Radius of the inner ball (class +1).
    pub r1: f64,
    /// Inner and outer radius of the shell (class -1).
    pub r2: f64,
    pub r3: f64,
    /// Std-dev of the isotropic jitter added to every coordinate.
    pub jitter: f64,
    /// Fraction of labels flipped after sampling.
    pub label_noise: f64,
}

impl Default for SynthParams {
    fn default() -> Self {
        Self {
            r1: 1.0,
            r2: 1.0,
            r3: 10.0,
            jitter: 0.2,
            label_noise: 0.1,
        }
    }
}

pub fn gen_synthetic(n: usize, k: usize, seed: u64) -> Result<Dataset, HarnessError> {
    gen_synthetic_with(n, k, seed, &SynthParams::default())
}

/// Class +1 is volume-uniform in the ball of radius r1, class -1
/// volume-uniform in the shell [r2, r3]; classes are balanced and the
/// records shuffled.
pub fn gen_synthetic_with(
    n: usize,
    k: usize,
    seed: u64,
    p: &SynthParams,
) -> Result<Dataset, HarnessError> {
    if n < 10 || k < 2 {
        return Err(HarnessError::Config(format!(
            "synthetic data needs n >= 10 and k >= 2, got n={n} k={k}"
        )));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let kf = k as f64;
    let mut rows = Vec::with_capacity(n);
    let mut labels = Vec::with_capacity(n);
    for i in 0..n {
        let label: i8 = if i < n / 2 { 1 } else { -1 };
        let u: f64 = rng.gen();
        let r = if label == 1 {
            p.r1 * u.powf(1.0 / kf)
        } else {
            let (a, b) = (p.r2.powf(kf), p.r3.powf(kf));
            (a + (b - a) * u).powf(1.0 / kf)
        };
        let dir: Vec<f64> = (0..k).map(|_| StandardNormal.sample(&mut rng)).collect();
        let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        rows.push(
            dir.iter()
                .map(|d| {
                    let j: f64 = StandardNormal.sample(&mut rng);
                    r * d / norm + p.jitter * j
                })
                .collect::<Vec<f64>>(),
        );
        labels.push(label);
    }
    let flips = (p.label_noise * n as f64).round() as usize;
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    for &i in &idx[..flips] {
        labels[i] = -labels[i];
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(&mut rng);
    let rows: Vec<Vec<f64>> = order.iter().map(|&i| rows[i].clone()).collect();
    let labels: Vec<i8> = order.iter().map(|&i| labels[i]).collect();
    let x = Matrix::from_rows(rows).expect("rectangular");
    Ok(Dataset::new(format!("synthetic-{n}x{k}-s{seed}"), x, labels).expect("labels are +-1"))
}

/// Writes a dataset in the same CSV layout the loader reads.
pub fn write_csv(d: &Dataset, path: &std::path::Path) -> Result<(), HarnessError> {
    let io = |e: csv::Error| HarnessError::Io(e.to_string());
    let mut w = csv::Writer::from_path(path).map_err(io)?;
    let mut head = d.feature_names.clone();
    head.push("label".into());
    w.write_record(&head).map_err(io)?;
    for (row, &y) in d.features.iter_rows().zip(&d.labels) {
        let mut rec: Vec<String> = row.iter().map(|v| format!("{v}")).collect();
        rec.push(y.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(|e| HarnessError::Io(e.to_string()))
}
