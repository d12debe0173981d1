//! Do records with similar characterization vectors lie close together?

use super::HarnessError;
use crate::boost::rlc::{apply_and_indicate, RlcPool};
use crate::dataset::Dataset;
use crate::encoding::{fold_labels, standardize};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_PAIR_SAMPLE: usize = 1_000_000;
/// Buckets with fewer pairs than this are flagged.
pub const MIN_BUCKET_PAIRS: usize = 30;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Bucket {
    pub hamming: usize,
    pub pairs: usize,
    pub mean_distance: f64,
    pub std_distance: f64,
    pub insufficient_pairs: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LeakageReport {
    pub dataset: String,
    pub n: usize,
    pub p: usize,
    pub seed: u64,
    pub sampled_pairs: usize,
    pub exhaustive: bool,
    pub global_mean: f64,
    pub global_std: f64,
    /// Only non-empty buckets, by increasing Hamming distance.
    pub buckets: Vec<Bucket>,
}

impl LeakageReport {
    pub fn bucket(&self, d: usize) -> Option<&Bucket> {
        self.buckets.iter().find(|b| b.hamming == d)
    }

    /// |mean(bucket d) - global mean| in units of the pooled std of the
    /// bucket and the whole sample.
    pub fn separation(&self, d: usize) -> Option<f64> {
        let b = self.bucket(d)?;
        let (n1, n2) = (b.pairs as f64, self.sampled_pairs as f64);
        if n1 + n2 <= 2.0 {
            return None;
        }
        let pooled = (((n1 - 1.0).max(0.0) * b.std_distance.powi(2)
            + (n2 - 1.0) * self.global_std.powi(2))
            / (n1 + n2 - 2.0))
            .sqrt();
        Some((b.mean_distance - self.global_mean).abs() / pooled)
    }
}

#[derive(Default, Clone, Copy)]
struct Acc {
    n: usize,
    sum: f64,
    sq: f64,
}

impl Acc {
    fn add(&mut self, v: f64) {
        self.n += 1;
        self.sum += v;
        self.sq += v * v;
    }

    fn mean(&self) -> f64 {
        self.sum / self.n.max(1) as f64
    }

    /// Sample std.
    fn std(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let m = self.mean();
        ((self.sq - self.n as f64 * m * m) / (self.n as f64 - 1.0)).max(0.0).sqrt()
    }
}

fn pack(bits: impl Iterator<Item = bool>) -> Vec<u64> {
    let mut out = Vec::new();
    for (i, b) in bits.enumerate() {
        if i % 64 == 0 {
            out.push(0);
        }
        if b {
            *out.last_mut().expect("pushed") |= 1 << (i % 64);
        }
    }
    out
}

/// Buckets record pairs by the Hamming distance of their characterization
/// vectors. `indicators` holds one vector per tried classifier; distances
/// are Euclidean in `x`. All pairs are used when there are at most
/// `pair_sample`, otherwise that many pairs are drawn with replacement.
pub fn bucket_pairs(
    x: &crate::matrix::Matrix<f64>,
    indicators: &[Vec<bool>],
    pair_sample: usize,
    seed: u64,
) -> PairBuckets {
    let n = x.rows();
    let p = indicators.len();
    let cv: Vec<Vec<u64>> = (0..n)
        .map(|i| pack(indicators.iter().map(|v| v[i])))
        .collect();
    let mut acc = vec![Acc::default(); p + 1];
    let mut all = Acc::default();
    let mut visit = |a: usize, b: usize| {
        let d: u32 = cv[a].iter().zip(&cv[b]).map(|(u, v)| (u ^ v).count_ones()).sum();
        let dist = x
            .row(a)
            .iter()
            .zip(x.row(b))
            .map(|(u, v)| (u - v) * (u - v))
            .sum::<f64>()
            .sqrt();
        acc[d as usize].add(dist);
        all.add(dist);
    };
    let total = n * n.saturating_sub(1) / 2;
    let exhaustive = total <= pair_sample;
    if exhaustive {
        for a in 0..n {
            for b in a + 1..n {
                visit(a, b);
            }
        }
    } else {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        for _ in 0..pair_sample {
            let a = rng.gen_range(0..n);
            let mut b = rng.gen_range(0..n - 1);
            if b >= a {
                b += 1;
            }
            visit(a, b);
        }
    }
    let buckets = acc
        .iter()
        .enumerate()
        .filter(|(_, a)| a.n > 0)
        .map(|(d, a)| Bucket {
            hamming: d,
            pairs: a.n,
            mean_distance: a.mean(),
            std_distance: a.std(),
            insufficient_pairs: a.n < MIN_BUCKET_PAIRS,
        })
        .collect();
    PairBuckets {
        buckets,
        sampled: all.n,
        exhaustive,
        global_mean: all.mean(),
        global_std: all.std(),
    }
}

pub struct PairBuckets {
    pub buckets: Vec<Bucket>,
    pub sampled: usize,
    pub exhaustive: bool,
    pub global_mean: f64,
    pub global_std: f64,
}

/// Standardizes and folds `data`, applies the first `p` pool classifiers
/// of `seed` (the indicators the CSP would see), and buckets record pairs.
pub fn leakage_analysis(
    data: &Dataset,
    p: usize,
    seed: u64,
    pair_sample: usize,
) -> Result<LeakageReport, HarnessError> {
    if p == 0 || data.n() < 2 {
        return Err(HarnessError::Config("leakage analysis needs p >= 1 and n >= 2".into()));
    }
    let (x, _) = standardize(&data.features)?;
    let z = fold_labels(&x, &data.labels)?;
    let indicators = RlcPool::take(seed, x.cols(), p)
        .iter()
        .map(|h| apply_and_indicate(&z, &h.w))
        .collect::<Result<Vec<_>, _>>()?;
    let pb = bucket_pairs(&x, &indicators, pair_sample, seed);
    let thin: Vec<usize> = pb
        .buckets
        .iter()
        .filter(|b| b.insufficient_pairs)
        .map(|b| b.hamming)
        .collect();
    if !thin.is_empty() {
        log::warn!(
            "{} hamming buckets have fewer than {MIN_BUCKET_PAIRS} pairs (first: {:?})",
            thin.len(),
            &thin[..thin.len().min(5)]
        );
    }
    Ok(LeakageReport {
        dataset: data.name.clone(),
        n: data.n(),
        p,
        seed,
        sampled_pairs: pb.sampled,
        exhaustive: pb.exhaustive,
        global_mean: pb.global_mean,
        global_std: pb.global_std,
        buckets: pb.buckets,
    })
}
