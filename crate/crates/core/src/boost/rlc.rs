use super::adaboost::{BoostState, Decision, InvalidPolicy, Round};
use super::model::{BaseClassifier, BoostedModel, ModelKind};
use super::BoostError;
use crate::encoding::{FixedPointParams, RingValue};
use crate::matrix::Matrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Random linear classifier over (x, 1): k coefficients in [-1, 1] and an
/// intercept in [-2, 2].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Rlc {
    pub w: Vec<f64>,
}

pub const COEF_RANGE: f64 = 1.0;
pub const INTERCEPT_RANGE: f64 = 2.0;

pub fn gen_rlc<R: Rng + ?Sized>(k: usize, rng: &mut R) -> Rlc {
    let mut w: Vec<f64> = (0..k)
        .map(|_| rng.gen_range(-COEF_RANGE..=COEF_RANGE))
        .collect();
    w.push(rng.gen_range(-INTERCEPT_RANGE..=INTERCEPT_RANGE));
    Rlc { w }
}

impl Rlc {
    pub fn negated(&self) -> Rlc {
        Rlc {
            w: self.w.iter().map(|v| -v).collect(),
        }
    }
}

/// The Cloud's candidate sequence; entry t depends only on the seed.
#[derive(Clone, Debug)]
pub struct RlcPool {
    seed: u64,
    k: usize,
    rng: ChaCha20Rng,
    drawn: usize,
}

impl RlcPool {
    pub fn new(seed: u64, k: usize) -> Self {
        Self {
            seed,
            k,
            rng: ChaCha20Rng::seed_from_u64(seed),
            drawn: 0,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn take(seed: u64, k: usize, count: usize) -> Vec<Rlc> {
        let mut p = Self::new(seed, k);
        (0..count).map(|_| p.next_rlc()).collect()
    }

    pub fn next_rlc(&mut self) -> Rlc {
        self.drawn += 1;
        gen_rlc(self.k, &mut self.rng)
    }
}

/// I_i = 1 iff z_i . w > 0.
pub fn apply_and_indicate(z: &Matrix<f64>, w: &[f64]) -> Result<Vec<bool>, BoostError> {
    if z.cols() != w.len() {
        return Err(BoostError::DimensionMismatch {
            expected: z.cols(),
            found: w.len(),
        });
    }
    Ok(z.iter_rows()
        .map(|r| r.iter().zip(w).map(|(a, b)| a * b).sum::<f64>() > 0.0)
        .collect())
}

/// Ring version: I_i = 1 iff the top bit of z_i . w (mod 2^L) is clear.
/// This is the comparison the garbled circuit computes, so an exact zero
/// counts as correct here.
pub fn apply_and_indicate_ring(
    z: &Matrix<RingValue>,
    w: &[RingValue],
    fp: &FixedPointParams,
) -> Result<Vec<bool>, BoostError> {
    if z.cols() != w.len() {
        return Err(BoostError::DimensionMismatch {
            expected: z.cols(),
            found: w.len(),
        });
    }
    Ok(z.iter_rows()
        .map(|r| !fp.is_negative(fp.dot(r, w)))
        .collect())
}

/// Records whose ring inner product is exactly zero.
pub fn ring_ties(z: &Matrix<RingValue>, w: &[RingValue], fp: &FixedPointParams) -> Vec<usize> {
    z.iter_rows()
        .enumerate()
        .filter(|(_, r)| fp.dot(r, w) == 0)
        .map(|(i, _)| i)
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RlcOptions {
    pub tau: usize,
    pub p_max: usize,
    pub policy: InvalidPolicy,
    /// Score candidates in the fixed-point ring instead of in floating point.
    pub quantize: Option<FixedPointParams>,
    /// Keep every tried indicator vector in the outcome.
    pub keep_indicators: bool,
}

impl RlcOptions {
    pub fn new(tau: usize) -> Self {
        Self {
            tau,
            p_max: 2 * tau,
            policy: InvalidPolicy::default(),
            quantize: None,
            keep_indicators: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RlcOutcome {
    pub model: BoostedModel,
    pub p_used: usize,
    pub pool_exhausted: bool,
    pub rounds: Vec<Round>,
    /// Raw indicator of every tried candidate, before any negation.
    pub indicators: Vec<Vec<bool>>,
    /// Training error of the running ensemble after each accepted round.
    pub train_errors: Vec<f64>,
}

/// Tries candidates from the pool until `tau` are accepted or `p_max` have
/// been tried. `z` is the label-folded training matrix.
pub fn boost_rlc(z: &Matrix<f64>, opts: &RlcOptions, seed: u64) -> Result<RlcOutcome, BoostError> {
    if opts.tau == 0 || opts.p_max < opts.tau {
        return Err(BoostError::InvalidParameter(format!(
            "need 1 <= tau <= p_max, got tau={} p_max={}",
            opts.tau, opts.p_max
        )));
    }
    let n = z.rows();
    let dims = z.cols();
    let encoded = match &opts.quantize {
        Some(fp) => Some(fp.encode_matrix(z)?),
        None => None,
    };
    let mut pool = RlcPool::new(seed, dims - 1);
    let mut state = BoostState::new(n, opts.policy);
    let mut model = BoostedModel::empty(ModelKind::Rlc);
    model.seed = Some(seed);
    model.fixed_point = opts.quantize;
    let mut rounds = Vec::new();
    let mut indicators = Vec::new();
    let mut margins = vec![0.0f64; n];
    let mut train_errors = Vec::new();
    while state.accepted() < opts.tau && state.tried() < opts.p_max {
        let idx = state.tried();
        let h = pool.next_rlc();
        let ind = match (&opts.quantize, &encoded) {
            (Some(fp), Some(ez)) => apply_and_indicate_ring(ez, &fp.encode_slice(&h.w)?, fp)?,
            _ => apply_and_indicate(z, &h.w)?,
        };
        let round = state.consider(&ind)?;
        if let Some(a) = round.alpha {
            let neg = round.decision == Decision::Negate;
            let w = if neg { h.negated().w } else { h.w };
            for (m, &ok) in margins.iter_mut().zip(&ind) {
                *m += if ok != neg { a } else { -a };
            }
            train_errors.push(margins.iter().filter(|&&m| m <= 0.0).count() as f64 / n as f64);
            model.push(
                BaseClassifier::Linear {
                    w,
                    pool_index: Some(idx),
                },
                a,
            );
        }
        rounds.push(round);
        if opts.keep_indicators {
            indicators.push(ind);
        }
    }
    let pool_exhausted = state.accepted() < opts.tau;
    if pool_exhausted {
        log::warn!(
            "only {} of {} classifiers accepted after {} tries",
            state.accepted(),
            opts.tau,
            state.tried()
        );
    }
    Ok(RlcOutcome {
        model,
        p_used: state.tried(),
        pool_exhausted,
        rounds,
        indicators,
        train_errors,
    })
}
