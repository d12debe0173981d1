use super::model::BoostedModel;
use super::BoostError;
use crate::dataset::Dataset;
use crate::encoding::Standardizer;
use crate::matrix::Matrix;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

pub const DEFAULT_CV_SEED: u64 = 42;

/// Shuffles each class under `seed` and deals its records round-robin over
/// the folds, continuing where the previous class stopped.
pub fn stratified_folds(labels: &[i8], folds: usize, seed: u64) -> Result<Vec<Vec<usize>>, BoostError> {
    if folds < 2 || labels.len() < folds {
        return Err(BoostError::FoldTooSmall {
            n: labels.len(),
            folds,
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut out = vec![Vec::new(); folds];
    let mut next = 0;
    for class in [-1i8, 1] {
        let mut idx: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == class).collect();
        idx.shuffle(&mut rng);
        for i in idx {
            out[next].push(i);
            next = (next + 1) % folds;
        }
    }
    for f in &mut out {
        f.sort_unstable();
    }
    Ok(out)
}

/// Training split handed to a CV trainer: standardized with statistics
/// from this split only.
pub struct TrainSplit<'a> {
    pub fold: usize,
    pub x: &'a Matrix<f64>,
    pub y: &'a [i8],
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CvResult {
    pub fold_accuracies: Vec<f64>,
    pub mean: f64,
    /// Sample standard deviation over folds.
    pub std: f64,
}

impl CvResult {
    pub fn from_folds(fold_accuracies: Vec<f64>) -> Self {
        let n = fold_accuracies.len() as f64;
        let mean = fold_accuracies.iter().sum::<f64>() / n;
        let std = if fold_accuracies.len() > 1 {
            (fold_accuracies.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
        } else {
            0.0
        };
        Self {
            fold_accuracies,
            mean,
            std,
        }
    }
}

pub fn accuracy(model: &BoostedModel, x: &Matrix<f64>, y: &[i8]) -> f64 {
    let hits = x
        .iter_rows()
        .zip(y)
        .filter(|(r, &l)| model.predict(r) == l)
        .count();
    hits as f64 / y.len().max(1) as f64
}

/// A trained fold: the model plus its standardized held-out split.
pub struct FoldEval {
    pub model: BoostedModel,
    pub x_test: Matrix<f64>,
    pub y_test: Vec<i8>,
}

/// Runs the trainer on every stratified fold. The trainer sees the
/// standardized training split; the test split is standardized with the
/// training statistics.
pub fn cv_folds<F>(data: &Dataset, folds: usize, seed: u64, mut trainer: F) -> Result<Vec<FoldEval>, BoostError>
where
    F: FnMut(TrainSplit<'_>) -> Result<BoostedModel, BoostError>,
{
    let parts = stratified_folds(&data.labels, folds, seed)?;
    let mut out = Vec::with_capacity(folds);
    for (f, test_idx) in parts.iter().enumerate() {
        let train_idx: Vec<usize> = parts
            .iter()
            .enumerate()
            .filter(|(g, _)| *g != f)
            .flat_map(|(_, p)| p.iter().copied())
            .collect();
        let train = data.subset(&train_idx);
        let test = data.subset(test_idx);
        let s = Standardizer::fit(&train.features)?;
        let xtr = s.apply(&train.features)?;
        let x_test = s.apply(&test.features)?;
        let model = trainer(TrainSplit {
            fold: f,
            x: &xtr,
            y: &train.labels,
        })?;
        out.push(FoldEval {
            model,
            x_test,
            y_test: test.labels,
        });
    }
    Ok(out)
}

/// Stratified k-fold accuracy; see [`cv_folds`].
pub fn cv_accuracy<F>(data: &Dataset, folds: usize, seed: u64, trainer: F) -> Result<CvResult, BoostError>
where
    F: FnMut(TrainSplit<'_>) -> Result<BoostedModel, BoostError>,
{
    let evals = cv_folds(data, folds, seed, trainer)?;
    Ok(CvResult::from_folds(
        evals
            .iter()
            .map(|e| accuracy(&e.model, &e.x_test, &e.y_test))
            .collect(),
    ))
}

/// Transposes p indicator vectors of length n into n vectors of length p.
pub fn characterization(indicators: &[Vec<bool>]) -> Result<Vec<Vec<bool>>, BoostError> {
    let n = indicators.first().map_or(0, Vec::len);
    for (index, v) in indicators.iter().enumerate() {
        if v.len() != n {
            return Err(BoostError::RaggedInput {
                index,
                expected: n,
                found: v.len(),
            });
        }
    }
    Ok((0..n)
        .map(|i| indicators.iter().map(|v| v[i]).collect())
        .collect())
}
