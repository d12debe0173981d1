use crate::matrix::{Matrix, ShapeError};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DatasetError {
    #[error("{features} feature rows but {labels} labels")]
    LengthMismatch { features: usize, labels: usize },
    #[error("label {value} at record {index} is not +1 or -1")]
    InvalidLabel { index: usize, value: i8 },
    #[error(transparent)]
    Shape(#[from] ShapeError),
}

/// Labelled records with labels in {-1, +1}.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub name: String,
    pub feature_names: Vec<String>,
    pub features: Matrix<f64>,
    pub labels: Vec<i8>,
}

impl Dataset {
    pub fn new(
        name: impl Into<String>,
        features: Matrix<f64>,
        labels: Vec<i8>,
    ) -> Result<Self, DatasetError> {
        if features.rows() != labels.len() {
            return Err(DatasetError::LengthMismatch {
                features: features.rows(),
                labels: labels.len(),
            });
        }
        if let Some((index, &value)) = labels.iter().enumerate().find(|(_, &y)| y != 1 && y != -1)
        {
            return Err(DatasetError::InvalidLabel { index, value });
        }
        let feature_names = (1..=features.cols()).map(|j| format!("a{j}")).collect();
        Ok(Self {
            name: name.into(),
            feature_names,
            features,
            labels,
        })
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn k(&self) -> usize {
        self.features.cols()
    }

    pub fn subset(&self, idx: &[usize]) -> Dataset {
        Dataset {
            name: self.name.clone(),
            feature_names: self.feature_names.clone(),
            features: self.features.select_rows(idx),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }

    /// (count of -1, count of +1)
    pub fn class_counts(&self) -> (usize, usize) {
        let pos = self.labels.iter().filter(|&&y| y == 1).count();
        (self.labels.len() - pos, pos)
    }
}
