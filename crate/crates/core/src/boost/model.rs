use super::BoostError;
use crate::encoding::{FixedPointParams, Standardizer};
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum ModelKind {
    Rlc,
    Ds,
    Lmc,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum BaseClassifier {
    /// h(x) = +1 iff w . (x, 1) > 0.
    Linear {
        w: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pool_index: Option<usize>,
    },
    /// h(x) = polarity if x[feature] > threshold, else -polarity.
    Stump {
        feature: usize,
        threshold: f64,
        polarity: i8,
    },
}

impl BaseClassifier {
    pub fn predict(&self, x: &[f64]) -> i8 {
        match self {
            BaseClassifier::Linear { w, .. } => {
                let k = w.len() - 1;
                let s: f64 = w[..k].iter().zip(x).map(|(a, b)| a * b).sum::<f64>() + w[k];
                if s > 0.0 {
                    1
                } else {
                    -1
                }
            }
            BaseClassifier::Stump {
                feature,
                threshold,
                polarity,
            } => {
                if x[*feature] > *threshold {
                    *polarity
                } else {
                    -*polarity
                }
            }
        }
    }
}

/// Weighted vote of base classifiers over standardized features.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoostedModel {
    pub kind: ModelKind,
    pub classifiers: Vec<BaseClassifier>,
    pub alphas: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_point: Option<FixedPointParams>,
    /// Present when the model should be applied to raw (unstandardized) rows.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub standardizer: Option<Standardizer>,
}

impl BoostedModel {
    pub fn empty(kind: ModelKind) -> Self {
        Self {
            kind,
            classifiers: Vec::new(),
            alphas: Vec::new(),
            seed: None,
            fixed_point: None,
            standardizer: None,
        }
    }

    pub fn len(&self) -> usize {
        self.alphas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alphas.is_empty()
    }

    pub fn push(&mut self, h: BaseClassifier, alpha: f64) {
        self.classifiers.push(h);
        self.alphas.push(alpha);
    }

    /// Sum of alpha_t h_t(x) over the first `rounds` classifiers.
    pub fn score_prefix(&self, x: &[f64], rounds: usize) -> f64 {
        self.classifiers
            .iter()
            .zip(&self.alphas)
            .take(rounds)
            .map(|(h, a)| a * f64::from(h.predict(x)))
            .sum()
    }

    pub fn score(&self, x: &[f64]) -> f64 {
        self.score_prefix(x, self.len())
    }

    /// sign(H(x)) with sign(0) = -1. `x` is in standardized space.
    pub fn predict(&self, x: &[f64]) -> i8 {
        if self.score(x) > 0.0 {
            1
        } else {
            -1
        }
    }

    /// Applies the stored standardizer first, if any.
    pub fn predict_raw(&self, x: &[f64]) -> i8 {
        match &self.standardizer {
            Some(s) => self.predict(&s.apply_row(x)),
            None => self.predict(x),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, BoostError> {
        serde_json::from_str(s).map_err(|e| BoostError::InvalidParameter(e.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_model_predicts_negative() {
        let m = BoostedModel::empty(ModelKind::Rlc);
        assert_eq!(m.predict(&[1.0, 2.0]), -1);
    }

    #[test]
    fn single_classifier_sign() {
        let mut m = BoostedModel::empty(ModelKind::Rlc);
        m.push(
            BaseClassifier::Linear {
                w: vec![1.0, -0.5],
                pool_index: Some(0),
            },
            1.0,
        );
        assert_eq!(m.predict(&[1.0]), 1);
        assert_eq!(m.predict(&[0.2]), -1);
        assert_eq!(m.predict(&[0.5]), -1);
        let back = BoostedModel::from_json(&m.to_json()).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn stump_polarity() {
        let h = BaseClassifier::Stump {
            feature: 1,
            threshold: 0.0,
            polarity: -1,
        };
        assert_eq!(h.predict(&[9.0, 1.0]), -1);
        assert_eq!(h.predict(&[9.0, -1.0]), 1);
    }
}
