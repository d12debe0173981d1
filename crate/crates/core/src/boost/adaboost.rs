//! Weight bookkeeping shared by every base learner and by the CSP.
//!
//! Indicator convention: `true` means the base classifier is right on that
//! record. The weighted error is the mass of the `false` entries.

use super::BoostError;
use serde::{Deserialize, Serialize};

/// Errors below this are clamped so alpha stays finite.
pub const EPS_FLOOR: f64 = 1e-10;

/// Weighted errors this close to 0.5 count as exactly one half. Without it a
/// candidate at 0.5 + 1 ulp would be negated into 0.5 + 1 ulp again.
pub const HALF_TOL: f64 = 1e-12;

pub fn weighted_error(indicator: &[bool], weights: &[f64]) -> f64 {
    debug_assert_eq!(indicator.len(), weights.len());
    indicator
        .iter()
        .zip(weights)
        .filter(|(&ok, _)| !ok)
        .map(|(_, &w)| w)
        .sum()
}

/// 0.5 ln((1 - e) / e) for e in (EPS_FLOOR, 0.5).
pub fn alpha(e: f64) -> Result<f64, BoostError> {
    if e.is_nan() || e >= 0.5 {
        return Err(BoostError::InvalidBaseClassifier { error: e });
    }
    if e <= EPS_FLOOR {
        return Err(BoostError::DegenerateError { error: e });
    }
    Ok(0.5 * ((1.0 - e) / e).ln())
}

/// Like [`alpha`] but errors at or below the floor are clamped to it.
pub fn clamped_alpha(e: f64) -> Result<f64, BoostError> {
    match alpha(e) {
        Err(BoostError::DegenerateError { .. }) => {
            Ok(0.5 * ((1.0 - EPS_FLOOR) / EPS_FLOOR).ln())
        }
        r => r,
    }
}

/// Misclassified records are scaled by e^alpha, correct ones by e^-alpha,
/// then the vector is L1-normalized.
pub fn update_weights(weights: &mut [f64], indicator: &[bool], alpha: f64) {
    let up = alpha.exp();
    let down = (-alpha).exp();
    for (w, &ok) in weights.iter_mut().zip(indicator) {
        *w *= if ok { down } else { up };
    }
    let total: f64 = weights.iter().sum();
    for w in weights.iter_mut() {
        *w /= total;
    }
}

/// What to do with a candidate whose weighted error is above one half.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum InvalidPolicy {
    /// Use the negated classifier (error 1 - e); only e = 0.5 is rejected.
    #[default]
    Negate,
    /// Discard every candidate with e >= 0.5.
    Reject,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    Accept,
    /// Accepted with the classifier's sign flipped.
    Negate,
    Reject,
}

impl Decision {
    pub fn to_byte(self) -> u8 {
        match self {
            Decision::Reject => 0,
            Decision::Accept => 1,
            Decision::Negate => 2,
        }
    }

    pub fn from_byte(b: u8) -> Option<Self> {
        match b {
            0 => Some(Decision::Reject),
            1 => Some(Decision::Accept),
            2 => Some(Decision::Negate),
            _ => None,
        }
    }

    pub fn accepted(self) -> bool {
        self != Decision::Reject
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Round {
    pub decision: Decision,
    /// Weighted error of the classifier as used (after any negation).
    pub error: f64,
    pub alpha: Option<f64>,
    /// Error of the accepted classifier under the updated weights, minus 0.5.
    /// None for rejected or clamped rounds.
    pub fixed_point_residual: Option<f64>,
}

/// Record weights plus the accepted alphas: everything the CSP keeps.
#[derive(Clone, Debug, PartialEq)]
pub struct BoostState {
    weights: Vec<f64>,
    alphas: Vec<f64>,
    errors: Vec<f64>,
    policy: InvalidPolicy,
    tried: usize,
}

impl BoostState {
    pub fn new(n: usize, policy: InvalidPolicy) -> Self {
        Self {
            weights: vec![1.0 / n as f64; n],
            alphas: Vec::new(),
            errors: Vec::new(),
            policy,
            tried: 0,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn alphas(&self) -> &[f64] {
        &self.alphas
    }

    /// Errors of the accepted classifiers, in order.
    pub fn errors(&self) -> &[f64] {
        &self.errors
    }

    pub fn accepted(&self) -> usize {
        self.alphas.len()
    }

    pub fn tried(&self) -> usize {
        self.tried
    }

    /// Scores one candidate given its indicator vector and updates the
    /// weights if it is kept.
    pub fn consider(&mut self, indicator: &[bool]) -> Result<Round, BoostError> {
        if indicator.len() != self.weights.len() {
            return Err(BoostError::DimensionMismatch {
                expected: self.weights.len(),
                found: indicator.len(),
            });
        }
        self.tried += 1;
        let e = weighted_error(indicator, &self.weights);
        let (decision, used) = if (e - 0.5).abs() <= HALF_TOL {
            return Ok(Round {
                decision: Decision::Reject,
                error: e,
                alpha: None,
                fixed_point_residual: None,
            });
        } else if e < 0.5 {
            (Decision::Accept, None)
        } else if self.policy == InvalidPolicy::Negate {
            (
                Decision::Negate,
                Some(indicator.iter().map(|b| !b).collect::<Vec<_>>()),
            )
        } else {
            return Ok(Round {
                decision: Decision::Reject,
                error: e,
                alpha: None,
                fixed_point_residual: None,
            });
        };
        let ind = used.as_deref().unwrap_or(indicator);
        let e = if used.is_some() {
            weighted_error(ind, &self.weights)
        } else {
            e
        };
        let degenerate = e <= EPS_FLOOR;
        let a = clamped_alpha(e)?;
        update_weights(&mut self.weights, ind, a);
        self.alphas.push(a);
        self.errors.push(e);
        let residual = (!degenerate).then(|| weighted_error(ind, &self.weights) - 0.5);
        Ok(Round {
            decision,
            error: e,
            alpha: Some(a),
            fixed_point_residual: residual,
        })
    }
}

/// Upper bound on training error after the given rounds.
pub fn training_error_bound(errors: &[f64]) -> f64 {
    errors
        .iter()
        .map(|&e| 2.0 * (e * (1.0 - e)).sqrt())
        .product()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_values() {
        assert!((alpha(0.25).unwrap() - 0.5 * 3f64.ln()).abs() < 1e-12);
        assert!((alpha(0.1).unwrap() - 0.5 * 9f64.ln()).abs() < 1e-12);
        assert!(matches!(
            alpha(0.5),
            Err(BoostError::InvalidBaseClassifier { .. })
        ));
        assert!(matches!(alpha(0.0), Err(BoostError::DegenerateError { .. })));
        assert!(clamped_alpha(0.0).unwrap().is_finite());
    }

    #[test]
    fn update_example() {
        let mut d = vec![0.5, 0.5];
        update_weights(&mut d, &[true, false], 0.5 * 3f64.ln());
        assert!((d[0] - 0.25).abs() < 1e-12);
        assert!((d[1] - 0.75).abs() < 1e-12);
    }

    #[test]
    fn all_correct_keeps_weights() {
        let mut d = vec![0.2, 0.3, 0.5];
        update_weights(&mut d, &[true, true, true], 0.7);
        for (a, b) in d.iter().zip([0.2, 0.3, 0.5]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn exact_half_is_rejected() {
        let mut s = BoostState::new(2, InvalidPolicy::Negate);
        let r = s.consider(&[true, false]).unwrap();
        assert_eq!(r.decision, Decision::Reject);
        assert_eq!(s.weights(), &[0.5, 0.5]);
        assert_eq!(s.tried(), 1);
        assert_eq!(s.accepted(), 0);
    }

    #[test]
    fn negation_and_rejection_policies() {
        let ind = [false, false, true, false];
        let mut neg = BoostState::new(4, InvalidPolicy::Negate);
        let r = neg.consider(&ind).unwrap();
        assert_eq!(r.decision, Decision::Negate);
        assert!((r.error - 0.25).abs() < 1e-15);
        assert!(r.fixed_point_residual.unwrap().abs() < 1e-12);
        let mut rej = BoostState::new(4, InvalidPolicy::Reject);
        assert_eq!(rej.consider(&ind).unwrap().decision, Decision::Reject);
    }

    #[test]
    fn all_ones_is_clamped_and_accepted() {
        let mut s = BoostState::new(3, InvalidPolicy::Negate);
        let r = s.consider(&[true; 3]).unwrap();
        assert_eq!(r.decision, Decision::Accept);
        assert!(r.alpha.unwrap() > 10.0);
        assert_eq!(r.fixed_point_residual, None);
    }
}
