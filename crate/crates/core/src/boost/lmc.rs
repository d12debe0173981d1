use super::adaboost::{BoostState, Decision, InvalidPolicy};
use super::model::{BaseClassifier, BoostedModel, ModelKind};
use super::BoostError;
use crate::matrix::Matrix;

/// Weighted mean of the rows with the given label.
pub fn weighted_centroid(x: &Matrix<f64>, y: &[i8], w: &[f64], label: i8) -> Vec<f64> {
    let mut c = vec![0.0; x.cols()];
    let mut mass = 0.0;
    for ((r, &l), &wi) in x.iter_rows().zip(y).zip(w) {
        if l == label {
            mass += wi;
            for (cj, v) in c.iter_mut().zip(r) {
                *cj += wi * v;
            }
        }
    }
    if mass > 0.0 {
        for cj in &mut c {
            *cj /= mass;
        }
    }
    c
}

/// Hyperplane bisecting the weighted class centroids, as (w, b) over (x, 1).
pub fn lmc(x: &Matrix<f64>, y: &[i8], w: &[f64]) -> Vec<f64> {
    let cp = weighted_centroid(x, y, w, 1);
    let cn = weighted_centroid(x, y, w, -1);
    let mut out: Vec<f64> = cp.iter().zip(&cn).map(|(a, b)| a - b).collect();
    let b = -out
        .iter()
        .zip(cp.iter().zip(&cn))
        .map(|(d, (a, c))| d * 0.5 * (a + c))
        .sum::<f64>();
    out.push(b);
    out
}

/// AdaBoost with linear means classifiers. Stops early if a round's
/// classifier has error exactly 0.5.
pub fn boost_lmc(x: &Matrix<f64>, y: &[i8], rounds: usize) -> Result<BoostedModel, BoostError> {
    if x.rows() != y.len() {
        return Err(BoostError::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    let mut model = BoostedModel::empty(ModelKind::Lmc);
    let mut state = BoostState::new(x.rows(), InvalidPolicy::Negate);
    for _ in 0..rounds {
        let w = lmc(x, y, state.weights());
        let h = BaseClassifier::Linear {
            w,
            pool_index: None,
        };
        let ind: Vec<bool> = x
            .iter_rows()
            .zip(y)
            .map(|(r, &l)| h.predict(r) == l)
            .collect();
        let round = state.consider(&ind)?;
        let h = match (round.decision, h) {
            (Decision::Reject, _) => break,
            (Decision::Negate, BaseClassifier::Linear { w, .. }) => BaseClassifier::Linear {
                w: w.iter().map(|v| -v).collect(),
                pool_index: None,
            },
            (_, h) => h,
        };
        model.push(h, round.alpha.expect("accepted rounds carry alpha"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn centroid_is_weighted_mean() {
        let x = Matrix::from_rows(vec![vec![0.0, 0.0], vec![2.0, 4.0], vec![9.0, 9.0]]).unwrap();
        let c = weighted_centroid(&x, &[1, 1, -1], &[0.25, 0.75, 1.0], 1);
        assert_eq!(c, vec![1.5, 3.0]);
    }

    #[test]
    fn bisector_separates_two_points() {
        let x = Matrix::from_rows(vec![vec![1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
        let w = lmc(&x, &[1, -1], &[0.5, 0.5]);
        assert_eq!(w, vec![2.0, 2.0, 0.0]);
        let m = boost_lmc(&x, &[1, -1], 3).unwrap();
        assert_eq!(m.predict(&[0.5, 0.2]), 1);
        assert_eq!(m.predict(&[-0.5, 0.2]), -1);
    }
}
