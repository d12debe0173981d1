use super::adaboost::{BoostState, Decision, InvalidPolicy};
use super::model::{BaseClassifier, BoostedModel, ModelKind};
use super::BoostError;
use crate::matrix::Matrix;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Stump {
    pub feature: usize,
    pub threshold: f64,
    pub polarity: i8,
    pub error: f64,
}

impl Stump {
    pub fn classifier(&self) -> BaseClassifier {
        BaseClassifier::Stump {
            feature: self.feature,
            threshold: self.threshold,
            polarity: self.polarity,
        }
    }
}

/// Per-feature ascending order, computed once.
fn sorted_orders(x: &Matrix<f64>) -> Vec<Vec<usize>> {
    (0..x.cols())
        .map(|j| {
            let mut idx: Vec<usize> = (0..x.rows()).collect();
            idx.sort_by(|&a, &b| x.get(a, j).total_cmp(&x.get(b, j)));
            idx
        })
        .collect()
}

/// Exhaustive search over features, midpoints between distinct sorted
/// values (plus one threshold below the minimum), and both polarities.
/// Ties go to the lowest feature, then the lowest threshold, then +1.
fn best_stump(x: &Matrix<f64>, y: &[i8], w: &[f64], orders: &[Vec<usize>]) -> Stump {
    let total: f64 = w.iter().sum();
    let neg_mass: f64 = y.iter().zip(w).filter(|(&l, _)| l < 0).map(|(_, &v)| v).sum();
    let mut best = Stump {
        feature: 0,
        threshold: f64::NAN,
        polarity: 1,
        error: f64::INFINITY,
    };
    let consider = |feature: usize, threshold: f64, err_pos: f64, best: &mut Stump| {
        for (pol, err) in [(1i8, err_pos), (-1i8, total - err_pos)] {
            if err < best.error {
                *best = Stump {
                    feature,
                    threshold,
                    polarity: pol,
                    error: err,
                };
            }
        }
    };
    for (j, order) in orders.iter().enumerate() {
        // Everything above the threshold is predicted +1 under polarity +1.
        let mut err = neg_mass;
        let lowest = x.get(order[0], j);
        consider(j, lowest - 1.0, err, &mut best);
        for pos in 0..order.len() {
            let i = order[pos];
            err += if y[i] > 0 { w[i] } else { -w[i] };
            let v = x.get(i, j);
            let next = order.get(pos + 1).map(|&nx| x.get(nx, j));
            match next {
                Some(nv) if nv == v => continue,
                Some(nv) => consider(j, 0.5 * (v + nv), err, &mut best),
                None => {}
            }
        }
    }
    best
}

/// AdaBoost with optimal decision stumps on standardized features.
/// Stops early if the best stump has error exactly 0.5.
pub fn boost_ds(x: &Matrix<f64>, y: &[i8], rounds: usize) -> Result<BoostedModel, BoostError> {
    if x.rows() != y.len() {
        return Err(BoostError::DimensionMismatch {
            expected: x.rows(),
            found: y.len(),
        });
    }
    let mut model = BoostedModel::empty(ModelKind::Ds);
    if x.rows() == 0 || x.cols() == 0 {
        return Ok(model);
    }
    let orders = sorted_orders(x);
    let mut state = BoostState::new(x.rows(), InvalidPolicy::Reject);
    for _ in 0..rounds {
        let s = best_stump(x, y, state.weights(), &orders);
        let h = s.classifier();
        let ind: Vec<bool> = x
            .iter_rows()
            .zip(y)
            .map(|(r, &l)| h.predict(r) == l)
            .collect();
        let round = state.consider(&ind)?;
        if round.decision == Decision::Reject {
            break;
        }
        model.push(h, round.alpha.expect("accepted rounds carry alpha"));
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn perfect_threshold_one_stump() {
        let x = Matrix::from_rows(vec![vec![-2.0], vec![-1.0], vec![1.0], vec![3.0]]).unwrap();
        let y = [-1, -1, 1, 1];
        let m = boost_ds(&x, &y, 1).unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(
            m.classifiers[0],
            BaseClassifier::Stump {
                feature: 0,
                threshold: 0.0,
                polarity: 1
            }
        );
        assert!(m.alphas[0].is_finite() && m.alphas[0] > 10.0);
        for (r, &l) in x.iter_rows().zip(&y) {
            assert_eq!(m.predict(r), l);
        }
    }

    #[test]
    fn matches_brute_force_search() {
        let x = Matrix::from_rows(vec![
            vec![0.3, 1.0],
            vec![-0.2, 0.5],
            vec![0.3, -1.0],
            vec![1.5, 0.0],
            vec![-1.0, 2.0],
            vec![0.7, -0.3],
        ])
        .unwrap();
        let y = [1, -1, -1, 1, 1, -1];
        let w = [0.1, 0.25, 0.15, 0.2, 0.05, 0.25];
        let s = best_stump(&x, &y, &w, &sorted_orders(&x));
        let mut brute = f64::INFINITY;
        for j in 0..2 {
            let mut vals: Vec<f64> = x.iter_rows().map(|r| r[j]).collect();
            vals.push(-10.0);
            for &t in &vals {
                for pol in [1i8, -1] {
                    let h = BaseClassifier::Stump {
                        feature: j,
                        threshold: t,
                        polarity: pol,
                    };
                    let e: f64 = x
                        .iter_rows()
                        .zip(&y)
                        .zip(&w)
                        .filter(|((r, &l), _)| h.predict(r) != l)
                        .map(|(_, &v)| v)
                        .sum();
                    brute = brute.min(e);
                }
            }
        }
        assert!((s.error - brute).abs() < 1e-12);
    }
}
