use super::ProtocolError;
use crate::boost::{BaseClassifier, BoostedModel, Decision, ModelKind};
use crate::encoding::FixedPointParams;
use serde::{Deserialize, Serialize};

/// One accepted base classifier as the Cloud stores it: already oriented
/// (negated if the CSP asked for that).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CloudComponent {
    pub pool_index: usize,
    pub w: Vec<f64>,
}

/// The trained model as it sits after training: classifiers at the Cloud,
/// weights at the CSP.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DistributedModel {
    pub cloud_part: Vec<CloudComponent>,
    pub csp_part: Vec<f64>,
    /// Decision for every tried pool entry.
    pub acceptance: Vec<Decision>,
    pub seed: u64,
}

impl DistributedModel {
    pub fn acceptance_bitmap(&self) -> Vec<bool> {
        self.acceptance.iter().map(|d| d.accepted()).collect()
    }

    pub fn len(&self) -> usize {
        self.csp_part.len()
    }

    pub fn is_empty(&self) -> bool {
        self.csp_part.is_empty()
    }
}

/// What the data owner does after downloading both parts.
pub fn reconstruct_model(
    m: &DistributedModel,
    fp: FixedPointParams,
) -> Result<BoostedModel, ProtocolError> {
    let accepted = m.acceptance.iter().filter(|d| d.accepted()).count();
    if m.cloud_part.len() != m.csp_part.len() || accepted != m.csp_part.len() {
        return Err(ProtocolError::PartMismatch {
            cloud: m.cloud_part.len(),
            csp: m.csp_part.len(),
        });
    }
    let mut out = BoostedModel::empty(ModelKind::Rlc);
    out.seed = Some(m.seed);
    out.fixed_point = Some(fp);
    for (c, &a) in m.cloud_part.iter().zip(&m.csp_part) {
        out.push(
            BaseClassifier::Linear {
                w: c.w.clone(),
                pool_index: Some(c.pool_index),
            },
            a,
        );
    }
    Ok(out)
}
