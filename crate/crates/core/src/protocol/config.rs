use super::ProtocolError;
use crate::ahe::SUPPORTED_KEY_BITS;
use crate::boost::rlc::INTERCEPT_RANGE;
use crate::boost::InvalidPolicy;
use crate::encoding::{max_abs, FixedPointParams};
use crate::gc::{GarbleMode, OtMode};
use crate::matrix::Matrix;
use crate::shares::Masking;
use serde::{Deserialize, Serialize};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Construction {
    #[serde(rename = "HE_GC")]
    HeGc,
    #[serde(rename = "SECSH_GC")]
    SecShGc,
}

impl Construction {
    pub fn name(self) -> &'static str {
        match self {
            Construction::HeGc => "HE_GC",
            Construction::SecShGc => "SECSH_GC",
        }
    }
}

impl std::str::FromStr for Construction {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().replace('_', "-").as_str() {
            "he-gc" => Ok(Construction::HeGc),
            "secsh-gc" => Ok(Construction::SecShGc),
            _ => Err(format!("unknown construction {s:?} (he-gc or secsh-gc)")),
        }
    }
}

/// The Cloud seed also fixes the RLC pool, so a plaintext run with the same
/// seed tries the same classifiers.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub cloud: u64,
    pub csp: u64,
    pub data: u64,
}

impl Default for Seeds {
    fn default() -> Self {
        Self {
            cloud: 1,
            csp: 2,
            data: 3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ProtocolConfig {
    pub construction: Construction,
    pub tau: usize,
    pub p_max: usize,
    pub frac_bits: u32,
    /// None derives the smallest safe ring from the data.
    pub ring_bits: Option<u32>,
    pub key_bits: u32,
    pub sigma: u32,
    pub seeds: Seeds,
    pub ot_mode: OtMode,
    pub garble_mode: GarbleMode,
    pub policy: InvalidPolicy,
    /// Cloud computes every E(Z)w_t before the first iteration (HE+GC only).
    pub offline_precompute: bool,
    /// Refuses test-only shortcuts such as trusted-dealer OT.
    pub secure_profile: bool,
}

impl ProtocolConfig {
    pub const DEFAULT_FRAC_BITS: u32 = 7;
    pub const DEFAULT_KEY_BITS: u32 = 512;
    pub const DEFAULT_SIGMA: u32 = 40;

    pub fn new(construction: Construction, tau: usize) -> Self {
        Self {
            construction,
            tau,
            p_max: 2 * tau,
            frac_bits: Self::DEFAULT_FRAC_BITS,
            ring_bits: None,
            key_bits: Self::DEFAULT_KEY_BITS,
            sigma: Self::DEFAULT_SIGMA,
            seeds: Seeds::default(),
            ot_mode: OtMode::default(),
            garble_mode: GarbleMode::default(),
            policy: InvalidPolicy::default(),
            offline_precompute: false,
            secure_profile: true,
        }
    }

    pub fn validate(&self) -> Result<(), ProtocolError> {
        let bad = |m: String| Err(ProtocolError::ConfigInvalid(m));
        if self.tau == 0 {
            return bad("tau must be at least 1".into());
        }
        if self.p_max < self.tau {
            return bad(format!("p_max {} < tau {}", self.p_max, self.tau));
        }
        if !SUPPORTED_KEY_BITS.contains(&self.key_bits) {
            return bad(format!(
                "key_bits {} not in {:?}",
                self.key_bits, SUPPORTED_KEY_BITS
            ));
        }
        if self.sigma == 0 {
            return bad("sigma must be positive".into());
        }
        if self.frac_bits == 0 {
            return bad("frac_bits must be at least 1".into());
        }
        self.ot_mode
            .check_profile(self.secure_profile)
            .map_err(|e| ProtocolError::ConfigInvalid(e.to_string()))
    }

    /// Ring parameters for a folded matrix with `z.cols()` = k+1 columns.
    /// An explicit ring size must not be smaller than the derived one.
    pub fn fixed_point(&self, z: &Matrix<f64>) -> Result<FixedPointParams, ProtocolError> {
        let derived =
            FixedPointParams::for_products(self.frac_bits, z.cols(), max_abs(z), INTERCEPT_RANGE)?;
        match self.ring_bits {
            None => Ok(derived),
            Some(l) if l < derived.ring_bits() => Err(ProtocolError::ConfigInvalid(format!(
                "ring_bits {l} too small for this data, need at least {}",
                derived.ring_bits()
            ))),
            Some(l) => Ok(FixedPointParams::new(self.frac_bits, l)?),
        }
    }

    /// Masking for E(Z)w results; checks that masked values fit the key.
    pub fn masking(&self, fp: &FixedPointParams, dims: usize) -> Result<Masking, ProtocolError> {
        let m = Masking::for_matvec(fp, dims, self.sigma);
        // Masked value plus the unmasked one must stay below N >= 2^(key_bits-1).
        if m.modulus_bits() + 1 >= self.key_bits {
            return Err(ProtocolError::ConfigInvalid(format!(
                "masked values need {} bits, key has {}",
                m.modulus_bits() + 1,
                self.key_bits
            )));
        }
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        let mut c = ProtocolConfig::new(Construction::HeGc, 3);
        assert!(c.validate().is_ok());
        c.p_max = 2;
        assert!(c.validate().is_err());
        c.p_max = 6;
        c.key_bits = 300;
        assert!(c.validate().is_err());
        c.key_bits = 512;
        c.ot_mode = OtMode::TrustedDealer;
        assert!(c.validate().is_err());
        c.secure_profile = false;
        assert!(c.validate().is_ok());
    }

    #[test]
    fn explicit_ring_must_fit() {
        let z = Matrix::from_rows(vec![vec![1.0, -1.0, 1.0]]).unwrap();
        let mut c = ProtocolConfig::new(Construction::SecShGc, 1);
        let d = c.fixed_point(&z).unwrap();
        c.ring_bits = Some(d.ring_bits() - 1);
        assert!(c.fixed_point(&z).is_err());
        c.ring_bits = Some(40);
        assert_eq!(c.fixed_point(&z).unwrap().ring_bits(), 40);
    }

    #[test]
    fn construction_names() {
        assert_eq!("he-gc".parse::<Construction>().unwrap(), Construction::HeGc);
        assert_eq!("SECSH_GC".parse::<Construction>().unwrap(), Construction::SecShGc);
        assert!("x".parse::<Construction>().is_err());
    }
}
