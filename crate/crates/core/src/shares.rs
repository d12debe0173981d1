//! Two-out-of-two additive sharing over Z_q and the masked mat-vec steps of
//! the shared-data construction.
//!
//! The Cloud holds Z0, the CSP holds Z1 with Z0 + Z1 = Z (mod q). To learn
//! Z w the Cloud sends E(w) under its own key; the CSP answers with
//! E(Z1 w + lambda), and the Cloud ends up with u0 = Z0 w + Z1 w + lambda
//! while the CSP keeps u1 = lambda. Masks are drawn from a range sigma bits
//! wider than the unreduced value they hide.

use crate::ahe::{AheError, Ciphertext, PublicKey};
use crate::encoding::{FixedPointParams, RingValue};
use crate::matrix::Matrix;
use num_bigint::{BigUint, RandBigInt};
use rand::{CryptoRng, Rng, RngCore};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ShareError {
    #[error("share shapes differ: {0:?} vs {1:?}")]
    ShapeMismatch((usize, usize), (usize, usize)),
    #[error("expected {expected} values, got {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Ahe(#[from] AheError),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SharePair {
    /// Uniform share, held by the Cloud.
    pub cloud: Matrix<RingValue>,
    /// Z - cloud share, held by the CSP.
    pub csp: Matrix<RingValue>,
}

pub fn split<R: RngCore>(z: &Matrix<RingValue>, fp: &FixedPointParams, rng: &mut R) -> SharePair {
    let q = fp.modulus();
    let cloud = z.map(|_| rng.gen_range(0..q));
    let csp_data = z
        .as_slice()
        .iter()
        .zip(cloud.as_slice())
        .map(|(&v, &r)| fp.sub(v, r))
        .collect();
    let csp = Matrix::new(z.rows(), z.cols(), csp_data).expect("same shape as z");
    SharePair { cloud, csp }
}

pub fn reconstruct(
    a: &Matrix<RingValue>,
    b: &Matrix<RingValue>,
    fp: &FixedPointParams,
) -> Result<Matrix<RingValue>, ShareError> {
    if a.shape() != b.shape() {
        return Err(ShareError::ShapeMismatch(a.shape(), b.shape()));
    }
    let data = a
        .as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(&x, &y)| fp.add(x, y))
        .collect();
    Ok(Matrix::new(a.rows(), a.cols(), data).expect("shapes checked"))
}

fn ceil_log2(x: usize) -> u32 {
    if x <= 1 {
        0
    } else {
        usize::BITS - (x - 1).leading_zeros()
    }
}

/// Statistical mask for values known to lie in [0, 2^value_bits).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Masking {
    value_bits: u32,
    sigma: u32,
}

impl Masking {
    pub fn new(value_bits: u32, sigma: u32) -> Self {
        Self { value_bits, sigma }
    }

    /// Unreduced inner product of `dims` ring representatives is below
    /// dims * 2^(2L).
    pub fn for_matvec(fp: &FixedPointParams, dims: usize, sigma: u32) -> Self {
        Self::new(2 * fp.ring_bits() + ceil_log2(dims), sigma)
    }

    /// A single ring representative plus a ring constant stays below 2^(L+1).
    pub fn for_ring_value(fp: &FixedPointParams, sigma: u32) -> Self {
        Self::new(fp.ring_bits() + 1, sigma)
    }

    pub fn value_bits(&self) -> u32 {
        self.value_bits
    }

    pub fn mask_bits(&self) -> u32 {
        self.value_bits + self.sigma
    }

    /// log2 of q', the modulus the masked value is reduced by.
    pub fn modulus_bits(&self) -> u32 {
        self.mask_bits() + 1
    }

    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> BigUint {
        rng.gen_biguint(self.mask_bits() as u64)
    }

    pub fn reduce(&self, v: &BigUint) -> BigUint {
        let m = (BigUint::from(1u32) << self.modulus_bits()) - 1u32;
        v & m
    }
}

/// Lowest L bits of a big integer as a ring element.
pub fn to_ring(v: &BigUint, fp: &FixedPointParams) -> RingValue {
    crate::ahe::low_u64(v) & fp.mask()
}

/// CSP side: E(Z1 w + lambda) from E(w) under the Cloud's key.
pub fn masked_matvec_csp_step<R: RngCore + CryptoRng>(
    pk: &PublicKey,
    z1: &Matrix<RingValue>,
    enc_w: &[Ciphertext],
    lambdas: &[BigUint],
    rng: &mut R,
) -> Result<Vec<Ciphertext>, ShareError> {
    if lambdas.len() != z1.rows() {
        return Err(ShareError::LengthMismatch {
            expected: z1.rows(),
            found: lambdas.len(),
        });
    }
    let prods = pk.matvec_plain_matrix(z1, enc_w)?;
    prods
        .iter()
        .zip(lambdas)
        .map(|(c, l)| {
            let el = pk.encrypt(l, rng)?;
            Ok(pk.add(c, &el)?)
        })
        .collect()
}

/// Cloud side: u0 = (Z0 w + dec) mod q', where dec are the decrypted CSP
/// answers.
pub fn masked_matvec_cloud_step(
    z0: &Matrix<RingValue>,
    w: &[RingValue],
    decrypted: &[BigUint],
    masking: &Masking,
) -> Result<Vec<BigUint>, ShareError> {
    if w.len() != z0.cols() {
        return Err(ShareError::LengthMismatch {
            expected: z0.cols(),
            found: w.len(),
        });
    }
    if decrypted.len() != z0.rows() {
        return Err(ShareError::LengthMismatch {
            expected: z0.rows(),
            found: decrypted.len(),
        });
    }
    Ok(z0
        .iter_rows()
        .zip(decrypted)
        .map(|(row, d)| {
            let mut acc = d.clone();
            for (&z, &x) in row.iter().zip(w) {
                acc += BigUint::from(z as u128 * x as u128);
            }
            masking.reduce(&acc)
        })
        .collect())
}
