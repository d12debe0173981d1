//! 1-out-of-2 oblivious transfer of labels.
//!
//! Base OT over the Ristretto group: the sender publishes A = aG once per
//! batch; for choice c the receiver sends B = bG + cA and derives its key
//! from bA; the sender derives k0 from aB and k1 from a(B - A). Keys are
//! bound to the batch point, the wire index and B.

use super::garble::Label;
use super::GcError;
use curve25519_dalek::constants::RISTRETTO_BASEPOINT_TABLE;
use curve25519_dalek::ristretto::{CompressedRistretto, RistrettoPoint};
use curve25519_dalek::scalar::Scalar;
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const POINT_BYTES: usize = 32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum OtMode {
    #[default]
    BaseOt,
    /// Choice bits go to the sender in the clear. Only for tests.
    TrustedDealer,
}

impl OtMode {
    pub fn check_profile(self, secure: bool) -> Result<(), GcError> {
        if secure && self == OtMode::TrustedDealer {
            Err(GcError::ModeNotPermittedInSecureProfile)
        } else {
            Ok(())
        }
    }
}

fn decode_point(bytes: &[u8], index: usize) -> Result<RistrettoPoint, GcError> {
    let arr: [u8; 32] = bytes
        .try_into()
        .map_err(|_| GcError::GroupElementInvalid { index })?;
    CompressedRistretto(arr)
        .decompress()
        .ok_or(GcError::GroupElementInvalid { index })
}

fn derive_key(a: &[u8; 32], b: &[u8; 32], index: usize, shared: &RistrettoPoint) -> u128 {
    let mut h = Sha256::new();
    h.update(b"ot-key");
    h.update(a);
    h.update(b);
    h.update((index as u64).to_be_bytes());
    h.update(shared.compress().as_bytes());
    u128::from_be_bytes(h.finalize()[..16].try_into().expect("16 of 32 bytes"))
}

pub struct OtSender {
    a: Scalar,
    big_a: RistrettoPoint,
    a_bytes: [u8; 32],
    aa: RistrettoPoint,
}

impl OtSender {
    /// Returns the sender state and the setup point to publish.
    pub fn new<R: RngCore + CryptoRng>(rng: &mut R) -> (Self, [u8; 32]) {
        let a = Scalar::random(rng);
        let big_a = &a * RISTRETTO_BASEPOINT_TABLE;
        let a_bytes = big_a.compress().to_bytes();
        let aa = a * big_a;
        (
            Self {
                a,
                big_a,
                a_bytes,
                aa,
            },
            a_bytes,
        )
    }

    pub fn setup_point(&self) -> RistrettoPoint {
        self.big_a
    }

    /// Encrypts each (m0, m1) pair under the keys implied by the receiver's
    /// points.
    pub fn transfer(
        &self,
        receiver_points: &[[u8; 32]],
        pairs: &[(Label, Label)],
    ) -> Result<Vec<(Label, Label)>, GcError> {
        if receiver_points.len() != pairs.len() {
            return Err(GcError::InputCountMismatch {
                expected: pairs.len(),
                found: receiver_points.len(),
            });
        }
        receiver_points
            .iter()
            .zip(pairs)
            .enumerate()
            .map(|(i, (bb, &(m0, m1)))| {
                let b = decode_point(bb, i)?;
                let ab = self.a * b;
                let k0 = derive_key(&self.a_bytes, bb, i, &ab);
                let k1 = derive_key(&self.a_bytes, bb, i, &(ab - self.aa));
                Ok((Label(m0.0 ^ k0), Label(m1.0 ^ k1)))
            })
            .collect()
    }
}

pub struct OtReceiver {
    choices: Vec<bool>,
    keys: Vec<u128>,
}

impl OtReceiver {
    /// Returns the receiver state and one point per choice bit.
    pub fn choose<R: RngCore + CryptoRng>(
        setup: &[u8; 32],
        choices: &[bool],
        rng: &mut R,
    ) -> Result<(Self, Vec<[u8; 32]>), GcError> {
        let big_a = decode_point(setup, 0)?;
        let mut points = Vec::with_capacity(choices.len());
        let mut keys = Vec::with_capacity(choices.len());
        for (i, &c) in choices.iter().enumerate() {
            let b = Scalar::random(rng);
            let mut big_b = &b * RISTRETTO_BASEPOINT_TABLE;
            if c {
                big_b += big_a;
            }
            let bb = big_b.compress().to_bytes();
            keys.push(derive_key(setup, &bb, i, &(b * big_a)));
            points.push(bb);
        }
        Ok((
            Self {
                choices: choices.to_vec(),
                keys,
            },
            points,
        ))
    }

    pub fn finish(&self, ciphertexts: &[(Label, Label)]) -> Result<Vec<Label>, GcError> {
        if ciphertexts.len() != self.keys.len() {
            return Err(GcError::InputCountMismatch {
                expected: self.keys.len(),
                found: ciphertexts.len(),
            });
        }
        Ok(ciphertexts
            .iter()
            .zip(self.keys.iter().zip(&self.choices))
            .map(|(&(e0, e1), (&k, &c))| Label(if c { e1.0 } else { e0.0 } ^ k))
            .collect())
    }

    /// Decrypts the ciphertext for the opposite choice with the same key.
    /// Used by tests to check that the other message stays hidden.
    pub fn finish_flipped(&self, ciphertexts: &[(Label, Label)]) -> Vec<Label> {
        ciphertexts
            .iter()
            .zip(self.keys.iter().zip(&self.choices))
            .map(|(&(e0, e1), (&k, &c))| Label(if c { e0.0 } else { e1.0 } ^ k))
            .collect()
    }
}
