//! Paillier encryption with generator g = N + 1.
//!
//! Plaintexts live in Z_N; callers that work in a smaller ring reduce after
//! decryption. Decryption uses the CRT split over p^2 and q^2, which gives
//! the same plaintext as the textbook L(c^lambda)·mu route (checked in tests).

use crate::matrix::Matrix;
use num_bigint::{BigUint, RandBigInt};
use num_integer::Integer;
use num_traits::{One, Zero};
use rand::{CryptoRng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;
use thiserror::Error;

pub const SUPPORTED_KEY_BITS: [u32; 3] = [512, 1024, 2048];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AheError {
    #[error("unsupported key size {0} (expected 512, 1024 or 2048)")]
    InvalidKeySize(u32),
    #[error("no {bits}-bit prime found after {attempts} candidates")]
    PrimeGenFailure { bits: u32, attempts: usize },
    #[error("plaintext is not below the modulus N")]
    PlaintextOutOfRange,
    #[error("ciphertext is not a unit below N^2")]
    CiphertextOutOfRange,
    #[error("ciphertexts or keys belong to different key pairs")]
    KeyMismatch,
    #[error("matrix has {cols} columns but vector has {len} entries")]
    DimensionMismatch { cols: usize, len: usize },
    #[error("malformed encoding: {0}")]
    Malformed(&'static str),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PublicKey {
    n: BigUint,
    n_squared: BigUint,
    tag: u64,
}

#[derive(Clone, Debug)]
pub struct SecretKey {
    p: BigUint,
    q: BigUint,
    lambda: BigUint,
    mu: BigUint,
    p_squared: BigUint,
    q_squared: BigUint,
    hp: BigUint,
    hq: BigUint,
    q_inv_p: BigUint,
}

#[derive(Clone, Debug)]
pub struct KeyPair {
    pub public: PublicKey,
    secret: SecretKey,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Ciphertext {
    c: BigUint,
    tag: u64,
}

pub type EncryptedMatrix = Matrix<Ciphertext>;

fn key_tag(n: &BigUint) -> u64 {
    let d = Sha256::digest(n.to_bytes_be());
    u64::from_be_bytes(d[..8].try_into().expect("digest is 32 bytes"))
}

fn put_bytes(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

/// Reads one length-prefixed big-endian integer, returning it and the rest.
pub fn take_biguint(buf: &[u8]) -> Result<(BigUint, &[u8]), AheError> {
    if buf.len() < 4 {
        return Err(AheError::Malformed("missing length prefix"));
    }
    let len = u32::from_be_bytes(buf[..4].try_into().expect("4 bytes")) as usize;
    let rest = &buf[4..];
    if rest.len() < len {
        return Err(AheError::Malformed("truncated integer"));
    }
    Ok((BigUint::from_bytes_be(&rest[..len]), &rest[len..]))
}

fn small_primes() -> &'static [u32] {
    static PRIMES: OnceLock<Vec<u32>> = OnceLock::new();
    PRIMES.get_or_init(|| {
        const LIMIT: usize = 4096;
        let mut sieve = vec![true; LIMIT];
        let mut out = Vec::new();
        for i in 2..LIMIT {
            if sieve[i] {
                out.push(i as u32);
                let mut j = i * i;
                while j < LIMIT {
                    sieve[j] = false;
                    j += i;
                }
            }
        }
        out
    })
}

/// Miller-Rabin with `rounds` random bases drawn from `rng`.
pub fn is_probable_prime<R: RngCore + ?Sized>(n: &BigUint, rounds: usize, rng: &mut R) -> bool {
    let two = BigUint::from(2u32);
    if *n < two {
        return false;
    }
    for &sp in small_primes() {
        let sp = BigUint::from(sp);
        if *n == sp {
            return true;
        }
        if (n % &sp).is_zero() {
            return false;
        }
    }
    let n_minus_1 = n - 1u32;
    let s = n_minus_1.trailing_zeros().unwrap_or(0);
    let d = &n_minus_1 >> s;
    'witness: for _ in 0..rounds {
        let a = rng.gen_biguint_range(&two, &n_minus_1);
        let mut x = a.modpow(&d, n);
        if x.is_one() || x == n_minus_1 {
            continue;
        }
        for _ in 1..s {
            x = x.modpow(&two, n);
            if x == n_minus_1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn gen_prime<R: RngCore + CryptoRng>(bits: u32, rng: &mut R) -> Result<BigUint, AheError> {
    let attempts = 100 * bits as usize;
    for _ in 0..attempts / 64 {
        let mut cand = rng.gen_biguint(bits as u64);
        // Top two bits set so the product of two primes has exactly 2*bits bits.
        cand.set_bit(bits as u64 - 1, true);
        cand.set_bit(bits as u64 - 2, true);
        cand.set_bit(0, true);
        for _ in 0..64 {
            if cand.bits() == bits as u64 && is_probable_prime(&cand, 40, rng) {
                return Ok(cand);
            }
            cand += 2u32;
        }
    }
    Err(AheError::PrimeGenFailure { bits, attempts })
}

/// Deterministic for a given rng state.
pub fn keygen<R: RngCore + CryptoRng>(key_bits: u32, rng: &mut R) -> Result<KeyPair, AheError> {
    if !SUPPORTED_KEY_BITS.contains(&key_bits) {
        return Err(AheError::InvalidKeySize(key_bits));
    }
    loop {
        let p = gen_prime(key_bits / 2, rng)?;
        let q = gen_prime(key_bits / 2, rng)?;
        if p == q {
            continue;
        }
        match KeyPair::from_primes(p, q) {
            Ok(kp) => return Ok(kp),
            Err(AheError::KeyMismatch) => continue,
            Err(e) => return Err(e),
        }
    }
}

impl KeyPair {
    /// Builds a key pair from two distinct primes. Returns `KeyMismatch` if
    /// gcd(pq, (p-1)(q-1)) != 1.
    pub fn from_primes(p: BigUint, q: BigUint) -> Result<Self, AheError> {
        let n = &p * &q;
        let p1 = &p - 1u32;
        let q1 = &q - 1u32;
        if !n.gcd(&(&p1 * &q1)).is_one() {
            return Err(AheError::KeyMismatch);
        }
        let lambda = p1.lcm(&q1);
        let mu = lambda.modinv(&n).ok_or(AheError::KeyMismatch)?;
        let n_squared = &n * &n;
        let g = &n + 1u32;
        let p_squared = &p * &p;
        let q_squared = &q * &q;
        let lp = |x: BigUint, m: &BigUint| (x - 1u32) / m;
        let hp = lp(g.modpow(&p1, &p_squared), &p)
            .modinv(&p)
            .ok_or(AheError::KeyMismatch)?;
        let hq = lp(g.modpow(&q1, &q_squared), &q)
            .modinv(&q)
            .ok_or(AheError::KeyMismatch)?;
        let q_inv_p = q.modinv(&p).ok_or(AheError::KeyMismatch)?;
        let tag = key_tag(&n);
        Ok(Self {
            public: PublicKey { n, n_squared, tag },
            secret: SecretKey {
                p,
                q,
                lambda,
                mu,
                p_squared,
                q_squared,
                hp,
                hq,
                q_inv_p,
            },
        })
    }

    pub fn primes(&self) -> (&BigUint, &BigUint) {
        (&self.secret.p, &self.secret.q)
    }

    fn check(&self, c: &Ciphertext) -> Result<(), AheError> {
        if c.tag != self.public.tag {
            return Err(AheError::KeyMismatch);
        }
        if c.c.is_zero() || c.c >= self.public.n_squared {
            return Err(AheError::CiphertextOutOfRange);
        }
        Ok(())
    }

    pub fn decrypt(&self, c: &Ciphertext) -> Result<BigUint, AheError> {
        self.check(c)?;
        let s = &self.secret;
        let mp = ((c.c.modpow(&(&s.p - 1u32), &s.p_squared) - 1u32) / &s.p * &s.hp) % &s.p;
        let mq = ((c.c.modpow(&(&s.q - 1u32), &s.q_squared) - 1u32) / &s.q * &s.hq) % &s.q;
        // m = mq + q * ((mp - mq) * q^-1 mod p)
        let diff = (&mp + &s.p - (&mq % &s.p)) % &s.p;
        Ok(&mq + &s.q * ((diff * &s.q_inv_p) % &s.p))
    }

    /// m = L(c^lambda mod N^2) * mu mod N, kept as a reference route.
    pub fn decrypt_textbook(&self, c: &Ciphertext) -> Result<BigUint, AheError> {
        self.check(c)?;
        let n = &self.public.n;
        let u = c.c.modpow(&self.secret.lambda, &self.public.n_squared);
        Ok(((u - 1u32) / n * &self.secret.mu) % n)
    }

    /// Decrypts and reduces into Z_{2^bits}.
    pub fn decrypt_mod_pow2(&self, c: &Ciphertext, bits: u32) -> Result<u64, AheError> {
        let m = self.decrypt(c)?;
        Ok(low_u64(&m) & ((1u64 << bits) - 1))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_bytes(&mut out, &self.secret.p.to_bytes_be());
        put_bytes(&mut out, &self.secret.q.to_bytes_be());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, AheError> {
        let (p, rest) = take_biguint(buf)?;
        let (q, rest) = take_biguint(rest)?;
        if !rest.is_empty() {
            return Err(AheError::Malformed("trailing bytes"));
        }
        Self::from_primes(p, q)
    }
}

/// Lowest 64 bits of a big integer.
pub fn low_u64(m: &BigUint) -> u64 {
    m.iter_u64_digits().next().unwrap_or(0)
}

impl PublicKey {
    pub fn n(&self) -> &BigUint {
        &self.n
    }

    pub fn n_squared(&self) -> &BigUint {
        &self.n_squared
    }

    pub fn bits(&self) -> u64 {
        self.n.bits()
    }

    pub fn encrypt<R: RngCore + CryptoRng>(
        &self,
        m: &BigUint,
        rng: &mut R,
    ) -> Result<Ciphertext, AheError> {
        if *m >= self.n {
            return Err(AheError::PlaintextOutOfRange);
        }
        let r = loop {
            let r = rng.gen_biguint_range(&BigUint::one(), &self.n);
            if r.gcd(&self.n).is_one() {
                break r;
            }
        };
        // g^m = 1 + mN mod N^2 when g = N + 1.
        let gm = (m * &self.n + 1u32) % &self.n_squared;
        let rn = r.modpow(&self.n, &self.n_squared);
        Ok(Ciphertext {
            c: gm * rn % &self.n_squared,
            tag: self.tag,
        })
    }

    pub fn encrypt_u64<R: RngCore + CryptoRng>(
        &self,
        m: u64,
        rng: &mut R,
    ) -> Result<Ciphertext, AheError> {
        self.encrypt(&BigUint::from(m), rng)
    }

    fn check(&self, c: &Ciphertext) -> Result<(), AheError> {
        if c.tag != self.tag {
            Err(AheError::KeyMismatch)
        } else {
            Ok(())
        }
    }

    pub fn add(&self, a: &Ciphertext, b: &Ciphertext) -> Result<Ciphertext, AheError> {
        self.check(a)?;
        self.check(b)?;
        Ok(Ciphertext {
            c: &a.c * &b.c % &self.n_squared,
            tag: self.tag,
        })
    }

    /// E(m) -> E(m + k) without fresh randomness.
    pub fn add_plain(&self, a: &Ciphertext, k: &BigUint) -> Result<Ciphertext, AheError> {
        self.check(a)?;
        if *k >= self.n {
            return Err(AheError::PlaintextOutOfRange);
        }
        let gk = (k * &self.n + 1u32) % &self.n_squared;
        Ok(Ciphertext {
            c: &a.c * gk % &self.n_squared,
            tag: self.tag,
        })
    }

    /// E(m) -> E(s * m mod N), computed as c^s mod N^2.
    pub fn scalar_mul(&self, a: &Ciphertext, s: &BigUint) -> Result<Ciphertext, AheError> {
        self.check(a)?;
        Ok(Ciphertext {
            c: a.c.modpow(s, &self.n_squared),
            tag: self.tag,
        })
    }

    /// E(Z) w: row i is prod_j E(z_ij)^{w_j}. Zero weights are skipped.
    pub fn matvec(&self, m: &EncryptedMatrix, w: &[u64]) -> Result<Vec<Ciphertext>, AheError> {
        if m.cols() != w.len() {
            return Err(AheError::DimensionMismatch {
                cols: m.cols(),
                len: w.len(),
            });
        }
        let ws: Vec<BigUint> = w.iter().map(|&x| BigUint::from(x)).collect();
        m.iter_rows()
            .map(|row| {
                let mut acc = BigUint::one();
                for (c, s) in row.iter().zip(&ws) {
                    self.check(c)?;
                    if s.is_zero() {
                        continue;
                    }
                    acc = acc * c.c.modpow(s, &self.n_squared) % &self.n_squared;
                }
                Ok(Ciphertext {
                    c: acc,
                    tag: self.tag,
                })
            })
            .collect()
    }

    /// Encrypted row-vector times plaintext matrix: out_i = prod_j E(v_j)^{m_ij}.
    pub fn matvec_plain_matrix(
        &self,
        m: &Matrix<u64>,
        v: &[Ciphertext],
    ) -> Result<Vec<Ciphertext>, AheError> {
        if m.cols() != v.len() {
            return Err(AheError::DimensionMismatch {
                cols: m.cols(),
                len: v.len(),
            });
        }
        for c in v {
            self.check(c)?;
        }
        Ok(m
            .iter_rows()
            .map(|row| {
                let mut acc = BigUint::one();
                for (&s, c) in row.iter().zip(v) {
                    if s != 0 {
                        acc = acc * c.c.modpow(&BigUint::from(s), &self.n_squared)
                            % &self.n_squared;
                    }
                }
                Ciphertext {
                    c: acc,
                    tag: self.tag,
                }
            })
            .collect())
    }

    pub fn encrypt_matrix<R: RngCore + CryptoRng>(
        &self,
        m: &Matrix<u64>,
        rng: &mut R,
    ) -> Result<EncryptedMatrix, AheError> {
        m.try_map(|&v| self.encrypt_u64(v, rng))
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        put_bytes(&mut out, &self.n.to_bytes_be());
        out
    }

    pub fn from_bytes(buf: &[u8]) -> Result<Self, AheError> {
        let (n, rest) = take_biguint(buf)?;
        if !rest.is_empty() {
            return Err(AheError::Malformed("trailing bytes"));
        }
        if n.bits() < 16 {
            return Err(AheError::Malformed("modulus too small"));
        }
        let n_squared = &n * &n;
        let tag = key_tag(&n);
        Ok(Self { n, n_squared, tag })
    }

    /// Parses a ciphertext and binds it to this key.
    pub fn ciphertext_from_bytes<'a>(
        &self,
        buf: &'a [u8],
    ) -> Result<(Ciphertext, &'a [u8]), AheError> {
        let (c, rest) = take_biguint(buf)?;
        if c.is_zero() || c >= self.n_squared {
            return Err(AheError::CiphertextOutOfRange);
        }
        Ok((Ciphertext { c, tag: self.tag }, rest))
    }
}

impl Ciphertext {
    pub fn value(&self) -> &BigUint {
        &self.c
    }

    pub fn write_to(&self, out: &mut Vec<u8>) {
        put_bytes(out, &self.c.to_bytes_be());
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        self.write_to(&mut out);
        out
    }
}

/// Key material in a JSON-friendly form (hex strings).
#[derive(Clone, Debug, Serialize, Deserialize, PartialEq, Eq)]
pub struct KeyFile {
    pub key_bits: u32,
    pub n: String,
    pub p: String,
    pub q: String,
}

impl KeyFile {
    pub fn from_pair(kp: &KeyPair) -> Self {
        Self {
            key_bits: kp.public.bits() as u32,
            n: kp.public.n.to_str_radix(16),
            p: kp.secret.p.to_str_radix(16),
            q: kp.secret.q.to_str_radix(16),
        }
    }

    pub fn to_pair(&self) -> Result<KeyPair, AheError> {
        let parse = |s: &str| {
            BigUint::parse_bytes(s.as_bytes(), 16).ok_or(AheError::Malformed("bad hex"))
        };
        let kp = KeyPair::from_primes(parse(&self.p)?, parse(&self.q)?)?;
        if kp.public.n != parse(&self.n)? {
            return Err(AheError::KeyMismatch);
        }
        Ok(kp)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn toy() -> KeyPair {
        // Small primes keep unit tests fast; keygen enforces real sizes.
        KeyPair::from_primes(BigUint::from(1_000_003u32), BigUint::from(999_983u32)).unwrap()
    }

    #[test]
    fn crt_matches_textbook() {
        let kp = toy();
        let mut rng = ChaCha20Rng::seed_from_u64(1);
        for m in [0u64, 1, 17, 999_999_999] {
            let c = kp.public.encrypt_u64(m, &mut rng).unwrap();
            assert_eq!(kp.decrypt(&c).unwrap(), BigUint::from(m));
            assert_eq!(kp.decrypt_textbook(&c).unwrap(), BigUint::from(m));
        }
    }

    #[test]
    fn range_and_key_checks() {
        let kp = toy();
        let other =
            KeyPair::from_primes(BigUint::from(1_000_033u32), BigUint::from(1_000_037u32)).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(2);
        assert_eq!(
            kp.public.encrypt(kp.public.n(), &mut rng),
            Err(AheError::PlaintextOutOfRange)
        );
        let a = kp.public.encrypt_u64(3, &mut rng).unwrap();
        let b = other.public.encrypt_u64(4, &mut rng).unwrap();
        assert_eq!(kp.public.add(&a, &b), Err(AheError::KeyMismatch));
        assert_eq!(kp.decrypt(&b), Err(AheError::KeyMismatch));
    }

    #[test]
    fn keygen_rejects_odd_sizes() {
        let mut rng = ChaCha20Rng::seed_from_u64(3);
        assert_eq!(
            keygen(768, &mut rng).unwrap_err(),
            AheError::InvalidKeySize(768)
        );
    }

    #[test]
    fn byte_round_trip() {
        let kp = toy();
        let pk = PublicKey::from_bytes(&kp.public.to_bytes()).unwrap();
        assert_eq!(pk, kp.public);
        let mut rng = ChaCha20Rng::seed_from_u64(4);
        let c = kp.public.encrypt_u64(42, &mut rng).unwrap();
        let bytes = c.to_bytes();
        let (c2, rest) = pk.ciphertext_from_bytes(&bytes).unwrap();
        assert!(rest.is_empty());
        assert_eq!(c, c2);
        let kp2 = KeyPair::from_bytes(&kp.to_bytes()).unwrap();
        assert_eq!(kp2.public, kp.public);
    }

    #[test]
    fn miller_rabin_small() {
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let primes = [2u32, 3, 5, 7919, 1_000_003];
        for p in primes {
            assert!(is_probable_prime(&BigUint::from(p), 20, &mut rng), "{p}");
        }
        // Carmichael number 561 and a semiprime.
        for c in [1u32, 561, 1_000_003 * 3] {
            assert!(!is_probable_prime(&BigUint::from(c), 20, &mut rng), "{c}");
        }
    }
}
