//! The two state containers. What each party may hold is fixed by the
//! fields: the Cloud has no weights, alphas or decrypted products; the CSP
//! has no classifier coefficients and, with encrypted data, no data at all.

use super::config::{Construction, ProtocolConfig};
use super::transcript::PartyCounters;
use super::ProtocolError;
use crate::ahe::{keygen, Ciphertext, EncryptedMatrix, KeyPair, PublicKey};
use crate::boost::rlc::{Rlc, RlcPool};
use crate::boost::{BoostState, Decision, Round};
use crate::encoding::{FixedPointParams, RingValue};
use crate::matrix::Matrix;
use crate::shares::{self, Masking};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Party randomness lives on stream 1 so it never overlaps the RLC pool,
/// which is drawn from stream 0 of the Cloud seed.
fn party_rng(seed: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(1);
    r
}

pub(crate) enum CloudData {
    /// HE+GC: E(Z) under the CSP's key.
    Encrypted { pk: PublicKey, ez: EncryptedMatrix },
    /// SecSh+GC: the Cloud's share and its own key pair.
    Shared { keys: Box<KeyPair>, z0: Matrix<RingValue> },
}

pub struct CloudState {
    pub(crate) construction: Construction,
    pub(crate) fp: FixedPointParams,
    pub(crate) masking: Masking,
    pub(crate) n: usize,
    pub(crate) dims: usize,
    pub(crate) seed: u64,
    pub(crate) pool: Vec<Rlc>,
    pub(crate) data: CloudData,
    pub(crate) rng: ChaCha20Rng,
    pub(crate) counters: PartyCounters,
    pub(crate) decisions: Vec<Decision>,
    pub(crate) precomputed: Vec<Vec<Ciphertext>>,
}

pub(crate) enum CspKeys {
    Own(Box<KeyPair>),
    Peer(PublicKey),
}

pub struct CspState {
    pub(crate) construction: Construction,
    pub(crate) fp: FixedPointParams,
    pub(crate) masking: Masking,
    pub(crate) n: usize,
    pub(crate) p_max: usize,
    pub(crate) keys: CspKeys,
    pub(crate) z1: Option<Matrix<RingValue>>,
    pub(crate) boost: BoostState,
    pub(crate) rounds: Vec<Round>,
    pub(crate) indicators: Vec<Vec<bool>>,
    pub(crate) rng: ChaCha20Rng,
    pub(crate) counters: PartyCounters,
}

/// Keys, data placement and the RLC pool. `z` is the standardized,
/// label-folded matrix. Returns both states and the counters for the work
/// done by the (simulated) data owners.
pub fn setup(
    cfg: &ProtocolConfig,
    z: &Matrix<f64>,
) -> Result<(CloudState, CspState, PartyCounters), ProtocolError> {
    cfg.validate()?;
    if z.cols() < 2 {
        return Err(ProtocolError::ConfigInvalid(
            "folded matrix needs at least one feature column plus the intercept".into(),
        ));
    }
    let fp = cfg.fixed_point(z)?;
    let n = z.rows();
    let dims = z.cols();
    let masking = cfg.masking(&fp, dims)?;
    let encoded = fp.encode_matrix(z)?;
    let mut users_rng = ChaCha20Rng::seed_from_u64(cfg.seeds.data);
    let mut cloud_rng = party_rng(cfg.seeds.cloud);
    let mut csp_rng = party_rng(cfg.seeds.csp);
    let mut users = PartyCounters::default();
    let mut cloud_c = PartyCounters::default();
    let mut csp_c = PartyCounters::default();

    let (data, keys, z1) = match cfg.construction {
        Construction::HeGc => {
            let kp = keygen(cfg.key_bits, &mut csp_rng)?;
            csp_c.keygens += 1;
            let ez = kp.public.encrypt_matrix(&encoded, &mut users_rng)?;
            users.encryptions += (n * dims) as u64;
            let pk = kp.public.clone();
            (CloudData::Encrypted { pk, ez }, CspKeys::Own(Box::new(kp)), None)
        }
        Construction::SecShGc => {
            let kp = keygen(cfg.key_bits, &mut cloud_rng)?;
            cloud_c.keygens += 1;
            let sp = shares::split(&encoded, &fp, &mut users_rng);
            let pk = kp.public.clone();
            (
                CloudData::Shared {
                    keys: Box::new(kp),
                    z0: sp.cloud,
                },
                CspKeys::Peer(pk),
                Some(sp.csp),
            )
        }
    };
    let cloud = CloudState {
        construction: cfg.construction,
        fp,
        masking,
        n,
        dims,
        seed: cfg.seeds.cloud,
        pool: RlcPool::take(cfg.seeds.cloud, dims - 1, cfg.p_max),
        data,
        rng: cloud_rng,
        counters: cloud_c,
        decisions: Vec::new(),
        precomputed: Vec::new(),
    };
    let csp = CspState {
        construction: cfg.construction,
        fp,
        masking,
        n,
        p_max: cfg.p_max,
        keys,
        z1,
        boost: BoostState::new(n, cfg.policy),
        rounds: Vec::new(),
        indicators: Vec::new(),
        rng: csp_rng,
        counters: csp_c,
    };
    Ok((cloud, csp, users))
}

fn count_nonzero(w: &[RingValue]) -> u64 {
    w.iter().filter(|&&x| x != 0).count() as u64
}

impl CloudState {
    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn fixed_point(&self) -> FixedPointParams {
        self.fp
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pool(&self) -> &[Rlc] {
        &self.pool
    }

    pub fn counters(&self) -> &PartyCounters {
        &self.counters
    }

    pub fn decisions(&self) -> &[Decision] {
        &self.decisions
    }

    /// Number of plaintext data rows the Cloud holds: none with encrypted
    /// data, a uniformly random share otherwise.
    pub fn encrypted_shape(&self) -> Option<(usize, usize)> {
        match &self.data {
            CloudData::Encrypted { ez, .. } => Some(ez.shape()),
            CloudData::Shared { .. } => None,
        }
    }

    pub fn share(&self) -> Option<&Matrix<RingValue>> {
        match &self.data {
            CloudData::Shared { z0, .. } => Some(z0),
            CloudData::Encrypted { .. } => None,
        }
    }

    pub fn public_key(&self) -> &PublicKey {
        match &self.data {
            CloudData::Encrypted { pk, .. } => pk,
            CloudData::Shared { keys, .. } => &keys.public,
        }
    }

    pub(crate) fn weights(&self, t: usize) -> Result<Vec<RingValue>, ProtocolError> {
        let h = self.pool.get(t).ok_or(ProtocolError::IterationOutOfRange {
            t,
            p_max: self.pool.len(),
        })?;
        Ok(self.fp.encode_slice(&h.w)?)
    }

    fn products(&mut self, t: usize) -> Result<Vec<Ciphertext>, ProtocolError> {
        let w = self.weights(t)?;
        let CloudData::Encrypted { pk, ez } = &self.data else {
            return Err(ProtocolError::ConfigInvalid(
                "encrypted products need encrypted data".into(),
            ));
        };
        let nz = count_nonzero(&w);
        self.counters.hom_scalar_muls += self.n as u64 * nz;
        self.counters.hom_additions += self.n as u64 * nz.saturating_sub(1);
        Ok(pk.matvec(ez, &w)?)
    }

    /// E(Z) w_t for every pool entry, ahead of the online phase.
    pub fn precompute(&mut self) -> Result<(), ProtocolError> {
        self.precomputed = (0..self.pool.len())
            .map(|t| self.products(t))
            .collect::<Result<_, _>>()?;
        Ok(())
    }

    /// HE+GC: E(u_t) = E(Z) w_t.
    pub fn base_apply(&mut self, t: usize) -> Result<Vec<Ciphertext>, ProtocolError> {
        if t >= self.pool.len() {
            return Err(ProtocolError::IterationOutOfRange {
                t,
                p_max: self.pool.len(),
            });
        }
        if let Some(p) = self.precomputed.get_mut(t) {
            if !p.is_empty() {
                return Ok(std::mem::take(p));
            }
        }
        self.products(t)
    }

    /// HE+GC: adds fresh masks. Returns E(u + lambda) and the Cloud's
    /// circuit inputs lambda mod 2^L.
    pub fn mask_products(
        &mut self,
        eu: &[Ciphertext],
    ) -> Result<(Vec<Ciphertext>, Vec<RingValue>), ProtocolError> {
        let pk = self.public_key().clone();
        let mut out = Vec::with_capacity(eu.len());
        let mut mine = Vec::with_capacity(eu.len());
        for c in eu {
            let lambda = self.masking.sample(&mut self.rng);
            let el = pk.encrypt(&lambda, &mut self.rng)?;
            out.push(pk.add(c, &el)?);
            mine.push(shares::to_ring(&lambda, &self.fp));
        }
        self.counters.encryptions += eu.len() as u64;
        self.counters.hom_additions += eu.len() as u64;
        Ok((out, mine))
    }

    /// SecSh+GC: E(w_t) under the Cloud's own key.
    pub fn encrypt_weights(&mut self, t: usize) -> Result<Vec<Ciphertext>, ProtocolError> {
        let w = self.weights(t)?;
        let CloudData::Shared { keys, .. } = &self.data else {
            return Err(ProtocolError::ConfigInvalid(
                "weight encryption is for shared data".into(),
            ));
        };
        let out = w
            .iter()
            .map(|&x| keys.public.encrypt_u64(x, &mut self.rng))
            .collect::<Result<Vec<_>, _>>()?;
        self.counters.encryptions += w.len() as u64;
        Ok(out)
    }

    /// SecSh+GC: decrypts E(Z1 w + lambda) and adds Z0 w. Returns
    /// u0 mod 2^L, the Cloud's circuit input.
    pub fn open_share(
        &mut self,
        t: usize,
        masked: &[Ciphertext],
    ) -> Result<Vec<RingValue>, ProtocolError> {
        let w = self.weights(t)?;
        let CloudData::Shared { keys, z0 } = &self.data else {
            return Err(ProtocolError::ConfigInvalid(
                "share opening is for shared data".into(),
            ));
        };
        let dec = masked
            .iter()
            .map(|c| keys.decrypt(c))
            .collect::<Result<Vec<BigUint>, _>>()?;
        self.counters.decryptions += masked.len() as u64;
        let u0 = shares::masked_matvec_cloud_step(z0, &w, &dec, &self.masking)?;
        Ok(u0.iter().map(|v| shares::to_ring(v, &self.fp)).collect())
    }
}

impl CspState {
    pub fn construction(&self) -> Construction {
        self.construction
    }

    pub fn weights(&self) -> &[f64] {
        self.boost.weights()
    }

    pub fn alphas(&self) -> &[f64] {
        self.boost.alphas()
    }

    pub fn rounds(&self) -> &[Round] {
        &self.rounds
    }

    pub fn indicators(&self) -> &[Vec<bool>] {
        &self.indicators
    }

    pub fn counters(&self) -> &PartyCounters {
        &self.counters
    }

    pub fn share(&self) -> Option<&Matrix<RingValue>> {
        self.z1.as_ref()
    }

    pub fn public_key(&self) -> &PublicKey {
        match &self.keys {
            CspKeys::Own(kp) => &kp.public,
            CspKeys::Peer(pk) => pk,
        }
    }

    /// HE+GC: decrypts masked products to ring elements (u + lambda) mod 2^L.
    pub fn open_masked(&mut self, masked: &[Ciphertext]) -> Result<Vec<RingValue>, ProtocolError> {
        let CspKeys::Own(kp) = &self.keys else {
            return Err(ProtocolError::ConfigInvalid(
                "the CSP holds no secret key with shared data".into(),
            ));
        };
        let out = masked
            .iter()
            .map(|c| kp.decrypt_mod_pow2(c, self.fp.ring_bits()))
            .collect::<Result<Vec<_>, _>>()?;
        self.counters.decryptions += masked.len() as u64;
        Ok(out)
    }

    /// SecSh+GC: E(Z1 w + lambda) from E(w). Returns the answer and the
    /// CSP's circuit inputs lambda mod 2^L.
    pub fn masked_share_products(
        &mut self,
        enc_w: &[Ciphertext],
    ) -> Result<(Vec<Ciphertext>, Vec<RingValue>), ProtocolError> {
        let z1 = self.z1.as_ref().ok_or_else(|| {
            ProtocolError::ConfigInvalid("the CSP holds no share with encrypted data".into())
        })?;
        let pk = self.public_key().clone();
        let lambdas: Vec<BigUint> = (0..z1.rows())
            .map(|_| self.masking.sample(&mut self.rng))
            .collect();
        let out = shares::masked_matvec_csp_step(&pk, z1, enc_w, &lambdas, &mut self.rng)?;
        let nz = count_nonzero(z1.as_slice());
        self.counters.hom_scalar_muls += nz;
        self.counters.hom_additions += nz.saturating_sub(z1.rows() as u64) + z1.rows() as u64;
        self.counters.encryptions += z1.rows() as u64;
        Ok((
            out,
            lambdas.iter().map(|l| shares::to_ring(l, &self.fp)).collect(),
        ))
    }

    /// Scores the indicator vector and updates the record weights.
    pub fn update(&mut self, indicator: Vec<bool>) -> Result<Round, ProtocolError> {
        if self.boost.tried() >= self.p_max {
            return Err(ProtocolError::IterationOutOfRange {
                t: self.boost.tried(),
                p_max: self.p_max,
            });
        }
        let r = self.boost.consider(&indicator)?;
        self.rounds.push(r);
        self.indicators.push(indicator);
        Ok(r)
    }
}
