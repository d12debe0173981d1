//! Confidential decision-stump selection over encrypted features.
//!
//! Each normalized feature is cut at s fixed thresholds over (-4, 4). For
//! candidate r = (feature j, threshold v) the stump predicts +1 iff
//! x_j < v; its conjugate predicts the opposite. The parties compute one
//! error bit per record and candidate (1 = wrong) with a subtract-and-MSB
//! circuit extended by a label XOR, so only the CSP learns the error
//! vectors. The CSP then runs the boosting selection on them locally.

use super::config::ProtocolConfig;
use super::gcproto::{input_bits, GcSession};
use super::engine::pick_error;
use super::transcript::{PartyCounters, Recorder, Transcript};
use super::transport::{connect, Message, Phase, Transport, TransportKind};
use super::wire::{self, malformed, Reader};
use super::config::Construction;
use super::ProtocolError;
use crate::ahe::{keygen, Ciphertext, EncryptedMatrix, KeyPair, PublicKey};
use crate::boost::{clamped_alpha, update_weights, BaseClassifier, BoostedModel, ModelKind};
use crate::encoding::{max_abs, FixedPointParams, RingValue};
use crate::gc::{build_sub_msb_xor, Party};
use crate::matrix::Matrix;
use crate::shares::{self, Masking};
use num_bigint::BigUint;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

/// Half-width of the threshold range in standardized units.
pub const THRESHOLD_RANGE: f64 = 4.0;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsSelectConfig {
    pub protocol: ProtocolConfig,
    pub bins: usize,
    pub rounds: usize,
}

/// Thresholds at the bin centres: v_m = -4 + 8 (m + 0.5) / s.
pub fn bin_thresholds(bins: usize) -> Vec<f64> {
    let w = 2.0 * THRESHOLD_RANGE / bins as f64;
    (0..bins)
        .map(|m| -THRESHOLD_RANGE + w * (m as f64 + 0.5))
        .collect()
}

/// Base candidates (feature, threshold), feature-major. Candidate index
/// 2r is base stump r, 2r+1 its conjugate.
pub fn ds_candidates(k: usize, bins: usize) -> Vec<(usize, f64)> {
    let v = bin_thresholds(bins);
    (0..k)
        .flat_map(|j| v.iter().map(move |&t| (j, t)))
        .collect()
}

/// The stump for candidate index c in 0..2sk as a plaintext classifier.
pub fn candidate_stump(candidates: &[(usize, f64)], c: usize) -> BaseClassifier {
    let (feature, threshold) = candidates[c / 2];
    // Base stump: +1 below the threshold, i.e. -1 when x > threshold.
    let polarity = if c % 2 == 0 { -1 } else { 1 };
    BaseClassifier::Stump {
        feature,
        threshold,
        polarity,
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Selection {
    pub candidate: usize,
    pub error: f64,
    pub alpha: f64,
}

/// Boosting over fixed error vectors: each round picks the candidate of
/// least weighted error (conjugates use the complemented vector, ties go to
/// the lowest index). Stops early when no candidate is below one half.
pub fn select_stumps(errors: &[Vec<bool>], rounds: usize) -> Vec<Selection> {
    let Some(n) = errors.first().map(Vec::len) else {
        return Vec::new();
    };
    let mut d = vec![1.0 / n as f64; n];
    let mut out = Vec::new();
    for _ in 0..rounds {
        let mut best: Option<(usize, f64)> = None;
        for (r, ev) in errors.iter().enumerate() {
            let base: f64 = ev.iter().zip(&d).filter(|(&e, _)| e).map(|(_, w)| w).sum();
            let conj: f64 = ev.iter().zip(&d).filter(|(&e, _)| !e).map(|(_, w)| w).sum();
            for (c, e) in [(2 * r, base), (2 * r + 1, conj)] {
                if best.map_or(true, |(_, be)| e < be) {
                    best = Some((c, e));
                }
            }
        }
        let (c, e) = best.expect("at least one candidate");
        let Ok(a) = clamped_alpha(e) else { break };
        let correct: Vec<bool> = errors[c / 2].iter().map(|&b| (c % 2 == 1) == b).collect();
        update_weights(&mut d, &correct, a);
        out.push(Selection {
            candidate: c,
            error: e,
            alpha: a,
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StumpDistributedModel {
    /// Cloud: the public candidate table.
    pub candidates: Vec<(usize, f64)>,
    /// CSP: chosen candidate indices and their weights.
    pub selections: Vec<Selection>,
}

impl StumpDistributedModel {
    pub fn reconstruct(&self) -> BoostedModel {
        let mut m = BoostedModel::empty(ModelKind::Ds);
        for s in &self.selections {
            m.push(candidate_stump(&self.candidates, s.candidate), s.alpha);
        }
        m
    }
}

#[derive(Clone, Debug)]
pub struct DsOutcome {
    pub model: StumpDistributedModel,
    pub transcript: Transcript,
    pub fixed_point: FixedPointParams,
    /// The CSP's view: error vector of every base candidate.
    pub errors: Vec<Vec<bool>>,
}

/// Ring for differences x - v with |v| < 4.
pub fn ds_fixed_point(cfg: &ProtocolConfig, x: &Matrix<f64>) -> Result<FixedPointParams, ProtocolError> {
    let b = cfg.frac_bits;
    let mag = ((max_abs(x) + THRESHOLD_RANGE) * 2f64.powi(b as i32)).floor() as u64 + 1;
    let derived = (64 - mag.leading_zeros() + 1).max(b + 2);
    match cfg.ring_bits {
        Some(l) if l < derived => Err(ProtocolError::ConfigInvalid(format!(
            "ring_bits {l} too small for this data, need at least {derived}"
        ))),
        Some(l) => Ok(FixedPointParams::new(b, l)?),
        None => Ok(FixedPointParams::new(b, derived)?),
    }
}

struct DsCloud {
    pk: PublicKey,
    ex: EncryptedMatrix,
    ey: Vec<Ciphertext>,
    fp: FixedPointParams,
    candidates: Vec<(usize, f64)>,
    masking: Masking,
    label_masking: Masking,
    rng: ChaCha20Rng,
    counters: PartyCounters,
}

struct DsCsp {
    keys: KeyPair,
    fp: FixedPointParams,
    n: usize,
    rng: ChaCha20Rng,
    counters: PartyCounters,
}

fn party_rng(seed: u64) -> ChaCha20Rng {
    let mut r = ChaCha20Rng::seed_from_u64(seed);
    r.set_stream(1);
    r
}

fn ds_cloud_run<T: Transport + ?Sized>(
    c: &mut DsCloud,
    tx: &mut T,
    gc: &GcSession,
) -> Result<(), ProtocolError> {
    let n = c.ex.rows();
    let width = c.fp.ring_bits() as usize;
    if tx.expect(Phase::Setup)? != c.pk.to_bytes() {
        return Err(malformed("CSP key differs from the one the data was encrypted under"));
    }
    // Label masks: the CSP learns (y + mu) mod 2, the Cloud keeps mu mod 2.
    let mut label_bits = Vec::with_capacity(n);
    let mut masked_y = Vec::with_capacity(n);
    for ey in &c.ey {
        let mu = c.label_masking.sample(&mut c.rng);
        label_bits.push(mu.bit(0));
        masked_y.push(c.pk.add_plain(ey, &mu)?);
    }
    c.counters.hom_additions += n as u64;
    tx.send(&Message::new(Phase::Setup, wire::ciphertexts(&masked_y)))?;

    let q = BigUint::from(c.fp.modulus());
    for (r, &(j, v)) in c.candidates.iter().enumerate() {
        let mut head = Vec::new();
        wire::put_u32(&mut head, r);
        tx.send(&Message::new(Phase::BaseApply, head))?;
        let v_enc = c.fp.encode(v)?;
        let mut masked = Vec::with_capacity(n);
        let mut inputs = Vec::with_capacity(n);
        for (i, &lb) in label_bits.iter().enumerate() {
            let lambda = c.masking.sample(&mut c.rng);
            let shift = &q - BigUint::from(v_enc) + &lambda;
            masked.push(c.pk.add_plain(&c.ex.row(i)[j], &shift)?);
            let mut bits = input_bits(&[shares::to_ring(&lambda, &c.fp)], width);
            bits.push(lb);
            inputs.push(bits);
        }
        c.counters.hom_additions += n as u64;
        tx.send(&Message::new(Phase::ResultEvalMask, wire::ciphertexts(&masked)))?;
        gc.evaluate_batch(tx, &inputs, (r * n) as u64, &mut c.rng, &mut c.counters)?;
    }
    let mut done = Vec::new();
    wire::put_u32(&mut done, c.candidates.len());
    tx.send(&Message::new(Phase::Done, done))
}

fn ds_csp_run<T: Transport + ?Sized>(
    c: &mut DsCsp,
    tx: &mut T,
    gc: &GcSession,
) -> Result<Vec<Vec<bool>>, ProtocolError> {
    let width = c.fp.ring_bits() as usize;
    tx.send(&Message::new(Phase::Setup, c.keys.public.to_bytes()))?;
    let payload = tx.expect(Phase::Setup)?;
    let mut r = Reader::new(&payload);
    let my = r.ciphertexts(&c.keys.public)?;
    r.finish()?;
    if my.len() != c.n {
        return Err(malformed("label count"));
    }
    let label_bits = my
        .iter()
        .map(|ct| Ok(c.keys.decrypt_mod_pow2(ct, 1)? == 1))
        .collect::<Result<Vec<bool>, ProtocolError>>()?;
    c.counters.decryptions += c.n as u64;

    let mut errors = Vec::new();
    loop {
        let m = tx.recv()?;
        match m.phase {
            Phase::Done => return Ok(errors),
            Phase::BaseApply => {}
            found => {
                return Err(ProtocolError::UnexpectedPhase {
                    expected: Phase::BaseApply,
                    found,
                })
            }
        }
        let mut r = Reader::new(&m.payload);
        let idx = r.u32()?;
        r.finish()?;
        if idx != errors.len() {
            return Err(malformed("candidate counter out of step"));
        }
        let payload = tx.expect(Phase::ResultEvalMask)?;
        let mut r = Reader::new(&payload);
        let cts = r.ciphertexts(&c.keys.public)?;
        r.finish()?;
        if cts.len() != c.n {
            return Err(malformed("result count"));
        }
        let mut inputs = Vec::with_capacity(c.n);
        for (ct, &lb) in cts.iter().zip(&label_bits) {
            let a: RingValue = c.keys.decrypt_mod_pow2(ct, c.fp.ring_bits())?;
            let mut bits = input_bits(&[a], width);
            bits.push(lb);
            inputs.push(bits);
        }
        c.counters.decryptions += c.n as u64;
        let secrets = gc.garble_batch(tx, &inputs, (idx * c.n) as u64, &mut c.rng, &mut c.counters)?;
        errors.push(gc.decode_batch(tx, &secrets)?);
    }
}

/// Runs the selection with `x` standardized and labels in {-1, +1}.
pub fn confidential_ds_select(
    cfg: &DsSelectConfig,
    x: &Matrix<f64>,
    y: &[i8],
    transport: TransportKind,
) -> Result<DsOutcome, ProtocolError> {
    if cfg.bins < 2 {
        return Err(ProtocolError::BinCountInvalid(cfg.bins));
    }
    let pc = &cfg.protocol;
    pc.validate()?;
    if x.rows() != y.len() || x.rows() == 0 || x.cols() == 0 {
        return Err(ProtocolError::ConfigInvalid(
            "need a non-empty feature matrix with one label per row".into(),
        ));
    }
    if let Some(i) = y.iter().position(|&v| v != 1 && v != -1) {
        return Err(ProtocolError::ConfigInvalid(format!(
            "label {} at row {i} is not -1 or +1",
            y[i]
        )));
    }
    let fp = ds_fixed_point(pc, x)?;
    let n = x.rows();
    let k = x.cols();
    let masking = Masking::for_ring_value(&fp, pc.sigma);
    let label_masking = Masking::new(1, pc.sigma);
    if masking.modulus_bits() + 1 >= pc.key_bits {
        return Err(ProtocolError::ConfigInvalid("key too small for the mask".into()));
    }

    let mut csp_rng = party_rng(pc.seeds.csp);
    let keys = keygen(pc.key_bits, &mut csp_rng)?;
    let mut users_rng = ChaCha20Rng::seed_from_u64(pc.seeds.data);
    let mut users = PartyCounters::default();
    let pk = keys.public.clone();
    let ex = pk.encrypt_matrix(&fp.encode_matrix(x)?, &mut users_rng)?;
    let ey = y
        .iter()
        .map(|&v| pk.encrypt_u64(u64::from(v == 1), &mut users_rng))
        .collect::<Result<Vec<_>, _>>()?;
    users.encryptions += (n * k + n) as u64;

    let candidates = ds_candidates(k, cfg.bins);
    let mut cloud = DsCloud {
        pk,
        ex,
        ey,
        fp,
        candidates: candidates.clone(),
        masking,
        label_masking,
        rng: party_rng(pc.seeds.cloud),
        counters: PartyCounters::default(),
    };
    let mut csp = DsCsp {
        keys,
        fp,
        n,
        rng: csp_rng,
        counters: PartyCounters {
            keygens: 1,
            ..Default::default()
        },
    };
    let circuit = || build_sub_msb_xor(fp.ring_bits() as usize, Party::Garbler);
    let gc_cloud = GcSession {
        circuit: circuit()?,
        mode: pc.garble_mode,
        ot: pc.ot_mode,
    };
    let gc_csp = GcSession {
        circuit: circuit()?,
        mode: pc.garble_mode,
        ot: pc.ot_mode,
    };
    let (cloud_end, csp_end) = connect(transport)?;
    let (cloud_res, csp_res) = std::thread::scope(|s| {
        let (cloud_ref, csp_ref) = (&mut cloud, &mut csp);
        let (gc_cloud, gc_csp) = (&gc_cloud, &gc_csp);
        let csp_h = s.spawn(move || {
            let mut end = csp_end;
            ds_csp_run(csp_ref, &mut end, gc_csp)
        });
        let cloud_h = s.spawn(move || {
            let mut rec = Recorder::new(cloud_end);
            ds_cloud_run(cloud_ref, &mut rec, gc_cloud).map(|()| std::mem::take(&mut rec.entries))
        });
        (
            cloud_h.join().expect("Cloud thread panicked"),
            csp_h.join().expect("CSP thread panicked"),
        )
    });
    let (entries, errors) = match (cloud_res, csp_res) {
        (Ok(e), Ok(errs)) => (e, errs),
        (Err(e), r) => return Err(pick_error(e, r.err())),
        (Ok(_), Err(e)) => return Err(e),
    };
    let selections = select_stumps(&errors, cfg.rounds);
    let transcript = Transcript {
        construction: Construction::HeGc,
        n,
        dims: k,
        ring_bits: fp.ring_bits(),
        entries,
        users,
        cloud: cloud.counters,
        csp: csp.counters,
        decisions: Vec::new(),
        iterations: candidates.len(),
        offline_precompute: false,
    };
    transcript.validate_phases()?;
    Ok(DsOutcome {
        model: StumpDistributedModel {
            candidates,
            selections,
        },
        transcript,
        fixed_point: fp,
        errors,
    })
}
