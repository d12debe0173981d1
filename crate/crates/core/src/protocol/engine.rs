//! The two party loops and the driver that runs them on two threads.

use super::config::{Construction, ProtocolConfig};
use super::gcproto::{input_bits, GcSession};
use super::model::{CloudComponent, DistributedModel};
use super::party::{setup, CloudState, CspState};
use super::transcript::{Recorder, Transcript};
use super::transport::{connect, Message, Phase, Transport, TransportKind};
use super::wire::{self, malformed, Reader};
use super::ProtocolError;
use crate::boost::{Decision, Round};
use crate::encoding::FixedPointParams;
use crate::gc::{build_sub_msb, Party};
use crate::matrix::Matrix;

#[derive(Clone, Debug)]
pub struct LearningOutcome {
    pub model: DistributedModel,
    pub transcript: Transcript,
    pub fixed_point: FixedPointParams,
    /// The CSP's view: every indicator vector it learned, in order.
    pub indicators: Vec<Vec<bool>>,
    pub rounds: Vec<Round>,
    pub p_used: usize,
    pub pool_exhausted: bool,
}

fn session(cfg: &ProtocolConfig, fp: &FixedPointParams) -> Result<GcSession, ProtocolError> {
    // The circuit computes msb(a - b) where a is the party holding the
    // masked sum: the CSP with encrypted data, the Cloud with shared data.
    let a_owner = match cfg.construction {
        Construction::HeGc => Party::Garbler,
        Construction::SecShGc => Party::Evaluator,
    };
    Ok(GcSession {
        circuit: build_sub_msb(fp.ring_bits() as usize, a_owner)?,
        mode: cfg.garble_mode,
        ot: cfg.ot_mode,
    })
}

fn cloud_run<T: Transport + ?Sized>(
    cloud: &mut CloudState,
    tx: &mut T,
    gc: &GcSession,
    tau: usize,
    offline: bool,
) -> Result<Vec<CloudComponent>, ProtocolError> {
    let width = cloud.fp.ring_bits() as usize;
    match cloud.construction {
        Construction::HeGc => {
            let pk = tx.expect(Phase::Setup)?;
            if pk != cloud.public_key().to_bytes() {
                return Err(malformed("CSP key differs from the one the data was encrypted under"));
            }
            if offline {
                cloud.precompute()?;
            }
        }
        Construction::SecShGc => {
            tx.send(&Message::new(Phase::Setup, cloud.public_key().to_bytes()))?;
        }
    }
    let mut parts = Vec::new();
    let mut t = 0;
    while parts.len() < tau && t < cloud.pool.len() {
        let mut head = Vec::new();
        wire::put_u32(&mut head, t);
        let mine = match cloud.construction {
            Construction::HeGc => {
                tx.send(&Message::new(Phase::BaseApply, head))?;
                let eu = cloud.base_apply(t)?;
                let (masked, lambdas) = cloud.mask_products(&eu)?;
                tx.send(&Message::new(Phase::ResultEvalMask, wire::ciphertexts(&masked)))?;
                lambdas
            }
            Construction::SecShGc => {
                let ew = cloud.encrypt_weights(t)?;
                head.extend(wire::ciphertexts(&ew));
                tx.send(&Message::new(Phase::BaseApply, head))?;
                let payload = tx.expect(Phase::ResultEvalMask)?;
                let mut r = Reader::new(&payload);
                let cts = r.ciphertexts(cloud.public_key())?;
                r.finish()?;
                cloud.open_share(t, &cts)?
            }
        };
        let inputs: Vec<Vec<bool>> = mine.iter().map(|&v| input_bits(&[v], width)).collect();
        let base = (t * cloud.n) as u64;
        gc.evaluate_batch(tx, &inputs, base, &mut cloud.rng, &mut cloud.counters)?;
        let d = tx.expect(Phase::OutputLabels)?;
        let decision = match d.as_slice() {
            [b] => Decision::from_byte(*b).ok_or_else(|| malformed("decision byte"))?,
            _ => return Err(malformed("decision message")),
        };
        cloud.decisions.push(decision);
        let h = &cloud.pool[t];
        match decision {
            Decision::Accept => parts.push(CloudComponent {
                pool_index: t,
                w: h.w.clone(),
            }),
            Decision::Negate => parts.push(CloudComponent {
                pool_index: t,
                w: h.negated().w,
            }),
            Decision::Reject => {}
        }
        t += 1;
    }
    let mut done = Vec::new();
    wire::put_u32(&mut done, t);
    tx.send(&Message::new(Phase::Done, done))?;
    Ok(parts)
}

fn csp_run<T: Transport + ?Sized>(
    csp: &mut CspState,
    tx: &mut T,
    gc: &GcSession,
) -> Result<(), ProtocolError> {
    let width = csp.fp.ring_bits() as usize;
    match csp.construction {
        Construction::HeGc => {
            tx.send(&Message::new(Phase::Setup, csp.public_key().to_bytes()))?;
        }
        Construction::SecShGc => {
            let pk = tx.expect(Phase::Setup)?;
            if pk != csp.public_key().to_bytes() {
                return Err(malformed("Cloud key differs from the announced one"));
            }
        }
    }
    loop {
        let m = tx.recv()?;
        let mut r = Reader::new(&m.payload);
        match m.phase {
            Phase::Done => return Ok(()),
            Phase::BaseApply => {}
            found => {
                return Err(ProtocolError::UnexpectedPhase {
                    expected: Phase::BaseApply,
                    found,
                })
            }
        }
        let t = r.u32()?;
        if t != csp.boost.tried() {
            return Err(malformed("iteration counter out of step"));
        }
        let mine = match csp.construction {
            Construction::HeGc => {
                r.finish()?;
                let payload = tx.expect(Phase::ResultEvalMask)?;
                let pk = csp.public_key().clone();
                let mut r = Reader::new(&payload);
                let cts = r.ciphertexts(&pk)?;
                r.finish()?;
                if cts.len() != csp.n {
                    return Err(malformed("result count"));
                }
                csp.open_masked(&cts)?
            }
            Construction::SecShGc => {
                let pk = csp.public_key().clone();
                let ew = r.ciphertexts(&pk)?;
                r.finish()?;
                let (answer, lambdas) = csp.masked_share_products(&ew)?;
                tx.send(&Message::new(Phase::ResultEvalMask, wire::ciphertexts(&answer)))?;
                lambdas
            }
        };
        let inputs: Vec<Vec<bool>> = mine.iter().map(|&v| input_bits(&[v], width)).collect();
        let base = (t * csp.n) as u64;
        let secrets = gc.garble_batch(tx, &inputs, base, &mut csp.rng, &mut csp.counters)?;
        let msb = gc.decode_batch(tx, &secrets)?;
        // Non-negative product means the classifier is right on the record.
        let indicator: Vec<bool> = msb.iter().map(|b| !b).collect();
        let round = csp.update(indicator)?;
        tx.send(&Message::new(
            Phase::OutputLabels,
            vec![round.decision.to_byte()],
        ))?;
    }
}

/// Prefers the error that caused a run to fail over the peer's resulting
/// TransportClosed.
pub(crate) fn pick_error(a: ProtocolError, b: Option<ProtocolError>) -> ProtocolError {
    match (a, b) {
        (ProtocolError::TransportClosed, Some(other)) => other,
        (a, _) => a,
    }
}

/// Runs both parties on a fresh transport pair of the given kind. `z` is
/// the standardized, label-folded training matrix.
pub fn run_learning(
    cfg: &ProtocolConfig,
    z: &Matrix<f64>,
    transport: TransportKind,
) -> Result<LearningOutcome, ProtocolError> {
    let (a, b) = connect(transport)?;
    run_learning_with(cfg, z, a, b)
}

/// Like [`run_learning`] with caller-supplied endpoints for the Cloud and
/// the CSP.
pub fn run_learning_with<A: Transport, B: Transport>(
    cfg: &ProtocolConfig,
    z: &Matrix<f64>,
    cloud_end: A,
    csp_end: B,
) -> Result<LearningOutcome, ProtocolError> {
    let (mut cloud, mut csp, users) = setup(cfg, z)?;
    let fp = cloud.fp;
    let gc_cloud = session(cfg, &fp)?;
    let gc_csp = session(cfg, &fp)?;
    // Each closure owns its endpoint, so a failing party closes the
    // transport and the peer's blocking recv returns.
    let (cloud_res, csp_res) = std::thread::scope(|s| {
        let (csp_ref, cloud_ref) = (&mut csp, &mut cloud);
        let (gc_csp, gc_cloud) = (&gc_csp, &gc_cloud);
        let csp_h = s.spawn(move || {
            let mut end = csp_end;
            csp_run(csp_ref, &mut end, gc_csp)
        });
        let cloud_h = s.spawn(move || {
            let mut rec = Recorder::new(cloud_end);
            let r = cloud_run(cloud_ref, &mut rec, gc_cloud, cfg.tau, cfg.offline_precompute);
            r.map(|p| (p, std::mem::take(&mut rec.entries)))
        });
        (
            cloud_h.join().expect("Cloud thread panicked"),
            csp_h.join().expect("CSP thread panicked"),
        )
    });
    let (parts, entries) = match (cloud_res, csp_res) {
        (Ok(p), Ok(())) => p,
        (Err(e), r) => return Err(pick_error(e, r.err())),
        (Ok(_), Err(e)) => return Err(e),
    };
    let model = DistributedModel {
        cloud_part: parts,
        csp_part: csp.boost.alphas().to_vec(),
        acceptance: cloud.decisions.clone(),
        seed: cloud.seed,
    };
    let p_used = cloud.decisions.len();
    let pool_exhausted = model.len() < cfg.tau;
    if pool_exhausted {
        log::warn!(
            "only {} of {} classifiers accepted after {} tries",
            model.len(),
            cfg.tau,
            p_used
        );
    }
    let transcript = Transcript {
        construction: cfg.construction,
        n: cloud.n,
        dims: cloud.dims,
        ring_bits: fp.ring_bits(),
        entries,
        users,
        cloud: cloud.counters,
        csp: csp.counters,
        decisions: cloud.decisions.clone(),
        iterations: p_used,
        offline_precompute: cfg.offline_precompute && cfg.construction == Construction::HeGc,
    };
    transcript.validate_phases()?;
    Ok(LearningOutcome {
        model,
        transcript,
        fixed_point: fp,
        indicators: std::mem::take(&mut csp.indicators),
        rounds: std::mem::take(&mut csp.rounds),
        p_used,
        pool_exhausted,
    })
}
