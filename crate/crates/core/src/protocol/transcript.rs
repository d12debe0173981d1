//! Message log and cost counters.

use super::config::Construction;
use super::transport::{Message, Phase, Transport};
use super::ProtocolError;
use crate::boost::Decision;
use regex::Regex;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Direction {
    CloudToCsp,
    CspToCloud,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub direction: Direction,
    pub phase: Phase,
    /// Frame size including the 5-byte header.
    pub bytes: usize,
}

/// Operation counts for one party. Only ever incremented.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct PartyCounters {
    pub keygens: u64,
    pub encryptions: u64,
    pub decryptions: u64,
    pub hom_additions: u64,
    pub hom_scalar_muls: u64,
    pub and_gates_garbled: u64,
    pub and_gates_evaluated: u64,
    pub gc_table_bytes: u64,
    pub ot_sent: u64,
    pub ot_received: u64,
}

impl PartyCounters {
    pub fn hom_ops(&self) -> u64 {
        self.hom_additions + self.hom_scalar_muls
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Transcript {
    pub construction: Construction,
    pub n: usize,
    pub dims: usize,
    pub ring_bits: u32,
    pub entries: Vec<TranscriptEntry>,
    /// Setup-time work done on behalf of the data owners.
    pub users: PartyCounters,
    pub cloud: PartyCounters,
    pub csp: PartyCounters,
    /// Per-iteration ACCEPT/NEGATE/REJECT, the one bit-ish the Cloud learns.
    pub decisions: Vec<Decision>,
    pub iterations: usize,
    pub offline_precompute: bool,
}

const PHASE_GRAMMAR: &str =
    r"^(SETUP )?(BASE_APPLY RESULT_EVAL_MASK GC_TABLES OT OUTPUT_LABELS )*DONE $";

impl Transcript {
    /// Phase names in message order with consecutive repeats collapsed.
    pub fn phase_sequence(&self) -> Vec<Phase> {
        let mut out: Vec<Phase> = Vec::new();
        let mut prev = None;
        for e in &self.entries {
            if prev != Some(e.phase) {
                out.push(e.phase);
                prev = Some(e.phase);
            }
        }
        out
    }

    /// Checks the collapsed phase sequence against
    /// SETUP? (BASE_APPLY RESULT_EVAL_MASK GC_TABLES OT OUTPUT_LABELS)* DONE.
    pub fn validate_phases(&self) -> Result<(), ProtocolError> {
        let s: String = self
            .phase_sequence()
            .iter()
            .map(|p| format!("{} ", p.name()))
            .collect();
        let re = Regex::new(PHASE_GRAMMAR).expect("static regex");
        if re.is_match(&s) {
            Ok(())
        } else {
            Err(ProtocolError::PhaseOrder(s.trim_end().to_string()))
        }
    }

    pub fn bytes_by_phase(&self) -> BTreeMap<Phase, u64> {
        let mut m = BTreeMap::new();
        for e in &self.entries {
            *m.entry(e.phase).or_insert(0) += e.bytes as u64;
        }
        m
    }

    pub fn total_bytes(&self) -> u64 {
        self.entries.iter().map(|e| e.bytes as u64).sum()
    }

    pub fn bytes_sent(&self, dir: Direction) -> u64 {
        self.entries
            .iter()
            .filter(|e| e.direction == dir)
            .map(|e| e.bytes as u64)
            .sum()
    }

    /// Bytes of garbled tables plus garbler input labels.
    pub fn gc_bytes(&self) -> u64 {
        self.bytes_by_phase()
            .get(&Phase::GcTables)
            .copied()
            .unwrap_or(0)
    }

    pub fn accepted(&self) -> usize {
        self.decisions.iter().filter(|d| d.accepted()).count()
    }
}

/// Cost summary exported as JSON.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TranscriptReport {
    pub construction: Construction,
    pub n: usize,
    pub dims: usize,
    pub ring_bits: u32,
    pub iterations: usize,
    pub accepted: usize,
    pub messages: usize,
    pub phases_valid: bool,
    pub bytes_by_phase: BTreeMap<String, u64>,
    pub bytes_cloud_to_csp: u64,
    pub bytes_csp_to_cloud: u64,
    pub gc_bytes: u64,
    pub users: PartyCounters,
    pub cloud: PartyCounters,
    pub csp: PartyCounters,
    pub ratios: CostRatios,
}

/// Counters divided by their expected leading term; each should be close to
/// a small constant independent of n, k and p.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRatios {
    /// Cloud homomorphic ops / (p n (k+1)).
    pub cloud_hom_ops_per_pnk: f64,
    /// Total decryptions / (p n).
    pub decryptions_per_pn: f64,
    /// AND gates / (p n L).
    pub and_gates_per_pnl: f64,
    /// OTs / (p n L).
    pub ots_per_pnl: f64,
}

fn ratio(a: u64, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn transcript_report(t: &Transcript) -> TranscriptReport {
    let p = t.iterations;
    let pn = p * t.n;
    let l = t.ring_bits as usize;
    TranscriptReport {
        construction: t.construction,
        n: t.n,
        dims: t.dims,
        ring_bits: t.ring_bits,
        iterations: p,
        accepted: t.accepted(),
        messages: t.entries.len(),
        phases_valid: t.validate_phases().is_ok(),
        bytes_by_phase: t
            .bytes_by_phase()
            .into_iter()
            .map(|(k, v)| (k.name().to_string(), v))
            .collect(),
        bytes_cloud_to_csp: t.bytes_sent(Direction::CloudToCsp),
        bytes_csp_to_cloud: t.bytes_sent(Direction::CspToCloud),
        gc_bytes: t.gc_bytes(),
        users: t.users,
        cloud: t.cloud,
        csp: t.csp,
        ratios: CostRatios {
            cloud_hom_ops_per_pnk: ratio(t.cloud.hom_ops(), pn * t.dims),
            decryptions_per_pn: ratio(t.cloud.decryptions + t.csp.decryptions, pn),
            and_gates_per_pnl: ratio(t.csp.and_gates_garbled, pn * l),
            ots_per_pnl: ratio(t.cloud.ot_received, pn * l),
        },
    }
}

/// Wraps the Cloud's endpoint and logs every frame in order.
pub(crate) struct Recorder<T: Transport> {
    inner: T,
    pub entries: Vec<TranscriptEntry>,
}

impl<T: Transport> Recorder<T> {
    pub fn new(inner: T) -> Self {
        Self {
            inner,
            entries: Vec::new(),
        }
    }
}

impl<T: Transport> Transport for Recorder<T> {
    fn send(&mut self, msg: &Message) -> Result<(), ProtocolError> {
        self.inner.send(msg)?;
        self.entries.push(TranscriptEntry {
            direction: Direction::CloudToCsp,
            phase: msg.phase,
            bytes: msg.wire_len(),
        });
        Ok(())
    }

    fn recv(&mut self) -> Result<Message, ProtocolError> {
        let m = self.inner.recv()?;
        self.entries.push(TranscriptEntry {
            direction: Direction::CspToCloud,
            phase: m.phase,
            bytes: m.wire_len(),
        });
        Ok(m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn with_phases(ps: &[Phase]) -> Transcript {
        Transcript {
            construction: Construction::HeGc,
            n: 1,
            dims: 1,
            ring_bits: 8,
            entries: ps
                .iter()
                .map(|&phase| TranscriptEntry {
                    direction: Direction::CloudToCsp,
                    phase,
                    bytes: 5,
                })
                .collect(),
            users: Default::default(),
            cloud: Default::default(),
            csp: Default::default(),
            decisions: vec![],
            iterations: 0,
            offline_precompute: false,
        }
    }

    #[test]
    fn grammar() {
        use Phase::*;
        let it = [BaseApply, ResultEvalMask, GcTables, Ot, Ot, Ot, OutputLabels, OutputLabels];
        let mut ok = vec![Setup, Setup];
        ok.extend(it);
        ok.extend(it);
        ok.push(Done);
        assert!(with_phases(&ok).validate_phases().is_ok());
        assert!(with_phases(&[Done]).validate_phases().is_ok());
        assert!(with_phases(&[Setup]).validate_phases().is_err());
        let bad = [Setup, BaseApply, GcTables, ResultEvalMask, Ot, OutputLabels, Done];
        assert!(with_phases(&bad).validate_phases().is_err());
        assert_eq!(with_phases(&ok).bytes_by_phase()[&Ot], 30);
    }
}
