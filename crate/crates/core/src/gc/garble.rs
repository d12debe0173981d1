//! Free-XOR garbling with point-and-permute. AND gates use half gates (two
//! rows) by default; the classic four-row table is kept as a cross-check.
//! Both hash through a fixed-key AES permutation tweaked by gate index.

use super::circuit::{Circuit, Gate, Party, WireId};
use super::GcError;
use aes::cipher::{generic_array::GenericArray, BlockEncrypt, KeyInit};
use aes::Aes128;
use rand::{CryptoRng, Rng, RngCore};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::sync::OnceLock;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Default)]
pub struct Label(pub u128);

impl Label {
    pub const BYTES: usize = 16;

    pub fn random<R: RngCore + ?Sized>(rng: &mut R) -> Self {
        Label(rng.gen())
    }

    /// Point-and-permute bit.
    pub fn lsb(self) -> bool {
        self.0 & 1 == 1
    }

    pub fn to_bytes(self) -> [u8; 16] {
        self.0.to_be_bytes()
    }

    pub fn from_bytes(b: &[u8]) -> Result<Self, GcError> {
        let arr: [u8; 16] = b
            .get(..16)
            .and_then(|s| s.try_into().ok())
            .ok_or(GcError::Malformed("short label"))?;
        Ok(Label(u128::from_be_bytes(arr)))
    }
}

impl std::ops::BitXor for Label {
    type Output = Label;
    fn bitxor(self, rhs: Label) -> Label {
        Label(self.0 ^ rhs.0)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum GarbleMode {
    #[default]
    HalfGates,
    FourRow,
}

impl GarbleMode {
    pub fn rows_per_and(self) -> usize {
        match self {
            GarbleMode::HalfGates => 2,
            GarbleMode::FourRow => 4,
        }
    }
}

const FIXED_KEY: [u8; 16] = *b"confboost-gc-key";

fn cipher() -> &'static Aes128 {
    static AES: OnceLock<Aes128> = OnceLock::new();
    AES.get_or_init(|| Aes128::new(GenericArray::from_slice(&FIXED_KEY)))
}

fn prp(x: u128) -> u128 {
    let mut block = GenericArray::from(x.to_be_bytes());
    cipher().encrypt_block(&mut block);
    u128::from_be_bytes(block.into())
}

/// sigma(hi || lo) = (hi ^ lo) || hi, a linear orthomorphism.
fn sigma(x: u128) -> u128 {
    let hi = x >> 64;
    let lo = x & u64::MAX as u128;
    ((hi ^ lo) << 64) | hi
}

/// H(x, t) = pi(sigma(x) ^ t) ^ sigma(x).
pub fn hash(x: Label, tweak: u128) -> Label {
    let s = sigma(x.0);
    Label(prp(s ^ tweak) ^ s)
}

fn tweak(instance: u64, gate: usize, j: u64) -> u128 {
    ((instance as u128) << 64) | ((gate as u128) << 2 | j as u128)
}

fn output_tag(instance: u64, index: usize, l: Label) -> [u8; 16] {
    let mut h = Sha256::new();
    h.update(b"out-tag");
    h.update(instance.to_be_bytes());
    h.update((index as u64).to_be_bytes());
    h.update(l.to_bytes());
    h.finalize()[..16].try_into().expect("16 of 32 bytes")
}

/// What the evaluator receives: AND-gate rows in gate order and per-output
/// check tags indexed by label lsb.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GarbledCircuit {
    pub mode: GarbleMode,
    pub instance: u64,
    pub rows: Vec<Label>,
    pub output_tags: Vec<[[u8; 16]; 2]>,
}

/// What the garbler keeps.
#[derive(Clone, Debug)]
pub struct GarblerSecrets {
    delta: Label,
    input_zero: Vec<(WireId, Label)>,
    output_zero: Vec<Label>,
}

impl GarblerSecrets {
    pub fn delta(&self) -> Label {
        self.delta
    }

    fn zero(&self, wire: WireId) -> Label {
        self.input_zero
            .iter()
            .find(|(w, _)| *w == wire)
            .map(|(_, l)| *l)
            .expect("wire is a circuit input")
    }

    /// Active labels for the given input wires and bits.
    pub fn encode(&self, wires: &[WireId], bits: &[bool]) -> Vec<Label> {
        wires
            .iter()
            .zip(bits)
            .map(|(&w, &b)| {
                let z = self.zero(w);
                if b {
                    z ^ self.delta
                } else {
                    z
                }
            })
            .collect()
    }

    /// (label for 0, label for 1) per wire, the OT sender's messages.
    pub fn label_pairs(&self, wires: &[WireId]) -> Vec<(Label, Label)> {
        wires
            .iter()
            .map(|&w| {
                let z = self.zero(w);
                (z, z ^ self.delta)
            })
            .collect()
    }

    pub fn output_zero_labels(&self) -> &[Label] {
        &self.output_zero
    }
}

pub fn garble<R: RngCore + CryptoRng>(
    circuit: &Circuit,
    mode: GarbleMode,
    instance: u64,
    rng: &mut R,
) -> (GarbledCircuit, GarblerSecrets) {
    let delta = Label(rng.gen::<u128>() | 1);
    let mut zero = vec![Label::default(); circuit.wire_count()];
    let mut input_zero = Vec::new();
    for g in circuit.inputs() {
        for &w in &g.wires {
            zero[w] = Label::random(rng);
            input_zero.push((w, zero[w]));
        }
    }
    let mut rows = Vec::with_capacity(circuit.and_count() * mode.rows_per_and());
    for (gid, gate) in circuit.gates().iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => zero[out] = zero[a] ^ zero[b],
            Gate::Not { a, out } => zero[out] = zero[a] ^ delta,
            Gate::And { a, b, out } => {
                zero[out] = match mode {
                    GarbleMode::HalfGates => {
                        garble_half(zero[a], zero[b], delta, instance, gid, &mut rows)
                    }
                    GarbleMode::FourRow => {
                        let c0 = Label::random(rng);
                        garble_four(zero[a], zero[b], c0, delta, instance, gid, &mut rows);
                        c0
                    }
                }
            }
        }
    }
    let output_zero: Vec<Label> = circuit.outputs().iter().map(|&o| zero[o]).collect();
    let output_tags = output_zero
        .iter()
        .enumerate()
        .map(|(i, &z)| {
            let one = z ^ delta;
            let mut t = [[0u8; 16]; 2];
            t[z.lsb() as usize] = output_tag(instance, i, z);
            t[one.lsb() as usize] = output_tag(instance, i, one);
            t
        })
        .collect();
    (
        GarbledCircuit {
            mode,
            instance,
            rows,
            output_tags,
        },
        GarblerSecrets {
            delta,
            input_zero,
            output_zero,
        },
    )
}

fn garble_half(
    a0: Label,
    b0: Label,
    delta: Label,
    instance: u64,
    gid: usize,
    rows: &mut Vec<Label>,
) -> Label {
    let (pa, pb) = (a0.lsb(), b0.lsb());
    let (tg_tw, te_tw) = (tweak(instance, gid, 0), tweak(instance, gid, 1));
    let a1 = a0 ^ delta;
    let b1 = b0 ^ delta;
    let ha0 = hash(a0, tg_tw);
    let hb0 = hash(b0, te_tw);
    // Generator half.
    let mut tg = ha0 ^ hash(a1, tg_tw);
    if pb {
        tg = tg ^ delta;
    }
    let mut wg = ha0;
    if pa {
        wg = wg ^ tg;
    }
    // Evaluator half.
    let te = hb0 ^ hash(b1, te_tw) ^ a0;
    let mut we = hb0;
    if pb {
        we = we ^ te ^ a0;
    }
    rows.push(tg);
    rows.push(te);
    wg ^ we
}

fn row_key(a: Label, b: Label, instance: u64, gid: usize) -> Label {
    hash(a, tweak(instance, gid, 2)) ^ hash(b, tweak(instance, gid, 3))
}

fn garble_four(
    a0: Label,
    b0: Label,
    c0: Label,
    delta: Label,
    instance: u64,
    gid: usize,
    rows: &mut Vec<Label>,
) {
    let mut table = [Label::default(); 4];
    for i in [false, true] {
        for j in [false, true] {
            let a = if i { a0 ^ delta } else { a0 };
            let b = if j { b0 ^ delta } else { b0 };
            let c = if i && j { c0 ^ delta } else { c0 };
            let slot = 2 * a.lsb() as usize + b.lsb() as usize;
            table[slot] = row_key(a, b, instance, gid) ^ c;
        }
    }
    rows.extend_from_slice(&table);
}

/// Evaluates with active labels for each party's input wires (in the order
/// of [`Circuit::input_wires`]) and checks output tags.
pub fn evaluate(
    circuit: &Circuit,
    gc: &GarbledCircuit,
    garbler_labels: &[Label],
    evaluator_labels: &[Label],
) -> Result<Vec<Label>, GcError> {
    let mut w = vec![Label::default(); circuit.wire_count()];
    for (party, labels) in [
        (Party::Garbler, garbler_labels),
        (Party::Evaluator, evaluator_labels),
    ] {
        let wires = circuit.input_wires(party);
        if wires.len() != labels.len() {
            return Err(GcError::InputCountMismatch {
                expected: wires.len(),
                found: labels.len(),
            });
        }
        for (&id, &l) in wires.iter().zip(labels) {
            w[id] = l;
        }
    }
    let per = gc.mode.rows_per_and();
    if gc.rows.len() != circuit.and_count() * per {
        return Err(GcError::Malformed("row count does not match circuit"));
    }
    if gc.output_tags.len() != circuit.outputs().len() {
        return Err(GcError::Malformed("tag count does not match circuit"));
    }
    let mut next_row = 0;
    for (gid, gate) in circuit.gates().iter().enumerate() {
        match *gate {
            Gate::Xor { a, b, out } => w[out] = w[a] ^ w[b],
            Gate::Not { a, out } => w[out] = w[a],
            Gate::And { a, b, out } => {
                let rows = &gc.rows[next_row..next_row + per];
                next_row += per;
                let (la, lb) = (w[a], w[b]);
                w[out] = match gc.mode {
                    GarbleMode::HalfGates => {
                        let (tg, te) = (rows[0], rows[1]);
                        let mut wg = hash(la, tweak(gc.instance, gid, 0));
                        if la.lsb() {
                            wg = wg ^ tg;
                        }
                        let mut we = hash(lb, tweak(gc.instance, gid, 1));
                        if lb.lsb() {
                            we = we ^ te ^ la;
                        }
                        wg ^ we
                    }
                    GarbleMode::FourRow => {
                        let slot = 2 * la.lsb() as usize + lb.lsb() as usize;
                        rows[slot] ^ row_key(la, lb, gc.instance, gid)
                    }
                };
            }
        }
    }
    circuit
        .outputs()
        .iter()
        .enumerate()
        .map(|(i, &o)| {
            let l = w[o];
            if gc.output_tags[i][l.lsb() as usize] != output_tag(gc.instance, i, l) {
                return Err(GcError::GarbledRowAuthFailure { output: i });
            }
            Ok(l)
        })
        .collect()
}

/// Garbler-side decoding of output labels.
pub fn decode_output(labels: &[Label], secrets: &GarblerSecrets) -> Result<Vec<bool>, GcError> {
    if labels.len() != secrets.output_zero.len() {
        return Err(GcError::InputCountMismatch {
            expected: secrets.output_zero.len(),
            found: labels.len(),
        });
    }
    labels
        .iter()
        .zip(&secrets.output_zero)
        .enumerate()
        .map(|(i, (&l, &z))| {
            if l == z {
                Ok(false)
            } else if l == z ^ secrets.delta {
                Ok(true)
            } else {
                Err(GcError::UnknownLabel { output: i })
            }
        })
        .collect()
}

impl GarbledCircuit {
    /// Rows (16 bytes each, gate order) followed by output tags.
    pub fn write_to(&self, out: &mut Vec<u8>) {
        for r in &self.rows {
            out.extend_from_slice(&r.to_bytes());
        }
        for t in &self.output_tags {
            out.extend_from_slice(&t[0]);
            out.extend_from_slice(&t[1]);
        }
    }

    pub fn byte_len(circuit: &Circuit, mode: GarbleMode) -> usize {
        16 * (circuit.and_count() * mode.rows_per_and() + 2 * circuit.outputs().len())
    }

    pub fn read_from(
        circuit: &Circuit,
        mode: GarbleMode,
        instance: u64,
        buf: &[u8],
    ) -> Result<Self, GcError> {
        if buf.len() != Self::byte_len(circuit, mode) {
            return Err(GcError::Malformed("garbled table length"));
        }
        let nrows = circuit.and_count() * mode.rows_per_and();
        let rows = buf[..16 * nrows]
            .chunks_exact(16)
            .map(Label::from_bytes)
            .collect::<Result<_, _>>()?;
        let output_tags = buf[16 * nrows..]
            .chunks_exact(32)
            .map(|c| {
                [
                    c[..16].try_into().expect("16 bytes"),
                    c[16..].try_into().expect("16 bytes"),
                ]
            })
            .collect();
        Ok(Self {
            mode,
            instance,
            rows,
            output_tags,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::super::circuit::{build_sub_msb, to_bits};
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha20Rng;

    fn run(mode: GarbleMode, a: u128, b: u128, width: usize, seed: u64) -> bool {
        let c = build_sub_msb(width, Party::Garbler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let (gc, sec) = garble(&c, mode, seed, &mut rng);
        let gl = sec.encode(&c.input_wires(Party::Garbler), &to_bits(a, width));
        let el = sec.encode(&c.input_wires(Party::Evaluator), &to_bits(b, width));
        let out = evaluate(&c, &gc, &gl, &el).unwrap();
        decode_output(&out, &sec).unwrap()[0]
    }

    #[test]
    fn both_modes_agree_with_plain() {
        let width = 6;
        let c = build_sub_msb(width, Party::Garbler).unwrap();
        for a in 0..64u128 {
            for b in [0u128, 1, 17, 63] {
                let want = c.eval(&[to_bits(a, width), to_bits(b, width)]).unwrap()[0];
                assert_eq!(run(GarbleMode::HalfGates, a, b, width, a as u64), want);
                assert_eq!(run(GarbleMode::FourRow, a, b, width, a as u64 + 99), want);
            }
        }
    }

    #[test]
    fn tampered_rows_never_decode_silently() {
        let c = build_sub_msb(8, Party::Garbler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(5);
        let (gc, sec) = garble(&c, GarbleMode::HalfGates, 0, &mut rng);
        let mut detected = 0;
        for row in 0..gc.rows.len() {
            let mut bad = gc.clone();
            bad.rows[row].0 ^= 1 << 40;
            for (a, b) in [(200u128, 3u128), (3, 200), (77, 77), (0, 255)] {
                let want = c.eval(&[to_bits(a, 8), to_bits(b, 8)]).unwrap()[0];
                let gl = sec.encode(&c.input_wires(Party::Garbler), &to_bits(a, 8));
                let el = sec.encode(&c.input_wires(Party::Evaluator), &to_bits(b, 8));
                match evaluate(&c, &bad, &gl, &el) {
                    Ok(out) => assert_eq!(decode_output(&out, &sec).unwrap()[0], want),
                    Err(GcError::GarbledRowAuthFailure { output: 0 }) => detected += 1,
                    Err(e) => panic!("unexpected {e}"),
                }
            }
        }
        assert!(detected > 0);
    }

    #[test]
    fn foreign_label_is_unknown() {
        let c = build_sub_msb(4, Party::Garbler).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(6);
        let (_, sec) = garble(&c, GarbleMode::HalfGates, 0, &mut rng);
        assert_eq!(
            decode_output(&[Label(12345)], &sec),
            Err(GcError::UnknownLabel { output: 0 })
        );
    }

    #[test]
    fn table_bytes_round_trip() {
        let c = build_sub_msb(5, Party::Evaluator).unwrap();
        let mut rng = ChaCha20Rng::seed_from_u64(7);
        for mode in [GarbleMode::HalfGates, GarbleMode::FourRow] {
            let (gc, _) = garble(&c, mode, 3, &mut rng);
            let mut buf = Vec::new();
            gc.write_to(&mut buf);
            assert_eq!(buf.len(), GarbledCircuit::byte_len(&c, mode));
            assert_eq!(GarbledCircuit::read_from(&c, mode, 3, &buf).unwrap(), gc);
        }
    }
}
