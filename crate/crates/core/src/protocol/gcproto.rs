//! One batch of sign checks: the CSP garbles one circuit per record, the
//! Cloud fetches its input labels by OT, evaluates and returns the output
//! labels, and the CSP decodes them.

use super::transcript::PartyCounters;
use super::transport::{Message, Phase, Transport};
use super::wire::{self, malformed, Reader};
use super::ProtocolError;
use crate::gc::circuit::to_bits;
use crate::gc::ot::POINT_BYTES;
use crate::gc::{
    decode_output, evaluate, garble, Circuit, GarbleMode, GarbledCircuit, GarblerSecrets, Label,
    OtMode, OtReceiver, OtSender, Party,
};
use rand::{CryptoRng, RngCore};

pub(crate) struct GcSession {
    pub circuit: Circuit,
    pub mode: GarbleMode,
    pub ot: OtMode,
}

/// Concatenated little-endian bits of several ring values.
pub(crate) fn input_bits(values: &[u64], width: usize) -> Vec<bool> {
    values
        .iter()
        .flat_map(|&v| to_bits(v as u128, width))
        .collect()
}

impl GcSession {
    /// Garbler: sends the tables with its own active labels, then serves
    /// the OT. `inputs[i]` are the garbler's bits for instance i.
    pub fn garble_batch<T: Transport + ?Sized, R: RngCore + CryptoRng>(
        &self,
        tx: &mut T,
        inputs: &[Vec<bool>],
        base_instance: u64,
        rng: &mut R,
        counters: &mut PartyCounters,
    ) -> Result<Vec<GarblerSecrets>, ProtocolError> {
        let gw = self.circuit.input_wires(Party::Garbler);
        let ew = self.circuit.input_wires(Party::Evaluator);
        let table_len = GarbledCircuit::byte_len(&self.circuit, self.mode);
        let mut payload = Vec::with_capacity(4 + inputs.len() * (table_len + 16 * gw.len()));
        wire::put_u32(&mut payload, inputs.len());
        let mut secrets = Vec::with_capacity(inputs.len());
        let mut pairs = Vec::with_capacity(inputs.len() * ew.len());
        for (i, bits) in inputs.iter().enumerate() {
            if bits.len() != gw.len() {
                return Err(malformed("garbler input width"));
            }
            let (gc, sec) = garble(&self.circuit, self.mode, base_instance + i as u64, rng);
            gc.write_to(&mut payload);
            payload.extend(wire::labels(&sec.encode(&gw, bits)));
            pairs.extend(sec.label_pairs(&ew));
            secrets.push(sec);
        }
        counters.and_gates_garbled += (inputs.len() * self.circuit.and_count()) as u64;
        counters.gc_table_bytes += (inputs.len() * table_len) as u64;
        tx.send(&Message::new(Phase::GcTables, payload))?;

        match self.ot {
            OtMode::BaseOt => {
                let (sender, a) = OtSender::new(rng);
                tx.send(&Message::new(Phase::Ot, a.to_vec()))?;
                let pts = tx.expect(Phase::Ot)?;
                if pts.len() != POINT_BYTES * pairs.len() {
                    return Err(malformed("OT point count"));
                }
                let pts: Vec<[u8; 32]> = pts
                    .chunks_exact(POINT_BYTES)
                    .map(|c| c.try_into().expect("32 bytes"))
                    .collect();
                let cts = sender.transfer(&pts, &pairs)?;
                tx.send(&Message::new(Phase::Ot, wire::label_pairs(&cts)))?;
            }
            OtMode::TrustedDealer => {
                let choices = wire::unpack_bits(&tx.expect(Phase::Ot)?, pairs.len())?;
                let chosen: Vec<Label> = pairs
                    .iter()
                    .zip(&choices)
                    .map(|(&(l0, l1), &c)| if c { l1 } else { l0 })
                    .collect();
                tx.send(&Message::new(Phase::Ot, wire::labels(&chosen)))?;
            }
        }
        counters.ot_sent += pairs.len() as u64;
        Ok(secrets)
    }

    /// Garbler: receives the output labels and decodes one bit per instance.
    pub fn decode_batch<T: Transport + ?Sized>(
        &self,
        tx: &mut T,
        secrets: &[GarblerSecrets],
    ) -> Result<Vec<bool>, ProtocolError> {
        let outs = self.circuit.outputs().len();
        let payload = tx.expect(Phase::OutputLabels)?;
        let mut r = Reader::new(&payload);
        let labels = r.labels(secrets.len() * outs)?;
        r.finish()?;
        let mut bits = Vec::with_capacity(secrets.len());
        for (chunk, sec) in labels.chunks_exact(outs).zip(secrets) {
            bits.push(decode_output(chunk, sec)?[0]);
        }
        Ok(bits)
    }

    /// Evaluator: receives tables, runs the OT as receiver, evaluates and
    /// returns the output labels. `inputs[i]` are its bits for instance i.
    pub fn evaluate_batch<T: Transport + ?Sized, R: RngCore + CryptoRng>(
        &self,
        tx: &mut T,
        inputs: &[Vec<bool>],
        base_instance: u64,
        rng: &mut R,
        counters: &mut PartyCounters,
    ) -> Result<(), ProtocolError> {
        let gw = self.circuit.input_wires(Party::Garbler).len();
        let ew = self.circuit.input_wires(Party::Evaluator).len();
        let table_len = GarbledCircuit::byte_len(&self.circuit, self.mode);
        let payload = tx.expect(Phase::GcTables)?;
        let mut r = Reader::new(&payload);
        let count = r.u32()?;
        if count != inputs.len() {
            return Err(malformed("garbled circuit count"));
        }
        let mut tables = Vec::with_capacity(count);
        for i in 0..count {
            let gc = GarbledCircuit::read_from(
                &self.circuit,
                self.mode,
                base_instance + i as u64,
                r.take(table_len)?,
            )?;
            tables.push((gc, r.labels(gw)?));
        }
        r.finish()?;

        let choices: Vec<bool> = inputs.iter().flatten().copied().collect();
        if choices.len() != count * ew {
            return Err(malformed("evaluator input width"));
        }
        let mine = match self.ot {
            OtMode::BaseOt => {
                let a = tx.expect(Phase::Ot)?;
                let a: [u8; 32] = a
                    .as_slice()
                    .try_into()
                    .map_err(|_| malformed("OT setup point"))?;
                let (recv, pts) = OtReceiver::choose(&a, &choices, rng)?;
                tx.send(&Message::new(Phase::Ot, pts.concat()))?;
                let cts = tx.expect(Phase::Ot)?;
                let mut r = Reader::new(&cts);
                let cts = r.label_pairs(choices.len())?;
                r.finish()?;
                recv.finish(&cts)?
            }
            OtMode::TrustedDealer => {
                tx.send(&Message::new(Phase::Ot, wire::pack_bits(&choices)))?;
                let ls = tx.expect(Phase::Ot)?;
                let mut r = Reader::new(&ls);
                let out = r.labels(choices.len())?;
                r.finish()?;
                out
            }
        };
        counters.ot_received += choices.len() as u64;

        let mut outs = Vec::with_capacity(count);
        for ((gc, glabels), elabels) in tables.iter().zip(mine.chunks_exact(ew.max(1))) {
            outs.extend(evaluate(&self.circuit, gc, glabels, elabels)?);
        }
        counters.and_gates_evaluated += (count * self.circuit.and_count()) as u64;
        tx.send(&Message::new(Phase::OutputLabels, wire::labels(&outs)))?;
        Ok(())
    }
}
