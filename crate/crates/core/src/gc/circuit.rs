use super::GcError;
use serde::{Deserialize, Serialize};

pub type WireId = usize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Gate {
    Xor { a: WireId, b: WireId, out: WireId },
    And { a: WireId, b: WireId, out: WireId },
    Not { a: WireId, out: WireId },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Party {
    Garbler,
    Evaluator,
}

impl Party {
    pub fn other(self) -> Party {
        match self {
            Party::Garbler => Party::Evaluator,
            Party::Evaluator => Party::Garbler,
        }
    }
}

/// One operand of the circuit, least significant bit first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputGroup {
    pub owner: Party,
    pub wires: Vec<WireId>,
}

/// Boolean circuit over XOR, AND and NOT. Gates are topologically ordered.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Circuit {
    wire_count: usize,
    inputs: Vec<InputGroup>,
    gates: Vec<Gate>,
    outputs: Vec<WireId>,
}

#[derive(Default)]
pub struct CircuitBuilder {
    wire_count: usize,
    inputs: Vec<InputGroup>,
    gates: Vec<Gate>,
}

impl CircuitBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn fresh(&mut self) -> WireId {
        self.wire_count += 1;
        self.wire_count - 1
    }

    pub fn input(&mut self, owner: Party, width: usize) -> Vec<WireId> {
        let wires: Vec<_> = (0..width).map(|_| self.fresh()).collect();
        self.inputs.push(InputGroup {
            owner,
            wires: wires.clone(),
        });
        wires
    }

    pub fn xor(&mut self, a: WireId, b: WireId) -> WireId {
        let out = self.fresh();
        self.gates.push(Gate::Xor { a, b, out });
        out
    }

    pub fn and(&mut self, a: WireId, b: WireId) -> WireId {
        let out = self.fresh();
        self.gates.push(Gate::And { a, b, out });
        out
    }

    pub fn not(&mut self, a: WireId) -> WireId {
        let out = self.fresh();
        self.gates.push(Gate::Not { a, out });
        out
    }

    pub fn finish(self, outputs: Vec<WireId>) -> Circuit {
        Circuit {
            wire_count: self.wire_count,
            inputs: self.inputs,
            gates: self.gates,
            outputs,
        }
    }
}

impl Circuit {
    pub fn wire_count(&self) -> usize {
        self.wire_count
    }

    pub fn inputs(&self) -> &[InputGroup] {
        &self.inputs
    }

    pub fn gates(&self) -> &[Gate] {
        &self.gates
    }

    pub fn outputs(&self) -> &[WireId] {
        &self.outputs
    }

    pub fn and_count(&self) -> usize {
        self.gates
            .iter()
            .filter(|g| matches!(g, Gate::And { .. }))
            .count()
    }

    /// Input wires owned by `party`, in group order.
    pub fn input_wires(&self, party: Party) -> Vec<WireId> {
        self.inputs
            .iter()
            .filter(|g| g.owner == party)
            .flat_map(|g| g.wires.iter().copied())
            .collect()
    }

    /// Plain evaluation; `inputs` holds one bit vector per input group.
    pub fn eval(&self, inputs: &[Vec<bool>]) -> Result<Vec<bool>, GcError> {
        if inputs.len() != self.inputs.len() {
            return Err(GcError::InputCountMismatch {
                expected: self.inputs.len(),
                found: inputs.len(),
            });
        }
        let mut w = vec![false; self.wire_count];
        for (g, bits) in self.inputs.iter().zip(inputs) {
            if g.wires.len() != bits.len() {
                return Err(GcError::InputCountMismatch {
                    expected: g.wires.len(),
                    found: bits.len(),
                });
            }
            for (&id, &b) in g.wires.iter().zip(bits) {
                w[id] = b;
            }
        }
        for g in &self.gates {
            match *g {
                Gate::Xor { a, b, out } => w[out] = w[a] ^ w[b],
                Gate::And { a, b, out } => w[out] = w[a] & w[b],
                Gate::Not { a, out } => w[out] = !w[a],
            }
        }
        Ok(self.outputs.iter().map(|&o| w[o]).collect())
    }
}

pub const MIN_WIDTH: usize = 2;
pub const MAX_WIDTH: usize = 128;

fn check_width(width: usize) -> Result<(), GcError> {
    if (MIN_WIDTH..=MAX_WIDTH).contains(&width) {
        Ok(())
    } else {
        Err(GcError::WidthOutOfRange(width))
    }
}

/// Borrow chain of a - b over `width` bits; returns (a_top ^ b_top, borrow
/// into the top bit). maj(!a, b, c) costs one AND as x ^ ((x^y) & (x^z)).
fn borrow_chain(bld: &mut CircuitBuilder, a: &[WireId], b: &[WireId]) -> WireId {
    let width = a.len();
    let na0 = bld.not(a[0]);
    let mut borrow = bld.and(na0, b[0]);
    for i in 1..width - 1 {
        let na = bld.not(a[i]);
        let x1 = bld.xor(na, b[i]);
        let x2 = bld.xor(na, borrow);
        let t = bld.and(x1, x2);
        borrow = bld.xor(na, t);
    }
    let top = bld.xor(a[width - 1], b[width - 1]);
    bld.xor(top, borrow)
}

/// Circuit with inputs a (owned by `a_owner`) and b (the other party), both
/// `width` bits, and one output: the top bit of (a - b) mod 2^width.
/// Uses width - 1 AND gates.
pub fn build_sub_msb(width: usize, a_owner: Party) -> Result<Circuit, GcError> {
    check_width(width)?;
    let mut bld = CircuitBuilder::new();
    let a = bld.input(a_owner, width);
    let b = bld.input(a_owner.other(), width);
    let msb = borrow_chain(&mut bld, &a, &b);
    Ok(bld.finish(vec![msb]))
}

/// Like [`build_sub_msb`] with two extra one-bit inputs c (owned with a) and
/// d (owned with b); outputs msb(a - b) ^ c ^ d. Used to fold a masked label
/// bit into the comparison.
pub fn build_sub_msb_xor(width: usize, a_owner: Party) -> Result<Circuit, GcError> {
    check_width(width)?;
    let mut bld = CircuitBuilder::new();
    let a = bld.input(a_owner, width);
    let b = bld.input(a_owner.other(), width);
    let c = bld.input(a_owner, 1);
    let d = bld.input(a_owner.other(), 1);
    let msb = borrow_chain(&mut bld, &a, &b);
    let cd = bld.xor(c[0], d[0]);
    let out = bld.xor(msb, cd);
    Ok(bld.finish(vec![out]))
}

/// Little-endian bit decomposition.
pub fn to_bits(v: u128, width: usize) -> Vec<bool> {
    (0..width).map(|i| (v >> i) & 1 == 1).collect()
}

pub fn from_bits(bits: &[bool]) -> u128 {
    bits.iter()
        .enumerate()
        .fold(0u128, |acc, (i, &b)| acc | (u128::from(b) << i))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn msb_of_diff(a: u128, b: u128, width: usize) -> bool {
        let m = if width == 128 { u128::MAX } else { (1u128 << width) - 1 };
        (a.wrapping_sub(b) & m) >> (width - 1) == 1
    }

    #[test]
    fn sub_msb_small_exhaustive() {
        for width in 2..=5 {
            let c = build_sub_msb(width, Party::Garbler).unwrap();
            assert!(c.and_count() <= 2 * (width - 1));
            for a in 0..1u128 << width {
                for b in 0..1u128 << width {
                    let out = c.eval(&[to_bits(a, width), to_bits(b, width)]).unwrap();
                    assert_eq!(out, vec![msb_of_diff(a, b, width)], "w={width} a={a} b={b}");
                }
            }
        }
    }

    #[test]
    fn width_limits() {
        assert_eq!(
            build_sub_msb(1, Party::Garbler).unwrap_err(),
            GcError::WidthOutOfRange(1)
        );
        assert_eq!(
            build_sub_msb(129, Party::Garbler).unwrap_err(),
            GcError::WidthOutOfRange(129)
        );
        let c = build_sub_msb(128, Party::Evaluator).unwrap();
        assert_eq!(c.input_wires(Party::Evaluator).len(), 128);
        let out = c
            .eval(&[to_bits(0, 128), to_bits(1, 128)])
            .unwrap();
        assert_eq!(out, vec![true]);
    }

    #[test]
    fn xor_variant() {
        let c = build_sub_msb_xor(4, Party::Garbler).unwrap();
        for (a, b, x, y) in [(3u128, 5u128, false, true), (9, 2, true, true), (0, 0, true, false)] {
            let out = c
                .eval(&[to_bits(a, 4), to_bits(b, 4), vec![x], vec![y]])
                .unwrap();
            assert_eq!(out[0], msb_of_diff(a, b, 4) ^ x ^ y);
        }
    }
}
