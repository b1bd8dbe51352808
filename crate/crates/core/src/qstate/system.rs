use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::Rng;

use super::{Basis, DenseBlock, DensityMatrix, PureQubit, StateError, MATRIX_TOLERANCE, MAX_DENSITY_QUBITS};

/// Largest entangled block a system will build, in qubits.
pub const DEFAULT_BLOCK_CAP: usize = 20;

#[derive(Debug, Clone, PartialEq)]
enum Factor {
    Qubit(PureQubit),
    Block(DenseBlock),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Slot {
    factor: usize,
    /// Position inside a block; always 0 for a lone qubit.
    pos: usize,
}

/// A register of qubits held as a tensor product of independent factors.
///
/// Qubits are identified by labels `0..width()` in creation order. Protocol
/// code treats a system as the shared "laboratory": each party owns a list of
/// labels, and messages move labels rather than copying states. Qubits are
/// merged into a [`DenseBlock`] only when a gate entangles them, and split out
/// again as soon as they are measured.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumSystem {
    factors: Vec<Option<Factor>>,
    slots: Vec<Slot>,
    cap: usize,
}

impl Default for QuantumSystem {
    fn default() -> Self {
        Self::new()
    }
}

impl QuantumSystem {
    pub fn new() -> Self {
        Self::with_cap(DEFAULT_BLOCK_CAP)
    }

    pub fn with_cap(cap: usize) -> Self {
        Self {
            factors: Vec::new(),
            slots: Vec::new(),
            cap,
        }
    }

    /// Product state of the given qubits, labelled in order.
    pub fn from_qubits<I: IntoIterator<Item = PureQubit>>(qubits: I) -> Self {
        let mut system = Self::new();
        for q in qubits {
            system.push(q);
        }
        system
    }

    pub fn width(&self) -> usize {
        self.slots.len()
    }

    pub fn cap(&self) -> usize {
        self.cap
    }

    /// Appends a qubit and returns its label.
    pub fn push(&mut self, qubit: PureQubit) -> usize {
        let label = self.slots.len();
        self.slots.push(Slot {
            factor: self.factors.len(),
            pos: 0,
        });
        self.factors.push(Some(Factor::Qubit(qubit)));
        label
    }

    /// Appends an entangled block; returns the fresh labels assigned to its
    /// qubits, in the block's own order.
    pub fn push_block(&mut self, mut block: DenseBlock) -> Result<Vec<usize>, StateError> {
        if block.num_qubits() > self.cap {
            return Err(StateError::CapExceeded {
                needed: block.num_qubits(),
                cap: self.cap,
            });
        }
        let start = self.slots.len();
        let labels: Vec<usize> = (start..start + block.num_qubits()).collect();
        let factor = self.factors.len();
        for pos in 0..labels.len() {
            self.slots.push(Slot { factor, pos });
        }
        block.set_labels(labels.clone());
        self.factors.push(Some(Factor::Block(block)));
        Ok(labels)
    }

    fn check(&self, index: usize) -> Result<Slot, StateError> {
        self.slots.get(index).copied().ok_or(StateError::InvalidIndex {
            index,
            width: self.width(),
        })
    }

    fn factor(&self, slot: Slot) -> &Factor {
        self.factors[slot.factor]
            .as_ref()
            .expect("slot points at a live factor")
    }

    /// The qubit's state if it is not entangled with anything.
    pub fn qubit(&self, index: usize) -> Option<&PureQubit> {
        let slot = self.check(index).ok()?;
        match self.factor(slot) {
            Factor::Qubit(q) => Some(q),
            Factor::Block(_) => None,
        }
    }

    /// True when `index` currently shares a dense block with other qubits.
    pub fn is_entangled(&self, index: usize) -> Result<bool, StateError> {
        let slot = self.check(index)?;
        Ok(matches!(self.factor(slot), Factor::Block(_)))
    }

    /// Number of live factors in the product decomposition.
    pub fn factor_count(&self) -> usize {
        self.factors.iter().filter(|f| f.is_some()).count()
    }

    /// Born probability of `outcome` for qubit `index` in `basis`.
    pub fn probability(&self, index: usize, outcome: u8, basis: Basis) -> Result<f64, StateError> {
        let slot = self.check(index)?;
        Ok(match self.factor(slot) {
            Factor::Qubit(q) => q.probability(outcome, basis),
            Factor::Block(b) => b.probability(slot.pos, outcome, basis),
        })
    }

    /// Projective measurement of qubit `index` in `basis`. The measured qubit
    /// is left as the pure state `|outcome⟩_basis`; if it belonged to a block,
    /// the rest of the block is projected and renormalized.
    pub fn measure<R: Rng + ?Sized>(
        &mut self,
        index: usize,
        basis: Basis,
        rng: &mut R,
    ) -> Result<u8, StateError> {
        let p0 = self.probability(index, 0, basis)?;
        let outcome = if rng.random::<f64>() < p0 { 0 } else { 1 };
        self.collapse(index, outcome, basis)?;
        Ok(outcome)
    }

    /// Forces the post-measurement state for a known `outcome`.
    pub fn collapse(&mut self, index: usize, outcome: u8, basis: Basis) -> Result<(), StateError> {
        let slot = self.check(index)?;
        let collapsed = PureQubit::bb84(outcome, basis);
        let factor = self.factors[slot.factor].as_mut().expect("live factor");
        match factor {
            Factor::Qubit(q) => *q = collapsed,
            Factor::Block(block) => {
                block.collapse(slot.pos, outcome, basis)?;
                if block.num_qubits() == 1 {
                    let label = block.labels()[0];
                    let amps = block.amplitudes();
                    let lone = PureQubit::new(amps[0], amps[1])?;
                    *factor = Factor::Qubit(lone);
                    self.slots[label].pos = 0;
                } else {
                    for (pos, &label) in block.labels().iter().enumerate() {
                        self.slots[label].pos = pos;
                    }
                }
                self.slots[index] = Slot {
                    factor: self.factors.len(),
                    pos: 0,
                };
                self.factors.push(Some(Factor::Qubit(collapsed)));
            }
        }
        Ok(())
    }

    /// Applies a 2×2 unitary to one qubit.
    pub fn apply(&mut self, index: usize, gate: &[[Complex64; 2]; 2]) -> Result<(), StateError> {
        let slot = self.check(index)?;
        match self.factors[slot.factor].as_mut().expect("live factor") {
            Factor::Qubit(q) => {
                let [a0, a1] = q.amplitudes();
                *q = PureQubit::new(
                    gate[0][0] * a0 + gate[0][1] * a1,
                    gate[1][0] * a0 + gate[1][1] * a1,
                )?;
            }
            Factor::Block(b) => b.apply_gate(slot.pos, gate),
        }
        Ok(())
    }

    pub fn hadamard(&mut self, index: usize) -> Result<(), StateError> {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        self.apply(index, &[[h, h], [h, -h]])
    }

    /// Controlled-NOT in the computational basis; merges the two factors into
    /// one block first if they are separate.
    pub fn cnot(&mut self, control: usize, target: usize) -> Result<(), StateError> {
        if control == target {
            return Err(StateError::DuplicateIndex(control));
        }
        self.merge(control, target)?;
        let slot_c = self.check(control)?;
        let slot_t = self.check(target)?;
        match self.factors[slot_c.factor].as_mut().expect("live factor") {
            Factor::Block(b) => b.apply_cnot(slot_c.pos, slot_t.pos),
            Factor::Qubit(_) => unreachable!("merge produces a block"),
        }
        Ok(())
    }

    fn into_block(factor: Factor, label: usize) -> DenseBlock {
        match factor {
            Factor::Qubit(q) => DenseBlock::from_qubit(label, &q),
            Factor::Block(b) => b,
        }
    }

    fn merge(&mut self, a: usize, b: usize) -> Result<(), StateError> {
        let sa = self.check(a)?;
        let sb = self.check(b)?;
        if sa.factor == sb.factor {
            if let Factor::Qubit(_) = self.factor(sa) {
                unreachable!("distinct labels never share a lone-qubit factor");
            }
            return Ok(());
        }
        let width = |f: &Factor| match f {
            Factor::Qubit(_) => 1,
            Factor::Block(b) => b.num_qubits(),
        };
        let needed = width(self.factor(sa)) + width(self.factor(sb));
        if needed > self.cap {
            return Err(StateError::CapExceeded {
                needed,
                cap: self.cap,
            });
        }
        let fa = self.factors[sa.factor].take().expect("live factor");
        let fb = self.factors[sb.factor].take().expect("live factor");
        let merged = Self::into_block(fa, a).tensor(&Self::into_block(fb, b));
        for (pos, &label) in merged.labels().iter().enumerate() {
            self.slots[label] = Slot {
                factor: sa.factor,
                pos,
            };
        }
        self.factors[sa.factor] = Some(Factor::Block(merged));
        Ok(())
    }

    /// Reduced density matrix of the listed qubits, in the listed order.
    pub fn reduced_density(&self, labels: &[usize]) -> Result<DensityMatrix, StateError> {
        if labels.len() > MAX_DENSITY_QUBITS {
            return Err(StateError::DimensionOverflow {
                qubits: labels.len(),
                max: MAX_DENSITY_QUBITS,
            });
        }
        for (i, &l) in labels.iter().enumerate() {
            self.check(l)?;
            if labels[..i].contains(&l) {
                return Err(StateError::DuplicateIndex(l));
            }
        }
        // Group requested labels by factor, remembering where each sits in
        // the requested order.
        let mut groups: Vec<(usize, Vec<usize>)> = Vec::new();
        for (t, &l) in labels.iter().enumerate() {
            let factor = self.slots[l].factor;
            match groups.iter_mut().find(|(f, _)| *f == factor) {
                Some((_, ts)) => ts.push(t),
                None => groups.push((factor, vec![t])),
            }
        }
        let k = labels.len();
        let parts: Vec<(Vec<usize>, DensityMatrix)> = groups
            .into_iter()
            .map(|(factor, ts)| {
                let rho = match self.factors[factor].as_ref().expect("live factor") {
                    Factor::Qubit(q) => DensityMatrix::from_pure(&q.amplitudes()),
                    Factor::Block(b) => {
                        let positions: Vec<usize> = ts.iter().map(|&t| self.slots[labels[t]].pos).collect();
                        b.reduced(&positions)
                    }
                };
                (ts, rho)
            })
            .collect();
        let dim = 1usize << k;
        let sub_index = |x: usize, ts: &[usize]| {
            ts.iter()
                .fold(0usize, |acc, &t| (acc << 1) | ((x >> (k - 1 - t)) & 1))
        };
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for i in 0..dim {
            for j in 0..dim {
                entries[i * dim + j] = parts
                    .iter()
                    .map(|(ts, rho)| rho.get(sub_index(i, ts), sub_index(j, ts)))
                    .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z);
            }
        }
        Ok(DensityMatrix::from_entries_unchecked(dim, entries))
    }

    /// Checks that every factor has unit norm within `MATRIX_TOLERANCE`.
    pub fn is_normalized(&self) -> bool {
        self.factors.iter().flatten().all(|f| {
            let n = match f {
                Factor::Qubit(q) => q.norm_sqr(),
                Factor::Block(b) => b.norm_sqr(),
            };
            (n - 1.0).abs() < MATRIX_TOLERANCE
        })
    }
}
