use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use super::{Basis, DensityMatrix, PureQubit, StateError, STATE_TOLERANCE};

/// Dense state vector over a small set of qubits.
///
/// `labels[k]` names the qubit stored at bit position `len - 1 - k` of the
/// amplitude index, so the index reads left to right in label order:
/// for labels `[a, b]`, amplitude 2 is `|1⟩_a |0⟩_b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseBlock {
    labels: Vec<usize>,
    amps: Vec<Complex64>,
}

impl DenseBlock {
    pub fn new(labels: Vec<usize>, amps: Vec<Complex64>) -> Result<Self, StateError> {
        if amps.len() != 1usize << labels.len() {
            return Err(StateError::BadAmplitudeLength(amps.len()));
        }
        for (i, l) in labels.iter().enumerate() {
            if labels[..i].contains(l) {
                return Err(StateError::DuplicateIndex(*l));
            }
        }
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self { labels, amps })
    }

    /// `(|0⟩|r⟩_+ + |1⟩|r⟩_×)/√2` over `1 + r.len()` qubits, control first,
    /// labelled `0..=r.len()`.
    pub fn zeta(outcomes: &[u8], cap: usize) -> Result<Self, StateError> {
        let m = outcomes.len();
        if m + 1 > cap {
            return Err(StateError::CapExceeded { needed: m + 1, cap });
        }
        let payload_dim = 1usize << m;
        let r = outcomes
            .iter()
            .fold(0usize, |acc, &b| (acc << 1) | usize::from(b != 0));
        let mut amps = vec![Complex64::new(0.0, 0.0); 2 * payload_dim];
        amps[r] = Complex64::new(FRAC_1_SQRT_2, 0.0);
        // ⊗_i (|0⟩ + (-1)^{r_i}|1⟩)/√2 has amplitude 2^{-m/2}(-1)^{popcount(r & j)} at j.
        let scale = FRAC_1_SQRT_2 * libm::pow(2.0, -(m as f64) / 2.0);
        for j in 0..payload_dim {
            let sign = if (r & j).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
            amps[payload_dim + j] = Complex64::new(sign * scale, 0.0);
        }
        Self::new((0..=m).collect(), amps)
    }

    /// `(|00⟩ + |11⟩)/√2`, labelled `[0, 1]`.
    pub fn bell_pair() -> Self {
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let z = Complex64::new(0.0, 0.0);
        Self {
            labels: vec![0, 1],
            amps: vec![h, z, z, h],
        }
    }

    pub fn from_qubit(label: usize, qubit: &PureQubit) -> Self {
        Self {
            labels: vec![label],
            amps: qubit.amplitudes().to_vec(),
        }
    }

    pub fn num_qubits(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn position(&self, label: usize) -> Option<usize> {
        self.labels.iter().position(|&l| l == label)
    }

    pub(crate) fn set_labels(&mut self, labels: Vec<usize>) {
        debug_assert_eq!(labels.len(), self.labels.len());
        self.labels = labels;
    }

    fn shift(&self, pos: usize) -> usize {
        self.labels.len() - 1 - pos
    }

    /// Index pairs `(x0, x1)` differing only in the bit of `pos`, with `x0`
    /// having that bit clear. Ordered by the remaining bits.
    fn pairs(&self, pos: usize) -> impl Iterator<Item = (usize, usize)> {
        let s = self.shift(pos);
        let mask = 1usize << s;
        (0..self.amps.len() / 2).map(move |y| {
            let lo = y & (mask - 1);
            let hi = (y >> s) << (s + 1);
            let x0 = hi | lo;
            (x0, x0 | mask)
        })
    }

    fn projected(&self, x0: usize, x1: usize, outcome: u8, basis: Basis) -> Complex64 {
        match basis {
            Basis::Plus => {
                if outcome == 0 {
                    self.amps[x0]
                } else {
                    self.amps[x1]
                }
            }
            Basis::Cross => {
                let sign = if outcome == 0 { 1.0 } else { -1.0 };
                (self.amps[x0] + self.amps[x1] * sign) * FRAC_1_SQRT_2
            }
        }
    }

    /// Marginal Born probability of `outcome` on the qubit at `pos`.
    pub fn probability(&self, pos: usize, outcome: u8, basis: Basis) -> f64 {
        self.pairs(pos)
            .map(|(x0, x1)| self.projected(x0, x1, outcome, basis).norm_sqr())
            .sum()
    }

    /// Projects the qubit at `pos` onto `|outcome⟩_basis` and removes it from
    /// the block, returning its label. The measured qubit is then exactly the
    /// pure state `|outcome⟩_basis`, independent of the rest.
    pub(crate) fn collapse(&mut self, pos: usize, outcome: u8, basis: Basis) -> Result<usize, StateError> {
        let mut rest: Vec<Complex64> = self
            .pairs(pos)
            .map(|(x0, x1)| self.projected(x0, x1, outcome, basis))
            .collect();
        let norm: f64 = rest.iter().map(|a| a.norm_sqr()).sum();
        if norm <= 0.0 {
            return Err(StateError::NotNormalized(norm));
        }
        let scale = 1.0 / libm::sqrt(norm);
        for a in &mut rest {
            *a *= scale;
        }
        self.amps = rest;
        Ok(self.labels.remove(pos))
    }

    /// Applies the 2×2 unitary `gate` (row-major) to the qubit at `pos`.
    pub(crate) fn apply_gate(&mut self, pos: usize, gate: &[[Complex64; 2]; 2]) {
        let pairs: Vec<_> = self.pairs(pos).collect();
        for (x0, x1) in pairs {
            let (a0, a1) = (self.amps[x0], self.amps[x1]);
            self.amps[x0] = gate[0][0] * a0 + gate[0][1] * a1;
            self.amps[x1] = gate[1][0] * a0 + gate[1][1] * a1;
        }
    }

    pub(crate) fn apply_cnot(&mut self, control: usize, target: usize) {
        let cmask = 1usize << self.shift(control);
        let tmask = 1usize << self.shift(target);
        for x in 0..self.amps.len() {
            if x & cmask != 0 && x & tmask == 0 {
                self.amps.swap(x, x | tmask);
            }
        }
    }

    /// `self ⊗ other`, with `other`'s labels appended.
    pub(crate) fn tensor(&self, other: &DenseBlock) -> DenseBlock {
        let mut amps = Vec::with_capacity(self.amps.len() * other.amps.len());
        for a in &self.amps {
            for b in &other.amps {
                amps.push(a * b);
            }
        }
        let mut labels = self.labels.clone();
        labels.extend_from_slice(&other.labels);
        DenseBlock { labels, amps }
    }

    /// Reduced density matrix on the qubits at `positions`, in that order.
    pub fn reduced(&self, positions: &[usize]) -> DensityMatrix {
        let k = positions.len();
        let dim = 1usize << k;
        let shifts: Vec<usize> = positions.iter().map(|&p| self.shift(p)).collect();
        let env_shifts: Vec<usize> = (0..self.labels.len())
            .filter(|p| !positions.contains(p))
            .map(|p| self.shift(p))
            .collect();
        // Group amplitudes by the traced-out bits; each group is one
        // unnormalized pure branch of the kept qubits.
        let mut branches = vec![vec![Complex64::new(0.0, 0.0); dim]; 1usize << env_shifts.len()];
        for (x, a) in self.amps.iter().enumerate() {
            let gather = |acc: usize, &s: &usize| (acc << 1) | ((x >> s) & 1);
            let env = env_shifts.iter().fold(0usize, gather);
            let sub = shifts.iter().fold(0usize, gather);
            branches[env][sub] = *a;
        }
        let mut entries = vec![Complex64::new(0.0, 0.0); dim * dim];
        for v in &branches {
            for i in 0..dim {
                if v[i].norm_sqr() == 0.0 {
                    continue;
                }
                for j in 0..dim {
                    entries[i * dim + j] += v[i] * v[j].conj();
                }
            }
        }
        DensityMatrix::from_entries_unchecked(dim, entries)
    }
}
