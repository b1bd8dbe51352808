//! Exact evidence states for tiny instances, by exhaustive enumeration.
//!
//! Bob is honest and `p = n`, so there is no mixing test; it only discards
//! qubits and leaves the survivors uniformly random BB84 states either way.
//! Decoys are BB84.

use alloc::vec::Vec;

use num_complex::Complex64;

use crate::bits::BitString;
use crate::protocol::{CommitBit, ProtocolParams};
use crate::qstate::{trace_distance, Basis, Bb84, DensityMatrix, PureQubit, StateError, MAX_DENSITY_QUBITS};

/// Upper bound on enumerated branches.
pub const MAX_BRANCHES: usize = 1 << 20;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("enumeration needs p = n (got p = {p}, n = {n})")]
    MixingTestPresent { p: usize, n: usize },
    #[error("{qubits} qubits exceed the density-matrix limit {max}")]
    TooWide { qubits: usize, max: usize },
    #[error("enumeration would visit more than {max} branches")]
    TooManyBranches { max: usize },
    #[error(transparent)]
    State(#[from] StateError),
}

const BB84: [Bb84; 4] = [
    Bb84 {
        bit: 0,
        basis: Basis::Plus,
    },
    Bb84 {
        bit: 1,
        basis: Basis::Plus,
    },
    Bb84 {
        bit: 0,
        basis: Basis::Cross,
    },
    Bb84 {
        bit: 1,
        basis: Basis::Cross,
    },
];

fn masks(len: usize, weight: usize) -> Vec<BitString> {
    (0u32..1 << len)
        .filter(|v| v.count_ones() as usize == weight)
        .map(|v| {
            BitString::from_positions(len, (0..len).filter(|i| v >> (len - 1 - i) & 1 == 1))
                .expect("in range")
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

fn product_state(qubits: &[PureQubit]) -> Vec<Complex64> {
    qubits
        .iter()
        .fold(alloc::vec![Complex64::new(1.0, 0.0)], |acc, q| {
            let a = q.amplitudes();
            acc.iter().flat_map(|x| [x * a[0], x * a[1]]).collect()
        })
}

fn zero(dim: usize) -> DensityMatrix {
    DensityMatrix::from_entries_unchecked(dim, alloc::vec![Complex64::new(0.0, 0.0); dim * dim])
}

/// The evidence register's state jointly with the announced outcomes: entry
/// `r` is `Pr[R_x = r] · ρ_b(r)`, indexed by `r` read as a binary number.
pub fn evidence_branches(
    params: &ProtocolParams,
    bit: CommitBit,
) -> Result<Vec<DensityMatrix>, AnalysisError> {
    let (m, n, q) = (params.m(), params.n(), params.q());
    if params.p() != n {
        return Err(AnalysisError::MixingTestPresent { p: params.p(), n });
    }
    if q > MAX_DENSITY_QUBITS {
        return Err(AnalysisError::TooWide {
            qubits: q,
            max: MAX_DENSITY_QUBITS,
        });
    }
    let branches = (4usize.pow(q as u32) * binomial(n, m) * binomial(q, n)) << m;
    if branches > MAX_BRANCHES {
        return Err(AnalysisError::TooManyBranches { max: MAX_BRANCHES });
    }
    let dim = 1usize << q;
    let mut acc: Vec<DensityMatrix> = (0..1usize << m).map(|_| zero(dim)).collect();
    let marks_all = masks(n, m);
    let decoy_masks = masks(q, n);
    let basis = bit.basis();
    let base_weight = 1.0 / (libm::pow(4.0, q as f64) * marks_all.len() as f64 * decoy_masks.len() as f64);

    for prep in 0..4usize.pow(n as u32) {
        let bob: Vec<Bb84> = (0..n).map(|i| BB84[prep / 4usize.pow(i as u32) % 4]).collect();
        for marks in &marks_all {
            let marked: Vec<usize> = marks.positions().collect();
            for (r, branch) in acc.iter_mut().enumerate() {
                // Born weight of Alice obtaining `r` on the marked qubits.
                let mut w = base_weight;
                for (j, &k) in marked.iter().enumerate() {
                    let bit_j = (r >> (m - 1 - j) & 1) as u8;
                    w *= bob[k].qubit().probability(bit_j, basis);
                }
                if w == 0.0 {
                    continue;
                }
                let mut survivors: Vec<PureQubit> = bob.iter().map(|d| d.qubit()).collect();
                for (j, &k) in marked.iter().enumerate() {
                    survivors[k] = Bb84::new((r >> (m - 1 - j) & 1) as u8, basis).qubit();
                }
                for decoys in &decoy_masks {
                    for fill in 0..4usize.pow((q - n) as u32) {
                        let mut next_survivor = survivors.iter();
                        let mut next_decoy = 0;
                        let register: Vec<PureQubit> = (0..q)
                            .map(|slot| {
                                if decoys.get(slot) == 1 {
                                    *next_survivor.next().expect("weight n")
                                } else {
                                    let d = BB84[fill / 4usize.pow(next_decoy) % 4];
                                    next_decoy += 1;
                                    d.qubit()
                                }
                            })
                            .collect();
                        let rho = DensityMatrix::from_pure(&product_state(&register));
                        branch.add_scaled(w, &rho)?;
                    }
                }
            }
        }
    }
    Ok(acc)
}

/// The evidence register averaged over all randomness, outcomes included.
pub fn averaged_evidence(params: &ProtocolParams, bit: CommitBit) -> Result<DensityMatrix, AnalysisError> {
    let branches = evidence_branches(params, bit)?;
    let mut total = zero(branches[0].dim());
    for b in &branches {
        total.add_scaled(1.0, b)?;
    }
    Ok(total)
}

/// Trace distance between the two bits' evidence states when the outcome
/// string is kept alongside the register.
pub fn joint_distance(params: &ProtocolParams) -> Result<f64, AnalysisError> {
    let zero_branches = evidence_branches(params, CommitBit::Zero)?;
    let one_branches = evidence_branches(params, CommitBit::One)?;
    let mut total = 0.0;
    for (a, b) in zero_branches.iter().zip(&one_branches) {
        total += trace_distance(a, b)?;
    }
    Ok(total.min(1.0))
}

/// `|R_x⟩⟨R_x|` in the basis of `bit`: the marked qubits for fixed outcomes.
pub fn coding_sector_state(outcomes: &BitString, bit: CommitBit) -> Result<DensityMatrix, AnalysisError> {
    if outcomes.len() > MAX_DENSITY_QUBITS {
        return Err(AnalysisError::TooWide {
            qubits: outcomes.len(),
            max: MAX_DENSITY_QUBITS,
        });
    }
    let qubits: Vec<PureQubit> = outcomes
        .as_slice()
        .iter()
        .map(|&r| Bb84::new(r, bit.basis()).qubit())
        .collect();
    Ok(DensityMatrix::from_pure(&product_state(&qubits)))
}

pub fn coding_sector_distance(outcomes: &BitString) -> Result<f64, AnalysisError> {
    let a = coding_sector_state(outcomes, CommitBit::Zero)?;
    let b = coding_sector_state(outcomes, CommitBit::One)?;
    Ok(trace_distance(&a, &b)?)
}
