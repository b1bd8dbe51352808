use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng;

use super::verify::{check_outcomes, check_quantum};
use super::{check_mask, BobPreparation, CommitBit, Malformed, ProtocolError, ProtocolParams, Verification};
use crate::bits::BitString;
use crate::qstate::{Bb84, QuantumSystem};

/// A permutation of `n` positions: `position k` is sent to slot `self[k]`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Permutation(Vec<usize>);

impl Permutation {
    pub fn new(targets: Vec<usize>) -> Result<Self, ProtocolError> {
        let mut seen = alloc::vec![false; targets.len()];
        for &t in &targets {
            if t >= targets.len() || core::mem::replace(&mut seen[t], true) {
                return Err(ProtocolError::Malformed(Malformed::NotAPermutation));
            }
        }
        Ok(Self(targets))
    }

    pub fn identity(len: usize) -> Self {
        Self((0..len).collect())
    }

    /// Uniform over permutations that keep the set positions of `marks` in
    /// their relative order.
    pub fn random_order_preserving<R: Rng + ?Sized>(marks: &BitString, rng: &mut R) -> Self {
        let n = marks.len();
        let mut marked_slots = rand::seq::index::sample(rng, n, marks.weight()).into_vec();
        marked_slots.sort_unstable();
        let mut is_marked_slot = alloc::vec![false; n];
        for &s in &marked_slots {
            is_marked_slot[s] = true;
        }
        let mut free: Vec<usize> = (0..n).filter(|&s| !is_marked_slot[s]).collect();
        free.shuffle(rng);
        let mut marked = marked_slots.into_iter();
        let mut free = free.into_iter();
        Self(
            marks
                .as_slice()
                .iter()
                .map(|&b| if b == 1 { marked.next() } else { free.next() }.expect("slot counts match"))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn targets(&self) -> &[usize] {
        &self.0
    }

    /// True if the images of the set positions of `marks` are increasing.
    pub fn preserves_order_of(&self, marks: &BitString) -> bool {
        let images: Vec<usize> = marks.positions().map(|k| self.0[k]).collect();
        images.windows(2).all(|w| w[0] < w[1])
    }

    /// `out[self[k]] = items[k]`.
    pub fn apply<T: Clone>(&self, items: &[T]) -> Vec<T> {
        assert_eq!(items.len(), self.0.len(), "length mismatch");
        let mut out: Vec<Option<T>> = alloc::vec![None; items.len()];
        for (k, item) in items.iter().enumerate() {
            out[self.0[k]] = Some(item.clone());
        }
        out.into_iter().map(|x| x.expect("bijection")).collect()
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0; self.0.len()];
        for (k, &t) in self.0.iter().enumerate() {
            inv[t] = k;
        }
        Self(inv)
    }
}

/// Evidence for the scrambled variant. The register holds `n` labels in
/// scrambled order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrambledEvidence {
    pub survivors: BitString,
    pub outcomes: BitString,
    pub register: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScrambledUnveil {
    pub bit: CommitBit,
    pub marks: BitString,
    pub permutation: Permutation,
}

/// Alice's commit for the scrambled variant. The marked survivors stay with
/// Alice; fresh qubits in `|R_x⟩` (basis of `bit`) take their place.
pub fn alice_commit_prime<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    survivors: BitString,
    kept: &[usize],
    bit: CommitBit,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<(ScrambledEvidence, ScrambledUnveil), ProtocolError> {
    if kept.len() != params.n() {
        return Err(ProtocolError::RegisterWidth {
            expected: params.n(),
            actual: kept.len(),
        });
    }
    let marks = BitString::random_with_weight(params.n(), params.m(), rng)?;
    let outcomes = BitString::random(params.m(), rng);
    let mut fresh = outcomes.as_slice().iter();
    let ordered: Vec<usize> = kept
        .iter()
        .zip(marks.as_slice())
        .map(|(&label, &marked)| match marked {
            1 => {
                let r = *fresh.next().expect("weight m");
                system.push(Bb84::new(r, bit.basis()).qubit())
            }
            _ => label,
        })
        .collect();
    let permutation = Permutation::random_order_preserving(&marks, rng);
    let register = permutation.apply(&ordered);
    Ok((
        ScrambledEvidence {
            survivors,
            outcomes,
            register,
        },
        ScrambledUnveil {
            bit,
            marks,
            permutation,
        },
    ))
}

/// Bob's verification for the scrambled variant: undo the permutation, then
/// checks 3(b) and 3(c). There is no cross-check.
pub fn bob_verify_prime<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    evidence: &ScrambledEvidence,
    unveil: &ScrambledUnveil,
    bob: &BobPreparation,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<Verification, ProtocolError> {
    check_mask(&evidence.survivors, "survivor mask", params.p(), params.n())?;
    check_mask(&unveil.marks, "mark mask", params.n(), params.m())?;
    check_outcomes(&evidence.outcomes, params.m())?;
    let perm = Permutation::new(unveil.permutation.targets().to_vec())?;
    if perm.len() != params.n() {
        return Err(ProtocolError::Malformed(Malformed::NotAPermutation));
    }
    if !perm.preserves_order_of(&unveil.marks) {
        return Err(ProtocolError::Malformed(Malformed::MarkedOrderChanged));
    }
    if evidence.register.len() != params.n() {
        return Err(ProtocolError::RegisterWidth {
            expected: params.n(),
            actual: evidence.register.len(),
        });
    }
    let slots: Vec<usize> = perm.targets().iter().map(|&t| evidence.register[t]).collect();
    let origin: Vec<usize> = evidence.survivors.positions().collect();
    let verdict = check_quantum(
        system,
        &slots,
        &origin,
        &unveil.marks,
        unveil.bit.basis(),
        &evidence.outcomes,
        bob,
        rng,
    )?;
    Ok(verdict.unwrap_or_else(Verification::accept))
}
