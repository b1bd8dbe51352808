use alloc::vec::Vec;

use rand::Rng;

use super::{check_mask, BobPreparation, CommitBit, ProtocolError, ProtocolParams};
use crate::bits::BitString;
use crate::qstate::{Basis, Bb84, PureQubit, QuantumSystem};

/// How Alice fills the evidence slots that carry no survivor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DecoyPolicy {
    /// Uniformly random BB84 state.
    Bb84,
    /// Haar-random pure state.
    Haar,
}

impl DecoyPolicy {
    pub fn sample<R: Rng + ?Sized>(self, rng: &mut R) -> PureQubit {
        match self {
            DecoyPolicy::Bb84 => Bb84::random(rng).qubit(),
            DecoyPolicy::Haar => PureQubit::haar(rng),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MixingOutcome {
    Pass {
        /// Length `p`, weight `n`: which anonymous qubits survived.
        survivors: BitString,
        /// Labels of the survivors, in their original order.
        register: Vec<usize>,
    },
    Abort,
}

/// Bob's step 1: a uniformly random preparation and the product state it
/// describes, labelled `0..p`.
pub fn bob_prepare<R: Rng + ?Sized>(params: &ProtocolParams, rng: &mut R) -> (BobPreparation, QuantumSystem) {
    let prep = BobPreparation::random(params.p(), rng);
    let system = prep.prepare();
    (prep, system)
}

/// Accept iff the zero count of `group` measurements lies within
/// `threshold · √(group/4)` of `group/2`.
pub fn mixing_test_passes(zeros: usize, group: usize, threshold: f64) -> bool {
    let deviation = (zeros as f64 - group as f64 / 2.0).abs();
    deviation <= threshold * libm::sqrt(group as f64 / 4.0)
}

/// Alice's random-mixing test on the `p` qubits of `register`.
///
/// Two disjoint random groups of `(p − n)/2` qubits are measured, one in each
/// basis. Survivors keep their relative order.
pub fn alice_mixing_test<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    register: &[usize],
    params: &ProtocolParams,
    threshold: f64,
    rng: &mut R,
) -> Result<MixingOutcome, ProtocolError> {
    if register.len() != params.p() {
        return Err(ProtocolError::RegisterWidth {
            expected: params.p(),
            actual: register.len(),
        });
    }
    let group = params.test_group();
    let picked = rand::seq::index::sample(rng, params.p(), 2 * group).into_vec();
    let mut tested = alloc::vec![false; params.p()];
    let mut passed = true;
    for (chunk, basis) in picked.chunks(group.max(1)).zip([Basis::Plus, Basis::Cross]) {
        let mut zeros = 0;
        for &i in chunk {
            tested[i] = true;
            if system.measure(register[i], basis, rng)? == 0 {
                zeros += 1;
            }
        }
        passed &= mixing_test_passes(zeros, chunk.len(), threshold);
    }
    if !passed {
        return Ok(MixingOutcome::Abort);
    }
    let survivors = BitString::new(tested.iter().map(|&t| u8::from(!t)).collect())?;
    let kept = survivors.positions().map(|i| register[i]).collect();
    Ok(MixingOutcome::Pass {
        survivors,
        register: kept,
    })
}

/// Alice's commit measurement: picks `m` of the `n` survivors uniformly and
/// measures them in the basis of `bit`. Outcomes are listed in survivor order.
pub fn alice_commit<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    survivors: &[usize],
    bit: CommitBit,
    params: &ProtocolParams,
    rng: &mut R,
) -> Result<(BitString, BitString), ProtocolError> {
    if survivors.len() != params.n() {
        return Err(ProtocolError::RegisterWidth {
            expected: params.n(),
            actual: survivors.len(),
        });
    }
    let marks = BitString::random_with_weight(params.n(), params.m(), rng)?;
    let outcomes = marks
        .positions()
        .map(|k| system.measure(survivors[k], bit.basis(), rng))
        .collect::<Result<Vec<_>, _>>()?;
    Ok((marks, BitString::new(outcomes)?))
}

/// Lays `occupants` into the set slots of `mask` in order and fills every
/// clear slot with a fresh decoy. Returns the register in slot order.
pub fn place_in_slots<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    mask: &BitString,
    occupants: &[usize],
    policy: DecoyPolicy,
    rng: &mut R,
) -> Result<Vec<usize>, ProtocolError> {
    check_mask(mask, "slot mask", mask.len(), occupants.len())?;
    let mut next = occupants.iter();
    let mut register = Vec::with_capacity(mask.len());
    for slot in 0..mask.len() {
        let label = if mask.get(slot) == 1 {
            *next.next().expect("mask weight equals occupant count")
        } else {
            system.push(policy.sample(rng))
        };
        register.push(label);
    }
    Ok(register)
}

/// Alice's decoy insertion: a uniform weight-`n` mask over `q` slots, with
/// survivors in the set slots (order preserved) and decoys elsewhere.
pub fn alice_insert_decoys<R: Rng + ?Sized>(
    system: &mut QuantumSystem,
    survivors: &[usize],
    params: &ProtocolParams,
    policy: DecoyPolicy,
    rng: &mut R,
) -> Result<(BitString, Vec<usize>), ProtocolError> {
    if survivors.len() != params.n() {
        return Err(ProtocolError::RegisterWidth {
            expected: params.n(),
            actual: survivors.len(),
        });
    }
    let decoys = BitString::random_with_weight(params.q(), params.n(), rng)?;
    let register = place_in_slots(system, &decoys, survivors, policy, rng)?;
    Ok((decoys, register))
}
