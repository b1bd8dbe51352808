//! Bob's attacks. Alice is honest and commits to a uniformly random bit.

use alloc::vec::Vec;

use rand::Rng;

use super::AdversaryError;
use super::{BiasPolicy, BobStrategy, TrialRecord};
use crate::bits::BitString;
use crate::protocol::{
    alice_commit, alice_insert_decoys, alice_mixing_test, bob_verify, honest_commit, BobPreparation,
    CommitBit, Evidence, MixingOutcome, ProtocolParams, RunSettings, Unveil, Variant, Verdict,
};
use crate::qstate::{Basis, DenseBlock, QuantumSystem};

fn biased_preparation<R: Rng + ?Sized>(p: usize, policy: BiasPolicy, rng: &mut R) -> BobPreparation {
    if policy == BiasPolicy::Honest {
        return BobPreparation::random(p, rng);
    }
    let (bits, bases): (Vec<u8>, Vec<Basis>) = (0..p)
        .map(|_| match policy {
            BiasPolicy::AllZeroPlus => (0, Basis::Plus),
            BiasPolicy::AllZeroCross => (0, Basis::Cross),
            _ => {
                let basis = Basis::random(rng);
                (u8::from(basis == Basis::Cross), basis)
            }
        })
        .unzip();
    BobPreparation::new(BitString::new(bits).expect("binary"), bases).expect("equal lengths")
}

/// Bob prepares per `policy`; the record's verdict says whether Alice's
/// mixing test caught him. Past the test the run completes honestly.
pub fn attack_bob_biased<R: Rng + ?Sized>(
    variant: Variant,
    params: &ProtocolParams,
    settings: &RunSettings,
    policy: BiasPolicy,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let bob = biased_preparation(params.p(), policy, rng);
    let mut system = bob.prepare();
    let register: Vec<usize> = (0..params.p()).collect();
    let (survivors, kept) = match alice_mixing_test(&mut system, &register, params, settings.threshold, rng)?
    {
        MixingOutcome::Pass { survivors, register } => (survivors, register),
        MixingOutcome::Abort => return Ok(TrialRecord::aborted()),
    };
    let bit = CommitBit::random(rng);
    let verdict = match variant {
        Variant::Decoy => {
            let (marks, outcomes) = alice_commit(&mut system, &kept, bit, params, rng)?;
            let (decoys, register) = alice_insert_decoys(&mut system, &kept, params, settings.decoys, rng)?;
            let evidence = Evidence {
                survivors,
                outcomes,
                register,
            };
            let unveil = Unveil { decoys, bit, marks };
            bob_verify(&mut system, &evidence, &unveil, &bob, params, rng)?.verdict
        }
        Variant::Scrambled => {
            let (evidence, unveil) =
                crate::protocol::alice_commit_prime(&mut system, survivors, &kept, bit, params, rng)?;
            crate::protocol::bob_verify_prime(&mut system, &evidence, &unveil, &bob, params, rng)?.verdict
        }
    };
    Ok(TrialRecord::verdict(verdict, Some(bit)))
}

fn guessed(correct: bool) -> TrialRecord {
    let mut r = TrialRecord::verdict(Verdict::Accept, None);
    r.guess_correct = Some(correct);
    r
}

/// Bob tries to learn Alice's bit from the evidence before the opening.
///
/// The informed strategies are given Alice's decoy mask (and for
/// `InformedMarked` her mark mask) as oracle input.
pub fn attack_bob_distinguish<R: Rng + ?Sized>(
    params: &ProtocolParams,
    settings: &RunSettings,
    strategy: BobStrategy,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    if strategy == BobStrategy::EntangledProbe {
        return entangled_probe(params, settings, rng);
    }
    let bit = CommitBit::random(rng);
    let Some(mut c) = honest_commit(params, bit, settings, rng)? else {
        return Ok(TrialRecord::aborted());
    };
    let slots: Vec<usize> = c
        .unveil
        .decoys
        .positions()
        .map(|s| c.evidence.register[s])
        .collect();
    let origin: Vec<usize> = c.evidence.survivors.positions().collect();
    let guess = match strategy {
        BobStrategy::InformedMarked => {
            let beta = Basis::random(rng);
            let mut consistent = true;
            for (j, k) in c.unveil.marks.positions().enumerate() {
                consistent &= c.system.measure(slots[k], beta, rng)? == c.evidence.outcomes.get(j);
            }
            if consistent {
                CommitBit::from_basis(beta)
            } else {
                CommitBit::from_basis(beta.conjugate())
            }
        }
        BobStrategy::InformedNonDecoy => {
            // A departure at a qubit prepared in η means Alice measured it in
            // the other basis.
            let mut departed = None;
            for (k, &label) in slots.iter().enumerate() {
                let i = origin[k];
                let eta = c.bob.bases()[i];
                if c.system.measure(label, eta, rng)? != c.bob.bits().get(i) {
                    departed = Some(eta);
                }
            }
            match departed {
                Some(eta) => CommitBit::from_basis(eta.conjugate()),
                None => CommitBit::random(rng),
            }
        }
        BobStrategy::UninformedGuess => {
            // Measure every returned qubit in a random basis and pick the
            // basis whose outcomes lean further towards 0.
            let mut zeros = [0i64; 2];
            let mut counts = [0i64; 2];
            for &label in &c.evidence.register {
                let basis = Basis::random(rng);
                let idx = CommitBit::from_basis(basis).index();
                counts[idx] += 1;
                zeros[idx] += i64::from(c.system.measure(label, basis, rng)? == 0);
            }
            let lean = |i: usize| 2 * zeros[i] - counts[i];
            match lean(0).cmp(&lean(1)) {
                core::cmp::Ordering::Greater => CommitBit::Zero,
                core::cmp::Ordering::Less => CommitBit::One,
                core::cmp::Ordering::Equal => CommitBit::random(rng),
            }
        }
        BobStrategy::Honest | BobStrategy::BiasedState | BobStrategy::EntangledProbe => {
            unreachable!("dispatched elsewhere")
        }
    };
    Ok(guessed(guess == bit))
}

/// Bob sends halves of Bell pairs. After the commit he guesses a decoy mask
/// uniformly, measures each guessed slot and its partner in `+`, and guesses
/// bit 1 on any disagreement.
fn entangled_probe<R: Rng + ?Sized>(
    params: &ProtocolParams,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let mut system = QuantumSystem::new();
    let mut sent = Vec::with_capacity(params.p());
    let mut partner = Vec::with_capacity(params.p());
    for _ in 0..params.p() {
        let pair = system.push_block(DenseBlock::bell_pair())?;
        sent.push(pair[0]);
        partner.push(pair[1]);
    }
    let (survivors, kept) = match alice_mixing_test(&mut system, &sent, params, settings.threshold, rng)? {
        MixingOutcome::Pass { survivors, register } => (survivors, register),
        MixingOutcome::Abort => return Ok(TrialRecord::aborted()),
    };
    let bit = CommitBit::random(rng);
    alice_commit(&mut system, &kept, bit, params, rng)?;
    let (_, register) = alice_insert_decoys(&mut system, &kept, params, settings.decoys, rng)?;

    let guess_mask = BitString::random_with_weight(params.q(), params.n(), rng)?;
    let mut agree = true;
    for (slot, i) in guess_mask.positions().zip(survivors.positions()) {
        let a = system.measure(register[slot], Basis::Plus, rng)?;
        let b = system.measure(partner[i], Basis::Plus, rng)?;
        agree &= a == b;
    }
    let guess = if agree { CommitBit::Zero } else { CommitBit::One };
    Ok(guessed(guess == bit))
}
