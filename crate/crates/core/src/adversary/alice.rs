//! Alice's attacks. Bob is honest throughout.

use alloc::vec::Vec;

use rand::Rng;

use super::{AdversaryError, TrialRecord, ZetaPolicy};
use crate::bits::BitString;
use crate::protocol::{
    alice_commit, alice_commit_prime, alice_insert_decoys, alice_mixing_test, bob_prepare, bob_verify,
    bob_verify_prime, honest_commit, place_in_slots, run_honest, run_honest_prime, BobPreparation, CommitBit,
    Evidence, MixingOutcome, Permutation, ProtocolParams, RunSettings, ScrambledEvidence, ScrambledUnveil,
    Unveil, Variant, Verdict, Verification,
};
use crate::qstate::{Basis, Bb84, DenseBlock, QuantumSystem};

/// State after Bob's preparation and a passed mixing test.
struct Stage {
    bob: BobPreparation,
    system: QuantumSystem,
    survivors: BitString,
    kept: Vec<usize>,
}

fn mix<R: Rng + ?Sized>(
    params: &ProtocolParams,
    threshold: f64,
    rng: &mut R,
) -> Result<Option<Stage>, AdversaryError> {
    let (bob, mut system) = bob_prepare(params, rng);
    let register: Vec<usize> = (0..params.p()).collect();
    Ok(
        match alice_mixing_test(&mut system, &register, params, threshold, rng)? {
            MixingOutcome::Pass { survivors, register } => Some(Stage {
                bob,
                system,
                survivors,
                kept: register,
            }),
            MixingOutcome::Abort => None,
        },
    )
}

fn record(v: Verification, bit: CommitBit, bob: &BobPreparation) -> TrialRecord {
    let mut r = TrialRecord::verdict(v.verdict, Some(bit));
    if v.verdict == Verdict::RejectCrossCheck {
        r.crosscheck_basis_match = v.culprit.map(|i| bob.bases()[i] == bit.basis());
    }
    r
}

/// Honest Alice with a uniformly random bit.
pub fn honest_trial<R: Rng + ?Sized>(
    variant: Variant,
    params: &ProtocolParams,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let bit = CommitBit::random(rng);
    let (_, verdict) = match variant {
        Variant::Decoy => run_honest(params, bit, settings, rng)?,
        Variant::Scrambled => run_honest_prime(params, bit, settings.threshold, rng)?,
    };
    Ok(match verdict {
        Verdict::AbortMixing => TrialRecord::aborted(),
        v => TrialRecord::verdict(v, Some(bit)),
    })
}

/// Commit honestly to 0, then open as 1 with the same mark mask and outcomes.
pub fn attack_basis_flip<R: Rng + ?Sized>(
    variant: Variant,
    params: &ProtocolParams,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    match variant {
        Variant::Decoy => {
            let Some(mut c) = honest_commit(params, CommitBit::Zero, settings, rng)? else {
                return Ok(TrialRecord::aborted());
            };
            c.unveil.bit = CommitBit::One;
            let v = bob_verify(&mut c.system, &c.evidence, &c.unveil, &c.bob, params, rng)?;
            Ok(record(v, CommitBit::One, &c.bob))
        }
        Variant::Scrambled => {
            let Some(mut st) = mix(params, settings.threshold, rng)? else {
                return Ok(TrialRecord::aborted());
            };
            let (evidence, mut unveil) = alice_commit_prime(
                &mut st.system,
                st.survivors,
                &st.kept,
                CommitBit::Zero,
                params,
                rng,
            )?;
            unveil.bit = CommitBit::One;
            let v = bob_verify_prime(&mut st.system, &evidence, &unveil, &st.bob, params, rng)?;
            Ok(record(v, CommitBit::One, &st.bob))
        }
    }
}

/// Commit honestly to 0, then plant a `|R_x(j)⟩_×` twin directly after every
/// marked survivor. The opening announces bit 1 with a decoy mask covering the
/// unmarked survivors and the twins, so the twins take the marked roles.
pub fn attack_decoy_substitution<R: Rng + ?Sized>(
    params: &ProtocolParams,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let (m, n, q) = (params.m(), params.n(), params.q());
    if q < n + m {
        return Err(crate::protocol::ProtocolError::InsufficientDecoySlots {
            needed: n + m,
            available: q,
        }
        .into());
    }
    let Some(mut st) = mix(params, settings.threshold, rng)? else {
        return Ok(TrialRecord::aborted());
    };
    let (marks, outcomes) = alice_commit(&mut st.system, &st.kept, CommitBit::Zero, params, rng)?;

    let mut sequence = Vec::with_capacity(n + m);
    let mut claimed = Vec::with_capacity(n);
    let mut twins = outcomes.as_slice().iter();
    for (k, &label) in st.kept.iter().enumerate() {
        sequence.push(label);
        if marks.get(k) == 1 {
            let r = *twins.next().expect("one outcome per mark");
            sequence.push(st.system.push(Bb84::new(r, Basis::Cross).qubit()));
        }
        claimed.push(sequence.len() - 1);
    }
    let mut used = rand::seq::index::sample(rng, q, n + m).into_vec();
    used.sort_unstable();
    let layout = BitString::from_positions(q, used.iter().copied())?;
    let register = place_in_slots(&mut st.system, &layout, &sequence, settings.decoys, rng)?;
    let decoys = BitString::from_positions(q, claimed.iter().map(|&i| used[i]))?;

    let evidence = Evidence {
        survivors: st.survivors,
        outcomes,
        register,
    };
    let unveil = Unveil {
        decoys,
        bit: CommitBit::One,
        marks,
    };
    let v = bob_verify(&mut st.system, &evidence, &unveil, &st.bob, params, rng)?;
    Ok(record(v, CommitBit::One, &st.bob))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeferredMode {
    /// Marked qubits are sent untouched.
    Unmeasured,
    /// Each marked qubit is CNOT-coupled to a fresh `|0⟩` ancilla Alice keeps.
    Ancilla,
}

/// Announce uniformly random outcomes without measuring, then open a
/// uniformly random bit.
pub fn attack_deferred<R: Rng + ?Sized>(
    params: &ProtocolParams,
    settings: &RunSettings,
    mode: DeferredMode,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let Some(mut st) = mix(params, settings.threshold, rng)? else {
        return Ok(TrialRecord::aborted());
    };
    let marks = BitString::random_with_weight(params.n(), params.m(), rng)?;
    let outcomes = BitString::random(params.m(), rng);
    if mode == DeferredMode::Ancilla {
        for k in marks.positions() {
            let ancilla = st.system.push(Bb84::new(0, Basis::Plus).qubit());
            st.system.cnot(st.kept[k], ancilla)?;
        }
    }
    let (decoys, register) = alice_insert_decoys(&mut st.system, &st.kept, params, settings.decoys, rng)?;
    let bit = CommitBit::random(rng);
    let evidence = Evidence {
        survivors: st.survivors,
        outcomes,
        register,
    };
    let unveil = Unveil { decoys, bit, marks };
    let v = bob_verify(&mut st.system, &evidence, &unveil, &st.bob, params, rng)?;
    Ok(record(v, bit, &st.bob))
}

/// Replaces the marked entries of `kept` by the `|ζ⟩` payload and returns the
/// resulting order together with the control label.
fn splice_zeta(
    system: &mut QuantumSystem,
    kept: &[usize],
    marks: &BitString,
    outcomes: &BitString,
) -> Result<(Vec<usize>, usize), AdversaryError> {
    let block =
        DenseBlock::zeta(outcomes.as_slice(), system.cap()).map_err(|_| AdversaryError::CapExceeded {
            payload: outcomes.len(),
            cap: system.cap(),
        })?;
    let labels = system.push_block(block)?;
    let mut payload = labels[1..].iter();
    let ordered = kept
        .iter()
        .enumerate()
        .map(|(k, &label)| {
            if marks.get(k) == 1 {
                *payload.next().expect("one payload qubit per mark")
            } else {
                label
            }
        })
        .collect();
    Ok((ordered, labels[0]))
}

/// The `|ζ⟩` attack on the scrambled variant: the payload stands in for the
/// fresh `|R_x⟩` qubits, and the bit opened is the control's outcome in
/// `control_basis`.
pub fn attack_zeta_prime<R: Rng + ?Sized>(
    params: &ProtocolParams,
    threshold: f64,
    control_basis: Basis,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let Some(mut st) = mix(params, threshold, rng)? else {
        return Ok(TrialRecord::aborted());
    };
    let marks = BitString::random_with_weight(params.n(), params.m(), rng)?;
    let outcomes = BitString::random(params.m(), rng);
    let (ordered, control) = splice_zeta(&mut st.system, &st.kept, &marks, &outcomes)?;
    let permutation = Permutation::random_order_preserving(&marks, rng);
    let evidence = ScrambledEvidence {
        survivors: st.survivors,
        outcomes,
        register: permutation.apply(&ordered),
    };
    let bit = CommitBit::from_u8(st.system.measure(control, control_basis, rng)?).expect("binary outcome");
    let unveil = ScrambledUnveil {
        bit,
        marks,
        permutation,
    };
    let v = bob_verify_prime(&mut st.system, &evidence, &unveil, &st.bob, params, rng)?;
    Ok(record(v, bit, &st.bob))
}

/// The `|ζ⟩` attack on the decoy protocol. The announced outcomes come from
/// `policy`; the marked survivors are swapped for the payload before decoys
/// are inserted, and the control's `+` outcome picks the bit to open.
pub fn attack_zeta_p<R: Rng + ?Sized>(
    params: &ProtocolParams,
    settings: &RunSettings,
    policy: ZetaPolicy,
    rng: &mut R,
) -> Result<TrialRecord, AdversaryError> {
    let Some(mut st) = mix(params, settings.threshold, rng)? else {
        return Ok(TrialRecord::aborted());
    };
    let marks = BitString::random_with_weight(params.n(), params.m(), rng)?;
    let mut outcomes = Vec::with_capacity(params.m());
    for k in marks.positions() {
        let basis = match policy {
            ZetaPolicy::Plus => Basis::Plus,
            ZetaPolicy::Cross => Basis::Cross,
            ZetaPolicy::RandomPerQubit => Basis::random(rng),
            ZetaPolicy::FixedZeros => {
                outcomes.push(0);
                continue;
            }
        };
        outcomes.push(st.system.measure(st.kept[k], basis, rng)?);
    }
    let outcomes = BitString::new(outcomes)?;
    let origin: Vec<usize> = st.survivors.positions().collect();
    let bivalid = marks
        .positions()
        .zip(outcomes.as_slice())
        .all(|(k, &r)| st.bob.bits().get(origin[k]) == r);

    let (ordered, control) = splice_zeta(&mut st.system, &st.kept, &marks, &outcomes)?;
    let (decoys, register) = alice_insert_decoys(&mut st.system, &ordered, params, settings.decoys, rng)?;
    let bit = CommitBit::from_u8(st.system.measure(control, Basis::Plus, rng)?).expect("binary outcome");
    let evidence = Evidence {
        survivors: st.survivors,
        outcomes,
        register,
    };
    let unveil = Unveil { decoys, bit, marks };
    let v = bob_verify(&mut st.system, &evidence, &unveil, &st.bob, params, rng)?;
    let mut r = record(v, bit, &st.bob);
    r.bivalid = Some(bivalid);
    Ok(r)
}
