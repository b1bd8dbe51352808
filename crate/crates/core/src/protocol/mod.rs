//! Honest-party state machines.
//!
//! Protocol flow for the decoy protocol:
//!
//! 1. Bob prepares `p` random BB84 qubits and hands them to Alice
//!    ([`bob_prepare`]).
//! 2. Alice measures `(p − n)/2` random qubits in each basis and aborts if
//!    either group is visibly biased ([`alice_mixing_test`]). The survivor mask
//!    records which `n` qubits are left.
//! 3. She marks `m` survivors and measures them in the basis selected by her
//!    commit bit ([`alice_commit`]), then scatters the survivors among
//!    `q − n` decoys ([`alice_insert_decoys`]). The evidence is the survivor
//!    mask, the outcome string and the `q`-qubit register.
//! 4. To open, she announces the decoy mask, the bit and the mark mask. Bob
//!    checks the unmarked survivors, re-measures the marked ones, and compares
//!    outcomes with his own preparation where bases agree ([`bob_verify`]).
//!
//! The scrambled variant ([`run_honest_prime`]) replaces the marked survivors
//! with freshly prepared qubits, skips decoys, permutes the register while
//! keeping marked qubits in relative order, and drops the final cross-check.
//!
//! Quantum messages are lists of qubit labels into a shared
//! [`QuantumSystem`]; whoever holds a label may act on that qubit.

mod commit;
mod params;
mod scrambled;
mod verify;

pub use commit::{
    alice_commit, alice_insert_decoys, alice_mixing_test, bob_prepare, mixing_test_passes, place_in_slots,
    DecoyPolicy, MixingOutcome,
};
pub use params::{ParamsError, ProtocolParams};
pub use scrambled::{alice_commit_prime, bob_verify_prime, Permutation, ScrambledEvidence, ScrambledUnveil};
pub use verify::{bob_verify, Verification};

use alloc::vec::Vec;
use core::fmt;

use rand::Rng;

use crate::bits::{BitString, BitStringError};
use crate::qstate::{Basis, Bb84, QuantumSystem, StateError};

/// Default deviation multiplier for the random-mixing test.
pub const DEFAULT_MIXING_THRESHOLD: f64 = 4.0;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error(transparent)]
    Params(#[from] ParamsError),
    #[error("malformed message: {0}")]
    Malformed(Malformed),
    #[error(transparent)]
    State(#[from] StateError),
    #[error(transparent)]
    Bits(#[from] BitStringError),
    #[error("register holds {actual} qubits, expected {expected}")]
    RegisterWidth { expected: usize, actual: usize },
    #[error("decoy substitution needs at least {needed} evidence slots, have {available}")]
    InsufficientDecoySlots { needed: usize, available: usize },
}

/// Ways an opening or evidence message can be structurally invalid. These
/// are protocol errors, not detections of cheating.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Malformed {
    MaskLength {
        mask: &'static str,
        expected: usize,
        actual: usize,
    },
    MaskWeight {
        mask: &'static str,
        expected: usize,
        actual: usize,
    },
    NotAPermutation,
    MarkedOrderChanged,
}

impl fmt::Display for Malformed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Malformed::MaskLength {
                mask,
                expected,
                actual,
            } => write!(f, "{mask} has length {actual}, expected {expected}"),
            Malformed::MaskWeight {
                mask,
                expected,
                actual,
            } => write!(f, "{mask} has weight {actual}, expected {expected}"),
            Malformed::NotAPermutation => f.write_str("scramble is not a permutation"),
            Malformed::MarkedOrderChanged => {
                f.write_str("scramble reorders marked positions among themselves")
            }
        }
    }
}

pub(crate) fn check_mask(
    mask: &BitString,
    name: &'static str,
    len: usize,
    weight: usize,
) -> Result<(), ProtocolError> {
    if mask.len() != len {
        return Err(ProtocolError::Malformed(Malformed::MaskLength {
            mask: name,
            expected: len,
            actual: mask.len(),
        }));
    }
    if mask.weight() != weight {
        return Err(ProtocolError::Malformed(Malformed::MaskWeight {
            mask: name,
            expected: weight,
            actual: mask.weight(),
        }));
    }
    Ok(())
}

/// Alice's commitment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CommitBit {
    Zero,
    One,
}

impl CommitBit {
    pub fn from_u8(bit: u8) -> Option<Self> {
        match bit {
            0 => Some(CommitBit::Zero),
            1 => Some(CommitBit::One),
            _ => None,
        }
    }

    pub fn as_u8(self) -> u8 {
        match self {
            CommitBit::Zero => 0,
            CommitBit::One => 1,
        }
    }

    pub fn index(self) -> usize {
        usize::from(self.as_u8())
    }

    /// `Plus` for 0, `Cross` for 1.
    pub fn basis(self) -> Basis {
        Basis::for_bit(self.as_u8())
    }

    pub fn from_basis(basis: Basis) -> Self {
        match basis {
            Basis::Plus => CommitBit::Zero,
            Basis::Cross => CommitBit::One,
        }
    }

    pub fn flipped(self) -> Self {
        match self {
            CommitBit::Zero => CommitBit::One,
            CommitBit::One => CommitBit::Zero,
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            CommitBit::One
        } else {
            CommitBit::Zero
        }
    }
}

impl fmt::Display for CommitBit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_u8())
    }
}

/// Bob's private record of the anonymous state: one bit and one basis per
/// qubit. Never shown to Alice.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BobPreparation {
    bits: BitString,
    bases: Vec<Basis>,
}

impl BobPreparation {
    pub fn new(bits: BitString, bases: Vec<Basis>) -> Result<Self, ProtocolError> {
        if bits.len() != bases.len() {
            return Err(StateError::LengthMismatch {
                left: bits.len(),
                right: bases.len(),
            }
            .into());
        }
        Ok(Self { bits, bases })
    }

    pub fn random<R: Rng + ?Sized>(width: usize, rng: &mut R) -> Self {
        let mut bits = Vec::with_capacity(width);
        let mut bases = Vec::with_capacity(width);
        for _ in 0..width {
            let d = Bb84::random(rng);
            bits.push(d.bit);
            bases.push(d.basis);
        }
        Self {
            bits: BitString::new(bits).expect("sampled bits are binary"),
            bases,
        }
    }

    pub fn len(&self) -> usize {
        self.bases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bases.is_empty()
    }

    pub fn bits(&self) -> &BitString {
        &self.bits
    }

    pub fn bases(&self) -> &[Basis] {
        &self.bases
    }

    pub fn state(&self, index: usize) -> Bb84 {
        Bb84::new(self.bits.get(index), self.bases[index])
    }

    /// Fresh system holding `|bits⟩_bases`, labelled `0..len`.
    pub fn prepare(&self) -> QuantumSystem {
        QuantumSystem::from_qubits((0..self.len()).map(|i| self.state(i).qubit()))
    }
}

/// The commitment evidence: survivor mask and outcome string over the
/// classical channel, plus the register of evidence qubits (labels, in slot
/// order) over the quantum channel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Evidence {
    pub survivors: BitString,
    pub outcomes: BitString,
    pub register: Vec<usize>,
}

/// Alice's opening for the decoy protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Unveil {
    pub decoys: BitString,
    pub bit: CommitBit,
    pub marks: BitString,
}

/// Outcome of one protocol run. Rejections name the first failed check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    /// Alice's mixing test flagged Bob's state as biased.
    AbortMixing,
    /// An unmarked survivor did not return Bob's prepared bit.
    RejectUnmarked,
    /// A marked qubit did not reproduce the announced outcome.
    RejectOutcome,
    /// An announced outcome contradicts Bob's bit where the bases agree.
    RejectCrossCheck,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Accept => "accept",
            Verdict::AbortMixing => "abort-mixing",
            Verdict::RejectUnmarked => "reject-unmarked",
            Verdict::RejectOutcome => "reject-outcome",
            Verdict::RejectCrossCheck => "reject-crosscheck",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        [
            Verdict::Accept,
            Verdict::AbortMixing,
            Verdict::RejectUnmarked,
            Verdict::RejectOutcome,
            Verdict::RejectCrossCheck,
        ]
        .into_iter()
        .find(|v| v.name() == name)
    }

    /// True once Bob's outcome re-measurement succeeded (the verdict is
    /// `Accept` or a later cross-check rejection).
    pub fn passed_outcome_check(self) -> bool {
        matches!(self, Verdict::Accept | Verdict::RejectCrossCheck)
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Variant {
    /// Decoy protocol with three verification checks.
    Decoy,
    /// Scrambled, decoy-free variant.
    Scrambled,
}

/// Everything exchanged or decided during one run.
#[derive(Debug, Clone, PartialEq)]
pub struct Transcript {
    pub variant: Variant,
    pub params: ProtocolParams,
    pub bob: BobPreparation,
    pub survivors: Option<BitString>,
    pub marks: Option<BitString>,
    pub outcomes: Option<BitString>,
    pub decoys: Option<BitString>,
    pub permutation: Option<Permutation>,
    pub bit: CommitBit,
    pub verdict: Verdict,
}

impl Transcript {
    fn aborted(variant: Variant, params: ProtocolParams, bob: BobPreparation, bit: CommitBit) -> Self {
        Self {
            variant,
            params,
            bob,
            survivors: None,
            marks: None,
            outcomes: None,
            decoys: None,
            permutation: None,
            bit,
            verdict: Verdict::AbortMixing,
        }
    }
}

/// Tunables shared by every run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSettings {
    pub threshold: f64,
    pub decoys: DecoyPolicy,
}

impl Default for RunSettings {
    fn default() -> Self {
        Self {
            threshold: DEFAULT_MIXING_THRESHOLD,
            decoys: DecoyPolicy::Bb84,
        }
    }
}

/// State after an honest commit phase of the decoy protocol.
#[derive(Debug, Clone)]
pub struct Committed {
    pub bob: BobPreparation,
    pub system: QuantumSystem,
    pub evidence: Evidence,
    /// The opening an honest Alice would send.
    pub unveil: Unveil,
}

/// Runs steps 1 and 2 honestly. `None` means Alice aborted the mixing test.
pub fn honest_commit<R: Rng + ?Sized>(
    params: &ProtocolParams,
    bit: CommitBit,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<Option<Committed>, ProtocolError> {
    let (bob, mut system) = bob_prepare(params, rng);
    let register: Vec<usize> = (0..params.p()).collect();
    let (survivors, kept) = match alice_mixing_test(&mut system, &register, params, settings.threshold, rng)?
    {
        MixingOutcome::Pass { survivors, register } => (survivors, register),
        MixingOutcome::Abort => return Ok(None),
    };
    let (marks, outcomes) = alice_commit(&mut system, &kept, bit, params, rng)?;
    let (decoys, register) = alice_insert_decoys(&mut system, &kept, params, settings.decoys, rng)?;
    Ok(Some(Committed {
        bob,
        system,
        evidence: Evidence {
            survivors,
            outcomes,
            register,
        },
        unveil: Unveil { decoys, bit, marks },
    }))
}

/// One complete honest run of the decoy protocol.
pub fn run_honest<R: Rng + ?Sized>(
    params: &ProtocolParams,
    bit: CommitBit,
    settings: &RunSettings,
    rng: &mut R,
) -> Result<(Transcript, Verdict), ProtocolError> {
    let (bob, mut system) = bob_prepare(params, rng);
    let register: Vec<usize> = (0..params.p()).collect();
    let (survivors, kept) = match alice_mixing_test(&mut system, &register, params, settings.threshold, rng)?
    {
        MixingOutcome::Pass { survivors, register } => (survivors, register),
        MixingOutcome::Abort => {
            let t = Transcript::aborted(Variant::Decoy, *params, bob, bit);
            return Ok((t, Verdict::AbortMixing));
        }
    };
    let (marks, outcomes) = alice_commit(&mut system, &kept, bit, params, rng)?;
    let (decoys, register) = alice_insert_decoys(&mut system, &kept, params, settings.decoys, rng)?;
    let evidence = Evidence {
        survivors,
        outcomes,
        register,
    };
    let unveil = Unveil { decoys, bit, marks };
    let verdict = bob_verify(&mut system, &evidence, &unveil, &bob, params, rng)?.verdict;
    let transcript = Transcript {
        variant: Variant::Decoy,
        params: *params,
        bob,
        survivors: Some(evidence.survivors),
        marks: Some(unveil.marks),
        outcomes: Some(evidence.outcomes),
        decoys: Some(unveil.decoys),
        permutation: None,
        bit,
        verdict,
    };
    Ok((transcript, verdict))
}

/// One complete honest run of the scrambled variant.
pub fn run_honest_prime<R: Rng + ?Sized>(
    params: &ProtocolParams,
    bit: CommitBit,
    threshold: f64,
    rng: &mut R,
) -> Result<(Transcript, Verdict), ProtocolError> {
    let (bob, mut system) = bob_prepare(params, rng);
    let register: Vec<usize> = (0..params.p()).collect();
    let (survivors, kept) = match alice_mixing_test(&mut system, &register, params, threshold, rng)? {
        MixingOutcome::Pass { survivors, register } => (survivors, register),
        MixingOutcome::Abort => {
            let t = Transcript::aborted(Variant::Scrambled, *params, bob, bit);
            return Ok((t, Verdict::AbortMixing));
        }
    };
    let (evidence, unveil) = alice_commit_prime(&mut system, survivors, &kept, bit, params, rng)?;
    let verdict = bob_verify_prime(&mut system, &evidence, &unveil, &bob, params, rng)?.verdict;
    let transcript = Transcript {
        variant: Variant::Scrambled,
        params: *params,
        bob,
        survivors: Some(evidence.survivors),
        marks: Some(unveil.marks),
        outcomes: Some(evidence.outcomes),
        decoys: None,
        permutation: Some(unveil.permutation),
        bit,
        verdict,
    };
    Ok((transcript, verdict))
}
