//! Cheating strategies for either party, run against an honest counterpart.
//!
//! Each trial returns a [`TrialRecord`]; [`Tally`] accumulates them and yields
//! acceptance rates, the per-bit unveiling rates `β(b)` and `λ = min β(b)`.
//! Informed Bob strategies are handed Alice's secret masks directly. They are
//! calibration oracles, not physical attacks.

mod alice;
mod bob;
mod stats;

pub use alice::{
    attack_basis_flip, attack_decoy_substitution, attack_deferred, attack_zeta_p, attack_zeta_prime,
    honest_trial, DeferredMode,
};
pub use bob::{attack_bob_biased, attack_bob_distinguish};
pub use stats::{compute_lambda, CheatStats, Estimate, Tally};

use core::fmt;

use rand::Rng;

use crate::protocol::{CommitBit, ProtocolError, ProtocolParams, RunSettings, Variant, Verdict};
use crate::qstate::Basis;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AdversaryError {
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("strategy {strategy} cannot run against the {variant} protocol")]
    WrongVariant {
        strategy: &'static str,
        variant: &'static str,
    },
    #[error("at most one party may cheat (alice={alice}, bob={bob})")]
    TwoCheaters { alice: &'static str, bob: &'static str },
    #[error("{payload} payload qubits plus a control exceed the block cap {cap}")]
    CapExceeded { payload: usize, cap: usize },
    #[error("both per-bit estimates are needed")]
    MissingStats,
}

impl From<crate::qstate::StateError> for AdversaryError {
    fn from(e: crate::qstate::StateError) -> Self {
        AdversaryError::Protocol(e.into())
    }
}

impl From<crate::bits::BitStringError> for AdversaryError {
    fn from(e: crate::bits::BitStringError) -> Self {
        AdversaryError::Protocol(e.into())
    }
}

macro_rules! named_enum {
    ($(#[$meta:meta])* $name:ident { $($(#[$vmeta:meta])* $variant:ident => $id:literal),+ $(,)? }) => {
        $(#[$meta])*
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum $name {
            $($(#[$vmeta])* $variant),+
        }

        impl $name {
            pub const ALL: &'static [$name] = &[$($name::$variant),+];

            pub fn id(self) -> &'static str {
                match self {
                    $($name::$variant => $id),+
                }
            }

            pub fn from_id(id: &str) -> Option<Self> {
                Self::ALL.iter().copied().find(|s| s.id() == id)
            }
        }

        impl fmt::Display for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.id())
            }
        }
    };
}

named_enum! {
    AliceStrategy {
        Honest => "honest",
        /// Commit to 0, open as 1 with the same outcomes.
        BasisFlip => "basis-flip",
        /// Commit to 0, plant `|R_x⟩_×` decoys and point the opening at them.
        DecoySubstitution => "decoy-sub",
        /// Announce random outcomes without measuring.
        Deferred => "deferred",
        /// As `Deferred`, but each marked qubit is first entangled with an
        /// ancilla Alice keeps.
        DeferredAncilla => "deferred-ancilla",
        /// Send the payload of `|ζ⟩` in the scrambled variant.
        ZetaPrime => "zeta-prime",
        /// Send the payload of `|ζ⟩` in the decoy protocol.
        ZetaP => "zeta-p",
    }
}

named_enum! {
    BobStrategy {
        Honest => "honest",
        BiasedState => "bob-bias",
        /// Knows the decoy and mark masks.
        InformedMarked => "bob-informed-marked",
        /// Knows the decoy mask only.
        InformedNonDecoy => "bob-informed-nondecoy",
        EntangledProbe => "bob-probe",
        UninformedGuess => "bob-uninformed",
    }
}

named_enum! {
    /// How Alice obtains the outcome string she announces in the `|ζ⟩` attack
    /// on the decoy protocol.
    ZetaPolicy {
        Plus => "plus",
        Cross => "cross",
        RandomPerQubit => "random",
        /// Announce all zeros without measuring.
        FixedZeros => "zeros",
    }
}

named_enum! {
    /// Bob's preparation in the biased-state attack.
    BiasPolicy {
        AllZeroPlus => "zero-plus",
        AllZeroCross => "zero-cross",
        /// Bit 0 in the `+` basis, bit 1 in the `×` basis.
        BasisDependent => "basis-dependent",
        Honest => "honest",
    }
}

/// One trial's outcome, from the honest party's point of view.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialRecord {
    pub verdict: Verdict,
    /// The bit Alice opened, if the run reached the opening.
    pub unveiled: Option<CommitBit>,
    /// For cross-check rejections: whether the cited qubit's preparation
    /// basis equals the unveiled basis.
    pub crosscheck_basis_match: Option<bool>,
    /// For `|ζ⟩` attacks on the decoy protocol: whether the announced outcomes
    /// equal Bob's bits on every marked qubit.
    pub bivalid: Option<bool>,
    /// For Bob strategies: whether his guess of the bit was right.
    pub guess_correct: Option<bool>,
}

impl TrialRecord {
    pub(crate) fn aborted() -> Self {
        Self::verdict(Verdict::AbortMixing, None)
    }

    pub(crate) fn verdict(verdict: Verdict, unveiled: Option<CommitBit>) -> Self {
        Self {
            verdict,
            unveiled,
            crosscheck_basis_match: None,
            bivalid: None,
            guess_correct: None,
        }
    }
}

/// A fully specified trial: protocol, parameters and both parties' behavior.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Scenario {
    pub variant: Variant,
    pub params: ProtocolParams,
    pub alice: AliceStrategy,
    pub bob: BobStrategy,
    pub settings: RunSettings,
    pub zeta_policy: ZetaPolicy,
    /// Basis in which Alice measures the `|ζ⟩` control before opening.
    pub control_basis: Basis,
    pub bias_policy: BiasPolicy,
}

impl Scenario {
    pub fn new(variant: Variant, params: ProtocolParams, alice: AliceStrategy, bob: BobStrategy) -> Self {
        Self {
            variant,
            params,
            alice,
            bob,
            settings: RunSettings::default(),
            zeta_policy: ZetaPolicy::Plus,
            control_basis: Basis::Plus,
            bias_policy: BiasPolicy::AllZeroPlus,
        }
    }

    /// Rejects combinations that cannot run, before any trial.
    pub fn validate(&self) -> Result<(), AdversaryError> {
        if self.alice != AliceStrategy::Honest && self.bob != BobStrategy::Honest {
            return Err(AdversaryError::TwoCheaters {
                alice: self.alice.id(),
                bob: self.bob.id(),
            });
        }
        let variant = match self.variant {
            Variant::Decoy => "decoy",
            Variant::Scrambled => "scrambled",
        };
        let decoy_only = matches!(
            self.alice,
            AliceStrategy::DecoySubstitution
                | AliceStrategy::Deferred
                | AliceStrategy::DeferredAncilla
                | AliceStrategy::ZetaP
        ) || matches!(
            self.bob,
            BobStrategy::InformedMarked
                | BobStrategy::InformedNonDecoy
                | BobStrategy::EntangledProbe
                | BobStrategy::UninformedGuess
        );
        let wrong = match self.variant {
            Variant::Decoy => self.alice == AliceStrategy::ZetaPrime,
            Variant::Scrambled => decoy_only,
        };
        if wrong {
            let strategy = if self.alice != AliceStrategy::Honest {
                self.alice.id()
            } else {
                self.bob.id()
            };
            return Err(AdversaryError::WrongVariant { strategy, variant });
        }
        let (m, n, q) = (self.params.m(), self.params.n(), self.params.q());
        if self.alice == AliceStrategy::DecoySubstitution && q < n + m {
            return Err(ProtocolError::InsufficientDecoySlots {
                needed: n + m,
                available: q,
            }
            .into());
        }
        if matches!(self.alice, AliceStrategy::ZetaP | AliceStrategy::ZetaPrime)
            && m + 1 > crate::qstate::DEFAULT_BLOCK_CAP
        {
            return Err(AdversaryError::CapExceeded {
                payload: m,
                cap: crate::qstate::DEFAULT_BLOCK_CAP,
            });
        }
        Ok(())
    }

    pub fn run_trial<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<TrialRecord, AdversaryError> {
        let p = &self.params;
        let s = &self.settings;
        match (self.alice, self.bob) {
            (AliceStrategy::Honest, BobStrategy::Honest) => honest_trial(self.variant, p, s, rng),
            (AliceStrategy::Honest, BobStrategy::BiasedState) => {
                attack_bob_biased(self.variant, p, s, self.bias_policy, rng)
            }
            (AliceStrategy::Honest, bob) => attack_bob_distinguish(p, s, bob, rng),
            (AliceStrategy::BasisFlip, _) => attack_basis_flip(self.variant, p, s, rng),
            (AliceStrategy::DecoySubstitution, _) => attack_decoy_substitution(p, s, rng),
            (AliceStrategy::Deferred, _) => attack_deferred(p, s, DeferredMode::Unmeasured, rng),
            (AliceStrategy::DeferredAncilla, _) => attack_deferred(p, s, DeferredMode::Ancilla, rng),
            (AliceStrategy::ZetaPrime, _) => attack_zeta_prime(p, s.threshold, self.control_basis, rng),
            (AliceStrategy::ZetaP, _) => attack_zeta_p(p, s, self.zeta_policy, rng),
        }
    }
}
