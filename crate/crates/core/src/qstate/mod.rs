//! Qubit states and measurement.
//!
//! Registers are stored as a tensor product of independent factors: single
//! pure qubits, or dense state vectors over a handful of qubits that have been
//! entangled with each other. Honest protocol runs never entangle anything,
//! so their cost stays linear in the register width; attack states such as the
//! control-plus-payload superposition live in small dense blocks.
//!
//! Basis conventions: `Plus` is the computational (rectilinear) basis with
//! `|0⟩`, `|1⟩`; `Cross` is the diagonal basis with `|0⟩_× = (|0⟩+|1⟩)/√2`
//! and `|1⟩_× = (|0⟩−|1⟩)/√2`.

mod block;
mod density;
mod qubit;
mod system;

pub use block::DenseBlock;
pub use density::{trace_distance, DensityMatrix, MAX_DENSITY_QUBITS};
pub use qubit::PureQubit;
pub use system::{QuantumSystem, DEFAULT_BLOCK_CAP};

use core::fmt;

use num_complex::Complex64;
use rand::Rng;

/// Amplitude tolerance for freshly constructed states.
pub const STATE_TOLERANCE: f64 = 1e-12;
/// Tolerance for matrices derived from states (mixtures, partial traces).
pub const MATRIX_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StateError {
    #[error("qubit index {index} out of range for width {width}")]
    InvalidIndex { index: usize, width: usize },
    #[error("qubit index {0} listed more than once")]
    DuplicateIndex(usize),
    #[error("state is not normalized (squared norm {0})")]
    NotNormalized(f64),
    #[error("amplitude vector of length {0} is not a power of two")]
    BadAmplitudeLength(usize),
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error("entangled block of {needed} qubits exceeds the cap of {cap}")]
    CapExceeded { needed: usize, cap: usize },
    #[error("density matrix over {qubits} qubits exceeds the limit of {max}")]
    DimensionOverflow { qubits: usize, max: usize },
    #[error("density matrix dimensions differ: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("mixture weights must be non-negative and sum to one")]
    InvalidWeights,
    #[error("density matrix invariant violated: {0}")]
    NotDensity(&'static str),
}

/// One of the two BB84 bases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Basis {
    /// Rectilinear basis, written `+`.
    Plus,
    /// Diagonal basis, written `×`.
    Cross,
}

impl Basis {
    pub fn conjugate(self) -> Self {
        match self {
            Basis::Plus => Basis::Cross,
            Basis::Cross => Basis::Plus,
        }
    }

    /// Basis that encodes commit bit `bit`: `0 → Plus`, anything else `→ Cross`.
    pub fn for_bit(bit: u8) -> Self {
        if bit == 0 {
            Basis::Plus
        } else {
            Basis::Cross
        }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        if rng.random_bool(0.5) {
            Basis::Cross
        } else {
            Basis::Plus
        }
    }

    /// ASCII symbol used in transcripts: `+` or `x`.
    pub fn symbol(self) -> char {
        match self {
            Basis::Plus => '+',
            Basis::Cross => 'x',
        }
    }

    pub fn from_symbol(c: char) -> Option<Self> {
        match c {
            '+' => Some(Basis::Plus),
            'x' | 'X' | '×' => Some(Basis::Cross),
            _ => None,
        }
    }
}

impl fmt::Display for Basis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.symbol())
    }
}

/// Classical description of a BB84 state `|bit⟩_basis`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bb84 {
    pub bit: u8,
    pub basis: Basis,
}

impl Bb84 {
    pub fn new(bit: u8, basis: Basis) -> Self {
        Self { bit, basis }
    }

    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        Self {
            bit: rng.random_range(0..2u8),
            basis: Basis::random(rng),
        }
    }

    pub fn qubit(self) -> PureQubit {
        PureQubit::bb84(self.bit, self.basis)
    }
}

/// Builds `prepare_bb84(bit, basis)`.
pub fn prepare_bb84(bit: u8, basis: Basis) -> PureQubit {
    PureQubit::bb84(bit, basis)
}

/// Inner product `⟨a|b⟩` of two BB84 product states.
pub fn overlap_amplitude(a: &[Bb84], b: &[Bb84]) -> Result<Complex64, StateError> {
    if a.len() != b.len() {
        return Err(StateError::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(a.iter()
        .zip(b)
        .map(|(x, y)| x.qubit().inner(&y.qubit()))
        .fold(Complex64::new(1.0, 0.0), |acc, z| acc * z))
}

/// Descriptor of `|bits⟩_basis` with one basis for every position.
pub fn uniform_descriptor(bits: &[u8], basis: Basis) -> alloc::vec::Vec<Bb84> {
    bits.iter().map(|&bit| Bb84::new(bit, basis)).collect()
}
