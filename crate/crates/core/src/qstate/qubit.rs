use core::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use rand::Rng;

use super::{Basis, StateError, STATE_TOLERANCE};

/// A single-qubit pure state `a₀|0⟩ + a₁|1⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PureQubit {
    amps: [Complex64; 2],
}

impl PureQubit {
    pub fn new(a0: Complex64, a1: Complex64) -> Result<Self, StateError> {
        let norm = a0.norm_sqr() + a1.norm_sqr();
        if (norm - 1.0).abs() > STATE_TOLERANCE {
            return Err(StateError::NotNormalized(norm));
        }
        Ok(Self { amps: [a0, a1] })
    }

    /// `|bit⟩_basis`. Any nonzero `bit` is treated as 1.
    pub fn bb84(bit: u8, basis: Basis) -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        let h = Complex64::new(FRAC_1_SQRT_2, 0.0);
        let amps = match (basis, bit) {
            (Basis::Plus, 0) => [one, zero],
            (Basis::Plus, _) => [zero, one],
            (Basis::Cross, 0) => [h, h],
            (Basis::Cross, _) => [h, -h],
        };
        Self { amps }
    }

    /// Haar-random pure state.
    pub fn haar<R: Rng + ?Sized>(rng: &mut R) -> Self {
        // Uniform on the Bloch sphere: cos θ uniform in [-1, 1], φ uniform.
        let cos_theta: f64 = rng.random_range(-1.0..=1.0);
        let phi: f64 = rng.random_range(0.0..2.0 * PI);
        let a0 = libm::sqrt((1.0 + cos_theta) / 2.0);
        let a1 = libm::sqrt((1.0 - cos_theta) / 2.0);
        Self {
            amps: [
                Complex64::new(a0, 0.0),
                Complex64::new(a1 * libm::cos(phi), a1 * libm::sin(phi)),
            ],
        }
    }

    pub fn amplitudes(&self) -> [Complex64; 2] {
        self.amps
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &PureQubit) -> Complex64 {
        self.amps[0].conj() * other.amps[0] + self.amps[1].conj() * other.amps[1]
    }

    /// Born probability of `outcome` when measured in `basis`.
    pub fn probability(&self, outcome: u8, basis: Basis) -> f64 {
        self.inner_with(outcome, basis).norm_sqr()
    }

    fn inner_with(&self, outcome: u8, basis: Basis) -> Complex64 {
        PureQubit::bb84(outcome, basis).inner(self)
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps[0].norm_sqr() + self.amps[1].norm_sqr()
    }

    /// Fidelity `|⟨self|other⟩|²`; insensitive to global phase.
    pub fn fidelity(&self, other: &PureQubit) -> f64 {
        self.inner(other).norm_sqr()
    }
}
