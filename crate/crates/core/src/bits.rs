//! Classical bit strings and masks.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand::Rng;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum BitStringError {
    #[error("invalid bit value {0} (expected 0 or 1)")]
    InvalidBit(u8),
    #[error("invalid character {0:?} in bit string")]
    InvalidChar(char),
    #[error("weight {weight} exceeds length {len}")]
    WeightTooLarge { weight: usize, len: usize },
    #[error("position {position} out of range for length {len}")]
    PositionOutOfRange { position: usize, len: usize },
}

/// A string of bits, each stored as `0` or `1`.
///
/// Used both for data (Bob's bits, commit outcomes) and for selection masks
/// whose set positions pick out qubits.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn new(bits: Vec<u8>) -> Result<Self, BitStringError> {
        if let Some(&bad) = bits.iter().find(|&&b| b > 1) {
            return Err(BitStringError::InvalidBit(bad));
        }
        Ok(Self(bits))
    }

    pub fn zeros(len: usize) -> Self {
        Self(alloc::vec![0; len])
    }

    pub fn all_ones(len: usize) -> Self {
        Self(alloc::vec![1; len])
    }

    /// Uniformly random string of length `len`.
    pub fn random<R: Rng + ?Sized>(len: usize, rng: &mut R) -> Self {
        Self((0..len).map(|_| rng.random_range(0..2u8)).collect())
    }

    /// Uniformly random string of length `len` with exactly `weight` ones.
    pub fn random_with_weight<R: Rng + ?Sized>(
        len: usize,
        weight: usize,
        rng: &mut R,
    ) -> Result<Self, BitStringError> {
        if weight > len {
            return Err(BitStringError::WeightTooLarge { weight, len });
        }
        let mut bits = alloc::vec![0; len];
        for i in rand::seq::index::sample(rng, len, weight) {
            bits[i] = 1;
        }
        Ok(Self(bits))
    }

    /// Mask of length `len` with ones at `positions`.
    pub fn from_positions<I>(len: usize, positions: I) -> Result<Self, BitStringError>
    where
        I: IntoIterator<Item = usize>,
    {
        let mut bits = alloc::vec![0; len];
        for position in positions {
            if position >= len {
                return Err(BitStringError::PositionOutOfRange { position, len });
            }
            bits[position] = 1;
        }
        Ok(Self(bits))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Hamming weight.
    pub fn weight(&self) -> usize {
        self.0.iter().filter(|&&b| b == 1).count()
    }

    pub fn get(&self, index: usize) -> u8 {
        self.0[index]
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Indices of the set bits, ascending.
    pub fn positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 1).then_some(i))
    }

    /// Indices of the clear bits, ascending.
    pub fn zero_positions(&self) -> impl Iterator<Item = usize> + '_ {
        self.0
            .iter()
            .enumerate()
            .filter_map(|(i, &b)| (b == 0).then_some(i))
    }

    pub fn into_inner(self) -> Vec<u8> {
        self.0
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: String = self.0.iter().map(|&b| if b == 1 { '1' } else { '0' }).collect();
        f.write_str(&s)
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitString({self})")
    }
}

impl FromStr for BitString {
    type Err = BitStringError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                other => Err(BitStringError::InvalidChar(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Self)
    }
}
