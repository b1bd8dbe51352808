//! Simulation core for a quantum bit commitment scheme whose evidence is
//! composite: a classical pair (survivor mask, commit outcomes) travelling
//! alongside a quantum register salted with decoy qubits.
//!
//! The crate is `no_std` (it needs `alloc`) and has no IO. It provides
//!
//! - [`qstate`]: BB84 states, a lazily-entangling multi-qubit register,
//!   density matrices and trace distance;
//! - [`protocol`]: the honest commit/unveil state machines for the decoy
//!   protocol and its scrambled, decoy-free variant, including Bob's
//!   three-stage verification;
//! - [`adversary`]: the catalog of cheating strategies for both parties and
//!   the tallies used to estimate their success;
//! - [`analysis`]: exact evidence states of tiny instances by enumeration.
//!
//! Every randomized operation takes an explicit `rand::Rng`, so callers decide
//! how trials are seeded and scheduled.

#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod analysis;
pub mod bits;
pub mod protocol;
pub mod qstate;

pub use bits::{BitString, BitStringError};
