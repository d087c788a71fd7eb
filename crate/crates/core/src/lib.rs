//! Algebraic seed recovery for scan chains obfuscated by an LFSR keystream.
//!
//! The crate is split into three layers:
//!
//! * [`gf2`]: bit-packed vectors and matrices over GF(2) with row reduction,
//!   solving and kernel computation.
//! * [`sim`]: a cycle-accurate model of the defended circuit (LFSR, locked
//!   scan chain, optional shadow chain, optional MISR compactor). This is the
//!   "oracle" the attacker queries.
//! * [`attack`]: symbolic construction of the linear system relating seed
//!   bits to observed outputs, and recovery of the candidate seed set.

pub mod attack;
pub mod gf2;
pub mod sim;

pub use attack::{AttackError, CoefficientSystem, Enumeration, Protocol, SeedSolution, SymbolicSystem};
pub use gf2::{BitMatrix, BitVector, Gf2Error, RowEchelon};
pub use sim::{CircuitSpec, LfsrSpec, MisrSpec, Oracle, OracleState, ScanChainSpec, SimError};
