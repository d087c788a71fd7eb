//! Dense linear algebra over GF(2).
//!
//! Addition is XOR and multiplication is AND. Vectors and matrix rows are
//! packed into `u64` words so that the inner loops of multiplication and
//! elimination are word-wide XORs.

mod echelon;
mod matrix;
mod vector;

pub use echelon::RowEchelon;
pub use matrix::BitMatrix;
pub use vector::BitVector;

pub(crate) const WORD_BITS: usize = 64;

#[inline]
pub(crate) const fn word_count(bits: usize) -> usize {
    bits.div_ceil(WORD_BITS)
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Gf2Error {
    #[error("matrix dimension must be at least 1")]
    ZeroDimension,
    #[error("{op}: incompatible shapes {left:?} and {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },
    #[error("{op}: vector lengths differ ({left} vs {right})")]
    LengthMismatch {
        op: &'static str,
        left: usize,
        right: usize,
    },
    #[error("matrix power needs a square matrix, got {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },
    #[error("{len}-bit vector needs {expected} words, got {got}")]
    WordCount { len: usize, expected: usize, got: usize },
    #[error("invalid bit character {found:?} at position {pos}")]
    ParseBit { pos: usize, found: char },
}
