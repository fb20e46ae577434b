// SPDX-License-Identifier: MIT OR Apache-2.0

use core::fmt;

/// Errors produced by the transform, thresholding and reconstruction routines.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// The series is shorter than the operation requires.
    SeriesTooShort { len: usize, min: usize },
    /// An observation (or option) is NaN or infinite.
    NonFiniteInput { index: usize },
    /// The constancy and linearity weight triplets are (numerically) parallel.
    DegenerateWeights,
    /// A coefficient mask does not line up with the decomposition it is applied to.
    MaskLengthMismatch { expected: usize, got: usize },
    /// Two series that must have equal length do not.
    LengthMismatch { left: usize, right: usize },
    /// Basis materialization was requested for a series longer than the cap.
    CapExceeded { len: usize, cap: usize },
    /// A segment boundary lies outside `1..=T` or is reversed.
    IndexOutOfRange { start: usize, end: usize, len: usize },
    /// An option value violates its documented range.
    InvalidOption(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::SeriesTooShort { len, min } => {
                write!(f, "series of length {len} is too short (need at least {min})")
            }
            Error::NonFiniteInput { index } => {
                write!(f, "non-finite value at position {}", index + 1)
            }
            Error::DegenerateWeights => {
                f.write_str("constancy and linearity weights are parallel; weight state is corrupted")
            }
            Error::MaskLengthMismatch { expected, got } => {
                write!(f, "mask has {got} entries but decomposition has {expected} records")
            }
            Error::LengthMismatch { left, right } => {
                write!(f, "length mismatch: {left} vs {right}")
            }
            Error::CapExceeded { len, cap } => {
                write!(f, "length {len} exceeds basis materialization cap {cap}")
            }
            Error::IndexOutOfRange { start, end, len } => {
                write!(f, "segment [{start}, {end}] is not inside 1..={len}")
            }
            Error::InvalidOption(msg) => write!(f, "invalid option: {msg}"),
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T, E = Error> = core::result::Result<T, E>;
