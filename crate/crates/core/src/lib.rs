// SPDX-License-Identifier: MIT OR Apache-2.0

//! Piecewise-linear change-point detection by a bottom-up, conditionally
//! orthonormal unbalanced wavelet transform.
//!
//! The procedure has four steps:
//!
//! 1. [`tguw::tguw_forward`] decomposes the series into two smooth and `T - 2`
//!    detail coefficients.
//! 2. [`shrink`] thresholds the details under the "connected" and "two
//!    together" rules.
//! 3. [`reconstruct::tguw_inverse`] maps the surviving coefficients back to a
//!    piecewise-linear estimate whose kinks and jumps are the change-points.
//! 4. [`postprocess`] optionally prunes spurious change-points.
//!
//! [`pipeline::trendsegment`] runs all of it. The crate is `no_std` and only
//! needs `alloc`.
#![no_std]
#![forbid(unsafe_code)]

extern crate alloc;

pub mod error;
pub mod pipeline;
pub mod postprocess;
pub mod reconstruct;
pub mod series;
pub mod shrink;
pub mod tguw;

pub use error::{Error, Result};
pub use pipeline::{trendsegment, DetectionOptions, DetectionResult};
pub use series::Series;
