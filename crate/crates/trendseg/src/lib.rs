// SPDX-License-Identifier: MIT OR Apache-2.0

//! Command-line front end, CSV/JSON IO and simulation lab for
//! [`trendseg_core`].

#![forbid(unsafe_code)]

pub mod cli;
pub mod clock;
pub mod error;
pub mod io;
pub mod simlab;

pub use error::{Result, TrendsegError};
pub use trendseg_core as core;
