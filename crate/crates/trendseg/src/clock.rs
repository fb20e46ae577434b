// SPDX-License-Identifier: MIT OR Apache-2.0

use std::time::Instant;

use trendseg_core::pipeline::{trendsegment_with_clock, Clock};
use trendseg_core::{DetectionOptions, DetectionResult, Result, Series};

/// Wall clock measured from construction.
#[derive(Clone, Copy, Debug)]
pub struct StdClock(Instant);

impl StdClock {
    pub fn new() -> Self {
        Self(Instant::now())
    }
}

impl Default for StdClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for StdClock {
    fn now_ms(&self) -> f64 {
        self.0.elapsed().as_secs_f64() * 1e3
    }
}

/// Detection with per-stage timings filled in; also returns total seconds.
pub fn detect_timed(x: &Series, opts: &DetectionOptions, clock: &StdClock) -> Result<(DetectionResult, f64)> {
    let res = trendsegment_with_clock(x, opts, clock)?;
    let secs = res.timing_ms / 1e3;
    Ok((res, secs))
}
