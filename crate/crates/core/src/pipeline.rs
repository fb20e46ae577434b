// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::postprocess::{self, evaluate_segments, segments_from_changepoints, SegmentFit};
use crate::reconstruct::{extract_changepoints, scan_changepoints, tguw_inverse, ChangepointScan};
use crate::series::Series;
use crate::shrink::{self, threshold_value, DEFAULT_C};
use crate::tguw::{tguw_forward, TransformOptions, DEFAULT_RHO, DEFAULT_ZERO_TOLERANCE};

/// Relative threshold of the diagnostic second-difference scan.
pub const SCAN_REL_TOL: f64 = 1e-7;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetectionOptions {
    pub constant_c: f64,
    pub rho: f64,
    /// Use this noise level instead of the second-difference MAD estimate.
    pub sigma_override: Option<f64>,
    pub enable_stage1: bool,
    pub enable_stage2: bool,
    pub zero_tolerance: f64,
}

impl Default for DetectionOptions {
    fn default() -> Self {
        DetectionOptions {
            constant_c: DEFAULT_C,
            rho: DEFAULT_RHO,
            sigma_override: None,
            enable_stage1: false,
            enable_stage2: false,
            zero_tolerance: DEFAULT_ZERO_TOLERANCE,
        }
    }
}

impl DetectionOptions {
    pub fn transform_options(&self) -> TransformOptions {
        TransformOptions { rho: self.rho, zero_tolerance: self.zero_tolerance }
    }

    pub fn validate(&self) -> Result<()> {
        self.transform_options().validate()?;
        if !(self.constant_c > 0.0 && self.constant_c.is_finite()) {
            return Err(Error::InvalidOption("threshold constant must be positive and finite"));
        }
        if let Some(s) = self.sigma_override {
            if !(s >= 0.0 && s.is_finite()) {
                return Err(Error::InvalidOption("sigma override must be finite and non-negative"));
            }
        }
        Ok(())
    }
}

/// Source of wall-clock readings in milliseconds. The core crate has no
/// clock of its own; [`NoClock`] reports zero everywhere.
pub trait Clock {
    fn now_ms(&self) -> f64;
}

#[derive(Clone, Copy, Debug, Default)]
pub struct NoClock;

impl Clock for NoClock {
    fn now_ms(&self) -> f64 {
        0.0
    }
}

/// Milliseconds spent in each stage.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StageTimings {
    pub sigma: f64,
    pub forward: f64,
    pub threshold: f64,
    pub inverse: f64,
    pub postprocess: f64,
    pub fit: f64,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct Diagnostics {
    /// Details with magnitude at or below this are never kept, whatever the
    /// threshold; it absorbs floating-point residue on exactly linear data.
    pub noise_floor: f64,
    /// Change-points of the thresholded estimate before post-processing.
    pub raw_changepoints: Vec<usize>,
    /// Second-difference cross-check of the thresholded estimate.
    pub scan: ChangepointScan,
    pub timings: StageTimings,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionResult {
    pub n_hat: usize,
    /// 1-based, sorted; each is the last index of a segment.
    pub changepoints: Vec<usize>,
    pub fitted: Series,
    pub segments: Vec<SegmentFit>,
    pub sigma_hat: f64,
    pub lambda: f64,
    pub n_details_kept: usize,
    pub scales_used: usize,
    pub timing_ms: f64,
    pub diagnostics: Diagnostics,
}

/// Floor below which a detail is treated as exact zero:
/// `zero_tolerance * max(1, max|x|) * sqrt(T)`.
pub fn noise_floor(x: &Series, zero_tolerance: f64) -> f64 {
    zero_tolerance * x.scale() * libm::sqrt(x.len() as f64)
}

/// Runs the full detection procedure without timing.
pub fn trendsegment(x: &Series, opts: &DetectionOptions) -> Result<DetectionResult> {
    trendsegment_with_clock(x, opts, &NoClock)
}

/// Runs the full detection procedure, timing each stage with `clock`.
pub fn trendsegment_with_clock(x: &Series, opts: &DetectionOptions, clock: &impl Clock) -> Result<DetectionResult> {
    opts.validate()?;
    let len = x.len();
    if len == 0 {
        return Err(Error::SeriesTooShort { len, min: 1 });
    }
    let t0 = clock.now_ms();
    if len < 3 {
        let segments = segments_from_changepoints(x, &[])?;
        let sigma_hat = opts.sigma_override.unwrap_or(0.0);
        let lambda = if len == 2 { threshold_value(len, opts.constant_c, sigma_hat).lambda } else { 0.0 };
        return Ok(DetectionResult {
            n_hat: 0,
            changepoints: Vec::new(),
            fitted: x.clone(),
            segments,
            sigma_hat,
            lambda,
            n_details_kept: 0,
            scales_used: 0,
            timing_ms: clock.now_ms() - t0,
            diagnostics: Diagnostics::default(),
        });
    }

    let mut timings = StageTimings::default();
    let mut mark = t0;
    let mut lap = |slot: &mut f64| {
        let now = clock.now_ms();
        *slot = now - mark;
        mark = now;
    };

    let sigma_hat = match opts.sigma_override {
        Some(s) => s,
        None => shrink::mad_sigma(x)?,
    };
    let spec = threshold_value(len, opts.constant_c, sigma_hat);
    let floor = noise_floor(x, opts.zero_tolerance);
    let effective = spec.lambda.max(floor);
    lap(&mut timings.sigma);

    let decomp = tguw_forward(x, &opts.transform_options())?;
    lap(&mut timings.forward);

    let mask = shrink::threshold(&decomp, effective);
    lap(&mut timings.threshold);

    let f_tilde = tguw_inverse(&decomp, &mask)?;
    let raw = extract_changepoints(&decomp, &mask);
    let scan = scan_changepoints(&f_tilde, &raw, SCAN_REL_TOL);
    lap(&mut timings.inverse);

    let mut cps = raw.clone();
    if opts.enable_stage1 {
        cps = postprocess::stage1(&f_tilde, &cps, x, effective, opts.zero_tolerance)?.changepoints;
    }
    if opts.enable_stage2 {
        cps = postprocess::stage2(x, &cps, effective, opts.zero_tolerance)?.changepoints;
    }
    lap(&mut timings.postprocess);

    let segments = segments_from_changepoints(x, &cps)?;
    let fitted = Series::from_vec_unchecked(evaluate_segments(&segments));
    lap(&mut timings.fit);

    Ok(DetectionResult {
        n_hat: cps.len(),
        changepoints: cps,
        fitted,
        segments,
        sigma_hat,
        lambda: spec.lambda,
        n_details_kept: mask.kept_count(),
        scales_used: decomp.scales,
        timing_ms: clock.now_ms() - t0,
        diagnostics: Diagnostics { noise_floor: floor, raw_changepoints: raw, scan, timings },
    })
}
