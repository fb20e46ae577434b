// SPDX-License-Identifier: MIT OR Apache-2.0

//! Tail-greedy unbalanced wavelet (TGUW) transform.
//!
//! The forward transform repeatedly merges adjacent regions of the series via
//! data-adaptive 3x3 orthonormal matrices. Each merge replaces three smooth
//! coefficients by two smooth coefficients describing the best local line and
//! one detail coefficient measuring the departure from linearity. Merges
//! with the smallest details go first; up to `max(2, ceil(rho * alpha))`
//! non-overlapping merges are performed per pass. After `T - 2` merges the
//! series is represented by two smooth coefficients (the global line) and
//! `T - 2` details, and the map is orthonormal conditional on the merge order.

mod engine;
mod filter;
mod merge;

use alloc::vec::Vec;

pub(crate) use engine::MergeEngine;
pub use filter::{
    complete_orthonormal, compute_detail_filter, merge_matrix, orthonormality_defect, DetailFilter, Mat3, Vec3,
};
pub(crate) use filter::{mat_t_vec, mat_vec};
pub(crate) use merge::type3_details;
pub use merge::{
    apply_merge, candidate_details, extract_merge_set, initial_units, merge_budget, ActiveUnit, Candidate,
    CandidateKind, MergeRecord, MergeType, Region, UnitKind, WeightState,
};

use crate::error::{Error, Result};
use crate::series::Series;

/// Default tail-greediness fraction.
pub const DEFAULT_RHO: f64 = 0.04;
/// Default magnitude below which a computed quantity is treated as zero.
pub const DEFAULT_ZERO_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TransformOptions {
    /// Fraction of the remaining smooth coefficients that may be merged in
    /// one pass; must lie in `(0, 1)`.
    pub rho: f64,
    pub zero_tolerance: f64,
}

impl Default for TransformOptions {
    fn default() -> Self {
        TransformOptions { rho: DEFAULT_RHO, zero_tolerance: DEFAULT_ZERO_TOLERANCE }
    }
}

impl TransformOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.rho > 0.0 && self.rho < 1.0) {
            return Err(Error::InvalidOption("rho must lie in (0, 1)"));
        }
        if !(self.zero_tolerance >= 0.0 && self.zero_tolerance.is_finite()) {
            return Err(Error::InvalidOption("zero_tolerance must be finite and non-negative"));
        }
        Ok(())
    }
}

/// Complete output of the forward transform; sufficient to invert exactly.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// Merge records in application order; `T - 2` of them.
    pub records: Vec<MergeRecord>,
    pub smooth1: f64,
    pub smooth2: f64,
    pub length: usize,
    pub options: TransformOptions,
    /// Number of passes performed.
    pub scales: usize,
}

impl Decomposition {
    pub fn details(&self) -> impl Iterator<Item = f64> + '_ {
        self.records.iter().map(|r| r.detail)
    }

    /// `(smooth1, smooth2, d_1, ..., d_{T-2})` with details in chronological
    /// order.
    pub fn coefficients(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.length);
        out.push(self.smooth1);
        out.push(self.smooth2);
        out.extend(self.details());
        out
    }

    /// Sum of squared coefficients; equals `sum x_t^2` up to rounding.
    pub fn energy(&self) -> f64 {
        self.coefficients().iter().map(|c| c * c).sum()
    }

    /// `(j, k)` labels: pass number and 1-based position within that pass.
    pub fn scale_location_labels(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::with_capacity(self.records.len());
        let mut current = (0, 0);
        for rec in &self.records {
            if rec.scale != current.0 {
                current = (rec.scale, 0);
            }
            current.1 += 1;
            out.push(current);
        }
        out
    }
}

/// Forward TGUW transform with tail-greedy merging.
pub fn tguw_forward(x: &Series, opts: &TransformOptions) -> Result<Decomposition> {
    opts.validate()?;
    if x.len() < 3 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 3 });
    }
    let mut engine = MergeEngine::new(x, opts.zero_tolerance);
    let mut scale = 0;
    while engine.alpha() > 2 {
        scale += 1;
        engine.refresh(|_, _, _| {})?;
        let mut cands = engine.candidates();
        cands.sort_unstable_by(|a, b| a.priority_cmp(b));
        let chosen = extract_merge_set(&cands, opts.rho, engine.alpha());
        debug_assert!(!chosen.is_empty());
        for i in chosen {
            engine.apply(&cands[i], scale)?;
        }
    }
    debug_assert_eq!(engine.units().len(), 1);
    let (state, records) = engine.into_parts();
    Ok(Decomposition {
        records,
        smooth1: state.s[0],
        smooth2: state.s[1],
        length: x.len(),
        options: *opts,
        scales: scale,
    })
}
