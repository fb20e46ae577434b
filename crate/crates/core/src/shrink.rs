// SPDX-License-Identifier: MIT OR Apache-2.0

//! Noise-level estimation, the universal-type threshold and the two
//! thresholding rules applied to TGUW details.

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::tguw::Decomposition;

/// Gaussian quantile at 3/4.
pub const PHI_INV_3_4: f64 = 0.674_489_750_196_081_7;

/// Default threshold constant.
pub const DEFAULT_C: f64 = 1.3;

/// Median of a mutable slice (midpoint of the two central order statistics
/// for even lengths). Reorders `v`.
pub(crate) fn median_in_place(v: &mut [f64]) -> f64 {
    let n = v.len();
    debug_assert!(n > 0);
    let mid = n / 2;
    let (lower, upper, _) = v.select_nth_unstable_by(mid, f64::total_cmp);
    let hi = *upper;
    if n % 2 == 1 {
        hi
    } else {
        let lo = lower.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        0.5 * (lo + hi)
    }
}

/// Robust noise level from second differences:
/// `median |X_t - 2 X_{t+1} + X_{t+2}| / (Phi^{-1}(3/4) sqrt 6)`.
///
/// Second differences annihilate straight lines, so the estimate is
/// insensitive to piecewise-linear trends with few change-points.
pub fn mad_sigma(x: &[f64]) -> Result<f64> {
    if x.len() < 3 {
        return Err(Error::SeriesTooShort { len: x.len(), min: 3 });
    }
    let mut diffs: Vec<f64> = x.windows(3).map(|w| (w[0] - 2.0 * w[1] + w[2]).abs()).collect();
    let med = median_in_place(&mut diffs);
    Ok(med / (PHI_INV_3_4 * libm::sqrt(6.0)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThresholdSpec {
    pub constant_c: f64,
    pub sigma_hat: f64,
    /// `C * sigma * sqrt(2 ln T)`.
    pub lambda: f64,
}

pub fn threshold_value(len: usize, c: f64, sigma: f64) -> ThresholdSpec {
    let lambda = c * sigma * libm::sqrt(2.0 * libm::log(len as f64));
    ThresholdSpec { constant_c: c, sigma_hat: sigma, lambda }
}

/// Keep/zero flag per merge record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoefficientMask {
    pub keep: Vec<bool>,
}

impl CoefficientMask {
    pub fn all(n: usize) -> Self {
        CoefficientMask { keep: vec![true; n] }
    }

    pub fn none(n: usize) -> Self {
        CoefficientMask { keep: vec![false; n] }
    }

    pub fn len(&self) -> usize {
        self.keep.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keep.is_empty()
    }

    pub fn kept_count(&self) -> usize {
        self.keep.iter().filter(|&&k| k).count()
    }

    /// `true` when every kept index is also kept in `other`.
    pub fn is_subset_of(&self, other: &CoefficientMask) -> bool {
        self.keep.len() == other.keep.len() && self.keep.iter().zip(&other.keep).all(|(&a, &b)| !a || b)
    }
}

/// "Connected" rule: a record survives iff it, or some record emitted no
/// later whose region is nested in its region, has `|d| > lambda`.
///
/// One chronological pass carries, per active region start, the running
/// maximum `|d|` of all details emitted inside that region.
pub fn apply_connected_rule(decomp: &Decomposition, lambda: f64) -> CoefficientMask {
    let mut running = vec![0.0_f64; decomp.length + 1];
    let keep = decomp
        .records
        .iter()
        .map(|rec| {
            let (p, q) = (rec.region.p - 1, rec.region.q);
            let m = running[p].max(running[q]).max(rec.detail.abs());
            running[p] = m;
            m > lambda
        })
        .collect();
    CoefficientMask { keep }
}

/// "Two together" rule: the two records of a Type 3 merge are kept or zeroed
/// jointly.
pub fn apply_two_together_rule(mask: &CoefficientMask, decomp: &Decomposition) -> CoefficientMask {
    let mut pairs: BTreeMap<u32, bool> = BTreeMap::new();
    for (rec, &k) in decomp.records.iter().zip(&mask.keep) {
        if let Some(id) = rec.pair_id {
            *pairs.entry(id).or_insert(false) |= k;
        }
    }
    let keep = decomp
        .records
        .iter()
        .zip(&mask.keep)
        .map(|(rec, &k)| match rec.pair_id {
            Some(id) => pairs[&id],
            None => k,
        })
        .collect();
    CoefficientMask { keep }
}

/// Both rules, in order.
pub fn threshold(decomp: &Decomposition, lambda: f64) -> CoefficientMask {
    apply_two_together_rule(&apply_connected_rule(decomp, lambda), decomp)
}
