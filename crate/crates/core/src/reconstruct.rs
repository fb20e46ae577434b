// SPDX-License-Identifier: MIT OR Apache-2.0

//! Inverse transform, change-point extraction and basis materialization.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::series::Series;
use crate::shrink::CoefficientMask;
use crate::tguw::{mat_t_vec, mat_vec, Decomposition};

/// Default cap on `T` for [`materialize_basis`].
pub const DEFAULT_BASIS_CAP: usize = 2048;

/// Inverse transform of the masked coefficients: zeroed records contribute a
/// detail of 0, then every merge is undone by its transpose in reverse order.
pub fn tguw_inverse(decomp: &Decomposition, mask: &CoefficientMask) -> Result<Series> {
    if mask.len() != decomp.records.len() {
        return Err(Error::MaskLengthMismatch { expected: decomp.records.len(), got: mask.len() });
    }
    let mut y = vec![0.0; decomp.length];
    for (rec, &keep) in decomp.records.iter().zip(&mask.keep) {
        if keep {
            y[rec.slots[2]] = rec.detail;
        }
    }
    y[0] = decomp.smooth1;
    y[1] = decomp.smooth2;
    for rec in decomp.records.iter().rev() {
        let v = rec.slots.map(|i| y[i]);
        let back = mat_t_vec(&rec.lambda, &v);
        for (&i, b) in rec.slots.iter().zip(back) {
            y[i] = b;
        }
    }
    Ok(Series::from_vec_unchecked(y))
}

/// Sorted, deduplicated change-points `q` of the kept records (1-based, last
/// index of the segment before the change). The two records of a Type 3
/// merge share `q` and so contribute one change-point.
pub fn extract_changepoints(decomp: &Decomposition, mask: &CoefficientMask) -> Vec<usize> {
    let mut cps: Vec<usize> = decomp
        .records
        .iter()
        .zip(&mask.keep)
        .filter(|(_, &k)| k)
        .map(|(rec, _)| rec.region.q)
        .collect();
    cps.sort_unstable();
    cps.dedup();
    cps
}

/// Dense row-major `T x T` matrix of basis vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct Basis {
    pub size: usize,
    pub data: Vec<f64>,
}

impl Basis {
    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.size..(i + 1) * self.size]
    }

    /// `Psi x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        (0..self.size)
            .map(|i| self.row(i).iter().zip(x).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// Max-abs entry of `Psi Psi^T - I`.
    pub fn orthonormality_defect(&self) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..self.size {
            for j in i..self.size {
                let d: f64 = self.row(i).iter().zip(self.row(j)).map(|(a, b)| a * b).sum();
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((d - target).abs());
            }
        }
        worst
    }
}

/// Rows: the two smooth basis vectors, then one basis vector per record in
/// chronological order. Built by replaying every merge on the identity.
pub fn materialize_basis(decomp: &Decomposition, cap: usize) -> Result<Basis> {
    let n = decomp.length;
    if n > cap {
        return Err(Error::CapExceeded { len: n, cap });
    }
    // Row `i` of `rows` is the current linear functional held in slot `i`.
    let mut rows = vec![0.0; n * n];
    for i in 0..n {
        rows[i * n + i] = 1.0;
    }
    for rec in &decomp.records {
        let [a, b, c] = rec.slots;
        for col in 0..n {
            let v = [rows[a * n + col], rows[b * n + col], rows[c * n + col]];
            let out = mat_vec(&rec.lambda, &v);
            rows[a * n + col] = out[0];
            rows[b * n + col] = out[1];
            rows[c * n + col] = out[2];
        }
    }
    let mut data = Vec::with_capacity(n * n);
    let order = [0usize, 1].into_iter().chain(decomp.records.iter().map(|r| r.slots[2]));
    for slot in order {
        data.extend_from_slice(&rows[slot * n..(slot + 1) * n]);
    }
    Ok(Basis { size: n, data })
}

/// Outcome of cross-checking extracted change-points against the kinks of a
/// reconstructed signal.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ChangepointScan {
    /// 1-based centres `t` with `|f_{t-1} - 2 f_t + f_{t+1}|` above the
    /// threshold.
    pub kinks: Vec<usize>,
    /// Change-points with no kink at `eta` or `eta + 1`.
    pub unsupported: Vec<usize>,
    /// Kinks not adjacent to any change-point.
    pub unexplained: Vec<usize>,
}

impl ChangepointScan {
    pub fn agrees(&self) -> bool {
        self.unsupported.is_empty() && self.unexplained.is_empty()
    }
}

/// Second-difference scan of `fitted` with threshold
/// `rel_tol * max(1, max |f|)`. Disagreements are reported, not resolved.
pub fn scan_changepoints(fitted: &[f64], changepoints: &[usize], rel_tol: f64) -> ChangepointScan {
    let scale = fitted.iter().fold(1.0_f64, |m, v| m.max(v.abs()));
    let thr = rel_tol * scale;
    let kinks: Vec<usize> = fitted
        .windows(3)
        .enumerate()
        .filter(|(_, w)| (w[0] - 2.0 * w[1] + w[2]).abs() > thr)
        .map(|(i, _)| i + 2)
        .collect();
    let has = |v: &[usize], t: usize| v.binary_search(&t).is_ok();
    let unsupported = changepoints
        .iter()
        .copied()
        .filter(|&eta| !has(&kinks, eta) && !has(&kinks, eta + 1))
        .collect();
    let unexplained = kinks
        .iter()
        .copied()
        .filter(|&t| !has(changepoints, t) && !has(changepoints, t - 1))
        .collect();
    ChangepointScan { kinks, unsupported, unexplained }
}
