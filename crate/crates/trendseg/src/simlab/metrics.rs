// SPDX-License-Identifier: MIT OR Apache-2.0

use trendseg_core::Error;

/// Directed distance: largest gap from a point of `a` to its nearest point
/// of `b`. Both slices sorted and non-empty.
fn directed(a: &[usize], b: &[usize]) -> usize {
    let mut j = 0;
    let mut worst = 0;
    for &x in a {
        while j + 1 < b.len() && b[j + 1] <= x {
            j += 1;
        }
        let mut best = x.abs_diff(b[j]);
        if j + 1 < b.len() {
            best = best.min(b[j + 1].abs_diff(x));
        }
        worst = worst.max(best);
    }
    worst
}

fn augmented(cps: &[usize], len: usize) -> Vec<usize> {
    let mut v = Vec::with_capacity(cps.len() + 2);
    v.push(0);
    v.extend_from_slice(cps);
    v.push(len);
    v
}

/// Scaled Hausdorff distance between two sorted change-point sets, both
/// augmented with `0` and `len` before comparing.
pub fn hausdorff(truth: &[usize], estimate: &[usize], len: usize) -> f64 {
    let a = augmented(truth, len);
    let b = augmented(estimate, len);
    directed(&a, &b).max(directed(&b, &a)) as f64 / len as f64
}

/// Mean squared difference.
pub fn mse(f: &[f64], f_hat: &[f64]) -> Result<f64, Error> {
    if f.len() != f_hat.len() {
        return Err(Error::LengthMismatch { left: f.len(), right: f_hat.len() });
    }
    if f.is_empty() {
        return Ok(0.0);
    }
    Ok(f.iter().zip(f_hat).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() / f.len() as f64)
}
