// SPDX-License-Identifier: MIT OR Apache-2.0

//! Construction of the 3x3 orthonormal merge matrix: one detail filter
//! orthogonal to the local constancy and linearity weights, completed by two
//! low-pass rows.

use crate::error::{Error, Result};

pub type Vec3 = [f64; 3];

/// Row-major 3x3 matrix; rows are `(l1, l2, h)` for a merge matrix.
pub type Mat3 = [[f64; 3]; 3];

/// Sign-rule tolerance for unit-norm vectors.
const UNIT_SIGN_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn dot(a: &Vec3, b: &Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

#[inline]
fn cross(a: &Vec3, b: &Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

#[inline]
fn norm(a: &Vec3) -> f64 {
    libm::sqrt(dot(a, a))
}

#[inline]
fn scaled(a: &Vec3, k: f64) -> Vec3 {
    [a[0] * k, a[1] * k, a[2] * k]
}

#[inline]
pub(crate) fn mat_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    [dot(&m[0], v), dot(&m[1], v), dot(&m[2], v)]
}

#[inline]
pub(crate) fn mat_t_vec(m: &Mat3, v: &Vec3) -> Vec3 {
    let mut out = [0.0; 3];
    for (row, &coef) in m.iter().zip(v) {
        for (o, &e) in out.iter_mut().zip(row) {
            *o += e * coef;
        }
    }
    out
}

/// Flips `v` so its first entry with magnitude above `tol` is positive.
fn apply_sign_rule(v: &mut Vec3, tol: f64) {
    if let Some(&lead) = v.iter().find(|c| c.abs() > tol) {
        if lead < 0.0 {
            *v = scaled(v, -1.0);
        }
    }
}

/// Unit 3-vector orthogonal to a triplet of constancy and linearity weights.
///
/// The detail coefficient of a triplet of smooth coefficients is its inner
/// product with this filter; it vanishes exactly when the raw observations
/// under the triplet lie on one straight line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DetailFilter(Vec3);

impl DetailFilter {
    pub fn coefficients(&self) -> Vec3 {
        self.0
    }

    /// Detail value `h . v`.
    pub fn apply(&self, v: &Vec3) -> f64 {
        dot(&self.0, v)
    }
}

/// Normalized cross product `wc x wl` with the first-nonzero-positive sign
/// convention.
///
/// Fails with [`Error::DegenerateWeights`] when
/// `|wc x wl| <= tol * |wc| * |wl|`, which never happens for weights produced
/// by the transform itself.
pub fn compute_detail_filter(wc: Vec3, wl: Vec3, tol: f64) -> Result<DetailFilter> {
    if wc.iter().chain(&wl).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateWeights);
    }
    let c = cross(&wc, &wl);
    let n = norm(&c);
    // Also rejects NaN and the all-zero case where both sides are 0.
    if n.is_nan() || n <= tol * norm(&wc) * norm(&wl) || n == 0.0 {
        return Err(Error::DegenerateWeights);
    }
    let mut h = scaled(&c, 1.0 / n);
    apply_sign_rule(&mut h, tol);
    Ok(DetailFilter(h))
}

/// Deterministic pair of low-pass rows completing `h` to an orthonormal basis.
///
/// Seeds are the two standard basis vectors least aligned with `h` (smallest
/// `|h_i|`, ties to the lower index), Gram-Schmidt orthonormalized against `h`
/// and then against each other in index order.
pub fn complete_orthonormal(h: &DetailFilter) -> (Vec3, Vec3) {
    let hv = h.0;
    let mut order = [0usize, 1, 2];
    order.sort_by(|&a, &b| hv[a].abs().total_cmp(&hv[b].abs()).then(a.cmp(&b)));
    let (mut a, mut b) = (order[0], order[1]);
    if b < a {
        core::mem::swap(&mut a, &mut b);
    }

    // e_a - h_a h: norm^2 = 1 - h_a^2 >= 2/3 since |h_a| is not the largest.
    let mut l1 = scaled(&hv, -hv[a]);
    l1[a] += 1.0;
    let l1 = scaled(&l1, 1.0 / norm(&l1));

    // e_b minus its projections onto h and l1: norm^2 = h_c^2 / (1 - h_a^2).
    let mut l2 = scaled(&hv, -hv[b]);
    l2[b] += 1.0;
    let k = l1[b];
    for (x, &y) in l2.iter_mut().zip(&l1) {
        *x -= k * y;
    }
    let mut l2 = scaled(&l2, 1.0 / norm(&l2));
    let mut l1 = l1;

    apply_sign_rule(&mut l1, UNIT_SIGN_TOL);
    apply_sign_rule(&mut l2, UNIT_SIGN_TOL);
    (l1, l2)
}

/// Merge matrix `(l1, l2, h)` for the given weight triplets.
pub fn merge_matrix(wc: Vec3, wl: Vec3, tol: f64) -> Result<Mat3> {
    let h = compute_detail_filter(wc, wl, tol)?;
    let (l1, l2) = complete_orthonormal(&h);
    Ok([l1, l2, h.0])
}

/// Max-abs entry of `M M^T - I`.
pub fn orthonormality_defect(m: &Mat3) -> f64 {
    let mut worst = 0.0_f64;
    for i in 0..3 {
        for j in 0..3 {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(&m[i], &m[j]) - target).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    const INV_SQRT6: f64 = 0.408_248_290_463_863;

    fn assert_close(a: Vec3, b: Vec3, tol: f64) {
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn filter_for_unit_spaced_triplet() {
        let h = compute_detail_filter([1.0, 1.0, 1.0], [3.0, 4.0, 5.0], 1e-12).unwrap();
        assert_close(h.coefficients(), [INV_SQRT6, -2.0 * INV_SQRT6, INV_SQRT6], 1e-12);
    }

    #[test]
    fn filter_is_shift_invariant_in_linear_weights() {
        let a = compute_detail_filter([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], 1e-12).unwrap();
        let b = compute_detail_filter([1.0, 1.0, 1.0], [3.0, 4.0, 5.0], 1e-12).unwrap();
        assert_close(a.coefficients(), b.coefficients(), 1e-12);
    }

    #[test]
    fn parallel_weights_are_degenerate() {
        assert_eq!(
            compute_detail_filter([1.0, 1.0, 1.0], [2.0, 2.0, 2.0], 1e-12),
            Err(Error::DegenerateWeights)
        );
        assert_eq!(
            compute_detail_filter([0.0; 3], [0.0; 3], 1e-12),
            Err(Error::DegenerateWeights)
        );
        assert_eq!(
            compute_detail_filter([f64::NAN, 1.0, 1.0], [1.0, 2.0, 3.0], 1e-12),
            Err(Error::DegenerateWeights)
        );
    }

    #[test]
    fn sign_rule_makes_first_entry_positive() {
        // wl x wc is the negated cross product; the sign rule restores it.
        let h = compute_detail_filter([3.0, 4.0, 5.0], [1.0, 1.0, 1.0], 1e-12).unwrap();
        assert!(h.coefficients()[0] > 0.0);
    }

    #[test]
    fn basis_vector_filter_keeps_seeds() {
        let (l1, l2) = complete_orthonormal(&DetailFilter([0.0, 0.0, 1.0]));
        assert_eq!(l1, [1.0, 0.0, 0.0]);
        assert_eq!(l2, [0.0, 1.0, 0.0]);
    }

    #[test]
    fn second_difference_filter_completes_to_orthonormal() {
        let m = merge_matrix([1.0, 1.0, 1.0], [1.0, 2.0, 3.0], 1e-12).unwrap();
        assert!(orthonormality_defect(&m) < 1e-12);
    }

    #[test]
    fn transpose_inverts() {
        let m = merge_matrix([1.0, 0.3, 2.0], [0.5, 7.0, -1.0], 1e-12).unwrap();
        let v = [0.25, -3.0, 8.5];
        let back = mat_t_vec(&m, &mat_vec(&m, &v));
        assert_close(back, v, 1e-12);
    }
}
