// SPDX-License-Identifier: MIT OR Apache-2.0

//! Optional two-stage post-processing of the thresholded estimate, plus the
//! per-segment least-squares fits used for every final estimate.

use alloc::collections::BinaryHeap;
use alloc::vec::Vec;
use core::cmp::{Ordering, Reverse};

use crate::error::{Error, Result};
use crate::series::Series;
use crate::tguw::{compute_detail_filter, type3_details, MergeEngine};

/// A fitted segment `[start, end]` (1-based, inclusive).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SegmentFit {
    pub start: usize,
    pub end: usize,
    pub intercept: f64,
    pub slope: f64,
    /// Single-point segment; the fit reproduces the observation.
    pub is_anomaly: bool,
}

impl SegmentFit {
    pub fn value_at(&self, t: usize) -> f64 {
        if self.is_anomaly {
            self.intercept
        } else {
            self.intercept + self.slope * t as f64
        }
    }

    pub fn len(&self) -> usize {
        self.end - self.start + 1
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

/// Least-squares line through `{(t, x_t) : start <= t <= end}`; a single
/// point is returned as an anomaly fit equal to the observation.
pub fn ols_segment_fit(x: &[f64], start: usize, end: usize) -> Result<SegmentFit> {
    if start == 0 || start > end || end > x.len() {
        return Err(Error::IndexOutOfRange { start, end, len: x.len() });
    }
    if start == end {
        return Ok(SegmentFit { start, end, intercept: x[start - 1], slope: 0.0, is_anomaly: true });
    }
    let seg = &x[start - 1..end];
    let n = seg.len() as f64;
    let t_mean = 0.5 * (start + end) as f64;
    let x_mean = seg.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (i, &v) in seg.iter().enumerate() {
        let dt = (start + i) as f64 - t_mean;
        sxy += dt * (v - x_mean);
        sxx += dt * dt;
    }
    let slope = sxy / sxx;
    Ok(SegmentFit { start, end, intercept: x_mean - slope * t_mean, slope, is_anomaly: false })
}

/// Fits over `[eta_{i-1} + 1, eta_i]` with `eta_0 = 0` and `eta_{N+1} = T`.
pub fn segments_from_changepoints(x: &[f64], changepoints: &[usize]) -> Result<Vec<SegmentFit>> {
    let mut out = Vec::with_capacity(changepoints.len() + 1);
    let mut start = 1;
    for &eta in changepoints.iter().chain(core::iter::once(&x.len())) {
        out.push(ols_segment_fit(x, start, eta)?);
        start = eta + 1;
    }
    Ok(out)
}

/// Evaluates tiling segments on `1..=T`.
pub fn evaluate_segments(segments: &[SegmentFit]) -> Vec<f64> {
    segments.iter().flat_map(|s| (s.start..=s.end).map(move |t| s.value_at(t))).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PostprocessOutput {
    pub changepoints: Vec<usize>,
    pub segments: Vec<SegmentFit>,
    pub fitted: Series,
}

fn finish(x: &Series, changepoints: Vec<usize>) -> Result<PostprocessOutput> {
    let segments = segments_from_changepoints(x, &changepoints)?;
    let fitted = Series::from_vec_unchecked(evaluate_segments(&segments));
    Ok(PostprocessOutput { changepoints, segments, fitted })
}

#[derive(Clone, Copy, Debug)]
struct HeapItem {
    summary: f64,
    p: usize,
    r: usize,
    start: usize,
    stamp: u32,
}

impl PartialEq for HeapItem {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> Ordering {
        self.summary
            .total_cmp(&other.summary)
            .then(self.p.cmp(&other.p))
            .then(self.r.cmp(&other.r))
            .then(self.stamp.cmp(&other.stamp))
    }
}

/// Stage 1: re-runs the transform on `f_tilde` greedily (one merge per pass,
/// always the globally smallest summary detail) and stops before the first
/// merge whose summary detail exceeds `lambda`.
///
/// A change-point of `f_tilde` survives if no performed merge straddles it.
/// The output is refitted by least squares on `x` over the surviving
/// segments.
pub fn stage1(
    f_tilde: &Series,
    changepoints: &[usize],
    x: &Series,
    lambda: f64,
    zero_tolerance: f64,
) -> Result<PostprocessOutput> {
    if f_tilde.len() != x.len() {
        return Err(Error::LengthMismatch { left: f_tilde.len(), right: x.len() });
    }
    if x.len() < 3 {
        return finish(x, Vec::new());
    }
    let mut engine = MergeEngine::new(f_tilde, zero_tolerance);
    let mut heap = BinaryHeap::new();
    let mut scale = 0;
    while engine.alpha() > 2 {
        engine.refresh(|c, start, stamp| {
            heap.push(Reverse(HeapItem { summary: c.summary, p: c.region.p, r: c.region.r, start, stamp }));
        })?;
        let best = loop {
            match heap.pop() {
                Some(Reverse(item)) => {
                    if let Some(c) = engine.cached(item.start, item.stamp) {
                        break Some(*c);
                    }
                }
                None => break None,
            }
        };
        let Some(best) = best else { break };
        if best.summary > lambda {
            break;
        }
        scale += 1;
        engine.apply(&best, scale)?;
    }
    let mut ends: Vec<usize> = engine.units().iter().map(|u| u.end).collect();
    ends.pop();
    let surviving = changepoints.iter().copied().filter(|eta| ends.binary_search(eta).is_ok()).collect();
    finish(x, surviving)
}

/// Two smooth coefficients (or one, for a single point) summarizing `x` on
/// `[a, b]`, with the matching constancy and linearity weights.
enum LocalSummary {
    Point { s: f64, wl: f64 },
    Line { s: [f64; 2], wc: [f64; 2], wl: [f64; 2] },
}

fn summarize(x: &[f64], a: usize, b: usize) -> LocalSummary {
    if a == b {
        return LocalSummary::Point { s: x[a - 1], wl: a as f64 };
    }
    let seg = &x[a - 1..b];
    let n = seg.len() as f64;
    let root_n = libm::sqrt(n);
    let t_mean = 0.5 * (a + b) as f64;
    let spread = libm::sqrt(seg.iter().enumerate().map(|(i, _)| {
        let dt = (a + i) as f64 - t_mean;
        dt * dt
    }).sum::<f64>());
    let mut s = [0.0; 2];
    for (i, &v) in seg.iter().enumerate() {
        s[0] += v;
        s[1] += v * ((a + i) as f64 - t_mean);
    }
    // Orthonormal basis of lines on [a, b]: 1/sqrt(n) and (t - mean)/spread.
    s[0] /= root_n;
    s[1] /= spread;
    LocalSummary::Line { s, wc: [root_n, 0.0], wl: [t_mean * root_n, spread] }
}

/// Local contrast of `x` on `[p, r]` split after `q`, built from fresh
/// least-squares summaries of the two halves and the transform's own merge
/// arithmetic. Zero when both halves are single points.
pub fn local_detail(x: &[f64], p: usize, q: usize, r: usize, zero_tolerance: f64) -> Result<f64> {
    let [d1, d2] = local_contrasts(x, p, q, r, zero_tolerance)?;
    Ok(d1.abs().max(d2.abs()))
}

/// Signed detail values behind [`local_detail`]; the second entry is zero
/// unless both halves span at least two points.
pub fn local_contrasts(x: &[f64], p: usize, q: usize, r: usize, zero_tolerance: f64) -> Result<[f64; 2]> {
    if p == 0 || p > q || q >= r || r > x.len() {
        return Err(Error::IndexOutOfRange { start: p, end: r, len: x.len() });
    }
    use LocalSummary::{Line, Point};
    let d = match (summarize(x, p, q), summarize(x, q + 1, r)) {
        (Point { .. }, Point { .. }) => [0.0, 0.0],
        (Point { s: s0, wl: w0 }, Line { s, wc, wl }) => {
            let h = compute_detail_filter([1.0, wc[0], wc[1]], [w0, wl[0], wl[1]], zero_tolerance)?;
            [h.apply(&[s0, s[0], s[1]]), 0.0]
        }
        (Line { s, wc, wl }, Point { s: s0, wl: w0 }) => {
            let h = compute_detail_filter([wc[0], wc[1], 1.0], [wl[0], wl[1], w0], zero_tolerance)?;
            [h.apply(&[s[0], s[1], s0]), 0.0]
        }
        (Line { s: sl, wc: cl, wl: ll }, Line { s: sr, wc: cr, wl: lr }) => {
            let (d1, d2) = type3_details(
                [sl[0], sl[1], sr[0], sr[1]],
                [cl[0], cl[1], cr[0], cr[1]],
                [ll[0], ll[1], lr[0], lr[1]],
                zero_tolerance,
            )?;
            [d1, d2]
        }
    };
    Ok(d)
}

/// `(p_i, q_i, r_i)` for change-point `i` of `cps` (0-based), using
/// `eta_0 = 0` and `eta_{N+1} = T`.
pub fn stage2_region(cps: &[usize], i: usize, len: usize) -> (usize, usize, usize) {
    let before = if i == 0 { 0 } else { cps[i - 1] };
    let after = cps.get(i + 1).copied().unwrap_or(len);
    let q = cps[i];
    ((before + q) / 2 + 1, q, (q + after).div_ceil(2))
}

/// Stage 2: repeatedly removes the change-point with the smallest local
/// contrast while that contrast is `<= lambda`.
pub fn stage2(x: &Series, changepoints: &[usize], lambda: f64, zero_tolerance: f64) -> Result<PostprocessOutput> {
    let len = x.len();
    let mut cps = changepoints.to_vec();
    if cps.iter().any(|&c| c == 0 || c >= len) || cps.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidOption("change-points must be strictly increasing inside 1..T-1"));
    }
    let contrast = |cps: &[usize], i: usize| -> Result<f64> {
        let (p, q, r) = stage2_region(cps, i, len);
        local_detail(x, p, q, r, zero_tolerance)
    };
    let mut details = (0..cps.len()).map(|i| contrast(&cps, i)).collect::<Result<Vec<_>>>()?;
    while !details.is_empty() {
        let (i0, &d0) = details
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1).then(a.0.cmp(&b.0)))
            .expect("non-empty");
        if d0 > lambda {
            break;
        }
        cps.remove(i0);
        details.remove(i0);
        if i0 > 0 {
            details[i0 - 1] = contrast(&cps, i0 - 1)?;
        }
        if i0 < cps.len() {
            details[i0] = contrast(&cps, i0)?;
        }
    }
    finish(x, cps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn exact_line_fit() {
        let x: Vec<f64> = (1..=10).map(|t| 2.0 + 3.0 * t as f64).collect();
        let fit = ols_segment_fit(&x, 1, 10).unwrap();
        assert!((fit.intercept - 2.0).abs() < 1e-12 && (fit.slope - 3.0).abs() < 1e-12);
        assert!(!fit.is_anomaly);
    }

    #[test]
    fn single_point_is_anomaly() {
        let mut x = vec![0.0; 8];
        x[4] = 7.2;
        let fit = ols_segment_fit(&x, 5, 5).unwrap();
        assert!(fit.is_anomaly);
        assert_eq!(fit.value_at(5), 7.2);
    }

    #[test]
    fn three_point_fit() {
        let fit = ols_segment_fit(&[0.0, 1.0, 3.0], 1, 3).unwrap();
        assert!((fit.intercept + 5.0 / 3.0).abs() < 1e-12);
        assert!((fit.slope - 1.5).abs() < 1e-12);
    }

    #[test]
    fn two_point_fit_interpolates() {
        let fit = ols_segment_fit(&[1.0, 4.0, -2.0], 2, 3).unwrap();
        assert!((fit.value_at(2) - 4.0).abs() < 1e-12);
        assert!((fit.value_at(3) + 2.0).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_bad_ranges() {
        let x = [1.0, 2.0, 3.0];
        assert!(ols_segment_fit(&x, 0, 2).is_err());
        assert!(ols_segment_fit(&x, 3, 2).is_err());
        assert!(ols_segment_fit(&x, 2, 4).is_err());
    }

    #[test]
    fn stage2_region_formulas() {
        assert_eq!(stage2_region(&[30], 0, 70), (16, 30, 50));
        assert_eq!(stage2_region(&[10, 20, 31], 1, 40), (16, 20, 26));
    }

    #[test]
    fn local_detail_vanishes_on_lines() {
        let x: Vec<f64> = (1..=40).map(|t| -1.0 + 0.25 * t as f64).collect();
        for (p, q, r) in [(1, 1, 10), (3, 20, 21), (5, 19, 33), (1, 2, 3)] {
            assert!(local_detail(&x, p, q, r, 1e-12).unwrap() < 1e-10);
        }
        assert_eq!(local_detail(&x, 4, 4, 5, 1e-12).unwrap(), 0.0);
    }

    fn rss(x: &[f64], a: usize, b: usize) -> f64 {
        let fit = ols_segment_fit(x, a, b).unwrap();
        (a..=b).map(|t| (x[t - 1] - fit.value_at(t)).powi(2)).sum()
    }

    /// The contrasts are orthonormal coordinates of the two-line fit's
    /// improvement over one line: `d1^2 + d2^2 = RSS(one) - RSS(two)`.
    #[test]
    fn contrast_energy_matches_residual_reduction() {
        let x: Vec<f64> = (1..=40)
            .map(|t| if t <= 20 { 0.1 * t as f64 } else { 5.0 - 0.3 * t as f64 } + libm::sin(t as f64))
            .collect();
        for (p, q, r) in [(11, 20, 30), (1, 1, 9), (3, 12, 13), (2, 5, 39)] {
            let [d1, d2] = local_contrasts(&x, p, q, r, 1e-12).unwrap();
            let expect = rss(&x, p, r)
                - if q > p { rss(&x, p, q) } else { 0.0 }
                - if r > q + 1 { rss(&x, q + 1, r) } else { 0.0 };
            assert!((d1 * d1 + d2 * d2 - expect).abs() < 1e-9 * expect.max(1.0), "{p} {q} {r}");
        }
    }

    #[test]
    fn local_detail_sees_a_jump() {
        let x: Vec<f64> = (1..=40).map(|t| if t <= 20 { 0.0 } else { 5.0 }).collect();
        let [d1, d2] = local_contrasts(&x, 11, 20, 30, 1e-12).unwrap();
        // One line through a centred step of 5 over 20 points leaves this
        // residual sum of squares (computed offline with numpy.polyfit).
        let expect = 31.015_037_593_984_964;
        assert!((rss(&x, 11, 30) - expect).abs() < 1e-9);
        assert!((d1 * d1 + d2 * d2 - expect).abs() < 1e-9 * expect);
        assert!(local_detail(&x, 11, 20, 30, 1e-12).unwrap() > 3.0);
    }
}
