// SPDX-License-Identifier: MIT OR Apache-2.0

use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::filter::{compute_detail_filter, dot, mat_vec, merge_matrix, Mat3, Vec3};
use crate::error::{Error, Result};
use crate::series::Series;

/// Working coefficient vector together with the constancy and linearity
/// weights carried through every merge.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightState {
    pub wc: Vec<f64>,
    pub wl: Vec<f64>,
    pub s: Vec<f64>,
}

impl WeightState {
    /// `wc = 1`, `wl = (1, 2, ..., T)`, `s = x`.
    pub fn new(x: &Series) -> Self {
        let n = x.len();
        WeightState {
            wc: vec![1.0; n],
            wl: (1..=n).map(|t| t as f64).collect(),
            s: x.to_vec(),
        }
    }

    fn gather(&self, slots: [usize; 3]) -> (Vec3, Vec3, Vec3) {
        (
            slots.map(|i| self.s[i]),
            slots.map(|i| self.wc[i]),
            slots.map(|i| self.wl[i]),
        )
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum UnitKind {
    /// An untouched observation: one smooth coefficient.
    Initial,
    /// A merged region: two smooth coefficients that never separate again.
    Paired,
}

/// One element of the ordered partition of `1..=T` into regions that still
/// carry smooth coefficients.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ActiveUnit {
    pub kind: UnitKind,
    /// 1-based first index of the region.
    pub start: usize,
    /// 1-based last index of the region.
    pub end: usize,
}

impl ActiveUnit {
    pub fn initial(t: usize) -> Self {
        ActiveUnit { kind: UnitKind::Initial, start: t, end: t }
    }

    pub fn paired(start: usize, end: usize) -> Self {
        debug_assert!(end > start);
        ActiveUnit { kind: UnitKind::Paired, start, end }
    }

    /// 0-based positions of this unit's smooth coefficients. A paired unit
    /// always keeps them in the first two positions of its region.
    pub fn slots(&self) -> core::ops::Range<usize> {
        self.start - 1..self.start - 1 + self.smooth_count()
    }

    #[inline]
    pub(crate) fn slot(&self, k: usize) -> usize {
        self.start - 1 + k
    }

    pub fn smooth_count(&self) -> usize {
        match self.kind {
            UnitKind::Initial => 1,
            UnitKind::Paired => 2,
        }
    }
}

/// Initial partition: every observation is its own unit.
pub fn initial_units(len: usize) -> Vec<ActiveUnit> {
    (1..=len).map(ActiveUnit::initial).collect()
}

/// 1-based `(p, q, r)`: the merged data region is `[p, r]`, with `[p, q]` the
/// left part and `[q + 1, r]` the right part.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Region {
    pub p: usize,
    pub q: usize,
    pub r: usize,
}

impl Region {
    pub fn new(p: usize, q: usize, r: usize) -> Self {
        debug_assert!(p <= q && q < r);
        Region { p, q, r }
    }

    pub fn contains(&self, other: &Region) -> bool {
        self.p <= other.p && other.r <= self.r
    }

    pub fn overlaps(&self, other: &Region) -> bool {
        self.p <= other.r && other.p <= self.r
    }
}

/// Which combination of adjacent units a candidate merges.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CandidateKind {
    /// Three adjacent initial units.
    Type1,
    /// An initial unit followed by a paired unit.
    Type2Left,
    /// A paired unit followed by an initial unit.
    Type2Right,
    /// Two adjacent paired units, merged in two chained steps.
    Type3,
}

/// Tag of an emitted merge record.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum MergeType {
    Type1,
    Type2Left,
    Type2Right,
    Type3First,
    Type3Second,
}

impl MergeType {
    pub fn is_type3(self) -> bool {
        matches!(self, MergeType::Type3First | MergeType::Type3Second)
    }
}

/// A legal merge of adjacent active units together with its summary detail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Candidate {
    pub kind: CandidateKind,
    pub region: Region,
    /// `|d|`, or `max(|d1|, |d2|)` for a two-step merge.
    pub summary: f64,
    /// Signed detail values; the second entry is only meaningful for Type 3.
    pub details: [f64; 2],
    units: [ActiveUnit; 3],
    n_units: u8,
}

impl Candidate {
    /// The active units consumed by this merge, left to right.
    pub fn units(&self) -> &[ActiveUnit] {
        &self.units[..self.n_units as usize]
    }

    pub fn records_emitted(&self) -> usize {
        match self.kind {
            CandidateKind::Type3 => 2,
            _ => 1,
        }
    }

    /// Merge priority: smaller summary first, ties to smaller `p`, then `r`.
    pub fn priority_cmp(&self, other: &Candidate) -> Ordering {
        self.summary
            .total_cmp(&other.summary)
            .then(self.region.p.cmp(&other.region.p))
            .then(self.region.r.cmp(&other.region.r))
    }
}

/// One applied orthonormal 3x3 merge.
#[derive(Clone, Debug, PartialEq)]
pub struct MergeRecord {
    /// 1-based pass number at which the merge was performed.
    pub scale: usize,
    pub merge_type: MergeType,
    pub region: Region,
    /// Rows `(l1, l2, h)`.
    pub lambda: Mat3,
    /// 0-based working positions transformed; the detail lands in `slots[2]`.
    pub slots: [usize; 3],
    pub detail: f64,
    /// Shared by the two records of one Type 3 merge.
    pub pair_id: Option<u32>,
}

/// Result of one orthonormal step: matrix plus transformed triplets.
struct Step {
    lambda: Mat3,
    s: Vec3,
    wc: Vec3,
    wl: Vec3,
}

fn step(s: Vec3, wc: Vec3, wl: Vec3, tol: f64) -> Result<Step> {
    let lambda = merge_matrix(wc, wl, tol)?;
    let s = mat_vec(&lambda, &s);
    let mut wc = mat_vec(&lambda, &wc);
    let mut wl = mat_vec(&lambda, &wl);
    // Algebraically zero; pin it so rounding residue cannot accumulate.
    wc[2] = 0.0;
    wl[2] = 0.0;
    Ok(Step { lambda, s, wc, wl })
}

fn detail_of(s: &Vec3, wc: Vec3, wl: Vec3, tol: f64) -> Result<f64> {
    let h = compute_detail_filter(wc, wl, tol)?;
    Ok(dot(&h.coefficients(), s))
}

/// Two-step Type 3 contrast over four smooth coefficients
/// `(left1, left2, right1, right2)`; returns `(d1, d2)`.
pub(crate) fn type3_details(s: [f64; 4], wc: [f64; 4], wl: [f64; 4], tol: f64) -> Result<(f64, f64)> {
    let first = step([s[0], s[1], s[2]], [wc[0], wc[1], wc[2]], [wl[0], wl[1], wl[2]], tol)?;
    let d1 = first.s[2];
    let d2 = detail_of(
        &[first.s[0], first.s[1], s[3]],
        [first.wc[0], first.wc[1], wc[3]],
        [first.wl[0], first.wl[1], wl[3]],
        tol,
    )?;
    Ok((d1, d2))
}

/// Evaluates the candidate formed by the leftmost units of `window`, if the
/// "two together" rule admits one. `window` holds up to three consecutive
/// active units.
pub(crate) fn candidate_at(state: &WeightState, window: &[ActiveUnit], tol: f64) -> Result<Option<Candidate>> {
    use UnitKind::{Initial, Paired};
    let (a, b) = match window {
        [a, b, ..] => (*a, *b),
        _ => return Ok(None),
    };
    let pad = a;
    let single = |kind, region, slots: [usize; 3], units: [ActiveUnit; 3], n| -> Result<Option<Candidate>> {
        let (s, wc, wl) = state.gather(slots);
        let d = detail_of(&s, wc, wl, tol)?;
        Ok(Some(Candidate { kind, region, summary: d.abs(), details: [d, 0.0], units, n_units: n }))
    };
    match (a.kind, b.kind) {
        (Initial, Initial) => match window.get(2) {
            Some(c) if c.kind == Initial => single(
                CandidateKind::Type1,
                Region::new(a.start, a.start + 1, a.start + 2),
                [a.slot(0), b.slot(0), c.slot(0)],
                [a, b, *c],
                3,
            ),
            _ => Ok(None),
        },
        (Initial, Paired) => single(
            CandidateKind::Type2Left,
            Region::new(a.start, a.start, b.end),
            [a.slot(0), b.slot(0), b.slot(1)],
            [a, b, pad],
            2,
        ),
        (Paired, Initial) => single(
            CandidateKind::Type2Right,
            Region::new(a.start, a.end, b.end),
            [a.slot(0), a.slot(1), b.slot(0)],
            [a, b, pad],
            2,
        ),
        (Paired, Paired) => {
            let slots = [a.slot(0), a.slot(1), b.slot(0), b.slot(1)];
            let (d1, d2) = type3_details(
                slots.map(|i| state.s[i]),
                slots.map(|i| state.wc[i]),
                slots.map(|i| state.wl[i]),
                tol,
            )?;
            Ok(Some(Candidate {
                kind: CandidateKind::Type3,
                region: Region::new(a.start, a.end, b.end),
                summary: d1.abs().max(d2.abs()),
                details: [d1, d2],
                units: [a, b, pad],
                n_units: 2,
            }))
        }
    }
}

/// Every merge candidate admissible for the current partition, in left to
/// right order.
pub fn candidate_details(state: &WeightState, units: &[ActiveUnit], tol: f64) -> Result<Vec<Candidate>> {
    let mut out = Vec::new();
    for i in 0..units.len() {
        let hi = (i + 3).min(units.len());
        if let Some(c) = candidate_at(state, &units[i..hi], tol)? {
            out.push(c);
        }
    }
    Ok(out)
}

/// Merge budget for one pass: `max(2, ceil(rho * alpha))`.
pub fn merge_budget(rho: f64, alpha: usize) -> usize {
    let tail = libm::ceil(rho * alpha as f64) as usize;
    tail.max(2)
}

/// Greedy non-overlapping extraction from `candidates` (already sorted by
/// [`Candidate::priority_cmp`]). Returns indices into `candidates`.
///
/// The budget counts merges, so a Type 3 candidate uses two slots. A
/// candidate that overlaps an earlier pick or no longer fits in the budget
/// is skipped and the scan goes on.
pub fn extract_merge_set(candidates: &[Candidate], rho: f64, alpha: usize) -> Vec<usize> {
    let budget = merge_budget(rho, alpha);
    // Selected regions are disjoint, so the only possible clash for `[p, r]`
    // is the selected region with the largest start `<= r`.
    let mut taken: BTreeMap<usize, usize> = BTreeMap::new();
    let mut chosen = Vec::new();
    let mut used = 0;
    for (i, c) in candidates.iter().enumerate() {
        if used == budget {
            break;
        }
        let cost = c.records_emitted();
        if used + cost > budget {
            continue;
        }
        let clash = taken
            .range(..=c.region.r)
            .next_back()
            .is_some_and(|(_, &end)| end >= c.region.p);
        if clash {
            continue;
        }
        taken.insert(c.region.p, c.region.r);
        chosen.push(i);
        used += cost;
    }
    chosen
}

/// Applies `candidate` to `state`, returning the merged unit and the one or
/// two emitted records.
pub(crate) fn perform_merge(
    state: &mut WeightState,
    candidate: &Candidate,
    scale: usize,
    pair_id: u32,
    tol: f64,
) -> Result<(ActiveUnit, Vec<MergeRecord>)> {
    let units = candidate.units();
    let (merge_type, slot_sets): (&[MergeType], [[usize; 3]; 2]) = match candidate.kind {
        CandidateKind::Type1 => (
            &[MergeType::Type1],
            [[units[0].slot(0), units[1].slot(0), units[2].slot(0)], [0; 3]],
        ),
        CandidateKind::Type2Left => (
            &[MergeType::Type2Left],
            [[units[0].slot(0), units[1].slot(0), units[1].slot(1)], [0; 3]],
        ),
        CandidateKind::Type2Right => (
            &[MergeType::Type2Right],
            [[units[0].slot(0), units[0].slot(1), units[1].slot(0)], [0; 3]],
        ),
        CandidateKind::Type3 => (
            &[MergeType::Type3First, MergeType::Type3Second],
            [
                [units[0].slot(0), units[0].slot(1), units[1].slot(0)],
                [units[0].slot(0), units[0].slot(1), units[1].slot(1)],
            ],
        ),
    };
    let mut records = Vec::with_capacity(merge_type.len());
    for (&mt, slots) in merge_type.iter().zip(slot_sets) {
        let (s, wc, wl) = state.gather(slots);
        let st = step(s, wc, wl, tol)?;
        for (k, &slot) in slots.iter().enumerate() {
            state.s[slot] = st.s[k];
            state.wc[slot] = st.wc[k];
            state.wl[slot] = st.wl[k];
        }
        records.push(MergeRecord {
            scale,
            merge_type: mt,
            region: candidate.region,
            lambda: st.lambda,
            slots,
            detail: st.s[2],
            pair_id: mt.is_type3().then_some(pair_id),
        });
    }
    let merged = ActiveUnit::paired(candidate.region.p, candidate.region.r);
    Ok((merged, records))
}

/// Applies one merge to an explicit unit list.
///
/// The list is updated in place (the consumed units are replaced by one
/// paired unit). `pair_id` tags the records of a Type 3 merge.
pub fn apply_merge(
    state: &mut WeightState,
    units: &mut Vec<ActiveUnit>,
    candidate: &Candidate,
    scale: usize,
    pair_id: u32,
    tol: f64,
) -> Result<Vec<MergeRecord>> {
    let first = candidate.units()[0];
    let at = units
        .iter()
        .position(|u| *u == first)
        .filter(|&i| units[i..].starts_with(candidate.units()))
        .ok_or(Error::InvalidOption("candidate does not match the current units"))?;
    let (merged, records) = perform_merge(state, candidate, scale, pair_id, tol)?;
    units.splice(at..at + candidate.units().len(), [merged]);
    Ok(records)
}
