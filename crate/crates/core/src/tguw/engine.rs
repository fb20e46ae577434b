// SPDX-License-Identifier: MIT OR Apache-2.0

//! Incremental merge state shared by the tail-greedy transform and the
//! one-merge-per-pass variant used in post-processing.
//!
//! Active units live in a doubly linked list keyed by their 0-based start
//! position. The candidate starting at a unit depends only on that unit and
//! its two right neighbours, so after a merge only the merged unit and its two
//! left neighbours need re-evaluation.

use alloc::vec;
use alloc::vec::Vec;

use super::merge::{candidate_at, perform_merge, ActiveUnit, Candidate, MergeRecord, WeightState};
use crate::error::Result;
use crate::series::Series;

const NIL: usize = usize::MAX;

pub(crate) struct MergeEngine {
    state: WeightState,
    /// 1-based region end, indexed by 0-based region start.
    end: Vec<usize>,
    next: Vec<usize>,
    prev: Vec<usize>,
    live: Vec<bool>,
    head: usize,
    alpha: usize,
    cache: Vec<Option<Candidate>>,
    stamp: Vec<u32>,
    dirty: Vec<usize>,
    queued: Vec<bool>,
    records: Vec<MergeRecord>,
    pairs: u32,
    tol: f64,
}

impl MergeEngine {
    pub(crate) fn new(x: &Series, tol: f64) -> Self {
        let n = x.len();
        MergeEngine {
            state: WeightState::new(x),
            end: (1..=n).collect(),
            next: (1..=n).map(|i| if i < n { i } else { NIL }).collect(),
            prev: (0..n).map(|i| if i == 0 { NIL } else { i - 1 }).collect(),
            live: vec![true; n],
            head: 0,
            alpha: n,
            cache: vec![None; n],
            stamp: vec![0; n],
            dirty: (0..n).collect(),
            queued: vec![true; n],
            records: Vec::with_capacity(n.saturating_sub(2)),
            pairs: 0,
            tol,
        }
    }

    /// Number of smooth coefficients still present.
    pub(crate) fn alpha(&self) -> usize {
        self.alpha
    }

    pub(crate) fn into_parts(self) -> (WeightState, Vec<MergeRecord>) {
        (self.state, self.records)
    }

    fn unit(&self, start: usize) -> ActiveUnit {
        let end = self.end[start];
        if end == start + 1 {
            ActiveUnit::initial(end)
        } else {
            ActiveUnit::paired(start + 1, end)
        }
    }

    /// Active units, left to right.
    pub(crate) fn units(&self) -> Vec<ActiveUnit> {
        let mut out = Vec::new();
        let mut u = self.head;
        while u != NIL {
            out.push(self.unit(u));
            u = self.next[u];
        }
        out
    }

    fn mark(&mut self, start: usize) {
        if start != NIL && !self.queued[start] {
            self.queued[start] = true;
            self.dirty.push(start);
        }
    }

    /// Re-evaluates every stale candidate, reporting each fresh one together
    /// with its stamp.
    pub(crate) fn refresh(&mut self, mut on_fresh: impl FnMut(&Candidate, usize, u32)) -> Result<()> {
        let dirty = core::mem::take(&mut self.dirty);
        for &start in &dirty {
            self.queued[start] = false;
            if !self.live[start] {
                continue;
            }
            let mut window = [self.unit(start); 3];
            let mut len = 1;
            let mut u = self.next[start];
            while u != NIL && len < 3 {
                window[len] = self.unit(u);
                len += 1;
                u = self.next[u];
            }
            let cand = candidate_at(&self.state, &window[..len], self.tol)?;
            self.stamp[start] = self.stamp[start].wrapping_add(1);
            if let Some(c) = &cand {
                on_fresh(c, start, self.stamp[start]);
            }
            self.cache[start] = cand;
        }
        self.dirty = dirty;
        self.dirty.clear();
        Ok(())
    }

    /// Current candidates, left to right. Call [`Self::refresh`] first.
    pub(crate) fn candidates(&self) -> Vec<Candidate> {
        debug_assert!(self.dirty.is_empty());
        let mut out = Vec::with_capacity(self.alpha);
        let mut u = self.head;
        while u != NIL {
            if let Some(c) = self.cache[u] {
                out.push(c);
            }
            u = self.next[u];
        }
        out
    }

    /// The cached candidate starting at 0-based `start`, if its stamp is
    /// still current.
    pub(crate) fn cached(&self, start: usize, stamp: u32) -> Option<&Candidate> {
        if self.live[start] && self.stamp[start] == stamp {
            self.cache[start].as_ref()
        } else {
            None
        }
    }

    /// Applies a candidate obtained from this engine's current state.
    pub(crate) fn apply(&mut self, cand: &Candidate, scale: usize) -> Result<()> {
        let (merged, records) = perform_merge(&mut self.state, cand, scale, self.pairs, self.tol)?;
        if records.len() == 2 {
            self.pairs += 1;
        }
        self.alpha -= records.len();
        self.records.extend(records);

        let units = cand.units();
        let head = merged.start - 1;
        debug_assert!(self.live[head] && units[0].start == merged.start);
        for u in &units[1..] {
            let s = u.start - 1;
            debug_assert!(self.live[s], "merge consumed an inactive unit");
            self.live[s] = false;
            self.cache[s] = None;
            self.stamp[s] = self.stamp[s].wrapping_add(1);
        }
        let last = units[units.len() - 1].start - 1;
        let after = self.next[last];
        self.end[head] = merged.end;
        self.next[head] = after;
        if after != NIL {
            self.prev[after] = head;
        }
        let p1 = self.prev[head];
        let p2 = if p1 == NIL { NIL } else { self.prev[p1] };
        self.mark(head);
        self.mark(p1);
        self.mark(p2);
        Ok(())
    }
}
