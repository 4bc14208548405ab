//! Betweenness, lines, and the De Bruijn-Erdos verdict.
//!
//! The line through `u` and `v` is the set of points `p` for which one of
//! `u`, `p`, `v` lies between the other two:
//!
//! ```text
//! d(p,u) + d(u,v) = d(p,v)   or   d(u,p) + d(p,v) = d(u,v)   or   d(u,v) + d(v,p) = d(u,p)
//! ```
//!
//! For 1-2 spaces the three equations collapse to word operations on the
//! distance-1 neighborhoods, see [`line_mask`].

use std::collections::HashMap;

use serde::Serialize;

use crate::metric::{pair_count, pair_index, pairs, MetricSpace, OneTwoSpace, PointId, MAX_CODE_POINTS};
use crate::pointset::PointSet;

/// `p` lies between `u` and `v`: `d(u,p) + d(p,v) = d(u,v)`, exactly.
pub fn is_between(space: &MetricSpace, u: PointId, p: PointId, v: PointId) -> bool {
    space.sum_equals(u, p, v)
}

/// The line through `u` and `v`, evaluated literally from the three
/// betweenness equations.
pub fn line_of(space: &MetricSpace, u: PointId, v: PointId) -> PointSet {
    assert_ne!(u, v, "a line needs two distinct points");
    let n = space.n();
    let mut line = PointSet::empty(n);
    for p in 0..n {
        if is_between(space, p, u, v) || is_between(space, u, p, v) || is_between(space, u, v, p) {
            line.insert(p);
        }
    }
    line
}

/// Line mask in a 1-2 space. At distance 2 the line is `u`, `v` and their
/// common unit neighbors; at distance 1 it is `u`, `v` and every point at
/// distance 1 from exactly one of them.
#[inline]
pub fn line_mask(space: &OneTwoSpace, u: PointId, v: PointId) -> u64 {
    let (nu, nv) = (space.neighbors(u), space.neighbors(v));
    let ends = 1 << u | 1 << v;
    if nu >> v & 1 == 1 {
        ends | (nu ^ nv)
    } else {
        ends | (nu & nv)
    }
}

/// [`line_mask`] as a [`PointSet`].
pub fn line_of_fast(space: &OneTwoSpace, u: PointId, v: PointId) -> PointSet {
    assert_ne!(u, v, "a line needs two distinct points");
    PointSet::from_word(space.n(), line_mask(space, u, v))
}

/// A space whose lines can be computed pair by pair.
pub trait LineSpace {
    fn point_count(&self) -> usize;
    fn line(&self, u: PointId, v: PointId) -> PointSet;
}

impl LineSpace for MetricSpace {
    fn point_count(&self) -> usize {
        self.n()
    }
    fn line(&self, u: PointId, v: PointId) -> PointSet {
        line_of(self, u, v)
    }
}

impl LineSpace for OneTwoSpace {
    fn point_count(&self) -> usize {
        self.n()
    }
    fn line(&self, u: PointId, v: PointId) -> PointSet {
        line_of_fast(self, u, v)
    }
}

/// True iff `line` contains every point of the space.
pub fn is_universal<S: LineSpace + ?Sized>(space: &S, line: &PointSet) -> bool {
    line.len() == space.point_count()
}

/// The distinct lines of a space, in order of first appearance over pairs in
/// lexicographic order, and the line index of every pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineFamily {
    n: usize,
    lines: Vec<PointSet>,
    #[serde(skip)]
    pair_to_line: Vec<usize>,
    has_universal: bool,
}

impl LineFamily {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn lines(&self) -> &[PointSet] {
        &self.lines
    }

    pub fn line_count(&self) -> usize {
        self.lines.len()
    }

    pub fn has_universal(&self) -> bool {
        self.has_universal
    }

    /// Index into [`lines`](Self::lines) of the line through `u` and `v`.
    pub fn line_index(&self, u: PointId, v: PointId) -> usize {
        self.pair_to_line[pair_index(self.n, u, v)]
    }

    pub fn line_through(&self, u: PointId, v: PointId) -> &PointSet {
        &self.lines[self.line_index(u, v)]
    }

    /// Line indices by pair index.
    pub fn pair_to_line(&self) -> &[usize] {
        &self.pair_to_line
    }
}

/// Computes every line and deduplicates them by point set.
pub fn all_lines<S: LineSpace + ?Sized>(space: &S) -> LineFamily {
    let n = space.point_count();
    let mut lines = Vec::new();
    let mut pair_to_line = Vec::with_capacity(pair_count(n));
    let mut seen: HashMap<PointSet, usize> = HashMap::new();
    let mut has_universal = false;
    for (u, v) in pairs(n) {
        let line = space.line(u, v);
        let idx = *seen.entry(line).or_insert_with_key(|line| {
            has_universal |= line.len() == n;
            lines.push(line.clone());
            lines.len() - 1
        });
        pair_to_line.push(idx);
    }
    LineFamily {
        n,
        lines,
        pair_to_line,
        has_universal,
    }
}

/// Outcome of the De Bruijn-Erdos test: at least `n` distinct lines, or a
/// universal line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DbeVerdict {
    pub line_count: usize,
    pub has_universal: bool,
    pub holds: bool,
}

impl DbeVerdict {
    pub fn new(n: usize, line_count: usize, has_universal: bool) -> Self {
        DbeVerdict {
            line_count,
            has_universal,
            holds: line_count >= n || has_universal,
        }
    }

    pub fn from_family(family: &LineFamily) -> Self {
        Self::new(family.n, family.line_count(), family.has_universal)
    }
}

/// # Panics
///
/// If the space has fewer than two points; such spaces have no lines.
pub fn dbe_verdict<S: LineSpace + ?Sized>(space: &S) -> DbeVerdict {
    assert!(
        space.point_count() >= 2,
        "the De Bruijn-Erdos property needs at least two points"
    );
    DbeVerdict::from_family(&all_lines(space))
}

/// Per-pair line masks of a 1-2 space small enough to have a label code.
/// Allocation-free; used by the exhaustive sweeps.
#[derive(Clone)]
pub(crate) struct MaskLines {
    n: usize,
    pair_lines: [u64; MAX_PAIRS],
}

pub(crate) const MAX_PAIRS: usize = MAX_CODE_POINTS * (MAX_CODE_POINTS - 1) / 2;

impl MaskLines {
    #[inline]
    pub(crate) fn new(space: &OneTwoSpace) -> Self {
        let n = space.n();
        debug_assert!(n <= MAX_CODE_POINTS);
        let mut pair_lines = [0u64; MAX_PAIRS];
        let mut k = 0;
        for u in 0..n {
            for v in u + 1..n {
                pair_lines[k] = line_mask(space, u, v);
                k += 1;
            }
        }
        MaskLines { n, pair_lines }
    }

    /// Verdict with the exact distinct-line count.
    #[inline]
    pub(crate) fn verdict(&self) -> DbeVerdict {
        let full = crate::pointset::low_mask(self.n);
        let mut sorted = self.pair_lines;
        let sorted = &mut sorted[..pair_count(self.n)];
        sorted.sort_unstable();
        let mut count = 0;
        let mut prev = None;
        for &l in sorted.iter() {
            if prev != Some(l) {
                count += 1;
                prev = Some(l);
            }
        }
        let has_universal = sorted.last() == Some(&full);
        DbeVerdict::new(self.n, count, has_universal)
    }
}
