//! Structure of 1-2 spaces: twins, the edge relation "same line", and
//! checkers for the structural laws that every 1-2 space obeys.
//!
//! Every checker returns the list of violated instances with full witnesses.
//! On a correct implementation of lines these lists are always empty; the
//! exhaustive sweeps rely on that.

use serde::Serialize;

use crate::lines::{all_lines, LineFamily};
use crate::metric::{pairs, OneTwoSpace, PointId};
use crate::pointset::PointSet;

/// An edge of the complete graph with its distance label.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct EdgePair {
    pub u: PointId,
    pub v: PointId,
    pub label: u8,
}

impl EdgePair {
    pub fn new(space: &OneTwoSpace, u: PointId, v: PointId) -> Self {
        let (u, v) = if u < v { (u, v) } else { (v, u) };
        EdgePair {
            u,
            v,
            label: space.dist(u, v),
        }
    }

    fn mask(&self) -> u64 {
        1 << self.u | 1 << self.v
    }
}

/// A class of the relation "spans the same line": the edges and their
/// shared line.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct EquivClass {
    pub edges: Vec<EdgePair>,
    pub line: PointSet,
}

impl EquivClass {
    /// Union of all edge endpoints.
    pub fn endpoints(&self) -> u64 {
        self.edges.iter().fold(0, |m, e| m | e.mask())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ClassShape {
    /// Pairwise vertex-disjoint edges, all with the same label.
    UniformMatching,
    /// Edges of one 4-cycle of the complete graph, labeled alternately
    /// 1, 2, 1, 2 around the cycle.
    AltC4Subset,
    Other,
}

impl ClassShape {
    pub const ALL: [ClassShape; 3] = [
        ClassShape::UniformMatching,
        ClassShape::AltC4Subset,
        ClassShape::Other,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ClassShape::UniformMatching => "UNIFORM_MATCHING",
            ClassShape::AltC4Subset => "ALT_C4_SUBSET",
            ClassShape::Other => "OTHER",
        }
    }
}

/// A violated instance of a structural law.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Violation {
    /// Disjoint edges with different labels span the same line.
    DisjointLabelsShareLine {
        edges: [EdgePair; 2],
        lines: [PointSet; 2],
    },
    /// Adjacent 2-labeled edges `u1u2`, `u2u3` span the same line.
    AdjacentTwosShareLine {
        points: [PointId; 3],
        lines: [PointSet; 2],
    },
    /// Adjacent 1-labeled edges `u1u2`, `u2u3` span the same line although
    /// `u1` and `u3` are not twins.
    AdjacentOnesShareLine {
        points: [PointId; 3],
        lines: [PointSet; 2],
    },
    /// A line through two points other than the twins contains exactly one
    /// of the twins.
    TwinSplitByLine {
        twins: [PointId; 2],
        pair: [PointId; 2],
        line: PointSet,
    },
    /// `d(w, v) = 1` for twin `v`, yet the line through `w` and a twin misses
    /// one of the twins.
    TwinUnitLineMissesTwin {
        twins: [PointId; 2],
        w: PointId,
        line: PointSet,
    },
    /// `d(w, v) = 2` for twin `v`, yet the line through `w` and `v` contains
    /// the other twin.
    TwinFarLineContainsOther {
        twins: [PointId; 2],
        w: PointId,
        line: PointSet,
    },
    /// A class whose edges cover every point spans a non-universal line.
    FullCoverNotUniversal { class: EquivClass },
    /// A class in a twin-free space is neither a uniform matching nor part
    /// of an alternating 4-cycle.
    ShapeOther { class: EquivClass },
    /// A class in a twin-free space without a universal line exceeds the
    /// size bound.
    ClassTooLarge {
        class: EquivClass,
        size: usize,
        bound: usize,
    },
}

/// `u`, `v` are twins: `d(u,v) = 2` and every other point is equidistant
/// from both.
pub fn are_twins(space: &OneTwoSpace, u: PointId, v: PointId) -> bool {
    assert_ne!(u, v);
    let others = !(1u64 << u | 1 << v);
    space.dist(u, v) == 2 && space.neighbors(u) & others == space.neighbors(v) & others
}

/// All twin pairs `(u, v)` with `u < v`, sorted.
pub fn twin_pairs(space: &OneTwoSpace) -> Vec<(PointId, PointId)> {
    pairs(space.n())
        .filter(|&(u, v)| are_twins(space, u, v))
        .collect()
}

pub fn has_twins(space: &OneTwoSpace) -> bool {
    pairs(space.n()).any(|(u, v)| are_twins(space, u, v))
}

/// Partitions the edges by the line they span, ordered by line index.
pub fn equiv_classes(family: &LineFamily, space: &OneTwoSpace) -> Vec<EquivClass> {
    let mut classes: Vec<EquivClass> = family
        .lines()
        .iter()
        .map(|line| EquivClass {
            edges: Vec::new(),
            line: line.clone(),
        })
        .collect();
    for (k, (u, v)) in pairs(space.n()).enumerate() {
        classes[family.pair_to_line()[k]]
            .edges
            .push(EdgePair::new(space, u, v));
    }
    classes
}

fn is_uniform_matching(cls: &EquivClass) -> bool {
    let Some(first) = cls.edges.first() else {
        return false;
    };
    let mut seen = 0u64;
    for e in &cls.edges {
        if e.label != first.label || seen & e.mask() != 0 {
            return false;
        }
        seen |= e.mask();
    }
    true
}

fn is_alt_c4_subset(space: &OneTwoSpace, cls: &EquivClass) -> bool {
    let used = cls.endpoints();
    if used.count_ones() > 4 || cls.edges.is_empty() {
        return false;
    }
    let n = space.n();
    // The class edges must be edges of the cycle, with one label on even
    // positions and the other label on odd positions. Cycle edges outside
    // the class are unconstrained.
    let in_cycle = |cycle: [PointId; 4]| {
        let mut parity_label = [None::<u8>; 2];
        for e in &cls.edges {
            let Some(pos) = (0..4).find(|&k| {
                let (a, b) = (cycle[k], cycle[(k + 1) % 4]);
                (a.min(b), a.max(b)) == (e.u, e.v)
            }) else {
                return false;
            };
            match parity_label[pos % 2] {
                None => parity_label[pos % 2] = Some(e.label),
                Some(l) if l != e.label => return false,
                Some(_) => {}
            }
        }
        !matches!(parity_label, [Some(a), Some(b)] if a == b)
    };
    // Every 4-point superset of the class vertices, in each of its three
    // cyclic orders.
    let base: Vec<PointId> = (0..n).filter(|&p| used >> p & 1 == 1).collect();
    let extra: Vec<PointId> = (0..n).filter(|&p| used >> p & 1 == 0).collect();
    let mut quads: Vec<[PointId; 4]> = Vec::new();
    match base.len() {
        4 => quads.push([base[0], base[1], base[2], base[3]]),
        3 => quads.extend(extra.iter().map(|&x| [base[0], base[1], base[2], x])),
        2 => {
            for (i, &x) in extra.iter().enumerate() {
                for &y in &extra[i + 1..] {
                    quads.push([base[0], base[1], x, y]);
                }
            }
        }
        _ => {}
    }
    quads.into_iter().any(|[a, b, c, d]| {
        in_cycle([a, b, c, d]) || in_cycle([a, b, d, c]) || in_cycle([a, c, b, d])
    })
}

/// Shape of a class. Classes that are both a uniform matching and part of an
/// alternating 4-cycle are reported as matchings.
pub fn classify_class(space: &OneTwoSpace, cls: &EquivClass) -> ClassShape {
    if is_uniform_matching(cls) {
        ClassShape::UniformMatching
    } else if is_alt_c4_subset(space, cls) {
        ClassShape::AltC4Subset
    } else {
        ClassShape::Other
    }
}

/// Largest class a twin-free space without a universal line can have:
/// `max(floor((n-1)/2), 4)`.
pub fn class_size_bound(n: usize) -> usize {
    (n.saturating_sub(1) / 2).max(4)
}

pub fn check_claim_c0(space: &OneTwoSpace) -> Vec<Violation> {
    check_claim_c0_in(space, &all_lines(space))
}

/// Lines of distinct edges differ when (1) the edges are disjoint with
/// different labels, (2) they share a point and are both labeled 2, or
/// (3) they share a point, are both labeled 1, and their outer points are not
/// twins.
pub fn check_claim_c0_in(space: &OneTwoSpace, family: &LineFamily) -> Vec<Violation> {
    let n = space.n();
    let mut out = Vec::new();
    let all: Vec<(PointId, PointId)> = pairs(n).collect();
    for (a, &(u1, u2)) in all.iter().enumerate() {
        for &(u3, u4) in &all[a + 1..] {
            if u3 == u1 || u3 == u2 || u4 == u1 || u4 == u2 {
                continue;
            }
            if space.dist(u1, u2) != space.dist(u3, u4)
                && family.line_index(u1, u2) == family.line_index(u3, u4)
            {
                out.push(Violation::DisjointLabelsShareLine {
                    edges: [EdgePair::new(space, u1, u2), EdgePair::new(space, u3, u4)],
                    lines: [
                        family.line_through(u1, u2).clone(),
                        family.line_through(u3, u4).clone(),
                    ],
                });
            }
        }
    }
    for u2 in 0..n {
        for u1 in 0..n {
            for u3 in u1 + 1..n {
                if u1 == u2 || u3 == u2 {
                    continue;
                }
                let (d12, d23) = (space.dist(u1, u2), space.dist(u2, u3));
                if d12 != d23 || family.line_index(u1, u2) != family.line_index(u2, u3) {
                    continue;
                }
                let points = [u1, u2, u3];
                let lines = [
                    family.line_through(u1, u2).clone(),
                    family.line_through(u2, u3).clone(),
                ];
                if d12 == 2 {
                    out.push(Violation::AdjacentTwosShareLine { points, lines });
                } else if !are_twins(space, u1, u3) {
                    out.push(Violation::AdjacentOnesShareLine { points, lines });
                }
            }
        }
    }
    out
}

pub fn check_twin_line_laws(space: &OneTwoSpace) -> Vec<Violation> {
    check_twin_line_laws_in(space, &all_lines(space))
}

/// For every twin pair `{u, v}`:
/// (a) a line through two other points contains both twins or neither;
/// (b) if `d(w,v) = 1`, the lines `wv` and `wu` contain both twins;
/// (c) if `d(w,v) = 2`, the line `wv` contains `v` but not `u`, and
///     symmetrically for `wu`.
pub fn check_twin_line_laws_in(space: &OneTwoSpace, family: &LineFamily) -> Vec<Violation> {
    let n = space.n();
    let mut out = Vec::new();
    for (u, v) in twin_pairs(space) {
        let twins = [u, v];
        for (x, y) in pairs(n) {
            if x == u || x == v || y == u || y == v {
                continue;
            }
            let line = family.line_through(x, y);
            if line.contains(u) != line.contains(v) {
                out.push(Violation::TwinSplitByLine {
                    twins,
                    pair: [x, y],
                    line: line.clone(),
                });
            }
        }
        for w in (0..n).filter(|&w| w != u && w != v) {
            for (near, other) in [(v, u), (u, v)] {
                let line = family.line_through(w, near);
                if space.dist(w, near) == 1 {
                    if !(line.contains(u) && line.contains(v)) {
                        out.push(Violation::TwinUnitLineMissesTwin {
                            twins,
                            w,
                            line: line.clone(),
                        });
                    }
                } else if !line.contains(near) || line.contains(other) {
                    out.push(Violation::TwinFarLineContainsOther {
                        twins,
                        w,
                        line: line.clone(),
                    });
                }
            }
        }
    }
    out
}

pub fn full_cover_class_check(space: &OneTwoSpace) -> Vec<Violation> {
    let family = all_lines(space);
    full_cover_class_check_in(space, &equiv_classes(&family, space))
}

/// A class whose edges touch every point spans a universal line.
pub fn full_cover_class_check_in(space: &OneTwoSpace, classes: &[EquivClass]) -> Vec<Violation> {
    let full = space.full_mask();
    classes
        .iter()
        .filter(|c| c.endpoints() == full && c.line.len() != space.n())
        .map(|c| Violation::FullCoverNotUniversal { class: c.clone() })
        .collect()
}

/// Result of a checker that only applies to some spaces.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "status", content = "violations", rename_all = "snake_case")]
pub enum Conditional {
    NotApplicable,
    Checked(Vec<Violation>),
}

impl Conditional {
    pub fn violations(&self) -> &[Violation] {
        match self {
            Conditional::NotApplicable => &[],
            Conditional::Checked(v) => v,
        }
    }

    pub fn is_applicable(&self) -> bool {
        matches!(self, Conditional::Checked(_))
    }
}

pub fn twin_free_shape_check(space: &OneTwoSpace) -> Conditional {
    let family = all_lines(space);
    twin_free_shape_check_in(space, &equiv_classes(&family, space))
}

/// In a twin-free space every class is a uniform matching or a subset of an
/// alternating 4-cycle. Not applicable when the space has twins.
pub fn twin_free_shape_check_in(space: &OneTwoSpace, classes: &[EquivClass]) -> Conditional {
    if has_twins(space) {
        return Conditional::NotApplicable;
    }
    Conditional::Checked(
        classes
            .iter()
            .filter(|c| classify_class(space, c) == ClassShape::Other)
            .map(|c| Violation::ShapeOther { class: c.clone() })
            .collect(),
    )
}

pub fn class_size_check(space: &OneTwoSpace) -> Conditional {
    let family = all_lines(space);
    class_size_check_in(space, &family, &equiv_classes(&family, space))
}

/// In a twin-free space without a universal line every class has at most
/// [`class_size_bound`] edges. Not applicable otherwise.
pub fn class_size_check_in(
    space: &OneTwoSpace,
    family: &LineFamily,
    classes: &[EquivClass],
) -> Conditional {
    if family.has_universal() || has_twins(space) {
        return Conditional::NotApplicable;
    }
    let bound = class_size_bound(space.n());
    Conditional::Checked(
        classes
            .iter()
            .filter(|c| c.edges.len() > bound)
            .map(|c| Violation::ClassTooLarge {
                class: c.clone(),
                size: c.edges.len(),
                bound,
            })
            .collect(),
    )
}
