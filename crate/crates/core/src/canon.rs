//! Canonical label codes: the least code over all relabelings of a 1-2
//! space, and enumeration of one representative per isomorphism class.
//!
//! The minimization is a depth-first search over relabelings that fills
//! positions from the last point down. Placing a point at position `i`
//! fixes the labels of pairs `(i, j)` with `j > i`, which are exactly the
//! next most significant code bits, so any branch whose partial code exceeds
//! the best complete code found so far is cut. Worst case is still `n!`
//! leaves (e.g. the all-1 space).

use std::collections::BTreeSet;

use serde::Serialize;

use crate::metric::{
    decode_unchecked, pair_count, pair_index, LabelCode, MetricError, OneTwoSpace, PointId,
};
use crate::pointset::low_mask;

/// Largest point count accepted by [`canonical_code`].
pub const MAX_CANON_POINTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct IsoStats {
    pub n: usize,
    pub canonical_class_count: u64,
}

pub fn canonical_code(space: &OneTwoSpace) -> Result<LabelCode, MetricError> {
    let n = space.n();
    if n > MAX_CANON_POINTS {
        return Err(MetricError::TooManyPoints {
            n,
            max: MAX_CANON_POINTS,
        });
    }
    Ok(LabelCode {
        n,
        code: canonical_unchecked(space),
    })
}

struct Search<'a> {
    space: &'a OneTwoSpace,
    n: usize,
    perm: [PointId; MAX_CANON_POINTS],
    best: u64,
}

impl Search<'_> {
    /// Assigns position `pos`; positions above it are already placed and
    /// together contribute `partial`.
    fn place(&mut self, pos: usize, used: u64, partial: u64) {
        let n = self.n;
        if pos == 0 {
            // The last point is forced.
            let x = (!used & low_mask(n)).trailing_zeros() as usize;
            let code = partial | self.block(0, x);
            if code < self.best {
                self.best = code;
            }
            return;
        }
        let threshold = pos * n - pos * (pos + 1) / 2;
        let keep = !low_mask(threshold);
        let mut free = !used & low_mask(n);
        while free != 0 {
            let x = free.trailing_zeros() as usize;
            free &= free - 1;
            let next = partial | self.block(pos, x);
            // `next` fixes every bit at or above `threshold`.
            if next > self.best & keep {
                continue;
            }
            self.perm[pos] = x;
            self.place(pos - 1, used | 1 << x, next);
        }
    }

    /// Code bits of pairs `(pos, j)`, `j > pos`, when old point `x` sits at
    /// position `pos`.
    #[inline]
    fn block(&self, pos: usize, x: PointId) -> u64 {
        let n = self.n;
        let near = self.space.neighbors(x);
        let mut bits = 0u64;
        for j in pos + 1..n {
            if near >> self.perm[j] & 1 == 0 {
                bits |= 1 << pair_index(n, pos, j);
            }
        }
        bits
    }
}

pub(crate) fn canonical_unchecked(space: &OneTwoSpace) -> u64 {
    let n = space.n();
    if n < 2 {
        return 0;
    }
    let mut search = Search {
        space,
        n,
        perm: [0; MAX_CANON_POINTS],
        best: u64::MAX,
    };
    search.place(n - 1, 0, 0);
    search.best
}

/// Canonical codes of all 1-2 spaces on `n` points, ascending. Each space on
/// `n` points is a space on `n - 1` points plus one more point, so extending
/// every representative for `n - 1` by every neighborhood of the new point
/// reaches every class.
pub fn canonical_representatives(n: usize) -> Result<Vec<u64>, MetricError> {
    if n > MAX_CANON_POINTS {
        return Err(MetricError::TooManyPoints {
            n,
            max: MAX_CANON_POINTS,
        });
    }
    let mut reps = vec![0u64];
    for m in 2..=n {
        let mut next = BTreeSet::new();
        for &code in &reps {
            let base = decode_unchecked(m - 1, code);
            let mut masks = [0u64; MAX_CANON_POINTS];
            for near in 0..1u64 << (m - 1) {
                for (p, slot) in masks.iter_mut().enumerate().take(m - 1) {
                    *slot = base.neighbors(p) | (near >> p & 1) << (m - 1);
                }
                masks[m - 1] = near;
                let space = OneTwoSpace::from_neighbors(&masks[..m]).expect("symmetric extension");
                next.insert(canonical_unchecked(&space));
            }
        }
        reps = next.into_iter().collect();
    }
    debug_assert!(reps.iter().all(|&c| c < 1u64 << pair_count(n)));
    Ok(reps)
}

pub fn iso_stats(n: usize) -> Result<IsoStats, MetricError> {
    Ok(IsoStats {
        n,
        canonical_class_count: canonical_representatives(n)?.len() as u64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::{code_from_space, space_from_code};

    #[test]
    fn all_ones_is_zero() {
        for n in 1..=8 {
            assert_eq!(canonical_code(&OneTwoSpace::all_ones(n)).unwrap().code, 0);
        }
    }

    #[test]
    fn single_far_pair_on_three_points() {
        for code in [1, 2, 4] {
            let s = space_from_code(3, code).unwrap();
            assert_eq!(canonical_code(&s).unwrap().code, 1);
        }
    }

    #[test]
    fn canonical_code_is_a_relabeling() {
        for code in 0..1 << 10 {
            let s = space_from_code(5, code).unwrap();
            let c = canonical_code(&s).unwrap().code;
            assert!(c <= code_from_space(&s).unwrap().code);
            let back = space_from_code(5, c).unwrap();
            let degrees = |t: &OneTwoSpace| {
                let mut d: Vec<u32> = (0..5).map(|p| t.neighbors(p).count_ones()).collect();
                d.sort();
                d
            };
            assert_eq!(degrees(&s), degrees(&back));
        }
    }

    #[test]
    fn too_many_points() {
        assert!(canonical_code(&OneTwoSpace::all_ones(9)).is_err());
        assert!(canonical_representatives(9).is_err());
    }

    #[test]
    fn class_counts_small() {
        let counts: Vec<usize> = (1..=5)
            .map(|n| canonical_representatives(n).unwrap().len())
            .collect();
        assert_eq!(counts, vec![1, 2, 4, 11, 34]);
    }
}
