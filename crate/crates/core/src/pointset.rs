//! Fixed-universe point subsets stored as bitmasks.

use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

/// Number of points that fit in one mask word. Spaces up to this size get the
/// single-word fast paths.
pub const WORD_POINTS: usize = u64::BITS as usize;

/// A set of points of an `n`-point space, one bit per point.
///
/// Spaces with at most [`WORD_POINTS`] points use a single inline word; larger
/// spaces spill to the heap.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PointSet {
    words: SmallVec<[u64; 1]>,
}

fn word_count(n: usize) -> usize {
    n.div_ceil(WORD_POINTS).max(1)
}

impl PointSet {
    pub fn empty(n: usize) -> Self {
        PointSet {
            words: SmallVec::from_elem(0, word_count(n)),
        }
    }

    pub fn full(n: usize) -> Self {
        let mut set = Self::empty(n);
        for (i, w) in set.words.iter_mut().enumerate() {
            let lo = i * WORD_POINTS;
            let bits = n.saturating_sub(lo).min(WORD_POINTS);
            *w = low_mask(bits);
        }
        set
    }

    /// Wraps a single mask word. Bits at or above `n` must be clear.
    pub fn from_word(n: usize, word: u64) -> Self {
        assert!(n <= WORD_POINTS, "single-word point set for n = {n}");
        debug_assert_eq!(word & !low_mask(n), 0, "bits outside [0, {n})");
        PointSet {
            words: SmallVec::from_buf([word]),
        }
    }

    pub fn from_indices<I: IntoIterator<Item = usize>>(n: usize, indices: I) -> Self {
        let mut set = Self::empty(n);
        for i in indices {
            assert!(i < n, "point {i} out of range for n = {n}");
            set.insert(i);
        }
        set
    }

    pub fn insert(&mut self, p: usize) {
        self.words[p / WORD_POINTS] |= 1 << (p % WORD_POINTS);
    }

    pub fn contains(&self, p: usize) -> bool {
        self.words
            .get(p / WORD_POINTS)
            .is_some_and(|w| w >> (p % WORD_POINTS) & 1 == 1)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// The mask word, when the universe fits in one word.
    pub fn as_word(&self) -> Option<u64> {
        match self.words.as_slice() {
            [w] => Some(*w),
            _ => None,
        }
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.words
            .iter()
            .zip(other.words.iter())
            .all(|(a, b)| a & !b == 0)
    }

    /// Member indices in ascending order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            std::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let bit = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD_POINTS + bit)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Mask with the low `bits` bits set.
pub(crate) fn low_mask(bits: usize) -> u64 {
    if bits >= WORD_POINTS {
        u64::MAX
    } else {
        (1u64 << bits) - 1
    }
}

impl fmt::Debug for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_set().entries(self.iter()).finish()
    }
}

impl fmt::Display for PointSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (k, p) in self.iter().enumerate() {
            if k > 0 {
                write!(f, ",")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "}}")
    }
}

// Serialized as a sorted index array; the universe size is not recorded, so
// deserialization sizes the set to its largest member.
impl Serialize for PointSet {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(self.iter())
    }
}

impl<'de> Deserialize<'de> for PointSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let indices = Vec::<usize>::deserialize(deserializer)?;
        let n = indices.iter().max().map_or(0, |m| m + 1);
        Ok(PointSet::from_indices(n, indices))
    }
}
