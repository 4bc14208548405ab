//! Finite metric spaces with exact rational distances, the 1-2 specialization,
//! and the label-code encoding of 1-2 spaces.

use std::fmt::{self, Write as _};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use smallvec::SmallVec;

use crate::pointset::{low_mask, PointSet, WORD_POINTS};

/// Index of a point, in `0..n`.
pub type PointId = usize;

/// An exact distance value.
pub type Distance = BigRational;

/// Largest point count a [`OneTwoSpace`] supports: one neighborhood mask per
/// point, one bit per neighbor.
pub const MAX_ONE_TWO_POINTS: usize = WORD_POINTS;

/// Largest point count whose `C(n, 2)` pair bits fit in a [`LabelCode`].
pub const MAX_CODE_POINTS: usize = 11;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MetricError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: `{token}` is not a nonnegative rational number")]
    BadNumber { line: usize, token: String },
    #[error("line {line}: negative distance `{token}`")]
    NegativeToken { line: usize, token: String },
    #[error("row {row}: expected {expected} entries, found {found}")]
    RowLength {
        row: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} rows, found {found}")]
    RowCount { expected: usize, found: usize },
    #[error("negative distance at ({i},{j})")]
    Negative { i: PointId, j: PointId },
    #[error("nonzero diagonal entry at ({i},{i})")]
    NonzeroDiagonal { i: PointId },
    #[error("asymmetric distances at ({i},{j}): {dij} != {dji}")]
    Asymmetric {
        i: PointId,
        j: PointId,
        dij: String,
        dji: String,
    },
    #[error("zero distance between distinct points ({i},{j})")]
    ZeroDistance { i: PointId, j: PointId },
    #[error("triangle inequality violated at ({i},{j},{k}): {dik} > {dij} + {djk}")]
    Triangle {
        i: PointId,
        j: PointId,
        k: PointId,
        dik: String,
        dij: String,
        djk: String,
    },
    #[error("distance {value} at ({i},{j}) is not 1 or 2")]
    NotOneTwo { i: PointId, j: PointId, value: String },
    #[error("label code {code} out of range for n = {n}")]
    CodeOutOfRange { n: usize, code: u64 },
    #[error("{n} points exceeds the supported maximum of {max}")]
    TooManyPoints { n: usize, max: usize },
}

/// Bit position of the unordered pair `{i, j}` in lexicographic pair order:
/// `(0,1)` is 0, `(0,2)` is 1, ..., `(n-2,n-1)` is `C(n,2) - 1`.
#[inline]
pub fn pair_index(n: usize, i: PointId, j: PointId) -> usize {
    let (i, j) = if i < j { (i, j) } else { (j, i) };
    debug_assert!(i != j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

#[inline]
pub fn pair_count(n: usize) -> usize {
    n * n.saturating_sub(1) / 2
}

/// All pairs `(i, j)` with `i < j`, in pair-index order.
pub fn pairs(n: usize) -> impl Iterator<Item = (PointId, PointId)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// An `n x n` matrix of nonnegative exact rationals, not yet checked against
/// the metric axioms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceMatrix {
    n: usize,
    d: Vec<Distance>,
}

impl DistanceMatrix {
    /// Builds a matrix from `rows`; every row must have `rows.len()` entries,
    /// all nonnegative.
    pub fn from_rows(rows: Vec<Vec<Distance>>) -> Result<Self, MetricError> {
        let n = rows.len();
        let mut d = Vec::with_capacity(n * n);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != n {
                return Err(MetricError::RowLength {
                    row: i,
                    expected: n,
                    found: row.len(),
                });
            }
            for (j, value) in row.into_iter().enumerate() {
                if value.is_negative() {
                    return Err(MetricError::Negative { i, j });
                }
                d.push(value);
            }
        }
        Ok(DistanceMatrix { n, d })
    }

    /// Convenience constructor for integer matrices.
    pub fn from_integers(rows: &[Vec<i64>]) -> Result<Self, MetricError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| BigRational::from_integer(x.into())).collect())
                .collect(),
        )
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: PointId, j: PointId) -> &Distance {
        &self.d[i * self.n + j]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[Distance]> {
        self.d.chunks(self.n.max(1)).take(self.n)
    }

    /// Renders the matrix in the text file format accepted by
    /// [`parse_distance_matrix`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for row in self.rows() {
            let mut first = true;
            for value in row {
                if !first {
                    out.push(' ');
                }
                first = false;
                let _ = write!(out, "{value}");
            }
            out.push('\n');
        }
        out
    }
}

impl Serialize for DistanceMatrix {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = self
            .rows()
            .map(|r| r.iter().map(|x| x.to_string()).collect())
            .collect();
        let mut st = serializer.serialize_struct("DistanceMatrix", 2)?;
        st.serialize_field("n", &self.n)?;
        st.serialize_field("rows", &rows)?;
        st.end()
    }
}

/// Parses one numeric token: an integer, a finite decimal (`1.25`), or a
/// fraction `p/q`. No rounding takes place.
pub fn parse_rational(token: &str) -> Option<Distance> {
    fn digits(s: &str) -> Option<BigInt> {
        if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        s.parse().ok()
    }
    if let Some((p, q)) = token.split_once('/') {
        let q = digits(q)?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(digits(p)?, q));
    }
    if let Some((whole, frac)) = token.split_once('.') {
        if whole.is_empty() && frac.is_empty() {
            return None;
        }
        let whole = if whole.is_empty() { BigInt::zero() } else { digits(whole)? };
        if frac.is_empty() {
            return Some(BigRational::from_integer(whole));
        }
        let scale = num_traits::pow(BigInt::from(10u32), frac.len());
        return Some(BigRational::new(whole * &scale + digits(frac)?, scale));
    }
    digits(token).map(BigRational::from_integer)
}

/// Parses the matrix text format: the point count `n` on the first
/// significant line, then `n` rows of `n` whitespace-separated entries.
/// Blank lines and lines starting with `#` are skipped.
pub fn parse_distance_matrix(text: &str) -> Result<DistanceMatrix, MetricError> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(k, l)| (k + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (header_line, header) = lines.next().ok_or(MetricError::Syntax {
        line: 1,
        message: "missing point count".into(),
    })?;
    let n: usize = match header.split_whitespace().collect::<Vec<_>>().as_slice() {
        [tok] => tok.parse().map_err(|_| MetricError::Syntax {
            line: header_line,
            message: format!("point count `{tok}` is not a positive integer"),
        })?,
        _ => {
            return Err(MetricError::Syntax {
                line: header_line,
                message: "first line must hold only the point count".into(),
            })
        }
    };
    if n == 0 {
        return Err(MetricError::Syntax {
            line: header_line,
            message: "point count must be at least 1".into(),
        });
    }

    let mut rows = Vec::with_capacity(n);
    for (line_no, line) in lines {
        if rows.len() == n {
            return Err(MetricError::RowCount {
                expected: n,
                found: n + 1,
            });
        }
        let mut row = Vec::with_capacity(n);
        for tok in line.split_whitespace() {
            if let Some(rest) = tok.strip_prefix('-') {
                if parse_rational(rest).is_some() {
                    return Err(MetricError::NegativeToken {
                        line: line_no,
                        token: tok.into(),
                    });
                }
            }
            let value = parse_rational(tok).ok_or_else(|| MetricError::BadNumber {
                line: line_no,
                token: tok.into(),
            })?;
            row.push(value);
        }
        if row.len() != n {
            return Err(MetricError::RowLength {
                row: rows.len(),
                expected: n,
                found: row.len(),
            });
        }
        rows.push(row);
    }
    if rows.len() != n {
        return Err(MetricError::RowCount {
            expected: n,
            found: rows.len(),
        });
    }
    DistanceMatrix::from_rows(rows)
}

/// Distances rescaled to integers by a common denominator. Betweenness is an
/// equation between sums, so it is unaffected by the scaling.
#[derive(Debug, Clone)]
enum ScaledDistances {
    Small(Vec<i64>),
    Big(Vec<BigInt>),
}

/// Entries below this bound can be summed pairwise in `i64`.
const SMALL_LIMIT: i64 = 1 << 61;

impl ScaledDistances {
    fn new(matrix: &DistanceMatrix) -> Self {
        let lcm = matrix
            .d
            .iter()
            .fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
        let big: Vec<BigInt> = matrix
            .d
            .iter()
            .map(|x| x.numer() * (&lcm / x.denom()))
            .collect();
        let small: Option<Vec<i64>> = big
            .iter()
            .map(|x| x.to_i64().filter(|&v| v < SMALL_LIMIT))
            .collect();
        match small {
            Some(v) => ScaledDistances::Small(v),
            None => ScaledDistances::Big(big),
        }
    }
}

/// A validated finite metric space.
#[derive(Debug, Clone)]
pub struct MetricSpace {
    matrix: DistanceMatrix,
    scaled: ScaledDistances,
}

/// Checks zero diagonal, symmetry, positivity off the diagonal, and the
/// triangle inequality, in that order. The first violation found is reported.
pub fn validate_metric(matrix: DistanceMatrix) -> Result<MetricSpace, MetricError> {
    let n = matrix.n;
    let d = |i: usize, j: usize| matrix.get(i, j);
    for i in 0..n {
        if !d(i, i).is_zero() {
            return Err(MetricError::NonzeroDiagonal { i });
        }
    }
    for (i, j) in pairs(n) {
        if d(i, j) != d(j, i) {
            return Err(MetricError::Asymmetric {
                i,
                j,
                dij: d(i, j).to_string(),
                dji: d(j, i).to_string(),
            });
        }
        if !d(i, j).is_positive() {
            return Err(MetricError::ZeroDistance { i, j });
        }
    }
    for i in 0..n {
        for k in i + 1..n {
            for j in (0..n).filter(|&j| j != i && j != k) {
                if d(i, k) > &(d(i, j) + d(j, k)) {
                    return Err(MetricError::Triangle {
                        i,
                        j,
                        k,
                        dik: d(i, k).to_string(),
                        dij: d(i, j).to_string(),
                        djk: d(j, k).to_string(),
                    });
                }
            }
        }
    }
    let scaled = ScaledDistances::new(&matrix);
    Ok(MetricSpace { matrix, scaled })
}

impl MetricSpace {
    pub fn n(&self) -> usize {
        self.matrix.n
    }

    pub fn dist(&self, i: PointId, j: PointId) -> &Distance {
        self.matrix.get(i, j)
    }

    pub fn matrix(&self) -> &DistanceMatrix {
        &self.matrix
    }

    /// Exact test of `d(a,b) + d(b,c) == d(a,c)`.
    #[inline]
    pub(crate) fn sum_equals(&self, a: PointId, b: PointId, c: PointId) -> bool {
        let n = self.matrix.n;
        match &self.scaled {
            ScaledDistances::Small(v) => v[a * n + b] + v[b * n + c] == v[a * n + c],
            ScaledDistances::Big(v) => &v[a * n + b] + &v[b * n + c] == v[a * n + c],
        }
    }
}

/// A 1-2 metric space, stored as the distance-1 neighborhood mask of each
/// point. Every symmetric labeling by 1 and 2 is a metric, since `2 <= 1 + 1`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct OneTwoSpace {
    n1: SmallVec<[u64; 16]>,
}

impl OneTwoSpace {
    /// Builds a space from neighborhood masks, checking symmetry and
    /// irreflexivity.
    pub fn from_neighbors(masks: &[u64]) -> Result<Self, MetricError> {
        let n = masks.len();
        if n > MAX_ONE_TWO_POINTS {
            return Err(MetricError::TooManyPoints {
                n,
                max: MAX_ONE_TWO_POINTS,
            });
        }
        for (p, &m) in masks.iter().enumerate() {
            if m & !low_mask(n) != 0 || m >> p & 1 == 1 {
                return Err(MetricError::Syntax {
                    line: 0,
                    message: format!("neighbor mask of point {p} is out of range"),
                });
            }
            for (q, &mq) in masks.iter().enumerate() {
                if (m >> q & 1) != (mq >> p & 1) {
                    return Err(MetricError::Asymmetric {
                        i: p,
                        j: q,
                        dij: if m >> q & 1 == 1 { "1" } else { "2" }.into(),
                        dji: if mq >> p & 1 == 1 { "1" } else { "2" }.into(),
                    });
                }
            }
        }
        Ok(OneTwoSpace {
            n1: SmallVec::from_slice(masks),
        })
    }

    /// Builds a space from the list of distance-1 pairs; all other pairs are
    /// at distance 2.
    pub fn from_unit_pairs(n: usize, unit_pairs: &[(PointId, PointId)]) -> Self {
        assert!(n <= MAX_ONE_TWO_POINTS);
        let mut n1: SmallVec<[u64; 16]> = SmallVec::from_elem(0, n);
        for &(a, b) in unit_pairs {
            assert!(a != b && a < n && b < n);
            n1[a] |= 1 << b;
            n1[b] |= 1 << a;
        }
        OneTwoSpace { n1 }
    }

    pub fn all_ones(n: usize) -> Self {
        let full = low_mask(n);
        OneTwoSpace {
            n1: (0..n).map(|p| full & !(1 << p)).collect(),
        }
    }

    pub fn all_twos(n: usize) -> Self {
        OneTwoSpace {
            n1: SmallVec::from_elem(0, n),
        }
    }

    pub fn n(&self) -> usize {
        self.n1.len()
    }

    /// Mask of the points at distance 1 from `p`.
    #[inline]
    pub fn neighbors(&self, p: PointId) -> u64 {
        self.n1[p]
    }

    pub fn neighbor_set(&self, p: PointId) -> PointSet {
        PointSet::from_word(self.n(), self.n1[p])
    }

    /// `d(p, q)` as 0, 1, or 2.
    #[inline]
    pub fn dist(&self, p: PointId, q: PointId) -> u8 {
        if p == q {
            0
        } else if self.n1[p] >> q & 1 == 1 {
            1
        } else {
            2
        }
    }

    #[inline]
    pub fn full_mask(&self) -> u64 {
        low_mask(self.n())
    }

    pub fn to_matrix(&self) -> DistanceMatrix {
        let n = self.n();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .map(|j| BigRational::from_integer(self.dist(i, j).into()))
                    .collect()
            })
            .collect();
        DistanceMatrix::from_rows(rows).expect("square nonnegative matrix")
    }

    /// The implied general metric space.
    pub fn to_metric(&self) -> MetricSpace {
        validate_metric(self.to_matrix()).expect("1-2 labelings are metrics")
    }

    /// The same space with point `p` of the result being point `perm[p]` of
    /// `self`.
    pub fn relabel(&self, perm: &[PointId]) -> OneTwoSpace {
        let n = self.n();
        assert_eq!(perm.len(), n);
        let n1 = (0..n)
            .map(|p| {
                (0..n)
                    .filter(|&q| q != p && self.dist(perm[p], perm[q]) == 1)
                    .fold(0u64, |m, q| m | 1 << q)
            })
            .collect();
        OneTwoSpace { n1 }
    }
}

impl fmt::Debug for OneTwoSpace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("OneTwoSpace")
            .field("n", &self.n())
            .field(
                "n1",
                &self
                    .n1
                    .iter()
                    .map(|&m| PointSet::from_word(self.n(), m))
                    .collect::<Vec<_>>(),
            )
            .finish()
    }
}

/// Restricts a metric space whose nonzero distances are all 1 or 2 to the
/// bitmask representation.
pub fn as_one_two(space: &MetricSpace) -> Result<OneTwoSpace, MetricError> {
    let n = space.n();
    if n > MAX_ONE_TWO_POINTS {
        return Err(MetricError::TooManyPoints {
            n,
            max: MAX_ONE_TWO_POINTS,
        });
    }
    let one = BigRational::one();
    let two = BigRational::from_integer(2.into());
    let mut n1: SmallVec<[u64; 16]> = SmallVec::from_elem(0, n);
    for (i, j) in pairs(n) {
        let d = space.dist(i, j);
        if *d == one {
            n1[i] |= 1 << j;
            n1[j] |= 1 << i;
        } else if *d != two {
            return Err(MetricError::NotOneTwo {
                i,
                j,
                value: d.to_string(),
            });
        }
    }
    Ok(OneTwoSpace { n1 })
}

/// A 1-2 space on `n` points encoded as `C(n,2)` bits; bit
/// [`pair_index`]`(n, i, j)` is set exactly when `d(i, j) = 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct LabelCode {
    pub n: usize,
    pub code: u64,
}

impl LabelCode {
    /// Number of codes for `n` points, `2^C(n,2)`.
    pub fn count(n: usize) -> Result<u64, MetricError> {
        if n > MAX_CODE_POINTS {
            return Err(MetricError::TooManyPoints {
                n,
                max: MAX_CODE_POINTS,
            });
        }
        Ok(1u64 << pair_count(n))
    }
}

/// Decodes a label code. Code 0 is the all-1 space.
pub fn space_from_code(n: usize, code: u64) -> Result<OneTwoSpace, MetricError> {
    if code >= LabelCode::count(n)? {
        return Err(MetricError::CodeOutOfRange { n, code });
    }
    Ok(decode_unchecked(n, code))
}

/// Decoding without range checks, for sweeps that already own a valid range.
#[inline]
pub(crate) fn decode_unchecked(n: usize, code: u64) -> OneTwoSpace {
    let full = low_mask(n);
    let mut n1: SmallVec<[u64; 16]> = (0..n).map(|p| full & !(1 << p)).collect();
    let mut k = 0;
    for i in 0..n {
        for j in i + 1..n {
            if code >> k & 1 == 1 {
                n1[i] &= !(1 << j);
                n1[j] &= !(1 << i);
            }
            k += 1;
        }
    }
    OneTwoSpace { n1 }
}

/// Encodes a 1-2 space; the inverse of [`space_from_code`].
pub fn code_from_space(space: &OneTwoSpace) -> Result<LabelCode, MetricError> {
    let n = space.n();
    LabelCode::count(n)?;
    Ok(LabelCode {
        n,
        code: encode_unchecked(space),
    })
}

#[inline]
pub(crate) fn encode_unchecked(space: &OneTwoSpace) -> u64 {
    let n = space.n();
    let mut code = 0u64;
    let mut k = 0;
    for i in 0..n {
        let far = !space.n1[i];
        for j in i + 1..n {
            code |= (far >> j & 1) << k;
            k += 1;
        }
    }
    code
}
