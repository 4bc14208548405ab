//! Exhaustive and randomized verification.
//!
//! A sweep visits a set of label codes, computes each space's lines and
//! verdict, optionally runs every structural checker, and folds the results
//! into a [`TheoremReport`]. Code sets are cut into chunks that are processed
//! independently and merged with [`TheoremReport::merge`], which is
//! associative and commutative, so the final report does not depend on the
//! number of workers or on scheduling.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::{canonical_representatives, IsoStats};
use crate::lines::{all_lines, dbe_verdict, line_of, line_of_fast, DbeVerdict, MaskLines};
use crate::metric::{
    decode_unchecked, pairs, validate_metric, DistanceMatrix, LabelCode, MetricError, MetricSpace,
    OneTwoSpace, PointId,
};
use crate::pointset::PointSet;
use crate::structure::{
    check_claim_c0_in, check_twin_line_laws_in, class_size_check_in, classify_class, equiv_classes,
    full_cover_class_check_in, twin_free_shape_check_in, ClassShape, Conditional, Violation,
};

/// Largest point count for exhaustive sweeps.
pub const MAX_SWEEP_POINTS: usize = 8;

/// Codes per work unit.
const CHUNK: u64 = 1 << 16;

/// A half-open interval `[lo, hi)` of label codes for `n` points.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SweepRange {
    pub n: usize,
    pub lo: u64,
    pub hi: u64,
}

impl SweepRange {
    pub fn new(n: usize, lo: u64, hi: u64) -> Result<Self, MetricError> {
        let count = LabelCode::count(n)?;
        if lo > hi || hi > count {
            return Err(MetricError::CodeOutOfRange { n, code: hi.max(lo) });
        }
        Ok(SweepRange { n, lo, hi })
    }

    /// Every code for `n` points.
    pub fn full(n: usize) -> Result<Self, MetricError> {
        Self::new(n, 0, LabelCode::count(n)?)
    }

    pub fn len(&self) -> u64 {
        self.hi - self.lo
    }

    pub fn is_empty(&self) -> bool {
        self.lo == self.hi
    }

    /// Consecutive disjoint subranges of at most `size` codes.
    pub fn chunks(&self, size: u64) -> Vec<SweepRange> {
        assert!(size > 0);
        let mut out = Vec::new();
        let mut lo = self.lo;
        while lo < self.hi {
            let hi = self.hi.min(lo.saturating_add(size));
            out.push(SweepRange { n: self.n, lo, hi });
            lo = hi;
        }
        out
    }
}

/// Visits the space of every code in `range`, ascending. Returns the number
/// of visits.
pub fn enumerate_codes<F: FnMut(u64, &OneTwoSpace)>(range: SweepRange, mut visitor: F) -> u64 {
    for code in range.lo..range.hi {
        visitor(code, &decode_unchecked(range.n, code));
    }
    range.len()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepMode {
    /// Every label code.
    All,
    /// One canonical code per isomorphism class.
    Iso,
    /// An explicit list of codes, typically random.
    Sample,
}

/// The structural checkers run by a sweep.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CheckKind {
    DistinctLines,
    TwinLineLaws,
    FullCoverUniversal,
    TwinFreeClassShape,
    ClassSizeBound,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::DistinctLines,
        CheckKind::TwinLineLaws,
        CheckKind::FullCoverUniversal,
        CheckKind::TwinFreeClassShape,
        CheckKind::ClassSizeBound,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::DistinctLines => "distinct-lines",
            CheckKind::TwinLineLaws => "twin-line-laws",
            CheckKind::FullCoverUniversal => "full-cover-universal",
            CheckKind::TwinFreeClassShape => "twin-free-class-shape",
            CheckKind::ClassSizeBound => "class-size-bound",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CheckKind::DistinctLines => {
                "edges with different labels, adjacent 2-edges, and adjacent non-twin 1-edges span different lines"
            }
            CheckKind::TwinLineLaws => "lines meet a twin pair in both or neither, per the twin line laws",
            CheckKind::FullCoverUniversal => "a class covering all points spans a universal line",
            CheckKind::TwinFreeClassShape => {
                "twin-free spaces: every class is a uniform matching or inside an alternating 4-cycle"
            }
            CheckKind::ClassSizeBound => {
                "twin-free spaces without a universal line: classes have at most max(floor((n-1)/2), 4) edges"
            }
        }
    }
}

/// The violation with the smallest code seen by a checker.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ViolationWitness {
    pub code: u64,
    pub violation: Violation,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CheckTally {
    pub check: CheckKind,
    /// Spaces the checker applied to.
    pub spaces_checked: u64,
    /// Spaces skipped because the checker's hypothesis does not hold.
    pub not_applicable: u64,
    /// Total violated instances.
    pub violations: u64,
    /// Smallest codes with at least one violation, capped.
    pub witness_codes: Vec<u64>,
    pub first_violation: Option<ViolationWitness>,
}

impl CheckTally {
    fn new(check: CheckKind) -> Self {
        CheckTally {
            check,
            spaces_checked: 0,
            not_applicable: 0,
            violations: 0,
            witness_codes: Vec::new(),
            first_violation: None,
        }
    }

    fn record(&mut self, code: u64, outcome: Conditional, cap: usize) {
        match outcome {
            Conditional::NotApplicable => self.not_applicable += 1,
            Conditional::Checked(found) => {
                self.spaces_checked += 1;
                if let Some(first) = found.first() {
                    self.violations += found.len() as u64;
                    push_capped(&mut self.witness_codes, code, cap);
                    if self.first_violation.as_ref().is_none_or(|w| code < w.code) {
                        self.first_violation = Some(ViolationWitness {
                            code,
                            violation: first.clone(),
                        });
                    }
                }
            }
        }
    }

    fn merge(&mut self, other: CheckTally, cap: usize) {
        debug_assert_eq!(self.check, other.check);
        self.spaces_checked += other.spaces_checked;
        self.not_applicable += other.not_applicable;
        self.violations += other.violations;
        self.witness_codes = merge_capped(&self.witness_codes, &other.witness_codes, cap);
        if let Some(w) = other.first_violation {
            if self.first_violation.as_ref().is_none_or(|mine| w.code < mine.code) {
                self.first_violation = Some(w);
            }
        }
    }
}

fn push_capped(list: &mut Vec<u64>, code: u64, cap: usize) {
    // Codes arrive ascending within a chunk, but list order is restored by
    // `merge_capped` anyway.
    if list.len() < cap {
        list.push(code);
    } else if let Some(max) = list.iter().copied().max() {
        if code < max {
            let pos = list.iter().position(|&c| c == max).unwrap();
            list[pos] = code;
        }
    }
}

/// Smallest `cap` codes of the union, ascending.
fn merge_capped(a: &[u64], b: &[u64], cap: usize) -> Vec<u64> {
    let mut all: Vec<u64> = a.iter().chain(b).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.truncate(cap);
    all
}

/// A minimum line count and the smallest code attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct MinLines {
    pub lines: usize,
    pub code: u64,
}

fn fold_min(slot: &mut Option<MinLines>, candidate: MinLines) {
    if slot.is_none_or(|m| candidate < m) {
        *slot = Some(candidate);
    }
}

/// Number of edge classes of each shape, over all spaces swept.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct ShapeCounts {
    pub uniform_matching: u64,
    pub alt_c4_subset: u64,
    pub other: u64,
}

impl ShapeCounts {
    fn add(&mut self, shape: ClassShape) {
        match shape {
            ClassShape::UniformMatching => self.uniform_matching += 1,
            ClassShape::AltC4Subset => self.alt_c4_subset += 1,
            ClassShape::Other => self.other += 1,
        }
    }

    fn merge(&mut self, other: &ShapeCounts) {
        self.uniform_matching += other.uniform_matching;
        self.alt_c4_subset += other.alt_c4_subset;
        self.other += other.other;
    }
}

/// Aggregate of a sweep over 1-2 spaces on `n` points.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TheoremReport {
    pub n: usize,
    pub mode: SweepMode,
    pub total_codes: u64,
    /// Spaces without the De Bruijn-Erdos property. Always exact.
    pub dbe_failures: u64,
    /// Smallest failing codes, capped at `max_witnesses`.
    pub failure_witnesses: Vec<u64>,
    pub min_lines_overall: Option<MinLines>,
    /// Minimum over spaces with no universal line; `None` when every space
    /// has one (only at `n = 2`).
    pub min_lines_no_universal: Option<MinLines>,
    pub class_counts_by_shape: Option<ShapeCounts>,
    pub checks: Vec<CheckTally>,
    pub iso: Option<IsoStats>,
    pub max_witnesses: usize,
}

impl TheoremReport {
    fn empty(n: usize, mode: SweepMode, config: &SweepConfig) -> Self {
        let structure = config.structure_checks;
        TheoremReport {
            n,
            mode,
            total_codes: 0,
            dbe_failures: 0,
            failure_witnesses: Vec::new(),
            min_lines_overall: None,
            min_lines_no_universal: None,
            class_counts_by_shape: structure.then(ShapeCounts::default),
            checks: if structure {
                CheckKind::ALL.iter().map(|&k| CheckTally::new(k)).collect()
            } else {
                Vec::new()
            },
            iso: None,
            max_witnesses: config.max_witnesses,
        }
    }

    fn record_verdict(&mut self, code: u64, verdict: DbeVerdict) {
        self.total_codes += 1;
        if !verdict.holds {
            self.dbe_failures += 1;
            push_capped(&mut self.failure_witnesses, code, self.max_witnesses);
        }
        let m = MinLines {
            lines: verdict.line_count,
            code,
        };
        fold_min(&mut self.min_lines_overall, m);
        if !verdict.has_universal {
            fold_min(&mut self.min_lines_no_universal, m);
        }
    }

    fn absorb(&mut self, code: u64, space: &OneTwoSpace) {
        if self.checks.is_empty() {
            self.record_verdict(code, MaskLines::new(space).verdict());
            return;
        }
        let family = all_lines(space);
        self.record_verdict(code, DbeVerdict::from_family(&family));
        let classes = equiv_classes(&family, space);
        if let Some(counts) = self.class_counts_by_shape.as_mut() {
            for c in &classes {
                counts.add(classify_class(space, c));
            }
        }
        let cap = self.max_witnesses;
        for tally in &mut self.checks {
            let outcome = match tally.check {
                CheckKind::DistinctLines => Conditional::Checked(check_claim_c0_in(space, &family)),
                CheckKind::TwinLineLaws => {
                    Conditional::Checked(check_twin_line_laws_in(space, &family))
                }
                CheckKind::FullCoverUniversal => {
                    Conditional::Checked(full_cover_class_check_in(space, &classes))
                }
                CheckKind::TwinFreeClassShape => twin_free_shape_check_in(space, &classes),
                CheckKind::ClassSizeBound => class_size_check_in(space, &family, &classes),
            };
            tally.record(code, outcome, cap);
        }
    }

    /// Combines reports of disjoint code sets.
    pub fn merge(mut self, other: TheoremReport) -> TheoremReport {
        assert_eq!((self.n, self.mode), (other.n, other.mode));
        let cap = self.max_witnesses;
        self.total_codes += other.total_codes;
        self.dbe_failures += other.dbe_failures;
        self.failure_witnesses = merge_capped(&self.failure_witnesses, &other.failure_witnesses, cap);
        if let Some(m) = other.min_lines_overall {
            fold_min(&mut self.min_lines_overall, m);
        }
        if let Some(m) = other.min_lines_no_universal {
            fold_min(&mut self.min_lines_no_universal, m);
        }
        if let (Some(a), Some(b)) = (self.class_counts_by_shape.as_mut(), &other.class_counts_by_shape) {
            a.merge(b);
        }
        for (mine, theirs) in self.checks.iter_mut().zip(other.checks) {
            mine.merge(theirs, cap);
        }
        self
    }

    pub fn total_violations(&self) -> u64 {
        self.checks.iter().map(|c| c.violations).sum()
    }

    /// No De Bruijn-Erdos failure and no checker violation.
    pub fn is_clean(&self) -> bool {
        self.dbe_failures == 0 && self.total_violations() == 0
    }
}

/// Progress callback: `(codes done, codes total)`.
pub type Progress = Arc<dyn Fn(u64, u64) + Send + Sync>;

#[derive(Clone)]
pub struct SweepConfig {
    /// Worker threads; 1 runs on the calling thread.
    pub jobs: usize,
    /// Run every structural checker and tally class shapes. Otherwise only
    /// the word-level line kernel runs.
    pub structure_checks: bool,
    pub max_witnesses: usize,
    pub progress: Option<Progress>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            jobs: 1,
            structure_checks: true,
            max_witnesses: 100,
            progress: None,
        }
    }
}

impl std::fmt::Debug for SweepConfig {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SweepConfig")
            .field("jobs", &self.jobs)
            .field("structure_checks", &self.structure_checks)
            .field("max_witnesses", &self.max_witnesses)
            .finish()
    }
}

enum Unit<'a> {
    Range(SweepRange),
    List(&'a [u64]),
}

impl Unit<'_> {
    fn len(&self) -> u64 {
        match self {
            Unit::Range(r) => r.len(),
            Unit::List(l) => l.len() as u64,
        }
    }
}

fn run_units(n: usize, mode: SweepMode, units: Vec<Unit<'_>>, config: &SweepConfig) -> TheoremReport {
    let total: u64 = units.iter().map(Unit::len).sum();
    let done = AtomicU64::new(0);
    let process = |unit: &Unit<'_>| {
        let mut report = TheoremReport::empty(n, mode, config);
        match unit {
            Unit::Range(r) => {
                enumerate_codes(*r, |code, space| report.absorb(code, space));
            }
            Unit::List(codes) => {
                for &code in codes.iter() {
                    report.absorb(code, &decode_unchecked(n, code));
                }
            }
        }
        let now = done.fetch_add(unit.len(), Ordering::Relaxed) + unit.len();
        if let Some(progress) = &config.progress {
            progress(now, total);
        }
        report
    };
    let identity = || TheoremReport::empty(n, mode, config);
    if config.jobs <= 1 {
        units.iter().map(process).fold(identity(), TheoremReport::merge)
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(config.jobs)
            .build()
            .expect("thread pool");
        pool.install(|| units.par_iter().map(process).reduce(identity, TheoremReport::merge))
    }
}

/// Sweeps the codes of `range`.
pub fn sweep_range(range: SweepRange, config: &SweepConfig) -> TheoremReport {
    let units = range.chunks(CHUNK).into_iter().map(Unit::Range).collect();
    run_units(range.n, SweepMode::All, units, config)
}

/// Sweeps an explicit list of codes for `n` points.
pub fn sweep_codes(n: usize, codes: &[u64], config: &SweepConfig) -> Result<TheoremReport, MetricError> {
    let count = LabelCode::count(n)?;
    if let Some(&bad) = codes.iter().find(|&&c| c >= count) {
        return Err(MetricError::CodeOutOfRange { n, code: bad });
    }
    let units = codes.chunks(CHUNK as usize).map(Unit::List).collect();
    Ok(run_units(n, SweepMode::Sample, units, config))
}

/// Checks the De Bruijn-Erdos property on every 1-2 space on `n` points, or
/// on one canonical representative per isomorphism class.
pub fn verify_theorem(n: usize, mode: SweepMode, config: &SweepConfig) -> Result<TheoremReport, MetricError> {
    if !(2..=MAX_SWEEP_POINTS).contains(&n) {
        return Err(MetricError::TooManyPoints {
            n,
            max: MAX_SWEEP_POINTS,
        });
    }
    match mode {
        SweepMode::All => Ok(sweep_range(SweepRange::full(n)?, config)),
        SweepMode::Iso => {
            let reps = canonical_representatives(n)?;
            let units = reps.chunks(CHUNK as usize / 16).map(Unit::List).collect();
            let mut report = run_units(n, SweepMode::Iso, units, config);
            report.iso = Some(IsoStats {
                n,
                canonical_class_count: reps.len() as u64,
            });
            Ok(report)
        }
        SweepMode::Sample => Err(MetricError::Syntax {
            line: 0,
            message: "sample sweeps take an explicit code list".into(),
        }),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct MinLinesRow {
    pub n: usize,
    pub min_lines_overall: Option<MinLines>,
    pub min_lines_no_universal: Option<MinLines>,
}

/// Exact minimum line counts for each `n` in `n_lo..=n_hi`. Argmin codes are
/// the smallest attaining codes; the canonical code of a class is its
/// smallest member, so both modes report the same witnesses.
pub fn min_lines_table(
    n_lo: usize,
    n_hi: usize,
    mode: SweepMode,
    config: &SweepConfig,
) -> Result<Vec<MinLinesRow>, MetricError> {
    let config = SweepConfig {
        structure_checks: false,
        ..config.clone()
    };
    (n_lo..=n_hi)
        .map(|n| {
            let r = verify_theorem(n, mode, &config)?;
            Ok(MinLinesRow {
                n,
                min_lines_overall: r.min_lines_overall,
                min_lines_no_universal: r.min_lines_no_universal,
            })
        })
        .collect()
}

/// Uniform random codes for `n` points, reproducible from `seed`.
pub fn random_codes(n: usize, count: usize, seed: u64) -> Result<Vec<u64>, MetricError> {
    let total = LabelCode::count(n)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count).map(|_| rng.gen_range(0..total)).collect())
}

/// A pair on which the word-level line differs from the definitional one.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LineMismatch {
    pub pair: [PointId; 2],
    pub fast: PointSet,
    pub definitional: PointSet,
}

/// Compares [`line_of_fast`] with [`line_of`] on the implied general metric
/// for every pair.
pub fn check_line_oracle(space: &OneTwoSpace) -> Vec<LineMismatch> {
    let metric = space.to_metric();
    pairs(space.n())
        .filter_map(|(u, v)| {
            let fast = line_of_fast(space, u, v);
            let definitional = line_of(&metric, u, v);
            (fast != definitional).then(|| LineMismatch {
                pair: [u, v],
                fast,
                definitional,
            })
        })
        .collect()
}

/// One of the six 6-point spaces extending the five-point configuration
/// `u, v, w, x, y` by a sixth point `z` off the lines `ux` and `vw`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WitnessSpace {
    /// Distances `d(u,z) = d(x,z)`, `d(v,z) = d(w,z)`, and `d(y,z)`.
    pub uz_xz: u8,
    pub vz_wz: u8,
    pub yz: u8,
    pub code: u64,
    pub line_count: usize,
    pub has_universal: bool,
    pub lines: Vec<PointSet>,
    #[serde(skip)]
    pub space: OneTwoSpace,
}

/// Point names of the six-point witnesses, in index order.
pub const WITNESS_POINTS: [&str; 6] = ["u", "v", "w", "x", "y", "z"];

/// Unit-distance pairs of the five-point configuration on `u, v, w, x, y`
/// (`0..5`): `d(u,w) = d(u,x) = d(v,w) = d(v,x) = d(u,y) = d(w,y) = 1`; the
/// pairs `uv`, `wx`, `vy`, `xy` are at distance 2.
pub const FIVE_POINT_UNIT_PAIRS: [(PointId, PointId); 6] = [(0, 2), (0, 3), (1, 2), (1, 3), (0, 4), (2, 4)];

pub fn five_point_configuration() -> OneTwoSpace {
    OneTwoSpace::from_unit_pairs(5, &FIVE_POINT_UNIT_PAIRS)
}

pub fn c8_witnesses() -> Vec<WitnessSpace> {
    const U: PointId = 0;
    const V: PointId = 1;
    const W: PointId = 2;
    const X: PointId = 3;
    const Y: PointId = 4;
    const Z: PointId = 5;
    let mut out = Vec::with_capacity(6);
    for (uz_xz, vz_wz) in [(1u8, 1u8), (1, 2), (2, 2)] {
        for yz in [1u8, 2] {
            let mut unit = FIVE_POINT_UNIT_PAIRS.to_vec();
            if uz_xz == 1 {
                unit.extend([(U, Z), (X, Z)]);
            }
            if vz_wz == 1 {
                unit.extend([(V, Z), (W, Z)]);
            }
            if yz == 1 {
                unit.push((Y, Z));
            }
            let space = OneTwoSpace::from_unit_pairs(6, &unit);
            let family = all_lines(&space);
            out.push(WitnessSpace {
                uz_xz,
                vz_wz,
                yz,
                code: crate::metric::encode_unchecked(&space),
                line_count: family.line_count(),
                has_universal: family.has_universal(),
                lines: family.lines().to_vec(),
                space,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ExhaustiveRow {
    pub n: usize,
    pub codes: u64,
    pub failures: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RandomRow {
    pub n: usize,
    pub trials: u64,
    pub failures: u64,
    /// Restarts of the matrix sampler after too many repairs.
    pub restarts: u64,
    pub failure_examples: Vec<DistanceMatrix>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SmallSpaceReport {
    pub seed: u64,
    pub exhaustive: Vec<ExhaustiveRow>,
    pub random: Vec<RandomRow>,
}

impl SmallSpaceReport {
    pub fn failures(&self) -> u64 {
        self.exhaustive.iter().map(|r| r.failures).sum::<u64>()
            + self.random.iter().map(|r| r.failures).sum::<u64>()
    }
}

/// Denominators of sampled distances are at most this.
pub const SAMPLE_MAX_DENOM: i64 = 16;
/// Sampled distances lie in `(0, SAMPLE_MAX_VALUE]`.
pub const SAMPLE_MAX_VALUE: i64 = 4;
/// Repairs of violating triples before the sampler starts over.
pub const SAMPLE_REPAIR_CAP: usize = 64;

fn sample_distance<R: Rng>(rng: &mut R) -> (i64, i64) {
    let q = rng.gen_range(1..=SAMPLE_MAX_DENOM);
    let p = rng.gen_range(1..=SAMPLE_MAX_VALUE * q);
    (p, q)
}

/// Compares `a/b` with `c/d` for positive denominators.
fn less(a: (i64, i64), b: (i64, i64)) -> bool {
    a.0 * b.1 < b.0 * a.1
}

fn add(a: (i64, i64), b: (i64, i64)) -> (i64, i64) {
    (a.0 * b.1 + b.0 * a.1, a.1 * b.1)
}

/// Samples a random metric on `n` points with distances `p/q`, `q <= 16`,
/// `0 < p/q <= 4`. A matrix with a violated triangle inequality has the
/// offending long side resampled; after [`SAMPLE_REPAIR_CAP`] repairs the
/// whole matrix is redrawn. Returns the space and the number of redraws.
pub fn random_rational_metric<R: Rng>(n: usize, rng: &mut R) -> (MetricSpace, u64) {
    let mut restarts = 0;
    loop {
        let mut d = vec![vec![(0i64, 1i64); n]; n];
        for (i, j) in pairs(n) {
            let x = sample_distance(rng);
            d[i][j] = x;
            d[j][i] = x;
        }
        let mut repairs = 0;
        let ok = loop {
            let bad = (0..n).find_map(|i| {
                (i + 1..n).find_map(|k| {
                    (0..n)
                        .filter(|&j| j != i && j != k)
                        .find(|&j| less(add(d[i][j], d[j][k]), d[i][k]))
                        .map(|_| (i, k))
                })
            });
            match bad {
                None => break true,
                Some(_) if repairs == SAMPLE_REPAIR_CAP => break false,
                Some((i, k)) => {
                    let x = sample_distance(rng);
                    d[i][k] = x;
                    d[k][i] = x;
                    repairs += 1;
                }
            }
        };
        if ok {
            let rows = d
                .iter()
                .map(|r| r.iter().map(|&(p, q)| BigRational::new(p.into(), q.into())).collect())
                .collect();
            let matrix = DistanceMatrix::from_rows(rows).expect("nonnegative square");
            let space = validate_metric(matrix).expect("repaired matrix is a metric");
            return (space, restarts);
        }
        restarts += 1;
    }
}

/// Mixes a seed with a stream index so each trial has its own generator.
fn trial_seed(seed: u64, n: usize, trial: u64) -> u64 {
    let mut z = seed ^ (n as u64).rotate_left(48) ^ trial.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Point counts covered by [`verify_small_spaces`].
pub const SMALL_POINT_COUNTS: [usize; 3] = [2, 3, 4];

/// The De Bruijn-Erdos property on small spaces: every 1-2 space on 2, 3
/// and 4 points, and `trials` random rational metrics at each of those sizes.
/// The random part can only ever report that no counterexample was found.
pub fn verify_small_spaces(trials: u64, seed: u64, jobs: usize) -> SmallSpaceReport {
    let exhaustive = SMALL_POINT_COUNTS
        .iter()
        .map(|&n| {
            let mut failures = 0;
            let codes = enumerate_codes(SweepRange::full(n).expect("small n"), |_, space| {
                if !dbe_verdict(space).holds {
                    failures += 1;
                }
            });
            ExhaustiveRow { n, codes, failures }
        })
        .collect();

    let run_trial = |n: usize, t: u64| {
        let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, n, t));
        let (space, restarts) = random_rational_metric(n, &mut rng);
        let holds = dbe_verdict(&space).holds;
        (holds, restarts, space)
    };
    let random = SMALL_POINT_COUNTS
        .iter()
        .map(|&n| {
            let results: Vec<(bool, u64, Option<DistanceMatrix>)> = {
                let one = |t| {
                    let (holds, restarts, space) = run_trial(n, t);
                    (holds, restarts, (!holds).then(|| space.matrix().clone()))
                };
                if jobs <= 1 {
                    (0..trials).map(one).collect()
                } else {
                    let pool = rayon::ThreadPoolBuilder::new()
                        .num_threads(jobs)
                        .build()
                        .expect("thread pool");
                    pool.install(|| (0..trials).into_par_iter().map(one).collect())
                }
            };
            let failures = results.iter().filter(|r| !r.0).count() as u64;
            RandomRow {
                n,
                trials,
                failures,
                restarts: results.iter().map(|r| r.1).sum(),
                failure_examples: results.into_iter().filter_map(|r| r.2).take(10).collect(),
            }
        })
        .collect();
    SmallSpaceReport {
        seed,
        exhaustive,
        random,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn enumerate_counts() {
        assert_eq!(enumerate_codes(SweepRange::full(3).unwrap(), |_, _| {}), 8);
        assert_eq!(enumerate_codes(SweepRange::full(4).unwrap(), |_, _| {}), 64);
        let mut seen = Vec::new();
        enumerate_codes(SweepRange::new(4, 5, 9).unwrap(), |c, s| {
            assert_eq!(crate::metric::encode_unchecked(s), c);
            seen.push(c);
        });
        assert_eq!(seen, vec![5, 6, 7, 8]);
    }

    #[test]
    fn range_validation() {
        assert!(SweepRange::new(3, 0, 9).is_err());
        assert!(SweepRange::new(3, 5, 4).is_err());
        assert!(SweepRange::new(3, 8, 8).unwrap().is_empty());
        let chunks = SweepRange::full(4).unwrap().chunks(10);
        assert_eq!(chunks.len(), 7);
        assert_eq!(chunks.iter().map(SweepRange::len).sum::<u64>(), 64);
    }

    #[test]
    fn three_points() {
        let r = verify_theorem(3, SweepMode::All, &SweepConfig::default()).unwrap();
        assert_eq!((r.total_codes, r.dbe_failures), (8, 0));
        assert_eq!(r.min_lines_overall, Some(MinLines { lines: 1, code: 1 }));
        assert_eq!(r.min_lines_no_universal, Some(MinLines { lines: 3, code: 0 }));
        assert!(r.is_clean());
    }

    #[test]
    fn two_points_have_only_universal_lines() {
        let r = verify_theorem(2, SweepMode::All, &SweepConfig::default()).unwrap();
        assert_eq!(r.min_lines_overall, Some(MinLines { lines: 1, code: 0 }));
        assert_eq!(r.min_lines_no_universal, None);
    }

    #[test]
    fn iso_four_points() {
        let r = verify_theorem(4, SweepMode::Iso, &SweepConfig::default()).unwrap();
        assert_eq!(r.iso.unwrap().canonical_class_count, 11);
        assert_eq!(r.total_codes, 11);
        assert_eq!(r.dbe_failures, 0);
    }

    #[test]
    fn sweep_rejects_bad_n() {
        assert!(verify_theorem(1, SweepMode::All, &SweepConfig::default()).is_err());
        assert!(verify_theorem(9, SweepMode::All, &SweepConfig::default()).is_err());
        assert!(sweep_codes(3, &[8], &SweepConfig::default()).is_err());
    }

    #[test]
    fn witnesses_capped_and_smallest() {
        let mut list = Vec::new();
        for c in [9, 3, 7, 1, 8] {
            push_capped(&mut list, c, 3);
        }
        list.sort();
        assert_eq!(list, vec![1, 3, 7]);
        assert_eq!(merge_capped(&[1, 5, 9], &[2, 5], 3), vec![1, 2, 5]);
    }

    #[test]
    fn zero_trials() {
        let r = verify_small_spaces(0, 7, 1);
        assert!(r.random.iter().all(|row| row.trials == 0 && row.failures == 0));
        assert_eq!(
            r.exhaustive.iter().map(|row| row.codes).collect::<Vec<_>>(),
            vec![2, 8, 64]
        );
        assert_eq!(r.failures(), 0);
    }

    #[test]
    fn sampler_respects_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for n in 2..=5 {
            let (space, _) = random_rational_metric(n, &mut rng);
            for (i, j) in pairs(n) {
                let d = space.dist(i, j);
                assert!(*d.denom() <= SAMPLE_MAX_DENOM.into());
                assert!(*d > BigRational::from_integer(0.into()));
                assert!(*d <= BigRational::from_integer(SAMPLE_MAX_VALUE.into()));
            }
        }
    }
}
