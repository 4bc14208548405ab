//! Command-line interface for `metric-lines`.
//!
//! Exit codes: 0 on success, 1 on usage or input errors, 2 when a check
//! found a De Bruijn-Erdos failure or a structural violation.

use std::io::Write;
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use metric_lines::canon::canonical_code;
use metric_lines::lines::{all_lines, DbeVerdict};
use metric_lines::metric::{as_one_two, code_from_space, parse_distance_matrix, validate_metric, DistanceMatrix};
use metric_lines::structure::{
    check_claim_c0_in, check_twin_line_laws_in, class_size_check_in, classify_class, equiv_classes,
    full_cover_class_check_in, twin_free_shape_check_in, twin_pairs, ClassShape, Conditional, EdgePair,
    Violation,
};
use metric_lines::verify::{
    c8_witnesses, check_line_oracle, min_lines_table, random_codes, sweep_codes, verify_small_spaces,
    verify_theorem, CheckKind, LineMismatch, MinLinesRow, Progress, SmallSpaceReport, SweepConfig, SweepMode,
    TheoremReport, WitnessSpace, MAX_SWEEP_POINTS, WITNESS_POINTS,
};
use metric_lines::PointSet;

pub const SCHEMA_VERSION: &str = "1";

/// Progress goes to standard error once per this many codes.
const PROGRESS_STEP: u64 = 1 << 20;

/// Spaces at or above this many points need `--allow-n8` for exhaustive runs.
const SLOW_N: usize = 8;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_FAILURE_FOUND: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "metric-lines", version, about = "Lines and the De Bruijn-Erdos property in finite metric spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Emit a JSON report instead of text.
    #[arg(long, global = true)]
    json: bool,
    /// Worker threads.
    #[arg(long, global = true, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=1024))]
    jobs: u64,
    /// Report runtime_ms as 0 so repeated runs are byte-identical.
    #[arg(long, global = true)]
    no_timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
enum ModeArg {
    All,
    Iso,
}

impl From<ModeArg> for SweepMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::All => SweepMode::All,
            ModeArg::Iso => SweepMode::Iso,
        }
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Lines, verdict and structure of the space in a matrix file.
    Analyze { file: PathBuf },
    /// Check the De Bruijn-Erdos property on every 1-2 space on n points.
    Enumerate {
        #[arg(long)]
        n: usize,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long, default_value_t = 100)]
        max_witnesses: usize,
        /// Also run the structural checkers at n = 8 (slow).
        #[arg(long)]
        full_checks: bool,
        /// Permit the 2^28-code sweep at n = 8.
        #[arg(long)]
        allow_n8: bool,
    },
    /// Run every structural checker over all codes, or over random codes
    /// with --sample.
    Claims {
        #[arg(long)]
        n: usize,
        #[arg(long)]
        sample: bool,
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        max_witnesses: usize,
        /// Also compare word-level lines against the definitional ones.
        #[arg(long)]
        oracle: bool,
        #[arg(long)]
        allow_n8: bool,
    },
    /// The six 6-point spaces extending the five-point configuration.
    #[command(name = "witness-c8")]
    WitnessC8,
    /// Minimum line counts over all 1-2 spaces for each n.
    MinLines {
        #[arg(long, default_value_t = 2)]
        n_lo: usize,
        #[arg(long, default_value_t = 7)]
        n_hi: usize,
        #[arg(long, value_enum, default_value = "all")]
        mode: ModeArg,
        #[arg(long)]
        allow_n8: bool,
    },
    /// All 1-2 spaces on 2-4 points plus random rational metrics on 2-4
    /// points.
    RandomMetrics {
        #[arg(long, default_value_t = 100_000)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct JsonReport<'a, I: Serialize, R: Serialize> {
    schema_version: &'static str,
    subcommand: &'a str,
    inputs: I,
    results: R,
    runtime_ms: u64,
}

/// A rendered subcommand outcome.
struct Outcome {
    name: &'static str,
    text: String,
    json: serde_json::Result<String>,
    failures: u64,
}

impl Outcome {
    fn new<I: Serialize, R: Serialize>(
        name: &'static str,
        inputs: I,
        results: R,
        text: String,
        failures: u64,
        runtime_ms: u64,
    ) -> Self {
        let report = JsonReport {
            schema_version: SCHEMA_VERSION,
            subcommand: name,
            inputs,
            results,
            runtime_ms,
        };
        Outcome {
            name,
            text,
            json: serde_json::to_string(&report),
            failures,
        }
    }
}

/// Runs the CLI on `args` (including the program name), writing to `out`
/// and `err`. Returns the process exit code.
pub fn run_cli<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let sink: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(sink, "{rendered}");
            return code;
        }
    };
    match execute(&cli) {
        Ok(outcome) => {
            let written = if cli.json {
                match outcome.json {
                    Ok(s) => writeln!(out, "{s}"),
                    Err(e) => {
                        let _ = writeln!(err, "error: serializing {} report: {e}", outcome.name);
                        return EXIT_USAGE;
                    }
                }
            } else {
                write!(out, "{}", outcome.text)
            };
            if let Err(e) = written {
                let _ = writeln!(err, "error: writing output: {e}");
                return EXIT_USAGE;
            }
            if outcome.failures > 0 {
                EXIT_FAILURE_FOUND
            } else {
                EXIT_OK
            }
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e:#}");
            EXIT_USAGE
        }
    }
}

fn execute(cli: &Cli) -> anyhow::Result<Outcome> {
    let start = Instant::now();
    let jobs = cli.jobs as usize;
    let elapsed = || {
        if cli.no_timing {
            0
        } else {
            start.elapsed().as_millis() as u64
        }
    };
    match &cli.command {
        Command::Analyze { file } => analyze(file, elapsed),
        Command::Enumerate {
            n,
            mode,
            max_witnesses,
            full_checks,
            allow_n8,
        } => {
            check_n(*n, *allow_n8 || *mode == ModeArg::Iso)?;
            let config = SweepConfig {
                jobs,
                structure_checks: *n < SLOW_N || *full_checks,
                max_witnesses: *max_witnesses,
                progress: progress_for(*n, *mode == ModeArg::All),
            };
            let report = verify_theorem(*n, (*mode).into(), &config)?;
            #[derive(Serialize)]
            struct Inputs {
                n: usize,
                mode: ModeArg,
                max_witnesses: usize,
                structure_checks: bool,
            }
            let inputs = Inputs {
                n: *n,
                mode: *mode,
                max_witnesses: *max_witnesses,
                structure_checks: config.structure_checks,
            };
            let text = theorem_text(&report);
            let failures = report.dbe_failures + report.total_violations();
            Ok(Outcome::new("enumerate", inputs, &report, text, failures, elapsed()))
        }
        Command::Claims {
            n,
            sample,
            trials,
            seed,
            max_witnesses,
            oracle,
            allow_n8,
        } => claims(
            ClaimsInputs {
                n: *n,
                sample: *sample,
                trials: sample.then_some(*trials),
                seed: sample.then_some(*seed),
                max_witnesses: *max_witnesses,
                oracle: *oracle,
            },
            *allow_n8,
            jobs,
            elapsed,
        ),
        Command::WitnessC8 => {
            let witnesses = c8_witnesses();
            let short = witnesses.iter().filter(|w| w.line_count < 6).count() as u64;
            #[derive(Serialize)]
            struct Results<'a> {
                points: [&'static str; 6],
                witnesses: &'a [WitnessSpace],
                min_line_count: usize,
                below_six: u64,
            }
            let results = Results {
                points: WITNESS_POINTS,
                witnesses: &witnesses,
                min_line_count: witnesses.iter().map(|w| w.line_count).min().unwrap_or(0),
                below_six: short,
            };
            let text = witness_text(&witnesses);
            Ok(Outcome::new("witness-c8", serde_json::json!({}), results, text, short, elapsed()))
        }
        Command::MinLines {
            n_lo,
            n_hi,
            mode,
            allow_n8,
        } => {
            if n_lo > n_hi || *n_lo < 2 {
                bail!("need 2 <= --n-lo <= --n-hi, got {n_lo}..{n_hi}");
            }
            check_n(*n_hi, *allow_n8 || *mode == ModeArg::Iso)?;
            let config = SweepConfig {
                jobs,
                structure_checks: false,
                progress: None,
                ..SweepConfig::default()
            };
            let rows = min_lines_table(*n_lo, *n_hi, (*mode).into(), &config)?;
            let below = rows
                .iter()
                .filter(|r| r.min_lines_no_universal.is_some_and(|m| m.lines < r.n))
                .count() as u64;
            #[derive(Serialize)]
            struct Inputs {
                n_lo: usize,
                n_hi: usize,
                mode: ModeArg,
            }
            #[derive(Serialize)]
            struct Results<'a> {
                rows: &'a [MinLinesRow],
                rows_below_n: u64,
            }
            let text = min_lines_text(&rows);
            Ok(Outcome::new(
                "min-lines",
                Inputs {
                    n_lo: *n_lo,
                    n_hi: *n_hi,
                    mode: *mode,
                },
                Results {
                    rows: &rows,
                    rows_below_n: below,
                },
                text,
                below,
                elapsed(),
            ))
        }
        Command::RandomMetrics { trials, seed } => {
            let report = verify_small_spaces(*trials, *seed, jobs);
            #[derive(Serialize)]
            struct Inputs {
                trials: u64,
                seed: u64,
            }
            #[derive(Serialize)]
            struct Results<'a> {
                #[serde(flatten)]
                report: &'a SmallSpaceReport,
                failures: u64,
                conclusion: &'static str,
            }
            let failures = report.failures();
            let text = small_text(&report);
            Ok(Outcome::new(
                "random-metrics",
                Inputs {
                    trials: *trials,
                    seed: *seed,
                },
                Results {
                    report: &report,
                    failures,
                    conclusion: conclusion(failures),
                },
                text,
                failures,
                elapsed(),
            ))
        }
    }
}

fn conclusion(failures: u64) -> &'static str {
    if failures == 0 {
        "no counterexample found"
    } else {
        "counterexample found"
    }
}

fn check_n(n: usize, allow_slow: bool) -> anyhow::Result<()> {
    if !(2..=MAX_SWEEP_POINTS).contains(&n) {
        bail!("n must be between 2 and {MAX_SWEEP_POINTS}, got {n}");
    }
    if n >= SLOW_N && !allow_slow {
        bail!("the n = {n} sweep visits 2^{} codes; pass --allow-n8 to run it", n * (n - 1) / 2);
    }
    Ok(())
}

fn progress_for(n: usize, exhaustive: bool) -> Option<Progress> {
    if !exhaustive || n < 7 {
        return None;
    }
    let last = AtomicU64::new(0);
    Some(Arc::new(move |done: u64, total: u64| {
        let step = done / PROGRESS_STEP;
        if last.fetch_max(step, Ordering::Relaxed) < step {
            eprintln!("progress: {done}/{total} codes");
        }
    }))
}

#[derive(Serialize)]
struct ClaimsInputs {
    n: usize,
    sample: bool,
    trials: Option<u64>,
    seed: Option<u64>,
    max_witnesses: usize,
    oracle: bool,
}

#[derive(Serialize)]
struct OracleTally {
    spaces: u64,
    mismatched_spaces: u64,
    first: Option<(u64, LineMismatch)>,
}

fn claims(inputs: ClaimsInputs, allow_n8: bool, jobs: usize, elapsed: impl Fn() -> u64) -> anyhow::Result<Outcome> {
    let n = inputs.n;
    let config = SweepConfig {
        jobs,
        structure_checks: true,
        max_witnesses: inputs.max_witnesses,
        progress: progress_for(n, !inputs.sample),
    };
    let codes = if inputs.sample {
        if !(2..=metric_lines::metric::MAX_CODE_POINTS).contains(&n) {
            bail!(
                "n must be between 2 and {} for sampling, got {n}",
                metric_lines::metric::MAX_CODE_POINTS
            );
        }
        Some(random_codes(n, inputs.trials.unwrap_or(0) as usize, inputs.seed.unwrap_or(0))?)
    } else {
        check_n(n, allow_n8)?;
        None
    };
    let report = match &codes {
        Some(codes) => sweep_codes(n, codes, &config)?,
        None => verify_theorem(n, SweepMode::All, &config)?,
    };
    let oracle = inputs.oracle.then(|| {
        let all: Vec<u64> = match &codes {
            Some(c) => c.clone(),
            None => (0..1u64 << (n * (n - 1) / 2)).collect(),
        };
        let mut tally = OracleTally {
            spaces: 0,
            mismatched_spaces: 0,
            first: None,
        };
        for code in all {
            let space = metric_lines::space_from_code(n, code).expect("code in range");
            tally.spaces += 1;
            let bad = check_line_oracle(&space);
            if let Some(first) = bad.into_iter().next() {
                tally.mismatched_spaces += 1;
                if tally.first.as_ref().is_none_or(|(c, _)| code < *c) {
                    tally.first = Some((code, first));
                }
            }
        }
        tally
    });
    let mut text = theorem_text(&report);
    if let Some(o) = &oracle {
        text.push_str(&format!(
            "check line-oracle: spaces={} violations={}\n",
            o.spaces, o.mismatched_spaces
        ));
    }
    let failures =
        report.dbe_failures + report.total_violations() + oracle.as_ref().map_or(0, |o| o.mismatched_spaces);
    #[derive(Serialize)]
    struct Results<'a> {
        #[serde(flatten)]
        report: &'a TheoremReport,
        line_oracle: Option<OracleTally>,
    }
    Ok(Outcome::new(
        "claims",
        inputs,
        Results {
            report: &report,
            line_oracle: oracle,
        },
        text,
        failures,
        elapsed(),
    ))
}

#[derive(Serialize)]
struct LineEntry {
    line: PointSet,
    pairs: Vec<[usize; 2]>,
}

#[derive(Serialize)]
struct ClassEntry {
    edges: Vec<EdgePair>,
    line: PointSet,
    shape: ClassShape,
}

#[derive(Serialize)]
struct CheckEntry {
    check: CheckKind,
    applicable: bool,
    violations: Vec<Violation>,
}

#[derive(Serialize)]
struct Structure {
    twin_pairs: Vec<[usize; 2]>,
    classes: Vec<ClassEntry>,
    checks: Vec<CheckEntry>,
}

#[derive(Serialize)]
struct AnalyzeResults {
    n: usize,
    matrix: DistanceMatrix,
    is_one_two: bool,
    label_code: Option<u64>,
    canonical_code: Option<u64>,
    lines: Vec<LineEntry>,
    verdict: DbeVerdict,
    structure: Option<Structure>,
    violations: u64,
}

fn analyze(file: &PathBuf, elapsed: impl Fn() -> u64) -> anyhow::Result<Outcome> {
    let text = std::fs::read_to_string(file).with_context(|| format!("reading {}", file.display()))?;
    let matrix = parse_distance_matrix(&text).with_context(|| format!("parsing {}", file.display()))?;
    let space = validate_metric(matrix).with_context(|| format!("validating {}", file.display()))?;
    let n = space.n();
    if n < 2 {
        bail!("{}: a space needs at least 2 points to have lines", file.display());
    }
    let one_two = as_one_two(&space).ok();
    let family = match &one_two {
        Some(s) => all_lines(s),
        None => all_lines(&space),
    };
    let verdict = DbeVerdict::from_family(&family);
    let lines: Vec<LineEntry> = family
        .lines()
        .iter()
        .enumerate()
        .map(|(idx, line)| LineEntry {
            line: line.clone(),
            pairs: metric_lines::metric::pairs(n)
                .zip(family.pair_to_line())
                .filter(|(_, &l)| l == idx)
                .map(|((u, v), _)| [u, v])
                .collect(),
        })
        .collect();

    let structure = one_two.as_ref().map(|s| {
        let classes = equiv_classes(&family, s);
        let checks = vec![
            (CheckKind::DistinctLines, Conditional::Checked(check_claim_c0_in(s, &family))),
            (CheckKind::TwinLineLaws, Conditional::Checked(check_twin_line_laws_in(s, &family))),
            (CheckKind::FullCoverUniversal, Conditional::Checked(full_cover_class_check_in(s, &classes))),
            (CheckKind::TwinFreeClassShape, twin_free_shape_check_in(s, &classes)),
            (CheckKind::ClassSizeBound, class_size_check_in(s, &family, &classes)),
        ];
        Structure {
            twin_pairs: twin_pairs(s).into_iter().map(|(u, v)| [u, v]).collect(),
            classes: classes
                .iter()
                .map(|c| ClassEntry {
                    edges: c.edges.clone(),
                    line: c.line.clone(),
                    shape: classify_class(s, c),
                })
                .collect(),
            checks: checks
                .into_iter()
                .map(|(check, outcome)| CheckEntry {
                    check,
                    applicable: outcome.is_applicable(),
                    violations: outcome.violations().to_vec(),
                })
                .collect(),
        }
    });
    let violations = structure.as_ref().map_or(0, |s| {
        s.checks.iter().map(|c| c.violations.len() as u64).sum()
    });
    let results = AnalyzeResults {
        n,
        matrix: space.matrix().clone(),
        is_one_two: one_two.is_some(),
        label_code: one_two.as_ref().and_then(|s| code_from_space(s).ok()).map(|c| c.code),
        canonical_code: one_two.as_ref().and_then(|s| canonical_code(s).ok()).map(|c| c.code),
        lines,
        verdict,
        structure,
        violations,
    };
    let text = analyze_text(&results);
    let failures = violations + u64::from(!verdict.holds);
    #[derive(Serialize)]
    struct Inputs {
        file: String,
    }
    Ok(Outcome::new(
        "analyze",
        Inputs {
            file: file.display().to_string(),
        },
        results,
        text,
        failures,
        elapsed(),
    ))
}

fn analyze_text(r: &AnalyzeResults) -> String {
    let mut s = format!("points: {}\n", r.n);
    if r.is_one_two {
        s.push_str("1-2 metric space: yes\n");
        if let Some(code) = r.label_code {
            s.push_str(&format!("label code: {code}\n"));
        }
        if let Some(code) = r.canonical_code {
            s.push_str(&format!("canonical code: {code}\n"));
        }
    } else {
        s.push_str("1-2 metric space: no\n");
    }
    s.push_str(&format!("distinct lines: {}\n", r.verdict.line_count));
    for entry in &r.lines {
        let pairs: Vec<String> = entry.pairs.iter().map(|[u, v]| format!("{u}{v}")).collect();
        s.push_str(&format!("  {} via {}\n", entry.line, pairs.join(" ")));
    }
    s.push_str(&format!(
        "universal line: {}\n",
        if r.verdict.has_universal { "present" } else { "absent" }
    ));
    s.push_str(&format!(
        "De Bruijn-Erdos property: {}\n",
        if r.verdict.holds { "holds" } else { "FAILS" }
    ));
    if let Some(st) = &r.structure {
        let twins: Vec<String> = st.twin_pairs.iter().map(|[u, v]| format!("{{{u},{v}}}")).collect();
        s.push_str(&format!(
            "twin pairs: {}\n",
            if twins.is_empty() { "none".to_string() } else { twins.join(" ") }
        ));
        for c in &st.classes {
            let edges: Vec<String> = c.edges.iter().map(|e| format!("{}{}:{}", e.u, e.v, e.label)).collect();
            s.push_str(&format!("  class {} -> {} [{}]\n", edges.join(" "), c.line, c.shape.name()));
        }
        for c in &st.checks {
            if c.applicable {
                s.push_str(&format!("check {}: violations={}\n", c.check.name(), c.violations.len()));
            } else {
                s.push_str(&format!("check {}: not applicable\n", c.check.name()));
            }
        }
    }
    s
}

fn theorem_text(r: &TheoremReport) -> String {
    let mode = match r.mode {
        SweepMode::All => "all codes",
        SweepMode::Iso => "isomorphism classes",
        SweepMode::Sample => "sampled codes",
    };
    let mut s = format!("n = {} ({mode})\n", r.n);
    s.push_str(&format!("spaces visited: {}\n", r.total_codes));
    if let Some(iso) = r.iso {
        s.push_str(&format!("isomorphism classes: {}\n", iso.canonical_class_count));
    }
    s.push_str(&format!("De Bruijn-Erdos failures: {}\n", r.dbe_failures));
    if !r.failure_witnesses.is_empty() {
        let codes: Vec<String> = r.failure_witnesses.iter().map(u64::to_string).collect();
        s.push_str(&format!("failing codes: {}\n", codes.join(" ")));
    }
    let show = |m: Option<metric_lines::verify::MinLines>| {
        m.map_or("n/a".to_string(), |m| format!("{} (code {})", m.lines, m.code))
    };
    s.push_str(&format!("min lines: {}\n", show(r.min_lines_overall)));
    s.push_str(&format!("min lines without universal line: {}\n", show(r.min_lines_no_universal)));
    if let Some(c) = r.class_counts_by_shape {
        s.push_str(&format!(
            "class shapes: UNIFORM_MATCHING={} ALT_C4_SUBSET={} OTHER={}\n",
            c.uniform_matching, c.alt_c4_subset, c.other
        ));
    }
    for c in &r.checks {
        s.push_str(&format!(
            "check {}: spaces={} not_applicable={} violations={}\n",
            c.check.name(),
            c.spaces_checked,
            c.not_applicable,
            c.violations
        ));
    }
    s
}

fn witness_text(ws: &[WitnessSpace]) -> String {
    let mut s = String::from("six-point extensions (points u v w x y z = 0..5)\n");
    for w in ws {
        s.push_str(&format!(
            "d(u,z)=d(x,z)={} d(v,z)=d(w,z)={} d(y,z)={}: code {} lines {}{}\n",
            w.uz_xz,
            w.vz_wz,
            w.yz,
            w.code,
            w.line_count,
            if w.has_universal { " (universal line)" } else { "" }
        ));
    }
    s
}

fn min_lines_text(rows: &[MinLinesRow]) -> String {
    let mut s = String::from("n  min_lines (code)  min_lines_no_universal (code)\n");
    for r in rows {
        let cell = |m: Option<metric_lines::verify::MinLines>| {
            m.map_or("-".to_string(), |m| format!("{} ({})", m.lines, m.code))
        };
        s.push_str(&format!(
            "{}  {}  {}\n",
            r.n,
            cell(r.min_lines_overall),
            cell(r.min_lines_no_universal)
        ));
    }
    s
}

fn small_text(r: &SmallSpaceReport) -> String {
    let mut s = String::new();
    for row in &r.exhaustive {
        s.push_str(&format!(
            "1-2 spaces, n = {}: {} codes, {} failures\n",
            row.n, row.codes, row.failures
        ));
    }
    for row in &r.random {
        s.push_str(&format!(
            "random rational metrics, n = {}: {} trials (seed {}), {} failures\n",
            row.n, row.trials, r.seed, row.failures
        ));
    }
    s.push_str(&format!("result: {}\n", conclusion(r.failures())));
    s
}
