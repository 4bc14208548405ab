use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion};

use metric_lines::canon::canonical_code;
use metric_lines::lines::{all_lines, line_of, line_of_fast};
use metric_lines::space_from_code;
use metric_lines::verify::{random_codes, sweep_range, verify_small_spaces, SweepConfig, SweepRange};

fn lines(c: &mut Criterion) {
    let codes = random_codes(8, 64, 7).unwrap();
    let spaces: Vec<_> = codes.iter().map(|&c| space_from_code(8, c).unwrap()).collect();
    let metrics: Vec<_> = spaces.iter().map(|s| s.to_metric()).collect();

    let mut group = c.benchmark_group("line");
    group.bench_function("fast/n8", |b| {
        b.iter(|| {
            for s in &spaces {
                black_box(line_of_fast(s, 0, 7));
            }
        })
    });
    group.bench_function("definitional/n8", |b| {
        b.iter(|| {
            for m in &metrics {
                black_box(line_of(m, 0, 7));
            }
        })
    });
    group.finish();

    c.bench_function("all_lines/n8", |b| {
        b.iter(|| {
            for s in &spaces {
                black_box(all_lines(s));
            }
        })
    });
}

fn sweeps(c: &mut Criterion) {
    let mut group = c.benchmark_group("sweep");
    group.sample_size(10);
    for checks in [false, true] {
        let config = SweepConfig {
            structure_checks: checks,
            ..SweepConfig::default()
        };
        let range = SweepRange::new(8, 0, 1 << 14).unwrap();
        group.bench_with_input(
            BenchmarkId::new(if checks { "checked" } else { "verdict-only" }, "n8/16k"),
            &range,
            |b, &r| b.iter(|| black_box(sweep_range(r, &config))),
        );
    }
    group.finish();
}

fn canon(c: &mut Criterion) {
    let spaces: Vec<_> = random_codes(8, 32, 11)
        .unwrap()
        .into_iter()
        .map(|c| space_from_code(8, c).unwrap())
        .collect();
    c.bench_function("canonical_code/n8", |b| {
        b.iter(|| {
            for s in &spaces {
                black_box(canonical_code(s).unwrap());
            }
        })
    });
}

fn random_metrics(c: &mut Criterion) {
    let mut group = c.benchmark_group("random_metrics");
    group.sample_size(10);
    group.bench_function("1000_trials", |b| b.iter(|| black_box(verify_small_spaces(1000, 42, 1))));
    group.finish();
}

criterion_group!(benches, lines, sweeps, canon, random_metrics);
criterion_main!(benches);
