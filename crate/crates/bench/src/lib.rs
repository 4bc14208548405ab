//! Criterion benchmarks for `metric-lines`; see `benches/`.
