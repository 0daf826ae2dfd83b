//! Criterion benchmarks for lexrel live in `benches/`.
