//! Criterion benchmarks for the machines live in `benches/`.
