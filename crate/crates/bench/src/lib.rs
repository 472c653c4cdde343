//! Criterion benchmarks for the samplers live in `benches/`.
