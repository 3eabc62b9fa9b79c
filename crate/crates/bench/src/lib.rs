//! Criterion benchmarks for optiplace; see `benches/`.
