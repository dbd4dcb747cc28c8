//! Criterion benchmarks for the hsplus evaluators; see `benches/`.
