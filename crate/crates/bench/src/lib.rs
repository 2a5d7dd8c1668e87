//! Criterion benchmarks for wf-core live in `benches/`.
