//! Criterion benchmarks for the fractube pipeline; see `benches/pipeline.rs`.
