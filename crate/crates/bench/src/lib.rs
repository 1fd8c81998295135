//! Criterion benchmarks for polyheat; see `benches/kernels.rs`.
