//! Benchmark-only crate; see `benches/pipeline.rs`. Holds no library code.
