//! Criterion benchmarks for `stablefield`; see `benches/`.
