//! Criterion benchmarks for `epb-core`; see `benches/`.
