//! Benchmarks for the core stages; see `benches/`.
