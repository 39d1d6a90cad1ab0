//! Benchmarks for the exhaustive constructions live in `benches/`.
