//! Benchmarks for the k3tk workspace; see `benches/`.
