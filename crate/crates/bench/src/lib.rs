//! Benchmarks live in `benches/`; run them with `cargo bench -p sprig-bench`.
