//! Benchmark harness crate; the suites live under benches/.
