//! Criterion benchmarks for the recurrence, the generating function and the solver.
//! Run with `cargo bench -p cbs-complexity-bench`.
