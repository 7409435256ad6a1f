//! Benchmark-only crate; see `benches/core.rs`.
//!
//! Kept separate so the simulation core does not carry criterion in its
//! dev-dependency tree.
