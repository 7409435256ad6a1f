//! Coupled NK fitness landscapes with pluggable governance policies.
//!
//! An ecosystem is a set of species, each evolving on its own NK landscape,
//! with epistatic couplings reaching across species boundaries. Species
//! improve by single-bit hill climbing; a governance policy decides which
//! proposed changes are adopted, from unilateral self-interest to majority
//! vote to unanimous consent. The crate provides the landscape model, the
//! generation loop, batch experiments with Welch's t-test comparisons, and
//! deterministic seeded reproducibility throughout.

pub mod dynamics;
pub mod error;
pub mod experiment;
pub mod landscape;
pub mod report;
pub mod rng;
pub mod selfcheck;
pub mod stats;

pub use dynamics::{
    decide, run, tally_votes, EcosystemState, ErrorMode, Policy, Proposal, RunResult, Simulation,
    TracePoint, VoteTally,
};
pub use error::{Error, Result};
pub use experiment::{
    compare_cells, compare_samples, landscape_seed, run_cell, start_seed, sweep, CellConfig,
    CellOutcome, CellResult, ComparisonResult, RunRecord,
};
pub use landscape::{
    gene_fitness, generate_linkage, system_fitness_of, GeneContext, GeneLinkage, Landscape,
    LandscapeSpec, LinkageMap,
};
pub use report::{
    compare_result_rows, read_results_csv, write_aggregate_csv, write_comparison_json,
    write_results_csv, write_trace_csv, CellKey, ComparisonReport, KeyedComparison, PolicyLabel,
    ResultRow,
};
pub use rng::{chain, mix64, unit_f64, KeyStream};
pub use stats::{betainc_reg, ln_gamma, student_t_two_tailed, welch_t_test, TTest, Verdict};
