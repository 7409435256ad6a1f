//! Batch experiments: the replication protocol, parameter grids, and
//! statistical comparisons between cells.
//!
//! A *cell* is one experimental condition: a topology, a policy, and a
//! replication plan of `landscapes x restarts_per_landscape` independent
//! runs (default 10 x 10). Landscape seeds and start seeds derive from the
//! cell's master seed and the run indices only — never from the policy —
//! so cells that differ only in policy run on identical landscapes from
//! identical initial genomes, making policy comparisons paired.

use crate::dynamics::{run, Policy};
use crate::error::{Error, Result};
use crate::landscape::{Landscape, LandscapeSpec};
use crate::rng::{chain, stream};
use crate::stats::{welch_t_test, TTest, Verdict};
use rayon::prelude::*;

pub const DEFAULT_LANDSCAPES: usize = 10;
pub const DEFAULT_RESTARTS: usize = 10;
pub const DEFAULT_GENERATIONS: u64 = 20_000;
pub const DEFAULT_ALPHA: f64 = 0.05;

/// Seed for landscape `i` of a cell. Depends only on the master seed and
/// the landscape index.
pub fn landscape_seed(master_seed: u64, landscape_index: usize) -> u64 {
    chain(
        master_seed,
        &[stream::LANDSCAPE_SEED, landscape_index as u64],
    )
}

/// Seed for restart `j` on landscape `i`. Changing one restart never
/// affects any other run's seed.
pub fn start_seed(master_seed: u64, landscape_index: usize, restart_index: usize) -> u64 {
    chain(
        master_seed,
        &[
            stream::START_SEED,
            landscape_index as u64,
            restart_index as u64,
        ],
    )
}

/// One experimental condition plus its replication plan.
#[derive(Debug, Clone, PartialEq)]
pub struct CellConfig {
    /// Genome length per species; length must be `s + 1`.
    pub n_per_species: Vec<usize>,
    pub k: usize,
    pub c: usize,
    /// Number of partners per species (`s + 1` species in total).
    pub s: usize,
    pub policy: Policy,
    pub generations: u64,
    pub landscapes: usize,
    pub restarts_per_landscape: usize,
    pub master_seed: u64,
}

impl CellConfig {
    /// Symmetric cell: every species has genome length `n`.
    pub fn symmetric(n: usize, k: usize, c: usize, s: usize, policy: Policy) -> Self {
        CellConfig {
            n_per_species: vec![n; s + 1],
            k,
            c,
            s,
            policy,
            generations: DEFAULT_GENERATIONS,
            landscapes: DEFAULT_LANDSCAPES,
            restarts_per_landscape: DEFAULT_RESTARTS,
            master_seed: 0,
        }
    }

    pub fn asymmetric(n_per_species: Vec<usize>, k: usize, c: usize, policy: Policy) -> Self {
        let s = n_per_species.len().saturating_sub(1);
        CellConfig {
            n_per_species,
            k,
            c,
            s,
            policy,
            generations: DEFAULT_GENERATIONS,
            landscapes: DEFAULT_LANDSCAPES,
            restarts_per_landscape: DEFAULT_RESTARTS,
            master_seed: 0,
        }
    }

    pub fn with_generations(mut self, generations: u64) -> Self {
        self.generations = generations;
        self
    }

    pub fn with_replication(mut self, landscapes: usize, restarts: usize) -> Self {
        self.landscapes = landscapes;
        self.restarts_per_landscape = restarts;
        self
    }

    pub fn with_master_seed(mut self, master_seed: u64) -> Self {
        self.master_seed = master_seed;
        self
    }

    pub fn with_policy(mut self, policy: Policy) -> Self {
        self.policy = policy;
        self
    }

    pub fn total_runs(&self) -> usize {
        self.landscapes * self.restarts_per_landscape
    }

    /// Check replication counts, the species/partner shape, the policy,
    /// and (via a probe spec) the topology bounds.
    pub fn validate(&self) -> Result<()> {
        if self.landscapes == 0 || self.restarts_per_landscape == 0 {
            return Err(Error::EmptyCell {
                landscapes: self.landscapes,
                restarts: self.restarts_per_landscape,
            });
        }
        if self.n_per_species.len() != self.s + 1 {
            return Err(Error::CellMismatch {
                detail: format!(
                    "n_per_species has {} entries but s = {} implies {} species",
                    self.n_per_species.len(),
                    self.s,
                    self.s + 1
                ),
            });
        }
        self.policy.validate()?;
        // Topology bounds do not depend on the seed.
        LandscapeSpec::new(0, self.n_per_species.clone(), self.k, self.c)?;
        Ok(())
    }

    /// The landscape-shape part of the key: cells sharing it (and the
    /// master seed) are paired run-for-run.
    pub fn topology_key(&self) -> (Vec<usize>, usize, usize, usize) {
        (self.n_per_species.clone(), self.k, self.c, self.s)
    }
}

/// Outcome of one run within a cell.
#[derive(Debug, Clone, PartialEq)]
pub struct RunRecord {
    pub landscape_index: usize,
    pub restart_index: usize,
    pub landscape_seed: u64,
    pub start_seed: u64,
    pub final_species_fitness: Vec<f64>,
    pub final_system_fitness: f64,
}

/// A completed cell: every run's record plus the final-system-fitness
/// aggregate. Records are ordered landscape-major, restart-minor.
#[derive(Debug, Clone, PartialEq)]
pub struct CellResult {
    pub config: CellConfig,
    pub records: Vec<RunRecord>,
    pub mean_final_system_fitness: f64,
    pub stddev_final_system_fitness: f64,
}

impl CellResult {
    /// Final system fitness of every run, in record order — the sample
    /// used for comparisons.
    pub fn final_system_sample(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.final_system_fitness).collect()
    }
}

/// Mean and unbiased (n-1) standard deviation, summed left to right.
fn mean_stddev(xs: &[f64]) -> (f64, f64) {
    let mut sum = 0.0;
    for &x in xs {
        sum += x;
    }
    let mean = sum / xs.len() as f64;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let mut ss = 0.0;
    for &x in xs {
        let d = x - mean;
        ss += d * d;
    }
    (mean, (ss / (xs.len() - 1) as f64).sqrt())
}

/// Execute every run of a cell. Runs are dispatched to the current rayon
/// pool; each owns its state and RNG, so the result is identical for any
/// worker count or schedule.
pub fn run_cell(config: &CellConfig) -> Result<CellResult> {
    config.validate()?;
    let landscapes = (0..config.landscapes)
        .map(|i| {
            let seed = landscape_seed(config.master_seed, i);
            LandscapeSpec::new(seed, config.n_per_species.clone(), config.k, config.c)
                .map(Landscape::new)
        })
        .collect::<Result<Vec<_>>>()?;
    let restarts = config.restarts_per_landscape;
    let records = (0..config.total_runs())
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / restarts, idx % restarts);
            let seed = start_seed(config.master_seed, i, j);
            let outcome = run(&landscapes[i], &config.policy, seed, config.generations, 0)?;
            Ok(RunRecord {
                landscape_index: i,
                restart_index: j,
                landscape_seed: landscapes[i].spec().landscape_seed(),
                start_seed: seed,
                final_species_fitness: outcome.final_species_fitness,
                final_system_fitness: outcome.final_system_fitness,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let sample: Vec<f64> = records.iter().map(|r| r.final_system_fitness).collect();
    let (mean, stddev) = mean_stddev(&sample);
    Ok(CellResult {
        config: config.clone(),
        records,
        mean_final_system_fitness: mean,
        stddev_final_system_fitness: stddev,
    })
}

/// One entry of a sweep: the cell and either its result or the error that
/// stopped it. A failing cell never aborts the remaining grid.
#[derive(Debug, Clone)]
pub struct CellOutcome {
    pub config: CellConfig,
    pub result: Result<CellResult>,
}

/// Run every cell of a grid in order. Cells execute sequentially; the
/// runs inside each cell use the rayon pool.
pub fn sweep(grid: &[CellConfig]) -> Vec<CellOutcome> {
    grid.iter()
        .map(|config| CellOutcome {
            config: config.clone(),
            result: run_cell(config),
        })
        .collect()
}

/// Welch comparison of two completed cells at a significance level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComparisonResult {
    pub test: TTest,
    pub alpha: f64,
    pub verdict: Verdict,
}

/// Compare final system fitness of cell `a` against cell `b`.
pub fn compare_cells(a: &CellResult, b: &CellResult, alpha: f64) -> Result<ComparisonResult> {
    compare_samples(&a.final_system_sample(), &b.final_system_sample(), alpha)
}

/// Compare two raw final-fitness samples.
pub fn compare_samples(a: &[f64], b: &[f64], alpha: f64) -> Result<ComparisonResult> {
    let test = welch_t_test(a, b)?;
    Ok(ComparisonResult {
        test,
        alpha,
        verdict: test.verdict(alpha),
    })
}
