//! Config file schema and flag precedence.
//!
//! One TOML file drives both single runs and sweeps: `[experiment]` holds
//! shared settings, `[cell]` a single condition (used by `trace`), and
//! `[sweep]` the grid axes. Command-line flags override file values, which
//! override built-in defaults. For sweeps, a per-parameter flag pins that
//! axis to a single value.

use nkcs::dynamics::{ErrorMode, Policy};
use nkcs::experiment::CellConfig;
use serde::{Deserialize, Serialize};

pub const DEFAULT_MASTER_SEED: u64 = 42;
pub const DEFAULT_TRACE_EVERY: u64 = 100;

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub experiment: ExperimentSection,
    pub cell: Option<CellSection>,
    pub sweep: Option<SweepSection>,
}

impl FileConfig {
    pub fn parse(text: &str) -> Result<FileConfig, String> {
        toml::from_str(text).map_err(|e| format!("config: {e}"))
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSection {
    pub generations: Option<u64>,
    pub landscapes: Option<usize>,
    pub restarts_per_landscape: Option<usize>,
    pub master_seed: Option<u64>,
    pub trace_every: Option<u64>,
    pub alpha: Option<f64>,
}

/// Genome sizes: one integer for symmetric species, or one size per
/// species.
#[derive(Debug, Clone, PartialEq, Eq, Deserialize, Serialize)]
#[serde(untagged)]
pub enum Sizes {
    Uniform(usize),
    PerSpecies(Vec<usize>),
}

impl Sizes {
    /// Concrete per-species sizes for an ecosystem of `s + 1` species.
    pub fn to_vec(&self, s: usize) -> Vec<usize> {
        match self {
            Sizes::Uniform(n) => vec![*n; s + 1],
            Sizes::PerSpecies(v) => v.clone(),
        }
    }

    /// Parse the flag form: `20` or `20,20,60`.
    pub fn parse_flag(text: &str) -> Result<Sizes, String> {
        if text.contains(',') {
            text.split(',')
                .map(|part| {
                    part.trim()
                        .parse::<usize>()
                        .map_err(|_| format!("--n: bad size '{part}' in '{text}'"))
                })
                .collect::<Result<Vec<_>, _>>()
                .map(Sizes::PerSpecies)
        } else {
            text.trim()
                .parse::<usize>()
                .map(Sizes::Uniform)
                .map_err(|_| format!("--n: expected an integer or a comma list, got '{text}'"))
        }
    }
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct CellSection {
    pub n: Option<Sizes>,
    pub k: Option<usize>,
    pub c: Option<usize>,
    pub s: Option<usize>,
    pub policy: Option<String>,
    pub error_rate: Option<f64>,
    pub error_mode: Option<String>,
}

#[derive(Debug, Clone, Default, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub n: Option<Vec<Sizes>>,
    pub k: Option<Vec<usize>>,
    pub c: Option<Vec<usize>>,
    pub s: Option<Vec<usize>>,
    pub policies: Option<Vec<String>>,
    pub error_rates: Option<Vec<f64>>,
    pub error_mode: Option<String>,
}

/// Values taken from command-line flags; every field beats the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub n: Option<Sizes>,
    pub k: Option<usize>,
    pub c: Option<usize>,
    pub s: Option<usize>,
    pub policy: Option<String>,
    pub error_rate: Option<f64>,
    pub error_mode: Option<String>,
    pub generations: Option<u64>,
    pub master_seed: Option<u64>,
    pub trace_every: Option<u64>,
    pub landscapes: Option<usize>,
    pub restarts_per_landscape: Option<usize>,
}

/// Fully resolved experiment-level settings.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct ExperimentSettings {
    pub generations: u64,
    pub landscapes: usize,
    pub restarts_per_landscape: usize,
    pub master_seed: u64,
    pub trace_every: u64,
}

pub fn resolve_experiment(file: &ExperimentSection, ov: &Overrides) -> ExperimentSettings {
    ExperimentSettings {
        generations: ov
            .generations
            .or(file.generations)
            .unwrap_or(nkcs::experiment::DEFAULT_GENERATIONS),
        landscapes: ov
            .landscapes
            .or(file.landscapes)
            .unwrap_or(nkcs::experiment::DEFAULT_LANDSCAPES),
        restarts_per_landscape: ov
            .restarts_per_landscape
            .or(file.restarts_per_landscape)
            .unwrap_or(nkcs::experiment::DEFAULT_RESTARTS),
        master_seed: ov
            .master_seed
            .or(file.master_seed)
            .unwrap_or(DEFAULT_MASTER_SEED),
        trace_every: ov
            .trace_every
            .or(file.trace_every)
            .unwrap_or(DEFAULT_TRACE_EVERY),
    }
}

pub fn parse_policy(kind: &str, error_rate: f64, error_mode: &str) -> Result<Policy, String> {
    match kind {
        "coev" => {
            if error_rate != 0.0 {
                return Err("--error-rate applies to the 'com' policy only".into());
            }
            Ok(Policy::Coevolution)
        }
        "glob" => {
            if error_rate != 0.0 {
                return Err("--error-rate applies to the 'com' policy only".into());
            }
            Ok(Policy::GlobalControl)
        }
        "com" => {
            let mode: ErrorMode = error_mode.parse()?;
            Policy::communalism_with_error(error_rate, mode).map_err(|e| e.to_string())
        }
        other => Err(format!(
            "unknown policy '{other}' (expected 'coev', 'com', or 'glob')"
        )),
    }
}

fn missing(field: &str, flag: &str, section: &str) -> String {
    format!("missing parameter '{field}': set {section}.{field} in the config or pass {flag}")
}

/// Resolve the single cell used by `trace`. Returns the runnable config
/// plus the fully resolved `[cell]` section for the run manifest.
pub fn build_trace_cell(
    file: &FileConfig,
    ov: &Overrides,
    settings: &ExperimentSettings,
) -> Result<(CellConfig, CellSection), String> {
    let cell = file.cell.clone().unwrap_or_default();
    let n = ov
        .n
        .clone()
        .or(cell.n)
        .ok_or_else(|| missing("n", "--n", "[cell]"))?;
    let s = match (ov.s.or(cell.s), &n) {
        (Some(s), Sizes::PerSpecies(v)) if v.len() != s + 1 => {
            return Err(format!(
                "s = {s} implies {} species but n lists {} sizes",
                s + 1,
                v.len()
            ))
        }
        (Some(s), _) => s,
        (None, Sizes::PerSpecies(v)) => v.len().saturating_sub(1),
        (None, Sizes::Uniform(_)) => return Err(missing("s", "--s", "[cell]")),
    };
    let k = ov.k.or(cell.k).ok_or_else(|| missing("k", "--k", "[cell]"))?;
    let c = ov.c.or(cell.c).ok_or_else(|| missing("c", "--c", "[cell]"))?;
    let policy_kind = ov
        .policy
        .clone()
        .or(cell.policy)
        .ok_or_else(|| missing("policy", "--policy", "[cell]"))?;
    let error_rate = ov.error_rate.or(cell.error_rate).unwrap_or(0.0);
    let error_mode = ov
        .error_mode
        .clone()
        .or(cell.error_mode)
        .unwrap_or_else(|| "collective".into());
    let policy = parse_policy(&policy_kind, error_rate, &error_mode)?;
    let mut config = CellConfig::symmetric(0, k, c, s, policy);
    config.n_per_species = n.to_vec(s);
    config.generations = settings.generations;
    config.landscapes = settings.landscapes;
    config.restarts_per_landscape = settings.restarts_per_landscape;
    config.master_seed = settings.master_seed;
    let resolved = CellSection {
        n: Some(n),
        k: Some(k),
        c: Some(c),
        s: Some(s),
        policy: Some(policy_kind),
        error_rate: Some(error_rate),
        error_mode: Some(error_mode),
    };
    Ok((config, resolved))
}

/// Expand the sweep axes into a concrete grid, in a stable order:
/// n (outer), then c, k, s, policy, error rate. Policies without a vote
/// error model take exactly one cell per condition regardless of the
/// error-rate axis. Explicit per-species size lists fix `s` themselves
/// and ignore the `s` axis.
pub fn build_sweep_grid(
    file: &FileConfig,
    ov: &Overrides,
    settings: &ExperimentSettings,
) -> Result<(Vec<CellConfig>, SweepSection), String> {
    let sweep = file.sweep.clone().unwrap_or_default();
    let n_axis: Vec<Sizes> = match &ov.n {
        Some(n) => vec![n.clone()],
        None => sweep.n.ok_or_else(|| missing("n", "--n", "[sweep]"))?,
    };
    let k_axis: Vec<usize> = match ov.k {
        Some(k) => vec![k],
        None => sweep.k.ok_or_else(|| missing("k", "--k", "[sweep]"))?,
    };
    let c_axis: Vec<usize> = match ov.c {
        Some(c) => vec![c],
        None => sweep.c.ok_or_else(|| missing("c", "--c", "[sweep]"))?,
    };
    let s_axis: Vec<usize> = match ov.s {
        Some(s) => vec![s],
        None => sweep.s.unwrap_or_default(),
    };
    let policies: Vec<String> = match &ov.policy {
        Some(p) => vec![p.clone()],
        None => sweep
            .policies
            .ok_or_else(|| missing("policies", "--policy", "[sweep]"))?,
    };
    let error_rates: Vec<f64> = match ov.error_rate {
        Some(r) => vec![r],
        None => sweep.error_rates.unwrap_or_else(|| vec![0.0]),
    };
    let error_mode = ov
        .error_mode
        .clone()
        .or(sweep.error_mode)
        .unwrap_or_else(|| "collective".into());

    let mut grid = Vec::new();
    for n in &n_axis {
        let s_values: Vec<usize> = match n {
            Sizes::PerSpecies(v) => vec![v.len().saturating_sub(1)],
            Sizes::Uniform(_) => {
                if s_axis.is_empty() {
                    return Err(missing("s", "--s", "[sweep]"));
                }
                s_axis.clone()
            }
        };
        for &c in &c_axis {
            for &k in &k_axis {
                for &s in &s_values {
                    for policy_kind in &policies {
                        let rates: &[f64] = if policy_kind == "com" {
                            &error_rates
                        } else {
                            &[0.0]
                        };
                        for &rate in rates {
                            let policy = parse_policy(policy_kind, rate, &error_mode)?;
                            let mut config = CellConfig::symmetric(0, k, c, s, policy);
                            config.n_per_species = n.to_vec(s);
                            config.generations = settings.generations;
                            config.landscapes = settings.landscapes;
                            config.restarts_per_landscape = settings.restarts_per_landscape;
                            config.master_seed = settings.master_seed;
                            grid.push(config);
                        }
                    }
                }
            }
        }
    }
    let resolved = SweepSection {
        n: Some(n_axis),
        k: Some(k_axis),
        c: Some(c_axis),
        s: Some(s_axis),
        policies: Some(policies),
        error_rates: Some(error_rates),
        error_mode: Some(error_mode),
    };
    Ok((grid, resolved))
}
