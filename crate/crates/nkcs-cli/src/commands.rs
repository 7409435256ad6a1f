//! Subcommand implementations and the run manifest.

use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::time::Instant;

use nkcs::dynamics;
use nkcs::experiment::{landscape_seed, run_cell, start_seed, CellConfig, CellResult};
use nkcs::landscape::{Landscape, LandscapeSpec};
use nkcs::report::{self, format_n_vector, PolicyLabel};
use nkcs::selfcheck;
use serde::Serialize;
use serde_json::json;

use crate::config::{
    build_sweep_grid, build_trace_cell, resolve_experiment, FileConfig, Overrides,
};
use crate::presets;

pub const OUT_DIR_ENV: &str = "NKCS_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "nkcs-out";

/// Failures split by exit code: usage/config problems exit 1, failures
/// during execution or output writing exit 2.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Exec(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 1,
            CliError::Exec(_) => 2,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Usage(msg) | CliError::Exec(msg) => msg,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn exec(msg: impl Into<String>) -> CliError {
    CliError::Exec(msg.into())
}

/// Options shared by `trace` and `sweep`.
#[derive(Debug, Default)]
pub struct CommonOpts {
    pub config: Option<String>,
    pub out_dir: Option<PathBuf>,
    pub workers: Option<usize>,
    pub overrides: Overrides,
}

/// Load `--config`: a built-in preset name first, then a file path; no
/// flag means built-in defaults only.
fn load_config(source: &Option<String>) -> Result<(FileConfig, String), CliError> {
    match source {
        None => Ok((FileConfig::default(), "built-in defaults".into())),
        Some(name) => {
            if let Some(text) = presets::lookup(name) {
                let parsed = FileConfig::parse(text).map_err(usage)?;
                return Ok((parsed, format!("preset {name}")));
            }
            let text = fs::read_to_string(name).map_err(|e| {
                usage(format!(
                    "config '{name}': {e} (built-in presets: {})",
                    presets::NAMES.join(", ")
                ))
            })?;
            let parsed = FileConfig::parse(&text)
                .map_err(|e| usage(format!("config '{name}': {e}")))?;
            Ok((parsed, name.clone()))
        }
    }
}

/// Pick the output directory: flag, then the environment variable, then
/// `./nkcs-out`; create it if needed.
fn resolve_out_dir(flag: &Option<PathBuf>) -> Result<PathBuf, CliError> {
    let dir = match flag {
        Some(dir) => dir.clone(),
        None => std::env::var_os(OUT_DIR_ENV)
            .map(PathBuf::from)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR)),
    };
    fs::create_dir_all(&dir)
        .map_err(|e| exec(format!("creating output directory {}: {e}", dir.display())))?;
    Ok(dir)
}

/// Apply `--workers`; returns the effective pool size.
fn init_workers(workers: Option<usize>) -> Result<usize, CliError> {
    if let Some(n) = workers {
        if n == 0 {
            return Err(usage("--workers must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| exec(format!("configuring {n} workers: {e}")))?;
    }
    Ok(rayon::current_num_threads())
}

fn create_out_file(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| exec(format!("creating {}: {e}", path.display())))
}

/// Written next to every output file; holds enough to reproduce them.
#[derive(Debug, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub master_seed: Option<u64>,
    pub workers: usize,
    pub config_source: String,
    pub config: serde_json::Value,
    pub outputs: Vec<String>,
    pub failures: Vec<String>,
    pub duration_seconds: f64,
}

impl Manifest {
    fn new(command: &str, config_source: String, workers: usize) -> Manifest {
        Manifest {
            tool: "nkcs",
            version: env!("CARGO_PKG_VERSION"),
            command: command.into(),
            master_seed: None,
            workers,
            config_source,
            config: serde_json::Value::Null,
            outputs: Vec::new(),
            failures: Vec::new(),
            duration_seconds: 0.0,
        }
    }

    fn push_output(&mut self, path: &Path) {
        self.outputs.push(path.display().to_string());
    }

    fn write(&mut self, out_dir: &Path, started: Instant) -> Result<PathBuf, CliError> {
        self.duration_seconds = started.elapsed().as_secs_f64();
        let path = out_dir.join("manifest.json");
        let mut writer = create_out_file(&path)?;
        serde_json::to_writer_pretty(&mut writer, self)
            .map_err(|e| exec(format!("writing {}: {e}", path.display())))?;
        use std::io::Write as _;
        writer
            .write_all(b"\n")
            .and_then(|()| writer.flush())
            .map_err(|e| exec(format!("writing {}: {e}", path.display())))?;
        Ok(path)
    }
}

fn describe_cell(config: &CellConfig) -> String {
    let policy = config.policy.kind_str();
    let mut text = format!(
        "policy={policy} N={} K={} C={} S={}",
        format_n_vector(&config.n_per_species),
        config.k,
        config.c,
        config.s
    );
    if policy == "com" {
        text.push_str(&format!(
            " error_rate={} error_mode={}",
            config.policy.error_rate(),
            config.policy.error_mode().map_or("", |m| m.as_str())
        ));
    }
    text
}

/// `trace`: one full run of a single cell's first landscape/restart,
/// sampled every `trace_every` generations.
pub fn cmd_trace(opts: &CommonOpts) -> Result<(), CliError> {
    let started = Instant::now();
    let (file, config_source) = load_config(&opts.config)?;
    let settings = resolve_experiment(&file.experiment, &opts.overrides);
    let (cell, resolved_cell) =
        build_trace_cell(&file, &opts.overrides, &settings).map_err(usage)?;
    cell.validate().map_err(|e| usage(e.to_string()))?;
    let workers = init_workers(opts.workers)?;
    let out_dir = resolve_out_dir(&opts.out_dir)?;

    let spec = LandscapeSpec::new(
        landscape_seed(cell.master_seed, 0),
        cell.n_per_species.clone(),
        cell.k,
        cell.c,
    )
    .map_err(|e| usage(e.to_string()))?;
    let landscape = Landscape::new(spec);
    let outcome = dynamics::run(
        &landscape,
        &cell.policy,
        start_seed(cell.master_seed, 0, 0),
        cell.generations,
        settings.trace_every,
    )
    .map_err(|e| exec(e.to_string()))?;

    let trace_path = out_dir.join("trace.csv");
    let writer = create_out_file(&trace_path)?;
    report::write_trace_csv(writer, &outcome.trajectory).map_err(|e| exec(e.to_string()))?;

    let mut manifest = Manifest::new("trace", config_source, workers);
    manifest.master_seed = Some(cell.master_seed);
    manifest.config = json!({ "experiment": settings, "cell": resolved_cell });
    manifest.push_output(&trace_path);
    let manifest_path = manifest.write(&out_dir, started)?;

    println!(
        "trace: {} generations={} seed={}",
        describe_cell(&cell),
        cell.generations,
        cell.master_seed
    );
    println!(
        "  proposals={} accepted={} last_accepted_at={} final_system_fitness={:.6}",
        outcome.proposals,
        outcome.accepted,
        outcome
            .last_accept_generation
            .map_or_else(|| "never".into(), |g| g.to_string()),
        outcome.final_system_fitness
    );
    println!(
        "  wrote {} and {}",
        trace_path.display(),
        manifest_path.display()
    );
    Ok(())
}

/// `sweep`: run every cell of the grid, then write the long-format
/// results table and per-cell aggregates. A failing cell is recorded and
/// skipped; any failure makes the command exit nonzero after writing
/// whatever completed.
pub fn cmd_sweep(opts: &CommonOpts) -> Result<(), CliError> {
    let started = Instant::now();
    let (file, config_source) = load_config(&opts.config)?;
    let settings = resolve_experiment(&file.experiment, &opts.overrides);
    let (grid, resolved_axes) =
        build_sweep_grid(&file, &opts.overrides, &settings).map_err(usage)?;
    if grid.is_empty() {
        return Err(usage("sweep grid is empty: every axis needs at least one value"));
    }
    let species_counts: std::collections::BTreeSet<usize> =
        grid.iter().map(|c| c.s + 1).collect();
    if species_counts.len() > 1 {
        return Err(usage(
            "sweep mixes species counts; the results table has fixed per-species \
             columns, so run one sweep per S",
        ));
    }
    let workers = init_workers(opts.workers)?;
    let out_dir = resolve_out_dir(&opts.out_dir)?;

    let total = grid.len();
    let mut completed: Vec<CellResult> = Vec::new();
    let mut failures: Vec<String> = Vec::new();
    for (index, cell) in grid.iter().enumerate() {
        eprint!("[{}/{}] {} ... ", index + 1, total, describe_cell(cell));
        match run_cell(cell) {
            Ok(result) => {
                eprintln!(
                    "mean={:.6} stddev={:.6} ({} runs)",
                    result.mean_final_system_fitness,
                    result.stddev_final_system_fitness,
                    result.records.len()
                );
                completed.push(result);
            }
            Err(e) => {
                eprintln!("FAILED: {e}");
                failures.push(format!("{}: {e}", describe_cell(cell)));
            }
        }
    }

    let mut manifest = Manifest::new("sweep", config_source, workers);
    manifest.master_seed = Some(settings.master_seed);
    manifest.config = json!({ "experiment": settings, "sweep": resolved_axes });
    manifest.failures = failures.clone();

    let mut written: Vec<PathBuf> = Vec::new();
    if !completed.is_empty() {
        let refs: Vec<&CellResult> = completed.iter().collect();
        let results_path = out_dir.join("results.csv");
        report::write_results_csv(create_out_file(&results_path)?, &refs)
            .map_err(|e| exec(e.to_string()))?;
        manifest.push_output(&results_path);
        written.push(results_path);

        let aggregate_path = out_dir.join("aggregate.csv");
        report::write_aggregate_csv(create_out_file(&aggregate_path)?, &refs)
            .map_err(|e| exec(e.to_string()))?;
        manifest.push_output(&aggregate_path);
        written.push(aggregate_path);
    }
    let manifest_path = manifest.write(&out_dir, started)?;
    written.push(manifest_path);

    let paths: Vec<String> = written.iter().map(|p| p.display().to_string()).collect();
    println!(
        "sweep: {} of {} cells completed; wrote {}",
        completed.len(),
        total,
        paths.join(", ")
    );
    if failures.is_empty() {
        Ok(())
    } else {
        Err(exec(format!(
            "{} of {total} cells failed (details in the manifest)",
            failures.len()
        )))
    }
}

fn policy_display(label: &PolicyLabel) -> String {
    if label.policy == "com" {
        format!(
            "com(error_rate={}, {})",
            label.error_rate,
            label.error_mode.as_deref().unwrap_or("collective")
        )
    } else {
        label.policy.clone()
    }
}

/// An optional row filter for `compare`: a policy name with an optional
/// error rate, e.g. `coev`, `com`, `com@0.25`.
fn filter_rows(
    rows: Vec<report::ResultRow>,
    filter: &Option<String>,
    side: &str,
) -> Result<Vec<report::ResultRow>, CliError> {
    let Some(text) = filter else { return Ok(rows) };
    let (kind, rate) = match text.split_once('@') {
        Some((kind, rate_text)) => {
            let rate: f64 = rate_text.parse().map_err(|_| {
                usage(format!("--policy-{side}: bad error rate in '{text}'"))
            })?;
            (kind, Some(rate))
        }
        None => (text.as_str(), None),
    };
    if !matches!(kind, "coev" | "com" | "glob") {
        return Err(usage(format!(
            "--policy-{side}: unknown policy '{kind}' (expected 'coev', 'com', or 'glob')"
        )));
    }
    let kept: Vec<report::ResultRow> = rows
        .into_iter()
        .filter(|row| row.policy == kind && rate.is_none_or(|r| row.error_rate == r))
        .collect();
    if kept.is_empty() {
        return Err(exec(format!("no rows in results {side} match '{text}'")));
    }
    Ok(kept)
}

/// `compare`: per-cell Welch verdicts between two results tables. Each
/// side must hold one policy per cell; `--policy-a`/`--policy-b` select
/// that policy out of a mixed table.
#[allow(clippy::too_many_arguments)]
pub fn cmd_compare(
    results_a: &Path,
    results_b: &Path,
    alpha: f64,
    policy_a: &Option<String>,
    policy_b: &Option<String>,
    out_dir_flag: &Option<PathBuf>,
) -> Result<(), CliError> {
    let started = Instant::now();
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(usage(format!("--alpha must be in (0, 1), got {alpha}")));
    }
    let out_dir = resolve_out_dir(out_dir_flag)?;
    let read = |path: &Path| -> Result<Vec<report::ResultRow>, CliError> {
        let file =
            File::open(path).map_err(|e| exec(format!("opening {}: {e}", path.display())))?;
        report::read_results_csv(file).map_err(|e| exec(format!("{}: {e}", path.display())))
    };
    let rows_a = filter_rows(read(results_a)?, policy_a, "a")?;
    let rows_b = filter_rows(read(results_b)?, policy_b, "b")?;
    let comparison = report::compare_result_rows(&rows_a, &rows_b, alpha)
        .map_err(|e| exec(e.to_string()))?;

    let json_path = out_dir.join("comparison.json");
    report::write_comparison_json(create_out_file(&json_path)?, &comparison)
        .map_err(|e| exec(e.to_string()))?;

    let mut manifest = Manifest::new("compare", "command line".into(), 1);
    manifest.config = json!({
        "results_a": results_a.display().to_string(),
        "results_b": results_b.display().to_string(),
        "policy_a": policy_a,
        "policy_b": policy_b,
        "alpha": alpha,
    });
    manifest.push_output(&json_path);
    let manifest_path = manifest.write(&out_dir, started)?;

    let mut counts = [0usize; 3];
    for entry in &comparison.comparisons {
        let bucket = match entry.verdict {
            nkcs::stats::Verdict::ABetter => 0,
            nkcs::stats::Verdict::BBetter => 1,
            nkcs::stats::Verdict::Indistinguishable => 2,
        };
        counts[bucket] += 1;
        println!(
            "{}: {} vs {}: {} (t={:.4}, p={:.3e})",
            entry.key,
            policy_display(&entry.a),
            policy_display(&entry.b),
            entry.verdict,
            entry.t,
            entry.p
        );
    }
    println!(
        "compare: {} cells at alpha={}: A better {}, B better {}, indistinguishable {}; wrote {} and {}",
        comparison.comparisons.len(),
        alpha,
        counts[0],
        counts[1],
        counts[2],
        json_path.display(),
        manifest_path.display()
    );
    Ok(())
}

/// `selfcheck`: the brute-force oracle suite; nonzero exit on any
/// failure.
pub fn cmd_selfcheck() -> Result<(), CliError> {
    let reports = selfcheck::run_all();
    let mut failed = 0usize;
    for report in &reports {
        let status = if report.passed { "PASS" } else { "FAIL" };
        println!("check {}: {} — {}", report.name, status, report.detail);
        if !report.passed {
            failed += 1;
        }
    }
    if failed == 0 {
        println!("selfcheck: all {} checks passed", reports.len());
        Ok(())
    } else {
        Err(exec(format!(
            "selfcheck: {failed} of {} checks failed",
            reports.len()
        )))
    }
}
