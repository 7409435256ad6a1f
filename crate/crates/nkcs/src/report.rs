//! File formats: trajectory CSV, long-format results CSV, per-cell
//! aggregate CSV, and the comparison report JSON.
//!
//! Schemas are stable. All tables carry a header row; floats use Rust's
//! shortest round-trip formatting, so written values parse back exactly.
//!
//! - trace:     `generation,fitness_species_0..,system_fitness`
//! - results:   `policy,error_rate,error_mode,n_vector,K,C,S,landscape_seed,start_seed,final_fitness_species_0..,final_system_fitness`
//! - aggregate: `policy,error_rate,error_mode,n_vector,K,C,S,mean,stddev,run_count`
//!
//! `n_vector` renders as sizes joined with `x` (`20x20x60`). `error_mode`
//! is empty for policies without a vote error model. The comparison JSON
//! pairs cells from two results files by landscape shape; each entry
//! reports both sides' policies, the Welch statistics, and the verdict.

use std::collections::BTreeMap;
use std::io;

use crate::dynamics::{Policy, TracePoint};
use crate::error::{Error, Result};
use crate::experiment::CellResult;
use crate::stats::{welch_t_test, Verdict};

/// `policy,error_rate,error_mode` columns for a policy.
fn policy_columns(policy: &Policy) -> (String, String, String) {
    let mode = policy
        .error_mode()
        .map(|m| m.as_str().to_string())
        .unwrap_or_default();
    (
        policy.kind_str().to_string(),
        format_f64(policy.error_rate()),
        mode,
    )
}

fn format_f64(v: f64) -> String {
    format!("{v}")
}

/// Render species sizes as `20x20x60`.
pub fn format_n_vector(n_per_species: &[usize]) -> String {
    n_per_species
        .iter()
        .map(|n| n.to_string())
        .collect::<Vec<_>>()
        .join("x")
}

/// Parse the `n_vector` column format.
pub fn parse_n_vector(text: &str) -> Result<Vec<usize>> {
    text.split('x')
        .map(|part| {
            part.parse::<usize>()
                .map_err(|_| Error::Csv(format!("bad n_vector entry '{part}' in '{text}'")))
        })
        .collect()
}

/// Write a single run's trajectory.
pub fn write_trace_csv<W: io::Write>(writer: W, trajectory: &[TracePoint]) -> Result<()> {
    let species_count = trajectory
        .first()
        .map(|p| p.species_fitness.len())
        .unwrap_or(0);
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec!["generation".to_string()];
    header.extend((0..species_count).map(|s| format!("fitness_species_{s}")));
    header.push("system_fitness".into());
    out.write_record(&header)?;
    for point in trajectory {
        if point.species_fitness.len() != species_count {
            return Err(Error::CellMismatch {
                detail: format!(
                    "trace point at generation {} has {} species, expected {}",
                    point.generation,
                    point.species_fitness.len(),
                    species_count
                ),
            });
        }
        let mut row = vec![point.generation.to_string()];
        row.extend(point.species_fitness.iter().map(|v| format_f64(*v)));
        row.push(format_f64(point.system_fitness));
        out.write_record(&row)?;
    }
    out.flush()?;
    Ok(())
}

/// Write completed cells as a long-format table, one row per run. All
/// cells must have the same species count (the schema is per-species
/// columns).
pub fn write_results_csv<W: io::Write>(writer: W, cells: &[&CellResult]) -> Result<()> {
    let species_count = match cells.first() {
        Some(cell) => cell.config.s + 1,
        None => {
            return Err(Error::CellMismatch {
                detail: "no cells to write".into(),
            })
        }
    };
    let mut out = csv::Writer::from_writer(writer);
    let mut header = vec![
        "policy".to_string(),
        "error_rate".into(),
        "error_mode".into(),
        "n_vector".into(),
        "K".into(),
        "C".into(),
        "S".into(),
        "landscape_seed".into(),
        "start_seed".into(),
    ];
    header.extend((0..species_count).map(|s| format!("final_fitness_species_{s}")));
    header.push("final_system_fitness".into());
    out.write_record(&header)?;
    for cell in cells {
        if cell.config.s + 1 != species_count {
            return Err(Error::CellMismatch {
                detail: format!(
                    "cell with S={} mixed into a table with {} species columns",
                    cell.config.s, species_count
                ),
            });
        }
        let (policy, rate, mode) = policy_columns(&cell.config.policy);
        let prefix = [
            policy,
            rate,
            mode,
            format_n_vector(&cell.config.n_per_species),
            cell.config.k.to_string(),
            cell.config.c.to_string(),
            cell.config.s.to_string(),
        ];
        for record in &cell.records {
            let mut row: Vec<String> = prefix.to_vec();
            row.push(record.landscape_seed.to_string());
            row.push(record.start_seed.to_string());
            row.extend(record.final_species_fitness.iter().map(|v| format_f64(*v)));
            row.push(format_f64(record.final_system_fitness));
            out.write_record(&row)?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Write one aggregate row per cell.
pub fn write_aggregate_csv<W: io::Write>(writer: W, cells: &[&CellResult]) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "policy",
        "error_rate",
        "error_mode",
        "n_vector",
        "K",
        "C",
        "S",
        "mean",
        "stddev",
        "run_count",
    ])?;
    for cell in cells {
        let (policy, rate, mode) = policy_columns(&cell.config.policy);
        out.write_record([
            policy,
            rate,
            mode,
            format_n_vector(&cell.config.n_per_species),
            cell.config.k.to_string(),
            cell.config.c.to_string(),
            cell.config.s.to_string(),
            format_f64(cell.mean_final_system_fitness),
            format_f64(cell.stddev_final_system_fitness),
            cell.records.len().to_string(),
        ])?;
    }
    out.flush()?;
    Ok(())
}

/// One parsed row of a results CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub policy: String,
    pub error_rate: f64,
    pub error_mode: String,
    pub n_vector: Vec<usize>,
    pub k: usize,
    pub c: usize,
    pub s: usize,
    pub landscape_seed: u64,
    pub start_seed: u64,
    pub final_species_fitness: Vec<f64>,
    pub final_system_fitness: f64,
}

/// Read a results CSV written by [`write_results_csv`].
pub fn read_results_csv<R: io::Read>(reader: R) -> Result<Vec<ResultRow>> {
    let mut input = csv::Reader::from_reader(reader);
    let headers = input.headers()?.clone();
    let index_of = |name: &str| -> Result<usize> {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::Csv(format!("missing column '{name}'")))
    };
    let col_policy = index_of("policy")?;
    let col_rate = index_of("error_rate")?;
    let col_mode = index_of("error_mode")?;
    let col_n = index_of("n_vector")?;
    let col_k = index_of("K")?;
    let col_c = index_of("C")?;
    let col_s = index_of("S")?;
    let col_lseed = index_of("landscape_seed")?;
    let col_sseed = index_of("start_seed")?;
    let col_system = index_of("final_system_fitness")?;
    let mut species_cols: Vec<(usize, usize)> = headers
        .iter()
        .enumerate()
        .filter_map(|(i, h)| {
            h.strip_prefix("final_fitness_species_")
                .and_then(|suffix| suffix.parse::<usize>().ok())
                .map(|s| (s, i))
        })
        .collect();
    species_cols.sort_unstable();
    for (expected, &(s, _)) in species_cols.iter().enumerate() {
        if s != expected {
            return Err(Error::Csv(format!(
                "species fitness columns are not contiguous (found index {s}, expected {expected})"
            )));
        }
    }
    let mut rows = Vec::new();
    for (line, record) in input.records().enumerate() {
        let record = record?;
        let field = |i: usize| -> Result<&str> {
            record
                .get(i)
                .ok_or_else(|| Error::Csv(format!("row {}: missing field {i}", line + 2)))
        };
        let parse_f64 = |i: usize| -> Result<f64> {
            let raw = field(i)?;
            raw.parse::<f64>()
                .map_err(|_| Error::Csv(format!("row {}: bad number '{raw}'", line + 2)))
        };
        let parse_usize = |i: usize| -> Result<usize> {
            let raw = field(i)?;
            raw.parse::<usize>()
                .map_err(|_| Error::Csv(format!("row {}: bad integer '{raw}'", line + 2)))
        };
        let parse_u64 = |i: usize| -> Result<u64> {
            let raw = field(i)?;
            raw.parse::<u64>()
                .map_err(|_| Error::Csv(format!("row {}: bad seed '{raw}'", line + 2)))
        };
        rows.push(ResultRow {
            policy: field(col_policy)?.to_string(),
            error_rate: parse_f64(col_rate)?,
            error_mode: field(col_mode)?.to_string(),
            n_vector: parse_n_vector(field(col_n)?)?,
            k: parse_usize(col_k)?,
            c: parse_usize(col_c)?,
            s: parse_usize(col_s)?,
            landscape_seed: parse_u64(col_lseed)?,
            start_seed: parse_u64(col_sseed)?,
            final_species_fitness: species_cols
                .iter()
                .map(|&(_, i)| parse_f64(i))
                .collect::<Result<_>>()?,
            final_system_fitness: parse_f64(col_system)?,
        });
    }
    Ok(rows)
}

/// Landscape-shape key used to pair cells across two results files.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
pub struct CellKey {
    pub n_vector: Vec<usize>,
    pub k: usize,
    pub c: usize,
    pub s: usize,
}

impl std::fmt::Display for CellKey {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "N={} K={} C={} S={}",
            format_n_vector(&self.n_vector),
            self.k,
            self.c,
            self.s
        )
    }
}

/// The policy side of a grouped cell.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct PolicyLabel {
    pub policy: String,
    pub error_rate: f64,
    pub error_mode: Option<String>,
}

/// All runs of one cell, grouped out of a results file.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupedCell {
    pub key: CellKey,
    pub label: PolicyLabel,
    pub sample: Vec<f64>,
}

/// Group result rows by landscape shape. Each shape must map to exactly
/// one policy label within a file, so that pairing two files is
/// unambiguous.
pub fn group_rows(rows: &[ResultRow]) -> Result<Vec<GroupedCell>> {
    let mut groups: BTreeMap<CellKey, GroupedCell> = BTreeMap::new();
    for row in rows {
        let key = CellKey {
            n_vector: row.n_vector.clone(),
            k: row.k,
            c: row.c,
            s: row.s,
        };
        let label = PolicyLabel {
            policy: row.policy.clone(),
            error_rate: row.error_rate,
            error_mode: if row.error_mode.is_empty() {
                None
            } else {
                Some(row.error_mode.clone())
            },
        };
        match groups.get_mut(&key) {
            None => {
                groups.insert(
                    key.clone(),
                    GroupedCell {
                        key,
                        label,
                        sample: vec![row.final_system_fitness],
                    },
                );
            }
            Some(group) => {
                if group.label != label {
                    return Err(Error::CellMismatch {
                        detail: format!(
                            "cell {} holds two policy labels ({:?} and {:?}); \
                             split the file before comparing",
                            group.key, group.label, label
                        ),
                    });
                }
                group.sample.push(row.final_system_fitness);
            }
        }
    }
    Ok(groups.into_values().collect())
}

/// One paired comparison in the report.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct KeyedComparison {
    #[serde(flatten)]
    pub key: CellKey,
    pub a: PolicyLabel,
    pub b: PolicyLabel,
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
    pub run_count_a: usize,
    pub run_count_b: usize,
    pub verdict: Verdict,
}

/// The full comparison report.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct ComparisonReport {
    pub alpha: f64,
    pub comparisons: Vec<KeyedComparison>,
}

/// Pair two results files by landscape shape and Welch-test every pair.
/// Every key must appear in both files.
pub fn compare_result_rows(
    rows_a: &[ResultRow],
    rows_b: &[ResultRow],
    alpha: f64,
) -> Result<ComparisonReport> {
    let groups_a = group_rows(rows_a)?;
    let groups_b = group_rows(rows_b)?;
    let index_b: BTreeMap<&CellKey, &GroupedCell> =
        groups_b.iter().map(|g| (&g.key, g)).collect();
    let keys_a: BTreeMap<&CellKey, ()> = groups_a.iter().map(|g| (&g.key, ())).collect();
    let mut unmatched: Vec<String> = groups_a
        .iter()
        .filter(|g| !index_b.contains_key(&g.key))
        .map(|g| format!("only in A: {}", g.key))
        .collect();
    unmatched.extend(
        groups_b
            .iter()
            .filter(|g| !keys_a.contains_key(&g.key))
            .map(|g| format!("only in B: {}", g.key)),
    );
    if !unmatched.is_empty() {
        return Err(Error::CellMismatch {
            detail: format!("unpaired cells: {}", unmatched.join("; ")),
        });
    }
    let mut comparisons = Vec::with_capacity(groups_a.len());
    for a in &groups_a {
        let b = index_b[&a.key];
        let test = welch_t_test(&a.sample, &b.sample)?;
        comparisons.push(KeyedComparison {
            key: a.key.clone(),
            a: a.label.clone(),
            b: b.label.clone(),
            t: test.t,
            df: test.df,
            p: test.p,
            mean_a: test.mean_a,
            mean_b: test.mean_b,
            run_count_a: test.n_a,
            run_count_b: test.n_b,
            verdict: test.verdict(alpha),
        });
    }
    Ok(ComparisonReport { alpha, comparisons })
}

/// Pretty JSON with a trailing newline. Degenerate infinite t statistics
/// serialize as `null` (JSON has no infinities).
pub fn write_comparison_json<W: io::Write>(mut writer: W, report: &ComparisonReport) -> Result<()> {
    serde_json::to_writer_pretty(&mut writer, report)
        .map_err(|e| Error::Io(format!("writing comparison report: {e}")))?;
    writer.write_all(b"\n")?;
    Ok(())
}
