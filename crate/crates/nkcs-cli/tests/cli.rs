//! End-to-end tests of the `nkcs` binary: flag handling, file outputs,
//! exit codes, and byte-level reproducibility.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn nkcs() -> Command {
    Command::new(env!("CARGO_BIN_EXE_nkcs"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = nkcs().args(args).output().expect("spawn nkcs");
    assert!(
        out.status.success(),
        "nkcs {args:?} failed\nstdout: {}\nstderr: {}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn read(path: &Path) -> String {
    fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

/// A small config exercising all three policies; quick even unoptimized.
fn small_sweep_config(dir: &Path) -> PathBuf {
    let path = dir.join("sweep.toml");
    fs::write(
        &path,
        "[experiment]\n\
         generations = 200\n\
         landscapes = 2\n\
         restarts_per_landscape = 2\n\
         master_seed = 11\n\n\
         [sweep]\n\
         n = [8]\n\
         k = [1, 2]\n\
         c = [1]\n\
         s = [1]\n\
         policies = [\"coev\", \"com\", \"glob\"]\n",
    )
    .unwrap();
    path
}

#[test]
fn trace_row_count_and_rerun_identity() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    let args = |out: &Path| {
        vec![
            "trace".to_string(),
            "--n".into(),
            "8".into(),
            "--k".into(),
            "2".into(),
            "--c".into(),
            "1".into(),
            "--s".into(),
            "1".into(),
            "--policy".into(),
            "coev".into(),
            "--generations".into(),
            "1000".into(),
            "--trace-every".into(),
            "100".into(),
            "--seed".into(),
            "7".into(),
            "--out-dir".into(),
            out.display().to_string(),
        ]
    };
    let out = nkcs().args(args(&out_a)).output().unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let trace = read(&out_a.join("trace.csv"));
    let lines: Vec<&str> = trace.lines().collect();
    // Header + generations 0, 100, ..., 1000.
    assert_eq!(lines.len(), 1 + 11, "unexpected trace:\n{trace}");
    assert_eq!(
        lines[0],
        "generation,fitness_species_0,fitness_species_1,system_fitness"
    );
    assert!(lines[1].starts_with("0,"));
    assert!(lines[11].starts_with("1000,"));

    nkcs().args(args(&out_b)).output().unwrap();
    assert_eq!(trace, read(&out_b.join("trace.csv")), "reruns must match");

    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_a.join("manifest.json"))).unwrap();
    assert_eq!(manifest["tool"], "nkcs");
    assert_eq!(manifest["command"], "trace");
    assert_eq!(manifest["master_seed"], 7);
    assert_eq!(manifest["config"]["cell"]["k"], 2);
    assert_eq!(manifest["failures"].as_array().unwrap().len(), 0);
}

#[test]
fn trace_with_more_coupling_reaches_equilibrium_later() {
    // Matched seeds, c=1 vs c=3: stronger coupling keeps runs improving
    // longer on average; check the reported last-acceptance generation
    // moves in that direction for a majority of seeds.
    let dir = tempfile::tempdir().unwrap();
    let last_accept = |c: &str, seed: &str| -> u64 {
        let out_dir = dir.path().join(format!("c{c}-s{seed}"));
        let out = run_ok(&[
            "trace", "--n", "8", "--k", "2", "--c", c, "--s", "1", "--policy", "coev",
            "--generations", "2000", "--seed", seed, "--out-dir",
            out_dir.to_str().unwrap(),
        ]);
        let stdout = String::from_utf8_lossy(&out.stdout).into_owned();
        let field = stdout
            .split("last_accepted_at=")
            .nth(1)
            .and_then(|rest| rest.split_whitespace().next())
            .unwrap_or_else(|| panic!("missing last_accepted_at in: {stdout}"));
        field.parse().unwrap_or_else(|_| panic!("bad field {field} in: {stdout}"))
    };
    let mut later = 0;
    let seeds = ["3", "4", "5", "6", "7"];
    for seed in seeds {
        if last_accept("3", seed) > last_accept("1", seed) {
            later += 1;
        }
    }
    assert!(
        2 * later >= seeds.len(),
        "c=3 settled later in only {later}/{} matched seeds",
        seeds.len()
    );
}

#[test]
fn sweep_outputs_and_reproducibility() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep_config(dir.path());
    let run_into = |out: &Path, extra: &[&str]| {
        let mut args = vec![
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--out-dir",
            out.to_str().unwrap(),
        ];
        args.extend_from_slice(extra);
        run_ok(&args)
    };

    let out_a = dir.path().join("a");
    run_into(&out_a, &[]);
    let results = read(&out_a.join("results.csv"));
    let aggregate = read(&out_a.join("aggregate.csv"));
    // 6 cells x 4 runs, plus headers.
    assert_eq!(results.lines().count(), 1 + 24);
    assert_eq!(aggregate.lines().count(), 1 + 6);
    assert!(results
        .lines()
        .nth(1)
        .unwrap()
        .starts_with("coev,0,,8x8,1,1,1,"));

    let manifest: serde_json::Value =
        serde_json::from_str(&read(&out_a.join("manifest.json"))).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(
        manifest["config"]["sweep"]["policies"],
        serde_json::json!(["coev", "com", "glob"])
    );
    assert_eq!(manifest["outputs"].as_array().unwrap().len(), 2);

    // Bit-identical on rerun and under a different worker count.
    let out_b = dir.path().join("b");
    run_into(&out_b, &[]);
    assert_eq!(results, read(&out_b.join("results.csv")));
    assert_eq!(aggregate, read(&out_b.join("aggregate.csv")));

    let out_w1 = dir.path().join("w1");
    let out_w4 = dir.path().join("w4");
    run_into(&out_w1, &["--workers", "1"]);
    run_into(&out_w4, &["--workers", "4"]);
    assert_eq!(read(&out_w1.join("results.csv")), read(&out_w4.join("results.csv")));
    assert_eq!(results, read(&out_w1.join("results.csv")));
}

#[test]
fn sweep_flag_pins_axis_and_preset_loads() {
    // The built-in grid preset with every axis pinned down to one cell;
    // low generations keep it quick.
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    run_ok(&[
        "sweep", "--config", "paper-fig3", "--n", "8", "--k", "1", "--c", "1", "--s", "1",
        "--policy", "glob", "--generations", "100", "--landscapes", "2", "--restarts", "1",
        "--out-dir", out.to_str().unwrap(),
    ]);
    let aggregate = read(&out.join("aggregate.csv"));
    assert_eq!(aggregate.lines().count(), 1 + 1);
    let row = aggregate.lines().nth(1).unwrap();
    assert!(row.starts_with("glob,0,,8x8,1,1,1,"), "{row}");
    assert!(row.ends_with(",2"), "run_count should be 2: {row}");
}

#[test]
fn compare_file_with_itself_is_indistinguishable() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep_config(dir.path());
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--policy",
        "coev",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    let results = out.join("results.csv");
    let cmp_dir = dir.path().join("cmp");
    let out = run_ok(&[
        "compare",
        results.to_str().unwrap(),
        results.to_str().unwrap(),
        "--out-dir",
        cmp_dir.to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(
        stdout.contains("indistinguishable 2"),
        "unexpected summary: {stdout}"
    );
    let report: serde_json::Value =
        serde_json::from_str(&read(&cmp_dir.join("comparison.json"))).unwrap();
    assert_eq!(report["alpha"], 0.05);
    let comparisons = report["comparisons"].as_array().unwrap();
    assert_eq!(comparisons.len(), 2);
    assert!(comparisons
        .iter()
        .all(|c| c["verdict"] == "indistinguishable" && c["p"] == 1.0));
}

#[test]
fn compare_policy_filters_select_from_mixed_table() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep_config(dir.path());
    let out = dir.path().join("out");
    run_ok(&[
        "sweep",
        "--config",
        config.to_str().unwrap(),
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    let results = out.join("results.csv");

    // Unfiltered, a mixed table cannot be compared.
    let mixed = nkcs()
        .args(["compare", results.to_str().unwrap(), results.to_str().unwrap()])
        .args(["--out-dir", dir.path().join("cmp0").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&mixed), 2);
    assert!(String::from_utf8_lossy(&mixed.stderr).contains("policy labels"));

    // With filters the same file yields per-cell verdicts. At S=1 an
    // errorless commune is exactly unanimity, so com must tie glob.
    let filtered = run_ok(&[
        "compare",
        results.to_str().unwrap(),
        results.to_str().unwrap(),
        "--policy-a",
        "com",
        "--policy-b",
        "glob",
        "--out-dir",
        dir.path().join("cmp1").to_str().unwrap(),
    ]);
    let stdout = String::from_utf8_lossy(&filtered.stdout);
    assert!(stdout.contains("indistinguishable 2"), "{stdout}");
}

#[test]
fn compare_reports_unmatched_cells() {
    let dir = tempfile::tempdir().unwrap();
    let config = small_sweep_config(dir.path());
    let sweep_k = |k: &str, out: &Path| {
        run_ok(&[
            "sweep",
            "--config",
            config.to_str().unwrap(),
            "--policy",
            "coev",
            "--k",
            k,
            "--out-dir",
            out.to_str().unwrap(),
        ]);
    };
    let out_k1 = dir.path().join("k1");
    let out_k2 = dir.path().join("k2");
    sweep_k("1", &out_k1);
    sweep_k("2", &out_k2);
    let out = nkcs()
        .args([
            "compare",
            out_k1.join("results.csv").to_str().unwrap(),
            out_k2.join("results.csv").to_str().unwrap(),
        ])
        .args(["--out-dir", dir.path().join("cmp").to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("only in A"), "{stderr}");
    assert!(stderr.contains("K=1"), "{stderr}");
}

#[test]
fn usage_errors_exit_one() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["trace", "--n", "8", "--k", "2"], // missing policy etc.
        vec!["trace", "--n", "8", "--k", "2", "--c", "1", "--s", "1", "--policy", "mob"],
        vec!["trace", "--n", "8,x", "--k", "2", "--c", "1", "--s", "1", "--policy", "coev"],
        vec!["sweep", "--config", "/nonexistent/config.toml"],
        vec!["sweep", "--config", "paper-fig9"],
        vec!["trace", "--frobnicate"],
        vec!["compare", "a.csv", "b.csv", "--alpha", "1.5"],
    ];
    for args in cases {
        let out = nkcs().args(&args).output().unwrap();
        assert_eq!(exit_code(&out), 1, "args {args:?}");
    }
}

#[test]
fn help_and_version_exit_zero() {
    for args in [["--help"], ["--version"]] {
        let out = nkcs().args(args).output().unwrap();
        assert_eq!(exit_code(&out), 0, "{args:?}");
    }
    let out = nkcs().args(["trace", "--help"]).output().unwrap();
    assert_eq!(exit_code(&out), 0);
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("--trace-every"), "{text}");
}

#[test]
fn missing_results_file_is_execution_failure() {
    let dir = tempfile::tempdir().unwrap();
    let out = nkcs()
        .args(["compare", "/nonexistent/a.csv", "/nonexistent/b.csv"])
        .args(["--out-dir", dir.path().to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 2);
}

#[test]
fn out_dir_env_var_is_default() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("from-env");
    let out = nkcs()
        .args([
            "trace", "--n", "6", "--k", "1", "--c", "1", "--s", "1", "--policy", "glob",
            "--generations", "50",
        ])
        .env("NKCS_OUT_DIR", &out_dir)
        .output()
        .unwrap();
    assert_eq!(exit_code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert!(out_dir.join("trace.csv").exists());
    assert!(out_dir.join("manifest.json").exists());
}

#[test]
fn selfcheck_passes_from_fresh_build() {
    // The full oracle suite is exercised at scale elsewhere; here the
    // binary contract: per-check lines and exit 0.
    let out = nkcs().arg("selfcheck").output().unwrap();
    assert_eq!(
        exit_code(&out),
        0,
        "stderr: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    for name in [
        "mixer-goldens",
        "exhaustive-fitness-equality",
        "policy-nesting",
        "global-control-monotonicity",
        "t-test-vectors",
    ] {
        assert!(stdout.contains(&format!("check {name}: PASS")), "{stdout}");
    }
    assert!(stdout.contains("all 9 checks passed"), "{stdout}");
}
