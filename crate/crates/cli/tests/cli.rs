//! Command-level behavior: config validation messages, output determinism,
//! the differential verification mode, and binary exit codes.

use gpdd_cli::config::{self, ResolvedConfig};
use gpdd_cli::{basis, sweep, verify, CliError};
use std::path::Path;
use std::process::Command;

fn resolve_str(text: &str, dir: &Path) -> Result<ResolvedConfig, CliError> {
    let path = dir.join("config.toml");
    std::fs::write(&path, text).unwrap();
    let file = config::load(&path)?;
    config::resolve(file, dir)
}

const MEASURE_BLOCK: &str = r#"
[measure]
kind = "dirichlet"
alpha = ["3/2", "3/2", "3/2", "3/2"]
"#;

#[test]
fn validation_names_offending_fields() {
    let dir = tempfile::tempdir().unwrap();
    let cases: &[(&str, &str)] = &[
        (
            r#"
[measure]
kind = "sobol"
"#,
            "measure.kind",
        ),
        (
            r#"
[measure]
kind = "dirichlet"
"#,
            "measure.alpha",
        ),
        (
            r#"
[measure]
kind = "dirichlet"
alpha = ["3/2", "0", "3/2"]
"#,
            "measure.alpha",
        ),
        (
            r#"
[measure]
kind = "independent"
[[measure.marginals]]
family = "uniform"
lower = "1"
"#,
            "measure.marginals[0].upper",
        ),
        (
            r#"
[measure]
kind = "moment-table"
max_degree = 2
[[measure.moments]]
exponents = [1]
value = "1/2"
"#,
            "measure.dimension",
        ),
    ];
    for (text, field) in cases {
        match resolve_str(text, dir.path()) {
            Err(CliError::Config { field: f, .. }) => {
                assert_eq!(&f, field, "wrong field reported for {text}")
            }
            other => panic!(
                "expected config error naming '{field}', got {:?}",
                other.err()
            ),
        }
    }
    // sweep ranges validated against the measure dimension
    let bad_sweep = format!(
        "{MEASURE_BLOCK}
[function]
polynomial = \"x1\"
[sweep]
interaction_orders = [4]
polynomial_orders = [4]
"
    );
    match resolve_str(&bad_sweep, dir.path()) {
        Err(CliError::Config { field, .. }) => assert_eq!(field, "sweep.interaction_orders"),
        other => panic!("expected range error, got {:?}", other.err()),
    }
    // a function mentioning variables outside the measure scope
    let bad_fn = format!(
        "{MEASURE_BLOCK}
[function]
polynomial = \"x9\"
"
    );
    match resolve_str(&bad_fn, dir.path()) {
        Err(CliError::Config { field, .. }) => assert_eq!(field, "function.polynomial"),
        other => panic!("expected function error, got {:?}", other.err()),
    }
}

#[test]
fn sweep_is_deterministic_and_skips_empty_cells() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{MEASURE_BLOCK}
[function]
polynomial = \"x1^2 + 0.5*x2*x3\"
[sweep]
interaction_orders = [1, 2]
polynomial_orders = [1, 2]
chaos_orders = [1, 2]
"
    );
    let cfg = resolve_str(&text, dir.path()).unwrap();
    let a = sweep::run_sweep(&cfg).unwrap();
    let b = sweep::run_sweep(&cfg).unwrap();
    assert_eq!(a.to_csv(false), b.to_csv(false));
    assert!(!a.any_failed());
    // (s=2, m=1) indexes nothing and must be absent
    assert_eq!(a.rows.len(), 3 + 2);
    let csv = a.to_csv(false);
    assert!(csv.starts_with("method,s,m_or_p,rel_error,coeff_count,residual\n"));
    assert!(csv.contains("gpdd,2,2,"));
    assert!(!csv.contains("gpdd,2,1,"));
}

#[test]
fn empty_sweep_lists_give_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{MEASURE_BLOCK}
[function]
polynomial = \"x1\"
[sweep]
interaction_orders = []
polynomial_orders = []
chaos_orders = []
"
    );
    let cfg = resolve_str(&text, dir.path()).unwrap();
    let report = sweep::run_sweep(&cfg).unwrap();
    assert!(report.rows.is_empty());
    assert_eq!(
        report.to_csv(true),
        "method,s,m_or_p,rel_error,coeff_count,residual,wall_ms\n"
    );
}

#[test]
fn basis_handles_degree_below_cardinality() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{MEASURE_BLOCK}
[basis]
max_cardinality = 3
max_degree = 1
"
    );
    let cfg = resolve_str(&text, dir.path()).unwrap();
    let report = basis::run_basis(&cfg).unwrap();
    assert!(report.table.contains("subset {1,2,3}"));
    assert!(report.table.contains("no indices at or below this degree"));
    // singletons still get their degree-1 rows
    assert!(report.table.contains("subset {1}\n  [1]"));
}

#[test]
fn verify_passes_on_healthy_measure() {
    let dir = tempfile::tempdir().unwrap();
    let text = format!(
        "{MEASURE_BLOCK}
[function]
polynomial = \"x1^2 + x2\"
[verify]
basis_degree = 3
moment_degree = 6
mc_samples = 40000
"
    );
    let mut cfg = resolve_str(&text, dir.path()).unwrap();
    cfg.seed = 3;
    let report = verify::run_verify(&cfg).unwrap();
    assert_eq!(report.failures(), 0, "\n{}", report.render());
}

#[test]
fn corrupted_moment_table_fails_differential_verification() {
    let dir = tempfile::tempdir().unwrap();
    // reference: the true one-dimensional marginal law of the benchmark
    // measure (a Beta law written as a two-entry simplex)
    std::fs::write(
        dir.path().join("reference.toml"),
        r#"
[measure]
kind = "dirichlet"
alpha = ["3/2", "9/2"]
"#,
    )
    .unwrap();
    // the same measure as a moment table, except E[X^2] is nudged by 1e-6:
    // far above the 1e-8 property tolerance, far below anything that would
    // break positive-definiteness of the construction
    let text = r#"
[measure]
kind = "moment-table"
dimension = 1
max_degree = 8
[[measure.moments]]
exponents = [0]
value = "1"
[[measure.moments]]
exponents = [1]
value = "1/4"
[[measure.moments]]
exponents = [2]
value = "625007/7000000"
[[measure.moments]]
exponents = [3]
value = "5/128"
[[measure.moments]]
exponents = [4]
value = "5/256"
[[measure.moments]]
exponents = [5]
value = "11/1024"
[[measure.moments]]
exponents = [6]
value = "13/2048"
[[measure.moments]]
exponents = [7]
value = "65/16384"
[[measure.moments]]
exponents = [8]
value = "85/32768"
[verify]
basis_degree = 3
moment_degree = 4
mc_samples = 1000
reference_measure = "reference.toml"
"#;
    let cfg = resolve_str(text, dir.path()).unwrap();
    let report = verify::run_verify(&cfg).unwrap();
    assert!(
        report.failures() > 0,
        "corrupted table escaped detection:\n{}",
        report.render()
    );
    let rendered = report.render();
    assert!(rendered.contains("FAIL"));
}

#[test]
fn failed_rows_are_recorded_and_run_continues() {
    // the table only reaches degree 4, so the order-3 dimension-wise row
    // needs Gram moments to degree 6 and must fail, while the order-1 chaos
    // row stays within range and succeeds
    let dir = tempfile::tempdir().unwrap();
    let text = r#"
[measure]
kind = "moment-table"
dimension = 1
max_degree = 4
[[measure.moments]]
exponents = [0]
value = "1"
[[measure.moments]]
exponents = [1]
value = "1/4"
[[measure.moments]]
exponents = [2]
value = "5/56"
[[measure.moments]]
exponents = [3]
value = "5/128"
[[measure.moments]]
exponents = [4]
value = "5/256"
[function]
polynomial = "x1^2"
[sweep]
interaction_orders = [1]
polynomial_orders = [3]
chaos_orders = [1]
"#;
    let cfg = resolve_str(text, dir.path()).unwrap();
    let report = sweep::run_sweep(&cfg).unwrap();
    assert!(report.any_failed());
    let gpdd_row = report.rows.iter().find(|r| r.method == "gpdd").unwrap();
    assert!(gpdd_row.error.is_some());
    assert!(gpdd_row.rel_error.is_none());
    let gpce_row = report.rows.iter().find(|r| r.method == "gpce").unwrap();
    assert!(gpce_row.error.is_none(), "{:?}", gpce_row.error);
    let csv = report.to_csv(false);
    assert!(csv.contains("gpdd,1,3,nan,"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_gpdd");
    let dir = tempfile::tempdir().unwrap();

    // usage error: missing config
    let out = Command::new(bin)
        .args(["sweep", "--config", "/nonexistent.toml"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));

    // config error names the field
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[measure]\nkind = \"unknown\"\n").unwrap();
    let out = Command::new(bin)
        .args(["basis", "--config"])
        .arg(&bad)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("measure.kind"));

    // a healthy tiny sweep exits zero and writes its artifacts
    let good = dir.path().join("good.toml");
    std::fs::write(
        &good,
        r#"
[measure]
kind = "dirichlet"
alpha = ["3/2", "3/2", "3/2", "3/2"]
[function]
polynomial = "x1^2 + 0.5*x2"
[sweep]
interaction_orders = [1]
polynomial_orders = [2]
chaos_orders = [2]
"#,
    )
    .unwrap();
    let outdir = dir.path().join("out");
    let out = Command::new(bin)
        .args(["sweep", "--config"])
        .arg(&good)
        .args(["--out"])
        .arg(&outdir)
        .output()
        .unwrap();
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(outdir.join("sweep.csv").exists());
    assert!(outdir.join("gpdd_s1_m2.json").exists());
    assert!(outdir.join("gpce_p2.json").exists());
    let csv = std::fs::read_to_string(outdir.join("sweep.csv")).unwrap();
    assert!(csv.starts_with("method,s,m_or_p,rel_error,coeff_count,residual,wall_ms\n"));

    // thread count must not change anything but the timing column
    let strip_timing = |text: &str| -> String {
        text.lines()
            .map(|l| {
                l.rsplit_once(',')
                    .map(|(head, _)| head.to_string())
                    .unwrap_or_default()
            })
            .collect::<Vec<_>>()
            .join("\n")
    };
    let out_serial = dir.path().join("serial");
    let status = Command::new(bin)
        .args(["sweep", "--config"])
        .arg(&good)
        .args(["--jobs", "1", "--out"])
        .arg(&out_serial)
        .status()
        .unwrap();
    assert!(status.success());
    let serial = std::fs::read_to_string(out_serial.join("sweep.csv")).unwrap();
    assert_eq!(strip_timing(&csv), strip_timing(&serial));
}
