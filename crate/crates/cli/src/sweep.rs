//! Accuracy/cost sweep over truncation parameters.
//!
//! One row per (method, truncation) pair. The CSV column contract is fixed:
//!
//! ```text
//! method,s,m_or_p,rel_error,coeff_count,residual,wall_ms
//! ```
//!
//! `s` is empty for chaos rows; `residual` is the largest block-solve
//! residual (always 0 for chaos rows, which are direct projections). Rows
//! are emitted in a fixed order regardless of execution order, so output is
//! byte-identical across runs and thread counts except for `wall_ms`.

use crate::config::ResolvedConfig;
use crate::{with_jobs, CliError};
use gpdd_core::gpce;
use gpdd_core::gpdd;
use gpdd_core::multiindex::{count_gpce_coefficients, count_gpdd_coefficients};
use gpdd_core::orthopoly::BasisCache;
use rayon::prelude::*;
use std::fmt::Write as _;
use std::time::Instant;

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub method: &'static str,
    pub interaction_order: Option<usize>,
    pub order: u32,
    pub rel_error: Option<f64>,
    pub coeff_count: u64,
    pub residual: f64,
    pub wall_ms: f64,
    pub error: Option<String>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub rows: Vec<SweepRow>,
    pub expansions: Vec<(String, String)>, // (file name, json)
}

impl SweepReport {
    pub fn any_failed(&self) -> bool {
        self.rows.iter().any(|r| r.error.is_some())
    }

    /// CSV per the fixed column contract; `with_timing` off drops the
    /// wall-clock column for byte-stable comparisons.
    pub fn to_csv(&self, with_timing: bool) -> String {
        let mut out = String::new();
        out.push_str("method,s,m_or_p,rel_error,coeff_count,residual,wall_ms");
        if !with_timing {
            out.truncate(out.len() - ",wall_ms".len());
        }
        out.push('\n');
        for r in &self.rows {
            let s = r
                .interaction_order
                .map(|v| v.to_string())
                .unwrap_or_default();
            let err = r
                .rel_error
                .map(|v| format!("{v:e}"))
                .unwrap_or_else(|| "nan".into());
            let residual = if r.residual.is_nan() {
                "nan".into()
            } else {
                format!("{:e}", r.residual)
            };
            let _ = write!(
                out,
                "{},{},{},{},{},{}",
                r.method, s, r.order, err, r.coeff_count, residual
            );
            if with_timing {
                let _ = write!(out, ",{:.3}", r.wall_ms);
            }
            out.push('\n');
        }
        out
    }
}

pub fn run_sweep(cfg: &ResolvedConfig) -> Result<SweepReport, CliError> {
    let sweep = cfg.sweep.as_ref().ok_or_else(|| CliError::Config {
        field: "sweep".into(),
        message: "sweep command needs a [sweep] section".into(),
    })?;
    let y = cfg.function.as_ref().ok_or_else(|| CliError::Config {
        field: "function".into(),
        message: "sweep command needs a [function] section".into(),
    })?;
    let n = cfg.measure.dimension();
    let cache = BasisCache::new(cfg.measure.clone(), cfg.precision);

    enum Task {
        DimWise { s: usize, m: u32 },
        DegreeWise { p: u32 },
    }
    let mut tasks = Vec::new();
    for &s in &sweep.interaction_orders {
        for &m in &sweep.polynomial_orders {
            if (m as usize) >= s {
                tasks.push(Task::DimWise { s, m });
            }
        }
    }
    for &p in &sweep.chaos_orders {
        tasks.push(Task::DegreeWise { p });
    }

    let results: Vec<(SweepRow, Option<(String, String)>)> = with_jobs(cfg.jobs, || {
        tasks
            .par_iter()
            .map(|t| run_task(t, y, cfg, &cache, n))
            .collect()
    });

    let mut rows = Vec::with_capacity(results.len());
    let mut expansions = Vec::new();
    for (row, exp) in results {
        rows.push(row);
        if let Some(e) = exp {
            expansions.push(e);
        }
    }
    return Ok(SweepReport { rows, expansions });

    fn run_task(
        task: &Task,
        y: &gpdd_core::Polynomial<f64>,
        cfg: &ResolvedConfig,
        cache: &BasisCache,
        n: usize,
    ) -> (SweepRow, Option<(String, String)>) {
        let start = Instant::now();
        match *task {
            Task::DimWise { s, m } => {
                let outcome = gpdd::expand_with_cache(y, cache, s, m).and_then(|e| {
                    let exact = gpdd::exact_variance(y, cache.measure())?;
                    if exact == 0.0 {
                        return Err(gpdd::GpddError::ZeroVariance);
                    }
                    Ok((e.to_file(cfg.precision), e, exact))
                });
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                match outcome {
                    Ok((file, e, exact)) => {
                        let rel = (exact - e.variance()).abs() / exact;
                        let residual = e
                            .diagnostics()
                            .iter()
                            .map(|d| d.residual)
                            .fold(0.0f64, f64::max);
                        (
                            SweepRow {
                                method: "gpdd",
                                interaction_order: Some(s),
                                order: m,
                                rel_error: Some(rel),
                                coeff_count: e.coefficient_count(),
                                residual,
                                wall_ms,
                                error: None,
                            },
                            Some((format!("gpdd_s{s}_m{m}.json"), file.to_json())),
                        )
                    }
                    Err(err) => (
                        SweepRow {
                            method: "gpdd",
                            interaction_order: Some(s),
                            order: m,
                            rel_error: None,
                            coeff_count: count_gpdd_coefficients(n, s, m).unwrap_or(0),
                            residual: f64::NAN,
                            wall_ms,
                            error: Some(err.to_string()),
                        },
                        None,
                    ),
                }
            }
            Task::DegreeWise { p } => {
                let outcome =
                    gpce::gpce_expand(y, cache.measure(), p, cfg.precision).and_then(|e| {
                        let mean = cache.measure().expect_polynomial(y)?;
                        let exact = cache.measure().expect_product(y, y)? - mean * mean;
                        if exact == 0.0 {
                            return Err(gpce::GpceError::ZeroVariance);
                        }
                        Ok((e.to_file(), e, exact))
                    });
                let wall_ms = start.elapsed().as_secs_f64() * 1e3;
                match outcome {
                    Ok((file, e, exact)) => {
                        let rel = (exact - e.variance()).abs() / exact;
                        (
                            SweepRow {
                                method: "gpce",
                                interaction_order: None,
                                order: p,
                                rel_error: Some(rel),
                                coeff_count: e.coefficient_count(),
                                residual: 0.0,
                                wall_ms,
                                error: None,
                            },
                            Some((format!("gpce_p{p}.json"), file.to_json())),
                        )
                    }
                    Err(err) => (
                        SweepRow {
                            method: "gpce",
                            interaction_order: None,
                            order: p,
                            rel_error: None,
                            coeff_count: count_gpce_coefficients(n, p),
                            residual: f64::NAN,
                            wall_ms,
                            error: Some(err.to_string()),
                        },
                        None,
                    ),
                }
            }
        }
    }
}

/// Write the CSV and per-row expansion files into the output directory.
pub fn write_outputs(report: &SweepReport, cfg: &ResolvedConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("sweep.csv"), report.to_csv(true))?;
    for (name, json) in &report.expansions {
        std::fs::write(cfg.out_dir.join(name), json)?;
    }
    Ok(())
}
