//! Verification suite: cross-checks the analytic moment path against the
//! closed-form, quadrature, and Monte Carlo oracles, then measures the basis
//! zero-structure, annihilation, and expansion identities with explicit
//! residuals.
//!
//! When `verify.reference_measure` is configured, basis properties are
//! evaluated under the reference instead of the construction measure. This
//! differential mode is the negative control: building on a corrupted moment
//! table and referencing the true measure (or the other way round) must
//! surface orthonormality failures that a self-consistent check cannot see.

use crate::config::ResolvedConfig;
use crate::CliError;
use gpdd_core::gpdd;
use gpdd_core::measure::{Measure, MeasureKind};
use gpdd_core::multiindex::enumerate_subsets;
use gpdd_core::oracle;
use gpdd_core::orthopoly::{build_basis, BasisCache, OrthoBasis};
use gpdd_core::Polynomial;
use std::fmt::Write as _;
use std::sync::Arc;

const PROPERTY_TOL: f64 = 1e-8;
const QUADRATURE_REL_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Inconclusive,
    Skipped,
}

#[derive(Debug, Clone)]
pub struct CheckLine {
    pub name: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug)]
pub struct VerifyReport {
    pub lines: Vec<CheckLine>,
}

impl VerifyReport {
    pub fn failures(&self) -> usize {
        self.lines
            .iter()
            .filter(|l| l.status == Status::Fail)
            .count()
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for l in &self.lines {
            let tag = match l.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Inconclusive => "INCONCLUSIVE",
                Status::Skipped => "SKIP",
            };
            let _ = writeln!(out, "{tag:<13} {:<42} {}", l.name, l.detail);
        }
        let _ = writeln!(
            out,
            "{} checks, {} failed",
            self.lines.len(),
            self.failures()
        );
        out
    }
}

struct Checks {
    lines: Vec<CheckLine>,
}

impl Checks {
    fn residual(&mut self, name: &str, value: f64, tol: f64) {
        let status = if value.abs() <= tol {
            Status::Pass
        } else {
            Status::Fail
        };
        self.lines.push(CheckLine {
            name: name.into(),
            status,
            detail: format!("residual {value:.3e} (tol {tol:.0e})"),
        });
    }

    fn push(&mut self, name: &str, status: Status, detail: String) {
        self.lines.push(CheckLine {
            name: name.into(),
            status,
            detail,
        });
    }
}

pub fn run_verify(cfg: &ResolvedConfig) -> Result<VerifyReport, CliError> {
    let mut checks = Checks { lines: Vec::new() };
    let measure = &cfg.measure;
    let n = measure.dimension();

    // measure assumptions are informational
    let report = measure.validate_assumptions();
    for item in &report.items {
        checks.push(
            &format!("assumptions.item-{}", item.item),
            match item.status {
                gpdd_core::measure::ItemStatus::NotCheckable => Status::Inconclusive,
                _ => Status::Pass,
            },
            item.note.clone(),
        );
    }

    moment_concordance(&mut checks, cfg)?;

    // basis property suites, evaluated under the reference measure when the
    // differential mode is configured
    let eval_measure = cfg.verify.reference_measure.as_ref().unwrap_or(measure);
    let mut bases: Vec<Arc<OrthoBasis>> = Vec::new();
    for subset in enumerate_subsets(n, n).map_err(|e| CliError::Numerical(e.to_string()))? {
        bases.push(Arc::new(build_basis(
            measure,
            &subset,
            cfg.verify.basis_degree,
            cfg.precision,
        )?));
    }
    basis_structure(&mut checks, &bases, eval_measure)?;
    annihilation(
        &mut checks,
        &bases,
        eval_measure,
        cfg.verify.annihilation_probe,
    )?;

    if let Some(y) = &cfg.function {
        function_suite(&mut checks, y, cfg)?;
    }

    Ok(VerifyReport {
        lines: checks.lines,
    })
}

/// Analytic moments against the closed form, the quadrature rule, and a
/// Monte Carlo batch.
fn moment_concordance(checks: &mut Checks, cfg: &ResolvedConfig) -> Result<(), CliError> {
    let measure = &cfg.measure;
    let n = measure.dimension();
    let max_degree = cfg.verify.moment_degree;
    let monos: Vec<_> = (0..=max_degree)
        .flat_map(|d| gpdd_core::multiindex::enumerate_full_degree(n, d))
        .collect();

    if let MeasureKind::Dirichlet { alpha } = measure.kind() {
        let mut all_equal = true;
        for j in &monos {
            let analytic = measure.moment_exact(j.exponents())?;
            let closed = oracle::dirichlet_moment_exact(alpha, j.exponents())
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            if analytic != closed {
                all_equal = false;
            }
        }
        checks.push(
            "moments.recursion-vs-closed-form",
            if all_equal {
                Status::Pass
            } else {
                Status::Fail
            },
            format!(
                "{} moments to degree {max_degree}, exact comparison",
                monos.len()
            ),
        );
    }

    match oracle::measure_rule(measure, max_degree + 2) {
        Ok(rule) => {
            let mut worst = 0.0f64;
            for j in &monos {
                let exact = measure.moment(j.exponents())?;
                let quad = rule.integrate(|x| {
                    j.exponents()
                        .iter()
                        .zip(x)
                        .map(|(&e, &xi)| xi.powi(e as i32))
                        .product()
                });
                let err = if exact.abs() > 1e-14 {
                    (quad - exact).abs() / exact.abs()
                } else {
                    (quad - exact).abs() / 1e-3
                };
                worst = worst.max(err);
            }
            checks.residual("moments.analytic-vs-quadrature", worst, QUADRATURE_REL_TOL);
        }
        Err(_) => checks.push(
            "moments.analytic-vs-quadrature",
            Status::Skipped,
            "no density available for this measure kind".into(),
        ),
    }

    match oracle::sample_measure(measure, cfg.verify.mc_samples, cfg.seed) {
        Ok(batch) => {
            let mut worst_z = 0.0f64;
            let mut wide = 0usize;
            for j in &monos {
                let exact = measure.moment(j.exponents())?;
                let (est, se) = oracle::mc_expectation(&batch, |x| {
                    j.exponents()
                        .iter()
                        .zip(x)
                        .map(|(&e, &xi)| xi.powi(e as i32))
                        .product()
                })
                .map_err(|e| CliError::Numerical(e.to_string()))?;
                if 3.0 * se > 0.5 * exact.abs().max(1e-9) {
                    wide += 1;
                    continue;
                }
                if se > 0.0 {
                    worst_z = worst_z.max((est - exact).abs() / se);
                }
            }
            let informative = monos.len() - wide;
            if informative == 0 {
                checks.push(
                    "moments.analytic-vs-mc",
                    Status::Inconclusive,
                    format!(
                        "all {} bands too wide at n = {}",
                        monos.len(),
                        cfg.verify.mc_samples
                    ),
                );
            } else {
                let status = if worst_z <= 3.0 {
                    Status::Pass
                } else {
                    Status::Fail
                };
                checks.push(
                    "moments.analytic-vs-mc",
                    status,
                    format!(
                        "max |z| = {worst_z:.2} over {informative} moments \
                         ({wide} inconclusive), n = {}",
                        cfg.verify.mc_samples
                    ),
                );
            }
        }
        Err(_) => checks.push(
            "moments.analytic-vs-mc",
            Status::Skipped,
            "sampling unsupported for this measure kind".into(),
        ),
    }
    Ok(())
}

/// Zero means, unit norms, cross-degree zeros within a subset, and
/// nested-subset zeros across bases.
fn basis_structure(
    checks: &mut Checks,
    bases: &[Arc<OrthoBasis>],
    eval: &Measure,
) -> Result<(), CliError> {
    let mut mean_resid = 0.0f64;
    let mut norm_resid = 0.0f64;
    let mut cross_degree = 0.0f64;
    let mut nested = 0.0f64;
    for basis in bases {
        let idx = basis.indices();
        for (a, ja) in idx.iter().enumerate() {
            let pa = basis.psi(ja).expect("stored");
            mean_resid = mean_resid.max(eval.expect_polynomial(pa)?.abs());
            norm_resid = norm_resid.max((eval.expect_product_refined(pa, pa)? - 1.0).abs());
            for jb in idx.iter().skip(a + 1) {
                if ja.degree() == jb.degree() {
                    continue;
                }
                let pb = basis.psi(jb).expect("stored");
                cross_degree = cross_degree.max(eval.expect_product_refined(pa, pb)?.abs());
            }
        }
    }
    for a in bases {
        for b in bases {
            if a.subset() == b.subset() || !a.subset().is_subset_of(b.subset()) {
                continue;
            }
            for ja in a.indices() {
                let pa = a.psi(&ja).expect("stored");
                for jb in b.indices() {
                    let pb = b.psi(&jb).expect("stored");
                    nested = nested.max(eval.expect_product_refined(pa, pb)?.abs());
                }
            }
        }
    }
    checks.residual("basis.zero-mean", mean_resid, PROPERTY_TOL);
    checks.residual("basis.unit-norm", norm_resid, PROPERTY_TOL);
    checks.residual(
        "basis.cross-degree-orthogonality",
        cross_degree,
        PROPERTY_TOL,
    );
    checks.residual("basis.nested-subset-orthogonality", nested, PROPERTY_TOL);
    Ok(())
}

/// Coordinate-wise annihilation residuals for every stored basis polynomial.
fn annihilation(
    checks: &mut Checks,
    bases: &[Arc<OrthoBasis>],
    eval: &Measure,
    probe: u32,
) -> Result<(), CliError> {
    let mut worst = 0.0f64;
    for basis in bases {
        for j in basis.indices() {
            let psi = basis.psi(&j).expect("stored");
            for &var in basis.subset().members() {
                // E[psi * q] over monomials q on the remaining coordinates
                let rest: Vec<u32> = basis
                    .subset()
                    .members()
                    .iter()
                    .copied()
                    .filter(|&v| v != var)
                    .collect();
                worst = worst.max(eval.expect_polynomial(psi)?.abs());
                if rest.is_empty() {
                    continue;
                }
                let scope = gpdd_core::SubsetId::new(rest).expect("sorted");
                for d in 1..=probe {
                    for q in gpdd_core::multiindex::enumerate_full_degree(scope.cardinality(), d) {
                        let mono = Polynomial::monomial(scope.clone(), q, 1.0).expect("arity");
                        worst = worst.max(eval.expect_product_refined(psi, &mono)?.abs());
                    }
                }
            }
        }
    }
    checks.residual("basis.annihilation", worst, PROPERTY_TOL);
    Ok(())
}

/// Expansion identities on the configured response: Monte Carlo mean check,
/// pointwise exactness of the full expansion, truncation-error orthogonality,
/// and the second-moment identity.
fn function_suite(
    checks: &mut Checks,
    y: &Polynomial<f64>,
    cfg: &ResolvedConfig,
) -> Result<(), CliError> {
    let measure = &cfg.measure;
    let n = measure.dimension();
    let mean = measure.expect_polynomial(y)?;

    match oracle::sample_measure(measure, cfg.verify.mc_samples, cfg.seed.wrapping_add(1)) {
        Ok(batch) => {
            let (est, se) = oracle::mc_expectation(&batch, |x| y.evaluate(x).unwrap_or(f64::NAN))
                .map_err(|e| CliError::Numerical(e.to_string()))?;
            let band = 3.0 * se;
            let (status, detail) = if band > 0.5 * mean.abs().max(1e-9) {
                (
                    Status::Inconclusive,
                    format!("band {band:.3e} too wide at n = {}", cfg.verify.mc_samples),
                )
            } else if (est - mean).abs() <= band {
                (
                    Status::Pass,
                    format!("|{est:.6e} - {mean:.6e}| within 3 se = {band:.3e}"),
                )
            } else {
                (
                    Status::Fail,
                    format!("estimate {est:.6e} vs analytic {mean:.6e}, 3 se = {band:.3e}"),
                )
            };
            checks.push("response.mean-vs-mc", status, detail);
        }
        Err(_) => checks.push(
            "response.mean-vs-mc",
            Status::Skipped,
            "sampling unsupported for this measure kind".into(),
        ),
    }

    let degree = y.degree().unwrap_or(0).max(n as u32);
    let cache = BasisCache::new(measure.clone(), cfg.precision);
    let full = gpdd::expand_with_cache(y, &cache, n, degree)?;

    // pointwise exactness at sampled support points
    match oracle::sample_measure(measure, 100, cfg.seed.wrapping_add(2)) {
        Ok(points) => {
            let mut worst = 0.0f64;
            for row in points.rows() {
                let want = y
                    .evaluate(row)
                    .map_err(|e| CliError::Numerical(e.to_string()))?;
                let got = full.evaluate(row)?;
                worst = worst.max((want - got).abs() / (1.0 + want.abs()));
            }
            checks.residual("expansion.full-order-exactness", worst, PROPERTY_TOL);
        }
        Err(_) => checks.push(
            "expansion.full-order-exactness",
            Status::Skipped,
            "sampling unsupported for this measure kind".into(),
        ),
    }

    // second-moment identity at full truncation
    let second = measure.expect_product(y, y)?;
    let resid =
        (full.mean() * full.mean() + full.variance() - second).abs() / second.abs().max(1e-300);
    checks.residual("expansion.second-moment-identity", resid, PROPERTY_TOL);

    // truncation-error orthogonality: the solve residual of a genuinely
    // truncated expansion is exactly max |E[(y - yhat) psi]| over retained psi
    let trunc_m = degree.clamp(1, 3);
    let truncated = gpdd::expand_with_cache(y, &cache, 1, trunc_m)?;
    let resid = truncated
        .diagnostics()
        .iter()
        .map(|d| d.residual)
        .fold(0.0f64, f64::max);
    checks.residual("expansion.truncation-orthogonality", resid, PROPERTY_TOL);
    Ok(())
}

pub fn write_outputs(report: &VerifyReport, cfg: &ResolvedConfig) -> Result<(), CliError> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    std::fs::write(cfg.out_dir.join("verify.txt"), report.render())?;
    Ok(())
}
