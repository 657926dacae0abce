//! Dimension-wise expansion of a polynomial response in the subset-orthogonal
//! families, truncated by interaction order S and polynomial order m.
//!
//! Coefficients of one total degree couple only with each other, so they are
//! found by solving one symmetric positive-definite Gram system per degree.
//! A truncated expansion solves the systems restricted to subsets of
//! cardinality at most S (a Galerkin projection onto the truncated space),
//! which is what makes it the best mean-square approximation from that space;
//! restricting a full solve afterwards would give different, non-optimal
//! coefficients whenever retained and discarded keys couple.

use crate::linalg::{condition_estimate, FactorError, Ldlt, SymMatrix};
use crate::measure::{Measure, MeasureError};
use crate::multiindex::{enumerate_interior_degree, enumerate_subsets, MultiIndex, SubsetId};
use crate::orthopoly::{BasisCache, OrthoBasis, OrthoError, Precision};
use crate::polynomial::{PolyError, Polynomial};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::sync::Arc;

/// Solve residual above this fraction of the right-hand side ends the run.
pub const RESIDUAL_HARD_LIMIT: f64 = 1e-4;
/// Residuals above this fraction are flagged in the diagnostics.
pub const RESIDUAL_WARN_LIMIT: f64 = 1e-8;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GpddError {
    #[error("interaction order {s} must lie in 1..={n}")]
    InteractionOrder { s: usize, n: usize },
    #[error("polynomial order {m} must be at least the interaction order {s}")]
    PolynomialOrder { m: u32, s: usize },
    #[error("response uses variable x{var} outside the measure dimension {n}")]
    ResponseOutOfScope { var: u32, n: usize },
    #[error("degree-{degree} system is not positive definite")]
    NotPositiveDefinite { degree: u32 },
    #[error(
        "degree-{degree} solve residual {residual:.3e} exceeds {limit:.0e} of the right-hand side"
    )]
    ResidualTooLarge {
        degree: u32,
        residual: f64,
        limit: f64,
    },
    #[error("component {0:?} is not part of this expansion")]
    UnknownComponent(SubsetId),
    #[error("response variance is zero; relative error is undefined")]
    ZeroVariance,
    #[error("expansion was built against a different measure")]
    MeasureMismatch,
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Mean of the response under the measure (the constant expansion term).
pub fn mean_of(y: &Polynomial<f64>, measure: &Measure) -> Result<f64, GpddError> {
    Ok(measure.expect_polynomial(y)?)
}

/// Right-hand-side entry E[y * psi] of the degree-block system.
pub fn rhs_entry(
    y: &Polynomial<f64>,
    psi: &Polynomial<f64>,
    measure: &Measure,
) -> Result<f64, GpddError> {
    Ok(measure.expect_product(y, psi)?)
}

/// Gram entry E[psi_a * psi_b] of the degree-block system.
pub fn gram_entry(
    psi_a: &Polynomial<f64>,
    psi_b: &Polynomial<f64>,
    measure: &Measure,
) -> Result<f64, GpddError> {
    Ok(measure.expect_product(psi_a, psi_b)?)
}

/// Exact second moment minus squared mean of a polynomial response.
pub fn exact_variance(y: &Polynomial<f64>, measure: &Measure) -> Result<f64, GpddError> {
    let mean = measure.expect_polynomial(y)?;
    let second = measure.expect_product(y, y)?;
    Ok(second - mean * mean)
}

/// One solved coefficient block: all retained keys of a single total degree.
#[derive(Debug, Clone)]
pub struct DegreeBlock {
    pub degree: u32,
    pub keys: Vec<(SubsetId, MultiIndex)>,
    pub matrix: SymMatrix<f64>,
    pub rhs: Vec<f64>,
    pub solution: Vec<f64>,
    pub residual: f64,
    pub condition: f64,
}

/// Retained keys of total degree `l` under interaction order `s`, in the
/// canonical (subset, index) order.
pub fn block_keys(n: usize, s: usize, l: u32) -> Vec<(SubsetId, MultiIndex)> {
    let top = s.min(l as usize);
    let mut keys = Vec::new();
    for u in enumerate_subsets(n, top).expect("1 <= top <= n") {
        for j in enumerate_interior_degree(u.cardinality(), l) {
            keys.push((u.clone(), j));
        }
    }
    keys
}

/// Assemble and solve the degree-`l` system restricted to interaction order
/// `s`. Bases are pulled from the cache at degree `basis_degree.max(l)`.
pub fn solve_degree_block(
    l: u32,
    s: usize,
    y: &Polynomial<f64>,
    measure: &Measure,
    cache: &BasisCache,
    basis_degree: u32,
) -> Result<DegreeBlock, GpddError> {
    let n = measure.dimension();
    let keys = block_keys(n, s, l);
    let q = keys.len();
    let mut bases: BTreeMap<SubsetId, Arc<OrthoBasis>> = BTreeMap::new();
    for (u, _) in &keys {
        if !bases.contains_key(u) {
            bases.insert(u.clone(), cache.get_at_least(u, basis_degree.max(l))?);
        }
    }
    let psi = |k: &(SubsetId, MultiIndex)| -> &Polynomial<f64> {
        bases[&k.0].psi(&k.1).expect("basis covers block degree")
    };
    let mut matrix = SymMatrix::zeros(q);
    for a in 0..q {
        for b in 0..=a {
            matrix.set(a, b, measure.expect_product(psi(&keys[a]), psi(&keys[b]))?);
        }
    }
    let mut rhs = Vec::with_capacity(q);
    for k in &keys {
        rhs.push(measure.expect_product(y, psi(k))?);
    }
    let factor = Ldlt::factor(&matrix).map_err(|FactorError::NonPositivePivot { .. }| {
        GpddError::NotPositiveDefinite { degree: l }
    })?;
    let solution = factor.solve(&rhs);
    let mut residual: f64 = 0.0;
    for (a, rhs_a) in rhs.iter().enumerate() {
        let mut r = -rhs_a;
        for (b, c) in solution.iter().enumerate() {
            r += matrix.get(a, b) * c;
        }
        residual = residual.max(r.abs());
    }
    let scale = rhs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale > 0.0 && residual > RESIDUAL_HARD_LIMIT * scale {
        return Err(GpddError::ResidualTooLarge {
            degree: l,
            residual,
            limit: RESIDUAL_HARD_LIMIT,
        });
    }
    let condition = condition_estimate(&matrix);
    Ok(DegreeBlock {
        degree: l,
        keys,
        matrix,
        rhs,
        solution,
        residual,
        condition,
    })
}

/// Per-block solve summary kept with the expansion.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BlockDiagnostics {
    pub degree: u32,
    pub size: usize,
    pub residual: f64,
    pub condition: f64,
    /// True when the block was skipped because the response has no content
    /// at this degree.
    pub skipped: bool,
    /// True when the residual exceeded the warn threshold.
    pub residual_warning: bool,
}

/// Truncated dimension-wise expansion of one response.
#[derive(Debug, Clone)]
pub struct GpddExpansion {
    mean: f64,
    n: usize,
    interaction_order: usize,
    polynomial_order: u32,
    coefficients: BTreeMap<(SubsetId, MultiIndex), f64>,
    blocks: Vec<DegreeBlock>,
    diagnostics: Vec<BlockDiagnostics>,
    bases: BTreeMap<SubsetId, Arc<OrthoBasis>>,
    measure_fingerprint: u64,
}

/// Expand `y` to interaction order `s` and polynomial order `m`, building
/// bases through a fresh cache.
pub fn expand(
    y: &Polynomial<f64>,
    measure: &Measure,
    s: usize,
    m: u32,
    precision: Precision,
) -> Result<GpddExpansion, GpddError> {
    let cache = BasisCache::new(measure.clone(), precision);
    expand_with_cache(y, &cache, s, m)
}

/// Expand using a shared basis cache (one cache per measure serves a whole
/// parameter sweep).
pub fn expand_with_cache(
    y: &Polynomial<f64>,
    cache: &BasisCache,
    s: usize,
    m: u32,
) -> Result<GpddExpansion, GpddError> {
    let measure = cache.measure();
    let n = measure.dimension();
    if s < 1 || s > n {
        return Err(GpddError::InteractionOrder { s, n });
    }
    if m < s as u32 {
        return Err(GpddError::PolynomialOrder { m, s });
    }
    if y.scope().max_member() as usize > n {
        return Err(GpddError::ResponseOutOfScope {
            var: y.scope().max_member(),
            n,
        });
    }
    let mean = measure.expect_polynomial(y)?;
    let response_degree = y.degree().unwrap_or(0);

    let mut coefficients = BTreeMap::new();
    let mut blocks = Vec::new();
    let mut diagnostics = Vec::new();
    for l in 1..=m {
        if l > response_degree {
            // no degree-l content: the right-hand side vanishes identically
            let keys = block_keys(n, s, l);
            diagnostics.push(BlockDiagnostics {
                degree: l,
                size: keys.len(),
                residual: 0.0,
                condition: 0.0,
                skipped: true,
                residual_warning: false,
            });
            for (u, j) in keys {
                coefficients.insert((u, j), 0.0);
            }
            continue;
        }
        let block = solve_degree_block(l, s, y, measure, cache, m)?;
        diagnostics.push(BlockDiagnostics {
            degree: l,
            size: block.keys.len(),
            residual: block.residual,
            condition: block.condition,
            skipped: false,
            residual_warning: {
                let scale = block.rhs.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
                scale > 0.0 && block.residual > RESIDUAL_WARN_LIMIT * scale
            },
        });
        for (k, c) in block.keys.iter().zip(&block.solution) {
            coefficients.insert(k.clone(), *c);
        }
        blocks.push(block);
    }

    let mut bases = BTreeMap::new();
    for u in enumerate_subsets(n, s).expect("validated range") {
        bases.insert(u.clone(), cache.get_at_least(&u, m)?);
    }
    Ok(GpddExpansion {
        mean,
        n,
        interaction_order: s,
        polynomial_order: m,
        coefficients,
        blocks,
        diagnostics,
        bases,
        measure_fingerprint: measure.fingerprint(),
    })
}

impl GpddExpansion {
    pub fn mean(&self) -> f64 {
        self.mean
    }

    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn interaction_order(&self) -> usize {
        self.interaction_order
    }

    pub fn polynomial_order(&self) -> u32 {
        self.polynomial_order
    }

    pub fn measure_fingerprint(&self) -> u64 {
        self.measure_fingerprint
    }

    /// Number of coefficients including the mean; matches the closed form.
    pub fn coefficient_count(&self) -> u64 {
        1 + self.coefficients.len() as u64
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&(SubsetId, MultiIndex), &f64)> {
        self.coefficients.iter()
    }

    pub fn coefficient(&self, u: &SubsetId, j: &MultiIndex) -> Option<f64> {
        self.coefficients.get(&(u.clone(), j.clone())).copied()
    }

    pub fn diagnostics(&self) -> &[BlockDiagnostics] {
        &self.diagnostics
    }

    pub fn blocks(&self) -> &[DegreeBlock] {
        &self.blocks
    }

    /// Point evaluation of the truncated expansion; the point is indexed by
    /// global variable id.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, GpddError> {
        let mut acc = self.mean;
        for ((u, j), c) in &self.coefficients {
            if *c == 0.0 {
                continue;
            }
            let psi = self.bases[u].psi(j).expect("stored key has basis entry");
            acc += c * psi.evaluate(x)?;
        }
        Ok(acc)
    }

    /// Variance of the truncated expansion, assembled from the solved degree
    /// blocks. Cross-degree basis pairs are orthogonal, so the bilinear form
    /// splits into one quadratic form per block; the within-block couplings
    /// (which do not vanish under dependence) are all kept.
    pub fn variance(&self) -> f64 {
        let mut acc = 0.0;
        for b in &self.blocks {
            for (i, ci) in b.solution.iter().enumerate() {
                for (j, cj) in b.solution.iter().enumerate() {
                    acc += ci * cj * b.matrix.get(i, j);
                }
            }
        }
        acc
    }

    /// Variance by the full pairwise sum over every stored coefficient pair,
    /// recomputing each basis coupling from the measure. Slow; exists to
    /// cross-check [`GpddExpansion::variance`].
    pub fn variance_full(&self, measure: &Measure) -> Result<f64, GpddError> {
        if measure.fingerprint() != self.measure_fingerprint {
            return Err(GpddError::MeasureMismatch);
        }
        let keys: Vec<_> = self.coefficients.iter().collect();
        let mut acc = 0.0;
        for (ka, ca) in &keys {
            if **ca == 0.0 {
                continue;
            }
            let pa = self.bases[&ka.0].psi(&ka.1).expect("stored");
            for (kb, cb) in &keys {
                if **cb == 0.0 {
                    continue;
                }
                let pb = self.bases[&kb.0].psi(&kb.1).expect("stored");
                acc += **ca * **cb * measure.expect_product(pa, pb)?;
            }
        }
        Ok(acc)
    }

    /// The subset component: the polynomial sum of this subset's terms.
    /// Zero-mean by construction of the basis.
    pub fn component(&self, u: &SubsetId) -> Result<Polynomial<f64>, GpddError> {
        if u.is_empty() || u.cardinality() > self.interaction_order {
            return Err(GpddError::UnknownComponent(u.clone()));
        }
        let basis = self
            .bases
            .get(u)
            .ok_or_else(|| GpddError::UnknownComponent(u.clone()))?;
        let mut acc = Polynomial::zero(u.clone());
        for ((ku, kj), c) in &self.coefficients {
            if ku == u && *c != 0.0 {
                acc = acc.add(&basis.psi(kj).expect("stored").scale(c));
            }
        }
        Ok(acc)
    }

    pub fn to_file(&self, precision: Precision) -> ExpansionFile {
        ExpansionFile {
            kind: "gpdd".into(),
            dimension: self.n,
            truncation: Some(Truncation {
                interaction_order: self.interaction_order,
                polynomial_order: self.polynomial_order,
            }),
            order: None,
            mean: self.mean,
            precision,
            measure_fingerprint: self.measure_fingerprint,
            coefficients: self
                .coefficients
                .iter()
                .map(|((u, j), c)| CoefficientRecord {
                    subset: Some(u.members().to_vec()),
                    index: j.exponents().to_vec(),
                    value: *c,
                })
                .collect(),
            diagnostics: self.diagnostics.clone(),
        }
    }
}

/// Relative variance error of the (s, m) truncation against the exact
/// response variance.
pub fn relative_variance_error(
    y: &Polynomial<f64>,
    cache: &BasisCache,
    s: usize,
    m: u32,
) -> Result<f64, GpddError> {
    let exact = exact_variance(y, cache.measure())?;
    if exact == 0.0 {
        return Err(GpddError::ZeroVariance);
    }
    let approx = expand_with_cache(y, cache, s, m)?.variance();
    Ok((exact - approx).abs() / exact)
}

// ---------------------------------------------------------------------------
// stable on-disk schema, shared with the degree-wise chaos expansion
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Truncation {
    pub interaction_order: usize,
    pub polynomial_order: u32,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CoefficientRecord {
    /// Present for dimension-wise expansions; absent for degree-wise ones.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset: Option<Vec<u32>>,
    pub index: Vec<u32>,
    pub value: f64,
}

/// Serialized expansion: `kind` is `"gpdd"` or `"gpce"`; exactly one of
/// `truncation` / `order` is present accordingly.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExpansionFile {
    pub kind: String,
    pub dimension: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub truncation: Option<Truncation>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub order: Option<u32>,
    pub mean: f64,
    pub precision: Precision,
    pub measure_fingerprint: u64,
    pub coefficients: Vec<CoefficientRecord>,
    #[serde(default)]
    pub diagnostics: Vec<BlockDiagnostics>,
}

impl ExpansionFile {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{dirichlet_3var_half_integer, Marginal};
    use crate::multiindex::count_gpdd_coefficients;
    use crate::orthopoly::build_basis;
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn subset(v: &[u32]) -> SubsetId {
        SubsetId::new(v.to_vec()).unwrap()
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    fn example_response() -> Polynomial<f64> {
        Polynomial::parse(
            "10*x1^6 + 10*x2^6 + 10*x3^6 + 0.1*x1*x2 + 0.1*x1*x3 + 0.1*x2*x3 \
             + 0.001*x1^2*x2^2*x3^2",
            &SubsetId::full(3),
        )
        .unwrap()
    }

    #[test]
    fn mean_examples() {
        let m = dirichlet_3var_half_integer();
        let one = Polynomial::parse("1", &SubsetId::full(3)).unwrap();
        assert_eq!(mean_of(&one, &m).unwrap(), 1.0);
        let x1 = Polynomial::parse("x1", &SubsetId::full(3)).unwrap();
        assert!((mean_of(&x1, &m).unwrap() - 0.25).abs() < 1e-15);
        let y = example_response();
        assert!((mean_of(&y, &m).unwrap() - 0.206_501_274_604_301_95).abs() < 1e-14);
    }

    #[test]
    fn exact_variance_examples() {
        let m = dirichlet_3var_half_integer();
        let x1 = Polynomial::parse("x1", &SubsetId::full(3)).unwrap();
        assert!((exact_variance(&x1, &m).unwrap() - 3.0 / 112.0).abs() < 1e-15);
        let c = Polynomial::parse("5", &SubsetId::full(3)).unwrap();
        assert!(exact_variance(&c, &m).unwrap().abs() < 1e-15);
        let y = example_response();
        assert!((exact_variance(&y, &m).unwrap() - 0.159_963_377_181_437_97).abs() < 1e-13);
    }

    #[test]
    fn rhs_examples() {
        let m = dirichlet_3var_half_integer();
        let b = build_basis(&m, &subset(&[1]), 1, Precision::Extended).unwrap();
        let psi = b.psi(&mi(&[1])).unwrap();
        // constant response projects to zero
        let c = Polynomial::parse("3", &SubsetId::full(3)).unwrap();
        assert!(rhs_entry(&c, psi, &m).unwrap().abs() < 1e-14);
        // the basis member itself projects to one
        assert!((rhs_entry(psi, psi, &m).unwrap() - 1.0).abs() < 1e-12);
        // linear response: |E[x1 psi]| = sqrt(7/3) * 3/28
        let x1 = Polynomial::parse("x1", &SubsetId::full(3)).unwrap();
        let want = (7.0f64 / 3.0).sqrt() * 3.0 / 28.0;
        assert!((rhs_entry(&x1, psi, &m).unwrap().abs() - want).abs() < 1e-14);
    }

    #[test]
    fn gram_entries_match_zero_structure() {
        let m = dirichlet_3var_half_integer();
        let b1 = build_basis(&m, &subset(&[1]), 2, Precision::Extended).unwrap();
        let b2 = build_basis(&m, &subset(&[2]), 2, Precision::Extended).unwrap();
        let p11 = b1.psi(&mi(&[1])).unwrap();
        let p21 = b2.psi(&mi(&[1])).unwrap();
        let p12 = b1.psi(&mi(&[2])).unwrap();
        assert!((gram_entry(p11, p11, &m).unwrap() - 1.0).abs() < 1e-12);
        assert!(gram_entry(p11, p12, &m).unwrap().abs() < 1e-12);
        assert!((gram_entry(p11, p21, &m).unwrap() + 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn block_sizes_match_counts() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        let b = solve_degree_block(1, 1, &y, &m, &cache, 1).unwrap();
        assert_eq!(b.keys.len(), 3);
        let b = solve_degree_block(2, 3, &y, &m, &cache, 2).unwrap();
        assert_eq!(b.keys.len(), 6);
        let b = solve_degree_block(3, 3, &y, &m, &cache, 3).unwrap();
        assert_eq!(b.keys.len(), 10);
        let b = solve_degree_block(3, 2, &y, &m, &cache, 3).unwrap();
        assert_eq!(b.keys.len(), 9);
    }

    #[test]
    fn zero_content_block_gives_zero_coefficients() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let x1 = Polynomial::parse("x1", &SubsetId::full(3)).unwrap();
        let b = solve_degree_block(3, 2, &x1, &m, &cache, 3).unwrap();
        for c in &b.solution {
            assert!(c.abs() < 1e-12);
        }
        // expand records them as explicit zeros without solving
        let e = expand_with_cache(&x1, &cache, 2, 3).unwrap();
        assert!(e.diagnostics()[2].skipped);
        assert_eq!(
            e.coefficient_count(),
            count_gpdd_coefficients(3, 2, 3).unwrap()
        );
    }

    #[test]
    fn basis_member_expands_to_unit_coefficient() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let b = cache.get_at_least(&subset(&[1, 2]), 3).unwrap();
        let psi = b.psi(&mi(&[1, 2])).unwrap().clone();
        let e = expand_with_cache(&psi, &cache, 2, 3).unwrap();
        for ((u, j), c) in e.coefficients() {
            let expect = if *u == subset(&[1, 2]) && *j == mi(&[1, 2]) {
                1.0
            } else {
                0.0
            };
            assert!((c - expect).abs() < 1e-10, "{u:?} {j:?}: {c}");
        }
        assert!(e.mean().abs() < 1e-12);
    }

    #[test]
    fn full_expansion_reproduces_polynomials_pointwise() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let mut rng = StdRng::seed_from_u64(42);
        let sc = SubsetId::full(3);
        for _ in 0..5 {
            let mut y = Polynomial::zero(sc.clone());
            for _ in 0..6 {
                let idx = MultiIndex::new((0..3).map(|_| rng.random_range(0..=2)).collect());
                y = y.add(
                    &Polynomial::monomial(sc.clone(), idx, rng.random_range(-2.0..2.0)).unwrap(),
                );
            }
            let deg = y.degree().unwrap_or(0).max(3);
            let e = expand_with_cache(&y, &cache, 3, deg).unwrap();
            for _ in 0..20 {
                let a: f64 = rng.random_range(0.01..0.90);
                let b: f64 = rng.random_range(0.005..0.98 - a);
                let c: f64 = rng.random_range(0.005..0.99 - a - b);
                let x = [a, b, c];
                let want = y.evaluate(&x).unwrap();
                let got = e.evaluate(&x).unwrap();
                assert!(
                    (want - got).abs() < 1e-8 * (1.0 + want.abs()),
                    "want {want}, got {got}"
                );
            }
        }
    }

    #[test]
    fn parseval_identity_at_full_truncation() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = Polynomial::parse("x1^2*x2 + 0.5*x3 - x1*x3^2 + 2", &SubsetId::full(3)).unwrap();
        let e = expand_with_cache(&y, &cache, 3, 3).unwrap();
        let second_moment = m.expect_product(&y, &y).unwrap();
        let lhs = e.mean() * e.mean() + e.variance();
        assert!(
            (lhs - second_moment).abs() < 1e-10 * (1.0 + second_moment.abs()),
            "{lhs} vs {second_moment}"
        );
    }

    #[test]
    fn variance_block_form_matches_full_pair_sum() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        let e = expand_with_cache(&y, &cache, 2, 4).unwrap();
        let fast = e.variance();
        let full = e.variance_full(&m).unwrap();
        assert!((fast - full).abs() < 1e-10 * (1.0 + full.abs()));
    }

    #[test]
    fn independent_measure_reduces_to_direct_projection() {
        let m = Measure::independent(vec![
            Marginal::Uniform {
                lower: rat(0, 1),
                upper: rat(1, 1),
            },
            Marginal::Gaussian {
                mean: rat(0, 1),
                std_dev: rat(1, 1),
            },
            Marginal::Exponential { rate: rat(1, 1) },
        ])
        .unwrap();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = Polynomial::parse("x1^2*x2 + x3 - 0.5*x1*x2*x3", &SubsetId::full(3)).unwrap();
        let e = expand_with_cache(&y, &cache, 3, 4).unwrap();
        // J blocks are the identity, so solved coefficients equal projections
        for b in e.blocks() {
            for i in 0..b.keys.len() {
                for j in 0..b.keys.len() {
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!(
                        (b.matrix.get(i, j) - expect).abs() < 1e-10,
                        "J not identity at degree {}",
                        b.degree
                    );
                }
            }
            for (i, c) in b.solution.iter().enumerate() {
                assert!((c - b.rhs[i]).abs() < 1e-8);
            }
        }
        // variance reduces to the coefficient square sum
        let sq: f64 = e.coefficients().map(|(_, c)| c * c).sum();
        assert!((e.variance() - sq).abs() < 1e-10);
    }

    #[test]
    fn component_means_vanish_and_components_sum_to_value() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        let e = expand_with_cache(&y, &cache, 2, 4).unwrap();
        let x = [0.2, 0.3, 0.1];
        let mut acc = e.mean();
        for u in enumerate_subsets(3, 2).unwrap() {
            let comp = e.component(&u).unwrap();
            assert!(
                m.expect_polynomial(&comp).unwrap().abs() < 1e-10,
                "component {u:?} mean"
            );
            acc += comp.evaluate(&x).unwrap();
        }
        assert!((acc - e.evaluate(&x).unwrap()).abs() < 1e-10);
        assert!(e.component(&subset(&[1, 2, 3])).is_err());
    }

    #[test]
    fn blocks_solve_independently_of_order() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        let forward: Vec<DegreeBlock> = (1..=4)
            .map(|l| solve_degree_block(l, 2, &y, &m, &cache, 4).unwrap())
            .collect();
        let backward: Vec<DegreeBlock> = (1..=4)
            .rev()
            .map(|l| solve_degree_block(l, 2, &y, &m, &cache, 4).unwrap())
            .collect();
        for (f, b) in forward.iter().zip(backward.iter().rev()) {
            assert_eq!(f.degree, b.degree);
            for (x, y) in f.solution.iter().zip(&b.solution) {
                assert_eq!(x, y, "block {} differs across solve order", f.degree);
            }
        }
    }

    #[test]
    fn truncation_validation() {
        let m = dirichlet_3var_half_integer();
        let y = example_response();
        assert!(matches!(
            expand(&y, &m, 0, 3, Precision::Extended),
            Err(GpddError::InteractionOrder { .. })
        ));
        assert!(matches!(
            expand(&y, &m, 4, 5, Precision::Extended),
            Err(GpddError::InteractionOrder { .. })
        ));
        assert!(matches!(
            expand(&y, &m, 2, 1, Precision::Extended),
            Err(GpddError::PolynomialOrder { .. })
        ));
        let c = Polynomial::parse("2", &SubsetId::full(3)).unwrap();
        let cache = BasisCache::new(m, Precision::Extended);
        assert!(matches!(
            relative_variance_error(&c, &cache, 1, 1),
            Err(GpddError::ZeroVariance)
        ));
    }

    #[test]
    fn expansion_file_roundtrip() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        let e = expand_with_cache(&y, &cache, 1, 2).unwrap();
        let f = e.to_file(Precision::Extended);
        let json = f.to_json();
        let back = ExpansionFile::from_json(&json).unwrap();
        assert_eq!(back.kind, "gpdd");
        assert_eq!(back.coefficients, f.coefficients);
        assert_eq!(back.truncation, f.truncation);
        assert_eq!(back.mean, f.mean);
    }

    #[test]
    fn stored_keys_match_count_formula() {
        let m = dirichlet_3var_half_integer();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        let y = example_response();
        for (s, mm) in [(1usize, 5u32), (2, 5), (3, 4)] {
            let e = expand_with_cache(&y, &cache, s, mm).unwrap();
            assert_eq!(
                e.coefficient_count(),
                count_gpdd_coefficients(3, s, mm).unwrap(),
                "S={s} m={mm}"
            );
        }
    }
}
