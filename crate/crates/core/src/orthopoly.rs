//! Measure-consistent orthogonal polynomial families per variable subset.
//!
//! For a subset u and an interior multi-index j (all components >= 1) of
//! degree l, the basis polynomial is pinned by biorthogonality to monomials:
//! it is the unique degree-l polynomial P with E[P(X_u) * X_u^k] = delta_{kj}
//! for every multi-index k of degree <= l. Equivalently, P is orthogonal to
//! all lower-degree polynomials and to every same-degree monomial except its
//! own. This is the family classical Rodrigues-type formulas produce on the
//! simplex, and it places the interior polynomials in exactly the subspace
//! that excludes lower-dimensional content, so their zero means, nested-subset
//! orthogonality, and coordinate-wise annihilation all follow.
//!
//! Note the family is *not* orthonormalized within one (subset, degree) block:
//! distinct interior indices of equal degree keep a non-trivial Gram coupling,
//! which the degree-block solves downstream absorb. Cross-degree pairs are
//! orthogonal by construction.
//!
//! Construction solves the moment Gram system over all monomials of degree
//! <= l. The solve runs on exact rationals when the measure can supply exact
//! moments ([`Precision::Extended`]) or on f64 ([`Precision::Double`]);
//! moment matrices of monomials are Hilbert-like, so the double path enforces
//! a condition ceiling and refuses to fabricate coefficients beyond it.

use crate::linalg::{condition_estimate, FactorError, Ldlt, SymMatrix};
use crate::measure::{Measure, MeasureError};
use crate::multiindex::{enumerate_full_degree, enumerate_interior_degree, MultiIndex, SubsetId};
use crate::polynomial::Polynomial;
use dashmap::DashMap;
use num_rational::BigRational;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::sync::Arc;

/// Numeric path for basis construction and downstream solves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum Precision {
    /// Plain f64 arithmetic end to end.
    Double,
    /// Exact rational construction; results rounded to f64 at the boundary.
    Extended,
}

/// Condition ceiling for the f64 construction path.
pub const DOUBLE_PATH_CONDITION_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, thiserror::Error)]
pub enum OrthoError {
    #[error(
        "moment matrix numerically singular at degree {degree} for subset {subset:?} \
         (condition {condition:.3e} exceeds {limit:.0e})"
    )]
    SingularGram {
        subset: SubsetId,
        degree: u32,
        condition: f64,
        limit: f64,
    },
    #[error("moment matrix exactly singular at degree {degree} for subset {subset:?}")]
    ExactlySingular { subset: SubsetId, degree: u32 },
    #[error("basis was built against a different measure")]
    MeasureMismatch,
    #[error("index {0:?} is not stored in this basis")]
    UnknownIndex(MultiIndex),
    #[error("variable x{var} is not a member of subset {subset:?}")]
    VarNotInSubset { var: u32, subset: SubsetId },
    #[error("subset must be non-empty")]
    EmptySubset,
    #[error(transparent)]
    Measure(#[from] MeasureError),
}

/// One basis member: the raw biorthogonal polynomial and its standardized,
/// sign-normalized version `psi = +-raw / sqrt(norm_sq)`.
#[derive(Debug, Clone)]
pub struct BasisEntry {
    pub raw: Polynomial<f64>,
    pub psi: Polynomial<f64>,
    pub norm_sq: f64,
    pub exact: Option<ExactEntry>,
}

/// Exact-path artifacts kept for bit-exact verification.
#[derive(Debug, Clone)]
pub struct ExactEntry {
    pub raw: Polynomial<BigRational>,
    pub norm_sq: BigRational,
}

/// Per-degree construction metadata: the monomial/basis cross Gram over the
/// interior block (diagonal for an exact build) and a condition estimate of
/// the moment matrix the solves went through.
#[derive(Debug, Clone)]
pub struct GramRecord {
    pub degree: u32,
    /// Number of degree-`degree` multi-indices over the subset.
    pub full_dim: usize,
    /// Number of interior indices constructed at this degree.
    pub interior_dim: usize,
    /// Size of the moment matrix solved (all monomials of degree <= `degree`).
    pub solve_dim: usize,
    pub condition: f64,
    /// E[x^j psi_k] over interior (j, k), row-major `interior_dim` square.
    pub cross_gram: Vec<f64>,
}

/// Orthogonal family for one subset up to a maximum total degree.
#[derive(Debug, Clone)]
pub struct OrthoBasis {
    subset: SubsetId,
    max_degree: u32,
    measure_fingerprint: u64,
    precision: Precision,
    entries: BTreeMap<MultiIndex, BasisEntry>,
    records: Vec<GramRecord>,
}

impl OrthoBasis {
    pub fn subset(&self) -> &SubsetId {
        &self.subset
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn measure_fingerprint(&self) -> u64 {
        self.measure_fingerprint
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entry(&self, j: &MultiIndex) -> Option<&BasisEntry> {
        self.entries.get(j)
    }

    pub fn psi(&self, j: &MultiIndex) -> Option<&Polynomial<f64>> {
        self.entries.get(j).map(|e| &e.psi)
    }

    /// Interior indices in the documented order: degree ascending, descending
    /// lexicographic within a degree.
    pub fn indices(&self) -> Vec<MultiIndex> {
        let dim = self.subset.cardinality();
        let mut out = Vec::with_capacity(self.entries.len());
        for l in dim as u32..=self.max_degree {
            for j in enumerate_interior_degree(dim, l) {
                if self.entries.contains_key(&j) {
                    out.push(j);
                }
            }
        }
        out
    }

    pub fn records(&self) -> &[GramRecord] {
        &self.records
    }

    /// Max deviation of E[psi_a psi_b] from the identity over stored pairs of
    /// *different* degrees plus the diagonal. Within-degree off-diagonal
    /// couplings are part of the design and not measured here.
    pub fn cross_degree_residual(&self, measure: &Measure) -> Result<f64, OrthoError> {
        if measure.fingerprint() != self.measure_fingerprint {
            return Err(OrthoError::MeasureMismatch);
        }
        let idx = self.indices();
        let mut worst: f64 = 0.0;
        for (a, ja) in idx.iter().enumerate() {
            for jb in idx.iter().skip(a) {
                let same = ja == jb;
                if !same && ja.degree() == jb.degree() {
                    continue;
                }
                let pa = &self.entries[ja].psi;
                let pb = &self.entries[jb].psi;
                let v = measure.expect_product(pa, pb)?;
                let target = if same { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok(worst)
    }

    /// Residual of the coordinate-wise annihilation property: the largest
    /// |E[psi_j(X_u) * q(X_w)]| over monomials q on w = u \ {var} of degree
    /// at most `probe_degree`, together with the plain mean.
    pub fn annihilation_residual(
        &self,
        measure: &Measure,
        j: &MultiIndex,
        var: u32,
        probe_degree: u32,
    ) -> Result<f64, OrthoError> {
        if measure.fingerprint() != self.measure_fingerprint {
            return Err(OrthoError::MeasureMismatch);
        }
        if !self.subset.contains(var) {
            return Err(OrthoError::VarNotInSubset {
                var,
                subset: self.subset.clone(),
            });
        }
        let entry = self
            .entries
            .get(j)
            .ok_or_else(|| OrthoError::UnknownIndex(j.clone()))?;
        let rest: Vec<u32> = self
            .subset
            .members()
            .iter()
            .copied()
            .filter(|&v| v != var)
            .collect();
        let mut worst: f64 = measure.expect_polynomial(&entry.psi)?.abs();
        if rest.is_empty() {
            return Ok(worst);
        }
        let rest_scope = SubsetId::new(rest).expect("sorted members");
        for deg in 1..=probe_degree {
            for q in enumerate_full_degree(rest_scope.cardinality(), deg) {
                let mono = Polynomial::monomial(rest_scope.clone(), q, 1.0).expect("arity matches");
                let v = measure.expect_product(&entry.psi, &mono)?;
                worst = worst.max(v.abs());
            }
        }
        Ok(worst)
    }
}

/// Monomials of total degree <= max over `dim` variables, degree ascending,
/// descending lex within a degree. Construction and the chaos expansion both
/// orthogonalize against exactly this stream.
pub(crate) fn graded_monomials(dim: usize, max_degree: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for l in 0..=max_degree {
        out.extend(enumerate_full_degree(dim, l));
    }
    out
}

pub(crate) fn moment_gram_exact(
    measure: &Measure,
    scope: &SubsetId,
    monos: &[MultiIndex],
) -> Result<SymMatrix<BigRational>, MeasureError> {
    let mut err = None;
    let g = SymMatrix::from_fn(monos.len(), |i, j| {
        let sum = MultiIndex::new(
            monos[i]
                .exponents()
                .iter()
                .zip(monos[j].exponents())
                .map(|(a, b)| a + b)
                .collect(),
        );
        match measure.scope_moment_exact(scope, &sum) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                BigRational::from_integer(0.into())
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(g),
    }
}

pub(crate) fn moment_gram_f64(
    measure: &Measure,
    scope: &SubsetId,
    monos: &[MultiIndex],
) -> Result<SymMatrix<f64>, MeasureError> {
    let mut err = None;
    let g = SymMatrix::from_fn(monos.len(), |i, j| {
        let sum = MultiIndex::new(
            monos[i]
                .exponents()
                .iter()
                .zip(monos[j].exponents())
                .map(|(a, b)| a + b)
                .collect(),
        );
        match measure.scope_moment(scope, &sum) {
            Ok(v) => v,
            Err(e) => {
                err.get_or_insert(e);
                0.0
            }
        }
    });
    match err {
        Some(e) => Err(e),
        None => Ok(g),
    }
}

/// Number of monomials of degree <= l over dim variables.
fn block_len(dim: usize, l: u32) -> usize {
    crate::multiindex::binomial(dim as u64 + l as u64, dim as u64) as usize
}

/// Build the orthogonal family for `subset` up to `max_degree`.
///
/// Degrees below the subset cardinality have no interior indices, so a
/// `max_degree` below it yields an empty (but valid) basis.
pub fn build_basis(
    measure: &Measure,
    subset: &SubsetId,
    max_degree: u32,
    precision: Precision,
) -> Result<OrthoBasis, OrthoError> {
    if subset.is_empty() {
        return Err(OrthoError::EmptySubset);
    }
    let dim = subset.cardinality();
    let mut basis = OrthoBasis {
        subset: subset.clone(),
        max_degree,
        measure_fingerprint: measure.fingerprint(),
        precision,
        entries: BTreeMap::new(),
        records: Vec::new(),
    };
    if max_degree < dim as u32 {
        return Ok(basis);
    }
    let monos = graded_monomials(dim, max_degree);
    let gram_f64 = moment_gram_f64(measure, subset, &monos)?;

    match precision {
        Precision::Extended => {
            let gram = moment_gram_exact(measure, subset, &monos)?;
            let factor = Ldlt::factor(&gram).map_err(|e| singular_err(subset, &monos, e))?;
            for l in dim as u32..=max_degree {
                let solve_dim = block_len(dim, l);
                let sub = SymMatrix::from_fn(solve_dim, |i, j| *gram_f64.get(i, j));
                let condition = condition_estimate(&sub);
                build_degree_exact(subset, &monos, &factor, l, &mut basis)?;
                let record = finish_record(measure, subset, l, solve_dim, condition, &basis)?;
                basis.records.push(record);
            }
        }
        Precision::Double => {
            let factor = Ldlt::factor(&gram_f64).map_err(|e| singular_err(subset, &monos, e))?;
            for l in dim as u32..=max_degree {
                let solve_dim = block_len(dim, l);
                let sub = SymMatrix::from_fn(solve_dim, |i, j| *gram_f64.get(i, j));
                let condition = condition_estimate(&sub);
                if condition > DOUBLE_PATH_CONDITION_LIMIT {
                    return Err(OrthoError::SingularGram {
                        subset: subset.clone(),
                        degree: l,
                        condition,
                        limit: DOUBLE_PATH_CONDITION_LIMIT,
                    });
                }
                build_degree_f64(subset, &monos, &factor, l, &mut basis)?;
                let record = finish_record(measure, subset, l, solve_dim, condition, &basis)?;
                basis.records.push(record);
            }
        }
    }
    Ok(basis)
}

fn singular_err(subset: &SubsetId, monos: &[MultiIndex], e: FactorError) -> OrthoError {
    let FactorError::NonPositivePivot { pivot_index } = e;
    OrthoError::ExactlySingular {
        subset: subset.clone(),
        degree: monos[pivot_index].degree(),
    }
}

fn build_degree_exact(
    subset: &SubsetId,
    monos: &[MultiIndex],
    factor: &Ldlt<BigRational>,
    l: u32,
    basis: &mut OrthoBasis,
) -> Result<(), OrthoError> {
    let dim = subset.cardinality();
    let solve_dim = block_len(dim, l);
    let zero = BigRational::from_integer(0.into());
    let one = BigRational::from_integer(1.into());
    for j in enumerate_interior_degree(dim, l) {
        let pos = monos[..solve_dim]
            .iter()
            .position(|m| *m == j)
            .expect("interior index within degree range");
        let mut rhs = vec![zero.clone(); solve_dim];
        rhs[pos] = one.clone();
        let coeffs = factor.solve_leading(solve_dim, &rhs);
        let norm_sq = coeffs[pos].clone();
        if !num_traits::Signed::is_positive(&norm_sq) {
            return Err(OrthoError::ExactlySingular {
                subset: subset.clone(),
                degree: l,
            });
        }
        let raw_exact = Polynomial::from_terms(
            subset.clone(),
            monos[..solve_dim]
                .iter()
                .cloned()
                .zip(coeffs.iter().cloned()),
        )
        .expect("arity matches scope");
        let raw = raw_exact.to_f64();
        let norm_sq_f = norm_sq.to_f64().expect("norm in f64 range");
        let psi = standardized(&raw, norm_sq_f);
        basis.entries.insert(
            j,
            BasisEntry {
                raw,
                psi,
                norm_sq: norm_sq_f,
                exact: Some(ExactEntry {
                    raw: raw_exact,
                    norm_sq,
                }),
            },
        );
    }
    Ok(())
}

fn build_degree_f64(
    subset: &SubsetId,
    monos: &[MultiIndex],
    factor: &Ldlt<f64>,
    l: u32,
    basis: &mut OrthoBasis,
) -> Result<(), OrthoError> {
    let dim = subset.cardinality();
    let solve_dim = block_len(dim, l);
    for j in enumerate_interior_degree(dim, l) {
        let pos = monos[..solve_dim]
            .iter()
            .position(|m| *m == j)
            .expect("interior index within degree range");
        let mut rhs = vec![0.0; solve_dim];
        rhs[pos] = 1.0;
        let coeffs = factor.solve_leading(solve_dim, &rhs);
        let norm_sq = coeffs[pos];
        if norm_sq.is_nan() || norm_sq <= 0.0 {
            return Err(OrthoError::ExactlySingular {
                subset: subset.clone(),
                degree: l,
            });
        }
        let raw = Polynomial::from_terms(
            subset.clone(),
            monos[..solve_dim]
                .iter()
                .cloned()
                .zip(coeffs.iter().copied()),
        )
        .expect("arity matches scope");
        let psi = standardized(&raw, norm_sq);
        basis.entries.insert(
            j,
            BasisEntry {
                raw,
                psi,
                norm_sq,
                exact: None,
            },
        );
    }
    Ok(())
}

fn finish_record(
    measure: &Measure,
    subset: &SubsetId,
    l: u32,
    solve_dim: usize,
    condition: f64,
    basis: &OrthoBasis,
) -> Result<GramRecord, OrthoError> {
    let dim = subset.cardinality();
    let interior = enumerate_interior_degree(dim, l);
    let m = interior.len();
    let mut cross = vec![0.0; m * m];
    for (r, k) in interior.iter().enumerate() {
        let mono = Polynomial::monomial(subset.clone(), k.clone(), 1.0).expect("arity");
        for (c, j) in interior.iter().enumerate() {
            let psi = &basis.entries[j].psi;
            cross[r * m + c] = measure.expect_product(&mono, psi)?;
        }
    }
    Ok(GramRecord {
        degree: l,
        full_dim: enumerate_full_degree(dim, l).len(),
        interior_dim: m,
        solve_dim,
        condition,
        cross_gram: cross,
    })
}

/// Scale to unit second moment and make the graded-lex-leading coefficient
/// positive.
fn standardized(raw: &Polynomial<f64>, norm_sq: f64) -> Polynomial<f64> {
    let mut scale = 1.0 / norm_sq.sqrt();
    if let Some((_, c)) = raw.terms().max_by(|a, b| a.0.cmp(b.0)) {
        if *c * scale < 0.0 {
            scale = -scale;
        }
    }
    raw.scale(&scale)
}

/// Matrix of E[psi_a psi_b] for all stored pairs of two bases built from the
/// same parent measure; rows follow `a.indices()`, columns `b.indices()`.
pub fn second_moment_matrix(
    a: &OrthoBasis,
    b: &OrthoBasis,
    measure: &Measure,
) -> Result<Vec<Vec<f64>>, OrthoError> {
    if a.measure_fingerprint != measure.fingerprint()
        || b.measure_fingerprint != measure.fingerprint()
    {
        return Err(OrthoError::MeasureMismatch);
    }
    let rows = a.indices();
    let cols = b.indices();
    let mut out = vec![vec![0.0; cols.len()]; rows.len()];
    for (r, ja) in rows.iter().enumerate() {
        let pa = &a.entries[ja].psi;
        for (c, jb) in cols.iter().enumerate() {
            let pb = &b.entries[jb].psi;
            out[r][c] = measure.expect_product(pa, pb)?;
        }
    }
    Ok(out)
}

/// Builds and memoizes bases per (subset, max_degree) for one measure.
pub struct BasisCache {
    measure: Measure,
    precision: Precision,
    map: DashMap<(SubsetId, u32), Arc<OrthoBasis>>,
}

impl BasisCache {
    pub fn new(measure: Measure, precision: Precision) -> Self {
        BasisCache {
            measure,
            precision,
            map: DashMap::new(),
        }
    }

    pub fn measure(&self) -> &Measure {
        &self.measure
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    pub fn get(&self, subset: &SubsetId, max_degree: u32) -> Result<Arc<OrthoBasis>, OrthoError> {
        let key = (subset.clone(), max_degree);
        if let Some(hit) = self.map.get(&key) {
            return Ok(hit.clone());
        }
        let built = Arc::new(build_basis(
            &self.measure,
            subset,
            max_degree,
            self.precision,
        )?);
        Ok(self.map.entry(key).or_insert(built).clone())
    }

    /// Any cached basis for `subset` that already covers `max_degree`, else a
    /// fresh build at exactly `max_degree`.
    pub fn get_at_least(
        &self,
        subset: &SubsetId,
        max_degree: u32,
    ) -> Result<Arc<OrthoBasis>, OrthoError> {
        for entry in self.map.iter() {
            if entry.key().0 == *subset && entry.key().1 >= max_degree {
                return Ok(entry.value().clone());
            }
        }
        self.get(subset, max_degree)
    }
}
