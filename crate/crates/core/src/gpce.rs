//! Degree-wise chaos expansion over the full variable vector.
//!
//! The basis here is orthonormalized across *all* monomials of the full
//! scope, in the same graded stream order the subset families use: the k-th
//! member is the k-th monomial orthogonalized against every earlier one and
//! scaled to unit norm (triangular orthonormalization through the LDL^T of
//! the moment Gram, which coincides with modified Gram-Schmidt in exact
//! arithmetic). Because the family is orthonormal, expansion coefficients are
//! plain projections E[y psi_j] and the approximation variance is the square
//! sum of the non-constant coefficients.

use crate::gpdd::{CoefficientRecord, ExpansionFile};
use crate::linalg::{condition_estimate, Ldlt, SymMatrix};
use crate::measure::{Measure, MeasureError};
use crate::multiindex::MultiIndex;
use crate::orthopoly::{
    graded_monomials, moment_gram_exact, moment_gram_f64, OrthoError, Precision,
    DOUBLE_PATH_CONDITION_LIMIT,
};
use crate::polynomial::{PolyError, Polynomial};
use crate::SubsetId;
use num_traits::ToPrimitive;
use std::collections::BTreeMap;
use std::sync::Arc;

#[derive(Debug, Clone, thiserror::Error)]
pub enum GpceError {
    #[error("response uses variable x{var} outside the measure dimension {n}")]
    ResponseOutOfScope { var: u32, n: usize },
    #[error("expansion was built against a different measure")]
    MeasureMismatch,
    #[error("response variance is zero; relative error is undefined")]
    ZeroVariance,
    #[error(transparent)]
    Ortho(#[from] OrthoError),
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Poly(#[from] PolyError),
}

/// Orthonormal polynomial family over the full variable vector up to a total
/// degree; members are keyed by the monomial index they orthogonalize.
#[derive(Debug, Clone)]
pub struct GpceBasis {
    n: usize,
    order: u32,
    measure_fingerprint: u64,
    precision: Precision,
    members: Vec<(MultiIndex, Polynomial<f64>)>,
}

impl GpceBasis {
    pub fn dimension(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn measure_fingerprint(&self) -> u64 {
        self.measure_fingerprint
    }

    pub fn precision(&self) -> Precision {
        self.precision
    }

    /// Members in stream order (degree ascending, lex descending within).
    pub fn members(&self) -> impl Iterator<Item = (&MultiIndex, &Polynomial<f64>)> {
        self.members.iter().map(|(j, p)| (j, p))
    }

    pub fn psi(&self, j: &MultiIndex) -> Option<&Polynomial<f64>> {
        self.members.iter().find(|(k, _)| k == j).map(|(_, p)| p)
    }

    /// Largest |E[psi_a psi_b] - delta_ab| over all stored pairs.
    pub fn orthonormality_residual(&self, measure: &Measure) -> Result<f64, GpceError> {
        if measure.fingerprint() != self.measure_fingerprint {
            return Err(GpceError::MeasureMismatch);
        }
        let mut worst: f64 = 0.0;
        for (a, (_, pa)) in self.members.iter().enumerate() {
            for (b, (_, pb)) in self.members.iter().enumerate().skip(a) {
                let v = measure.expect_product(pa, pb)?;
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((v - target).abs());
            }
        }
        Ok(worst)
    }
}

/// Orthonormalize the full monomial stream up to total degree `p`.
pub fn build_full_basis(
    measure: &Measure,
    p: u32,
    precision: Precision,
) -> Result<GpceBasis, GpceError> {
    let n = measure.dimension();
    let scope = SubsetId::full(n);
    let monos = graded_monomials(n, p);
    let members = match precision {
        Precision::Extended => {
            let gram = moment_gram_exact(measure, &scope, &monos)?;
            let factor = Ldlt::factor(&gram).map_err(|e| {
                let crate::linalg::FactorError::NonPositivePivot { pivot_index } = e;
                OrthoError::ExactlySingular {
                    subset: scope.clone(),
                    degree: monos[pivot_index].degree(),
                }
            })?;
            let mut members = Vec::with_capacity(monos.len());
            for k in 0..monos.len() {
                let row = factor.inverse_lower_row(k);
                let scale = factor.diag()[k]
                    .to_f64()
                    .expect("pivot in f64 range")
                    .sqrt()
                    .recip();
                let poly = Polynomial::from_terms(
                    scope.clone(),
                    monos[..=k]
                        .iter()
                        .cloned()
                        .zip(row.iter().map(|c| c.to_f64().expect("coefficient") * scale)),
                )
                .expect("arity matches");
                members.push((monos[k].clone(), poly));
            }
            members
        }
        Precision::Double => {
            let gram = moment_gram_f64(measure, &scope, &monos)?;
            // per-degree condition gate, mirroring the subset construction
            for l in 1..=p {
                let dim = crate::multiindex::binomial(n as u64 + l as u64, n as u64) as usize;
                let sub = SymMatrix::from_fn(dim, |i, j| *gram.get(i, j));
                let condition = condition_estimate(&sub);
                if condition > DOUBLE_PATH_CONDITION_LIMIT {
                    return Err(GpceError::Ortho(OrthoError::SingularGram {
                        subset: scope.clone(),
                        degree: l,
                        condition,
                        limit: DOUBLE_PATH_CONDITION_LIMIT,
                    }));
                }
            }
            let factor = Ldlt::factor(&gram).map_err(|e| {
                let crate::linalg::FactorError::NonPositivePivot { pivot_index } = e;
                OrthoError::ExactlySingular {
                    subset: scope.clone(),
                    degree: monos[pivot_index].degree(),
                }
            })?;
            let mut members = Vec::with_capacity(monos.len());
            for k in 0..monos.len() {
                let row = factor.inverse_lower_row(k);
                let scale = factor.diag()[k].sqrt().recip();
                let poly = Polynomial::from_terms(
                    scope.clone(),
                    monos[..=k]
                        .iter()
                        .cloned()
                        .zip(row.iter().map(|c| c * scale)),
                )
                .expect("arity matches");
                members.push((monos[k].clone(), poly));
            }
            members
        }
    };
    Ok(GpceBasis {
        n,
        order: p,
        measure_fingerprint: measure.fingerprint(),
        precision,
        members,
    })
}

/// Degree-wise expansion of a response: projections onto an orthonormal
/// family, no linear system involved.
#[derive(Debug, Clone)]
pub struct GpceExpansion {
    order: u32,
    coefficients: BTreeMap<MultiIndex, f64>,
    basis: Arc<GpceBasis>,
}

pub fn gpce_expand(
    y: &Polynomial<f64>,
    measure: &Measure,
    p: u32,
    precision: Precision,
) -> Result<GpceExpansion, GpceError> {
    let basis = Arc::new(build_full_basis(measure, p, precision)?);
    gpce_expand_with_basis(y, measure, basis)
}

pub fn gpce_expand_with_basis(
    y: &Polynomial<f64>,
    measure: &Measure,
    basis: Arc<GpceBasis>,
) -> Result<GpceExpansion, GpceError> {
    if basis.measure_fingerprint != measure.fingerprint() {
        return Err(GpceError::MeasureMismatch);
    }
    if y.scope().max_member() as usize > basis.n {
        return Err(GpceError::ResponseOutOfScope {
            var: y.scope().max_member(),
            n: basis.n,
        });
    }
    let mut coefficients = BTreeMap::new();
    for (j, psi) in basis.members() {
        coefficients.insert(j.clone(), measure.expect_product(y, psi)?);
    }
    Ok(GpceExpansion {
        order: basis.order,
        coefficients,
        basis,
    })
}

impl GpceExpansion {
    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn coefficient_count(&self) -> u64 {
        self.coefficients.len() as u64
    }

    pub fn coefficients(&self) -> impl Iterator<Item = (&MultiIndex, &f64)> {
        self.coefficients.iter()
    }

    pub fn coefficient(&self, j: &MultiIndex) -> Option<f64> {
        self.coefficients.get(j).copied()
    }

    /// The constant coefficient, equal to the response mean.
    pub fn mean(&self) -> f64 {
        self.coefficients
            .get(&MultiIndex::zeros(self.basis.n))
            .copied()
            .unwrap_or(0.0)
    }

    /// Orthonormality makes the approximation variance the square sum of all
    /// non-constant coefficients.
    pub fn variance(&self) -> f64 {
        self.coefficients
            .iter()
            .filter(|(j, _)| j.degree() > 0)
            .map(|(_, c)| c * c)
            .sum()
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64, GpceError> {
        let mut acc = 0.0;
        for (j, psi) in self.basis.members() {
            let c = self.coefficients[j];
            if c != 0.0 {
                acc += c * psi.evaluate(x)?;
            }
        }
        Ok(acc)
    }

    pub fn to_file(&self) -> ExpansionFile {
        ExpansionFile {
            kind: "gpce".into(),
            dimension: self.basis.n,
            truncation: None,
            order: Some(self.order),
            mean: self.mean(),
            precision: self.basis.precision,
            measure_fingerprint: self.basis.measure_fingerprint,
            coefficients: self
                .coefficients
                .iter()
                .map(|(j, c)| CoefficientRecord {
                    subset: None,
                    index: j.exponents().to_vec(),
                    value: *c,
                })
                .collect(),
            diagnostics: Vec::new(),
        }
    }
}

/// Relative variance error of the order-p expansion against the exact
/// response variance.
pub fn gpce_relative_error(
    y: &Polynomial<f64>,
    measure: &Measure,
    p: u32,
    precision: Precision,
) -> Result<f64, GpceError> {
    let mean = measure.expect_polynomial(y)?;
    let exact = measure.expect_product(y, y)? - mean * mean;
    if exact == 0.0 {
        return Err(GpceError::ZeroVariance);
    }
    let e = gpce_expand(y, measure, p, precision)?;
    Ok((exact - e.variance()).abs() / exact)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpdd;
    use crate::measure::{dirichlet_3var_half_integer, Marginal};
    use crate::multiindex::count_gpce_coefficients;
    use crate::orthopoly::BasisCache;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn constant_member_and_counts() {
        let m = dirichlet_3var_half_integer();
        let b = build_full_basis(&m, 3, Precision::Extended).unwrap();
        assert_eq!(b.len() as u64, count_gpce_coefficients(3, 3));
        let one = b.psi(&mi(&[0, 0, 0])).unwrap();
        assert_eq!(one.num_terms(), 1);
        assert!((one.coeff(&mi(&[0, 0, 0])).unwrap() - 1.0).abs() < 1e-15);
        // degree-1 block spans three polynomials
        assert_eq!(b.members().filter(|(j, _)| j.degree() == 1).count(), 3);
    }

    #[test]
    fn family_is_orthonormal() {
        let m = dirichlet_3var_half_integer();
        for prec in [Precision::Extended, Precision::Double] {
            let b = build_full_basis(&m, 4, prec).unwrap();
            assert!(
                b.orthonormality_residual(&m).unwrap() < 1e-8,
                "precision {prec:?}"
            );
        }
    }

    #[test]
    fn independent_gaussians_give_tensor_hermite() {
        let g = Marginal::Gaussian {
            mean: rat(0, 1),
            std_dev: rat(1, 1),
        };
        let m = Measure::independent(vec![g.clone(), g]).unwrap();
        let b = build_full_basis(&m, 3, Precision::Extended).unwrap();
        // orthonormal Hermite: h0 = 1, h1 = x, h2 = (x^2-1)/sqrt(2),
        // h3 = (x^3-3x)/sqrt(6); tensor products must appear verbatim
        let h = |k: u32, v: u32| -> Polynomial<f64> {
            let sc = SubsetId::new(vec![v]).unwrap();
            let s2 = 2.0f64.sqrt();
            let s6 = 6.0f64.sqrt();
            let txt = match k {
                0 => "1".to_string(),
                1 => format!("x{v}"),
                2 => format!("{}*x{v}^2 - {}", 1.0 / s2, 1.0 / s2),
                _ => format!("{}*x{v}^3 - {}*x{v}", 1.0 / s6, 3.0 / s6),
            };
            Polynomial::parse(&txt, &sc).unwrap()
        };
        for (j, psi) in b.members() {
            let t = h(j.exponents()[0], 1).mul(&h(j.exponents()[1], 2));
            let resid = psi
                .sub(&t)
                .terms()
                .map(|(_, c)| c.abs())
                .fold(0.0f64, f64::max);
            assert!(resid < 1e-10, "{j:?}: {resid}");
        }
    }

    #[test]
    fn basis_member_projects_to_unit_vector() {
        let m = dirichlet_3var_half_integer();
        let basis = Arc::new(build_full_basis(&m, 3, Precision::Extended).unwrap());
        let target = basis.psi(&mi(&[1, 1, 0])).unwrap().clone();
        let e = gpce_expand_with_basis(&target, &m, basis).unwrap();
        for (j, c) in e.coefficients() {
            let expect = if *j == mi(&[1, 1, 0]) { 1.0 } else { 0.0 };
            assert!((c - expect).abs() < 1e-10, "{j:?}: {c}");
        }
    }

    #[test]
    fn low_degree_responses_reconstruct_pointwise() {
        let m = dirichlet_3var_half_integer();
        let y = Polynomial::parse("2*x1^2 - x2*x3 + 0.25*x3 - 1", &SubsetId::full(3)).unwrap();
        let e = gpce_expand(&y, &m, 3, Precision::Extended).unwrap();
        assert!((e.mean() - m.expect_polynomial(&y).unwrap()).abs() < 1e-12);
        for x in [[0.2, 0.3, 0.1], [0.05, 0.6, 0.3], [0.4, 0.1, 0.2]] {
            let want = y.evaluate(&x).unwrap();
            let got = e.evaluate(&x).unwrap();
            assert!((want - got).abs() < 1e-9, "want {want} got {got}");
        }
    }

    #[test]
    fn variance_matches_full_interaction_expansion() {
        // at full interaction order the dimension-wise and degree-wise
        // expansions project onto the same space
        let m = dirichlet_3var_half_integer();
        let y = Polynomial::parse("x1^3 + 0.5*x1*x2 - 2*x3^2 + x2", &SubsetId::full(3)).unwrap();
        let cache = BasisCache::new(m.clone(), Precision::Extended);
        for p in [3u32, 4] {
            let chaos = gpce_expand(&y, &m, p, Precision::Extended).unwrap();
            let dimwise = gpdd::expand_with_cache(&y, &cache, 3, p).unwrap();
            let a = chaos.variance();
            let b = dimwise.variance();
            assert!((a - b).abs() < 1e-9 * (1.0 + b.abs()), "p={p}: {a} vs {b}");
        }
    }

    #[test]
    fn zero_variance_rejected() {
        let m = dirichlet_3var_half_integer();
        let c = Polynomial::parse("4", &SubsetId::full(3)).unwrap();
        assert!(matches!(
            gpce_relative_error(&c, &m, 2, Precision::Extended),
            Err(GpceError::ZeroVariance)
        ));
    }

    #[test]
    fn file_has_kind_tag() {
        let m = dirichlet_3var_half_integer();
        let y = Polynomial::parse("x1", &SubsetId::full(3)).unwrap();
        let e = gpce_expand(&y, &m, 2, Precision::Extended).unwrap();
        let f = e.to_file();
        assert_eq!(f.kind, "gpce");
        assert_eq!(f.order, Some(2));
        assert!(f.truncation.is_none());
        let json = f.to_json();
        let back = ExpansionFile::from_json(&json).unwrap();
        assert_eq!(back.coefficients, f.coefficients);
    }
}
