//! Independent verification engines: exact Dirichlet moments by the
//! Gamma-ratio closed form, Gauss quadrature over the supported measures,
//! and seeded Monte Carlo sampling.
//!
//! Nothing here touches the analytic moment cache or the degree-lift
//! recursion of the measure module — these paths exist to check those. The
//! only thing read off a [`Measure`] is its raw parameter set.

pub mod gauss;

use crate::measure::{Marginal, Measure, MeasureKind};
use gauss::{beta_rule, gauss_rule, hermite_recurrence, jacobi_recurrence, laguerre_recurrence};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive};
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Exp, Gamma, Normal, Uniform};

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum OracleError {
    #[error("concentration parameters must be positive")]
    NonPositiveAlpha,
    #[error("exponent vector length {got} does not match {expect} variables")]
    ArityMismatch { got: usize, expect: usize },
    #[error("sampling is not supported for measure kind {0}")]
    UnsupportedKind(&'static str),
    #[error("sample batch is empty")]
    EmptyBatch,
}

/// Exact mixed moment of a Dirichlet vector: `alpha` carries one
/// concentration per variable plus the simplex remainder, and
/// E[X^j] = prod_i rising(alpha_i, j_i) / rising(alpha_0, |j|).
pub fn dirichlet_moment_exact(
    alpha: &[BigRational],
    exponents: &[u32],
) -> Result<BigRational, OracleError> {
    if alpha.iter().any(|a| !a.is_positive()) {
        return Err(OracleError::NonPositiveAlpha);
    }
    if exponents.len() + 1 != alpha.len() {
        return Err(OracleError::ArityMismatch {
            got: exponents.len(),
            expect: alpha.len().saturating_sub(1),
        });
    }
    let alpha0: BigRational = alpha.iter().sum();
    let total: u32 = exponents.iter().sum();
    let mut num = BigRational::one();
    for (a, &e) in alpha.iter().zip(exponents) {
        num *= rising(a, e);
    }
    Ok(num / rising(&alpha0, total))
}

fn rising(a: &BigRational, k: u32) -> BigRational {
    let mut acc = BigRational::one();
    for i in 0..k {
        acc *= a + BigRational::from_integer(BigInt::from(i));
    }
    acc
}

/// Nodes, weights, and the total polynomial degree the rule integrates
/// exactly. Weights of probability rules sum to one.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub nodes: Vec<Vec<f64>>,
    pub weights: Vec<f64>,
    pub exactness: u32,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(&[f64]) -> f64) -> f64 {
        let mut acc = 0.0;
        let mut comp = 0.0;
        for (node, w) in self.nodes.iter().zip(&self.weights) {
            let v = w * f(node);
            let t = acc + v;
            comp += if acc.abs() >= v.abs() {
                (acc - t) + v
            } else {
                (v - t) + acc
            };
            acc = t;
        }
        acc + comp
    }
}

/// Σ w_i f(node_i).
pub fn integrate_quadrature(rule: &QuadratureRule, f: impl Fn(&[f64]) -> f64) -> f64 {
    rule.integrate(f)
}

/// Quadrature over the Dirichlet simplex by a stick-breaking change of
/// variables: coordinate i carries the Beta weight with parameters
/// (alpha_i, sum of the remaining alphas), so a tensor Gauss-Jacobi grid
/// integrates total degree 2n-1 exactly.
pub fn simplex_dirichlet_rule(
    alpha: &[BigRational],
    min_exactness: u32,
) -> Result<QuadratureRule, OracleError> {
    if alpha.len() < 2 || alpha.iter().any(|a| !a.is_positive()) {
        return Err(OracleError::NonPositiveAlpha);
    }
    let dim = alpha.len() - 1;
    let n = (min_exactness as usize + 2) / 2; // 2n-1 >= min_exactness
    let exactness = 2 * n as u32 - 1;
    let mut per_dim: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(dim);
    for i in 0..dim {
        let tail: BigRational = alpha[i + 1..].iter().sum();
        let p = alpha[i].to_f64().expect("alpha in f64 range") - 1.0;
        let q = tail.to_f64().expect("alpha in f64 range") - 1.0;
        per_dim.push(beta_rule(n, p, q));
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim];
    loop {
        let mut x = Vec::with_capacity(dim);
        let mut w = 1.0;
        let mut remaining = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            let t = per_dim[i].0[k];
            w *= per_dim[i].1[k];
            x.push(t * remaining);
            remaining *= 1.0 - t;
        }
        nodes.push(x);
        weights.push(w);
        // advance the mixed-radix counter
        let mut carry = dim;
        while carry > 0 {
            carry -= 1;
            idx[carry] += 1;
            if idx[carry] < n {
                break;
            }
            idx[carry] = 0;
            if carry == 0 {
                return Ok(QuadratureRule {
                    nodes,
                    weights,
                    exactness,
                });
            }
        }
    }
}

/// Tensor Gauss rule for an independent product measure.
pub fn independent_product_rule(
    marginals: &[Marginal],
    min_exactness: u32,
) -> Result<QuadratureRule, OracleError> {
    let dim = marginals.len();
    let n = (min_exactness as usize + 2) / 2;
    let exactness = 2 * n as u32 - 1;
    let mut per_dim: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(dim);
    for m in marginals {
        per_dim.push(match m {
            Marginal::Uniform { lower, upper } => {
                let (x, w) = gauss_rule(&jacobi_recurrence(n, 0.0, 0.0));
                let (a, b) = (to_f(lower), to_f(upper));
                (
                    x.into_iter()
                        .map(|v| a + 0.5 * (v + 1.0) * (b - a))
                        .collect(),
                    w,
                )
            }
            Marginal::Gaussian { mean, std_dev } => {
                let (x, w) = gauss_rule(&hermite_recurrence(n));
                let (mu, sd) = (to_f(mean), to_f(std_dev));
                (x.into_iter().map(|v| mu + sd * v).collect(), w)
            }
            Marginal::Exponential { rate } => {
                let (x, w) = gauss_rule(&laguerre_recurrence(n));
                let r = to_f(rate);
                (x.into_iter().map(|v| v / r).collect(), w)
            }
        });
    }
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    let mut idx = vec![0usize; dim];
    'outer: loop {
        let mut x = Vec::with_capacity(dim);
        let mut w = 1.0;
        for (i, &k) in idx.iter().enumerate() {
            x.push(per_dim[i].0[k]);
            w *= per_dim[i].1[k];
        }
        nodes.push(x);
        weights.push(w);
        let mut carry = dim;
        while carry > 0 {
            carry -= 1;
            idx[carry] += 1;
            if idx[carry] < n {
                continue 'outer;
            }
            idx[carry] = 0;
        }
        break;
    }
    Ok(QuadratureRule {
        nodes,
        weights,
        exactness,
    })
}

/// Quadrature rule matched to a measure's kind; moment tables carry no
/// density to integrate against.
pub fn measure_rule(measure: &Measure, min_exactness: u32) -> Result<QuadratureRule, OracleError> {
    match measure.kind() {
        MeasureKind::Dirichlet { alpha } => simplex_dirichlet_rule(alpha, min_exactness),
        MeasureKind::IndependentProduct { marginals } => {
            independent_product_rule(marginals, min_exactness)
        }
        MeasureKind::MomentTable { .. } => Err(OracleError::UnsupportedKind("moment-table")),
    }
}

fn to_f(r: &BigRational) -> f64 {
    r.to_f64().expect("parameter in f64 range")
}

/// Reproducible draws from a measure, row-major `count x dim`.
#[derive(Debug, Clone)]
pub struct SampleBatch {
    dim: usize,
    count: usize,
    seed: u64,
    stream: u64,
    data: Vec<f64>,
}

impl SampleBatch {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn stream(&self) -> u64 {
        self.stream
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }
}

/// Draw `count` samples with the given seed (stream 0).
pub fn sample_measure(
    measure: &Measure,
    count: usize,
    seed: u64,
) -> Result<SampleBatch, OracleError> {
    sample_measure_stream(measure, count, seed, 0)
}

/// Seed-partitioned sampling: batches with the same seed and different
/// stream ids are independent, so parallel workers can split one seed.
pub fn sample_measure_stream(
    measure: &Measure,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleBatch, OracleError> {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    let dim = measure.dimension();
    let mut data = Vec::with_capacity(count * dim);
    match measure.kind() {
        MeasureKind::Dirichlet { alpha } => {
            let gammas: Vec<Gamma<f64>> = alpha
                .iter()
                .map(|a| Gamma::new(to_f(a), 1.0).expect("positive shape"))
                .collect();
            for _ in 0..count {
                let draws: Vec<f64> = gammas.iter().map(|g| g.sample(&mut rng)).collect();
                let total: f64 = draws.iter().sum();
                for v in &draws[..dim] {
                    data.push(v / total);
                }
            }
        }
        MeasureKind::IndependentProduct { marginals } => {
            enum Sampler {
                U(Uniform<f64>),
                G(Normal<f64>),
                E(Exp<f64>),
            }
            let samplers: Vec<Sampler> = marginals
                .iter()
                .map(|m| match m {
                    Marginal::Uniform { lower, upper } => {
                        Sampler::U(Uniform::new(to_f(lower), to_f(upper)).expect("valid interval"))
                    }
                    Marginal::Gaussian { mean, std_dev } => {
                        Sampler::G(Normal::new(to_f(mean), to_f(std_dev)).expect("positive std"))
                    }
                    Marginal::Exponential { rate } => {
                        Sampler::E(Exp::new(to_f(rate)).expect("positive rate"))
                    }
                })
                .collect();
            for _ in 0..count {
                for s in &samplers {
                    data.push(match s {
                        Sampler::U(d) => d.sample(&mut rng),
                        Sampler::G(d) => d.sample(&mut rng),
                        Sampler::E(d) => d.sample(&mut rng),
                    });
                }
            }
        }
        MeasureKind::MomentTable { .. } => {
            return Err(OracleError::UnsupportedKind("moment-table"))
        }
    }
    Ok(SampleBatch {
        dim,
        count,
        seed,
        stream,
        data,
    })
}

/// Sample mean and its standard error by Welford's recurrence.
pub fn mc_expectation(
    batch: &SampleBatch,
    f: impl Fn(&[f64]) -> f64,
) -> Result<(f64, f64), OracleError> {
    if batch.is_empty() {
        return Err(OracleError::EmptyBatch);
    }
    let mut mean = 0.0f64;
    let mut m2 = 0.0f64;
    let mut n = 0usize;
    for row in batch.rows() {
        n += 1;
        let v = f(row);
        let d = v - mean;
        mean += d / n as f64;
        m2 += d * (v - mean);
    }
    let se = if n > 1 {
        (m2 / (n as f64 - 1.0) / n as f64).sqrt()
    } else {
        0.0
    };
    Ok((mean, se))
}
