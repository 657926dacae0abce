//! One-dimensional Gauss rules from three-term recurrences.
//!
//! Nodes are the eigenvalues of the symmetric tridiagonal Jacobi matrix,
//! found by Sturm-sequence bisection (robust and plenty fast at the sizes
//! used here); weights are Christoffel numbers evaluated through the
//! orthonormal recurrence and normalized to unit total mass, which is the
//! right normalization for probability measures.

#![allow(clippy::needless_range_loop)]

/// Monic recurrence p_{k+1} = (x - a_k) p_k - b_k p_{k-1}; `b[0]` is unused.
pub struct Recurrence {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

/// Jacobi weight (1-x)^alpha (1+x)^beta on [-1, 1].
pub fn jacobi_recurrence(n: usize, alpha: f64, beta: f64) -> Recurrence {
    let mut a = Vec::with_capacity(n);
    let mut b = vec![0.0; n];
    let s = alpha + beta;
    for k in 0..n {
        let kf = k as f64;
        let ak = if k == 0 {
            (beta - alpha) / (s + 2.0)
        } else {
            (beta * beta - alpha * alpha) / ((2.0 * kf + s) * (2.0 * kf + s + 2.0))
        };
        a.push(ak);
        if k >= 1 {
            b[k] = if k == 1 {
                // the (1 + s) factors cancel; this form stays finite at s = -1
                4.0 * (1.0 + alpha) * (1.0 + beta) / ((s + 2.0) * (s + 2.0) * (s + 3.0))
            } else {
                4.0 * kf * (kf + alpha) * (kf + beta) * (kf + s)
                    / ((2.0 * kf + s).powi(2) * (2.0 * kf + s + 1.0) * (2.0 * kf + s - 1.0))
            };
        }
    }
    Recurrence { a, b }
}

/// Standard normal weight exp(-x^2/2)/sqrt(2 pi).
pub fn hermite_recurrence(n: usize) -> Recurrence {
    Recurrence {
        a: vec![0.0; n],
        b: (0..n).map(|k| k as f64).collect(),
    }
}

/// Unit-rate exponential weight exp(-x) on [0, inf).
pub fn laguerre_recurrence(n: usize) -> Recurrence {
    Recurrence {
        a: (0..n).map(|k| 2.0 * k as f64 + 1.0).collect(),
        b: (0..n).map(|k| (k as f64) * (k as f64)).collect(),
    }
}

/// Eigenvalues of the symmetric tridiagonal matrix with diagonal `d` and
/// subdiagonal `e` (length n-1), ascending.
fn tridiagonal_eigenvalues(d: &[f64], e: &[f64]) -> Vec<f64> {
    let n = d.len();
    if n == 0 {
        return Vec::new();
    }
    // Gershgorin bounds
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let left = if i > 0 { e[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < n { e[i].abs() } else { 0.0 };
        lo = lo.min(d[i] - left - right);
        hi = hi.max(d[i] + left + right);
    }
    let span = (hi - lo).max(1e-300);
    // Sturm count: eigenvalues strictly below sigma
    let count_below = |sigma: f64| -> usize {
        let mut count = 0;
        let mut q = 1.0f64;
        for i in 0..n {
            let off = if i > 0 { e[i - 1] * e[i - 1] } else { 0.0 };
            q = d[i] - sigma - if i > 0 { off / q } else { 0.0 };
            if q == 0.0 {
                q = 1e-300;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    };
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let mut a = lo - 1e-12 * span;
        let mut b = hi + 1e-12 * span;
        for _ in 0..90 {
            let mid = 0.5 * (a + b);
            if count_below(mid) <= k {
                a = mid;
            } else {
                b = mid;
            }
            if b - a <= f64::EPSILON * span {
                break;
            }
        }
        out.push(0.5 * (a + b));
    }
    out
}

/// Nodes and unit-mass weights of the n-point rule for the recurrence.
pub fn gauss_rule(rec: &Recurrence) -> (Vec<f64>, Vec<f64>) {
    let n = rec.a.len();
    let offdiag: Vec<f64> = (1..n).map(|k| rec.b[k].sqrt()).collect();
    let nodes = tridiagonal_eigenvalues(&rec.a, &offdiag);
    // Christoffel weights through the orthonormal recurrence, up to a common
    // factor that the final normalization removes
    let mut weights = Vec::with_capacity(n);
    for &x in &nodes {
        let mut prev = 0.0f64;
        let mut cur = 1.0f64;
        let mut sum_sq = cur * cur;
        for k in 0..n - 1 {
            let next = ((x - rec.a[k]) * cur - if k > 0 { rec.b[k].sqrt() * prev } else { 0.0 })
                / rec.b[k + 1].sqrt();
            prev = cur;
            cur = next;
            sum_sq += cur * cur;
        }
        weights.push(1.0 / sum_sq);
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    (nodes, weights)
}

/// n-point rule for the Beta-type weight t^p (1-t)^q on [0, 1].
pub fn beta_rule(n: usize, p: f64, q: f64) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_rule(&jacobi_recurrence(n, q, p));
    (x.into_iter().map(|v| 0.5 * (v + 1.0)).collect(), w)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn legendre_nodes_match_known_values() {
        // 3-point Gauss-Legendre on [-1,1]: 0, +-sqrt(3/5); weights sum to 1
        let (x, w) = gauss_rule(&jacobi_recurrence(3, 0.0, 0.0));
        let r = (3.0f64 / 5.0).sqrt();
        assert!((x[0] + r).abs() < 1e-14 && x[1].abs() < 1e-14 && (x[2] - r).abs() < 1e-14);
        assert!((w[0] - 5.0 / 18.0).abs() < 1e-14);
        assert!((w[1] - 8.0 / 18.0).abs() < 1e-14);
    }

    #[test]
    fn hermite_rule_integrates_normal_moments() {
        let (x, w) = gauss_rule(&hermite_recurrence(8));
        // degree-14 moment of the standard normal: 13!! = 135135
        let m14: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(14)).sum();
        assert!((m14 - 135135.0).abs() / 135135.0 < 1e-12);
        let m3: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(3)).sum();
        assert!(m3.abs() < 1e-10);
    }

    #[test]
    fn laguerre_rule_integrates_factorials() {
        let (x, w) = gauss_rule(&laguerre_recurrence(8));
        let m5: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi.powi(5)).sum();
        assert!((m5 - 120.0).abs() / 120.0 < 1e-12);
    }

    #[test]
    fn beta_rule_matches_beta_moments() {
        // Beta(3/2, 9/2): weight t^{1/2} (1-t)^{7/2}; E[T] = (3/2)/6 = 1/4
        let (x, w) = beta_rule(6, 0.5, 3.5);
        let m1: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi).sum();
        assert!((m1 - 0.25).abs() < 1e-13);
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        assert!((m2 - 5.0 / 56.0).abs() < 1e-13);
    }

    #[test]
    fn chebyshev_like_weight_survives_sum_minus_one() {
        // alpha = beta = -1/2 hits the cancelled k=1 branch
        let (x, w) = gauss_rule(&jacobi_recurrence(5, -0.5, -0.5));
        let m2: f64 = x.iter().zip(&w).map(|(xi, wi)| wi * xi * xi).sum();
        // E[X^2] under the arcsine law on [-1,1] is 1/2
        assert!((m2 - 0.5).abs() < 1e-13, "{m2}");
    }
}
