//! Small dense symmetric solves, generic over the coefficient field.
//!
//! Moment matrices of monomial bases are Hilbert-like and become severely
//! ill-conditioned with degree, so the factorization is generic: it runs on
//! exact rationals when the measure supplies exact moments, and on f64 when
//! it does not. LDL^T avoids square roots, which keeps the rational path
//! closed under field operations.

// in-place substitution kernels index into the vector they update
#![allow(clippy::needless_range_loop)]

use num_traits::{Num, One, Signed, Zero};

/// Field operations needed by the factorization.
pub trait Scalar: Clone + Zero + One + Num + Signed + PartialOrd {}
impl<T: Clone + Zero + One + Num + Signed + PartialOrd> Scalar for T {}

/// Dense symmetric matrix, full row-major storage.
#[derive(Clone, Debug)]
pub struct SymMatrix<T> {
    n: usize,
    data: Vec<T>,
}

impl<T: Scalar> SymMatrix<T> {
    pub fn zeros(n: usize) -> Self {
        SymMatrix {
            n,
            data: vec![T::zero(); n * n],
        }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut m = SymMatrix::zeros(n);
        for i in 0..n {
            for j in 0..=i {
                let v = f(i, j);
                m.data[i * n + j] = v.clone();
                m.data[j * n + i] = v;
            }
        }
        m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: T) {
        self.data[i * self.n + j] = v.clone();
        self.data[j * self.n + i] = v;
    }
}

/// Unit-lower-triangular L and positive diagonal D with A = L D L^T.
#[derive(Clone, Debug)]
pub struct Ldlt<T> {
    n: usize,
    lower: Vec<T>, // strictly lower triangle of L, row-major packed
    diag: Vec<T>,
}

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum FactorError {
    #[error("matrix is not positive definite: pivot {pivot_index} is non-positive")]
    NonPositivePivot { pivot_index: usize },
}

impl<T: Scalar> Ldlt<T> {
    /// Factor a symmetric positive-definite matrix. No pivoting: a
    /// non-positive pivot is reported as a failure, not repaired.
    pub fn factor(a: &SymMatrix<T>) -> Result<Self, FactorError> {
        let n = a.n;
        let mut lower = vec![T::zero(); n * (n.saturating_sub(1)) / 2];
        let mut diag = vec![T::zero(); n];
        // l_idx(i, j) for j < i
        let l_idx = |i: usize, j: usize| i * (i - 1) / 2 + j;
        for j in 0..n {
            let mut dj = a.get(j, j).clone();
            for k in 0..j {
                let l = lower[l_idx(j, k)].clone();
                dj = dj - l.clone() * l * diag[k].clone();
            }
            if dj <= T::zero() {
                return Err(FactorError::NonPositivePivot { pivot_index: j });
            }
            diag[j] = dj.clone();
            for i in j + 1..n {
                let mut s = a.get(i, j).clone();
                for k in 0..j {
                    s = s - lower[l_idx(i, k)].clone()
                        * lower[l_idx(j, k)].clone()
                        * diag[k].clone();
                }
                lower[l_idx(i, j)] = s / dj.clone();
            }
        }
        Ok(Ldlt { n, lower, diag })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn diag(&self) -> &[T] {
        &self.diag
    }

    fn l(&self, i: usize, j: usize) -> &T {
        &self.lower[i * (i - 1) / 2 + j]
    }

    /// Solve A x = b.
    pub fn solve(&self, b: &[T]) -> Vec<T> {
        assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        // forward: L z = b
        for i in 0..self.n {
            for j in 0..i {
                let t = self.l(i, j).clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
        }
        // scale: D w = z
        for i in 0..self.n {
            x[i] = x[i].clone() / self.diag[i].clone();
        }
        // back: L^T y = w
        for i in (0..self.n).rev() {
            for j in i + 1..self.n {
                let t = self.l(j, i).clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
        }
        x
    }

    /// Solve on the leading principal block of size `k` (valid because the
    /// LDL^T of a leading block is the leading block of the full LDL^T).
    pub fn solve_leading(&self, k: usize, b: &[T]) -> Vec<T> {
        assert!(k <= self.n && b.len() == k);
        let mut x = b.to_vec();
        for i in 0..k {
            for j in 0..i {
                let t = self.l(i, j).clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
        }
        for i in 0..k {
            x[i] = x[i].clone() / self.diag[i].clone();
        }
        for i in (0..k).rev() {
            for j in i + 1..k {
                let t = self.l(j, i).clone() * x[j].clone();
                x[i] = x[i].clone() - t;
            }
        }
        x
    }

    /// Row `k` of L^{-1}: coefficients expressing the k-th orthogonalized
    /// vector in terms of the first k+1 original ones. Obtained from
    /// L^T w = e_k by back substitution; the row has support on 0..=k only.
    pub fn inverse_lower_row(&self, k: usize) -> Vec<T> {
        let mut w = vec![T::zero(); k + 1];
        w[k] = T::one();
        for i in (0..k).rev() {
            let mut s = T::zero();
            for j in i + 1..=k {
                s = s + self.l(j, i).clone() * w[j].clone();
            }
            w[i] = T::zero() - s;
        }
        w
    }
}

/// Two-norm condition estimate of a symmetric positive-definite matrix via
/// power iteration on A and inverse iteration through its factorization.
/// Returns +inf when the f64 factorization fails.
pub fn condition_estimate(a: &SymMatrix<f64>) -> f64 {
    let n = a.n();
    if n == 0 {
        return 1.0;
    }
    let fact = match Ldlt::factor(a) {
        Ok(f) => f,
        Err(_) => return f64::INFINITY,
    };
    let matvec = |v: &[f64]| -> Vec<f64> {
        (0..n)
            .map(|i| (0..n).map(|j| a.get(i, j) * v[j]).sum())
            .collect()
    };
    let normalize = |v: &mut Vec<f64>| -> f64 {
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 0.0 {
            for x in v.iter_mut() {
                *x /= norm;
            }
        }
        norm
    };
    let mut v: Vec<f64> = (0..n).map(|i| 1.0 / (i as f64 + 1.0)).collect();
    normalize(&mut v);
    let mut lam_max = 0.0;
    for _ in 0..60 {
        let mut w = matvec(&v);
        lam_max = normalize(&mut w);
        v = w;
    }
    let mut u: Vec<f64> = (0..n)
        .map(|i| if i % 2 == 0 { 1.0 } else { -1.0 })
        .collect();
    normalize(&mut u);
    let mut inv_lam = 0.0;
    for _ in 0..60 {
        let mut w = fact.solve(&u);
        inv_lam = normalize(&mut w);
        u = w;
    }
    if inv_lam == 0.0 {
        return f64::INFINITY;
    }
    lam_max * inv_lam
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn rat(n: i64, d: i64) -> BigRational {
        BigRational::new(BigInt::from(n), BigInt::from(d))
    }

    #[test]
    fn f64_solve_small() {
        let a = SymMatrix::from_fn(2, |i, j| if i == j { 2.0 } else { 1.0 });
        let f = Ldlt::factor(&a).unwrap();
        let x = f.solve(&[3.0, 3.0]);
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rational_solve_is_exact() {
        // Hilbert 4x4, notoriously ill-conditioned but exactly solvable
        let a = SymMatrix::from_fn(4, |i, j| rat(1, (i + j + 1) as i64));
        let f = Ldlt::factor(&a).unwrap();
        let b: Vec<BigRational> = (0..4).map(|i| rat(i as i64 + 1, 1)).collect();
        let x = f.solve(&b);
        // residual must be exactly zero
        for i in 0..4 {
            let mut r = b[i].clone();
            for j in 0..4 {
                r -= a.get(i, j).clone() * x[j].clone();
            }
            assert!(r.is_integer() && r == rat(0, 1));
        }
    }

    #[test]
    fn non_spd_reports_pivot() {
        let mut a = SymMatrix::zeros(2);
        a.set(0, 0, 1.0);
        a.set(1, 1, -1.0);
        match Ldlt::factor(&a) {
            Err(FactorError::NonPositivePivot { pivot_index }) => assert_eq!(pivot_index, 1),
            other => panic!("expected non-SPD failure, got {other:?}"),
        }
    }

    #[test]
    fn leading_block_solve_matches_full() {
        let a = SymMatrix::from_fn(5, |i, j| {
            if i == j {
                (i + 2) as f64
            } else {
                1.0 / ((i + j + 1) as f64)
            }
        });
        let f = Ldlt::factor(&a).unwrap();
        let sub = SymMatrix::from_fn(3, |i, j| *a.get(i, j));
        let fsub = Ldlt::factor(&sub).unwrap();
        let b = [1.0, 2.0, -1.0];
        let x1 = f.solve_leading(3, &b);
        let x2 = fsub.solve(&b);
        for (p, q) in x1.iter().zip(x2.iter()) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn inverse_lower_rows_invert_l() {
        let a = SymMatrix::from_fn(4, |i, j| {
            if i == j {
                3.0
            } else {
                1.0 / (1.0 + (i + j) as f64)
            }
        });
        let f = Ldlt::factor(&a).unwrap();
        for k in 0..4 {
            let row = f.inverse_lower_row(k);
            // check (L^{-1} L)_k = e_k over the leading block
            for col in 0..=k {
                let mut s = 0.0;
                for j in col..=k {
                    let lkj = if j == col { 1.0 } else { *f.l(j, col) };
                    s += row[j] * lkj;
                }
                let expect = if col == k { 1.0 } else { 0.0 };
                assert!((s - expect).abs() < 1e-12, "k={k} col={col} s={s}");
            }
        }
    }

    #[test]
    fn hilbert_condition_magnitude() {
        let a = SymMatrix::from_fn(5, |i, j| 1.0 / ((i + j + 1) as f64));
        let c = condition_estimate(&a);
        // known cond_2(H_5) ~ 4.77e5
        assert!(c > 1e5 && c < 1e6, "cond estimate {c}");
    }
}
