//! Multi-index and variable-subset bookkeeping.
//!
//! Everything downstream (basis construction, degree-block assembly, tables)
//! relies on a single fixed ordering: indices are compared by total degree
//! first, then lexicographically; enumerations list each degree in descending
//! lexicographic order, e.g. for two variables at degree 2: (2,0), (1,1), (0,2).
//! Subsets are ordered by cardinality, then lexicographically by members.

use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// Exponent vector over some fixed variable scope.
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct MultiIndex(pub Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zeros(dim: usize) -> Self {
        MultiIndex(vec![0; dim])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    /// Total degree: the sum of all exponents.
    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    /// True when every exponent is at least one.
    pub fn is_interior(&self) -> bool {
        self.0.iter().all(|&e| e >= 1)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}", self.0)
    }
}

impl Ord for MultiIndex {
    /// Graded lexicographic: total degree first, then lexicographic on the
    /// exponent vector. `(2,0) > (1,1) > (0,2)` within degree 2.
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A subset of the global variable index set {1..N}, kept strictly increasing.
/// The empty subset is allowed (it tags the constant component).
#[derive(Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SubsetId(Vec<u32>);

impl SubsetId {
    /// Build from 1-based member ids; rejects unsorted, duplicate, or zero ids.
    pub fn new(members: Vec<u32>) -> Result<Self, IndexError> {
        for w in members.windows(2) {
            if w[0] >= w[1] {
                return Err(IndexError::UnsortedSubset(members.clone()));
            }
        }
        if members.first().is_some_and(|&m| m == 0) {
            return Err(IndexError::UnsortedSubset(members));
        }
        Ok(SubsetId(members))
    }

    pub fn empty() -> Self {
        SubsetId(Vec::new())
    }

    pub fn full(n: usize) -> Self {
        SubsetId((1..=n as u32).collect())
    }

    pub fn singleton(i: u32) -> Self {
        SubsetId(vec![i])
    }

    pub fn members(&self) -> &[u32] {
        &self.0
    }

    pub fn cardinality(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, var: u32) -> bool {
        self.0.binary_search(&var).is_ok()
    }

    pub fn is_subset_of(&self, other: &SubsetId) -> bool {
        self.0.iter().all(|v| other.contains(*v))
    }

    pub fn union(&self, other: &SubsetId) -> SubsetId {
        let mut m: Vec<u32> = self.0.iter().chain(other.0.iter()).copied().collect();
        m.sort_unstable();
        m.dedup();
        SubsetId(m)
    }

    /// Largest member, or 0 for the empty subset.
    pub fn max_member(&self) -> u32 {
        self.0.last().copied().unwrap_or(0)
    }
}

impl fmt::Debug for SubsetId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{")?;
        for (i, m) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{m}")?;
        }
        write!(f, "}}")
    }
}

impl Ord for SubsetId {
    /// Cardinality first, then lexicographic on members.
    fn cmp(&self, other: &Self) -> Ordering {
        self.0
            .len()
            .cmp(&other.0.len())
            .then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for SubsetId {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, thiserror::Error, PartialEq, Eq)]
pub enum IndexError {
    #[error("subset members must be strictly increasing positive ids, got {0:?}")]
    UnsortedSubset(Vec<u32>),
    #[error("max_cardinality {max} out of range 1..={n}")]
    CardinalityRange { max: usize, n: usize },
    #[error("interaction order {s} exceeds dimension {n}")]
    InteractionRange { s: usize, n: usize },
    #[error("polynomial order {m} below interaction order {s}")]
    OrderBelowInteraction { m: u32, s: usize },
}

/// All exponent vectors of the given total degree, lex-descending.
///
/// Count is `binom(dim + degree - 1, degree)`.
pub fn enumerate_full_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be positive");
    let mut out = Vec::new();
    let mut cur = vec![0u32; dim];
    fill_degree(&mut out, &mut cur, 0, degree);
    out
}

fn fill_degree(out: &mut Vec<MultiIndex>, cur: &mut Vec<u32>, pos: usize, left: u32) {
    if pos + 1 == cur.len() {
        cur[pos] = left;
        out.push(MultiIndex(cur.clone()));
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e;
        fill_degree(out, cur, pos + 1, left - e);
    }
}

/// Exponent vectors of the given total degree with every component >= 1.
///
/// Empty when `degree < dim`; otherwise the count is `binom(degree-1, dim-1)`.
/// Ordering follows `enumerate_full_degree` of the shifted problem, so lists
/// like `(dim=2, degree=3)` come out as `[(2,1), (1,2)]`.
pub fn enumerate_interior_degree(dim: usize, degree: u32) -> Vec<MultiIndex> {
    assert!(dim >= 1, "dimension must be positive");
    if degree < dim as u32 {
        return Vec::new();
    }
    enumerate_full_degree(dim, degree - dim as u32)
        .into_iter()
        .map(|mi| MultiIndex(mi.0.into_iter().map(|e| e + 1).collect()))
        .collect()
}

/// Binomial coefficient in u64 with overflow checks.
pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u64 = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i).expect("binomial overflow") / (i + 1);
    }
    acc
}

/// Total number of expansion coefficients retained by an S-variate,
/// m-th order truncation over N variables, the constant included:
/// `1 + sum_{s=1}^{S} binom(N,s) binom(m,s)`.
pub fn count_gpdd_coefficients(n: usize, s: usize, m: u32) -> Result<u64, IndexError> {
    if s > n {
        return Err(IndexError::InteractionRange { s, n });
    }
    if s > 0 && m < s as u32 {
        return Err(IndexError::OrderBelowInteraction { m, s });
    }
    let mut total = 1u64;
    for card in 1..=s {
        total += binomial(n as u64, card as u64) * binomial(m as u64, card as u64);
    }
    Ok(total)
}

/// Size of the degree-l coefficient block over N variables:
/// `sum_{s=1}^{min(N,l)} binom(N,s) binom(l-1, s-1)`.
pub fn count_degree_block(n: usize, l: u32) -> u64 {
    let top = (n as u64).min(l as u64);
    (1..=top)
        .map(|s| binomial(n as u64, s) * binomial(l as u64 - 1, s - 1))
        .sum()
}

/// Number of coefficients in a degree-wise chaos expansion of order p:
/// `binom(N + p, N)`.
pub fn count_gpce_coefficients(n: usize, p: u32) -> u64 {
    binomial(n as u64 + p as u64, n as u64)
}

/// All non-empty subsets of {1..N} with at most `max_cardinality` members,
/// ordered by (cardinality, lex).
pub fn enumerate_subsets(n: usize, max_cardinality: usize) -> Result<Vec<SubsetId>, IndexError> {
    if max_cardinality < 1 || max_cardinality > n {
        return Err(IndexError::CardinalityRange {
            max: max_cardinality,
            n,
        });
    }
    let mut out = Vec::new();
    for card in 1..=max_cardinality {
        out.extend(combinations(n, card));
    }
    Ok(out)
}

fn combinations(n: usize, card: usize) -> Vec<SubsetId> {
    let mut out = Vec::new();
    let mut comb: Vec<u32> = (1..=card as u32).collect();
    if card > n {
        return out;
    }
    loop {
        out.push(SubsetId(comb.clone()));
        let mut i = card as isize - 1;
        while i >= 0 && comb[i as usize] == (n - (card - 1 - i as usize)) as u32 {
            i -= 1;
        }
        if i < 0 {
            return out;
        }
        comb[i as usize] += 1;
        for j in i as usize + 1..card {
            comb[j] = comb[j - 1] + 1;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(v: &[u32]) -> MultiIndex {
        MultiIndex::new(v.to_vec())
    }

    #[test]
    fn full_degree_examples() {
        assert_eq!(
            enumerate_full_degree(2, 2),
            vec![mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])]
        );
        assert_eq!(enumerate_full_degree(1, 5), vec![mi(&[5])]);
        assert_eq!(enumerate_full_degree(3, 2).len(), 6);
        assert_eq!(enumerate_full_degree(2, 0), vec![mi(&[0, 0])]);
    }

    #[test]
    fn interior_degree_examples() {
        assert_eq!(
            enumerate_interior_degree(2, 3),
            vec![mi(&[2, 1]), mi(&[1, 2])]
        );
        assert_eq!(enumerate_interior_degree(1, 4), vec![mi(&[4])]);
        assert_eq!(enumerate_interior_degree(3, 3), vec![mi(&[1, 1, 1])]);
        assert!(enumerate_interior_degree(3, 2).is_empty());
    }

    #[test]
    fn enumeration_counts_match_closed_forms() {
        for dim in 1..=4usize {
            for degree in 0..=8u32 {
                let full = enumerate_full_degree(dim, degree);
                assert_eq!(
                    full.len() as u64,
                    binomial(dim as u64 + degree as u64 - 1, degree as u64)
                );
                for f in &full {
                    assert_eq!(f.degree(), degree);
                }
                let interior = enumerate_interior_degree(dim, degree);
                let expect = if degree >= dim as u32 {
                    binomial(degree as u64 - 1, dim as u64 - 1)
                } else {
                    0
                };
                assert_eq!(interior.len() as u64, expect);
                for idx in &interior {
                    assert!(idx.is_interior());
                    assert_eq!(idx.degree(), degree);
                }
            }
        }
    }

    #[test]
    fn enumeration_is_stable() {
        assert_eq!(enumerate_full_degree(3, 4), enumerate_full_degree(3, 4));
        assert_eq!(enumerate_subsets(5, 3), enumerate_subsets(5, 3));
    }

    #[test]
    fn coefficient_counts() {
        assert_eq!(count_gpdd_coefficients(3, 1, 5).unwrap(), 16);
        assert_eq!(count_gpdd_coefficients(3, 2, 5).unwrap(), 46);
        assert_eq!(count_gpdd_coefficients(20, 2, 4).unwrap(), 1221);
        assert_eq!(count_gpdd_coefficients(20, 1, 4).unwrap(), 81);
        assert_eq!(count_gpdd_coefficients(5, 0, 3).unwrap(), 1);
        assert!(count_gpdd_coefficients(3, 4, 5).is_err());
        assert!(count_gpdd_coefficients(3, 2, 1).is_err());
    }

    #[test]
    fn degree_block_counts() {
        assert_eq!(count_degree_block(3, 1), 3);
        assert_eq!(count_degree_block(3, 2), 6);
        assert_eq!(count_degree_block(1, 7), 1);
    }

    #[test]
    fn gpce_counts() {
        assert_eq!(count_gpce_coefficients(3, 5), 56);
        assert_eq!(count_gpce_coefficients(20, 4), 10626);
        assert_eq!(count_gpce_coefficients(7, 0), 1);
    }

    #[test]
    fn subset_enumeration() {
        let s = enumerate_subsets(3, 1).unwrap();
        assert_eq!(
            s,
            vec![
                SubsetId::singleton(1),
                SubsetId::singleton(2),
                SubsetId::singleton(3)
            ]
        );
        assert_eq!(enumerate_subsets(3, 3).unwrap().len(), 7);
        assert_eq!(enumerate_subsets(4, 2).unwrap().len(), 10);
        assert!(enumerate_subsets(3, 0).is_err());
        assert!(enumerate_subsets(3, 4).is_err());
        // ordering: cardinality then lex
        let s = enumerate_subsets(3, 3).unwrap();
        let expect: Vec<SubsetId> = vec![
            SubsetId::new(vec![1]).unwrap(),
            SubsetId::new(vec![2]).unwrap(),
            SubsetId::new(vec![3]).unwrap(),
            SubsetId::new(vec![1, 2]).unwrap(),
            SubsetId::new(vec![1, 3]).unwrap(),
            SubsetId::new(vec![2, 3]).unwrap(),
            SubsetId::new(vec![1, 2, 3]).unwrap(),
        ];
        assert_eq!(s, expect);
    }

    #[test]
    fn gpdd_count_matches_enumeration() {
        for n in 1..=5usize {
            for s in 0..=n {
                for m in s as u32..=6 {
                    let closed = count_gpdd_coefficients(n, s, m).unwrap();
                    let mut direct = 1u64;
                    if s >= 1 {
                        for u in enumerate_subsets(n, s).unwrap() {
                            for l in u.cardinality() as u32..=m {
                                direct +=
                                    enumerate_interior_degree(u.cardinality(), l).len() as u64;
                            }
                        }
                    }
                    assert_eq!(closed, direct, "N={n} S={s} m={m}");
                }
            }
        }
    }

    #[test]
    fn degree_block_matches_enumeration() {
        for n in 1..=5usize {
            for l in 1..=8u32 {
                let closed = count_degree_block(n, l);
                let direct: u64 = enumerate_subsets(n, n)
                    .unwrap()
                    .iter()
                    .map(|u| enumerate_interior_degree(u.cardinality(), l).len() as u64)
                    .sum();
                assert_eq!(closed, direct, "N={n} l={l}");
            }
        }
    }

    #[test]
    fn graded_lex_ordering() {
        assert!(mi(&[2, 0]) > mi(&[1, 1]));
        assert!(mi(&[1, 1]) > mi(&[0, 2]));
        assert!(mi(&[0, 2]) > mi(&[1, 0]));
        assert!(mi(&[0, 0]) < mi(&[1, 0]));
    }

    #[test]
    fn subset_invariants() {
        assert!(SubsetId::new(vec![2, 1]).is_err());
        assert!(SubsetId::new(vec![1, 1]).is_err());
        assert!(SubsetId::new(vec![0]).is_err());
        assert!(SubsetId::empty().is_empty());
        assert!(SubsetId::new(vec![1, 3])
            .unwrap()
            .is_subset_of(&SubsetId::full(3)));
    }
}
