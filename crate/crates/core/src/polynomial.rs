//! Sparse multivariate polynomials over a declared variable scope.
//!
//! Terms map a [`MultiIndex`] (exponents aligned with the scope members) to a
//! coefficient; zero coefficients are never stored, so equality is structural.
//! The zero polynomial has no degree (`degree()` returns `None`, the
//! "minus infinity" sentinel).
//!
//! # Text form
//!
//! The canonical serialization lists terms highest graded-lex first:
//!
//! ```text
//! 10*x1^6 + 0.1*x1*x2 - 3/2*x3
//! ```
//!
//! A term is `coeff`, `coeff*monomial`, or a bare `monomial`; a monomial is
//! `x<id>` factors joined by `*`, each optionally raised with `^`. Coefficients
//! are decimals (f64 path) or integers/ratios `p/q` (exact path); `parse`
//! accepts both spellings for either coefficient type. Round-tripping
//! `display -> parse -> display` is the identity.

use crate::linalg::Scalar;
use crate::multiindex::{MultiIndex, SubsetId};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, Clone, thiserror::Error, PartialEq)]
pub enum PolyError {
    #[error("scope {found:?} is not contained in target scope {target:?}")]
    ScopeNotContained { found: SubsetId, target: SubsetId },
    #[error("evaluation point has dimension {got}, but variable x{needed} is in scope")]
    PointTooShort { got: usize, needed: u32 },
    #[error("exponent vector length {got} does not match scope size {expect}")]
    ArityMismatch { got: usize, expect: usize },
    #[error("parse error at byte {at}: {what}")]
    Parse { at: usize, what: String },
    #[error("variable x{var} is outside the declared scope")]
    VarOutsideScope { var: u32 },
}

/// Sparse polynomial with coefficients in `T`.
#[derive(Clone, PartialEq)]
pub struct Polynomial<T> {
    scope: SubsetId,
    terms: BTreeMap<MultiIndex, T>,
}

impl<T: Scalar> Polynomial<T> {
    pub fn zero(scope: SubsetId) -> Self {
        Polynomial {
            scope,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(scope: SubsetId, value: T) -> Self {
        let mut p = Polynomial::zero(scope);
        if !value.is_zero() {
            let dim = p.scope.cardinality();
            p.terms.insert(MultiIndex::zeros(dim), value);
        }
        p
    }

    pub fn monomial(scope: SubsetId, index: MultiIndex, coeff: T) -> Result<Self, PolyError> {
        if index.dim() != scope.cardinality() {
            return Err(PolyError::ArityMismatch {
                got: index.dim(),
                expect: scope.cardinality(),
            });
        }
        let mut p = Polynomial::zero(scope);
        if !coeff.is_zero() {
            p.terms.insert(index, coeff);
        }
        Ok(p)
    }

    pub fn from_terms(
        scope: SubsetId,
        terms: impl IntoIterator<Item = (MultiIndex, T)>,
    ) -> Result<Self, PolyError> {
        let mut p = Polynomial::zero(scope);
        for (idx, c) in terms {
            if idx.dim() != p.scope.cardinality() {
                return Err(PolyError::ArityMismatch {
                    got: idx.dim(),
                    expect: p.scope.cardinality(),
                });
            }
            p.accumulate(idx, c);
        }
        Ok(p)
    }

    pub fn scope(&self) -> &SubsetId {
        &self.scope
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &T)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, idx: &MultiIndex) -> Option<&T> {
        self.terms.get(idx)
    }

    /// Maximum total degree, or `None` for the zero polynomial.
    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(|k| k.degree()).max()
    }

    fn accumulate(&mut self, idx: MultiIndex, c: T) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(idx) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                let s = e.get().clone() + c;
                if s.is_zero() {
                    e.remove();
                } else {
                    *e.get_mut() = s;
                }
            }
        }
    }

    /// Re-express over a larger scope; evaluation is unchanged on points that
    /// agree on the shared variables.
    pub fn promote_scope(&self, target: &SubsetId) -> Result<Self, PolyError> {
        if !self.scope.is_subset_of(target) {
            return Err(PolyError::ScopeNotContained {
                found: self.scope.clone(),
                target: target.clone(),
            });
        }
        let positions: Vec<usize> = self
            .scope
            .members()
            .iter()
            .map(|v| target.members().iter().position(|w| w == v).unwrap())
            .collect();
        let dim = target.cardinality();
        let mut out = Polynomial::zero(target.clone());
        for (idx, c) in &self.terms {
            let mut e = vec![0u32; dim];
            for (p, &pos) in positions.iter().enumerate() {
                e[pos] = idx.exponents()[p];
            }
            out.terms.insert(MultiIndex::new(e), c.clone());
        }
        Ok(out)
    }

    fn promoted_pair(&self, other: &Self) -> (Self, Self) {
        if self.scope == other.scope {
            (self.clone(), other.clone())
        } else {
            let union = self.scope.union(&other.scope);
            (
                self.promote_scope(&union).unwrap(),
                other.promote_scope(&union).unwrap(),
            )
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let (mut a, b) = self.promoted_pair(other);
        for (idx, c) in b.terms {
            a.accumulate(idx, c);
        }
        a
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        let mut out = self.clone();
        for c in out.terms.values_mut() {
            *c = T::zero() - c.clone();
        }
        out
    }

    pub fn scale(&self, factor: &T) -> Self {
        if factor.is_zero() {
            return Polynomial::zero(self.scope.clone());
        }
        let mut out = Polynomial::zero(self.scope.clone());
        for (idx, c) in &self.terms {
            out.terms.insert(idx.clone(), c.clone() * factor.clone());
        }
        out
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = self.promoted_pair(other);
        let mut out = Polynomial::zero(a.scope.clone());
        for (ia, ca) in &a.terms {
            for (ib, cb) in &b.terms {
                let idx = MultiIndex::new(
                    ia.exponents()
                        .iter()
                        .zip(ib.exponents())
                        .map(|(x, y)| x + y)
                        .collect(),
                );
                out.accumulate(idx, ca.clone() * cb.clone());
            }
        }
        out
    }

    /// Evaluate at a point indexed by global variable id (`point[i]` is the
    /// value of `x(i+1)`).
    pub fn evaluate(&self, point: &[T]) -> Result<T, PolyError> {
        let needed = self.scope.max_member();
        if (point.len() as u32) < needed {
            return Err(PolyError::PointTooShort {
                got: point.len(),
                needed,
            });
        }
        let vals: Vec<&T> = self
            .scope
            .members()
            .iter()
            .map(|&v| &point[(v - 1) as usize])
            .collect();
        let mut acc = T::zero();
        for (idx, c) in &self.terms {
            let mut t = c.clone();
            for (p, &e) in idx.exponents().iter().enumerate() {
                for _ in 0..e {
                    t = t * vals[p].clone();
                }
            }
            acc = acc + t;
        }
        Ok(acc)
    }
}

impl Polynomial<BigRational> {
    /// Round every coefficient to the nearest f64.
    pub fn to_f64(&self) -> Polynomial<f64> {
        let mut out = Polynomial::zero(self.scope.clone());
        for (idx, c) in &self.terms {
            let v = c.to_f64().expect("rational out of f64 range");
            if v != 0.0 {
                out.terms.insert(idx.clone(), v);
            }
        }
        out
    }
}

// ---------------------------------------------------------------------------
// text format
// ---------------------------------------------------------------------------

/// Coefficient spelling for the text form.
pub trait CoeffText: Sized {
    fn format_coeff(&self) -> String;
    fn parse_coeff(s: &str) -> Option<Self>;
    fn is_negative_coeff(&self) -> bool;
    fn abs_coeff(&self) -> Self;
    fn is_one_coeff(&self) -> bool;
}

impl CoeffText for f64 {
    fn format_coeff(&self) -> String {
        format!("{self}")
    }
    fn parse_coeff(s: &str) -> Option<Self> {
        if let Ok(v) = s.parse::<f64>() {
            return Some(v);
        }
        // accept exact ratios in the float path too
        let (n, d) = s.split_once('/')?;
        let n: f64 = n.trim().parse().ok()?;
        let d: f64 = d.trim().parse().ok()?;
        (d != 0.0).then_some(n / d)
    }
    fn is_negative_coeff(&self) -> bool {
        *self < 0.0
    }
    fn abs_coeff(&self) -> Self {
        self.abs()
    }
    fn is_one_coeff(&self) -> bool {
        *self == 1.0
    }
}

impl CoeffText for BigRational {
    fn format_coeff(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            format!("{}/{}", self.numer(), self.denom())
        }
    }
    fn parse_coeff(s: &str) -> Option<Self> {
        let s = s.trim();
        if let Some((n, d)) = s.split_once('/') {
            let n: BigInt = n.trim().parse().ok()?;
            let d: BigInt = d.trim().parse().ok()?;
            if d.is_zero() {
                return None;
            }
            return Some(BigRational::new(n, d));
        }
        if let Some((int_part, frac_part)) = s.split_once('.') {
            let sign = if int_part.trim_start().starts_with('-') {
                -BigInt::one()
            } else {
                BigInt::one()
            };
            let int_digits = int_part.trim().trim_start_matches(['+', '-']);
            let int_val: BigInt = if int_digits.is_empty() {
                BigInt::zero()
            } else {
                int_digits.parse().ok()?
            };
            if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            let frac_val: BigInt = frac_part.parse().ok()?;
            let den = BigInt::from(10u32).pow(frac_part.len() as u32);
            return Some(BigRational::new(
                sign * (int_val * den.clone() + frac_val),
                den,
            ));
        }
        let n: BigInt = s.parse().ok()?;
        Some(BigRational::from_integer(n))
    }
    fn is_negative_coeff(&self) -> bool {
        self.is_negative()
    }
    fn abs_coeff(&self) -> Self {
        self.abs()
    }
    fn is_one_coeff(&self) -> bool {
        self.is_one()
    }
}

impl<T: Scalar + CoeffText> fmt::Display for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (pos, (idx, c)) in self.terms.iter().rev().enumerate() {
            let neg = c.is_negative_coeff();
            if pos == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            let mag = c.abs_coeff();
            let mono = format_monomial(&self.scope, idx);
            match (mono.is_empty(), mag.is_one_coeff()) {
                (true, _) => write!(f, "{}", mag.format_coeff())?,
                (false, true) => write!(f, "{mono}")?,
                (false, false) => write!(f, "{}*{mono}", mag.format_coeff())?,
            }
        }
        Ok(())
    }
}

fn format_monomial(scope: &SubsetId, idx: &MultiIndex) -> String {
    let mut parts = Vec::new();
    for (p, &e) in idx.exponents().iter().enumerate() {
        if e == 0 {
            continue;
        }
        let var = scope.members()[p];
        if e == 1 {
            parts.push(format!("x{var}"));
        } else {
            parts.push(format!("x{var}^{e}"));
        }
    }
    parts.join("*")
}

impl<T: Scalar + CoeffText> Polynomial<T> {
    /// Parse the text form over an explicit scope. Every variable mentioned
    /// must belong to the scope.
    pub fn parse(input: &str, scope: &SubsetId) -> Result<Self, PolyError> {
        let mut out = Polynomial::zero(scope.clone());
        let dim = scope.cardinality();
        let bytes = input.as_bytes();
        let mut pos = 0usize;
        let err = |at: usize, what: &str| PolyError::Parse {
            at,
            what: what.to_string(),
        };
        let skip_ws = |pos: &mut usize| {
            while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
                *pos += 1;
            }
        };
        skip_ws(&mut pos);
        if pos == bytes.len() {
            return Err(err(0, "empty input"));
        }
        let mut first = true;
        while pos < bytes.len() {
            skip_ws(&mut pos);
            if pos == bytes.len() {
                break;
            }
            let mut negative = false;
            match bytes[pos] {
                b'+' => {
                    pos += 1;
                }
                b'-' => {
                    negative = true;
                    pos += 1;
                }
                _ if first => {}
                _ => return Err(err(pos, "expected '+' or '-' between terms")),
            }
            first = false;
            skip_ws(&mut pos);
            // term: sequence of factors joined by '*'; at most one coefficient
            let mut coeff = T::one();
            let mut saw_coeff = false;
            let mut exps = vec![0u32; dim];
            let mut saw_factor = false;
            loop {
                skip_ws(&mut pos);
                if pos >= bytes.len() {
                    break;
                }
                match bytes[pos] {
                    b'x' | b'X' => {
                        pos += 1;
                        let var = parse_u32(bytes, &mut pos)
                            .ok_or_else(|| err(pos, "expected variable id after 'x'"))?;
                        let slot = scope
                            .members()
                            .iter()
                            .position(|&v| v == var)
                            .ok_or(PolyError::VarOutsideScope { var })?;
                        let mut e = 1u32;
                        skip_ws(&mut pos);
                        if pos < bytes.len() && bytes[pos] == b'^' {
                            pos += 1;
                            skip_ws(&mut pos);
                            e = parse_u32(bytes, &mut pos)
                                .ok_or_else(|| err(pos, "expected exponent after '^'"))?;
                        }
                        exps[slot] += e;
                        saw_factor = true;
                    }
                    b'0'..=b'9' | b'.' => {
                        let start = pos;
                        let token = parse_number_token(bytes, &mut pos);
                        let c = T::parse_coeff(token)
                            .ok_or_else(|| err(start, "invalid coefficient"))?;
                        if saw_coeff {
                            coeff = coeff * c;
                        } else {
                            coeff = c;
                            saw_coeff = true;
                        }
                        saw_factor = true;
                    }
                    _ => break,
                }
                skip_ws(&mut pos);
                if pos < bytes.len() && bytes[pos] == b'*' {
                    pos += 1;
                    continue;
                }
                break;
            }
            if !saw_factor {
                return Err(err(pos, "expected a term"));
            }
            if negative {
                coeff = T::zero() - coeff;
            }
            out.accumulate(MultiIndex::new(exps), coeff);
        }
        Ok(out)
    }
}

fn parse_u32(bytes: &[u8], pos: &mut usize) -> Option<u32> {
    let start = *pos;
    while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
        *pos += 1;
    }
    if *pos == start {
        return None;
    }
    std::str::from_utf8(&bytes[start..*pos]).ok()?.parse().ok()
}

/// Grab a numeric token: digits, '.', ratio '/', and exponent markers.
fn parse_number_token<'a>(bytes: &'a [u8], pos: &mut usize) -> &'a str {
    let start = *pos;
    let mut seen_ratio = false;
    while *pos < bytes.len() {
        match bytes[*pos] {
            b'0'..=b'9' | b'.' => *pos += 1,
            b'/' if !seen_ratio => {
                seen_ratio = true;
                *pos += 1;
            }
            b'e' | b'E' => {
                // exponent only if followed by digit or sign+digit
                let next = bytes.get(*pos + 1);
                let next2 = bytes.get(*pos + 2);
                match next {
                    Some(d) if d.is_ascii_digit() => {
                        *pos += 2;
                    }
                    Some(b'+') | Some(b'-') if next2.is_some_and(|d| d.is_ascii_digit()) => {
                        *pos += 3;
                    }
                    _ => break,
                }
                while *pos < bytes.len() && bytes[*pos].is_ascii_digit() {
                    *pos += 1;
                }
            }
            _ => break,
        }
    }
    std::str::from_utf8(&bytes[start..*pos]).unwrap()
}

impl<T: Scalar + CoeffText> fmt::Debug for Polynomial<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial[{:?}: {}]", self.scope, self)
    }
}
