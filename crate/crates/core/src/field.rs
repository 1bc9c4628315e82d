//! Prime-field arithmetic and linear algebra over GF(q).

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FieldError {
    #[error("{0} is not a prime")]
    NotPrime(u64),
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("moduli differ: {0} vs {1}")]
    ModulusMismatch(u64, u64),
    #[error("entry {value} is not reduced modulo {q}")]
    ValueOutOfRange { value: u64, q: u64 },
}

pub fn is_prime(q: u64) -> bool {
    if q < 2 {
        return false;
    }
    let mut p = 2u64;
    while p.saturating_mul(p) <= q {
        if q.is_multiple_of(p) {
            return false;
        }
        p += 1;
    }
    true
}

/// Smallest prime strictly greater than `n`.
pub fn smallest_prime_above(n: u64) -> u64 {
    (n + 1..)
        .find(|&p| is_prime(p))
        .expect("primes are unbounded")
}

pub fn add_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 + b as u128) % q as u128) as u64
}

pub fn sub_mod(a: u64, b: u64, q: u64) -> u64 {
    add_mod(a, q - b % q, q)
}

pub fn mul_mod(a: u64, b: u64, q: u64) -> u64 {
    ((a as u128 * b as u128) % q as u128) as u64
}

pub fn pow_mod(mut a: u64, mut e: u64, q: u64) -> u64 {
    let mut acc = 1 % q;
    a %= q;
    while e > 0 {
        if e & 1 == 1 {
            acc = mul_mod(acc, a, q);
        }
        a = mul_mod(a, a, q);
        e >>= 1;
    }
    acc
}

/// Multiplicative inverse of a nonzero element of a prime field.
pub fn inv_mod(a: u64, q: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(q), "zero has no inverse");
    pow_mod(a, q - 2, q)
}

/// An element of GF(q).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct FieldElem {
    value: u64,
    modulus: u64,
}

impl FieldElem {
    pub fn new(value: u64, modulus: u64) -> Result<Self, FieldError> {
        if !is_prime(modulus) {
            return Err(FieldError::NotPrime(modulus));
        }
        Ok(FieldElem {
            value: value % modulus,
            modulus,
        })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn modulus(self) -> u64 {
        self.modulus
    }

    pub fn is_zero(self) -> bool {
        self.value == 0
    }

    pub fn inverse(self) -> Option<FieldElem> {
        (!self.is_zero()).then(|| FieldElem {
            value: inv_mod(self.value, self.modulus),
            modulus: self.modulus,
        })
    }

    fn with(self, other: FieldElem, value: u64) -> FieldElem {
        assert_eq!(self.modulus, other.modulus, "mixed moduli");
        FieldElem {
            value,
            modulus: self.modulus,
        }
    }
}

impl Add for FieldElem {
    type Output = FieldElem;
    fn add(self, rhs: FieldElem) -> FieldElem {
        self.with(rhs, add_mod(self.value, rhs.value, self.modulus))
    }
}

impl Sub for FieldElem {
    type Output = FieldElem;
    fn sub(self, rhs: FieldElem) -> FieldElem {
        self.with(rhs, sub_mod(self.value, rhs.value, self.modulus))
    }
}

impl Mul for FieldElem {
    type Output = FieldElem;
    fn mul(self, rhs: FieldElem) -> FieldElem {
        self.with(rhs, mul_mod(self.value, rhs.value, self.modulus))
    }
}

impl Neg for FieldElem {
    type Output = FieldElem;
    fn neg(self) -> FieldElem {
        FieldElem {
            value: sub_mod(0, self.value, self.modulus),
            modulus: self.modulus,
        }
    }
}

impl fmt::Display for FieldElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

/// Dense row-major matrix over GF(q). Entries are stored reduced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "FieldMatrixJson", into = "FieldMatrixJson")]
pub struct FieldMatrix {
    q: u64,
    rows: usize,
    cols: usize,
    entries: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
struct FieldMatrixJson {
    q: u64,
    rows: usize,
    cols: usize,
    entries: Vec<Vec<u64>>,
}

impl TryFrom<FieldMatrixJson> for FieldMatrix {
    type Error = FieldError;

    fn try_from(j: FieldMatrixJson) -> Result<Self, Self::Error> {
        if j.entries.len() != j.rows {
            return Err(FieldError::DimensionMismatch {
                expected: j.rows,
                found: j.entries.len(),
            });
        }
        FieldMatrix::from_rows(j.q, j.cols, j.entries)
    }
}

impl From<FieldMatrix> for FieldMatrixJson {
    fn from(m: FieldMatrix) -> Self {
        FieldMatrixJson {
            q: m.q,
            rows: m.rows,
            cols: m.cols,
            entries: (0..m.rows).map(|r| m.row(r).to_vec()).collect(),
        }
    }
}

impl FieldMatrix {
    pub fn zeros(q: u64, rows: usize, cols: usize) -> Self {
        FieldMatrix {
            q,
            rows,
            cols,
            entries: vec![0; rows * cols],
        }
    }

    pub fn identity(q: u64, n: usize) -> Self {
        let mut m = Self::zeros(q, n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    /// Rows must have length `cols` and entries must already be reduced.
    pub fn from_rows(q: u64, cols: usize, rows: Vec<Vec<u64>>) -> Result<Self, FieldError> {
        if !is_prime(q) {
            return Err(FieldError::NotPrime(q));
        }
        let n = rows.len();
        let mut entries = Vec::with_capacity(n * cols);
        for row in rows {
            if row.len() != cols {
                return Err(FieldError::DimensionMismatch {
                    expected: cols,
                    found: row.len(),
                });
            }
            if let Some(&value) = row.iter().find(|&&v| v >= q) {
                return Err(FieldError::ValueOutOfRange { value, q });
            }
            entries.extend(row);
        }
        Ok(FieldMatrix {
            q,
            rows: n,
            cols,
            entries,
        })
    }

    pub fn q(&self) -> u64 {
        self.q
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> u64 {
        self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: u64) {
        self.entries[r * self.cols + c] = v % self.q;
    }

    pub fn row(&self, r: usize) -> &[u64] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<u64>> {
        (0..self.rows).map(|r| self.row(r).to_vec()).collect()
    }

    pub fn push_row(&mut self, row: &[u64]) -> Result<(), FieldError> {
        if row.len() != self.cols {
            return Err(FieldError::DimensionMismatch {
                expected: self.cols,
                found: row.len(),
            });
        }
        self.entries.extend(row.iter().map(|v| v % self.q));
        self.rows += 1;
        Ok(())
    }

    /// Stacks matrices vertically. All must share `q` and the column count.
    pub fn vstack<'a, I>(q: u64, cols: usize, parts: I) -> Result<FieldMatrix, FieldError>
    where
        I: IntoIterator<Item = &'a FieldMatrix>,
    {
        let mut out = FieldMatrix::zeros(q, 0, cols);
        for p in parts {
            if p.q != q {
                return Err(FieldError::ModulusMismatch(q, p.q));
            }
            if p.cols != cols {
                return Err(FieldError::DimensionMismatch {
                    expected: cols,
                    found: p.cols,
                });
            }
            out.entries.extend_from_slice(&p.entries);
            out.rows += p.rows;
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[u64]) -> Result<Vec<u64>, FieldError> {
        if x.len() != self.cols {
            return Err(FieldError::DimensionMismatch {
                expected: self.cols,
                found: x.len(),
            });
        }
        Ok((0..self.rows)
            .map(|r| {
                self.row(r).iter().zip(x).fold(0, |acc, (&a, &b)| {
                    add_mod(acc, mul_mod(a, b, self.q), self.q)
                })
            })
            .collect())
    }

    pub fn rank(&self) -> usize {
        Echelon::from_rows(self.q, self.cols, (0..self.rows).map(|r| self.row(r))).rank()
    }

    /// Unique solution of `self · x = b` for square nonsingular `self`; `None`
    /// when singular.
    pub fn solve_square(&self, b: &[u64]) -> Option<Vec<u64>> {
        let n = self.rows;
        if self.cols != n || b.len() != n {
            return None;
        }
        let q = self.q;
        let mut aug: Vec<Vec<u64>> = (0..n)
            .map(|r| {
                let mut row = self.row(r).to_vec();
                row.push(b[r] % q);
                row
            })
            .collect();
        for col in 0..n {
            let p = (col..n).find(|&r| aug[r][col] != 0)?;
            aug.swap(col, p);
            let inv = inv_mod(aug[col][col], q);
            for x in aug[col].iter_mut() {
                *x = mul_mod(*x, inv, q);
            }
            let pivot = aug[col].clone();
            for (r, row) in aug.iter_mut().enumerate() {
                if r != col && row[col] != 0 {
                    let f = row[col];
                    for (x, &p) in row.iter_mut().zip(&pivot) {
                        *x = sub_mod(*x, mul_mod(f, p, q), q);
                    }
                }
            }
        }
        Some(aug.into_iter().map(|r| r[n]).collect())
    }
}

/// Rank over GF(q) by Gaussian elimination.
pub fn ff_rank(m: &FieldMatrix) -> usize {
    m.rank()
}

/// Row-echelon basis of a row space, supporting membership tests.
#[derive(Debug, Clone)]
struct Echelon {
    q: u64,
    cols: usize,
    /// Rows normalized to a leading 1 at `pivots[i]`.
    rows: Vec<Vec<u64>>,
    pivots: Vec<usize>,
}

impl Echelon {
    fn new(q: u64, cols: usize) -> Self {
        Echelon {
            q,
            cols,
            rows: Vec::new(),
            pivots: Vec::new(),
        }
    }

    fn from_rows<'a, I: IntoIterator<Item = &'a [u64]>>(q: u64, cols: usize, rows: I) -> Self {
        let mut e = Echelon::new(q, cols);
        for r in rows {
            e.insert(r);
        }
        e
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }

    fn reduce(&self, v: &[u64]) -> Vec<u64> {
        let q = self.q;
        let mut v = v.to_vec();
        for (row, &p) in self.rows.iter().zip(&self.pivots) {
            let f = v[p];
            if f != 0 {
                for (x, &y) in v.iter_mut().zip(row) {
                    *x = sub_mod(*x, mul_mod(f, y, q), q);
                }
            }
        }
        v
    }

    fn is_independent(&self, v: &[u64]) -> bool {
        self.reduce(v).iter().any(|&x| x != 0)
    }

    /// Adds `v` to the span; returns false when it was already contained.
    fn insert(&mut self, v: &[u64]) -> bool {
        debug_assert_eq!(v.len(), self.cols);
        let mut r = self.reduce(v);
        let Some(p) = r.iter().position(|&x| x != 0) else {
            return false;
        };
        let inv = inv_mod(r[p], self.q);
        for x in r.iter_mut() {
            *x = mul_mod(*x, inv, self.q);
        }
        // keep existing rows reduced at the new pivot so `reduce` stays a single pass
        for row in self.rows.iter_mut() {
            let f = row[p];
            if f != 0 {
                for (x, &y) in row.iter_mut().zip(&r) {
                    *x = sub_mod(*x, mul_mod(f, y, self.q), self.q);
                }
            }
        }
        self.rows.push(r);
        self.pivots.push(p);
        true
    }
}

fn check_basis(q: u64, n: usize, basis: &FieldMatrix, what: &str) -> Result<(), FieldError> {
    if basis.q() != q {
        return Err(FieldError::ModulusMismatch(q, basis.q()));
    }
    if basis.cols() != n {
        return Err(FieldError::DimensionMismatch {
            expected: n,
            found: basis.cols(),
        });
    }
    if basis.rank() != basis.rows() {
        return Err(FieldError::PreconditionViolated(format!(
            "{what} rows are dependent"
        )));
    }
    Ok(())
}

/// First vector `b ∈ GF(q)^n` in lexicographic order (first coordinate most
/// significant) such that `prior ∪ basis_i ∪ {b}` is independent for every
/// basis. Existence needs `q > bases.len()` and `|prior| + |basis_i| + 1 ≤ n`.
pub fn avoid_subspaces(
    q: u64,
    n: usize,
    bases: &[FieldMatrix],
    prior: &FieldMatrix,
) -> Result<Vec<u64>, FieldError> {
    if !is_prime(q) {
        return Err(FieldError::NotPrime(q));
    }
    if q <= bases.len() as u64 {
        return Err(FieldError::PreconditionViolated(format!(
            "field size {q} must exceed the number of subspaces {}",
            bases.len()
        )));
    }
    check_basis(q, n, prior, "prior")?;
    let mut spans = Vec::with_capacity(bases.len().max(1));
    for (i, basis) in bases.iter().enumerate() {
        check_basis(q, n, basis, &format!("basis {i}"))?;
        if prior.rows() + basis.rows() + 1 > n {
            return Err(FieldError::PreconditionViolated(format!(
                "{} prior rows + {} basis rows + 1 exceeds dimension {n}",
                prior.rows(),
                basis.rows()
            )));
        }
        let span = Echelon::from_rows(
            q,
            n,
            (0..prior.rows())
                .map(|r| prior.row(r))
                .chain((0..basis.rows()).map(|r| basis.row(r))),
        );
        if span.rank() != prior.rows() + basis.rows() {
            return Err(FieldError::PreconditionViolated(format!(
                "prior rows and basis {i} are dependent"
            )));
        }
        spans.push(span);
    }
    if bases.is_empty() {
        if prior.rows() + 1 > n {
            return Err(FieldError::PreconditionViolated(format!(
                "{} prior rows + 1 exceeds dimension {n}",
                prior.rows()
            )));
        }
        spans.push(Echelon::from_rows(
            q,
            n,
            (0..prior.rows()).map(|r| prior.row(r)),
        ));
    }
    let mut candidate = vec![0u64; n];
    while advance(&mut candidate, q) {
        if spans.iter().all(|s| s.is_independent(&candidate)) {
            return Ok(candidate);
        }
    }
    Err(FieldError::PreconditionViolated(
        "no vector avoids every subspace".into(),
    ))
}

/// Odometer increment, last coordinate fastest. Returns false on wrap-around.
fn advance(v: &mut [u64], q: u64) -> bool {
    for x in v.iter_mut().rev() {
        *x += 1;
        if *x < q {
            return true;
        }
        *x = 0;
    }
    false
}

/// `d` independent rows spanning a subspace `V` with
/// `dim(V ⊕ V_i) = d + dim(V_i)` for every given basis of `V_i`.
pub fn build_subspace(
    q: u64,
    n: usize,
    d: usize,
    bases: &[FieldMatrix],
) -> Result<FieldMatrix, FieldError> {
    let mut v = FieldMatrix::zeros(q, 0, n);
    for _ in 0..d {
        let b = avoid_subspaces(q, n, bases, &v)?;
        v.push_row(&b)?;
    }
    Ok(v)
}
