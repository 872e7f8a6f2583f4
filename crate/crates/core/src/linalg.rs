//! Dense exact linear algebra: rank, nullity and determinant over the
//! rationals and GF(p), and rank of polynomial matrices over the field of
//! rational functions.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::field::{Field, PrimeField, Rationals, Ring, DEFAULT_PRIME};
use crate::par::{map_range, Execution};
use crate::poly::{Assignment, MultilinearPoly};
use crate::rng::trial_rng;

/// A dense row-major matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExactMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<T>,
}

impl<T: Clone> ExactMatrix<T> {
    pub fn new(rows: usize, cols: usize, entries: Vec<T>) -> Result<Self> {
        if entries.len() != rows * cols {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {rows}x{cols} matrix",
                entries.len()
            )));
        }
        Ok(Self { rows, cols, entries })
    }

    pub fn from_rows(rows: Vec<Vec<T>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        Ok(Self {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                entries.push(f(i, j));
            }
        }
        Self { rows, cols, entries }
    }

    pub fn filled(rows: usize, cols: usize, value: T) -> Self {
        Self {
            rows,
            cols,
            entries: vec![value; rows * cols],
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &T {
        &self.entries[i * self.cols + j]
    }

    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.entries[i * self.cols + j] = value;
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<T>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    pub fn map<U>(&self, f: impl FnMut(&T) -> U) -> ExactMatrix<U> {
        ExactMatrix {
            rows: self.rows,
            cols: self.cols,
            entries: self.entries.iter().map(f).collect(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.get(j, i).clone())
    }

    /// Row-major nested JSON arrays.
    pub fn to_json_with(&self, mut f: impl FnMut(&T) -> Value) -> Value {
        Value::Array(
            (0..self.rows)
                .map(|i| Value::Array(self.row(i).iter().map(&mut f).collect()))
                .collect(),
        )
    }

    pub fn from_json_with(value: &Value, mut f: impl FnMut(&Value) -> Result<T>) -> Result<Self> {
        let rows = value
            .as_array()
            .ok_or_else(|| Error::Parse("matrix JSON must be an array of rows".into()))?;
        let parsed = rows
            .iter()
            .map(|row| {
                row.as_array()
                    .ok_or_else(|| Error::Parse("matrix row must be an array".into()))?
                    .iter()
                    .map(&mut f)
                    .collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_rows(parsed)
    }
}

impl<T: Clone + Serialize> Serialize for ExactMatrix<T> {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de, T: Clone + Deserialize<'de>> Deserialize<'de> for ExactMatrix<T> {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = Vec::<Vec<T>>::deserialize(d)?;
        Self::from_rows(rows).map_err(serde::de::Error::custom)
    }
}

/// Matrix product over a ring.
pub fn mat_mul<R: Ring>(ring: &R, a: &ExactMatrix<R::Elem>, b: &ExactMatrix<R::Elem>) -> Result<ExactMatrix<R::Elem>> {
    if a.cols != b.rows {
        return Err(Error::DimensionMismatch(format!(
            "cannot multiply {}x{} by {}x{}",
            a.rows, a.cols, b.rows, b.cols
        )));
    }
    let mut out = ExactMatrix::filled(a.rows, b.cols, ring.zero());
    for i in 0..a.rows {
        for l in 0..a.cols {
            let x = a.get(i, l);
            if ring.is_zero(x) {
                continue;
            }
            for j in 0..b.cols {
                let y = b.get(l, j);
                if ring.is_zero(y) {
                    continue;
                }
                let idx = i * out.cols + j;
                let p = ring.mul(x, y);
                ring.add_assign(&mut out.entries[idx], &p);
            }
        }
    }
    Ok(out)
}

/// Fields with an exact elimination routine.
pub trait LinearAlgebra: Field {
    fn rank(&self, m: &ExactMatrix<Self::Elem>) -> usize;
    fn det(&self, m: &ExactMatrix<Self::Elem>) -> Result<Self::Elem>;
}

pub fn rank<F: LinearAlgebra>(field: &F, m: &ExactMatrix<F::Elem>) -> usize {
    field.rank(m)
}

pub fn nullity<F: LinearAlgebra>(field: &F, m: &ExactMatrix<F::Elem>) -> usize {
    m.cols - field.rank(m)
}

pub fn det<F: LinearAlgebra>(field: &F, m: &ExactMatrix<F::Elem>) -> Result<F::Elem> {
    field.det(m)
}

impl LinearAlgebra for Rationals {
    fn rank(&self, m: &ExactMatrix<BigRational>) -> usize {
        bareiss_rank(clear_denominators(m).0)
    }

    fn det(&self, m: &ExactMatrix<BigRational>) -> Result<BigRational> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        let (ints, scale) = clear_denominators(m);
        Ok(BigRational::new(bareiss_det(ints), scale))
    }
}

impl LinearAlgebra for PrimeField {
    fn rank(&self, m: &ExactMatrix<u64>) -> usize {
        gauss(self, m).0
    }

    fn det(&self, m: &ExactMatrix<u64>) -> Result<u64> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
        }
        Ok(gauss(self, m).1)
    }
}

/// Scale each row by the lcm of its denominators. Returns the integer rows
/// and the product of the scale factors.
fn clear_denominators(m: &ExactMatrix<BigRational>) -> (Vec<Vec<BigInt>>, BigInt) {
    let mut total = BigInt::one();
    let rows = (0..m.rows)
        .map(|i| {
            let row = m.row(i);
            let l = row.iter().fold(BigInt::one(), |acc, q| acc.lcm(q.denom()));
            total *= &l;
            row.iter()
                .map(|q| q.numer() * (&l / q.denom()))
                .collect()
        })
        .collect();
    (rows, total)
}

/// Rank of an integer matrix by fraction-free elimination; pivots are the
/// first nonzero entry in column order.
pub fn bareiss_rank(mut a: Vec<Vec<BigInt>>) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = BigInt::one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for jj in c + 1..cols {
                let v = (&a[r][c] * &a[i][jj] - &a[i][c] * &a[r][jj]) / &prev;
                a[i][jj] = v;
            }
            a[i][c] = BigInt::zero();
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}

/// Determinant of a square integer matrix by Bareiss elimination.
pub fn bareiss_det(mut a: Vec<Vec<BigInt>>) -> BigInt {
    let n = a.len();
    if n == 0 {
        return BigInt::one();
    }
    let mut prev = BigInt::one();
    let mut negate = false;
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !a[i][c].is_zero()) else {
            return BigInt::zero();
        };
        if p != c {
            a.swap(c, p);
            negate = !negate;
        }
        for i in c + 1..n {
            for jj in c + 1..n {
                let v = (&a[c][c] * &a[i][jj] - &a[i][c] * &a[c][jj]) / &prev;
                a[i][jj] = v;
            }
        }
        prev = a[c][c].clone();
    }
    if negate {
        -prev
    } else {
        prev
    }
}

/// Gaussian elimination over GF(p): (rank, determinant-if-square).
fn gauss(f: &PrimeField, m: &ExactMatrix<u64>) -> (usize, u64) {
    let (rows, cols) = (m.rows, m.cols);
    let mut a = m.to_rows();
    let mut det = f.one();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| a[i][c] != 0) else {
            det = 0;
            continue;
        };
        if p != r {
            a.swap(r, p);
            det = f.neg(&det);
        }
        det = f.mul(&det, &a[r][c]);
        let inv = f.inv(&a[r][c]).expect("pivot is nonzero");
        for i in r + 1..rows {
            if a[i][c] == 0 {
                continue;
            }
            let factor = f.mul(&a[i][c], &inv);
            for jj in c..cols {
                let t = f.mul(&factor, &a[r][jj]);
                a[i][jj] = f.sub(&a[i][jj], &t);
            }
        }
        r += 1;
    }
    if r < rows.min(cols) || rows != cols {
        det = 0;
    }
    (r, det)
}

/// Exact rank of an integer matrix.
pub fn rank_int(m: &ExactMatrix<i64>) -> usize {
    bareiss_rank(m.to_rows().into_iter().map(|r| r.into_iter().map(BigInt::from).collect()).collect())
}

pub fn nullity_int(m: &ExactMatrix<i64>) -> usize {
    m.cols - rank_int(m)
}

pub fn det_int(m: &ExactMatrix<BigInt>) -> Result<BigInt> {
    if !m.is_square() {
        return Err(Error::NotSquare { rows: m.rows, cols: m.cols });
    }
    Ok(bareiss_det(m.to_rows()))
}

/// How `rank_poly_matrix` computes the rank over the rational function
/// field.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum RankStrategy {
    /// Fraction-free elimination on the polynomial entries; desk scale only.
    Exact,
    /// Maximum rank over `trials` random points of GF(`prime`).
    Randomized { trials: usize, seed: u64, prime: u64 },
}

impl RankStrategy {
    pub fn randomized(trials: usize, seed: u64) -> Self {
        RankStrategy::Randomized {
            trials,
            seed,
            prime: DEFAULT_PRIME,
        }
    }
}

impl Default for RankStrategy {
    fn default() -> Self {
        Self::randomized(3, 0)
    }
}

/// A rank value together with the kind of guarantee behind it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RankEstimate {
    pub rank: usize,
    pub cols: usize,
    /// `false` for randomized evaluation: the value is then a lower bound on
    /// the true rank (and the implied nullity an upper-side estimate).
    pub exact: bool,
}

impl RankEstimate {
    pub fn nullity(&self) -> usize {
        self.cols - self.rank
    }
}

/// Rank of a matrix of polynomials, as a matrix over the field of rational
/// functions in the `x_{l,alpha}`.
pub fn rank_poly_matrix<F: Field>(
    m: &ExactMatrix<MultilinearPoly<F>>,
    strategy: RankStrategy,
    exec: Execution,
) -> Result<RankEstimate> {
    let shape = match m.entries.first() {
        Some(p) => p.shape(),
        None => {
            return Ok(RankEstimate {
                rank: 0,
                cols: m.cols,
                exact: true,
            })
        }
    };
    if let Some(p) = m.entries.iter().find(|p| p.shape() != shape) {
        return Err(Error::ShapeMismatch {
            expected_k: shape.k,
            expected_n: shape.n,
            got_k: p.shape().k,
            got_n: p.shape().n,
        });
    }
    match strategy {
        RankStrategy::Exact => {
            let field = m.entries[0].field().clone();
            let nvars = shape.k * shape.n;
            let rows = (0..m.rows)
                .map(|i| {
                    m.row(i)
                        .iter()
                        .map(|p| GPoly::from_multilinear(p, &field, shape.n, nvars))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(RankEstimate {
                rank: gpoly_bareiss_rank(rows, nvars),
                cols: m.cols,
                exact: true,
            })
        }
        RankStrategy::Randomized { trials, seed, prime } => {
            if trials == 0 {
                return Err(Error::InvalidArgument("randomized rank needs at least one trial".into()));
            }
            let gf = PrimeField::new(prime)?;
            let ranks = map_range(exec, trials, |t| -> Result<usize> {
                let mut rng = trial_rng(seed, t as u64);
                let asg = Assignment::from_fn(shape, |_, _| gf.random_elem(&mut rng));
                let mut vals = Vec::with_capacity(m.entries.len());
                for p in &m.entries {
                    vals.push(p.eval_into(&gf, &asg)?);
                }
                Ok(gf.rank(&ExactMatrix::new(m.rows, m.cols, vals)?))
            });
            let rank = ranks.into_iter().collect::<Result<Vec<_>>>()?.into_iter().max().unwrap_or(0);
            Ok(RankEstimate {
                rank,
                cols: m.cols,
                exact: false,
            })
        }
    }
}

/// General sparse polynomial with rational coefficients; exponent vectors
/// compared lexicographically. Only used inside exact polynomial
/// elimination, where Bareiss needs true products and exact quotients.
#[derive(Debug, Clone, PartialEq)]
struct GPoly {
    terms: BTreeMap<Vec<u8>, BigRational>,
}

impl GPoly {
    fn from_multilinear<F: Field>(p: &MultilinearPoly<F>, field: &F, n: usize, nvars: usize) -> Result<Self> {
        let mut terms = BTreeMap::new();
        for (m, c) in p.terms() {
            let q = field.to_rational(c).ok_or_else(|| {
                Error::InvalidArgument("exact polynomial rank needs characteristic-0 coefficients".into())
            })?;
            let mut e = vec![0u8; nvars];
            for &(g, a) in m.pairs() {
                e[(g - 1) * n + a] += 1;
            }
            terms.insert(e, q);
        }
        Ok(Self { terms })
    }

    fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    fn add_term(&mut self, e: Vec<u8>, c: BigRational) {
        use std::collections::btree_map::Entry;
        match self.terms.entry(e) {
            Entry::Vacant(v) => {
                if !c.is_zero() {
                    v.insert(c);
                }
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn mul(&self, other: &Self) -> Self {
        let mut out = GPoly { terms: BTreeMap::new() };
        for (e1, c1) in &self.terms {
            for (e2, c2) in &other.terms {
                let e = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                out.add_term(e, c1 * c2);
            }
        }
        out
    }

    fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (e, c) in &other.terms {
            out.add_term(e.clone(), -c);
        }
        out
    }

    /// `self / d`, assuming the division is exact.
    fn exact_div(&self, d: &Self) -> Self {
        let (de, dc) = d.terms.iter().next_back().expect("division by zero polynomial");
        let mut rem = self.clone();
        let mut q = GPoly { terms: BTreeMap::new() };
        while let Some((re, rc)) = rem.terms.iter().next_back() {
            let e: Vec<u8> = re
                .iter()
                .zip(de)
                .map(|(a, b)| a.checked_sub(*b).expect("inexact polynomial division"))
                .collect();
            let c = rc / dc;
            let t = GPoly {
                terms: BTreeMap::from([(e.clone(), c.clone())]),
            };
            rem = rem.sub(&t.mul(d));
            q.add_term(e, c);
        }
        q
    }
}

fn gpoly_bareiss_rank(mut a: Vec<Vec<GPoly>>, nvars: usize) -> usize {
    let rows = a.len();
    let cols = a.first().map_or(0, Vec::len);
    let mut prev = GPoly {
        terms: BTreeMap::from([(vec![0u8; nvars], BigRational::one())]),
    };
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            continue;
        };
        a.swap(r, p);
        for i in r + 1..rows {
            for jj in c + 1..cols {
                let num = a[r][c].mul(&a[i][jj]).sub(&a[i][c].mul(&a[r][jj]));
                a[i][jj] = if num.is_zero() { num } else { num.exact_div(&prev) };
            }
            a[i][c] = GPoly { terms: BTreeMap::new() };
        }
        prev = a[r][c].clone();
        r += 1;
    }
    r
}
