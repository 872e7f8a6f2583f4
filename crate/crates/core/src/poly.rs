//! Sparse multilinear polynomials in the variables `x_{l,alpha}`, with the
//! group index `l` in `1..=k` and `alpha` in `Z/nZ`.
//!
//! A monomial takes at most one variable from each group. Products are only
//! defined between polynomials whose monomials use disjoint groups, so every
//! value stays multilinear by construction.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::field::{Field, Ring};

/// The ambient `(k, n)`: `k` variable groups of `n` variables each.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Shape {
    pub k: usize,
    pub n: usize,
}

impl Shape {
    pub fn new(k: usize, n: usize) -> Self {
        Self { k, n }
    }

    fn check(&self, other: &Shape) -> Result<()> {
        if self != other {
            return Err(Error::ShapeMismatch {
                expected_k: self.k,
                expected_n: self.n,
                got_k: other.k,
                got_n: other.n,
            });
        }
        Ok(())
    }
}

/// A product of variables from pairwise distinct groups, stored as
/// `(group, alpha)` pairs sorted by group.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(usize, usize)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn var(group: usize, alpha: usize) -> Self {
        Monomial(vec![(group, alpha)])
    }

    /// The full monomial `x_{1,alphas[0]} x_{2,alphas[1]} ...`.
    pub fn from_sources(alphas: &[usize]) -> Self {
        Monomial(alphas.iter().enumerate().map(|(i, &a)| (i + 1, a)).collect())
    }

    pub fn from_pairs(mut pairs: Vec<(usize, usize)>) -> Result<Self> {
        pairs.sort_unstable();
        if let Some(w) = pairs.windows(2).find(|w| w[0].0 == w[1].0) {
            return Err(Error::OverlappingGroups(w[0].0));
        }
        Ok(Monomial(pairs))
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.0
    }

    pub fn degree(&self) -> usize {
        self.0.len()
    }

    pub fn alpha(&self, group: usize) -> Option<usize> {
        self.0
            .binary_search_by_key(&group, |&(g, _)| g)
            .ok()
            .map(|i| self.0[i].1)
    }

    /// The source vector `(alpha_1, ..., alpha_k)` if every group `1..=k`
    /// occurs.
    pub fn sources(&self, k: usize) -> Option<Vec<usize>> {
        (self.0.len() == k && self.0.iter().enumerate().all(|(i, &(g, _))| g == i + 1))
            .then(|| self.0.iter().map(|&(_, a)| a).collect())
    }

    pub fn disjoint_mul(&self, other: &Monomial) -> Result<Monomial> {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => return Err(Error::OverlappingGroups(a[i].0)),
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Ok(Monomial(out))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return write!(f, "1");
        }
        for &(g, a) in &self.0 {
            write!(f, "x{g}{a}")?;
        }
        Ok(())
    }
}

/// A total assignment of field values to the `k * n` variables.
#[derive(Debug, Clone)]
pub struct Assignment<E> {
    shape: Shape,
    values: Vec<Option<E>>,
}

impl<E: Clone> Assignment<E> {
    pub fn empty(shape: Shape) -> Self {
        Self {
            shape,
            values: vec![None; shape.k * shape.n],
        }
    }

    pub fn from_fn(shape: Shape, mut f: impl FnMut(usize, usize) -> E) -> Self {
        let mut values = Vec::with_capacity(shape.k * shape.n);
        for g in 1..=shape.k {
            for a in 0..shape.n {
                values.push(Some(f(g, a)));
            }
        }
        Self { shape, values }
    }

    pub fn set(&mut self, group: usize, alpha: usize, value: E) -> Result<()> {
        let idx = self.index(group, alpha).ok_or_else(|| {
            Error::InvalidArgument(format!("variable x_({group},{alpha}) outside shape"))
        })?;
        self.values[idx] = Some(value);
        Ok(())
    }

    pub fn get(&self, group: usize, alpha: usize) -> Result<&E> {
        self.index(group, alpha)
            .and_then(|i| self.values[i].as_ref())
            .ok_or(Error::MissingVariable { group, alpha })
    }

    fn index(&self, group: usize, alpha: usize) -> Option<usize> {
        (group >= 1 && group <= self.shape.k && alpha < self.shape.n)
            .then(|| (group - 1) * self.shape.n + alpha)
    }
}

/// A sparse multilinear polynomial with coefficients in `F`.
#[derive(Debug, Clone)]
pub struct MultilinearPoly<F: Field> {
    field: F,
    shape: Shape,
    terms: BTreeMap<Monomial, F::Elem>,
}

impl<F: Field> PartialEq for MultilinearPoly<F> {
    fn eq(&self, other: &Self) -> bool {
        self.shape == other.shape && self.terms == other.terms
    }
}

impl<F: Field> MultilinearPoly<F> {
    pub fn zero(field: F, shape: Shape) -> Self {
        Self {
            field,
            shape,
            terms: BTreeMap::new(),
        }
    }

    pub fn constant(field: F, shape: Shape, c: F::Elem) -> Self {
        Self::term(field, shape, Monomial::one(), c)
    }

    pub fn var(field: F, shape: Shape, group: usize, alpha: usize) -> Result<Self> {
        if group == 0 || group > shape.k || alpha >= shape.n {
            return Err(Error::InvalidArgument(format!(
                "variable x_({group},{alpha}) outside shape (k={}, n={})",
                shape.k, shape.n
            )));
        }
        let one = field.one();
        Ok(Self::term(field, shape, Monomial::var(group, alpha), one))
    }

    /// A single term `c * m`; yields zero when `c` is zero.
    pub fn term(field: F, shape: Shape, m: Monomial, c: F::Elem) -> Self {
        let mut p = Self::zero(field, shape);
        if !p.field.is_zero(&c) {
            p.terms.insert(m, c);
        }
        p
    }

    /// Sums like terms and drops zero coefficients.
    pub fn from_terms(
        field: F,
        shape: Shape,
        terms: impl IntoIterator<Item = (Monomial, F::Elem)>,
    ) -> Self {
        let mut p = Self::zero(field, shape);
        for (m, c) in terms {
            p.add_term(m, &c);
        }
        p
    }

    pub fn field(&self) -> &F {
        &self.field
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &F::Elem)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> F::Elem {
        self.terms.get(m).cloned().unwrap_or_else(|| self.field.zero())
    }

    /// In-place `self += c * m`.
    pub fn add_term(&mut self, m: Monomial, c: &F::Elem) {
        if self.field.is_zero(c) {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c.clone());
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = self.field.add(o.get(), c);
                if self.field.is_zero(&s) {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c);
        }
        Ok(out)
    }

    pub fn neg(&self) -> Self {
        let f = &self.field;
        Self {
            field: f.clone(),
            shape: self.shape,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), f.neg(c))).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &F::Elem) -> Self {
        let f = &self.field;
        if f.is_zero(c) {
            return Self::zero(f.clone(), self.shape);
        }
        Self {
            field: f.clone(),
            shape: self.shape,
            terms: self
                .terms
                .iter()
                .map(|(m, v)| (m.clone(), f.mul(c, v)))
                .filter(|(_, v)| !f.is_zero(v))
                .collect(),
        }
    }

    /// Product of polynomials built from disjoint variable groups.
    pub fn disjoint_mul(&self, other: &Self) -> Result<Self> {
        self.shape.check(&other.shape)?;
        let mut out = Self::zero(self.field.clone(), self.shape);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = m1.disjoint_mul(m2)?;
                out.add_term(m, &self.field.mul(c1, c2));
            }
        }
        Ok(out)
    }

    pub fn eval(&self, assignment: &Assignment<F::Elem>) -> Result<F::Elem> {
        self.eval_into(&self.field, assignment)
    }

    /// Evaluate in another field `G`, mapping each coefficient through its
    /// rational value (characteristic 0) or its residue (same prime).
    pub fn eval_into<G: Field>(&self, target: &G, assignment: &Assignment<G::Elem>) -> Result<G::Elem> {
        assignment.shape.check(&self.shape)?;
        let mut acc = target.zero();
        for (m, c) in &self.terms {
            let mut v = self.map_coeff(target, c)?;
            for &(g, a) in m.pairs() {
                v = target.mul(&v, assignment.get(g, a)?);
            }
            target.add_assign(&mut acc, &v);
        }
        Ok(acc)
    }

    fn map_coeff<G: Field>(&self, target: &G, c: &F::Elem) -> Result<G::Elem> {
        let mapped = match self.field.to_rational(c) {
            Some(q) => target.from_rational(&q),
            None if target.characteristic() == self.field.characteristic() => {
                target.parse_elem(&self.field.format_elem(c)).ok()
            }
            None => None,
        };
        mapped.ok_or_else(|| {
            Error::InvalidArgument(format!(
                "coefficient {} has no image in characteristic {}",
                self.field.format_elem(c),
                target.characteristic()
            ))
        })
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let mono: Map<String, Value> = m
                    .pairs()
                    .iter()
                    .map(|&(g, a)| (g.to_string(), json!(a)))
                    .collect();
                json!({ "mono": mono, "coeff": self.field.format_elem(c) })
            })
            .collect();
        json!({ "terms": terms })
    }

    pub fn from_json(field: F, shape: Shape, value: &Value) -> Result<Self> {
        let bad = |msg: &str| Error::Parse(format!("polynomial JSON: {msg}"));
        let terms = value
            .get("terms")
            .and_then(Value::as_array)
            .ok_or_else(|| bad("missing \"terms\" array"))?;
        let mut out = Self::zero(field.clone(), shape);
        for t in terms {
            let mono = t
                .get("mono")
                .and_then(Value::as_object)
                .ok_or_else(|| bad("term without \"mono\" object"))?;
            let mut pairs = Vec::with_capacity(mono.len());
            for (g, a) in mono {
                let g: usize = g.parse().map_err(|_| bad("non-numeric group key"))?;
                let a = a.as_u64().ok_or_else(|| bad("non-integer source"))? as usize;
                if g == 0 || g > shape.k || a >= shape.n {
                    return Err(bad(&format!("variable x_({g},{a}) outside shape")));
                }
                pairs.push((g, a));
            }
            let coeff = match t.get("coeff") {
                Some(Value::String(s)) => field.parse_elem(s)?,
                Some(Value::Number(num)) => field.parse_elem(&num.to_string())?,
                _ => return Err(bad("term without \"coeff\"")),
            };
            out.add_term(Monomial::from_pairs(pairs)?, &coeff);
        }
        Ok(out)
    }

    /// Human-readable form such as `x11x22 - x12x20`.
    pub fn render(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let one = self.field.one();
        let minus_one = self.field.neg(&one);
        let mut s = String::new();
        for (i, (m, c)) in self.terms.iter().enumerate() {
            let (neg, body) = if *c == minus_one && self.field.characteristic() != 2 {
                (true, None)
            } else if *c == one {
                (false, None)
            } else {
                let txt = self.field.format_elem(c);
                match txt.strip_prefix('-') {
                    Some(rest) => (true, Some(rest.trim_end_matches("/1").to_string())),
                    None => (false, Some(txt.trim_end_matches("/1").to_string())),
                }
            };
            if i > 0 {
                s.push_str(if neg { " - " } else { " + " });
            } else if neg {
                s.push('-');
            }
            match (body, m.degree()) {
                (Some(b), 0) => s.push_str(&b),
                (Some(b), _) => s.push_str(&format!("{b}*{m}")),
                (None, _) => s.push_str(&m.to_string()),
            }
        }
        s
    }
}

/// Multilinear polynomials viewed as a ring, so they can be used as matrix
/// entries. Multiplication requires disjoint variable groups and panics
/// otherwise; all products formed by this crate satisfy that.
#[derive(Debug, Clone)]
pub struct PolyRing<F: Field> {
    pub field: F,
    pub shape: Shape,
}

impl<F: Field> PolyRing<F> {
    pub fn new(field: F, shape: Shape) -> Self {
        Self { field, shape }
    }
}

impl<F: Field> Ring for PolyRing<F> {
    type Elem = MultilinearPoly<F>;

    fn zero(&self) -> Self::Elem {
        MultilinearPoly::zero(self.field.clone(), self.shape)
    }

    fn one(&self) -> Self::Elem {
        MultilinearPoly::constant(self.field.clone(), self.shape, self.field.one())
    }

    fn from_i64(&self, v: i64) -> Self::Elem {
        MultilinearPoly::constant(self.field.clone(), self.shape, self.field.from_i64(v))
    }

    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.add(b).expect("polynomials of one ring share a shape")
    }

    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        a.sub(b).expect("polynomials of one ring share a shape")
    }

    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem {
        if a.is_zero() || b.is_zero() {
            return self.zero();
        }
        a.disjoint_mul(b)
            .expect("multilinear product requires disjoint variable groups")
    }

    fn neg(&self, a: &Self::Elem) -> Self::Elem {
        a.neg()
    }

    fn is_zero(&self, a: &Self::Elem) -> bool {
        a.is_zero()
    }

    fn add_assign(&self, a: &mut Self::Elem, b: &Self::Elem) {
        for (m, c) in b.terms() {
            a.add_term(m.clone(), c);
        }
    }
}
