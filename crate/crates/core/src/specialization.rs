//! The specialized family `A_l = D_l C^{s_l} = sum_alpha x_{l,alpha} E_{alpha, alpha+s_l}`
//! and the blocks `L_j: V_j -> V_{j+s}` of `L(A_1, ..., A_k)`.
//!
//! `V_j` is spanned by `E_{i,i+j}`, `i = 0..n-1`. Column `b` of `L_j` is the
//! image of `E_{b,b+j}` and row `a` the coefficient of `E_{a,a+j+s}`, where
//! `s = s_1 + ... + s_k`. The coefficient of a monomial `m` in entry
//! `(a, b)` is the signed Eulerian sum of `gr(m)_b` from `P_a`.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::commutator::operator_matrix;
use crate::error::{Error, Result};
use crate::field::{Rationals, Ring};
use crate::graphs::LabeledDigraph;
use crate::linalg::ExactMatrix;
use crate::par::{map_range, Execution};
use crate::poly::{Monomial, MultilinearPoly, PolyRing, Shape};

/// Exponent vector `(s_1, ..., s_k)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Exponents {
    s: Vec<i64>,
}

impl Exponents {
    /// `s_i = ceil(i/2)` and `s_{r+i} = -ceil(i/2)` for `i = 1..r`.
    pub fn canonical(r: usize) -> Result<Self> {
        if r == 0 {
            return Err(Error::InvalidArgument("r must be at least 1".into()));
        }
        let half: Vec<i64> = (1..=r as i64).map(|i| (i + 1) / 2).collect();
        let s = half.iter().copied().chain(half.iter().map(|&x| -x)).collect();
        Ok(Self { s })
    }

    /// Any exponent vector; used to exercise the general graph dictionary.
    pub fn custom(s: Vec<i64>) -> Result<Self> {
        if s.is_empty() {
            return Err(Error::InvalidArgument("need at least one exponent".into()));
        }
        Ok(Self { s })
    }

    pub fn k(&self) -> usize {
        self.s.len()
    }

    /// `k / 2`; meaningful for the canonical vectors.
    pub fn r(&self) -> usize {
        self.s.len() / 2
    }

    /// `s_l` for `l` in `1..=k`.
    pub fn s(&self, label: usize) -> i64 {
        self.s[label - 1]
    }

    pub fn values(&self) -> &[i64] {
        &self.s
    }

    pub fn sum(&self) -> i64 {
        self.s.iter().sum()
    }

    pub fn is_canonical(&self) -> bool {
        self.k() % 2 == 0 && Exponents::canonical(self.r()).is_ok_and(|c| c == *self)
    }

    /// Label of `e_{-i}`, i.e. `r + i`.
    pub fn neg_label(&self, i: usize) -> usize {
        self.r() + i
    }

    /// Displacements of labels `1..=k+1`, the last being `j`.
    pub fn displacement_table(&self, j: usize) -> Vec<i64> {
        let mut t = self.s.clone();
        t.push(j as i64);
        t
    }

    pub fn shape(&self, n: usize) -> Shape {
        Shape::new(self.k(), n)
    }
}

/// `C = sum_i E_{i,i+1}` (indices mod n).
pub fn cyclic_matrix<R: Ring>(ring: &R, n: usize) -> ExactMatrix<R::Elem> {
    ExactMatrix::from_fn(n, n, |i, j| if (i + 1) % n == j { ring.one() } else { ring.zero() })
}

fn modn(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

/// `A_l = sum_alpha x_{l,alpha} E_{alpha, alpha + s_l}` with symbolic entries.
pub fn build_a(label: usize, s: i64, shape: Shape) -> Result<ExactMatrix<MultilinearPoly<Rationals>>> {
    let n = shape.n;
    if label == 0 || label > shape.k {
        return Err(Error::LabelOutOfRange(label));
    }
    let mut m = ExactMatrix::filled(n, n, MultilinearPoly::zero(Rationals, shape));
    for alpha in 0..n {
        m.set(alpha, modn(alpha as i64 + s, n), MultilinearPoly::var(Rationals, shape, label, alpha)?);
    }
    Ok(m)
}

/// The graph `gr(m)`: edge `e_l` leaves `P_{alpha_l}`. The label table has
/// room for `e_{k+1}` with displacement `j`, which is left absent.
pub fn gr_of_monomial(m: &Monomial, n: usize, exps: &Exponents, j: usize) -> Result<LabeledDigraph> {
    let k = exps.k();
    let sources = m.sources(k).ok_or_else(|| {
        Error::LabelSetMismatch(m.pairs().iter().map(|p| p.0).collect(), (1..=k).collect())
    })?;
    let mut g = LabeledDigraph::empty(n, &exps.displacement_table(j))?;
    for (i, &src) in sources.iter().enumerate() {
        g.add_edge(i + 1, src)?;
    }
    Ok(g)
}

/// `mon(G) = x_{1,src(e_1)} ... x_{k,src(e_k)}`; `G` must carry exactly the
/// labels `1..=k` where `k + 1` is the size of its label table.
pub fn mon_of_graph(g: &LabeledDigraph) -> Result<Monomial> {
    let k = g.label_count().saturating_sub(1);
    let labels = g.labels();
    if labels != (1..=k).collect::<Vec<_>>() {
        return Err(Error::LabelSetMismatch(labels, (1..=k).collect()));
    }
    let sources: Vec<usize> = (1..=k).map(|l| g.source(l).unwrap()).collect();
    Ok(Monomial::from_sources(&sources))
}

/// The block `L_j` as an n x n matrix of polynomials with integer
/// coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockOperator {
    pub n: usize,
    pub j: usize,
    pub exponents: Exponents,
    pub body: ExactMatrix<MultilinearPoly<Rationals>>,
}

impl BlockOperator {
    pub fn shape(&self) -> Shape {
        self.exponents.shape(self.n)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "n": self.n,
            "j": self.j,
            "exponents": self.exponents.values(),
            "matrix": self.body.to_json_with(MultilinearPoly::to_json),
        })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |m: &str| Error::Parse(format!("block JSON: {m}"));
        let n = value.get("n").and_then(Value::as_u64).ok_or_else(|| bad("missing n"))? as usize;
        let j = value.get("j").and_then(Value::as_u64).ok_or_else(|| bad("missing j"))? as usize;
        let s: Vec<i64> = serde_json::from_value(value.get("exponents").cloned().unwrap_or(Value::Null))
            .map_err(|e| bad(&e.to_string()))?;
        let exponents = Exponents::custom(s)?;
        let shape = exponents.shape(n);
        let matrix = value.get("matrix").ok_or_else(|| bad("missing matrix"))?;
        let body = ExactMatrix::from_json_with(matrix, |v| MultilinearPoly::from_json(Rationals, shape, v))?;
        if body.rows() != n || body.cols() != n {
            return Err(bad("matrix is not n x n"));
        }
        Ok(Self { n, j, exponents, body })
    }
}

/// Possible start vertices for an Eulerian path, given out-in balances.
fn start_candidates(balance: &[i64], support: impl Fn() -> Vec<usize>) -> Vec<usize> {
    let mut plus = None;
    let mut minus = 0;
    for (v, &d) in balance.iter().enumerate() {
        match d {
            0 => {}
            1 if plus.is_none() => plus = Some(v),
            -1 if minus == 0 => minus = 1,
            _ => return Vec::new(),
        }
    }
    match (plus, minus) {
        (None, 0) => support(),
        (Some(a), 1) => vec![a],
        _ => Vec::new(),
    }
}

/// Nonzero coefficients contributed by one monomial: `(a, b, coefficient)`.
fn monomial_contributions(sources: &[usize], n: usize, exps: &Exponents, j: usize) -> Vec<(usize, usize, i128)> {
    let k = exps.k();
    let mut balance = vec![0i64; n];
    for (i, &src) in sources.iter().enumerate() {
        balance[src] += 1;
        balance[modn(src as i64 + exps.s(i + 1), n)] -= 1;
    }
    let mut g = LabeledDigraph::empty(n, &exps.displacement_table(j)).expect("n >= 1");
    for (i, &src) in sources.iter().enumerate() {
        g.add_edge(i + 1, src).expect("labels in range");
    }
    let mut out = Vec::new();
    for b in 0..n {
        let bj = (b + j) % n;
        balance[b] += 1;
        balance[bj] -= 1;
        let gb_support = || {
            let mut sup = g.support();
            sup.push(b);
            sup.push(bj);
            sup.sort_unstable();
            sup.dedup();
            sup
        };
        let starts = start_candidates(&balance, gb_support);
        balance[b] -= 1;
        balance[bj] += 1;
        if starts.is_empty() {
            continue;
        }
        let gb = g.with_edge(k + 1, b).expect("label k+1 is free");
        for a in starts {
            let c = gb.signed_sum(a);
            if c != 0 {
                out.push((a, b, c));
            }
        }
    }
    out
}

/// Build `L_j` entry by entry from signed Eulerian sums over all source
/// tuples `(alpha_1, ..., alpha_k)`.
pub fn block_lj_direct(n: usize, exps: &Exponents, j: usize, exec: Execution) -> Result<BlockOperator> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let j = j % n;
    let k = exps.k();
    let shape = exps.shape(n);
    // Split the tuple space by its first two coordinates for parallelism.
    let prefix_len = k.min(2);
    let prefixes = n.pow(prefix_len as u32);
    let rest = n.pow((k - prefix_len) as u32);
    let chunks = map_range(exec, prefixes, |p| {
        let mut found = Vec::new();
        let mut tuple = vec![0usize; k];
        for t in 0..rest {
            let mut x = p * rest + t;
            for slot in tuple.iter_mut().rev() {
                *slot = x % n;
                x /= n;
            }
            for (a, b, c) in monomial_contributions(&tuple, n, exps, j) {
                found.push((a, b, Monomial::from_sources(&tuple), c));
            }
        }
        found
    });
    let mut body = ExactMatrix::filled(n, n, MultilinearPoly::zero(Rationals, shape));
    let mut cells: Vec<Vec<(Monomial, num_rational::BigRational)>> = vec![Vec::new(); n * n];
    for (a, b, m, c) in chunks.into_iter().flatten() {
        cells[a * n + b].push((m, Rationals.from_i128(c)));
    }
    for (idx, terms) in cells.into_iter().enumerate() {
        body.set(idx / n, idx % n, MultilinearPoly::from_terms(Rationals, shape, terms));
    }
    Ok(BlockOperator {
        n,
        j,
        exponents: exps.clone(),
        body,
    })
}

/// `L(A_1, ..., A_k)` for the symbolic specialized matrices.
pub fn full_symbolic_operator(n: usize, exps: &Exponents) -> Result<ExactMatrix<MultilinearPoly<Rationals>>> {
    let shape = exps.shape(n);
    let mats = (1..=exps.k())
        .map(|l| build_a(l, exps.s(l), shape))
        .collect::<Result<Vec<_>>>()?;
    Ok(operator_matrix(&PolyRing::new(Rationals, shape), &mats)?.body)
}

/// All blocks `L_0, ..., L_{n-1}` read off the full symbolic operator. Any
/// nonzero entry outside the blocks is an error.
pub fn blocks_via_operator(n: usize, exps: &Exponents) -> Result<Vec<BlockOperator>> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be at least 1".into()));
    }
    let full = full_symbolic_operator(n, exps)?;
    let s = modn(exps.sum(), n);
    for row in 0..n * n {
        for col in 0..n * n {
            let (c, d) = (row / n, row % n);
            let (a, b) = (col / n, col % n);
            let in_block = (d + n - c) % n == (b + n - a + s) % n;
            if !in_block && !full.get(row, col).is_zero() {
                return Err(Error::OffBlockEntry { row, col });
            }
        }
    }
    Ok((0..n)
        .map(|j| BlockOperator {
            n,
            j,
            exponents: exps.clone(),
            body: ExactMatrix::from_fn(n, n, |a, b| {
                let row = a * n + (a + j + s) % n;
                let col = b * n + (b + j) % n;
                full.get(row, col).clone()
            }),
        })
        .collect())
}

pub fn block_lj_via_operator(n: usize, exps: &Exponents, j: usize) -> Result<BlockOperator> {
    let mut blocks = blocks_via_operator(n, exps)?;
    Ok(blocks.swap_remove(j % n))
}

trait FromI128 {
    fn from_i128(&self, v: i128) -> num_rational::BigRational;
}

impl FromI128 for Rationals {
    fn from_i128(&self, v: i128) -> num_rational::BigRational {
        num_rational::BigRational::from_integer(v.into())
    }
}
