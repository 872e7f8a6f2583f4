//! Orders on vertices, labeled edges, graphs and monomials; initial
//! coefficient matrices; the universes `U(a, j, I)`; the flowers `H_t`; and
//! the maximal graph of `U(a, j)`.
//!
//! Vertices are ranked `P_0 > P_{-1} > P_1 > P_{-2} > P_2 > ...`, reading
//! residues through their representatives in
//! `[-ceil((n-1)/2), floor((n-1)/2)]`. An edge is ranked by the unordered
//! pair of its endpoints (larger endpoint first), ties going to the smaller
//! label. Graphs on one label set compare by their edge keys sorted in
//! descending order, lexicographically.

use std::cmp::Ordering;
use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graphs::LabeledDigraph;
use crate::linalg::ExactMatrix;
use crate::par::{map_range, Execution};
use crate::poly::Monomial;
use crate::specialization::{gr_of_monomial, BlockOperator, Exponents};

/// Representative of `v` in `[-ceil((n-1)/2), floor((n-1)/2)]`.
pub fn vertex_rep(v: i64, n: usize) -> i64 {
    let n_i = n as i64;
    let v = v.rem_euclid(n_i);
    if v > (n_i - 1) / 2 {
        v - n_i
    } else {
        v
    }
}

fn residue(v: i64, n: usize) -> usize {
    v.rem_euclid(n as i64) as usize
}

/// Position of `P_v` in the vertex order, 0 for the largest vertex `P_0`.
pub fn vertex_rank(v: usize, n: usize) -> usize {
    let rep = vertex_rep(v as i64, n);
    (2 * rep.unsigned_abs() as usize).saturating_sub((rep < 0) as usize)
}

/// A vertex under the order `P_0 > P_{-1} > P_1 > ...`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct VertexKey {
    pub v: usize,
    rank: usize,
}

impl VertexKey {
    pub fn new(v: usize, n: usize) -> Self {
        Self {
            v: v % n,
            rank: vertex_rank(v, n),
        }
    }

    pub fn abs(&self) -> usize {
        self.rank.div_ceil(2)
    }
}

impl Ord for VertexKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other.rank.cmp(&self.rank)
    }
}

impl PartialOrd for VertexKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// A labeled edge with its source, under the edge order.
///
/// When `2 s_l = 0 (mod n)` the edges `P_v -> P_{v+s_l}` and
/// `P_{v+s_l} -> P_v` share both endpoints and label; the one leaving the
/// smaller vertex then wins, which keeps the order total and agrees with the
/// orientation of the petals of `H_t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct EdgeKey {
    hi: usize,
    lo: usize,
    pub label: usize,
    src: usize,
}

impl EdgeKey {
    pub fn new(label: usize, src: usize, tar: usize, n: usize) -> Self {
        let (rs, rt) = (vertex_rank(src, n), vertex_rank(tar, n));
        Self {
            hi: rs.min(rt),
            lo: rs.max(rt),
            label,
            src: rs,
        }
    }
}

impl Ord for EdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .hi
            .cmp(&self.hi)
            .then(other.lo.cmp(&self.lo))
            .then(other.label.cmp(&self.label))
            .then(self.src.cmp(&other.src))
    }
}

impl PartialOrd for EdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Edge keys of a graph, largest first. Graphs on a common label set
/// compare as these sequences do.
pub fn graph_key(g: &LabeledDigraph) -> Vec<EdgeKey> {
    let mut keys: Vec<EdgeKey> = g
        .edges()
        .into_iter()
        .map(|(l, s, t)| EdgeKey::new(l, s, t, g.n()))
        .collect();
    keys.sort_unstable_by(|a, b| b.cmp(a));
    keys
}

pub fn graph_cmp(g1: &LabeledDigraph, g2: &LabeledDigraph) -> Result<Ordering> {
    let (l1, l2) = (g1.labels(), g2.labels());
    if l1 != l2 {
        return Err(Error::LabelSetMismatch(l1, l2));
    }
    Ok(graph_key(g1).cmp(&graph_key(g2)))
}

fn monomial_key(m: &Monomial, n: usize, exps: &Exponents) -> Result<Vec<EdgeKey>> {
    Ok(graph_key(&gr_of_monomial(m, n, exps, 0)?))
}

/// Order on full monomials, transported from graphs through `gr`.
pub fn monomial_cmp(m1: &Monomial, m2: &Monomial, n: usize, exps: &Exponents) -> Result<Ordering> {
    Ok(monomial_key(m1, n, exps)?.cmp(&monomial_key(m2, n, exps)?))
}

/// Initial-coefficient matrix together with the leading monomial of each
/// row (`None` for zero rows).
pub fn ic_matrix_with_leading(block: &BlockOperator) -> Result<(ExactMatrix<i64>, Vec<Option<Monomial>>)> {
    let n = block.n;
    let mut ic = ExactMatrix::filled(n, n, 0i64);
    let mut leading = Vec::with_capacity(n);
    for a in 0..n {
        let mut best: Option<(Vec<EdgeKey>, &Monomial)> = None;
        for b in 0..n {
            for (m, _) in block.body.get(a, b).terms() {
                let key = monomial_key(m, n, &block.exponents)?;
                if best.as_ref().is_none_or(|(k, _)| key > *k) {
                    best = Some((key, m));
                }
            }
        }
        let lead = best.map(|(_, m)| m.clone());
        if let Some(m) = &lead {
            for b in 0..n {
                let c = block.body.get(a, b).coeff(m);
                let v = crate::field::rational_to_i64(&c)
                    .ok_or_else(|| Error::InvalidArgument(format!("non-integer coefficient at ({a},{b})")))?;
                ic.set(a, b, v);
            }
        }
        leading.push(lead);
    }
    Ok((ic, leading))
}

/// `Ic(L_j)`: row `a` holds the coefficients of the row's largest monomial.
pub fn ic_matrix(block: &BlockOperator) -> Result<ExactMatrix<i64>> {
    Ok(ic_matrix_with_leading(block)?.0)
}

/// Membership test for `U(a, j, I)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniverseFilter {
    pub a: usize,
    pub j: usize,
    /// The label set `I`, a subset of `1..=k`.
    pub labels: Vec<usize>,
}

impl UniverseFilter {
    pub fn new(a: usize, j: usize, mut labels: Vec<usize>) -> Self {
        labels.sort_unstable();
        labels.dedup();
        Self { a, j, labels }
    }

    /// The full universe `U(a, j)` with `I = {1..k}`.
    pub fn full(a: usize, j: usize, exps: &Exponents) -> Self {
        Self::new(a, j, (1..=exps.k()).collect())
    }

    /// Conditions: label set is `I`, edges follow the displacements, no
    /// repeated edges, and some `G_b` has an Eulerian path from `P_a`.
    pub fn contains(&self, g: &LabeledDigraph, exps: &Exponents) -> bool {
        let n = g.n();
        if g.labels() != self.labels
            || g.label_count() != exps.k() + 1
            || g.displacements() != exps.displacement_table(self.j % n).iter().map(|&s| residue(s, n)).collect::<Vec<_>>().as_slice()
        {
            return false;
        }
        !g.has_repeated_edge() && self.eulerian_columns(g).next().is_some()
    }

    /// The `b` for which `G_b` has an Eulerian path from `P_a`.
    pub fn eulerian_columns<'a>(&'a self, g: &'a LabeledDigraph) -> impl Iterator<Item = usize> + 'a {
        let n = g.n();
        let (indeg, outdeg) = g.degrees();
        let balance: Vec<i64> = (0..n).map(|v| outdeg[v] as i64 - indeg[v] as i64).collect();
        let a = self.a % n;
        let j = self.j % n;
        (0..n).filter(move |&b| {
            // Degree test on G_b before the connectivity test.
            let bj = (b + j) % n;
            let balanced = (0..n).all(|v| {
                let d = balance[v] + (v == b) as i64 - (v == bj) as i64;
                d == 0 || (d == 1 && v == a) || d == -1
            });
            balanced && {
                let gb = g.with_extra_edge(b).expect("label k+1 is free in U graphs");
                gb.eulerian_end(a).is_some()
            }
        })
    }
}

fn table(n: usize, exps: &Exponents, j: usize) -> LabeledDigraph {
    LabeledDigraph::empty(n, &exps.displacement_table(j % n)).expect("n >= 1")
}

/// All members of `U(a, j, I)` by exhaustive enumeration of sources.
pub fn enumerate_u(filter: &UniverseFilter, n: usize, exps: &Exponents, exec: Execution) -> Result<Vec<LabeledDigraph>> {
    let k = exps.k();
    if let Some(&l) = filter.labels.iter().find(|&&l| l == 0 || l > k) {
        return Err(Error::LabelOutOfRange(l));
    }
    let m = filter.labels.len();
    let base = table(n, exps, filter.j);
    let total = n.pow(m as u32);
    let prefix = if m == 0 { 1 } else { n };
    let rest = total / prefix;
    let chunks = map_range(exec, prefix, |p| {
        let mut found = Vec::new();
        for t in 0..rest {
            let mut x = p * rest + t;
            let mut g = base.clone();
            for &l in filter.labels.iter().rev() {
                g.add_edge(l, x % n).expect("labels validated");
                x /= n;
            }
            if !g.has_repeated_edge() && filter.eulerian_columns(&g).next().is_some() {
                found.push(g);
            }
        }
        found
    });
    Ok(chunks.into_iter().flatten().collect())
}

/// `U_nz(a, j)` membership: in `U(a, j)` with a nonzero signed sum for some b.
pub fn in_u_nz(g: &LabeledDigraph, filter: &UniverseFilter, exps: &Exponents) -> bool {
    filter.contains(g, exps) && filter.eulerian_columns(g).any(|b| g.with_extra_edge(b).unwrap().signed_sum(filter.a) != 0)
}

fn check_range(n: usize, exps: &Exponents) -> Result<()> {
    if !exps.is_canonical() {
        return Err(Error::InvalidArgument("maximal-graph theory needs the canonical exponents".into()));
    }
    if n <= exps.r() {
        return Err(Error::InvalidArgument(format!("need n > r (n={n}, r={})", exps.r())));
    }
    Ok(())
}

/// `supp(H_t) = [-ceil(t/2), floor(t/2)]` as representatives; empty for
/// `t = 0`.
pub fn supp_h(t: usize) -> Vec<i64> {
    if t == 0 {
        return Vec::new();
    }
    let lo = -(t.div_ceil(2) as i64);
    let hi = (t / 2) as i64;
    (lo..=hi).collect()
}

/// The pair of edges `H_t` adds for its `t'`-th petal (`t' >= 1`):
/// `(label, src, tar)` for both edges, as representatives.
fn petal(tp: usize, r: usize) -> [(usize, i64, i64); 2] {
    if tp % 2 == 1 {
        // Petal at i = -(t'+1)/2 via e_{t'} (into P_0) and e_{-t'} (out).
        let i = -((tp as i64 + 1) / 2);
        [(tp, i, 0), (r + tp, 0, i)]
    } else {
        let i = (tp / 2) as i64;
        [(tp, 0, i), (r + tp, i, 0)]
    }
}

/// The flower `H_t` on the label table of `U(., j)`.
pub fn h_graph(t: usize, n: usize, exps: &Exponents, j: usize) -> Result<LabeledDigraph> {
    check_range(n, exps)?;
    let r = exps.r();
    if t > r {
        return Err(Error::InvalidArgument(format!("t={t} exceeds r={r}")));
    }
    let mut g = table(n, exps, j);
    for tp in 1..=t {
        for (l, src, _) in petal(tp, r) {
            g.add_edge(l, residue(src, n))?;
        }
    }
    Ok(g)
}

/// `R_t(a)`: `a` plus every subset sum of `{s_i : i in I_t} u {j}`, where
/// `I_t = {+-(t+1), ..., +-r}`.
pub fn reachable_set(a: usize, t: usize, j: usize, n: usize, exps: &Exponents) -> BTreeSet<usize> {
    let r = exps.r();
    let mut steps: Vec<i64> = (t + 1..=r).flat_map(|i| [exps.s(i), exps.s(r + i)]).collect();
    steps.push(j as i64);
    let mut sums = BTreeSet::from([residue(a as i64, n)]);
    for s in steps {
        let shifted: Vec<usize> = sums.iter().map(|&v| residue(v as i64 + s, n)).collect();
        sums.extend(shifted);
    }
    sums
}

/// The largest `t` in `0..=r` with `R_t(a)` meeting `supp(H_t)`.
pub fn max_t(a: usize, j: usize, n: usize, exps: &Exponents) -> Result<usize> {
    check_range(n, exps)?;
    Ok((1..=exps.r())
        .rev()
        .find(|&t| {
            let reach = reachable_set(a, t, j, n, exps);
            supp_h(t).into_iter().any(|v| reach.contains(&residue(v, n)))
        })
        .unwrap_or(0))
}

/// The largest graph of `U(a, j)`: `H_t` for `t = max_t`, joined with a
/// two-way chain that walks from the larger of `P_a`, `P_{a+j}` towards
/// `P_0` using `e_{+-r}, ..., e_{+-(t+1)}`.
pub fn maximal_graph(a: usize, j: usize, n: usize, exps: &Exponents) -> Result<LabeledDigraph> {
    check_range(n, exps)?;
    let r = exps.r();
    let t = max_t(a, j, n, exps)?;
    let mut g = h_graph(t, n, exps, j)?;
    let (va, vb) = (VertexKey::new(a, n), VertexKey::new(a + j, n));
    let start = if va >= vb { va.v } else { vb.v };
    let mut v = vertex_rep(start as i64, n);
    let toward_zero_from_left = v <= 0;
    for i in (t + 1..=r).rev() {
        let s = exps.s(i);
        if toward_zero_from_left {
            g.add_edge(i, residue(v, n))?;
            g.add_edge(r + i, residue(v + s, n))?;
            v += s;
        } else {
            g.add_edge(r + i, residue(v, n))?;
            g.add_edge(i, residue(v - s, n))?;
            v -= s;
        }
    }
    Ok(g)
}

/// One row of `Ic(L_j)` read off the largest graph of `U_nz(a, j)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct IcRow {
    pub a: usize,
    pub j: usize,
    pub row: Vec<i64>,
    /// The largest graph of `U_nz(a, j)` as graph JSON, if any.
    pub graph: Option<serde_json::Value>,
    /// Graphs passed over below the maximal graph of `U(a, j)`.
    pub descent_steps: usize,
    /// `U_nz(a, j)` turned out to be empty; the row is zero.
    pub empty: bool,
}

/// Row `a` of `Ic(L_j)` from the order on `U(a, j)`: walk down from the
/// maximal graph until a graph with a nonzero signed sum appears.
pub fn ic_via_maximal(a: usize, j: usize, n: usize, exps: &Exponents) -> Result<IcRow> {
    check_range(n, exps)?;
    let (a, j) = (a % n, j % n);
    let k = exps.k();
    let filter = UniverseFilter::full(a, j, exps);
    let base = table(n, exps, j);

    // Every (label, source) pair, largest first. A graph is an increasing
    // sequence of positions with distinct labels; ascending lexicographic
    // order of position sequences is descending graph order.
    let mut universe: Vec<(EdgeKey, usize, usize)> = (1..=k)
        .flat_map(|l| {
            (0..n).map(move |src| {
                let tar = residue(src as i64 + exps.s(l), n);
                (EdgeKey::new(l, src, tar, n), l, src)
            })
        })
        .collect();
    universe.sort_unstable_by(|x, y| y.0.cmp(&x.0));

    let top = maximal_graph(a, j, n, exps)?;
    let mut top_pos: Vec<usize> = top
        .labels()
        .into_iter()
        .map(|l| {
            let src = top.source(l).unwrap();
            universe.iter().position(|&(_, ul, us)| ul == l && us == src).unwrap()
        })
        .collect();
    top_pos.sort_unstable();

    struct Search<'a> {
        universe: &'a [(EdgeKey, usize, usize)],
        top: &'a [usize],
        k: usize,
        a: usize,
        filter: &'a UniverseFilter,
        chosen: Vec<usize>,
        used: Vec<bool>,
        graph: LabeledDigraph,
        visited: usize,
    }

    impl Search<'_> {
        fn run(&mut self, from: usize, tight: bool) -> Option<Vec<i64>> {
            let depth = self.chosen.len();
            if depth == self.k {
                self.visited += 1;
                let g = &self.graph;
                if g.has_repeated_edge() {
                    return None;
                }
                let cols: Vec<usize> = self.filter.eulerian_columns(g).collect();
                if cols.is_empty() {
                    return None;
                }
                let mut row = vec![0i64; g.n()];
                for b in cols {
                    let s = g.with_extra_edge(b).unwrap().signed_sum(self.a);
                    row[b] = i64::try_from(s).expect("signed sum fits in i64");
                }
                return row.iter().any(|&x| x != 0).then_some(row);
            }
            let remaining = self.k - depth;
            for pos in from..self.universe.len() {
                if self.universe.len() - pos < remaining {
                    break;
                }
                if tight && pos < self.top[depth] {
                    continue;
                }
                let (_, l, src) = self.universe[pos];
                if self.used[l] {
                    continue;
                }
                self.used[l] = true;
                self.chosen.push(pos);
                self.graph.add_edge(l, src).expect("label unused");
                let found = self.run(pos + 1, tight && pos == self.top[depth]);
                self.graph.remove_edge(l);
                self.chosen.pop();
                self.used[l] = false;
                if found.is_some() {
                    return found;
                }
            }
            None
        }
    }

    let mut search = Search {
        universe: &universe,
        top: &top_pos,
        k,
        a,
        filter: &filter,
        chosen: Vec::with_capacity(k),
        used: vec![false; k + 2],
        graph: base,
        visited: 0,
    };
    let found = search.run(0, true);
    let steps = search.visited.saturating_sub(1);
    Ok(match found {
        Some(row) => {
            let mut g = table(n, exps, j);
            for &pos in &search.chosen {
                let (_, l, src) = universe[pos];
                g.add_edge(l, src)?;
            }
            IcRow {
                a,
                j,
                row,
                graph: Some(g.to_json()),
                descent_steps: steps,
                empty: false,
            }
        }
        None => IcRow {
            a,
            j,
            row: vec![0; n],
            graph: None,
            descent_steps: steps,
            empty: true,
        },
    })
}

/// `Ic(L_j)` assembled row by row from `ic_via_maximal`.
pub fn ic_matrix_via_maximal(n: usize, exps: &Exponents, j: usize, exec: Execution) -> Result<(ExactMatrix<i64>, Vec<IcRow>)> {
    let rows = map_range(exec, n, |a| ic_via_maximal(a, j, n, exps))
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let m = ExactMatrix::from_rows(rows.iter().map(|r| r.row.clone()).collect())?;
    Ok((m, rows))
}

/// `delta_j = [j in S] + [-j in S]` with `S = supp(H_r)`.
pub fn delta(j: usize, n: usize, r: usize) -> usize {
    let s: BTreeSet<usize> = supp_h(r).into_iter().map(|v| residue(v, n)).collect();
    s.contains(&(j % n)) as usize + s.contains(&residue(-(j as i64), n)) as usize
}

/// `(r-1)!` times the matrix with 2 on the diagonal and 1 elsewhere, except
/// that the row and column of index 0 hold `r` and the centre `r(r+1)`.
/// Rows and columns run over `-ceil(r/2)..=floor(r/2)`.
pub fn n_matrix(r: usize) -> Result<ExactMatrix<num_bigint::BigInt>> {
    if r == 0 {
        return Err(Error::InvalidArgument("r must be at least 1".into()));
    }
    let idx = supp_h(r);
    let scale = crate::field::factorial(r - 1);
    let r_i = r as i64;
    Ok(ExactMatrix::from_fn(r + 1, r + 1, |x, y| {
        let (u, v) = (idx[x], idx[y]);
        let base = match (u == 0, v == 0) {
            (true, true) => r_i * (r_i + 1),
            (true, false) | (false, true) => r_i,
            _ if u == v => 2,
            _ => 1,
        };
        &scale * base
    }))
}
