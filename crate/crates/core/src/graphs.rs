//! Labeled directed graphs on the vertex set Z/nZ, Eulerian paths and their
//! signed counts.
//!
//! Each label `l` carries a fixed displacement `s_l`; when present, edge
//! `e_l` runs from its source `v` to `v + s_l`. The signature of an
//! Eulerian path is the sign of the permutation listing its labels, measured
//! against ascending label order.

use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledDigraph {
    n: usize,
    displacements: Vec<usize>,
    sources: Vec<Option<usize>>,
}

/// One Eulerian path: its labels in traversal order and its signature.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SignedPath {
    pub order: Vec<usize>,
    pub sign: i8,
}

impl LabeledDigraph {
    /// A graph with no edges. `displacements[l - 1]` is the displacement of
    /// label `l`, read modulo `n`.
    pub fn empty(n: usize, displacements: &[i64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("graphs need at least one vertex".into()));
        }
        Ok(Self {
            n,
            displacements: displacements.iter().map(|&s| s.rem_euclid(n as i64) as usize).collect(),
            sources: vec![None; displacements.len()],
        })
    }

    /// A graph whose `i`-th edge (label `i + 1`) runs `src -> tar`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        if let Some(&(s, t)) = edges.iter().find(|&&(s, t)| s >= n || t >= n) {
            return Err(Error::InvalidArgument(format!("edge {s}->{t} outside Z/{n}Z")));
        }
        let disp: Vec<i64> = edges.iter().map(|&(s, t)| t as i64 - s as i64).collect();
        let mut g = Self::empty(n, &disp)?;
        for (i, &(s, _)) in edges.iter().enumerate() {
            g.sources[i] = Some(s);
        }
        Ok(g)
    }

    /// A random graph with `m` edges whose endpoints are uniform on Z/nZ.
    pub fn random<R: Rng + ?Sized>(n: usize, m: usize, rng: &mut R) -> Self {
        let edges: Vec<_> = (0..m).map(|_| (rng.gen_range(0..n), rng.gen_range(0..n))).collect();
        Self::from_edges(n, &edges).expect("endpoints drawn inside Z/nZ")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of labels in the displacement table (present or not).
    pub fn label_count(&self) -> usize {
        self.displacements.len()
    }

    pub fn displacement(&self, label: usize) -> usize {
        self.displacements[label - 1]
    }

    pub fn displacements(&self) -> &[usize] {
        &self.displacements
    }

    pub fn source(&self, label: usize) -> Option<usize> {
        self.sources.get(label.wrapping_sub(1)).copied().flatten()
    }

    pub fn target(&self, label: usize) -> Option<usize> {
        self.source(label).map(|s| (s + self.displacement(label)) % self.n)
    }

    pub fn sources(&self) -> &[Option<usize>] {
        &self.sources
    }

    /// Present labels in ascending order.
    pub fn labels(&self) -> Vec<usize> {
        (1..=self.sources.len()).filter(|&l| self.sources[l - 1].is_some()).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.sources.iter().filter(|s| s.is_some()).count()
    }

    /// `(label, source, target)` for every present edge, ascending by label.
    pub fn edges(&self) -> Vec<(usize, usize, usize)> {
        self.labels()
            .into_iter()
            .map(|l| (l, self.source(l).unwrap(), self.target(l).unwrap()))
            .collect()
    }

    pub fn add_edge(&mut self, label: usize, src: usize) -> Result<()> {
        if label == 0 || label > self.sources.len() || src >= self.n {
            return Err(Error::LabelOutOfRange(label));
        }
        if self.sources[label - 1].is_some() {
            return Err(Error::LabelPresent(label));
        }
        self.sources[label - 1] = Some(src % self.n);
        Ok(())
    }

    pub fn with_edge(&self, label: usize, src: usize) -> Result<Self> {
        let mut g = self.clone();
        g.add_edge(label, src)?;
        Ok(g)
    }

    pub fn remove_edge(&mut self, label: usize) {
        if let Some(s) = self.sources.get_mut(label.wrapping_sub(1)) {
            *s = None;
        }
    }

    /// `G_b`: the graph with the last label added as an edge out of `P_b`.
    pub fn with_extra_edge(&self, b: usize) -> Result<Self> {
        let last = self.sources.len();
        if last == 0 {
            return Err(Error::LabelOutOfRange(1));
        }
        self.with_edge(last, b % self.n)
    }

    /// Edge-set union. Both graphs must share `n` and the displacement
    /// table; a label present in both is an error.
    pub fn union(&self, other: &Self) -> Result<Self> {
        if self.n != other.n || self.displacements != other.displacements {
            return Err(Error::DimensionMismatch("graphs over different label tables".into()));
        }
        let mut g = self.clone();
        for l in other.labels() {
            g.add_edge(l, other.source(l).unwrap())?;
        }
        Ok(g)
    }

    /// `(indegree, outdegree)` per vertex; a loop counts once in each.
    pub fn degrees(&self) -> (Vec<usize>, Vec<usize>) {
        let mut indeg = vec![0; self.n];
        let mut outdeg = vec![0; self.n];
        for (_, s, t) in self.edges() {
            outdeg[s] += 1;
            indeg[t] += 1;
        }
        (indeg, outdeg)
    }

    /// Vertices incident to at least one edge, ascending.
    pub fn support(&self) -> Vec<usize> {
        let mut seen = vec![false; self.n];
        for (_, s, t) in self.edges() {
            seen[s] = true;
            seen[t] = true;
        }
        (0..self.n).filter(|&v| seen[v]).collect()
    }

    pub fn has_repeated_edge(&self) -> bool {
        let mut pairs: Vec<(usize, usize)> = self.edges().into_iter().map(|(_, s, t)| (s, t)).collect();
        pairs.sort_unstable();
        pairs.windows(2).any(|w| w[0] == w[1])
    }

    fn edge_support_connected(&self) -> bool {
        let mut parent: Vec<usize> = (0..self.n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for (_, s, t) in self.edges() {
            let (rs, rt) = (find(&mut parent, s), find(&mut parent, t));
            parent[rs] = rt;
        }
        let support = self.support();
        let Some(&first) = support.first() else {
            return true;
        };
        let root = find(&mut parent, first);
        support.into_iter().all(|v| find(&mut parent, v) == root)
    }

    /// Whether some Eulerian path starts at `P_a` and ends at `P_b`:
    /// the edges form one weakly connected piece through `P_a` and the
    /// degree balance matches the endpoints.
    pub fn has_eulerian_path(&self, a: usize, b: usize) -> bool {
        let (a, b) = (a % self.n, b % self.n);
        if self.edge_count() == 0 {
            return a == b;
        }
        let (indeg, outdeg) = self.degrees();
        for v in 0..self.n {
            let want: i64 = if a == b {
                0
            } else if v == a {
                1
            } else if v == b {
                -1
            } else {
                0
            };
            if outdeg[v] as i64 - indeg[v] as i64 != want {
                return false;
            }
        }
        (outdeg[a] > 0 || indeg[a] > 0) && self.edge_support_connected()
    }

    /// The only vertex at which an Eulerian path from `P_a` can end, if the
    /// degree balance allows one at all.
    pub fn eulerian_end(&self, a: usize) -> Option<usize> {
        let a = a % self.n;
        let (indeg, outdeg) = self.degrees();
        let mut end = a;
        for v in 0..self.n {
            let d = outdeg[v] as i64 - indeg[v] as i64 - (v == a) as i64;
            match d {
                0 => {}
                -1 if end == a => end = v,
                _ => return None,
            }
        }
        self.has_eulerian_path(a, end).then_some(end)
    }

    /// Every Eulerian path from `P_a` with its signature, by depth-first
    /// backtracking. All of them end at the same vertex.
    pub fn enumerate_signed(&self, a: usize) -> Vec<SignedPath> {
        let edges = self.edges();
        let m = edges.len();
        let mut out = Vec::new();
        let mut order = Vec::with_capacity(m);
        let mut used = vec![false; m];
        let mut end_vertex = None;
        #[allow(clippy::too_many_arguments)]
        fn dfs(
            edges: &[(usize, usize, usize)],
            v: usize,
            used: &mut [bool],
            order: &mut Vec<usize>,
            parity: bool,
            out: &mut Vec<SignedPath>,
            end_vertex: &mut Option<usize>,
        ) {
            if order.len() == edges.len() {
                let end = *end_vertex.get_or_insert(v);
                assert_eq!(end, v, "Eulerian paths from one start share their end vertex");
                out.push(SignedPath {
                    order: order.iter().map(|&i| edges[i].0).collect(),
                    sign: if parity { -1 } else { 1 },
                });
                return;
            }
            for i in 0..edges.len() {
                if used[i] || edges[i].1 != v {
                    continue;
                }
                // Inversions added by placing edge i next: unused edges with
                // a smaller label that will come later.
                let smaller_unused = used[..i].iter().filter(|&&u| !u).count();
                used[i] = true;
                order.push(i);
                dfs(edges, edges[i].2, used, order, parity ^ (smaller_unused % 2 == 1), out, end_vertex);
                order.pop();
                used[i] = false;
            }
        }
        if m > 0 && self.eulerian_end(a).is_none() {
            return out;
        }
        dfs(&edges, a % self.n, &mut used, &mut order, false, &mut out, &mut end_vertex);
        out
    }

    /// `sum sgn(w)` over the Eulerian paths from `P_a`, by dynamic
    /// programming over the set of used edges.
    pub fn signed_sum(&self, a: usize) -> i128 {
        let edges = self.edges();
        let m = edges.len();
        if m == 0 {
            return 1;
        }
        if self.eulerian_end(a).is_none() {
            return 0;
        }
        assert!(m < 64, "signed_sum supports at most 63 edges");
        let src: Vec<usize> = edges.iter().map(|e| e.1).collect();
        let tar: Vec<usize> = edges.iter().map(|e| e.2).collect();
        let full: u64 = if m == 64 { u64::MAX } else { (1u64 << m) - 1 };

        struct Dp<'a> {
            src: &'a [usize],
            tar: &'a [usize],
            full: u64,
            memo: HashMap<u64, i128>,
        }
        impl Dp<'_> {
            // Sum over completions once the edges in `used` are walked and we
            // stand at `v` (which `used` determines).
            fn go(&mut self, used: u64, v: usize) -> i128 {
                if used == self.full {
                    return 1;
                }
                if let Some(&x) = self.memo.get(&used) {
                    return x;
                }
                let mut total = 0i128;
                for e in 0..self.src.len() {
                    if used >> e & 1 == 1 || self.src[e] != v {
                        continue;
                    }
                    let below = !used & ((1u64 << e) - 1);
                    let sub = self.go(used | 1 << e, self.tar[e]);
                    if below.count_ones() % 2 == 1 {
                        total -= sub;
                    } else {
                        total += sub;
                    }
                }
                self.memo.insert(used, total);
                total
            }
        }
        let mut dp = Dp {
            src: &src,
            tar: &tar,
            full,
            memo: HashMap::new(),
        };
        dp.go(0, a % self.n)
    }

    pub fn to_json(&self) -> Value {
        let disp: Map<String, Value> = self
            .displacements
            .iter()
            .enumerate()
            .map(|(i, &s)| ((i + 1).to_string(), json!(s)))
            .collect();
        let edges: Map<String, Value> = self
            .labels()
            .into_iter()
            .map(|l| (l.to_string(), json!(self.source(l).unwrap())))
            .collect();
        json!({ "n": self.n, "displacements": disp, "edges": edges })
    }

    pub fn from_json(value: &Value) -> Result<Self> {
        let bad = |msg: String| Error::Parse(format!("graph JSON: {msg}"));
        let n = value
            .get("n")
            .and_then(Value::as_u64)
            .ok_or_else(|| bad("missing integer \"n\"".into()))? as usize;
        let label_map = |key: &str| -> Result<Vec<(usize, i64)>> {
            let obj = match value.get(key) {
                None => return Ok(Vec::new()),
                Some(v) => v.as_object().ok_or_else(|| bad(format!("\"{key}\" must be an object")))?,
            };
            let mut out = Vec::new();
            for (l, v) in obj {
                let l: usize = l.parse().map_err(|_| bad(format!("bad label {l:?}")))?;
                let v = v.as_i64().ok_or_else(|| bad(format!("non-integer value for label {l}")))?;
                if l == 0 {
                    return Err(bad("labels start at 1".into()));
                }
                out.push((l, v));
            }
            Ok(out)
        };
        let disp = label_map("displacements")?;
        let edges = label_map("edges")?;
        let count = disp.iter().map(|&(l, _)| l).max().unwrap_or(0);
        let mut table = vec![None; count];
        for (l, s) in disp {
            table[l - 1] = Some(s);
        }
        let table = table
            .into_iter()
            .enumerate()
            .map(|(i, s)| s.ok_or_else(|| bad(format!("no displacement for label {}", i + 1))))
            .collect::<Result<Vec<_>>>()?;
        let mut g = Self::empty(n, &table)?;
        for (l, src) in edges {
            if src < 0 {
                return Err(bad(format!("negative source for label {l}")));
            }
            g.add_edge(l, src as usize)?;
        }
        Ok(g)
    }
}

fn factorial_u128(n: usize) -> u128 {
    (1..=n as u128).product()
}

/// The flower with `alpha` petals: hub `P_0`, petals `P_1..P_alpha`, and
/// for each petal `i` the pair `S_i: P_0 -> P_i` (label `2i-1`) and
/// `T_i: P_i -> P_0` (label `2i`).
pub fn flower(alpha: usize) -> LabeledDigraph {
    LabeledDigraph::from_edges(alpha + 1, &flower_edges(alpha)).expect("valid flower")
}

fn flower_edges(alpha: usize) -> Vec<(usize, usize)> {
    (1..=alpha).flat_map(|i| [(0, i), (i, 0)]).collect()
}

/// The flower plus a chord `P_1 -> P_2` (label `2 alpha + 1`).
pub fn flower_with_chord(alpha: usize) -> Result<LabeledDigraph> {
    if alpha < 2 {
        return Err(Error::InvalidArgument("a chord needs at least two petals".into()));
    }
    let mut e = flower_edges(alpha);
    e.push((1, 2));
    LabeledDigraph::from_edges(alpha + 1, &e)
}

/// The flower plus a loop at `P_b` (label `2 alpha + 1`).
pub fn flower_with_loop(alpha: usize, b: usize) -> Result<LabeledDigraph> {
    if b > alpha {
        return Err(Error::InvalidArgument(format!("loop vertex {b} outside 0..={alpha}")));
    }
    let mut e = flower_edges(alpha);
    e.push((b, b));
    LabeledDigraph::from_edges(alpha + 1, &e)
}

/// The flower with a two-way tail `P_0 - P_{alpha+1} - ... - P_{alpha+beta}`
/// (`S_i` outward, `T_i` back) and a loop at the tail's end.
pub fn flower_with_tail(alpha: usize, beta: usize) -> Result<LabeledDigraph> {
    if beta == 0 {
        return Err(Error::InvalidArgument("the tail needs at least one step".into()));
    }
    let mut e = flower_edges(alpha);
    for i in alpha + 1..=alpha + beta {
        let prev = if i == alpha + 1 { 0 } else { i - 1 };
        e.push((prev, i));
        e.push((i, prev));
    }
    e.push((alpha + beta, alpha + beta));
    LabeledDigraph::from_edges(alpha + beta + 1, &e)
}

/// |signed sum| on the flower from `P_a`.
pub fn closed_form_flower(alpha: usize, a: usize) -> Result<u128> {
    if a > alpha {
        return Err(Error::InvalidArgument(format!("start {a} outside 0..={alpha}")));
    }
    Ok(if a == 0 {
        factorial_u128(alpha)
    } else {
        factorial_u128(alpha - 1)
    })
}

/// |signed sum| on the flower with chord from `P_1`.
pub fn closed_form_flower_chord(alpha: usize) -> Result<u128> {
    if alpha < 2 {
        return Err(Error::InvalidArgument("a chord needs at least two petals".into()));
    }
    Ok(factorial_u128(alpha - 1))
}

/// |signed sum| on the flower with a loop at `P_b`, from `P_a`.
pub fn closed_form_flower_loop(alpha: usize, a: usize, b: usize) -> Result<u128> {
    if alpha == 0 || a > alpha || b > alpha {
        return Err(Error::InvalidArgument(format!(
            "need alpha >= 1 and a, b in 0..={alpha}"
        )));
    }
    Ok(match (a, b) {
        (0, 0) => factorial_u128(alpha + 1),
        _ if a == b => 2 * factorial_u128(alpha - 1),
        (0, _) | (_, 0) => factorial_u128(alpha),
        _ => factorial_u128(alpha - 1),
    })
}

/// |signed sum| on the flower with tail, from the tail's end.
pub fn closed_form_flower_tail(alpha: usize, beta: usize) -> Result<u128> {
    if beta == 0 {
        return Err(Error::InvalidArgument("the tail needs at least one step".into()));
    }
    Ok(2 * factorial_u128(alpha))
}
