//! Bitset adjacency graphs with brute-force common-neighbourhood scans:
//! `K_{s,m}`-freeness with witnesses and exact biclique counts.

use std::fmt;

use thiserror::Error;

/// Vertex count above which `s >= 3` subset scans refuse to run without
/// `force`.
pub const SCAN_GUARD: usize = 5000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} out of range")]
    OutOfRange(usize),
    #[error("loop at vertex {0}")]
    Loop(usize),
    #[error("edge {0}-{1} lies within one side of the bipartition")]
    SameSide(usize, usize),
    #[error("vertex set must be nonempty")]
    EmptySet,
    #[error("biclique sizes must be positive (got {0}, {1})")]
    BadSizes(usize, usize),
    #[error("graph is not bipartite")]
    NotBipartite,
    #[error("{n} vertices is too many for an s={s} subset scan (limit {SCAN_GUARD}); pass force to override")]
    TooLarge { n: usize, s: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// A set of vertices as a bitmask.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct VertexSet {
    words: Vec<u64>,
}

impl VertexSet {
    pub fn new(n: usize) -> VertexSet {
        VertexSet {
            words: vec![0; n.div_ceil(64)],
        }
    }

    #[inline]
    pub fn insert(&mut self, v: usize) {
        self.words[v / 64] |= 1 << (v % 64);
    }

    #[inline]
    pub fn contains(&self, v: usize) -> bool {
        self.words[v / 64] >> (v % 64) & 1 == 1
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    #[inline]
    fn intersect_from(&mut self, a: &[u64], b: &[u64]) {
        for ((o, x), y) in self.words.iter_mut().zip(a).zip(b) {
            *o = x & y;
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(n, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(n * 64 + b)
            })
        })
    }

    pub fn to_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }
}

/// Which side of a bipartite graph holds the `s` vertices of a scan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Left,
    Right,
}

/// A simple undirected graph, optionally with a fixed bipartition where
/// vertices `0..left` form one side and `left..left+right` the other.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitGraph {
    n: usize,
    stride: usize,
    rows: Vec<u64>,
    bipartition: Option<(usize, usize)>,
}

/// `s` vertices and `m` of their common neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Witness {
    pub set: Vec<usize>,
    pub common: Vec<usize>,
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} ~ {:?}", self.set, self.common)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Freeness {
    pub free: bool,
    pub witness: Option<Witness>,
}

impl Freeness {
    fn from_witness(w: Option<Witness>) -> Freeness {
        Freeness {
            free: w.is_none(),
            witness: w,
        }
    }
}

/// Exact binomial coefficient.
pub fn choose(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

impl BitGraph {
    pub fn general(n: usize) -> BitGraph {
        let stride = n.div_ceil(64);
        BitGraph {
            n,
            stride,
            rows: vec![0; n * stride],
            bipartition: None,
        }
    }

    pub fn bipartite(left: usize, right: usize) -> BitGraph {
        let mut g = BitGraph::general(left + right);
        g.bipartition = Some((left, right));
        g
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bipartition(&self) -> Option<(usize, usize)> {
        self.bipartition
    }

    pub fn is_bipartite(&self) -> bool {
        self.bipartition.is_some()
    }

    /// Global vertex range of one side.
    pub fn side(&self, side: Side) -> Result<std::ops::Range<usize>, GraphError> {
        let (l, r) = self.bipartition.ok_or(GraphError::NotBipartite)?;
        Ok(match side {
            Side::Left => 0..l,
            Side::Right => l..l + r,
        })
    }

    #[inline]
    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.stride..(v + 1) * self.stride]
    }

    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<(), GraphError> {
        for x in [u, v] {
            if x >= self.n {
                return Err(GraphError::OutOfRange(x));
            }
        }
        if u == v {
            return Err(GraphError::Loop(u));
        }
        if let Some((l, _)) = self.bipartition {
            if (u < l) == (v < l) {
                return Err(GraphError::SameSide(u, v));
            }
        }
        self.rows[u * self.stride + v / 64] |= 1 << (v % 64);
        self.rows[v * self.stride + u / 64] |= 1 << (u % 64);
        Ok(())
    }

    #[inline]
    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.row(u)[v / 64] >> (v % 64) & 1 == 1
    }

    pub fn neighbors(&self, v: usize) -> VertexSet {
        VertexSet {
            words: self.row(v).to_vec(),
        }
    }

    pub fn degree(&self, v: usize) -> usize {
        self.row(v).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.n).map(|v| self.degree(v)).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n).flat_map(move |u| {
            VertexSet {
                words: self.row(u).to_vec(),
            }
            .to_vec()
            .into_iter()
            .filter(move |&v| v > u)
            .map(move |v| (u, v))
        })
    }

    pub fn common_neighbors(&self, set: &[usize]) -> Result<VertexSet, GraphError> {
        let (&first, rest) = set.split_first().ok_or(GraphError::EmptySet)?;
        for &v in set {
            if v >= self.n {
                return Err(GraphError::OutOfRange(v));
            }
        }
        let mut acc = self.neighbors(first);
        for &v in rest {
            for (a, b) in acc.words.iter_mut().zip(self.row(v)) {
                *a &= b;
            }
        }
        Ok(acc)
    }

    /// Swaps the two sides of a bipartite graph.
    pub fn mirror(&self) -> Result<BitGraph, GraphError> {
        let (l, r) = self.bipartition.ok_or(GraphError::NotBipartite)?;
        let mut g = BitGraph::bipartite(r, l);
        let remap = |v: usize| if v < l { v + r } else { v - l };
        for (u, v) in self.edges() {
            g.add_edge(remap(u), remap(v))?;
        }
        Ok(g)
    }

    /// The induced subgraph on all vertices but `x`, renumbered in order.
    pub fn without_vertex(&self, x: usize) -> BitGraph {
        let mut g = match self.bipartition {
            Some((l, r)) if x < l => BitGraph::bipartite(l - 1, r),
            Some((l, r)) => BitGraph::bipartite(l, r - 1),
            None => BitGraph::general(self.n - 1),
        };
        let remap = |v: usize| if v > x { v - 1 } else { v };
        for (u, v) in self.edges().filter(|&(u, v)| u != x && v != x) {
            g.add_edge(remap(u), remap(v))
                .expect("induced edge is valid");
        }
        g
    }

    // Depth-first scan over `s`-subsets of `candidates`, carrying the running
    // intersection and pruning once it drops below `need`. Calls `visit` with
    // each full subset and its common neighbourhood; stops early when `visit`
    // returns false.
    fn scan_subsets(
        &self,
        candidates: &[usize],
        s: usize,
        need: usize,
        visit: &mut dyn FnMut(&[usize], &VertexSet) -> bool,
    ) {
        let mut chosen = Vec::with_capacity(s);
        let mut stack: Vec<VertexSet> = (0..=s).map(|_| VertexSet::new(self.n)).collect();
        stack[0].words.iter_mut().for_each(|w| *w = !0);
        self.scan_rec(candidates, 0, s, need, &mut chosen, &mut stack, visit);
    }

    #[allow(clippy::too_many_arguments)]
    fn scan_rec(
        &self,
        candidates: &[usize],
        start: usize,
        s: usize,
        need: usize,
        chosen: &mut Vec<usize>,
        stack: &mut [VertexSet],
        visit: &mut dyn FnMut(&[usize], &VertexSet) -> bool,
    ) -> bool {
        let depth = chosen.len();
        if depth == s {
            return visit(chosen, &stack[depth]);
        }
        let remaining = s - depth;
        for idx in start..candidates.len() {
            if candidates.len() - idx < remaining {
                break;
            }
            let v = candidates[idx];
            let (lo, hi) = stack.split_at_mut(depth + 1);
            hi[0].intersect_from(&lo[depth].words, self.row(v));
            if hi[0].len() < need {
                continue;
            }
            chosen.push(v);
            let go_on = self.scan_rec(candidates, idx + 1, s, need, chosen, stack, visit);
            chosen.pop();
            if !go_on {
                return false;
            }
        }
        true
    }

    fn find_ksm(&self, candidates: &[usize], s: usize, m: usize) -> Option<Witness> {
        let mut found = None;
        self.scan_subsets(candidates, s, m, &mut |set, common| {
            found = Some(Witness {
                set: set.to_vec(),
                common: common.iter().take(m).collect(),
            });
            false
        });
        found
    }

    fn guard(&self, s: usize, force: bool) -> Result<(), GraphError> {
        if s >= 3 && self.n > SCAN_GUARD && !force {
            return Err(GraphError::TooLarge { n: self.n, s });
        }
        Ok(())
    }

    /// Freeness with the `s` vertices on one given side of a bipartite graph.
    pub fn is_ksm_free_side(
        &self,
        side: Side,
        s: usize,
        m: usize,
        force: bool,
    ) -> Result<Freeness, GraphError> {
        if s == 0 || m == 0 {
            return Err(GraphError::BadSizes(s, m));
        }
        self.guard(s, force)?;
        let cand: Vec<usize> = self.side(side)?.collect();
        Ok(Freeness::from_witness(self.find_ksm(&cand, s, m)))
    }

    /// `true` iff no `s` vertices have `m` or more common neighbours. For a
    /// bipartite graph both orientations are scanned, left side first.
    ///
    /// `K_{s,m}` and `K_{m,s}` are the same graph, so `s > m` is answered by
    /// scanning `m`-subsets instead.
    pub fn is_ksm_free(&self, s: usize, m: usize, force: bool) -> Result<Freeness, GraphError> {
        if s == 0 || m == 0 {
            return Err(GraphError::BadSizes(s, m));
        }
        let (s, m) = (s.min(m), s.max(m));
        self.guard(s, force)?;
        if self.is_bipartite() {
            let left = self.is_ksm_free_side(Side::Left, s, m, force)?;
            if !left.free {
                return Ok(left);
            }
            return self.is_ksm_free_side(Side::Right, s, m, force);
        }
        let all: Vec<usize> = (0..self.n).collect();
        Ok(Freeness::from_witness(self.find_ksm(&all, s, m)))
    }

    /// Number of pairs `A` (left, size `a`), `B` (right, size `b`) that are
    /// completely joined. Subsets are enumerated on the smaller side.
    pub fn count_biclique(&self, a: usize, b: usize) -> Result<u64, GraphError> {
        if a == 0 || b == 0 {
            return Err(GraphError::BadSizes(a, b));
        }
        let (l, r) = self.bipartition.ok_or(GraphError::NotBipartite)?;
        let (cand, s, other): (Vec<usize>, usize, usize) = if l <= r {
            ((0..l).collect(), a, b)
        } else {
            ((l..l + r).collect(), b, a)
        };
        let mut total = 0u64;
        self.scan_subsets(&cand, s, other, &mut |_, common| {
            total += choose(common.len(), other);
            true
        });
        Ok(total)
    }

    /// Number of unordered pairs of disjoint sets `{A, B}`, `|A| = a`,
    /// `|B| = b`, with every `A`-`B` pair adjacent.
    pub fn count_biclique_general(&self, a: usize, b: usize) -> Result<u64, GraphError> {
        if a == 0 || b == 0 {
            return Err(GraphError::BadSizes(a, b));
        }
        let (a, b) = (a.min(b), a.max(b));
        let all: Vec<usize> = (0..self.n).collect();
        let mut ordered = 0u64;
        // no loops, so N(A) never meets A
        self.scan_subsets(&all, a, b, &mut |_, common| {
            ordered += choose(common.len(), b);
            true
        });
        Ok(if a == b { ordered / 2 } else { ordered })
    }

    /// The graph file format: a header `bipartite L R` or `general N`, then
    /// one `u v` line per edge in lexicographic order. Bipartite edges use
    /// side-local indices (`u` on the left, `v` on the right); general edges
    /// have `u < v`.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        match self.bipartition {
            Some((l, r)) => {
                out.push_str(&format!("bipartite {l} {r}\n"));
                for (u, v) in self.edges() {
                    out.push_str(&format!("{u} {}\n", v - l));
                }
            }
            None => {
                out.push_str(&format!("general {}\n", self.n));
                for (u, v) in self.edges() {
                    out.push_str(&format!("{u} {v}\n"));
                }
            }
        }
        out
    }

    pub fn parse(text: &str) -> Result<BitGraph, GraphError> {
        let perr = |line: usize, msg: String| GraphError::Parse { line, msg };
        let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l));
        let (_, header) = lines
            .next()
            .ok_or_else(|| perr(1, "missing header".into()))?;
        let fields: Vec<&str> = header.split_whitespace().collect();
        let num = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| perr(1, format!("bad count {s:?}")))
        };
        let mut g = match fields.as_slice() {
            ["bipartite", l, r] => BitGraph::bipartite(num(l)?, num(r)?),
            ["general", n] => BitGraph::general(num(n)?),
            _ => {
                return Err(perr(
                    1,
                    format!("expected \"bipartite <L> <R>\" or \"general <n>\", got {header:?}"),
                ))
            }
        };
        for (lineno, l) in lines {
            let parts: Vec<&str> = l.split_whitespace().collect();
            let [u, v] = parts.as_slice() else {
                return Err(perr(lineno, format!("expected \"u v\", got {l:?}")));
            };
            let idx = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| perr(lineno, format!("bad vertex {s:?}")))
            };
            let (u, v) = (idx(u)?, idx(v)?);
            let (gu, gv) = match g.bipartition {
                Some((left, right)) => {
                    if u >= left || v >= right {
                        return Err(perr(lineno, format!("edge {u} {v} out of range")));
                    }
                    (u, left + v)
                }
                None => {
                    if u >= g.n || v >= g.n {
                        return Err(perr(lineno, format!("edge {u} {v} out of range")));
                    }
                    if u == v {
                        return Err(perr(lineno, format!("loop at {u}")));
                    }
                    (u, v)
                }
            };
            if g.has_edge(gu, gv) {
                return Err(perr(lineno, format!("duplicate edge {u} {v}")));
            }
            g.add_edge(gu, gv)
                .map_err(|e| perr(lineno, e.to_string()))?;
        }
        Ok(g)
    }
}
