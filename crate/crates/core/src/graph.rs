//! Simple undirected graphs, generators and the regularizing blow-up.

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Attempts allowed to [`gen_random_regular`] before it reports failure.
pub const REGULAR_RESAMPLING_CAP: usize = 1000;

/// A simple undirected graph on vertices `0..n` with sorted adjacency lists.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphRecord", into = "GraphRecord")]
pub struct Graph {
    adj: Vec<Vec<usize>>,
}

/// JSON form `{n, edges: [[u, v], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphRecord {
    pub n: usize,
    pub edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphRecord> for Graph {
    type Error = Error;

    fn try_from(rec: GraphRecord) -> Result<Self> {
        let edges: Vec<_> = rec.edges.iter().map(|e| (e[0], e[1])).collect();
        Graph::from_edges(rec.n, &edges)
    }
}

impl From<Graph> for GraphRecord {
    fn from(g: Graph) -> Self {
        GraphRecord { n: g.n(), edges: g.edges().map(|(u, v)| [u, v]).collect() }
    }
}

impl Graph {
    pub fn empty(n: usize) -> Self {
        Self { adj: vec![Vec::new(); n] }
    }

    /// Builds a graph, rejecting self-loops, repeated edges and ids `>= n`.
    pub fn from_edges(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut adj = vec![Vec::new(); n];
        for &(u, v) in edges {
            if u >= n || v >= n {
                return Err(Error::InvalidVertex { vertex: u.max(v), n });
            }
            if u == v {
                return Err(Error::InvalidGraph(format!("self-loop at {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        for (v, list) in adj.iter_mut().enumerate() {
            list.sort_unstable();
            if let Some(w) = list.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidGraph(format!("repeated edge {v}-{}", w[0])));
            }
        }
        Ok(Self { adj })
    }

    pub fn complete(n: usize) -> Self {
        let adj = (0..n).map(|v| (0..n).filter(|&u| u != v).collect()).collect();
        Self { adj }
    }

    pub fn cycle(n: usize) -> Self {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        Self::from_edges(n, &edges).expect("cycle is simple")
    }

    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path is simple")
    }

    /// `K_{a,b}` with parts `0..a` and `a..a+b`.
    pub fn complete_bipartite(a: usize, b: usize) -> Self {
        let edges: Vec<_> = (0..a).flat_map(|u| (a..a + b).map(move |v| (u, v))).collect();
        Self::from_edges(a + b, &edges).expect("complete bipartite is simple")
    }

    /// Star `K_{1,k}` with center 0.
    pub fn star(k: usize) -> Self {
        Self::complete_bipartite(1, k)
    }

    pub fn n(&self) -> usize {
        self.adj.len()
    }

    pub fn degree(&self, v: usize) -> usize {
        self.adj[v].len()
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj[u].binary_search(&v).is_ok()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn min_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).min().unwrap_or(0)
    }

    pub fn is_regular(&self) -> bool {
        self.min_degree() == self.max_degree()
    }

    /// Errors unless every degree equals the maximum degree.
    pub fn require_regular(&self) -> Result<usize> {
        let (min, max) = (self.min_degree(), self.max_degree());
        if min != max {
            return Err(Error::NotRegular { min, max });
        }
        Ok(max)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn check_vertex(&self, v: usize) -> Result<()> {
        if v >= self.n() {
            return Err(Error::InvalidVertex { vertex: v, n: self.n() });
        }
        Ok(())
    }

    /// `|N_u ∩ N_v|`.
    pub fn common_neighbors(&self, u: usize, v: usize) -> usize {
        sorted_intersection_len(&self.adj[u], &self.adj[v])
    }

    /// Number of edges of `G[set]`.
    pub fn edges_within(&self, set: &[usize]) -> usize {
        let mut inside = vec![false; self.n()];
        for &v in set {
            inside[v] = true;
        }
        set.iter()
            .map(|&v| self.adj[v].iter().filter(|&&u| inside[u]).count())
            .sum::<usize>()
            / 2
    }

    /// `e(Ḡ[N_v]) = C(d(v), 2) - e(G[N_v])`.
    pub fn neighborhood_complement_edges(&self, v: usize) -> Result<usize> {
        self.check_vertex(v)?;
        let nbrs = &self.adj[v];
        let d = nbrs.len();
        let inside: usize = nbrs
            .iter()
            .map(|&u| sorted_intersection_len(&self.adj[u], nbrs))
            .sum::<usize>()
            / 2;
        Ok(d * d.saturating_sub(1) / 2 - inside)
    }

    /// Induced subgraph on `vertices` (relabelled `0..k` in the given order)
    /// and the map back to original ids.
    pub fn induced_subgraph(&self, vertices: &[usize]) -> (Graph, Vec<usize>) {
        let mut index = vec![usize::MAX; self.n()];
        for (i, &v) in vertices.iter().enumerate() {
            index[v] = i;
        }
        let adj = vertices
            .iter()
            .map(|&v| {
                let mut list: Vec<usize> = self.adj[v]
                    .iter()
                    .filter_map(|&u| (index[u] != usize::MAX).then_some(index[u]))
                    .collect();
                list.sort_unstable();
                list
            })
            .collect();
        (Graph { adj }, vertices.to_vec())
    }

    /// Disjoint union; `other`'s vertices are shifted by `self.n()`.
    pub fn disjoint_union(&self, other: &Graph) -> Graph {
        let shift = self.n();
        let mut adj = self.adj.clone();
        adj.extend(other.adj.iter().map(|l| l.iter().map(|&u| u + shift).collect()));
        Graph { adj }
    }

    /// A `D`-regular supergraph containing `self` as the induced subgraph on
    /// its first `n` vertices, `D = Δ(self)`.
    ///
    /// Takes `m` copies of the graph (`m = D+1`, or `D+2` when some
    /// deficiency `f_v = D - d(v)` makes `f_v * (D+1)` odd) and joins the `m`
    /// copies of each deficient vertex by an `f_v`-regular circulant. The
    /// result has at most `(D+2) n` vertices.
    pub fn regularize(&self) -> Graph {
        let d = self.max_degree();
        if self.is_regular() {
            return self.clone();
        }
        let n = self.n();
        let needs_even = (0..n).any(|v| (d - self.degree(v)) * (d + 1) % 2 == 1);
        let m = if needs_even { d + 2 } else { d + 1 };

        let mut edges: Vec<(usize, usize)> = Vec::with_capacity(m * (self.edge_count() + n * d));
        for c in 0..m {
            edges.extend(self.edges().map(|(u, v)| (c * n + u, c * n + v)));
        }
        for v in 0..n {
            let f = d - self.degree(v);
            for k in 1..=f / 2 {
                edges.extend((0..m).map(|c| (c * n + v, ((c + k) % m) * n + v)));
            }
            if f % 2 == 1 {
                debug_assert!(m % 2 == 0);
                edges.extend((0..m / 2).map(|c| (c * n + v, (c + m / 2) * n + v)));
            }
        }
        let g = Graph::from_edges(m * n, &edges).expect("circulant blow-up is simple");
        debug_assert!(g.is_regular() && g.max_degree() == d);
        g
    }

    /// Edge-list text: a `# n=<count>` header then one `u v` line per edge.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("# n={}\n", self.n());
        for (u, v) in self.edges() {
            let _ = writeln!(out, "{u} {v}");
        }
        out
    }

    /// Parses the edge-list format. `#` starts a comment; a `# n=<count>`
    /// comment fixes the vertex count, otherwise it is `1 + max id`.
    pub fn parse_edge_list(text: &str) -> Result<Graph> {
        let mut declared_n = None;
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let (body, comment) = match raw.find('#') {
                Some(i) => (&raw[..i], Some(&raw[i + 1..])),
                None => (raw, None),
            };
            if let Some(count) = comment.and_then(|c| c.trim().strip_prefix("n=")) {
                let count = count
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex count", lineno + 1)))?;
                declared_n = Some(count);
            }
            let mut it = body.split_whitespace();
            let (Some(a), Some(b)) = (it.next(), it.next()) else {
                if body.trim().is_empty() {
                    continue;
                }
                return Err(Error::Parse(format!("line {}: expected `u v`", lineno + 1)));
            };
            if it.next().is_some() {
                return Err(Error::Parse(format!("line {}: trailing tokens", lineno + 1)));
            }
            let parse = |s: &str| {
                s.parse::<usize>()
                    .map_err(|_| Error::Parse(format!("line {}: bad vertex id `{s}`", lineno + 1)))
            };
            edges.push((parse(a)?, parse(b)?));
        }
        let max_id = edges.iter().map(|&(u, v)| u.max(v) + 1).max().unwrap_or(0);
        let n = declared_n.unwrap_or(max_id);
        Graph::from_edges(n, &edges)
    }
}

fn sorted_intersection_len(a: &[usize], b: &[usize]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

/// Random simple `d`-regular graph on `n` vertices, deterministic in `seed`.
///
/// Points are paired in shuffled rounds; a pair that would form a loop or a
/// repeated edge is set aside and retried in the next round. When no legal
/// pair remains among the leftovers the attempt restarts. Each restart counts
/// toward [`REGULAR_RESAMPLING_CAP`].
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    if (n * d) % 2 == 1 {
        return Err(Error::InvalidParameter(format!("n*D = {} is odd", n * d)));
    }
    if d >= n && !(n == 0 && d == 0) {
        return Err(Error::InvalidParameter(format!("D = {d} must be below n = {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..REGULAR_RESAMPLING_CAP {
        if let Some(edges) = try_pairing(n, d, &mut rng) {
            let edges: Vec<_> = edges.into_iter().collect();
            let g = Graph::from_edges(n, &edges)?;
            debug_assert!(g.is_regular() && g.max_degree() == d);
            return Ok(g);
        }
    }
    Err(Error::ResamplingCapExceeded(REGULAR_RESAMPLING_CAP))
}

fn try_pairing(n: usize, d: usize, rng: &mut ChaCha8Rng) -> Option<Vec<(usize, usize)>> {
    let mut edges: HashSet<(usize, usize)> = HashSet::with_capacity(n * d / 2);
    let mut order: Vec<(usize, usize)> = Vec::with_capacity(n * d / 2);
    let mut points: Vec<usize> = (0..n).flat_map(|v| std::iter::repeat_n(v, d)).collect();
    while !points.is_empty() {
        let mut leftover: BTreeMap<usize, usize> = BTreeMap::new();
        points.shuffle(rng);
        for pair in points.chunks_exact(2) {
            let (a, b) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
            if a != b && edges.insert((a, b)) {
                order.push((a, b));
            } else {
                *leftover.entry(a).or_default() += 1;
                *leftover.entry(b).or_default() += 1;
            }
        }
        if leftover.is_empty() {
            break;
        }
        let keys: Vec<usize> = leftover.keys().copied().collect();
        let suitable = keys.iter().enumerate().any(|(i, &a)| {
            keys[i + 1..].iter().any(|&b| !edges.contains(&(a, b)))
        });
        if !suitable {
            return None;
        }
        points = leftover
            .into_iter()
            .flat_map(|(v, count)| std::iter::repeat_n(v, count))
            .collect();
    }
    Some(order)
}
