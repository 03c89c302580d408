//! Sparse–dense decomposition of a `D`-regular graph.
//!
//! A vertex is dense when its neighborhood misses fewer than `θD²` edges.
//! Dense vertices whose closed neighborhoods overlap in at least
//! `(1 - 2ε₀)D` vertices are friends, and clusters are the connected
//! components of the friendship graph. Everything else is sparse.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub sparse: Vec<usize>,
    pub clusters: Vec<Vec<usize>>,
    pub eps: f64,
    pub theta: f64,
}

impl Decomposition {
    /// `θ = ε₀²/16` and `ε = 8ε₀`.
    pub fn constants(eps_in: f64) -> (f64, f64) {
        (eps_in * eps_in / 16.0, 8.0 * eps_in)
    }

    /// Cluster index of every vertex, `None` for sparse vertices.
    pub fn membership(&self, n: usize) -> Vec<Option<usize>> {
        let mut part = vec![None; n];
        for (i, c) in self.clusters.iter().enumerate() {
            for &v in c {
                part[v] = Some(i);
            }
        }
        part
    }
}

/// Checks of one vertex against the invariant of its part.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexCheck {
    pub vertex: usize,
    pub cluster: Option<usize>,
    /// `e(Ḡ[N_v])`.
    pub complement_edges: usize,
    /// `|N_v \ C|`, zero for sparse vertices.
    pub outside: usize,
    /// `|C \ N[v]|`, zero for sparse vertices.
    pub missing: usize,
    pub sparse_ok: bool,
    pub outside_ok: bool,
    pub missing_ok: bool,
}

impl VertexCheck {
    pub fn passes(&self) -> bool {
        self.sparse_ok && self.outside_ok && self.missing_ok
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub partition_ok: bool,
    pub vertices: Vec<VertexCheck>,
    /// `min_{v ∈ V*} e(Ḡ[N_v]) - θD²`; infinite when `V*` is empty.
    pub sparse_margin: f64,
    /// `min_v εD - |N_v \ C|` over cluster vertices.
    pub outside_margin: f64,
    /// `min_v εD - |C \ N[v]|` over cluster vertices.
    pub missing_margin: f64,
}

impl VerificationReport {
    pub fn failures(&self) -> usize {
        self.vertices.iter().filter(|c| !c.passes()).count() + usize::from(!self.partition_ok)
    }

    pub fn all_pass(&self) -> bool {
        self.failures() == 0
    }
}

/// Per-vertex check of the three decomposition invariants.
pub fn verify_decomposition(g: &Graph, dec: &Decomposition) -> VerificationReport {
    let n = g.n();
    let d = g.max_degree() as f64;
    let mut seen = vec![0usize; n];
    let mut in_range = true;
    for &v in dec.sparse.iter().chain(dec.clusters.iter().flatten()) {
        match seen.get_mut(v) {
            Some(count) => *count += 1,
            None => in_range = false,
        }
    }
    let partition_ok = in_range && seen.iter().all(|&c| c == 1);
    let part = dec.membership(n);
    let mut cluster_mark = vec![usize::MAX; n];

    let mut vertices = Vec::with_capacity(n);
    let mut sparse_margin = f64::INFINITY;
    let mut outside_margin = f64::INFINITY;
    let mut missing_margin = f64::INFINITY;
    let sparse_threshold = dec.theta * d * d;
    let cluster_threshold = dec.eps * d;
    for v in 0..n {
        let complement_edges = g.neighborhood_complement_edges(v).expect("vertex in range");
        let mut check = VertexCheck {
            vertex: v,
            cluster: part[v],
            complement_edges,
            outside: 0,
            missing: 0,
            sparse_ok: true,
            outside_ok: true,
            missing_ok: true,
        };
        match part[v] {
            None => {
                check.sparse_ok = complement_edges as f64 >= sparse_threshold;
                sparse_margin = sparse_margin.min(complement_edges as f64 - sparse_threshold);
            }
            Some(i) => {
                let cluster = &dec.clusters[i];
                if cluster_mark[cluster[0]] != i {
                    for &u in cluster {
                        cluster_mark[u] = i;
                    }
                }
                let inside = g.neighbors(v).iter().filter(|&&u| cluster_mark[u] == i).count();
                check.outside = g.degree(v) - inside;
                check.missing = cluster.len() - 1 - inside;
                check.outside_ok = (check.outside as f64) < cluster_threshold;
                check.missing_ok = (check.missing as f64) < cluster_threshold;
                outside_margin = outside_margin.min(cluster_threshold - check.outside as f64);
                missing_margin = missing_margin.min(cluster_threshold - check.missing as f64);
            }
        }
        vertices.push(check);
    }
    VerificationReport { partition_ok, vertices, sparse_margin, outside_margin, missing_margin }
}

/// Whether dense `u` and `v` are friends: `|N[u] ∩ N[v]| ≥ (1 - 2ε₀)D`.
pub fn are_friends(g: &Graph, u: usize, v: usize, eps_in: f64) -> bool {
    let shared = g.common_neighbors(u, v) + if g.has_edge(u, v) { 2 } else { 0 };
    shared as f64 >= (1.0 - 2.0 * eps_in) * g.max_degree() as f64
}

/// Decomposes a `D`-regular graph; the result is verified before return.
pub fn sparse_dense_decompose(g: &Graph, eps_in: f64) -> Result<Decomposition> {
    if !(eps_in > 0.0 && eps_in < 0.05) {
        return Err(Error::InvalidParameter(format!("eps_in = {eps_in} must lie in (0, 1/20)")));
    }
    let d = g.require_regular()?;
    let (theta, eps) = Decomposition::constants(eps_in);
    let n = g.n();
    let sparse_threshold = theta * (d * d) as f64;
    let complement: Vec<usize> = (0..n)
        .map(|v| g.neighborhood_complement_edges(v).expect("vertex in range"))
        .collect();
    let dense: Vec<bool> = complement.iter().map(|&c| (c as f64) < sparse_threshold).collect();

    // Friends share most of their closed neighborhoods, so they are within
    // distance two of each other.
    let mut parent: Vec<usize> = (0..n).collect();
    let mut mark = vec![usize::MAX; n];
    for u in (0..n).filter(|&u| dense[u]) {
        mark[u] = u;
        for &a in g.neighbors(u) {
            for w in std::iter::once(a).chain(g.neighbors(a).iter().copied()) {
                if w > u && dense[w] && mark[w] != u {
                    mark[w] = u;
                    if are_friends(g, u, w, eps_in) {
                        union(&mut parent, u, w);
                    }
                }
            }
        }
    }

    let mut member: Vec<Option<usize>> = vec![None; n];
    let mut clusters: Vec<Vec<usize>> = Vec::new();
    let mut root_index = vec![usize::MAX; n];
    for v in (0..n).filter(|&v| dense[v]) {
        let r = find(&mut parent, v);
        if root_index[r] == usize::MAX {
            root_index[r] = clusters.len();
            clusters.push(Vec::new());
        }
        clusters[root_index[r]].push(v);
        member[v] = Some(root_index[r]);
    }

    // Repair: a vertex violating a cluster condition may only be demoted if
    // it also qualifies as sparse.
    loop {
        let provisional = assemble(n, &member, &clusters, eps, theta);
        let report = verify_decomposition(g, &provisional);
        let violators: Vec<&VertexCheck> =
            report.vertices.iter().filter(|c| c.cluster.is_some() && !c.passes()).collect();
        if violators.is_empty() {
            break;
        }
        for check in violators {
            if complement[check.vertex] as f64 >= sparse_threshold {
                member[check.vertex] = None;
            } else {
                return Err(Error::VerificationFailed(format!(
                    "dense vertex {} violates its cluster (|N_v \\ C| = {}, |C \\ N[v]| = {}, eps*D = {})",
                    check.vertex,
                    check.outside,
                    check.missing,
                    eps * d as f64
                )));
            }
        }
    }

    let dec = assemble(n, &member, &clusters, eps, theta);
    let report = verify_decomposition(g, &dec);
    if !report.all_pass() {
        return Err(Error::VerificationFailed(format!(
            "{} invariant failures after repair",
            report.failures()
        )));
    }
    Ok(dec)
}

fn assemble(
    n: usize,
    member: &[Option<usize>],
    clusters: &[Vec<usize>],
    eps: f64,
    theta: f64,
) -> Decomposition {
    let sparse = (0..n).filter(|&v| member[v].is_none()).collect();
    let clusters = clusters
        .iter()
        .map(|c| c.iter().copied().filter(|&v| member[v].is_some()).collect::<Vec<_>>())
        .filter(|c| !c.is_empty())
        .collect();
    Decomposition { sparse, clusters, eps, theta }
}

fn find(parent: &mut [usize], mut v: usize) -> usize {
    while parent[v] != v {
        parent[v] = parent[parent[v]];
        v = parent[v];
    }
    v
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        parent[ra.max(rb)] = ra.min(rb);
    }
}
