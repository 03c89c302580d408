//! Coloring one cluster given the colors already placed outside it.
//!
//! With `H = Ḡ[C]` and `ζ = e(H)/D²`, a cluster with small `ζ` is colored by
//! a spread `C`-perfect matching into the legal-color bigraph. A cluster with
//! large `ζ` first gives `ηD` random non-adjacent pairs a shared color each,
//! then matches the remaining vertices into the remaining colors.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, PartialColoring};
use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::matching::{spread_x_perfect_matching, Bigraph, DenseParams, LemmaOutcome};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub eps: f64,
    pub zeta0_override: Option<f64>,
    pub eta_override: Option<f64>,
    /// Multiplicative margin standing in for `≪` in the parameter hierarchy.
    pub h_margin: f64,
    pub dense: DenseParams,
}

/// A cluster together with the legal-color bigraph against the current
/// coloring outside it. Local vertex `i` is `cluster[i]`; color index `j` of
/// the bigraph is color `j + 1`.
#[derive(Debug, Clone)]
pub struct ClusterContext {
    pub cluster: Vec<usize>,
    pub d: usize,
    /// `Ḡ[C]` on local ids.
    pub h: Graph,
    pub zeta: f64,
    pub legal: Bigraph,
    pub eps: f64,
    pub zeta0: f64,
}

impl ClusterContext {
    pub fn is_large(&self) -> bool {
        self.zeta >= self.zeta0
    }

    /// `η` rounded so that `ηD` is a positive integer, and that integer.
    pub fn eta(&self, params: &ClusterParams) -> (f64, usize) {
        let d = self.d as f64;
        let raw = params.eta_override.unwrap_or_else(|| {
            (self.zeta.max(1.0 / d) * (self.zeta / self.eps).min(1.0)).sqrt()
        });
        let rounds = ((raw * d).round() as usize).max(1);
        (rounds as f64 / d, rounds)
    }

    /// `1/D < η`, `h·ζ ≤ η` and `h·η ≤ min(ζ/ε, 1)`.
    pub fn check_hierarchy(&self, eta: f64, h_margin: f64) -> Result<()> {
        let d = self.d as f64;
        let bound = (self.zeta / self.eps).min(1.0);
        if !(1.0 / d < eta) {
            return Err(Error::HypothesisViolated(format!("eta = {eta} is not above 1/D = {}", 1.0 / d)));
        }
        if !(h_margin * self.zeta <= eta) {
            return Err(Error::HypothesisViolated(format!(
                "eta = {eta} is not {h_margin} times above zeta = {}",
                self.zeta
            )));
        }
        if !(h_margin * eta <= bound) {
            return Err(Error::HypothesisViolated(format!(
                "eta = {eta} is not {h_margin} times below min(zeta/eps, 1) = {bound}"
            )));
        }
        Ok(())
    }
}

/// Builds the context of cluster `cluster` of the `D`-regular graph `g`;
/// `sigma` holds the colors fixed so far (vertices of `cluster` are ignored).
pub fn build_cluster_context(
    g: &Graph,
    cluster: &[usize],
    sigma: &PartialColoring,
    params: &ClusterParams,
) -> Result<ClusterContext> {
    let d = g.require_regular()?;
    if cluster.is_empty() || d == 0 {
        return Err(Error::InvalidParameter("cluster must be nonempty with D >= 1".into()));
    }
    let mut cluster = cluster.to_vec();
    cluster.sort_unstable();
    let mut local = vec![usize::MAX; g.n()];
    for (i, &v) in cluster.iter().enumerate() {
        g.check_vertex(v)?;
        local[v] = i;
    }
    let bound = params.eps * d as f64;
    for &v in &cluster {
        let inside = g.neighbors(v).iter().filter(|&&u| local[u] != usize::MAX).count();
        let outside = d - inside;
        let missing = cluster.len() - 1 - inside;
        if outside as f64 >= bound || missing as f64 >= bound {
            return Err(Error::HypothesisViolated(format!(
                "vertex {v} violates the cluster condition (|N_v \\ C| = {outside}, |C \\ N[v]| = {missing}, eps*D = {bound})"
            )));
        }
    }
    let k = cluster.len();
    let mut h_edges = Vec::new();
    for i in 0..k {
        for j in i + 1..k {
            if !g.has_edge(cluster[i], cluster[j]) {
                h_edges.push((i, j));
            }
        }
    }
    let h = Graph::from_edges(k, &h_edges)?;
    let df = d as f64;
    let zeta = h.edge_count() as f64 / (df * df);
    if k >= d + 2 {
        ensure!(zeta >= 1.0 / (2.0 * df), "|C| = {k} >= D + 2 but zeta = {zeta} < 1/(2D)");
    }

    let palette_size = d + 1;
    let left = cluster
        .iter()
        .map(|&v| {
            let mut used = vec![false; palette_size];
            for &u in g.neighbors(v).iter().filter(|&&u| local[u] == usize::MAX) {
                if let Some(c) = sigma.get(u) {
                    if (1..=palette_size as Color).contains(&c) {
                        used[c as usize - 1] = true;
                    }
                }
            }
            (0..palette_size).filter(|&j| !used[j]).collect()
        })
        .collect();
    let legal = Bigraph::from_left_adjacency(palette_size, left)?;
    Ok(ClusterContext {
        cluster,
        d,
        h,
        zeta,
        legal,
        eps: params.eps,
        zeta0: params.zeta0_override.unwrap_or(params.eps.sqrt() / df),
    })
}

/// One round of the pair process: local vertices `u < v` share `color`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PairAssignment {
    pub u: usize,
    pub v: usize,
    pub color: Color,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProcessOutcome {
    pub pairs: Vec<PairAssignment>,
    /// `e(H_{i-1})` at the start of each round.
    pub edges: Vec<usize>,
    /// Common available colors of the chosen pair in each round.
    pub common: Vec<usize>,
}

/// `rounds` rounds of: pick a uniform edge `uv` of what is left of `H`, pick
/// a uniform color legal at both and still unused, give it to both, and
/// remove `u`, `v` and the color.
pub fn process_pair_coloring<R: Rng + ?Sized>(
    ctx: &ClusterContext,
    eta: f64,
    rounds: usize,
    rng: &mut R,
) -> Result<ProcessOutcome> {
    let k = ctx.cluster.len();
    let d = ctx.d as f64;
    let palette_size = ctx.d + 1;
    let mut alive = vec![true; k];
    let mut color_free = vec![true; palette_size];
    let mut out = ProcessOutcome { pairs: Vec::new(), edges: Vec::new(), common: Vec::new() };
    let edge_floor = (ctx.zeta - 2.0 * eta * ctx.eps) * d * d;
    let color_floor = (1.0 - 2.0 * ctx.eps - eta) * d;
    for i in 1..=rounds {
        let edges: Vec<(usize, usize)> =
            ctx.h.edges().filter(|&(a, b)| alive[a] && alive[b]).collect();
        let &(u, v) = edges
            .choose(rng)
            .ok_or_else(|| Error::EmptyChoiceSet(format!("round {i}: no edge left in H")))?;
        ensure!(
            edges.len() as f64 > edge_floor,
            "round {i}: e(H) = {} not above (zeta - 2 eta eps)D^2 = {edge_floor}",
            edges.len()
        );
        let common: Vec<usize> = ctx
            .legal
            .left_neighbors(u)
            .iter()
            .copied()
            .filter(|&c| color_free[c] && ctx.legal.has_edge(v, c))
            .collect();
        let &c = common
            .choose(rng)
            .ok_or_else(|| Error::EmptyChoiceSet(format!("round {i}: no common legal color")))?;
        ensure!(
            common.len() as f64 > color_floor,
            "round {i}: {} common colors, not above (1 - 2 eps - eta)D = {color_floor}",
            common.len()
        );
        out.edges.push(edges.len());
        out.common.push(common.len());
        out.pairs.push(PairAssignment { u, v, color: c as Color + 1 });
        alive[u] = false;
        alive[v] = false;
        color_free[c] = false;
    }
    let mut uses = vec![0usize; palette_size + 1];
    for p in &out.pairs {
        uses[p.color as usize] += 2;
        ensure!(ctx.h.has_edge(p.u, p.v), "pair ({}, {}) is adjacent in G", p.u, p.v);
    }
    ensure!(
        uses.iter().all(|&n| n == 0 || n == 2),
        "a process color is not used exactly twice"
    );
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterPath {
    Small,
    Large,
}

#[derive(Debug, Clone, Serialize)]
pub struct ClusterOutcome {
    pub path: ClusterPath,
    /// `(original vertex, color)` for every cluster vertex.
    pub coloring: Vec<(usize, Color)>,
    pub z: f64,
    pub eta: Option<f64>,
    pub process: Option<ProcessOutcome>,
    pub lemma: LemmaOutcome,
}

/// Colors the cluster of `ctx` properly and consistently with the colors
/// outside it.
pub fn color_cluster<R: Rng + ?Sized>(
    ctx: &ClusterContext,
    rng: &mut R,
    params: &ClusterParams,
) -> Result<ClusterOutcome> {
    let k = ctx.cluster.len();
    let palette_size = ctx.d + 1;
    let d = ctx.d as f64;
    let d_h: Vec<i64> = (0..k).map(|x| ctx.h.degree(x) as i64).collect();
    let mut colors: Vec<Option<Color>> = vec![None; k];

    let (path, z, eta, process, lemma) = if !ctx.is_large() {
        let big_r = palette_size as i64 - k as i64;
        if big_r < 0 {
            return Err(Error::NegativeR(big_r));
        }
        let z = 3.0 * (ctx.eps + ctx.zeta * d);
        let lemma = spread_x_perfect_matching(&ctx.legal, z, &d_h, rng, &params.dense)?;
        for &(x, c) in &lemma.matching.pairs {
            colors[x] = Some(c as Color + 1);
        }
        (ClusterPath::Small, z, None, None, lemma)
    } else {
        let (eta, rounds) = ctx.eta(params);
        ctx.check_hierarchy(eta, params.h_margin)?;
        let big_r = palette_size as i64 - k as i64 + rounds as i64;
        if big_r < 0 {
            return Err(Error::NegativeR(big_r));
        }
        if 2 * rounds > k {
            return Err(Error::HypothesisViolated(format!("{rounds} rounds need {} vertices", 2 * rounds)));
        }
        let process = process_pair_coloring(ctx, eta, rounds, rng)?;
        let mut used = vec![false; palette_size];
        for p in &process.pairs {
            colors[p.u] = Some(p.color);
            colors[p.v] = Some(p.color);
            used[p.color as usize - 1] = true;
        }
        let rest: Vec<usize> = (0..k).filter(|&x| colors[x].is_none()).collect();
        let free: Vec<usize> = (0..palette_size).filter(|&c| !used[c]).collect();
        let sub = ctx.legal.induced(&rest, &free);
        let slack: Vec<i64> = rest.iter().map(|&x| d_h[x] - rounds as i64).collect();
        let z = 2.0 * (ctx.eps + eta);
        let lemma = spread_x_perfect_matching(&sub, z, &slack, rng, &params.dense)?;
        for &(a, c) in &lemma.matching.pairs {
            colors[rest[a]] = Some(free[c] as Color + 1);
        }
        (ClusterPath::Large, z, Some(eta), Some(process), lemma)
    };

    let mut coloring = Vec::with_capacity(k);
    for (x, c) in colors.iter().enumerate() {
        let c = c.ok_or_else(|| Error::AssertionFailed(format!("cluster vertex {} left uncolored", ctx.cluster[x])))?;
        ensure!(ctx.legal.has_edge(x, c as usize - 1), "vertex {} got an illegal color {c}", ctx.cluster[x]);
        coloring.push((ctx.cluster[x], c));
    }
    for x in 0..k {
        for y in x + 1..k {
            if colors[x] == colors[y] {
                ensure!(
                    ctx.h.has_edge(x, y),
                    "adjacent cluster vertices {} and {} share color",
                    ctx.cluster[x],
                    ctx.cluster[y]
                );
            }
        }
    }
    Ok(ClusterOutcome { path, coloring, z, eta, process, lemma })
}
