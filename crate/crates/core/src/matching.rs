//! Bipartite matching: maximum matching, random k-out subgraphs, spread
//! perfect matchings of dense bigraphs, and spread `X`-perfect matchings of
//! nearly complete bigraphs with a few unpopular right vertices.

use std::collections::VecDeque;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{ensure, Error, Result};

/// Bipartite graph on `(X, Y)` with `X = 0..nx` and `Y = 0..ny`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bigraph {
    left: Vec<Vec<usize>>,
    right: Vec<Vec<usize>>,
}

impl Bigraph {
    pub fn new(nx: usize, ny: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut left = vec![Vec::new(); nx];
        for &(x, y) in edges {
            if x >= nx || y >= ny {
                return Err(Error::InvalidParameter(format!("edge ({x}, {y}) outside {nx} x {ny}")));
            }
            left[x].push(y);
        }
        Self::from_left_adjacency(ny, left)
    }

    /// Builds from the neighbor lists of `X`; duplicates are rejected.
    pub fn from_left_adjacency(ny: usize, mut left: Vec<Vec<usize>>) -> Result<Self> {
        let mut right = vec![Vec::new(); ny];
        for (x, list) in left.iter_mut().enumerate() {
            list.sort_unstable();
            if list.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidParameter(format!("repeated edge at x = {x}")));
            }
            for &y in list.iter() {
                if y >= ny {
                    return Err(Error::InvalidParameter(format!("color {y} outside 0..{ny}")));
                }
                right[y].push(x);
            }
        }
        Ok(Self { left, right })
    }

    pub fn complete(nx: usize, ny: usize) -> Self {
        Self { left: vec![(0..ny).collect(); nx], right: vec![(0..nx).collect(); ny] }
    }

    pub fn nx(&self) -> usize {
        self.left.len()
    }

    pub fn ny(&self) -> usize {
        self.right.len()
    }

    pub fn left_neighbors(&self, x: usize) -> &[usize] {
        &self.left[x]
    }

    pub fn right_neighbors(&self, y: usize) -> &[usize] {
        &self.right[y]
    }

    pub fn left_degree(&self, x: usize) -> usize {
        self.left[x].len()
    }

    pub fn right_degree(&self, y: usize) -> usize {
        self.right[y].len()
    }

    pub fn has_edge(&self, x: usize, y: usize) -> bool {
        self.left[x].binary_search(&y).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.left.iter().map(Vec::len).sum()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left.iter().enumerate().flat_map(|(x, l)| l.iter().map(move |&y| (x, y)))
    }

    /// `B[xs, ys]`, relabelled in the given orders.
    pub fn induced(&self, xs: &[usize], ys: &[usize]) -> Bigraph {
        let mut y_index = vec![usize::MAX; self.ny()];
        for (i, &y) in ys.iter().enumerate() {
            y_index[y] = i;
        }
        let left = xs
            .iter()
            .map(|&x| self.left[x].iter().filter_map(|&y| (y_index[y] != usize::MAX).then_some(y_index[y])).collect())
            .collect();
        Self::from_left_adjacency(ys.len(), left).expect("induced bigraph is simple")
    }

    /// Smallest degree over both sides; `None` when both sides are empty.
    pub fn min_degree(&self) -> Option<usize> {
        self.left.iter().chain(self.right.iter()).map(Vec::len).min()
    }
}

/// Disjoint edges `(x, y)`, sorted by `x`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Every pair is an edge of `b` and no endpoint repeats.
    pub fn is_valid_in(&self, b: &Bigraph) -> bool {
        let mut used_x = vec![false; b.nx()];
        let mut used_y = vec![false; b.ny()];
        self.pairs.iter().all(|&(x, y)| {
            x < b.nx()
                && y < b.ny()
                && b.has_edge(x, y)
                && !std::mem::replace(&mut used_x[x], true)
                && !std::mem::replace(&mut used_y[y], true)
        })
    }

    pub fn covers_left(&self, nx: usize) -> bool {
        let mut covered = vec![false; nx];
        for &(x, _) in &self.pairs {
            if x < nx {
                covered[x] = true;
            }
        }
        covered.into_iter().all(|c| c)
    }

    /// Partner of each `x`.
    pub fn left_map(&self, nx: usize) -> Vec<Option<usize>> {
        let mut out = vec![None; nx];
        for &(x, y) in &self.pairs {
            out[x] = Some(y);
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaximumMatching {
    pub matching: Matching,
    pub left_perfect: bool,
}

/// Maximum matching by Hopcroft–Karp; deterministic for a fixed bigraph.
pub fn perfect_matching(b: &Bigraph) -> MaximumMatching {
    const NIL: usize = usize::MAX;
    let (nx, ny) = (b.nx(), b.ny());
    let mut mate_x = vec![NIL; nx];
    let mut mate_y = vec![NIL; ny];
    let mut dist = vec![0usize; nx];
    loop {
        let mut queue = VecDeque::new();
        for x in 0..nx {
            if mate_x[x] == NIL {
                dist[x] = 0;
                queue.push_back(x);
            } else {
                dist[x] = usize::MAX;
            }
        }
        let mut found = false;
        while let Some(x) = queue.pop_front() {
            for &y in b.left_neighbors(x) {
                match mate_y[y] {
                    NIL => found = true,
                    x2 if dist[x2] == usize::MAX => {
                        dist[x2] = dist[x] + 1;
                        queue.push_back(x2);
                    }
                    _ => {}
                }
            }
        }
        if !found {
            break;
        }
        let mut next = vec![0usize; nx];
        for x in 0..nx {
            if mate_x[x] == NIL {
                augment(b, x, &mut mate_x, &mut mate_y, &mut dist, &mut next);
            }
        }
    }
    let pairs: Vec<(usize, usize)> =
        (0..nx).filter(|&x| mate_x[x] != NIL).map(|x| (x, mate_x[x])).collect();
    let left_perfect = pairs.len() == nx;
    MaximumMatching { matching: Matching { pairs }, left_perfect }
}

fn augment(
    b: &Bigraph,
    x: usize,
    mate_x: &mut [usize],
    mate_y: &mut [usize],
    dist: &mut [usize],
    next: &mut [usize],
) -> bool {
    while next[x] < b.left_degree(x) {
        let y = b.left_neighbors(x)[next[x]];
        next[x] += 1;
        let x2 = mate_y[y];
        let ok = x2 == usize::MAX
            || (dist[x2] == dist[x] + 1 && augment(b, x2, mate_x, mate_y, dist, next));
        if ok {
            mate_x[x] = y;
            mate_y[y] = x;
            return true;
        }
    }
    dist[x] = usize::MAX;
    false
}

/// Every vertex on both sides keeps `min(k, degree)` uniformly chosen
/// distinct incident edges; the result is the union of the kept edges.
pub fn kout_subgraph<R: Rng + ?Sized>(b: &Bigraph, k: usize, rng: &mut R) -> Bigraph {
    let mut left: Vec<Vec<usize>> = b
        .left
        .iter()
        .map(|nbrs| nbrs.choose_multiple(rng, k.min(nbrs.len())).copied().collect())
        .collect();
    for (y, nbrs) in b.right.iter().enumerate() {
        for &x in nbrs.choose_multiple(rng, k.min(nbrs.len())) {
            left[x].push(y);
        }
    }
    for list in &mut left {
        list.sort_unstable();
        list.dedup();
    }
    Bigraph::from_left_adjacency(b.ny(), left).expect("subgraph of a simple bigraph")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DenseParams {
    /// Initial out-degree of the k-out subgraph.
    pub k: usize,
    /// Largest out-degree reached by doubling.
    pub k_max: usize,
    pub lambda_max: f64,
    pub max_tries: usize,
}

impl Default for DenseParams {
    fn default() -> Self {
        Self { k: 3, k_max: 16, lambda_max: 0.25, max_tries: 10_000 }
    }
}

/// Attempts per batch; a batch without success counts as acceptance below 1%.
const DENSE_BATCH: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DenseOutcome {
    pub matching: Matching,
    pub attempts: usize,
    pub k_used: usize,
}

/// Perfect matching of a balanced bigraph with all degrees at least
/// `(1 - λ)I`: draw k-out subgraphs until one has a perfect matching, and
/// return its Hopcroft–Karp matching.
pub fn spread_matching_dense<R: Rng + ?Sized>(
    f: &Bigraph,
    lambda: f64,
    rng: &mut R,
    params: &DenseParams,
) -> Result<DenseOutcome> {
    let i = f.nx();
    if f.ny() != i {
        return Err(Error::HypothesisViolated(format!("sides differ: {} vs {}", i, f.ny())));
    }
    if !(lambda <= params.lambda_max) {
        return Err(Error::HypothesisViolated(format!(
            "lambda = {lambda} exceeds lambda_max = {}",
            params.lambda_max
        )));
    }
    let floor = (1.0 - lambda) * i as f64;
    if let Some(min) = f.min_degree() {
        if (min as f64) < floor - 1e-9 {
            return Err(Error::HypothesisViolated(format!(
                "minimum degree {min} below (1 - lambda)I = {floor}"
            )));
        }
    }
    if !perfect_matching(f).left_perfect {
        return Err(Error::HypothesisViolated("bigraph has no perfect matching".into()));
    }
    if params.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut k = params.k;
    for attempt in 0..params.max_tries {
        if attempt > 0 && attempt % DENSE_BATCH == 0 {
            k = (2 * k).min(params.k_max.max(params.k));
        }
        let sub = kout_subgraph(f, k, rng);
        let result = perfect_matching(&sub);
        if result.left_perfect {
            return Ok(DenseOutcome { matching: result.matching, attempts: attempt + 1, k_used: k });
        }
    }
    Err(Error::MaxTriesExceeded(params.max_tries))
}

/// `r_x = J - d_B(x)`, the smallest slack satisfying the degree hypothesis.
pub fn tight_slack(b: &Bigraph) -> Vec<i64> {
    let j = b.nx() as i64;
    (0..b.nx()).map(|x| j - b.left_degree(x) as i64).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaOutcome {
    pub matching: Matching,
    pub delta: f64,
    pub unpopular: usize,
    /// `|𝒰| - R`.
    pub r: i64,
    /// `e(B[X_i, 𝒰_i])` for `i = 0..=r` when `r > 0`.
    pub greedy_edges: Vec<usize>,
    /// `1 - min_deg(F)/I` for the dense-phase bigraph `F`.
    pub lambda: f64,
    pub dense_attempts: usize,
    pub k_used: usize,
}

/// Spread `X`-perfect matching of a bigraph on `(X, Y)` with `|Y| = |X| + R`
/// whose left degrees satisfy `d(x) >= J - r_x`.
///
/// A few unpopular right vertices (degree below `(1-δ)J`, `δ = 5√z`) are
/// matched first by uniformly random edges; the rest is a dense spread
/// perfect matching.
pub fn spread_x_perfect_matching<R: Rng + ?Sized>(
    b: &Bigraph,
    z: f64,
    slack: &[i64],
    rng: &mut R,
    params: &DenseParams,
) -> Result<LemmaOutcome> {
    let j = b.nx();
    let jf = j as f64;
    let hyp = |msg: String| Err(Error::HypothesisViolated(msg));
    if !(z > 0.0) {
        return hyp(format!("z = {z} must be positive"));
    }
    if slack.len() != j {
        return Err(Error::InvalidParameter(format!("{} slacks for {j} left vertices", slack.len())));
    }
    if b.ny() < j {
        return hyp(format!("R = {} is negative", b.ny() as i64 - j as i64));
    }
    let big_r = b.ny() - j;
    if big_r as f64 > z * jf {
        return hyp(format!("R = {big_r} exceeds zJ = {}", z * jf));
    }
    for x in 0..j {
        if (b.left_degree(x) as i64) < j as i64 - slack[x] {
            return hyp(format!("d(x) = {} < J - r_x = {} at x = {x}", b.left_degree(x), j as i64 - slack[x]));
        }
    }
    let max_r = slack.iter().copied().max().unwrap_or(0);
    if max_r as f64 > z * jf {
        return hyp(format!("max r_x = {max_r} exceeds zJ = {}", z * jf));
    }
    let sum_r: i64 = slack.iter().sum();
    if sum_r as f64 > z * jf {
        return hyp(format!("sum r_x = {sum_r} exceeds zJ = {}", z * jf));
    }

    let delta = 5.0 * z.sqrt();
    let unpopular: Vec<usize> = (0..b.ny()).filter(|&y| (b.right_degree(y) as f64) < (1.0 - delta) * jf).collect();
    let u_len = unpopular.len();
    if u_len as f64 >= delta * jf / 20.0 && u_len > 0 {
        return hyp(format!("|U| = {u_len} is not below delta*J/20 = {}", delta * jf / 20.0));
    }
    let tol = 1e-9;
    ensure!(
        u_len as f64 <= (big_r as f64 + z) / delta + tol,
        "|U| = {u_len} exceeds (R + z)/delta = {}",
        (big_r as f64 + z) / delta
    );
    let r = u_len as i64 - big_r as i64;

    let mut in_x = vec![true; j];
    let mut matching = Vec::new();
    let mut greedy_edges = Vec::new();
    let (v0, v1): (Vec<usize>, Vec<usize>) = if r > 0 {
        let ru = r as usize;
        let mut in_u = vec![false; b.ny()];
        for &y in &unpopular {
            in_u[y] = true;
        }
        let count = |in_x: &[bool], in_u: &[bool]| -> usize {
            unpopular.iter().filter(|&&y| in_u[y]).map(|&y| b.right_neighbors(y).iter().filter(|&&x| in_x[x]).count()).sum()
        };
        let e0 = count(&in_x, &in_u);
        ensure!(
            e0 as f64 >= jf * (r as f64 - z) - tol,
            "e(X, U) = {e0} below J(r - z) = {}",
            jf * (r as f64 - z)
        );
        let step_loss = u_len as f64 + (1.0 - delta) * jf;
        let floor = r as f64 * delta * jf / 2.0;
        ensure!(e0 as f64 >= floor - tol, "e_0 = {e0} below r*delta*J/2 = {floor}");
        greedy_edges.push(e0);
        for i in 1..=ru {
            let edges: Vec<(usize, usize)> = unpopular
                .iter()
                .filter(|&&y| in_u[y])
                .flat_map(|&y| b.right_neighbors(y).iter().filter(|&&x| in_x[x]).map(move |&x| (x, y)))
                .collect();
            let &(x, y) = edges
                .choose(rng)
                .ok_or_else(|| Error::EmptyChoiceSet(format!("no edge between X_{} and U_{}", i - 1, i - 1)))?;
            matching.push((x, y));
            in_x[x] = false;
            in_u[y] = false;
            let e_i = count(&in_x, &in_u);
            let e_prev = greedy_edges[i - 1];
            ensure!(
                e_i as f64 >= e_prev as f64 - step_loss - tol,
                "step {i}: e = {e_i} lost more than |U| + (1 - delta)J from {e_prev}"
            );
            ensure!(
                e_i as f64 >= jf * (r as f64 - z) - i as f64 * step_loss - tol,
                "step {i}: e = {e_i} below J(r - z) - i(|U| + (1 - delta)J)"
            );
            ensure!(e_i as f64 >= floor - tol, "step {i}: e = {e_i} below r*delta*J/2 = {floor}");
            greedy_edges.push(e_i);
        }
        (
            (0..j).filter(|&x| in_x[x]).collect(),
            (0..b.ny()).filter(|&y| !in_u[y] && !unpopular.contains(&y)).collect(),
        )
    } else {
        let mut by_degree: Vec<usize> = (0..b.ny()).collect();
        by_degree.sort_by_key(|&y| (std::cmp::Reverse(b.right_degree(y)), y));
        by_degree.truncate(j);
        by_degree.sort_unstable();
        ((0..j).collect(), by_degree)
    };

    let i_size = v0.len();
    ensure!(v1.len() == i_size, "dense phase sides differ: {} vs {}", i_size, v1.len());
    let f = b.induced(&v0, &v1);
    let lambda = match f.min_degree() {
        Some(min) if i_size > 0 => 1.0 - min as f64 / i_size as f64,
        _ => 0.0,
    };
    ensure!(lambda <= 2.0 * delta + tol, "dense phase degree ratio {lambda} exceeds 2*delta = {}", 2.0 * delta);
    let (dense_attempts, k_used) = if i_size > 0 {
        let dense = spread_matching_dense(&f, lambda, rng, params)?;
        for &(a, c) in &dense.matching.pairs {
            matching.push((v0[a], v1[c]));
        }
        (dense.attempts, dense.k_used)
    } else {
        (0, params.k)
    };
    matching.sort_unstable();
    let matching = Matching { pairs: matching };
    ensure!(matching.is_valid_in(b), "matching uses a non-edge or repeats an endpoint");
    ensure!(matching.covers_left(j), "matching is not X-perfect");
    Ok(LemmaOutcome {
        matching,
        delta,
        unpopular: u_len,
        r,
        greedy_edges,
        lambda,
        dense_attempts,
        k_used,
    })
}
