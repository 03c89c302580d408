//! Hypergraph expense and cost, exact list colorability, and the palette
//! sparsification experiment.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::index::sample as sample_indices;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, ListAssignment};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::par::{map_indexed, trial_rng, Execution};
use crate::stats::wilson_interval;

pub const MAX_COST_GROUND: usize = 16;
pub const DEFAULT_COLORABILITY_CAP: u64 = 2_000_000;

/// A ground element named by a string or an integer in input files.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum Label {
    Name(String),
    Number(i64),
}

impl Label {
    fn into_name(self) -> String {
        match self {
            Label::Name(s) => s,
            Label::Number(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
struct HypergraphFile {
    ground: Vec<Label>,
    edges: Vec<Vec<Label>>,
    #[serde(default)]
    q: BTreeMap<String, f64>,
}

/// Edges are bitmasks over the ground set.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hypergraph {
    ground: Vec<String>,
    edges: Vec<u32>,
}

fn elements(mask: u32) -> impl Iterator<Item = usize> {
    (0..32).filter(move |&i| mask >> i & 1 == 1)
}

impl Hypergraph {
    pub fn new(ground_size: usize, edges: &[Vec<usize>]) -> Result<Self> {
        let ground = (0..ground_size).map(|i| i.to_string()).collect();
        Self::named(ground, edges)
    }

    pub fn named(ground: Vec<String>, edges: &[Vec<usize>]) -> Result<Self> {
        if ground.len() > 32 {
            return Err(Error::InvalidParameter(format!("ground set of {} exceeds 32", ground.len())));
        }
        let mut masks = Vec::with_capacity(edges.len());
        for e in edges {
            let mut m = 0u32;
            for &x in e {
                if x >= ground.len() {
                    return Err(Error::InvalidParameter(format!("element {x} outside the ground set")));
                }
                m |= 1 << x;
            }
            masks.push(m);
        }
        Ok(Self { ground, edges: masks })
    }

    /// Parses `{ground: [...], edges: [[...]], q: {x: w}}` and returns the
    /// weights in ground order (missing weights are an error).
    pub fn from_json(text: &str) -> Result<(Self, Vec<f64>)> {
        let file: HypergraphFile = serde_json::from_str(text)?;
        let ground: Vec<String> = file.ground.into_iter().map(Label::into_name).collect();
        let index: BTreeMap<&str, usize> = ground.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
        let mut edges = Vec::new();
        for e in file.edges {
            let mut set = Vec::new();
            for x in e {
                let name = x.into_name();
                let &i = index
                    .get(name.as_str())
                    .ok_or_else(|| Error::Parse(format!("edge element {name} not in the ground set")))?;
                set.push(i);
            }
            edges.push(set);
        }
        let weights = ground
            .iter()
            .map(|x| file.q.get(x).copied().ok_or_else(|| Error::Parse(format!("no weight for {x}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok((Self::named(ground.clone(), &edges)?, weights))
    }

    pub fn ground(&self) -> &[String] {
        &self.ground
    }

    pub fn edges(&self) -> Vec<Vec<usize>> {
        self.edges.iter().map(|&m| elements(m).collect()).collect()
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.iter().map(|m| m.count_ones() as usize).max().unwrap_or(0)
    }

    pub fn without_edge(&self, i: usize) -> Self {
        let mut edges = self.edges.clone();
        edges.remove(i);
        Self { ground: self.ground.clone(), edges }
    }
}

/// Exact weights; each `f64` is converted without rounding.
fn exact_weights(h: &Hypergraph, q: &[f64]) -> Result<Vec<BigRational>> {
    if q.len() != h.ground.len() {
        return Err(Error::InvalidParameter(format!("{} weights for {} elements", q.len(), h.ground.len())));
    }
    q.iter()
        .map(|&w| {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::InvalidParameter(format!("weight {w} outside [0, 1]")));
            }
            Ok(BigRational::from_float(w).expect("finite weight"))
        })
        .collect()
}

fn set_weight(mask: u32, q: &[BigRational]) -> BigRational {
    elements(mask).fold(BigRational::one(), |acc, x| acc * &q[x])
}

/// `Σ_{A ∈ F} Π_{x ∈ A} q_x`, exactly.
pub fn expense_exact(h: &Hypergraph, q: &[f64]) -> Result<BigRational> {
    let q = exact_weights(h, q)?;
    Ok(h.edges.iter().map(|&m| set_weight(m, &q)).sum())
}

pub fn expense(h: &Hypergraph, q: &[f64]) -> Result<f64> {
    Ok(expense_exact(h, q)?.to_f64().unwrap_or(f64::NAN))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cost {
    pub value: BigRational,
    /// A cover attaining the value: every edge of `F` contains one of these.
    pub cover: Vec<Vec<usize>>,
}

impl Cost {
    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN)
    }
}

struct CostSearch<'a> {
    edges: Vec<u32>,
    q: &'a [BigRational],
    best: Option<(BigRational, Vec<u32>)>,
}

impl CostSearch<'_> {
    fn run(&mut self, chosen: &mut Vec<u32>, spent: BigRational) {
        if self.best.as_ref().is_some_and(|(b, _)| spent >= *b) {
            return;
        }
        let Some(&a) = self.edges.iter().find(|&&a| !chosen.iter().any(|&b| b & !a == 0)) else {
            self.best = Some((spent, chosen.clone()));
            return;
        };
        // Every subset of the first uncovered edge; none contains a chosen
        // set, and subsets of a chosen set would make it redundant.
        let mut b = a;
        loop {
            if !chosen.iter().any(|&c| b & c == b) {
                let w = set_weight(b, self.q);
                chosen.push(b);
                self.run(chosen, &spent + w);
                chosen.pop();
            }
            if b == 0 {
                break;
            }
            b = (b - 1) & a;
        }
    }
}

/// Minimum expense over hypergraphs `G` such that every edge of `F` contains
/// an edge of `G`, by branch and bound over antichains of subsets of edges.
pub fn cost_bruteforce(h: &Hypergraph, q: &[f64]) -> Result<Cost> {
    if h.ground.len() > MAX_COST_GROUND {
        return Err(Error::CapExceeded(MAX_COST_GROUND as u64));
    }
    let qx = exact_weights(h, q)?;
    let mut minimal: Vec<u32> = Vec::new();
    let mut sorted = h.edges.clone();
    sorted.sort_by_key(|m| (m.count_ones(), *m));
    sorted.dedup();
    for a in sorted {
        if !minimal.iter().any(|&b| b & !a == 0) {
            minimal.push(a);
        }
    }
    let mut search = CostSearch { edges: minimal, q: &qx, best: None };
    search.run(&mut Vec::new(), BigRational::zero());
    let (value, cover) = search.best.expect("the edges themselves form a cover");
    Ok(Cost { value, cover: cover.iter().map(|&m| elements(m).collect()).collect() })
}

/// Bitset backtracking with forward checking, always branching on the
/// vertex with the fewest remaining colors. Vertices whose list outgrows
/// their remaining degree are peeled off first, since they can always be
/// colored last.
struct ListSolver<'a> {
    g: &'a Graph,
    active: Vec<usize>,
    domains: Vec<u128>,
    assigned: Vec<bool>,
    nodes: u64,
    cap: u64,
}

impl ListSolver<'_> {
    fn solve(&mut self, remaining: usize) -> Result<bool> {
        if remaining == 0 {
            return Ok(true);
        }
        let mut best: Option<(usize, u32)> = None;
        for &v in &self.active {
            if self.assigned[v] {
                continue;
            }
            let k = self.domains[v].count_ones();
            if best.is_none_or(|(_, b)| k < b) {
                best = Some((v, k));
                if k <= 1 {
                    break;
                }
            }
        }
        let (v, _) = best.expect("an unassigned vertex remains");
        let mut options = self.domains[v];
        while options != 0 {
            let bit = options & options.wrapping_neg();
            options ^= bit;
            self.nodes += 1;
            if self.nodes > self.cap {
                return Err(Error::CapExceeded(self.cap));
            }
            self.assigned[v] = true;
            let mut trail = Vec::new();
            let mut dead = false;
            for &u in self.g.neighbors(v) {
                if !self.assigned[u] && self.domains[u] & bit != 0 {
                    self.domains[u] &= !bit;
                    trail.push(u);
                    if self.domains[u] == 0 {
                        dead = true;
                    }
                }
            }
            if !dead && self.solve(remaining - 1)? {
                return Ok(true);
            }
            for u in trail {
                self.domains[u] |= bit;
            }
            self.assigned[v] = false;
        }
        Ok(false)
    }
}

/// Whether `g` has a proper coloring from `lists`. Colors must lie in
/// `0..128`. Gives `CapExceeded` after `cap` branching steps.
pub fn decide_list_colorable(g: &Graph, lists: &ListAssignment, cap: u64) -> Result<bool> {
    let n = g.n();
    if lists.len() != n {
        return Err(Error::InvalidParameter(format!("{} lists for {n} vertices", lists.len())));
    }
    let mut domains = Vec::with_capacity(n);
    for v in 0..n {
        let mut m = 0u128;
        for &c in lists.list(v) {
            if c >= 128 {
                return Err(Error::InvalidParameter(format!("color {c} exceeds the bitset width")));
            }
            m |= 1 << c;
        }
        if m == 0 {
            return Ok(false);
        }
        domains.push(m);
    }
    let mut removed = vec![false; n];
    let mut deg: Vec<usize> = (0..n).map(|v| g.degree(v)).collect();
    let mut stack: Vec<usize> = (0..n).filter(|&v| domains[v].count_ones() as usize > deg[v]).collect();
    while let Some(v) = stack.pop() {
        if removed[v] {
            continue;
        }
        removed[v] = true;
        for &u in g.neighbors(v) {
            if !removed[u] {
                deg[u] -= 1;
                if domains[u].count_ones() as usize > deg[u] {
                    stack.push(u);
                }
            }
        }
    }
    let active: Vec<usize> = (0..n).filter(|&v| !removed[v]).collect();
    let mut assigned = vec![false; n];
    for v in (0..n).filter(|&v| removed[v]) {
        assigned[v] = true;
    }
    let remaining = active.len();
    let mut solver = ListSolver { g, active, domains, assigned, nodes: 0, cap };
    solver.solve(remaining)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurveRow {
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    /// Runs that hit the search cap; counted as failures.
    pub indeterminate: usize,
    pub rate: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SparsificationCurve {
    pub n: usize,
    pub d: usize,
    pub rows: Vec<CurveRow>,
}

impl SparsificationCurve {
    /// Each rate's upper bound reaches the previous rate's lower bound.
    pub fn monotone_within_ci(&self) -> bool {
        self.rows.windows(2).all(|w| w[1].ci_hi >= w[0].ci_lo)
    }

    pub fn row(&self, k: usize) -> Option<&CurveRow> {
        self.rows.iter().find(|r| r.k == k)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,trials,successes,rate,ci_lo,ci_hi\n");
        for r in &self.rows {
            let _ = writeln!(out, "{},{},{},{},{},{}", r.k, r.trials, r.successes, r.rate, r.ci_lo, r.ci_hi);
        }
        out
    }
}

/// Uniform `k`-subset of `[palette_size]`, sorted.
pub fn random_sublist<R: rand::Rng + ?Sized>(rng: &mut R, palette_size: usize, k: usize) -> Vec<Color> {
    let mut list: Vec<Color> = sample_indices(rng, palette_size, k).into_iter().map(|i| i as Color + 1).collect();
    list.sort_unstable();
    list
}

/// For each `k`, the fraction of `trials` independent uniform `k`-sublists
/// of `[D+1]` per vertex under which `g` stays colorable. Trial `t` of the
/// `i`-th `k` uses stream `(i << 32) | t`.
pub fn sparsification_scan(
    g: &Graph,
    k_values: &[usize],
    trials: usize,
    seed: u64,
    cap: u64,
    exec: Execution,
) -> Result<SparsificationCurve> {
    let d = g.max_degree();
    let palette_size = d + 1;
    if k_values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("k values must be strictly increasing".into()));
    }
    if let Some(&k) = k_values.iter().find(|&&k| k == 0 || k > palette_size) {
        return Err(Error::InvalidParameter(format!("k = {k} outside 1..={palette_size}")));
    }
    if trials == 0 {
        return Err(Error::InvalidParameter("need at least one trial".into()));
    }
    let mut rows = Vec::with_capacity(k_values.len());
    for (i, &k) in k_values.iter().enumerate() {
        let outcomes = map_indexed(exec, trials, |t| {
            let mut rng = trial_rng(seed, ((i as u64) << 32) | t as u64);
            let lists: Vec<Vec<Color>> = (0..g.n()).map(|_| random_sublist(&mut rng, palette_size, k)).collect();
            let lists = ListAssignment::new(lists)?;
            match decide_list_colorable(g, &lists, cap) {
                Ok(b) => Ok(Some(b)),
                Err(Error::CapExceeded(_)) => Ok(None),
                Err(e) => Err(e),
            }
        });
        let outcomes = outcomes.into_iter().collect::<Result<Vec<_>>>()?;
        let successes = outcomes.iter().filter(|o| **o == Some(true)).count();
        let indeterminate = outcomes.iter().filter(|o| o.is_none()).count();
        let (ci_lo, ci_hi) = wilson_interval(successes as u64, trials as u64);
        rows.push(CurveRow {
            k,
            trials,
            successes,
            indeterminate,
            rate: successes as f64 / trials as f64,
            ci_lo,
            ci_hi,
        });
    }
    Ok(SparsificationCurve { n: g.n(), d, rows })
}
