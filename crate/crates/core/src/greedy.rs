//! Greedy samplers, exact enumeration of list colorings, and the three
//! instances on which natural coloring distributions fail to be spread.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::{palette, Color, ListAssignment, Pair, PartialColoring};
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Default node budget of the exact enumerator.
pub const DEFAULT_ENUMERATION_CAP: u64 = 100_000_000;

fn check_lists(g: &Graph, lists: &ListAssignment) -> Result<()> {
    if lists.len() != g.n() {
        return Err(Error::InvalidParameter(format!(
            "{} lists for a graph on {} vertices",
            lists.len(),
            g.n()
        )));
    }
    Ok(())
}

fn check_order(n: usize, order: &[usize]) -> Result<()> {
    let mut seen = vec![false; n];
    for &v in order {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidParameter("order is not a permutation of the vertices".into()));
        }
    }
    if order.len() != n {
        return Err(Error::InvalidParameter("order is not a permutation of the vertices".into()));
    }
    Ok(())
}

fn available(g: &Graph, lists: &ListAssignment, sigma: &PartialColoring, v: usize) -> Vec<Color> {
    lists
        .list(v)
        .iter()
        .copied()
        .filter(|&c| g.neighbors(v).iter().all(|&u| sigma.get(u) != Some(c)))
        .collect()
}

/// Colors vertices in `order`, each uniformly from its list minus the colors
/// of its already-colored neighbors.
pub fn slack_greedy_sample<R: Rng + ?Sized>(
    g: &Graph,
    lists: &ListAssignment,
    order: &[usize],
    rng: &mut R,
) -> Result<PartialColoring> {
    check_lists(g, lists)?;
    check_order(g.n(), order)?;
    let mut sigma = PartialColoring::new(g.n());
    for &v in order {
        let avail = available(g, lists, &sigma, v);
        let &c = avail.choose(rng).ok_or(Error::StuckVertex(v))?;
        sigma.set(v, c);
    }
    Ok(sigma)
}

/// Exact output distribution of [`slack_greedy_sample`], keyed by the total
/// coloring.
pub fn slack_greedy_distribution(
    g: &Graph,
    lists: &ListAssignment,
    order: &[usize],
) -> Result<BTreeMap<Vec<Color>, BigRational>> {
    check_lists(g, lists)?;
    check_order(g.n(), order)?;
    let mut out = BTreeMap::new();
    let mut sigma = PartialColoring::new(g.n());
    slack_recurse(g, lists, order, &mut sigma, BigRational::one(), &mut out)?;
    Ok(out)
}

fn slack_recurse(
    g: &Graph,
    lists: &ListAssignment,
    order: &[usize],
    sigma: &mut PartialColoring,
    weight: BigRational,
    out: &mut BTreeMap<Vec<Color>, BigRational>,
) -> Result<()> {
    let Some((&v, rest)) = order.split_first() else {
        let key = sigma.to_total().expect("every vertex colored");
        *out.entry(key).or_insert_with(BigRational::zero) += weight;
        return Ok(());
    };
    let avail = available(g, lists, sigma, v);
    if avail.is_empty() {
        return Err(Error::StuckVertex(v));
    }
    let share = weight / BigInt::from(avail.len());
    for c in avail {
        sigma.set(v, c);
        slack_recurse(g, lists, rest, sigma, share.clone(), out)?;
    }
    sigma.unset(v);
    Ok(())
}

/// Repeatedly colors a uniform uncolored vertex with a uniform color of
/// `[Δ+1]` not used on its colored neighbors.
pub fn random_greedy_sample<R: Rng + ?Sized>(g: &Graph, rng: &mut R) -> PartialColoring {
    let lists = ListAssignment::uniform(g.n(), g.max_degree() + 1);
    let mut sigma = PartialColoring::new(g.n());
    let mut uncolored: Vec<usize> = (0..g.n()).collect();
    while !uncolored.is_empty() {
        let v = uncolored.swap_remove(rng.gen_range(0..uncolored.len()));
        let avail = available(g, &lists, &sigma, v);
        sigma.set(v, *avail.choose(rng).expect("palette exceeds degree"));
    }
    sigma
}

/// Exact `P(random greedy outputs target)`, by dynamic programming over the
/// set of already-colored vertices (colors are forced by the target).
pub fn random_greedy_exact(g: &Graph, target: &[Color]) -> Result<BigRational> {
    let n = g.n();
    if target.len() != n {
        return Err(Error::InvalidParameter("target must color every vertex".into()));
    }
    if n > 20 {
        return Err(Error::InvalidParameter(format!("{n} vertices exceed the exact limit of 20")));
    }
    let palette_size = g.max_degree() + 1;
    if target.iter().any(|&c| c == 0 || c as usize > palette_size) {
        return Ok(BigRational::zero());
    }
    let mut prob = vec![BigRational::zero(); 1 << n];
    prob[0] = BigRational::one();
    for mask in 0usize..(1 << n) {
        if prob[mask].is_zero() {
            continue;
        }
        let remaining = n - mask.count_ones() as usize;
        for v in (0..n).filter(|&v| mask & (1 << v) == 0) {
            let used: std::collections::BTreeSet<Color> = g
                .neighbors(v)
                .iter()
                .filter(|&&u| mask & (1 << u) != 0)
                .map(|&u| target[u])
                .collect();
            if used.contains(&target[v]) {
                continue;
            }
            let choices = palette_size - used.len();
            let step = &prob[mask] / BigInt::from(remaining * choices);
            prob[mask | (1 << v)] += step;
        }
    }
    Ok(prob[(1 << n) - 1].clone())
}

/// Lazy enumeration of the proper `S`-colorings of a graph, each yielded once.
///
/// Depth-first search that always branches on the uncolored vertex with the
/// fewest legal colors. Yields `Err(CapExceeded)` and stops once more than
/// `cap` colors have been tried.
pub struct ColoringIter<'a> {
    g: &'a Graph,
    lists: &'a ListAssignment,
    sigma: PartialColoring,
    stack: Vec<Frame>,
    descend: bool,
    done: bool,
    nodes: u64,
    cap: u64,
}

struct Frame {
    vertex: usize,
    candidates: Vec<Color>,
    next: usize,
}

impl<'a> ColoringIter<'a> {
    pub fn new(g: &'a Graph, lists: &'a ListAssignment, cap: u64) -> Result<Self> {
        check_lists(g, lists)?;
        Ok(Self {
            g,
            lists,
            sigma: PartialColoring::new(g.n()),
            stack: Vec::new(),
            descend: true,
            done: false,
            nodes: 0,
            cap,
        })
    }

    /// Colors tried so far.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn most_constrained(&self) -> Option<(usize, Vec<Color>)> {
        let mut best: Option<(usize, Vec<Color>)> = None;
        for v in (0..self.g.n()).filter(|&v| self.sigma.get(v).is_none()) {
            let avail = available(self.g, self.lists, &self.sigma, v);
            if best.as_ref().is_none_or(|(_, b)| avail.len() < b.len()) {
                let empty = avail.is_empty();
                best = Some((v, avail));
                if empty {
                    break;
                }
            }
        }
        best
    }
}

impl Iterator for ColoringIter<'_> {
    type Item = Result<Vec<Color>>;

    fn next(&mut self) -> Option<Self::Item> {
        if self.done {
            return None;
        }
        loop {
            if self.descend {
                self.descend = false;
                match self.most_constrained() {
                    None => {
                        return Some(Ok(self.sigma.to_total().expect("every vertex colored")));
                    }
                    Some((vertex, candidates)) => {
                        self.stack.push(Frame { vertex, candidates, next: 0 })
                    }
                }
            }
            let Some(frame) = self.stack.last_mut() else {
                self.done = true;
                return None;
            };
            let v = frame.vertex;
            if frame.next < frame.candidates.len() {
                let c = frame.candidates[frame.next];
                frame.next += 1;
                self.sigma.set(v, c);
                self.nodes += 1;
                if self.nodes > self.cap {
                    self.done = true;
                    return Some(Err(Error::CapExceeded(self.cap)));
                }
                self.descend = true;
            } else {
                self.sigma.unset(v);
                self.stack.pop();
            }
        }
    }
}

/// Number of proper `S`-colorings.
pub fn count_colorings(g: &Graph, lists: &ListAssignment, cap: u64) -> Result<BigUint> {
    let mut count = BigUint::zero();
    for item in ColoringIter::new(g, lists, cap)? {
        item?;
        count += 1u32;
    }
    Ok(count)
}

/// `#(S-colorings extending tau) / #(S-colorings)`.
pub fn exact_containment_uniform(
    g: &Graph,
    lists: &ListAssignment,
    tau: &[Pair],
    cap: u64,
) -> Result<BigRational> {
    for &(v, _) in tau {
        g.check_vertex(v)?;
    }
    let total = count_colorings(g, lists, cap)?;
    if total.is_zero() {
        return Err(Error::NoColorings);
    }
    let favorable = match lists.pinned(tau) {
        Some(pinned) => count_colorings(g, &pinned, cap)?,
        None => BigUint::zero(),
    };
    Ok(BigRational::new(favorable.into(), total.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    RedThumb,
    CliqueMinusClique,
    GreedyBoys,
}

impl FromStr for CounterexampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "red_thumb" => Ok(Self::RedThumb),
            "clique_minus_clique" => Ok(Self::CliqueMinusClique),
            "greedy_boys" => Ok(Self::GreedyBoys),
            other => Err(Error::InvalidParameter(format!("unknown counterexample `{other}`"))),
        }
    }
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::RedThumb => "red_thumb",
            Self::CliqueMinusClique => "clique_minus_clique",
            Self::GreedyBoys => "greedy_boys",
        })
    }
}

/// A graph, lists, and the assignment whose probability breaks spread.
#[derive(Debug, Clone)]
pub struct Counterexample {
    pub kind: CounterexampleKind,
    pub d: usize,
    pub graph: Graph,
    pub lists: ListAssignment,
    pub target: Vec<Pair>,
    /// Exact value for the uniform instances, lower bound for greedy boys.
    pub reference: BigRational,
}

fn ratio(num: u64, den: u64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

fn integer_sqrt(x: usize) -> Option<usize> {
    let r = (x as f64).sqrt().round() as usize;
    (r * r == x).then_some(r)
}

pub fn build_counterexample(kind: CounterexampleKind, d: usize) -> Result<Counterexample> {
    if d == 0 {
        return Err(Error::InvalidParameter("D must be at least 1".into()));
    }
    let top = d as Color + 1;
    match kind {
        CounterexampleKind::RedThumb => {
            let graph = Graph::complete(d + 1);
            let mut lists = vec![palette(d + 1); d + 1];
            lists[0] = (0..=top).collect();
            Ok(Counterexample {
                kind,
                d,
                graph,
                lists: ListAssignment::new(lists)?,
                target: vec![(0, 0)],
                reference: ratio(1, 2),
            })
        }
        CounterexampleKind::CliqueMinusClique => {
            let s = integer_sqrt(d + 1).ok_or_else(|| {
                Error::InvalidParameter(format!("D + 1 = {} is not a perfect square", d + 1))
            })?;
            let n = d + 1;
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|&(u, v)| !(u < s && v < s))
                .collect();
            Ok(Counterexample {
                kind,
                d,
                graph: Graph::from_edges(n, &edges)?,
                lists: ListAssignment::uniform(n, n),
                target: (0..s).map(|u| (u, top)).collect(),
                reference: BigRational::one() / BigRational::from(BigInt::from(s).pow(s as u32 + 1)),
            })
        }
        CounterexampleKind::GreedyBoys => {
            let graph = Graph::complete_bipartite(d, d);
            let target = (0..2 * d).map(|v| (v, if v < d { v as Color + 1 } else { top })).collect();
            Ok(Counterexample {
                kind,
                d,
                graph,
                lists: ListAssignment::uniform(2 * d, d + 1),
                target,
                reference: BigRational::one()
                    / BigRational::from(BigInt::from(2 * d).pow(d as u32)),
            })
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub kind: CounterexampleKind,
    pub d: usize,
    pub probability: String,
    pub probability_f64: f64,
    pub reference: String,
    /// `probability == reference` for the uniform instances,
    /// `probability >= reference` for greedy boys.
    pub holds: bool,
}

impl Counterexample {
    /// Exact probability of the target under the relevant distribution.
    pub fn probability(&self, cap: u64) -> Result<BigRational> {
        match self.kind {
            CounterexampleKind::RedThumb | CounterexampleKind::CliqueMinusClique => {
                exact_containment_uniform(&self.graph, &self.lists, &self.target, cap)
            }
            CounterexampleKind::GreedyBoys => {
                let colors: Vec<Color> = self.target.iter().map(|&(_, c)| c).collect();
                random_greedy_exact(&self.graph, &colors)
            }
        }
    }

    pub fn evaluate(&self, cap: u64) -> Result<CounterexampleReport> {
        let p = self.probability(cap)?;
        let holds = match self.kind {
            CounterexampleKind::GreedyBoys => p >= self.reference,
            _ => p == self.reference,
        };
        Ok(CounterexampleReport {
            kind: self.kind,
            d: self.d,
            probability_f64: p.to_f64().unwrap_or(f64::NAN),
            probability: p.to_string(),
            reference: self.reference.to_string(),
            holds,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn slack_greedy_small_cases() {
        let single = Graph::empty(1);
        let lists = ListAssignment::new(vec![vec![1]]).unwrap();
        let dist = slack_greedy_distribution(&single, &lists, &[0]).unwrap();
        assert_eq!(dist[&vec![1]], q(1, 1));

        let k2 = Graph::complete(2);
        let lists = ListAssignment::uniform(2, 2);
        for order in [[0, 1], [1, 0]] {
            let dist = slack_greedy_distribution(&k2, &lists, &order).unwrap();
            assert_eq!(dist.len(), 2);
            assert!(dist.values().all(|p| *p == q(1, 2)));
        }

        let k3 = Graph::complete(3);
        let lists = ListAssignment::uniform(3, 3);
        let dist = slack_greedy_distribution(&k3, &lists, &[2, 0, 1]).unwrap();
        for v in 0..3 {
            for c in 1..=3 {
                let p: BigRational =
                    dist.iter().filter(|(s, _)| s[v] == c).map(|(_, p)| p.clone()).sum();
                assert_eq!(p, q(1, 3));
            }
        }
    }

    #[test]
    fn slack_greedy_validates() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let k3 = Graph::complete(3);
        let tight = ListAssignment::uniform(3, 2);
        assert!(matches!(
            slack_greedy_sample(&k3, &tight, &[0, 1, 2], &mut rng),
            Err(Error::StuckVertex(2))
        ));
        let lists = ListAssignment::uniform(3, 3);
        assert!(slack_greedy_sample(&k3, &lists, &[0, 0, 1], &mut rng).is_err());
        let s = slack_greedy_sample(&k3, &lists, &[1, 2, 0], &mut rng).unwrap();
        assert!(s.is_proper(&k3) && s.is_total());
    }

    #[test]
    fn enumeration_counts() {
        let k4 = Graph::complete(4);
        let lists = ListAssignment::uniform(4, 4);
        assert_eq!(count_colorings(&k4, &lists, 1000).unwrap(), BigUint::from(24u32));
        let cmc = build_counterexample(CounterexampleKind::CliqueMinusClique, 3).unwrap();
        assert_eq!(count_colorings(&cmc.graph, &cmc.lists, 1000).unwrap(), BigUint::from(48u32));
        let two = Graph::empty(2);
        let ones = ListAssignment::new(vec![vec![1], vec![1]]).unwrap();
        assert_eq!(count_colorings(&two, &ones, 10).unwrap(), BigUint::one());
        assert_eq!(count_colorings(&Graph::empty(0), &ListAssignment::new(vec![]).unwrap(), 1).unwrap(), BigUint::one());
        assert!(matches!(count_colorings(&k4, &lists, 10), Err(Error::CapExceeded(10))));
    }

    #[test]
    fn iterator_yields_distinct_proper_colorings() {
        let g = Graph::cycle(5);
        let lists = ListAssignment::uniform(5, 3);
        let all: Vec<Vec<Color>> =
            ColoringIter::new(&g, &lists, 1_000_000).unwrap().map(|c| c.unwrap()).collect();
        // Chromatic polynomial of C_5 at 3: (k-1)^5 - (k-1) = 30.
        assert_eq!(all.len(), 30);
        let unique: std::collections::BTreeSet<_> = all.iter().collect();
        assert_eq!(unique.len(), 30);
        assert!(all.iter().all(|c| PartialColoring::from_total(c).is_proper(&g)));
    }

    #[test]
    fn containment_examples() {
        let rt = build_counterexample(CounterexampleKind::RedThumb, 3).unwrap();
        assert_eq!(exact_containment_uniform(&rt.graph, &rt.lists, &[(0, 0)], 10_000).unwrap(), q(1, 2));
        assert_eq!(exact_containment_uniform(&rt.graph, &rt.lists, &[], 10_000).unwrap(), q(1, 1));
        let cmc = build_counterexample(CounterexampleKind::CliqueMinusClique, 3).unwrap();
        assert_eq!(cmc.probability(10_000).unwrap(), q(1, 8));
        let k2 = Graph::complete(2);
        let lists = ListAssignment::new(vec![vec![1], vec![1]]).unwrap();
        assert!(matches!(
            exact_containment_uniform(&k2, &lists, &[], 100),
            Err(Error::NoColorings)
        ));
    }

    #[test]
    fn containment_sums_to_one_over_a_domain() {
        let g = Graph::cycle(5);
        let lists = ListAssignment::new(vec![vec![1, 2, 3], vec![1, 2], vec![2, 3], vec![1, 3], vec![1, 2, 3]]).unwrap();
        let mut total = BigRational::zero();
        for a in lists.list(0) {
            for b in lists.list(2) {
                total += exact_containment_uniform(&g, &lists, &[(0, *a), (2, *b)], 100_000).unwrap();
            }
        }
        assert_eq!(total, q(1, 1));
    }

    #[test]
    fn counterexample_shapes() {
        let rt = build_counterexample(CounterexampleKind::RedThumb, 3).unwrap();
        assert_eq!(rt.graph, Graph::complete(4));
        assert_eq!(rt.lists.list(0), &[0, 1, 2, 3, 4]);
        assert_eq!(rt.lists.list(2), &[1, 2, 3, 4]);
        let cmc = build_counterexample(CounterexampleKind::CliqueMinusClique, 3).unwrap();
        assert_eq!(cmc.graph.edge_count(), 5);
        assert!(!cmc.graph.has_edge(0, 1));
        assert_eq!(cmc.target, vec![(0, 4), (1, 4)]);
        assert!(build_counterexample(CounterexampleKind::CliqueMinusClique, 4).is_err());
        let gb = build_counterexample(CounterexampleKind::GreedyBoys, 2).unwrap();
        assert_eq!(gb.graph, Graph::complete_bipartite(2, 2));
        assert_eq!(gb.target, vec![(0, 1), (1, 2), (2, 3), (3, 3)]);
        assert_eq!(gb.reference, q(1, 16));
        assert_eq!("greedy_boys".parse::<CounterexampleKind>().unwrap(), CounterexampleKind::GreedyBoys);
    }

    /// Full distribution of random greedy by recursion over every vertex
    /// choice and color choice.
    fn random_greedy_oracle(g: &Graph) -> BTreeMap<Vec<Color>, BigRational> {
        fn go(g: &Graph, colors: &mut Vec<Option<Color>>, w: BigRational, out: &mut BTreeMap<Vec<Color>, BigRational>) {
            let uncolored: Vec<usize> = (0..g.n()).filter(|&v| colors[v].is_none()).collect();
            if uncolored.is_empty() {
                let key = colors.iter().map(|c| c.unwrap()).collect();
                *out.entry(key).or_insert_with(BigRational::zero) += w;
                return;
            }
            for &v in &uncolored {
                let avail: Vec<Color> = (1..=g.max_degree() as Color + 1)
                    .filter(|&c| g.neighbors(v).iter().all(|&u| colors[u] != Some(c)))
                    .collect();
                let share = w.clone() / BigInt::from(uncolored.len() * avail.len());
                for c in avail {
                    colors[v] = Some(c);
                    go(g, colors, share.clone(), out);
                }
                colors[v] = None;
            }
        }
        let mut out = BTreeMap::new();
        go(g, &mut vec![None; g.n()], BigRational::one(), &mut out);
        out
    }

    #[test]
    fn random_greedy_exact_matches_oracle() {
        for g in [Graph::complete_bipartite(2, 2), Graph::path(4), Graph::cycle(5), Graph::star(3)] {
            let oracle = random_greedy_oracle(&g);
            assert_eq!(oracle.values().cloned().sum::<BigRational>(), q(1, 1));
            for (coloring, p) in &oracle {
                assert_eq!(&random_greedy_exact(&g, coloring).unwrap(), p);
            }
        }
        let gb = build_counterexample(CounterexampleKind::GreedyBoys, 2).unwrap();
        let p = gb.probability(0).unwrap();
        let target: Vec<Color> = gb.target.iter().map(|&(_, c)| c).collect();
        assert_eq!(p, random_greedy_oracle(&gb.graph)[&target]);
        assert!(p >= q(1, 16), "{p}");
        assert!(gb.evaluate(0).unwrap().holds);
    }

    #[test]
    fn random_greedy_samples_are_proper() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let g = crate::graph::gen_random_regular(40, 6, 1).unwrap();
        for _ in 0..50 {
            let s = random_greedy_sample(&g, &mut rng);
            assert!(s.is_total() && s.is_proper(&g));
            assert!(s.pairs().all(|(_, c)| (1..=7).contains(&c)));
        }
    }

    fn arb_slack_instance() -> impl Strategy<Value = (Graph, ListAssignment, Vec<usize>)> {
        (2usize..=5, any::<u64>()).prop_map(|(n, seed)| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let edges: Vec<_> = (0..n)
                .flat_map(|u| (u + 1..n).map(move |v| (u, v)))
                .filter(|_| rng.gen_bool(0.5))
                .collect();
            let mut g = Graph::from_edges(n, &edges).unwrap();
            if g.max_degree() == 0 {
                g = Graph::from_edges(n, &[(0, 1)]).unwrap();
            }
            let delta = g.max_degree();
            let size = 2 * delta + rng.gen_range(0..2);
            let pool: Vec<Color> = (1..=size as Color + 2).collect();
            let lists = (0..n)
                .map(|_| pool.choose_multiple(&mut rng, size).copied().collect())
                .collect();
            let mut order: Vec<usize> = (0..n).collect();
            order.shuffle(&mut rng);
            (g, ListAssignment::new(lists).unwrap(), order)
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn slack_greedy_is_spread((g, lists, order) in arb_slack_instance()) {
            let delta = g.max_degree();
            let min_list = lists.lists().iter().map(Vec::len).min().unwrap();
            let lambda = BigRational::new(BigInt::from(min_list - delta), BigInt::from(delta));
            let p = BigRational::one() / (lambda * BigInt::from(delta));
            let dist = slack_greedy_distribution(&g, &lists, &order).unwrap();
            let n = g.n();
            let mut containment: BTreeMap<Vec<Pair>, BigRational> = BTreeMap::new();
            for (coloring, prob) in &dist {
                for mask in 1u32..(1 << n) {
                    let tau: Vec<Pair> = (0..n).filter(|&v| mask & (1 << v) != 0).map(|v| (v, coloring[v])).collect();
                    *containment.entry(tau).or_insert_with(BigRational::zero) += prob.clone();
                }
            }
            for (tau, prob) in containment {
                let bound = num_traits::pow(p.clone(), tau.len());
                prop_assert!(prob <= bound, "P({:?}) = {} > {}", tau, prob, bound);
            }
        }

        #[test]
        fn enumeration_matches_brute_force((g, lists, _order) in arb_slack_instance()) {
            let mut brute = 0u64;
            let n = g.n();
            let mut idx = vec![0usize; n];
            'outer: loop {
                let colors: Vec<Color> = (0..n).map(|v| lists.list(v)[idx[v]]).collect();
                brute += u64::from(PartialColoring::from_total(&colors).is_proper(&g));
                for v in 0..n {
                    idx[v] += 1;
                    if idx[v] < lists.list(v).len() { continue 'outer; }
                    idx[v] = 0;
                }
                break;
            }
            prop_assert_eq!(count_colorings(&g, &lists, u64::MAX).unwrap(), BigUint::from(brute));
        }
    }
}
