//! Measuring how spread a random coloring is.
//!
//! A random set `S` is `p`-spread when `P(S ⊇ T) ≤ p^{|T|}` for every `T`.
//! Colorings are read as sets of `(vertex, color)` pairs. Samplers are
//! audited by Monte Carlo with Wilson intervals; small explicit
//! distributions are audited exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Pow, ToPrimitive, Zero};
use rand::seq::index::sample as sample_indices;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::coloring::{Color, ListAssignment, Pair, PartialColoring};
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::greedy::{random_greedy_sample, slack_greedy_sample, ColoringIter};
use crate::matching::{spread_matching_dense, Bigraph, DenseParams};
use crate::par::{map_indexed, trial_rng, Execution};
use crate::pipeline::SpreadColorer;
use crate::stats::wilson_interval;

pub const MIN_TRIALS: usize = 100;

/// One sampled coloring; flagged draws carry no spread guarantee and are
/// left out of every estimate.
#[derive(Debug, Clone, PartialEq)]
pub struct Draw {
    pub coloring: PartialColoring,
    pub flagged: bool,
}

pub trait ColoringSampler: Sync {
    fn n(&self) -> usize;
    /// Colors a vertex can receive; singleton families range over these.
    fn colors(&self) -> Vec<Color>;
    /// `D + 1`, the scale of the spread constant.
    fn palette_size(&self) -> usize;
    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw>;
}

/// The full pipeline, run sequentially inside each trial.
pub struct PipelineSampler {
    colorer: SpreadColorer,
}

impl PipelineSampler {
    pub fn new(colorer: SpreadColorer) -> Self {
        Self { colorer: colorer.with_execution(Execution::Sequential) }
    }
}

impl ColoringSampler for PipelineSampler {
    fn n(&self) -> usize {
        self.colorer.graph().n()
    }

    fn colors(&self) -> Vec<Color> {
        (1..=self.palette_size() as Color).collect()
    }

    fn palette_size(&self) -> usize {
        self.colorer.d() + 1
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        let out = self.colorer.sample(rng)?;
        Ok(Draw { coloring: out.coloring, flagged: out.no_spread_guarantee })
    }
}

/// Uniform over all proper list colorings, enumerated up front.
pub struct UniformSampler {
    n: usize,
    d: usize,
    colors: Vec<Color>,
    colorings: Vec<Vec<Color>>,
}

impl UniformSampler {
    pub fn enumerate(g: &Graph, lists: &ListAssignment, cap: u64) -> Result<Self> {
        let colorings = ColoringIter::new(g, lists, cap)?.collect::<Result<Vec<_>>>()?;
        if colorings.is_empty() {
            return Err(Error::NoColorings);
        }
        let mut colors: Vec<Color> = lists.lists().iter().flatten().copied().collect();
        colors.sort_unstable();
        colors.dedup();
        Ok(Self { n: g.n(), d: g.max_degree(), colors, colorings })
    }

    pub fn support(&self) -> usize {
        self.colorings.len()
    }
}

impl ColoringSampler for UniformSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn colors(&self) -> Vec<Color> {
        self.colors.clone()
    }

    fn palette_size(&self) -> usize {
        self.d + 1
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        let i = rng.gen_range(0..self.colorings.len());
        Ok(Draw { coloring: PartialColoring::from_total(&self.colorings[i]), flagged: false })
    }
}

pub struct RandomGreedySampler {
    g: Graph,
}

impl RandomGreedySampler {
    pub fn new(g: Graph) -> Self {
        Self { g }
    }
}

impl ColoringSampler for RandomGreedySampler {
    fn n(&self) -> usize {
        self.g.n()
    }

    fn colors(&self) -> Vec<Color> {
        (1..=self.palette_size() as Color).collect()
    }

    fn palette_size(&self) -> usize {
        self.g.max_degree() + 1
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        Ok(Draw { coloring: random_greedy_sample(&self.g, rng), flagged: false })
    }
}

/// Slack greedy from the full palette `[Δ+1]` in a fixed order.
pub struct SlackGreedySampler {
    g: Graph,
    lists: ListAssignment,
    order: Vec<usize>,
}

impl SlackGreedySampler {
    pub fn new(g: Graph, order: Vec<usize>) -> Self {
        let lists = ListAssignment::uniform(g.n(), g.max_degree() + 1);
        Self { g, lists, order }
    }
}

impl ColoringSampler for SlackGreedySampler {
    fn n(&self) -> usize {
        self.g.n()
    }

    fn colors(&self) -> Vec<Color> {
        (1..=self.palette_size() as Color).collect()
    }

    fn palette_size(&self) -> usize {
        self.g.max_degree() + 1
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<Draw> {
        let coloring = slack_greedy_sample(&self.g, &self.lists, &self.order, rng)?;
        Ok(Draw { coloring, flagged: false })
    }
}

fn draw_all<S: ColoringSampler + ?Sized>(
    sampler: &S,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Vec<Draw>> {
    map_indexed(exec, trials, |t| sampler.draw(&mut trial_rng(seed, t as u64))).into_iter().collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Containment {
    /// Unflagged trials.
    pub trials: usize,
    pub hits: usize,
    pub flagged: usize,
    pub p_hat: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
}

impl Containment {
    fn new(hits: usize, trials: usize, flagged: usize) -> Self {
        let (ci_lo, ci_hi) = wilson_interval(hits as u64, trials as u64);
        let p_hat = if trials == 0 { 0.0 } else { hits as f64 / trials as f64 };
        Self { trials, hits, flagged, p_hat, ci_lo, ci_hi }
    }
}

/// Frequency of `{coloring ⊇ set}` over `trials` draws, trial `t` using
/// stream `t` of `seed`.
pub fn estimate_containment<S: ColoringSampler + ?Sized>(
    sampler: &S,
    set: &[Pair],
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<Containment> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let draws = draw_all(sampler, trials, seed, exec)?;
    let kept: Vec<&Draw> = draws.iter().filter(|d| !d.flagged).collect();
    let hits = kept.iter().filter(|d| d.coloring.contains_all(set)).count();
    Ok(Containment::new(hits, kept.len(), trials - kept.len()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TestFamily {
    Singletons,
    /// All singletons plus this many pairs at distinct vertices.
    SingletonsAndRandomPairs(usize),
    Custom(Vec<Vec<Pair>>),
}

impl TestFamily {
    /// Singletons plus `10n` random pairs.
    pub fn default_for(n: usize) -> Self {
        TestFamily::SingletonsAndRandomPairs(10 * n)
    }

    fn sets(&self, n: usize, colors: &[Color], seed: u64) -> Vec<Vec<Pair>> {
        let singletons =
            || (0..n).flat_map(|v| colors.iter().map(move |&c| vec![(v, c)])).collect::<Vec<_>>();
        match self {
            TestFamily::Singletons => singletons(),
            TestFamily::SingletonsAndRandomPairs(k) => {
                let mut sets = singletons();
                if n >= 2 && !colors.is_empty() {
                    let mut rng = trial_rng(seed, u64::MAX);
                    for _ in 0..*k {
                        let vs = sample_indices(&mut rng, n, 2);
                        let a = (vs.index(0), colors[rng.gen_range(0..colors.len())]);
                        let b = (vs.index(1), colors[rng.gen_range(0..colors.len())]);
                        sets.push(if a < b { vec![a, b] } else { vec![b, a] });
                    }
                }
                sets
            }
            TestFamily::Custom(sets) => sets.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadRow {
    pub set: Vec<Pair>,
    #[serde(flatten)]
    pub estimate: Containment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadSummary {
    pub palette_size: usize,
    pub sets: usize,
    pub trials_requested: usize,
    pub trials_used: usize,
    pub flagged: usize,
    pub flagged_fraction: f64,
    /// `max_T ci_hi(T)^{1/|T|} · (D+1)` over nonempty `T`.
    pub c_hat: f64,
    pub worst_set: Option<Vec<Pair>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpreadReport {
    pub rows: Vec<SpreadRow>,
    pub summary: SpreadSummary,
}

impl SpreadReport {
    fn build(rows: Vec<SpreadRow>, palette_size: usize, trials: usize, flagged: usize) -> Self {
        let mut c_hat = 0.0;
        let mut worst_set = None;
        for row in rows.iter().filter(|r| !r.set.is_empty()) {
            let c = row.estimate.ci_hi.powf(1.0 / row.set.len() as f64) * palette_size as f64;
            if c > c_hat {
                c_hat = c;
                worst_set = Some(row.set.clone());
            }
        }
        let summary = SpreadSummary {
            palette_size,
            sets: rows.len(),
            trials_requested: trials,
            trials_used: trials - flagged,
            flagged,
            flagged_fraction: if trials == 0 { 0.0 } else { flagged as f64 / trials as f64 },
            c_hat,
            worst_set,
        };
        Self { rows, summary }
    }

    /// `set,size,trials,hits,p_hat,ci_lo,ci_hi`, sets written `v:c;w:c'`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("set,size,trials,hits,p_hat,ci_lo,ci_hi\n");
        for row in &self.rows {
            let set: Vec<String> = row.set.iter().map(|(v, c)| format!("{v}:{c}")).collect();
            let e = &row.estimate;
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{}",
                set.join(";"),
                row.set.len(),
                e.trials,
                e.hits,
                e.p_hat,
                e.ci_lo,
                e.ci_hi
            );
        }
        out
    }
}

/// Containment estimates for every set of `family` from one shared batch of
/// `trials` draws.
pub fn spread_report<S: ColoringSampler + ?Sized>(
    sampler: &S,
    family: &TestFamily,
    trials: usize,
    seed: u64,
    exec: Execution,
) -> Result<SpreadReport> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("need at least {MIN_TRIALS} trials, got {trials}")));
    }
    let colors = sampler.colors();
    let sets = family.sets(sampler.n(), &colors, seed);
    let draws = draw_all(sampler, trials, seed, exec)?;
    let kept: Vec<&PartialColoring> = draws.iter().filter(|d| !d.flagged).map(|d| &d.coloring).collect();
    let flagged = trials - kept.len();
    let hits = map_indexed(exec, sets.len(), |i| kept.iter().filter(|c| c.contains_all(&sets[i])).count());
    let rows = sets
        .into_iter()
        .zip(hits)
        .map(|(set, h)| SpreadRow { set, estimate: Containment::new(h, kept.len(), flagged) })
        .collect();
    Ok(SpreadReport::build(rows, sampler.palette_size(), trials, flagged))
}

/// `base^{1/exp}`, compared exactly through integer powers.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    pub base: BigRational,
    pub exp: usize,
}

impl Root {
    pub fn zero() -> Self {
        Self { base: BigRational::zero(), exp: 1 }
    }

    pub fn to_f64(&self) -> f64 {
        self.base.to_f64().unwrap_or(f64::NAN).powf(1.0 / self.exp as f64)
    }

    /// `k · self`.
    pub fn scaled(&self, k: u32) -> Self {
        let factor = BigRational::from(BigInt::from(k)).pow(self.exp as u32);
        Self { base: &self.base * factor, exp: self.exp }
    }
}

impl Ord for Root {
    fn cmp(&self, other: &Self) -> Ordering {
        let lhs: BigRational = self.base.clone().pow(other.exp as u32);
        let rhs: BigRational = other.base.clone().pow(self.exp as u32);
        lhs.cmp(&rhs)
    }
}

impl PartialOrd for Root {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

pub const MAX_GROUND: usize = 20;

/// A finitely supported random subset of `{0, ..., ground - 1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitDistribution {
    ground: usize,
    outcomes: Vec<(u32, BigRational)>,
}

fn mask_of(elements: &[usize]) -> u32 {
    elements.iter().fold(0, |m, &x| m | (1 << x))
}

fn elements_of(mask: u32) -> Vec<usize> {
    (0..32).filter(|&i| mask >> i & 1 == 1).collect()
}

impl ExplicitDistribution {
    pub fn new(ground: usize, outcomes: Vec<(Vec<usize>, BigRational)>) -> Result<Self> {
        if ground > MAX_GROUND {
            return Err(Error::CapExceeded(MAX_GROUND as u64));
        }
        let mut merged: BTreeMap<u32, BigRational> = BTreeMap::new();
        for (set, p) in outcomes {
            if let Some(&x) = set.iter().find(|&&x| x >= ground) {
                return Err(Error::InvalidParameter(format!("element {x} outside a ground set of {ground}")));
            }
            if p < BigRational::zero() {
                return Err(Error::InvalidParameter(format!("negative probability {p}")));
            }
            *merged.entry(mask_of(&set)).or_insert_with(BigRational::zero) += p;
        }
        let total: BigRational = merged.values().sum();
        if !total.is_one() {
            return Err(Error::InvalidParameter(format!("probabilities sum to {total}, not 1")));
        }
        merged.retain(|_, p| !p.is_zero());
        Ok(Self { ground, outcomes: merged.into_iter().collect() })
    }

    pub fn point_mass(ground: usize, set: &[usize]) -> Result<Self> {
        Self::new(ground, vec![(set.to_vec(), BigRational::one())])
    }

    pub fn ground(&self) -> usize {
        self.ground
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (Vec<usize>, &BigRational)> {
        self.outcomes.iter().map(|(m, p)| (elements_of(*m), p))
    }

    /// `P(S ⊇ set)`.
    pub fn containment(&self, set: &[usize]) -> BigRational {
        let t = mask_of(set);
        self.outcomes.iter().filter(|(m, _)| m & t == t).map(|(_, p)| p).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactSpread {
    /// `P(S ⊇ witness)^{1/|witness|}`; zero with an empty witness when no
    /// nonempty set is ever contained.
    pub value: Root,
    pub witness: Vec<usize>,
    pub probability: BigRational,
}

/// `max P(S ⊇ T)^{1/|T|}` over nonempty `T` with `|T| ≤ size_cap`.
pub fn exact_spread(dist: &ExplicitDistribution, size_cap: usize) -> ExactSpread {
    let mut best = ExactSpread { value: Root::zero(), witness: Vec::new(), probability: BigRational::zero() };
    for t in 1u32..(1u32 << dist.ground) {
        let size = t.count_ones() as usize;
        if size > size_cap {
            continue;
        }
        let p: BigRational = dist.outcomes.iter().filter(|(m, _)| m & t == t).map(|(_, p)| p).sum();
        if p.is_zero() {
            continue;
        }
        let value = Root { base: p.clone(), exp: size };
        if value > best.value {
            best = ExactSpread { value, witness: elements_of(t), probability: p };
        }
    }
    best
}

/// `S` together with a conditional distribution of `T` for each outcome of
/// `S`, all on one ground set.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositionInstance {
    pub s: ExplicitDistribution,
    /// `t[i]` is the law of `T` given the `i`-th outcome of `s`.
    pub t: Vec<ExplicitDistribution>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionReport {
    pub p: Root,
    /// Worst spread over the conditional laws of `T`.
    pub q: Root,
    pub union: ExactSpread,
    /// No element is ever in both an outcome of `S` and an outcome of `T`.
    pub disjoint: bool,
    /// `spread(S ∪ T) ≤ 2 max{p, q}`.
    pub doubled_bound_holds: bool,
    /// `spread(S ∪ T) ≤ max{p, q}`, checked only when `disjoint`.
    pub max_bound_holds: Option<bool>,
}

impl CompositionReport {
    pub fn violation(&self) -> bool {
        !self.doubled_bound_holds || self.max_bound_holds == Some(false)
    }
}

pub fn check_composition(instance: &CompositionInstance) -> Result<CompositionReport> {
    let s = &instance.s;
    let g = s.ground;
    if instance.t.len() != s.outcomes.len() {
        return Err(Error::InvalidParameter(format!(
            "{} conditional laws for {} outcomes",
            instance.t.len(),
            s.outcomes.len()
        )));
    }
    if let Some(t) = instance.t.iter().find(|t| t.ground != g) {
        return Err(Error::InvalidParameter(format!("ground sets differ: {} vs {g}", t.ground)));
    }
    let p = exact_spread(s, g).value;
    let q = instance.t.iter().map(|t| exact_spread(t, g).value).max().unwrap_or_else(Root::zero);
    let mut joint: Vec<(Vec<usize>, BigRational)> = Vec::new();
    for ((a, pa), t) in s.outcomes.iter().zip(&instance.t) {
        for (b, pb) in &t.outcomes {
            joint.push((elements_of(a | b), pa * pb));
        }
    }
    let union = exact_spread(&ExplicitDistribution::new(g, joint)?, g);
    let s_support = s.outcomes.iter().fold(0u32, |m, (a, _)| m | a);
    let t_support = instance.t.iter().flat_map(|t| &t.outcomes).fold(0u32, |m, (b, _)| m | b);
    let disjoint = s_support & t_support == 0;
    let m = p.clone().max(q.clone());
    let doubled_bound_holds = union.value <= m.scaled(2);
    let max_bound_holds = disjoint.then(|| union.value <= m);
    Ok(CompositionReport { p, q, union, disjoint, doubled_bound_holds, max_bound_holds })
}

fn random_law<R: Rng + ?Sized>(rng: &mut R, ground: usize, within: &[usize], max_outcomes: usize) -> Result<ExplicitDistribution> {
    let k = rng.gen_range(1..=max_outcomes);
    let weights: Vec<u64> = (0..k).map(|_| rng.gen_range(1..=12)).collect();
    let total: u64 = weights.iter().sum();
    let outcomes = weights
        .iter()
        .map(|&w| {
            let set: Vec<usize> = within.iter().copied().filter(|_| rng.gen_bool(0.5)).collect();
            (set, BigRational::new(BigInt::from(w), BigInt::from(total)))
        })
        .collect();
    ExplicitDistribution::new(ground, outcomes)
}

/// A random instance on at most `max_ground` elements. With `disjoint`,
/// `S` lives on one half of the ground set and `T` on the other; otherwise
/// both range over all of it and `T` may depend arbitrarily on `S`.
pub fn random_composition_instance<R: Rng + ?Sized>(
    rng: &mut R,
    max_ground: usize,
    disjoint: bool,
) -> Result<CompositionInstance> {
    let ground = rng.gen_range(2..=max_ground.clamp(2, MAX_GROUND));
    let all: Vec<usize> = (0..ground).collect();
    let split = ground / 2;
    let (xs, ys) = if disjoint { (&all[..split], &all[split..]) } else { (&all[..], &all[..]) };
    let s = random_law(rng, ground, xs, 4)?;
    let t = (0..s.outcomes.len())
        .map(|i| {
            if !disjoint && rng.gen_bool(0.3) {
                // Put T exactly on the complement of what S picked.
                let a = s.outcomes[i].0;
                let rest: Vec<usize> = ys.iter().copied().filter(|&y| a >> y & 1 == 0).collect();
                ExplicitDistribution::point_mass(ground, &rest)
            } else {
                random_law(rng, ground, ys, 3)
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CompositionInstance { s, t })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeAudit {
    pub size: usize,
    pub trials: usize,
    pub max_p_hat: f64,
    pub max_ci_hi: f64,
    pub argmax: (usize, usize),
    pub mean_attempts: f64,
}

/// Edge frequencies of the dense-phase matching on the complete `size × size`
/// bigraph.
pub fn dense_edge_audit(
    size: usize,
    trials: usize,
    seed: u64,
    params: &DenseParams,
    exec: Execution,
) -> Result<EdgeAudit> {
    if size == 0 || trials < MIN_TRIALS {
        return Err(Error::InvalidParameter(format!("need size >= 1 and at least {MIN_TRIALS} trials")));
    }
    let b = Bigraph::complete(size, size);
    let runs = map_indexed(exec, trials, |t| spread_matching_dense(&b, 0.0, &mut trial_rng(seed, t as u64), params));
    let mut counts = vec![0usize; size * size];
    let mut attempts = 0usize;
    for run in runs {
        let run = run?;
        attempts += run.attempts;
        for &(x, y) in &run.matching.pairs {
            counts[x * size + y] += 1;
        }
    }
    let (best, &hits) = counts.iter().enumerate().max_by_key(|&(i, &c)| (c, std::cmp::Reverse(i))).expect("nonempty");
    let (_, hi) = wilson_interval(hits as u64, trials as u64);
    Ok(EdgeAudit {
        size,
        trials,
        max_p_hat: hits as f64 / trials as f64,
        max_ci_hi: hi,
        argmax: (best / size, best % size),
        mean_attempts: attempts as f64 / trials as f64,
    })
}
