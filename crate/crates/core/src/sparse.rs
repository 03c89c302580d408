//! Coloring of the sparse vertices.
//!
//! Every vertex draws a uniform label from `Γ = [D+1]`. `T` is the set of
//! vertices whose label no neighbor repeats, so the labels restricted to `T`
//! form a proper partial coloring. The labeling is conditioned (by rejection)
//! on no sparse vertex seeing a bad event, after which the rest of `V*` is
//! colored by slack greedy with lists `Γ \ σ(T ∩ N_v)`.

use std::f64::consts::E;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::coloring::{Color, ListAssignment, PartialColoring};
use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::greedy::slack_greedy_sample;
use crate::par::{find_first, map_indexed, trial_rng, Execution};

pub const DEFAULT_MAX_TRIES: usize = 10_000;
pub const DEFAULT_CALIBRATION_SAMPLES: usize = 200;
pub const DEFAULT_TARGET_ACCEPTANCE: f64 = 0.6;

/// Thresholds of the bad event `A_v`: `|N_v ∩ T|` leaves
/// `(1/e ± window)·D`, or `|P_v| < pair_floor·D`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LabelThresholds {
    pub window: f64,
    pub pair_floor: f64,
}

impl LabelThresholds {
    /// The single-parameter form: window `ϑ'/3`, pair floor `ϑ'`.
    pub fn from_theta_prime(theta_prime: f64) -> Self {
        Self { window: theta_prime / 3.0, pair_floor: theta_prime }
    }

    pub fn deviation(d: usize, t_neighbors: usize) -> f64 {
        (t_neighbors as f64 - d as f64 / E).abs() / d as f64
    }

    pub fn is_bad(&self, d: usize, t_neighbors: usize, pairs: usize) -> bool {
        Self::deviation(d, t_neighbors) > self.window || (pairs as f64) < self.pair_floor * d as f64
    }
}

impl From<f64> for LabelThresholds {
    fn from(theta_prime: f64) -> Self {
        Self::from_theta_prime(theta_prime)
    }
}

/// `ϑ' = e^{-3}ϑ/2`.
pub fn nominal_theta_prime(theta: f64) -> f64 {
    (-3.0f64).exp() * theta / 2.0
}

/// Uniform labels from `[palette_size]` for every vertex.
pub fn uniform_labeling<R: Rng + ?Sized>(n: usize, palette_size: usize, rng: &mut R) -> Vec<Color> {
    (0..n).map(|_| rng.gen_range(1..=palette_size as Color)).collect()
}

/// Membership in `T = {v : no neighbor of v has label τ_v}`.
pub fn label_set_t(g: &Graph, tau: &[Color]) -> Vec<bool> {
    (0..g.n())
        .map(|v| g.neighbors(v).iter().all(|&w| tau[w] != tau[v]))
        .collect()
}

/// `|P_v|`: pairs `u, w ∈ N_v`, non-adjacent, with `τ_u = τ_w` and no other
/// vertex of `N_v ∪ N_u ∪ N_w` carrying that label.
pub fn pair_count(g: &Graph, tau: &[Color], v: usize) -> usize {
    let nbrs = g.neighbors(v);
    let mut sorted: Vec<(Color, usize)> = nbrs.iter().map(|&u| (tau[u], u)).collect();
    sorted.sort_unstable();
    let mut count = 0;
    let mut i = 0;
    while i < sorted.len() {
        let label = sorted[i].0;
        let mut j = i;
        while j < sorted.len() && sorted[j].0 == label {
            j += 1;
        }
        if j - i == 2 {
            let (u, w) = (sorted[i].1, sorted[i + 1].1);
            let clean = |x: usize| g.neighbors(x).iter().all(|&y| y == u || y == w || tau[y] != label);
            if !g.has_edge(u, w) && clean(u) && clean(w) {
                count += 1;
            }
        }
        i = j;
    }
    count
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VertexLabelStats {
    pub vertex: usize,
    pub t_neighbors: usize,
    pub pairs: usize,
    pub bad: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LabelingStats {
    pub t: Vec<usize>,
    pub vertices: Vec<VertexLabelStats>,
}

impl LabelingStats {
    pub fn any_bad(&self) -> bool {
        self.vertices.iter().any(|s| s.bad)
    }
}

pub fn label_statistics(
    g: &Graph,
    tau: &[Color],
    vstar: &[usize],
    thresholds: LabelThresholds,
) -> LabelingStats {
    let d = g.max_degree();
    let in_t = label_set_t(g, tau);
    let vertices = vstar
        .iter()
        .map(|&v| {
            let t_neighbors = g.neighbors(v).iter().filter(|&&u| in_t[u]).count();
            let pairs = pair_count(g, tau, v);
            VertexLabelStats { vertex: v, t_neighbors, pairs, bad: thresholds.is_bad(d, t_neighbors, pairs) }
        })
        .collect();
    LabelingStats { t: (0..g.n()).filter(|&v| in_t[v]).collect(), vertices }
}

fn all_good(g: &Graph, tau: &[Color], vstar: &[usize], thresholds: LabelThresholds) -> bool {
    let d = g.max_degree();
    let in_t = label_set_t(g, tau);
    vstar.iter().all(|&v| {
        let t_neighbors = g.neighbors(v).iter().filter(|&&u| in_t[u]).count();
        if LabelThresholds::deviation(d, t_neighbors) > thresholds.window {
            return false;
        }
        thresholds.pair_floor <= 0.0 || pair_count(g, tau, v) as f64 >= thresholds.pair_floor * d as f64
    })
}

/// A labeling drawn from the conditioned measure.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionedLabeling {
    pub labels: Vec<Color>,
    /// Attempts used, counting the accepted one.
    pub attempts: usize,
}

/// Resamples uniform labelings until no vertex of `vstar` has a bad event.
///
/// Attempt `i` uses stream `i` of `seed`; the lowest accepted index wins, so
/// the outcome does not depend on `exec`.
pub fn sample_conditioned_labeling(
    g: &Graph,
    vstar: &[usize],
    thresholds: LabelThresholds,
    seed: u64,
    max_tries: usize,
    exec: Execution,
) -> Result<ConditionedLabeling> {
    let palette_size = g.max_degree() + 1;
    let found = find_first(exec, 0..max_tries, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let tau = uniform_labeling(g.n(), palette_size, &mut rng);
        all_good(g, &tau, vstar, thresholds).then_some(tau)
    });
    match found {
        Some((i, labels)) => Ok(ConditionedLabeling { labels, attempts: i + 1 }),
        None => Err(Error::MaxTriesExceeded(max_tries)),
    }
}

/// Fraction of `samples` uniform labelings with no bad event on `vstar`.
pub fn acceptance_rate(
    g: &Graph,
    vstar: &[usize],
    thresholds: LabelThresholds,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> f64 {
    let palette_size = g.max_degree() + 1;
    let hits = map_indexed(exec, samples, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let tau = uniform_labeling(g.n(), palette_size, &mut rng);
        all_good(g, &tau, vstar, thresholds)
    });
    hits.iter().filter(|&&h| h).count() as f64 / samples.max(1) as f64
}

/// Fraction of `(v, labeling)` pairs over `samples` uniform labelings with
/// `|N_v ∩ T|` inside `(1/e ± band)·D`.
pub fn t_concentration(
    g: &Graph,
    vertices: &[usize],
    band: f64,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> f64 {
    let d = g.max_degree();
    let palette_size = d + 1;
    let inside = map_indexed(exec, samples, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let tau = uniform_labeling(g.n(), palette_size, &mut rng);
        let in_t = label_set_t(g, &tau);
        vertices
            .iter()
            .filter(|&&v| {
                let t = g.neighbors(v).iter().filter(|&&u| in_t[u]).count();
                LabelThresholds::deviation(d, t) < band
            })
            .count()
    });
    inside.iter().sum::<usize>() as f64 / (samples * vertices.len()).max(1) as f64
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CalibrationMode {
    /// The single-parameter thresholds already reach the target.
    Nominal,
    /// Pair floor dropped, window widened to the target quantile.
    Window,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Calibration {
    pub thresholds: LabelThresholds,
    pub mode: CalibrationMode,
    pub nominal_theta_prime: f64,
    pub nominal_acceptance: f64,
    pub acceptance: f64,
}

/// Chooses thresholds whose rejection acceptance on `samples` uniform
/// labelings is at least `target`.
///
/// The single-parameter setting `ϑ' = e^{-3}ϑ/2` is kept when it already
/// qualifies. Otherwise the pair floor is set to zero and the window is the
/// smallest value for which a `target` fraction of the sampled labelings
/// is accepted.
pub fn calibrate_thresholds(
    g: &Graph,
    vstar: &[usize],
    theta: f64,
    samples: usize,
    target: f64,
    seed: u64,
    exec: Execution,
) -> Result<Calibration> {
    if samples == 0 || !(target > 0.0 && target <= 1.0) {
        return Err(Error::InvalidParameter("calibration needs samples > 0 and target in (0, 1]".into()));
    }
    let d = g.max_degree();
    let palette_size = d + 1;
    let nominal = LabelThresholds::from_theta_prime(nominal_theta_prime(theta));
    let per_sample: Vec<(bool, f64)> = map_indexed(exec, samples, |i| {
        let mut rng = trial_rng(seed, i as u64);
        let tau = uniform_labeling(g.n(), palette_size, &mut rng);
        let in_t = label_set_t(g, &tau);
        let mut worst: f64 = 0.0;
        for &v in vstar {
            let t = g.neighbors(v).iter().filter(|&&u| in_t[u]).count();
            worst = worst.max(LabelThresholds::deviation(d, t));
        }
        (all_good(g, &tau, vstar, nominal), worst)
    });
    let nominal_acceptance = per_sample.iter().filter(|s| s.0).count() as f64 / samples as f64;
    if nominal_acceptance >= target {
        return Ok(Calibration {
            thresholds: nominal,
            mode: CalibrationMode::Nominal,
            nominal_theta_prime: nominal_theta_prime(theta),
            nominal_acceptance,
            acceptance: nominal_acceptance,
        });
    }
    let mut worst: Vec<f64> = per_sample.iter().map(|s| s.1).collect();
    worst.sort_by(f64::total_cmp);
    let needed = ((target * samples as f64).ceil() as usize).clamp(1, samples);
    let window = worst[needed - 1];
    let acceptance = worst.iter().filter(|&&w| w <= window).count() as f64 / samples as f64;
    Ok(Calibration {
        thresholds: LabelThresholds { window, pair_floor: 0.0 },
        mode: CalibrationMode::Window,
        nominal_theta_prime: nominal_theta_prime(theta),
        nominal_acceptance,
        acceptance,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SparseParams {
    pub thresholds: LabelThresholds,
    pub max_tries: usize,
    pub d_min: usize,
    pub exec: Execution,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SparseOutcome {
    /// Proper coloring whose domain is exactly `V*`.
    pub coloring: PartialColoring,
    pub attempts: usize,
    pub t_size: usize,
}

/// Colors `vstar` of a `D`-regular graph.
pub fn sparse_phase_color<R: Rng + ?Sized>(
    g: &Graph,
    vstar: &[usize],
    rng: &mut R,
    params: &SparseParams,
) -> Result<SparseOutcome> {
    let d = g.require_regular()?;
    if d < params.d_min {
        return Err(Error::InvalidParameter(format!("D = {d} is below D_min = {}", params.d_min)));
    }
    let n = g.n();
    if vstar.is_empty() {
        return Ok(SparseOutcome { coloring: PartialColoring::new(n), attempts: 0, t_size: 0 });
    }
    let seed = rng.gen::<u64>();
    let labeling =
        sample_conditioned_labeling(g, vstar, params.thresholds, seed, params.max_tries, params.exec)?;
    let tau = &labeling.labels;
    let in_t = label_set_t(g, tau);

    let mut sigma = PartialColoring::new(n);
    for v in (0..n).filter(|&v| in_t[v]) {
        sigma.set(v, tau[v]);
    }
    ensure!(sigma.is_proper(g), "labels restricted to T are not a proper coloring");

    let mut in_vstar = vec![false; n];
    for &v in vstar {
        in_vstar[v] = true;
    }
    let rest: Vec<usize> = vstar.iter().copied().filter(|&v| !in_t[v]).collect();
    let (sub, map) = g.induced_subgraph(&rest);
    let palette_size = d as Color + 1;
    let lists: Vec<Vec<Color>> = rest
        .iter()
        .map(|&v| {
            (1..=palette_size)
                .filter(|&c| g.neighbors(v).iter().all(|&u| !(in_t[u] && tau[u] == c)))
                .collect()
        })
        .collect();

    let w = params.thresholds.window;
    let f = params.thresholds.pair_floor;
    let df = d as f64;
    let tol = 1e-9;
    for (i, &v) in map.iter().enumerate() {
        ensure!(
            sub.degree(i) as f64 <= (1.0 - 1.0 / E + w) * df + tol,
            "vertex {v}: degree {} in G' exceeds (1 - 1/e + {w})D",
            sub.degree(i)
        );
        ensure!(
            lists[i].len() as f64 >= (1.0 - 1.0 / E - w + f) * df - tol,
            "vertex {v}: list size {} below (1 - 1/e - {w} + {f})D",
            lists[i].len()
        );
    }

    let lists = ListAssignment::new(lists)?;
    let order: Vec<usize> = (0..rest.len()).collect();
    let greedy = slack_greedy_sample(&sub, &lists, &order, rng)?;
    for (i, &v) in map.iter().enumerate() {
        sigma.set(v, greedy.get(i).expect("slack greedy colors every vertex"));
    }
    for v in (0..n).filter(|&v| !in_vstar[v]) {
        sigma.unset(v);
    }
    ensure!(sigma.is_proper(g), "sparse-phase coloring is not proper");
    Ok(SparseOutcome {
        coloring: sigma,
        attempts: labeling.attempts,
        t_size: in_t.iter().filter(|&&b| b).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen_random_regular;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pair_count_oracle(g: &Graph, tau: &[Color], v: usize) -> usize {
        let nb = g.neighbors(v);
        let mut count = 0;
        for (i, &u) in nb.iter().enumerate() {
            for &w in &nb[i + 1..] {
                if g.has_edge(u, w) || tau[u] != tau[w] {
                    continue;
                }
                let mut region: Vec<usize> = nb.to_vec();
                region.extend_from_slice(g.neighbors(u));
                region.extend_from_slice(g.neighbors(w));
                if region.iter().all(|&x| x == u || x == w || tau[x] != tau[u]) {
                    count += 1;
                }
            }
        }
        count
    }

    #[test]
    fn t_examples() {
        let k4 = Graph::complete(4);
        assert!(label_set_t(&k4, &[1, 2, 3, 4]).iter().all(|&b| b));
        assert!(label_set_t(&Graph::complete(2), &[3, 3]).iter().all(|&b| !b));
        let c5 = Graph::cycle(5);
        let stats = label_statistics(&c5, &[1, 1, 2, 3, 4], &[0, 1, 2, 3, 4], 0.0.into());
        assert_eq!(stats.t, vec![2, 3, 4]);
    }

    #[test]
    fn pairs_example() {
        // v = 0 sees 1, 2, 3; 1 and 2 are non-adjacent and share label 5.
        let g = Graph::from_edges(6, &[(0, 1), (0, 2), (0, 3), (1, 4), (2, 5), (3, 4)]).unwrap();
        let mut tau = vec![1, 5, 5, 2, 3, 4];
        assert_eq!(pair_count(&g, &tau, 0), 1);
        tau[5] = 5;
        assert_eq!(pair_count(&g, &tau, 0), 0);
        tau[5] = 4;
        tau[0] = 5;
        assert_eq!(pair_count(&g, &tau, 0), 0);
    }

    #[test]
    fn empty_vstar_accepts_first_labeling() {
        let g = Graph::cycle(6);
        let l = sample_conditioned_labeling(&g, &[], 0.5.into(), 1, 10, Execution::Sequential).unwrap();
        assert_eq!(l.attempts, 1);
        let out = sparse_phase_color(
            &g,
            &[],
            &mut ChaCha8Rng::seed_from_u64(0),
            &SparseParams { thresholds: 0.5.into(), max_tries: 10, d_min: 1, exec: Execution::Sequential },
        )
        .unwrap();
        assert_eq!(out.coloring.colored_count(), 0);
    }

    #[test]
    fn impossible_thresholds_give_up() {
        let g = gen_random_regular(60, 6, 3).unwrap();
        let all: Vec<usize> = (0..60).collect();
        let r = sample_conditioned_labeling(&g, &all, 1.0.into(), 5, 200, Execution::default());
        assert!(matches!(r, Err(Error::MaxTriesExceeded(200))));
    }

    #[test]
    fn calibrated_acceptance_and_handoff_at_degree_50() {
        let g = gen_random_regular(500, 50, 8).unwrap();
        let all: Vec<usize> = (0..500).collect();
        let cal = calibrate_thresholds(&g, &all, 0.02 * 0.02 / 16.0, 200, 0.6, 1, Execution::default()).unwrap();
        assert!(cal.acceptance >= 0.6);
        let fresh = acceptance_rate(&g, &all, cal.thresholds, 200, 99, Execution::default());
        assert!(fresh >= 0.5, "acceptance {fresh}");

        let params = SparseParams { thresholds: cal.thresholds, max_tries: DEFAULT_MAX_TRIES, d_min: 1, exec: Execution::default() };
        for seed in 0..3 {
            let out = sparse_phase_color(&g, &all, &mut ChaCha8Rng::seed_from_u64(seed), &params).unwrap();
            assert!(out.coloring.is_total() && out.coloring.is_proper(&g));
            assert!(out.coloring.pairs().all(|(_, c)| (1..=51).contains(&c)));
        }
    }

    #[test]
    fn nominal_setting_reduces_to_single_parameter_form() {
        let t = LabelThresholds::from_theta_prime(0.3);
        assert!((t.window - 0.1).abs() < 1e-15 && t.pair_floor == 0.3);
        assert!((nominal_theta_prime(2.0) - (-3.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn deterministic_and_componentwise_proper() {
        let a = gen_random_regular(40, 6, 1).unwrap();
        let g = a.disjoint_union(&gen_random_regular(30, 6, 2).unwrap());
        let vstar: Vec<usize> = (0..70).collect();
        let cal = calibrate_thresholds(&g, &vstar, 1e-4, 100, 0.6, 4, Execution::Sequential).unwrap();
        let params = SparseParams { thresholds: cal.thresholds, max_tries: 10_000, d_min: 1, exec: Execution::default() };
        let run = |s| sparse_phase_color(&g, &vstar, &mut ChaCha8Rng::seed_from_u64(s), &params).unwrap();
        let first = run(5);
        assert_eq!(first, run(5));
        let seq = SparseParams { exec: Execution::Sequential, ..params };
        assert_eq!(first, sparse_phase_color(&g, &vstar, &mut ChaCha8Rng::seed_from_u64(5), &seq).unwrap());
        let left: Vec<usize> = (0..40).collect();
        let (sub, _) = g.induced_subgraph(&left);
        assert!(first.coloring.truncated(40).is_proper(&sub));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(60))]

        #[test]
        fn pair_count_matches_definition(n in 6usize..30, d in 2usize..6, seed in any::<u64>()) {
            prop_assume!(d < n && n * d % 2 == 0);
            let g = gen_random_regular(n, d, seed).unwrap();
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let tau = uniform_labeling(n, 3, &mut rng);
            for v in 0..n {
                prop_assert_eq!(pair_count(&g, &tau, v), pair_count_oracle(&g, &tau, v));
            }
        }
    }
}
