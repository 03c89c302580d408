//! End-to-end sampler of proper `(D+1)`-colorings.
//!
//! The input is padded to a `D`-regular supergraph and decomposed; sparse
//! vertices are colored first, then clusters one at a time against the colors
//! already placed. The result is restricted back to the input graph.
//!
//! Any part whose hypotheses fail at the given scale is completed by
//! deterministic greedy (smallest legal color) and the draw is flagged as
//! carrying no spread guarantee. Properness is never relaxed.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::cluster::{build_cluster_context, color_cluster, ClusterParams, ClusterPath};
use crate::coloring::{Color, PartialColoring};
use crate::decompose::{sparse_dense_decompose, Decomposition};
use crate::error::{ensure, Error, Result};
use crate::graph::Graph;
use crate::matching::DenseParams;
use crate::par::Execution;
use crate::sparse::{
    calibrate_thresholds, sparse_phase_color, Calibration, LabelThresholds, SparseParams,
    DEFAULT_CALIBRATION_SAMPLES, DEFAULT_MAX_TRIES, DEFAULT_TARGET_ACCEPTANCE,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PipelineParams {
    pub eps_in: f64,
    /// Fixes the single-parameter label thresholds instead of calibrating.
    pub theta_prime: Option<f64>,
    pub target_acceptance: f64,
    pub calibration_samples: usize,
    pub max_tries: usize,
    pub d_min: usize,
    pub h_margin: f64,
    pub zeta0_override: Option<f64>,
    pub eta_override: Option<f64>,
    pub dense: DenseParams,
    pub exec: Execution,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self {
            eps_in: 0.02,
            theta_prime: None,
            target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
            calibration_samples: DEFAULT_CALIBRATION_SAMPLES,
            max_tries: DEFAULT_MAX_TRIES,
            d_min: 1,
            h_margin: 1.5,
            zeta0_override: None,
            eta_override: None,
            dense: DenseParams::default(),
            exec: Execution::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PartPath {
    Small,
    Large,
    Fallback,
}

impl From<ClusterPath> for PartPath {
    fn from(p: ClusterPath) -> Self {
        match p {
            ClusterPath::Small => PartPath::Small,
            ClusterPath::Large => PartPath::Large,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterReport {
    pub index: usize,
    pub size: usize,
    pub zeta: Option<f64>,
    pub path: PartPath,
    pub reason: Option<String>,
}

/// Parameters in effect for a draw.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParameterReport {
    pub d: usize,
    pub eps_in: f64,
    pub eps: f64,
    pub theta: f64,
    pub thresholds: Option<LabelThresholds>,
    pub calibration: Option<Calibration>,
    pub sparse: usize,
    pub clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PipelineResult {
    /// Total proper coloring of the input graph with colors in `[D+1]`.
    pub coloring: PartialColoring,
    pub flags: Vec<String>,
    pub no_spread_guarantee: bool,
    pub sparse_attempts: usize,
    pub clusters: Vec<ClusterReport>,
    pub parameters: ParameterReport,
}

/// Everything about a graph that does not depend on the draw.
#[derive(Debug, Clone)]
pub struct SpreadColorer {
    original: Graph,
    regular: Graph,
    d: usize,
    params: PipelineParams,
    decomposition: std::result::Result<Decomposition, String>,
    thresholds: Option<LabelThresholds>,
    calibration: Option<Calibration>,
}

impl SpreadColorer {
    /// Pads, decomposes and calibrates; `seed` drives the calibration only.
    pub fn new(g: &Graph, params: PipelineParams, seed: u64) -> Result<Self> {
        let d = g.max_degree();
        if d < params.d_min.max(1) {
            return Err(Error::InvalidParameter(format!("D = {d} is below D_min = {}", params.d_min.max(1))));
        }
        let regular = g.regularize();
        let decomposition = match sparse_dense_decompose(&regular, params.eps_in) {
            Ok(dec) => Ok(dec),
            Err(Error::VerificationFailed(msg)) => Err(msg),
            Err(e) => return Err(e),
        };
        let (mut thresholds, mut calibration) = (None, None);
        if let Ok(dec) = &decomposition {
            if !dec.sparse.is_empty() {
                match params.theta_prime {
                    Some(tp) => thresholds = Some(LabelThresholds::from_theta_prime(tp)),
                    None => {
                        let cal = calibrate_thresholds(
                            &regular,
                            &dec.sparse,
                            dec.theta,
                            params.calibration_samples,
                            params.target_acceptance,
                            seed,
                            params.exec,
                        )?;
                        thresholds = Some(cal.thresholds);
                        calibration = Some(cal);
                    }
                }
            }
        }
        Ok(Self { original: g.clone(), regular, d, params, decomposition, thresholds, calibration })
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn graph(&self) -> &Graph {
        &self.original
    }

    pub fn regular_graph(&self) -> &Graph {
        &self.regular
    }

    pub fn decomposition(&self) -> Option<&Decomposition> {
        self.decomposition.as_ref().ok()
    }

    pub fn params(&self) -> &PipelineParams {
        &self.params
    }

    /// Same colorer with a different execution mode for the sparse phase.
    pub fn with_execution(mut self, exec: Execution) -> Self {
        self.params.exec = exec;
        self
    }

    fn parameter_report(&self) -> ParameterReport {
        let (theta, eps) = Decomposition::constants(self.params.eps_in);
        let (sparse, clusters) = match &self.decomposition {
            Ok(dec) => (dec.sparse.len(), dec.clusters.len()),
            Err(_) => (0, 0),
        };
        ParameterReport {
            d: self.d,
            eps_in: self.params.eps_in,
            eps,
            theta,
            thresholds: self.thresholds,
            calibration: self.calibration,
            sparse,
            clusters,
        }
    }

    /// One coloring.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<PipelineResult> {
        let g = &self.regular;
        let n = g.n();
        let mut sigma = PartialColoring::new(n);
        let mut flags = Vec::new();
        let mut reports = Vec::new();
        let mut sparse_attempts = 0;

        match &self.decomposition {
            Err(msg) => flags.push(format!("decomposition: {msg}")),
            Ok(dec) => {
                if let Some(thresholds) = self.thresholds {
                    let sp = SparseParams {
                        thresholds,
                        max_tries: self.params.max_tries,
                        d_min: self.params.d_min,
                        exec: self.params.exec,
                    };
                    match sparse_phase_color(g, &dec.sparse, rng, &sp) {
                        Ok(out) => {
                            sparse_attempts = out.attempts;
                            for (v, c) in out.coloring.pairs() {
                                sigma.set(v, c);
                            }
                        }
                        Err(Error::MaxTriesExceeded(k)) => {
                            sparse_attempts = k;
                            flags.push(format!("sparse: no acceptable labeling in {k} attempts"));
                        }
                        Err(e) => return Err(e),
                    }
                }

                let cp = ClusterParams {
                    eps: dec.eps,
                    zeta0_override: self.params.zeta0_override,
                    eta_override: self.params.eta_override,
                    h_margin: self.params.h_margin,
                    dense: self.params.dense,
                };
                for (index, cluster) in dec.clusters.iter().enumerate() {
                    let attempt = build_cluster_context(g, cluster, &sigma, &cp)
                        .and_then(|ctx| color_cluster(&ctx, rng, &cp).map(|out| (ctx.zeta, out)));
                    match attempt {
                        Ok((zeta, out)) => {
                            for &(v, c) in &out.coloring {
                                sigma.set(v, c);
                            }
                            reports.push(ClusterReport {
                                index,
                                size: cluster.len(),
                                zeta: Some(zeta),
                                path: out.path.into(),
                                reason: None,
                            });
                        }
                        Err(
                            e @ (Error::HypothesisViolated(_)
                            | Error::NegativeR(_)
                            | Error::EmptyChoiceSet(_)
                            | Error::MaxTriesExceeded(_)),
                        ) => {
                            greedy_complete(g, &mut sigma, cluster)?;
                            flags.push(format!("cluster {index}: {e}"));
                            reports.push(ClusterReport {
                                index,
                                size: cluster.len(),
                                zeta: None,
                                path: PartPath::Fallback,
                                reason: Some(e.to_string()),
                            });
                        }
                        Err(e) => return Err(e),
                    }
                }
            }
        }

        let all: Vec<usize> = (0..n).collect();
        greedy_complete(g, &mut sigma, &all)?;
        ensure!(sigma.is_total(), "coloring is not total");
        if let Some((u, v)) = sigma.first_conflict(g) {
            return Err(Error::AssertionFailed(format!("edge ({u}, {v}) is monochromatic")));
        }
        let coloring = sigma.truncated(self.original.n());
        ensure!(coloring.is_proper(&self.original), "restriction is not proper");
        let top = self.d as Color + 1;
        ensure!(
            coloring.pairs().all(|(_, c)| (1..=top).contains(&c)),
            "a color lies outside [D+1]"
        );
        Ok(PipelineResult {
            coloring,
            no_spread_guarantee: !flags.is_empty(),
            flags,
            sparse_attempts,
            clusters: reports,
            parameters: self.parameter_report(),
        })
    }
}

/// Colors every uncolored vertex of `vertices`, in order, with its smallest
/// color in `[D+1]` not used by a neighbor.
pub fn greedy_complete(g: &Graph, sigma: &mut PartialColoring, vertices: &[usize]) -> Result<()> {
    let top = g.max_degree() as Color + 1;
    for &v in vertices {
        if sigma.get(v).is_some() {
            continue;
        }
        let used: Vec<Color> = g.neighbors(v).iter().filter_map(|&u| sigma.get(u)).collect();
        let c = (1..=top).find(|c| !used.contains(c)).ok_or(Error::StuckVertex(v))?;
        sigma.set(v, c);
    }
    Ok(())
}

/// Builds a colorer with a seed drawn from `rng` and draws one coloring.
pub fn color_graph_spread<R: Rng + ?Sized>(
    g: &Graph,
    rng: &mut R,
    params: PipelineParams,
) -> Result<PipelineResult> {
    let seed = rng.gen::<u64>();
    SpreadColorer::new(g, params, seed)?.sample(rng)
}
