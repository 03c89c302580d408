use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use spread_coloring::matching::DenseParams;
use spread_coloring::sparse::{DEFAULT_CALIBRATION_SAMPLES, DEFAULT_MAX_TRIES, DEFAULT_TARGET_ACCEPTANCE};
use spread_coloring::{Execution, PipelineParams};

/// Experiment record: everything a run depends on besides its input files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
#[derive(Default)]
pub struct RunConfig {
    pub seed: u64,
    pub jobs: Option<usize>,
    pub params: Params,
    pub ceilings: Ceilings,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Params {
    pub eps: f64,
    pub theta_prime: Option<f64>,
    pub target_acceptance: f64,
    pub calibration_samples: usize,
    pub zeta0_override: Option<f64>,
    pub eta_override: Option<f64>,
    pub h_margin: f64,
    pub k_out: usize,
    pub k_max: usize,
    pub lambda_max: f64,
    pub max_tries: usize,
    pub d_min: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Ceilings {
    pub c_hat: f64,
    pub flagged_fraction: f64,
}


impl Default for Params {
    fn default() -> Self {
        let dense = DenseParams::default();
        Self {
            eps: 0.02,
            theta_prime: None,
            target_acceptance: DEFAULT_TARGET_ACCEPTANCE,
            calibration_samples: DEFAULT_CALIBRATION_SAMPLES,
            zeta0_override: None,
            eta_override: None,
            h_margin: 1.5,
            k_out: dense.k,
            k_max: dense.k_max,
            lambda_max: dense.lambda_max,
            max_tries: DEFAULT_MAX_TRIES,
            d_min: 1,
        }
    }
}

impl Default for Ceilings {
    fn default() -> Self {
        Self { c_hat: 64.0, flagged_fraction: 0.2 }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn validate(&self) -> Result<()> {
        let p = &self.params;
        if !(p.eps > 0.0 && p.eps < 0.05) {
            bail!("params.eps = {} must lie in (0, 0.05)", p.eps);
        }
        if let Some(t) = p.theta_prime {
            if !(t > 0.0) {
                bail!("params.theta_prime = {t} must be positive");
            }
        }
        if !(p.target_acceptance > 0.0 && p.target_acceptance <= 1.0) {
            bail!("params.target_acceptance = {} must lie in (0, 1]", p.target_acceptance);
        }
        if p.calibration_samples == 0 || p.max_tries == 0 {
            bail!("params.calibration_samples and params.max_tries must be positive");
        }
        if !(p.h_margin > 1.0) {
            bail!("params.h_margin = {} must exceed 1", p.h_margin);
        }
        if p.k_out == 0 || p.k_max < p.k_out {
            bail!("need 1 <= params.k_out <= params.k_max");
        }
        if !(p.lambda_max > 0.0 && p.lambda_max < 1.0) {
            bail!("params.lambda_max = {} must lie in (0, 1)", p.lambda_max);
        }
        if self.jobs == Some(0) {
            bail!("jobs must be positive");
        }
        Ok(())
    }

    pub fn execution(&self) -> Execution {
        match self.jobs {
            Some(1) => Execution::Sequential,
            _ => Execution::Parallel,
        }
    }

    pub fn pipeline(&self) -> PipelineParams {
        let p = &self.params;
        PipelineParams {
            eps_in: p.eps,
            theta_prime: p.theta_prime,
            target_acceptance: p.target_acceptance,
            calibration_samples: p.calibration_samples,
            max_tries: p.max_tries,
            d_min: p.d_min,
            h_margin: p.h_margin,
            zeta0_override: p.zeta0_override,
            eta_override: p.eta_override,
            dense: self.dense(),
            exec: self.execution(),
        }
    }

    pub fn dense(&self) -> DenseParams {
        let p = &self.params;
        DenseParams { k: p.k_out, k_max: p.k_max, lambda_max: p.lambda_max, max_tries: p.max_tries }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn missing_fields_take_defaults() {
        let c: RunConfig = serde_json::from_str(r#"{"seed": 5, "params": {"eps": 0.01}}"#).unwrap();
        assert_eq!(c.seed, 5);
        assert_eq!(c.params.eps, 0.01);
        assert_eq!(c.params.k_out, 3);
        assert_eq!(c.ceilings, Ceilings::default());
        c.validate().unwrap();
    }

    #[test]
    fn rejects_unknown_and_out_of_range() {
        assert!(serde_json::from_str::<RunConfig>(r#"{"sed": 5}"#).is_err());
        let mut c = RunConfig::default();
        c.params.eps = 0.2;
        assert!(c.validate().is_err());
    }

    #[test]
    fn jobs_select_execution() {
        let c = RunConfig { jobs: Some(1), ..RunConfig::default() };
        assert_eq!(c.execution(), Execution::Sequential);
        assert_eq!(c.pipeline().exec, Execution::Sequential);
    }
}
