//! The ALMI-PSO engine, a canonical PSO baseline, and shared run plumbing.

mod almi;
mod baseline;
mod diagnostic;
mod evaluator;

pub use almi::{
    backward_center, collective_pair, collective_reproject, generate_collective, individual_update,
    natural_selection, optimize, ring_neighbor, AlmiSwarm, Collective,
};
pub use baseline::{baseline_pso, pso_velocity_update};
pub use diagnostic::{assumption1_diagnostic, EnvironmentEstimate};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::history::WeightFunction;

/// Evaluations granted per dimension when no explicit budget is set.
pub const EVALUATIONS_PER_DIMENSION: usize = 10_000;

/// Sign convention of the repulsion terms in the individual velocity update.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UpdateSigns {
    /// `w' = -w + 2r(x - g) + 2r(x - p)`
    #[default]
    Verbatim,
    /// `w' = -w + 2r(g - x) + 2r(p - x)`
    Flipped,
}

/// Inertia and acceleration coefficients of the canonical PSO baseline.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BaselineParams {
    pub inertia: f64,
    /// Cognitive coefficient (pull toward the personal best).
    pub c1: f64,
    /// Social coefficient (pull toward the global best).
    pub c2: f64,
}

impl Default for BaselineParams {
    fn default() -> Self {
        Self {
            inertia: 0.729,
            c1: 1.49445,
            c2: 1.49445,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizerConfig {
    pub swarm_size: usize,
    /// Capacity of the preserved history.
    pub memory_size: usize,
    /// Age exponent in the history weights.
    pub alpha: f64,
    /// One collective pair is generated per weight function.
    pub weight_functions: Vec<WeightFunction>,
    /// Evaluation budget; `None` means `10000 * D`.
    pub max_evaluations: Option<usize>,
    pub success_threshold: f64,
    pub seed: u64,
    pub update_signs: UpdateSigns,
    pub baseline: BaselineParams,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            swarm_size: 10,
            memory_size: 60,
            alpha: 1.0,
            weight_functions: WeightFunction::defaults(),
            max_evaluations: None,
            success_threshold: 1e-8,
            seed: 0,
            update_signs: UpdateSigns::Verbatim,
            baseline: BaselineParams::default(),
        }
    }
}

impl OptimizerConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    /// Number of particles created by collective reprojection per generation.
    pub fn generated_per_generation(&self) -> usize {
        2 * self.weight_functions.len()
    }

    pub fn budget(&self, dim: usize) -> usize {
        self.max_evaluations
            .unwrap_or(EVALUATIONS_PER_DIMENSION * dim)
    }

    /// Checks the ALMI-PSO invariants and returns the resolved budget.
    pub fn validate(&self, dim: usize) -> Result<usize> {
        self.validate_common(dim)?;
        if self.memory_size == 0 {
            return Err(Error::InvalidConfig("memory_size must be positive".into()));
        }
        if !(self.alpha > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "alpha must be positive, got {}",
                self.alpha
            )));
        }
        if self.weight_functions.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one weight function is required".into(),
            ));
        }
        if self.generated_per_generation() >= self.swarm_size {
            return Err(Error::InvalidConfig(format!(
                "natural selection would leave no survivors: 2 * {} weight functions >= swarm size {}",
                self.weight_functions.len(),
                self.swarm_size
            )));
        }
        Ok(self.budget(dim))
    }

    /// Checks the invariants shared with the baseline PSO.
    pub fn validate_common(&self, dim: usize) -> Result<usize> {
        if dim == 0 {
            return Err(Error::InvalidConfig("dimension must be positive".into()));
        }
        if self.swarm_size == 0 {
            return Err(Error::InvalidConfig("swarm_size must be positive".into()));
        }
        if !(self.success_threshold > 0.0) {
            return Err(Error::InvalidConfig(
                "success_threshold must be positive".into(),
            ));
        }
        let budget = self.budget(dim);
        if budget < self.swarm_size {
            return Err(Error::InvalidConfig(format!(
                "budget {budget} cannot cover the initial swarm of {}",
                self.swarm_size
            )));
        }
        Ok(budget)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    pub evaluation_count: usize,
    #[serde(with = "crate::io::lenient_f64")]
    pub best_so_far: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunDiagnostics {
    /// Objective outputs that were not finite and were scored as +inf.
    pub non_finite_evaluations: usize,
    /// Collective candidates replaced by a uniform random point.
    pub random_restarts: usize,
    /// History candidates skipped for non-finite fitness.
    pub rejected_history_candidates: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub best_position: Vec<f64>,
    #[serde(with = "crate::io::lenient_f64")]
    pub best_fitness: f64,
    pub evaluations_used: usize,
    pub evaluations_to_success: Option<usize>,
    pub success: bool,
    pub fitness_trace: Vec<TracePoint>,
    pub generations: u64,
    pub diagnostics: RunDiagnostics,
}
