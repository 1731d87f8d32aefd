//! Model-predictive control with an iCEM trajectory optimiser over joint
//! (control, hallucinated control) sequences.

mod colored_noise;
mod icem;
mod model;
mod rollout;

use serde::{Deserialize, Serialize};

pub use colored_noise::ColoredNoise;
pub use icem::{icem_plan, mpc_act};
pub use model::{DynamicsModel, OracleModel};
pub use rollout::{rollout_model, PlanEvaluator, Rollout, NON_FINITE_PENALTY};

use crate::data::ControlVector;
use crate::error::{invalid, Result};
use crate::scalar::Scalar;

/// How model rollouts propagate uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PropagationMode {
    /// `mean + beta * std * eta + w` with `eta` optimised in `[-1, 1]`.
    Optimistic,
    /// `mean + w`.
    Mean,
    /// Fresh draw from `N(mean, beta^2 std^2 + sigma^2)` every step.
    DistributionSampling,
    /// `mean + std * eta + w` with one `eta ~ N(0, I)` frozen per planning
    /// call.
    Thompson,
}

impl PropagationMode {
    pub const ALL: [PropagationMode; 4] = [
        PropagationMode::Optimistic,
        PropagationMode::Mean,
        PropagationMode::DistributionSampling,
        PropagationMode::Thompson,
    ];

    pub fn hallucinates(self) -> bool {
        self == PropagationMode::Optimistic
    }

    /// Agent name used on the command line and in result bundles.
    pub fn agent_name(self) -> &'static str {
        match self {
            PropagationMode::Optimistic => "neorl",
            PropagationMode::Mean => "nemean",
            PropagationMode::DistributionSampling => "nepets",
            PropagationMode::Thompson => "nets",
        }
    }

    pub fn from_agent_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.agent_name() == name)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlannerConfig<T> {
    pub num_samples: usize,
    pub num_elites: usize,
    pub optimizer_steps: usize,
    /// MPC horizon.
    pub horizon: usize,
    pub particles: usize,
    /// Power-law exponent of the sampling noise along time (0 is white).
    pub colored_noise_exponent: T,
    /// Fraction of the previous iteration's elites carried over.
    pub elite_keep_fraction: T,
    /// Initial sampling std in units of the half-range of each variable.
    pub init_std: T,
    /// Population shrink factor per optimiser iteration.
    pub population_decay: T,
    /// Draw process noise inside model rollouts.
    pub planning_noise: bool,
}

impl<T: Scalar> Default for PlannerConfig<T> {
    fn default() -> Self {
        Self {
            num_samples: 500,
            num_elites: 50,
            optimizer_steps: 10,
            horizon: 20,
            particles: 5,
            colored_noise_exponent: T::of(2.0),
            elite_keep_fraction: T::of(0.3),
            init_std: T::of(0.5),
            population_decay: T::of(1.25),
            planning_noise: true,
        }
    }
}

impl<T: Scalar> PlannerConfig<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("num_samples", self.num_samples),
            ("num_elites", self.num_elites),
            ("optimizer_steps", self.optimizer_steps),
            ("h_mpc", self.horizon),
            ("particles", self.particles),
        ] {
            if v == 0 {
                return Err(invalid(name, "must be at least 1"));
            }
        }
        if self.num_elites > self.num_samples {
            return Err(invalid(
                "num_elites",
                format!(
                    "num_elites ({}) must not exceed num_samples ({})",
                    self.num_elites, self.num_samples
                ),
            ));
        }
        if !(self.elite_keep_fraction >= T::zero() && self.elite_keep_fraction <= T::one()) {
            return Err(invalid("elite_keep_fraction", "must lie in [0, 1]"));
        }
        if !(self.init_std > T::zero()) {
            return Err(invalid("init_std", "must be positive"));
        }
        if !(self.population_decay >= T::one()) {
            return Err(invalid("population_decay", "must be at least 1"));
        }
        if !(self.colored_noise_exponent >= T::zero()) {
            return Err(invalid("colored_noise_exponent", "must be nonnegative"));
        }
        Ok(())
    }
}

/// Optimised control sequence and, for the optimistic mode, the matching
/// hallucinated controls.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActionPlan<T> {
    pub actions: Vec<ControlVector<T>>,
    /// One `[-1, 1]^{d_x}` vector per step; empty unless optimistic.
    pub hallucinations: Vec<Vec<T>>,
    pub objective: T,
    /// Final sampling mean, flattened per step as `[u, eta]`; used to warm
    /// start the next call.
    pub sampling_mean: Vec<T>,
    /// Best objective seen after each optimiser iteration.
    pub best_per_iteration: Vec<T>,
    /// Rollouts whose cost was replaced by [`NON_FINITE_PENALTY`].
    pub penalized_rollouts: usize,
}

impl<T: Scalar> ActionPlan<T> {
    pub fn horizon(&self) -> usize {
        self.actions.len()
    }

    /// Builds a plan from explicit sequences (hallucinations may be empty).
    pub fn from_sequences(actions: Vec<Vec<T>>, hallucinations: Vec<Vec<T>>) -> Self {
        let mut sampling_mean = Vec::new();
        for (h, a) in actions.iter().enumerate() {
            sampling_mean.extend_from_slice(a);
            if let Some(e) = hallucinations.get(h) {
                sampling_mean.extend_from_slice(e);
            }
        }
        Self {
            actions: actions.into_iter().map(ControlVector).collect(),
            hallucinations,
            objective: T::nan(),
            sampling_mean,
            best_per_iteration: Vec::new(),
            penalized_rollouts: 0,
        }
    }
}

#[cfg(test)]
mod tests;
