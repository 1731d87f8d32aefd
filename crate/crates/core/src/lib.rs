//! Nonepisodic optimistic model-based reinforcement learning with
//! Gaussian-process dynamics.
//!
//! A single uninterrupted trajectory is driven by model-predictive control
//! over a calibrated GP model. The optimistic agent plans jointly over
//! controls and hallucinated controls that pick any dynamics inside the
//! confidence band; the baselines plan with the mean model, with sampled
//! one-step distributions, or with one frozen posterior draw.
//!
//! Numeric code is generic over [`Scalar`] (`f32`/`f64`); the `f64`
//! aliases below are what the runner and CLI use.

pub mod data;
pub mod envs;
pub mod error;
pub mod gp;
pub mod linalg;
pub mod planner;
pub mod rng;
pub mod runner;
pub mod scalar;
pub mod theory;

pub use error::{Error, Result};
pub use rng::RandomStream;
pub use scalar::Scalar;
pub use theory::LyapunovSpec;

pub type StateVector = data::StateVector<f64>;
pub type ControlVector = data::ControlVector<f64>;
pub type Transition = data::Transition<f64>;
pub type TransitionDataset = data::TransitionDataset<f64>;
pub type KernelSpec = gp::KernelSpec<f64>;
pub type GpPosterior = gp::GpPosterior<f64>;
pub type GpConfig = gp::GpConfig<f64>;
pub type GpDynamics = gp::GpDynamics<f64>;
pub type CalibratedModel = gp::CalibratedModel<f64>;
pub type BetaSchedule = gp::BetaSchedule<f64>;
pub type EnvSpec = envs::EnvSpec<f64>;
pub type PlannerConfig = planner::PlannerConfig<f64>;
pub type ActionPlan = planner::ActionPlan<f64>;
pub type RunConfig = runner::RunConfig<f64>;
pub type RunLog = runner::RunLog<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type StateVector = crate::data::StateVector<f32>;
    pub type TransitionDataset = crate::data::TransitionDataset<f32>;
    pub type GpPosterior = crate::gp::GpPosterior<f32>;
    pub type CalibratedModel = crate::gp::CalibratedModel<f32>;
    pub type PlannerConfig = crate::planner::PlannerConfig<f32>;
}
