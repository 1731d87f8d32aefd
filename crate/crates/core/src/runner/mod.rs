//! Nonepisodic interaction loops with regret and average-cost accounting.

mod schedule;
mod stats;

use std::time::Instant;

use serde::{Deserialize, Serialize};

pub use schedule::{compute_h0, doubling_schedule, EpisodeSchedule};
pub use stats::{aggregate_seeds, mean_stderr, SeedSummary};

use crate::data::{Transition, TransitionDataset};
use crate::envs::{reset_if_triggered, true_step, Environment, ResetPolicy};
use crate::error::{invalid, Error, Result};
use crate::gp::{CalibratedModel, GpConfig};
use crate::planner::{mpc_act, ActionPlan, DynamicsModel, OracleModel, PlannerConfig, PropagationMode};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Where the optimal average cost used for regret came from.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", content = "value", rename_all = "snake_case")]
pub enum AStarReference {
    Constant(f64),
    Estimated(f64),
}

impl AStarReference {
    pub fn value(self) -> f64 {
        match self {
            AStarReference::Constant(v) | AStarReference::Estimated(v) => v,
        }
    }
}

impl Default for AStarReference {
    fn default() -> Self {
        AStarReference::Constant(0.0)
    }
}

#[derive(Debug, Clone)]
pub struct RunConfig<T: Scalar> {
    pub total_steps: usize,
    pub schedule: EpisodeSchedule,
    pub mode: PropagationMode,
    pub planner: PlannerConfig<T>,
    pub gp: GpConfig<T>,
    pub a_star: AStarReference,
    pub reset: ResetPolicy<T>,
    pub seeds: Vec<u64>,
}

impl<T: Scalar> RunConfig<T> {
    pub fn new(total_steps: usize, schedule: EpisodeSchedule, mode: PropagationMode, gp: GpConfig<T>) -> Self {
        Self {
            total_steps,
            schedule,
            mode,
            planner: PlannerConfig::default(),
            gp,
            a_star: AStarReference::default(),
            reset: ResetPolicy::Never,
            seeds: vec![0],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.total_steps == 0 {
            return Err(invalid("steps", "must be at least 1"));
        }
        self.schedule.validate()?;
        self.planner.validate()?;
        if !self.a_star.value().is_finite() {
            return Err(invalid("a_star", "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: usize,
    pub cost: f64,
    pub cum_cost: f64,
    pub regret: f64,
    pub avg_cost: f64,
    pub episode: usize,
    pub did_reset: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RefitRecord {
    pub episode: usize,
    /// Step count at which the refit happened.
    pub t: usize,
    pub dataset_size: usize,
    pub conditioning_size: usize,
    pub information_gain: f64,
    pub beta: f64,
    pub wall_clock_secs: f64,
}

/// Callbacks invoked while a run progresses.
pub trait RunObserver {
    fn on_step(&mut self, _record: &StepRecord) -> Result<()> {
        Ok(())
    }
    fn on_refit(&mut self, _record: &RefitRecord) -> Result<()> {
        Ok(())
    }
}

/// Observer that does nothing.
pub struct NoObserver;

impl RunObserver for NoObserver {}

#[derive(Debug, Clone)]
pub struct RunLog<T> {
    pub steps: Vec<StepRecord>,
    pub refits: Vec<RefitRecord>,
    /// Every executed transition in order.
    pub data: TransitionDataset<T>,
    pub reset_count: usize,
    pub a_star: AStarReference,
    /// Set when the run stopped early; the log holds everything before it.
    pub failure: Option<String>,
    pub total_steps: usize,
}

impl<T: Scalar> RunLog<T> {
    pub fn completed(&self) -> bool {
        self.failure.is_none() && self.steps.len() == self.total_steps
    }

    pub fn final_regret(&self) -> Option<f64> {
        self.steps.last().map(|r| r.regret)
    }

    pub fn final_avg_cost(&self) -> Option<f64> {
        self.steps.last().map(|r| r.avg_cost)
    }
}

/// Something that provides a dynamics model and can be refit on data.
pub trait Learner<T: Scalar> {
    fn model(&self) -> &dyn DynamicsModel<T>;
    /// Refits on all of `data`; returns conditioning size, information gain
    /// and beta.
    fn refit(&mut self, data: &TransitionDataset<T>) -> Result<(usize, f64, f64)>;
}

/// Calibrated GP refit from scratch on every call.
pub struct GpLearner<T: Scalar> {
    pub model: CalibratedModel<T>,
    pub config: GpConfig<T>,
}

impl<T: Scalar> Learner<T> for GpLearner<T> {
    fn model(&self) -> &dyn DynamicsModel<T> {
        &self.model
    }
    fn refit(&mut self, data: &TransitionDataset<T>) -> Result<(usize, f64, f64)> {
        self.model = self.model.refit(data, &self.config)?;
        Ok((
            self.model.dynamics.posterior().len(),
            self.model.dynamics.information_gain().as_f64(),
            self.model.beta().as_f64(),
        ))
    }
}

impl<T: Scalar> Learner<T> for OracleModel<T> {
    fn model(&self) -> &dyn DynamicsModel<T> {
        self
    }
    fn refit(&mut self, _data: &TransitionDataset<T>) -> Result<(usize, f64, f64)> {
        Ok((0, 0.0, 0.0))
    }
}

/// Algorithm with MPC at every step and a refit every `H` steps.
pub fn run_practical<T: Scalar>(
    env: &dyn Environment<T>,
    model: CalibratedModel<T>,
    cfg: &RunConfig<T>,
    rng: &mut RandomStream,
) -> Result<RunLog<T>> {
    if !matches!(cfg.schedule, EpisodeSchedule::Fixed { .. }) {
        return Err(Error::Precondition("run_practical needs a fixed schedule".into()));
    }
    let mut learner = GpLearner {
        model,
        config: cfg.gp.clone(),
    };
    run_with(env, &mut learner, cfg, rng, &mut NoObserver)
}

/// Algorithm with doubling episodes and a refit at each episode boundary.
pub fn run_doubling<T: Scalar>(
    env: &dyn Environment<T>,
    model: CalibratedModel<T>,
    cfg: &RunConfig<T>,
    rng: &mut RandomStream,
) -> Result<RunLog<T>> {
    if !matches!(cfg.schedule, EpisodeSchedule::Doubling { .. }) {
        return Err(Error::Precondition("run_doubling needs a doubling schedule".into()));
    }
    let mut learner = GpLearner {
        model,
        config: cfg.gp.clone(),
    };
    run_with(env, &mut learner, cfg, rng, &mut NoObserver)
}

/// Shared interaction loop. Refits happen at the episode boundaries of
/// `cfg.schedule`. Errors during the loop end the run and are recorded in
/// [`RunLog::failure`]; only invalid configurations return `Err`.
pub fn run_with<T: Scalar>(
    env: &dyn Environment<T>,
    learner: &mut dyn Learner<T>,
    cfg: &RunConfig<T>,
    rng: &mut RandomStream,
    observer: &mut dyn RunObserver,
) -> Result<RunLog<T>> {
    cfg.validate()?;
    let spec = env.spec();
    spec.validate()?;
    let episodes = cfg.schedule.episodes(cfg.total_steps)?;
    let mut env_rng = rng.split("env");
    let mut plan_rng = rng.split("planner");

    let mut log = RunLog {
        steps: Vec::with_capacity(cfg.total_steps),
        refits: Vec::new(),
        data: TransitionDataset::new(spec.state_dim, spec.control_dim),
        reset_count: 0,
        a_star: cfg.a_star,
        failure: None,
        total_steps: cfg.total_steps,
    };
    let a_star = cfg.a_star.value();
    let mut x = spec.initial_state.clone();
    let mut prev: Option<ActionPlan<T>> = None;
    let (mut cum_cost, mut regret) = (0.0f64, 0.0f64);
    let mut t = 0usize;

    'episodes: for (n, &len) in episodes.iter().enumerate() {
        for _ in 0..len {
            let step = (|| -> Result<_> {
                let (u, plan) = mpc_act(learner.model(), env, &x, &cfg.planner, cfg.mode, &mut plan_rng, prev.as_ref())?;
                let c = env.cost(&x, &u).as_f64();
                let next = true_step(env, &x, &u, &mut env_rng).map_err(|e| match e {
                    Error::BlowUp { state, .. } => Error::BlowUp { step: t, state },
                    e => e,
                })?;
                Ok((u, plan, c, next))
            })();
            let (u, plan, c, next) = match step {
                Ok(v) => v,
                Err(e) => {
                    log.failure = Some(e.to_string());
                    break 'episodes;
                }
            };
            prev = Some(plan);
            cum_cost += c;
            regret += c - a_star;
            log.data.push(Transition::new(x.clone(), u, next.clone()))?;
            let (x_new, did_reset) = reset_if_triggered(&cfg.reset, spec, next, &mut env_rng);
            if did_reset {
                log.reset_count += 1;
            }
            x = x_new;
            let rec = StepRecord {
                t,
                cost: c,
                cum_cost,
                regret,
                avg_cost: cum_cost / (t + 1) as f64,
                episode: n,
                did_reset,
            };
            observer.on_step(&rec)?;
            log.steps.push(rec);
            t += 1;
        }
        let start = Instant::now();
        match learner.refit(&log.data) {
            Ok((m, gain, beta)) => {
                let rec = RefitRecord {
                    episode: n,
                    t,
                    dataset_size: log.data.len(),
                    conditioning_size: m,
                    information_gain: gain,
                    beta,
                    wall_clock_secs: start.elapsed().as_secs_f64(),
                };
                observer.on_refit(&rec)?;
                log.refits.push(rec);
            }
            Err(e) => {
                log.failure = Some(e.to_string());
                break;
            }
        }
    }
    Ok(log)
}

/// Runs MPC on the true dynamics for a burn-in plus an evaluation window and
/// returns the average cost over the window.
pub fn estimate_optimal_average_cost<T: Scalar>(
    env: std::sync::Arc<dyn Environment<T>>,
    planner: &PlannerConfig<T>,
    burn_in: usize,
    window: usize,
    rng: &mut RandomStream,
) -> Result<f64> {
    if window == 0 {
        return Err(invalid("window", "must be at least 1"));
    }
    let mut oracle = OracleModel::new(env.clone());
    let cfg = RunConfig {
        total_steps: burn_in + window,
        schedule: EpisodeSchedule::Fixed { h: burn_in + window },
        mode: PropagationMode::Mean,
        planner: planner.clone(),
        gp: GpConfig::new(crate::gp::KernelSpec::rbf(T::one(), T::one()), T::one()),
        a_star: AStarReference::default(),
        reset: ResetPolicy::Never,
        seeds: vec![],
    };
    let log = run_with(env.as_ref(), &mut oracle, &cfg, rng, &mut NoObserver)?;
    if let Some(f) = log.failure {
        return Err(Error::Precondition(format!("oracle run failed: {f}")));
    }
    let tail = &log.steps[burn_in..];
    Ok(tail.iter().map(|r| r.cost).sum::<f64>() / tail.len() as f64)
}
