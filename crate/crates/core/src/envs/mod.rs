//! Ground-truth dynamics, process noise and running costs.

mod cart_pole;
mod mountain_car;
mod pendulum;

use std::sync::Arc;

use serde::{Deserialize, Serialize};

pub use cart_pole::{CartPole, CartPoleParams};
pub use mountain_car::MountainCar;
pub use pendulum::{Pendulum, PendulumCost, PendulumIntegrator, PendulumParams};

use crate::data::{ControlVector, StateVector};
use crate::error::{check_dim, invalid, Error, Result};
use crate::rng::RandomStream;
use crate::scalar::{all_finite, Scalar};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec<T> {
    pub name: String,
    pub state_dim: usize,
    pub control_dim: usize,
    pub u_min: Vec<T>,
    pub u_max: Vec<T>,
    /// Seconds per deterministic substep.
    pub dt: T,
    pub action_repeat: usize,
    pub noise_std: Vec<T>,
    pub initial_state: StateVector<T>,
}

impl<T: Scalar> EnvSpec<T> {
    pub fn validate(&self) -> Result<()> {
        check_dim(self.control_dim, self.u_min.len(), "u_min")?;
        check_dim(self.control_dim, self.u_max.len(), "u_max")?;
        check_dim(self.state_dim, self.noise_std.len(), "noise_std")?;
        check_dim(self.state_dim, self.initial_state.dim(), "initial_state")?;
        if self.u_min.iter().zip(&self.u_max).any(|(a, b)| !(a < b)) {
            return Err(invalid("u_bounds", "u_min must be strictly below u_max"));
        }
        if self.action_repeat == 0 {
            return Err(invalid("action_repeat", "must be at least 1"));
        }
        if self.noise_std.iter().any(|s| !(*s >= T::zero())) {
            return Err(invalid("noise_std", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn clip_control(&self, u: &mut [T]) {
        for ((v, lo), hi) in u.iter_mut().zip(&self.u_min).zip(&self.u_max) {
            *v = v.max(*lo).min(*hi);
        }
    }

    pub fn with_noise_std(mut self, sigma: T) -> Self {
        self.noise_std = vec![sigma; self.state_dim];
        self
    }

    pub fn with_action_repeat(mut self, repeat: usize) -> Self {
        self.action_repeat = repeat;
        self
    }
}

/// A ground-truth system `x+ = f*(x, u) + w`.
pub trait Environment<T: Scalar>: Send + Sync {
    fn spec(&self) -> &EnvSpec<T>;

    /// One deterministic substep of `f*`. Implementations clip `u` to the
    /// control bounds themselves.
    fn substep(&self, x: &[T], u: &[T], out: &mut [T]);

    fn cost(&self, x: &[T], u: &[T]) -> T;

    /// Failure predicate used by reset-on-drop variants.
    fn dropped(&self, _x: &[T]) -> bool {
        false
    }

    /// Applies `action_repeat` substeps without noise.
    fn mean_step(&self, x: &[T], u: &[T], out: &mut [T]) {
        self.substep(x, u, out);
        let repeat = self.spec().action_repeat;
        if repeat > 1 {
            let mut cur = out.to_vec();
            for _ in 1..repeat {
                self.substep(&cur, u, out);
                cur.copy_from_slice(out);
            }
        }
    }
}

/// Executes one interaction step: deterministic dynamics `action_repeat`
/// times, then a single Gaussian noise draw.
pub fn true_step<T: Scalar>(
    env: &dyn Environment<T>,
    x: &StateVector<T>,
    u: &ControlVector<T>,
    rng: &mut RandomStream,
) -> Result<StateVector<T>> {
    let spec = env.spec();
    check_dim(spec.state_dim, x.dim(), "state")?;
    check_dim(spec.control_dim, u.dim(), "control")?;
    let mut out = vec![T::zero(); spec.state_dim];
    env.mean_step(x, u, &mut out);
    for (o, s) in out.iter_mut().zip(&spec.noise_std) {
        if *s > T::zero() {
            *o += *s * rng.normal::<T>();
        }
    }
    if !all_finite(&out) {
        return Err(Error::BlowUp {
            step: 0,
            state: out.iter().map(|v| v.as_f64()).collect(),
        });
    }
    Ok(StateVector(out))
}

pub fn cost<T: Scalar>(env: &dyn Environment<T>, x: &[T], u: &[T]) -> T {
    env.cost(x, u)
}

/// When a triggered reset happens.
#[derive(Clone, Default)]
pub enum ResetPolicy<T> {
    #[default]
    Never,
    OnPredicate(Arc<dyn Fn(&[T]) -> bool + Send + Sync>),
}

impl<T> std::fmt::Debug for ResetPolicy<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ResetPolicy::Never => write!(f, "Never"),
            ResetPolicy::OnPredicate(_) => write!(f, "OnPredicate(..)"),
        }
    }
}

impl<T: Scalar> ResetPolicy<T> {
    /// Resets whenever the environment reports a dropped state.
    pub fn on_drop(env: Arc<dyn Environment<T>>) -> Self {
        ResetPolicy::OnPredicate(Arc::new(move |x| env.dropped(x)))
    }
}

/// Returns the initial state plus one fresh noise draw when the policy
/// fires, otherwise `x` unchanged.
pub fn reset_if_triggered<T: Scalar>(
    policy: &ResetPolicy<T>,
    spec: &EnvSpec<T>,
    x: StateVector<T>,
    rng: &mut RandomStream,
) -> (StateVector<T>, bool) {
    match policy {
        ResetPolicy::Never => (x, false),
        ResetPolicy::OnPredicate(p) if p(&x) => {
            let mut s = spec.initial_state.clone();
            for (v, sd) in s.iter_mut().zip(&spec.noise_std) {
                if *sd > T::zero() {
                    *v += *sd * rng.normal::<T>();
                }
            }
            (s, true)
        }
        ResetPolicy::OnPredicate(_) => (x, false),
    }
}

/// Default process-noise standard deviation per state dimension.
pub const DEFAULT_NOISE_STD: f64 = 1e-3;

/// Known environment names.
pub const ENV_NAMES: [&str; 4] = ["pendulum", "mountaincar", "cartpole", "cartpole_balance"];

/// Overrides applied when building a named environment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvOptions<T> {
    pub noise_std: T,
    pub action_repeat: Option<usize>,
    pub pendulum_cost: PendulumCost,
}

impl<T: Scalar> Default for EnvOptions<T> {
    fn default() -> Self {
        Self {
            noise_std: T::of(DEFAULT_NOISE_STD),
            action_repeat: None,
            pendulum_cost: PendulumCost::Squared,
        }
    }
}

/// Builds a named environment.
pub fn make_env<T: Scalar>(name: &str, opts: &EnvOptions<T>) -> Result<Arc<dyn Environment<T>>> {
    let repeat = |spec: EnvSpec<T>| match opts.action_repeat {
        Some(r) => spec.with_action_repeat(r),
        None => spec,
    };
    let env: Arc<dyn Environment<T>> = match name {
        "pendulum" => {
            let params = PendulumParams {
                cost: opts.pendulum_cost,
                ..PendulumParams::default()
            };
            Arc::new(Pendulum::new(params, opts.noise_std).with_spec(repeat))
        }
        "mountaincar" => Arc::new(MountainCar::new(opts.noise_std).with_spec(repeat)),
        "cartpole" => Arc::new(CartPole::swing_up(opts.noise_std).with_spec(repeat)),
        "cartpole_balance" => Arc::new(CartPole::balance(opts.noise_std).with_spec(repeat)),
        other => {
            return Err(invalid(
                "env.name",
                format!("unknown environment `{other}` (expected one of {ENV_NAMES:?})"),
            ))
        }
    };
    env.spec().validate()?;
    Ok(env)
}
