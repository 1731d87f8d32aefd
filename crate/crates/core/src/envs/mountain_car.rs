use super::{EnvSpec, Environment};
use crate::data::StateVector;
use crate::scalar::Scalar;

pub const GOAL_POSITION: f64 = 0.45;
const POWER: f64 = 0.0015;
const GRAVITY: f64 = 0.0025;
const MAX_SPEED: f64 = 0.07;
const MIN_POSITION: f64 = -1.2;
const MAX_POSITION: f64 = 0.6;

/// Continuous-action car on a hill, state `(position, velocity)`.
#[derive(Debug, Clone)]
pub struct MountainCar<T> {
    spec: EnvSpec<T>,
}

impl<T: Scalar> MountainCar<T> {
    pub fn new(noise_std: T) -> Self {
        Self {
            spec: EnvSpec {
                name: "mountaincar".into(),
                state_dim: 2,
                control_dim: 1,
                u_min: vec![-T::one()],
                u_max: vec![T::one()],
                dt: T::one(),
                action_repeat: 2,
                noise_std: vec![noise_std; 2],
                initial_state: StateVector(vec![T::of(-0.5), T::zero()]),
            },
        }
    }

    pub fn with_spec(mut self, f: impl FnOnce(EnvSpec<T>) -> EnvSpec<T>) -> Self {
        self.spec = f(self.spec);
        self
    }

    pub fn in_goal(x: &[T]) -> bool {
        x[0] >= T::of(GOAL_POSITION)
    }
}

impl<T: Scalar> Environment<T> for MountainCar<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn substep(&self, x: &[T], u: &[T], out: &mut [T]) {
        let force = u[0].max(-T::one()).min(T::one());
        let vmax = T::of(MAX_SPEED);
        let mut vel = x[1] + force * T::of(POWER) - T::of(GRAVITY) * (T::of(3.0) * x[0]).cos();
        vel = vel.max(-vmax).min(vmax);
        let mut pos = x[0] + vel;
        pos = pos.max(T::of(MIN_POSITION)).min(T::of(MAX_POSITION));
        if pos <= T::of(MIN_POSITION) && vel < T::zero() {
            vel = T::zero();
        }
        out[0] = pos;
        out[1] = vel;
    }

    fn cost(&self, x: &[T], u: &[T]) -> T {
        let penalty = if Self::in_goal(x) { T::zero() } else { T::of(100.0) };
        T::of(0.1) * u[0] * u[0] + penalty
    }
}
