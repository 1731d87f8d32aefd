use serde::{Deserialize, Serialize};

use super::{EnvSpec, Environment};
use crate::data::StateVector;
use crate::scalar::Scalar;

/// Running-cost variant for the pendulum velocity term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum PendulumCost {
    /// `theta^2 + 0.1 thetadot^2 + 0.1 u^2`.
    #[default]
    Squared,
    /// `theta^2 + 0.1 thetadot + 0.1 u^2`, which can go negative.
    Literal,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PendulumIntegrator {
    /// Gym-style: velocity first, then angle with the new velocity.
    SemiImplicitEuler,
    /// Classical RK4 with `substeps` equal sub-intervals of `dt`.
    Rk4 { substeps: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PendulumParams {
    pub gravity: f64,
    pub mass: f64,
    pub length: f64,
    pub dt: f64,
    pub max_speed: f64,
    pub max_torque: f64,
    /// Viscous damping coefficient on the angular velocity.
    pub damping: f64,
    pub integrator: PendulumIntegrator,
    pub cost: PendulumCost,
}

impl Default for PendulumParams {
    fn default() -> Self {
        Self {
            gravity: 10.0,
            mass: 1.0,
            length: 1.0,
            dt: 0.05,
            max_speed: 8.0,
            max_torque: 2.0,
            damping: 0.0,
            integrator: PendulumIntegrator::SemiImplicitEuler,
            cost: PendulumCost::Squared,
        }
    }
}

/// Torque-limited pendulum, angle measured from upright.
///
/// The state is `(cos theta, sin theta, thetadot)` so the learned map stays
/// continuous across the wrap. It starts hanging down at rest.
#[derive(Debug, Clone)]
pub struct Pendulum<T> {
    spec: EnvSpec<T>,
    params: PendulumParams,
}

impl<T: Scalar> Pendulum<T> {
    pub fn new(params: PendulumParams, noise_std: T) -> Self {
        let spec = EnvSpec {
            name: "pendulum".into(),
            state_dim: 3,
            control_dim: 1,
            u_min: vec![T::of(-params.max_torque)],
            u_max: vec![T::of(params.max_torque)],
            dt: T::of(params.dt),
            action_repeat: 1,
            noise_std: vec![noise_std; 3],
            initial_state: Self::state_from_angle(T::of(std::f64::consts::PI), T::zero()),
        };
        Self { spec, params }
    }

    pub fn with_spec(mut self, f: impl FnOnce(EnvSpec<T>) -> EnvSpec<T>) -> Self {
        self.spec = f(self.spec);
        self
    }

    pub fn params(&self) -> &PendulumParams {
        &self.params
    }

    pub fn state_from_angle(theta: T, thetadot: T) -> StateVector<T> {
        StateVector(vec![theta.cos(), theta.sin(), thetadot])
    }

    /// Wrapped angle in `(-pi, pi]`.
    pub fn angle(x: &[T]) -> T {
        x[1].atan2(x[0])
    }

    fn accel(&self, theta: T, thetadot: T, u: T) -> T {
        let p = &self.params;
        T::of(3.0 * p.gravity / (2.0 * p.length)) * theta.sin()
            + T::of(3.0 / (p.mass * p.length * p.length)) * u
            - T::of(p.damping) * thetadot
    }

    /// `0.5 thetadot^2 + (3g / 2l) cos theta`, conserved by the undamped flow.
    pub fn energy(&self, x: &[T]) -> T {
        let p = &self.params;
        T::of(0.5) * x[2] * x[2] + T::of(3.0 * p.gravity / (2.0 * p.length)) * Self::angle(x).cos()
    }
}

impl<T: Scalar> Environment<T> for Pendulum<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn substep(&self, x: &[T], u: &[T], out: &mut [T]) {
        let p = &self.params;
        let vmax = T::of(p.max_speed);
        let u = u[0].max(T::of(-p.max_torque)).min(T::of(p.max_torque));
        let mut th = Self::angle(x);
        let mut thd = x[2];
        let dt = T::of(p.dt);
        match p.integrator {
            PendulumIntegrator::SemiImplicitEuler => {
                thd = (thd + self.accel(th, thd, u) * dt).max(-vmax).min(vmax);
                th += thd * dt;
            }
            PendulumIntegrator::Rk4 { substeps } => {
                let h = dt / T::of_usize(substeps.max(1));
                let two = T::of(2.0);
                let six = T::of(6.0);
                for _ in 0..substeps.max(1) {
                    let k1a = thd;
                    let k1b = self.accel(th, thd, u);
                    let k2a = thd + k1b * h / two;
                    let k2b = self.accel(th + k1a * h / two, k2a, u);
                    let k3a = thd + k2b * h / two;
                    let k3b = self.accel(th + k2a * h / two, k3a, u);
                    let k4a = thd + k3b * h;
                    let k4b = self.accel(th + k3a * h, k4a, u);
                    th += h / six * (k1a + two * k2a + two * k3a + k4a);
                    thd = (thd + h / six * (k1b + two * k2b + two * k3b + k4b)).max(-vmax).min(vmax);
                }
            }
        }
        out[0] = th.cos();
        out[1] = th.sin();
        out[2] = thd;
    }

    fn cost(&self, x: &[T], u: &[T]) -> T {
        let th = Self::angle(x);
        let tenth = T::of(0.1);
        let vel = match self.params.cost {
            PendulumCost::Squared => x[2] * x[2],
            PendulumCost::Literal => x[2],
        };
        th * th + tenth * vel + tenth * u[0] * u[0]
    }
}
