use serde::{Deserialize, Serialize};

use super::{EnvSpec, Environment};
use crate::data::StateVector;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CartPoleParams {
    pub gravity: f64,
    pub cart_mass: f64,
    pub pole_mass: f64,
    /// Half the pole length.
    pub half_length: f64,
    pub force_mag: f64,
    pub dt: f64,
    pub target_position: f64,
}

impl Default for CartPoleParams {
    fn default() -> Self {
        Self {
            gravity: 9.8,
            cart_mass: 1.0,
            pole_mass: 0.1,
            half_length: 0.5,
            force_mag: 10.0,
            dt: 0.01,
            target_position: 0.0,
        }
    }
}

/// Planar cart-pole, pole angle measured from upright, explicit Euler.
///
/// State `(x, cos theta, sin theta, xdot, thetadot)`, control in `[-1, 1]`
/// scaled by `force_mag`.
#[derive(Debug, Clone)]
pub struct CartPole<T> {
    spec: EnvSpec<T>,
    params: CartPoleParams,
    drop_resets: bool,
}

impl<T: Scalar> CartPole<T> {
    fn build(name: &str, theta0: f64, noise_std: T, drop_resets: bool) -> Self {
        let params = CartPoleParams::default();
        Self {
            spec: EnvSpec {
                name: name.into(),
                state_dim: 5,
                control_dim: 1,
                u_min: vec![-T::one()],
                u_max: vec![T::one()],
                dt: T::of(params.dt),
                action_repeat: 2,
                noise_std: vec![noise_std; 5],
                initial_state: Self::state(T::zero(), T::of(theta0), T::zero(), T::zero()),
            },
            params,
            drop_resets,
        }
    }

    /// Swing-up task: starts hanging down.
    pub fn swing_up(noise_std: T) -> Self {
        Self::build("cartpole", std::f64::consts::PI, noise_std, false)
    }

    /// Balance task: starts upright; the pole counts as dropped once it is
    /// below horizontal.
    pub fn balance(noise_std: T) -> Self {
        Self::build("cartpole_balance", 0.0, noise_std, true)
    }

    pub fn with_spec(mut self, f: impl FnOnce(EnvSpec<T>) -> EnvSpec<T>) -> Self {
        self.spec = f(self.spec);
        self
    }

    pub fn state(x: T, theta: T, xdot: T, thetadot: T) -> StateVector<T> {
        StateVector(vec![x, theta.cos(), theta.sin(), xdot, thetadot])
    }

    pub fn angle(s: &[T]) -> T {
        s[2].atan2(s[1])
    }
}

impl<T: Scalar> Environment<T> for CartPole<T> {
    fn spec(&self) -> &EnvSpec<T> {
        &self.spec
    }

    fn substep(&self, s: &[T], u: &[T], out: &mut [T]) {
        let p = &self.params;
        let force = T::of(p.force_mag) * u[0].max(-T::one()).min(T::one());
        let (x, xd, thd) = (s[0], s[3], s[4]);
        let th = Self::angle(s);
        let (sin, cos) = (th.sin(), th.cos());
        let mp = T::of(p.pole_mass);
        let l = T::of(p.half_length);
        let total = T::of(p.cart_mass + p.pole_mass);
        let temp = (force + mp * l * thd * thd * sin) / total;
        let thacc = (T::of(p.gravity) * sin - cos * temp)
            / (l * (T::of(4.0 / 3.0) - mp * cos * cos / total));
        let xacc = temp - mp * l * thacc * cos / total;
        let dt = T::of(p.dt);
        let th_new = th + dt * thd;
        out[0] = x + dt * xd;
        out[1] = th_new.cos();
        out[2] = th_new.sin();
        out[3] = xd + dt * xacc;
        out[4] = thd + dt * thacc;
    }

    fn cost(&self, s: &[T], u: &[T]) -> T {
        let dx = s[0] - T::of(self.params.target_position);
        let c = Self::angle(s).cos() - T::one();
        dx * dx + T::of(10.0) * c * c + T::of(0.2) * u[0] * u[0]
    }

    fn dropped(&self, s: &[T]) -> bool {
        self.drop_resets && Self::angle(s).cos() < T::zero()
    }
}
