use std::sync::Arc;

use crate::envs::Environment;
use crate::gp::{CalibratedModel, DynamicsScratch};
use crate::scalar::Scalar;

/// A one-step dynamics model the planner can roll out: next-state mean,
/// epistemic standard deviation and a confidence width.
pub trait DynamicsModel<T: Scalar>: Send + Sync {
    fn state_dim(&self) -> usize;
    fn control_dim(&self) -> usize;
    fn beta(&self) -> T;
    fn predict_into(
        &self,
        x: &[T],
        u: &[T],
        mean: &mut [T],
        std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    );

    /// Predicts `count` rows at once; `xs`, `us`, `mean` and `std` are
    /// row-major.
    fn predict_batch_into(
        &self,
        xs: &[T],
        us: &[T],
        count: usize,
        mean: &mut [T],
        mut std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    ) {
        let (dx, du) = (self.state_dim(), self.control_dim());
        for b in 0..count {
            let s = std.as_deref_mut().map(|s| &mut s[b * dx..(b + 1) * dx]);
            self.predict_into(
                &xs[b * dx..(b + 1) * dx],
                &us[b * du..(b + 1) * du],
                &mut mean[b * dx..(b + 1) * dx],
                s,
                scratch,
            );
        }
    }
}

impl<T: Scalar> DynamicsModel<T> for CalibratedModel<T> {
    fn state_dim(&self) -> usize {
        self.dynamics.state_dim()
    }
    fn control_dim(&self) -> usize {
        self.dynamics.control_dim()
    }
    fn beta(&self) -> T {
        CalibratedModel::beta(self)
    }
    #[inline]
    fn predict_into(
        &self,
        x: &[T],
        u: &[T],
        mean: &mut [T],
        std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    ) {
        self.dynamics.predict_into(x, u, mean, std, scratch)
    }
    fn predict_batch_into(
        &self,
        xs: &[T],
        us: &[T],
        count: usize,
        mean: &mut [T],
        std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    ) {
        self.dynamics.predict_batch_into(xs, us, count, mean, std, scratch)
    }
}

/// The true noiseless dynamics with zero epistemic uncertainty.
#[derive(Clone)]
pub struct OracleModel<T> {
    env: Arc<dyn Environment<T>>,
}

impl<T: Scalar> OracleModel<T> {
    pub fn new(env: Arc<dyn Environment<T>>) -> Self {
        Self { env }
    }
}

impl<T: Scalar> DynamicsModel<T> for OracleModel<T> {
    fn state_dim(&self) -> usize {
        self.env.spec().state_dim
    }
    fn control_dim(&self) -> usize {
        self.env.spec().control_dim
    }
    fn beta(&self) -> T {
        T::zero()
    }
    fn predict_into(
        &self,
        x: &[T],
        u: &[T],
        mean: &mut [T],
        std: Option<&mut [T]>,
        _scratch: &mut DynamicsScratch<T>,
    ) {
        self.env.mean_step(x, u, mean);
        if let Some(s) = std {
            s.iter_mut().for_each(|v| *v = T::zero());
        }
    }
}
