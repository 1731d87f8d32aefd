//! Dynamics posterior over a transition dataset and the calibrated model
//! `(mean, std, beta)` handed to the planner.

use serde::{Deserialize, Serialize};

use crate::data::{standardizer_fit, Standardizer, TargetMode, Transition, TransitionDataset};
use crate::error::{check_dim, invalid, Result};
use crate::gp::info_gain::greedy_select;
use crate::gp::kernel::KernelSpec;
use crate::gp::posterior::{GpPosterior, PredictScratch};
use crate::scalar::Scalar;

/// How a dynamics GP is built from data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GpConfig<T> {
    pub kernel: KernelSpec<T>,
    /// Observation noise variance, in (standardised) target units.
    pub noise_variance: T,
    pub target_mode: TargetMode,
    pub standardize: bool,
    /// Condition on at most this many transitions, chosen greedily by
    /// posterior variance. `None` conditions on everything.
    pub max_points: Option<usize>,
}

impl<T: Scalar> GpConfig<T> {
    pub fn new(kernel: KernelSpec<T>, noise_variance: T) -> Self {
        Self {
            kernel,
            noise_variance,
            target_mode: TargetMode::Delta,
            standardize: true,
            max_points: None,
        }
    }

    /// Plain GP: absolute targets, no normalisation, no subset.
    pub fn raw(kernel: KernelSpec<T>, noise_variance: T) -> Self {
        Self {
            kernel,
            noise_variance,
            target_mode: TargetMode::Absolute,
            standardize: false,
            max_points: None,
        }
    }
}

/// GP posterior over next states, in original state units.
#[derive(Debug, Clone)]
pub struct GpDynamics<T> {
    posterior: GpPosterior<T>,
    standardizer: Standardizer<T>,
    state_dim: usize,
    control_dim: usize,
    data_len: usize,
}

/// Reusable buffers for [`GpDynamics::predict_into`].
#[derive(Debug, Clone, Default)]
pub struct DynamicsScratch<T> {
    z: Vec<T>,
    zs: Vec<T>,
    mean: Vec<T>,
    var: Vec<T>,
    gp: PredictScratch<T>,
}

/// Fits the dynamics posterior on `ds`.
pub fn fit_posterior<T: Scalar>(ds: &TransitionDataset<T>, cfg: &GpConfig<T>) -> Result<GpDynamics<T>> {
    let (dx, du) = (ds.state_dim(), ds.control_dim());
    let standardizer = if cfg.standardize && !ds.is_empty() {
        standardizer_fit(ds, cfg.target_mode)?
    } else {
        Standardizer::identity(dx + du, dx, cfg.target_mode)
    };
    let inputs: Vec<Vec<T>> = ds
        .iter()
        .map(|t| standardizer.input.transform(&t.input()))
        .collect();
    let targets: Vec<Vec<T>> = ds
        .iter()
        .map(|t: &Transition<T>| standardizer.target.transform(&cfg.target_mode.target(t)))
        .collect();
    let (inputs, targets) = match cfg.max_points {
        Some(m) if m < inputs.len() => {
            let sel = greedy_select(&inputs, m, &cfg.kernel, cfg.noise_variance)?;
            let mut idx = sel.indices;
            idx.sort_unstable();
            (
                idx.iter().map(|&i| inputs[i].clone()).collect(),
                idx.iter().map(|&i| targets[i].clone()).collect(),
            )
        }
        _ => (inputs, targets),
    };
    let posterior = GpPosterior::fit(
        &inputs,
        &targets,
        cfg.kernel.clone(),
        cfg.noise_variance,
        dx + du,
        dx,
    )?;
    Ok(GpDynamics {
        posterior,
        standardizer,
        state_dim: dx,
        control_dim: du,
        data_len: ds.len(),
    })
}

impl<T: Scalar> GpDynamics<T> {
    pub fn prior(state_dim: usize, control_dim: usize, cfg: &GpConfig<T>) -> Result<Self> {
        fit_posterior(&TransitionDataset::new(state_dim, control_dim), cfg)
    }

    pub fn posterior(&self) -> &GpPosterior<T> {
        &self.posterior
    }

    pub fn standardizer(&self) -> &Standardizer<T> {
        &self.standardizer
    }

    pub fn state_dim(&self) -> usize {
        self.state_dim
    }

    pub fn control_dim(&self) -> usize {
        self.control_dim
    }

    /// Number of transitions the posterior was fitted from (before any
    /// subset selection).
    pub fn data_len(&self) -> usize {
        self.data_len
    }

    /// Next-state mean and, optionally, epistemic standard deviation per
    /// state dimension.
    #[inline]
    pub fn predict_into(
        &self,
        x: &[T],
        u: &[T],
        mean: &mut [T],
        std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    ) {
        let dx = self.state_dim;
        let st = &self.standardizer;
        scratch.z.clear();
        scratch.z.extend_from_slice(x);
        scratch.z.extend_from_slice(u);
        scratch.zs.resize(scratch.z.len(), T::zero());
        st.input.transform_into(&scratch.z, &mut scratch.zs);
        scratch.mean.resize(dx, T::zero());
        let var = self
            .posterior
            .predict_raw(&scratch.zs, &mut scratch.mean, std.is_some(), &mut scratch.gp);
        let base = st.target_mode == TargetMode::Delta;
        for j in 0..dx {
            let m = scratch.mean[j] * st.target.scale[j] + st.target.mean[j];
            mean[j] = if base { x[j] + m } else { m };
        }
        if let Some(std) = std {
            let s = var.sqrt();
            for j in 0..dx {
                std[j] = s * st.target.scale[j];
            }
        }
    }

    /// Batched [`GpDynamics::predict_into`] over `count` state/control rows.
    pub fn predict_batch_into(
        &self,
        xs: &[T],
        us: &[T],
        count: usize,
        mean: &mut [T],
        std: Option<&mut [T]>,
        scratch: &mut DynamicsScratch<T>,
    ) {
        let (dx, du) = (self.state_dim, self.control_dim);
        let d = dx + du;
        let st = &self.standardizer;
        scratch.z.resize(d, T::zero());
        scratch.zs.resize(count * d, T::zero());
        for b in 0..count {
            scratch.z[..dx].copy_from_slice(&xs[b * dx..(b + 1) * dx]);
            scratch.z[dx..].copy_from_slice(&us[b * du..(b + 1) * du]);
            st.input.transform_into(&scratch.z, &mut scratch.zs[b * d..(b + 1) * d]);
        }
        scratch.mean.resize(count * dx, T::zero());
        let want_var = std.is_some();
        scratch.var.resize(if want_var { count } else { 0 }, T::zero());
        self.posterior.predict_batch_raw(
            &scratch.zs,
            count,
            &mut scratch.mean,
            if want_var { Some(&mut scratch.var) } else { None },
            &mut scratch.gp,
        );
        let base = st.target_mode == TargetMode::Delta;
        for b in 0..count {
            for j in 0..dx {
                let m = scratch.mean[b * dx + j] * st.target.scale[j] + st.target.mean[j];
                mean[b * dx + j] = if base { xs[b * dx + j] + m } else { m };
            }
        }
        if let Some(std) = std {
            for b in 0..count {
                let s = scratch.var[b].sqrt();
                for j in 0..dx {
                    std[b * dx + j] = s * st.target.scale[j];
                }
            }
        }
    }

    /// Next-state mean and epistemic std at `z = [state, control]`.
    pub fn predict(&self, z: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        check_dim(self.state_dim + self.control_dim, z.len(), "query input")?;
        let (x, u) = z.split_at(self.state_dim);
        let mut mean = vec![T::zero(); self.state_dim];
        let mut std = vec![T::zero(); self.state_dim];
        self.predict_into(x, u, &mut mean, Some(&mut std), &mut DynamicsScratch::default());
        Ok((mean, std))
    }

    /// Information gain of the conditioning set.
    pub fn information_gain(&self) -> T {
        self.posterior.information_gain()
    }
}

/// Confidence-width schedule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BetaSchedule<T> {
    Fixed(T),
    /// `B + noise_std * sqrt(2 (gain_n + 1 + ln(1/delta)))`.
    InfoGainBased { bound: T, delta: T },
}

impl<T: Scalar> BetaSchedule<T> {
    pub fn validate(&self) -> Result<()> {
        match *self {
            BetaSchedule::Fixed(v) if !(v >= T::zero()) || !v.is_finite() => {
                Err(invalid("beta", "fixed beta must be finite and nonnegative"))
            }
            BetaSchedule::InfoGainBased { delta, .. } if !(delta > T::zero() && delta <= T::one()) => {
                Err(invalid("delta", "must lie in (0, 1]"))
            }
            BetaSchedule::InfoGainBased { bound, .. } if !(bound >= T::zero()) => {
                Err(invalid("bound", "must be nonnegative"))
            }
            _ => Ok(()),
        }
    }

    /// Evaluates the schedule for a given information gain and noise std.
    pub fn value(&self, information_gain: T, noise_std: T) -> Result<T> {
        self.validate()?;
        Ok(match *self {
            BetaSchedule::Fixed(v) => v,
            BetaSchedule::InfoGainBased { bound, delta } => {
                let inner = T::of(2.0) * (information_gain + T::one() + (T::one() / delta).ln());
                bound + noise_std * inner.sqrt()
            }
        })
    }
}

/// Dynamics posterior plus calibration scalar.
#[derive(Debug, Clone)]
pub struct CalibratedModel<T> {
    pub dynamics: GpDynamics<T>,
    pub schedule: BetaSchedule<T>,
    beta: T,
}

impl<T: Scalar> CalibratedModel<T> {
    /// Wraps `dynamics`; `beta_floor` keeps the width nondecreasing across
    /// refits when the conditioning set is a subset.
    pub fn new(dynamics: GpDynamics<T>, schedule: BetaSchedule<T>, beta_floor: T) -> Result<Self> {
        let noise_std = dynamics.posterior().noise_variance().sqrt();
        let beta = schedule
            .value(dynamics.information_gain(), noise_std)?
            .max(beta_floor);
        Ok(Self {
            dynamics,
            schedule,
            beta,
        })
    }

    pub fn prior(state_dim: usize, control_dim: usize, cfg: &GpConfig<T>, schedule: BetaSchedule<T>) -> Result<Self> {
        Self::new(GpDynamics::prior(state_dim, control_dim, cfg)?, schedule, T::zero())
    }

    /// Refits on `ds` from scratch, keeping beta monotone.
    pub fn refit(&self, ds: &TransitionDataset<T>, cfg: &GpConfig<T>) -> Result<Self> {
        Self::new(fit_posterior(ds, cfg)?, self.schedule, self.beta)
    }

    pub fn beta(&self) -> T {
        self.beta
    }

    pub fn n(&self) -> usize {
        self.dynamics.data_len()
    }
}

/// Fraction of `(point, output)` pairs with `|mean - f| <= beta * std`.
pub fn membership_check<T, F>(model: &CalibratedModel<T>, f_true: F, points: &[Vec<T>]) -> Result<f64>
where
    T: Scalar,
    F: Fn(&[T]) -> Vec<T>,
{
    if points.is_empty() {
        return Ok(1.0);
    }
    let beta = model.beta();
    let mut inside = 0usize;
    let mut total = 0usize;
    for z in points {
        let (mean, std) = model.dynamics.predict(z)?;
        let f = f_true(z);
        check_dim(mean.len(), f.len(), "true function output")?;
        for j in 0..mean.len() {
            total += 1;
            if (mean[j] - f[j]).abs() <= beta * std[j] {
                inside += 1;
            }
        }
    }
    Ok(inside as f64 / total as f64)
}
