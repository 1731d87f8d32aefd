//! Cost of a candidate plan under the learned model.

use super::{ActionPlan, DynamicsModel, PropagationMode};
use crate::envs::Environment;
use crate::error::{check_dim, Result};
use crate::gp::DynamicsScratch;
use crate::rng::RandomStream;
use crate::scalar::Scalar;

/// Cost assigned to a particle whose rollout leaves the finite reals.
pub const NON_FINITE_PENALTY: f64 = 1e10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rollout<T> {
    /// Particle-averaged summed cost over the horizon.
    pub cost: T,
    pub penalized_particles: usize,
}

/// Evaluates plans against one frozen bank of noise draws so that every
/// candidate in a planning call sees the same randomness.
pub struct PlanEvaluator<'a, T: Scalar> {
    model: &'a dyn DynamicsModel<T>,
    env: &'a dyn Environment<T>,
    mode: PropagationMode,
    horizon: usize,
    particles: usize,
    dx: usize,
    du: usize,
    beta: T,
    noise_std: Vec<T>,
    /// `particles x horizon x dx` standard normals.
    bank: Vec<T>,
    /// Frozen Thompson direction, `horizon x dx`.
    eta: Vec<T>,
    scratch: DynamicsScratch<T>,
}

impl<'a, T: Scalar> PlanEvaluator<'a, T> {
    pub fn new(
        model: &'a dyn DynamicsModel<T>,
        env: &'a dyn Environment<T>,
        mode: PropagationMode,
        horizon: usize,
        particles: usize,
        planning_noise: bool,
        rng: &mut RandomStream,
    ) -> Result<Self> {
        let spec = env.spec();
        check_dim(spec.state_dim, model.state_dim(), "model state_dim")?;
        check_dim(spec.control_dim, model.control_dim(), "model control_dim")?;
        let dx = spec.state_dim;
        let stochastic = planning_noise || mode == PropagationMode::DistributionSampling;
        let particles = if stochastic { particles.max(1) } else { 1 };
        let noise_std = if planning_noise {
            spec.noise_std.clone()
        } else {
            vec![T::zero(); dx]
        };
        let mut bank = vec![T::zero(); if stochastic { particles * horizon * dx } else { 0 }];
        rng.fill_normal(&mut bank);
        let mut eta = Vec::new();
        if mode == PropagationMode::Thompson {
            eta = vec![T::zero(); horizon * dx];
            rng.fill_normal(&mut eta);
        }
        Ok(Self {
            model,
            env,
            mode,
            horizon,
            particles,
            dx,
            du: spec.control_dim,
            beta: model.beta(),
            noise_std,
            bank,
            eta,
            scratch: DynamicsScratch::default(),
        })
    }

    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Width of one step of a flattened decision vector.
    pub fn step_width(&self) -> usize {
        self.du + if self.mode.hallucinates() { self.dx } else { 0 }
    }

    /// Evaluates a flattened decision `[u_0, eta_0, u_1, eta_1, ...]`.
    pub fn evaluate_flat(&mut self, x0: &[T], decision: &[T]) -> Rollout<T> {
        self.evaluate_batch(x0, &[decision]).pop().expect("one decision")
    }

    /// Evaluates many flattened decisions from the same start state with
    /// batched model predictions.
    pub fn evaluate_batch(&mut self, x0: &[T], decisions: &[&[T]]) -> Vec<Rollout<T>> {
        let (dx, du, h_max) = (self.dx, self.du, self.horizon);
        let w = self.step_width();
        let count = decisions.len();
        let mut totals = vec![0.0f64; count];
        let mut penalized = vec![0usize; count];
        let mut xs = vec![T::zero(); count * dx];
        let mut us = vec![T::zero(); count * du];
        let mut means = vec![T::zero(); count * dx];
        let mut stds = vec![T::zero(); count * dx];
        let mut run = vec![0.0f64; count];
        let mut alive = vec![true; count];
        let want_std = self.mode != PropagationMode::Mean;
        for p in 0..self.particles {
            for b in 0..count {
                xs[b * dx..(b + 1) * dx].copy_from_slice(x0);
            }
            run.iter_mut().for_each(|r| *r = 0.0);
            alive.iter_mut().for_each(|a| *a = true);
            for h in 0..h_max {
                for (b, d) in decisions.iter().enumerate() {
                    debug_assert_eq!(d.len(), w * h_max);
                    let u = &d[h * w..h * w + du];
                    us[b * du..(b + 1) * du].copy_from_slice(u);
                    if alive[b] {
                        let c = self.env.cost(&xs[b * dx..(b + 1) * dx], u).as_f64();
                        if c.is_finite() {
                            run[b] += c;
                        } else {
                            alive[b] = false;
                        }
                    }
                }
                if h + 1 == h_max {
                    break;
                }
                self.model.predict_batch_into(
                    &xs,
                    &us,
                    count,
                    &mut means,
                    if want_std { Some(&mut stds) } else { None },
                    &mut self.scratch,
                );
                let noise = if self.bank.is_empty() {
                    None
                } else {
                    let off = (p * h_max + h) * dx;
                    Some(&self.bank[off..off + dx])
                };
                for (b, d) in decisions.iter().enumerate() {
                    if !alive[b] {
                        xs[b * dx..(b + 1) * dx].copy_from_slice(x0);
                        continue;
                    }
                    let eta = &d[h * w + du..(h + 1) * w];
                    for j in 0..dx {
                        let xi = noise.map_or(T::zero(), |n| n[j]);
                        let sw = self.noise_std[j];
                        let m = means[b * dx + j];
                        let sd = stds[b * dx + j];
                        xs[b * dx + j] = match self.mode {
                            PropagationMode::Optimistic => m + self.beta * sd * eta[j] + sw * xi,
                            PropagationMode::Mean => m + sw * xi,
                            PropagationMode::DistributionSampling => {
                                let bs = self.beta * sd;
                                m + (bs * bs + sw * sw).sqrt() * xi
                            }
                            PropagationMode::Thompson => m + sd * self.eta[h * dx + j] + sw * xi,
                        };
                    }
                    if xs[b * dx..(b + 1) * dx].iter().any(|v| !v.is_finite()) {
                        alive[b] = false;
                        xs[b * dx..(b + 1) * dx].copy_from_slice(x0);
                    }
                }
            }
            for b in 0..count {
                if alive[b] {
                    totals[b] += run[b];
                } else {
                    totals[b] += NON_FINITE_PENALTY;
                    penalized[b] += 1;
                }
            }
        }
        totals
            .into_iter()
            .zip(penalized)
            .map(|(t, p)| Rollout {
                cost: T::of(t / self.particles as f64),
                penalized_particles: p,
            })
            .collect()
    }

    /// Evaluates a structured plan.
    pub fn evaluate(&mut self, x0: &[T], plan: &ActionPlan<T>) -> Result<Rollout<T>> {
        check_dim(self.dx, x0.len(), "x0")?;
        check_dim(self.horizon, plan.actions.len(), "plan horizon")?;
        let hall = self.mode.hallucinates();
        if hall {
            check_dim(self.horizon, plan.hallucinations.len(), "plan hallucinations")?;
        }
        let mut flat = Vec::with_capacity(self.step_width() * self.horizon);
        for h in 0..self.horizon {
            check_dim(self.du, plan.actions[h].len(), "plan action")?;
            flat.extend_from_slice(&plan.actions[h]);
            if hall {
                check_dim(self.dx, plan.hallucinations[h].len(), "plan hallucination")?;
                flat.extend_from_slice(&plan.hallucinations[h]);
            }
        }
        Ok(self.evaluate_flat(x0, &flat))
    }
}

/// Particle-averaged cost of `plan` from `x0` under `model`.
pub fn rollout_model<T: Scalar>(
    model: &dyn DynamicsModel<T>,
    env: &dyn Environment<T>,
    mode: PropagationMode,
    x0: &[T],
    plan: &ActionPlan<T>,
    particles: usize,
    planning_noise: bool,
    rng: &mut RandomStream,
) -> Result<Rollout<T>> {
    let mut ev = PlanEvaluator::new(model, env, mode, plan.horizon(), particles, planning_noise, rng)?;
    ev.evaluate(x0, plan)
}
