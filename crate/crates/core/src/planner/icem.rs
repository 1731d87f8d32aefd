//! Improved cross-entropy method with colored sampling noise, elite reuse
//! and a shrinking population.

use super::{ActionPlan, ColoredNoise, DynamicsModel, PlanEvaluator, PlannerConfig, PropagationMode};
use crate::data::ControlVector;
use crate::envs::Environment;
use crate::error::{check_dim, Result};
use crate::rng::RandomStream;
use crate::scalar::Scalar;

struct Candidate<T> {
    decision: Vec<T>,
    cost: T,
}

/// Optimises a plan of `cfg.horizon` steps from `x0`. `warm_mean` is a
/// flattened sampling mean from a previous call, already shifted.
pub fn icem_plan<T: Scalar>(
    model: &dyn DynamicsModel<T>,
    env: &dyn Environment<T>,
    x0: &[T],
    cfg: &PlannerConfig<T>,
    mode: PropagationMode,
    rng: &mut RandomStream,
    warm_mean: Option<&[T]>,
) -> Result<ActionPlan<T>> {
    cfg.validate()?;
    let spec = env.spec();
    check_dim(spec.state_dim, x0.len(), "x0")?;
    let (du, dx, horizon) = (spec.control_dim, spec.state_dim, cfg.horizon);
    let mut ev = PlanEvaluator::new(model, env, mode, horizon, cfg.particles, cfg.planning_noise, rng)?;
    let w = ev.step_width();
    let n = w * horizon;

    let mut lo = Vec::with_capacity(w);
    let mut hi = Vec::with_capacity(w);
    lo.extend_from_slice(&spec.u_min);
    hi.extend_from_slice(&spec.u_max);
    if mode.hallucinates() {
        lo.extend(std::iter::repeat_n(-T::one(), dx));
        hi.extend(std::iter::repeat_n(T::one(), dx));
    }
    let half: Vec<T> = lo.iter().zip(&hi).map(|(a, b)| (*b - *a) / T::of(2.0)).collect();

    let mut mean: Vec<T> = match warm_mean {
        Some(m) => {
            check_dim(n, m.len(), "warm start mean")?;
            m.to_vec()
        }
        None => (0..n).map(|i| (lo[i % w] + hi[i % w]) / T::of(2.0)).collect(),
    };
    let mut std: Vec<T> = (0..n).map(|i| cfg.init_std * half[i % w]).collect();

    let mut noise = ColoredNoise::new(cfg.colored_noise_exponent.as_f64(), horizon);
    let mut seq = vec![0.0f64; horizon];
    let keep = (cfg.elite_keep_fraction.as_f64() * cfg.num_elites as f64).ceil() as usize;
    let decay = cfg.population_decay.as_f64();

    let mut elites: Vec<Candidate<T>> = Vec::new();
    let mut best: Option<Candidate<T>> = None;
    let mut best_history = Vec::with_capacity(cfg.optimizer_steps);
    let mut penalized = 0usize;

    for it in 0..cfg.optimizer_steps {
        let pop = ((cfg.num_samples as f64 / decay.powi(it as i32)).round() as usize).max(cfg.num_elites);
        let mut population: Vec<Candidate<T>> = elites.drain(..keep.min(elites.len())).collect();
        let mut fresh: Vec<Vec<T>> = Vec::with_capacity(pop);
        for _ in 0..pop {
            let mut d = vec![T::zero(); n];
            for k in 0..w {
                noise.sample(rng, &mut seq);
                for (h, s) in seq.iter().enumerate() {
                    let i = h * w + k;
                    d[i] = (mean[i] + std[i] * T::of(*s)).max(lo[k]).min(hi[k]);
                }
            }
            fresh.push(d);
        }
        let refs: Vec<&[T]> = fresh.iter().map(|d| d.as_slice()).collect();
        let results = ev.evaluate_batch(x0, &refs);
        for (d, r) in fresh.into_iter().zip(results) {
            penalized += r.penalized_particles;
            population.push(Candidate { decision: d, cost: r.cost });
        }
        population.sort_by(|a, b| a.cost.as_f64().total_cmp(&b.cost.as_f64()));
        population.truncate(cfg.num_elites);

        let ne = T::of_usize(population.len());
        for i in 0..n {
            let m = population.iter().map(|c| c.decision[i]).sum::<T>() / ne;
            let v = population
                .iter()
                .map(|c| (c.decision[i] - m) * (c.decision[i] - m))
                .sum::<T>()
                / ne;
            mean[i] = m;
            std[i] = v.sqrt();
        }

        let top = &population[0];
        if best.as_ref().is_none_or(|b| top.cost < b.cost) {
            best = Some(Candidate {
                decision: top.decision.clone(),
                cost: top.cost,
            });
        }
        best_history.push(best.as_ref().map_or(T::nan(), |b| b.cost));
        elites = population;
    }

    let best = best.expect("optimizer_steps >= 1");
    let mut actions = Vec::with_capacity(horizon);
    let mut hallucinations = Vec::new();
    for h in 0..horizon {
        let step = &best.decision[h * w..(h + 1) * w];
        actions.push(ControlVector(step[..du].to_vec()));
        if mode.hallucinates() {
            hallucinations.push(step[du..].to_vec());
        }
    }
    Ok(ActionPlan {
        actions,
        hallucinations,
        objective: best.cost,
        sampling_mean: mean,
        best_per_iteration: best_history,
        penalized_rollouts: penalized,
    })
}

/// Plans from `x`, returning the first action and the full plan. The mean of
/// `previous` shifted by one step seeds the sampler.
pub fn mpc_act<T: Scalar>(
    model: &dyn DynamicsModel<T>,
    env: &dyn Environment<T>,
    x: &[T],
    cfg: &PlannerConfig<T>,
    mode: PropagationMode,
    rng: &mut RandomStream,
    previous: Option<&ActionPlan<T>>,
) -> Result<(ControlVector<T>, ActionPlan<T>)> {
    let spec = env.spec();
    let w = spec.control_dim + if mode.hallucinates() { spec.state_dim } else { 0 };
    let shifted = previous
        .filter(|p| p.sampling_mean.len() == w * cfg.horizon && cfg.horizon > 0)
        .map(|p| {
            let mut m = p.sampling_mean[w..].to_vec();
            m.extend_from_slice(&p.sampling_mean[p.sampling_mean.len() - w..]);
            m
        });
    let plan = icem_plan(model, env, x, cfg, mode, rng, shifted.as_deref())?;
    let mut u = plan.actions[0].clone();
    spec.clip_control(&mut u.0);
    Ok((u, plan))
}
