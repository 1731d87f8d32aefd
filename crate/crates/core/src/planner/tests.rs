use std::sync::Arc;

use super::*;
use crate::data::{ControlVector, StateVector, Transition, TransitionDataset};
use crate::envs::{EnvSpec, Environment, Pendulum, PendulumParams};
use crate::gp::{fit_posterior, BetaSchedule, CalibratedModel, GpConfig, KernelSpec};
use crate::rng::RandomStream;

/// `x+ = x + u` on the line with cost `x^2 + (u - target)^2`.
struct Line {
    spec: EnvSpec<f64>,
    target: f64,
}

impl Line {
    fn new(noise: f64, target: f64) -> Self {
        Self {
            spec: EnvSpec {
                name: "line".into(),
                state_dim: 1,
                control_dim: 1,
                u_min: vec![-1.0],
                u_max: vec![1.0],
                dt: 1.0,
                action_repeat: 1,
                noise_std: vec![noise],
                initial_state: StateVector(vec![0.0]),
            },
            target,
        }
    }
}

impl Environment<f64> for Line {
    fn spec(&self) -> &EnvSpec<f64> {
        &self.spec
    }
    fn substep(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = x[0] + u[0].clamp(-1.0, 1.0);
    }
    fn cost(&self, x: &[f64], u: &[f64]) -> f64 {
        x[0] * x[0] + (u[0] - self.target).powi(2)
    }
}

fn small_cfg(horizon: usize) -> PlannerConfig<f64> {
    PlannerConfig {
        num_samples: 60,
        num_elites: 6,
        optimizer_steps: 4,
        horizon,
        particles: 3,
        ..PlannerConfig::default()
    }
}

fn pendulum_gp(n: usize, seed: u64) -> (Arc<Pendulum<f64>>, CalibratedModel<f64>) {
    let env = Arc::new(Pendulum::new(PendulumParams::default(), 1e-3));
    let mut rng = RandomStream::new(seed);
    let mut ds = TransitionDataset::new(3, 1);
    for _ in 0..n {
        let th = rng.uniform_in(-3.0, 3.0);
        let w = rng.uniform_in(-4.0, 4.0);
        let x = Pendulum::state_from_angle(th, w);
        let u = vec![rng.uniform_in(-2.0, 2.0)];
        let mut next = vec![0.0; 3];
        env.mean_step(&x, &u, &mut next);
        ds.push(Transition::new(x, ControlVector(u), StateVector(next))).unwrap();
    }
    let cfg = GpConfig::new(KernelSpec::rbf(1.0, 1.0), 1e-4);
    let model = CalibratedModel::new(fit_posterior(&ds, &cfg).unwrap(), BetaSchedule::Fixed(2.0), 0.0).unwrap();
    (env, model)
}

#[test]
fn agent_names_round_trip() {
    for m in PropagationMode::ALL {
        assert_eq!(PropagationMode::from_agent_name(m.agent_name()), Some(m));
    }
    assert_eq!(PropagationMode::from_agent_name("ppo"), None);
}

#[test]
fn config_validation() {
    assert!(PlannerConfig::<f64>::default().validate().is_ok());
    let bad = PlannerConfig::<f64> {
        num_elites: 600,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
    let bad = PlannerConfig::<f64> {
        horizon: 0,
        ..Default::default()
    };
    assert!(bad.validate().is_err());
}

#[test]
fn one_step_rollout_by_hand() {
    let env = Line::new(0.0, 0.0);
    let model = OracleModel::new(Arc::new(Line::new(0.0, 0.0)));
    let plan = ActionPlan::from_sequences(vec![vec![0.5], vec![-0.25]], vec![]);
    let mut rng = RandomStream::new(1);
    let r = rollout_model(&model, &env, PropagationMode::Mean, &[1.0], &plan, 1, false, &mut rng).unwrap();
    let expected = 1.0 + 0.25 + 1.5f64.powi(2) + 0.0625;
    assert!((r.cost - expected).abs() < 1e-12);
}

#[test]
fn modes_coincide_without_uncertainty() {
    let env = Pendulum::new(PendulumParams::default(), 0.0);
    let model = OracleModel::new(Arc::new(Pendulum::new(PendulumParams::default(), 0.0)));
    let h = 6;
    let mut rng = RandomStream::new(3);
    let actions: Vec<Vec<f64>> = (0..h).map(|_| vec![rng.uniform_in(-2.0, 2.0)]).collect();
    let hall: Vec<Vec<f64>> = (0..h).map(|_| (0..3).map(|_| rng.uniform_in(-1.0, 1.0)).collect()).collect();
    let x0 = Pendulum::state_from_angle(2.0, 0.5);
    let mut costs = Vec::new();
    for m in PropagationMode::ALL {
        let plan = ActionPlan::from_sequences(actions.clone(), if m.hallucinates() { hall.clone() } else { vec![] });
        let r = rollout_model(&model, &env, m, &x0, &plan, 4, true, &mut rng).unwrap();
        costs.push(r.cost);
    }
    for c in &costs {
        assert!((c - costs[0]).abs() < 1e-10, "{costs:?}");
    }
}

#[test]
fn zero_hallucination_matches_mean_rollout() {
    let (env, model) = pendulum_gp(40, 5);
    let h = 8;
    let actions: Vec<Vec<f64>> = (0..h).map(|i| vec![(i as f64 * 0.7).sin()]).collect();
    let x0 = Pendulum::state_from_angle(1.0, 0.0);
    let opt = ActionPlan::from_sequences(actions.clone(), vec![vec![0.0; 3]; h]);
    let mean = ActionPlan::from_sequences(actions, vec![]);
    for seed in 0..3 {
        let a = rollout_model(&model, env.as_ref(), PropagationMode::Optimistic, &x0, &opt, 3, true, &mut RandomStream::new(seed))
            .unwrap();
        let b = rollout_model(&model, env.as_ref(), PropagationMode::Mean, &x0, &mean, 3, true, &mut RandomStream::new(seed))
            .unwrap();
        assert!((a.cost - b.cost).abs() < 1e-10);
    }
}

#[test]
fn hallucination_can_only_lower_the_best_cost() {
    let (env, model) = pendulum_gp(15, 8);
    let x0 = Pendulum::state_from_angle(2.5, 0.0);
    let actions = vec![vec![1.0]; 3];
    let mean_plan = ActionPlan::from_sequences(actions.clone(), vec![]);
    let mut rng = RandomStream::new(0);
    let mean_cost = rollout_model(&model, env.as_ref(), PropagationMode::Mean, &x0, &mean_plan, 1, false, &mut rng)
        .unwrap()
        .cost;
    let mut ev = PlanEvaluator::new(&model, env.as_ref(), PropagationMode::Optimistic, 3, 1, false, &mut rng).unwrap();
    let grid = [-1.0, -0.5, 0.0, 0.5, 1.0];
    let mut best = f64::INFINITY;
    for a in grid {
        for b in grid {
            let plan = ActionPlan::from_sequences(actions.clone(), vec![vec![a, b, a], vec![b, a, b], vec![0.0; 3]]);
            best = best.min(ev.evaluate(&x0, &plan).unwrap().cost);
        }
    }
    assert!(best <= mean_cost + 1e-12);
    assert!(best < mean_cost - 1e-6, "uncertain model should leave room to hallucinate");
}

#[test]
fn thompson_draw_is_frozen_within_a_call() {
    let (env, model) = pendulum_gp(20, 2);
    let x0 = Pendulum::state_from_angle(1.0, 0.0);
    let plan = ActionPlan::from_sequences(vec![vec![0.3]; 5], vec![]);
    let mut rng = RandomStream::new(9);
    let mut ev = PlanEvaluator::new(&model, env.as_ref(), PropagationMode::Thompson, 5, 2, true, &mut rng).unwrap();
    let a = ev.evaluate(&x0, &plan).unwrap().cost;
    let b = ev.evaluate(&x0, &plan).unwrap().cost;
    assert_eq!(a, b);
}

#[test]
fn particle_average_variance_shrinks_like_one_over_particles() {
    let env = Line::new(0.3, 0.0);
    let model = OracleModel::new(Arc::new(Line::new(0.3, 0.0)));
    let plan = ActionPlan::from_sequences(vec![vec![0.0]; 4], vec![]);
    let var = |particles: usize| {
        let mut rng = RandomStream::new(17);
        let xs: Vec<f64> = (0..3000)
            .map(|_| {
                rollout_model(&model, &env, PropagationMode::Mean, &[0.0], &plan, particles, true, &mut rng)
                    .unwrap()
                    .cost
            })
            .collect();
        let m = xs.iter().sum::<f64>() / xs.len() as f64;
        xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (xs.len() - 1) as f64
    };
    let ratio = var(1) / var(8);
    assert!((ratio / 8.0 - 1.0).abs() < 0.2, "ratio {ratio}");
}

#[test]
fn non_finite_rollouts_are_penalized() {
    struct Boom(EnvSpec<f64>);
    impl Environment<f64> for Boom {
        fn spec(&self) -> &EnvSpec<f64> {
            &self.0
        }
        fn substep(&self, x: &[f64], _u: &[f64], out: &mut [f64]) {
            out[0] = x[0] * 1e300;
        }
        fn cost(&self, x: &[f64], _u: &[f64]) -> f64 {
            x[0] * x[0]
        }
    }
    let mut spec = Line::new(0.0, 0.0).spec;
    spec.initial_state = StateVector(vec![1.0]);
    let env = Boom(spec.clone());
    let model = OracleModel::new(Arc::new(Boom(spec)));
    let plan = ActionPlan::from_sequences(vec![vec![0.0]; 4], vec![]);
    let r = rollout_model(&model, &env, PropagationMode::Mean, &[1.0], &plan, 1, false, &mut RandomStream::new(0)).unwrap();
    assert_eq!(r.penalized_particles, 1);
    assert_eq!(r.cost, NON_FINITE_PENALTY);
}

#[test]
fn icem_finds_quadratic_minimum() {
    let env = Line::new(0.0, 0.3);
    let model = OracleModel::new(Arc::new(Line::new(0.0, 0.3)));
    let cfg = PlannerConfig {
        horizon: 1,
        planning_noise: false,
        ..small_cfg(1)
    };
    let plan = icem_plan(&model, &env, &[0.0], &cfg, PropagationMode::Mean, &mut RandomStream::new(4), None).unwrap();
    assert!((plan.actions[0][0] - 0.3).abs() < 0.02, "{:?}", plan.actions);
}

#[test]
fn best_objective_never_increases() {
    let env = Pendulum::new(PendulumParams::default(), 1e-3);
    let model = OracleModel::new(Arc::new(Pendulum::new(PendulumParams::default(), 1e-3)));
    let cfg = PlannerConfig {
        optimizer_steps: 8,
        ..small_cfg(10)
    };
    let x0 = Pendulum::state_from_angle(std::f64::consts::PI, 0.0);
    let plan = icem_plan(&model, &env, &x0, &cfg, PropagationMode::Mean, &mut RandomStream::new(6), None).unwrap();
    assert_eq!(plan.best_per_iteration.len(), 8);
    for w in plan.best_per_iteration.windows(2) {
        assert!(w[1] <= w[0]);
    }
    assert_eq!(*plan.best_per_iteration.last().unwrap(), plan.objective);
}

#[test]
fn degenerate_population_is_allowed() {
    let env = Line::new(0.0, 0.3);
    let model = OracleModel::new(Arc::new(Line::new(0.0, 0.3)));
    let cfg = PlannerConfig {
        num_samples: 1,
        num_elites: 1,
        optimizer_steps: 3,
        ..small_cfg(3)
    };
    let plan = icem_plan(&model, &env, &[0.0], &cfg, PropagationMode::Optimistic, &mut RandomStream::new(1), None).unwrap();
    assert_eq!(plan.actions.len(), 3);
    assert_eq!(plan.hallucinations.len(), 3);
    assert!(plan.objective.is_finite());
}

#[test]
fn planned_controls_stay_in_bounds() {
    let env = Line::new(0.05, 0.0);
    let model = OracleModel::new(Arc::new(Line::new(0.05, 0.0)));
    let cfg = PlannerConfig {
        num_samples: 4,
        num_elites: 2,
        optimizer_steps: 1,
        particles: 1,
        init_std: 5.0,
        ..small_cfg(2)
    };
    let mut rng = RandomStream::new(2);
    let mut prev: Option<ActionPlan<f64>> = None;
    for i in 0..10_000 {
        let x = [rng.uniform_in(-50.0, 50.0)];
        let mode = PropagationMode::ALL[i % 4];
        let prev_ok = prev.as_ref().filter(|_| i % 4 != 0 && mode.hallucinates() == PropagationMode::ALL[(i + 3) % 4].hallucinates());
        let (u, plan) = mpc_act(&model, &env, &x, &cfg, mode, &mut rng, prev_ok).unwrap();
        assert!((-1.0..=1.0).contains(&u[0]));
        for a in &plan.actions {
            assert!((-1.0..=1.0).contains(&a[0]));
        }
        for e in plan.hallucinations.iter().flatten() {
            assert!((-1.0..=1.0).contains(e));
        }
        prev = Some(plan);
    }
}

#[test]
fn warm_start_keeps_a_good_plan() {
    let env = Line::new(0.0, 0.3);
    let model = OracleModel::new(Arc::new(Line::new(0.0, 0.3)));
    let cfg = PlannerConfig {
        planning_noise: false,
        ..small_cfg(5)
    };
    let mut rng = RandomStream::new(8);
    let (_, first) = mpc_act(&model, &env, &[0.0], &cfg, PropagationMode::Mean, &mut rng, None).unwrap();
    let (_, second) = mpc_act(&model, &env, &[0.0], &cfg, PropagationMode::Mean, &mut rng, Some(&first)).unwrap();
    let cold = icem_plan(&model, &env, &[0.0], &cfg, PropagationMode::Mean, &mut RandomStream::new(8), None).unwrap();
    assert!(second.objective <= cold.objective * 1.5 + 1e-3);
    assert_eq!(second.sampling_mean.len(), first.sampling_mean.len());
}

#[test]
fn planning_is_reproducible() {
    let (env, model) = pendulum_gp(20, 4);
    let x0 = Pendulum::state_from_angle(2.0, 0.0);
    let cfg = small_cfg(6);
    for m in PropagationMode::ALL {
        let a = icem_plan(&model, env.as_ref(), &x0, &cfg, m, &mut RandomStream::new(3), None).unwrap();
        let b = icem_plan(&model, env.as_ref(), &x0, &cfg, m, &mut RandomStream::new(3), None).unwrap();
        assert_eq!(a, b);
    }
}
