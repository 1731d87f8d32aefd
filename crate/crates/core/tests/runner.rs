use std::sync::Arc;

use neorl::data::StateVector;
use neorl::envs::{make_env, EnvOptions, EnvSpec, Environment};
use neorl::gp::{BetaSchedule, CalibratedModel, GpConfig, KernelSpec};
use neorl::planner::{OracleModel, PlannerConfig, PropagationMode};
use neorl::runner::{
    aggregate_seeds, estimate_optimal_average_cost, run_practical, run_with, AStarReference, EpisodeSchedule,
    NoObserver, RunConfig, RunLog, StepRecord,
};
use neorl::RandomStream;
use proptest::prelude::*;

/// `x+ = x + u + w`, `w ~ N(0, 0.1^2)`, cost `x^2 + u^2`.
struct ScalarLqr(EnvSpec<f64>);

impl ScalarLqr {
    fn new() -> Self {
        Self(EnvSpec {
            name: "lqr".into(),
            state_dim: 1,
            control_dim: 1,
            u_min: vec![-1.0],
            u_max: vec![1.0],
            dt: 1.0,
            action_repeat: 1,
            noise_std: vec![0.1],
            initial_state: StateVector(vec![0.0]),
        })
    }
}

impl Environment<f64> for ScalarLqr {
    fn spec(&self) -> &EnvSpec<f64> {
        &self.0
    }
    fn substep(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = x[0] + u[0].clamp(-1.0, 1.0);
    }
    fn cost(&self, x: &[f64], u: &[f64]) -> f64 {
        x[0] * x[0] + u[0] * u[0]
    }
}

#[test]
fn oracle_matches_scalar_riccati_solution() {
    // P = q + a^2 P - a^2 b^2 P^2 / (r + b^2 P) with a = b = q = r = 1
    // reduces to P^2 - P - 1 = 0; average cost is sigma^2 P.
    let p = (1.0 + 5f64.sqrt()) / 2.0;
    let expected = 0.01 * p;
    let env: Arc<dyn Environment<f64>> = Arc::new(ScalarLqr::new());
    let planner = PlannerConfig {
        num_samples: 300,
        num_elites: 20,
        optimizer_steps: 15,
        horizon: 8,
        particles: 1,
        colored_noise_exponent: 0.0,
        planning_noise: false,
        ..PlannerConfig::default()
    };
    let a = estimate_optimal_average_cost(env, &planner, 50, 2000, &mut RandomStream::new(3)).unwrap();
    assert!((a - expected).abs() < 1e-2, "{a} vs {expected}");
}

#[test]
fn pendulum_oracle_reaches_near_zero_cost() {
    let env: Arc<dyn Environment<f64>> = make_env("pendulum", &EnvOptions::default()).unwrap();
    let a = estimate_optimal_average_cost(env, &PlannerConfig::default(), 200, 2000, &mut RandomStream::new(0)).unwrap();
    assert!(a.abs() < 0.05, "{a}");
}

fn welford(values: &[f64]) -> (f64, f64) {
    let (mut n, mut mean, mut m2) = (0.0, 0.0, 0.0);
    for v in values {
        n += 1.0;
        let d = v - mean;
        mean += d / n;
        m2 += d * (v - mean);
    }
    (mean, (m2 / (n - 1.0) / n).sqrt())
}

fn synthetic_log(rng: &mut RandomStream, len: usize) -> RunLog<f64> {
    let mut steps = Vec::new();
    let (mut cum, mut reg) = (0.0, 0.0);
    for t in 0..len {
        let c = rng.uniform() * 3.0;
        cum += c;
        reg += c - 0.5;
        steps.push(StepRecord {
            t,
            cost: c,
            cum_cost: cum,
            regret: reg,
            avg_cost: cum / (t + 1) as f64,
            episode: 0,
            did_reset: false,
        });
    }
    RunLog {
        steps,
        refits: vec![],
        data: neorl::data::TransitionDataset::new(1, 1),
        reset_count: 0,
        a_star: AStarReference::Constant(0.5),
        failure: None,
        total_steps: len,
    }
}

#[test]
fn aggregate_matches_streaming_statistics() {
    let mut rng = RandomStream::new(11);
    let logs: Vec<RunLog<f64>> = (0..10).map(|_| synthetic_log(&mut rng, 50)).collect();
    let s = aggregate_seeds(&logs).unwrap();
    for t in 0..50 {
        let r: Vec<f64> = logs.iter().map(|l| l.steps[t].regret).collect();
        let a: Vec<f64> = logs.iter().map(|l| l.steps[t].avg_cost).collect();
        let (rm, rs) = welford(&r);
        let (am, as_) = welford(&a);
        assert!((s.regret_mean[t] - rm).abs() < 1e-10);
        assert!((s.regret_stderr[t] - rs).abs() < 1e-10);
        assert!((s.avg_cost_mean[t] - am).abs() < 1e-10);
        assert!((s.avg_cost_stderr[t] - as_).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn regret_increments_and_running_average(seed in 0u64..1000, a_star in -1.0f64..1.0, h in 1usize..6) {
        let env = make_env::<f64>("mountaincar", &EnvOptions::default()).unwrap();
        let gp = GpConfig::new(KernelSpec::rbf(1.0, 1.0), 1e-4);
        let mut cfg = RunConfig::new(15, EpisodeSchedule::Fixed { h }, PropagationMode::Mean, gp.clone());
        cfg.planner = PlannerConfig { num_samples: 6, num_elites: 2, optimizer_steps: 1, horizon: 4, particles: 1, ..PlannerConfig::default() };
        cfg.a_star = AStarReference::Constant(a_star);
        let model = CalibratedModel::prior(2, 1, &gp, BetaSchedule::Fixed(2.0)).unwrap();
        let log = run_practical(env.as_ref(), model, &cfg, &mut RandomStream::new(seed)).unwrap();
        let mut prev = 0.0;
        for r in &log.steps {
            prop_assert!(((r.regret - prev) - (r.cost - a_star)).abs() <= 1e-12 * (1.0 + r.regret.abs()));
            prop_assert!((r.avg_cost - r.cum_cost / (r.t + 1) as f64).abs() <= 1e-15 * (1.0 + r.cum_cost.abs()));
            prev = r.regret;
        }
        let mut last = 0;
        for r in &log.refits {
            prop_assert!(r.dataset_size >= last);
            prop_assert_eq!(r.dataset_size, r.t);
            last = r.dataset_size;
        }
        for w in log.data.as_slice().windows(2) {
            prop_assert_eq!(&w[0].next_state, &w[1].state);
        }
    }
}

#[test]
fn oracle_learner_runs_without_refitting() {
    let env = make_env::<f64>("pendulum", &EnvOptions::default()).unwrap();
    let mut oracle = OracleModel::new(env.clone());
    let mut cfg = RunConfig::new(
        5,
        EpisodeSchedule::Fixed { h: 5 },
        PropagationMode::Mean,
        GpConfig::new(KernelSpec::rbf(1.0, 1.0), 1e-4),
    );
    cfg.planner.num_samples = 50;
    cfg.planner.num_elites = 5;
    let log = run_with(env.as_ref(), &mut oracle, &cfg, &mut RandomStream::new(0), &mut NoObserver).unwrap();
    assert!(log.completed());
}
