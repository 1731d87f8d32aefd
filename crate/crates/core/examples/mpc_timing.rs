//! Wall-clock time of one optimistic MPC step on the pendulum against GP size.

use std::time::Instant;

use neorl::data::{ControlVector, StateVector, Transition, TransitionDataset};
use neorl::envs::{make_env, EnvOptions};
use neorl::gp::{fit_posterior, BetaSchedule, CalibratedModel, GpConfig, KernelSpec};
use neorl::planner::{mpc_act, PlannerConfig, PropagationMode};
use neorl::RandomStream;

fn main() {
    let env = make_env::<f64>("pendulum", &EnvOptions::default()).unwrap();
    let mut rng = RandomStream::new(0);
    for n in [100usize, 300, 1000] {
        let mut ds = TransitionDataset::new(3, 1);
        for _ in 0..n {
            let th: f64 = rng.uniform_in(-3.0, 3.0);
            let x = StateVector(vec![th.cos(), th.sin(), rng.uniform_in(-4.0, 4.0)]);
            let u = vec![rng.uniform_in(-2.0, 2.0)];
            let mut nx = vec![0.0; 3];
            env.mean_step(&x, &u, &mut nx);
            ds.push(Transition::new(x, ControlVector(u), StateVector(nx))).unwrap();
        }
        let cfg = GpConfig::new(KernelSpec::rbf(1.0, 1.0), 1e-4);
        let t0 = Instant::now();
        let model = CalibratedModel::new(fit_posterior(&ds, &cfg).unwrap(), BetaSchedule::Fixed(2.0), 0.0).unwrap();
        let fit = t0.elapsed().as_secs_f64();
        let pc = PlannerConfig::<f64>::default();
        let x = env.spec().initial_state.clone();
        let t0 = Instant::now();
        let _ = mpc_act(&model, env.as_ref(), &x, &pc, PropagationMode::Optimistic, &mut rng, None).unwrap();
        println!("n={n} fit={fit:.3}s step={:.3}s", t0.elapsed().as_secs_f64());
    }
}
