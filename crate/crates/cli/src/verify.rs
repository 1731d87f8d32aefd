//! Theory checks on the pendulum with the oracle MPC policy.

use std::path::Path;
use std::sync::Arc;

use anyhow::Result;
use neorl::envs::{make_env, EnvOptions, Environment};
use neorl::gp::KernelFamily;
use neorl::planner::{mpc_act, OracleModel, PlannerConfig, PropagationMode};
use neorl::theory::{
    check_drift, check_energy_transfer, check_sublinearity, gamma_t_asymptote, DriftReport,
    EnergyTransferReport, EnvStep, LyapunovSpec, SublinearityReport,
};
use neorl::RandomStream;
use serde::{Deserialize, Serialize};

use crate::config::env_defaults;
use crate::plotdata::load_bundle;

#[derive(Debug, Clone)]
pub struct VerifyOptions {
    pub states: usize,
    pub mc_per_state: usize,
    pub gamma: f64,
    pub noise_std: f64,
    pub planner: PlannerConfig<f64>,
    pub seed: u64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        Self {
            states: 64,
            mc_per_state: 200,
            gamma: 0.9,
            noise_std: neorl::envs::DEFAULT_NOISE_STD,
            planner: env_defaults("pendulum").0,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GammaRow {
    pub family: String,
    pub d: usize,
    pub t: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AgentSublinearity {
    pub agent: String,
    pub report: SublinearityReport,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct VerifyReport {
    pub gamma: f64,
    pub drift: DriftReport,
    /// Oracle MPC against a uniformly random policy.
    pub energy_transfer: EnergyTransferReport,
    pub gamma_t: Vec<GammaRow>,
    pub sublinearity: Vec<AgentSublinearity>,
}

/// `1 - cos(theta) + 0.1 thetadot^2`.
pub fn pendulum_energy(x: &[f64]) -> f64 {
    1.0 - x[0] + 0.1 * x[2] * x[2]
}

fn pendulum_spec(gamma: f64, max_speed: f64) -> LyapunovSpec {
    let mut spec = LyapunovSpec::with_energy(Arc::new(pendulum_energy), gamma, 0.0);
    let lip = 1.0 + 0.2 * max_speed;
    spec.kappa = Arc::new(move |r| lip * r);
    spec
}

fn sample_states(n: usize, max_speed: f64, rng: &mut RandomStream) -> Vec<Vec<f64>> {
    let pi = std::f64::consts::PI;
    (0..n)
        .map(|_| {
            let th = rng.uniform_in(-pi, pi);
            let om = rng.uniform_in(-max_speed, max_speed);
            vec![th.cos(), th.sin(), om]
        })
        .collect()
}

pub fn gamma_table() -> Result<Vec<GammaRow>> {
    let mut rows = Vec::new();
    let families = [
        ("linear", KernelFamily::Linear),
        ("rbf", KernelFamily::Rbf),
        ("matern32", KernelFamily::Matern32),
        ("matern52", KernelFamily::Matern52),
    ];
    for (name, fam) in families {
        for d in [1, 4] {
            for t in [100.0, 1000.0, 5000.0, 10000.0] {
                rows.push(GammaRow {
                    family: name.into(),
                    d,
                    t,
                    value: gamma_t_asymptote(fam, t, d)?,
                });
            }
        }
    }
    Ok(rows)
}

/// Sublinearity of every agent's seed-mean regret curve in a bundle.
pub fn bundle_sublinearity(dir: &Path) -> Result<Vec<AgentSublinearity>> {
    let (manifest, agents) = load_bundle(dir)?;
    let mut out = Vec::new();
    for (agent, runs) in agents {
        if runs.is_empty() {
            continue;
        }
        let k = runs.len() as f64;
        let mean: Vec<f64> = (0..manifest.steps)
            .map(|t| runs.iter().map(|(_, s)| s[t].regret).sum::<f64>() / k)
            .collect();
        out.push(AgentSublinearity {
            agent,
            report: check_sublinearity(&mean)?,
        });
    }
    Ok(out)
}

pub fn verify(opts: &VerifyOptions, bundle: Option<&Path>) -> Result<VerifyReport> {
    opts.planner.validate()?;
    let env_opts = EnvOptions {
        noise_std: opts.noise_std,
        ..EnvOptions::default()
    };
    let env: Arc<dyn Environment<f64>> = make_env("pendulum", &env_opts)?;
    let max_speed = neorl::envs::PendulumParams::default().max_speed;
    let u_max = env.spec().u_max[0];
    let spec = pendulum_spec(opts.gamma, max_speed);
    let root = RandomStream::new(opts.seed);
    let states = sample_states(opts.states, max_speed, &mut root.split("states"));
    let model = OracleModel::new(env.clone());
    let step = EnvStep(env.as_ref());

    let mut plan_rng = root.split("planner");
    let mut failure = None;
    let mut oracle = |x: &[f64]| -> Vec<f64> {
        match mpc_act(&model, env.as_ref(), x, &opts.planner, PropagationMode::Mean, &mut plan_rng, None) {
            Ok((u, _)) => u.0,
            Err(e) => {
                failure.get_or_insert(e);
                vec![0.0]
            }
        }
    };
    let drift = check_drift(&step, &mut oracle, &spec, &states, opts.mc_per_state, &mut root.split("drift"))?;

    let mut random_rng = root.split("random_policy");
    let mut random = |_: &[f64]| vec![random_rng.uniform_in(-u_max, u_max)];
    let energy_transfer = check_energy_transfer(
        &step,
        &mut oracle,
        &mut [&mut random],
        &spec,
        u_max,
        &states,
        opts.mc_per_state,
        &mut root.split("transfer"),
    )?;
    drop(oracle);
    if let Some(e) = failure {
        return Err(e.into());
    }
    let sublinearity = match bundle {
        Some(dir) => bundle_sublinearity(dir)?,
        None => vec![],
    };
    Ok(VerifyReport {
        gamma: opts.gamma,
        drift,
        energy_transfer,
        gamma_t: gamma_table()?,
        sublinearity,
    })
}
