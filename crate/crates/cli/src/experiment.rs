//! Sweeps agents and seeds for one environment and writes a result bundle:
//!
//! ```text
//! <dir>/manifest.json          written first
//! <dir>/config.toml            resolved configuration
//! <dir>/<agent>/seed_<s>.csv   per-step log, flushed at each refit
//! <dir>/<agent>/seed_<s>.json  per-seed outcome, written when the run ends
//! <dir>/summary.json           written last
//! ```

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::{Arc, Mutex};

use anyhow::{Context, Result};
use neorl::envs::{make_env, EnvOptions, Environment, ResetPolicy};
use neorl::gp::CalibratedModel;
use neorl::planner::PropagationMode;
use neorl::runner::{
    aggregate_seeds, estimate_optimal_average_cost, run_with, AStarReference, GpLearner, RefitRecord, RunConfig,
    RunLog, StepRecord,
};
use neorl::RandomStream;
use serde::{Deserialize, Serialize};

use crate::config::{AStarMode, ExperimentConfig, ResetMode};
use crate::csvio::{read_steps, StepWriter};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    pub version: String,
    pub env: String,
    pub agents: Vec<String>,
    pub seeds: Vec<u64>,
    pub steps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedOutcome {
    pub agent: String,
    pub seed: u64,
    pub steps_completed: usize,
    pub final_avg_cost: Option<f64>,
    pub final_regret: Option<f64>,
    pub reset_count: usize,
    pub failed: bool,
    pub failure: Option<String>,
    pub refits: Vec<RefitRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub t: usize,
    pub avg_cost_mean: f64,
    pub avg_cost_stderr: f64,
    pub regret_mean: f64,
    pub regret_stderr: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentSummary {
    pub agent: String,
    pub seeds: Vec<SeedOutcome>,
    pub completed: usize,
    /// Aggregates over completed seeds at `t = T, T/2, T/4, ...`.
    pub checkpoints: Vec<Checkpoint>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub version: String,
    pub env: String,
    pub steps: usize,
    pub a_star: AStarReference,
    pub agents: Vec<AgentSummary>,
}

impl Summary {
    pub fn any_failed(&self) -> bool {
        self.agents.iter().any(|a| a.seeds.iter().any(|s| s.failed))
    }
}

pub fn csv_path(dir: &Path, agent: &str, seed: u64) -> PathBuf {
    dir.join(agent).join(format!("seed_{seed}.csv"))
}

fn outcome_path(dir: &Path, agent: &str, seed: u64) -> PathBuf {
    dir.join(agent).join(format!("seed_{seed}.json"))
}

/// Step counts `T, T/2, T/4, ...` (down to 1) in increasing order.
pub fn dyadic_checkpoints(total: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut t = total;
    while t >= 1 {
        v.push(t);
        t /= 2;
    }
    v.reverse();
    v
}

pub fn build_env(cfg: &ExperimentConfig) -> Result<Arc<dyn Environment<f64>>> {
    let opts = EnvOptions {
        noise_std: cfg.env.noise_std,
        action_repeat: Some(cfg.env.action_repeat),
        pendulum_cost: cfg.env.pendulum_cost,
    };
    Ok(make_env(&cfg.env.name, &opts)?)
}

/// Resolves the optimal average cost used for regret.
pub fn resolve_a_star(cfg: &ExperimentConfig, env: &Arc<dyn Environment<f64>>) -> Result<AStarReference> {
    Ok(match cfg.run.a_star {
        AStarMode::Constant { value } => AStarReference::Constant(value),
        AStarMode::Oracle { burn_in, window } => {
            let seed = cfg.run.seeds[0];
            let mut rng = RandomStream::new(seed).split("oracle");
            let a = estimate_optimal_average_cost(env.clone(), &cfg.planner, burn_in, window, &mut rng)?;
            AStarReference::Estimated(a)
        }
    })
}

fn run_config(cfg: &ExperimentConfig, mode: PropagationMode, a_star: AStarReference, env: &Arc<dyn Environment<f64>>) -> RunConfig<f64> {
    let mut rc = RunConfig::new(cfg.run.steps, cfg.run.schedule, mode, cfg.gp.gp_config());
    rc.planner = cfg.planner.clone();
    rc.a_star = a_star;
    rc.seeds = cfg.run.seeds.clone();
    rc.reset = match cfg.env.reset {
        ResetMode::Never => ResetPolicy::Never,
        ResetMode::OnDrop => ResetPolicy::on_drop(env.clone()),
    };
    rc
}

/// Runs one (agent, seed) pair, streaming its CSV.
pub fn run_seed(
    cfg: &ExperimentConfig,
    env: &Arc<dyn Environment<f64>>,
    mode: PropagationMode,
    seed: u64,
    a_star: AStarReference,
    csv: &Path,
) -> Result<(RunLog<f64>, SeedOutcome)> {
    let rc = run_config(cfg, mode, a_star, env);
    let spec = env.spec();
    let gp = cfg.gp.gp_config();
    let model = CalibratedModel::prior(spec.state_dim, spec.control_dim, &gp, cfg.gp.beta.schedule())?;
    let mut learner = GpLearner { model, config: gp };
    let mut writer = StepWriter::create(csv)?;
    let mut rng = RandomStream::new(seed);
    let log = run_with(env.as_ref(), &mut learner, &rc, &mut rng, &mut writer)?;
    writer.flush()?;
    let outcome = SeedOutcome {
        agent: mode.agent_name().to_string(),
        seed,
        steps_completed: log.steps.len(),
        final_avg_cost: log.final_avg_cost(),
        final_regret: log.final_regret(),
        reset_count: log.reset_count,
        failed: !log.completed(),
        failure: log.failure.clone(),
        refits: log.refits.clone(),
    };
    Ok((log, outcome))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

/// Aggregates complete step logs of one agent.
pub fn agent_summary(agent: &str, mut outcomes: Vec<SeedOutcome>, complete: &[Vec<StepRecord>], total: usize) -> Result<AgentSummary> {
    outcomes.sort_by_key(|o| o.seed);
    let mut checkpoints = Vec::new();
    if !complete.is_empty() {
        let logs: Vec<RunLog<f64>> = complete
            .iter()
            .map(|steps| RunLog {
                steps: steps.clone(),
                refits: vec![],
                data: neorl::data::TransitionDataset::new(0, 0),
                reset_count: 0,
                a_star: AStarReference::default(),
                failure: None,
                total_steps: total,
            })
            .collect();
        let s = aggregate_seeds(&logs)?;
        for t in dyadic_checkpoints(total) {
            checkpoints.push(Checkpoint {
                t,
                avg_cost_mean: s.avg_cost_mean[t - 1],
                avg_cost_stderr: s.avg_cost_stderr[t - 1],
                regret_mean: s.regret_mean[t - 1],
                regret_stderr: s.regret_stderr[t - 1],
            });
        }
    }
    Ok(AgentSummary {
        agent: agent.to_string(),
        completed: complete.len(),
        seeds: outcomes,
        checkpoints,
    })
}

/// Executes every (agent, seed) run and writes the bundle. With `resume`,
/// runs that already have an outcome file are loaded instead of rerun.
pub fn run_experiment(cfg: &ExperimentConfig, resume: bool) -> Result<Summary> {
    let dir = &cfg.output.dir;
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let manifest = Manifest {
        version: VERSION.to_string(),
        env: cfg.env.name.clone(),
        agents: cfg.agents.iter().map(|a| a.agent_name().to_string()).collect(),
        seeds: cfg.run.seeds.clone(),
        steps: cfg.run.steps,
    };
    write_json(&dir.join("manifest.json"), &manifest)?;
    std::fs::write(dir.join("config.toml"), cfg.to_toml())?;
    for a in &cfg.agents {
        std::fs::create_dir_all(dir.join(a.agent_name()))?;
    }

    let env = build_env(cfg)?;
    let a_star_path = dir.join("a_star.json");
    let a_star = if resume && a_star_path.exists() {
        read_json(&a_star_path)?
    } else {
        let a = resolve_a_star(cfg, &env)?;
        write_json(&a_star_path, &a)?;
        a
    };

    let tasks: Vec<(PropagationMode, u64)> = cfg
        .agents
        .iter()
        .flat_map(|a| cfg.run.seeds.iter().map(move |s| (*a, *s)))
        .collect();
    let next = AtomicUsize::new(0);
    let results: Mutex<Vec<(PropagationMode, SeedOutcome, Vec<StepRecord>)>> = Mutex::new(Vec::new());
    let errors: Mutex<Vec<anyhow::Error>> = Mutex::new(Vec::new());
    let jobs = cfg.run.jobs.min(tasks.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..jobs {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                let Some(&(mode, seed)) = tasks.get(i) else { break };
                let name = mode.agent_name();
                let csv = csv_path(dir, name, seed);
                let out_path = outcome_path(dir, name, seed);
                let res = (|| -> Result<(SeedOutcome, Vec<StepRecord>)> {
                    if resume && out_path.exists() && csv.exists() {
                        let o: SeedOutcome = read_json(&out_path)?;
                        let steps = read_steps(&csv)?;
                        return Ok((o, steps));
                    }
                    let (log, o) = run_seed(cfg, &env, mode, seed, a_star, &csv)?;
                    write_json(&out_path, &o)?;
                    Ok((o, log.steps))
                })();
                match res {
                    Ok((o, steps)) => results.lock().unwrap().push((mode, o, steps)),
                    Err(e) => errors.lock().unwrap().push(e.context(format!("{name} seed {seed}"))),
                }
            });
        }
    });
    if let Some(e) = errors.into_inner().unwrap().into_iter().next() {
        return Err(e);
    }
    let results = results.into_inner().unwrap();
    let mut agents = Vec::new();
    for mode in &cfg.agents {
        let mut mine: Vec<_> = results.iter().filter(|r| r.0 == *mode).collect();
        mine.sort_by_key(|r| r.1.seed);
        let outcomes: Vec<SeedOutcome> = mine.iter().map(|r| r.1.clone()).collect();
        let complete: Vec<Vec<StepRecord>> = mine
            .iter()
            .filter(|r| !r.1.failed)
            .map(|r| r.2.clone())
            .collect();
        agents.push(agent_summary(mode.agent_name(), outcomes, &complete, cfg.run.steps)?);
    }
    let summary = Summary {
        version: VERSION.to_string(),
        env: cfg.env.name.clone(),
        steps: cfg.run.steps,
        a_star,
        agents,
    };
    write_json(&dir.join("summary.json"), &summary)?;
    Ok(summary)
}
