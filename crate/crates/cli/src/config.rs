//! Experiment configuration: a TOML file with `env`, `agent`, `run`, `gp`
//! and `output` sections. Unknown keys are rejected.

use std::path::{Path, PathBuf};

use neorl::envs::{PendulumCost, DEFAULT_NOISE_STD, ENV_NAMES};
use neorl::gp::{BetaSchedule, GpConfig, KernelFamily, KernelSpec};
use neorl::planner::{PlannerConfig, PropagationMode};
use neorl::runner::EpisodeSchedule;
use serde::Serialize;
use toml::{Table, Value};

#[derive(Debug, thiserror::Error, PartialEq)]
#[error("config key `{path}`: {message}")]
pub struct ConfigError {
    pub path: String,
    pub message: String,
}

fn err<T>(path: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError {
        path: path.to_string(),
        message: message.into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ResetMode {
    Never,
    OnDrop,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnvBlock {
    pub name: String,
    pub noise_std: f64,
    pub action_repeat: usize,
    pub reset: ResetMode,
    pub pendulum_cost: PendulumCost,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum AStarMode {
    Constant { value: f64 },
    Oracle { burn_in: usize, window: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunBlock {
    pub steps: usize,
    pub schedule: EpisodeSchedule,
    pub seeds: Vec<u64>,
    pub a_star: AStarMode,
    /// Worker threads for the seed sweep.
    pub jobs: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BetaBlock {
    Fixed { beta: f64 },
    InfoGain { bound: f64, delta: f64 },
}

impl BetaBlock {
    pub fn schedule(self) -> BetaSchedule<f64> {
        match self {
            BetaBlock::Fixed { beta } => BetaSchedule::Fixed(beta),
            BetaBlock::InfoGain { bound, delta } => BetaSchedule::InfoGainBased { bound, delta },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GpBlock {
    pub kernel: KernelFamily,
    pub lengthscale: Vec<f64>,
    pub signal_variance: f64,
    pub noise_variance: f64,
    pub beta: BetaBlock,
    pub delta_targets: bool,
    pub standardize: bool,
    pub max_points: Option<usize>,
}

impl GpBlock {
    pub fn gp_config(&self) -> GpConfig<f64> {
        let kernel = KernelSpec {
            family: self.kernel,
            lengthscale: self.lengthscale.clone(),
            signal_variance: self.signal_variance,
        };
        let mut cfg = GpConfig::new(kernel, self.noise_variance);
        cfg.target_mode = if self.delta_targets {
            neorl::data::TargetMode::Delta
        } else {
            neorl::data::TargetMode::Absolute
        };
        cfg.standardize = self.standardize;
        cfg.max_points = self.max_points;
        cfg
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputBlock {
    pub dir: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub env: EnvBlock,
    pub agents: Vec<PropagationMode>,
    pub planner: PlannerConfig<f64>,
    pub run: RunBlock,
    pub gp: GpBlock,
    pub output: OutputBlock,
}

/// Published hyperparameters for a named environment: planner settings, refit period and
/// action repeat.
pub fn env_defaults(env: &str) -> (PlannerConfig<f64>, usize, usize) {
    let base = PlannerConfig::<f64>::default();
    match env {
        "mountaincar" => (
            PlannerConfig {
                num_samples: 1000,
                num_elites: 100,
                optimizer_steps: 5,
                horizon: 50,
                particles: 5,
                ..base
            },
            10,
            2,
        ),
        "cartpole" | "cartpole_balance" => (
            PlannerConfig {
                num_samples: 1000,
                num_elites: 100,
                optimizer_steps: 10,
                horizon: 50,
                particles: 5,
                ..base
            },
            10,
            2,
        ),
        _ => (base, 10, 1),
    }
}

/// Input lengthscale (standardized units) used when the config gives none.
pub fn default_lengthscale(env: &str) -> f64 {
    match env {
        "pendulum" => 2.0,
        _ => 1.0,
    }
}

/// Command-line overrides applied on top of the file.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub env: Option<String>,
    pub agents: Option<Vec<String>>,
    pub steps: Option<usize>,
    pub seeds: Option<Vec<u64>>,
    pub out: Option<PathBuf>,
    pub beta: Option<f64>,
    pub horizon: Option<usize>,
}

/// Reads typed values out of a table, remembering the key path.
struct Section {
    path: &'static str,
    table: Table,
}

impl Section {
    fn take(&mut self, key: &str) -> Option<(String, Value)> {
        self.table.remove(key).map(|v| (format!("{}.{}", self.path, key), v))
    }

    fn float(&mut self, key: &str) -> Result<Option<f64>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::Float(f))) => Ok(Some(f)),
            Some((_, Value::Integer(i))) => Ok(Some(i as f64)),
            Some((p, v)) => err(&p, format!("expected a number, found {}", v.type_str())),
        }
    }

    fn uint(&mut self, key: &str) -> Result<Option<usize>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::Integer(i))) if i >= 0 => Ok(Some(i as usize)),
            Some((p, Value::Integer(i))) => err(&p, format!("must be nonnegative, found {i}")),
            Some((p, v)) => err(&p, format!("expected an integer, found {}", v.type_str())),
        }
    }

    fn boolean(&mut self, key: &str) -> Result<Option<bool>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((_, Value::Boolean(b))) => Ok(Some(b)),
            Some((p, v)) => err(&p, format!("expected a boolean, found {}", v.type_str())),
        }
    }

    fn string(&mut self, key: &str) -> Result<Option<(String, String)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((p, Value::String(s))) => Ok(Some((p, s))),
            Some((p, v)) => err(&p, format!("expected a string, found {}", v.type_str())),
        }
    }

    fn strings(&mut self, key: &str) -> Result<Option<(String, Vec<String>)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((p, Value::String(s))) => Ok(Some((p, vec![s]))),
            Some((p, Value::Array(a))) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.into_iter().enumerate() {
                    match v {
                        Value::String(s) => out.push(s),
                        v => return err(&format!("{p}[{i}]"), format!("expected a string, found {}", v.type_str())),
                    }
                }
                Ok(Some((p, out)))
            }
            Some((p, v)) => err(&p, format!("expected a string or list of strings, found {}", v.type_str())),
        }
    }

    fn floats(&mut self, key: &str) -> Result<Option<(String, Vec<f64>)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((p, Value::Float(f))) => Ok(Some((p, vec![f]))),
            Some((p, Value::Integer(i))) => Ok(Some((p, vec![i as f64]))),
            Some((p, Value::Array(a))) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.into_iter().enumerate() {
                    match v {
                        Value::Float(f) => out.push(f),
                        Value::Integer(n) => out.push(n as f64),
                        v => return err(&format!("{p}[{i}]"), format!("expected a number, found {}", v.type_str())),
                    }
                }
                Ok(Some((p, out)))
            }
            Some((p, v)) => err(&p, format!("expected a number or list of numbers, found {}", v.type_str())),
        }
    }

    fn seeds(&mut self, key: &str) -> Result<Option<(String, Vec<u64>)>, ConfigError> {
        match self.take(key) {
            None => Ok(None),
            Some((p, Value::Integer(n))) if n >= 1 => Ok(Some((p, (0..n as u64).collect()))),
            Some((p, Value::Array(a))) => {
                let mut out = Vec::with_capacity(a.len());
                for (i, v) in a.into_iter().enumerate() {
                    match v {
                        Value::Integer(n) if n >= 0 => out.push(n as u64),
                        v => return err(&format!("{p}[{i}]"), format!("expected a nonnegative integer, found {v}")),
                    }
                }
                Ok(Some((p, out)))
            }
            Some((p, v)) => err(&p, format!("expected a seed count or list of seeds, found {v}")),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.table.keys().next() {
            Some(k) => err(&format!("{}.{}", self.path, k), "unknown key"),
            None => Ok(()),
        }
    }
}

fn section(root: &mut Table, name: &'static str) -> Result<Section, ConfigError> {
    match root.remove(name) {
        None => Ok(Section {
            path: name,
            table: Table::new(),
        }),
        Some(Value::Table(t)) => Ok(Section { path: name, table: t }),
        Some(v) => err(name, format!("expected a table, found {}", v.type_str())),
    }
}

fn positive(path: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        err(path, format!("must be positive and finite, found {v}"))
    }
}

fn at_least_one(path: &str, v: usize) -> Result<usize, ConfigError> {
    if v >= 1 {
        Ok(v)
    } else {
        err(path, "must be at least 1")
    }
}

fn parse_agent(path: &str, name: &str) -> Result<PropagationMode, ConfigError> {
    PropagationMode::from_agent_name(name).map_or_else(
        || err(path, format!("unknown agent `{name}` (expected neorl, nemean, nepets or nets)")),
        Ok,
    )
}

fn parse_kernel(path: &str, name: &str) -> Result<KernelFamily, ConfigError> {
    Ok(match name {
        "rbf" => KernelFamily::Rbf,
        "linear" => KernelFamily::Linear,
        "matern12" => KernelFamily::Matern12,
        "matern32" => KernelFamily::Matern32,
        "matern52" => KernelFamily::Matern52,
        other => return err(path, format!("unknown kernel `{other}`")),
    })
}

/// Parses configuration text with no overrides.
pub fn parse_config_str(text: &str) -> Result<ExperimentConfig, ConfigError> {
    parse_with_overrides(text, &Overrides::default())
}

/// Reads and parses a configuration file.
pub fn parse_config_file(path: &Path, overrides: &Overrides) -> anyhow::Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| anyhow::anyhow!("reading {}: {e}", path.display()))?;
    Ok(parse_with_overrides(&text, overrides)?)
}

pub fn parse_with_overrides(text: &str, ov: &Overrides) -> Result<ExperimentConfig, ConfigError> {
    let mut root: Table = text.parse().map_err(|e: toml::de::Error| ConfigError {
        path: "<file>".into(),
        message: e.message().to_string(),
    })?;
    let mut env = section(&mut root, "env")?;
    let mut agent = section(&mut root, "agent")?;
    let mut run = section(&mut root, "run")?;
    let mut gp = section(&mut root, "gp")?;
    let mut output = section(&mut root, "output")?;
    if let Some(k) = root.keys().next() {
        return err(k, "unknown key");
    }

    // env
    let file_env = env.string("name")?;
    let name = match (&ov.env, file_env) {
        (Some(n), _) => n.clone(),
        (None, Some((_, n))) => n,
        (None, None) => "pendulum".to_string(),
    };
    if !ENV_NAMES.contains(&name.as_str()) {
        return err("env.name", format!("unknown environment `{name}` (expected one of {ENV_NAMES:?})"));
    }
    let (mut planner, default_h, default_repeat) = env_defaults(&name);
    let noise_std = env.float("noise_std")?.unwrap_or(DEFAULT_NOISE_STD);
    if !(noise_std >= 0.0) {
        return err("env.noise_std", "must be nonnegative");
    }
    let action_repeat = at_least_one("env.action_repeat", env.uint("action_repeat")?.unwrap_or(default_repeat))?;
    let reset = match env.string("reset")? {
        None if name == "cartpole_balance" => ResetMode::OnDrop,
        None => ResetMode::Never,
        Some((_, s)) if s == "never" => ResetMode::Never,
        Some((_, s)) if s == "on_drop" => ResetMode::OnDrop,
        Some((p, s)) => return err(&p, format!("expected `never` or `on_drop`, found `{s}`")),
    };
    let pendulum_cost = match env.string("pendulum_cost")? {
        None => PendulumCost::Squared,
        Some((_, s)) if s == "squared" => PendulumCost::Squared,
        Some((_, s)) if s == "literal" => PendulumCost::Literal,
        Some((p, s)) => return err(&p, format!("expected `squared` or `literal`, found `{s}`")),
    };
    env.finish()?;

    // agent
    let agent_names = match (&ov.agents, agent.strings("name")?) {
        (Some(a), _) => ("--agent".to_string(), a.clone()),
        (None, Some(a)) => a,
        (None, None) => ("agent.name".to_string(), vec!["neorl".to_string()]),
    };
    let mut agents = Vec::new();
    for (i, a) in agent_names.1.iter().enumerate() {
        let m = parse_agent(&format!("{}[{i}]", agent_names.0), a)?;
        if agents.contains(&m) {
            return err(&agent_names.0, format!("agent `{a}` listed twice"));
        }
        agents.push(m);
    }
    if agents.is_empty() {
        return err(&agent_names.0, "at least one agent is required");
    }
    if let Some(v) = agent.uint("num_samples")? {
        planner.num_samples = at_least_one("agent.num_samples", v)?;
    }
    if let Some(v) = agent.uint("num_elites")? {
        planner.num_elites = at_least_one("agent.num_elites", v)?;
    }
    if let Some(v) = agent.uint("optimizer_steps")? {
        planner.optimizer_steps = at_least_one("agent.optimizer_steps", v)?;
    }
    if let Some(v) = agent.uint("h_mpc")? {
        planner.horizon = at_least_one("agent.h_mpc", v)?;
    }
    if let Some(v) = ov.horizon {
        planner.horizon = at_least_one("--horizon", v)?;
    }
    if let Some(v) = agent.uint("particles")? {
        planner.particles = at_least_one("agent.particles", v)?;
    }
    if let Some(v) = agent.float("colored_noise_exponent")? {
        if !(v >= 0.0) {
            return err("agent.colored_noise_exponent", "must be nonnegative");
        }
        planner.colored_noise_exponent = v;
    }
    if let Some(v) = agent.float("elite_keep_fraction")? {
        if !(0.0..=1.0).contains(&v) {
            return err("agent.elite_keep_fraction", "must lie in [0, 1]");
        }
        planner.elite_keep_fraction = v;
    }
    if let Some(v) = agent.float("init_std")? {
        planner.init_std = positive("agent.init_std", v)?;
    }
    if let Some(v) = agent.float("population_decay")? {
        if !(v >= 1.0) {
            return err("agent.population_decay", "must be at least 1");
        }
        planner.population_decay = v;
    }
    if let Some(v) = agent.boolean("planning_noise")? {
        planner.planning_noise = v;
    }
    if planner.num_elites > planner.num_samples {
        return err(
            "agent.num_elites",
            format!(
                "num_elites ({}) must not exceed num_samples ({})",
                planner.num_elites, planner.num_samples
            ),
        );
    }
    agent.finish()?;

    // run
    let steps = at_least_one(
        "run.steps",
        ov.steps.or(run.uint("steps")?).unwrap_or(1000),
    )?;
    let h = at_least_one("run.h", run.uint("h")?.unwrap_or(default_h))?;
    let h0 = run.uint("h0")?;
    let schedule = match run.string("schedule")? {
        None => EpisodeSchedule::Fixed { h },
        Some((_, s)) if s == "fixed" => EpisodeSchedule::Fixed { h },
        Some((_, s)) if s == "doubling" => EpisodeSchedule::Doubling {
            h0: at_least_one("run.h0", h0.unwrap_or(h))?,
        },
        Some((p, s)) => return err(&p, format!("expected `fixed` or `doubling`, found `{s}`")),
    };
    if h0.is_some() && matches!(schedule, EpisodeSchedule::Fixed { .. }) {
        return err("run.h0", "only used with run.schedule = \"doubling\"");
    }
    let seeds = match (&ov.seeds, run.seeds("seeds")?) {
        (Some(s), _) => ("--seeds".to_string(), s.clone()),
        (None, Some(s)) => s,
        (None, None) => ("run.seeds".to_string(), vec![0]),
    };
    if seeds.1.is_empty() {
        return err(&seeds.0, "at least one seed is required");
    }
    let mut sorted = seeds.1.clone();
    sorted.sort_unstable();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return err(&seeds.0, "seeds must be distinct");
    }
    let burn_in = run.uint("oracle_burn_in")?;
    let window = run.uint("oracle_window")?;
    let a_star = match run.take("a_star") {
        None => AStarMode::Constant { value: 0.0 },
        Some((_, Value::Float(v))) if v.is_finite() => AStarMode::Constant { value: v },
        Some((_, Value::Integer(v))) => AStarMode::Constant { value: v as f64 },
        Some((_, Value::String(s))) if s == "oracle" => AStarMode::Oracle {
            burn_in: burn_in.unwrap_or(200),
            window: at_least_one("run.oracle_window", window.unwrap_or(2000))?,
        },
        Some((p, v)) => return err(&p, format!("expected a number or \"oracle\", found {v}")),
    };
    if (burn_in.is_some() || window.is_some()) && !matches!(a_star, AStarMode::Oracle { .. }) {
        return err("run.oracle_window", "only used with run.a_star = \"oracle\"");
    }
    let jobs = at_least_one(
        "run.jobs",
        run.uint("jobs")?
            .unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get())),
    )?;
    run.finish()?;

    // gp
    let kernel = match gp.string("kernel")? {
        None => KernelFamily::Rbf,
        Some((p, s)) => parse_kernel(&p, &s)?,
    };
    let lengthscale = match gp.floats("lengthscale")? {
        None => vec![default_lengthscale(&name)],
        Some((p, v)) => {
            if v.is_empty() || v.iter().any(|l| !(*l > 0.0)) {
                return err(&p, "lengthscales must be positive");
            }
            v
        }
    };
    let signal_variance = positive("gp.signal_variance", gp.float("signal_variance")?.unwrap_or(1.0))?;
    let noise_variance = positive("gp.noise_variance", gp.float("noise_variance")?.unwrap_or(1e-4))?;
    let beta_value = gp.float("beta")?;
    let bound = gp.float("beta_b")?;
    let delta = gp.float("delta")?;
    let beta = match gp.string("beta_schedule")? {
        None => BetaBlock::Fixed {
            beta: beta_value.unwrap_or(2.0),
        },
        Some((_, s)) if s == "fixed" => BetaBlock::Fixed {
            beta: beta_value.unwrap_or(2.0),
        },
        Some((_, s)) if s == "info_gain" => {
            if beta_value.is_some() {
                return err("gp.beta", "not used with gp.beta_schedule = \"info_gain\"");
            }
            let delta = delta.unwrap_or(0.1);
            if !(delta > 0.0 && delta < 1.0) {
                return err("gp.delta", "must lie in (0, 1)");
            }
            BetaBlock::InfoGain {
                bound: positive("gp.beta_b", bound.unwrap_or(1.0))?,
                delta,
            }
        }
        Some((p, s)) => return err(&p, format!("expected `fixed` or `info_gain`, found `{s}`")),
    };
    let beta = match (beta, ov.beta) {
        (BetaBlock::Fixed { .. }, Some(b)) => BetaBlock::Fixed { beta: b },
        (BetaBlock::InfoGain { .. }, Some(_)) => return err("--beta", "conflicts with gp.beta_schedule = \"info_gain\""),
        (b, None) => b,
    };
    if let BetaBlock::Fixed { beta } = beta {
        if !(beta >= 0.0 && beta.is_finite()) {
            return err("gp.beta", "must be finite and nonnegative");
        }
        if bound.is_some() || delta.is_some() {
            return err("gp.beta_b", "only used with gp.beta_schedule = \"info_gain\"");
        }
    }
    let delta_targets = match gp.string("target")? {
        None => true,
        Some((_, s)) if s == "delta" => true,
        Some((_, s)) if s == "absolute" => false,
        Some((p, s)) => return err(&p, format!("expected `delta` or `absolute`, found `{s}`")),
    };
    let standardize = gp.boolean("standardize")?.unwrap_or(true);
    let max_points = match gp.uint("max_points")? {
        None => None,
        Some(v) => Some(at_least_one("gp.max_points", v)?),
    };
    gp.finish()?;

    let dir = match (&ov.out, output.string("dir")?) {
        (Some(d), _) => d.clone(),
        (None, Some((_, d))) => PathBuf::from(d),
        (None, None) => PathBuf::from("results"),
    };
    output.finish()?;

    let cfg = ExperimentConfig {
        env: EnvBlock {
            name,
            noise_std,
            action_repeat,
            reset,
            pendulum_cost,
        },
        agents,
        planner,
        run: RunBlock {
            steps,
            schedule,
            seeds: seeds.1,
            a_star,
            jobs,
        },
        gp: GpBlock {
            kernel,
            lengthscale,
            signal_variance,
            noise_variance,
            beta,
            delta_targets,
            standardize,
            max_points,
        },
        output: OutputBlock { dir },
    };
    cfg.planner.validate().map_err(|e| ConfigError {
        path: "agent".into(),
        message: e.to_string(),
    })?;
    Ok(cfg)
}

impl ExperimentConfig {
    /// Canonical TOML form of the resolved configuration.
    pub fn to_toml(&self) -> String {
        let agents: Vec<&str> = self.agents.iter().map(|a| a.agent_name()).collect();
        let p = &self.planner;
        let (schedule, h_line) = match self.run.schedule {
            EpisodeSchedule::Fixed { h } => ("fixed", format!("h = {h}")),
            EpisodeSchedule::Doubling { h0 } => ("doubling", format!("h0 = {h0}")),
        };
        let a_star = match self.run.a_star {
            AStarMode::Constant { value } => format!("a_star = {}", fmt_float(value)),
            AStarMode::Oracle { burn_in, window } => {
                format!("a_star = \"oracle\"\noracle_burn_in = {burn_in}\noracle_window = {window}")
            }
        };
        let beta = match self.gp.beta {
            BetaBlock::Fixed { beta } => format!("beta_schedule = \"fixed\"\nbeta = {}", fmt_float(beta)),
            BetaBlock::InfoGain { bound, delta } => format!(
                "beta_schedule = \"info_gain\"\nbeta_b = {}\ndelta = {}",
                fmt_float(bound),
                fmt_float(delta)
            ),
        };
        let kernel = match self.gp.kernel {
            KernelFamily::Rbf => "rbf",
            KernelFamily::Linear => "linear",
            KernelFamily::Matern12 => "matern12",
            KernelFamily::Matern32 => "matern32",
            KernelFamily::Matern52 => "matern52",
        };
        let ls: Vec<String> = self.gp.lengthscale.iter().map(|v| fmt_float(*v)).collect();
        let mut s = String::new();
        s += &format!(
            "[env]\nname = \"{}\"\nnoise_std = {}\naction_repeat = {}\nreset = \"{}\"\npendulum_cost = \"{}\"\n\n",
            self.env.name,
            fmt_float(self.env.noise_std),
            self.env.action_repeat,
            match self.env.reset {
                ResetMode::Never => "never",
                ResetMode::OnDrop => "on_drop",
            },
            match self.env.pendulum_cost {
                PendulumCost::Squared => "squared",
                PendulumCost::Literal => "literal",
            }
        );
        s += &format!(
            "[agent]\nname = {:?}\nnum_samples = {}\nnum_elites = {}\noptimizer_steps = {}\nh_mpc = {}\nparticles = {}\n\
             colored_noise_exponent = {}\nelite_keep_fraction = {}\ninit_std = {}\npopulation_decay = {}\nplanning_noise = {}\n\n",
            agents,
            p.num_samples,
            p.num_elites,
            p.optimizer_steps,
            p.horizon,
            p.particles,
            fmt_float(p.colored_noise_exponent),
            fmt_float(p.elite_keep_fraction),
            fmt_float(p.init_std),
            fmt_float(p.population_decay),
            p.planning_noise
        );
        s += &format!(
            "[run]\nsteps = {}\nschedule = \"{}\"\n{}\nseeds = {:?}\n{}\njobs = {}\n\n",
            self.run.steps, schedule, h_line, self.run.seeds, a_star, self.run.jobs
        );
        s += &format!(
            "[gp]\nkernel = \"{}\"\nlengthscale = [{}]\nsignal_variance = {}\nnoise_variance = {}\n{}\ntarget = \"{}\"\nstandardize = {}\n",
            kernel,
            ls.join(", "),
            fmt_float(self.gp.signal_variance),
            fmt_float(self.gp.noise_variance),
            beta,
            if self.gp.delta_targets { "delta" } else { "absolute" },
            self.gp.standardize
        );
        if let Some(m) = self.gp.max_points {
            s += &format!("max_points = {m}\n");
        }
        s += &format!("\n[output]\ndir = {:?}\n", self.output.dir.display().to_string());
        s
    }
}

/// Float literal that TOML reads back as a float.
fn fmt_float(v: f64) -> String {
    let s = format!("{v:?}");
    if s.contains('.') || s.contains('e') || s.contains("inf") || s.contains("NaN") {
        s
    } else {
        format!("{s}.0")
    }
}
