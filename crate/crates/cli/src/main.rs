use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Args, Parser, Subcommand};
use neorl_cli::config::{parse_config_file, parse_with_overrides, AStarMode, ConfigError, ExperimentConfig, Overrides};
use neorl_cli::experiment::{build_env, resolve_a_star, run_experiment};
use neorl_cli::plotdata::{emit_plot_data, write_plot_data};
use neorl_cli::verify::{verify, VerifyOptions};

#[derive(Parser)]
#[command(name = "neorl", version, about = "Nonepisodic optimistic model-based RL experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    env: Option<String>,
    /// Agent names (neorl, nemean, nepets, nets); repeat or comma-separate.
    #[arg(long = "agent", value_delimiter = ',')]
    agents: Vec<String>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    seeds: Vec<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Fixed confidence multiplier.
    #[arg(long)]
    beta: Option<f64>,
    /// MPC planning horizon.
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an agents x seeds sweep and write a result bundle.
    Run {
        #[command(flatten)]
        common: Common,
        /// Skip seeds whose results already exist in the output directory.
        #[arg(long)]
        resume: bool,
    },
    /// Estimate the optimal average cost with the true-dynamics planner.
    Oracle {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 200)]
        burn_in: usize,
        #[arg(long, default_value_t = 2000)]
        window: usize,
    },
    /// Drift, energy-transfer and regret-shape checks, printed as JSON.
    Verify {
        /// Result bundle whose regret curves are checked for sublinearity.
        #[arg(long)]
        bundle: Option<PathBuf>,
        #[arg(long, default_value_t = 64)]
        states: usize,
        #[arg(long, default_value_t = 200)]
        mc: usize,
        #[arg(long, default_value_t = 0.9)]
        gamma: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write average-cost, regret and reset tables from a result bundle.
    Plotdata {
        bundle: PathBuf,
        #[arg(long, default_value_t = 1)]
        stride: usize,
        /// Output directory; defaults to `<bundle>/plots`.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn load(common: &Common) -> Result<ExperimentConfig> {
    let ov = Overrides {
        env: common.env.clone(),
        agents: (!common.agents.is_empty()).then(|| common.agents.clone()),
        steps: common.steps,
        seeds: (!common.seeds.is_empty()).then(|| common.seeds.clone()),
        out: common.out.clone(),
        beta: common.beta,
        horizon: common.horizon,
    };
    match &common.config {
        Some(path) => parse_config_file(path, &ov),
        None => Ok(parse_with_overrides("", &ov)?),
    }
}

fn execute(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { common, resume } => {
            let cfg = load(&common)?;
            let summary = run_experiment(&cfg, resume)?;
            for a in &summary.agents {
                let last = a.checkpoints.last();
                eprintln!(
                    "{}: {}/{} seeds complete, avg cost {:.4}, regret {:.2}",
                    a.agent,
                    a.completed,
                    a.seeds.len(),
                    last.map_or(f64::NAN, |c| c.avg_cost_mean),
                    last.map_or(f64::NAN, |c| c.regret_mean),
                );
            }
            eprintln!("results in {}", cfg.output.dir.display());
            Ok(if summary.any_failed() { ExitCode::from(2) } else { ExitCode::SUCCESS })
        }
        Command::Oracle { common, burn_in, window } => {
            let mut cfg = load(&common)?;
            cfg.run.a_star = AStarMode::Oracle { burn_in, window };
            let env = build_env(&cfg)?;
            let a = resolve_a_star(&cfg, &env)?;
            println!("{}", serde_json::to_string_pretty(&a)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { bundle, states, mc, gamma, seed, out } => {
            let opts = VerifyOptions {
                states,
                mc_per_state: mc,
                gamma,
                seed,
                ..VerifyOptions::default()
            };
            let report = verify(&opts, bundle.as_deref())?;
            let json = serde_json::to_string_pretty(&report)?;
            match out {
                Some(p) => std::fs::write(p, json + "\n")?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Plotdata { bundle, stride, out } => {
            let data = emit_plot_data(&bundle, stride)?;
            let dir = out.unwrap_or_else(|| bundle.join("plots"));
            for p in write_plot_data(&data, &dir)? {
                eprintln!("wrote {}", p.display());
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(code) => code,
        Err(e) => {
            if e.downcast_ref::<ConfigError>().is_some() {
                eprintln!("configuration error: {e}");
            } else {
                eprintln!("error: {e:#}");
            }
            ExitCode::from(1)
        }
    }
}
