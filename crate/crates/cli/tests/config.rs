use neorl::planner::PropagationMode;
use neorl::runner::EpisodeSchedule;
use neorl_cli::config::{parse_config_str, parse_with_overrides, AStarMode, Overrides};

#[test]
fn pendulum_defaults_follow_the_hyperparameter_table() {
    let cfg = parse_config_str("[env]\nname = \"pendulum\"\n[agent]\nname = \"neorl\"\n").unwrap();
    let p = &cfg.planner;
    assert_eq!(cfg.agents, vec![PropagationMode::Optimistic]);
    assert_eq!((p.num_samples, p.num_elites, p.optimizer_steps, p.horizon, p.particles), (500, 50, 10, 20, 5));
    assert_eq!(cfg.run.schedule, EpisodeSchedule::Fixed { h: 10 });
    assert_eq!(cfg.env.action_repeat, 1);
    assert_eq!(cfg.gp.lengthscale, vec![2.0]);
}

#[test]
fn mountaincar_defaults_follow_the_hyperparameter_table() {
    let cfg = parse_config_str("[env]\nname = \"mountaincar\"\n").unwrap();
    let p = &cfg.planner;
    assert_eq!((p.num_samples, p.num_elites, p.optimizer_steps, p.horizon, p.particles), (1000, 100, 5, 50, 5));
    assert_eq!(cfg.run.schedule, EpisodeSchedule::Fixed { h: 10 });
    assert_eq!(cfg.env.action_repeat, 2);
}

#[test]
fn more_elites_than_samples_is_rejected() {
    let e = parse_config_str("[agent]\nnum_samples = 10\nnum_elites = 20\n").unwrap_err();
    let msg = e.to_string();
    assert!(msg.contains("num_elites"), "{msg}");
    assert!(msg.contains("num_samples"), "{msg}");
}

#[test]
fn unknown_keys_are_rejected_with_their_path() {
    let e = parse_config_str("[gp]\nlengthscales = [1.0]\n").unwrap_err();
    assert!(e.to_string().contains("gp.lengthscales"), "{e}");
    let e = parse_config_str("[planner]\nx = 1\n").unwrap_err();
    assert!(e.to_string().contains("planner"), "{e}");
}

#[test]
fn type_mismatch_names_the_key() {
    let e = parse_config_str("[run]\nsteps = \"many\"\n").unwrap_err();
    assert!(e.to_string().contains("run.steps"), "{e}");
}

#[test]
fn duplicate_seeds_and_unknown_agents_are_rejected() {
    assert!(parse_config_str("[run]\nseeds = [1, 1]\n").unwrap_err().to_string().contains("run.seeds"));
    assert!(parse_config_str("[agent]\nname = \"sac\"\n").unwrap_err().to_string().contains("agent.name"));
}

#[test]
fn overrides_replace_file_values() {
    let ov = Overrides {
        env: Some("mountaincar".into()),
        agents: Some(vec!["nemean".into(), "nets".into()]),
        steps: Some(77),
        seeds: Some(vec![3, 4]),
        beta: Some(1.5),
        horizon: Some(12),
        ..Overrides::default()
    };
    let cfg = parse_with_overrides("[run]\nsteps = 5\n", &ov).unwrap();
    assert_eq!(cfg.env.name, "mountaincar");
    assert_eq!(cfg.agents, vec![PropagationMode::Mean, PropagationMode::Thompson]);
    assert_eq!(cfg.run.steps, 77);
    assert_eq!(cfg.run.seeds, vec![3, 4]);
    assert_eq!(cfg.planner.horizon, 12);
    assert_eq!(cfg.planner.num_samples, 1000);
}

#[test]
fn oracle_reference_mode_parses() {
    let cfg = parse_config_str("[run]\na_star = \"oracle\"\noracle_window = 300\n").unwrap();
    assert!(matches!(cfg.run.a_star, AStarMode::Oracle { window: 300, .. }));
}

#[test]
fn config_echo_parses_back_to_the_same_config() {
    let cfg = parse_config_str(
        "[env]\nname = \"cartpole_balance\"\n[agent]\nname = [\"neorl\", \"nepets\"]\n[gp]\nbeta_schedule = \"info_gain\"\ndelta = 0.2\n",
    )
    .unwrap();
    let again = parse_config_str(&cfg.to_toml()).unwrap();
    assert_eq!(cfg, again);
}
