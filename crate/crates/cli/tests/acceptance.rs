//! Acceptance suite. Prints one line per criterion and exits nonzero if any
//! criterion that ran failed.
//!
//! Criteria 1-5 are multi-hour sweeps. They run only with `--ignored`,
//! `--include-ignored` or `NEORL_ACCEPTANCE_FULL=1`. Set `NEORL_BUNDLES` to a
//! directory holding finished `pendulum_gp`, `mountaincar` and
//! `cartpole_balance` bundles to evaluate those instead of rerunning.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Instant;

use anyhow::{anyhow, ensure, Result};
use common::{gram, info_gain_eigen, random_points, sample_gp, DenseGp};
use neorl::data::StateVector;
use neorl::envs::{EnvSpec, Environment};
use neorl::gp::{information_gain, BetaSchedule, GpConfig, GpPosterior, KernelFamily, KernelSpec};
use neorl::planner::{icem_plan, OracleModel, PlannerConfig, PropagationMode};
use neorl::runner::{
    compute_h0, doubling_schedule, run_practical, AStarReference, EpisodeSchedule, RunConfig, StepRecord,
};
use neorl::theory::{check_drift, check_sublinearity, FnStep, LyapunovSpec};
use neorl::RandomStream;
use neorl_cli::config::{parse_config_file, parse_with_overrides, Overrides};
use neorl_cli::csvio::read_steps;
use neorl_cli::experiment::{csv_path, read_json, run_experiment};
use neorl_cli::plotdata::load_bundle;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Result<Verdict> {
    Ok(Verdict {
        pass,
        detail: detail.into(),
    })
}

const FAMILIES: [KernelFamily; 3] = [KernelFamily::Rbf, KernelFamily::Linear, KernelFamily::Matern32];

fn gp_dense_equivalence() -> Result<Verdict> {
    let mut rng = RandomStream::new(6);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let family = if i % 3 == 2 {
            [KernelFamily::Matern12, KernelFamily::Matern32, KernelFamily::Matern52][(i / 3) % 3]
        } else {
            FAMILIES[i % 3]
        };
        let n = 1 + rng.below(50);
        let d = 1 + rng.below(4);
        let ls = rng.uniform_in(0.5, 2.0);
        let sig = rng.uniform_in(0.5, 2.0);
        let noise = rng.uniform_in(0.01, 0.5);
        let zs = random_points(&mut rng, n, d, 2.0);
        let ys: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.standard_normal(), rng.standard_normal()]).collect();
        let gp = GpPosterior::fit(&zs, &ys, KernelSpec::new(family, ls, sig), noise, d, 2)?;
        let oracle = DenseGp::new(family, ls, sig, noise, &zs, &ys);
        for q in random_points(&mut rng, 10, d, 2.5) {
            let (m, s) = gp.predict(&q)?;
            let (mo, vo) = oracle.predict(&q);
            for j in 0..2 {
                worst = worst.max((m[j] - mo[j]).abs());
            }
            worst = worst.max((s[0] * s[0] - vo.max(0.0)).abs());
        }
    }
    verdict(worst <= 1e-8, format!("max deviation {worst:.2e} over 100 datasets (tolerance 1e-8)"))
}

fn information_gain_chain_rule() -> Result<Verdict> {
    let mut rng = RandomStream::new(7);
    let mut worst = 0.0f64;
    let mut eigen_worst = 0.0f64;
    for i in 0..100 {
        let family = FAMILIES[i % 3];
        let n = rng.below(30);
        let d = 1 + rng.below(3);
        let noise = rng.uniform_in(0.01, 0.5);
        let ls = rng.uniform_in(0.5, 1.5);
        let k = KernelSpec::new(family, ls, 1.0);
        let zs = random_points(&mut rng, n + 1, d, 1.0);
        let base = information_gain(&zs[..n], &k, noise)?;
        let full = information_gain(&zs, &k, noise)?;
        let dummy = vec![vec![0.0]; n];
        let var = GpPosterior::fit(&zs[..n], &dummy, k.clone(), noise, d, 1)?.variance(&zs[n])?;
        worst = worst.max((full - base - 0.5 * (1.0 + var / noise).ln()).abs());
        eigen_worst = eigen_worst.max((full - info_gain_eigen(family, ls, 1.0, noise, &zs)).abs());
    }
    verdict(
        worst <= 1e-8 && eigen_worst <= 1e-8,
        format!("chain-rule gap {worst:.2e}, eigenvalue gap {eigen_worst:.2e} (tolerance 1e-8)"),
    )
}

fn calibration_coverage() -> Result<Verdict> {
    let (ls, noise_std) = (0.5, 0.1);
    let mut rng = RandomStream::new(8);
    let mut ok = 0;
    let mut fractions = Vec::new();
    for _ in 0..10 {
        let train = random_points(&mut rng, 40, 1, 2.0);
        let test = random_points(&mut rng, 200, 1, 2.0);
        let all: Vec<Vec<f64>> = train.iter().chain(&test).cloned().collect();
        let f = sample_gp(&mut rng, &gram(KernelFamily::Rbf, ls, 1.0, &all));
        let ys: Vec<Vec<f64>> = (0..train.len()).map(|i| vec![f[i] + noise_std * rng.standard_normal()]).collect();
        let gp = GpPosterior::fit(&train, &ys, KernelSpec::rbf(ls, 1.0), noise_std * noise_std, 1, 1)?;
        let beta = BetaSchedule::InfoGainBased { bound: 2.0, delta: 0.1 }.value(gp.information_gain(), noise_std)?;
        let mut covered = 0;
        for (i, z) in test.iter().enumerate() {
            let (m, s) = gp.predict(z)?;
            if (m[0] - f[train.len() + i]).abs() <= beta * s[0] {
                covered += 1;
            }
        }
        let frac = covered as f64 / test.len() as f64;
        fractions.push(frac);
        if frac >= 0.9 {
            ok += 1;
        }
    }
    let min = fractions.iter().copied().fold(1.0, f64::min);
    verdict(ok >= 9, format!("{ok}/10 trials with >= 90% coverage (worst trial {:.1}%)", 100.0 * min))
}

fn h0_exactness() -> Result<Verdict> {
    let examples = [(2.0, 1.0, 0.5, 2), (1.0001, 1.0, 0.5, 1), (10.0, 1.0, 0.9, 22)];
    for (cu, cl, g, want) in examples {
        let got = compute_h0(cu, cl, g)?;
        ensure!(got == want, "compute_h0({cu}, {cl}, {g}) = {got}, expected {want}");
    }
    let mut rng = RandomStream::new(9);
    for _ in 0..1000 {
        let ratio = 1.0 + rng.uniform_in(1e-6, 99.0);
        let gamma = rng.uniform_in(0.01, 0.99);
        let h0 = compute_h0(ratio, 1.0, gamma)?;
        let nu = ratio * gamma.powi(h0 as i32);
        ensure!(nu < 1.0, "nu = {nu} for ratio {ratio}, gamma {gamma}");
        ensure!(h0 == 1 || ratio * gamma.powi(h0 as i32 - 1) >= 1.0, "H0 = {h0} not minimal");
    }
    verdict(true, "3 hand examples match; nu < 1 on 1000 random draws")
}

fn doubling_identity() -> Result<Verdict> {
    let mut pairs = 0u64;
    for total in 1..=10_000usize {
        for h0 in 1..=total {
            let s = doubling_schedule(h0, total)?;
            ensure!(s.iter().sum::<usize>() == total, "sum mismatch at h0 {h0}, T {total}");
            for (n, len) in s.iter().enumerate().take(s.len() - 1) {
                ensure!(*len == h0 << n, "episode {n} has length {len} for h0 {h0}");
            }
            pairs += 1;
        }
    }
    verdict(true, format!("sum of episode lengths equals T on all {pairs} pairs"))
}

/// Constant running cost regardless of state and control.
struct ConstantCost {
    spec: EnvSpec<f64>,
    cost: f64,
}

impl ConstantCost {
    fn new(cost: f64) -> Self {
        Self {
            spec: EnvSpec {
                name: "constant".into(),
                state_dim: 1,
                control_dim: 1,
                u_min: vec![-1.0],
                u_max: vec![1.0],
                dt: 1.0,
                action_repeat: 1,
                noise_std: vec![0.01],
                initial_state: StateVector(vec![0.0]),
            },
            cost,
        }
    }
}

impl Environment<f64> for ConstantCost {
    fn spec(&self) -> &EnvSpec<f64> {
        &self.spec
    }
    fn substep(&self, x: &[f64], u: &[f64], out: &mut [f64]) {
        out[0] = 0.8 * x[0] + 0.2 * u[0];
    }
    fn cost(&self, _x: &[f64], _u: &[f64]) -> f64 {
        self.cost
    }
}

fn regret_identity_holds(steps: &[StepRecord], a_star: f64) -> bool {
    let mut prev = 0.0;
    steps.iter().all(|r| {
        let ok = r.regret == prev + (r.cost - a_star);
        prev = r.regret;
        ok
    })
}

fn regret_bookkeeping(pendulum_runs: &[(Vec<StepRecord>, f64)]) -> Result<Verdict> {
    let env = ConstantCost::new(0.7);
    let planner = PlannerConfig {
        num_samples: 16,
        num_elites: 4,
        optimizer_steps: 2,
        horizon: 3,
        particles: 1,
        ..PlannerConfig::default()
    };
    let mut constant_ok = true;
    let mut logged = 0;
    let mut identity_ok = true;
    for mode in PropagationMode::ALL {
        let mut cfg = RunConfig::new(
            60,
            EpisodeSchedule::Fixed { h: 7 },
            mode,
            GpConfig::new(KernelSpec::rbf(1.0, 1.0), 1e-4),
        );
        cfg.planner = planner.clone();
        cfg.a_star = AStarReference::Constant(0.7);
        let model = neorl::gp::CalibratedModel::prior(1, 1, &cfg.gp, BetaSchedule::Fixed(2.0))?;
        let log = run_practical(&env, model, &cfg, &mut RandomStream::new(11))?;
        constant_ok &= log.completed() && log.steps.iter().all(|r| r.regret == 0.0);
        identity_ok &= regret_identity_holds(&log.steps, 0.7);
        logged += 1;
    }
    for (steps, a_star) in pendulum_runs {
        identity_ok &= regret_identity_holds(steps, *a_star);
        logged += 1;
    }
    verdict(
        constant_ok && identity_ok,
        format!(
            "R_t - R_(t-1) = c_t - A* on {logged} logged runs: {identity_ok}; constant-cost runs have R_t = 0: {constant_ok}"
        ),
    )
}

/// One-step problem with cost `(u - target)^2`.
struct Quadratic {
    spec: EnvSpec<f64>,
    target: f64,
}

impl Environment<f64> for Quadratic {
    fn spec(&self) -> &EnvSpec<f64> {
        &self.spec
    }
    fn substep(&self, x: &[f64], _u: &[f64], out: &mut [f64]) {
        out[0] = x[0];
    }
    fn cost(&self, _x: &[f64], u: &[f64]) -> f64 {
        (u[0] - self.target).powi(2)
    }
}

fn quadratic(target: f64) -> Quadratic {
    Quadratic {
        spec: EnvSpec {
            name: "quadratic".into(),
            state_dim: 1,
            control_dim: 1,
            u_min: vec![-1.0],
            u_max: vec![1.0],
            dt: 1.0,
            action_repeat: 1,
            noise_std: vec![0.0],
            initial_state: StateVector(vec![0.0]),
        },
        target,
    }
}

fn cem_sanity() -> Result<Verdict> {
    let target = 0.3;
    let env = quadratic(target);
    let model = OracleModel::new(Arc::new(quadratic(target)));
    let mut grid_best = (f64::INFINITY, 0.0);
    for i in 0..=20_000 {
        let u = -1.0 + i as f64 * 1e-4;
        let c = env.cost(&[0.0], &[u]);
        if c < grid_best.0 {
            grid_best = (c, u);
        }
    }
    let cfg = PlannerConfig {
        horizon: 1,
        particles: 1,
        planning_noise: false,
        ..PlannerConfig::default()
    };
    let mut worst = 0.0f64;
    let mut monotone = true;
    for seed in 0..100 {
        let plan = icem_plan(&model, &env, &[0.0], &cfg, PropagationMode::Mean, &mut RandomStream::new(seed), None)?;
        worst = worst.max((plan.actions[0][0] - grid_best.1).abs());
        monotone &= plan.best_per_iteration.windows(2).all(|w| w[1] <= w[0]);
    }
    verdict(
        worst <= 0.02 && monotone,
        format!("max |u - u_grid| = {worst:.2e} over 100 seeds (tolerance 0.02); best-ever nonincreasing: {monotone}"),
    )
}

fn scalar_linear(a: f64, sigma: f64) -> FnStep<impl Fn(&[f64], &[f64], &[f64]) -> Vec<f64>> {
    FnStep {
        noise_dim: usize::from(sigma > 0.0),
        f: move |x: &[f64], _u: &[f64], xi: &[f64]| vec![a * x[0] + sigma * xi.first().copied().unwrap_or(0.0)],
    }
}

fn drift_checker() -> Result<Verdict> {
    let sq: neorl::theory::EnergyFn = Arc::new(|x: &[f64]| x.iter().map(|v| v * v).sum());
    let states: Vec<Vec<f64>> = (0..200).map(|i| vec![-20.0 + 40.0 * i as f64 / 199.0]).collect();
    let far: Vec<Vec<f64>> = states.iter().filter(|x| x[0].abs() >= 2.0).cloned().collect();
    let mut zero = |_: &[f64]| vec![0.0];
    let mut false_verdicts = 0usize;
    // Exact: E[V(a x)] = a^2 x^2, so gamma >= a^2 never violates and
    // gamma < a^2 with K below the gap violates wherever a^2 x^2 - gamma x^2 > K.
    let cases: [(f64, f64, f64, &[Vec<f64>], bool); 4] = [
        (0.5, 0.25, 0.0, &states, false),
        (0.5, 0.5, 0.0, &states, false),
        (2.0, 0.9, 1.0, &far, true),
        (1.2, 0.5, 0.5, &far, true),
    ];
    for (a, gamma, k, xs, expect_violation) in cases {
        let spec = LyapunovSpec::with_energy(sq.clone(), gamma, k);
        let r = check_drift(&scalar_linear(a, 0.0), &mut zero, &spec, xs, 10, &mut RandomStream::new(0))?;
        let expected = if expect_violation { xs.len() } else { 0 };
        false_verdicts += r.violating_states.len().abs_diff(expected);
    }
    let (a, s) = (0.5, 0.3);
    let spec = LyapunovSpec::with_energy(sq, a * a, 0.0);
    let grid: Vec<Vec<f64>> = (0..50).map(|i| vec![-5.0 + 10.0 * i as f64 / 49.0]).collect();
    let r = check_drift(&scalar_linear(a, s), &mut zero, &spec, &grid, 20_000, &mut RandomStream::new(13))?;
    let exact = s * s;
    let rel = (r.fitted_k - exact).abs() / exact;
    verdict(
        false_verdicts == 0 && rel <= 0.05,
        format!("{false_verdicts} false verdicts; fitted K = {:.5} vs {exact:.5} ({:.2}% off, tolerance 5%)", r.fitted_k, 100.0 * rel),
    )
}

const DETERMINISM_CONFIG: &str = "[env]\nname = \"pendulum\"\n\
[agent]\nname = [\"neorl\", \"nepets\"]\nnum_samples = 100\nnum_elites = 10\noptimizer_steps = 5\nh_mpc = 15\nparticles = 5\n\
[run]\nsteps = 150\nseeds = [7]\njobs = 1\n";

fn determinism(scratch: &Path) -> Result<(Verdict, Vec<(Vec<StepRecord>, f64)>)> {
    let mut files = Vec::new();
    for rep in ["a", "b"] {
        let ov = Overrides {
            out: Some(scratch.join(rep)),
            ..Overrides::default()
        };
        let cfg = parse_with_overrides(DETERMINISM_CONFIG, &ov)?;
        let summary = run_experiment(&cfg, false)?;
        ensure!(!summary.any_failed(), "determinism run failed");
        let mut bytes = Vec::new();
        for agent in ["neorl", "nepets"] {
            bytes.push(std::fs::read(csv_path(&scratch.join(rep), agent, 7))?);
        }
        files.push(bytes);
    }
    let identical = files[0] == files[1];
    let mut runs = Vec::new();
    for agent in ["neorl", "nepets"] {
        runs.push((read_steps(&csv_path(&scratch.join("a"), agent, 7))?, 0.0));
    }
    Ok((
        Verdict {
            pass: identical,
            detail: format!("two pendulum sweeps (neorl, nepets; 150 steps) byte-identical: {identical}"),
        },
        runs,
    ))
}

fn repo_root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

/// Finished bundle for a named configuration, produced on demand.
fn bundle(name: &str) -> Result<PathBuf> {
    if let Ok(root) = std::env::var("NEORL_BUNDLES") {
        let dir = Path::new(&root).join(name);
        ensure!(dir.join("manifest.json").exists(), "no bundle at {}", dir.display());
        return Ok(dir);
    }
    let out = repo_root().join("target/acceptance").join(name);
    let ov = Overrides {
        out: Some(out.clone()),
        ..Overrides::default()
    };
    let cfg = parse_config_file(&repo_root().join("configs").join(format!("{name}.toml")), &ov)?;
    run_experiment(&cfg, true)?;
    Ok(out)
}

type Runs = Vec<(String, Vec<(u64, Vec<StepRecord>)>)>;

fn runs_of<'a>(runs: &'a Runs, agent: &str) -> Result<&'a [(u64, Vec<StepRecord>)]> {
    runs.iter()
        .find(|(a, _)| a == agent)
        .map(|(_, r)| r.as_slice())
        .ok_or_else(|| anyhow!("bundle has no `{agent}` runs"))
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

fn pendulum_convergence(dir: &Path) -> Result<Verdict> {
    let (manifest, runs) = load_bundle(dir)?;
    let a_star = match read_json::<AStarReference>(&dir.join("a_star.json"))? {
        AStarReference::Estimated(v) | AStarReference::Constant(v) => v,
    };
    let close = runs_of(&runs, "neorl")?
        .iter()
        .filter(|(_, s)| (s.last().map_or(f64::INFINITY, |r| r.avg_cost) - a_star).abs() <= 0.1)
        .count();
    verdict(
        close >= 8,
        format!("{close}/{} neorl seeds within 0.1 of A* = {a_star:.4} at T = {}", manifest.seeds.len(), manifest.steps),
    )
}

fn seed_mean_regret(runs: &[(u64, Vec<StepRecord>)]) -> Vec<f64> {
    let len = runs.iter().map(|(_, s)| s.len()).min().unwrap_or(0);
    (0..len)
        .map(|t| runs.iter().map(|(_, s)| s[t].regret).sum::<f64>() / runs.len() as f64)
        .collect()
}

fn pendulum_sublinear(dir: &Path) -> Result<Verdict> {
    let (_, runs) = load_bundle(dir)?;
    let neorl = runs_of(&runs, "neorl")?;
    ensure!(!neorl.is_empty(), "no complete neorl runs");
    let r = check_sublinearity(&seed_mean_regret(neorl))?;
    let ratios: Vec<String> = r.checkpoints.iter().zip(&r.ratios).map(|(t, q)| format!("R_{t}/{t} = {q:.4}")).collect();
    verdict(r.sublinear, ratios.join(", "))
}

fn pendulum_ordering(dir: &Path) -> Result<Verdict> {
    let (_, runs) = load_bundle(dir)?;
    let final_regret = |agent: &str| -> Result<f64> {
        let r = runs_of(&runs, agent)?;
        ensure!(!r.is_empty(), "no complete {agent} runs");
        Ok(median(r.iter().map(|(_, s)| s.last().unwrap().regret).collect()))
    };
    let (a, b) = (final_regret("neorl")?, final_regret("nemean")?);
    verdict(a < b, format!("median final regret neorl {a:.1} vs nemean {b:.1}"))
}

fn escaped(steps: &[StepRecord]) -> bool {
    let w = 500;
    if steps.len() < w {
        return false;
    }
    let mut sum: f64 = steps[..w].iter().map(|r| r.cost).sum();
    if sum / (w as f64) < 10.0 {
        return true;
    }
    for t in w..steps.len() {
        sum += steps[t].cost - steps[t - w].cost;
        if sum / (w as f64) < 10.0 {
            return true;
        }
    }
    false
}

fn mountaincar_separation(dir: &Path) -> Result<Verdict> {
    let (manifest, runs) = load_bundle(dir)?;
    let count = |agent: &str| -> Result<usize> {
        Ok(runs_of(&runs, agent)?.iter().filter(|(_, s)| escaped(s)).count())
    };
    let (a, b) = (count("neorl")?, count("nemean")?);
    let n = manifest.seeds.len();
    verdict(a >= 6 && b <= 3, format!("500-step average below 10: neorl {a}/{n}, nemean {b}/{n}"))
}

fn cartpole_resets(dir: &Path) -> Result<Verdict> {
    let (_, runs) = load_bundle(dir)?;
    let resets = |agent: &str| -> Result<f64> {
        let r = runs_of(&runs, agent)?;
        ensure!(!r.is_empty(), "no complete {agent} runs");
        Ok(median(r.iter().map(|(_, s)| s.iter().filter(|x| x.did_reset).count() as f64).collect()))
    };
    let (a, b) = (resets("neorl")?, resets("nemean")?);
    verdict(a <= b, format!("median resets neorl {a} vs nemean {b}"))
}

struct Suite {
    failed: usize,
}

impl Suite {
    fn record(&mut self, id: usize, name: &str, started: Instant, result: Result<Verdict>) {
        let secs = started.elapsed().as_secs_f64();
        match result {
            Ok(v) => {
                if !v.pass {
                    self.failed += 1;
                }
                println!("criterion {id:>2} {} {name}: {} [{secs:.1}s]", if v.pass { "PASS" } else { "FAIL" }, v.detail);
            }
            Err(e) => {
                self.failed += 1;
                println!("criterion {id:>2} FAIL {name}: error: {e:#} [{secs:.1}s]");
            }
        }
    }

    fn run(&mut self, id: usize, name: &str, f: impl FnOnce() -> Result<Verdict>) {
        let t = Instant::now();
        self.record(id, name, t, f());
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let full = args.iter().any(|a| a == "--ignored" || a == "--include-ignored")
        || std::env::var("NEORL_ACCEPTANCE_FULL").is_ok_and(|v| v == "1");
    let mut suite = Suite { failed: 0 };

    if full {
        let pendulum = bundle("pendulum_gp");
        let with = |r: &Result<PathBuf>, f: fn(&Path) -> Result<Verdict>| match r {
            Ok(dir) => f(dir),
            Err(e) => Err(anyhow!("{e:#}")),
        };
        suite.run(1, "pendulum convergence", || with(&pendulum, pendulum_convergence));
        suite.run(2, "sublinear regret", || with(&pendulum, pendulum_sublinear));
        suite.run(3, "baseline ordering", || with(&pendulum, pendulum_ordering));
        suite.run(4, "mountaincar separation", || with(&bundle("mountaincar"), mountaincar_separation));
        suite.run(5, "cartpole resets", || with(&bundle("cartpole_balance"), cartpole_resets));
    } else {
        for (id, name) in [
            (1, "pendulum convergence"),
            (2, "sublinear regret"),
            (3, "baseline ordering"),
            (4, "mountaincar separation"),
            (5, "cartpole resets"),
        ] {
            println!("criterion {id:>2} SKIP {name}: long sweep, run with `cargo test --test acceptance -- --ignored`");
        }
    }

    suite.run(6, "GP dense-inverse equivalence", gp_dense_equivalence);
    suite.run(7, "information-gain chain rule", information_gain_chain_rule);
    suite.run(8, "calibration coverage", calibration_coverage);
    suite.run(9, "H0 exactness", h0_exactness);
    suite.run(10, "doubling-schedule identity", doubling_identity);

    let scratch = tempfile::tempdir().expect("temporary directory");
    let started = Instant::now();
    let (det, pendulum_runs) = match determinism(scratch.path()) {
        Ok((v, runs)) => (Ok(v), runs),
        Err(e) => (Err(e), vec![]),
    };
    suite.run(11, "regret bookkeeping", || regret_bookkeeping(&pendulum_runs));
    suite.run(12, "CEM sanity", cem_sanity);
    suite.run(13, "drift checker", drift_checker);
    suite.record(14, "determinism", started, det);

    if suite.failed > 0 {
        println!("{} criteria failed", suite.failed);
        std::process::exit(1);
    }
    println!("all criteria that ran passed");
}
