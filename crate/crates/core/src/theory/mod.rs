//! Monte-Carlo checks of drift conditions, energy transfer between
//! policies, information-gain growth, moment bounds and regret shape.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::envs::Environment;
use crate::error::{check_dim, invalid, Error, Result};
use crate::gp::KernelFamily;
use crate::rng::RandomStream;
use crate::runner::RunLog;

/// Monotone scalar function on `[0, inf)`.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;
/// Candidate Lyapunov function.
pub type EnergyFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// Lyapunov function with its sandwich, continuity and drift constants.
#[derive(Clone)]
pub struct LyapunovSpec {
    pub v: EnergyFn,
    pub c_lower: f64,
    pub c_upper: f64,
    /// Class-K-infinity function bounding `V` from both sides.
    pub xi: ScalarFn,
    /// Modulus of continuity of `V`.
    pub kappa: ScalarFn,
    pub gamma: f64,
    pub k: f64,
}

impl std::fmt::Debug for LyapunovSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("LyapunovSpec")
            .field("c_lower", &self.c_lower)
            .field("c_upper", &self.c_upper)
            .field("gamma", &self.gamma)
            .field("k", &self.k)
            .finish_non_exhaustive()
    }
}

const GRID_MAX: f64 = 1e3;

fn check_class_k(name: &'static str, f: &ScalarFn) -> Result<()> {
    if f(0.0) != 0.0 {
        return Err(invalid(name, "must vanish at zero"));
    }
    let mut prev = 0.0;
    for i in 1..=200 {
        let s = GRID_MAX * (i as f64 / 200.0).powi(3);
        let v = f(s);
        if !v.is_finite() || v < prev {
            return Err(invalid(name, format!("not monotone near {s}")));
        }
        prev = v;
    }
    Ok(())
}

impl LyapunovSpec {
    /// Spec with identity `xi` and `kappa`; suitable for drift checks only.
    pub fn with_energy(v: EnergyFn, gamma: f64, k: f64) -> Self {
        Self {
            v,
            c_lower: 0.5,
            c_upper: 1.0,
            xi: Arc::new(|s| s),
            kappa: Arc::new(|s| s),
            gamma,
            k,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.c_lower > 0.0) {
            return Err(invalid("c_lower", "must be positive"));
        }
        if !(self.c_upper > self.c_lower) {
            return Err(invalid("c_upper", "must exceed c_lower"));
        }
        if !(self.gamma > 0.0 && self.gamma < 1.0) {
            return Err(invalid("gamma", format!("must lie in (0, 1), got {}", self.gamma)));
        }
        if !(self.k >= 0.0) || !self.k.is_finite() {
            return Err(invalid("k", "must be finite and nonnegative"));
        }
        check_class_k("xi", &self.xi)?;
        check_class_k("kappa", &self.kappa)?;
        Ok(())
    }

    /// `V(x)`, rejecting negative or non-finite values.
    pub fn energy(&self, x: &[f64]) -> Result<f64> {
        let v = (self.v)(x);
        if !v.is_finite() || v < 0.0 {
            return Err(invalid("V", format!("returned {v} at {x:?}")));
        }
        Ok(v)
    }

    /// Contraction factor over one episode of length `h0`.
    pub fn nu(&self, h0: usize) -> f64 {
        self.c_upper / self.c_lower * self.gamma.powi(h0 as i32)
    }
}

fn norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpecSampleReport {
    pub states: usize,
    /// States where `c_l xi(|x|) <= V(x) <= c_u xi(|x|)` fails.
    pub bound_violations: usize,
    pub pairs: usize,
    /// Consecutive pairs where `|V(x) - V(x')| > kappa(|x - x'|)`.
    pub continuity_violations: usize,
}

/// Checks the sandwich bound on every state and continuity on consecutive
/// pairs of `states`.
pub fn check_spec_on_samples(spec: &LyapunovSpec, states: &[Vec<f64>]) -> Result<SpecSampleReport> {
    spec.validate()?;
    let mut r = SpecSampleReport {
        states: states.len(),
        bound_violations: 0,
        pairs: states.len().saturating_sub(1),
        continuity_violations: 0,
    };
    let tol = 1e-12;
    let vs: Vec<f64> = states.iter().map(|x| spec.energy(x)).collect::<Result<_>>()?;
    for (x, v) in states.iter().zip(&vs) {
        let b = (spec.xi)(norm(x));
        if *v < spec.c_lower * b - tol || *v > spec.c_upper * b + tol {
            r.bound_violations += 1;
        }
    }
    for i in 1..states.len() {
        let d: Vec<f64> = states[i].iter().zip(&states[i - 1]).map(|(a, b)| a - b).collect();
        if (vs[i] - vs[i - 1]).abs() > (spec.kappa)(norm(&d)) + tol {
            r.continuity_violations += 1;
        }
    }
    Ok(r)
}

/// Stochastic transition `x+ = step(x, u, xi)` driven by standard normals.
pub trait StochasticStep {
    fn noise_dim(&self) -> usize;
    fn step(&self, x: &[f64], u: &[f64], xi: &[f64]) -> Vec<f64>;
}

/// Environment dynamics with its additive Gaussian noise.
pub struct EnvStep<'a>(pub &'a dyn Environment<f64>);

impl StochasticStep for EnvStep<'_> {
    fn noise_dim(&self) -> usize {
        self.0.spec().state_dim
    }
    fn step(&self, x: &[f64], u: &[f64], xi: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        self.0.mean_step(x, u, &mut out);
        for ((o, s), n) in out.iter_mut().zip(&self.0.spec().noise_std).zip(xi) {
            *o += s * n;
        }
        out
    }
}

/// Transition given by a closure.
pub struct FnStep<F> {
    pub noise_dim: usize,
    pub f: F,
}

impl<F: Fn(&[f64], &[f64], &[f64]) -> Vec<f64>> StochasticStep for FnStep<F> {
    fn noise_dim(&self) -> usize {
        self.noise_dim
    }
    fn step(&self, x: &[f64], u: &[f64], xi: &[f64]) -> Vec<f64> {
        (self.f)(x, u, xi)
    }
}

/// A state-feedback policy; may carry its own randomness.
pub type Policy<'a> = dyn FnMut(&[f64]) -> Vec<f64> + 'a;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriftReport {
    pub states_tested: usize,
    pub mc_per_state: usize,
    pub violation_fraction: f64,
    /// Largest `E[V(x+)] - (gamma V(x) + K)` over states.
    pub worst_margin: f64,
    /// Largest three-standard-error half-width over states.
    pub half_width: f64,
    /// Smallest `K` for which every sampled state satisfies the estimated
    /// inequality.
    pub fitted_k: f64,
    pub violating_states: Vec<usize>,
}

/// Monte-Carlo estimate of `E[V(x+)]` at one state.
struct Expectation {
    mean: f64,
    se: f64,
}

/// Antithetic standard-normal draws shared by every state.
struct NoiseBank {
    draws: Vec<Vec<f64>>,
    antithetic: bool,
}

impl NoiseBank {
    fn new(dim: usize, samples: usize, rng: &mut RandomStream) -> Self {
        if dim == 0 {
            return Self {
                draws: vec![vec![]],
                antithetic: false,
            };
        }
        let pairs = samples.div_ceil(2);
        let mut draws = Vec::with_capacity(2 * pairs);
        for _ in 0..pairs {
            let mut z = vec![0.0; dim];
            rng.fill_normal(&mut z);
            let neg: Vec<f64> = z.iter().map(|v| -v).collect();
            draws.push(z);
            draws.push(neg);
        }
        draws.truncate(samples.max(1));
        Self {
            antithetic: draws.len() >= 2,
            draws,
        }
    }

    fn expectation(&self, spec: &LyapunovSpec, step: &dyn StochasticStep, x: &[f64], u: &[f64]) -> Result<Expectation> {
        let vals: Vec<f64> = self
            .draws
            .iter()
            .map(|xi| spec.energy(&step.step(x, u, xi)))
            .collect::<Result<_>>()?;
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let groups: Vec<f64> = if self.antithetic {
            vals.chunks(2).map(|c| c.iter().sum::<f64>() / c.len() as f64).collect()
        } else {
            vals
        };
        let m = groups.len() as f64;
        let se = if groups.len() < 2 {
            0.0
        } else {
            let gm = groups.iter().sum::<f64>() / m;
            (groups.iter().map(|g| (g - gm) * (g - gm)).sum::<f64>() / (m - 1.0) / m).sqrt()
        };
        Ok(Expectation { mean, se })
    }
}

fn drift_with(
    step: &dyn StochasticStep,
    policy: &mut Policy<'_>,
    spec: &LyapunovSpec,
    k: f64,
    states: &[Vec<f64>],
    bank: &NoiseBank,
) -> Result<DriftReport> {
    let mut violating = Vec::new();
    let mut worst = f64::NEG_INFINITY;
    let mut hw = 0.0f64;
    let mut fitted = 0.0f64;
    for (i, x) in states.iter().enumerate() {
        let u = policy(x);
        let e = bank.expectation(spec, step, x, &u)?;
        let v = spec.energy(x)?;
        let margin = e.mean - (spec.gamma * v + k);
        worst = worst.max(margin);
        hw = hw.max(3.0 * e.se);
        fitted = fitted.max(e.mean - spec.gamma * v);
        if margin > 3.0 * e.se {
            violating.push(i);
        }
    }
    Ok(DriftReport {
        states_tested: states.len(),
        mc_per_state: bank.draws.len(),
        violation_fraction: violating.len() as f64 / states.len() as f64,
        worst_margin: worst,
        half_width: hw,
        fitted_k: fitted,
        violating_states: violating,
    })
}

/// Tests `E[V(x+)] <= gamma V(x) + K` at each of `states` with
/// `mc_per_state` antithetic noise draws shared across states. A state
/// violates when the estimated margin exceeds three standard errors.
pub fn check_drift(
    step: &dyn StochasticStep,
    policy: &mut Policy<'_>,
    spec: &LyapunovSpec,
    states: &[Vec<f64>],
    mc_per_state: usize,
    rng: &mut RandomStream,
) -> Result<DriftReport> {
    spec.validate()?;
    if states.is_empty() {
        return Err(Error::Empty("states"));
    }
    let bank = NoiseBank::new(step.noise_dim(), mc_per_state.max(1), rng);
    drift_with(step, policy, spec, spec.k, states, &bank)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyTransferReport {
    /// Sampled bound on `|f(x, u) - f(x, u')|` for the policies' controls.
    pub dynamics_modulus: f64,
    /// `kappa(dynamics_modulus)`.
    pub inflation: f64,
    pub k_tilde: f64,
    pub reference: DriftReport,
    pub others: Vec<DriftReport>,
}

fn bounded(u: &[f64], u_max: f64) -> Result<()> {
    if u.iter().any(|v| !v.is_finite() || v.abs() > u_max + 1e-12) {
        return Err(Error::Precondition(format!("policy output {u:?} exceeds u_max = {u_max}")));
    }
    Ok(())
}

/// Policy that returns the rows of `table` in order.
fn replay(table: &[Vec<f64>]) -> impl FnMut(&[f64]) -> Vec<f64> + '_ {
    let mut i = 0usize;
    move |_| {
        i += 1;
        table[i - 1].clone()
    }
}

/// Checks that every policy in `others` satisfies the drift condition of
/// `policy_s` with `K` inflated by the sampled continuity modulus.
pub fn check_energy_transfer(
    step: &dyn StochasticStep,
    policy_s: &mut Policy<'_>,
    others: &mut [&mut Policy<'_>],
    spec: &LyapunovSpec,
    u_max: f64,
    states: &[Vec<f64>],
    mc_per_state: usize,
    rng: &mut RandomStream,
) -> Result<EnergyTransferReport> {
    spec.validate()?;
    if states.is_empty() {
        return Err(Error::Empty("states"));
    }
    if !(u_max >= 0.0) {
        return Err(invalid("u_max", "must be nonnegative"));
    }
    let zero = vec![0.0; step.noise_dim()];
    let mut us: Vec<Vec<f64>> = Vec::with_capacity(states.len());
    for x in states {
        let u = policy_s(x);
        bounded(&u, u_max)?;
        us.push(u);
    }
    let mut other_us: Vec<Vec<Vec<f64>>> = Vec::with_capacity(others.len());
    let mut modulus = 0.0f64;
    for p in others.iter_mut() {
        let mut col = Vec::with_capacity(states.len());
        for (x, us_x) in states.iter().zip(&us) {
            let u = p(x);
            bounded(&u, u_max)?;
            let a = step.step(x, us_x, &zero);
            let b = step.step(x, &u, &zero);
            let d: Vec<f64> = a.iter().zip(&b).map(|(p, q)| p - q).collect();
            modulus = modulus.max(norm(&d));
            col.push(u);
        }
        other_us.push(col);
    }
    let inflation = (spec.kappa)(modulus);
    let k_tilde = spec.k + inflation;
    let bank = NoiseBank::new(step.noise_dim(), mc_per_state.max(1), rng);
    let reference = drift_with(step, &mut replay(&us), spec, spec.k, states, &bank)?;
    let mut reports = Vec::with_capacity(others.len());
    for col in &other_us {
        reports.push(drift_with(step, &mut replay(col), spec, k_tilde, states, &bank)?);
    }
    Ok(EnergyTransferReport {
        dynamics_modulus: modulus,
        inflation,
        k_tilde,
        reference,
        others: reports,
    })
}

/// Growth shape of the maximum information gain with unit leading constant:
/// `d ln T` (linear), `ln^{d+1} T` (RBF) and
/// `T^{d/(2nu+d)} ln^{2nu/(2nu+d)} T` (Matérn).
pub fn gamma_t_asymptote(family: KernelFamily, t: f64, d: usize) -> Result<f64> {
    if !(t >= 2.0) {
        return Err(invalid("T", "must be at least 2"));
    }
    if d == 0 {
        return Err(invalid("d", "must be at least 1"));
    }
    let l = t.ln();
    let d = d as f64;
    Ok(match family {
        KernelFamily::Linear => d * l,
        KernelFamily::Rbf => l.powf(d + 1.0),
        _ => {
            let nu = family.nu().expect("Matérn family");
            let den = 2.0 * nu + d;
            t.powf(d / den) * l.powf(2.0 * nu / den)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OffsetMoment {
    pub episode: usize,
    pub offset: usize,
    pub mean_v: f64,
    pub half_width: f64,
    pub envelope: f64,
    pub within: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentReport {
    pub nu: f64,
    pub nu_below_one: bool,
    pub seeds: usize,
    pub offsets: Vec<OffsetMoment>,
    pub all_within: bool,
}

/// Compares the seed-averaged `V` at every within-episode offset `k` with
/// `gamma^k E[V(x_0)] + K / (1 - gamma)`.
pub fn check_moment_bounds(logs: &[RunLog<f64>], spec: &LyapunovSpec, h0: usize) -> Result<MomentReport> {
    if !(spec.gamma > 0.0 && spec.gamma < 1.0) {
        return Err(invalid("gamma", "must lie in (0, 1)"));
    }
    spec.validate()?;
    if logs.len() < 2 {
        return Err(Error::Precondition(format!("need at least 2 seeds, got {}", logs.len())));
    }
    let len = logs[0].steps.len();
    for l in logs {
        check_dim(len, l.steps.len(), "log length")?;
        check_dim(len, l.data.len(), "log transitions")?;
    }
    let seeds = logs.len() as f64;
    let mut offsets = Vec::new();
    let mut start = 0usize;
    while start < len {
        let ep = logs[0].steps[start].episode;
        let mut end = start;
        while end < len && logs[0].steps[end].episode == ep {
            end += 1;
        }
        let mut v0 = 0.0;
        for (k, t) in (start..end).enumerate() {
            let vs: Vec<f64> = logs
                .iter()
                .map(|l| spec.energy(&l.data.as_slice()[t].state))
                .collect::<Result<_>>()?;
            let mean = vs.iter().sum::<f64>() / seeds;
            let var = vs.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (seeds - 1.0);
            let hw = 3.0 * (var / seeds).sqrt();
            if k == 0 {
                v0 = mean;
            }
            let envelope = spec.gamma.powi(k as i32) * v0 + spec.k / (1.0 - spec.gamma);
            offsets.push(OffsetMoment {
                episode: ep,
                offset: k,
                mean_v: mean,
                half_width: hw,
                envelope,
                within: mean - hw <= envelope * (1.0 + 1e-12),
            });
        }
        start = end;
    }
    let nu = spec.nu(h0);
    Ok(MomentReport {
        nu,
        nu_below_one: nu < 1.0,
        seeds: logs.len(),
        all_within: offsets.iter().all(|o| o.within),
        offsets,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SublinearityReport {
    pub checkpoints: Vec<usize>,
    /// `R_t / t` at each checkpoint.
    pub ratios: Vec<f64>,
    pub sublinear: bool,
}

/// `R_t / t` at `T/8, T/4, T/2, T`, where `regret[t - 1]` is `R_t`; sublinear
/// means strictly decreasing.
pub fn check_sublinearity(regret: &[f64]) -> Result<SublinearityReport> {
    let total = regret.len();
    if total < 8 {
        return Err(Error::Precondition(format!("need at least 8 points, got {total}")));
    }
    let checkpoints = vec![total / 8, total / 4, total / 2, total];
    let ratios: Vec<f64> = checkpoints.iter().map(|&t| regret[t - 1] / t as f64).collect();
    let sublinear = ratios.windows(2).all(|w| w[1] < w[0]);
    Ok(SublinearityReport {
        checkpoints,
        ratios,
        sublinear,
    })
}
