use serde::{Deserialize, Serialize};

use super::RunLog;
use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

/// Pointwise mean and standard error across seeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeedSummary {
    pub num_seeds: usize,
    pub avg_cost_mean: Vec<f64>,
    pub avg_cost_stderr: Vec<f64>,
    pub regret_mean: Vec<f64>,
    pub regret_stderr: Vec<f64>,
}

/// Mean and `std / sqrt(k)` (sample std) of a set of values; zero spread for
/// a single value.
pub fn mean_stderr(values: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let k = values.clone().count() as f64;
    let mean = values.clone().sum::<f64>() / k;
    if k < 2.0 {
        return (mean, 0.0);
    }
    let var = values.map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0);
    (mean, (var / k).sqrt())
}

pub fn aggregate_seeds<T: Scalar>(logs: &[RunLog<T>]) -> Result<SeedSummary> {
    let first = logs.first().ok_or(Error::Empty("logs"))?;
    let len = first.steps.len();
    for l in logs {
        check_dim(len, l.steps.len(), "log length")?;
    }
    let mut s = SeedSummary {
        num_seeds: logs.len(),
        avg_cost_mean: Vec::with_capacity(len),
        avg_cost_stderr: Vec::with_capacity(len),
        regret_mean: Vec::with_capacity(len),
        regret_stderr: Vec::with_capacity(len),
    };
    for t in 0..len {
        let (m, e) = mean_stderr(logs.iter().map(|l| l.steps[t].avg_cost));
        s.avg_cost_mean.push(m);
        s.avg_cost_stderr.push(e);
        let (m, e) = mean_stderr(logs.iter().map(|l| l.steps[t].regret));
        s.regret_mean.push(m);
        s.regret_stderr.push(e);
    }
    Ok(s)
}
