//! Information gain `1/2 ln det(I + K / noise)` and its greedy maximiser.

use crate::error::{check_dim, invalid, Error, Result};
use crate::gp::kernel::KernelSpec;
use crate::linalg::Cholesky;
use crate::scalar::Scalar;

fn check_noise<T: Scalar>(noise_variance: T) -> Result<()> {
    if noise_variance > T::zero() && noise_variance.is_finite() {
        Ok(())
    } else {
        Err(invalid("noise_variance", "must be positive"))
    }
}

/// Information gain of observing the latent function at `points`.
pub fn information_gain<T: Scalar>(points: &[Vec<T>], k: &KernelSpec<T>, noise_variance: T) -> Result<T> {
    check_noise(noise_variance)?;
    let n = points.len();
    if n == 0 {
        return Ok(T::zero());
    }
    let d = points[0].len();
    k.validate(d)?;
    let scaled: Vec<Vec<T>> = points
        .iter()
        .map(|p| {
            check_dim(d, p.len(), "information gain point")?;
            Ok(k.scaled(p))
        })
        .collect::<Result<_>>()?;
    let mut a = vec![T::zero(); n * n];
    for i in 0..n {
        for j in 0..=i {
            let v = k.eval_scaled(&scaled[i], &scaled[j]) / noise_variance;
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
        a[i * n + i] += T::one();
    }
    let c = Cholesky::factor(&a, n)?;
    Ok(T::of(0.5) * c.log_det())
}

/// Result of greedy subset selection.
#[derive(Debug, Clone, PartialEq)]
pub struct GreedySelection<T> {
    /// Chosen candidate indices in pick order.
    pub indices: Vec<usize>,
    pub gain: T,
}

/// Greedily picks `budget` candidates, each time the one with the largest
/// posterior variance given the points already picked. By the chain rule
/// for the log-determinant this is the largest marginal information gain.
pub fn greedy_select<T: Scalar>(
    candidates: &[Vec<T>],
    budget: usize,
    k: &KernelSpec<T>,
    noise_variance: T,
) -> Result<GreedySelection<T>> {
    check_noise(noise_variance)?;
    if candidates.is_empty() {
        return Err(Error::Empty("greedy selection needs candidates"));
    }
    if budget > candidates.len() {
        return Err(invalid(
            "budget",
            format!("{budget} exceeds {} candidates", candidates.len()),
        ));
    }
    let d = candidates[0].len();
    k.validate(d)?;
    let scaled: Vec<Vec<T>> = candidates
        .iter()
        .map(|c| {
            check_dim(d, c.len(), "greedy candidate")?;
            Ok(k.scaled(c))
        })
        .collect::<Result<_>>()?;
    let n = candidates.len();
    let mut residual: Vec<T> = scaled.iter().map(|z| k.diag_scaled(z)).collect();
    // Row m holds the m-th column of the partial factor, one entry per candidate.
    let mut factor: Vec<Vec<T>> = Vec::with_capacity(budget);
    let mut picked = vec![false; n];
    let mut indices = Vec::with_capacity(budget);
    let mut gain = T::zero();
    let half = T::of(0.5);
    for _ in 0..budget {
        let mut best = usize::MAX;
        let mut best_val = T::neg_infinity();
        for i in 0..n {
            if !picked[i] && residual[i] > best_val {
                best = i;
                best_val = residual[i];
            }
        }
        let r = best_val.max(T::zero());
        gain += half * (T::one() + r / noise_variance).ln();
        picked[best] = true;
        indices.push(best);
        let pivot = (r + noise_variance).sqrt();
        let mut col = vec![T::zero(); n];
        for i in 0..n {
            if picked[i] && i != best {
                continue;
            }
            let mut c = k.eval_scaled(&scaled[i], &scaled[best]);
            for row in &factor {
                c -= row[i] * row[best];
            }
            col[i] = c / pivot;
        }
        for i in 0..n {
            if !picked[i] {
                residual[i] -= col[i] * col[i];
            }
        }
        factor.push(col);
    }
    Ok(GreedySelection { indices, gain })
}

/// Information gain of the greedily built `budget`-subset of `candidates`.
pub fn greedy_max_info_gain<T: Scalar>(
    candidates: &[Vec<T>],
    budget: usize,
    k: &KernelSpec<T>,
    noise_variance: T,
) -> Result<T> {
    Ok(greedy_select(candidates, budget, k, noise_variance)?.gain)
}
