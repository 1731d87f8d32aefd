use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum EpisodeSchedule {
    /// Episodes of length `h0 * 2^n`, model refit at each boundary.
    Doubling { h0: usize },
    /// Refit every `h` steps.
    Fixed { h: usize },
}

impl EpisodeSchedule {
    pub fn validate(&self) -> Result<()> {
        match *self {
            EpisodeSchedule::Doubling { h0: 0 } => Err(invalid("h0", "must be at least 1")),
            EpisodeSchedule::Fixed { h: 0 } => Err(invalid("h", "must be at least 1")),
            _ => Ok(()),
        }
    }

    /// Episode lengths covering exactly `total` steps.
    pub fn episodes(&self, total: usize) -> Result<Vec<usize>> {
        self.validate()?;
        Ok(match *self {
            EpisodeSchedule::Doubling { h0 } => doubling_schedule(h0, total)?,
            EpisodeSchedule::Fixed { h } => {
                let mut v = vec![h; total / h];
                if total % h != 0 {
                    v.push(total % h);
                }
                v
            }
        })
    }
}

/// Smallest integer `h >= 1` with `h > ln(c_upper / c_lower) / ln(1 / gamma)`.
pub fn compute_h0(c_upper: f64, c_lower: f64, gamma: f64) -> Result<usize> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(invalid("gamma", format!("must lie in (0, 1), got {gamma}")));
    }
    if !(c_lower > 0.0) {
        return Err(invalid("c_lower", "must be positive"));
    }
    if !(c_upper > c_lower) {
        return Err(invalid("c_upper", "must exceed c_lower"));
    }
    let r = (c_upper / c_lower).ln() / (1.0 / gamma).ln();
    Ok((r.floor() as usize + 1).max(1))
}

/// `h0, 2 h0, 4 h0, ...` with the last episode truncated to sum to `total`.
pub fn doubling_schedule(h0: usize, total: usize) -> Result<Vec<usize>> {
    if h0 == 0 {
        return Err(invalid("h0", "must be at least 1"));
    }
    let mut out = Vec::new();
    let mut left = total;
    let mut h = h0;
    while left > 0 {
        let len = h.min(left);
        out.push(len);
        left -= len;
        h = h.saturating_mul(2);
    }
    Ok(out)
}
