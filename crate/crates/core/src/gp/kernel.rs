use serde::{Deserialize, Serialize};

use crate::error::{check_dim, invalid, Result};
use crate::scalar::{dot, sq_dist, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelFamily {
    Rbf,
    Linear,
    /// Matérn with smoothness 1/2.
    Matern12,
    /// Matérn with smoothness 3/2.
    Matern32,
    /// Matérn with smoothness 5/2.
    Matern52,
}

impl KernelFamily {
    /// Matérn smoothness, `None` for the other families.
    pub fn nu(self) -> Option<f64> {
        match self {
            KernelFamily::Matern12 => Some(0.5),
            KernelFamily::Matern32 => Some(1.5),
            KernelFamily::Matern52 => Some(2.5),
            _ => None,
        }
    }
}

/// Kernel family plus hyperparameters.
///
/// All families are evaluated on inputs divided by the lengthscale; a single
/// lengthscale entry is broadcast over every input dimension. The linear
/// kernel is `signal_variance * z^T z'` on the scaled inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelSpec<T> {
    pub family: KernelFamily,
    pub lengthscale: Vec<T>,
    pub signal_variance: T,
}

impl<T: Scalar> KernelSpec<T> {
    pub fn new(family: KernelFamily, lengthscale: T, signal_variance: T) -> Self {
        Self {
            family,
            lengthscale: vec![lengthscale],
            signal_variance,
        }
    }

    pub fn rbf(lengthscale: T, signal_variance: T) -> Self {
        Self::new(KernelFamily::Rbf, lengthscale, signal_variance)
    }

    pub fn linear() -> Self {
        Self::new(KernelFamily::Linear, T::one(), T::one())
    }

    pub fn with_lengthscales(mut self, ls: Vec<T>) -> Self {
        self.lengthscale = ls;
        self
    }

    pub fn validate(&self, input_dim: usize) -> Result<()> {
        if self.lengthscale.is_empty() {
            return Err(invalid("lengthscale", "at least one entry required"));
        }
        if self.lengthscale.len() != 1 {
            check_dim(input_dim, self.lengthscale.len(), "kernel lengthscales")?;
        }
        if self.lengthscale.iter().any(|l| !(*l > T::zero()) || !l.is_finite()) {
            return Err(invalid("lengthscale", "must be positive and finite"));
        }
        if !(self.signal_variance > T::zero()) {
            return Err(invalid("signal_variance", "must be positive"));
        }
        Ok(())
    }

    #[inline]
    pub fn lengthscale_at(&self, i: usize) -> T {
        if self.lengthscale.len() == 1 {
            self.lengthscale[0]
        } else {
            self.lengthscale[i]
        }
    }

    /// Divides `z` by the lengthscale into `out`.
    #[inline]
    pub fn scale_into(&self, z: &[T], out: &mut [T]) {
        for (i, (o, v)) in out.iter_mut().zip(z).enumerate() {
            *o = *v / self.lengthscale_at(i);
        }
    }

    pub fn scaled(&self, z: &[T]) -> Vec<T> {
        let mut out = vec![T::zero(); z.len()];
        self.scale_into(z, &mut out);
        out
    }

    /// Kernel value on lengthscale-scaled inputs.
    #[inline]
    pub fn eval_scaled(&self, a: &[T], b: &[T]) -> T {
        let s = self.signal_variance;
        match self.family {
            KernelFamily::Linear => s * dot(a, b),
            KernelFamily::Rbf => s * (-T::of(0.5) * sq_dist(a, b)).exp(),
            KernelFamily::Matern12 => {
                let r = sq_dist(a, b).sqrt();
                s * (-r).exp()
            }
            KernelFamily::Matern32 => {
                let r = T::of(3f64.sqrt()) * sq_dist(a, b).sqrt();
                s * (T::one() + r) * (-r).exp()
            }
            KernelFamily::Matern52 => {
                let r2 = sq_dist(a, b);
                let r = T::of(5f64.sqrt()) * r2.sqrt();
                s * (T::one() + r + T::of(5.0 / 3.0) * r2) * (-r).exp()
            }
        }
    }

    /// `k(z, z)` on a scaled input.
    #[inline]
    pub fn diag_scaled(&self, a: &[T]) -> T {
        match self.family {
            KernelFamily::Linear => self.signal_variance * dot(a, a),
            _ => self.signal_variance,
        }
    }
}

/// Evaluates `k(z, z')` with input validation.
pub fn kernel_eval<T: Scalar>(k: &KernelSpec<T>, z: &[T], z2: &[T]) -> Result<T> {
    check_dim(z.len(), z2.len(), "kernel arguments")?;
    k.validate(z.len())?;
    Ok(k.eval_scaled(&k.scaled(z), &k.scaled(z2)))
}
