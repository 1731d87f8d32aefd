//! Exact GP posterior with one shared factor of `K_n + noise * I` and one
//! weight vector per output dimension.

use crate::error::{check_dim, invalid, Error, Result};
use crate::gp::kernel::KernelSpec;
use crate::linalg::Cholesky;
use crate::scalar::{dot, Scalar};

#[derive(Debug, Clone)]
pub struct GpPosterior<T> {
    kernel: KernelSpec<T>,
    noise_variance: T,
    input_dim: usize,
    output_dim: usize,
    n: usize,
    /// Lengthscale-scaled training inputs, `n x input_dim` row-major.
    inputs: Vec<T>,
    chol: Option<Cholesky<T>>,
    /// `(K_n + noise I)^{-1} y_j`, one row of length `n` per output.
    alpha: Vec<T>,
}

/// Scratch space reused across predictions.
#[derive(Debug, Clone, Default)]
pub struct PredictScratch<T> {
    kstar: Vec<T>,
    v: Vec<T>,
    scaled: Vec<T>,
}

/// Queries per block in [`GpPosterior::predict_batch_raw`].
const BATCH_BLOCK: usize = 64;

impl<T: Scalar> GpPosterior<T> {
    /// The prior: zero mean, variance `k(z, z)`.
    pub fn prior(kernel: KernelSpec<T>, noise_variance: T, input_dim: usize, output_dim: usize) -> Result<Self> {
        kernel.validate(input_dim)?;
        if !(noise_variance > T::zero()) {
            return Err(invalid("noise_variance", "must be positive"));
        }
        Ok(Self {
            kernel,
            noise_variance,
            input_dim,
            output_dim,
            n: 0,
            inputs: Vec::new(),
            chol: None,
            alpha: Vec::new(),
        })
    }

    /// Conditions on `(inputs[i], targets[i])` pairs.
    pub fn fit(
        inputs: &[Vec<T>],
        targets: &[Vec<T>],
        kernel: KernelSpec<T>,
        noise_variance: T,
        input_dim: usize,
        output_dim: usize,
    ) -> Result<Self> {
        check_dim(inputs.len(), targets.len(), "inputs vs targets")?;
        let mut gp = Self::prior(kernel, noise_variance, input_dim, output_dim)?;
        let n = inputs.len();
        if n == 0 {
            return Ok(gp);
        }
        let mut scaled = vec![T::zero(); n * input_dim];
        for (i, z) in inputs.iter().enumerate() {
            check_dim(input_dim, z.len(), "training input")?;
            gp.kernel
                .scale_into(z, &mut scaled[i * input_dim..(i + 1) * input_dim]);
        }
        for y in targets {
            check_dim(output_dim, y.len(), "training target")?;
        }
        let mut gram = vec![T::zero(); n * n];
        for i in 0..n {
            let zi = &scaled[i * input_dim..(i + 1) * input_dim];
            for j in 0..=i {
                let zj = &scaled[j * input_dim..(j + 1) * input_dim];
                let v = gp.kernel.eval_scaled(zi, zj);
                gram[i * n + j] = v;
                gram[j * n + i] = v;
            }
            gram[i * n + i] += noise_variance;
        }
        let chol = Cholesky::factor(&gram, n)?;
        let mut alpha = Vec::with_capacity(output_dim * n);
        for j in 0..output_dim {
            let y: Vec<T> = targets.iter().map(|t| t[j]).collect();
            alpha.extend(chol.solve(&y));
        }
        if !alpha.iter().all(|a| a.is_finite()) {
            return Err(Error::Factorization {
                jitters: vec![chol.jitter()],
            });
        }
        gp.n = n;
        gp.inputs = scaled;
        gp.chol = Some(chol);
        gp.alpha = alpha;
        Ok(gp)
    }

    pub fn kernel(&self) -> &KernelSpec<T> {
        &self.kernel
    }

    pub fn noise_variance(&self) -> T {
        self.noise_variance
    }

    pub fn input_dim(&self) -> usize {
        self.input_dim
    }

    pub fn output_dim(&self) -> usize {
        self.output_dim
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn cholesky(&self) -> Option<&Cholesky<T>> {
        self.chol.as_ref()
    }

    /// Posterior mean into `mean` and, if requested, posterior variance of
    /// the latent function (shared by all outputs) as the return value.
    #[inline]
    pub fn predict_raw(
        &self,
        z: &[T],
        mean: &mut [T],
        want_var: bool,
        scratch: &mut PredictScratch<T>,
    ) -> T {
        let d = self.input_dim;
        let n = self.n;
        scratch.scaled.resize(d, T::zero());
        self.kernel.scale_into(z, &mut scratch.scaled);
        let zs = &scratch.scaled;
        let prior_var = self.kernel.diag_scaled(zs);
        if n == 0 {
            mean.iter_mut().for_each(|m| *m = T::zero());
            return prior_var;
        }
        scratch.kstar.resize(n, T::zero());
        for (i, k) in scratch.kstar.iter_mut().enumerate() {
            *k = self.kernel.eval_scaled(zs, &self.inputs[i * d..(i + 1) * d]);
        }
        for (j, m) in mean.iter_mut().enumerate() {
            *m = dot(&scratch.kstar, &self.alpha[j * n..(j + 1) * n]);
        }
        if !want_var {
            return T::zero();
        }
        scratch.v.clear();
        scratch.v.extend_from_slice(&scratch.kstar);
        let chol = self.chol.as_ref().expect("fitted posterior has a factor");
        chol.solve_lower_in_place(&mut scratch.v);
        (prior_var - dot(&scratch.v, &scratch.v)).max(T::zero())
    }

    /// Batched [`GpPosterior::predict_raw`] over `count` queries stored
    /// row-major in `zs`. Writes `count x output_dim` means and, if `var`
    /// is given, `count` latent variances. Results equal the single-query
    /// path exactly.
    pub fn predict_batch_raw(
        &self,
        zs: &[T],
        count: usize,
        mean: &mut [T],
        mut var: Option<&mut [T]>,
        scratch: &mut PredictScratch<T>,
    ) {
        let (d, n, dout) = (self.input_dim, self.n, self.output_dim);
        debug_assert_eq!(zs.len(), count * d);
        scratch.scaled.resize(count * d, T::zero());
        for b in 0..count {
            self.kernel
                .scale_into(&zs[b * d..(b + 1) * d], &mut scratch.scaled[b * d..(b + 1) * d]);
        }
        if n == 0 {
            mean[..count * dout].iter_mut().for_each(|m| *m = T::zero());
            if let Some(v) = var {
                for b in 0..count {
                    v[b] = self.kernel.diag_scaled(&scratch.scaled[b * d..(b + 1) * d]);
                }
            }
            return;
        }
        let chol = self.chol.as_ref().expect("fitted posterior has a factor");
        let mut start = 0;
        while start < count {
            let w = BATCH_BLOCK.min(count - start);
            let zb = &scratch.scaled[start * d..(start + w) * d];
            scratch.kstar.resize(n * w, T::zero());
            for i in 0..n {
                let xi = &self.inputs[i * d..(i + 1) * d];
                let row = &mut scratch.kstar[i * w..(i + 1) * w];
                for (b, k) in row.iter_mut().enumerate() {
                    *k = self.kernel.eval_scaled(&zb[b * d..(b + 1) * d], xi);
                }
            }
            for j in 0..dout {
                let a = &self.alpha[j * n..(j + 1) * n];
                for b in 0..w {
                    mean[(start + b) * dout + j] = T::zero();
                }
                for (i, ai) in a.iter().enumerate() {
                    let row = &scratch.kstar[i * w..(i + 1) * w];
                    for (b, k) in row.iter().enumerate() {
                        mean[(start + b) * dout + j] += *k * *ai;
                    }
                }
            }
            if let Some(v) = var.as_deref_mut() {
                scratch.v.clear();
                scratch.v.extend_from_slice(&scratch.kstar);
                chol.solve_lower_multi_in_place(&mut scratch.v, w);
                let out = &mut v[start..start + w];
                out.iter_mut().for_each(|o| *o = T::zero());
                for i in 0..n {
                    for (o, x) in out.iter_mut().zip(&scratch.v[i * w..(i + 1) * w]) {
                        *o += *x * *x;
                    }
                }
                for (b, o) in out.iter_mut().enumerate() {
                    let prior = self.kernel.diag_scaled(&zb[b * d..(b + 1) * d]);
                    *o = (prior - *o).max(T::zero());
                }
            }
            start += w;
        }
    }

    /// Posterior mean per output and standard deviation per output.
    pub fn predict(&self, z: &[T]) -> Result<(Vec<T>, Vec<T>)> {
        check_dim(self.input_dim, z.len(), "query input")?;
        let mut mean = vec![T::zero(); self.output_dim];
        let var = self.predict_raw(z, &mut mean, true, &mut PredictScratch::default());
        Ok((mean, vec![var.sqrt(); self.output_dim]))
    }

    pub fn predict_batch(&self, zs: &[Vec<T>]) -> Result<Vec<(Vec<T>, Vec<T>)>> {
        let mut flat = Vec::with_capacity(zs.len() * self.input_dim);
        for z in zs {
            check_dim(self.input_dim, z.len(), "query input")?;
            flat.extend_from_slice(z);
        }
        let dout = self.output_dim;
        let mut mean = vec![T::zero(); zs.len() * dout];
        let mut var = vec![T::zero(); zs.len()];
        self.predict_batch_raw(&flat, zs.len(), &mut mean, Some(&mut var), &mut PredictScratch::default());
        Ok(mean
            .chunks(dout.max(1))
            .zip(var)
            .map(|(m, v)| (m.to_vec(), vec![v.sqrt(); dout]))
            .collect())
    }

    /// Latent posterior variance at `z`.
    pub fn variance(&self, z: &[T]) -> Result<T> {
        check_dim(self.input_dim, z.len(), "query input")?;
        let mut mean = vec![T::zero(); self.output_dim];
        Ok(self.predict_raw(z, &mut mean, true, &mut PredictScratch::default()))
    }

    /// `1/2 ln det(I + K_n / noise)` of the conditioning set, read off the
    /// existing factor.
    pub fn information_gain(&self) -> T {
        match &self.chol {
            None => T::zero(),
            Some(c) => {
                let half = T::of(0.5);
                (half * (c.log_det() - T::of_usize(self.n) * self.noise_variance.ln())).max(T::zero())
            }
        }
    }
}
