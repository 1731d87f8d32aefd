//! Independent reference implementations used as test oracles.
#![allow(dead_code)]

use nalgebra::{DMatrix, DVector};
use neorl::gp::KernelFamily;
use neorl::RandomStream;

/// Kernel written out from its textbook formula, independent of the crate.
pub fn kernel_ref(family: KernelFamily, ls: f64, sig: f64, a: &[f64], b: &[f64]) -> f64 {
    let r2: f64 = a.iter().zip(b).map(|(x, y)| ((x - y) / ls).powi(2)).sum();
    let r = r2.sqrt();
    match family {
        KernelFamily::Linear => sig * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>() / (ls * ls),
        KernelFamily::Rbf => sig * (-r2 / 2.0).exp(),
        KernelFamily::Matern12 => sig * (-r).exp(),
        KernelFamily::Matern32 => sig * (1.0 + 3f64.sqrt() * r) * (-(3f64.sqrt()) * r).exp(),
        KernelFamily::Matern52 => {
            sig * (1.0 + 5f64.sqrt() * r + 5.0 * r2 / 3.0) * (-(5f64.sqrt()) * r).exp()
        }
    }
}

pub fn gram(family: KernelFamily, ls: f64, sig: f64, zs: &[Vec<f64>]) -> DMatrix<f64> {
    let n = zs.len();
    DMatrix::from_fn(n, n, |i, j| kernel_ref(family, ls, sig, &zs[i], &zs[j]))
}

/// Posterior mean/variance through an explicit dense inverse of
/// `K + noise I`.
pub struct DenseGp {
    family: KernelFamily,
    ls: f64,
    sig: f64,
    zs: Vec<Vec<f64>>,
    inv: DMatrix<f64>,
    ys: Vec<DVector<f64>>,
}

impl DenseGp {
    pub fn new(family: KernelFamily, ls: f64, sig: f64, noise: f64, zs: &[Vec<f64>], ys: &[Vec<f64>]) -> Self {
        let n = zs.len();
        let k = gram(family, ls, sig, zs) + DMatrix::identity(n, n) * noise;
        let inv = k.try_inverse().expect("invertible");
        let dout = ys.first().map_or(0, |y| y.len());
        let ys = (0..dout)
            .map(|j| DVector::from_iterator(n, ys.iter().map(|y| y[j])))
            .collect();
        Self {
            family,
            ls,
            sig,
            zs: zs.to_vec(),
            inv,
            ys,
        }
    }

    pub fn predict(&self, z: &[f64]) -> (Vec<f64>, f64) {
        let kn = DVector::from_iterator(
            self.zs.len(),
            self.zs.iter().map(|zi| kernel_ref(self.family, self.ls, self.sig, zi, z)),
        );
        let w = &self.inv * &kn;
        let mean = self.ys.iter().map(|y| w.dot(y)).collect();
        let var = kernel_ref(self.family, self.ls, self.sig, z, z) - kn.dot(&w);
        (mean, var)
    }
}

/// `1/2 sum ln(1 + lambda_i / noise)` from a symmetric eigendecomposition.
pub fn info_gain_eigen(family: KernelFamily, ls: f64, sig: f64, noise: f64, zs: &[Vec<f64>]) -> f64 {
    if zs.is_empty() {
        return 0.0;
    }
    let eig = gram(family, ls, sig, zs).symmetric_eigen();
    eig.eigenvalues
        .iter()
        .map(|l| 0.5 * (1.0 + l.max(0.0) / noise).ln())
        .sum()
}

pub fn random_points(rng: &mut RandomStream, n: usize, d: usize, half_width: f64) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| half_width * (2.0 * rng.uniform() - 1.0)).collect())
        .collect()
}

/// Draws one joint sample of a zero-mean GP with the given Gram matrix.
pub fn sample_gp(rng: &mut RandomStream, k: &DMatrix<f64>) -> Vec<f64> {
    let n = k.nrows();
    let jittered = k + DMatrix::identity(n, n) * 1e-9;
    let l = jittered.cholesky().expect("psd").l();
    let eps = DVector::from_iterator(n, (0..n).map(|_| rng.standard_normal()));
    (l * eps).iter().copied().collect()
}
