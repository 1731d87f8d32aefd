//! Gaussian noise with power spectral density `1 / f^exponent` along time.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use crate::rng::RandomStream;

/// Generator for unit-variance power-law noise sequences of fixed length.
pub struct ColoredNoise {
    len: usize,
    scale: Vec<f64>,
    sigma: f64,
    fft: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
}

impl ColoredNoise {
    pub fn new(exponent: f64, len: usize) -> Self {
        assert!(len >= 1);
        let half = len / 2 + 1;
        let fmin = 1.0 / len as f64;
        let scale: Vec<f64> = (0..half)
            .map(|k| (k as f64 / len as f64).max(fmin).powf(-exponent / 2.0))
            .collect();
        let mut w: Vec<f64> = scale[1..].to_vec();
        if let Some(last) = w.last_mut() {
            *last *= (1 + len % 2) as f64 / 2.0;
        }
        let sigma = if w.is_empty() {
            1.0
        } else {
            2.0 * w.iter().map(|v| v * v).sum::<f64>().sqrt() / len as f64
        };
        let fft = FftPlanner::new().plan_fft_inverse(len);
        Self {
            len,
            scale,
            sigma,
            fft,
            buf: vec![Complex::new(0.0, 0.0); len],
        }
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Writes one sequence of length `len` into `out`.
    pub fn sample(&mut self, rng: &mut RandomStream, out: &mut [f64]) {
        let n = self.len;
        if n == 1 {
            out[0] = rng.standard_normal();
            return;
        }
        let half = self.scale.len();
        let sqrt2 = std::f64::consts::SQRT_2;
        for v in self.buf.iter_mut() {
            *v = Complex::new(0.0, 0.0);
        }
        for k in 0..half {
            let mut re = self.scale[k] * rng.standard_normal();
            let mut im = self.scale[k] * rng.standard_normal();
            if k == 0 {
                im = 0.0;
                re *= sqrt2;
            }
            if n % 2 == 0 && k == half - 1 {
                im = 0.0;
                re *= sqrt2;
            }
            self.buf[k] = Complex::new(re, im);
            if k != 0 && (n % 2 == 1 || k != half - 1) {
                self.buf[n - k] = Complex::new(re, -im);
            }
        }
        self.fft.process(&mut self.buf);
        let norm = n as f64 * self.sigma;
        for (o, v) in out.iter_mut().zip(&self.buf) {
            *o = v.re / norm;
        }
    }
}
