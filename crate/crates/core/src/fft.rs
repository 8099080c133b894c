//! Thin wrappers around rustfft: cached plans, spectral derivative,
//! Fourier multiplier steps.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

#[derive(Clone)]
pub struct FftPair {
    pub n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl FftPair {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        FftPair {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn forward(&self, data: &mut [Complex64]) {
        self.forward.process(data);
    }

    /// Inverse transform including the 1/n normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.inverse.process(data);
        let s = 1.0 / self.n as f64;
        for v in data.iter_mut() {
            *v *= s;
        }
    }
}

/// Signed frequency of FFT bin m for a grid of n points spanning [-L, L):
/// z_m = pi * m' / L with m' = m for m <= n/2, m - n otherwise.
pub fn frequency(m: usize, n: usize, half_width: f64) -> f64 {
    let m_signed = if m <= n / 2 { m as isize } else { m as isize - n as isize };
    std::f64::consts::PI * m_signed as f64 / half_width
}

/// Spectral derivative on the periodic grid.
pub fn spectral_derivative(values: &[Complex64], half_width: f64) -> Vec<Complex64> {
    let n = values.len();
    let pair = FftPair::new(n);
    let mut buf = values.to_vec();
    pair.forward(&mut buf);
    for (m, v) in buf.iter_mut().enumerate() {
        // Zero the (unpaired) Nyquist mode for an odd operator.
        let z = if n.is_multiple_of(2) && m == n / 2 {
            0.0
        } else {
            frequency(m, n, half_width)
        };
        *v *= Complex64::new(0.0, z);
    }
    pair.inverse(&mut buf);
    buf
}

/// Apply a diagonal-in-frequency multiplier `g(z)` to samples in place.
pub fn apply_multiplier(
    pair: &FftPair,
    values: &mut [Complex64],
    half_width: f64,
    g: impl Fn(f64) -> Complex64,
) {
    pair.forward(values);
    let n = values.len();
    for (m, v) in values.iter_mut().enumerate() {
        *v *= g(frequency(m, n, half_width));
    }
    pair.inverse(values);
}
