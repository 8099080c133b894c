//! Symmetric uniform grids and sampled potentials.
//!
//! Both the spatial and the spectral grid use the periodic convention
//! `x_j = -L + j h`, `j = 0..n`, `h = 2L/n`, so that reflection `x -> -x`
//! is the exact index permutation `j -> (n - j) mod n`. The right endpoint
//! `+L` is identified with `-L`; decayed data vanishes at both.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fft;

/// Coupling sign of the equation: +1 focusing, -1 defocusing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Sigma {
    Focusing,
    Defocusing,
}

impl Sigma {
    pub fn value(self) -> f64 {
        match self {
            Sigma::Focusing => 1.0,
            Sigma::Defocusing => -1.0,
        }
    }

    pub fn from_value(v: f64) -> Result<Self> {
        if v == 1.0 {
            Ok(Sigma::Focusing)
        } else if v == -1.0 {
            Ok(Sigma::Defocusing)
        } else {
            Err(Error::Invalid(format!("sigma must be +1 or -1, got {v}")))
        }
    }
}

/// Uniform symmetric grid on [-half_width, half_width).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1d {
    pub half_width: f64,
    pub n: usize,
}

impl Grid1d {
    pub fn new(half_width: f64, n: usize) -> Result<Self> {
        if half_width <= 0.0 || n < 8 || !n.is_multiple_of(2) {
            return Err(Error::Invalid(format!(
                "grid requires half_width > 0 and even n >= 8, got ({half_width}, {n})"
            )));
        }
        Ok(Grid1d { half_width, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.n as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        -self.half_width + j as f64 * self.spacing()
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.point(j)).collect()
    }

    /// Index of the reflected point -x_j.
    pub fn reflect(&self, j: usize) -> usize {
        (self.n - j) % self.n
    }

    /// Index of x = 0.
    pub fn center(&self) -> usize {
        self.n / 2
    }

    /// Nearest grid index to x (clamped).
    pub fn index_of(&self, x: f64) -> usize {
        let j = ((x + self.half_width) / self.spacing()).round() as isize;
        j.clamp(0, self.n as isize - 1) as usize
    }
}

/// Sampled initial profile q0 together with the coupling sign.
#[derive(Debug, Clone)]
pub struct Potential {
    pub sigma: Sigma,
    pub grid: Grid1d,
    pub values: Vec<Complex64>,
}

impl Potential {
    pub fn new(sigma: Sigma, grid: Grid1d, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n {
            return Err(Error::Invalid(format!(
                "potential sample count {} does not match grid size {}",
                values.len(),
                grid.n
            )));
        }
        Ok(Potential { sigma, grid, values })
    }

    pub fn from_fn(sigma: Sigma, grid: Grid1d, f: impl Fn(f64) -> Complex64) -> Self {
        let values = (0..grid.n).map(|j| f(grid.point(j))).collect();
        Potential { sigma, grid, values }
    }

    /// Endpoint-decay check; most routines call this before integrating.
    pub fn check_decay(&self, tol: f64) -> Result<()> {
        let max_end = self.values[0]
            .norm()
            .max(self.values[self.grid.n - 1].norm());
        if max_end >= tol {
            Err(Error::NonDecayedPotential { max_end, tol })
        } else {
            Ok(())
        }
    }

    /// Sample of the reflected conjugate x -> conj(q(-x)).
    pub fn reflected_conj(&self) -> Vec<Complex64> {
        (0..self.grid.n)
            .map(|j| self.values[self.grid.reflect(j)].conj())
            .collect()
    }

    /// Trapezoid L1 norm (periodic convention: plain sum times h).
    pub fn norm_l1(&self) -> f64 {
        self.values.iter().map(|q| q.norm()).sum::<f64>() * self.grid.spacing()
    }

    pub fn norm_l2(&self) -> f64 {
        (self.values.iter().map(|q| q.norm_sqr()).sum::<f64>() * self.grid.spacing()).sqrt()
    }

    /// Discrete weighted Sobolev norm: ||f||^2 = ||f||_2^2 + ||f'||_2^2 + ||x f||_2^2,
    /// with the derivative taken spectrally.
    pub fn norm_h11(&self) -> f64 {
        let h = self.grid.spacing();
        let df = fft::spectral_derivative(&self.values, self.grid.half_width);
        let l2: f64 = self.values.iter().map(|q| q.norm_sqr()).sum::<f64>() * h;
        let d2: f64 = df.iter().map(|q| q.norm_sqr()).sum::<f64>() * h;
        let x2: f64 = self
            .values
            .iter()
            .enumerate()
            .map(|(j, q)| {
                let x = self.grid.point(j);
                x * x * q.norm_sqr()
            })
            .sum::<f64>()
            * h;
        (l2 + d2 + x2).sqrt()
    }

    /// ||f||_{H^{0,1}}: the L2 norm with the |x|-weighted share,
    /// sqrt(||f||_2^2 + ||x f||_2^2).
    pub fn norm_h01(&self) -> f64 {
        let h = self.grid.spacing();
        let mut acc = 0.0;
        for (j, q) in self.values.iter().enumerate() {
            let x = self.grid.point(j);
            acc += (1.0 + x * x) * q.norm_sqr();
        }
        (acc * h).sqrt()
    }

    /// Rescale amplitudes so that the L1 norm equals `target`.
    pub fn scaled_to_l1(&self, target: f64) -> Potential {
        let cur = self.norm_l1();
        let s = if cur == 0.0 { 0.0 } else { target / cur };
        let values = self.values.iter().map(|q| q * s).collect();
        Potential { sigma: self.sigma, grid: self.grid, values }
    }

    /// Rescale amplitudes so that the H^{1,1} norm equals `target`.
    pub fn scaled_to_h11(&self, target: f64) -> Potential {
        let cur = self.norm_h11();
        let s = if cur == 0.0 { 0.0 } else { target / cur };
        let values = self.values.iter().map(|q| q * s).collect();
        Potential { sigma: self.sigma, grid: self.grid, values }
    }
}
