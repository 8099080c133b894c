//! Initial-profile constructors used by the CLI and the test suites.

use num_complex::Complex64;
use rand::Rng;

use crate::error::Result;
use crate::grid::{Grid1d, Potential, Sigma};
use crate::soliton::{multi_soliton, one_soliton};
use crate::spectrum::DiscreteSpectrum;

pub fn gaussian(sigma: Sigma, grid: Grid1d, amplitude: Complex64) -> Potential {
    Potential::from_fn(sigma, grid, |x| amplitude * (-x * x).exp())
}

pub fn sech(sigma: Sigma, grid: Grid1d, amplitude: Complex64) -> Potential {
    Potential::from_fn(sigma, grid, |x| amplitude / x.cosh())
}

/// One-soliton profile at t = 0.
pub fn one_soliton_profile(
    grid: Grid1d,
    rho1: f64,
    rho2: f64,
    gamma1: Complex64,
    gamma2: Complex64,
) -> Potential {
    Potential::from_fn(Sigma::Focusing, grid, |x| {
        one_soliton(rho1, rho2, gamma1, gamma2, x, 0.0).q
    })
}

/// Reflectionless multisoliton profile at t = 0.
pub fn multi_soliton_profile(grid: Grid1d, ds: &DiscreteSpectrum) -> Result<Potential> {
    let mut values = Vec::with_capacity(grid.n);
    for j in 0..grid.n {
        values.push(multi_soliton(ds, grid.point(j), 0.0)?.q);
    }
    Potential::new(ds.sigma, grid, values)
}

/// Soliton profile plus a Gaussian bump of (complex) amplitude eps.
pub fn soliton_plus_gaussian(
    grid: Grid1d,
    rho1: f64,
    rho2: f64,
    gamma1: Complex64,
    gamma2: Complex64,
    eps: Complex64,
) -> Potential {
    Potential::from_fn(Sigma::Focusing, grid, |x| {
        one_soliton(rho1, rho2, gamma1, gamma2, x, 0.0).q + eps * (-x * x).exp()
    })
}

/// Random superposition of one to three Gaussian bumps; used by the
/// randomized property suites. `parity` of 0 leaves the profile generic,
/// +1 symmetrizes, -1 antisymmetrizes.
pub fn random_bumps(
    sigma: Sigma,
    grid: Grid1d,
    rng: &mut impl Rng,
    parity: i32,
) -> Potential {
    let n_bumps = rng.gen_range(1..=3);
    let mut bumps = Vec::new();
    for _ in 0..n_bumps {
        let amp = Complex64::from_polar(
            rng.gen_range(0.05..0.4),
            rng.gen_range(0.0..std::f64::consts::TAU),
        );
        let center = rng.gen_range(-2.0..2.0);
        let width = rng.gen_range(0.6..2.0);
        bumps.push((amp, center, width));
    }
    let f = move |x: f64| -> Complex64 {
        bumps
            .iter()
            .map(|(a, c, w)| a * (-((x - c) / w).powi(2)).exp())
            .sum()
    };
    Potential::from_fn(sigma, grid, move |x| match parity {
        1 => 0.5 * (f(x) + f(-x)),
        -1 => 0.5 * (f(x) - f(-x)),
        _ => f(x),
    })
}
