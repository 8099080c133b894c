#![allow(clippy::needless_range_loop)]

//! Numerical inverse-scattering toolkit for the nonlocal nonlinear
//! Schrodinger equation
//!
//!   i q_t + q_xx + 2 sigma q^2(x,t) conj(q(-x,t)) = 0,  sigma = +-1,
//!
//! solved globally in time through the associated Riemann-Hilbert problem.
//! The pipeline is: direct transform (Jost marching) -> discrete spectrum
//! (zero search + norming constants) -> regular RH solve (Cauchy projectors
//! on a uniform k grid) -> Blaschke-factor dressing that restores the
//! solitonic part and exposes the blow-up set -> reconstruction of q(x,t)
//! at any (x,t) off that set, including past blow-up times. A split-step
//! integrator and exact soliton formulas serve as independent oracles.

pub mod cauchy;
pub mod cli;
pub mod conserve;
pub mod direct;
pub mod error;
pub mod fft;
pub mod grid;
pub mod linalg;
pub mod params;
pub mod pde;
pub mod profiles;
pub mod regularize;
pub mod rh;
pub mod soliton;
pub mod spectrum;
