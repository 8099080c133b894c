//! Direct scattering transform of a sech profile: spectral functions on
//! the k grid, identity residuals, and the exact Gamma-function values for
//! comparison at a few points.
//!
//!     cargo run --release --example scatter_profile

use nnls_ist::direct::{jost_limits, scattering_table, JostBranch};
use nnls_ist::grid::{Grid1d, Sigma};
use nnls_ist::profiles;
use num_complex::Complex64;

fn main() {
    let grid = Grid1d::new(30.0, 15360).unwrap();
    let amp = 0.3;
    let q0 = profiles::sech(Sigma::Focusing, grid, Complex64::new(amp, 0.0));
    println!("profile: {amp} sech(x), L1 norm = {:.6}", q0.norm_l1());

    let sd = scattering_table(&q0, 24.0, 2048).unwrap();
    println!("winding number          : {}", sd.winding);
    println!("determinant residual    : {:.3e}", sd.det_relation_residual());
    println!("conjugate-symmetry      : {:.3e}", sd.symmetry_residual());
    println!("sup |r_j|               : {:.6}", sd.sup_r());

    println!("\n  k        a1(k)                    b(k)");
    for &k in &[0.0, 0.5, 1.0, 2.0, 4.0] {
        let (a1, b) = jost_limits(&q0, Complex64::new(k, 0.0), JostBranch::Plus13).unwrap();
        println!("  {k:<5}  {:>11.8} {:+.8}i   {:>11.8} {:+.8}i", a1.re, a1.im, b.re, b.im);
    }
    // a1(0) = cos(pi A) for the real even sech potential
    let (a10, _) = jost_limits(&q0, Complex64::new(0.0, 0.0), JostBranch::Plus13).unwrap();
    println!(
        "\na1(0) = {:.10} vs cos(pi A) = {:.10}",
        a10.re,
        (std::f64::consts::PI * amp).cos()
    );
}
