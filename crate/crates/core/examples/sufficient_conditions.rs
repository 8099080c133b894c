//! The solvability checkers: small-norm thresholds recovered by bisection
//! and the near-soliton condition for a perturbed soliton profile.
//!
//!     cargo run --release --example sufficient_conditions

use nnls_ist::conserve::{bessel_i0, check_near_soliton, check_small_h11, check_small_l1};
use nnls_ist::grid::{Grid1d, Sigma};
use nnls_ist::profiles;
use nnls_ist::spectrum::DiscreteSpectrum;
use num_complex::Complex64;

fn main() {
    let grid = Grid1d::new(20.0, 2048).unwrap();
    let base = profiles::gaussian(Sigma::Focusing, grid, Complex64::new(0.2, 0.0));

    println!("I0(1.064) = {:.6},  I0(1.066) = {:.6}", bessel_i0(1.064), bessel_i0(1.066));
    for s in [0.531, 0.532, 0.533] {
        let r = check_small_l1(&base.scaled_to_l1(s));
        println!("||q0||_L1 = {s}: lhs = {:.6} -> {}", r.lhs, if r.satisfied { "satisfied" } else { "violated" });
    }
    for s in [0.266, 0.267] {
        let r = check_small_h11(&base.scaled_to_h11(s));
        println!("||q0||_H11 = {s}: lhs = {:.6} -> {}", r.lhs, if r.satisfied { "satisfied" } else { "violated" });
    }

    let mut lo = 0.3;
    let mut hi = 0.8;
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if check_small_l1(&base.scaled_to_l1(mid)).satisfied {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    println!("bisected L1 threshold: {:.5}", 0.5 * (lo + hi));

    // near-soliton condition around the reference soliton
    let ds = DiscreteSpectrum::one_pair(
        0.5,
        -0.25,
        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
        Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6),
    );
    let sgrid = Grid1d::new(48.0, 4096).unwrap();
    for eps in [0.0, 1e-10, 1e-6] {
        let p = profiles::soliton_plus_gaussian(
            sgrid,
            0.5,
            -0.25,
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6),
            Complex64::new(eps, 0.0),
        );
        let r = check_near_soliton(&p, &ds).unwrap();
        println!(
            "perturbation {eps:.0e}: lhs = {:.3e} vs d = {:.3} -> {}",
            r.lhs,
            r.threshold,
            if r.satisfied { "satisfied" } else { "violated" }
        );
    }
}
