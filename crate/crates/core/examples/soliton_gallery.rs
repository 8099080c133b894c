//! Closed-form soliton solutions: the one-soliton family, its blow-up
//! lattice, a two-soliton and an oscillating pair, with finite-difference
//! residuals of the equation as a self-check.
//!
//!     cargo run --release --example soliton_gallery

use nnls_ist::grid::Sigma;
use nnls_ist::soliton::{blowup_times, multi_soliton, one_soliton, soliton_pde_residual};
use nnls_ist::spectrum::DiscreteSpectrum;
use num_complex::Complex64;

fn main() {
    let g1 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2);
    let g2 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6);
    println!("one-soliton, heights (1/2, -1/4), phases (pi/2, pi/6)");
    for &(x, t) in &[(0.0, 0.0), (1.0, 0.0), (0.0, 2.0)] {
        let v = one_soliton(0.5, -0.25, g1, g2, x, t);
        println!("  q({x:>4}, {t:>4}) = {:+.6} {:+.6}i   |q| = {:.6}", v.q.re, v.q.im, v.q.norm());
    }
    let ts = blowup_times(0.5, -0.25, g1, g2, 0, 3).unwrap();
    println!("  blow-up lattice t_n = {ts:.5?}");

    println!("\ntwo imaginary pairs:");
    let mut two = DiscreteSpectrum::empty(Sigma::Focusing);
    two.rho1 = vec![0.5, 0.9];
    two.rho2 = vec![-0.25, -0.7];
    two.gamma1 = vec![Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -1.0)];
    two.gamma2 = vec![Complex64::from_polar(1.0, 2.0), Complex64::from_polar(1.0, 0.9)];
    for &(x, t) in &[(0.0, 0.0), (-1.5, 0.6), (2.0, -1.0)] {
        let v = multi_soliton(&two, x, t).unwrap();
        let r = soliton_pde_residual(&two, x, t, 1e-3).unwrap_or(f64::NAN);
        println!("  q({x:>4}, {t:>4}) = {:+.6} {:+.6}i   eq residual {r:.2e}", v.q.re, v.q.im);
    }

    println!("\noscillating pair (zeta, -conj(zeta)):");
    let mut osc = DiscreteSpectrum::empty(Sigma::Focusing);
    osc.zeta1 = vec![Complex64::new(-0.4, 0.45)];
    osc.zeta2 = vec![Complex64::new(-0.4, -0.35)];
    osc.eta1 = vec![Complex64::new(0.8, 0.3)];
    osc.eta2 = vec![Complex64::new(-0.2, 1.1)];
    for &(x, t) in &[(0.0, 0.0), (3.0, 1.0), (-3.0, 1.0)] {
        let v = multi_soliton(&osc, x, t).unwrap();
        println!("  q({x:>4}, {t:>4}) = {:+.6} {:+.6}i   pole: {}", v.q.re, v.q.im, v.pole);
    }
}
