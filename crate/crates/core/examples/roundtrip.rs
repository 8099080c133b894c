//! Direct transform followed by the inverse (Riemann-Hilbert) transform at
//! t = 0: the initial profile is reproduced from its scattering data.
//!
//!     cargo run --release --example roundtrip

use nnls_ist::cauchy::CauchyOps;
use nnls_ist::direct::scattering_table;
use nnls_ist::grid::{Grid1d, Sigma};
use nnls_ist::params;
use nnls_ist::profiles;
use nnls_ist::rh::{build_jump, reconstruct_q, solve_mu, SolveMode};
use num_complex::Complex64;

fn main() {
    let grid = Grid1d::new(30.0, 7680).unwrap();
    let q0 = profiles::gaussian(Sigma::Focusing, grid, Complex64::new(0.2, 0.1));
    let sd = scattering_table(&q0, 24.0, 4096).unwrap();
    println!(
        "scattered: sup|r| = {:.4}, det residual {:.2e}",
        sd.sup_r(),
        sd.det_relation_residual()
    );
    let refl = sd.reflection_pair().zero_padded(params::SOLVER_PAD).unwrap();
    let ops = CauchyOps::new(refl.kgrid);
    println!("\n  x      |q0(x)|        |q_rec(x)|     error");
    let mut worst: f64 = 0.0;
    for &x in &[0.0, 0.5, 1.0, 2.0, 3.0, 5.0] {
        let jd = build_jump(&refl, x, 0.0);
        let ms = solve_mu(&ops, &jd, SolveMode::Neumann).unwrap();
        let q = reconstruct_q(&ms, &jd);
        let exact = q0.values[grid.index_of(x)];
        let err = (q - exact).norm();
        worst = worst.max(err);
        println!("  {x:<5}  {:<13.10}  {:<13.10}  {err:.2e}", exact.norm(), q.norm());
    }
    println!("\nworst probe error: {worst:.3e}");
}
