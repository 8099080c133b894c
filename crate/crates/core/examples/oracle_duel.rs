//! Cross-validation of the two solution routes: the IST/RH pipeline against
//! direct split-step integration on small initial data.
//!
//!     cargo run --release --example oracle_duel

use nnls_ist::direct::scattering_table;
use nnls_ist::grid::{Grid1d, Sigma};
use nnls_ist::pde::split_step_at;
use nnls_ist::profiles;
use nnls_ist::regularize::solve_field;
use nnls_ist::rh::SolveMode;
use num_complex::Complex64;

fn main() {
    let grid = Grid1d::new(30.0, 7680).unwrap();
    let q0 = profiles::gaussian(Sigma::Focusing, grid, Complex64::new(0.1, 0.0));
    let t_list = [0.1, 0.25, 0.5];

    let traj = split_step_at(&q0, 5e-4, &t_list).unwrap();
    let sd = scattering_table(&q0, 24.0, 4096).unwrap();
    let x_probe: Vec<f64> = (0..grid.n).step_by(grid.n / 64).map(|j| grid.point(j)).collect();
    let ist = solve_field(&sd.reflection_pair(), None, &x_probe, &t_list, SolveMode::Neumann).unwrap();

    println!("  t      Linf(IST - split-step) over {} probes", x_probe.len());
    for (j, &t) in t_list.iter().enumerate() {
        let pde_field = traj.field_at(t).unwrap();
        let mut worst: f64 = 0.0;
        for (i, &x) in x_probe.iter().enumerate() {
            let (q_ist, _) = ist.at(i, j);
            worst = worst.max((q_ist - pde_field[grid.index_of(x)]).norm());
        }
        println!("  {t:<5}  {worst:.3e}");
    }
}
