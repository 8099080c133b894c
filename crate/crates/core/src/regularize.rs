//! Discrete-spectrum removal by Blaschke-Potapov dressing: the reflection
//! coefficients are multiplied by the Blaschke products so the regular RH
//! problem is pole-free, and the solitonic content returns through a
//! recursive chain of rank-one projectors. The projector discriminants
//! g1 h2 - g2 h1 vanish exactly on the blow-up set; mapping their zeros
//! continues the solution past blow-up times.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::cauchy::CauchyOps;
use crate::direct::SpectralData;
use crate::error::{Error, Result};
use crate::linalg::{nelder_mead_2d, Mat2, ONE, ZERO};
use crate::params;
use crate::rh::{
    build_jump, reconstruct_q, solve_mu, JumpData, MuSolution, ReflectionPair, SolutionField,
    SolveMode,
};
use crate::soliton::{adot1, adot2, alpha_products, FieldValue};
use crate::spectrum::DiscreteSpectrum;

/// Reflection data with the Blaschke products multiplied in, plus the sup
/// norms the small-norm theory cares about.
#[derive(Debug, Clone)]
pub struct RegularizedReflection {
    pub refl: ReflectionPair,
    pub sup_r1: f64,
    pub sup_r2: f64,
    /// True when both sup norms sit below 1 (the small-norm sufficient
    /// condition). The direct solve may still succeed when false.
    pub small_norm: bool,
}

/// r1 -> alpha1 r1, r2 -> alpha2 r2 pointwise on the grid.
pub fn regularize_reflection(
    refl: &ReflectionPair,
    ds: &DiscreteSpectrum,
) -> Result<RegularizedReflection> {
    for z in ds.k1_list().iter().chain(ds.k2_list().iter()) {
        if z.im.abs() < params::ZERO_AXIS_MIN {
            return Err(Error::Invalid(format!(
                "zero {z} is closer than {} to the real axis",
                params::ZERO_AXIS_MIN
            )));
        }
    }
    let n = refl.kgrid.n;
    let mut r1 = Vec::with_capacity(n);
    let mut r2 = Vec::with_capacity(n);
    for j in 0..n {
        let k = Complex64::new(refl.kgrid.point(j), 0.0);
        let (a1, a2) = alpha_products(ds, k);
        r1.push(refl.r1[j] * a1);
        r2.push(refl.r2[j] * a2);
    }
    let out = ReflectionPair { kgrid: refl.kgrid, sigma: refl.sigma, r1, r2 };
    let sup_r1 = out.r1.iter().map(|r| r.norm()).fold(0.0, f64::max);
    let sup_r2 = out.r2.iter().map(|r| r.norm()).fold(0.0, f64::max);
    Ok(RegularizedReflection { refl: out, sup_r1, sup_r2, small_norm: sup_r1 < 1.0 && sup_r2 < 1.0 })
}

/// One dressing stage: the zero pair, the kernel/image vectors, the
/// projector and its discriminant.
#[derive(Debug, Clone)]
pub struct Stage {
    pub k1: Complex64,
    pub k2: Complex64,
    pub g: [Complex64; 2],
    pub h: [Complex64; 2],
    pub p: Mat2,
    pub disc: Complex64,
    pub rel_disc: f64,
}

/// The full dressing chain at one (x,t). When a discriminant vanishes the
/// chain stops at that stage and carries the blow-up flag instead.
#[derive(Debug, Clone)]
pub struct ProjectorChain {
    pub stages: Vec<Stage>,
    pub blowup_stage: Option<usize>,
}

impl ProjectorChain {
    pub fn is_blowup(&self) -> bool {
        self.blowup_stage.is_some()
    }

    /// min over stages of the relative discriminant; zero when flagged.
    pub fn min_rel_disc(&self) -> f64 {
        if self.is_blowup() {
            return 0.0;
        }
        self.stages
            .iter()
            .map(|s| s.rel_disc)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Evaluator of the regular solution M^reg at points off the axis.
pub enum RegularSolve<'a> {
    /// Reflectionless data: M^reg is the identity.
    Reflectionless,
    Solved { ops: &'a CauchyOps, ms: &'a MuSolution, jd: &'a JumpData },
}

impl RegularSolve<'_> {
    pub fn eval(&self, k: Complex64) -> Mat2 {
        match self {
            RegularSolve::Reflectionless => Mat2::identity(),
            RegularSolve::Solved { ops, ms, jd } => crate::rh::eval_m(ops, ms, jd, k),
        }
    }
}

fn projector_from_kernel_image(g: [Complex64; 2], h: [Complex64; 2], d: Complex64) -> Mat2 {
    // ker P = span{g}, im P = span{h}: P = h (g-perp)^T / (g-perp . h)
    let inv = d.finv();
    Mat2::new(
        -h[0] * g[1] * inv,
        h[0] * g[0] * inv,
        -h[1] * g[1] * inv,
        h[1] * g[0] * inv,
    )
}

/// Build the dressing chain at (x,t). Stage m evaluates the partially
/// undressed solution B_{m-1}^{-1}..B_1^{-1} M^reg(k) diag(1, prod ratios)
/// at the m-th zero pair, forms the kernel/image vectors with their
/// exponential phases and tail products, and assembles the projector.
pub fn chain_build(
    reg: &RegularSolve,
    ds: &DiscreteSpectrum,
    x: f64,
    t: f64,
) -> Result<ProjectorChain> {
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let nu1 = ds.nu1_list();
    let nu2 = ds.nu2_list();
    let l = ds.total();
    let mut chain = ProjectorChain { stages: Vec::with_capacity(l), blowup_stage: None };
    for m in 0..l {
        let undressed = |k: Complex64, chain: &ProjectorChain| -> Mat2 {
            let mut v = reg.eval(k);
            let mut ratio = ONE;
            for j in 0..m {
                ratio *= (k - k1[j]) / (k - k2[j]);
            }
            v = v.mul(&Mat2::new(ONE, ZERO, ZERO, ratio));
            // left inverses B_j^{-1} = I + (k1j - k2j)/(k - k1j) P_j,
            // applied in the order B_{m-1}^{-1} ... B_1^{-1}
            for j in 0..m {
                let st = &chain.stages[j];
                let b_inv = Mat2::identity()
                    .add(&st.p.scale((st.k1 - st.k2) / (k - st.k1)));
                v = b_inv.mul(&v);
            }
            v
        };
        let m1 = undressed(k1[m], &chain);
        let m2 = undressed(k2[m], &chain);
        let mut tail1 = ONE;
        let mut tail2 = ONE;
        for s in m + 1..l {
            tail1 *= (k1[m] - k1[s]) / (k1[m] - k2[s]);
            tail2 *= (k2[m] - k2[s]) / (k2[m] - k1[s]);
        }
        let e1 = (Complex64::i() * (2.0 * k1[m] * x + 4.0 * k1[m] * k1[m] * t)).exp();
        let e2 = (-Complex64::i() * (2.0 * k2[m] * x + 4.0 * k2[m] * k2[m] * t)).exp();
        let c1 = nu1[m] * tail1 / adot1(ds, m) * e1;
        let c2 = nu2[m] * tail2 / adot2(ds, m) * e2;
        let col1 = m1.column(0);
        let col2 = m1.column(1);
        let dk = k1[m] - k2[m];
        let g = [dk * col1[0] - c1 * col2[0], dk * col1[1] - c1 * col2[1]];
        let col1b = m2.column(0);
        let col2b = m2.column(1);
        let h = [dk * col2b[0] + c2 * col1b[0], dk * col2b[1] + c2 * col1b[1]];
        let disc = g[0] * h[1] - g[1] * h[0];
        let scale = (g[0].norm_sqr() + g[1].norm_sqr()).sqrt()
            * (h[0].norm_sqr() + h[1].norm_sqr()).sqrt();
        let rel_disc = disc.norm() / scale.max(1e-300);
        if rel_disc < params::DISC_FLOOR {
            chain.blowup_stage = Some(m);
            chain.stages.push(Stage {
                k1: k1[m],
                k2: k2[m],
                g,
                h,
                p: Mat2::identity(),
                disc,
                rel_disc,
            });
            return Ok(chain);
        }
        let p = projector_from_kernel_image(g, h, disc);
        chain.stages.push(Stage { k1: k1[m], k2: k2[m], g, h, p, disc, rel_disc });
    }
    Ok(chain)
}

/// Solitonic part: sum over stages of 2i (k1m - k2m) P12.
pub fn soliton_part(chain: &ProjectorChain) -> FieldValue {
    if chain.is_blowup() {
        return FieldValue::pole();
    }
    let mut q = ZERO;
    for s in &chain.stages {
        q += 2.0 * Complex64::i() * (s.k1 - s.k2) * s.p.m[0][1];
    }
    FieldValue::regular(q)
}

/// Reusable dressed solver: regularized (padded) reflection data plus the
/// discrete spectrum, solving per (x,t) on demand.
pub struct DressedSolver {
    pub ds: DiscreteSpectrum,
    pub refl_reg: ReflectionPair,
    pub reg_report: (f64, f64, bool),
    ops: CauchyOps,
    reflectionless: bool,
    mode: SolveMode,
}

impl DressedSolver {
    pub fn new(refl: &ReflectionPair, ds: &DiscreteSpectrum, mode: SolveMode) -> Result<Self> {
        ds.validate()?;
        let reg = regularize_reflection(refl, ds)?;
        let reflectionless = reg.sup_r1.max(reg.sup_r2) < 1e-14;
        let refl_reg = if reflectionless {
            reg.refl.clone()
        } else {
            reg.refl.zero_padded(params::SOLVER_PAD)?
        };
        let ops = CauchyOps::new(refl_reg.kgrid);
        Ok(DressedSolver {
            ds: ds.clone(),
            refl_reg,
            reg_report: (reg.sup_r1, reg.sup_r2, reg.small_norm),
            ops,
            reflectionless,
            mode,
        })
    }

    fn regular_parts(&self, x: f64, t: f64) -> Result<(Option<(MuSolution, JumpData)>, Complex64)> {
        if self.reflectionless {
            return Ok((None, ZERO));
        }
        let jd = build_jump(&self.refl_reg, x, t);
        let ms = solve_mu(&self.ops, &jd, self.mode)?;
        let q_reg = reconstruct_q(&ms, &jd);
        Ok((Some((ms, jd)), q_reg))
    }

    pub fn chain(&self, x: f64, t: f64) -> Result<ProjectorChain> {
        let (solved, _) = self.regular_parts(x, t)?;
        match &solved {
            None => chain_build(&RegularSolve::Reflectionless, &self.ds, x, t),
            Some((ms, jd)) => chain_build(
                &RegularSolve::Solved { ops: &self.ops, ms, jd },
                &self.ds,
                x,
                t,
            ),
        }
    }

    /// q(x,t) = q_sol(x,t) + q_reg(x,t), with the blow-up flag from the
    /// chain discriminants.
    pub fn reconstruct(&self, x: f64, t: f64) -> Result<FieldValue> {
        let (solved, q_reg) = self.regular_parts(x, t)?;
        let chain = match &solved {
            None => chain_build(&RegularSolve::Reflectionless, &self.ds, x, t)?,
            Some((ms, jd)) => chain_build(
                &RegularSolve::Solved { ops: &self.ops, ms, jd },
                &self.ds,
                x,
                t,
            )?,
        };
        let sol = soliton_part(&chain);
        if sol.pole {
            return Ok(sol);
        }
        Ok(FieldValue::regular(sol.q + q_reg))
    }

    /// M^reg of the regularized problem at (x,t), for residue-freedom probes.
    pub fn eval_m_reg(&self, x: f64, t: f64, k: Complex64) -> Result<Mat2> {
        let (solved, _) = self.regular_parts(x, t)?;
        Ok(match &solved {
            None => Mat2::identity(),
            Some((ms, jd)) => crate::rh::eval_m(&self.ops, ms, jd, k),
        })
    }
}

/// Full reconstruction from spectral data: regularize, solve the regular
/// problem, dress, and sum the parts.
pub fn reconstruct_full(
    sd: &SpectralData,
    ds: &DiscreteSpectrum,
    x: f64,
    t: f64,
) -> Result<FieldValue> {
    DressedSolver::new(&sd.reflection_pair(), ds, SolveMode::Auto)?.reconstruct(x, t)
}

/// Field solve over an (x,t) product grid; each point independent.
pub fn solve_field(
    refl: &ReflectionPair,
    ds: Option<&DiscreteSpectrum>,
    x_list: &[f64],
    t_list: &[f64],
    mode: SolveMode,
) -> Result<SolutionField> {
    let ds = match ds {
        None => return crate::rh::solve_field_regular(refl, x_list, t_list, mode),
        Some(ds) if ds.is_empty() => {
            return crate::rh::solve_field_regular(refl, x_list, t_list, mode)
        }
        Some(ds) => ds,
    };
    let solver = DressedSolver::new(refl, ds, mode)?;
    let points: Vec<(usize, usize)> = (0..x_list.len())
        .flat_map(|i| (0..t_list.len()).map(move |j| (i, j)))
        .collect();
    let vals: Result<Vec<FieldValue>> = points
        .par_iter()
        .map(|&(i, j)| solver.reconstruct(x_list[i], t_list[j]))
        .collect();
    let vals = vals?;
    Ok(SolutionField {
        x_list: x_list.to_vec(),
        t_list: t_list.to_vec(),
        values: vals.iter().map(|v| if v.pole { ZERO } else { v.q }).collect(),
        flags: vals.iter().map(|v| v.pole).collect(),
    })
}

/// A refined blow-up point with diagnostics.
#[derive(Debug, Clone)]
pub struct BlowupPoint {
    pub x: f64,
    pub t: f64,
    /// Relative discriminant after refinement.
    pub residual: f64,
    /// |det| of the Jacobian of (Re D, Im D) at the point; nonzero means
    /// the point is an isolated zero.
    pub jacobian_det: f64,
    pub stage: usize,
}

#[derive(Debug, Clone)]
pub struct BlowupSet {
    pub x_axis: Vec<f64>,
    pub t_axis: Vec<f64>,
    /// Row-major min_m |D_m|/(|g||h|) on the grid.
    pub indicator: Vec<f64>,
    pub points: Vec<BlowupPoint>,
    /// max |x| over accepted points (the band radius when N = 0).
    pub band_radius: f64,
}

fn stage_disc(solver: &DressedSolver, x: f64, t: f64, stage: usize) -> (Complex64, f64) {
    match solver.chain(x, t) {
        Ok(c) if stage < c.stages.len() => (c.stages[stage].disc, c.stages[stage].rel_disc),
        _ => (ZERO, 0.0),
    }
}

/// Evaluate min_m |D_m| on a grid over x_range x t_range, refine candidate
/// cells (indicator dip plus sign change of both components of the
/// arg-min discriminant) by Nelder-Mead, and collect accepted points.
pub fn blowup_map(
    solver: &DressedSolver,
    x_range: (f64, f64),
    t_range: (f64, f64),
    resolution: usize,
) -> Result<BlowupSet> {
    if resolution < 32 {
        return Err(Error::Invalid(format!(
            "blow-up map resolution must be >= 32, got {resolution}"
        )));
    }
    let nx = resolution;
    let nt = resolution;
    let x_axis: Vec<f64> = (0..nx)
        .map(|i| x_range.0 + (x_range.1 - x_range.0) * i as f64 / (nx - 1) as f64)
        .collect();
    let t_axis: Vec<f64> = (0..nt)
        .map(|j| t_range.0 + (t_range.1 - t_range.0) * j as f64 / (nt - 1) as f64)
        .collect();
    // indicator and arg-min stage per grid node
    let cells: Vec<(f64, usize)> = (0..nx * nt)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nt, idx % nt);
            match solver.chain(x_axis[i], t_axis[j]) {
                Ok(c) => {
                    if c.is_blowup() {
                        (0.0, c.blowup_stage.unwrap())
                    } else {
                        let mut best = (f64::INFINITY, 0);
                        for (m, s) in c.stages.iter().enumerate() {
                            if s.rel_disc < best.0 {
                                best = (s.rel_disc, m);
                            }
                        }
                        best
                    }
                }
                Err(_) => (f64::INFINITY, 0),
            }
        })
        .collect();
    let indicator: Vec<f64> = cells.iter().map(|c| c.0).collect();
    // neighborhood median for the dip test
    let median_of = |i: usize, j: usize| -> f64 {
        let mut vals = Vec::new();
        for di in -2i64..=2 {
            for dj in -2i64..=2 {
                let ii = i as i64 + di;
                let jj = j as i64 + dj;
                if ii >= 0 && jj >= 0 && (ii as usize) < nx && (jj as usize) < nt {
                    vals.push(indicator[ii as usize * nt + jj as usize]);
                }
            }
        }
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        vals[vals.len() / 2]
    };
    let mut candidates: Vec<(usize, usize, usize)> = Vec::new();
    for i in 0..nx - 1 {
        for j in 0..nt - 1 {
            let v = indicator[i * nt + j];
            let med = median_of(i, j);
            if v >= 10.0 * med.max(1e-30) {
                continue;
            }
            let stage = cells[i * nt + j].1;
            // sign change of both Re D and Im D across the cell corners
            let corners = [
                stage_disc(solver, x_axis[i], t_axis[j], stage).0,
                stage_disc(solver, x_axis[i + 1], t_axis[j], stage).0,
                stage_disc(solver, x_axis[i], t_axis[j + 1], stage).0,
                stage_disc(solver, x_axis[i + 1], t_axis[j + 1], stage).0,
            ];
            let re_flip = corners.iter().any(|c| c.re > 0.0) && corners.iter().any(|c| c.re < 0.0);
            let im_flip = corners.iter().any(|c| c.im > 0.0) && corners.iter().any(|c| c.im < 0.0);
            if re_flip && im_flip {
                candidates.push((i, j, stage));
            }
        }
    }
    let hx = x_axis[1] - x_axis[0];
    let ht = t_axis[1] - t_axis[0];
    let refined: Vec<Option<BlowupPoint>> = candidates
        .par_iter()
        .map(|&(i, j, stage)| {
            let objective =
                |x: f64, t: f64| -> f64 { stage_disc(solver, x, t, stage).1 };
            let start = (
                0.5 * (x_axis[i] + x_axis[i + 1]),
                0.5 * (t_axis[j] + t_axis[j + 1]),
            );
            let ((x, t), val) =
                nelder_mead_2d(objective, start, 0.5 * hx.max(ht), 1e-12, 400);
            if val >= 1e-8 {
                return None;
            }
            // Jacobian of (Re D, Im D) by central differences
            let step = 1e-5;
            let dx = (stage_disc(solver, x + step, t, stage).0
                - stage_disc(solver, x - step, t, stage).0)
                / (2.0 * step);
            let dt = (stage_disc(solver, x, t + step, stage).0
                - stage_disc(solver, x, t - step, stage).0)
                / (2.0 * step);
            let jac = (dx.re * dt.im - dt.re * dx.im).abs();
            // normalize like the discriminant itself
            let scale = {
                let c = solver.chain(x, t).ok()?;
                let s = c.stages.get(stage)?;
                ((s.g[0].norm_sqr() + s.g[1].norm_sqr()).sqrt()
                    * (s.h[0].norm_sqr() + s.h[1].norm_sqr()).sqrt())
                .max(1e-300)
            };
            Some(BlowupPoint { x, t, residual: val, jacobian_det: jac / scale, stage })
        })
        .collect();
    let mut points: Vec<BlowupPoint> = Vec::new();
    let dedupe = 10.0 * hx.hypot(ht) * 1e-3 + 1e-6;
    for p in refined.into_iter().flatten() {
        if !points
            .iter()
            .any(|q| (q.x - p.x).hypot(q.t - p.t) < dedupe.max(0.05 * hx.hypot(ht)))
        {
            points.push(p);
        }
    }
    points.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
    let band_radius = points.iter().map(|p| p.x.abs()).fold(0.0, f64::max);
    Ok(BlowupSet { x_axis, t_axis, indicator, points, band_radius })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{Grid1d, Sigma};
    use crate::profiles;
    use crate::soliton::one_soliton;
    use rand::{Rng, SeedableRng};

    fn reference_pair() -> DiscreteSpectrum {
        DiscreteSpectrum::one_pair(
            0.5,
            -0.25,
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6),
        )
    }

    #[test]
    fn empty_spectrum_is_identity_map() {
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let mut refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        for j in 0..kgrid.n {
            let k = kgrid.point(j);
            refl.r1[j] = Complex64::new(0.2 * (-k * k / 3.0).exp(), 0.0);
            refl.r2[j] = Complex64::new(0.0, 0.15 * (-k * k / 4.0).exp());
        }
        let ds = DiscreteSpectrum::empty(Sigma::Focusing);
        let reg = regularize_reflection(&refl, &ds).unwrap();
        for j in 0..kgrid.n {
            assert_eq!(reg.refl.r1[j], refl.r1[j]);
            assert_eq!(reg.refl.r2[j], refl.r2[j]);
        }
        // reconstruction with the empty spectrum equals the regular path
        let solver = DressedSolver::new(&refl, &ds, SolveMode::Neumann).unwrap();
        let v = solver.reconstruct(0.4, 0.1).unwrap();
        let padded = refl.zero_padded(params::SOLVER_PAD).unwrap();
        let ops = CauchyOps::new(padded.kgrid);
        let jd = build_jump(&padded, 0.4, 0.1);
        let ms = solve_mu(&ops, &jd, SolveMode::Neumann).unwrap();
        let q = reconstruct_q(&ms, &jd);
        assert!((v.q - q).norm() < 1e-14, "paths differ {}", (v.q - q).norm());
    }

    #[test]
    fn reflectionless_chain_matches_one_soliton() {
        let ds = reference_pair();
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        let solver = DressedSolver::new(&refl, &ds, SolveMode::Auto).unwrap();
        for &(x, t) in &[(0.0, 0.0), (1.0, 0.5), (-2.0, 1.7), (0.3, 2.0), (5.0, -1.0)] {
            let chain = solver.chain(x, t).unwrap();
            assert_eq!(chain.stages.len(), 1);
            assert!(!chain.is_blowup());
            let v = solver.reconstruct(x, t).unwrap();
            let exact = one_soliton(
                0.5,
                -0.25,
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
                Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6),
                x,
                t,
            );
            assert!(
                (v.q - exact.q).norm() < 1e-8,
                "chain vs closed form at ({x},{t}): {}",
                (v.q - exact.q).norm()
            );
        }
    }

    #[test]
    fn discriminant_flag_at_blowup() {
        let ds = reference_pair();
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        let solver = DressedSolver::new(&refl, &ds, SolveMode::Auto).unwrap();
        let t0 = 8.0 * std::f64::consts::PI / 9.0;
        let chain = solver.chain(0.0, t0).unwrap();
        assert!(chain.is_blowup(), "rel disc {}", chain.min_rel_disc());
        let v = solver.reconstruct(0.0, t0).unwrap();
        assert!(v.pole);
        // slightly off the blow-up point the field is regular again
        let v2 = solver.reconstruct(0.05, t0).unwrap();
        assert!(!v2.pole);
    }

    #[test]
    fn projector_identities_hold() {
        let mut ds = DiscreteSpectrum::empty(Sigma::Focusing);
        ds.rho1 = vec![0.5, 0.9];
        ds.rho2 = vec![-0.25, -0.7];
        ds.gamma1 = vec![Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -1.0)];
        ds.gamma2 = vec![Complex64::from_polar(1.0, 2.0), Complex64::from_polar(1.0, 0.9)];
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        let solver = DressedSolver::new(&refl, &ds, SolveMode::Auto).unwrap();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
        let mut checked = 0;
        while checked < 25 {
            let x = rng.gen_range(-4.0..4.0);
            let t = rng.gen_range(-2.0..2.0);
            let chain = solver.chain(x, t).unwrap();
            if chain.is_blowup() {
                continue;
            }
            for s in &chain.stages {
                let pp = s.p.mul(&s.p);
                assert!(pp.sub(&s.p).max_abs() < 1e-10, "P^2 != P at ({x},{t})");
                let pg = s.p.mul_vec(s.g);
                assert!(
                    pg[0].norm().max(pg[1].norm()) < 1e-10 * (s.g[0].norm() + s.g[1].norm()),
                    "P g != 0"
                );
                let ph = s.p.mul_vec(s.h);
                let dev = (ph[0] - s.h[0]).norm().max((ph[1] - s.h[1]).norm());
                assert!(dev < 1e-10 * (s.h[0].norm() + s.h[1].norm()), "P h != h");
            }
            checked += 1;
        }
    }

    #[test]
    fn ordering_invariance_of_full_field() {
        let mut ds = DiscreteSpectrum::empty(Sigma::Focusing);
        ds.rho1 = vec![0.5, 0.9];
        ds.rho2 = vec![-0.25, -0.7];
        ds.gamma1 = vec![Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -1.0)];
        ds.gamma2 = vec![Complex64::from_polar(1.0, 2.0), Complex64::from_polar(1.0, 0.9)];
        let mut ds_swapped = ds.clone();
        ds_swapped.rho1.swap(0, 1);
        ds_swapped.rho2.swap(0, 1);
        ds_swapped.gamma1.swap(0, 1);
        ds_swapped.gamma2.swap(0, 1);
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        let a = DressedSolver::new(&refl, &ds, SolveMode::Auto).unwrap();
        let b = DressedSolver::new(&refl, &ds_swapped, SolveMode::Auto).unwrap();
        for &(x, t) in &[(0.3, 0.2), (-1.0, 0.8), (2.0, -0.5)] {
            let va = a.reconstruct(x, t).unwrap();
            let vb = b.reconstruct(x, t).unwrap();
            assert!(
                (va.q - vb.q).norm() < 1e-7,
                "ordering changed q by {}",
                (va.q - vb.q).norm()
            );
        }
    }

    #[test]
    fn blowup_map_finds_the_lattice() {
        let ds = reference_pair();
        let kgrid = Grid1d::new(12.0, 256).unwrap();
        let refl = ReflectionPair::zero(kgrid, Sigma::Focusing);
        let solver = DressedSolver::new(&refl, &ds, SolveMode::Auto).unwrap();
        let t0 = 8.0 * std::f64::consts::PI / 9.0;
        let spacing = 8.0 * std::f64::consts::PI / 3.0;
        let set = blowup_map(&solver, (-1.5, 1.5), (0.0, 12.0), 48).unwrap();
        assert_eq!(set.points.len(), 2, "points: {:?}", set.points);
        for (n, p) in set.points.iter().enumerate() {
            let tn = t0 + spacing * n as f64;
            assert!(p.x.abs() < 1e-5, "x = {}", p.x);
            assert!((p.t - tn).abs() < 1e-5, "t = {} vs {}", p.t, tn);
            assert!(p.residual < 1e-8);
            assert!(p.jacobian_det > 1e-6, "Jacobian {}", p.jacobian_det);
        }
        assert!(set.band_radius < 1e-5);
        // empty spectrum: empty set
        let ds0 = DiscreteSpectrum::empty(Sigma::Focusing);
        let solver0 = DressedSolver::new(&refl, &ds0, SolveMode::Auto).unwrap();
        let set0 = blowup_map(&solver0, (-1.0, 1.0), (0.0, 5.0), 32).unwrap();
        assert!(set0.points.is_empty());
    }

    #[test]
    fn on_axis_blaschke_modulus() {
        // |alpha_1(k)| = 1 on the real axis only in the degenerate case
        // rho1 = -rho2; the general M-only claim fails pointwise.
        let sym = DiscreteSpectrum::one_pair(
            0.5,
            -0.5,
            Complex64::from_polar(1.0, 0.3),
            Complex64::from_polar(1.0, 0.9),
        );
        let asym = reference_pair();
        for &k in &[0.0, 0.3, 1.0, -2.0] {
            let (a1s, a2s) = alpha_products(&sym, Complex64::new(k, 0.0));
            assert!((a1s.norm() - 1.0).abs() < 1e-12);
            assert!((a1s * a2s - ONE).norm() < 1e-12);
        }
        let (a1a, _) = alpha_products(&asym, Complex64::new(0.0, 0.0));
        assert!((a1a.norm() - 1.0).abs() > 0.5, "|alpha1(0)| = {}", a1a.norm());
    }

    #[test]
    fn full_pipeline_perturbed_soliton_roundtrip() {
        // scatter a perturbed soliton profile, recover the spectrum, and
        // reconstruct the initial data through the dressed solve
        let grid = Grid1d::new(48.0, 12288).unwrap();
        let g1 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2);
        let g2 = Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6);
        let p = profiles::soliton_plus_gaussian(grid, 0.5, -0.25, g1, g2, Complex64::new(0.05, 0.0));
        let sd = crate::direct::scattering_table(&p, 12.0, 1024).unwrap();
        assert_eq!(sd.winding, 0);
        let rect_up = crate::direct::Rect { re_lo: -2.0, re_hi: 2.0, im_lo: 0.05, im_hi: 2.0 };
        let nup = crate::direct::count_zeros(&p, &rect_up, crate::direct::HalfPlane::Upper).unwrap();
        assert_eq!(nup, 1);
        let zu = crate::direct::locate_zeros(&p, 1, crate::direct::HalfPlane::Upper, &rect_up).unwrap();
        let rect_lo = crate::direct::Rect { re_lo: -2.0, re_hi: 2.0, im_lo: -2.0, im_hi: -0.05 };
        let zl = crate::direct::locate_zeros(&p, 1, crate::direct::HalfPlane::Lower, &rect_lo).unwrap();
        let ds = crate::direct::norming_data(&p, &zu, &zl).unwrap();
        let solver = DressedSolver::new(&sd.reflection_pair(), &ds, SolveMode::Auto).unwrap();
        assert!(solver.reg_report.2, "small-norm condition should hold");
        let mut worst: f64 = 0.0;
        for &x in &[0.0, 0.5, -1.0, 2.0, -3.5] {
            let v = solver.reconstruct(x, 0.0).unwrap();
            let exact = p.values[grid.index_of(x)];
            worst = worst.max((v.q - exact).norm());
        }
        println!("perturbed-soliton round trip worst {worst:.3e}");
        assert!(worst < 1e-5, "round trip error {worst}");
        // residue freedom: M^reg is regular near the removed zeros
        for &z in &[zu[0], zl[0]] {
            let m1 = solver.eval_m_reg(0.5, 0.0, z + Complex64::new(1e-3, 0.0)).unwrap();
            let m2 = solver.eval_m_reg(0.5, 0.0, z + Complex64::new(2e-3, 0.0)).unwrap();
            let growth = (m1.max_abs() / m2.max_abs()).ln() / (0.5f64).ln();
            assert!(growth.abs() < 0.1, "growth exponent {growth} near {z}");
        }
        // trace formula holds with the measured pole factors
        let trace = crate::direct::trace_formula_residual(&p, &sd, &ds).unwrap();
        assert!(trace < 1e-3, "trace residual {trace}");
        // the regularized data solves in direct mode as well (unpadded
        // grid keeps the dense system small)
        let reg = regularize_reflection(&sd.reflection_pair(), &ds).unwrap();
        assert!(reg.small_norm);
        let ops_d = CauchyOps::new(reg.refl.kgrid);
        let jd_d = build_jump(&reg.refl, 0.4, 0.3);
        let ms_d = solve_mu(&ops_d, &jd_d, SolveMode::Direct).unwrap();
        assert!(ms_d.residual < 1e-9, "direct residual {}", ms_d.residual);
        // blow-up points persist under the perturbation, displaced by
        // O(eps) and inside the band
        let t0 = 8.0 * std::f64::consts::PI / 9.0;
        let set = blowup_map(&solver, (-0.8, 0.8), (t0 - 0.8, t0 + 0.8), 32).unwrap();
        assert_eq!(set.points.len(), 1, "points {:?}", set.points);
        let pt = &set.points[0];
        assert!(pt.x.abs() < 0.1 && (pt.t - t0).abs() < 0.3, "({}, {})", pt.x, pt.t);
        assert!(set.band_radius < 0.5);
        println!("perturbed blow-up point at ({:.5}, {:.5})", pt.x, pt.t);
        // at large |x| the field approaches the soliton built from the
        // measured norming data (the multisoliton formula with supplied
        // da/dk); the deviation decays monotonically
        let mut prev = f64::INFINITY;
        for &x in &[3.0, 5.0, 7.0] {
            let v = solver.reconstruct(x, 1.0).unwrap();
            let asym = crate::soliton::multi_soliton(&ds, x, 1.0).unwrap();
            let dev = (v.q - asym.q).norm();
            assert!(dev < prev, "asymptote deviation not decaying: {dev} at x = {x}");
            prev = dev;
        }
    }
}
