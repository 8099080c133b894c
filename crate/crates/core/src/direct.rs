//! Direct scattering transform: Jost solutions of the Lax x-equation,
//! spectral functions a1, a2, b, reflection coefficients, zero counting and
//! location, norming constants and the trace-formula cross-check.
//!
//! The x-equation is marched as an ODE in the interaction picture: with
//! w = (psi1, e^{-2ikx} psi3) (left column) or (e^{2ikx} psi2, psi4) (right
//! column) both column pairs satisfy w' = B(x) w with the trace-free matrix
//!
//!   B(x) = [[0, q(x) e^{2ikx}], [-sigma conj(q(-x)) e^{-2ikx}, 0]],
//!
//! so the oscillatory factors enter analytically and the marched quantities
//! stay O(1) on the analyticity strip. Off the strip (|Im k| large) the raw
//! variables are used instead; there the oscillatory mode is exponentially
//! damped in the marching direction and RK4 is accurate without phase
//! extraction.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid1d, Potential, Sigma};
use crate::linalg::{ONE, ZERO};
use crate::params;
use crate::soliton;
use crate::spectrum::DiscreteSpectrum;

/// Which Jost column pair to integrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JostBranch {
    /// (psi1, psi3): analytic for Im k >= 0; limits give (a1, b).
    Plus13,
    /// (psi2, psi4): analytic for Im k <= 0; limits give (-sigma conj(b(-k)), a2).
    Plus24,
}

/// Half-plane selector for zero counting and location.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HalfPlane {
    Upper,
    Lower,
}

/// Axis-aligned rectangle in the complex plane.
#[derive(Debug, Clone, Copy)]
pub struct Rect {
    pub re_lo: f64,
    pub re_hi: f64,
    pub im_lo: f64,
    pub im_hi: f64,
}

impl Rect {
    pub fn center(&self) -> Complex64 {
        Complex64::new(
            0.5 * (self.re_lo + self.re_hi),
            0.5 * (self.im_lo + self.im_hi),
        )
    }

    pub fn diagonal(&self) -> f64 {
        (self.re_hi - self.re_lo).hypot(self.im_hi - self.im_lo)
    }
}

/// Sampled spectral functions on the symmetric k grid.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub kgrid: Grid1d,
    pub sigma: Sigma,
    pub a1: Vec<Complex64>,
    pub a2: Vec<Complex64>,
    pub b: Vec<Complex64>,
    pub r1: Vec<Complex64>,
    pub r2: Vec<Complex64>,
    pub winding: i32,
}

impl SpectralData {
    /// max_k |a1 a2 + sigma b(k) conj(b(-k)) - 1|. The j = 0 sample (k = -K)
    /// has no mirror partner on the periodic grid and is skipped.
    pub fn det_relation_residual(&self) -> f64 {
        let s = self.sigma.value();
        let n = self.kgrid.n;
        (1..n)
            .map(|j| {
                let bm = self.b[self.kgrid.reflect(j)].conj();
                (self.a1[j] * self.a2[j] + s * self.b[j] * bm - ONE).norm()
            })
            .fold(0.0, f64::max)
    }

    /// max_k |conj(a_j(-k)) - a_j(k)| over both spectral functions
    /// (unpaired j = 0 sample skipped).
    pub fn symmetry_residual(&self) -> f64 {
        let n = self.kgrid.n;
        (1..n)
            .map(|j| {
                let m = self.kgrid.reflect(j);
                let r1 = (self.a1[m].conj() - self.a1[j]).norm();
                let r2 = (self.a2[m].conj() - self.a2[j]).norm();
                r1.max(r2)
            })
            .fold(0.0, f64::max)
    }

    pub fn min_abs_a(&self) -> f64 {
        self.a1
            .iter()
            .chain(self.a2.iter())
            .map(|a| a.norm())
            .fold(f64::INFINITY, f64::min)
    }

    pub fn sup_r(&self) -> f64 {
        self.r1
            .iter()
            .chain(self.r2.iter())
            .map(|r| r.norm())
            .fold(0.0, f64::max)
    }
}

/// Precomputed sample arrays for marching; immutable and Sync, shared
/// across k values.
pub struct JostIntegrator<'a> {
    pub pot: &'a Potential,
    q: Vec<Complex64>,
    qr: Vec<Complex64>,
    qm: Vec<Complex64>,
    qrm: Vec<Complex64>,
    h: f64,
}

/// Above this |Im k| the end-to-end marches switch to raw variables: off the
/// real axis the oscillatory mode is damped in the marching direction, while
/// the interaction-picture entries grow like |q(x)| e^{2|Im k||x|}. The
/// norming marches at spectral zeros keep the interaction picture in both
/// directions; there it is the gauge in which both fundamental modes stay
/// polynomially bounded.
const IM_SWITCH: f64 = 0.15;

fn interp_mid(v: &[Complex64], j: usize) -> Complex64 {
    let n = v.len();
    let get = |i: isize| -> Complex64 {
        if i < 0 || i >= n as isize {
            ZERO
        } else {
            v[i as usize]
        }
    };
    let j = j as isize;
    (-get(j - 1) + 9.0 * get(j) + 9.0 * get(j + 1) - get(j + 2)) / 16.0
}

impl<'a> JostIntegrator<'a> {
    pub fn new(pot: &'a Potential) -> Result<Self> {
        pot.check_decay(params::DECAY_TOL)?;
        let n = pot.grid.n;
        let q = pot.values.clone();
        let qr = pot.reflected_conj();
        let qm = (0..n).map(|j| interp_mid(&q, j)).collect();
        let qrm = (0..n).map(|j| interp_mid(&qr, j)).collect();
        Ok(JostIntegrator { pot, q, qr, qm, qrm, h: pot.grid.spacing() })
    }

    #[inline]
    fn sample(&self, j: usize) -> (Complex64, Complex64) {
        if j >= self.q.len() {
            (ZERO, ZERO)
        } else {
            (self.q[j], self.qr[j])
        }
    }

    /// March the interaction-picture pair from grid index `start` to `end`
    /// (either direction; index n denotes the virtual point x = +L).
    fn march_interaction(
        &self,
        k: Complex64,
        start: usize,
        end: usize,
        init: [Complex64; 2],
    ) -> Result<[Complex64; 2]> {
        let sigma = self.pot.sigma.value();
        let grid = &self.pot.grid;
        let up = end >= start;
        let hd = if up { self.h } else { -self.h };
        let x0 = -grid.half_width + start as f64 * self.h;
        // phases e^{+2ikx} and e^{-2ikx}, advanced multiplicatively
        let mut p = (2.0 * Complex64::i() * k * x0).exp();
        let mut pm = (-2.0 * Complex64::i() * k * x0).exp();
        let eh = (Complex64::i() * k * hd).exp(); // half-step factor of p
        let em = (-Complex64::i() * k * hd).exp();
        let guard2 = params::JOST_GUARD * params::JOST_GUARD;
        let (mut u, mut v) = (init[0], init[1]);
        let steps = if up { end - start } else { start - end };
        let mut j = start;
        for _ in 0..steps {
            let (jlo, jmid) = if up { (j, j) } else { (j - 1, j - 1) };
            let jfar = if up { j + 1 } else { j - 1 };
            let (qa, qra) = self.sample(if up { jlo } else { j });
            let (qm_, qrm_) = (self.qm[jmid], self.qrm[jmid]);
            let (qb, qrb) = self.sample(jfar);
            let p1 = p * eh;
            let p2 = p1 * eh;
            let m1 = pm * em;
            let m2 = m1 * em;
            // w' = B(x) w applied at the three stage abscissae
            let f = |qx: Complex64,
                     qrx: Complex64,
                     px: Complex64,
                     mx: Complex64,
                     uu: Complex64,
                     vv: Complex64| {
                (qx * px * vv, -sigma * qrx * mx * uu)
            };
            let (k1u, k1v) = f(qa, qra, p, pm, u, v);
            let (k2u, k2v) = f(qm_, qrm_, p1, m1, u + 0.5 * hd * k1u, v + 0.5 * hd * k1v);
            let (k3u, k3v) = f(qm_, qrm_, p1, m1, u + 0.5 * hd * k2u, v + 0.5 * hd * k2v);
            let (k4u, k4v) = f(qb, qrb, p2, m2, u + hd * k3u, v + hd * k3v);
            u += hd / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += hd / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            p = p2;
            pm = m2;
            j = if up { j + 1 } else { j - 1 };
            let mag = u.norm_sqr() + v.norm_sqr();
            if !mag.is_finite() || mag > guard2 {
                return Err(Error::OverflowGuard {
                    x: -grid.half_width + j as f64 * self.h,
                    guard: params::JOST_GUARD,
                });
            }
        }
        Ok([u, v])
    }

    /// Raw-variable march for |Im k| off the strip; `branch` fixes which
    /// column pair (and hence which diagonal phase) is integrated.
    fn march_raw(
        &self,
        k: Complex64,
        branch: JostBranch,
        init: [Complex64; 2],
    ) -> Result<[Complex64; 2]> {
        let sigma = self.pot.sigma.value();
        let grid = &self.pot.grid;
        let n = grid.n;
        let hd = self.h;
        let two_ik = 2.0 * Complex64::i() * k;
        let guard2 = params::JOST_GUARD * params::JOST_GUARD;
        let (mut u, mut v) = (init[0], init[1]);
        for j in 0..n {
            let (qa, qra) = self.sample(j);
            let (qm_, qrm_) = (self.qm[j], self.qrm[j]);
            let (qb, qrb) = self.sample(j + 1);
            let f = |qx: Complex64, qrx: Complex64, uu: Complex64, vv: Complex64| match branch {
                JostBranch::Plus13 => (qx * vv, -sigma * qrx * uu + two_ik * vv),
                JostBranch::Plus24 => (qx * vv - two_ik * uu, -sigma * qrx * uu),
            };
            let (k1u, k1v) = f(qa, qra, u, v);
            let (k2u, k2v) = f(qm_, qrm_, u + 0.5 * hd * k1u, v + 0.5 * hd * k1v);
            let (k3u, k3v) = f(qm_, qrm_, u + 0.5 * hd * k2u, v + 0.5 * hd * k2v);
            let (k4u, k4v) = f(qb, qrb, u + hd * k3u, v + hd * k3v);
            u += hd / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u);
            v += hd / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
            let mag = u.norm_sqr() + v.norm_sqr();
            if !mag.is_finite() || mag > guard2 {
                return Err(Error::OverflowGuard {
                    x: -grid.half_width + (j + 1) as f64 * self.h,
                    guard: params::JOST_GUARD,
                });
            }
        }
        Ok([u, v])
    }

    /// Large-x limits of the requested column pair; see `jost_limits`.
    pub fn limits(&self, k: Complex64, branch: JostBranch) -> Result<(Complex64, Complex64)> {
        let n = self.pot.grid.n;
        let l = self.pot.grid.half_width;
        match branch {
            JostBranch::Plus13 => {
                if k.im < -1e-12 {
                    return Err(Error::Invalid(format!(
                        "branch plus13 requires Im k >= 0, got k = {k}"
                    )));
                }
                if k.im <= IM_SWITCH {
                    let [u, v] = self.march_interaction(k, 0, n, [ONE, ZERO])?;
                    Ok((u, v))
                } else {
                    let [u, v] = self.march_raw(k, JostBranch::Plus13, [ONE, ZERO])?;
                    // report e^{-2ikL} psi3(L); diverges off the real axis
                    let m = v.norm().ln() + 2.0 * k.im * l;
                    let scaled = if m > 700.0 {
                        Complex64::new(f64::INFINITY, 0.0)
                    } else {
                        v * (-2.0 * Complex64::i() * k * l).exp()
                    };
                    Ok((u, scaled))
                }
            }
            JostBranch::Plus24 => {
                if k.im > 1e-12 {
                    return Err(Error::Invalid(format!(
                        "branch plus24 requires Im k <= 0, got k = {k}"
                    )));
                }
                if k.im >= -IM_SWITCH {
                    let [u, v] = self.march_interaction(k, 0, n, [ZERO, ONE])?;
                    Ok((u, v))
                } else {
                    let [u, v] = self.march_raw(k, JostBranch::Plus24, [ZERO, ONE])?;
                    let m = u.norm().ln() - 2.0 * k.im * l;
                    let scaled = if m > 700.0 {
                        Complex64::new(f64::INFINITY, 0.0)
                    } else {
                        u * (2.0 * Complex64::i() * k * l).exp()
                    };
                    Ok((scaled, v))
                }
            }
        }
    }

    /// a1 (upper) or a2 (lower) at k.
    pub fn a_value(&self, k: Complex64, half: HalfPlane) -> Result<Complex64> {
        match half {
            HalfPlane::Upper => Ok(self.limits(k, JostBranch::Plus13)?.0),
            HalfPlane::Lower => Ok(self.limits(k, JostBranch::Plus24)?.1),
        }
    }

    /// Both column pairs at a real k in one pass: (a1, b, a2).
    pub fn scattering_row(&self, k: f64) -> Result<(Complex64, Complex64, Complex64)> {
        let kk = Complex64::new(k, 0.0);
        let n = self.pot.grid.n;
        let [a1, b] = self.march_interaction(kk, 0, n, [ONE, ZERO])?;
        let [_bb, a2] = self.march_interaction(kk, 0, n, [ZERO, ONE])?;
        Ok((a1, b, a2))
    }

    /// Left column pair (psi1, e^{-2ikx} psi3) marched from -L to grid index j.
    pub fn left_column_at(&self, k: Complex64, j: usize) -> Result<[Complex64; 2]> {
        self.march_interaction(k, 0, j, [ONE, ZERO])
    }

    /// Left-normalized second column (e^{2ikx} psi2, psi4) up to index j.
    pub fn left_column2_at(&self, k: Complex64, j: usize) -> Result<[Complex64; 2]> {
        self.march_interaction(k, 0, j, [ZERO, ONE])
    }

    /// Right-normalized second column marched down from +L to index j.
    pub fn right_column2_at(&self, k: Complex64, j: usize) -> Result<[Complex64; 2]> {
        self.march_interaction(k, self.pot.grid.n, j, [ZERO, ONE])
    }

    /// Right-normalized first column marched down from +L to index j.
    pub fn right_column_at(&self, k: Complex64, j: usize) -> Result<[Complex64; 2]> {
        self.march_interaction(k, self.pot.grid.n, j, [ONE, ZERO])
    }

    /// da/dk by the four-point circle stencil of radius `params::ADOT_RADIUS`.
    pub fn a_derivative(&self, k: Complex64, half: HalfPlane) -> Result<Complex64> {
        let r = params::ADOT_RADIUS;
        let mut acc = ZERO;
        for m in 0..4 {
            let th = std::f64::consts::FRAC_PI_2 * m as f64;
            let dir = Complex64::from_polar(1.0, th);
            acc += self.a_value(k + r * dir, half)? * dir.conj();
        }
        Ok(acc / (4.0 * r))
    }
}

/// Large-x limits of the Jost column pair for the potential `q0`.
///
/// Branch `Plus13` returns (a1(k), b(k)) where the second entry equals the
/// reflection numerator b(k) for real k; branch `Plus24` returns
/// (-sigma conj(b(-k)), a2(k)) likewise.
pub fn jost_limits(
    q0: &Potential,
    k: Complex64,
    branch: JostBranch,
) -> Result<(Complex64, Complex64)> {
    JostIntegrator::new(q0)?.limits(k, branch)
}

/// Full scattering table on the symmetric k grid [-K, K).
pub fn scattering_table(q0: &Potential, k_max: f64, n_k: usize) -> Result<SpectralData> {
    if k_max <= 0.0 || n_k < 64 {
        return Err(Error::Invalid(format!(
            "scattering table requires K > 0 and n_k >= 64, got ({k_max}, {n_k})"
        )));
    }
    let kgrid = Grid1d::new(k_max, n_k)?;
    let integ = JostIntegrator::new(q0)?;
    let rows: Result<Vec<_>> = (0..n_k)
        .into_par_iter()
        .map(|j| integ.scattering_row(kgrid.point(j)))
        .collect();
    let rows = rows?;
    let a1: Vec<Complex64> = rows.iter().map(|r| r.0).collect();
    let b: Vec<Complex64> = rows.iter().map(|r| r.1).collect();
    let a2: Vec<Complex64> = rows.iter().map(|r| r.2).collect();
    let min_a1 = a1.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    let min_a2 = a2.iter().map(|a| a.norm()).fold(f64::INFINITY, f64::min);
    if min_a1 < params::SING_FLOOR {
        return Err(Error::SpectralSingularity { which: 1, min_abs: min_a1, floor: params::SING_FLOOR });
    }
    if min_a2 < params::SING_FLOOR {
        return Err(Error::SpectralSingularity { which: 2, min_abs: min_a2, floor: params::SING_FLOOR });
    }
    let r1: Vec<Complex64> = (0..n_k).map(|j| b[j] / a1[j]).collect();
    let r2: Vec<Complex64> = (0..n_k)
        .map(|j| b[kgrid.reflect(j)].conj() / a2[j])
        .collect();
    // discrete winding of arg(a1 a2) along the real grid
    let mut total = 0.0;
    for j in 1..n_k {
        let prev = a1[j - 1] * a2[j - 1];
        let cur = a1[j] * a2[j];
        total += (cur / prev).arg();
    }
    let winding = (total / (2.0 * std::f64::consts::PI)).round() as i32;
    Ok(SpectralData { kgrid, sigma: q0.sigma, a1, a2, b, r1, r2, winding })
}

fn boundary_samples(rect: &Rect, per_side: usize) -> Vec<Complex64> {
    let mut pts = Vec::with_capacity(4 * per_side);
    let (a, b, c, d) = (rect.re_lo, rect.re_hi, rect.im_lo, rect.im_hi);
    for i in 0..per_side {
        let s = i as f64 / per_side as f64;
        pts.push(Complex64::new(a + s * (b - a), c));
    }
    for i in 0..per_side {
        let s = i as f64 / per_side as f64;
        pts.push(Complex64::new(b, c + s * (d - c)));
    }
    for i in 0..per_side {
        let s = i as f64 / per_side as f64;
        pts.push(Complex64::new(b + s * (a - b), d));
    }
    for i in 0..per_side {
        let s = i as f64 / per_side as f64;
        pts.push(Complex64::new(a, d + s * (c - d)));
    }
    pts
}

/// Argument-principle count of zeros of a1 (upper) or a2 (lower) inside the
/// rectangle, refining the boundary sampling until the winding is within 0.1
/// of an integer multiple of 2 pi.
pub fn count_zeros(q0: &Potential, rect: &Rect, half: HalfPlane) -> Result<usize> {
    let integ = JostIntegrator::new(q0)?;
    count_zeros_with(&integ, rect, half)
}

pub fn count_zeros_with(integ: &JostIntegrator, rect: &Rect, half: HalfPlane) -> Result<usize> {
    let which = if half == HalfPlane::Upper { 1 } else { 2 };
    let mut per_side = 24;
    loop {
        let pts = boundary_samples(rect, per_side);
        let vals: Result<Vec<Complex64>> = pts
            .par_iter()
            .map(|&k| integ.a_value(k, half))
            .collect();
        let vals = vals?;
        let min_abs = vals.iter().map(|v| v.norm()).fold(f64::INFINITY, f64::min);
        if min_abs < params::SING_FLOOR {
            return Err(Error::BoundaryZero { which, min_abs });
        }
        let mut total = 0.0;
        let mut max_inc: f64 = 0.0;
        let n = vals.len();
        for j in 0..n {
            let inc = (vals[(j + 1) % n] / vals[j]).arg();
            max_inc = max_inc.max(inc.abs());
            total += inc;
        }
        let winding = total / (2.0 * std::f64::consts::PI);
        let nearest = winding.round();
        if max_inc < 0.8 && (winding - nearest).abs() * 2.0 * std::f64::consts::PI < 0.1 {
            return Ok(nearest.max(0.0) as usize);
        }
        per_side *= 2;
        if per_side > 3072 {
            return Err(Error::Invalid(format!(
                "zero count on {rect:?} did not stabilize (winding {winding:.4})"
            )));
        }
    }
}

fn newton_zero(
    integ: &JostIntegrator,
    start: Complex64,
    half: HalfPlane,
) -> Result<Complex64> {
    let which = if half == HalfPlane::Upper { 1 } else { 2 };
    let sgn = if half == HalfPlane::Upper { 1.0 } else { -1.0 };
    let d = params::NEWTON_DIFF_STEP;
    let mut z = start;
    let mut last = f64::INFINITY;
    for _ in 0..params::NEWTON_MAX_ITER {
        let a = integ.a_value(z, half)?;
        last = a.norm();
        if last < params::NEWTON_TOL {
            return Ok(z);
        }
        let ap = integ.a_value(z + Complex64::new(d, 0.0), half)?;
        let am = integ.a_value(z - Complex64::new(d, 0.0), half)?;
        let da = (ap - am) / (2.0 * d);
        if da.norm() < 1e-14 {
            break;
        }
        let mut step = a / da;
        // keep iterates inside the half-plane, damping oversized steps
        if step.norm() > 0.5 {
            step *= 0.5 / step.norm();
        }
        z -= step;
        if sgn * z.im < 0.25 * params::ZERO_AXIS_MIN {
            z = Complex64::new(z.re, sgn * 0.25 * params::ZERO_AXIS_MIN);
        }
    }
    Err(Error::NewtonDivergence { which, iters: params::NEWTON_MAX_ITER, last })
}

fn subdivide_collect(
    integ: &JostIntegrator,
    rect: &Rect,
    half: HalfPlane,
    count: usize,
    out: &mut Vec<Complex64>,
) -> Result<()> {
    if count == 0 {
        return Ok(());
    }
    if count == 1 || rect.diagonal() < 0.35 {
        // Newton from the center; fall back to sub-center starts
        let starts = [
            rect.center(),
            Complex64::new(
                rect.re_lo + 0.25 * (rect.re_hi - rect.re_lo),
                rect.im_lo + 0.25 * (rect.im_hi - rect.im_lo),
            ),
            Complex64::new(
                rect.re_lo + 0.75 * (rect.re_hi - rect.re_lo),
                rect.im_lo + 0.75 * (rect.im_hi - rect.im_lo),
            ),
            Complex64::new(
                rect.re_lo + 0.25 * (rect.re_hi - rect.re_lo),
                rect.im_lo + 0.75 * (rect.im_hi - rect.im_lo),
            ),
            Complex64::new(
                rect.re_lo + 0.75 * (rect.re_hi - rect.re_lo),
                rect.im_lo + 0.25 * (rect.im_hi - rect.im_lo),
            ),
        ];
        let mut found = Vec::new();
        for s in starts {
            if found.len() >= count {
                break;
            }
            if let Ok(z) = newton_zero(integ, s, half) {
                if z.re > rect.re_lo - 0.1
                    && z.re < rect.re_hi + 0.1
                    && z.im > rect.im_lo - 0.1
                    && z.im < rect.im_hi + 0.1
                    && !found.iter().any(|f: &Complex64| (f - z).norm() < params::ZERO_DEDUPE)
                {
                    found.push(z);
                }
            }
        }
        out.extend(found);
        return Ok(());
    }
    // quadtree split, jittering the split lines off any zero
    let mut frac = 0.5;
    for _ in 0..4 {
        let rm = rect.re_lo + frac * (rect.re_hi - rect.re_lo);
        let im = rect.im_lo + frac * (rect.im_hi - rect.im_lo);
        let quads = [
            Rect { re_lo: rect.re_lo, re_hi: rm, im_lo: rect.im_lo, im_hi: im },
            Rect { re_lo: rm, re_hi: rect.re_hi, im_lo: rect.im_lo, im_hi: im },
            Rect { re_lo: rect.re_lo, re_hi: rm, im_lo: im, im_hi: rect.im_hi },
            Rect { re_lo: rm, re_hi: rect.re_hi, im_lo: im, im_hi: rect.im_hi },
        ];
        let counts: Result<Vec<usize>> = quads
            .iter()
            .map(|qd| count_zeros_with(integ, qd, half))
            .collect();
        match counts {
            Ok(cs) => {
                if cs.iter().sum::<usize>() != count {
                    frac += 0.07;
                    continue;
                }
                for (qd, c) in quads.iter().zip(cs) {
                    subdivide_collect(integ, qd, half, c, out)?;
                }
                return Ok(());
            }
            Err(Error::BoundaryZero { .. }) => {
                frac += 0.07;
            }
            Err(e) => return Err(e),
        }
    }
    Err(Error::Invalid(format!(
        "could not split {rect:?} without hitting a zero"
    )))
}

/// Locate `count` zeros of a1 (upper) or a2 (lower) inside `rect` by
/// quadtree subdivision plus Newton polishing. Off-axis zeros are paired
/// with their mirror -conj(z) and symmetrized; near-axis zeros are snapped
/// to the imaginary axis.
pub fn locate_zeros(
    q0: &Potential,
    count: usize,
    half: HalfPlane,
    rect: &Rect,
) -> Result<Vec<Complex64>> {
    let integ = JostIntegrator::new(q0)?;
    let mut raw = Vec::new();
    subdivide_collect(&integ, rect, half, count, &mut raw)?;
    // dedupe
    let mut zeros: Vec<Complex64> = Vec::new();
    for z in raw {
        if !zeros.iter().any(|f| (f - z).norm() < params::ZERO_DEDUPE) {
            zeros.push(z);
        }
    }
    if zeros.len() != count {
        return Err(Error::CountMismatch { found: zeros.len(), expected: count });
    }
    let sgn = if half == HalfPlane::Upper { 1.0 } else { -1.0 };
    for z in &zeros {
        if sgn * z.im < params::ZERO_AXIS_MIN {
            return Err(Error::Invalid(format!(
                "zero {z} is within {} of the real axis; data violates the simple-zero assumption",
                params::ZERO_AXIS_MIN
            )));
        }
    }
    // snap near-axis real parts, then symmetrize mirror pairs
    let mut out: Vec<Complex64> = Vec::new();
    let mut used = vec![false; zeros.len()];
    for i in 0..zeros.len() {
        if used[i] {
            continue;
        }
        let z = zeros[i];
        if z.re.abs() < params::ZERO_DEDUPE {
            out.push(Complex64::new(0.0, z.im));
            used[i] = true;
            continue;
        }
        // find the mirror partner
        let mirror = -z.conj();
        let partner = (i + 1..zeros.len())
            .filter(|&j| !used[j])
            .min_by(|&a, &b| {
                (zeros[a] - mirror)
                    .norm()
                    .partial_cmp(&(zeros[b] - mirror).norm())
                    .unwrap()
            });
        match partner {
            Some(j) if (zeros[j] - mirror).norm() < 1e-3 => {
                let zs = 0.5 * (z - zeros[j].conj());
                out.push(zs);
                out.push(-zs.conj());
                used[i] = true;
                used[j] = true;
            }
            _ => {
                return Err(Error::Invalid(format!(
                    "off-axis zero {z} lacks a mirror partner -conj(z)"
                )));
            }
        }
    }
    out.sort_by(|a, b| {
        (b.im.abs(), a.re)
            .partial_cmp(&(a.im.abs(), b.re))
            .unwrap()
    });
    Ok(out)
}

/// Measured norming data at one upper-half zero: the proportionality
/// constant between the two Jost columns, checked componentwise.
fn norming_upper(integ: &JostIntegrator, k0: Complex64) -> Result<Complex64> {
    let j0 = integ.pot.grid.center();
    let left = integ.left_column_at(k0, j0)?;
    let right = integ.right_column2_at(k0, j0)?;
    // Phi1^[1](0) = (psi1, phi3)(0), Phi2^[2](0) = (phi2, psi4)(0)
    let ga = left[0] / right[0];
    let gb = left[1] / right[1];
    let diff = (ga - gb).norm() / ga.norm().max(gb.norm()).max(1e-30);
    if diff > params::NORMING_AGREE {
        return Err(Error::RatioInconsistent { zero: format!("{k0}"), diff });
    }
    Ok(0.5 * (ga + gb))
}

/// Lower-family norming constant in the residue normalization: the residue
/// of M at a zero of a2 carries the reciprocal of the raw column ratio
/// Phi2^[1]/Phi1^[2], and that reciprocal is the constant appearing in the
/// soliton formulas and blow-up times. It is the value stored here.
fn norming_lower(integ: &JostIntegrator, k0: Complex64) -> Result<Complex64> {
    let j0 = integ.pot.grid.center();
    let left2 = integ.left_column2_at(k0, j0)?;
    let right1 = integ.right_column_at(k0, j0)?;
    let ga = left2[0] / right1[0];
    let gb = left2[1] / right1[1];
    let diff = (ga - gb).norm() / ga.norm().max(gb.norm()).max(1e-30);
    if diff > params::NORMING_AGREE {
        return Err(Error::RatioInconsistent { zero: format!("{k0}"), diff });
    }
    Ok(0.5 * (ga + gb))
}

/// Assemble the discrete spectrum from located zeros: norming constants by
/// matching the two Jost columns at x = 0 and derivatives da/dk by the
/// circle stencil. Mirror-zero constants are validated against the symmetry
/// value sigma/conj(eta) and stored implicitly.
pub fn norming_data(
    q0: &Potential,
    zeros_upper: &[Complex64],
    zeros_lower: &[Complex64],
) -> Result<DiscreteSpectrum> {
    if zeros_upper.len() != zeros_lower.len() {
        return Err(Error::CountMismatch {
            found: zeros_lower.len(),
            expected: zeros_upper.len(),
        });
    }
    let integ = JostIntegrator::new(q0)?;
    let sigma = q0.sigma.value();
    let mut ds = DiscreteSpectrum::empty(q0.sigma);

    let mut rho1: Vec<f64> = Vec::new();
    let mut zeta1: Vec<Complex64> = Vec::new();
    for &z in zeros_upper {
        if z.re.abs() < params::ZERO_DEDUPE {
            rho1.push(z.im);
        } else if z.re < 0.0 {
            zeta1.push(z);
        }
    }
    let mut rho2: Vec<f64> = Vec::new();
    let mut zeta2: Vec<Complex64> = Vec::new();
    for &z in zeros_lower {
        if z.re.abs() < params::ZERO_DEDUPE {
            rho2.push(z.im);
        } else if z.re < 0.0 {
            zeta2.push(z);
        }
    }
    if rho1.len() != rho2.len() || zeta1.len() != zeta2.len() {
        return Err(Error::Invalid(
            "upper/lower zero families have mismatched shapes".into(),
        ));
    }
    rho1.sort_by(|a, b| b.partial_cmp(a).unwrap());
    rho2.sort_by(|a, b| a.partial_cmp(b).unwrap());
    zeta1.sort_by(|a, b| b.im.partial_cmp(&a.im).unwrap());
    zeta2.sort_by(|a, b| a.im.partial_cmp(&b.im).unwrap());

    let mut adot1: Vec<Complex64> = Vec::new();
    let mut adot2: Vec<Complex64> = Vec::new();
    let check_simple = |z: Complex64, da: Complex64, which: u8| -> Result<()> {
        if da.norm() <= params::SIMPLE_FLOOR {
            return Err(Error::ZeroNotSimple { zero: format!("a{which} at {z}"), adot_abs: da.norm() });
        }
        Ok(())
    };

    for &r in &rho1 {
        let z = Complex64::new(0.0, r);
        let g = norming_upper(&integ, z)?;
        let da = integ.a_derivative(z, HalfPlane::Upper)?;
        check_simple(z, da, 1)?;
        ds.gamma1.push(g);
        adot1.push(da);
    }
    for &z in &zeta1 {
        let e = norming_upper(&integ, z)?;
        let da = integ.a_derivative(z, HalfPlane::Upper)?;
        check_simple(z, da, 1)?;
        let zm = -z.conj();
        let em = norming_upper(&integ, zm)?;
        let dam = integ.a_derivative(zm, HalfPlane::Upper)?;
        check_simple(zm, dam, 1)?;
        let implied = Complex64::new(sigma, 0.0) / e.conj();
        let dev = (em - implied).norm() / implied.norm().max(1e-30);
        if dev > 100.0 * params::NORMING_AGREE {
            return Err(Error::RatioInconsistent { zero: format!("mirror of {z}"), diff: dev });
        }
        ds.eta1.push(e);
        adot1.push(da);
        adot1.push(dam);
    }
    for &r in &rho2 {
        let z = Complex64::new(0.0, r);
        let g = norming_lower(&integ, z)?;
        let da = integ.a_derivative(z, HalfPlane::Lower)?;
        check_simple(z, da, 2)?;
        ds.gamma2.push(g);
        adot2.push(da);
    }
    for &z in &zeta2 {
        let e = norming_lower(&integ, z)?;
        let da = integ.a_derivative(z, HalfPlane::Lower)?;
        check_simple(z, da, 2)?;
        let zm = -z.conj();
        let em = norming_lower(&integ, zm)?;
        let dam = integ.a_derivative(zm, HalfPlane::Lower)?;
        check_simple(zm, dam, 2)?;
        let implied = Complex64::new(sigma, 0.0) / e.conj();
        let dev = (em - implied).norm() / implied.norm().max(1e-30);
        if dev > 100.0 * params::NORMING_AGREE {
            return Err(Error::RatioInconsistent { zero: format!("mirror of {z}"), diff: dev });
        }
        ds.eta2.push(e);
        adot2.push(da);
        adot2.push(dam);
    }
    ds.rho1 = rho1;
    ds.rho2 = rho2;
    ds.zeta1 = zeta1;
    ds.zeta2 = zeta2;
    ds.adot1 = Some(adot1);
    ds.adot2 = Some(adot2);
    ds.validate()?;
    Ok(ds)
}

/// Trace-formula cross-check: a1 rebuilt from its zeros and the reflection
/// coefficients, compared against the marched values at 16 probe points on
/// the half-circle |k| = K/2 in the upper half-plane. Returns the maximum
/// relative deviation.
pub fn trace_formula_residual(
    q0: &Potential,
    sd: &SpectralData,
    ds: &DiscreteSpectrum,
) -> Result<f64> {
    let integ = JostIntegrator::new(q0)?;
    let n = sd.kgrid.n;
    let sigma = sd.sigma.value();
    // continuous branch of ln(1 + sigma r1 r2) along the grid
    let mut logs = Vec::with_capacity(n);
    let mut branch = 0.0;
    let mut prev_arg: f64 = 0.0;
    for j in 0..n {
        let w = ONE + sigma * sd.r1[j] * sd.r2[j];
        let mut th = w.arg();
        if j > 0 {
            while th + branch - prev_arg > std::f64::consts::PI {
                branch -= 2.0 * std::f64::consts::PI;
            }
            while th + branch - prev_arg < -std::f64::consts::PI {
                branch += 2.0 * std::f64::consts::PI;
            }
        }
        th += branch;
        prev_arg = th;
        logs.push(Complex64::new(w.norm().ln(), th));
    }
    let hk = sd.kgrid.spacing();
    let radius = 0.5 * sd.kgrid.half_width;
    let mut worst: f64 = 0.0;
    for i in 0..16 {
        let th = std::f64::consts::PI * (i as f64 + 0.5) / 16.0;
        let k = Complex64::from_polar(radius, th);
        let mut integral = ZERO;
        for j in 0..n {
            integral += logs[j] / (Complex64::new(sd.kgrid.point(j), 0.0) - k);
        }
        integral *= hk / (2.0 * std::f64::consts::PI * Complex64::i());
        let (alpha1, _) = soliton::alpha_products(ds, k);
        let traced = alpha1 * (-integral).exp();
        let marched = integ.a_value(k, HalfPlane::Upper)?;
        worst = worst.max((traced - marched).norm() / marched.norm().max(1e-30));
    }
    Ok(worst)
}
