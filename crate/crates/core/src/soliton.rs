//! Closed-form soliton solutions: the one-soliton family, the general
//! reflectionless determinant formula, blow-up times, Blaschke products and
//! a finite-difference PDE residual used as an oracle throughout the tests.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, CMatrix, ONE, ZERO};
use crate::params;
use crate::spectrum::DiscreteSpectrum;

/// A complex field value together with a pole flag.
#[derive(Debug, Clone, Copy)]
pub struct FieldValue {
    pub q: Complex64,
    pub pole: bool,
}

impl FieldValue {
    pub fn regular(q: Complex64) -> Self {
        FieldValue { q, pole: false }
    }

    pub fn pole() -> Self {
        FieldValue { q: Complex64::new(f64::INFINITY, f64::INFINITY), pole: true }
    }
}

/// Exact one-soliton value
/// q(x,t) = 2 (rho1 - rho2) / (gamma2^{-1} e^{-2 rho2 x - 4 i rho2^2 t}
///                             - gamma1 e^{-2 rho1 x - 4 i rho1^2 t}).
pub fn one_soliton(
    rho1: f64,
    rho2: f64,
    gamma1: Complex64,
    gamma2: Complex64,
    x: f64,
    t: f64,
) -> FieldValue {
    let term2 = (Complex64::new(-2.0 * rho2 * x, -4.0 * rho2 * rho2 * t)).exp() / gamma2;
    let term1 = gamma1 * (Complex64::new(-2.0 * rho1 * x, -4.0 * rho1 * rho1 * t)).exp();
    let den = term2 - term1;
    let scale = term2.norm().max(term1.norm()).max(1.0);
    if den.norm() < params::DET_FLOOR * scale {
        return FieldValue::pole();
    }
    FieldValue::regular(Complex64::new(2.0 * (rho1 - rho2), 0.0) / den)
}

/// Blow-up instants t_n = (arg(gamma1 gamma2) + 2 pi n) / (4 (rho1^2 - rho2^2))
/// of the one-soliton, with arg taken in (-pi, pi].
pub fn blowup_times(
    rho1: f64,
    rho2: f64,
    gamma1: Complex64,
    gamma2: Complex64,
    n_min: i32,
    n_max: i32,
) -> Result<Vec<f64>> {
    let denom = 4.0 * (rho1 * rho1 - rho2 * rho2);
    if denom.abs() < 1e-14 {
        return Err(Error::DegenerateAmplitudes { rho: rho1 });
    }
    let mut phase = (gamma1 * gamma2).arg();
    // arg() returns (-pi, pi]; keep that branch.
    if phase <= -std::f64::consts::PI {
        phase += 2.0 * std::f64::consts::PI;
    }
    Ok((n_min..=n_max)
        .map(|n| (phase + 2.0 * std::f64::consts::PI * n as f64) / denom)
        .collect())
}

/// Blaschke products alpha_1 (upper data) and alpha_2 = 1/alpha_1 at k.
pub fn alpha_products(ds: &DiscreteSpectrum, k: Complex64) -> (Complex64, Complex64) {
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let mut a1 = ONE;
    let mut a2 = ONE;
    for (z1, z2) in k1.iter().zip(k2.iter()) {
        a1 *= (k - z1) / (k - z2);
        a2 *= (k - z2) / (k - z1);
    }
    (a1, a2)
}

/// d alpha_1 / dk at the m-th zero k1[m] (analytic product form).
pub fn alpha1_dot_at_zero(ds: &DiscreteSpectrum, m: usize) -> Complex64 {
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let km = k1[m];
    let mut num = ONE;
    for (s, z) in k1.iter().enumerate() {
        if s != m {
            num *= km - z;
        }
    }
    let mut den = ONE;
    for z in &k2 {
        den *= km - z;
    }
    num / den
}

/// d alpha_2 / dk at the m-th zero k2[m].
pub fn alpha2_dot_at_zero(ds: &DiscreteSpectrum, m: usize) -> Complex64 {
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let km = k2[m];
    let mut num = ONE;
    for (s, z) in k2.iter().enumerate() {
        if s != m {
            num *= km - z;
        }
    }
    let mut den = ONE;
    for z in &k1 {
        den *= km - z;
    }
    num / den
}

/// da_1/dk at zero m: supplied value if present, else the Blaschke derivative.
pub fn adot1(ds: &DiscreteSpectrum, m: usize) -> Complex64 {
    match &ds.adot1 {
        Some(v) => v[m],
        None => alpha1_dot_at_zero(ds, m),
    }
}

pub fn adot2(ds: &DiscreteSpectrum, m: usize) -> Complex64 {
    match &ds.adot2 {
        Some(v) => v[m],
        None => alpha2_dot_at_zero(ds, m),
    }
}

/// Row-vector first entries xi_{m,1} and column entries eta_{m,1} of the
/// determinant representation.
fn xi_eta_entries(ds: &DiscreteSpectrum, x: f64, t: f64) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let nu1 = ds.nu1_list();
    let nu2 = ds.nu2_list();
    let l = ds.total();
    let mut xi = Vec::with_capacity(l);
    let mut eta = Vec::with_capacity(l);
    for m in 0..l {
        for (s, z2) in k2.iter().enumerate() {
            if (k1[m] - z2).norm() == 0.0 {
                return Err(Error::SingularAssembly { m, s });
            }
        }
        let mut prod1 = ONE;
        let mut prod2 = ONE;
        for s in 0..l {
            if s != m {
                prod1 *= (k1[m] - k1[s]) / (k1[m] - k2[s]);
                prod2 *= (k2[m] - k2[s]) / (k2[m] - k1[s]);
            }
        }
        let e1 = (linalg::I * (2.0 * k1[m] * x + 4.0 * k1[m] * k1[m] * t)).exp();
        let e2 = (-linalg::I * (2.0 * k2[m] * x + 4.0 * k2[m] * k2[m] * t)).exp();
        xi.push(nu1[m] * prod1 / ((k1[m] - k2[m]) * adot1(ds, m)) * e1);
        eta.push(-nu2[m] * prod2 / ((k2[m] - k1[m]) * adot2(ds, m)) * e2);
    }
    Ok((xi, eta))
}

/// Exact reflectionless (2N+M)-soliton via the Cramer determinant ratio.
///
/// The value is 2i det A1 / det A where A_{ms} = (xi_{s,1} eta_{m,1} + 1)
/// / (k_{2,m} - k_{1,s}) and A1 borders A with the eta column and a row of
/// ones. The border sign is fixed so that the (M,N) = (1,0) case reduces to
/// `one_soliton` exactly.
pub fn multi_soliton(ds: &DiscreteSpectrum, x: f64, t: f64) -> Result<FieldValue> {
    let l = ds.total();
    if l == 0 {
        return Ok(FieldValue::regular(ZERO));
    }
    let (xi, eta) = xi_eta_entries(ds, x, t)?;
    let k1 = ds.k1_list();
    let k2 = ds.k2_list();
    let mut a = CMatrix::zeros(l);
    for m in 0..l {
        for s in 0..l {
            a.set(m, s, (xi[s] * eta[m] + ONE) / (k2[m] - k1[s]));
        }
    }
    // Hadamard bound of the rows as determinant scale.
    let mut hadamard = 1.0;
    for m in 0..l {
        let row: f64 = (0..l).map(|s| a.at(m, s).norm_sqr()).sum();
        hadamard *= row.sqrt().max(1e-300);
    }
    let mut a1 = CMatrix::zeros(l + 1);
    for m in 0..l {
        for s in 0..l {
            a1.set(m, s, a.at(m, s));
        }
        a1.set(m, l, eta[m]);
        a1.set(l, m, ONE);
    }
    let det_a = linalg::det(a);
    let det_a1 = linalg::det(a1);
    if det_a.norm() < params::DET_FLOOR * hadamard.max(1.0) {
        return Ok(FieldValue::pole());
    }
    Ok(FieldValue::regular(2.0 * linalg::I * det_a1 / det_a))
}

/// |i D_t q + D_xx q + 2 sigma q^2 conj(q(-x,t))| with central differences
/// of step h. The sampler returns a value plus pole flag.
pub fn pde_residual(
    sample: impl Fn(f64, f64) -> FieldValue,
    sigma: f64,
    x: f64,
    t: f64,
    h: f64,
) -> Result<f64> {
    let stencil = [
        (x, t),
        (x + h, t),
        (x - h, t),
        (x, t + h),
        (x, t - h),
        (-x, t),
    ];
    let mut vals = [ZERO; 6];
    for (i, (xs, ts)) in stencil.iter().enumerate() {
        let fv = sample(*xs, *ts);
        if fv.pole {
            return Err(Error::StencilHitsPole { x: *xs, t: *ts });
        }
        vals[i] = fv.q;
    }
    let [q0, qxp, qxm, qtp, qtm, qr] = vals;
    let dt = (qtp - qtm) / (2.0 * h);
    let dxx = (qxp - 2.0 * q0 + qxm) / (h * h);
    let res = linalg::I * dt + dxx + 2.0 * sigma * q0 * q0 * qr.conj();
    Ok(res.norm())
}

/// PDE residual for evaluators defined on the whole (x,t) plane, checked on
/// the standard NNLS form with sigma from the spectrum.
pub fn soliton_pde_residual(ds: &DiscreteSpectrum, x: f64, t: f64, h: f64) -> Result<f64> {
    pde_residual(
        |xx, tt| multi_soliton(ds, xx, tt).unwrap_or_else(|_| FieldValue::pole()),
        ds.sigma.value(),
        x,
        t,
        h,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Sigma;

    fn reference_pair() -> (f64, f64, Complex64, Complex64) {
        (
            0.5,
            -0.25,
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_2),
            Complex64::from_polar(1.0, std::f64::consts::FRAC_PI_6),
        )
    }

    fn reference_spectrum() -> DiscreteSpectrum {
        let (r1, r2, g1, g2) = reference_pair();
        DiscreteSpectrum::one_pair(r1, r2, g1, g2)
    }

    #[test]
    fn one_soliton_at_origin() {
        let (r1, r2, g1, g2) = reference_pair();
        // |gamma2^{-1} - gamma1| at (0,0): |e^{-i pi/6} - e^{i pi/2}| = sqrt(3)
        let v = one_soliton(r1, r2, g1, g2, 0.0, 0.0);
        assert!(!v.pole);
        assert!((v.q.norm() - 1.5 / 3.0_f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn blowup_lattice_reference_pair() {
        let (r1, r2, g1, g2) = reference_pair();
        let ts = blowup_times(r1, r2, g1, g2, 0, 2).unwrap();
        let t0 = 8.0 * std::f64::consts::PI / 9.0;
        let spacing = 8.0 * std::f64::consts::PI / 3.0;
        assert!((ts[0] - t0).abs() < 1e-14);
        assert!((ts[1] - ts[0] - spacing).abs() < 1e-13);
        assert!((ts[2] - ts[1] - spacing).abs() < 1e-13);
        // the denominator vanishes there
        let v = one_soliton(r1, r2, g1, g2, 0.0, ts[0]);
        assert!(v.pole);
    }

    #[test]
    fn degenerate_amplitudes_never_blow_up() {
        let g = Complex64::from_polar(1.0, 0.3);
        assert!(matches!(
            blowup_times(0.5, -0.5, g, g, 0, 1),
            Err(Error::DegenerateAmplitudes { .. })
        ));
        // and the field stays bounded on a time sweep
        for n in 0..200 {
            let t = -5.0 + 0.05 * n as f64;
            let v = one_soliton(0.5, -0.5, g, g, 0.0, t);
            assert!(!v.pole);
            assert!(v.q.norm() < 10.0);
        }
    }

    #[test]
    fn exponential_decay_in_x() {
        let (r1, r2, g1, g2) = reference_pair();
        let mut prev = f64::INFINITY;
        for &x in &[5.0, 8.0, 11.0, 14.0] {
            let v = one_soliton(r1, r2, g1, g2, x, 0.0).q.norm();
            assert!(v < prev);
            // envelope e^{-0.5 x} (slowest tail has rate 2|rho2| = 0.5)
            assert!(v <= 2.0 * (-0.5 * x).exp());
            prev = v;
        }
    }

    #[test]
    fn multi_matches_one_soliton() {
        let ds = reference_spectrum();
        let (r1, r2, g1, g2) = reference_pair();
        for &(x, t) in &[(0.0, 0.0), (0.7, 0.3), (-1.3, 1.1), (2.0, -0.8), (0.25, 2.0)] {
            let a = multi_soliton(&ds, x, t).unwrap();
            let b = one_soliton(r1, r2, g1, g2, x, t);
            assert!(!a.pole && !b.pole);
            assert!(
                (a.q - b.q).norm() < 1e-12,
                "mismatch at ({x},{t}): {} vs {}",
                a.q,
                b.q
            );
        }
    }

    #[test]
    fn empty_spectrum_is_zero() {
        let ds = DiscreteSpectrum::empty(Sigma::Focusing);
        let v = multi_soliton(&ds, 0.4, 1.2).unwrap();
        assert_eq!(v.q, ZERO);
    }

    #[test]
    fn alpha_products_reference_pair() {
        let ds = reference_spectrum();
        let (a1, a2) = alpha_products(&ds, ZERO);
        assert!((a1 - Complex64::new(-2.0, 0.0)).norm() < 1e-14);
        assert!((a1 * a2 - ONE).norm() < 1e-14);
        let ds0 = DiscreteSpectrum::empty(Sigma::Focusing);
        let (b1, b2) = alpha_products(&ds0, Complex64::new(0.3, 0.7));
        assert_eq!((b1, b2), (ONE, ONE));
    }

    #[test]
    fn one_soliton_pde_residual_second_order() {
        let ds = reference_spectrum();
        let r_h = soliton_pde_residual(&ds, 1.0, 0.0, 1e-3).unwrap();
        assert!(r_h < 1e-5, "residual {r_h}");
        // Richardson slope close to 2 on coarser steps where fd error dominates
        let r1 = soliton_pde_residual(&ds, 0.8, 0.2, 2e-2).unwrap();
        let r2 = soliton_pde_residual(&ds, 0.8, 0.2, 1e-2).unwrap();
        let slope = (r1 / r2).log2();
        assert!((1.7..=2.3).contains(&slope), "slope {slope}");
    }

    #[test]
    fn oscillating_pair_residual() {
        // N = 1 spectrum: zeta pair in C+ / C-.
        let mut ds = DiscreteSpectrum::empty(Sigma::Focusing);
        ds.zeta1 = vec![Complex64::new(-0.4, 0.45)];
        ds.zeta2 = vec![Complex64::new(-0.4, -0.35)];
        ds.eta1 = vec![Complex64::new(0.8, 0.3)];
        ds.eta2 = vec![Complex64::new(-0.2, 1.1)];
        ds.validate().unwrap();
        let mut checked = 0;
        for i in 0..10 {
            for j in 0..10 {
                let x = -4.5 + i as f64;
                let t = -2.25 + 0.5 * j as f64;
                // a stencil hitting a pole is skipped
                if let Ok(r) = soliton_pde_residual(&ds, x, t, 1e-3) {
                    assert!(r < 1e-4, "residual {r} at ({x},{t})");
                    checked += 1;
                }
            }
        }
        assert!(checked > 80);
    }

    #[test]
    fn two_pair_imaginary_residual() {
        let mut ds = DiscreteSpectrum::empty(Sigma::Focusing);
        ds.rho1 = vec![0.5, 0.9];
        ds.rho2 = vec![-0.25, -0.7];
        ds.gamma1 = vec![Complex64::from_polar(1.0, 0.4), Complex64::from_polar(1.0, -1.0)];
        ds.gamma2 = vec![Complex64::from_polar(1.0, 2.0), Complex64::from_polar(1.0, 0.9)];
        ds.validate().unwrap();
        // "away from poles": bounded amplitude and bounded coarse second
        // differences, so the h^2 stencil error is the whole residual.
        let q = |x: f64, t: f64| multi_soliton(&ds, x, t).unwrap();
        let smooth_at = |x: f64, t: f64| -> bool {
            let hh = 0.15;
            let c = q(x, t);
            if c.pole || c.q.norm() > 0.9 {
                return false;
            }
            let s = [q(x + hh, t), q(x - hh, t), q(x, t + hh), q(x, t - hh)];
            if s.iter().any(|v| v.pole) {
                return false;
            }
            let dxx = (s[0].q - 2.0 * c.q + s[1].q).norm() / (hh * hh);
            let dtt = (s[2].q - 2.0 * c.q + s[3].q).norm() / (hh * hh);
            dxx < 1.0 && dtt < 1.0
        };
        let mut checked = 0;
        for i in 0..20 {
            for j in 0..20 {
                let x = -4.35 + i as f64 * 0.45;
                let t = -2.17 + j as f64 * 0.22;
                if !smooth_at(x, t) {
                    continue;
                }
                let r = soliton_pde_residual(&ds, x, t, 1e-3).unwrap();
                assert!(r < 1e-6, "residual {r} at ({x},{t})");
                checked += 1;
            }
        }
        assert!(checked > 150, "only {checked} smooth probe points");
    }

    #[test]
    fn pt_mirror_is_still_a_solution() {
        let ds = reference_spectrum();
        let mirrored = |x: f64, t: f64| -> FieldValue {
            let v = multi_soliton(&ds, -x, -t).unwrap_or_else(|_| FieldValue::pole());
            FieldValue { q: v.q.conj(), pole: v.pole }
        };
        let r = pde_residual(mirrored, 1.0, 0.9, 0.4, 1e-3).unwrap();
        assert!(r < 1e-5, "PT-mirrored residual {r}");
    }
}
