//! Discrete spectrum: zeros of a1/a2 with norming constants.
//!
//! Zeros of a1 live in the upper half-plane, zeros of a2 in the lower one.
//! Purely imaginary zeros i*rho_{1,s} (rho > 0) pair with i*rho_{2,s}
//! (rho < 0); off-axis zeros come in mirror pairs (zeta, -conj(zeta)) with
//! Re zeta < 0. The flattened pairing order used by every staged algorithm
//! is: the M imaginary pairs first, then for each s the pair (zeta_s,
//! -conj(zeta_s)).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Sigma;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DiscreteSpectrum {
    pub sigma: Sigma,
    /// Heights of upper imaginary zeros i*rho1[s], rho1[s] > 0.
    pub rho1: Vec<f64>,
    /// Heights of lower imaginary zeros i*rho2[s], rho2[s] < 0.
    pub rho2: Vec<f64>,
    /// Norming constants at the imaginary zeros; unimodular.
    pub gamma1: Vec<Complex64>,
    pub gamma2: Vec<Complex64>,
    /// Off-axis zeros zeta1[s] in C+ (Re < 0); mirrors -conj(zeta1[s]) implied.
    pub zeta1: Vec<Complex64>,
    /// Off-axis zeros zeta2[s] in C- (Re < 0); mirrors implied.
    pub zeta2: Vec<Complex64>,
    /// Norming constants at zeta zeros; the mirror constant is sigma/conj(eta).
    pub eta1: Vec<Complex64>,
    pub eta2: Vec<Complex64>,
    /// Optional measured derivatives da_j/dk at each zero, in flattened order.
    /// When absent the Blaschke-product derivative is used (pure solitons).
    pub adot1: Option<Vec<Complex64>>,
    pub adot2: Option<Vec<Complex64>>,
}

impl DiscreteSpectrum {
    pub fn empty(sigma: Sigma) -> Self {
        DiscreteSpectrum {
            sigma,
            rho1: vec![],
            rho2: vec![],
            gamma1: vec![],
            gamma2: vec![],
            zeta1: vec![],
            zeta2: vec![],
            eta1: vec![],
            eta2: vec![],
            adot1: None,
            adot2: None,
        }
    }

    /// One imaginary pair (the single-soliton spectrum).
    pub fn one_pair(rho1: f64, rho2: f64, gamma1: Complex64, gamma2: Complex64) -> Self {
        let mut ds = DiscreteSpectrum::empty(Sigma::Focusing);
        ds.rho1 = vec![rho1];
        ds.rho2 = vec![rho2];
        ds.gamma1 = vec![gamma1];
        ds.gamma2 = vec![gamma2];
        ds
    }

    pub fn m_count(&self) -> usize {
        self.rho1.len()
    }

    pub fn n_count(&self) -> usize {
        self.zeta1.len()
    }

    /// Total number of zero pairs 2N + M.
    pub fn total(&self) -> usize {
        self.m_count() + 2 * self.n_count()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    /// Flattened zeros of a1 (upper half-plane).
    pub fn k1_list(&self) -> Vec<Complex64> {
        let mut k = Vec::with_capacity(self.total());
        for &r in &self.rho1 {
            k.push(Complex64::new(0.0, r));
        }
        for &z in &self.zeta1 {
            k.push(z);
            k.push(-z.conj());
        }
        k
    }

    /// Flattened zeros of a2 (lower half-plane).
    pub fn k2_list(&self) -> Vec<Complex64> {
        let mut k = Vec::with_capacity(self.total());
        for &r in &self.rho2 {
            k.push(Complex64::new(0.0, r));
        }
        for &z in &self.zeta2 {
            k.push(z);
            k.push(-z.conj());
        }
        k
    }

    /// Flattened norming constants matching `k1_list`.
    pub fn nu1_list(&self) -> Vec<Complex64> {
        let s = self.sigma.value();
        let mut v: Vec<Complex64> = self.gamma1.clone();
        for &e in &self.eta1 {
            v.push(e);
            v.push(Complex64::new(s, 0.0) / e.conj());
        }
        v
    }

    pub fn nu2_list(&self) -> Vec<Complex64> {
        let s = self.sigma.value();
        let mut v: Vec<Complex64> = self.gamma2.clone();
        for &e in &self.eta2 {
            v.push(e);
            v.push(Complex64::new(s, 0.0) / e.conj());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        if self.rho1.len() != self.rho2.len()
            || self.zeta1.len() != self.zeta2.len()
            || self.gamma1.len() != self.rho1.len()
            || self.gamma2.len() != self.rho2.len()
            || self.eta1.len() != self.zeta1.len()
            || self.eta2.len() != self.zeta2.len()
        {
            return Err(Error::Invalid(
                "discrete spectrum requires equal zero counts in both half-planes".into(),
            ));
        }
        if self.sigma == Sigma::Defocusing && self.m_count() > 0 {
            return Err(Error::Invalid(
                "sigma = -1 admits no purely imaginary zeros".into(),
            ));
        }
        for &r in &self.rho1 {
            if r <= 0.0 {
                return Err(Error::Invalid(format!("rho1 must be positive, got {r}")));
            }
        }
        for &r in &self.rho2 {
            if r >= 0.0 {
                return Err(Error::Invalid(format!("rho2 must be negative, got {r}")));
            }
        }
        for g in self.gamma1.iter().chain(self.gamma2.iter()) {
            if (g.norm() - 1.0).abs() > 1e-8 {
                return Err(Error::Invalid(format!(
                    "norming constant gamma must be unimodular, |gamma| = {}",
                    g.norm()
                )));
            }
        }
        for z in &self.zeta1 {
            if z.im <= 0.0 || z.re >= 0.0 {
                return Err(Error::Invalid(format!(
                    "zeta1 must have Im > 0 and Re < 0, got {z}"
                )));
            }
        }
        for z in &self.zeta2 {
            if z.im >= 0.0 || z.re >= 0.0 {
                return Err(Error::Invalid(format!(
                    "zeta2 must have Im < 0 and Re < 0, got {z}"
                )));
            }
        }
        for e in self.eta1.iter().chain(self.eta2.iter()) {
            if e.norm() == 0.0 {
                return Err(Error::Invalid("eta norming constants must be nonzero".into()));
            }
        }
        for adot in [&self.adot1, &self.adot2].into_iter().flatten() {
            if adot.len() != self.total() {
                return Err(Error::Invalid(format!(
                    "da/dk list length {} does not match the {} zeros",
                    adot.len(),
                    self.total()
                )));
            }
            for (m, a) in adot.iter().enumerate() {
                if a.norm() <= 1e-8 {
                    return Err(Error::Invalid(format!(
                        "zero {m} is not simple: |da/dk| = {}",
                        a.norm()
                    )));
                }
            }
        }
        Ok(())
    }
}
