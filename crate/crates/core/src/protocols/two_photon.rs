//! Entangled photon pairs sent through two independent links.

use nalgebra::{Matrix4, Vector4};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use super::density::{kron, TwoQubitDensityMatrix};
use super::link::Link;
use crate::error::{Error, Result};
use crate::modes::{check_same_basis, inner_product, PolarizationQubit, SpinOrbitState, DETECTION_FLOOR};

/// `Σ_k c_k |A_k⟩|B_k⟩` with at most four terms.
#[derive(Debug, Clone)]
pub struct TwoPhotonPureState {
    terms: Vec<(Complex64, SpinOrbitState, SpinOrbitState)>,
}

impl TwoPhotonPureState {
    pub fn new(terms: Vec<(Complex64, SpinOrbitState, SpinOrbitState)>) -> Result<Self> {
        if terms.is_empty() || terms.len() > 4 {
            return Err(Error::Domain(format!("expected 1 to 4 Schmidt terms, got {}", terms.len())));
        }
        for (_, a, b) in &terms[1..] {
            check_same_basis(a.basis(), terms[0].1.basis())?;
            check_same_basis(b.basis(), terms[0].2.basis())?;
        }
        let weight: f64 = terms.iter().map(|(k, a, b)| k.norm_sqr() * a.norm_sqr() * b.norm_sqr()).sum();
        if weight > 1.0 + 1e-9 {
            return Err(Error::Domain(format!("term weights sum to {weight} > 1")));
        }
        Ok(Self { terms })
    }

    pub fn terms(&self) -> &[(Complex64, SpinOrbitState, SpinOrbitState)] {
        &self.terms
    }

    /// `⟨self|other⟩`.
    pub fn overlap(&self, other: &TwoPhotonPureState) -> Result<Complex64> {
        let mut sum = Complex64::new(0.0, 0.0);
        for (c1, a1, b1) in &self.terms {
            for (c2, a2, b2) in &other.terms {
                sum += c1.conj() * c2 * inner_product(a1, a2)? * inner_product(b1, b2)?;
            }
        }
        Ok(sum)
    }

    pub fn norm_sqr(&self) -> Result<f64> {
        Ok(self.overlap(self)?.re)
    }

    /// Reduced density matrix of arm A in the span of its term states,
    /// expressed in the (orthonormal) term basis.
    pub fn reduced_a(&self) -> Result<Vec<Vec<Complex64>>> {
        let n = self.terms.len();
        let mut rho = vec![vec![Complex64::new(0.0, 0.0); n]; n];
        for i in 0..n {
            for j in 0..n {
                let (ci, _, bi) = &self.terms[i];
                let (cj, _, bj) = &self.terms[j];
                rho[i][j] = ci * cj.conj() * inner_product(bj, bi)?;
            }
        }
        Ok(rho)
    }

    /// Applies `f` to every arm-A state.
    pub fn map_a(&self, f: impl Fn(&SpinOrbitState) -> SpinOrbitState) -> Self {
        Self { terms: self.terms.iter().map(|(c, a, b)| (*c, f(a), b.clone())).collect() }
    }
}

fn bell_from(link: &Link, a: [PolarizationQubit; 2]) -> TwoPhotonPureState {
    let s0 = link.prepare_qubit(&a[0]);
    let s1 = link.prepare_qubit(&a[1]);
    TwoPhotonPureState {
        terms: vec![
            (Complex64::new(FRAC_1_SQRT_2, 0.0), s0.clone(), s0),
            (Complex64::new(-FRAC_1_SQRT_2, 0.0), s1.clone(), s1),
        ],
    }
}

/// `(|0_L 0_L⟩ - |1_L 1_L⟩)/√2` as launched by `link`'s encoder: the
/// rotation-invariant state for the hybrid encoding, `(|HH⟩ - |VV⟩)/√2` for
/// the polarization encoding.
pub fn bell_state_logical(link: &Link) -> TwoPhotonPureState {
    let zero = PolarizationQubit::r();
    let one = PolarizationQubit::l();
    bell_from(link, [zero, one])
}

/// Joint detection result of an entangled pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalOutcome {
    /// Unnormalized two-qubit state; its trace is the joint survival.
    pub rho: Matrix4<Complex64>,
}

impl LocalOutcome {
    pub fn survival(&self) -> f64 {
        self.rho.trace().re
    }

    pub fn density(&self) -> Result<TwoQubitDensityMatrix> {
        let survival = self.survival();
        if survival < DETECTION_FLOOR {
            return Err(Error::UndefinedQubit { survival });
        }
        TwoQubitDensityMatrix::new(self.rho)
    }

    /// Count-weighted mixture of sessions.
    pub fn mix(outcomes: &[LocalOutcome]) -> LocalOutcome {
        let n = outcomes.len().max(1) as f64;
        let rho = outcomes.iter().fold(Matrix4::zeros(), |acc, o| acc + o.rho);
        LocalOutcome { rho: rho / Complex64::new(n, 0.0) }
    }
}

/// Sends arm A through `link_a` with its frame rotated by `theta_a`, arm B
/// likewise, and detects both.
pub fn apply_local(
    tp: &TwoPhotonPureState,
    link_a: &Link,
    link_b: &Link,
    theta_a: f64,
    theta_b: f64,
) -> Result<LocalOutcome> {
    let mut branches_a = Vec::with_capacity(tp.terms.len());
    let mut branches_b = Vec::with_capacity(tp.terms.len());
    for (_, a, b) in &tp.terms {
        branches_a.push(link_a.readout(&link_a.transmit(a, theta_a)?)?);
        branches_b.push(link_b.readout(&link_b.transmit(b, theta_b)?)?);
    }
    let (na, nb) = (branches_a[0].len(), branches_b[0].len());
    let mut rho = Matrix4::zeros();
    for k in 0..na {
        for l in 0..nb {
            let mut w = Vector4::zeros();
            for (t, (c, _, _)) in tp.terms.iter().enumerate() {
                w += kron(&branches_a[t][k], &branches_b[t][l]) * *c;
            }
            rho += w * w.adjoint();
        }
    }
    Ok(LocalOutcome { rho })
}
