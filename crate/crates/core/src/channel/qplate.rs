//! Tuned q = 1/2 plate, the encoder/decoder built from it, free propagation
//! and the pure-OAM comparison readout.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::f64::consts::TAU;

use super::coupling::{apply_coupling, ModeCoupling, PolAction};
use crate::error::{Error, Result};
use crate::modes::{project_fundamental, BasisSpec, Detection, Polarization, PolarizationQubit, SpinOrbitState, DETECTION_FLOOR};
use crate::numerics::field::LgFamily;
use crate::numerics::quadrature::gauss_legendre_rule;

/// Radial nodes for the `Q` integrals on `[0, Q_RADIUS·w0]`.
const Q_NODES: usize = 400;
const Q_RADIUS: f64 = 10.0;

/// Ideal tuned (`δ = π`) q-plate of charge `1/2`, with its radial coupling
/// coefficients for one basis.
///
/// `Q_{a,b;p,p'} = ⟨LG_{p',±b}| e^{±iφ} |LG_{p,±a}⟩` for `|a - b| = 1`; it is
/// real and, since both modes share the waist, independent of `w0`.
#[derive(Debug, Clone, PartialEq)]
pub struct QPlateSpec {
    basis: BasisSpec,
    /// `up[a][(p, p')] = Q_{a,a+1;p,p'}`
    up: Vec<DMatrix<f64>>,
    coupling: ModeCoupling,
}

impl QPlateSpec {
    pub const CHARGE: f64 = 0.5;
    pub const RETARDATION: f64 = std::f64::consts::PI;

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    /// `Q_{a,b;p,p'}`; zero unless `|a - b| = 1`.
    pub fn q(&self, a: usize, b: usize, p: usize, p_prime: usize) -> f64 {
        if b == a + 1 && a < self.up.len() {
            self.up[a][(p, p_prime)]
        } else if a == b + 1 && b < self.up.len() {
            self.up[b][(p_prime, p)]
        } else {
            0.0
        }
    }

    /// Radial profile `Q_{0,1;0,p}` of the encoded logical states.
    pub fn logical_profile(&self) -> Vec<f64> {
        (0..=self.basis.p_max()).map(|p| self.q(0, 1, 0, p)).collect()
    }

    /// The plate as a polarization-swapping [`ModeCoupling`].
    pub fn coupling(&self) -> &ModeCoupling {
        &self.coupling
    }
}

/// Builds the `Q` tables by radial quadrature.
pub fn qplate_radial_coeffs(basis: &BasisSpec) -> QPlateSpec {
    let (m_max, p_max) = (basis.m_max(), basis.p_max());
    let fam = LgFamily::new(m_max, p_max, 1.0);
    let (x, w) = gauss_legendre_rule(Q_NODES);
    let mut up = vec![DMatrix::zeros(p_max + 1, p_max + 1); m_max];
    for (&t, &wt) in x.iter().zip(&w) {
        let rho = 0.5 * Q_RADIUS * (t + 1.0);
        let weight = TAU * 0.5 * Q_RADIUS * wt * rho;
        let r = fam.radial(rho);
        for (a, table) in up.iter_mut().enumerate() {
            for p in 0..=p_max {
                let ra = r[a][p] * weight;
                for pp in 0..=p_max {
                    table[(p, pp)] += ra * r[a + 1][pp];
                }
            }
        }
    }

    let n = basis.spatial_dim();
    let mut matrix = DMatrix::zeros(n, n);
    let mm = m_max as i64;
    for m in -mm..mm {
        let (a, b) = (m.unsigned_abs() as usize, (m + 1).unsigned_abs() as usize);
        for p in 0..=p_max {
            let i = basis.spatial_index(m, p).expect("in range");
            for pp in 0..=p_max {
                let o = basis.spatial_index(m + 1, pp).expect("in range");
                let q = if b > a { up[a][(p, pp)] } else { up[b][(pp, p)] };
                matrix[(o, i)] = Complex64::new(q, 0.0);
            }
        }
    }
    let coupling = ModeCoupling::new(*basis, PolAction::SwapWithOamShift, matrix)
        .expect("dimensions follow the basis");
    QPlateSpec { basis: *basis, up, coupling }
}

/// `|L,m,p⟩ → Σ Q |R,m+1,p'⟩`, `|R,m,p⟩ → Σ Q |L,m-1,p'⟩`. Amplitude pushed
/// outside the truncation is dropped; see [`qplate_apply_with_loss`].
pub fn qplate_apply(s: &SpinOrbitState, qp: &QPlateSpec) -> Result<SpinOrbitState> {
    apply_coupling(s, &qp.coupling)
}

/// [`qplate_apply`] plus the squared norm lost to truncation.
pub fn qplate_apply_with_loss(s: &SpinOrbitState, qp: &QPlateSpec) -> Result<(SpinOrbitState, f64)> {
    let out = qplate_apply(s, qp)?;
    let loss = (s.norm_sqr() - out.norm_sqr()).max(0.0);
    Ok((out, loss))
}

/// Encodes `q ⊗ LG_00` into the rotation-invariant logical subspace:
/// `|R⟩ → |0_L⟩`, `|L⟩ → |1_L⟩`.
pub fn encode(q: &PolarizationQubit, basis: &BasisSpec) -> SpinOrbitState {
    encode_with(q, &qplate_radial_coeffs(basis))
}

/// [`encode`] with a precomputed plate.
pub fn encode_with(q: &PolarizationQubit, qp: &QPlateSpec) -> SpinOrbitState {
    let input = SpinOrbitState::fundamental(qp.basis, q);
    qplate_apply(&input, qp).expect("state built on the plate's basis")
}

/// Second q-plate followed by the single-mode-fiber projection.
pub fn decode(s: &SpinOrbitState, qp: &QPlateSpec) -> Result<Detection> {
    Ok(project_fundamental(&qplate_apply(s, qp)?))
}

/// Gouy phase `e^{-i(2p+|m|+1)ζ}` on every mode.
pub fn free_propagate(s: &SpinOrbitState, zeta: f64) -> SpinOrbitState {
    let mut out = s.clone();
    let basis = *s.basis();
    for pol in Polarization::BOTH {
        for (i, a) in out.spatial_mut(pol).iter_mut().enumerate() {
            let (m, p) = basis.spatial_mode(i);
            let order = (2 * p) as f64 + m.unsigned_abs() as f64 + 1.0;
            *a *= Complex64::from_polar(1.0, -order * zeta);
        }
    }
    out
}

/// Ideal linear polarizer at `polarizer_angle` (same convention as
/// [`PolarizationQubit::linear`]).
pub fn erase_polarization(s: &SpinOrbitState, polarizer_angle: f64) -> SpinOrbitState {
    let e = PolarizationQubit::linear(polarizer_angle);
    let basis = *s.basis();
    let mut out = SpinOrbitState::zeros(basis);
    let r_in = s.spatial(Polarization::R).to_vec();
    let l_in = s.spatial(Polarization::L);
    let proj: Vec<Complex64> = r_in
        .iter()
        .zip(l_in)
        .map(|(r, l)| e.alpha.conj() * r + e.beta.conj() * l)
        .collect();
    for (o, c) in out.spatial_mut(Polarization::R).iter_mut().zip(&proj) {
        *o = c * e.alpha;
    }
    for (o, c) in out.spatial_mut(Polarization::L).iter_mut().zip(&proj) {
        *o = c * e.beta;
    }
    out
}

/// Qubit in the `{|m=+1, p=0⟩, |m=-1, p=0⟩}` subspace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OamQubit {
    pub plus: Complex64,
    pub minus: Complex64,
}

impl OamQubit {
    pub fn new(plus: Complex64, minus: Complex64) -> Result<Self> {
        let q = PolarizationQubit::new(plus, minus)?;
        Ok(Self { plus: q.alpha, minus: q.beta })
    }

    /// The OAM qubit left by [`erase_polarization`] on an encoded input
    /// `α|R⟩ + β|L⟩`: `|0_L⟩` lives at `m = -1`, `|1_L⟩` at `m = +1`.
    pub fn from_encoded(q: &PolarizationQubit) -> Self {
        Self { plus: q.beta, minus: q.alpha }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OamDetection {
    pub fidelity: f64,
    pub survival: f64,
}

/// Projects onto the `m = ±1, p = 0` subspace, traces out polarization and
/// returns the conditional fidelity with `reference`.
pub fn oam_decode(s: &SpinOrbitState, reference: &OamQubit) -> Result<OamDetection> {
    let mut rho = [[Complex64::new(0.0, 0.0); 2]; 2];
    for pol in Polarization::BOTH {
        let v = [s.amp(pol, 1, 0), s.amp(pol, -1, 0)];
        for i in 0..2 {
            for j in 0..2 {
                rho[i][j] += v[i] * v[j].conj();
            }
        }
    }
    let survival = rho[0][0].re + rho[1][1].re;
    if survival < DETECTION_FLOOR {
        return Err(Error::UndefinedQubit { survival });
    }
    let r = [reference.plus, reference.minus];
    let mut f = Complex64::new(0.0, 0.0);
    for i in 0..2 {
        for j in 0..2 {
            f += r[i].conj() * rho[i][j] * r[j];
        }
    }
    Ok(OamDetection { fidelity: (f.re / survival).clamp(0.0, 1.0), survival })
}

/// Equal-weight horizontal polarizer used for the pure-OAM encoding.
pub const OAM_POLARIZER_ANGLE: f64 = 0.0;
