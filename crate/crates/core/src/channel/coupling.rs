//! The mode-coupling tensor `C_{m,m';p,p'}` and the invariance condition.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::io::Write;

use crate::error::{Error, Result};
use crate::format::format_sig;
use crate::modes::{check_same_basis, BasisSpec, Polarization, SpinOrbitState};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// How a coupling treats polarization.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PolAction {
    /// Spatial perturbation: both polarizations see the same tensor.
    Identity,
    /// Tuned q-plate: `L ↔ R`. The stored tensor is the action on `L`
    /// inputs (`m → m + 1`); `R` inputs use its mirror image
    /// `C_{-m,-m';p,p'}` (`m → m - 1`).
    SwapWithOamShift,
}

/// Dense coupling tensor. Input mode `(m, p)` goes to output `(m', p')` with
/// amplitude `C_{m,m';p,p'}`, stored as `matrix[(out, in)]` over spatial
/// indices.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeCoupling {
    basis: BasisSpec,
    pol_action: PolAction,
    matrix: DMatrix<Complex64>,
}

impl ModeCoupling {
    pub fn new(basis: BasisSpec, pol_action: PolAction, matrix: DMatrix<Complex64>) -> Result<Self> {
        let n = basis.spatial_dim();
        if matrix.shape() != (n, n) {
            return Err(Error::BasisMismatch(format!(
                "coupling matrix is {:?}, basis needs {n}x{n}",
                matrix.shape()
            )));
        }
        Ok(Self { basis, pol_action, matrix })
    }

    pub fn identity(basis: BasisSpec) -> Self {
        let n = basis.spatial_dim();
        Self { basis, pol_action: PolAction::Identity, matrix: DMatrix::identity(n, n) }
    }

    /// Diagonal coupling with `phase(m, p)` on each mode.
    pub fn diagonal(basis: BasisSpec, phase: impl Fn(i64, usize) -> Complex64) -> Self {
        let n = basis.spatial_dim();
        let mut matrix = DMatrix::zeros(n, n);
        for i in 0..n {
            let (m, p) = basis.spatial_mode(i);
            matrix[(i, i)] = phase(m, p);
        }
        Self { basis, pol_action: PolAction::Identity, matrix }
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn pol_action(&self) -> PolAction {
        self.pol_action
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    /// `C_{m,m';p,p'}`; zero outside the truncation.
    pub fn c(&self, m: i64, m_prime: i64, p: usize, p_prime: usize) -> Complex64 {
        match (self.basis.spatial_index(m, p), self.basis.spatial_index(m_prime, p_prime)) {
            (Some(i), Some(o)) => self.matrix[(o, i)],
            _ => ZERO,
        }
    }

    /// Coupling of `self` followed by `next`. Only defined for spatial
    /// (polarization-identity) couplings.
    pub fn then(&self, next: &ModeCoupling) -> Result<ModeCoupling> {
        check_same_basis(&self.basis, &next.basis)?;
        if self.pol_action != PolAction::Identity || next.pol_action != PolAction::Identity {
            return Err(Error::Domain("only spatial couplings can be composed".into()));
        }
        Ok(Self { basis: self.basis, pol_action: PolAction::Identity, matrix: &next.matrix * &self.matrix })
    }

    /// Largest coefficient magnitude.
    pub fn max_abs(&self) -> f64 {
        self.matrix.iter().map(|c| c.norm()).fold(0.0, f64::max)
    }

    /// Writes `m,m_prime,p,p_prime,re,im` rows (12 significant digits) for
    /// every coefficient, inputs outermost.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
        let io = |e: csv::Error| Error::Io { path: "<coefficient table>".into(), source: e.into() };
        w.write_record(["m", "m_prime", "p", "p_prime", "re", "im"]).map_err(io)?;
        let n = self.basis.spatial_dim();
        for i in 0..n {
            let (m, p) = self.basis.spatial_mode(i);
            for o in 0..n {
                let (mp, pp) = self.basis.spatial_mode(o);
                let c = self.matrix[(o, i)];
                w.write_record([
                    m.to_string(),
                    mp.to_string(),
                    p.to_string(),
                    pp.to_string(),
                    format_sig(c.re, 12),
                    format_sig(c.im, 12),
                ])
                .map_err(io)?;
            }
        }
        w.flush().map_err(|e| Error::Io { path: "<coefficient table>".into(), source: e })
    }
}

/// Linear contraction of `s` with `c` over `(m, p)`.
pub fn apply_coupling(s: &SpinOrbitState, c: &ModeCoupling) -> Result<SpinOrbitState> {
    check_same_basis(s.basis(), &c.basis)?;
    let basis = c.basis;
    let mut out = SpinOrbitState::zeros(basis);
    match c.pol_action {
        PolAction::Identity => {
            for pol in Polarization::BOTH {
                let v = &c.matrix * nalgebra::DVector::from_column_slice(s.spatial(pol));
                out.spatial_mut(pol).copy_from_slice(v.as_slice());
            }
        }
        PolAction::SwapWithOamShift => {
            let l_in = nalgebra::DVector::from_column_slice(s.spatial(Polarization::L));
            let v = &c.matrix * l_in;
            out.spatial_mut(Polarization::R).copy_from_slice(v.as_slice());
            // mirror m → -m on both sides for the R input
            let mirror = |v: &[Complex64]| -> Vec<Complex64> {
                (0..v.len())
                    .map(|i| {
                        let (m, p) = basis.spatial_mode(i);
                        v[basis.spatial_index(-m, p).expect("basis is symmetric in m")]
                    })
                    .collect()
            };
            let r_in = nalgebra::DVector::from_vec(mirror(s.spatial(Polarization::R)));
            let v = &c.matrix * r_in;
            let back = mirror(v.as_slice());
            out.spatial_mut(Polarization::L).copy_from_slice(&back);
        }
    }
    Ok(out)
}

/// Outcome of the invariance test `C_{-1,-1;p,p'} = C_{+1,+1;p,p'}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvarianceReport {
    pub holds: bool,
    /// `max |C_{-1,-1;p,p'} - C_{+1,+1;p,p'}| / max(1, max |C|)`.
    pub max_dev: f64,
}

pub fn check_invariance(c: &ModeCoupling, tol: f64) -> InvarianceReport {
    let pm = c.basis.p_max();
    let mut dev: f64 = 0.0;
    for p in 0..=pm {
        for pp in 0..=pm {
            dev = dev.max((c.c(-1, -1, p, pp) - c.c(1, 1, p, pp)).norm());
        }
    }
    let max_dev = dev / c.max_abs().max(1.0);
    InvarianceReport { holds: max_dev <= tol, max_dev }
}

/// The coupling seen by an encoded logical qubit after decoding:
/// `K_σ = Σ_{p,p'} Q_{0,1;0,p} C_{σ,σ;p,p'} Q_{1,0;p',0}` for `σ = -1`
/// (`|0_L⟩`) and `σ = +1` (`|1_L⟩`). The decoded qubit is
/// `(α K₋, β K₊)`, so the channel preserves every qubit iff `K₋ = K₊`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProjectedCoupling {
    pub k_minus: Complex64,
    pub k_plus: Complex64,
}

impl ProjectedCoupling {
    /// Fidelity of the decoded qubit with the input `(alpha, beta)`.
    pub fn fidelity(&self, alpha: Complex64, beta: Complex64) -> f64 {
        let (a2, b2) = (alpha.norm_sqr(), beta.norm_sqr());
        let num = (self.k_minus * a2 + self.k_plus * b2).norm_sqr();
        let den = (a2 + b2) * (a2 * self.k_minus.norm_sqr() + b2 * self.k_plus.norm_sqr());
        if den > 0.0 {
            (num / den).min(1.0)
        } else {
            f64::NAN
        }
    }

    /// Detection probability for the input `(alpha, beta)`.
    pub fn survival(&self, alpha: Complex64, beta: Complex64) -> f64 {
        alpha.norm_sqr() * self.k_minus.norm_sqr() + beta.norm_sqr() * self.k_plus.norm_sqr()
    }

    pub fn deviation(&self) -> f64 {
        (self.k_minus - self.k_plus).norm()
    }
}

/// Projects `c` onto the logical encoding with radial profile `q_profile`
/// (`Q_{0,1;0,p}` for `p = 0..=p_max`).
pub fn project_coupling(c: &ModeCoupling, q_profile: &[f64]) -> ProjectedCoupling {
    let k = |sigma: i64| {
        let mut acc = ZERO;
        for (p, &qp) in q_profile.iter().enumerate() {
            for (pp, &qpp) in q_profile.iter().enumerate() {
                acc += c.c(sigma, sigma, p, pp) * (qp * qpp);
            }
        }
        acc
    };
    ProjectedCoupling { k_minus: k(-1), k_plus: k(1) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::make_basis;

    #[test]
    fn identity_coupling_is_identity() {
        let b = make_basis(2, 3, 1.0, 1.0).unwrap();
        let mut s = SpinOrbitState::zeros(b);
        s.set(Polarization::L, -1, 2, Complex64::new(0.3, -0.1)).unwrap();
        s.set(Polarization::R, 2, 0, Complex64::new(0.0, 0.7)).unwrap();
        assert_eq!(apply_coupling(&s, &ModeCoupling::identity(b)).unwrap(), s);
        assert!(check_invariance(&ModeCoupling::identity(b), 0.0).holds);
    }

    #[test]
    fn mismatched_basis_is_rejected() {
        let a = make_basis(2, 3, 1.0, 1.0).unwrap();
        let b = make_basis(2, 2, 1.0, 1.0).unwrap();
        let s = SpinOrbitState::zeros(a);
        assert!(matches!(apply_coupling(&s, &ModeCoupling::identity(b)), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn swap_coupling_mirrors_for_r_inputs() {
        let b = make_basis(2, 0, 1.0, 1.0).unwrap();
        let n = b.spatial_dim();
        let mut m = DMatrix::zeros(n, n);
        // L: m -> m + 1 with weight 2 + m
        for mm in -2i64..2 {
            let i = b.spatial_index(mm, 0).unwrap();
            let o = b.spatial_index(mm + 1, 0).unwrap();
            m[(o, i)] = Complex64::new(2.0 + mm as f64, 0.0);
        }
        let c = ModeCoupling::new(b, PolAction::SwapWithOamShift, m).unwrap();
        let s = SpinOrbitState::basis_state(b, Polarization::R, 1, 0).unwrap();
        let out = apply_coupling(&s, &c).unwrap();
        // mirrored: R, m=1 -> L, m=0 with the weight of L, m=-1 -> m=0
        assert_eq!(out.amp(Polarization::L, 0, 0), Complex64::new(1.0, 0.0));
        assert_eq!(out.norm_sqr(), 1.0);
    }

    #[test]
    fn asymmetric_diagonal_breaks_invariance() {
        let b = make_basis(2, 1, 1.0, 1.0).unwrap();
        let c = ModeCoupling::diagonal(b, |m, _| Complex64::from_polar(1.0, 0.1 * m as f64));
        let r = check_invariance(&c, 1e-9);
        assert!(!r.holds);
        assert!((r.max_dev - (Complex64::from_polar(1.0, 0.1) - Complex64::from_polar(1.0, -0.1)).norm()).abs() < 1e-15);
        let proj = project_coupling(&c, &[0.8, 0.6]);
        assert!(proj.fidelity(Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)) < 1.0);
        assert!((proj.fidelity(Complex64::new(1.0, 0.0), ZERO) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn csv_export_lists_every_coefficient() {
        let b = make_basis(1, 0, 1.0, 1.0).unwrap();
        let mut buf = Vec::new();
        ModeCoupling::identity(b).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], "m,m_prime,p,p_prime,re,im");
        assert_eq!(lines.len(), 1 + 9);
        assert_eq!(lines[1], "-1,-1,0,0,1,0");
        assert!(!text.contains('\r'));
    }
}
