//! Laguerre-Gauss fields at the waist plane.

use num_complex::Complex64;
use std::f64::consts::PI;

use super::special::{assoc_laguerre, assoc_laguerre_ladder, ln_factorial};

/// A complex field on the transverse plane, evaluated in polar coordinates.
pub trait ScalarField: Sync {
    fn eval(&self, rho: f64, phi: f64) -> Complex64;
}

impl<F> ScalarField for F
where
    F: Fn(f64, f64) -> Complex64 + Sync,
{
    fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        self(rho, phi)
    }
}

/// L2 normalization constant of `LG_{p,m}` at waist `w0`.
pub fn lg_norm(p: usize, abs_m: usize, w0: f64) -> f64 {
    let ln_ratio = ln_factorial(p) - ln_factorial(p + abs_m);
    (2.0 / PI * ln_ratio.exp()).sqrt() / w0
}

/// Radial profile of `LG_{p,m}` (the field without its `e^{imφ}` factor).
pub fn lg_radial(p: usize, abs_m: usize, rho: f64, w0: f64) -> f64 {
    let s = rho / w0;
    let x = 2.0 * s * s;
    lg_norm(p, abs_m, w0)
        * (std::f64::consts::SQRT_2 * s).powi(abs_m as i32)
        * assoc_laguerre(p, abs_m as f64, x)
        * (-s * s).exp()
}

/// Normalized Laguerre-Gauss amplitude `LG_{p,m}(ρ, φ)` at the waist plane.
pub fn lg_field(p: usize, m: i64, rho: f64, phi: f64, w0: f64) -> Complex64 {
    let abs_m = m.unsigned_abs() as usize;
    Complex64::from_polar(lg_radial(p, abs_m, rho, w0), m as f64 * phi)
}

/// `LG_{p,m}` as a [`ScalarField`].
#[derive(Debug, Clone, Copy)]
pub struct LgMode {
    pub p: usize,
    pub m: i64,
    pub w0: f64,
}

impl LgMode {
    pub fn new(p: usize, m: i64, w0: f64) -> Self {
        Self { p, m, w0 }
    }
}

impl ScalarField for LgMode {
    fn eval(&self, rho: f64, phi: f64) -> Complex64 {
        lg_field(self.p, self.m, rho, phi, self.w0)
    }
}

/// Evaluates the whole truncated LG family `|m| <= m_max`, `p <= p_max` at a
/// point, sharing the Gaussian, the Laguerre ladders and the azimuthal powers.
///
/// Output order is `m`-major (`m = -m_max ..= m_max`), then `p`.
#[derive(Debug, Clone)]
pub struct LgFamily {
    m_max: usize,
    p_max: usize,
    w0: f64,
    /// `norms[|m|][p]`
    norms: Vec<Vec<f64>>,
}

impl LgFamily {
    pub fn new(m_max: usize, p_max: usize, w0: f64) -> Self {
        let norms = (0..=m_max)
            .map(|am| (0..=p_max).map(|p| lg_norm(p, am, w0)).collect())
            .collect();
        Self { m_max, p_max, w0, norms }
    }

    pub fn len(&self) -> usize {
        (2 * self.m_max + 1) * (self.p_max + 1)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Radial profiles `radial[|m|][p]` at `rho`.
    pub fn radial(&self, rho: f64) -> Vec<Vec<f64>> {
        let s = rho / self.w0;
        let x = 2.0 * s * s;
        let gauss = (-s * s).exp();
        let sq = std::f64::consts::SQRT_2 * s;
        let mut out = vec![vec![0.0; self.p_max + 1]; self.m_max + 1];
        let mut pow = gauss;
        for (am, row) in out.iter_mut().enumerate() {
            assoc_laguerre_ladder(am as f64, x, row);
            for (p, v) in row.iter_mut().enumerate() {
                *v *= self.norms[am][p] * pow;
            }
            pow *= sq;
        }
        out
    }

    /// All mode values at Cartesian point `(x, y)` written into `out`.
    pub fn eval_xy(&self, x: f64, y: f64, out: &mut [Complex64]) {
        let rho = x.hypot(y);
        let radial = self.radial(rho);
        let unit = if rho > 0.0 {
            Complex64::new(x / rho, y / rho)
        } else {
            Complex64::new(1.0, 0.0)
        };
        let np = self.p_max + 1;
        let mut phase_pos = Complex64::new(1.0, 0.0);
        for am in 0..=self.m_max {
            let phase_neg = phase_pos.conj();
            for p in 0..np {
                let r = radial[am][p];
                out[(self.m_max + am) * np + p] = phase_pos * r;
                out[(self.m_max - am) * np + p] = phase_neg * r;
            }
            phase_pos *= unit;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn abs_m_symmetry_on_axis() {
        for i in 0..50 {
            let rho = 0.07 * i as f64;
            assert_eq!(lg_field(0, 1, rho, 0.0, 1.3), lg_field(0, -1, rho, 0.0, 1.3));
        }
    }

    #[test]
    fn family_matches_single_modes() {
        let fam = LgFamily::new(3, 4, 0.8);
        let mut vals = vec![Complex64::new(0.0, 0.0); fam.len()];
        let (x, y) = (0.31, -0.57);
        fam.eval_xy(x, y, &mut vals);
        let (rho, phi) = (x.hypot(y), y.atan2(x));
        for m in -3i64..=3 {
            for p in 0..=4 {
                let idx = (m + 3) as usize * 5 + p;
                let direct = lg_field(p, m, rho, phi, 0.8);
                assert!((vals[idx] - direct).norm() < 1e-14, "m={m} p={p}");
            }
        }
    }

    #[test]
    fn gaussian_norm_closed_form() {
        // LG_00 = sqrt(2/pi)/w0 exp(-rho^2/w0^2)
        let w0 = 1.7;
        let v = lg_field(0, 0, 0.4, 1.0, w0);
        let expect = (2.0 / PI).sqrt() / w0 * (-(0.4f64 / w0).powi(2)).exp();
        assert!((v.re - expect).abs() < 1e-15 && v.im == 0.0);
    }
}
