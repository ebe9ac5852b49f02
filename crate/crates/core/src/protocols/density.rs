//! Two-qubit density matrices: tomography, concurrence and CHSH correlators.

use nalgebra::{DMatrix, DVector, Matrix2, Matrix4, SymmetricEigen, Vector4};
use num_complex::Complex64;
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8};
use std::sync::OnceLock;

use crate::error::{Error, Result};
use crate::modes::LogicalLabel;

const HERMITIAN_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-10;

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// Density matrix over `{|00⟩, |01⟩, |10⟩, |11⟩}` (first index arm A).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoQubitDensityMatrix {
    rho: Matrix4<Complex64>,
}

impl TwoQubitDensityMatrix {
    /// Validates Hermiticity and positivity and renormalizes the trace.
    pub fn new(rho: Matrix4<Complex64>) -> Result<Self> {
        let scale = rho.iter().map(|z| z.norm()).fold(0.0, f64::max).max(1.0);
        if (rho - rho.adjoint()).iter().any(|z| z.norm() > HERMITIAN_TOL * scale) {
            return Err(Error::Domain("density matrix is not Hermitian".into()));
        }
        let tr = rho.trace().re;
        if !(tr > 0.0) || !tr.is_finite() {
            return Err(Error::Domain(format!("density matrix trace {tr} is not positive")));
        }
        let rho = hermitize(&rho) / c(tr);
        let min = hermitian_eigen(&rho).eigenvalues.min();
        if min < -PSD_TOL {
            return Err(Error::Domain(format!("density matrix has eigenvalue {min:e}")));
        }
        Ok(Self { rho })
    }

    pub fn pure(v: &Vector4<Complex64>) -> Result<Self> {
        Self::new(v * v.adjoint())
    }

    pub fn maximally_mixed() -> Self {
        Self { rho: Matrix4::identity() / c(4.0) }
    }

    /// `p|ψ⟩⟨ψ| + (1-p) I/4`.
    pub fn werner(p: f64, v: &Vector4<Complex64>) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("Werner weight must lie in [0, 1], got {p}")));
        }
        let pure = Self::pure(v)?;
        Self::new(pure.rho * c(p) + Matrix4::identity() * c((1.0 - p) / 4.0))
    }

    pub fn matrix(&self) -> &Matrix4<Complex64> {
        &self.rho
    }

    pub fn trace(&self) -> f64 {
        self.rho.trace().re
    }

    /// `⟨ψ|ρ|ψ⟩` for normalized `ψ`.
    pub fn fidelity_pure(&self, v: &Vector4<Complex64>) -> f64 {
        let n = v.norm_squared();
        (v.adjoint() * self.rho * v)[(0, 0)].re / n
    }

    /// Largest entrywise deviation from `other`.
    pub fn max_abs_diff(&self, other: &TwoQubitDensityMatrix) -> f64 {
        (self.rho - other.rho).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn eigenvalues(&self) -> [f64; 4] {
        let e = hermitian_eigen(&self.rho).eigenvalues;
        [e[0], e[1], e[2], e[3]]
    }

    /// Joint outcome probability for the product projector `|a⟩⊗|b⟩`.
    pub fn product_probability(&self, a: &[Complex64; 2], b: &[Complex64; 2]) -> f64 {
        let v = kron(a, b);
        (v.adjoint() * self.rho * v)[(0, 0)].re
    }
}

/// `(|00⟩ - |11⟩)/√2`.
pub fn phi_minus() -> Vector4<Complex64> {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    Vector4::new(c(h), c(0.0), c(0.0), c(-h))
}

pub(crate) fn kron(a: &[Complex64; 2], b: &[Complex64; 2]) -> Vector4<Complex64> {
    Vector4::new(a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
}

fn hermitize(m: &Matrix4<Complex64>) -> Matrix4<Complex64> {
    (m + m.adjoint()) * c(0.5)
}

fn hermitian_eigen(m: &Matrix4<Complex64>) -> SymmetricEigen<Complex64, nalgebra::U4> {
    SymmetricEigen::new(hermitize(m))
}

/// Wootters concurrence `max(0, λ₁ - λ₂ - λ₃ - λ₄)`, with `λᵢ` the square
/// roots of the eigenvalues of `ρ (Y⊗Y) ρ* (Y⊗Y)`. They are taken as the
/// singular values of `Wᵀ (Y⊗Y) W` for `ρ = W W†`, which keeps pure states
/// accurate to rounding.
pub fn concurrence(rho: &TwoQubitDensityMatrix) -> f64 {
    let y = Matrix2::new(c(0.0), Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), c(0.0));
    let yy = y.kronecker(&y);
    let e = hermitian_eigen(&rho.rho);
    let w = e.eigenvectors * Matrix4::from_diagonal(&e.eigenvalues.map(|l| c(l.max(0.0).sqrt())));
    let t = w.transpose() * yy * w;
    let mut l: Vec<f64> = t.singular_values().iter().copied().collect();
    l.sort_by(|a, b| b.total_cmp(a));
    (l[0] - l[1] - l[2] - l[3]).max(0.0)
}

fn mub_vectors() -> [[Complex64; 2]; 6] {
    LogicalLabel::MUB.map(|l| {
        let q = l.amplitudes();
        [q.alpha, q.beta]
    })
}

/// Probabilities of the 36 product projectors built from the six MUB
/// eigenstates, arm-A index outermost, in [`LogicalLabel::MUB`] order.
pub fn tomography_probs(rho: &TwoQubitDensityMatrix) -> [f64; 36] {
    let v = mub_vectors();
    let mut out = [0.0; 36];
    for i in 0..6 {
        for j in 0..6 {
            out[6 * i + j] = rho.product_probability(&v[i], &v[j]);
        }
    }
    out
}

fn paulis() -> [Matrix2<Complex64>; 4] {
    let z = c(0.0);
    let o = c(1.0);
    let i = Complex64::new(0.0, 1.0);
    [
        Matrix2::new(o, z, z, o),
        Matrix2::new(z, o, o, z),
        Matrix2::new(z, -i, i, z),
        Matrix2::new(o, z, z, -o),
    ]
}

struct TomographyMap {
    /// `σ_a ⊗ σ_b` for the 16 Pauli products.
    basis: Vec<Matrix4<Complex64>>,
    /// Least-squares pseudo-inverse `(AᵀA)⁻¹Aᵀ` of the probability map.
    pinv: DMatrix<f64>,
}

fn tomography_map() -> &'static TomographyMap {
    static MAP: OnceLock<TomographyMap> = OnceLock::new();
    MAP.get_or_init(|| {
        let p = paulis();
        let basis: Vec<Matrix4<Complex64>> =
            (0..16).map(|k| p[k / 4].kronecker(&p[k % 4])).collect();
        let v = mub_vectors();
        let mut a = DMatrix::<f64>::zeros(36, 16);
        for i in 0..6 {
            for j in 0..6 {
                let proj = kron(&v[i], &v[j]);
                for (k, b) in basis.iter().enumerate() {
                    a[(6 * i + j, k)] = (proj.adjoint() * b * proj)[(0, 0)].re / 4.0;
                }
            }
        }
        let ata = a.transpose() * &a;
        let min = ata.clone().symmetric_eigen().eigenvalues.min();
        assert!(min > 1e-6, "tomographic projector set is rank-deficient (min eigenvalue {min:e})");
        let inv = ata.try_inverse().expect("full-rank normal matrix");
        TomographyMap { basis, pinv: inv * a.transpose() }
    })
}

/// Linear-inversion estimate, Hermitian with unit trace but not necessarily
/// positive.
pub fn tomography_reconstruct_unclipped(probs: &[f64; 36]) -> Matrix4<Complex64> {
    let map = tomography_map();
    let r = &map.pinv * DVector::from_column_slice(probs);
    let mut rho = Matrix4::zeros();
    for (k, b) in map.basis.iter().enumerate() {
        rho += b * c(r[k] / 4.0);
    }
    let rho = hermitize(&rho);
    let tr = rho.trace().re;
    rho / c(tr)
}

/// Linear inversion followed by eigenvalue clipping at zero and trace
/// renormalization.
pub fn tomography_reconstruct(probs: &[f64; 36]) -> Result<TwoQubitDensityMatrix> {
    let raw = tomography_reconstruct_unclipped(probs);
    let e = hermitian_eigen(&raw);
    let clipped = e.eigenvalues.map(|l| c(l.max(0.0)));
    let rho = e.eigenvectors * Matrix4::from_diagonal(&clipped) * e.eigenvectors.adjoint();
    TwoQubitDensityMatrix::new(rho)
}

/// Real measurement basis `{cos a|0⟩ + sin a|1⟩, -sin a|0⟩ + cos a|1⟩}`.
fn setting(a: f64) -> [[Complex64; 2]; 2] {
    [[c(a.cos()), c(a.sin())], [c(-a.sin()), c(a.cos())]]
}

/// Alice measures `{0, 1}` and `{+, -}`, Bob the same bases rotated by `π/8`.
pub const ALICE_SETTINGS: [f64; 2] = [0.0, FRAC_PI_4];
pub const BOB_SETTINGS: [f64; 2] = [FRAC_PI_8, 3.0 * FRAC_PI_8];

/// `E(a, b)` for every pair of settings, `[a][b]`, with the literal labeling
/// (outcome 0 is the first basis vector).
pub fn correlators(rho: &TwoQubitDensityMatrix) -> [[f64; 2]; 2] {
    let mut e = [[0.0; 2]; 2];
    for (x, &a) in ALICE_SETTINGS.iter().enumerate() {
        for (y, &b) in BOB_SETTINGS.iter().enumerate() {
            let (sa, sb) = (setting(a), setting(b));
            let mut sum = 0.0;
            let mut norm = 0.0;
            for i in 0..2 {
                for j in 0..2 {
                    let p = rho.product_probability(&sa[i], &sb[j]);
                    norm += p;
                    sum += if i == j { p } else { -p };
                }
            }
            e[x][y] = sum / norm;
        }
    }
    e
}

fn chsh_combination(e: &[[f64; 2]; 2], labeling: u8) -> f64 {
    let sign = |bit: u8| if labeling >> bit & 1 == 1 { -1.0 } else { 1.0 };
    let (a0, a1, b0, b1) = (sign(0), sign(1), sign(2), sign(3));
    (a0 * b0 * e[0][0] + a1 * b0 * e[1][0] + a0 * b1 * e[0][1] - a1 * b1 * e[1][1]).abs()
}

/// Outcome relabeling used by [`chsh_s`], as a bit mask over the settings
/// `(A₀, A₁, B₀, B₁)`: the first of the 16 relabelings that maximizes `S` on
/// the ideal `|φ⁻⟩`.
pub fn chsh_labeling() -> u8 {
    static LABELING: OnceLock<u8> = OnceLock::new();
    *LABELING.get_or_init(|| {
        let ideal = TwoQubitDensityMatrix::pure(&phi_minus()).expect("normalized state");
        let e = correlators(&ideal);
        let mut best = (0u8, f64::NEG_INFINITY);
        for mask in 0..16u8 {
            let s = chsh_combination(&e, mask);
            if s > best.1 + 1e-12 {
                best = (mask, s);
            }
        }
        best.0
    })
}

/// `S = |E(a₀,b₀) + E(a₁,b₀) + E(a₀,b₁) - E(a₁,b₁)|` under the fixed labeling.
pub fn chsh_s(rho: &TwoQubitDensityMatrix) -> f64 {
    chsh_combination(&correlators(rho), chsh_labeling())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn random_density(seed: &[f64]) -> TwoQubitDensityMatrix {
        let mut g = Matrix4::<Complex64>::zeros();
        for k in 0..16 {
            g[(k / 4, k % 4)] = Complex64::new(seed[2 * k], seed[2 * k + 1]);
        }
        TwoQubitDensityMatrix::new(g * g.adjoint()).unwrap()
    }

    fn seed() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-1.0..1.0f64, 32).prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
    }

    #[test]
    fn validation() {
        let mut m = Matrix4::<Complex64>::identity();
        m[(0, 1)] = c(1.0);
        assert!(TwoQubitDensityMatrix::new(m).is_err());
        let neg = Matrix4::from_diagonal(&Vector4::new(c(1.0), c(1.0), c(1.0), c(-0.5)));
        assert!(TwoQubitDensityMatrix::new(neg).is_err());
        let r = TwoQubitDensityMatrix::new(Matrix4::identity() * c(3.0)).unwrap();
        assert!((r.trace() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn concurrence_values() {
        let bell = TwoQubitDensityMatrix::pure(&phi_minus()).unwrap();
        assert!((concurrence(&bell) - 1.0).abs() < 1e-9);
        assert!(concurrence(&TwoQubitDensityMatrix::maximally_mixed()).abs() < 1e-12);
        let w = TwoQubitDensityMatrix::werner(0.9, &phi_minus()).unwrap();
        assert!((concurrence(&w) - 0.85).abs() < 1e-9);
        let w = TwoQubitDensityMatrix::werner(0.3, &phi_minus()).unwrap();
        assert!(concurrence(&w).abs() < 1e-9);
        let product = TwoQubitDensityMatrix::pure(&kron(&[c(1.0), c(0.0)], &[c(0.6), c(0.8)])).unwrap();
        assert!(concurrence(&product).abs() < 1e-12);
        // local unitary on a Bell state
        let (a, b) = (0.3f64, 1.1f64);
        let u = Matrix2::new(c(a.cos()), c(-a.sin()), Complex64::from_polar(a.sin(), b), Complex64::from_polar(a.cos(), b));
        let v = u.kronecker(&Matrix2::identity()) * phi_minus();
        assert!((concurrence(&TwoQubitDensityMatrix::pure(&v).unwrap()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn chsh_values() {
        let bell = TwoQubitDensityMatrix::pure(&phi_minus()).unwrap();
        assert!((chsh_s(&bell) - 2.0 * std::f64::consts::SQRT_2).abs() < 1e-12);
        let literal = correlators(&bell);
        assert!(chsh_combination(&literal, 0) < 1e-12);
        let product = TwoQubitDensityMatrix::pure(&kron(&[c(1.0), c(0.0)], &[c(1.0), c(0.0)])).unwrap();
        assert!(chsh_s(&product) <= 2.0 + 1e-12);
        assert_eq!(chsh_labeling(), 5);
    }

    #[test]
    fn tomography_of_bell_state() {
        let bell = TwoQubitDensityMatrix::pure(&phi_minus()).unwrap();
        let probs = tomography_probs(&bell);
        assert!((probs.iter().sum::<f64>() - 9.0).abs() < 1e-12);
        let back = tomography_reconstruct(&probs).unwrap();
        assert!((back.fidelity_pure(&phi_minus()) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn clipping_repairs_negative_estimates() {
        let bell = TwoQubitDensityMatrix::pure(&phi_minus()).unwrap();
        let mut probs = tomography_probs(&bell);
        probs[0] += 0.05;
        probs[7] -= 0.05;
        let raw = tomography_reconstruct_unclipped(&probs);
        let raw_min = hermitian_eigen(&raw).eigenvalues.min();
        assert!(raw_min < 0.0);
        let fixed = tomography_reconstruct(&probs).unwrap();
        assert!(fixed.eigenvalues().iter().all(|&l| l > -1e-12));
        assert!((fixed.trace() - 1.0).abs() < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]
        #[test]
        fn tsirelson_bound(s in seed()) {
            let rho = random_density(&s);
            prop_assert!(chsh_s(&rho) <= 2.0 * std::f64::consts::SQRT_2 + 1e-9);
        }
    }

    proptest! {
        #[test]
        fn tomography_round_trip(s in seed()) {
            let rho = random_density(&s);
            let back = tomography_reconstruct_unclipped(&tomography_probs(&rho));
            let dev = (back - rho.matrix()).iter().map(|z| z.norm()).fold(0.0, f64::max);
            prop_assert!(dev < 1e-10, "{dev:e}");
        }

        #[test]
        fn concurrence_in_unit_interval(s in seed()) {
            let cc = concurrence(&random_density(&s));
            prop_assert!((-1e-12..=1.0 + 1e-9).contains(&cc));
        }
    }
}
