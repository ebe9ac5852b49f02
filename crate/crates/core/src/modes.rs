//! Truncated spin-orbit state space and single-photon states.
//!
//! Angular-momentum convention (used by every module): `|L⟩` carries spin
//! `σ = +1`, `|R⟩` carries `σ = -1`, and OAM `m` counts `ħ` units with the
//! azimuthal phase `e^{imφ}`. The logical states are
//! `|0_L⟩ = |L, m = -1⟩` and `|1_L⟩ = |R, m = +1⟩`, both with total angular
//! momentum `σ + m = 0`. A polarization qubit is stored as `α|R⟩ + β|L⟩`.

use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;

use crate::error::{Error, Result};

pub const DEFAULT_M_MAX: usize = 5;
pub const DEFAULT_P_MAX: usize = 8;

/// Survival below which a detected qubit is treated as undefined.
pub const DETECTION_FLOOR: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Polarization {
    L,
    R,
}

impl Polarization {
    pub const BOTH: [Polarization; 2] = [Polarization::L, Polarization::R];

    /// Spin angular momentum in units of ħ.
    pub const fn spin(self) -> i64 {
        match self {
            Polarization::L => 1,
            Polarization::R => -1,
        }
    }

    pub const fn flipped(self) -> Polarization {
        match self {
            Polarization::L => Polarization::R,
            Polarization::R => Polarization::L,
        }
    }

    const fn slot(self) -> usize {
        match self {
            Polarization::L => 0,
            Polarization::R => 1,
        }
    }
}

/// Mode-space truncation and beam parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BasisSpec {
    m_max: usize,
    p_max: usize,
    w0: f64,
    k: f64,
}

/// Validated [`BasisSpec`]; `m` runs over `[-m_max, m_max]`, `p` over `[0, p_max]`.
pub fn make_basis(m_max: i64, p_max: i64, w0: f64, k: f64) -> Result<BasisSpec> {
    if m_max < 1 {
        return Err(Error::Domain(format!("m_max must be >= 1 (got {m_max})")));
    }
    if p_max < 0 {
        return Err(Error::Domain(format!("p_max must be >= 0 (got {p_max})")));
    }
    if !(w0 > 0.0 && w0.is_finite()) || !(k > 0.0 && k.is_finite()) {
        return Err(Error::Domain(format!("w0 and k must be positive (got w0={w0}, k={k})")));
    }
    Ok(BasisSpec { m_max: m_max as usize, p_max: p_max as usize, w0, k })
}

impl BasisSpec {
    /// Default truncation with the given beam parameters.
    pub fn with_defaults(w0: f64, k: f64) -> Result<Self> {
        make_basis(DEFAULT_M_MAX as i64, DEFAULT_P_MAX as i64, w0, k)
    }

    pub fn m_max(&self) -> usize {
        self.m_max
    }

    pub fn p_max(&self) -> usize {
        self.p_max
    }

    pub fn w0(&self) -> f64 {
        self.w0
    }

    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn n_radial(&self) -> usize {
        self.p_max + 1
    }

    /// Number of spatial modes `(m, p)`.
    pub fn spatial_dim(&self) -> usize {
        (2 * self.m_max + 1) * (self.p_max + 1)
    }

    /// Number of `(pol, m, p)` states.
    pub fn dim(&self) -> usize {
        2 * self.spatial_dim()
    }

    pub fn contains(&self, m: i64, p: usize) -> bool {
        m.unsigned_abs() as usize <= self.m_max && p <= self.p_max
    }

    pub fn spatial_index(&self, m: i64, p: usize) -> Option<usize> {
        self.contains(m, p)
            .then(|| (m + self.m_max as i64) as usize * (self.p_max + 1) + p)
    }

    /// Inverse of [`Self::spatial_index`].
    pub fn spatial_mode(&self, idx: usize) -> (i64, usize) {
        let np = self.p_max + 1;
        ((idx / np) as i64 - self.m_max as i64, idx % np)
    }

    pub fn ms(&self) -> impl Iterator<Item = i64> {
        let mm = self.m_max as i64;
        -mm..=mm
    }

    pub(crate) fn same_truncation(&self, other: &BasisSpec) -> bool {
        self == other
    }
}

/// Pure single-photon state over `(pol, m, p)`, possibly subnormalized by
/// heralded losses.
#[derive(Debug, Clone, PartialEq)]
pub struct SpinOrbitState {
    basis: BasisSpec,
    amp: Vec<Complex64>,
}

impl SpinOrbitState {
    pub fn zeros(basis: BasisSpec) -> Self {
        Self { amp: vec![ZERO; basis.dim()], basis }
    }

    pub fn basis_state(basis: BasisSpec, pol: Polarization, m: i64, p: usize) -> Result<Self> {
        let mut s = Self::zeros(basis);
        s.set(pol, m, p, Complex64::new(1.0, 0.0))?;
        Ok(s)
    }

    /// `q ⊗ |m = 0, p = 0⟩`.
    pub fn fundamental(basis: BasisSpec, q: &PolarizationQubit) -> Self {
        let mut s = Self::zeros(basis);
        let i0 = basis.spatial_index(0, 0).expect("fundamental mode is always present");
        s.spatial_mut(Polarization::R)[i0] = q.alpha;
        s.spatial_mut(Polarization::L)[i0] = q.beta;
        s
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn amp(&self, pol: Polarization, m: i64, p: usize) -> Complex64 {
        self.basis
            .spatial_index(m, p)
            .map_or(ZERO, |i| self.spatial(pol)[i])
    }

    pub fn set(&mut self, pol: Polarization, m: i64, p: usize, value: Complex64) -> Result<()> {
        let i = self.basis.spatial_index(m, p).ok_or_else(|| {
            Error::Domain(format!("mode (m={m}, p={p}) is outside the truncated basis"))
        })?;
        self.spatial_mut(pol)[i] = value;
        Ok(())
    }

    /// Spatial amplitudes for one polarization, indexed by [`BasisSpec::spatial_index`].
    pub fn spatial(&self, pol: Polarization) -> &[Complex64] {
        let n = self.basis.spatial_dim();
        &self.amp[pol.slot() * n..(pol.slot() + 1) * n]
    }

    pub fn spatial_mut(&mut self, pol: Polarization) -> &mut [Complex64] {
        let n = self.basis.spatial_dim();
        &mut self.amp[pol.slot() * n..(pol.slot() + 1) * n]
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amp
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amp.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn scale(&mut self, factor: Complex64) {
        self.amp.iter_mut().for_each(|a| *a *= factor);
    }

    pub fn scaled(mut self, factor: Complex64) -> Self {
        self.scale(factor);
        self
    }

    /// `self + factor · other`.
    pub fn add_scaled(&mut self, factor: Complex64, other: &SpinOrbitState) -> Result<()> {
        check_same_basis(&self.basis, &other.basis)?;
        for (a, b) in self.amp.iter_mut().zip(&other.amp) {
            *a += factor * b;
        }
        Ok(())
    }

    /// Total weight outside `{(L, -1, p)} ∪ {(R, +1, p)}`.
    pub fn weight_outside_logical(&self) -> f64 {
        let mut w = 0.0;
        for pol in Polarization::BOTH {
            let logical_m = -pol.spin();
            for (i, a) in self.spatial(pol).iter().enumerate() {
                if self.basis.spatial_mode(i).0 != logical_m {
                    w += a.norm_sqr();
                }
            }
        }
        w
    }
}

pub(crate) fn check_same_basis(a: &BasisSpec, b: &BasisSpec) -> Result<()> {
    if a.same_truncation(b) {
        Ok(())
    } else {
        Err(Error::BasisMismatch(format!("{a:?} vs {b:?}")))
    }
}

/// Frame rotation by `theta` about the beam axis:
/// each amplitude picks up `e^{-i(σ + m)θ}`.
pub fn rotate_frame(s: &SpinOrbitState, theta: f64) -> SpinOrbitState {
    let mut out = s.clone();
    let basis = *s.basis();
    for pol in Polarization::BOTH {
        let sigma = pol.spin();
        for (i, a) in out.spatial_mut(pol).iter_mut().enumerate() {
            let (m, _) = basis.spatial_mode(i);
            let j = sigma + m;
            if j != 0 {
                *a *= Complex64::from_polar(1.0, -(j as f64) * theta);
            }
        }
    }
    out
}

/// `⟨a|b⟩`, conjugate-linear in `a`.
pub fn inner_product(a: &SpinOrbitState, b: &SpinOrbitState) -> Result<Complex64> {
    check_same_basis(a.basis(), b.basis())?;
    Ok(a.amp.iter().zip(&b.amp).map(|(x, y)| x.conj() * y).sum())
}

/// Polarization qubit `α|R⟩ + β|L⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationQubit {
    pub alpha: Complex64,
    pub beta: Complex64,
}

impl PolarizationQubit {
    /// Normalizing constructor.
    pub fn new(alpha: Complex64, beta: Complex64) -> Result<Self> {
        let n = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::Domain("qubit amplitudes must not both vanish".into()));
        }
        Ok(Self { alpha: alpha / n, beta: beta / n })
    }

    pub fn from_real(alpha: f64, beta: f64) -> Result<Self> {
        Self::new(Complex64::new(alpha, 0.0), Complex64::new(beta, 0.0))
    }

    pub fn r() -> Self {
        Self { alpha: Complex64::new(1.0, 0.0), beta: ZERO }
    }

    pub fn l() -> Self {
        Self { alpha: ZERO, beta: Complex64::new(1.0, 0.0) }
    }

    /// Linear polarization at `angle` from the horizontal:
    /// `(e^{iψ}|R⟩ + e^{-iψ}|L⟩)/√2`, so `H = (|R⟩ + |L⟩)/√2` and frame
    /// rotations act as `ψ → ψ + θ`.
    pub fn linear(angle: f64) -> Self {
        Self {
            alpha: Complex64::from_polar(FRAC_1_SQRT_2, angle),
            beta: Complex64::from_polar(FRAC_1_SQRT_2, -angle),
        }
    }

    pub fn overlap(&self, other: &PolarizationQubit) -> Complex64 {
        self.alpha.conj() * other.alpha + self.beta.conj() * other.beta
    }
}

/// `|⟨a|b⟩|²`.
pub fn qubit_fidelity(a: &PolarizationQubit, b: &PolarizationQubit) -> f64 {
    a.overlap(b).norm_sqr().min(1.0)
}

/// Outcome of the single-mode-fiber projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Detection {
    /// Conditional qubit; `None` when `survival` is below [`DETECTION_FLOOR`].
    pub qubit: Option<PolarizationQubit>,
    pub survival: f64,
    /// Unnormalized `(amp(R,0,0), amp(L,0,0))`.
    pub raw: [Complex64; 2],
}

impl Detection {
    pub fn qubit(&self) -> Result<PolarizationQubit> {
        self.qubit.ok_or(Error::UndefinedQubit { survival: self.survival })
    }
}

/// Single-mode-fiber filter: keeps only `m = 0, p = 0` and reads out the
/// polarization qubit conditioned on transmission.
pub fn project_fundamental(s: &SpinOrbitState) -> Detection {
    let r = s.amp(Polarization::R, 0, 0);
    let l = s.amp(Polarization::L, 0, 0);
    let survival = r.norm_sqr() + l.norm_sqr();
    let qubit = (survival >= DETECTION_FLOOR).then(|| {
        let n = survival.sqrt();
        PolarizationQubit { alpha: r / n, beta: l / n }
    });
    Detection { qubit, survival, raw: [r, l] }
}

/// The six eigenstates of the three mutually unbiased qubit bases, labelled
/// in the logical alphabet.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LogicalLabel {
    Zero,
    One,
    Plus,
    Minus,
    PlusI,
    MinusI,
}

impl LogicalLabel {
    pub const BB84: [LogicalLabel; 4] =
        [LogicalLabel::Zero, LogicalLabel::One, LogicalLabel::Plus, LogicalLabel::Minus];
    pub const MUB: [LogicalLabel; 6] = [
        LogicalLabel::Zero,
        LogicalLabel::One,
        LogicalLabel::Plus,
        LogicalLabel::Minus,
        LogicalLabel::PlusI,
        LogicalLabel::MinusI,
    ];

    /// Amplitudes `(a₀, a₁)` on `|0_L⟩, |1_L⟩`. With the q-plate encoder these
    /// are the `(α, β)` of the input polarization qubit, since
    /// `|R⟩ → |0_L⟩` and `|L⟩ → |1_L⟩`.
    pub fn amplitudes(self) -> PolarizationQubit {
        let h = FRAC_1_SQRT_2;
        let (a, b) = match self {
            LogicalLabel::Zero => (Complex64::new(1.0, 0.0), ZERO),
            LogicalLabel::One => (ZERO, Complex64::new(1.0, 0.0)),
            LogicalLabel::Plus => (Complex64::new(h, 0.0), Complex64::new(h, 0.0)),
            LogicalLabel::Minus => (Complex64::new(h, 0.0), Complex64::new(-h, 0.0)),
            LogicalLabel::PlusI => (Complex64::new(h, 0.0), Complex64::new(0.0, h)),
            LogicalLabel::MinusI => (Complex64::new(h, 0.0), Complex64::new(0.0, -h)),
        };
        PolarizationQubit { alpha: a, beta: b }
    }

    /// Linear-polarization analogue used by the bare polarization baseline:
    /// `0 → H, 1 → V, + → D, − → A`, and the circular states for `±i`.
    pub fn polarization_baseline(self) -> PolarizationQubit {
        use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};
        match self {
            LogicalLabel::Zero => PolarizationQubit::linear(0.0),
            LogicalLabel::One => PolarizationQubit::linear(FRAC_PI_2),
            LogicalLabel::Plus => PolarizationQubit::linear(FRAC_PI_4),
            LogicalLabel::Minus => PolarizationQubit::linear(3.0 * FRAC_PI_4),
            LogicalLabel::PlusI => PolarizationQubit::r(),
            LogicalLabel::MinusI => PolarizationQubit::l(),
        }
    }

    /// Label of the orthogonal partner in the same basis.
    pub fn partner(self) -> LogicalLabel {
        match self {
            LogicalLabel::Zero => LogicalLabel::One,
            LogicalLabel::One => LogicalLabel::Zero,
            LogicalLabel::Plus => LogicalLabel::Minus,
            LogicalLabel::Minus => LogicalLabel::Plus,
            LogicalLabel::PlusI => LogicalLabel::MinusI,
            LogicalLabel::MinusI => LogicalLabel::PlusI,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            LogicalLabel::Zero => "0",
            LogicalLabel::One => "1",
            LogicalLabel::Plus => "+",
            LogicalLabel::Minus => "-",
            LogicalLabel::PlusI => "+i",
            LogicalLabel::MinusI => "-i",
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, PI};

    fn basis() -> BasisSpec {
        make_basis(5, 8, 1.0, 7.9e3).unwrap()
    }

    #[test]
    fn basis_construction() {
        assert_eq!(basis().dim(), 198);
        let minimal = make_basis(1, 0, 1.0, 1.0).unwrap();
        assert!(minimal.contains(-1, 0) && minimal.contains(1, 0));
        assert_eq!(minimal.dim(), 6);
        assert!(make_basis(0, 0, 1.0, 1.0).is_err());
        assert!(make_basis(1, -1, 1.0, 1.0).is_err());
        assert!(make_basis(1, 0, 0.0, 1.0).is_err());
        assert!(make_basis(1, 0, 1.0, -2.0).is_err());
    }

    #[test]
    fn spatial_index_round_trip() {
        let b = basis();
        for i in 0..b.spatial_dim() {
            let (m, p) = b.spatial_mode(i);
            assert_eq!(b.spatial_index(m, p), Some(i));
        }
        assert_eq!(b.spatial_index(6, 0), None);
        assert_eq!(b.spatial_index(0, 9), None);
    }

    #[test]
    fn logical_components_do_not_rotate() {
        let b = basis();
        let mut s = SpinOrbitState::zeros(b);
        for p in 0..=8 {
            s.set(Polarization::L, -1, p, Complex64::new(0.1 * p as f64, 0.3)).unwrap();
        }
        assert_eq!(rotate_frame(&s, 0.6458), s);
    }

    #[test]
    fn circular_polarization_phase() {
        let b = basis();
        let s = SpinOrbitState::basis_state(b, Polarization::R, 0, 0).unwrap();
        let theta = 0.37;
        let r = rotate_frame(&s, theta);
        let expect = Complex64::from_polar(1.0, theta);
        assert!((r.amp(Polarization::R, 0, 0) - expect).norm() < 1e-15);
    }

    #[test]
    fn horizontal_rotates_to_vertical() {
        let b = basis();
        let h = SpinOrbitState::fundamental(b, &PolarizationQubit::linear(0.0));
        let rotated = project_fundamental(&rotate_frame(&h, FRAC_PI_2)).qubit().unwrap();
        let v = PolarizationQubit::linear(FRAC_PI_2);
        assert!((qubit_fidelity(&rotated, &v) - 1.0).abs() < 1e-15);
        assert!(qubit_fidelity(&rotated, &PolarizationQubit::linear(0.0)) < 1e-30);
    }

    #[test]
    fn inner_products() {
        let b = basis();
        let zero = SpinOrbitState::basis_state(b, Polarization::L, -1, 0).unwrap();
        let one = SpinOrbitState::basis_state(b, Polarization::R, 1, 0).unwrap();
        assert_eq!(inner_product(&zero, &zero).unwrap(), Complex64::new(1.0, 0.0));
        assert_eq!(inner_product(&zero, &one).unwrap(), ZERO);
        let other = SpinOrbitState::zeros(make_basis(4, 8, 1.0, 7.9e3).unwrap());
        assert!(matches!(inner_product(&zero, &other), Err(Error::BasisMismatch(_))));
    }

    #[test]
    fn fiber_projection() {
        let b = basis();
        let s = SpinOrbitState::basis_state(b, Polarization::R, 0, 0).unwrap();
        let d = project_fundamental(&s);
        assert_eq!(d.survival, 1.0);
        assert_eq!(d.qubit.unwrap(), PolarizationQubit::r());
        let vortex = SpinOrbitState::basis_state(b, Polarization::R, 1, 0).unwrap();
        let d = project_fundamental(&vortex);
        assert_eq!(d.survival, 0.0);
        assert!(matches!(d.qubit(), Err(Error::UndefinedQubit { .. })));
    }

    #[test]
    fn fidelity_examples() {
        let q = PolarizationQubit::from_real(0.3, -0.8).unwrap();
        assert!((qubit_fidelity(&q, &q) - 1.0).abs() < 1e-15);
        assert_eq!(qubit_fidelity(&PolarizationQubit::r(), &PolarizationQubit::l()), 0.0);
        let plus = PolarizationQubit::from_real(1.0, 1.0).unwrap();
        assert!((qubit_fidelity(&PolarizationQubit::r(), &plus) - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mub_labels_are_unbiased() {
        for a in LogicalLabel::MUB {
            let qa = a.amplitudes();
            assert!(qubit_fidelity(&qa, &a.partner().amplitudes()) < 1e-30);
            for b in LogicalLabel::MUB {
                let f = qubit_fidelity(&qa, &b.amplitudes());
                assert!(f < 1e-15 || (f - 0.5).abs() < 1e-15 || (f - 1.0).abs() < 1e-15);
            }
        }
        let d = LogicalLabel::Plus.polarization_baseline();
        assert!((qubit_fidelity(&d, &PolarizationQubit::linear(PI / 4.0)) - 1.0).abs() < 1e-15);
    }
}
