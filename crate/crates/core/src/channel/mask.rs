//! Spatial perturbations and their coupling tensors.
//!
//! A chain of spatial operations is composed at field level: for an output
//! point the chain is walked backwards, mapping the point through
//! displacements and scalings and collecting multiplicative factors, so the
//! transformed input field is evaluated exactly before being projected on the
//! output basis. Hard edges that stay rigid in output coordinates are handed
//! to the quadrature as an exact region.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use std::fmt;
use std::sync::Arc;

use super::coupling::{ModeCoupling, PolAction};
use crate::error::{Error, Result};
use crate::modes::BasisSpec;
use crate::numerics::field::LgFamily;
use crate::numerics::grid::{Disk, Ellipse, HalfPlane, PolarGrid, QuadratureRule, Region, Ring};

/// Pointwise complex transmission `t(ρ, φ)` with `ρ` in absolute length units.
#[derive(Clone)]
pub struct Transmission(pub Arc<dyn Fn(f64, f64) -> Complex64 + Send + Sync>);

impl Transmission {
    pub fn new(f: impl Fn(f64, f64) -> Complex64 + Send + Sync + 'static) -> Self {
        Self(Arc::new(f))
    }
}

impl fmt::Debug for Transmission {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("Transmission(<fn>)")
    }
}

/// One term `amplitude · (ρ/w0)^radial_power · cos(azimuthal_order·φ - offset)`
/// of a phase screen, in radians.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseTerm {
    pub amplitude: f64,
    pub radial_power: u32,
    pub azimuthal_order: i32,
    pub offset: f64,
}

#[derive(Clone)]
pub enum PhaseScreen {
    /// Sum of [`PhaseTerm`]s, radius measured in units of the beam waist.
    Terms(Vec<PhaseTerm>),
    /// Arbitrary phase `φ(ρ, φ)` in radians, `ρ` absolute.
    Function(Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for PhaseScreen {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PhaseScreen::Terms(t) => f.debug_tuple("Terms").field(t).finish(),
            PhaseScreen::Function(_) => f.write_str("Function(<fn>)"),
        }
    }
}

impl PhaseScreen {
    fn phase(&self, rho: f64, phi: f64, w0: f64) -> f64 {
        match self {
            PhaseScreen::Terms(terms) => terms
                .iter()
                .map(|t| {
                    t.amplitude
                        * (rho / w0).powi(t.radial_power as i32)
                        * (t.azimuthal_order as f64 * phi - t.offset).cos()
                })
                .sum(),
            PhaseScreen::Function(f) => f(rho, phi),
        }
    }
}

/// Transverse masks. Lengths are absolute, angles in radians.
#[derive(Debug, Clone)]
pub enum MaskSpec {
    /// Iris transmitting `|r - center| < radius`.
    CircularAperture { radius: f64, center: (f64, f64) },
    /// Half-plane obstruction transmitting `x cos(angle) + y sin(angle) > edge`.
    KnifeEdge { edge: f64, angle: f64 },
    PhaseScreen(PhaseScreen),
    /// Unitary anamorphic stretch by `ratio` along the axis at `angle`:
    /// `E'(u, v) = E(u / ratio, v) / √ratio`.
    EllipticalScaling { ratio: f64, angle: f64 },
    /// `|t| ≤ 1` pointwise.
    ArbitraryMultiplicative(Transmission),
}

/// Element of a spatial chain. Displacement moves the beam by `delta` along
/// `theta`; tilt multiplies by `e^{iαρcos(φ - η)}` with `α = k sin γ`.
#[derive(Debug, Clone)]
pub enum SpatialOp {
    Mask(MaskSpec),
    Displacement { delta: f64, theta: f64 },
    Tilt { alpha: f64, eta: f64 },
}

impl SpatialOp {
    /// Displacement followed by tilt, the joint perturbation of a misaligned
    /// beam.
    pub fn combined(delta: f64, theta: f64, alpha: f64, eta: f64) -> [SpatialOp; 2] {
        [SpatialOp::Displacement { delta, theta }, SpatialOp::Tilt { alpha, eta }]
    }

    /// Tilt from the physical angle `gamma` and wavenumber `k`.
    pub fn tilt_from_angle(gamma: f64, eta: f64, k: f64) -> SpatialOp {
        SpatialOp::Tilt { alpha: k * gamma.sin(), eta }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::Domain(msg));
        match self {
            SpatialOp::Mask(MaskSpec::CircularAperture { radius, center }) => {
                if !(*radius > 0.0) || !center.0.is_finite() || !center.1.is_finite() {
                    return bad(format!("aperture radius must be positive (got {radius})"));
                }
            }
            SpatialOp::Mask(MaskSpec::KnifeEdge { edge, angle }) => {
                if !edge.is_finite() || !angle.is_finite() {
                    return bad("knife edge position and angle must be finite".into());
                }
            }
            SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio, angle }) => {
                if !(*ratio > 0.0) || !ratio.is_finite() || !angle.is_finite() {
                    return bad(format!("scaling ratio must be positive (got {ratio})"));
                }
            }
            SpatialOp::Displacement { delta, theta } => {
                if !(*delta >= 0.0) || !delta.is_finite() || !theta.is_finite() {
                    return bad(format!("displacement must be non-negative (got {delta})"));
                }
            }
            SpatialOp::Tilt { alpha, eta } => {
                if !(*alpha >= 0.0) || !alpha.is_finite() || !eta.is_finite() {
                    return bad(format!("tilt alpha must be non-negative (got {alpha})"));
                }
            }
            SpatialOp::Mask(MaskSpec::PhaseScreen(_) | MaskSpec::ArbitraryMultiplicative(_)) => {}
        }
        Ok(())
    }
}

/// Backward evaluation step.
enum Step {
    Shift(f64, f64),
    Scale { cos: f64, sin: f64, ratio: f64 },
    Phase { kx: f64, ky: f64 },
    Screen(PhaseScreen),
    Multiply(Transmission),
}

struct Plan {
    steps: Vec<Step>,
    region: Region,
    w0: f64,
}

/// Affine map `p = L q + t` from the output plane to the plane of the
/// operation being visited.
struct Affine {
    l: [[f64; 2]; 2],
    t: [f64; 2],
    scaled: bool,
}

impl Affine {
    fn apply_linear(m: &[[f64; 2]; 2], v: [f64; 2]) -> [f64; 2] {
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    fn shift(&mut self, dx: f64, dy: f64) {
        self.t[0] -= dx;
        self.t[1] -= dy;
    }

    fn scale(&mut self, cos: f64, sin: f64, ratio: f64) {
        let k = 1.0 / ratio - 1.0;
        let s = [[1.0 + k * cos * cos, k * cos * sin], [k * cos * sin, 1.0 + k * sin * sin]];
        let l = self.l;
        for (i, row) in s.iter().enumerate() {
            for j in 0..2 {
                self.l[i][j] = row[0] * l[0][j] + row[1] * l[1][j];
            }
        }
        self.t = Self::apply_linear(&s, self.t);
        self.scaled = true;
    }

    /// Output-plane preimage of a disk.
    fn pull_disk(&self, cx: f64, cy: f64, radius: f64) -> Region {
        let [[a, b], [c, d]] = self.l;
        let det = a * d - b * c;
        let (rx, ry) = (cx - self.t[0], cy - self.t[1]);
        let (qx, qy) = ((d * rx - b * ry) / det, (-c * rx + a * ry) / det);
        if !self.scaled {
            return Region { disks: vec![Disk { cx: qx, cy: qy, radius }], ..Default::default() };
        }
        // |L (q - q0)| < r: eigen-decompose LᵀL
        let (g11, g12, g22) = (a * a + c * c, a * b + c * d, b * b + d * d);
        let angle = 0.5 * (2.0 * g12).atan2(g11 - g22);
        let (co, si) = (angle.cos(), angle.sin());
        let l1 = g11 * co * co + 2.0 * g12 * co * si + g22 * si * si;
        let l2 = g11 * si * si - 2.0 * g12 * co * si + g22 * co * co;
        let e = Ellipse { cx: qx, cy: qy, a: radius / l1.sqrt(), b: radius / l2.sqrt(), angle };
        Region { ellipses: vec![e], ..Default::default() }
    }

    /// Output-plane preimage of a half plane.
    fn pull_half_plane(&self, angle: f64, offset: f64) -> Region {
        let n = [angle.cos(), angle.sin()];
        let l = self.l;
        let v = [l[0][0] * n[0] + l[1][0] * n[1], l[0][1] * n[0] + l[1][1] * n[1]];
        let norm = v[0].hypot(v[1]);
        let shifted = offset - (n[0] * self.t[0] + n[1] * self.t[1]);
        Region {
            half_planes: vec![HalfPlane { angle: v[1].atan2(v[0]), offset: shifted / norm }],
            ..Default::default()
        }
    }
}

impl Plan {
    fn new(ops: &[SpatialOp], w0: f64) -> Result<Plan> {
        let mut steps = Vec::new();
        let mut region = Region::default();
        let mut affine = Affine { l: [[1.0, 0.0], [0.0, 1.0]], t: [0.0, 0.0], scaled: false };
        for op in ops.iter().rev() {
            op.validate()?;
            match op {
                SpatialOp::Mask(MaskSpec::CircularAperture { radius, center }) => {
                    region.intersect(&affine.pull_disk(center.0, center.1, *radius))
                }
                SpatialOp::Mask(MaskSpec::KnifeEdge { edge, angle }) => {
                    region.intersect(&affine.pull_half_plane(*angle, *edge))
                }
                SpatialOp::Displacement { delta, theta } => {
                    let (dx, dy) = (delta * theta.cos(), delta * theta.sin());
                    affine.shift(dx, dy);
                    steps.push(Step::Shift(dx, dy));
                }
                SpatialOp::Tilt { alpha, eta } => {
                    steps.push(Step::Phase { kx: alpha * eta.cos(), ky: alpha * eta.sin() })
                }
                SpatialOp::Mask(MaskSpec::PhaseScreen(s)) => steps.push(Step::Screen(s.clone())),
                SpatialOp::Mask(MaskSpec::ArbitraryMultiplicative(t)) => steps.push(Step::Multiply(t.clone())),
                SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio, angle }) => {
                    affine.scale(angle.cos(), angle.sin(), *ratio);
                    steps.push(Step::Scale { cos: angle.cos(), sin: angle.sin(), ratio: *ratio });
                }
            }
        }
        Ok(Plan { steps, region, w0 })
    }

    /// Factor and source point whose input-field value gives the output field at `(x, y)`.
    fn map(&self, mut x: f64, mut y: f64) -> (Complex64, f64, f64) {
        let mut factor = Complex64::new(1.0, 0.0);
        for step in &self.steps {
            match step {
                Step::Shift(dx, dy) => {
                    x -= dx;
                    y -= dy;
                }
                Step::Scale { cos, sin, ratio } => {
                    let u = (x * cos + y * sin) / ratio;
                    let v = -x * sin + y * cos;
                    x = u * cos - v * sin;
                    y = u * sin + v * cos;
                    factor /= ratio.sqrt();
                }
                Step::Phase { kx, ky } => factor *= Complex64::from_polar(1.0, kx * x + ky * y),
                Step::Screen(s) => {
                    factor *= Complex64::from_polar(1.0, s.phase(x.hypot(y), y.atan2(x), self.w0))
                }
                Step::Multiply(t) => factor *= (t.0)(x.hypot(y), y.atan2(x)),
            }
        }
        (factor, x, y)
    }
}

/// Rings summed per parallel task; fixed so results do not depend on the
/// thread count.
const RINGS_PER_TASK: usize = 8;

/// Coupling tensor of a chain of spatial operations applied in order.
pub fn chain_coupling(ops: &[SpatialOp], basis: &BasisSpec, grid: &PolarGrid) -> Result<ModeCoupling> {
    let plan = Plan::new(ops, basis.w0())?;
    let rule = grid.rule_in(basis.w0(), &plan.region);
    let matrix = project_chain(&plan, basis, &rule);
    ModeCoupling::new(*basis, PolAction::Identity, matrix)
}

/// Coupling tensor of a single mask, `C_{m,m';p,p'} = ⟨LG_{p',m'}| t |LG_{p,m}⟩`.
pub fn mask_coupling(mask: &MaskSpec, basis: &BasisSpec, grid: &PolarGrid) -> Result<ModeCoupling> {
    chain_coupling(&[SpatialOp::Mask(mask.clone())], basis, grid)
}

fn project_chain(plan: &Plan, basis: &BasisSpec, rule: &QuadratureRule) -> DMatrix<Complex64> {
    let n = basis.spatial_dim();
    let (m_max, p_max) = (basis.m_max(), basis.p_max());
    let fam = LgFamily::new(m_max, p_max, basis.w0());
    let partials: Vec<DMatrix<Complex64>> = rule
        .rings
        .par_chunks(RINGS_PER_TASK)
        .map(|rings| {
            let mut acc = DMatrix::zeros(n, n);
            for ring in rings {
                ring_contribution(plan, &fam, basis, ring, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = DMatrix::zeros(n, n);
    for part in &partials {
        total += part;
    }
    total
}

fn ring_contribution(plan: &Plan, fam: &LgFamily, basis: &BasisSpec, ring: &Ring, acc: &mut DMatrix<Complex64>) {
    let n = basis.spatial_dim();
    let m_max = basis.m_max();
    let n_m = 2 * m_max + 1;
    let np = basis.p_max() + 1;
    // harmonics[m' + m_max][in] = Σ_φ w e^{-im'φ} g_in(ρ, φ)
    let mut harmonics = vec![Complex64::new(0.0, 0.0); n_m * n];
    let mut vals = vec![Complex64::new(0.0, 0.0); n];
    for &(phi, w) in &ring.nodes {
        let (x, y) = (ring.rho * phi.cos(), ring.rho * phi.sin());
        let (factor, xs, ys) = plan.map(x, y);
        if factor == Complex64::new(0.0, 0.0) {
            continue;
        }
        fam.eval_xy(xs, ys, &mut vals);
        let step = Complex64::from_polar(1.0, -phi);
        let mut e = factor * w * Complex64::from_polar(1.0, m_max as f64 * phi);
        for row in harmonics.chunks_exact_mut(n) {
            for (h, v) in row.iter_mut().zip(&vals) {
                *h += e * v;
            }
            e *= step;
        }
    }
    let radial = fam.radial(ring.rho);
    for (k, row) in harmonics.chunks_exact(n).enumerate() {
        let abs_m = (k as i64 - m_max as i64).unsigned_abs() as usize;
        for pp in 0..np {
            let r = radial[abs_m][pp] * ring.weight;
            let o = k * np + pp;
            for (i, h) in row.iter().enumerate() {
                acc[(o, i)] += h * r;
            }
        }
    }
}

/// Power `∫|T Σ_i a_i g_i|²` leaving a chain for each spatial amplitude
/// vector `a` (basis modes `g_i`), including what falls outside the basis.
pub fn chain_powers(ops: &[SpatialOp], basis: &BasisSpec, grid: &PolarGrid, inputs: &[&[Complex64]]) -> Result<Vec<f64>> {
    let n = basis.spatial_dim();
    if let Some(bad) = inputs.iter().find(|a| a.len() != n) {
        return Err(Error::BasisMismatch(format!("amplitude vector of length {} for {n} modes", bad.len())));
    }
    let plan = Plan::new(ops, basis.w0())?;
    let rule = grid.rule_in(basis.w0(), &plan.region);
    let fam = LgFamily::new(basis.m_max(), basis.p_max(), basis.w0());
    let partials: Vec<Vec<f64>> = rule
        .rings
        .par_chunks(RINGS_PER_TASK)
        .map(|rings| {
            let mut acc = vec![0.0; inputs.len()];
            let mut vals = vec![Complex64::new(0.0, 0.0); n];
            for ring in rings {
                for &(phi, w) in &ring.nodes {
                    let (factor, xs, ys) = plan.map(ring.rho * phi.cos(), ring.rho * phi.sin());
                    if factor == Complex64::new(0.0, 0.0) {
                        continue;
                    }
                    fam.eval_xy(xs, ys, &mut vals);
                    let scale = factor.norm_sqr() * w * ring.weight;
                    for (total, a) in acc.iter_mut().zip(inputs) {
                        let field: Complex64 = a.iter().zip(&vals).map(|(x, g)| x * g).sum();
                        *total += field.norm_sqr() * scale;
                    }
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; inputs.len()];
    for part in &partials {
        for (t, p) in total.iter_mut().zip(part) {
            *t += p;
        }
    }
    Ok(total)
}

/// Power bookkeeping for one input mode sent through a chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormCapture {
    /// Power of the transformed field inside the truncated basis.
    pub captured: f64,
    /// Total transmitted power of the transformed field.
    pub transmitted: f64,
}

impl NormCapture {
    pub fn fraction(&self) -> f64 {
        if self.transmitted > 0.0 {
            self.captured / self.transmitted
        } else {
            1.0
        }
    }
}

/// How much of `chain(LG_{p,m})` the truncated basis retains.
pub fn norm_capture(ops: &[SpatialOp], basis: &BasisSpec, grid: &PolarGrid, m: i64, p: usize) -> Result<NormCapture> {
    let i = basis
        .spatial_index(m, p)
        .ok_or_else(|| Error::Domain(format!("input mode (m={m}, p={p}) outside the basis")))?;
    let c = chain_coupling(ops, basis, grid)?;
    let captured = c.matrix().column(i).iter().map(|z| z.norm_sqr()).sum();
    let plan = Plan::new(ops, basis.w0())?;
    let rule = grid.rule_in(basis.w0(), &plan.region);
    let fam = LgFamily::new(basis.m_max(), basis.p_max(), basis.w0());
    let n = basis.spatial_dim();
    let transmitted = rule
        .integrate(|rho, phi| {
            let (factor, xs, ys) = plan.map(rho * phi.cos(), rho * phi.sin());
            if factor == Complex64::new(0.0, 0.0) {
                return factor;
            }
            let mut vals = vec![Complex64::new(0.0, 0.0); n];
            fam.eval_xy(xs, ys, &mut vals);
            Complex64::new((factor * vals[i]).norm_sqr(), 0.0)
        })
        .re;
    Ok(NormCapture { captured, transmitted })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::coupling::check_invariance;
    use crate::modes::make_basis;
    use std::f64::consts::PI;

    fn basis() -> BasisSpec {
        make_basis(3, 4, 1.0, 7.9e3).unwrap()
    }

    fn grid() -> PolarGrid {
        PolarGrid::new(96, 128, 6.0).unwrap()
    }

    #[test]
    fn wide_centered_aperture_is_identity() {
        let b = basis();
        let c = mask_coupling(&MaskSpec::CircularAperture { radius: 50.0, center: (0.0, 0.0) }, &b, &grid()).unwrap();
        let id = DMatrix::<Complex64>::identity(b.spatial_dim(), b.spatial_dim());
        assert!((c.matrix() - id).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn centered_aperture_conserves_m() {
        let b = basis();
        let c = mask_coupling(&MaskSpec::CircularAperture { radius: 0.7, center: (0.0, 0.0) }, &b, &grid()).unwrap();
        for i in 0..b.spatial_dim() {
            for o in 0..b.spatial_dim() {
                if b.spatial_mode(i).0 != b.spatial_mode(o).0 {
                    assert!(c.matrix()[(o, i)].norm() < 1e-12);
                }
            }
        }
        // power through a centered iris: 1 - exp(-2a²/w0²) for the Gaussian
        let t = c.c(0, 0, 0, 0).re;
        let g = (0..=4).map(|pp| c.c(0, 0, 0, pp).norm_sqr()).sum::<f64>();
        assert!(t < 1.0 && g < t);
    }

    #[test]
    fn central_knife_halves_the_gaussian() {
        let b = basis();
        let c = mask_coupling(&MaskSpec::KnifeEdge { edge: 0.0, angle: 0.4 }, &b, &grid()).unwrap();
        assert!((c.c(0, 0, 0, 0).re - 0.5).abs() < 1e-13);
    }

    #[test]
    fn phase_screen_depends_on_abs_m() {
        let b = basis();
        let screen = PhaseScreen::Terms(vec![
            PhaseTerm { amplitude: 0.8, radial_power: 2, azimuthal_order: 1, offset: 0.3 },
            PhaseTerm { amplitude: -0.4, radial_power: 1, azimuthal_order: 3, offset: 1.1 },
        ]);
        let c = mask_coupling(&MaskSpec::PhaseScreen(screen), &b, &grid()).unwrap();
        assert!(check_invariance(&c, 1e-10).holds);
    }

    #[test]
    fn displacement_then_return_is_identity() {
        let b = basis();
        let ops = [
            SpatialOp::Displacement { delta: 0.3, theta: 0.2 },
            SpatialOp::Displacement { delta: 0.3, theta: 0.2 + PI },
        ];
        let c = chain_coupling(&ops, &b, &grid()).unwrap();
        let id = DMatrix::<Complex64>::identity(b.spatial_dim(), b.spatial_dim());
        assert!((c.matrix() - id).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn aperture_follows_displaced_beam() {
        // moving beam and iris together leaves the same transmission as a centered iris
        let b = basis();
        let g = grid();
        let centered = mask_coupling(&MaskSpec::CircularAperture { radius: 0.8, center: (0.0, 0.0) }, &b, &g).unwrap();
        let ops = [
            SpatialOp::Mask(MaskSpec::CircularAperture { radius: 0.8, center: (0.0, 0.0) }),
            SpatialOp::Displacement { delta: 0.4, theta: 1.0 },
            SpatialOp::Displacement { delta: 0.4, theta: 1.0 + PI },
        ];
        let moved = chain_coupling(&ops, &b, &g).unwrap();
        assert!((centered.matrix() - moved.matrix()).iter().all(|z| z.norm() < 1e-12));
    }

    #[test]
    fn scaling_is_unitary_and_mirror_symmetric() {
        let b = make_basis(3, 8, 1.0, 1.0).unwrap();
        let ops = [SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio: 1.1, angle: 0.7 })];
        let c = chain_coupling(&ops, &b, &grid()).unwrap();
        assert!(check_invariance(&c, 1e-10).holds);
        let cap = norm_capture(&ops, &b, &grid(), 1, 0).unwrap();
        assert!((cap.transmitted - 1.0).abs() < 1e-10);
        assert!(cap.fraction() > 0.999);
    }

    #[test]
    fn passive_chains_do_not_amplify() {
        let b = basis();
        let ops = [
            SpatialOp::Displacement { delta: 0.5, theta: 0.0 },
            SpatialOp::Mask(MaskSpec::KnifeEdge { edge: -0.2, angle: 2.0 }),
            SpatialOp::Tilt { alpha: 1.0, eta: 0.5 },
        ];
        let c = chain_coupling(&ops, &b, &grid()).unwrap();
        let sv = c.matrix().clone().singular_values();
        assert!(sv.iter().all(|&s| s <= 1.0 + 1e-10));
    }

    #[test]
    fn invalid_ops_are_rejected() {
        let b = basis();
        let bad = [SpatialOp::Mask(MaskSpec::CircularAperture { radius: -1.0, center: (0.0, 0.0) })];
        assert!(chain_coupling(&bad, &b, &grid()).is_err());
        let bad = [SpatialOp::Displacement { delta: -0.1, theta: 0.0 }];
        assert!(chain_coupling(&bad, &b, &grid()).is_err());
    }

    #[test]
    fn powers_give_donut_power_through_aperture() {
        let b = basis();
        let mut a = vec![Complex64::new(0.0, 0.0); b.spatial_dim()];
        a[b.spatial_index(1, 0).unwrap()] = Complex64::new(0.6, 0.0);
        a[b.spatial_index(-1, 0).unwrap()] = Complex64::new(0.0, 0.8);
        for r in [0.3, 0.8, 1.5] {
            let ops = [SpatialOp::Mask(MaskSpec::CircularAperture { radius: r, center: (0.0, 0.0) })];
            let p = chain_powers(&ops, &b, &grid(), &[&a]).unwrap()[0];
            let want = 1.0 - (1.0 + 2.0 * r * r) * (-2.0 * r * r).exp();
            assert!((p - want).abs() < 1e-10, "r={r}: {p} vs {want}");
        }
    }

    #[test]
    fn displacement_conserves_power() {
        let b = basis();
        let a: Vec<Complex64> = (0..b.spatial_dim()).map(|i| Complex64::new((i as f64).sin(), 0.1 * i as f64)).collect();
        let norm: f64 = a.iter().map(|z| z.norm_sqr()).sum();
        let p = chain_powers(&[SpatialOp::Displacement { delta: 0.4, theta: 0.3 }], &b, &grid(), &[&a]).unwrap()[0];
        assert!((p / norm - 1.0).abs() < 1e-9, "{p} vs {norm}");
    }

    #[test]
    fn stretch_after_hard_mask_keeps_transmitted_power() {
        let b = basis();
        let mut a = vec![Complex64::new(0.0, 0.0); b.spatial_dim()];
        a[b.spatial_index(1, 0).unwrap()] = Complex64::new(1.0, 0.0);
        let r: f64 = 0.8;
        let want = 1.0 - (1.0 + 2.0 * r * r) * (-2.0 * r * r).exp();
        let ops = [
            SpatialOp::Mask(MaskSpec::CircularAperture { radius: r, center: (0.0, 0.0) }),
            SpatialOp::Displacement { delta: 0.2, theta: 1.0 },
            SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio: 1.2, angle: 0.5 }),
        ];
        let p = chain_powers(&ops, &b, &grid(), &[&a]).unwrap()[0];
        assert!((p - want).abs() < 1e-10, "{p} vs {want}");
        let knife = [
            SpatialOp::Mask(MaskSpec::KnifeEdge { edge: 0.0, angle: 2.0 }),
            SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio: 0.7, angle: 0.3 }),
        ];
        let p = chain_powers(&knife, &b, &grid(), &[&a]).unwrap()[0];
        assert!((p - 0.5).abs() < 1e-12, "{p}");
    }
}
