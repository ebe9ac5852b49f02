//! Oracles and generators shared by the integration tests and the
//! acceptance runner.

#![allow(dead_code)]

use hyqubit::channel::{ChannelOp, MaskSpec, PhaseScreen, PhaseTerm, SpatialOp};
use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::Rng;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// `J_n(x) = (1/2π) ∫₀^{2π} cos(nτ - x sin τ) dτ` by the trapezoid rule,
/// which is spectrally accurate for this periodic integrand.
pub fn bessel_j_oracle(n: usize, x: f64) -> f64 {
    let k = 2 * (x as usize + n) + 256;
    let h = TAU / k as f64;
    (0..k).map(|i| (n as f64 * i as f64 * h - x * (i as f64 * h).sin()).cos()).sum::<f64>() / k as f64
}

/// `I_n(x) = Σ_k (x/2)^{2k+n} / (k! (k+n)!)`; every term is positive.
pub fn bessel_i_oracle(n: usize, x: f64) -> f64 {
    let half = 0.5 * x;
    let mut term = (1..=n).fold(1.0, |t, j| t * half / j as f64);
    let mut sum = term;
    for k in 1..2000 {
        term *= half * half / (k as f64 * (k + n) as f64);
        sum += term;
        if term < 1e-18 * sum {
            break;
        }
    }
    sum
}

/// Explicit sum `L_p^a(x) = Σ_k (-1)^k C(p+a, p-k) x^k / k!` and the sum of
/// the term magnitudes, which bounds the cancellation error.
pub fn laguerre_oracle(p: usize, a: f64, x: f64) -> (f64, f64) {
    let mut sum = 0.0;
    let mut mag = 0.0;
    for k in 0..=p {
        // C(p + a, p - k) = Π_{j=1}^{p-k} (a + k + j) / j
        let binom = (1..=p - k).fold(1.0, |b, j| b * (a + (k + j) as f64) / j as f64);
        let xk = (1..=k).fold(1.0, |t, j| t * x / j as f64);
        let term = binom * xk;
        sum += if k % 2 == 0 { term } else { -term };
        mag += term.abs();
    }
    (sum, mag)
}

/// Normalized `LG_{0,±1}` in Cartesian coordinates (`w0 = 1`).
fn lg1(m: i64, x: f64, y: f64) -> Complex64 {
    let a = 2.0 / PI.sqrt();
    Complex64::new(x, m as f64 * y) * (a * (-(x * x + y * y)).exp())
}

/// `⟨LG_{0,m}| T D |LG_{0,m}⟩` for a displacement by `delta` along `theta_d`
/// followed by a tilt `e^{iα(x cos η + y sin η)}`, by a tensor trapezoid
/// rule on a Cartesian square (`w0 = 1`).
pub fn coefficient_oracle_2d(delta: f64, theta_d: f64, alpha: f64, eta: f64, m: i64) -> Complex64 {
    let (dx, dy) = (delta * theta_d.cos(), delta * theta_d.sin());
    let (kx, ky) = (alpha * eta.cos(), alpha * eta.sin());
    let half = 7.5;
    let n = 600;
    let h = 2.0 * half / n as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for i in 0..n {
        let x = -half + (i as f64 + 0.5) * h;
        for j in 0..n {
            let y = -half + (j as f64 + 0.5) * h;
            let moved = lg1(m, x - dx, y - dy) * Complex64::from_polar(1.0, kx * x + ky * y);
            acc += lg1(m, x, y).conj() * moved;
        }
    }
    acc * (h * h)
}

fn spatial(op: SpatialOp) -> ChannelOp {
    ChannelOp::Spatial(op)
}

fn mask(m: MaskSpec) -> ChannelOp {
    ChannelOp::Spatial(SpatialOp::Mask(m))
}

fn flip(rng: &mut StdRng, angle: f64) -> f64 {
    if rng.random_bool(0.5) {
        angle
    } else {
        angle + PI
    }
}

/// A pipeline of one to four spatial operations sharing one mirror axis.
/// Phase-screen terms are Zernike-like (`radial_power ≥ azimuthal_order`)
/// so the screen stays smooth wherever a displacement moves its centre.
pub fn symmetric_channel(rng: &mut StdRng) -> Vec<ChannelOp> {
    let axis = rng.random_range(0.0..TAU);
    let len = rng.random_range(1..=4);
    (0..len)
        .map(|_| match rng.random_range(0..6) {
            0 => spatial(SpatialOp::Displacement { delta: rng.random_range(0.0..0.6), theta: flip(rng, axis) }),
            1 => spatial(SpatialOp::Tilt { alpha: rng.random_range(0.0..1.5), eta: flip(rng, axis) }),
            2 => {
                let s = rng.random_range(-0.4..0.4);
                mask(MaskSpec::CircularAperture {
                    radius: rng.random_range(0.7..2.5),
                    center: (s * axis.cos(), s * axis.sin()),
                })
            }
            3 => mask(MaskSpec::KnifeEdge { edge: rng.random_range(-1.2..0.6), angle: flip(rng, axis) }),
            4 => {
                let terms = (0..rng.random_range(1..=3))
                    .map(|_| {
                        let order = rng.random_range(0..=3);
                        PhaseTerm {
                            amplitude: rng.random_range(-0.5..0.5),
                            radial_power: rng.random_range(order..=order.max(2)) as u32,
                            azimuthal_order: order,
                            offset: order as f64 * axis + if rng.random_bool(0.5) { 0.0 } else { PI },
                        }
                    })
                    .collect();
                mask(MaskSpec::PhaseScreen(PhaseScreen::Terms(terms)))
            }
            _ => {
                let angle = if rng.random_bool(0.5) { axis } else { axis + FRAC_PI_2 };
                mask(MaskSpec::EllipticalScaling { ratio: rng.random_range(0.7..1.4), angle })
            }
        })
        .collect()
}

/// A displacement of at least `0.2 w0` followed by an element whose own
/// mirror axis is turned away from the displacement direction.
pub fn asymmetric_channel(rng: &mut StdRng) -> Vec<ChannelOp> {
    let theta = rng.random_range(0.0..TAU);
    let delta = rng.random_range(0.2..0.6);
    let turn = theta + rng.random_range(PI / 4.0..3.0 * PI / 4.0) * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
    let second = match rng.random_range(0..4) {
        0 => mask(MaskSpec::KnifeEdge { edge: rng.random_range(-0.3..0.3), angle: turn }),
        1 => {
            let s = rng.random_range(0.3..0.5);
            mask(MaskSpec::CircularAperture { radius: rng.random_range(0.6..1.0), center: (s * turn.cos(), s * turn.sin()) })
        }
        2 => spatial(SpatialOp::Tilt { alpha: rng.random_range(0.5..1.5), eta: turn }),
        _ => mask(MaskSpec::PhaseScreen(PhaseScreen::Terms(vec![PhaseTerm {
            amplitude: rng.random_range(0.5..1.0),
            radial_power: 1,
            azimuthal_order: 1,
            offset: turn,
        }]))),
    };
    vec![spatial(SpatialOp::Displacement { delta, theta }), second]
}

/// Jones vectors of `0, 1, +, -` in the `{H, V}` frame.
const JONES_BB84: [[f64; 2]; 4] = [
    [1.0, 0.0],
    [0.0, 1.0],
    [std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2],
    [std::f64::consts::FRAC_1_SQRT_2, -std::f64::consts::FRAC_1_SQRT_2],
];

fn rotate_jones(v: [f64; 2], theta: f64) -> [f64; 2] {
    let (s, c) = theta.sin_cos();
    [c * v[0] - s * v[1], s * v[0] + c * v[1]]
}

/// Fidelities of the four BB84 polarization states seen by a receiver whose
/// frame is turned by `theta`, by brute-force Jones calculus.
pub fn jones_bb84_fidelities(theta: f64) -> [f64; 4] {
    JONES_BB84.map(|v| {
        let w = rotate_jones(v, theta);
        let amp = v[0] * w[0] + v[1] * w[1];
        amp * amp
    })
}

/// `(|HH⟩ - |VV⟩)/√2` with Alice's photon turned by `theta`, as amplitudes
/// `ψ[a][b]` over `{H, V}`.
fn rotated_pair(theta: f64) -> [[f64; 2]; 2] {
    let h = rotate_jones([1.0, 0.0], theta);
    let v = rotate_jones([0.0, 1.0], theta);
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let mut psi = [[0.0; 2]; 2];
    for a in 0..2 {
        psi[a][0] += r * h[a];
        psi[a][1] -= r * v[a];
    }
    psi
}

fn correlator_oracle(psi: &[[f64; 2]; 2], a: f64, b: f64) -> f64 {
    let basis = |t: f64| [[t.cos(), t.sin()], [-t.sin(), t.cos()]];
    let (ua, ub) = (basis(a), basis(b));
    let mut e = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            let mut amp = 0.0;
            for x in 0..2 {
                for y in 0..2 {
                    amp += ua[i][x] * ub[j][y] * psi[x][y];
                }
            }
            e += if i == j { amp * amp } else { -amp * amp };
        }
    }
    e
}

/// CHSH value of the rotated polarization pair for Alice at `{0, π/4}` and Bob
/// at `{π/8, 3π/8}`, with the outcome labeling chosen once on the aligned pair
/// by exhaustive search over all 16 relabelings.
pub fn chsh_oracle(theta: f64) -> f64 {
    let (alice, bob) = ([0.0, PI / 4.0], [PI / 8.0, 3.0 * PI / 8.0]);
    let s = |theta: f64, mask: u8| {
        let psi = rotated_pair(theta);
        let sign = |bit: u8| if mask >> bit & 1 == 1 { -1.0 } else { 1.0 };
        let mut total = 0.0;
        for x in 0..2 {
            for y in 0..2 {
                let w = if x == 1 && y == 1 { -1.0 } else { 1.0 };
                total += w * sign(x as u8) * sign(2 + y as u8) * correlator_oracle(&psi, alice[x], bob[y]);
            }
        }
        total.abs()
    };
    let best = (0..16u8).fold((0u8, f64::NEG_INFINITY), |best, m| {
        let v = s(0.0, m);
        if v > best.1 + 1e-12 { (m, v) } else { best }
    });
    s(theta, best.0)
}
