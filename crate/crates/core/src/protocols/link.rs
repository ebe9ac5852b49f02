//! One-photon links: preparation, transmission, frame rotation and readout for
//! each encoding.

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::channel::{encode_with, erase_polarization, qplate_apply, qplate_radial_coeffs, Channel, ChannelOp};
use crate::channel::{QPlateSpec, OAM_POLARIZER_ANGLE};
use crate::error::{Error, Result};
use crate::modes::{rotate_frame, BasisSpec, LogicalLabel, Polarization, PolarizationQubit, SpinOrbitState};
use crate::modes::DETECTION_FLOOR;
use crate::numerics::grid::PolarGrid;

/// How the qubit is carried through the channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Encoding {
    /// q-plate spin-orbit encoding, read out by a second q-plate and a
    /// single-mode fiber.
    Hybrid,
    /// Bare polarization in the fundamental mode, read out in the H/V frame.
    Polarization,
    /// OAM `m = ±1` with a fixed polarization, read out in the `p = 0` subspace.
    Oam,
}

impl Encoding {
    pub const ALL: [Encoding; 3] = [Encoding::Hybrid, Encoding::Polarization, Encoding::Oam];

    pub fn name(self) -> &'static str {
        match self {
            Encoding::Hybrid => "hybrid",
            Encoding::Polarization => "polarization",
            Encoding::Oam => "oam",
        }
    }
}

impl fmt::Display for Encoding {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Encoding {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Encoding::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown encoding `{s}` (expected hybrid, polarization or oam)")))
    }
}

/// Readout coordinates of a polarization qubit in the `{H, V}` frame.
pub fn hv_coordinates(q: &PolarizationQubit) -> [Complex64; 2] {
    let i = Complex64::new(0.0, 1.0);
    [(q.alpha + q.beta) * FRAC_1_SQRT_2, (q.beta - q.alpha) * i * FRAC_1_SQRT_2]
}

/// Unnormalized conditional qubit state after detection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QubitOutcome {
    pub rho: Matrix2<Complex64>,
}

impl QubitOutcome {
    pub fn from_branches(branches: &[[Complex64; 2]]) -> Self {
        let mut rho = Matrix2::zeros();
        for b in branches {
            let v = Vector2::new(b[0], b[1]);
            rho += v * v.adjoint();
        }
        Self { rho }
    }

    /// Detection probability.
    pub fn survival(&self) -> f64 {
        self.rho.trace().re
    }

    /// Conditional fidelity `⟨ψ|ρ|ψ⟩ / tr ρ` with a normalized reference.
    pub fn fidelity(&self, reference: &[Complex64; 2]) -> Result<f64> {
        let survival = self.survival();
        if survival < DETECTION_FLOOR {
            return Err(Error::UndefinedQubit { survival });
        }
        let v = Vector2::new(reference[0], reference[1]);
        let f = (v.adjoint() * self.rho * v)[(0, 0)].re;
        Ok((f / survival).clamp(0.0, 1.0))
    }

    /// Count-weighted mixture: unnormalized states simply add.
    pub fn mix(outcomes: &[QubitOutcome]) -> QubitOutcome {
        let n = outcomes.len().max(1) as f64;
        let rho = outcomes.iter().fold(Matrix2::zeros(), |acc, o| acc + o.rho);
        QubitOutcome { rho: rho / Complex64::new(n, 0.0) }
    }
}

/// A compiled channel together with the encoder and decoder of one encoding.
#[derive(Debug, Clone)]
pub struct Link {
    encoding: Encoding,
    channel: Channel,
    plate: Arc<QPlateSpec>,
}

impl Link {
    pub fn new(encoding: Encoding, channel: Channel) -> Self {
        let plate = Arc::new(qplate_radial_coeffs(channel.basis()));
        Self { encoding, channel, plate }
    }

    pub fn compile(encoding: Encoding, ops: &[ChannelOp], basis: &BasisSpec, grid: &PolarGrid) -> Result<Self> {
        Ok(Self::new(encoding, Channel::compile(ops, basis, grid)?))
    }

    /// Link with an identity channel.
    pub fn ideal(encoding: Encoding, basis: &BasisSpec) -> Self {
        Self::new(encoding, Channel::identity(basis))
    }

    pub fn encoding(&self) -> Encoding {
        self.encoding
    }

    pub fn channel(&self) -> &Channel {
        &self.channel
    }

    pub fn basis(&self) -> &BasisSpec {
        self.channel.basis()
    }

    pub fn plate(&self) -> &QPlateSpec {
        &self.plate
    }

    /// Normalized state launched into the channel.
    pub fn prepare(&self, label: LogicalLabel) -> SpinOrbitState {
        self.prepare_qubit(&label.amplitudes())
    }

    /// Launches logical amplitudes `(a₀, a₁)`. For the polarization encoding
    /// they are taken in the `{H, V}` frame.
    pub fn prepare_qubit(&self, q: &PolarizationQubit) -> SpinOrbitState {
        let basis = *self.basis();
        let s = match self.encoding {
            Encoding::Hybrid => encode_with(q, &self.plate),
            Encoding::Polarization => {
                let h = PolarizationQubit::linear(0.0);
                let v = PolarizationQubit::linear(std::f64::consts::FRAC_PI_2);
                let pol = PolarizationQubit {
                    alpha: q.alpha * h.alpha + q.beta * v.alpha,
                    beta: q.alpha * h.beta + q.beta * v.beta,
                };
                SpinOrbitState::fundamental(basis, &pol)
            }
            Encoding::Oam => erase_polarization(&encode_with(q, &self.plate), OAM_POLARIZER_ANGLE),
        };
        let n = s.norm_sqr().sqrt();
        s.scaled(Complex64::new(1.0 / n, 0.0))
    }

    /// Channel followed by a rotation of the receiver frame by `theta`.
    pub fn transmit(&self, s: &SpinOrbitState, theta: f64) -> Result<SpinOrbitState> {
        Ok(rotate_frame(&self.channel.apply(s)?, theta))
    }

    /// Detection branches: the received qubit coordinates for each
    /// unobserved environment mode.
    pub fn readout(&self, s: &SpinOrbitState) -> Result<Vec<[Complex64; 2]>> {
        Ok(match self.encoding {
            Encoding::Hybrid => {
                let out = qplate_apply(s, &self.plate)?;
                vec![[out.amp(Polarization::R, 0, 0), out.amp(Polarization::L, 0, 0)]]
            }
            Encoding::Polarization => {
                let r = s.spatial(Polarization::R);
                let l = s.spatial(Polarization::L);
                r.iter()
                    .zip(l)
                    .map(|(&alpha, &beta)| hv_coordinates(&PolarizationQubit { alpha, beta }))
                    .collect()
            }
            Encoding::Oam => Polarization::BOTH
                .into_iter()
                .map(|pol| [s.amp(pol, -1, 0), s.amp(pol, 1, 0)])
                .collect(),
        })
    }

    /// Prepare, transmit, rotate and detect one logical state.
    pub fn outcome(&self, label: LogicalLabel, theta: f64) -> Result<QubitOutcome> {
        let received = self.transmit(&self.prepare(label), theta)?;
        Ok(QubitOutcome::from_branches(&self.readout(&received)?))
    }

    /// Mean power the channel passes for the launched `labels`, before any
    /// mode-selective detection.
    pub fn transmittivity(&self, labels: &[LogicalLabel]) -> Result<f64> {
        let states: Vec<SpinOrbitState> = labels.iter().map(|&l| self.prepare(l)).collect();
        let powers = self.channel.transmitted_powers(&states)?;
        Ok(powers.iter().sum::<f64>() / powers.len().max(1) as f64)
    }

    /// Ideal readout coordinates of `label`.
    pub fn reference(&self, label: LogicalLabel) -> [Complex64; 2] {
        let q = label.amplitudes();
        [q.alpha, q.beta]
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::modes::make_basis;

    fn basis() -> BasisSpec {
        make_basis(3, 4, 1.0, 7.9e3).unwrap()
    }

    #[test]
    fn hv_frame_is_orthonormal() {
        let h = hv_coordinates(&PolarizationQubit::linear(0.0));
        let v = hv_coordinates(&PolarizationQubit::linear(std::f64::consts::FRAC_PI_2));
        assert!((h[0] - 1.0).norm() < 1e-15 && h[1].norm() < 1e-15);
        assert!(v[0].norm() < 1e-15 && (v[1] - 1.0).norm() < 1e-15);
        let d = hv_coordinates(&PolarizationQubit::linear(0.3));
        assert!((d[0].re - 0.3f64.cos()).abs() < 1e-15 && (d[1].re - 0.3f64.sin()).abs() < 1e-15);
    }

    #[test]
    fn ideal_links_reproduce_every_mub_state() {
        for enc in Encoding::ALL {
            let link = Link::ideal(enc, &basis());
            for label in LogicalLabel::MUB {
                let o = link.outcome(label, 0.0).unwrap();
                let f = o.fidelity(&link.reference(label)).unwrap();
                assert!((f - 1.0).abs() < 1e-12, "{enc} {}: {f}", label.name());
            }
        }
    }

    #[test]
    fn polarization_baseline_labels_match_prepared_states() {
        let link = Link::ideal(Encoding::Polarization, &basis());
        for label in LogicalLabel::BB84 {
            let s = link.prepare(label);
            let want = label.polarization_baseline();
            let got = PolarizationQubit { alpha: s.amp(Polarization::R, 0, 0), beta: s.amp(Polarization::L, 0, 0) };
            assert!((want.overlap(&got).norm() - 1.0).abs() < 1e-12, "{}", label.name());
        }
    }

    #[test]
    fn hybrid_survival_is_encoder_truncation_loss() {
        let link = Link::ideal(Encoding::Hybrid, &basis());
        let total: f64 = link.plate().logical_profile().iter().map(|q| q * q).sum();
        let o = link.outcome(LogicalLabel::Plus, 1.0).unwrap();
        assert!((o.survival() - total).abs() < 1e-12);
    }

    #[test]
    fn encoding_names_round_trip() {
        for e in Encoding::ALL {
            assert_eq!(e.name().parse::<Encoding>().unwrap(), e);
        }
        assert!("spin".parse::<Encoding>().is_err());
    }
}
