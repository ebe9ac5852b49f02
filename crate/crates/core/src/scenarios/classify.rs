//! Invariance classification of transmission channels.

use super::config::ScenarioConfig;
use super::run::INVARIANCE_TOL;
use crate::channel::{check_invariance, project_coupling, Channel, ChannelOp};
use crate::error::{Error, Result};
use crate::modes::{BasisSpec, LogicalLabel};
use crate::numerics::grid::PolarGrid;
use crate::protocols::{mub_average_fidelity, Encoding, Link};

/// Largest allowed gap between the projected prediction and the direct
/// six-state computation.
pub const AGREEMENT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyReport {
    /// `C_{-1,-1;p,p'} = C_{+1,+1;p,p'}` within [`INVARIANCE_TOL`].
    pub holds: bool,
    pub max_dev: f64,
    /// MUB-averaged hybrid fidelity predicted from the projected coupling.
    pub predicted_fidelity: f64,
    /// The same quantity from encoding, transmitting and decoding the six states.
    pub direct_fidelity: f64,
    pub agrees: bool,
    /// Mean detection probability over the six states.
    pub survival: f64,
}

/// Classifies a pipeline of polarization-independent operations.
pub fn classify_channel(ops: &[ChannelOp], basis: &BasisSpec, grid: &PolarGrid) -> Result<ClassifyReport> {
    if let Some(op) = ops.iter().find(|op| matches!(op, ChannelOp::QPlate | ChannelOp::Rotate { .. })) {
        return Err(Error::Domain(format!(
            "classification applies to the transmission channel only; `{}` is not allowed",
            op.name()
        )));
    }
    let channel = Channel::compile(ops, basis, grid)?;
    let coupling = channel.spatial_coupling()?;
    let inv = check_invariance(&coupling, INVARIANCE_TOL);
    let link = Link::new(Encoding::Hybrid, channel);
    let projected = project_coupling(&coupling, &link.plate().logical_profile());
    let mut predicted = 0.0;
    let mut survival = 0.0;
    for label in LogicalLabel::MUB {
        let q = label.amplitudes();
        predicted += projected.fidelity(q.alpha, q.beta) / 6.0;
        survival += projected.survival(q.alpha, q.beta) / 6.0;
    }
    let direct = mub_average_fidelity(&link, 0.0)?;
    Ok(ClassifyReport {
        holds: inv.holds,
        max_dev: inv.max_dev,
        predicted_fidelity: predicted,
        direct_fidelity: direct,
        agrees: (predicted - direct).abs() <= AGREEMENT_TOL,
        survival,
    })
}

/// Classifies the first-arm channel at every point of a scenario.
pub fn classify_scenario(cfg: &ScenarioConfig) -> Result<Vec<(f64, ClassifyReport)>> {
    cfg.points()?
        .into_iter()
        .map(|(v, p)| {
            classify_channel(&p.channel, &p.basis, &p.grid).map(|r| (v, r)).map_err(|e| Error::AtSweepPoint {
                context: format!("{} = {v}", cfg.sweep_column()),
                source: Box::new(e),
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{MaskSpec, SpatialOp};
    use crate::modes::make_basis;

    #[test]
    fn rejects_plates_and_rotations() {
        let b = make_basis(2, 3, 1.0, 1.0).unwrap();
        let g = PolarGrid::new(64, 64, 6.0).unwrap();
        assert!(classify_channel(&[ChannelOp::QPlate], &b, &g).is_err());
        assert!(classify_channel(&[ChannelOp::Rotate { theta: 0.2 }], &b, &g).is_err());
    }

    #[test]
    fn knife_holds_and_prediction_agrees() {
        let b = make_basis(3, 4, 1.0, 1.0).unwrap();
        let g = PolarGrid::new(96, 128, 6.0).unwrap();
        let knife = ChannelOp::Spatial(SpatialOp::Mask(MaskSpec::KnifeEdge { edge: 0.3, angle: 0.4 }));
        let r = classify_channel(&[knife], &b, &g).unwrap();
        assert!(r.holds && r.agrees, "{r:?}");
        assert!((r.direct_fidelity - 1.0).abs() < 1e-9);
    }
}
