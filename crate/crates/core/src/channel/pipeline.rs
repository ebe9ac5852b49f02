//! Ordered channel pipelines between encoder and decoder.

use num_complex::Complex64;
use std::sync::Arc;

use super::coupling::{apply_coupling, ModeCoupling};
use super::mask::{chain_coupling, chain_powers, SpatialOp};
use super::qplate::{free_propagate, qplate_apply, qplate_radial_coeffs, QPlateSpec};
use crate::error::{Error, Result};
use crate::modes::{rotate_frame, BasisSpec, Polarization, SpinOrbitState};
use crate::numerics::grid::PolarGrid;

/// One element of a transmission line. Angles in radians, lengths absolute.
#[derive(Debug, Clone)]
pub enum ChannelOp {
    /// Frame rotation about the beam axis.
    Rotate { theta: f64 },
    /// Gouy phase `ζ` accumulated by free propagation.
    Propagate { zeta: f64 },
    Spatial(SpatialOp),
    /// Power transmission factor in `[0, 1]`; scales survival only.
    Efficiency { transmission: f64 },
    /// An extra tuned q-plate.
    QPlate,
}

impl ChannelOp {
    pub fn name(&self) -> &'static str {
        match self {
            ChannelOp::Rotate { .. } => "rotate",
            ChannelOp::Propagate { .. } => "propagate",
            ChannelOp::Spatial(_) => "spatial",
            ChannelOp::Efficiency { .. } => "efficiency_scalar",
            ChannelOp::QPlate => "qplate",
        }
    }
}

#[derive(Debug, Clone)]
enum Stage {
    Rotate(f64),
    Propagate(f64),
    Coupling(Spatial),
    Scale(f64),
    QPlate(Arc<QPlateSpec>),
}

#[derive(Debug, Clone)]
struct Spatial {
    coupling: ModeCoupling,
    ops: Vec<SpatialOp>,
    grid: PolarGrid,
}

fn apply_stage(stage: &Stage, s: &SpinOrbitState) -> Result<SpinOrbitState> {
    Ok(match stage {
        Stage::Rotate(t) => rotate_frame(s, *t),
        Stage::Propagate(z) => free_propagate(s, *z),
        Stage::Coupling(sp) => apply_coupling(s, &sp.coupling)?,
        Stage::Scale(a) => s.clone().scaled(Complex64::new(*a, 0.0)),
        Stage::QPlate(qp) => qplate_apply(s, qp)?,
    })
}

/// A pipeline compiled against one basis: runs of consecutive spatial ops are
/// merged into a single field-level coupling tensor.
#[derive(Debug, Clone)]
pub struct Channel {
    basis: BasisSpec,
    stages: Vec<Stage>,
}

impl Channel {
    pub fn identity(basis: &BasisSpec) -> Self {
        Self { basis: *basis, stages: Vec::new() }
    }

    pub fn compile(ops: &[ChannelOp], basis: &BasisSpec, grid: &PolarGrid) -> Result<Self> {
        let mut stages = Vec::new();
        let mut run: Vec<SpatialOp> = Vec::new();
        let mut plate: Option<Arc<QPlateSpec>> = None;
        let flush = |run: &mut Vec<SpatialOp>, stages: &mut Vec<Stage>| -> Result<()> {
            if !run.is_empty() {
                stages.push(Stage::Coupling(Spatial {
                    coupling: chain_coupling(run, basis, grid)?,
                    ops: run.clone(),
                    grid: *grid,
                }));
                run.clear();
            }
            Ok(())
        };
        for op in ops {
            if let ChannelOp::Spatial(s) = op {
                s.validate()?;
                run.push(s.clone());
                continue;
            }
            flush(&mut run, &mut stages)?;
            stages.push(match *op {
                ChannelOp::Rotate { theta } => Stage::Rotate(finite("rotation angle", theta)?),
                ChannelOp::Propagate { zeta } => Stage::Propagate(finite("Gouy phase", zeta)?),
                ChannelOp::Efficiency { transmission } => {
                    if !(0.0..=1.0).contains(&transmission) {
                        return Err(Error::Domain(format!(
                            "efficiency must lie in [0, 1] (got {transmission})"
                        )));
                    }
                    Stage::Scale(transmission.sqrt())
                }
                ChannelOp::QPlate => Stage::QPlate(
                    plate.get_or_insert_with(|| Arc::new(qplate_radial_coeffs(basis))).clone(),
                ),
                ChannelOp::Spatial(_) => unreachable!("spatial ops are batched"),
            });
        }
        flush(&mut run, &mut stages)?;
        Ok(Self { basis: *basis, stages })
    }

    pub fn basis(&self) -> &BasisSpec {
        &self.basis
    }

    pub fn is_identity(&self) -> bool {
        self.stages.is_empty()
    }

    pub fn apply(&self, s: &SpinOrbitState) -> Result<SpinOrbitState> {
        let mut cur = s.clone();
        for stage in &self.stages {
            cur = apply_stage(stage, &cur)?;
        }
        Ok(cur)
    }

    /// Power of each state leaving the pipeline, counting the field
    /// scattered out of the truncated basis by every spatial stage.
    pub fn transmitted_powers(&self, states: &[SpinOrbitState]) -> Result<Vec<f64>> {
        let mut cur = states.to_vec();
        let mut ratio = vec![1.0; states.len()];
        for stage in &self.stages {
            if let Stage::Coupling(sp) = stage {
                let before: Vec<f64> = cur.iter().map(|s| s.norm_sqr()).collect();
                let mut inputs: Vec<&[Complex64]> = Vec::with_capacity(2 * cur.len());
                for s in &cur {
                    for pol in Polarization::BOTH {
                        inputs.push(s.spatial(pol));
                    }
                }
                let after = chain_powers(&sp.ops, &self.basis, &sp.grid, &inputs)?;
                for (k, r) in ratio.iter_mut().enumerate() {
                    *r *= if before[k] > 0.0 { (after[2 * k] + after[2 * k + 1]) / before[k] } else { 0.0 };
                }
            }
            if let Stage::Scale(a) = stage {
                ratio.iter_mut().for_each(|r| *r *= a * a);
            }
            for s in cur.iter_mut() {
                *s = apply_stage(stage, s)?;
            }
        }
        Ok(states.iter().zip(&ratio).map(|(s, r)| s.norm_sqr() * r).collect())
    }

    /// Whole pipeline as one polarization-identity coupling. Fails for
    /// pipelines containing frame rotations or q-plates.
    pub fn spatial_coupling(&self) -> Result<ModeCoupling> {
        let mut total = ModeCoupling::identity(self.basis);
        for stage in &self.stages {
            let next = match stage {
                Stage::Coupling(sp) => sp.coupling.clone(),
                Stage::Propagate(z) => {
                    let z = *z;
                    ModeCoupling::diagonal(self.basis, move |m, p| {
                        Complex64::from_polar(1.0, -((2 * p) as f64 + m.unsigned_abs() as f64 + 1.0) * z)
                    })
                }
                Stage::Scale(a) => {
                    let a = *a;
                    ModeCoupling::diagonal(self.basis, move |_, _| Complex64::new(a, 0.0))
                }
                Stage::Rotate(_) => {
                    return Err(Error::Domain("frame rotations are not part of the transmission channel".into()))
                }
                Stage::QPlate(_) => {
                    return Err(Error::Domain("q-plate stages cannot be classified as a spatial channel".into()))
                }
            };
            total = total.then(&next)?;
        }
        Ok(total)
    }
}

fn finite(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Domain(format!("{name} must be finite")))
    }
}
