//! Scenario files: a TOML description of a link, a protocol and an optional
//! parameter sweep. Angles are in degrees and lengths in units of the beam
//! waist; both are converted at this boundary.

use serde::Deserialize;
use std::path::{Path, PathBuf};

use crate::channel::{ChannelOp, MaskSpec, PhaseScreen, PhaseTerm, SpatialOp};
use crate::error::{Error, Result};
use crate::modes::{make_basis, BasisSpec, DEFAULT_M_MAX, DEFAULT_P_MAX};
use crate::numerics::grid::PolarGrid;
use crate::protocols::Encoding;

/// `k·w0` for a 1 mm waist at 795 nm.
pub const DEFAULT_K_W0: f64 = 7903.3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Protocol {
    Bb84,
    MubFidelity,
    Chsh,
    Tomography,
    Coeffs,
}

impl Protocol {
    pub fn name(self) -> &'static str {
        match self {
            Protocol::Bb84 => "bb84",
            Protocol::MubFidelity => "mub_fidelity",
            Protocol::Chsh => "chsh",
            Protocol::Tomography => "tomography",
            Protocol::Coeffs => "coeffs",
        }
    }

    /// Protocols that send an entangled pair through two links.
    pub fn is_entangled(self) -> bool {
        matches!(self, Protocol::Chsh | Protocol::Tomography)
    }
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct BasisConfig {
    #[serde(default = "default_m_max")]
    m_max: i64,
    #[serde(default = "default_p_max")]
    p_max: i64,
    /// Waist; all config lengths are multiples of it.
    #[serde(default = "default_w0")]
    w0: f64,
    /// Wavenumber times `w0`.
    #[serde(default = "default_k_w0")]
    k_w0: f64,
}

fn default_m_max() -> i64 {
    DEFAULT_M_MAX as i64
}
fn default_p_max() -> i64 {
    DEFAULT_P_MAX as i64
}
fn default_w0() -> f64 {
    1.0
}
fn default_k_w0() -> f64 {
    DEFAULT_K_W0
}

impl Default for BasisConfig {
    fn default() -> Self {
        Self { m_max: default_m_max(), p_max: default_p_max(), w0: default_w0(), k_w0: default_k_w0() }
    }
}

#[derive(Debug, Clone, Copy, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct GridConfig {
    n_radial: Option<usize>,
    n_azimuthal: Option<usize>,
    /// Integration cutoff in waists.
    r_max: Option<f64>,
}

/// Sweep over one scalar of the scenario; `stop` is included when it lies on
/// the step lattice.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    /// `theta`, `theta_b`, `channel.<i>.<field>` or `channel_b.<i>.<field>`.
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepConfig {
    pub fn values(&self) -> Result<Vec<f64>> {
        let bad = |m: &str| Err(Error::config("sweep", m));
        if !(self.start.is_finite() && self.stop.is_finite() && self.step.is_finite()) {
            return bad("start, stop and step must be finite");
        }
        if self.step == 0.0 {
            return bad("step must be nonzero");
        }
        let span = (self.stop - self.start) / self.step;
        if span < -1e-9 {
            return bad("step points away from stop; the range is empty");
        }
        let n = (span + 1e-9).floor() as usize + 1;
        if n > 1_000_000 {
            return bad("sweep has more than a million points");
        }
        Ok((0..n).map(|i| self.start + i as f64 * self.step).collect())
    }

    /// Name of the swept column.
    pub fn column(&self) -> &str {
        self.variable.rsplit('.').next().unwrap_or(&self.variable)
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    name: String,
    #[serde(default)]
    description: String,
    protocol: Protocol,
    #[serde(default = "default_encoding")]
    encoding: String,
    output: Option<PathBuf>,
    #[serde(default)]
    theta: f64,
    #[serde(default)]
    theta_b: f64,
    #[serde(default)]
    basis: BasisConfig,
    #[serde(default)]
    grid: GridConfig,
    sweep: Option<SweepConfig>,
    #[serde(default)]
    channel: Vec<toml::Value>,
    #[serde(default)]
    channel_b: Vec<toml::Value>,
}

fn default_encoding() -> String {
    "hybrid".into()
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermConfig {
    amplitude: f64,
    radial_power: u32,
    azimuthal_order: i32,
    #[serde(default)]
    offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case", deny_unknown_fields)]
enum OpConfig {
    Rotate {
        theta: f64,
    },
    Propagate {
        zeta: f64,
    },
    Displacement {
        delta: f64,
        #[serde(default)]
        theta: f64,
    },
    Tilt {
        alpha_w0: Option<f64>,
        gamma: Option<f64>,
        #[serde(default)]
        eta: f64,
    },
    Combined {
        delta: f64,
        #[serde(default)]
        theta_d: f64,
        alpha_w0: Option<f64>,
        gamma: Option<f64>,
        #[serde(default)]
        eta: f64,
    },
    Aperture {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    Knife {
        edge: f64,
        #[serde(default)]
        angle: f64,
    },
    PhaseScreen {
        terms: Vec<TermConfig>,
    },
    EllipticalScaling {
        ratio: f64,
        #[serde(default)]
        angle: f64,
    },
    EfficiencyScalar {
        transmission: f64,
    },
    Qplate {},
}

/// Names accepted in the `op` field of a channel entry.
pub const OP_NAMES: [&str; 11] = [
    "rotate",
    "propagate",
    "displacement",
    "tilt",
    "combined",
    "aperture",
    "knife",
    "phase_screen",
    "elliptical_scaling",
    "efficiency_scalar",
    "qplate",
];

impl OpConfig {
    fn into_ops(self, basis: &BasisSpec, path: &str) -> Result<Vec<ChannelOp>> {
        let w0 = basis.w0();
        let rad = f64::to_radians;
        let tilt = |alpha_w0: Option<f64>, gamma: Option<f64>, eta: f64| -> Result<SpatialOp> {
            match (alpha_w0, gamma) {
                (Some(a), None) => Ok(SpatialOp::Tilt { alpha: a / w0, eta: rad(eta) }),
                (None, Some(g)) => Ok(SpatialOp::tilt_from_angle(rad(g), rad(eta), basis.k())),
                _ => Err(Error::config(path, "give exactly one of `alpha_w0` and `gamma`")),
            }
        };
        let ops = match self {
            OpConfig::Rotate { theta } => vec![ChannelOp::Rotate { theta: rad(theta) }],
            OpConfig::Propagate { zeta } => vec![ChannelOp::Propagate { zeta: rad(zeta) }],
            OpConfig::Displacement { delta, theta } => {
                vec![ChannelOp::Spatial(SpatialOp::Displacement { delta: delta * w0, theta: rad(theta) })]
            }
            OpConfig::Tilt { alpha_w0, gamma, eta } => vec![ChannelOp::Spatial(tilt(alpha_w0, gamma, eta)?)],
            OpConfig::Combined { delta, theta_d, alpha_w0, gamma, eta } => vec![
                ChannelOp::Spatial(SpatialOp::Displacement { delta: delta * w0, theta: rad(theta_d) }),
                ChannelOp::Spatial(tilt(alpha_w0, gamma, eta)?),
            ],
            OpConfig::Aperture { radius, center } => vec![ChannelOp::Spatial(SpatialOp::Mask(
                MaskSpec::CircularAperture { radius: radius * w0, center: (center[0] * w0, center[1] * w0) },
            ))],
            OpConfig::Knife { edge, angle } => {
                vec![ChannelOp::Spatial(SpatialOp::Mask(MaskSpec::KnifeEdge { edge: edge * w0, angle: rad(angle) }))]
            }
            OpConfig::PhaseScreen { terms } => {
                let terms = terms
                    .into_iter()
                    .map(|t| PhaseTerm {
                        amplitude: t.amplitude,
                        radial_power: t.radial_power,
                        azimuthal_order: t.azimuthal_order,
                        offset: rad(t.offset),
                    })
                    .collect();
                vec![ChannelOp::Spatial(SpatialOp::Mask(MaskSpec::PhaseScreen(PhaseScreen::Terms(terms))))]
            }
            OpConfig::EllipticalScaling { ratio, angle } => {
                vec![ChannelOp::Spatial(SpatialOp::Mask(MaskSpec::EllipticalScaling { ratio, angle: rad(angle) }))]
            }
            OpConfig::EfficiencyScalar { transmission } => {
                if !(0.0..=1.0).contains(&transmission) {
                    return Err(Error::config(path, format!("transmission must lie in [0, 1] (got {transmission})")));
                }
                vec![ChannelOp::Efficiency { transmission }]
            }
            OpConfig::Qplate {} => vec![ChannelOp::QPlate],
        };
        for op in &ops {
            match op {
                ChannelOp::Spatial(s) => s.validate().map_err(|e| Error::config(path, e.to_string()))?,
                ChannelOp::Rotate { theta: x } | ChannelOp::Propagate { zeta: x } if !x.is_finite() => {
                    return Err(Error::config(path, "angle must be finite"))
                }
                _ => {}
            }
        }
        Ok(ops)
    }
}

/// One fully resolved evaluation point of a scenario.
#[derive(Debug, Clone)]
pub struct ScenarioPoint {
    pub basis: BasisSpec,
    pub grid: PolarGrid,
    pub encoding: Encoding,
    pub protocol: Protocol,
    /// Receiver frame rotation (arm A for entangled protocols), radians.
    pub theta: f64,
    /// Arm B frame rotation, radians.
    pub theta_b: f64,
    pub channel: Vec<ChannelOp>,
    pub channel_b: Vec<ChannelOp>,
}

/// A parsed scenario file.
#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    raw: toml::Table,
    pub name: String,
    pub description: String,
    pub protocol: Protocol,
    pub encoding: Encoding,
    pub output: Option<PathBuf>,
    pub sweep: Option<SweepConfig>,
    /// Multiplies the quadrature node counts.
    pub grid_scale: f64,
}

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: toml::Table = text.parse().map_err(|e: toml::de::Error| Error::config("<root>", e.message()))?;
        let head = parse_raw(&raw)?;
        let encoding: Encoding = head.encoding.parse().map_err(|e: Error| Error::config("encoding", e.to_string()))?;
        if head.protocol.is_entangled() && encoding == Encoding::Oam {
            return Err(Error::config("encoding", "entangled protocols support hybrid and polarization encodings"));
        }
        if head.protocol == Protocol::Coeffs && head.sweep.is_some() {
            return Err(Error::config("sweep", "the coeffs protocol writes one coefficient table and takes no sweep"));
        }
        if !head.channel_b.is_empty() && !head.protocol.is_entangled() {
            return Err(Error::config("channel_b", "only entangled protocols have a second arm"));
        }
        let cfg = Self {
            name: head.name,
            description: head.description,
            protocol: head.protocol,
            encoding,
            output: head.output,
            sweep: head.sweep,
            raw,
            grid_scale: 1.0,
        };
        cfg.points()?;
        Ok(cfg)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io { path: path.into(), source })?;
        Self::from_toml_str(&text)
    }

    /// The sweep values (or the single `theta`, in degrees, when there is no
    /// sweep) with the resolved point for each.
    pub fn points(&self) -> Result<Vec<(f64, ScenarioPoint)>> {
        match &self.sweep {
            None => {
                let p = self.resolve(&self.raw)?;
                Ok(vec![(p.theta.to_degrees(), p)])
            }
            Some(sweep) => {
                let target = SweepTarget::parse(&sweep.variable, &self.raw)?;
                sweep
                    .values()?
                    .into_iter()
                    .map(|v| {
                        let mut table = self.raw.clone();
                        target.set(&mut table, v);
                        let p = self.resolve(&table).map_err(|e| Error::AtSweepPoint {
                            context: format!("{} = {v}", sweep.variable),
                            source: Box::new(e),
                        })?;
                        Ok((v, p))
                    })
                    .collect()
            }
        }
    }

    /// Name of the first CSV column.
    pub fn sweep_column(&self) -> &str {
        self.sweep.as_ref().map_or("theta", |s| s.column())
    }

    fn resolve(&self, table: &toml::Table) -> Result<ScenarioPoint> {
        let raw = parse_raw(table)?;
        let b = raw.basis;
        if !(b.w0 > 0.0) || !b.w0.is_finite() {
            return Err(Error::config("basis.w0", format!("must be positive (got {})", b.w0)));
        }
        let basis = make_basis(b.m_max, b.p_max, b.w0, b.k_w0 / b.w0)
            .map_err(|e| Error::config("basis", e.to_string()))?;
        let d = PolarGrid::default();
        let grid = PolarGrid::new(
            raw.grid.n_radial.unwrap_or(d.n_radial),
            raw.grid.n_azimuthal.unwrap_or(d.n_azimuthal),
            raw.grid.r_max.unwrap_or(d.r_max),
        )
        .map_err(|e| Error::config("grid", e.to_string()))?;
        if !(self.grid_scale > 0.0) || !self.grid_scale.is_finite() {
            return Err(Error::config("grid_scale", format!("must be positive (got {})", self.grid_scale)));
        }
        let grid = grid.scaled(self.grid_scale);
        for (name, v) in [("theta", raw.theta), ("theta_b", raw.theta_b)] {
            if !v.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        Ok(ScenarioPoint {
            basis,
            grid,
            encoding: self.encoding,
            protocol: self.protocol,
            theta: raw.theta.to_radians(),
            theta_b: raw.theta_b.to_radians(),
            channel: resolve_ops(&raw.channel, "channel", &basis)?,
            channel_b: resolve_ops(&raw.channel_b, "channel_b", &basis)?,
        })
    }
}

fn parse_raw(table: &toml::Table) -> Result<RawScenario> {
    RawScenario::deserialize(toml::Value::Table(table.clone())).map_err(|e| Error::config("<root>", e.message()))
}

fn resolve_ops(entries: &[toml::Value], key: &str, basis: &BasisSpec) -> Result<Vec<ChannelOp>> {
    let mut ops = Vec::new();
    for (i, v) in entries.iter().enumerate() {
        let path = format!("{key}[{i}]");
        let name = v.get("op").and_then(|o| o.as_str()).unwrap_or("");
        if !OP_NAMES.contains(&name) {
            return Err(Error::config(
                format!("{path}.op"),
                format!("unknown operation `{name}`; expected one of {}", OP_NAMES.join(", ")),
            ));
        }
        let op = OpConfig::deserialize(v.clone()).map_err(|e| Error::config(&path, e.message()))?;
        ops.extend(op.into_ops(basis, &path)?);
    }
    Ok(ops)
}

enum SweepTarget {
    Top(String),
    Op { list: String, index: usize, field: String },
}

impl SweepTarget {
    fn parse(variable: &str, raw: &toml::Table) -> Result<Self> {
        let path = "sweep.variable";
        let parts: Vec<&str> = variable.split('.').collect();
        match parts.as_slice() {
            [name @ ("theta" | "theta_b")] => Ok(SweepTarget::Top(name.to_string())),
            [list @ ("channel" | "channel_b"), index, field] => {
                let index: usize = index
                    .parse()
                    .map_err(|_| Error::config(path, format!("`{index}` is not a channel index")))?;
                let len = raw.get(*list).and_then(|v| v.as_array()).map_or(0, |a| a.len());
                if index >= len {
                    return Err(Error::config(path, format!("{list} has {len} entries, no index {index}")));
                }
                if *field == "op" {
                    return Err(Error::config(path, "cannot sweep the operation name"));
                }
                Ok(SweepTarget::Op { list: list.to_string(), index, field: field.to_string() })
            }
            _ => Err(Error::config(
                path,
                format!("`{variable}` is not `theta`, `theta_b`, `channel.<i>.<field>` or `channel_b.<i>.<field>`"),
            )),
        }
    }

    fn set(&self, table: &mut toml::Table, value: f64) {
        match self {
            SweepTarget::Top(name) => {
                table.insert(name.clone(), toml::Value::Float(value));
            }
            SweepTarget::Op { list, index, field } => {
                if let Some(toml::Value::Table(op)) =
                    table.get_mut(list).and_then(|v| v.as_array_mut()).and_then(|a| a.get_mut(*index))
                {
                    op.insert(field.clone(), toml::Value::Float(value));
                }
            }
        }
    }
}
