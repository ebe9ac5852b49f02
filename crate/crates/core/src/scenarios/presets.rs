//! Scenario files shipped with the crate.

use super::config::ScenarioConfig;
use crate::error::{Error, Result};

/// `(name, TOML text)` of every preset.
pub const PRESETS: &[(&str, &str)] = &[
    ("classify-combined-aligned", include_str!("../../presets/classify-combined-aligned.toml")),
    ("classify-combined-crossed", include_str!("../../presets/classify-combined-crossed.toml")),
    ("classify-knife", include_str!("../../presets/classify-knife.toml")),
    ("classify-turbulence", include_str!("../../presets/classify-turbulence.toml")),
    ("coeffs-aperture", include_str!("../../presets/coeffs-aperture.toml")),
    ("fig3a-hybrid", include_str!("../../presets/fig3a-hybrid.toml")),
    ("fig3a-polarization", include_str!("../../presets/fig3a-polarization.toml")),
    ("fig3c-tomography", include_str!("../../presets/fig3c-tomography.toml")),
    ("fig3d-hybrid", include_str!("../../presets/fig3d-hybrid.toml")),
    ("fig3d-polarization", include_str!("../../presets/fig3d-polarization.toml")),
    ("si-fig6a-hybrid-centered", include_str!("../../presets/si-fig6a-hybrid-centered.toml")),
    ("si-fig6a-hybrid-offcenter", include_str!("../../presets/si-fig6a-hybrid-offcenter.toml")),
    ("si-fig6a-oam-centered", include_str!("../../presets/si-fig6a-oam-centered.toml")),
    ("si-fig6a-oam-offcenter", include_str!("../../presets/si-fig6a-oam-offcenter.toml")),
    ("si-fig6b-hybrid-knife", include_str!("../../presets/si-fig6b-hybrid-knife.toml")),
    ("si-fig6b-oam-knife", include_str!("../../presets/si-fig6b-oam-knife.toml")),
    ("si-fig7-hybrid-displacement", include_str!("../../presets/si-fig7-hybrid-displacement.toml")),
    ("si-fig7-oam-displacement", include_str!("../../presets/si-fig7-oam-displacement.toml")),
];

pub fn preset_names() -> impl Iterator<Item = &'static str> {
    PRESETS.iter().map(|(n, _)| *n)
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    let (_, text) = PRESETS.iter().find(|(n, _)| *n == name).ok_or_else(|| {
        Error::config("preset", format!("unknown preset `{name}`; available: {}", preset_names().collect::<Vec<_>>().join(", ")))
    })?;
    ScenarioConfig::from_toml_str(text)
}
