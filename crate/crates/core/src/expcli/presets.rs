//! Bundled example configurations and the versioned design parameter table.

use std::collections::BTreeMap;

use serde::Deserialize;

use super::config::Scenario;

pub const DEFAULTS_TOML: &str = include_str!("../../presets/defaults.toml");

/// Ready-to-run configuration text for a scenario.
pub fn preset(scenario: Scenario) -> &'static str {
    match scenario {
        Scenario::Fig2SingleAtom => include_str!("../../presets/fig2_single_atom.toml"),
        Scenario::Fig3TwoAtom => include_str!("../../presets/fig3_two_atom.toml"),
        Scenario::Fig4Correlations => include_str!("../../presets/fig4_correlations.toml"),
        Scenario::Fig5PositionMap => include_str!("../../presets/fig5_position_map.toml"),
        Scenario::NAtomWstate => include_str!("../../presets/n_atom_wstate.toml"),
        Scenario::Custom => include_str!("../../presets/custom.toml"),
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Defaults {
    pub version: u32,
    pub gamma_mhz: f64,
    pub wavelength_nm: f64,
    pub designs: BTreeMap<String, DesignDefaults>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DesignDefaults {
    pub q_factor: f64,
    pub mode_volume: f64,
    pub g_ghz: Option<f64>,
    pub cooperativity: f64,
    pub trap_center_nm: [f64; 3],
    pub trap_sigma_nm: [f64; 3],
}

pub fn defaults() -> Defaults {
    toml::from_str(DEFAULTS_TOML).expect("bundled defaults are valid")
}
