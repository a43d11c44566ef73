//! Scenario files: strict JSON configuration resolved against the library.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::controller::{ControllerConfig, OperatingPoint};
use crate::error::{Error, Result};
use crate::library::{bundled_strand_catalog, load_strand_catalog, Library};
use crate::litz::{CoilFormer, LitzRules};
use crate::losses::FringingModel;
use crate::magnetics::{
    inductance, solve_gap_for_inductance, CoreGeometry, GapStyle, MaterialParams, WindingSpec,
};
use crate::spectrum::DEFAULT_HARMONICS;
use crate::thermal::ThermalConfig;

/// Scenario as written on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: String,
    pub operating_point: OperatingPoint,
    pub controller: ControllerConfig,
    pub magnetics: MagneticsRef,
    pub winding: WindingSpec,
    #[serde(default)]
    pub fringing: FringingModel,
    #[serde(default)]
    pub thermal: ThermalConfig,
    #[serde(default)]
    pub analysis: AnalysisOptions,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub litz: Option<LitzOptions>,
    /// Alternative core/material library, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub library: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MagneticsRef {
    pub core: String,
    pub material: String,
    /// Fixed center-gap length.
    #[serde(
        rename = "gap_length_m",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub gap_length: Option<f64>,
    /// Size the center gap for this inductance instead.
    #[serde(
        rename = "inductance_target_H",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub inductance_target: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnalysisOptions {
    /// Winding temperature for resistivity and core-loss evaluation.
    #[serde(rename = "temperature_C")]
    pub temperature: f64,
    pub harmonics: usize,
    /// FFT length; chosen automatically when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    pub waveform_points_per_segment: usize,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions {
            temperature: 60.0,
            harmonics: DEFAULT_HARMONICS,
            samples: None,
            waveform_points_per_segment: 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LitzOptions {
    #[serde(rename = "baseline_solid_diameter_m")]
    pub baseline_solid_diameter: f64,
    pub former: CoilFormer,
    #[serde(default)]
    pub rules: LitzRules,
    /// Strand catalog, relative to the scenario file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalog: Option<PathBuf>,
}

/// A validated scenario with every reference resolved.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub operating_point: OperatingPoint,
    pub controller: ControllerConfig,
    pub core_name: String,
    pub material_name: String,
    /// Core with the gap length filled in.
    pub core: CoreGeometry,
    pub material: MaterialParams,
    pub inductance: f64,
    pub winding: WindingSpec,
    pub fringing: FringingModel,
    pub thermal: ThermalConfig,
    pub analysis: AnalysisOptions,
    pub litz: Option<ResolvedLitz>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResolvedLitz {
    pub baseline_solid_diameter: f64,
    pub former: CoilFormer,
    pub rules: LitzRules,
    pub catalog: Vec<f64>,
}

impl ScenarioFile {
    /// Validates and resolves names; relative paths are taken from `base`.
    pub fn resolve(self, base: &Path) -> Result<Scenario> {
        if self.name.trim().is_empty() {
            return Err(Error::validation("name", "must not be empty"));
        }
        self.operating_point.validate("operating_point")?;
        self.controller.validate("controller")?;
        self.winding.validate("winding")?;
        self.fringing.validate("fringing")?;
        self.thermal.validate("thermal")?;
        let a = &self.analysis;
        if !a.temperature.is_finite() {
            return Err(Error::validation(
                "analysis.temperature_C",
                "must be finite",
            ));
        }
        if a.harmonics < 1 {
            return Err(Error::validation("analysis.harmonics", "must be >= 1"));
        }
        if a.waveform_points_per_segment < 1 {
            return Err(Error::validation(
                "analysis.waveform_points_per_segment",
                "must be >= 1",
            ));
        }

        let library = match &self.library {
            Some(p) => Library::load(&base.join(p))?,
            None => Library::bundled(),
        };
        let m = &self.magnetics;
        let core = library.core(&m.core).ok_or_else(|| {
            Error::validation("magnetics.core", format!("unknown core `{}`", m.core))
        })?;
        let material = library.material(&m.material).ok_or_else(|| {
            Error::validation(
                "magnetics.material",
                format!("unknown material `{}`", m.material),
            )
        })?;
        let (core, inductance) = resolve_gap(core, material, &self.winding, m)?;

        let litz = match self.litz {
            None => None,
            Some(l) => {
                if !(l.baseline_solid_diameter > 0.0) {
                    return Err(Error::validation(
                        "litz.baseline_solid_diameter_m",
                        "must be > 0",
                    ));
                }
                if !(l.former.breadth > 0.0) {
                    return Err(Error::validation("litz.former.breadth_m", "must be > 0"));
                }
                if !(l.former.length > 0.0) {
                    return Err(Error::validation("litz.former.length_m", "must be > 0"));
                }
                if !(l.rules.fill_factor > 0.0 && l.rules.fill_factor <= 1.0) {
                    return Err(Error::validation(
                        "litz.rules.fill_factor",
                        "must lie in (0, 1]",
                    ));
                }
                if !(l.rules.bundle_packing > 0.0 && l.rules.bundle_packing <= 1.0) {
                    return Err(Error::validation(
                        "litz.rules.bundle_packing",
                        "must lie in (0, 1]",
                    ));
                }
                if !(l.rules.skin_depth_divisor > 0.0) {
                    return Err(Error::validation(
                        "litz.rules.skin_depth_divisor",
                        "must be > 0",
                    ));
                }
                let catalog = match &l.catalog {
                    Some(p) => load_strand_catalog(&base.join(p))?,
                    None => bundled_strand_catalog(),
                };
                Some(ResolvedLitz {
                    baseline_solid_diameter: l.baseline_solid_diameter,
                    former: l.former,
                    rules: l.rules,
                    catalog,
                })
            }
        };

        Ok(Scenario {
            name: self.name,
            operating_point: self.operating_point,
            controller: self.controller,
            core_name: m.core.clone(),
            material_name: m.material.clone(),
            core,
            material: material.clone(),
            inductance,
            winding: self.winding,
            fringing: self.fringing,
            thermal: self.thermal,
            analysis: self.analysis,
            litz,
        })
    }
}

fn resolve_gap(
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
    m: &MagneticsRef,
) -> Result<(CoreGeometry, f64)> {
    let core = match (core.gap_style, m.gap_length, m.inductance_target) {
        (_, Some(_), Some(_)) => {
            return Err(Error::validation(
                "magnetics",
                "give either gap_length_m or inductance_target_H, not both",
            ))
        }
        (GapStyle::Distributed, None, None) => core.clone(),
        (GapStyle::Distributed, _, _) => {
            return Err(Error::validation(
                "magnetics",
                format!(
                    "core `{}` has a distributed gap; remove gap settings",
                    m.core
                ),
            ))
        }
        (GapStyle::DiscreteCenterGap, Some(g), None) => {
            if !(g > 0.0 && g < core.window_height) {
                return Err(Error::validation(
                    "magnetics.gap_length_m",
                    "must be > 0 and shorter than the window height",
                ));
            }
            core.with_gap(g)
        }
        (GapStyle::DiscreteCenterGap, None, Some(target)) => {
            if !(target > 0.0) {
                return Err(Error::validation(
                    "magnetics.inductance_target_H",
                    "must be > 0",
                ));
            }
            core.with_gap(solve_gap_for_inductance(core, material, winding, target)?)
        }
        (GapStyle::DiscreteCenterGap, None, None) => {
            return Err(Error::validation(
                "magnetics",
                "a gapped core needs gap_length_m or inductance_target_H",
            ))
        }
    };
    let l = inductance(&core, material, winding)?;
    Ok((core, l))
}

pub fn parse_scenario(text: &str, base: &Path) -> Result<Scenario> {
    let file: ScenarioFile = serde_json::from_str(text)?;
    file.resolve(base)
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    parse_scenario(&text, base)
}
