//! Steady-state 1-D thermal chain along the coil axis, with an optional
//! lumped core node that exchanges heat with every winding section.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::magnetics::WindingSpec;
use crate::numeric::compensated_sum;

#[derive(Debug, Clone, PartialEq)]
pub struct CoreNode {
    /// Conductance from each winding section to the core, W/K.
    pub section_conductance: Vec<f64>,
    /// Core surface to ambient, W/K.
    pub ambient_conductance: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalNetwork {
    pub n_sections: usize,
    /// Conductance of each link between adjacent sections, W/K (len n−1).
    pub axial_conductance: Vec<f64>,
    /// Section-to-ambient conductance, W/K (len n).
    pub ambient_conductance: Vec<f64>,
    pub ambient_temperature: f64,
    pub core: Option<CoreNode>,
}

impl ThermalNetwork {
    /// Uniform chain without a core node.
    pub fn uniform(n: usize, axial: f64, ambient: f64, ambient_temperature: f64) -> Self {
        ThermalNetwork {
            n_sections: n,
            axial_conductance: vec![axial; n.saturating_sub(1)],
            ambient_conductance: vec![ambient; n],
            ambient_temperature,
            core: None,
        }
    }

    fn check(&self) -> Result<()> {
        let n = self.n_sections;
        if n < 3 {
            return Err(Error::Domain(format!("need at least 3 sections, got {n}")));
        }
        if self.axial_conductance.len() != n - 1 || self.ambient_conductance.len() != n {
            return Err(Error::Domain(
                "conductance vector lengths do not match sections".into(),
            ));
        }
        let bad = |g: &f64| !(*g > 0.0 && g.is_finite());
        if self.axial_conductance.iter().any(bad) || self.ambient_conductance.iter().any(bad) {
            return Err(Error::Singular("all conductances must be > 0".into()));
        }
        if let Some(core) = &self.core {
            if core.section_conductance.len() != n {
                return Err(Error::Domain(
                    "core coupling length does not match sections".into(),
                ));
            }
            if core.section_conductance.iter().any(bad) || bad(&core.ambient_conductance) {
                return Err(Error::Singular("core conductances must be > 0".into()));
            }
        }
        Ok(())
    }

    fn diagonal(&self) -> Vec<f64> {
        let n = self.n_sections;
        (0..n)
            .map(|i| {
                let left = if i > 0 {
                    self.axial_conductance[i - 1]
                } else {
                    0.0
                };
                let right = if i + 1 < n {
                    self.axial_conductance[i]
                } else {
                    0.0
                };
                let core = self.core.as_ref().map_or(0.0, |c| c.section_conductance[i]);
                left + right + self.ambient_conductance[i] + core
            })
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemperatureProfile {
    /// °C per section.
    pub temperatures: Vec<f64>,
    pub t_min: f64,
    pub t_max: f64,
    pub range: f64,
}

impl TemperatureProfile {
    pub fn new(temperatures: Vec<f64>) -> Self {
        let t_min = temperatures.iter().copied().fold(f64::INFINITY, f64::min);
        let t_max = temperatures
            .iter()
            .copied()
            .fold(f64::NEG_INFINITY, f64::max);
        TemperatureProfile {
            temperatures,
            t_min,
            t_max,
            range: t_max - t_min,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThermalSolution {
    pub profile: TemperatureProfile,
    pub core_temperature: Option<f64>,
}

/// Thomas algorithm for a diagonally dominant tridiagonal system.
/// `off` holds the (symmetric) off-diagonal magnitudes, entering as −off.
fn solve_symmetric_tridiagonal(diag: &[f64], off: &[f64], rhs: &[f64]) -> Result<Vec<f64>> {
    let n = diag.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    let mut pivot = diag[0];
    if pivot <= 0.0 {
        return Err(Error::Singular("zero pivot".into()));
    }
    c[0] = if n > 1 { -off[0] / pivot } else { 0.0 };
    d[0] = rhs[0] / pivot;
    for i in 1..n {
        pivot = diag[i] + off[i - 1] * c[i - 1];
        if pivot <= 0.0 {
            return Err(Error::Singular("zero pivot".into()));
        }
        c[i] = if i + 1 < n { -off[i] / pivot } else { 0.0 };
        d[i] = (rhs[i] + off[i - 1] * d[i - 1]) / pivot;
    }
    let mut x = d;
    for i in (0..n - 1).rev() {
        let next = x[i + 1];
        x[i] -= c[i] * next;
    }
    Ok(x)
}

/// Steady-state winding temperatures for per-section heat injections (W).
pub fn solve_steady_state(net: &ThermalNetwork, injections: &[f64]) -> Result<TemperatureProfile> {
    solve_with_core(net, injections, 0.0).map(|s| s.profile)
}

/// As [`solve_steady_state`], with `core_loss` watts injected into the core
/// node.
pub fn solve_with_core(
    net: &ThermalNetwork,
    injections: &[f64],
    core_loss: f64,
) -> Result<ThermalSolution> {
    net.check()?;
    if injections.len() != net.n_sections {
        return Err(Error::Domain(format!(
            "{} injections for {} sections",
            injections.len(),
            net.n_sections
        )));
    }
    if injections.iter().any(|q| !(*q >= 0.0)) || !(core_loss >= 0.0) {
        return Err(Error::Domain("heat injections must be >= 0".into()));
    }
    let diag = net.diagonal();
    let off = &net.axial_conductance;
    // Work in temperature rise above ambient.
    let rise0 = solve_symmetric_tridiagonal(&diag, off, injections)?;
    let (rise, core_rise) = match &net.core {
        None => {
            if core_loss > 0.0 {
                return Err(Error::Domain(
                    "core loss given but network has no core node".into(),
                ));
            }
            (rise0, None)
        }
        Some(core) => {
            // rise = rise0 + θc·rise1 with A·rise1 = g_core
            let rise1 = solve_symmetric_tridiagonal(&diag, off, &core.section_conductance)?;
            let g = &core.section_conductance;
            let num = core_loss + compensated_sum(g.iter().zip(&rise0).map(|(a, b)| a * b));
            let den = compensated_sum(g.iter().copied()) + core.ambient_conductance
                - compensated_sum(g.iter().zip(&rise1).map(|(a, b)| a * b));
            let theta_c = num / den;
            let rise = rise0
                .iter()
                .zip(&rise1)
                .map(|(a, b)| a + theta_c * b)
                .collect();
            (rise, Some(theta_c))
        }
    };
    let ta = net.ambient_temperature;
    Ok(ThermalSolution {
        profile: TemperatureProfile::new(rise.iter().map(|r| ta + r).collect()),
        core_temperature: core_rise.map(|r| ta + r),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileStatistics {
    pub t_min: f64,
    pub t_max: f64,
    pub range: f64,
    pub argmax_section: usize,
}

pub fn profile_statistics(profile: &TemperatureProfile) -> ProfileStatistics {
    let argmax_section = profile
        .temperatures
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, &t)| {
            if t > best.1 {
                (i, t)
            } else {
                best
            }
        })
        .0;
    ProfileStatistics {
        t_min: profile.t_min,
        t_max: profile.t_max,
        range: profile.range,
        argmax_section,
    }
}

/// `range(a) − range(b)` in kelvin.
pub fn compare_ranges(a: &TemperatureProfile, b: &TemperatureProfile) -> f64 {
    a.range - b.range
}

/// Geometry and heat-transfer constants used to build the default network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ThermalConfig {
    pub sections: usize,
    #[serde(rename = "ambient_temperature_C")]
    pub ambient_temperature: f64,
    #[serde(rename = "convection_W_m2K")]
    pub convection: f64,
    #[serde(rename = "mean_turn_length_m")]
    pub mean_turn_length: f64,
    #[serde(rename = "outer_perimeter_m")]
    pub outer_perimeter: f64,
    #[serde(rename = "copper_conductivity_W_mK")]
    pub copper_conductivity: f64,
    /// Extra cooling of the two end sections (multiplies their ambient
    /// conductance); 1 treats them like any other section.
    pub end_cooling_factor: f64,
    /// Total winding-to-core conductance, spread evenly over the sections.
    #[serde(rename = "winding_to_core_W_K")]
    pub winding_to_core: f64,
    #[serde(rename = "core_surface_area_m2")]
    pub core_surface_area: f64,
    /// Override for every axial link, W/K.
    #[serde(
        rename = "axial_conductance_W_K",
        skip_serializing_if = "Option::is_none"
    )]
    pub axial_conductance: Option<f64>,
    /// Override for every section's ambient conductance, W/K.
    #[serde(
        rename = "ambient_conductance_W_K",
        skip_serializing_if = "Option::is_none"
    )]
    pub ambient_conductance: Option<f64>,
}

impl Default for ThermalConfig {
    fn default() -> Self {
        ThermalConfig {
            sections: 33,
            ambient_temperature: 27.0,
            convection: 12.0,
            mean_turn_length: 0.070,
            outer_perimeter: 0.078,
            copper_conductivity: 398.0,
            end_cooling_factor: 1.0,
            winding_to_core: 0.08,
            core_surface_area: 5.0e-3,
            axial_conductance: None,
            ambient_conductance: None,
        }
    }
}

impl ThermalConfig {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.sections < 3 {
            return Err(Error::validation(
                format!("{path}.sections"),
                "must be >= 3",
            ));
        }
        let positive = [
            ("convection_W_m2K", self.convection),
            ("mean_turn_length_m", self.mean_turn_length),
            ("outer_perimeter_m", self.outer_perimeter),
            ("copper_conductivity_W_mK", self.copper_conductivity),
            ("end_cooling_factor", self.end_cooling_factor),
            ("winding_to_core_W_K", self.winding_to_core),
            ("core_surface_area_m2", self.core_surface_area),
            (
                "axial_conductance_W_K",
                self.axial_conductance.unwrap_or(1.0),
            ),
            (
                "ambient_conductance_W_K",
                self.ambient_conductance.unwrap_or(1.0),
            ),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::validation(format!("{path}.{name}"), "must be > 0"));
            }
        }
        if !self.ambient_temperature.is_finite() {
            return Err(Error::validation(
                format!("{path}.ambient_temperature_C"),
                "must be finite",
            ));
        }
        Ok(())
    }

    /// Axial position (mm from the coil end) of each section centre.
    pub fn section_positions_mm(&self, winding: &WindingSpec) -> Vec<f64> {
        let pitch = winding.axial_length / self.sections as f64;
        (0..self.sections)
            .map(|i| (i as f64 + 0.5) * pitch * 1e3)
            .collect()
    }

    /// Builds the chain. Axial heat flow follows the helical copper path:
    /// advancing one section pitch means travelling `pitch/turn_pitch` turns
    /// of wire.
    pub fn network(&self, winding: &WindingSpec) -> ThermalNetwork {
        let n = self.sections;
        let pitch = winding.axial_length / n as f64;
        let turns_per_layer = winding.turns.div_ceil(winding.layers).max(1);
        let turn_pitch = winding.axial_length / f64::from(turns_per_layer);
        let copper = winding.wire.copper_area();
        let path = self.mean_turn_length * pitch / turn_pitch;
        let axial = self
            .axial_conductance
            .unwrap_or(self.copper_conductivity * copper * f64::from(winding.layers) / path);
        let ambient = self
            .ambient_conductance
            .unwrap_or(self.convection * self.outer_perimeter * pitch);
        let mut ambient_vec = vec![ambient; n];
        ambient_vec[0] *= self.end_cooling_factor;
        ambient_vec[n - 1] *= self.end_cooling_factor;
        ThermalNetwork {
            n_sections: n,
            axial_conductance: vec![axial; n - 1],
            ambient_conductance: ambient_vec,
            ambient_temperature: self.ambient_temperature,
            core: Some(CoreNode {
                section_conductance: vec![self.winding_to_core / n as f64; n],
                ambient_conductance: self.convection * self.core_surface_area,
            }),
        }
    }
}
