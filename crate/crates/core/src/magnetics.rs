//! Magnetic circuit of the PFC choke: gap reluctance with fringing,
//! inductance, inverse gap sizing and flux density.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Permeability of free space, H/m.
pub const MU0: f64 = 4.0e-7 * std::f64::consts::PI;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapStyle {
    DiscreteCenterGap,
    Distributed,
}

/// Effective core parameters, SI units throughout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoreGeometry {
    #[serde(rename = "effective_area_m2")]
    pub effective_area: f64,
    #[serde(rename = "effective_length_m")]
    pub effective_length: f64,
    #[serde(rename = "effective_volume_m3")]
    pub effective_volume: f64,
    #[serde(rename = "center_leg_width_m")]
    pub center_leg_width: f64,
    #[serde(rename = "window_breadth_m")]
    pub window_breadth: f64,
    #[serde(rename = "window_height_m")]
    pub window_height: f64,
    #[serde(rename = "gap_length_m", default)]
    pub gap_length: f64,
    pub gap_style: GapStyle,
}

impl CoreGeometry {
    pub fn validate(&self, path: &str) -> Result<()> {
        let positive = [
            ("effective_area_m2", self.effective_area),
            ("effective_length_m", self.effective_length),
            ("effective_volume_m3", self.effective_volume),
            ("center_leg_width_m", self.center_leg_width),
            ("window_breadth_m", self.window_breadth),
            ("window_height_m", self.window_height),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::validation(format!("{path}.{name}"), "must be > 0"));
            }
        }
        if !(self.gap_length.is_finite() && self.gap_length >= 0.0) {
            return Err(Error::validation(
                format!("{path}.gap_length_m"),
                "must be >= 0",
            ));
        }
        if self.gap_style == GapStyle::Distributed && self.gap_length != 0.0 {
            return Err(Error::validation(
                format!("{path}.gap_length_m"),
                "distributed-gap cores have no discrete gap",
            ));
        }
        Ok(())
    }

    pub fn with_gap(&self, gap_length: f64) -> Self {
        CoreGeometry {
            gap_length,
            ..self.clone()
        }
    }

    /// True when a discrete gap is present.
    pub fn is_gapped(&self) -> bool {
        self.gap_style == GapStyle::DiscreteCenterGap && self.gap_length > 0.0
    }
}

/// Magnetic material: permeability, saturation and extended Steinmetz
/// coefficients (loss density in kW/m³ with f in Hz and ΔB in T).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MaterialParams {
    pub relative_permeability: f64,
    #[serde(rename = "saturation_flux_density_T")]
    pub saturation_flux: f64,
    pub steinmetz_kf: f64,
    pub steinmetz_x: f64,
    pub steinmetz_y: f64,
    pub ct: f64,
    pub ct1: f64,
    pub ct2: f64,
}

impl MaterialParams {
    /// `ct − ct1·T + ct2·T²`.
    pub fn temperature_factor(&self, temperature: f64) -> f64 {
        self.ct - self.ct1 * temperature + self.ct2 * temperature * temperature
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.relative_permeability > 1.0) {
            return Err(Error::validation(
                format!("{path}.relative_permeability"),
                "must be > 1",
            ));
        }
        if !(self.saturation_flux > 0.0) {
            return Err(Error::validation(
                format!("{path}.saturation_flux_density_T"),
                "must be > 0",
            ));
        }
        if !(self.steinmetz_kf >= 0.0) {
            return Err(Error::validation(
                format!("{path}.steinmetz_kf"),
                "must be >= 0",
            ));
        }
        if !(1.0..=3.0).contains(&self.steinmetz_x) {
            return Err(Error::validation(
                format!("{path}.steinmetz_x"),
                "must lie in [1, 3]",
            ));
        }
        if !(2.0..=4.0).contains(&self.steinmetz_y) {
            return Err(Error::validation(
                format!("{path}.steinmetz_y"),
                "must lie in [2, 4]",
            ));
        }
        // The quadratic is checked at its vertex and at both ends of 0..150 °C.
        let mut probes = vec![0.0, 150.0];
        if self.ct2 != 0.0 {
            let vertex = self.ct1 / (2.0 * self.ct2);
            if (0.0..=150.0).contains(&vertex) {
                probes.push(vertex);
            }
        }
        if probes.iter().any(|&t| !(self.temperature_factor(t) > 0.0)) {
            return Err(Error::validation(
                format!("{path}.ct"),
                "temperature polynomial must stay positive on 0..150 °C",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Wire {
    Solid {
        #[serde(rename = "diameter_m")]
        diameter: f64,
    },
    Litz {
        strand_count: u32,
        #[serde(rename = "strand_diameter_m")]
        strand_diameter: f64,
    },
}

impl Wire {
    /// Diameter of the individual conductor that eddy currents see.
    pub fn conductor_diameter(&self) -> f64 {
        match *self {
            Wire::Solid { diameter } => diameter,
            Wire::Litz {
                strand_diameter, ..
            } => strand_diameter,
        }
    }

    pub fn copper_area(&self) -> f64 {
        let quarter_pi = std::f64::consts::FRAC_PI_4;
        match *self {
            Wire::Solid { diameter } => quarter_pi * diameter * diameter,
            Wire::Litz {
                strand_count,
                strand_diameter,
            } => strand_count as f64 * quarter_pi * strand_diameter * strand_diameter,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WindingSpec {
    pub turns: u32,
    pub layers: u32,
    pub wire: Wire,
    #[serde(rename = "dc_resistance_ohm")]
    pub dc_resistance: f64,
    #[serde(rename = "axial_length_m")]
    pub axial_length: f64,
}

impl WindingSpec {
    pub fn validate(&self, path: &str) -> Result<()> {
        if self.turns < 1 {
            return Err(Error::validation(format!("{path}.turns"), "must be >= 1"));
        }
        if self.layers < 1 {
            return Err(Error::validation(format!("{path}.layers"), "must be >= 1"));
        }
        if !(self.dc_resistance > 0.0) {
            return Err(Error::validation(
                format!("{path}.dc_resistance_ohm"),
                "must be > 0",
            ));
        }
        if !(self.axial_length > 0.0) {
            return Err(Error::validation(
                format!("{path}.axial_length_m"),
                "must be > 0",
            ));
        }
        match self.wire {
            Wire::Solid { diameter } if !(diameter > 0.0) => Err(Error::validation(
                format!("{path}.wire.solid.diameter_m"),
                "must be > 0",
            )),
            Wire::Litz { strand_count, .. } if strand_count < 1 => Err(Error::validation(
                format!("{path}.wire.litz.strand_count"),
                "must be >= 1",
            )),
            Wire::Litz {
                strand_diameter, ..
            } if !(strand_diameter > 0.0) => Err(Error::validation(
                format!("{path}.wire.litz.strand_diameter_m"),
                "must be > 0",
            )),
            _ => Ok(()),
        }
    }
}

/// Logarithmic fringing factor `1 + (g/√Ae)·ln(2·h_w/g)`; 1 for a zero gap.
pub fn fringing_factor(core: &CoreGeometry) -> f64 {
    let g = core.gap_length;
    if g <= 0.0 {
        return 1.0;
    }
    1.0 + (g / core.effective_area.sqrt()) * (2.0 * core.window_height / g).ln()
}

fn check_gap(core: &CoreGeometry) -> Result<()> {
    if core.gap_style != GapStyle::DiscreteCenterGap {
        return Err(Error::Domain("gap reluctance needs a discrete gap".into()));
    }
    if !(core.gap_length > 0.0) {
        return Err(Error::Domain(format!(
            "gap length {} m must be > 0",
            core.gap_length
        )));
    }
    if core.gap_length >= core.window_height {
        return Err(Error::Domain(format!(
            "gap {} m not smaller than window height {} m",
            core.gap_length, core.window_height
        )));
    }
    Ok(())
}

/// Reluctance of the center gap including fringing, 1/H.
pub fn gap_reluctance(core: &CoreGeometry) -> Result<f64> {
    check_gap(core)?;
    Ok(core.gap_length / (MU0 * core.effective_area * fringing_factor(core)))
}

/// Reluctance of the magnetic path through the core material, 1/H.
pub fn core_reluctance(core: &CoreGeometry, material: &MaterialParams) -> f64 {
    core.effective_length / (MU0 * material.relative_permeability * core.effective_area)
}

/// Inductance of the wound core.
pub fn inductance(
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
) -> Result<f64> {
    let n2 = f64::from(winding.turns).powi(2);
    match core.gap_style {
        GapStyle::Distributed => Ok(n2 / core_reluctance(core, material)),
        GapStyle::DiscreteCenterGap if core.gap_length == 0.0 => {
            Ok(n2 / core_reluctance(core, material))
        }
        GapStyle::DiscreteCenterGap => {
            Ok(n2 / (gap_reluctance(core)? + core_reluctance(core, material)))
        }
    }
}

/// Inductance with the gap modelled as a plain `g/(µ0·Ae)` reluctance.
pub fn inductance_without_fringing(
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
) -> Result<f64> {
    let n2 = f64::from(winding.turns).powi(2);
    let r_gap = if core.is_gapped() {
        check_gap(core)?;
        core.gap_length / (MU0 * core.effective_area)
    } else {
        0.0
    };
    Ok(n2 / (r_gap + core_reluctance(core, material)))
}

/// Finds the center-gap length giving `target` henries by bisection.
pub fn solve_gap_for_inductance(
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
    target: f64,
) -> Result<f64> {
    if core.gap_style != GapStyle::DiscreteCenterGap {
        return Err(Error::Domain("gap sizing needs a discrete-gap core".into()));
    }
    if !(target > 0.0) {
        return Err(Error::Domain("target inductance must be > 0".into()));
    }
    let ungapped = inductance(&core.with_gap(0.0), material, winding)?;
    if target >= ungapped {
        return Err(Error::Infeasible(format!(
            "target {target:.4e} H is not below the ungapped inductance {ungapped:.4e} H"
        )));
    }
    let mut lo = 0.0_f64;
    let mut hi = core.window_height * (1.0 - 1e-9);
    let l_at = |g: f64| inductance(&core.with_gap(g), material, winding);
    if l_at(hi)? > target {
        return Err(Error::Infeasible(format!(
            "target {target:.4e} H needs a gap longer than the window"
        )));
    }
    // Inductance falls monotonically with gap length.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= 0.0 {
            break;
        }
        let l = l_at(mid)?;
        if l > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if (hi - lo) <= 1e-15 * hi.max(1e-12) {
            break;
        }
    }
    let g = 0.5 * (lo + hi);
    let achieved = l_at(g)?;
    if ((achieved - target) / target).abs() >= 1e-4 {
        return Err(Error::Infeasible("gap bisection did not converge".into()));
    }
    Ok(g)
}

/// Flux density at current `i` together with a saturation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FluxDensity {
    pub tesla: f64,
    pub saturated: bool,
}

/// Tesla per ampere, `L/(N·Ae)`.
pub fn flux_per_ampere(inductance: f64, winding: &WindingSpec, core: &CoreGeometry) -> f64 {
    inductance / (f64::from(winding.turns) * core.effective_area)
}

pub fn flux_density(
    inductance: f64,
    winding: &WindingSpec,
    core: &CoreGeometry,
    material: &MaterialParams,
    current: f64,
) -> FluxDensity {
    let tesla = flux_per_ampere(inductance, winding, core) * current;
    FluxDensity {
        tesla,
        saturated: tesla >= material.saturation_flux,
    }
}
