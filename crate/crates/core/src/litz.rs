//! Litz-wire selection from the operating frequency, turn count and coil
//! former geometry.
//!
//! Strand diameter: the largest catalog size not above a third of the skin
//! depth. Strand count: as many strands as the former's copper budget per
//! turn allows, never fewer than needed to match the solid wire's copper
//! area.

use std::f64::consts::FRAC_PI_4;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::losses::{ac_copper_loss, dowell_factor, skin_depth, winding_phi_layers};
use crate::magnetics::{WindingSpec, Wire};
use crate::spectrum::HarmonicSpectrum;

/// Temperature at which strand sizing is evaluated.
const SIZING_TEMPERATURE: f64 = 20.0;

/// Winding area available on the bobbin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoilFormer {
    /// Radial build available for the winding.
    #[serde(rename = "breadth_m")]
    pub breadth: f64,
    /// Axial length available for the winding.
    #[serde(rename = "length_m")]
    pub length: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LitzRules {
    /// Copper fraction of the winding window usable by the bundle.
    pub fill_factor: f64,
    /// Copper fraction of a bundle's circumscribed cross-section.
    pub bundle_packing: f64,
    /// Strand diameter must not exceed skin depth divided by this.
    pub skin_depth_divisor: f64,
}

impl Default for LitzRules {
    fn default() -> Self {
        LitzRules {
            fill_factor: 0.3,
            bundle_packing: 0.6,
            skin_depth_divisor: 3.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LitzRecommendation {
    #[serde(rename = "strand_diameter_m")]
    pub strand_diameter: f64,
    pub strand_count: u32,
    /// Layers the bundle needs on the former.
    pub layers: u32,
    pub predicted_fr_at_f: f64,
    pub copper_area_ratio_vs_solid: f64,
    pub feasible: bool,
}

impl LitzRecommendation {
    /// The litz counterpart of `solid`: same turns, DC resistance scaled by
    /// the copper-area ratio.
    pub fn to_winding(&self, solid: &WindingSpec) -> WindingSpec {
        WindingSpec {
            layers: self.layers,
            wire: Wire::Litz {
                strand_count: self.strand_count,
                strand_diameter: self.strand_diameter,
            },
            dc_resistance: solid.dc_resistance / self.copper_area_ratio_vs_solid,
            ..solid.clone()
        }
    }
}

fn strand_area(d: f64) -> f64 {
    FRAC_PI_4 * d * d
}

fn skin_limit(f_effective: f64, rules: &LitzRules) -> Result<f64> {
    if f_effective < 0.0 || f_effective.is_nan() {
        return Err(Error::Domain(format!(
            "frequency {f_effective} must be >= 0"
        )));
    }
    if f_effective == 0.0 {
        return Ok(f64::INFINITY);
    }
    Ok(skin_depth(f_effective, SIZING_TEMPERATURE)? / rules.skin_depth_divisor)
}

/// Evaluates a given strand size and count against the design rules.
pub fn assess(
    strand_diameter: f64,
    strand_count: u32,
    f_effective: f64,
    turns: u32,
    former: &CoilFormer,
    solid_baseline_diameter: f64,
    rules: &LitzRules,
) -> Result<LitzRecommendation> {
    if !(strand_diameter > 0.0) || strand_count < 1 || turns < 1 {
        return Err(Error::Domain(
            "strand diameter, count and turns must be positive".into(),
        ));
    }
    let limit = skin_limit(f_effective, rules)?;
    let a_s = strand_area(strand_diameter);
    let budget = rules.fill_factor * former.breadth * former.length / f64::from(turns);
    let copper = f64::from(strand_count) * a_s;
    let baseline = strand_area(solid_baseline_diameter);
    let feasible = strand_diameter <= limit && copper <= budget && copper >= baseline;

    let bundle = (copper / (FRAC_PI_4 * rules.bundle_packing)).sqrt();
    let per_layer = ((former.length / bundle).floor() as u32).max(1);
    let layers = turns.div_ceil(per_layer);

    let predicted_fr_at_f = if f_effective > 0.0 {
        let w = WindingSpec {
            turns,
            layers,
            wire: Wire::Litz {
                strand_count,
                strand_diameter,
            },
            dc_resistance: 1.0,
            axial_length: former.length,
        };
        let (phi, m) = winding_phi_layers(&w, f_effective, SIZING_TEMPERATURE)?;
        dowell_factor(phi, m)
    } else {
        1.0
    };
    Ok(LitzRecommendation {
        strand_diameter,
        strand_count,
        layers,
        predicted_fr_at_f,
        copper_area_ratio_vs_solid: copper / baseline,
        feasible,
    })
}

/// Proposes strand diameter and count. An empty catalog or one without a
/// small enough strand yields `feasible = false` rather than an error.
pub fn recommend(
    f_effective: f64,
    turns: u32,
    former: &CoilFormer,
    solid_baseline_diameter: f64,
    catalog: &[f64],
    rules: &LitzRules,
) -> Result<LitzRecommendation> {
    if !(solid_baseline_diameter > 0.0) {
        return Err(Error::Domain("baseline diameter must be > 0".into()));
    }
    let limit = skin_limit(f_effective, rules)?;
    let usable = catalog.iter().copied().filter(|d| *d > 0.0);
    let chosen = usable
        .clone()
        .filter(|d| *d <= limit)
        .fold(None, |best: Option<f64>, d| {
            Some(best.map_or(d, |b| b.max(d)))
        });
    let Some(d) = chosen.or_else(|| {
        usable.fold(None, |best: Option<f64>, d| {
            Some(best.map_or(d, |b| b.min(d)))
        })
    }) else {
        return Ok(LitzRecommendation {
            strand_diameter: solid_baseline_diameter,
            strand_count: 1,
            layers: 1,
            predicted_fr_at_f: 1.0,
            copper_area_ratio_vs_solid: 1.0,
            feasible: false,
        });
    };
    let a_s = strand_area(d);
    let budget = rules.fill_factor * former.breadth * former.length / f64::from(turns.max(1));
    let by_fill = (budget / a_s).floor() as u32;
    let by_baseline = (strand_area(solid_baseline_diameter) / a_s).ceil() as u32;
    let count = by_fill.max(by_baseline).max(1);
    assess(
        d,
        count,
        f_effective,
        turns,
        former,
        solid_baseline_diameter,
        rules,
    )
}

/// Winding-loss ratio litz/solid on a common current spectrum.
///
/// Compares the eddy-current excess when the solid winding has any; for a
/// spectrum with no AC content it is the DC resistance ratio.
pub fn ac_factor_comparison(
    spectrum: &HarmonicSpectrum,
    solid: &WindingSpec,
    litz: &WindingSpec,
    temperature: f64,
) -> Result<f64> {
    if solid.turns != litz.turns {
        return Err(Error::Domain("windings must have equal turns".into()));
    }
    let (a_l, a_s) = (litz.wire.copper_area(), solid.wire.copper_area());
    let area_ratio = a_l / a_s;
    if (a_l - a_s).abs() > 0.6 * a_l.max(a_s) {
        return Err(Error::Domain(format!(
            "copper areas differ by more than 60% (ratio {area_ratio:.3})"
        )));
    }
    let p_solid = ac_copper_loss(spectrum, solid, temperature)?;
    if p_solid > 0.0 {
        Ok(ac_copper_loss(spectrum, litz, temperature)? / p_solid)
    } else {
        Ok(litz.dc_resistance / solid.dc_resistance)
    }
}
