//! Loss stack of the choke: DC copper, eddy-current (skin and proximity)
//! copper excess over the current spectrum, gap-fringing loss with its axial
//! localisation, and piecewise extended-Steinmetz core loss.

use std::f64::consts::{FRAC_PI_4, PI};

use serde::{Deserialize, Serialize};

use crate::controller::{CycleKind, HalfLineProfile};
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::magnetics::{flux_per_ampere, CoreGeometry, MaterialParams, WindingSpec, Wire, MU0};
use crate::numeric::compensated_sum;
use crate::spectrum::{
    default_sample_count, harmonic_spectrum_with, HarmonicSpectrum, DEFAULT_HARMONICS,
};

/// Copper resistivity at 20 °C, Ω·m.
pub const RHO_CU_20: f64 = 1.724e-8;
/// Copper resistivity temperature coefficient, 1/K.
pub const ALPHA_CU: f64 = 3.93e-3;

/// `(π/4)^¾`: round conductor mapped to an equivalent square foil layer.
fn round_to_foil() -> f64 {
    FRAC_PI_4.powf(0.75)
}

pub fn dc_copper_loss(r_dc: f64, i_rms: f64) -> f64 {
    r_dc * i_rms * i_rms
}

pub fn copper_resistivity(temperature: f64) -> f64 {
    RHO_CU_20 * (1.0 + ALPHA_CU * (temperature - 20.0))
}

pub fn skin_depth(frequency: f64, temperature: f64) -> Result<f64> {
    if !(frequency > 0.0) {
        return Err(Error::Domain(format!(
            "skin depth needs f > 0, got {frequency}"
        )));
    }
    Ok((copper_resistivity(temperature) / (PI * frequency * MU0)).sqrt())
}

/// Layered-winding AC resistance factor `F_R(φ, m)`.
pub fn dowell_factor(phi: f64, layers: f64) -> f64 {
    if phi <= 0.0 {
        return 1.0;
    }
    let m2 = layers * layers;
    if phi < 1e-3 {
        return 1.0 + (5.0 * m2 - 1.0) / 45.0 * phi.powi(4);
    }
    if phi > 40.0 {
        // hyperbolic ratios are 1 to within e^-40
        return phi * (1.0 + 2.0 * (m2 - 1.0) / 3.0);
    }
    let x = 2.0 * phi;
    let skin = (x.sinh() + x.sin()) / (x.cosh() - x.cos());
    let prox = (phi.sinh() - phi.sin()) / (phi.cosh() + phi.cos());
    phi * (skin + 2.0 * (m2 - 1.0) / 3.0 * prox)
}

/// `(φ, m)` seen by a winding at `frequency`; litz uses the strand diameter
/// and an effective layer count `m·√n`.
pub fn winding_phi_layers(
    winding: &WindingSpec,
    frequency: f64,
    temperature: f64,
) -> Result<(f64, f64)> {
    let delta = skin_depth(frequency, temperature)?;
    let layers = f64::from(winding.layers);
    Ok(match winding.wire {
        Wire::Solid { diameter } => (round_to_foil() * diameter / delta, layers),
        Wire::Litz {
            strand_count,
            strand_diameter,
        } => (
            round_to_foil() * strand_diameter / delta,
            layers * f64::from(strand_count).sqrt(),
        ),
    })
}

/// Eddy-current copper loss in excess of the DC loss.
pub fn ac_copper_loss(
    spectrum: &HarmonicSpectrum,
    winding: &WindingSpec,
    temperature: f64,
) -> Result<f64> {
    ac_copper_loss_with(spectrum, winding, temperature, Strategy::default())
}

pub fn ac_copper_loss_with(
    spectrum: &HarmonicSpectrum,
    winding: &WindingSpec,
    temperature: f64,
    strategy: Strategy,
) -> Result<f64> {
    let parts = strategy.map(&spectrum.harmonics, |h| {
        let (phi, m) = winding_phi_layers(winding, h.frequency, temperature)?;
        Ok((dowell_factor(phi, m) - 1.0) * winding.dc_resistance * h.rms * h.rms)
    });
    let parts: Result<Vec<f64>> = parts.into_iter().collect();
    Ok(compensated_sum(parts?))
}

/// Parametric surrogate for the winding loss induced by the gap's fringing
/// field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FringingModel {
    /// Calibration constant, W/(m⁴·V²).
    pub coupling_coefficient: f64,
    /// Axial decay of the induced loss away from the gap plane. Defaults to
    /// five gap lengths, capped at half the winding length.
    #[serde(
        rename = "decay_length_m",
        default,
        skip_serializing_if = "Option::is_none"
    )]
    pub decay_length: Option<f64>,
}

/// Coupling that puts fringing at ~30 % of winding loss for the gapped
/// 650 µH boundary-mode reference design.
pub const DEFAULT_FRINGING_COUPLING: f64 = 6.8e10;

impl Default for FringingModel {
    fn default() -> Self {
        FringingModel {
            coupling_coefficient: DEFAULT_FRINGING_COUPLING,
            decay_length: None,
        }
    }
}

impl FringingModel {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.coupling_coefficient >= 0.0) {
            return Err(Error::validation(
                format!("{path}.coupling_coefficient"),
                "must be >= 0",
            ));
        }
        if let Some(d) = self.decay_length {
            if !(d > 0.0) {
                return Err(Error::validation(
                    format!("{path}.decay_length_m"),
                    "must be > 0",
                ));
            }
        }
        Ok(())
    }

    pub fn effective_decay_length(&self, core: &CoreGeometry, winding: &WindingSpec) -> f64 {
        self.decay_length
            .unwrap_or_else(|| (5.0 * core.gap_length).min(0.5 * winding.axial_length))
            .max(f64::MIN_POSITIVE)
    }
}

/// Skin-limited roll-off of transverse-field eddy loss, normalised to 1 at
/// low frequency: `6·ψ(φ)/φ⁴` with `ψ = φ·(sinh φ − sin φ)/(cosh φ + cos φ)`.
pub fn eddy_rolloff(phi: f64) -> f64 {
    if phi < 1e-2 {
        return 1.0 - phi.powi(4) * 34.0 / 840.0;
    }
    if phi > 20.0 {
        return 6.0 / phi.powi(3);
    }
    let psi = phi * (phi.sinh() - phi.sin()) / (phi.cosh() + phi.cos());
    6.0 * psi / phi.powi(4)
}

/// Centre positions of `sections` equal slices along the winding, measured
/// from the gap plane (the winding midpoint).
pub fn section_offsets(winding: &WindingSpec, sections: usize) -> Vec<f64> {
    let pitch = winding.axial_length / sections as f64;
    (0..sections)
        .map(|i| (i as f64 + 0.5) * pitch - 0.5 * winding.axial_length)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct FringingLoss {
    pub watts: f64,
    /// Per-section loss, W; sums to `watts`.
    pub axial_density: Vec<f64>,
}

/// Fringing-field loss.
///
/// Each linear current segment of duration τ changes the gap flux at
/// `dΦ/dt = (L/N)·di/dt`. Its contribution is `k·g²·d²·(dΦ/dt)²·τ`, scaled by
/// the skin-limited roll-off at the segment's equivalent frequency `1/(2τ)`,
/// with `d` the diameter of the individual conductor (strand for litz).
pub fn fringing_loss(
    profile: &HalfLineProfile,
    model: &FringingModel,
    core: &CoreGeometry,
    winding: &WindingSpec,
    sections: usize,
    temperature: f64,
) -> Result<FringingLoss> {
    fringing_loss_with(
        profile,
        model,
        core,
        winding,
        sections,
        temperature,
        Strategy::default(),
    )
}

pub fn fringing_loss_with(
    profile: &HalfLineProfile,
    model: &FringingModel,
    core: &CoreGeometry,
    winding: &WindingSpec,
    sections: usize,
    temperature: f64,
    strategy: Strategy,
) -> Result<FringingLoss> {
    if sections < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 sections, got {sections}"
        )));
    }
    let zero = FringingLoss {
        watts: 0.0,
        axial_density: vec![0.0; sections],
    };
    let span = profile.span();
    if !core.is_gapped() || span <= 0.0 {
        return Ok(zero);
    }
    let flux_per_amp = profile.inductance / f64::from(winding.turns);
    let d = winding.wire.conductor_diameter();
    let foil = round_to_foil();
    let rho = copper_resistivity(temperature);
    let parts = strategy.map(&profile.cycles, |c| {
        let mut acc = 0.0;
        for (tau, a, b) in c.segments() {
            if tau <= 0.0 || a == b {
                continue;
            }
            let dphi_dt = flux_per_amp * (b - a) / tau;
            let f_eq = 0.5 / tau;
            let delta = (rho / (PI * f_eq * MU0)).sqrt();
            acc += dphi_dt * dphi_dt * tau * eddy_rolloff(foil * d / delta);
        }
        acc
    });
    let watts =
        model.coupling_coefficient * core.gap_length.powi(2) * d * d * compensated_sum(parts)
            / span;
    if watts <= 0.0 {
        return Ok(zero);
    }
    let decay = model.effective_decay_length(core, winding);
    let weights: Vec<f64> = section_offsets(winding, sections)
        .iter()
        .map(|z| (-z.abs() / decay).exp())
        .collect();
    let norm = compensated_sum(weights.iter().copied());
    Ok(FringingLoss {
        watts,
        axial_density: weights.iter().map(|w| watts * w / norm).collect(),
    })
}

/// Per-cycle core-loss record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoreLossCycle {
    pub t_start: f64,
    pub f_sw: f64,
    /// Flux swing, T.
    pub delta_b: f64,
    /// kW/m³
    pub p_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoreLoss {
    pub watts: f64,
    pub cycles: Vec<CoreLossCycle>,
}

/// Extended Steinmetz loss density, kW/m³, for a peak AC flux density
/// `b_ac` (half the swing).
pub fn steinmetz_density(
    material: &MaterialParams,
    frequency: f64,
    b_ac: f64,
    temperature: f64,
) -> f64 {
    if b_ac <= 0.0 {
        return 0.0;
    }
    material.steinmetz_kf
        * frequency.powf(material.steinmetz_x)
        * b_ac.powf(material.steinmetz_y)
        * material.temperature_factor(temperature)
}

/// Core loss with Steinmetz applied per switching cycle at the cycle's own
/// frequency and AC flux amplitude, time-weighted over the half-line.
pub fn core_loss(
    profile: &HalfLineProfile,
    material: &MaterialParams,
    core: &CoreGeometry,
    winding: &WindingSpec,
    temperature: f64,
) -> Result<CoreLoss> {
    core_loss_with(
        profile,
        material,
        core,
        winding,
        temperature,
        Strategy::default(),
    )
}

pub fn core_loss_with(
    profile: &HalfLineProfile,
    material: &MaterialParams,
    core: &CoreGeometry,
    winding: &WindingSpec,
    temperature: f64,
    strategy: Strategy,
) -> Result<CoreLoss> {
    let tesla_per_amp = flux_per_ampere(profile.inductance, winding, core);
    let records = strategy.map(&profile.cycles, |c| {
        let peak = tesla_per_amp * c.i_peak;
        if peak > material.saturation_flux {
            return Err(Error::Saturation {
                b: peak,
                b_sat: material.saturation_flux,
            });
        }
        let delta_b = c.delta_b(tesla_per_amp);
        let f_sw = c.frequency();
        let p_v = if c.kind == CycleKind::Idle {
            0.0
        } else {
            steinmetz_density(material, f_sw, 0.5 * delta_b, temperature)
        };
        Ok(CoreLossCycle {
            t_start: c.t_start,
            f_sw,
            delta_b,
            p_v,
        })
    });
    let cycles: Vec<CoreLossCycle> = records.into_iter().collect::<Result<_>>()?;
    let span = profile.span();
    let mean_pv = if span > 0.0 {
        compensated_sum(cycles.iter().map(|r| r.p_v / r.f_sw)) / span
    } else {
        0.0
    };
    Ok(CoreLoss {
        watts: mean_pv * 1e3 * core.effective_volume,
        cycles,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LossBreakdown {
    #[serde(rename = "p_dc_W")]
    pub p_dc: f64,
    #[serde(rename = "p_ac_W")]
    pub p_ac_skin_prox: f64,
    #[serde(rename = "p_fringing_W")]
    pub p_fringing: f64,
    #[serde(rename = "p_core_W")]
    pub p_core: f64,
    #[serde(rename = "p_total_W")]
    pub p_total: f64,
    /// Winding loss per axial section, W. Core loss is not included.
    #[serde(rename = "axial_density_W")]
    pub axial_density: Vec<f64>,
}

impl LossBreakdown {
    pub fn winding_loss(&self) -> f64 {
        self.p_dc + self.p_ac_skin_prox + self.p_fringing
    }
}

/// Knobs for [`loss_breakdown_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSettings {
    pub harmonics: usize,
    /// `None` picks the smallest power of two meeting the oversampling guard.
    pub samples: Option<usize>,
    pub strategy: Strategy,
}

impl Default for LossSettings {
    fn default() -> Self {
        LossSettings {
            harmonics: DEFAULT_HARMONICS,
            samples: None,
            strategy: Strategy::default(),
        }
    }
}

/// Everything computed while assembling a breakdown.
#[derive(Debug, Clone)]
pub struct LossAnalysis {
    pub breakdown: LossBreakdown,
    pub rms_current: f64,
    pub spectrum: HarmonicSpectrum,
    pub core: CoreLoss,
}

#[allow(clippy::too_many_arguments)]
pub fn loss_breakdown(
    profile: &HalfLineProfile,
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
    fringing: &FringingModel,
    temperature: f64,
    sections: usize,
) -> Result<LossBreakdown> {
    loss_breakdown_with(
        profile,
        core,
        material,
        winding,
        fringing,
        temperature,
        sections,
        &LossSettings::default(),
    )
    .map(|a| a.breakdown)
}

#[allow(clippy::too_many_arguments)]
pub fn loss_breakdown_with(
    profile: &HalfLineProfile,
    core: &CoreGeometry,
    material: &MaterialParams,
    winding: &WindingSpec,
    fringing: &FringingModel,
    temperature: f64,
    sections: usize,
    settings: &LossSettings,
) -> Result<LossAnalysis> {
    if sections < 3 {
        return Err(Error::Domain(format!(
            "need at least 3 sections, got {sections}"
        )));
    }
    let strategy = settings.strategy;
    let rms = crate::controller::rms_current_with(profile, strategy);
    let p_dc = dc_copper_loss(winding.dc_resistance, rms);
    let samples = settings
        .samples
        .unwrap_or_else(|| default_sample_count(profile, settings.harmonics));
    let spectrum = harmonic_spectrum_with(profile, samples, settings.harmonics, strategy)?;
    let p_ac = ac_copper_loss_with(&spectrum, winding, temperature, strategy)?.max(0.0);
    let fr = fringing_loss_with(
        profile,
        fringing,
        core,
        winding,
        sections,
        temperature,
        strategy,
    )?;
    let core_l = core_loss_with(profile, material, core, winding, temperature, strategy)?;

    let uniform = (p_dc + p_ac) / sections as f64;
    let axial_density: Vec<f64> = fr.axial_density.iter().map(|q| uniform + q).collect();
    let p_total = compensated_sum([p_dc, p_ac, fr.watts, core_l.watts]);
    Ok(LossAnalysis {
        breakdown: LossBreakdown {
            p_dc,
            p_ac_skin_prox: p_ac,
            p_fringing: fr.watts,
            p_core: core_l.watts,
            p_total,
            axial_density,
        },
        rms_current: rms,
        spectrum,
        core: core_l,
    })
}

/// Coupling coefficient making fringing loss `fraction` of total winding
/// loss for the given design (fringing loss is linear in the coupling).
pub fn calibrate_fringing_coupling(
    profile: &HalfLineProfile,
    core: &CoreGeometry,
    winding: &WindingSpec,
    temperature: f64,
    fraction: f64,
) -> Result<f64> {
    if !(0.0..1.0).contains(&fraction) {
        return Err(Error::Domain("fraction must lie in [0, 1)".into()));
    }
    let unit = FringingModel {
        coupling_coefficient: 1.0,
        decay_length: None,
    };
    let per_unit = fringing_loss(profile, &unit, core, winding, 3, temperature)?.watts;
    if per_unit <= 0.0 {
        return Err(Error::Domain(
            "design has no fringing field to calibrate".into(),
        ));
    }
    let rms = crate::controller::rms_current(profile);
    let spectrum = harmonic_spectrum_with(
        profile,
        default_sample_count(profile, DEFAULT_HARMONICS),
        DEFAULT_HARMONICS,
        Strategy::default(),
    )?;
    let copper = dc_copper_loss(winding.dc_resistance, rms)
        + ac_copper_loss(&spectrum, winding, temperature)?;
    Ok(fraction / (1.0 - fraction) * copper / per_unit)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::fixtures::*;
    use crate::controller::{synthesize_half_cycle, ControllerConfig, Mode, SwitchingCycle};
    use crate::magnetics::fixtures::*;
    use crate::magnetics::GapStyle;
    use crate::spectrum::Harmonic;
    use proptest::prelude::*;

    const L: f64 = 650e-6;

    #[test]
    fn dc_loss_reference_values() {
        assert_eq!(dc_copper_loss(0.211, 2.69), 0.211 * 2.69 * 2.69);
        assert!((dc_copper_loss(0.211, 2.69) - 1.527).abs() < 5e-4);
        assert!((dc_copper_loss(0.211, 2.31) - 1.126).abs() < 5e-4);
        assert_eq!(dc_copper_loss(0.5, 0.0), 0.0);
    }

    #[test]
    fn skin_depth_values() {
        let d60 = skin_depth(60e3, 20.0).unwrap();
        assert!((d60 - 0.27e-3).abs() < 0.005e-3, "{d60}");
        let d25 = skin_depth(25e3, 20.0).unwrap();
        assert!((d25 - 0.42e-3).abs() < 0.005e-3, "{d25}");
        let d240 = skin_depth(240e3, 20.0).unwrap();
        assert!((d240 / d60 - 0.5).abs() < 1e-12);
        assert!(skin_depth(0.0, 20.0).is_err());
    }

    #[test]
    fn dowell_values() {
        assert!((dowell_factor(1.0, 1.0) - 1.0856).abs() < 1e-4);
        assert!((dowell_factor(1.0, 2.0) - 1.4060).abs() < 1e-4);
        for m in 1..=10 {
            assert_eq!(dowell_factor(0.0, m as f64), 1.0);
            assert!((dowell_factor(1e-6, m as f64) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn dowell_branches_are_continuous() {
        for m in [1.0, 2.0, 7.5, 40.0] {
            let below = dowell_factor(1e-3 * (1.0 - 1e-9), m);
            let above = dowell_factor(1e-3 * (1.0 + 1e-9), m);
            assert!((below - above).abs() < 1e-9);
            let below = dowell_factor(40.0 - 1e-9, m);
            let above = dowell_factor(40.0 + 1e-9, m);
            assert!((below / above - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn ac_loss_examples() {
        let w = solid_winding();
        assert_eq!(
            ac_copper_loss(&HarmonicSpectrum::dc_only(3.0), &w, 20.0).unwrap(),
            0.0
        );

        // frequency chosen so that φ = 1 for the 0.7 mm wire
        let delta = round_to_foil() * 0.7e-3;
        let f = RHO_CU_20 / (PI * MU0 * delta * delta);
        let s = HarmonicSpectrum {
            dc: 0.0,
            harmonics: vec![Harmonic {
                frequency: f,
                rms: 1.0,
            }],
        };
        let p = ac_copper_loss(&s, &w, 20.0).unwrap();
        assert!((p - 0.0857).abs() < 1e-4, "{p}");
    }

    #[test]
    fn litz_cuts_ac_loss() {
        let solid = solid_winding();
        let litz = WindingSpec {
            wire: Wire::Litz {
                strand_count: 300,
                strand_diameter: 0.05e-3,
            },
            ..solid.clone()
        };
        let s = HarmonicSpectrum {
            dc: 0.0,
            harmonics: vec![Harmonic {
                frequency: 60e3,
                rms: 1.0,
            }],
        };
        let (phi, _) = winding_phi_layers(&litz, 60e3, 20.0).unwrap();
        assert!((phi - 0.05 * FRAC_PI_4.powf(0.75) / 0.27).abs() < 0.005);
        let ps = ac_copper_loss(&s, &solid, 20.0).unwrap();
        let pl = ac_copper_loss(&s, &litz, 20.0).unwrap();
        assert!(ps > 5.0 * pl, "{ps} vs {pl}");
    }

    #[test]
    fn rolloff_limits() {
        assert_eq!(eddy_rolloff(0.0), 1.0);
        assert!(
            (eddy_rolloff(1e-2 * (1.0 - 1e-9)) - eddy_rolloff(1e-2 * (1.0 + 1e-9))).abs() < 1e-9
        );
        assert!((eddy_rolloff(20.0 - 1e-9) / eddy_rolloff(20.0 + 1e-9) - 1.0).abs() < 1e-6);
        let mut prev = 1.0;
        for k in 1..400 {
            let r = eddy_rolloff(k as f64 * 0.1);
            assert!(r <= prev + 1e-12 && r > 0.0);
            prev = r;
        }
    }

    fn profile(mode: Mode, eta: f64) -> HalfLineProfile {
        let cfg = match mode {
            Mode::DcmCrcmQr => ControllerConfig::new(mode),
            _ => ccm_17us(mode),
        };
        synthesize_half_cycle(&reference_point(eta), L, &cfg).unwrap()
    }

    #[test]
    fn fringing_zero_without_gap() {
        let p = profile(Mode::DcmCrcmQr, 0.93);
        let model = FringingModel::default();
        let mut distributed = e42(0.0);
        distributed.gap_style = GapStyle::Distributed;
        let r = fringing_loss(&p, &model, &distributed, &solid_winding(), 33, 60.0).unwrap();
        assert_eq!(r.watts, 0.0);
        assert!(r.axial_density.iter().all(|&x| x == 0.0));
        let r = fringing_loss(&p, &model, &e42(0.0), &solid_winding(), 33, 60.0).unwrap();
        assert_eq!(r.watts, 0.0);
        assert!(fringing_loss(&p, &model, &e42(2.1e-3), &solid_winding(), 2, 60.0).is_err());
    }

    #[test]
    fn fringing_localised_and_mode_ordered() {
        let model = FringingModel::default();
        let core = e42(2.1e-3);
        let w = solid_winding();
        let dcm =
            fringing_loss(&profile(Mode::DcmCrcmQr, 0.93), &model, &core, &w, 33, 60.0).unwrap();
        let mixed =
            fringing_loss(&profile(Mode::Mixed, 0.93), &model, &core, &w, 33, 60.0).unwrap();
        let argmax = dcm
            .axial_density
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .unwrap()
            .0;
        assert_eq!(argmax, 16);
        let s: f64 = dcm.axial_density.iter().sum();
        assert!((s / dcm.watts - 1.0).abs() < 1e-12);
        assert!(dcm.watts > mixed.watts, "{} vs {}", dcm.watts, mixed.watts);
    }

    #[test]
    fn steinmetz_unit_case() {
        let m = MaterialParams {
            steinmetz_kf: 1.0,
            steinmetz_x: 1.5,
            steinmetz_y: 2.5,
            ct: 1.0,
            ct1: 0.0,
            ct2: 0.0,
            ..ferrite_3f3()
        };
        let p = steinmetz_density(&m, 100e3, 0.1, 25.0);
        assert!((p / 1e5 - 1.0).abs() < 1e-12);
        let half = steinmetz_density(&m, 100e3, 0.05, 25.0);
        assert!((half / p - 2f64.powf(-2.5)).abs() < 1e-12);
        assert_eq!(steinmetz_density(&m, 100e3, 0.0, 25.0), 0.0);
    }

    #[test]
    fn core_loss_saturation() {
        let p = profile(Mode::DcmCrcmQr, 0.93);
        let ok = core_loss(&p, &ferrite_3f3(), &e42(2.1e-3), &solid_winding(), 60.0).unwrap();
        assert!(ok.watts > 0.0);
        assert_eq!(ok.cycles.len(), p.cycles.len());
        let low = MaterialParams {
            saturation_flux: 0.29,
            ..ferrite_3f3()
        };
        let err = core_loss(&p, &low, &e42(2.1e-3), &solid_winding(), 60.0);
        assert!(matches!(err, Err(Error::Saturation { .. })));
    }

    #[test]
    fn core_loss_translation_invariant() {
        let p = profile(Mode::Mixed, 0.93);
        let shifted = HalfLineProfile {
            cycles: p
                .cycles
                .iter()
                .map(|c| SwitchingCycle {
                    t_start: c.t_start + 0.123,
                    ..*c
                })
                .collect(),
            ..p.clone()
        };
        let a = core_loss(&p, &ferrite_3f3(), &e42(2.1e-3), &solid_winding(), 60.0).unwrap();
        let b = core_loss(
            &shifted,
            &ferrite_3f3(),
            &e42(2.1e-3),
            &solid_winding(),
            60.0,
        )
        .unwrap();
        assert!((a.watts / b.watts - 1.0).abs() < 1e-9);
    }

    #[test]
    fn zero_current_breakdown() {
        let op = OperatingPointZero::profile();
        let b = loss_breakdown(
            &op,
            &e42(2.1e-3),
            &ferrite_3f3(),
            &solid_winding(),
            &FringingModel::default(),
            60.0,
            33,
        )
        .unwrap();
        assert_eq!(b.p_total, 0.0);
        assert!(b.axial_density.iter().all(|&x| x == 0.0));
    }

    struct OperatingPointZero;
    impl OperatingPointZero {
        fn profile() -> HalfLineProfile {
            let p = profile(Mode::DcmCrcmQr, 0.93);
            HalfLineProfile {
                cycles: p
                    .cycles
                    .iter()
                    .map(|c| SwitchingCycle {
                        kind: CycleKind::Idle,
                        t_on: 0.0,
                        t_off: 0.0,
                        t_idle: c.period(),
                        i_start: 0.0,
                        i_peak: 0.0,
                        i_end: 0.0,
                        ..*c
                    })
                    .collect(),
                ..p
            }
        }
    }

    #[test]
    fn breakdown_invariants_and_dc_anchors() {
        // targets are R_dc·I² at the measured RMS currents
        for (mode, target, tol) in [
            (Mode::DcmCrcmQr, 0.211 * 2.69 * 2.69, 0.15),
            (Mode::Mixed, 0.211 * 2.31 * 2.31, 0.10),
        ] {
            let p = profile(mode, 0.93);
            let b = loss_breakdown(
                &p,
                &e42(2.1e-3),
                &ferrite_3f3(),
                &solid_winding(),
                &FringingModel::default(),
                60.0,
                33,
            )
            .unwrap();
            assert!((b.p_dc / target - 1.0).abs() < tol, "{mode:?}: {}", b.p_dc);
            let sum = b.p_dc + b.p_ac_skin_prox + b.p_fringing + b.p_core;
            assert!((b.p_total / sum - 1.0).abs() < 1e-9);
            let axial: f64 = b.axial_density.iter().sum();
            assert!((axial / b.winding_loss() - 1.0).abs() < 1e-6);
            assert!(
                b.p_dc >= 0.0 && b.p_ac_skin_prox >= 0.0 && b.p_fringing >= 0.0 && b.p_core >= 0.0
            );
        }
    }

    #[test]
    fn default_coupling_is_calibrated() {
        let p = profile(Mode::DcmCrcmQr, 0.93);
        let k = calibrate_fringing_coupling(&p, &e42(2.1e-3), &solid_winding(), 60.0, 0.3).unwrap();
        assert!(
            (k / DEFAULT_FRINGING_COUPLING - 1.0).abs() < 0.1,
            "calibrated {k:e}"
        );
    }

    #[test]
    fn strategies_agree_exactly() {
        let p = profile(Mode::DcmCrcmQr, 0.93);
        let run = |s| {
            let settings = LossSettings {
                strategy: s,
                ..LossSettings::default()
            };
            loss_breakdown_with(
                &p,
                &e42(2.1e-3),
                &ferrite_3f3(),
                &solid_winding(),
                &FringingModel::default(),
                60.0,
                33,
                &settings,
            )
            .unwrap()
            .breakdown
        };
        assert_eq!(
            run(crate::exec::Strategy::Sequential),
            run(crate::exec::Strategy::Parallel)
        );
    }

    proptest! {
        #[test]
        fn dowell_at_least_one_and_monotone(phi in 0.0f64..30.0, dphi in 0.0f64..2.0, m in 1.0f64..60.0, dm in 0.0f64..5.0) {
            let base = dowell_factor(phi, m);
            prop_assert!(base >= 1.0 - 1e-12);
            prop_assert!(dowell_factor(phi + dphi, m) >= base - 1e-9 * base);
            prop_assert!(dowell_factor(phi, m + dm) >= base - 1e-9 * base);
        }
    }
}
