//! Per-switching-cycle synthesis of the PFC inductor current over one mains
//! half-cycle for boundary/quasi-resonant, fixed-frequency CCM and mixed
//! operation.
//!
//! Each cycle is quasi-static: the rectified input voltage and the current
//! reference are frozen at the cycle's start time.

use std::f64::consts::{PI, SQRT_2};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::numeric::{compensated_sum, ramp_square_integral};

/// Shortest on-time the controller will issue.
pub const MIN_ON_TIME: f64 = 200e-9;
/// Cycles whose peak current would fall below this are emitted as idle.
pub const IDLE_CURRENT: f64 = 1e-3;
const QR_MAX_ITERATIONS: usize = 20;
const QR_TOLERANCE: f64 = 1e-6;
const MAX_VALLEY: u32 = 1000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperatingPoint {
    #[serde(rename = "vin_rms_V")]
    pub vin_rms: f64,
    #[serde(rename = "line_frequency_Hz")]
    pub line_frequency: f64,
    #[serde(rename = "vout_V")]
    pub vout: f64,
    #[serde(rename = "pout_W")]
    pub pout: f64,
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

fn default_efficiency() -> f64 {
    0.93
}

impl OperatingPoint {
    pub fn validate(&self, path: &str) -> Result<()> {
        if !(self.vin_rms > 0.0) {
            return Err(Error::validation(
                format!("{path}.vin_rms_V"),
                "must be > 0",
            ));
        }
        if !(self.line_frequency > 0.0) {
            return Err(Error::validation(
                format!("{path}.line_frequency_Hz"),
                "must be > 0",
            ));
        }
        if !(self.vout > SQRT_2 * self.vin_rms) {
            return Err(Error::validation(
                format!("{path}.vout_V"),
                format!(
                    "boost constraint: vout must exceed the input crest {:.3} V",
                    SQRT_2 * self.vin_rms
                ),
            ));
        }
        if !(self.pout > 0.0) {
            return Err(Error::validation(format!("{path}.pout_W"), "must be > 0"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(Error::validation(
                format!("{path}.efficiency"),
                "must lie in (0, 1]",
            ));
        }
        Ok(())
    }

    pub fn half_period(&self) -> f64 {
        0.5 / self.line_frequency
    }

    /// RMS of the ideal sinusoidal input current, `pout/(η·vin_rms)`.
    pub fn input_current_rms(&self) -> f64 {
        self.pout / (self.efficiency * self.vin_rms)
    }

    /// Rectified instantaneous input voltage.
    pub fn v_in(&self, t: f64) -> f64 {
        SQRT_2 * self.vin_rms * (2.0 * PI * self.line_frequency * t).sin().abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    DcmCrcmQr,
    FixedFreqCcm,
    Mixed,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ValleyPolicy {
    FirstValley,
    FrequencyClamp {
        #[serde(rename = "f_max_Hz")]
        f_max: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ControllerConfig {
    pub mode: Mode,
    #[serde(rename = "f_sw_ccm_Hz", default = "default_f_sw_ccm")]
    pub f_sw_ccm: f64,
    #[serde(rename = "coss_node_capacitance_F", default = "default_coss")]
    pub coss_node_capacitance: f64,
    #[serde(default = "default_valley_policy")]
    pub valley_policy: ValleyPolicy,
    #[serde(default = "default_hysteresis")]
    pub mixed_boundary_hysteresis: f64,
}

fn default_f_sw_ccm() -> f64 {
    58.8e3
}
fn default_coss() -> f64 {
    100e-12
}
fn default_valley_policy() -> ValleyPolicy {
    ValleyPolicy::FrequencyClamp { f_max: 130e3 }
}
fn default_hysteresis() -> f64 {
    0.25
}

impl ControllerConfig {
    pub fn new(mode: Mode) -> Self {
        ControllerConfig {
            mode,
            f_sw_ccm: default_f_sw_ccm(),
            coss_node_capacitance: default_coss(),
            valley_policy: default_valley_policy(),
            mixed_boundary_hysteresis: default_hysteresis(),
        }
    }

    pub fn validate(&self, path: &str) -> Result<()> {
        if self.mode != Mode::DcmCrcmQr && !(self.f_sw_ccm > 0.0) {
            return Err(Error::validation(
                format!("{path}.f_sw_ccm_Hz"),
                "must be > 0",
            ));
        }
        if !(self.coss_node_capacitance >= 0.0) {
            return Err(Error::validation(
                format!("{path}.coss_node_capacitance_F"),
                "must be >= 0",
            ));
        }
        if let ValleyPolicy::FrequencyClamp { f_max } = self.valley_policy {
            if !(f_max > 0.0) {
                return Err(Error::validation(
                    format!("{path}.valley_policy.frequency_clamp.f_max_Hz"),
                    "must be > 0",
                ));
            }
        }
        if !(self.mixed_boundary_hysteresis >= 0.0) {
            return Err(Error::validation(
                format!("{path}.mixed_boundary_hysteresis"),
                "must be >= 0",
            ));
        }
        Ok(())
    }

    /// Drain-node ringing period `2π·√(L·C)`.
    pub fn ring_period(&self, inductance: f64) -> f64 {
        2.0 * PI * (inductance * self.coss_node_capacitance).sqrt()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CycleKind {
    /// Boundary conduction, possibly with a quasi-resonant valley wait.
    CrcmQr,
    Ccm,
    /// Fixed-frequency discontinuous cycle below the CCM boundary.
    FixedFreqDcm,
    /// No current; zero-crossing region.
    Idle,
}

/// One switch period: on ramp, off ramp, then idle (ringing) time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwitchingCycle {
    pub kind: CycleKind,
    pub t_start: f64,
    pub t_on: f64,
    pub t_off: f64,
    pub t_idle: f64,
    pub i_start: f64,
    pub i_peak: f64,
    pub i_end: f64,
    /// Rectified input voltage the cycle was synthesized at.
    pub v_in: f64,
}

impl SwitchingCycle {
    fn idle(t_start: f64, duration: f64, v_in: f64) -> Self {
        SwitchingCycle {
            kind: CycleKind::Idle,
            t_start,
            t_on: 0.0,
            t_off: 0.0,
            t_idle: duration,
            i_start: 0.0,
            i_peak: 0.0,
            i_end: 0.0,
            v_in,
        }
    }

    pub fn period(&self) -> f64 {
        self.t_on + self.t_off + self.t_idle
    }

    pub fn frequency(&self) -> f64 {
        1.0 / self.period()
    }

    /// Linear pieces `(duration, i_from, i_to)`: on, off, idle.
    pub fn segments(&self) -> [(f64, f64, f64); 3] {
        [
            (self.t_on, self.i_start, self.i_peak),
            (self.t_off, self.i_peak, self.i_end),
            (self.t_idle, 0.0, 0.0),
        ]
    }

    /// ∫ i² dt over the cycle.
    pub fn square_integral(&self) -> f64 {
        self.segments()
            .iter()
            .map(|&(d, a, b)| ramp_square_integral(a, b, d))
            .sum()
    }

    /// ∫ i dt over the cycle.
    pub fn charge(&self) -> f64 {
        0.5 * (self.i_start + self.i_peak) * self.t_on
            + 0.5 * (self.i_peak + self.i_end) * self.t_off
    }

    /// Current at `tau` seconds after the cycle start.
    pub fn current_at(&self, tau: f64) -> f64 {
        if tau < self.t_on {
            self.i_start + (self.i_peak - self.i_start) * tau / self.t_on
        } else if tau < self.t_on + self.t_off {
            self.i_peak + (self.i_end - self.i_peak) * (tau - self.t_on) / self.t_off
        } else {
            0.0
        }
    }

    /// Peak-to-peak current swing that drives the flux excursion.
    pub fn current_swing(&self) -> f64 {
        self.i_peak - self.i_start
    }

    /// Flux swing for a core with `tesla_per_ampere = L/(N·Ae)`.
    pub fn delta_b(&self, tesla_per_ampere: f64) -> f64 {
        tesla_per_ampere * self.current_swing()
    }
}

/// The cycles covering one mains half-cycle, in time order.
#[derive(Debug, Clone, PartialEq)]
pub struct HalfLineProfile {
    pub cycles: Vec<SwitchingCycle>,
    pub operating_point: OperatingPoint,
    pub inductance: f64,
}

impl HalfLineProfile {
    /// Start time of the first cycle.
    pub fn start(&self) -> f64 {
        self.cycles.first().map_or(0.0, |c| c.t_start)
    }

    /// Total duration covered by the cycles.
    pub fn span(&self) -> f64 {
        self.cycles
            .last()
            .map_or(0.0, |c| c.t_start + c.period() - self.start())
    }

    /// Index of the cycle covering time `t`.
    pub fn cycle_index_at(&self, t: f64) -> Option<usize> {
        if self.cycles.is_empty() || t < self.start() || t >= self.start() + self.span() {
            return None;
        }
        let idx = self.cycles.partition_point(|c| c.t_start <= t);
        Some(idx.saturating_sub(1))
    }

    pub fn current_at(&self, t: f64) -> f64 {
        self.cycle_index_at(t).map_or(0.0, |k| {
            self.cycles[k].current_at(t - self.cycles[k].t_start)
        })
    }

    /// The cycle at the input-voltage crest.
    pub fn crest_cycle(&self) -> Option<&SwitchingCycle> {
        self.cycle_index_at(0.5 * self.operating_point.half_period())
            .map(|k| &self.cycles[k])
    }
}

/// Line-following input current reference.
pub fn current_reference(op: &OperatingPoint, t: f64) -> f64 {
    SQRT_2 * op.input_current_rms() * (2.0 * PI * op.line_frequency * t).sin().abs()
}

/// CCM peak-to-peak ripple at time `t`.
pub fn ccm_ripple(op: &OperatingPoint, inductance: f64, cfg: &ControllerConfig, t: f64) -> f64 {
    let v = op.v_in(t);
    let duty = 1.0 - v / op.vout;
    v * duty / (inductance * cfg.f_sw_ccm)
}

fn valley_count(cfg: &ControllerConfig, active: f64, ring: f64) -> u32 {
    match cfg.valley_policy {
        ValleyPolicy::FirstValley => 1,
        ValleyPolicy::FrequencyClamp { f_max } => {
            if ring <= 0.0 {
                return 1;
            }
            let min_period = 1.0 / f_max;
            // smallest n with active + (n − ½)·ring ≥ 1/f_max
            let needed = ((min_period - active) / ring + 0.5).ceil();
            if needed <= 1.0 {
                1
            } else {
                (needed as u32).min(MAX_VALLEY)
            }
        }
    }
}

/// Boundary-conduction cycle with valley switching.
pub fn synth_cycle_crcm_qr(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
    t: f64,
) -> Result<SwitchingCycle> {
    let v = op.v_in(t);
    if v >= op.vout {
        return Err(Error::Mode {
            v_in: v,
            vout: op.vout,
        });
    }
    let i_ref = current_reference(op, t);
    let ring = cfg.ring_period(inductance);
    if v <= 0.0 || 2.0 * i_ref < IDLE_CURRENT {
        return Ok(SwitchingCycle::idle(t, MIN_ON_TIME + 0.5 * ring, v));
    }

    let mut i_peak = 2.0 * i_ref;
    let mut cycle = SwitchingCycle::idle(t, 0.0, v);
    for _ in 0..QR_MAX_ITERATIONS {
        let mut t_on = inductance * i_peak / v;
        if t_on < MIN_ON_TIME {
            t_on = MIN_ON_TIME;
            i_peak = v * t_on / inductance;
        }
        let t_off = inductance * i_peak / (op.vout - v);
        let active = t_on + t_off;
        let t_idle = if ring > 0.0 {
            (f64::from(valley_count(cfg, active, ring)) - 0.5) * ring
        } else {
            0.0
        };
        cycle = SwitchingCycle {
            kind: CycleKind::CrcmQr,
            t_start: t,
            t_on,
            t_off,
            t_idle,
            i_start: 0.0,
            i_peak,
            i_end: 0.0,
            v_in: v,
        };
        let delivered = 0.5 * i_peak * active / (active + t_idle);
        let ratio = i_ref / delivered;
        if (ratio - 1.0).abs() < QR_TOLERANCE {
            break;
        }
        // Delivered current grows roughly with i_peak², hence the root.
        i_peak *= ratio.sqrt();
    }
    Ok(cycle)
}

/// Fixed-frequency continuous-conduction cycle.
pub fn synth_cycle_ccm(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
    t: f64,
) -> Result<SwitchingCycle> {
    let v = op.v_in(t);
    if v >= op.vout {
        return Err(Error::Mode {
            v_in: v,
            vout: op.vout,
        });
    }
    let period = 1.0 / cfg.f_sw_ccm;
    let duty = 1.0 - v / op.vout;
    let ripple = v * duty / (inductance * cfg.f_sw_ccm);
    let i_ref = current_reference(op, t);
    let i_start = i_ref - 0.5 * ripple;
    if i_start < 0.0 {
        return Err(Error::Boundary { i_start });
    }
    let t_on = duty * period;
    Ok(SwitchingCycle {
        kind: CycleKind::Ccm,
        t_start: t,
        t_on,
        t_off: period - t_on,
        t_idle: 0.0,
        i_start,
        i_peak: i_ref + 0.5 * ripple,
        i_end: i_start,
        v_in: v,
    })
}

/// Fixed-frequency discontinuous cycle used by the CCM controller when the
/// reference falls below half the ripple.
pub fn synth_cycle_fixed_dcm(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
    t: f64,
) -> Result<SwitchingCycle> {
    let v = op.v_in(t);
    if v >= op.vout {
        return Err(Error::Mode {
            v_in: v,
            vout: op.vout,
        });
    }
    let period = 1.0 / cfg.f_sw_ccm;
    let i_ref = current_reference(op, t);
    if v <= 0.0 || i_ref <= 0.0 {
        return Ok(SwitchingCycle::idle(t, period, v));
    }
    // mean current = v·t_on²·vout / (2·L·(vout − v)·T)
    let t_on = (2.0 * inductance * (op.vout - v) * period * i_ref / (v * op.vout)).sqrt();
    let i_peak = v * t_on / inductance;
    if i_peak < IDLE_CURRENT {
        return Ok(SwitchingCycle::idle(t, period, v));
    }
    let t_off = inductance * i_peak / (op.vout - v);
    Ok(SwitchingCycle {
        kind: CycleKind::FixedFreqDcm,
        t_start: t,
        t_on,
        t_off,
        t_idle: (period - t_on - t_off).max(0.0),
        i_start: 0.0,
        i_peak,
        i_end: 0.0,
        v_in: v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BoundaryDecision {
    UseCcm,
    UseDcmQr,
}

/// CCM is used only while the valley current stays strictly positive with
/// the configured hysteresis margin.
pub fn mixed_boundary(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
    t: f64,
) -> BoundaryDecision {
    let i_ref = current_reference(op, t);
    let half_ripple = 0.5 * ccm_ripple(op, inductance, cfg, t);
    if i_ref > (1.0 + cfg.mixed_boundary_hysteresis) * half_ripple {
        BoundaryDecision::UseCcm
    } else {
        BoundaryDecision::UseDcmQr
    }
}

fn synth_dispatch(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
    t: f64,
) -> Result<SwitchingCycle> {
    match cfg.mode {
        Mode::DcmCrcmQr => synth_cycle_crcm_qr(op, inductance, cfg, t),
        Mode::FixedFreqCcm => {
            let plain = ControllerConfig {
                mixed_boundary_hysteresis: 0.0,
                ..cfg.clone()
            };
            match mixed_boundary(op, inductance, &plain, t) {
                BoundaryDecision::UseCcm => synth_cycle_ccm(op, inductance, cfg, t),
                BoundaryDecision::UseDcmQr => synth_cycle_fixed_dcm(op, inductance, cfg, t),
            }
        }
        Mode::Mixed => match mixed_boundary(op, inductance, cfg, t) {
            BoundaryDecision::UseCcm => synth_cycle_ccm(op, inductance, cfg, t),
            BoundaryDecision::UseDcmQr => synth_cycle_crcm_qr(op, inductance, cfg, t),
        },
    }
}

/// Tiles one half-line period with consecutive switching cycles.
pub fn synthesize_half_cycle(
    op: &OperatingPoint,
    inductance: f64,
    cfg: &ControllerConfig,
) -> Result<HalfLineProfile> {
    op.validate("operating_point")?;
    cfg.validate("controller")?;
    if !(inductance > 0.0) {
        return Err(Error::Domain("inductance must be > 0".into()));
    }
    let half = op.half_period();
    let mut cycles = Vec::new();
    let mut t = 0.0;
    while t < half {
        let cycle = synth_dispatch(op, inductance, cfg, t)?;
        let period = cycle.period();
        if !(period > 0.0 && period.is_finite()) {
            return Err(Error::Domain(format!("degenerate cycle at t = {t:e} s")));
        }
        t = cycle.t_start + period;
        cycles.push(cycle);
    }
    Ok(HalfLineProfile {
        cycles,
        operating_point: op.clone(),
        inductance,
    })
}

/// RMS inductor current over the profile, integrated piecewise exactly.
pub fn rms_current(profile: &HalfLineProfile) -> f64 {
    rms_current_with(profile, Strategy::default())
}

pub fn rms_current_with(profile: &HalfLineProfile, strategy: Strategy) -> f64 {
    let span = profile.span();
    if span <= 0.0 {
        return 0.0;
    }
    let parts = strategy.map(&profile.cycles, SwitchingCycle::square_integral);
    (compensated_sum(parts) / span).sqrt()
}

/// `(t_start, switching frequency)` per cycle.
pub fn switching_frequency_profile(profile: &HalfLineProfile) -> Vec<(f64, f64)> {
    profile
        .cycles
        .iter()
        .map(|c| (c.t_start, c.frequency()))
        .collect()
}

/// Mean switching frequency weighted by each cycle's share of ∫i²dt.
pub fn rms_weighted_frequency(profile: &HalfLineProfile) -> f64 {
    let weights: Vec<f64> = profile.cycles.iter().map(|c| c.square_integral()).collect();
    let total = compensated_sum(weights.iter().copied());
    if total <= 0.0 {
        return 0.0;
    }
    compensated_sum(
        profile
            .cycles
            .iter()
            .zip(&weights)
            .map(|(c, w)| c.frequency() * w),
    ) / total
}

/// Mean of `v_in·i` over the profile (each cycle at its frozen `v_in`).
pub fn mean_input_power(profile: &HalfLineProfile) -> f64 {
    let span = profile.span();
    if span <= 0.0 {
        return 0.0;
    }
    compensated_sum(profile.cycles.iter().map(|c| c.v_in * c.charge())) / span
}

/// One row of the oscilloscope-style waveform export.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveformPoint {
    pub t: f64,
    pub current: f64,
    pub drain_voltage: f64,
}

/// Samples the inductor current and reconstructed drain voltage.
///
/// Ramps get `points_per_segment` samples (plus their end point); idle
/// ringing after demagnetization follows `v_in + (vout − v_in)·cos(ω·τ)`.
pub fn waveform(
    profile: &HalfLineProfile,
    cfg: &ControllerConfig,
    points_per_segment: usize,
) -> Vec<WaveformPoint> {
    let n = points_per_segment.max(1);
    let vout = profile.operating_point.vout;
    let ring = cfg.ring_period(profile.inductance);
    let omega = if ring > 0.0 { 2.0 * PI / ring } else { 0.0 };
    let mut out = Vec::with_capacity(profile.cycles.len() * (3 * n + 1) + 1);
    for c in &profile.cycles {
        let idle_voltage = |tau: f64| {
            if c.kind == CycleKind::Idle || omega == 0.0 {
                c.v_in
            } else {
                c.v_in + (vout - c.v_in) * (omega * tau).cos()
            }
        };
        if c.t_on > 0.0 {
            for k in 0..n {
                let tau = c.t_on * k as f64 / n as f64;
                out.push(WaveformPoint {
                    t: c.t_start + tau,
                    current: c.current_at(tau),
                    drain_voltage: 0.0,
                });
            }
        }
        if c.t_off > 0.0 {
            for k in 0..n {
                let tau = c.t_off * k as f64 / n as f64;
                out.push(WaveformPoint {
                    t: c.t_start + c.t_on + tau,
                    current: c.current_at(c.t_on + tau),
                    drain_voltage: vout,
                });
            }
        }
        if c.t_idle > 0.0 {
            if c.t_off > 0.0 {
                // demagnetization corner
                out.push(WaveformPoint {
                    t: c.t_start + c.t_on + c.t_off,
                    current: c.i_end,
                    drain_voltage: vout,
                });
            }
            for k in 1..n {
                let tau = c.t_idle * k as f64 / n as f64;
                out.push(WaveformPoint {
                    t: c.t_start + c.t_on + c.t_off + tau,
                    current: 0.0,
                    drain_voltage: idle_voltage(tau),
                });
            }
            if c.t_off <= 0.0 && c.t_on <= 0.0 {
                out.push(WaveformPoint {
                    t: c.t_start,
                    current: 0.0,
                    drain_voltage: c.v_in,
                });
            }
        }
    }
    if let Some(last) = profile.cycles.last() {
        out.push(WaveformPoint {
            t: last.t_start + last.period(),
            current: last.i_end,
            drain_voltage: if last.t_idle > 0.0 {
                last.v_in + (vout - last.v_in) * (omega * last.t_idle).cos()
            } else {
                0.0
            },
        });
    }
    out.sort_by(|a, b| a.t.total_cmp(&b.t));
    out
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;
    use proptest::prelude::*;

    const L: f64 = 650e-6;

    fn crest(op: &OperatingPoint) -> f64 {
        0.5 * op.half_period()
    }

    #[test]
    fn reference_values() {
        let op = reference_point(1.0);
        assert!((current_reference(&op, crest(&op)) - 2.0 * SQRT_2).abs() < 1e-12);
        assert_eq!(current_reference(&op, 0.0), 0.0);
        let half = OperatingPoint {
            pout: 150.0,
            ..op.clone()
        };
        for t in [1e-4, 2.3e-3, 7.7e-3] {
            let r = current_reference(&half, t) / current_reference(&op, t);
            assert!((r - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn crcm_crest_cycle() {
        let op = reference_point(1.0);
        let c = synth_cycle_crcm_qr(&op, L, &pure_crcm(), crest(&op)).unwrap();
        // closed form: t_on = L·2√2·I/(√2·V), t_off = L·i_pk/(vout − √2·V)
        let i_pk = 4.0 * SQRT_2;
        let v = 150.0 * SQRT_2;
        assert!((c.i_peak - i_pk).abs() < 1e-9);
        assert!((c.t_on - L * i_pk / v).abs() < 1e-15);
        assert!((c.t_off - L * i_pk / (400.0 - v)).abs() < 1e-15);
        assert!((c.t_on - 17.3e-6).abs() < 0.1e-6);
        assert!((c.t_off - 19.6e-6).abs() < 0.1e-6);
        assert!((c.period() - 36.9e-6).abs() < 0.1e-6);
        assert!((c.period() / 37.7e-6 - 1.0).abs() < 0.10);
        assert_eq!(c.t_idle, 0.0);
    }

    #[test]
    fn ring_period_and_first_valley() {
        let cfg = ControllerConfig {
            valley_policy: ValleyPolicy::FirstValley,
            ..ControllerConfig::new(Mode::DcmCrcmQr)
        };
        let ring = cfg.ring_period(L);
        assert!((ring - 1.60e-6).abs() < 0.01e-6, "{ring}");
        let op = reference_point(1.0);
        let c = synth_cycle_crcm_qr(&op, L, &cfg, crest(&op)).unwrap();
        assert!((c.t_idle - 0.5 * ring).abs() < 1e-15);
        assert!((c.t_idle - 0.80e-6).abs() < 0.01e-6);
        // power maintained despite the idle wait
        let delivered = c.charge() / c.period();
        assert!((delivered / current_reference(&op, crest(&op)) - 1.0).abs() < 1e-5);
    }

    #[test]
    fn zero_crossing_is_idle() {
        let op = reference_point(1.0);
        let c = synth_cycle_crcm_qr(&op, L, &pure_crcm(), 0.0).unwrap();
        assert_eq!(c.kind, CycleKind::Idle);
        assert_eq!(c.i_peak, 0.0);
        assert!(c.period() >= MIN_ON_TIME);
    }

    #[test]
    fn ccm_crest_cycle() {
        let op = reference_point(1.0);
        let cfg = ccm_17us(Mode::FixedFreqCcm);
        let c = synth_cycle_ccm(&op, L, &cfg, crest(&op)).unwrap();
        let duty = c.t_on / c.period();
        assert!((duty - 0.470).abs() < 1e-3);
        assert!((c.current_swing() - 2.61).abs() < 0.01);
        assert!((c.i_start - 1.53).abs() < 0.01);
        assert!((c.i_peak - 4.13).abs() < 0.01);
        assert_eq!(c.period(), 1.0 / cfg.f_sw_ccm);
    }

    #[test]
    fn ccm_limits() {
        let op = reference_point(1.0);
        let cfg = ccm_17us(Mode::FixedFreqCcm);
        let huge = synth_cycle_ccm(&op, 1e6, &cfg, crest(&op)).unwrap();
        assert!(huge.current_swing() < 1e-8);
        // v_in = vout/2 ⇒ D = 0.5
        let op2 = OperatingPoint {
            vout: 300.0 * SQRT_2,
            ..op.clone()
        };
        let c = synth_cycle_ccm(&op2, L, &cfg, crest(&op2)).unwrap();
        assert!((c.t_on / c.period() - 0.5).abs() < 1e-12);
        let err = synth_cycle_ccm(&op, 50e-6, &cfg, 1e-4);
        assert!(matches!(err, Err(Error::Boundary { .. })));
    }

    #[test]
    fn boundary_decisions() {
        let op = reference_point(1.0);
        let cfg = ccm_17us(Mode::Mixed);
        assert_eq!(
            mixed_boundary(&op, L, &cfg, crest(&op)),
            BoundaryDecision::UseCcm
        );
        assert_eq!(
            mixed_boundary(&op, L, &cfg, 0.0),
            BoundaryDecision::UseDcmQr
        );
        // Pick an inductance that puts i_ref exactly on ΔI/2 at the crest.
        let t = crest(&op);
        let v = op.v_in(t);
        let i_ref = current_reference(&op, t);
        let l_tie = v * (1.0 - v / op.vout) / (2.0 * i_ref * cfg.f_sw_ccm);
        let tie = ControllerConfig {
            mixed_boundary_hysteresis: 0.0,
            ..cfg
        };
        let half = 0.5 * ccm_ripple(&op, l_tie, &tie, t);
        if i_ref == half {
            assert_eq!(
                mixed_boundary(&op, l_tie, &tie, t),
                BoundaryDecision::UseDcmQr
            );
        }
        assert!((i_ref - half).abs() < 1e-12);
    }

    #[test]
    fn crcm_profile_frequency_shape() {
        let op = reference_point(0.93);
        let cfg = ControllerConfig::new(Mode::DcmCrcmQr);
        let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
        let freqs = switching_frequency_profile(&p);
        let crest_f = p.crest_cycle().unwrap().frequency();
        let f_min = freqs.iter().map(|f| f.1).fold(f64::INFINITY, f64::min);
        assert!((f_min - crest_f).abs() / crest_f < 0.01);
        let early = freqs.iter().find(|(t, _)| *t > 0.5e-3).unwrap().1;
        assert!(early > 1.3 * crest_f);
        assert!(freqs.iter().all(|(_, f)| *f > 0.0));
    }

    #[test]
    fn fixed_frequency_profile() {
        let op = reference_point(0.93);
        let cfg = ccm_17us(Mode::FixedFreqCcm);
        let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
        let f = 1.0 / (1.0 / cfg.f_sw_ccm);
        assert!(switching_frequency_profile(&p)
            .iter()
            .all(|(_, x)| (x - f).abs() < 1e-9 * f));
    }

    #[test]
    fn mixed_profile_has_central_ccm_band() {
        let op = reference_point(0.93);
        let cfg = ccm_17us(Mode::Mixed);
        let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
        let ccm: Vec<usize> = p
            .cycles
            .iter()
            .enumerate()
            .filter(|(_, c)| c.kind == CycleKind::Ccm)
            .map(|(k, _)| k)
            .collect();
        assert!(!ccm.is_empty());
        let (first, last) = (ccm[0], *ccm.last().unwrap());
        assert_eq!(last - first + 1, ccm.len(), "CCM band must be contiguous");
        assert!(first > 0 && last < p.cycles.len() - 1);
        assert_ne!(p.cycles[0].kind, CycleKind::Ccm);
        assert_ne!(p.cycles.last().unwrap().kind, CycleKind::Ccm);
        let crest_k = p.cycle_index_at(crest(&op)).unwrap();
        assert!(first < crest_k && crest_k < last);
    }

    #[test]
    fn rms_of_pure_crcm_matches_closed_form() {
        for eta in [0.87, 0.93, 1.0] {
            let op = reference_point(eta);
            let p = synthesize_half_cycle(&op, L, &pure_crcm()).unwrap();
            let expected = 2.0 / 3f64.sqrt() * op.input_current_rms();
            let got = rms_current(&p);
            assert!((got / expected - 1.0).abs() < 0.005, "{got} vs {expected}");
        }
        let op = reference_point(1.0);
        let p = synthesize_half_cycle(&op, L, &pure_crcm()).unwrap();
        assert!((rms_current(&p) - 2.31).abs() < 0.01);
    }

    #[test]
    fn single_triangle_rms() {
        let c = SwitchingCycle {
            kind: CycleKind::CrcmQr,
            t_start: 0.0,
            t_on: 3e-6,
            t_off: 7e-6,
            t_idle: 0.0,
            i_start: 0.0,
            i_peak: 2.5,
            i_end: 0.0,
            v_in: 100.0,
        };
        let p = HalfLineProfile {
            cycles: vec![c],
            operating_point: reference_point(1.0),
            inductance: L,
        };
        assert!((rms_current(&p) - 2.5 / 3f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn idle_time_raises_rms() {
        let op = reference_point(0.93);
        let plain = synthesize_half_cycle(&op, L, &pure_crcm()).unwrap();
        let qr_cfg = ControllerConfig {
            valley_policy: ValleyPolicy::FirstValley,
            ..ControllerConfig::new(Mode::DcmCrcmQr)
        };
        let qr = synthesize_half_cycle(&op, L, &qr_cfg).unwrap();
        assert!(rms_current(&qr) > rms_current(&plain));
        let p_plain = mean_input_power(&plain);
        let p_qr = mean_input_power(&qr);
        assert!((p_qr / p_plain - 1.0).abs() < 0.01);
    }

    #[test]
    fn clamp_skips_valleys_at_light_load() {
        let op = OperatingPoint {
            pout: 20.0,
            ..reference_point(1.0)
        };
        let cfg = ControllerConfig {
            valley_policy: ValleyPolicy::FrequencyClamp { f_max: 130e3 },
            ..ControllerConfig::new(Mode::DcmCrcmQr)
        };
        let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
        let ring = cfg.ring_period(L);
        for c in p.cycles.iter().filter(|c| c.kind == CycleKind::CrcmQr) {
            assert!(c.frequency() <= 130e3 * (1.0 + 1e-9));
        }
        assert!(p.cycles.iter().any(|c| c.t_idle > 1.0 * ring));
    }

    #[test]
    fn waveform_voltages() {
        let op = reference_point(0.93);
        let cfg = ControllerConfig {
            valley_policy: ValleyPolicy::FirstValley,
            ..ControllerConfig::new(Mode::DcmCrcmQr)
        };
        let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
        let w = waveform(&p, &cfg, 8);
        assert!(w.windows(2).all(|x| x[0].t <= x[1].t));
        assert!(w
            .iter()
            .all(|x| x.drain_voltage >= -op.vout && x.drain_voltage <= op.vout + 1e-9));
        assert!(w.iter().all(|x| x.current >= 0.0));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn profile_invariants(
            eta in 0.85f64..1.0,
            pout in 50.0f64..400.0,
            mode_ix in 0usize..3,
            coss in 0.0f64..300e-12,
        ) {
            let op = OperatingPoint { pout, ..reference_point(eta) };
            let mode = [Mode::DcmCrcmQr, Mode::FixedFreqCcm, Mode::Mixed][mode_ix];
            let cfg = ControllerConfig { coss_node_capacitance: coss, ..ccm_17us(mode) };
            let p = synthesize_half_cycle(&op, L, &cfg).unwrap();
            let half = op.half_period();
            prop_assert!(p.cycles[0].t_start == 0.0);
            for w in p.cycles.windows(2) {
                prop_assert_eq!(w[1].t_start, w[0].t_start + w[0].period());
            }
            let last = p.cycles.last().unwrap();
            prop_assert!(p.span() >= half && p.span() - half <= last.period());
            for c in &p.cycles {
                prop_assert!(c.t_on >= 0.0 && c.t_off >= 0.0 && c.t_idle >= 0.0);
                prop_assert!(c.i_peak >= c.i_start.max(c.i_end) && c.i_start.min(c.i_end) >= 0.0);
                if c.kind != CycleKind::Ccm {
                    prop_assert!(c.i_start == 0.0 && c.i_end == 0.0);
                }
                if c.t_on > 0.0 {
                    // slopes: v_in/L on, −(vout − v_in)/L off
                    let up = (c.i_peak - c.i_start) / c.t_on;
                    prop_assert!((up - c.v_in / L).abs() <= 1e-9 * up.abs());
                    let down = (c.i_end - c.i_peak) / c.t_off;
                    let expect = -(op.vout - c.v_in) / L;
                    prop_assert!((down - expect).abs() <= 1e-9 * expect.abs());
                }
                if c.kind == CycleKind::Ccm {
                    let on = c.v_in * c.t_on;
                    let off = (op.vout - c.v_in) * c.t_off;
                    prop_assert!((on - off).abs() <= 1e-6 * on);
                }
            }
            let pin = op.pout / op.efficiency;
            let mean = mean_input_power(&p);
            prop_assert!((mean / pin - 1.0).abs() < 0.02, "power {} vs {}", mean, pin);
        }
    }
}
