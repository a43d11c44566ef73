//! Fourier decomposition of the half-line inductor current.
//!
//! The profile repeats every mains half-cycle, so the DFT over one profile
//! span is its Fourier series. The `K` strongest bins are kept as-is; the
//! energy of all other bins is folded into a single residual line at its
//! energy-weighted mean frequency, so the spectrum always satisfies Parseval.

use rustfft::{num_complex::Complex, FftPlanner};

use crate::controller::{CycleKind, HalfLineProfile};
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::numeric::compensated_sum;

/// Default number of retained bins.
pub const DEFAULT_HARMONICS: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Harmonic {
    pub frequency: f64,
    pub rms: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct HarmonicSpectrum {
    pub dc: f64,
    /// Strictly increasing in frequency.
    pub harmonics: Vec<Harmonic>,
}

impl HarmonicSpectrum {
    pub fn dc_only(dc: f64) -> Self {
        HarmonicSpectrum {
            dc,
            harmonics: Vec::new(),
        }
    }

    /// Σ I_k² over the AC lines.
    pub fn ac_energy(&self) -> f64 {
        compensated_sum(self.harmonics.iter().map(|h| h.rms * h.rms))
    }

    pub fn rms(&self) -> f64 {
        (self.dc * self.dc + self.ac_energy()).sqrt()
    }
}

/// Sample count demanded by the oversampling guard,
/// `2·K·f_sw,max/f_line` (idle zero-crossing cycles excluded).
pub fn required_samples(profile: &HalfLineProfile, harmonics: usize) -> usize {
    let f_max = profile
        .cycles
        .iter()
        .filter(|c| c.kind != CycleKind::Idle)
        .map(|c| c.frequency())
        .fold(0.0, f64::max);
    let ratio = f_max / profile.operating_point.line_frequency;
    (2.0 * harmonics as f64 * ratio).ceil() as usize
}

/// Smallest power of two (at least 2¹⁶) meeting the oversampling guard.
pub fn default_sample_count(profile: &HalfLineProfile, harmonics: usize) -> usize {
    required_samples(profile, harmonics)
        .max(1 << 16)
        .next_power_of_two()
}

pub fn harmonic_spectrum(
    profile: &HalfLineProfile,
    n_samples: usize,
    harmonics: usize,
) -> Result<HarmonicSpectrum> {
    harmonic_spectrum_with(profile, n_samples, harmonics, Strategy::default())
}

pub fn harmonic_spectrum_with(
    profile: &HalfLineProfile,
    n_samples: usize,
    harmonics: usize,
    strategy: Strategy,
) -> Result<HarmonicSpectrum> {
    let required = required_samples(profile, harmonics).max(2);
    if n_samples < required {
        return Err(Error::Undersampled {
            n_samples,
            required,
        });
    }
    let span = profile.span();
    if span <= 0.0 {
        return Ok(HarmonicSpectrum::default());
    }
    let dt = span / n_samples as f64;
    let samples = resample(profile, n_samples, dt, strategy);
    Ok(spectrum_from_samples(&samples, span, harmonics))
}

fn resample(profile: &HalfLineProfile, n: usize, dt: f64, strategy: Strategy) -> Vec<f64> {
    const CHUNK: usize = 4096;
    let chunks = n.div_ceil(CHUNK);
    let parts = strategy.map_range(chunks, |c| {
        let lo = c * CHUNK;
        let hi = (lo + CHUNK).min(n);
        let mut out = Vec::with_capacity(hi - lo);
        let t0 = profile.start();
        let mut k = profile.cycle_index_at(t0 + lo as f64 * dt).unwrap_or(0);
        for j in lo..hi {
            let t = t0 + j as f64 * dt;
            while k + 1 < profile.cycles.len() && profile.cycles[k + 1].t_start <= t {
                k += 1;
            }
            let cyc = &profile.cycles[k];
            out.push(cyc.current_at(t - cyc.t_start));
        }
        out
    });
    parts.concat()
}

/// Spectrum of uniformly spaced samples covering exactly one period `window`.
pub fn spectrum_from_samples(samples: &[f64], window: f64, harmonics: usize) -> HarmonicSpectrum {
    let n = samples.len();
    if n == 0 {
        return HarmonicSpectrum::default();
    }
    let mut buf: Vec<Complex<f64>> = samples.iter().map(|&x| Complex::new(x, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);

    let nf = n as f64;
    let dc = buf[0].re / nf;
    let df = 1.0 / window;
    // one-sided bin energies (rms²)
    let mut bins: Vec<(usize, f64)> = (1..=n / 2)
        .map(|k| {
            let mag2 = buf[k].norm_sqr() / (nf * nf);
            let e = if 2 * k == n { mag2 } else { 2.0 * mag2 };
            (k, e)
        })
        .collect();
    let total = dc * dc + compensated_sum(bins.iter().map(|b| b.1));
    let floor = 1e-18 * total.max(f64::MIN_POSITIVE);

    bins.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    let keep = harmonics.min(bins.len());
    let (kept, rest) = bins.split_at(keep);
    let mut lines: Vec<Harmonic> = kept
        .iter()
        .filter(|b| b.1 > floor)
        .map(|&(k, e)| Harmonic {
            frequency: k as f64 * df,
            rms: e.sqrt(),
        })
        .collect();

    let residual = compensated_sum(rest.iter().map(|b| b.1));
    if residual > floor {
        let centroid = compensated_sum(rest.iter().map(|&(k, e)| k as f64 * df * e)) / residual;
        match lines.iter_mut().find(|h| h.frequency == centroid) {
            Some(h) => h.rms = (h.rms * h.rms + residual).sqrt(),
            None => lines.push(Harmonic {
                frequency: centroid,
                rms: residual.sqrt(),
            }),
        }
    }
    lines.sort_by(|a, b| a.frequency.total_cmp(&b.frequency));
    HarmonicSpectrum {
        dc,
        harmonics: lines,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::controller::fixtures::*;
    use crate::controller::{rms_current, synthesize_half_cycle, ControllerConfig, Mode};
    use std::f64::consts::PI;

    #[test]
    fn constant_signal() {
        let s = spectrum_from_samples(&vec![1.7; 1024], 0.01, 50);
        assert!((s.dc - 1.7).abs() < 1e-12);
        assert!(s.harmonics.is_empty());
    }

    #[test]
    fn pure_sinusoid() {
        let n = 4096;
        let window = 0.01;
        let f0 = 7.0 / window;
        let amp = 3.0;
        let xs: Vec<f64> = (0..n)
            .map(|k| amp * (2.0 * PI * f0 * k as f64 * window / n as f64 + 0.3).sin())
            .collect();
        let s = spectrum_from_samples(&xs, window, 50);
        assert_eq!(s.harmonics.len(), 1);
        assert!((s.harmonics[0].frequency - f0).abs() < 1e-9);
        assert!((s.harmonics[0].rms / (amp / 2f64.sqrt()) - 1.0).abs() < 0.01);
        assert!(s.dc.abs() < 1e-12);
    }

    #[test]
    fn residual_keeps_parseval() {
        let n = 2048;
        let xs: Vec<f64> = (0..n).map(|k| ((k * 7919) % 113) as f64 * 0.01).collect();
        let rms2 = xs.iter().map(|x| x * x).sum::<f64>() / n as f64;
        for k in [1, 5, 50, 2000] {
            let s = spectrum_from_samples(&xs, 1.0, k);
            assert!((s.rms().powi(2) / rms2 - 1.0).abs() < 1e-10);
            assert!(s
                .harmonics
                .windows(2)
                .all(|w| w[0].frequency < w[1].frequency));
            assert!(s.harmonics.len() <= k + 1);
        }
    }

    #[test]
    fn undersampling_is_rejected() {
        let op = reference_point(0.93);
        let p =
            synthesize_half_cycle(&op, 650e-6, &ControllerConfig::new(Mode::DcmCrcmQr)).unwrap();
        let need = required_samples(&p, 100);
        assert!(matches!(
            harmonic_spectrum(&p, need - 1, 100),
            Err(Error::Undersampled { .. })
        ));
    }

    #[test]
    fn crcm_line_content_share() {
        // Independent oracle: with ideal triangles the local average is the
        // reference i_ref(t) and the triangles add one third of its square,
        // so low-frequency (envelope) content carries 3/4 of RMS².
        let op = reference_point(1.0);
        let p = synthesize_half_cycle(&op, 650e-6, &pure_crcm()).unwrap();
        let n = default_sample_count(&p, 100);
        let s = harmonic_spectrum(&p, n, 100).unwrap();
        let total = s.rms().powi(2);
        let low: f64 = s.dc * s.dc
            + s.harmonics
                .iter()
                .filter(|h| h.frequency < 5e3)
                .map(|h| h.rms * h.rms)
                .sum::<f64>();
        let share = low / total;
        assert!((share - 0.75).abs() < 0.01, "{share}");
        let rms = rms_current(&p);
        assert!((total / (rms * rms) - 1.0).abs() < 0.01);
    }

    #[test]
    fn strategies_match_bitwise() {
        let op = reference_point(0.93);
        let p = synthesize_half_cycle(&op, 650e-6, &ccm_17us(Mode::Mixed)).unwrap();
        let n = default_sample_count(&p, 100);
        let a = harmonic_spectrum_with(&p, n, 100, Strategy::Sequential).unwrap();
        let b = harmonic_spectrum_with(&p, n, 100, Strategy::Parallel).unwrap();
        assert_eq!(a, b);
    }
}
