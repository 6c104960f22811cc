//! Coherent noise channels deforming the gate drive.
//!
//! Seven channels: relative-intensity noise and shot-to-shot intensity,
//! pointing, and sampling fluctuations act multiplicatively on the Rabi
//! frequency; laser frequency noise, Doppler shifts, and a DC electric-field
//! offset act as a detuning of the Rydberg level. Spectral channels are
//! synthesized as sums of cosines with amplitudes `sqrt(2 S(f) df)` and
//! realization-dependent phases; shot-to-shot channels draw one scalar per
//! realization.
//!
//! The measured laboratory spectra are not bundled; flat placeholder spectra
//! with configurable RMS stand in, so totals derived from the defaults are
//! order-of-magnitude figures rather than calibrated predictions. Table
//! spectra can be supplied as `(frequency MHz, PSD per MHz)` pairs.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Result, SimError};
use crate::random::derived_rng;

/// Spectral density specification for an AC channel.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub enum SpectrumSpec {
    Off,
    /// White spectrum with total RMS `rms` between `f_min` and `f_max`
    /// (MHz), discretized into `n_lines` cosines.
    Flat { rms: f64, f_min_mhz: f64, f_max_mhz: f64, n_lines: usize },
    /// Tabulated one-sided PSD: `(frequency MHz, PSD per MHz)`; each row
    /// becomes one cosine line carrying the band around it.
    Table { lines: Vec<(f64, f64)> },
}

impl SpectrumSpec {
    fn sample(&self, times: &[f64], rng: &mut impl Rng) -> Vec<f64> {
        match self {
            SpectrumSpec::Off => vec![0.0; times.len()],
            SpectrumSpec::Flat { rms, f_min_mhz, f_max_mhz, n_lines } => {
                let n = (*n_lines).max(1);
                let df = (f_max_mhz - f_min_mhz) / n as f64;
                let psd = rms * rms / (f_max_mhz - f_min_mhz).max(1e-12);
                let amp = (2.0 * psd * df).sqrt();
                let lines: Vec<(f64, f64, f64)> = (0..n)
                    .map(|k| {
                        let f = f_min_mhz + (k as f64 + 0.5) * df;
                        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                        (f, amp, theta)
                    })
                    .collect();
                times
                    .iter()
                    .map(|&t| {
                        lines
                            .iter()
                            .map(|(f, a, th)| a * (std::f64::consts::TAU * f * t + th).cos())
                            .sum()
                    })
                    .collect()
            }
            SpectrumSpec::Table { lines } => {
                if lines.is_empty() {
                    return vec![0.0; times.len()];
                }
                // band around each row: midpoints between neighbors
                let n = lines.len();
                let sampled: Vec<(f64, f64, f64)> = (0..n)
                    .map(|k| {
                        let f = lines[k].0;
                        let lo = if k == 0 { f - (lines[1.min(n - 1)].0 - f).abs() / 2.0 } else { 0.5 * (lines[k - 1].0 + f) };
                        let hi = if k + 1 == n { f + (f - lo) } else { 0.5 * (f + lines[k + 1].0) };
                        let df = (hi - lo).max(0.0);
                        let amp = (2.0 * lines[k].1 * df).sqrt();
                        let theta: f64 = rng.gen::<f64>() * std::f64::consts::TAU;
                        (f, amp, theta)
                    })
                    .collect();
                times
                    .iter()
                    .map(|&t| {
                        sampled
                            .iter()
                            .map(|(f, a, th)| a * (std::f64::consts::TAU * f * t + th).cos())
                            .sum()
                    })
                    .collect()
            }
        }
    }
}

/// One coherent channel; used to toggle channels individually in error
/// budgets.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum NoiseChannel {
    AcIntensity,
    DcIntensity,
    BeamPointing,
    BeamSampling,
    AcPhase,
    Doppler,
    DcField,
}

impl NoiseChannel {
    pub const ALL: [NoiseChannel; 7] = [
        NoiseChannel::AcIntensity,
        NoiseChannel::DcIntensity,
        NoiseChannel::BeamPointing,
        NoiseChannel::BeamSampling,
        NoiseChannel::AcPhase,
        NoiseChannel::Doppler,
        NoiseChannel::DcField,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            NoiseChannel::AcIntensity => "ac_intensity",
            NoiseChannel::DcIntensity => "dc_intensity",
            NoiseChannel::BeamPointing => "beam_pointing",
            NoiseChannel::BeamSampling => "beam_sampling",
            NoiseChannel::AcPhase => "ac_phase",
            NoiseChannel::Doppler => "doppler",
            NoiseChannel::DcField => "dc_field",
        }
    }
}

/// Per-channel parameters. Intensity-like sigmas are fractional; detuning
/// quantities are angular (rad/us).
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct NoiseModel {
    /// Relative-intensity-noise spectrum: fractional Rabi modulation.
    pub ac_intensity: SpectrumSpec,
    /// Shot-to-shot fractional Rabi scale (Gaussian sigma).
    pub dc_intensity_sigma: f64,
    pub beam_pointing_sigma: f64,
    pub beam_sampling_sigma: f64,
    /// Frequency-noise spectrum: detuning trace (rad/us).
    pub ac_phase: SpectrumSpec,
    /// Shot-to-shot Doppler detuning (rad/us, Gaussian sigma).
    pub doppler_sigma: f64,
    /// Electric-field detuning offset: uniform in `[-half_range, half_range]`
    /// (rad/us).
    pub dc_field_half_range: f64,
    /// Noise realizations averaged by fidelity estimates.
    pub realizations: usize,
    pub seed: u64,
}

impl NoiseModel {
    /// All channels off.
    pub fn off() -> Self {
        Self {
            ac_intensity: SpectrumSpec::Off,
            dc_intensity_sigma: 0.0,
            beam_pointing_sigma: 0.0,
            beam_sampling_sigma: 0.0,
            ac_phase: SpectrumSpec::Off,
            doppler_sigma: 0.0,
            dc_field_half_range: 0.0,
            realizations: 1,
            seed: 0,
        }
    }

    /// Placeholder magnitudes standing in for the unpublished laboratory
    /// spectra.
    pub fn placeholder() -> Self {
        use std::f64::consts::TAU;
        Self {
            ac_intensity: SpectrumSpec::Flat { rms: 0.006, f_min_mhz: 0.05, f_max_mhz: 2.0, n_lines: 40 },
            dc_intensity_sigma: 0.006,
            beam_pointing_sigma: 0.004,
            beam_sampling_sigma: 0.003,
            ac_phase: SpectrumSpec::Flat { rms: TAU * 0.015, f_min_mhz: 0.05, f_max_mhz: 2.0, n_lines: 40 },
            doppler_sigma: TAU * 0.02,
            dc_field_half_range: TAU * 0.01,
            realizations: 1000,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("dc_intensity_sigma", self.dc_intensity_sigma),
            ("beam_pointing_sigma", self.beam_pointing_sigma),
            ("beam_sampling_sigma", self.beam_sampling_sigma),
            ("doppler_sigma", self.doppler_sigma),
            ("dc_field_half_range", self.dc_field_half_range),
        ] {
            if v < 0.0 {
                return Err(SimError::InvalidModel(format!("{name} must be non-negative")));
            }
        }
        if self.realizations == 0 {
            return Err(SimError::InvalidModel("need at least one noise realization".into()));
        }
        Ok(())
    }

    /// Copy with only the given channel active.
    pub fn only(&self, channel: NoiseChannel) -> Self {
        let mut out = Self::off();
        out.realizations = self.realizations;
        out.seed = self.seed;
        match channel {
            NoiseChannel::AcIntensity => out.ac_intensity = self.ac_intensity.clone(),
            NoiseChannel::DcIntensity => out.dc_intensity_sigma = self.dc_intensity_sigma,
            NoiseChannel::BeamPointing => out.beam_pointing_sigma = self.beam_pointing_sigma,
            NoiseChannel::BeamSampling => out.beam_sampling_sigma = self.beam_sampling_sigma,
            NoiseChannel::AcPhase => out.ac_phase = self.ac_phase.clone(),
            NoiseChannel::Doppler => out.doppler_sigma = self.doppler_sigma,
            NoiseChannel::DcField => out.dc_field_half_range = self.dc_field_half_range,
        }
        out
    }

    /// Sample one realization: per-slice Rabi scale and detuning traces.
    pub fn realize(&self, n_slices: usize, duration: f64, realization: u64) -> NoiseTrace {
        let mut rng = derived_rng(self.seed, realization ^ 0x4e4f_4953_4500_0000);
        let times: Vec<f64> =
            (0..n_slices).map(|k| (k as f64 + 0.5) * duration / n_slices as f64).collect();
        let ac_omega = self.ac_intensity.sample(&times, &mut rng);
        let gauss = Normal::new(0.0, 1.0).unwrap();
        let scale_shot = (1.0 + self.dc_intensity_sigma * gauss.sample(&mut rng))
            * (1.0 + self.beam_pointing_sigma * gauss.sample(&mut rng))
            * (1.0 + self.beam_sampling_sigma * gauss.sample(&mut rng));
        let ac_det = self.ac_phase.sample(&times, &mut rng);
        let doppler = self.doppler_sigma * gauss.sample(&mut rng);
        let field = self.dc_field_half_range * (2.0 * rng.gen::<f64>() - 1.0);
        let omega_scale: Vec<f64> = ac_omega.iter().map(|a| scale_shot * (1.0 + a)).collect();
        let detuning: Vec<f64> = ac_det.iter().map(|d| d + doppler + field).collect();
        NoiseTrace { omega_scale, detuning }
    }
}

/// One realization of the coherent noise, sampled on the gate slices.
#[derive(Clone, Debug)]
pub struct NoiseTrace {
    pub omega_scale: Vec<f64>,
    pub detuning: Vec<f64>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn off_model_is_identity_trace() {
        let t = NoiseModel::off().realize(16, 0.4, 0);
        assert!(t.omega_scale.iter().all(|&s| s == 1.0));
        assert!(t.detuning.iter().all(|&d| d == 0.0));
    }

    #[test]
    fn flat_spectrum_reproduces_rms() {
        let spec = SpectrumSpec::Flat { rms: 0.01, f_min_mhz: 0.1, f_max_mhz: 3.0, n_lines: 60 };
        let model = NoiseModel { ac_intensity: spec, ..NoiseModel::off() };
        let mut acc = 0.0;
        let mut count = 0usize;
        for k in 0..200 {
            let t = model.realize(64, 1.0, k);
            for s in &t.omega_scale {
                acc += (s - 1.0) * (s - 1.0);
                count += 1;
            }
        }
        let rms = (acc / count as f64).sqrt();
        assert!((rms - 0.01).abs() < 0.002, "rms {rms}");
    }

    #[test]
    fn realizations_are_deterministic_and_distinct() {
        let model = NoiseModel::placeholder();
        let a = model.realize(32, 0.4, 7);
        let b = model.realize(32, 0.4, 7);
        assert_eq!(a.omega_scale, b.omega_scale);
        let c = model.realize(32, 0.4, 8);
        assert_ne!(a.omega_scale, c.omega_scale);
    }

    #[test]
    fn only_toggles_channels() {
        let m = NoiseModel::placeholder().only(NoiseChannel::Doppler);
        let t = m.realize(8, 0.4, 1);
        assert!(t.omega_scale.iter().all(|&s| s == 1.0));
        // constant detuning offset
        assert!(t.detuning.windows(2).all(|w| w[0] == w[1]));
        assert!(t.detuning[0] != 0.0);
    }
}
