//! TOML run configuration shared by the subcommands.
//!
//! Frequencies in the file are ordinary MHz unless a key says otherwise;
//! they are converted to angular units (rad/us) on load, mirroring the
//! `2 pi x f` convention used when quoting them. Every run writes the
//! resolved configuration next to its outputs so a run can be repeated
//! without the original file.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use rydsim_core::decay::{Branches, DecayModel};
use rydsim_core::gate::{NoiseModel, SpectrumSpec};
use rydsim_core::geometry::Geometry;
use rydsim_core::interaction::{Anisotropy, InteractionModel};
use rydsim_core::mpp::{MppPulseShape, TrapPair};

/// Configuration error carrying the offending key path.
#[derive(Debug)]
pub struct ConfigError {
    pub key: String,
    pub message: String,
}

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error at `{}`: {}", self.key, self.message)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(key: &str, message: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError { key: key.into(), message: message.into() })
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub geometry: GeometrySection,
    #[serde(default)]
    pub interaction: InteractionSection,
    #[serde(default)]
    pub drive: DriveSection,
    #[serde(default)]
    pub grape: GrapeSection,
    #[serde(default)]
    pub evolve: EvolveSection,
    #[serde(default)]
    pub decay_model: DecayModelSection,
    #[serde(default)]
    pub decay: DecaySection,
    #[serde(default)]
    pub gate: GateSection,
    #[serde(default)]
    pub mpp: MppSection,
    #[serde(default)]
    pub analyze: AnalyzeSection,
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError { key: "--config".into(), message: format!("{}: {e}", path.display()) })?;
        toml::from_str(&text).map_err(|e| ConfigError { key: "<toml>".into(), message: e.to_string() })
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometrySection {
    /// Ladder rungs; ignored when `file` is set.
    pub rungs: usize,
    pub spacing_x_um: f64,
    pub spacing_y_um: f64,
    /// Optional geometry file (overrides the ladder parameters).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub file: Option<PathBuf>,
}

impl Default for GeometrySection {
    fn default() -> Self {
        use rydsim_core::interaction::defaults;
        Self { rungs: 4, spacing_x_um: defaults::SPACING_UM, spacing_y_um: defaults::SPACING_UM, file: None }
    }
}

impl GeometrySection {
    pub fn build(&self) -> Result<Geometry, ConfigError> {
        if let Some(file) = &self.file {
            let text = std::fs::read_to_string(file).map_err(|e| ConfigError {
                key: "geometry.file".into(),
                message: format!("{}: {e}", file.display()),
            })?;
            return Geometry::from_text(&text)
                .map_err(|e| ConfigError { key: "geometry.file".into(), message: e.to_string() });
        }
        Geometry::ladder(self.rungs, self.spacing_x_um, self.spacing_y_um)
            .map_err(|e| ConfigError { key: "geometry".into(), message: e.to_string() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InteractionSection {
    /// Van der Waals coefficient in MHz um^6 (converted with 2 pi).
    pub c6_mhz_um6: f64,
    /// Set when `c6_mhz_um6` is already angular (rad/us um^6).
    #[serde(default)]
    pub angular_convention: bool,
    /// Optional `(theta_rad, scale)` anisotropy table.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub anisotropy_table: Option<Vec<(f64, f64)>>,
    #[serde(default)]
    pub b_axis_angle_rad: f64,
    #[serde(default)]
    pub hard_blockade: bool,
}

impl Default for InteractionSection {
    fn default() -> Self {
        use rydsim_core::interaction::defaults;
        Self {
            c6_mhz_um6: defaults::c6() / TAU,
            angular_convention: false,
            anisotropy_table: None,
            b_axis_angle_rad: 0.0,
            hard_blockade: false,
        }
    }
}

impl InteractionSection {
    pub fn build(&self) -> Result<InteractionModel, ConfigError> {
        if self.c6_mhz_um6 < 0.0 {
            return err("interaction.c6_mhz_um6", "must be non-negative");
        }
        let c6 = if self.angular_convention { self.c6_mhz_um6 } else { TAU * self.c6_mhz_um6 };
        let anisotropy = match &self.anisotropy_table {
            None => Anisotropy::Isotropic,
            Some(table) => {
                if table.iter().any(|&(_, s)| s <= 0.0) {
                    return err("interaction.anisotropy_table", "scales must be positive");
                }
                Anisotropy::Table(table.clone())
            }
        };
        Ok(InteractionModel {
            c6,
            anisotropy,
            b_axis_angle: self.b_axis_angle_rad,
            hard_blockade: self.hard_blockade,
        })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriveSection {
    /// Plateau Rabi frequency (MHz).
    pub omega_mhz: f64,
    pub taper_fraction: f64,
}

impl Default for DriveSection {
    fn default() -> Self {
        Self { omega_mhz: 3.0, taper_fraction: 0.2 }
    }
}

impl DriveSection {
    pub fn omega(&self) -> f64 {
        TAU * self.omega_mhz
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GrapeSection {
    pub n_samples: usize,
    pub disorder_sigma_nm: f64,
    pub smoothness_weight: f64,
    pub continuation_dt_us: f64,
    pub max_iterations: usize,
    pub grid_points: usize,
    pub initial_time_us: f64,
    pub final_time_us: f64,
    /// Initial linear ramp endpoints (MHz).
    pub delta_start_mhz: f64,
    pub delta_end_mhz: f64,
    /// `full` or `constrained` basis for the optimization.
    pub basis: String,
}

impl Default for GrapeSection {
    fn default() -> Self {
        Self {
            n_samples: 30,
            disorder_sigma_nm: 60.0,
            smoothness_weight: 1e-3,
            continuation_dt_us: 0.1,
            max_iterations: 120,
            grid_points: 150,
            initial_time_us: 0.6,
            final_time_us: 1.2,
            delta_start_mhz: -8.0,
            delta_end_mhz: 6.0,
            basis: "full".into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EvolveSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pulse_file: Option<PathBuf>,
    pub disorder_sigma_nm: f64,
    pub n_disorder_samples: usize,
    pub n_shots: usize,
    pub phi_points: usize,
    /// Skip the evolution and analyze the ideal GHZ state.
    #[serde(default)]
    pub inject_perfect_ghz: bool,
    /// Apply Rydberg decay (no-jump + acceptance bookkeeping).
    #[serde(default)]
    pub with_decay: bool,
    /// Also dump the final state of the first disorder sample.
    #[serde(default)]
    pub dump_state: bool,
}

impl Default for EvolveSection {
    fn default() -> Self {
        Self {
            pulse_file: None,
            disorder_sigma_nm: 74.0,
            n_disorder_samples: 50,
            n_shots: 2000,
            phi_points: 11,
            inject_perfect_ghz: false,
            with_decay: false,
            dump_state: false,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayModelSection {
    pub gamma_per_us: f64,
    pub branch_detected: f64,
    pub branch_m0: f64,
    pub branch_m1: f64,
    pub branch_g: f64,
    pub branch_other: f64,
}

impl Default for DecayModelSection {
    fn default() -> Self {
        Self {
            gamma_per_us: 1.0 / 80.0,
            branch_detected: 0.931,
            branch_m0: 0.0195,
            branch_m1: 0.0195,
            branch_g: 0.030,
            branch_other: 0.0,
        }
    }
}

impl DecayModelSection {
    pub fn build(&self) -> Result<DecayModel, ConfigError> {
        DecayModel::new(
            self.gamma_per_us,
            Branches {
                detected: self.branch_detected,
                to_m0: self.branch_m0,
                to_m1: self.branch_m1,
                to_g: self.branch_g,
                other: self.branch_other,
            },
        )
        .map_err(|e| ConfigError { key: "decay_model".into(), message: e.to_string() })
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySection {
    pub p0_grid: Vec<f64>,
    /// Detection fidelity; defaults to the value implied by the branch table
    /// in r-qubit mode when unset.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p_det: Option<f64>,
    pub t_max_us: f64,
    pub t_points: usize,
}

impl Default for DecaySection {
    fn default() -> Self {
        Self { p0_grid: vec![0.25, 0.5, 0.75, 1.0], p_det: None, t_max_us: 12.0, t_points: 13 }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GateSection {
    /// Gate drive Rabi frequency (MHz).
    pub omega_mhz: f64,
    /// Blockade-to-drive ratio.
    pub v_over_omega: f64,
    pub depths: Vec<usize>,
    pub instances: usize,
    pub shots: usize,
    #[serde(default)]
    pub echo: bool,
    pub n_states: usize,
    pub fidelity_slices: usize,
    pub grb_slices: usize,
    #[serde(default = "default_true")]
    pub with_decay: bool,
    /// `off` or `placeholder`.
    pub noise: String,
    /// Noise realizations for the fidelity report.
    pub noise_realizations: usize,
    /// Optional spectra as CSV paths: rows `frequency_mhz,psd`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac_intensity_spectrum_csv: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ac_phase_spectrum_csv: Option<PathBuf>,
}

fn default_true() -> bool {
    true
}

impl Default for GateSection {
    fn default() -> Self {
        Self {
            omega_mhz: 3.0,
            v_over_omega: 200.0,
            depths: vec![2, 6, 10, 14],
            instances: 40,
            shots: 300,
            echo: false,
            n_states: 100,
            fidelity_slices: 800,
            grb_slices: 600,
            with_decay: true,
            noise: "placeholder".into(),
            noise_realizations: 200,
            ac_intensity_spectrum_csv: None,
            ac_phase_spectrum_csv: None,
        }
    }
}

fn load_spectrum_csv(path: &Path, key: &str) -> Result<SpectrumSpec, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError { key: key.into(), message: format!("{}: {e}", path.display()) })?;
    let mut lines = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("freq") {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        if cols.len() != 2 {
            return err(key, format!("line {}: expected 2 columns", ln + 1));
        }
        let f: f64 = cols[0].parse().map_err(|e| ConfigError {
            key: key.into(),
            message: format!("line {}: {e}", ln + 1),
        })?;
        let p: f64 = cols[1].parse().map_err(|e| ConfigError {
            key: key.into(),
            message: format!("line {}: {e}", ln + 1),
        })?;
        lines.push((f, p));
    }
    if lines.is_empty() {
        return err(key, "spectrum file has no data rows");
    }
    Ok(SpectrumSpec::Table { lines })
}

impl GateSection {
    pub fn build_noise(&self, seed: u64) -> Result<NoiseModel, ConfigError> {
        let mut model = match self.noise.as_str() {
            "off" => NoiseModel::off(),
            "placeholder" => NoiseModel::placeholder(),
            other => return err("gate.noise", format!("unknown noise mode {other:?}")),
        };
        if let Some(path) = &self.ac_intensity_spectrum_csv {
            model.ac_intensity = load_spectrum_csv(path, "gate.ac_intensity_spectrum_csv")?;
        }
        if let Some(path) = &self.ac_phase_spectrum_csv {
            model.ac_phase = load_spectrum_csv(path, "gate.ac_phase_spectrum_csv")?;
        }
        model.realizations = self.noise_realizations;
        model.seed = seed;
        Ok(model)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MppSection {
    pub omega_g_khz: f64,
    pub omega_drive_khz: f64,
    pub wavevector_per_um: f64,
    pub n_levels: usize,
    pub ratio_grid: Vec<f64>,
    /// Detuning grid (kHz).
    pub delta_grid_khz: Vec<f64>,
    /// `square` or `blackman`.
    pub shape: String,
}

impl Default for MppSection {
    fn default() -> Self {
        Self {
            omega_g_khz: 50.0,
            omega_drive_khz: 2.0,
            wavevector_per_um: TAU / 0.578,
            n_levels: 15,
            ratio_grid: vec![0.85, 0.925, 1.0, 1.075, 1.15],
            delta_grid_khz: vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0],
            shape: "blackman".into(),
        }
    }
}

impl MppSection {
    pub fn build(&self) -> Result<(TrapPair, Vec<f64>, Vec<f64>, MppPulseShape), ConfigError> {
        let shape = match self.shape.as_str() {
            "square" => MppPulseShape::Square,
            "blackman" => MppPulseShape::Blackman,
            other => return err("mpp.shape", format!("unknown pulse shape {other:?}")),
        };
        let base = TrapPair {
            omega_g: TAU * self.omega_g_khz * 1e-3,
            omega_m: TAU * self.omega_g_khz * 1e-3,
            delta_m: 0.0,
            k_per_um: self.wavevector_per_um,
            n_levels: self.n_levels,
            omega_drive: TAU * self.omega_drive_khz * 1e-3,
            mass_kg: rydsim_core::mpp::YB171_MASS_KG,
        };
        let deltas: Vec<f64> = self.delta_grid_khz.iter().map(|d| TAU * d * 1e-3).collect();
        if self.ratio_grid.is_empty() || deltas.is_empty() {
            return err("mpp", "grids must be non-empty");
        }
        Ok((base, self.ratio_grid.clone(), deltas, shape))
    }
}

#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnalyzeSection {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots_file: Option<PathBuf>,
}
