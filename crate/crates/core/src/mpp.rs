//! Motional dynamics of clock pulses in non-magic tweezers.
//!
//! One atom in a one-dimensional harmonic trap whose ground and metastable
//! manifolds see different trap frequencies:
//!
//! ```text
//! H_diag  = sum_i w_g i |g,i><g,i| + sum_j (w_m j + Delta_m) |m,j><m,j|
//! H_light = Omega(t) sum_{i,j} <i|_{w_m} e^{ikx} |j>_{w_g} |m,i><g,j| + h.c.
//! ```
//!
//! after the rotating-wave approximation, truncated at `n_levels` motional
//! states per manifold. The recoil matrix elements are overlap integrals of
//! oscillator eigenfunctions of different widths against the photon recoil
//! phase; for equal frequencies they reduce to the Lamb-Dicke (Laguerre)
//! form. Transfer infidelity and added motional quanta quantify how well a
//! pulse moves the electronic state without touching the motion.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SimError};

/// Reduced Planck constant (J s).
const HBAR: f64 = 1.054_571_817e-34;
/// Mass of Yb-171 (kg).
pub const YB171_MASS_KG: f64 = 2.838_464_405_819_170_3e-25;

/// Trap and drive parameters of one atom.
#[derive(Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct TrapPair {
    /// Ground-manifold trap frequency (rad/us).
    pub omega_g: f64,
    /// Metastable-manifold trap frequency (rad/us).
    pub omega_m: f64,
    /// Detuning from the differential light shift (rad/us).
    pub delta_m: f64,
    /// Drive wavevector projection on the oscillator axis (1/um).
    pub k_per_um: f64,
    /// Motional levels kept per manifold.
    pub n_levels: usize,
    /// Drive coupling (rad/us); the two-level Rabi frequency is
    /// `2 Omega |<0|e^{ikx}|0>|`.
    pub omega_drive: f64,
    /// Atomic mass (kg).
    pub mass_kg: f64,
}

impl TrapPair {
    /// Radial-trap defaults: 2 pi x 50 kHz traps, clock-wavelength recoil,
    /// 15 motional levels.
    pub fn default_radial() -> Self {
        use std::f64::consts::TAU;
        Self {
            omega_g: TAU * 0.050,
            omega_m: TAU * 0.050,
            delta_m: 0.0,
            k_per_um: TAU / 0.578,
            n_levels: 15,
            omega_drive: TAU * 0.002,
            mass_kg: YB171_MASS_KG,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.omega_g <= 0.0 || self.omega_m <= 0.0 {
            return Err(SimError::InvalidModel("trap frequencies must be positive".into()));
        }
        if self.n_levels < 5 {
            return Err(SimError::InvalidModel("need at least 5 motional levels".into()));
        }
        Ok(())
    }

    /// Inverse squared oscillator length `m omega / hbar` in 1/um^2.
    fn alpha(&self, omega: f64) -> f64 {
        // omega in rad/us = 1e6 rad/s; lengths in um = 1e-6 m
        self.mass_kg * (omega * 1e6) / HBAR * 1e-12
    }

    /// Zero-point extent `sqrt(hbar / 2 m omega)` in um.
    pub fn x_zpf(&self, omega: f64) -> f64 {
        1.0 / (2.0 * self.alpha(omega)).sqrt()
    }

    /// Lamb-Dicke parameter of the ground trap.
    pub fn eta(&self) -> f64 {
        self.k_per_um * self.x_zpf(self.omega_g)
    }
}

/// Normalized oscillator eigenfunctions at scaled positions, by upward
/// recurrence: `phi[n][p]` for `n < n_levels` at `xs[p]`.
fn oscillator_functions(alpha: f64, xs: &[f64], n_levels: usize) -> Vec<Vec<f64>> {
    let norm0 = (alpha / std::f64::consts::PI).powf(0.25);
    let mut phi = vec![vec![0.0; xs.len()]; n_levels];
    for (p, &x) in xs.iter().enumerate() {
        let xi = alpha.sqrt() * x;
        let e = (-0.5 * xi * xi).exp();
        phi[0][p] = norm0 * e;
        if n_levels > 1 {
            phi[1][p] = norm0 * std::f64::consts::SQRT_2 * xi * e;
        }
        for n in 1..n_levels.saturating_sub(1) {
            let a = (2.0 / (n as f64 + 1.0)).sqrt() * xi;
            let b = (n as f64 / (n as f64 + 1.0)).sqrt();
            phi[n + 1][p] = a * phi[n][p] - b * phi[n - 1][p];
        }
    }
    phi
}

/// Recoil matrix element `<i|_{w_m} e^{ikx} |j>_{w_g}` by trapezoid
/// quadrature with interval doubling; the Gaussian decay of the integrand
/// makes the trapezoid rule converge superalgebraically.
pub fn recoil_matrix_element(i: usize, j: usize, traps: &TrapPair) -> Result<Complex64> {
    traps.validate()?;
    if i >= traps.n_levels || j >= traps.n_levels {
        return Err(SimError::InvalidModel(format!(
            "levels ({i}, {j}) outside truncation {}",
            traps.n_levels
        )));
    }
    let m = recoil_matrix(traps)?;
    Ok(m[(i, j)])
}

/// Full recoil matrix over the truncated ladder.
pub fn recoil_matrix(traps: &TrapPair) -> Result<DMatrix<Complex64>> {
    traps.validate()?;
    let n = traps.n_levels;
    let a_g = traps.alpha(traps.omega_g);
    let a_m = traps.alpha(traps.omega_m);
    let a_min = a_g.min(a_m);
    let extent = ((2.0 * n as f64 + 1.0).sqrt() + 6.0) / a_min.sqrt();

    let integrate = |points: usize| -> DMatrix<Complex64> {
        let h = 2.0 * extent / points as f64;
        let xs: Vec<f64> = (0..=points).map(|p| -extent + p as f64 * h).collect();
        let phi_g = oscillator_functions(a_g, &xs, n);
        let phi_m = oscillator_functions(a_m, &xs, n);
        let phases: Vec<Complex64> = xs
            .iter()
            .map(|&x| Complex64::from_polar(1.0, traps.k_per_um * x))
            .collect();
        let mut out = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::ZERO;
                for p in 0..=points {
                    let w = if p == 0 || p == points { 0.5 } else { 1.0 };
                    acc += w * phi_m[i][p] * phi_g[j][p] * phases[p];
                }
                out[(i, j)] = acc * h;
            }
        }
        out
    };

    let mut points = 512usize;
    let mut current = integrate(points);
    loop {
        points *= 2;
        let refined = integrate(points);
        let diff = (&refined - &current).norm();
        current = refined;
        if diff < 1e-12 * current.norm().max(1.0) {
            return Ok(current);
        }
        if points > 1 << 15 {
            return Err(SimError::Convergence { residual: diff, substeps: points });
        }
    }
}

/// Drive envelope of the transfer pulse.
#[derive(Copy, Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MppPulseShape {
    Square,
    /// Smooth amplitude-shaped pulse (Blackman window), the default profile.
    Blackman,
}

impl MppPulseShape {
    fn window(&self, s: f64) -> f64 {
        match self {
            MppPulseShape::Square => 1.0,
            MppPulseShape::Blackman => {
                0.42 - 0.5 * (std::f64::consts::TAU * s).cos()
                    + 0.08 * (2.0 * std::f64::consts::TAU * s).cos()
            }
        }
    }

    fn mean(&self) -> f64 {
        match self {
            MppPulseShape::Square => 1.0,
            MppPulseShape::Blackman => 0.42,
        }
    }
}

/// Transfer quality of one pulse.
#[derive(Copy, Clone, Debug, serde::Serialize)]
pub struct MppResult {
    /// `1 - P(m manifold)` after the pulse.
    pub infidelity: f64,
    /// Mean motional quantum number added within the m manifold.
    pub added_quanta: f64,
    /// Set when the top truncated level was populated above 1e-6 during the
    /// evolution.
    pub truncation_flag: bool,
}

/// Simulate a calibrated pi-pulse from `|g, 0>`: duration chosen so the
/// carrier area `integral 2 Omega(t) |R_00| dt` equals pi.
pub fn simulate_mpp(traps: &TrapPair, shape: MppPulseShape) -> Result<MppResult> {
    traps.validate()?;
    let recoil = recoil_matrix(traps)?;
    let carrier = recoil[(0, 0)].norm();
    if carrier <= 1e-12 {
        return Err(SimError::InvalidModel("vanishing carrier matrix element".into()));
    }
    let duration = std::f64::consts::PI / (2.0 * traps.omega_drive * carrier * shape.mean());
    let n = traps.n_levels;
    let dim = 2 * n;

    // diagonal energies: |g,i> then |m,j>
    let mut diag = vec![0.0f64; dim];
    for i in 0..n {
        diag[i] = traps.omega_g * i as f64;
        diag[n + i] = traps.omega_m * i as f64 + traps.delta_m;
    }

    let n_slices = match shape {
        MppPulseShape::Square => 1,
        MppPulseShape::Blackman => 240,
    };
    let dt = duration / n_slices as f64;
    let mut psi = vec![Complex64::ZERO; dim];
    psi[0] = Complex64::ONE;
    let mut truncation_flag = false;
    for s in 0..n_slices {
        let t_mid = (s as f64 + 0.5) * dt;
        let amp = traps.omega_drive * shape.window(t_mid / duration);
        let mut h = DMatrix::<Complex64>::zeros(dim, dim);
        for (i, &d) in diag.iter().enumerate() {
            h[(i, i)] = Complex64::new(d, 0.0);
        }
        for i in 0..n {
            for j in 0..n {
                let c = amp * recoil[(i, j)];
                h[(n + i, j)] += c;
                h[(j, n + i)] += c.conj();
            }
        }
        let u = h.map(|v| Complex64::new(0.0, -dt) * v).exp();
        let v = nalgebra::DVector::from_column_slice(&psi);
        let next = u * v;
        psi.copy_from_slice(next.as_slice());
        let top = psi[n - 1].norm_sqr() + psi[dim - 1].norm_sqr();
        if top > 1e-6 {
            truncation_flag = true;
        }
    }

    let p_m: f64 = (0..n).map(|j| psi[n + j].norm_sqr()).sum();
    let added = if p_m > 0.0 {
        (0..n).map(|j| j as f64 * psi[n + j].norm_sqr()).sum::<f64>() / p_m
    } else {
        0.0
    };
    Ok(MppResult { infidelity: 1.0 - p_m, added_quanta: added, truncation_flag })
}

/// One sweep point.
#[derive(Copy, Clone, Debug, serde::Serialize)]
pub struct SweepRow {
    pub omega_ratio: f64,
    pub delta_m: f64,
    pub infidelity: f64,
    pub added_quanta: f64,
}

/// Sweep trap-frequency ratio (wavelength proxy) and light-shift
/// inhomogeneity.
pub fn sweep_inhomogeneity(
    base: &TrapPair,
    ratio_grid: &[f64],
    delta_grid: &[f64],
    shape: MppPulseShape,
) -> Result<Vec<SweepRow>> {
    if ratio_grid.is_empty() || delta_grid.is_empty() {
        return Err(SimError::InvalidModel("sweep grids must be non-empty".into()));
    }
    let mut jobs = Vec::new();
    for &r in ratio_grid {
        for &d in delta_grid {
            jobs.push((r, d));
        }
    }
    jobs.par_iter()
        .map(|&(ratio, delta)| {
            let traps = TrapPair {
                omega_m: ratio * base.omega_g,
                delta_m: delta,
                ..base.clone()
            };
            let res = simulate_mpp(&traps, shape)?;
            Ok(SweepRow {
                omega_ratio: ratio,
                delta_m: delta,
                infidelity: res.infidelity,
                added_quanta: res.added_quanta,
            })
        })
        .collect()
}
