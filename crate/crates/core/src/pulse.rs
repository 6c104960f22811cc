//! Piecewise-constant drive profiles.
//!
//! A [`PulseProfile`] samples Rabi frequency, detuning, and optical phase on
//! a uniform grid of `N` segments with midpoints `t_j = (j + 1/2) dt`,
//! `dt = T/N`. The detuning samples are the variational object of the pulse
//! optimizer; the Rabi envelope is fixed to a cosine-tapered window that
//! rises from zero to a plateau and back.

use crate::error::{Result, SimError};

/// Piecewise-constant `(Omega, Delta, phi)` on a uniform time grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PulseProfile {
    total_time: f64,
    omega: Vec<f64>,
    delta: Vec<f64>,
    phi: Vec<f64>,
}

impl PulseProfile {
    pub fn new(total_time: f64, omega: Vec<f64>, delta: Vec<f64>, phi: Vec<f64>) -> Result<Self> {
        let n = omega.len();
        if n < 2 {
            return Err(SimError::InvalidModel("pulse grid needs at least 2 segments".into()));
        }
        if delta.len() != n || phi.len() != n {
            return Err(SimError::Mismatch("pulse channel lengths differ".into()));
        }
        if !(total_time > 0.0) {
            return Err(SimError::InvalidModel("pulse duration must be positive".into()));
        }
        Ok(Self { total_time, omega, delta, phi })
    }

    /// Cosine-tapered (Tukey) envelope evaluated at `t` for a window of
    /// length `total`: zero at the edges, unity over the interior plateau.
    /// `taper` is the total fraction of the window spent ramping (half on
    /// each side).
    pub fn taper_window(t: f64, total: f64, taper: f64) -> f64 {
        let ramp = 0.5 * taper * total;
        if t <= 0.0 || t >= total {
            0.0
        } else if t < ramp {
            0.5 * (1.0 - (std::f64::consts::PI * t / ramp).cos())
        } else if t > total - ramp {
            0.5 * (1.0 - (std::f64::consts::PI * (total - t) / ramp).cos())
        } else {
            1.0
        }
    }

    /// Constant-detuning profile under a cosine-tapered envelope.
    pub fn cosine_tapered(
        total_time: f64,
        n: usize,
        omega_plateau: f64,
        taper: f64,
        delta: f64,
    ) -> Result<Self> {
        Self::with_delta_fn(total_time, n, omega_plateau, taper, |_| delta)
    }

    /// Linear detuning ramp from `delta_start` to `delta_end` under a
    /// cosine-tapered envelope, the standard initial guess for sweeps.
    pub fn linear_ramp(
        total_time: f64,
        n: usize,
        omega_plateau: f64,
        taper: f64,
        delta_start: f64,
        delta_end: f64,
    ) -> Result<Self> {
        Self::with_delta_fn(total_time, n, omega_plateau, taper, |s| {
            delta_start + (delta_end - delta_start) * s
        })
    }

    /// Build a profile from a detuning function of the scaled time `s = t/T`.
    pub fn with_delta_fn(
        total_time: f64,
        n: usize,
        omega_plateau: f64,
        taper: f64,
        delta_of_s: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        if n < 2 {
            return Err(SimError::InvalidModel("pulse grid needs at least 2 segments".into()));
        }
        if !(0.0..=1.0).contains(&taper) {
            return Err(SimError::InvalidModel("taper fraction must lie in [0, 1]".into()));
        }
        let dt = total_time / n as f64;
        let mut omega = Vec::with_capacity(n);
        let mut delta = Vec::with_capacity(n);
        for j in 0..n {
            let t = (j as f64 + 0.5) * dt;
            omega.push(omega_plateau * Self::taper_window(t, total_time, taper));
            delta.push(delta_of_s(t / total_time));
        }
        Self::new(total_time, omega, delta, vec![0.0; n])
    }

    /// Flat drive with zero taper; used for exact-pulse oracles.
    pub fn flat(total_time: f64, n: usize, omega: f64, delta: f64) -> Result<Self> {
        Self::new(total_time, vec![omega; n], vec![delta; n], vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.omega.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn total_time(&self) -> f64 {
        self.total_time
    }

    pub fn dt(&self) -> f64 {
        self.total_time / self.len() as f64
    }

    pub fn midpoint(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.dt()
    }

    pub fn omega(&self) -> &[f64] {
        &self.omega
    }

    pub fn delta(&self) -> &[f64] {
        &self.delta
    }

    pub fn phi(&self) -> &[f64] {
        &self.phi
    }

    pub fn delta_mut(&mut self) -> &mut [f64] {
        &mut self.delta
    }

    pub fn set_delta(&mut self, delta: Vec<f64>) -> Result<()> {
        if delta.len() != self.len() {
            return Err(SimError::Mismatch("detuning length differs from grid".into()));
        }
        self.delta = delta;
        Ok(())
    }

    /// Same profile as a function of scaled time `s = t/T`, stretched onto a
    /// new total duration. The grid size is unchanged; `dt` grows with `T`.
    pub fn rescaled_to(&self, new_total_time: f64) -> Result<Self> {
        Self::new(new_total_time, self.omega.clone(), self.delta.clone(), self.phi.clone())
    }

    /// Sum of squared detuning increments, the raw smoothness measure.
    pub fn delta_increment_sq(&self) -> f64 {
        self.delta.windows(2).map(|w| (w[1] - w[0]).powi(2)).sum()
    }

    /// CSV serialization: comment header carrying grid metadata, then
    /// `t_us, omega_rad_per_us, delta_rad_per_us, phi_rad` rows.
    pub fn to_csv(&self, eta: Option<f64>, seed: Option<u64>) -> String {
        let mut out = String::new();
        out.push_str(&format!("# T_us={} N={}", self.total_time, self.len()));
        if let Some(e) = eta {
            out.push_str(&format!(" eta={e}"));
        }
        if let Some(s) = seed {
            out.push_str(&format!(" seed={s}"));
        }
        out.push('\n');
        out.push_str("t_us,omega_rad_per_us,delta_rad_per_us,phi_rad\n");
        for j in 0..self.len() {
            out.push_str(&format!(
                "{},{},{},{}\n",
                self.midpoint(j),
                self.omega[j],
                self.delta[j],
                self.phi[j]
            ));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut total_time = None;
        let mut omega = Vec::new();
        let mut delta = Vec::new();
        let mut phi = Vec::new();
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                for field in rest.split_whitespace() {
                    if let Some(v) = field.strip_prefix("T_us=") {
                        total_time =
                            Some(v.parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?);
                    }
                }
                continue;
            }
            if line.starts_with("t_us") {
                continue;
            }
            let cols: Vec<&str> = line.split(',').map(str::trim).collect();
            if cols.len() != 4 {
                return Err(SimError::Parse(format!("expected 4 columns, got {}", cols.len())));
            }
            omega.push(cols[1].parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?);
            delta.push(cols[2].parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?);
            phi.push(cols[3].parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?);
        }
        let total_time =
            total_time.ok_or_else(|| SimError::Parse("pulse CSV missing T_us header".into()))?;
        Self::new(total_time, omega, delta, phi)
    }
}

/// Times at which `Delta/Omega` crosses a threshold during the plateau.
#[derive(Clone, Debug)]
pub struct CrossingReport {
    pub threshold: f64,
    pub times: Vec<f64>,
}

/// Diagnostic for sweep structure: where the profile crosses the ordering
/// transition `Delta/Omega = threshold` while the drive sits on its plateau.
/// Robust sweep shapes are distinguished by crossing several times.
pub fn sweep_profile_report(pulse: &PulseProfile, threshold: f64) -> Result<CrossingReport> {
    let omega_max = pulse.omega().iter().cloned().fold(0.0f64, f64::max);
    if omega_max <= 0.0 {
        return Err(SimError::InvalidModel("pulse has no drive plateau".into()));
    }
    let plateau: Vec<usize> = (0..pulse.len())
        .filter(|&j| pulse.omega()[j] >= 0.99 * omega_max)
        .collect();
    let mut times = Vec::new();
    for w in plateau.windows(2) {
        let (a, b) = (w[0], w[1]);
        if b != a + 1 {
            continue; // disjoint plateau stretches
        }
        let fa = pulse.delta()[a] / pulse.omega()[a] - threshold;
        let fb = pulse.delta()[b] / pulse.omega()[b] - threshold;
        if fa == 0.0 {
            times.push(pulse.midpoint(a));
        } else if fa * fb < 0.0 {
            let w_lin = fa / (fa - fb);
            times.push(pulse.midpoint(a) + w_lin * pulse.dt());
        }
    }
    // a crossing exactly at the last plateau sample
    if let Some(&last) = plateau.last() {
        if pulse.delta()[last] / pulse.omega()[last] - threshold == 0.0 {
            times.push(pulse.midpoint(last));
        }
    }
    Ok(CrossingReport { threshold, times })
}
