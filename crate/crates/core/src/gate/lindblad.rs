//! Lindblad evolution of the two-atom four-level density matrix.
//!
//! Rydberg decay enters through six jump operators, the three per-atom
//! channels `r0 -> {decay, m0, m1}` tensored with identity each way:
//!
//! ```text
//! d rho/dt = -i [H, rho] + sum_c ( L_c rho L_c^+ - 1/2 {L_c^+ L_c, rho} ).
//! ```
//!
//! [`master_equation_step`] is a fixed-step fourth-order integrator that
//! halves its step until trace, hermiticity, and positivity tolerances pass.
//! [`evolve_master`] integrates a full pulse with exact per-slice unitaries
//! sandwiched between exact decay factors (Strang splitting), which stays
//! accurate at strong blockade where a naive explicit step would need tiny
//! steps.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::decay::DecayModel;
use crate::error::{Result, SimError};

use super::levels::{level_of, Level, DIM};
use super::noise::NoiseTrace;
use super::tog::{compensation_matrix, slice_hamiltonians, TogPulse};

/// One decay channel `sqrt(rate) |dest><r0|` on one atom.
#[derive(Copy, Clone, Debug)]
pub struct JumpChannel {
    pub atom: usize,
    pub dest: Level,
    pub rate: f64,
}

/// The six jump operators derived from a decay model: per atom,
/// `r0 -> decay` collects every branch leaving the qubit subspace while
/// `r0 -> m0` and `r0 -> m1` re-enter it.
#[derive(Clone, Debug)]
pub struct JumpOperators {
    pub channels: Vec<JumpChannel>,
}

impl JumpOperators {
    pub fn from_decay_model(decay: &DecayModel) -> Self {
        let g = decay.gamma;
        let b = &decay.branches;
        let mut channels = Vec::with_capacity(6);
        for atom in 0..2 {
            channels.push(JumpChannel {
                atom,
                dest: Level::Decay,
                rate: g * (b.detected + b.to_g + b.other),
            });
            channels.push(JumpChannel { atom, dest: Level::M0, rate: g * b.to_m0 });
            channels.push(JumpChannel { atom, dest: Level::M1, rate: g * b.to_m1 });
        }
        Self { channels }
    }

    /// Total decay rate out of `r0` per atom.
    pub fn total_rate(&self) -> f64 {
        self.channels.iter().filter(|c| c.atom == 0).map(|c| c.rate).sum()
    }
}

/// 16x16 density matrix with a time stamp.
#[derive(Clone, Debug)]
pub struct DensityMatrix4L {
    pub matrix: DMatrix<Complex64>,
    pub time: f64,
}

impl DensityMatrix4L {
    pub fn from_pure(state: &[Complex64]) -> Self {
        debug_assert_eq!(state.len(), DIM);
        let v = nalgebra::DVector::from_column_slice(state);
        Self { matrix: &v * v.adjoint(), time: 0.0 }
    }

    pub fn trace(&self) -> f64 {
        (0..DIM).map(|i| self.matrix[(i, i)].re).sum()
    }

    pub fn hermiticity_residual(&self) -> f64 {
        (&self.matrix - self.matrix.adjoint()).norm()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let herm = (&self.matrix + self.matrix.adjoint()).map(|z| z * 0.5);
        let eig = herm.symmetric_eigen();
        eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Trace within 1e-10 of one, Hermitian within 1e-10, eigenvalues above
    /// -1e-8.
    pub fn validate(&self) -> Result<()> {
        if (self.trace() - 1.0).abs() > 1e-10 {
            return Err(SimError::InvalidModel(format!("trace drift {:.3e}", self.trace() - 1.0)));
        }
        if self.hermiticity_residual() > 1e-10 {
            return Err(SimError::InvalidModel(format!(
                "hermiticity residual {:.3e}",
                self.hermiticity_residual()
            )));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(SimError::InvalidModel(format!("negative eigenvalue {min:.3e}")));
        }
        Ok(())
    }

    /// Population of the computational (m-qubit) subspace.
    pub fn comp_population(&self) -> f64 {
        super::levels::comp_indices().iter().map(|&i| self.matrix[(i, i)].re).sum()
    }
}

fn lindblad_rhs(
    rho: &DMatrix<Complex64>,
    h: &DMatrix<Complex64>,
    jumps: &JumpOperators,
) -> DMatrix<Complex64> {
    let mut out = (h * rho - rho * h).map(|z| Complex64::new(0.0, -1.0) * z);
    apply_dissipator_into(rho, jumps, 1.0, &mut out);
    out
}

/// `out += scale * D(rho)` exploiting the sparse `|dest><r0|` structure.
fn apply_dissipator_into(
    rho: &DMatrix<Complex64>,
    jumps: &JumpOperators,
    scale: f64,
    out: &mut DMatrix<Complex64>,
) {
    let r = Level::R0 as usize;
    for ch in &jumps.channels {
        if ch.rate == 0.0 {
            continue;
        }
        let rate = ch.rate * scale;
        // gain: L rho L^+
        for i in 0..DIM {
            if level_of(i, ch.atom) != r {
                continue;
            }
            let i_to = remap(i, ch.atom, ch.dest);
            for j in 0..DIM {
                if level_of(j, ch.atom) != r {
                    continue;
                }
                let j_to = remap(j, ch.atom, ch.dest);
                out[(i_to, j_to)] += rate * rho[(i, j)];
            }
        }
        // loss: -1/2 {L^+L, rho}
        for i in 0..DIM {
            let ri = (level_of(i, ch.atom) == r) as u32 as f64;
            for j in 0..DIM {
                let rj = (level_of(j, ch.atom) == r) as u32 as f64;
                let w = 0.5 * rate * (ri + rj);
                if w != 0.0 {
                    out[(i, j)] -= w * rho[(i, j)];
                }
            }
        }
    }
}

fn remap(index: usize, atom: usize, dest: Level) -> usize {
    if atom == 0 {
        4 * dest as usize + index % 4
    } else {
        (index / 4) * 4 + dest as usize
    }
}

/// One fourth-order step of the master equation, halving the step until the
/// result passes its trace/hermiticity/positivity checks.
pub fn master_equation_step(
    rho: &DensityMatrix4L,
    h: &DMatrix<Complex64>,
    jumps: &JumpOperators,
    dt: f64,
) -> Result<DensityMatrix4L> {
    let mut substeps = 1usize;
    'retry: loop {
        let hsub = dt / substeps as f64;
        let mut m = rho.matrix.clone();
        for _ in 0..substeps {
            let k1 = lindblad_rhs(&m, h, jumps);
            let k2 = lindblad_rhs(&(&m + &k1 * Complex64::new(hsub / 2.0, 0.0)), h, jumps);
            let k3 = lindblad_rhs(&(&m + &k2 * Complex64::new(hsub / 2.0, 0.0)), h, jumps);
            let k4 = lindblad_rhs(&(&m + &k3 * Complex64::new(hsub, 0.0)), h, jumps);
            m += (k1 + k2 * Complex64::new(2.0, 0.0) + k3 * Complex64::new(2.0, 0.0) + k4)
                * Complex64::new(hsub / 6.0, 0.0);
        }
        // restore hermiticity by symmetrization, then check the residual
        let residual = (&m - m.adjoint()).norm();
        let sym = (&m + m.adjoint()).map(|z| z * 0.5);
        let out = DensityMatrix4L { matrix: sym, time: rho.time + dt };
        if residual < 1e-10 && (out.trace() - rho.trace()).abs() < 1e-10 && out.min_eigenvalue() > -1e-8
        {
            return Ok(out);
        }
        substeps *= 2;
        if substeps > 4096 {
            return Err(SimError::Convergence { residual, substeps });
        }
        continue 'retry;
    }
}

/// Exact decay factors plus first-order gain for a short interval `h`: the
/// coherence damping `exp(-(Gamma_i + Gamma_j) h / 2)` is applied exactly,
/// the jump gain to first order (the per-slice decay probability is ~1e-5,
/// so the quadratic remainder is far below the fidelity scales of
/// interest).
fn dissipator_half_slice(rho: &mut DMatrix<Complex64>, jumps: &JumpOperators, h: f64) {
    let r = Level::R0 as usize;
    let gamma = jumps.total_rate();
    // gain first, evaluated on the pre-decay matrix
    let mut gain = DMatrix::<Complex64>::zeros(DIM, DIM);
    apply_dissipator_into(rho, jumps, h, &mut gain);
    // remove the anticommutator part of the first-order dissipator; it is
    // replaced by the exact exponential damping below
    for i in 0..DIM {
        let ri = (level_of(i, 0) == r) as u32 as f64 + (level_of(i, 1) == r) as u32 as f64;
        for j in 0..DIM {
            let rj = (level_of(j, 0) == r) as u32 as f64 + (level_of(j, 1) == r) as u32 as f64;
            gain[(i, j)] += 0.5 * h * gamma * (ri + rj) * rho[(i, j)];
        }
    }
    for i in 0..DIM {
        let ri = (level_of(i, 0) == r) as u32 as f64 + (level_of(i, 1) == r) as u32 as f64;
        for j in 0..DIM {
            let rj = (level_of(j, 0) == r) as u32 as f64 + (level_of(j, 1) == r) as u32 as f64;
            let damp = (-0.5 * gamma * (ri + rj) * h).exp();
            rho[(i, j)] = rho[(i, j)] * damp + gain[(i, j)];
        }
    }
}

/// Integrate the master equation over a full pulse: exact slice unitaries
/// with Strang-split decay factors. Returns the final density matrix with
/// the compensation phase applied.
///
/// The splitting keeps full accuracy at strong blockade; its first-order
/// jump gain leaves a trace residue of order `n_slices (Gamma dt)^2`,
/// negligible against gate-error scales (use [`master_equation_step`] when
/// strict per-step trace conservation is required).
pub fn evolve_master(
    initial: &DensityMatrix4L,
    pulse: &TogPulse,
    decay: Option<&DecayModel>,
    noise: Option<&NoiseTrace>,
    n_slices: usize,
) -> Result<DensityMatrix4L> {
    let jumps = decay.map(JumpOperators::from_decay_model);
    let dt = pulse.duration / n_slices as f64;
    let hams = slice_hamiltonians(
        pulse,
        n_slices,
        noise.map(|t| t.omega_scale.as_slice()),
        noise.map(|t| t.detuning.as_slice()),
    );
    let mut rho = initial.matrix.clone();
    for h in &hams {
        if let Some(j) = &jumps {
            dissipator_half_slice(&mut rho, j, dt / 2.0);
        }
        let gen = h.map(|v| Complex64::new(0.0, -dt) * v);
        let u = gen.exp();
        rho = &u * rho * u.adjoint();
        if let Some(j) = &jumps {
            dissipator_half_slice(&mut rho, j, dt / 2.0);
        }
    }
    let z = compensation_matrix(pulse);
    rho = &z * rho * z.adjoint();
    // symmetrize away accumulated rounding
    let rho = (&rho + rho.adjoint()).map(|v| v * 0.5);
    Ok(DensityMatrix4L { matrix: rho, time: initial.time + pulse.duration })
}
