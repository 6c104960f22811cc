//! Piecewise-constant time propagation.
//!
//! Each segment applies `exp(-i dt H)` for a time-independent `H`, which may
//! carry an anti-Hermitian decay diagonal (no-jump evolution). Two engines:
//!
//! - dense: exact exponentiation through an eigendecomposition (Hermitian)
//!   or a Pade matrix exponential (dissipative), used up to
//!   [`PropagationOptions::dense_cutoff`];
//! - Krylov: matrix-free Lanczos (Hermitian) or Arnoldi (dissipative) with
//!   adaptive substepping against a per-segment relative tolerance.
//!
//! [`evolve_with_derivative`] additionally returns the exact derivative of
//! the propagated state with respect to a scalar control that enters the
//! Hamiltonian through a diagonal direction `B`, i.e. `(d/du exp(-i dt (H +
//! u B)))|psi>` at `u = 0`. The dense engine uses the divided-difference
//! (Loewner) form on the eigenbasis; the Krylov engine propagates the block
//! operator `[[H, B], [0, H]]`, whose exponential carries the derivative in
//! its off-diagonal block.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::hilbert::StateVector;
use crate::operator::Operator;

/// Tolerances and limits for segment propagation.
#[derive(Copy, Clone, Debug)]
pub struct PropagationOptions {
    /// Relative 2-norm error target per segment.
    pub rel_tol: f64,
    /// Largest dimension propagated by dense exponentiation.
    pub dense_cutoff: usize,
    /// Krylov subspace dimension.
    pub krylov_dim: usize,
    /// Substep cap per segment before reporting a convergence failure.
    pub max_substeps: usize,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self { rel_tol: 1e-10, dense_cutoff: 64, krylov_dim: 30, max_substeps: 100_000 }
    }
}

/// Propagate through a sequence of `(hamiltonian, duration)` segments.
pub fn propagate(
    state: &StateVector,
    segments: &[(&Operator, f64)],
    opts: &PropagationOptions,
) -> Result<StateVector> {
    let mut out = state.clone();
    for &(op, dt) in segments {
        evolve(&mut out, op, dt, opts)?;
    }
    Ok(out)
}

/// Propagate one segment in place and advance the state's time stamp.
pub fn evolve(state: &mut StateVector, op: &Operator, dt: f64, opts: &PropagationOptions) -> Result<()> {
    if state.basis().dim() != op.dim() {
        return Err(SimError::Mismatch("state and Hamiltonian bases differ".into()));
    }
    if dt != 0.0 {
        if op.dim() <= opts.dense_cutoff {
            dense_step(op, dt, state.amplitudes_mut());
        } else {
            krylov_step(op, dt, state.amplitudes_mut(), opts)?;
        }
    }
    state.advance_time(dt);
    Ok(())
}

/// Returns `(U psi, dU/du psi)` for `U = exp(-i dt (H + u B))` at `u = 0`,
/// with a real diagonal direction `B`. `H` must be Hermitian.
pub fn evolve_with_derivative(
    op: &Operator,
    b_diag: &[f64],
    dt: f64,
    psi: &[Complex64],
    opts: &PropagationOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    if op.is_dissipative() {
        return Err(SimError::InvalidModel(
            "control derivative requires a Hermitian Hamiltonian".into(),
        ));
    }
    if b_diag.len() != op.dim() || psi.len() != op.dim() {
        return Err(SimError::Mismatch("direction or state length differs from operator".into()));
    }
    if dt == 0.0 {
        return Ok((psi.to_vec(), vec![Complex64::ZERO; psi.len()]));
    }
    if op.dim() <= opts.dense_cutoff {
        Ok(dense_step_with_derivative(op, b_diag, dt, psi))
    } else {
        augmented_krylov_step(op, b_diag, dt, psi, opts)
    }
}

// ---------------------------------------------------------------------------
// dense engine

fn dense_step(op: &Operator, dt: f64, amps: &mut [Complex64]) {
    if op.is_dissipative() {
        let d = op.dim();
        let gen = op.to_dense().map(|z| Complex64::new(0.0, -dt) * z);
        let u = gen.exp();
        let x = DVector::from_column_slice(amps);
        let y = u * x;
        amps.copy_from_slice(y.as_slice());
        let _ = d;
    } else {
        let eig = SymmetricEigen::new(op.to_dense_real());
        apply_in_eigenbasis(&eig, dt, amps);
    }
}

fn apply_in_eigenbasis(eig: &SymmetricEigen<f64, nalgebra::Dyn>, dt: f64, amps: &mut [Complex64]) {
    let d = amps.len();
    let v = &eig.eigenvectors;
    // u = V^T x
    let mut u = vec![Complex64::ZERO; d];
    for a in 0..d {
        let mut acc = Complex64::ZERO;
        for k in 0..d {
            acc += v[(k, a)] * amps[k];
        }
        u[a] = acc;
    }
    for (ua, lam) in u.iter_mut().zip(eig.eigenvalues.iter()) {
        *ua *= Complex64::from_polar(1.0, -dt * lam);
    }
    // x = V u
    for k in 0..d {
        let mut acc = Complex64::ZERO;
        for a in 0..d {
            acc += v[(k, a)] * u[a];
        }
        amps[k] = acc;
    }
}

fn dense_step_with_derivative(
    op: &Operator,
    b_diag: &[f64],
    dt: f64,
    psi: &[Complex64],
) -> (Vec<Complex64>, Vec<Complex64>) {
    let d = op.dim();
    let eig = SymmetricEigen::new(op.to_dense_real());
    let v = &eig.eigenvectors;
    let lam = &eig.eigenvalues;

    // u = V^T psi
    let mut u = vec![Complex64::ZERO; d];
    for a in 0..d {
        let mut acc = Complex64::ZERO;
        for k in 0..d {
            acc += v[(k, a)] * psi[k];
        }
        u[a] = acc;
    }

    // W = V^T diag(b) V, phases f_a = exp(-i dt lam_a)
    let phases: Vec<Complex64> = lam.iter().map(|l| Complex64::from_polar(1.0, -dt * l)).collect();

    // propagated = V (f .* u)
    let mut propagated = vec![Complex64::ZERO; d];
    for k in 0..d {
        let mut acc = Complex64::ZERO;
        for a in 0..d {
            acc += v[(k, a)] * (phases[a] * u[a]);
        }
        propagated[k] = acc;
    }

    // Loewner matrix against the eigenvalues: Phi_ab = (f_a - f_b)/(lam_a -
    // lam_b), with the confluent limit -i dt f_a on (near-)degenerate pairs.
    // w_a = sum_b Phi_ab W_ab u_b, derivative = V w.
    let vt_b: Vec<f64> = {
        // rows of V^T scaled by b: cache b_k * V[(k,a)] products on the fly
        Vec::new()
    };
    let _ = vt_b;
    let mut w = vec![Complex64::ZERO; d];
    // W_ab = sum_k V[(k,a)] b_k V[(k,b)]; computed column-by-column to keep
    // the O(d^3) loop cache-friendly.
    let mut bv = DMatrix::<f64>::zeros(d, d);
    for bcol in 0..d {
        for k in 0..d {
            bv[(k, bcol)] = b_diag[k] * v[(k, bcol)];
        }
    }
    let wmat = v.transpose() * &bv;
    for a in 0..d {
        let mut acc = Complex64::ZERO;
        for b in 0..d {
            let dl = lam[a] - lam[b];
            let phi = if dl.abs() < 1e-12 {
                Complex64::new(0.0, -dt) * phases[a]
            } else {
                (phases[a] - phases[b]) / dl
            };
            acc += phi * wmat[(a, b)] * u[b];
        }
        w[a] = acc;
    }
    let mut derivative = vec![Complex64::ZERO; d];
    for k in 0..d {
        let mut acc = Complex64::ZERO;
        for a in 0..d {
            acc += v[(k, a)] * w[a];
        }
        derivative[k] = acc;
    }
    (propagated, derivative)
}

// ---------------------------------------------------------------------------
// Krylov engine

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Matrix-free linear operator used by the Krylov routines.
trait LinOp {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]);
    fn hermitian(&self) -> bool;
    /// Spectral shift subtracted before exponentiation.
    fn shift(&self) -> Complex64;
}

struct OpRef<'a>(&'a Operator);

impl LinOp for OpRef<'_> {
    fn dim(&self) -> usize {
        self.0.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        self.0.apply(x, y);
    }
    fn hermitian(&self) -> bool {
        !self.0.is_dissipative()
    }
    fn shift(&self) -> Complex64 {
        self.0.diag_mean()
    }
}

/// Block operator `[[H, B], [0, H]]` acting on stacked pairs `[x; y]`.
struct AugmentedOp<'a> {
    op: &'a Operator,
    b_diag: &'a [f64],
}

impl LinOp for AugmentedOp<'_> {
    fn dim(&self) -> usize {
        2 * self.op.dim()
    }
    fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        let d = self.op.dim();
        let (x_top, x_bot) = x.split_at(d);
        let (y_top, y_bot) = y.split_at_mut(d);
        self.op.apply(x_top, y_top);
        for ((yt, b), xb) in y_top.iter_mut().zip(self.b_diag).zip(x_bot) {
            *yt += b * xb;
        }
        self.op.apply(x_bot, y_bot);
    }
    fn hermitian(&self) -> bool {
        false
    }
    fn shift(&self) -> Complex64 {
        self.op.diag_mean()
    }
}

fn krylov_step(op: &Operator, dt: f64, amps: &mut [Complex64], opts: &PropagationOptions) -> Result<()> {
    let lin = OpRef(op);
    let out = krylov_expv(&lin, dt, amps, opts)?;
    amps.copy_from_slice(&out);
    Ok(())
}

fn augmented_krylov_step(
    op: &Operator,
    b_diag: &[f64],
    dt: f64,
    psi: &[Complex64],
    opts: &PropagationOptions,
) -> Result<(Vec<Complex64>, Vec<Complex64>)> {
    let d = op.dim();
    let lin = AugmentedOp { op, b_diag };
    let mut stacked = vec![Complex64::ZERO; 2 * d];
    stacked[d..].copy_from_slice(psi);
    let out = krylov_expv(&lin, dt, &stacked, opts)?;
    let derivative = out[..d].to_vec();
    let propagated = out[d..].to_vec();
    Ok((propagated, derivative))
}

/// `exp(-i dt A) v` with adaptive substepping. The error of each substep is
/// estimated by comparing the Krylov approximations of orders `m` and `m-2`;
/// a substep is halved until the estimate meets its share of the segment
/// tolerance.
fn krylov_expv<L: LinOp>(lin: &L, dt: f64, v: &[Complex64], opts: &PropagationOptions) -> Result<Vec<Complex64>> {
    let d = lin.dim();
    let m_max = opts.krylov_dim.min(d);
    let shift = lin.shift();
    let total = dt.abs();
    let sign = dt.signum();

    let mut current = v.to_vec();
    let beta0 = norm(&current);
    if beta0 == 0.0 {
        return Ok(current);
    }
    let tol_total = opts.rel_tol * beta0;

    let mut done = 0.0f64;
    let mut step = total;
    let mut substeps = 0usize;
    let mut last_err = f64::INFINITY;

    let mut basis_vecs: Vec<Vec<Complex64>> = Vec::with_capacity(m_max + 1);
    let mut w = vec![Complex64::ZERO; d];

    while done < total * (1.0 - 1e-15) {
        substeps += 1;
        if substeps > opts.max_substeps {
            return Err(SimError::Convergence { residual: last_err, substeps });
        }
        step = step.min(total - done);
        let tau = sign * step;

        // Arnoldi / Lanczos factorization of the shifted operator.
        basis_vecs.clear();
        let beta = norm(&current);
        if beta < 1e-300 {
            break; // fully decayed state
        }
        basis_vecs.push(current.iter().map(|z| z / beta).collect());
        let mut h = DMatrix::<Complex64>::zeros(m_max + 1, m_max);
        let mut m_eff = m_max;
        let hermitian = lin.hermitian();
        for j in 0..m_max {
            lin.apply(&basis_vecs[j], &mut w);
            for (wv, xv) in w.iter_mut().zip(&basis_vecs[j]) {
                *wv -= shift * xv;
            }
            if hermitian {
                // three-term recurrence plus one full re-orthogonalization
                // pass for numerical hygiene
                let lo = j.saturating_sub(1);
                for i in lo..=j {
                    let hij = dot(&basis_vecs[i], &w);
                    h[(i, j)] = hij;
                    for (wv, xv) in w.iter_mut().zip(&basis_vecs[i]) {
                        *wv -= hij * xv;
                    }
                }
                for i in 0..j.saturating_sub(1) {
                    let c = dot(&basis_vecs[i], &w);
                    for (wv, xv) in w.iter_mut().zip(&basis_vecs[i]) {
                        *wv -= c * xv;
                    }
                }
            } else {
                for i in 0..=j {
                    let hij = dot(&basis_vecs[i], &w);
                    h[(i, j)] = hij;
                    for (wv, xv) in w.iter_mut().zip(&basis_vecs[i]) {
                        *wv -= hij * xv;
                    }
                }
                // second Gram-Schmidt pass
                for i in 0..=j {
                    let c = dot(&basis_vecs[i], &w);
                    h[(i, j)] += c;
                    for (wv, xv) in w.iter_mut().zip(&basis_vecs[i]) {
                        *wv -= c * xv;
                    }
                }
            }
            let hnext = norm(&w);
            h[(j + 1, j)] = Complex64::new(hnext, 0.0);
            if hnext < 1e-12 * beta {
                m_eff = j + 1; // invariant subspace: expansion is exact
                break;
            }
            basis_vecs.push(w.iter().map(|z| z / hnext).collect());
        }

        let exact = m_eff < m_max || m_eff == d;
        let (u_full, corr) = small_expv_with_correction(&h, m_eff, tau, !exact);
        let err = if exact { 0.0 } else { beta * corr };
        last_err = err;

        let tol_step = tol_total * (step / total).max(1e-12);
        if err > tol_step && step > total * 1e-12 {
            step *= 0.5;
            continue;
        }

        // assemble current = e^{-i tau shift} * beta * V u
        let phase = (Complex64::new(0.0, -tau) * shift).exp();
        for c in current.iter_mut() {
            *c = Complex64::ZERO;
        }
        for (i, col) in basis_vecs.iter().take(m_eff).enumerate() {
            let coeff = phase * beta * u_full[i];
            for (cv, xv) in current.iter_mut().zip(col) {
                *cv += coeff * xv;
            }
        }
        done += step;
        step *= 1.4;
    }
    Ok(current)
}

/// `exp(-i tau H_m) e_1` for the leading `m x m` block of the Hessenberg
/// matrix `h`, together with the magnitude of the first-order correction
/// term when requested. The correction comes from the standard augmented
/// matrix: appending a row that carries `h_{m+1,m}` and propagating `e_1`
/// through the extended exponential leaves the integrated correction
/// coefficient in the extra component.
fn small_expv_with_correction(
    h: &DMatrix<Complex64>,
    m: usize,
    tau: f64,
    with_correction: bool,
) -> (Vec<Complex64>, f64) {
    let ext = if with_correction { m + 1 } else { m };
    let mut hm = DMatrix::<Complex64>::zeros(ext, ext);
    for j in 0..m {
        for i in 0..m {
            hm[(i, j)] = h[(i, j)];
        }
    }
    if with_correction {
        hm[(m, m - 1)] = h[(m, m - 1)];
    }
    let gen = hm.map(|z| Complex64::new(0.0, -tau) * z);
    let u = gen.exp();
    let coeffs = (0..m).map(|i| u[(i, 0)]).collect();
    let corr = if with_correction { u[(m, 0)].norm() } else { 0.0 };
    (coeffs, corr)
}
