//! Matrix-free operators over an occupation basis.
//!
//! An [`Operator`] is a real diagonal plus a set of single-site flip terms,
//!
//! ```text
//! O = diag(d) + sum_i c_i * sigma_x_i,    sigma_x = |r><m| + |m><r|,
//! ```
//!
//! optionally extended by an anti-Hermitian decay diagonal `-i * diag(l)`
//! used for no-jump evolution. The diagonal covers detuning and interaction
//! terms; the flip terms cover the drive. Dense assembly is provided for
//! small-system cross-checks.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::hilbert::{Basis, StateVector};

/// Coefficient of `sigma_x` on one site.
#[derive(Copy, Clone, Debug, PartialEq)]
pub struct FlipTerm {
    pub site: usize,
    pub coeff: f64,
}

/// Hermitian operator in term-list form, with an optional anti-Hermitian
/// decay diagonal.
#[derive(Clone, Debug)]
pub struct Operator {
    basis: Arc<Basis>,
    diag: Vec<f64>,
    flips: Vec<FlipTerm>,
    loss_diag: Option<Vec<f64>>,
}

impl Operator {
    pub fn new(basis: Arc<Basis>, diag: Vec<f64>, flips: Vec<FlipTerm>) -> Result<Self> {
        if diag.len() != basis.dim() {
            return Err(SimError::Mismatch(format!(
                "diagonal length {} vs basis dim {}",
                diag.len(),
                basis.dim()
            )));
        }
        for f in &flips {
            if f.site >= basis.n_sites() {
                return Err(SimError::InvalidModel(format!("flip term on invalid site {}", f.site)));
            }
        }
        Ok(Self { basis, diag, flips, loss_diag: None })
    }

    /// Purely diagonal operator.
    pub fn diagonal(basis: Arc<Basis>, diag: Vec<f64>) -> Result<Self> {
        Self::new(basis, diag, Vec::new())
    }

    /// Number operator on one site, `n_i = |r><r|_i`.
    pub fn number(basis: &Arc<Basis>, site: usize) -> Result<Self> {
        if site >= basis.n_sites() {
            return Err(SimError::InvalidModel(format!("site {site} out of range")));
        }
        let diag = basis
            .configs()
            .iter()
            .map(|c| if c.is_excited(site) { 1.0 } else { 0.0 })
            .collect();
        Self::diagonal(Arc::clone(basis), diag)
    }

    /// Total excitation number `sum_i n_i`.
    pub fn number_total(basis: &Arc<Basis>) -> Self {
        let diag = basis.configs().iter().map(|c| c.excitation_count as f64).collect();
        Self::diagonal(Arc::clone(basis), diag).expect("lengths match by construction")
    }

    /// Pair correlator `n_i n_j`.
    pub fn number_pair(basis: &Arc<Basis>, i: usize, j: usize) -> Result<Self> {
        if i >= basis.n_sites() || j >= basis.n_sites() {
            return Err(SimError::InvalidModel(format!("pair ({i}, {j}) out of range")));
        }
        let diag = basis
            .configs()
            .iter()
            .map(|c| if c.is_excited(i) && c.is_excited(j) { 1.0 } else { 0.0 })
            .collect();
        Self::diagonal(Arc::clone(basis), diag)
    }

    /// Uniform transverse drive `coeff * sum_i sigma_x_i`.
    pub fn transverse(basis: &Arc<Basis>, coeff: f64) -> Self {
        let flips = (0..basis.n_sites()).map(|site| FlipTerm { site, coeff }).collect();
        Self::new(Arc::clone(basis), vec![0.0; basis.dim()], flips).expect("valid by construction")
    }

    /// Attach an anti-Hermitian decay diagonal: the effective operator
    /// becomes `O - i * diag(loss)`.
    pub fn with_loss(mut self, loss_diag: Vec<f64>) -> Result<Self> {
        if loss_diag.len() != self.basis.dim() {
            return Err(SimError::Mismatch(format!(
                "loss diagonal length {} vs basis dim {}",
                loss_diag.len(),
                self.basis.dim()
            )));
        }
        self.loss_diag = Some(loss_diag);
        Ok(self)
    }

    /// Uniform per-excitation decay: loss diagonal `(gamma/2) * N_n`.
    pub fn with_uniform_decay(self, gamma: f64) -> Self {
        let loss = self
            .basis
            .configs()
            .iter()
            .map(|c| 0.5 * gamma * c.excitation_count as f64)
            .collect();
        let basis_dim = self.basis.dim();
        debug_assert_eq!(basis_dim, self.diag.len());
        self.with_loss(loss).expect("lengths match by construction")
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn flips(&self) -> &[FlipTerm] {
        &self.flips
    }

    pub fn loss_diag(&self) -> Option<&[f64]> {
        self.loss_diag.as_deref()
    }

    /// True when an anti-Hermitian decay diagonal is attached.
    pub fn is_dissipative(&self) -> bool {
        self.loss_diag.is_some()
    }

    /// `y = O x` including the `-i * loss` part when present.
    pub fn apply(&self, x: &[Complex64], y: &mut [Complex64]) {
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        match &self.loss_diag {
            None => {
                for ((yv, xv), d) in y.iter_mut().zip(x).zip(&self.diag) {
                    *yv = d * xv;
                }
            }
            Some(loss) => {
                for (((yv, xv), d), l) in y.iter_mut().zip(x).zip(&self.diag).zip(loss) {
                    *yv = Complex64::new(*d, -*l) * xv;
                }
            }
        }
        let basis = &*self.basis;
        for f in &self.flips {
            if f.coeff == 0.0 {
                continue;
            }
            for idx in 0..x.len() {
                if let Some(t) = basis.flip_index(idx, f.site) {
                    y[t] += f.coeff * x[idx];
                }
            }
        }
    }

    /// Apply the Hermitian part only (ignores the decay diagonal).
    pub fn apply_hermitian(&self, x: &[Complex64], y: &mut [Complex64]) {
        for ((yv, xv), d) in y.iter_mut().zip(x).zip(&self.diag) {
            *yv = d * xv;
        }
        let basis = &*self.basis;
        for f in &self.flips {
            if f.coeff == 0.0 {
                continue;
            }
            for idx in 0..x.len() {
                if let Some(t) = basis.flip_index(idx, f.site) {
                    y[t] += f.coeff * x[idx];
                }
            }
        }
    }

    /// Normalized expectation value `<psi|O|psi> / <psi|psi>`.
    ///
    /// The imaginary residue must be negligible (Hermitian observable); it is
    /// checked and discarded. Dissipative operators are rejected.
    pub fn expectation(&self, state: &StateVector) -> Result<f64> {
        if self.is_dissipative() {
            return Err(SimError::InvalidModel(
                "expectation of a dissipative operator is not defined".into(),
            ));
        }
        if !Arc::ptr_eq(state.basis(), &self.basis) && state.basis().dim() != self.dim() {
            return Err(SimError::Mismatch("state and observable bases differ".into()));
        }
        let norm = state.norm_sq();
        if norm < 1e-300 {
            return Err(SimError::DegenerateState("expectation of zero-norm state".into()));
        }
        let x = state.amplitudes();
        let mut y = vec![Complex64::ZERO; x.len()];
        self.apply(x, &mut y);
        let val: Complex64 = x.iter().zip(&y).map(|(a, b)| a.conj() * b).sum();
        let scale = val.norm().max(norm);
        if val.im.abs() > 1e-10 * scale {
            return Err(SimError::InvalidModel(format!(
                "imaginary residue {:.3e} in expectation value",
                val.im
            )));
        }
        Ok(val.re / norm)
    }

    /// Dense assembly, including `-i * loss` on the diagonal. For small-system
    /// checks; cost is `O(dim^2)` in memory.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let d = self.dim();
        let mut m = DMatrix::<Complex64>::zeros(d, d);
        for (i, dv) in self.diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(*dv, 0.0);
        }
        if let Some(loss) = &self.loss_diag {
            for (i, l) in loss.iter().enumerate() {
                m[(i, i)] += Complex64::new(0.0, -*l);
            }
        }
        for f in &self.flips {
            for idx in 0..d {
                if let Some(t) = self.basis.flip_index(idx, f.site) {
                    m[(t, idx)] += Complex64::new(f.coeff, 0.0);
                }
            }
        }
        m
    }

    /// Dense real-symmetric assembly of the Hermitian part.
    pub fn to_dense_real(&self) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::<f64>::zeros(d, d);
        for (i, dv) in self.diag.iter().enumerate() {
            m[(i, i)] = *dv;
        }
        for f in &self.flips {
            for idx in 0..d {
                if let Some(t) = self.basis.flip_index(idx, f.site) {
                    m[(t, idx)] += f.coeff;
                }
            }
        }
        m
    }

    /// Mean of the complex diagonal, used as a spectral shift by the
    /// propagators.
    pub(crate) fn diag_mean(&self) -> Complex64 {
        let d = self.dim() as f64;
        let re: f64 = self.diag.iter().sum::<f64>() / d;
        let im: f64 = match &self.loss_diag {
            Some(loss) => -loss.iter().sum::<f64>() / d,
            None => 0.0,
        };
        Complex64::new(re, im)
    }
}
