//! Measurement-error correction through the per-qubit measurement matrix.
//!
//! Observed spin counts relate to the true counts by
//!
//! ```text
//! (N0', N1')^T = M (N0, N1)^T,   M = [[1 - eps00, eps10], [eps01, 1 - eps11]],
//! ```
//!
//! with no column normalization assumed: the readout also loses atoms, so
//! columns may sum below one. Multi-qubit counts use the Kronecker power
//! `M ⊗ ... ⊗ M`. Correction solves the non-negative least-squares problem
//! `min_{c >= 0} ||observed - M c||`, which inverts `M` exactly on clean
//! counts and stays sane on noisy ones.

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};

/// Per-qubit readout error matrix in the `(0, 1)` spin basis.
#[derive(Copy, Clone, Debug, serde::Serialize, serde::Deserialize)]
pub struct MeasurementMatrix {
    /// Probability a true 0 is not observed as 0 (mislabeled or lost).
    pub eps00: f64,
    /// Probability a true 0 is observed as 1.
    pub eps01: f64,
    /// Probability a true 1 is observed as 0.
    pub eps10: f64,
    /// Probability a true 1 is not observed as 1.
    pub eps11: f64,
}

impl MeasurementMatrix {
    pub fn identity() -> Self {
        Self { eps00: 0.0, eps01: 0.0, eps10: 0.0, eps11: 0.0 }
    }

    /// Entries derived from the measured three-outcome detection table
    /// (true 0 observed 0: 94.9%, true 0 observed 1: 0.70%, true 1 observed
    /// 1: 96.9%, true 1 observed 0: 0.18%; the remainder of each column is
    /// loss).
    pub fn observed_table() -> Self {
        Self { eps00: 1.0 - 0.949, eps01: 0.0070, eps10: 0.0018, eps11: 1.0 - 0.969 }
    }

    /// Same matrix with the spin-flip entries zeroed (loss imbalance only).
    pub fn without_spin_flips(&self) -> Self {
        Self { eps01: 0.0, eps10: 0.0, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("eps00", self.eps00),
            ("eps01", self.eps01),
            ("eps10", self.eps10),
            ("eps11", self.eps11),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return Err(SimError::InvalidModel(format!("{name} = {v} outside [0, 1]")));
            }
        }
        Ok(())
    }

    /// 2x2 matrix, columns indexed by the true state.
    pub fn matrix(&self) -> DMatrix<f64> {
        DMatrix::from_row_slice(2, 2, &[1.0 - self.eps00, self.eps10, self.eps01, 1.0 - self.eps11])
    }

    /// `M ⊗ ... ⊗ M` over `n_qubits`.
    pub fn kron_power(&self, n_qubits: usize) -> DMatrix<f64> {
        let m = self.matrix();
        let mut acc = DMatrix::<f64>::identity(1, 1);
        for _ in 0..n_qubits {
            acc = acc.kronecker(&m);
        }
        acc
    }

    /// Forward-apply the readout model to true counts.
    pub fn apply(&self, counts: &[f64], n_qubits: usize) -> Result<Vec<f64>> {
        let m = self.kron_power(n_qubits);
        if counts.len() != m.ncols() {
            return Err(SimError::Mismatch(format!(
                "expected {} counts for {n_qubits} qubits, got {}",
                m.ncols(),
                counts.len()
            )));
        }
        let v = m * DVector::from_column_slice(counts);
        Ok(v.as_slice().to_vec())
    }
}

/// Corrected counts with the least-squares residual.
#[derive(Clone, Debug)]
pub struct CorrectedCounts {
    pub counts: Vec<f64>,
    pub residual: f64,
}

/// Infer true counts from observed counts: non-negative least squares
/// against the Kronecker-power measurement matrix.
pub fn correct_measurement(
    observed: &[f64],
    matrix: &MeasurementMatrix,
    n_qubits: usize,
) -> Result<CorrectedCounts> {
    matrix.validate()?;
    if observed.iter().any(|&c| c < 0.0) {
        return Err(SimError::InvalidModel("observed counts must be non-negative".into()));
    }
    let m = matrix.kron_power(n_qubits);
    if observed.len() != m.ncols() {
        return Err(SimError::Mismatch(format!(
            "expected {} counts for {n_qubits} qubits, got {}",
            m.ncols(),
            observed.len()
        )));
    }
    // conditioning check
    let svd = m.clone().svd(false, false);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 1e-10 * smax {
        return Err(SimError::Conditioning(format!(
            "singular value ratio {:.3e}",
            smin / smax
        )));
    }
    let b = DVector::from_column_slice(observed);
    let x = nnls(&m, &b)?;
    let residual = (&m * &x - &b).norm();
    Ok(CorrectedCounts { counts: x.as_slice().to_vec(), residual })
}

/// Lawson-Hanson active-set non-negative least squares. Dimensions here are
/// tiny (at most 2^n for a few qubits), so the dense normal-equation solves
/// are free.
fn nnls(m: &DMatrix<f64>, b: &DVector<f64>) -> Result<DVector<f64>> {
    let n = m.ncols();
    let mut passive = vec![false; n];
    let mut x = DVector::<f64>::zeros(n);
    let tol = 1e-12 * m.norm() * b.norm().max(1.0);
    for _outer in 0..(4 * n * n + 10) {
        let w = m.transpose() * (b - m * &x);
        let mut best: Option<(usize, f64)> = None;
        for i in 0..n {
            if !passive[i] && w[i] > tol {
                if best.map(|(_, bw)| w[i] > bw).unwrap_or(true) {
                    best = Some((i, w[i]));
                }
            }
        }
        let Some((j, _)) = best else {
            return Ok(x);
        };
        passive[j] = true;
        loop {
            // least squares restricted to the passive set
            let cols: Vec<usize> = (0..n).filter(|&i| passive[i]).collect();
            let mp = m.select_columns(cols.iter());
            let sol = mp
                .clone()
                .svd(true, true)
                .solve(b, 1e-14)
                .map_err(|e| SimError::Conditioning(e.to_string()))?;
            if sol.iter().all(|&v| v > 0.0) {
                x.fill(0.0);
                for (k, &c) in cols.iter().enumerate() {
                    x[c] = sol[k];
                }
                break;
            }
            // backtrack toward feasibility
            let mut alpha = f64::INFINITY;
            for (k, &c) in cols.iter().enumerate() {
                if sol[k] <= 0.0 {
                    let a = x[c] / (x[c] - sol[k]);
                    alpha = alpha.min(a);
                }
            }
            for (k, &c) in cols.iter().enumerate() {
                x[c] += alpha * (sol[k] - x[c]);
                if x[c] <= tol.max(1e-300) {
                    x[c] = 0.0;
                    passive[c] = false;
                }
            }
        }
    }
    Err(SimError::Conditioning("non-negative least squares failed to converge".into()))
}
