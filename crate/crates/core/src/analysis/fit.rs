//! Weighted least-squares fits for benchmarking and decay data.
//!
//! Two model families: the randomized-benchmarking form `a p^l + b` with the
//! asymptote `b` fixed by the detection scheme (0, 1/4, 1/2) or left free,
//! and the exponential decay `a exp(-x/tau)`. Both use Levenberg-Marquardt
//! with analytic Jacobians; parameter errors come from the scaled inverse
//! normal matrix (one standard deviation).

use nalgebra::{DMatrix, DVector};

use crate::error::{Result, SimError};

/// Choice of the benchmarking asymptote.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum BMode {
    /// Leakage-dominated detection: success decays to zero.
    Zero,
    /// Loss detection on two qubits: one of four basis states survives.
    Quarter,
    /// Loss detection on one qubit.
    Half,
    Free,
}

impl BMode {
    fn fixed_value(&self) -> Option<f64> {
        match self {
            BMode::Zero => Some(0.0),
            BMode::Quarter => Some(0.25),
            BMode::Half => Some(0.5),
            BMode::Free => None,
        }
    }
}

/// Benchmarking fit `a p^l + b` with the per-gate error `(1-b)(1-p)`.
#[derive(Copy, Clone, Debug)]
pub struct RbFit {
    pub a: f64,
    pub p: f64,
    pub b: f64,
    pub a_err: f64,
    pub p_err: f64,
    pub b_err: f64,
    pub error_per_gate: f64,
    pub error_per_gate_err: f64,
    /// Set when `p` leaves `(0, 1]` or the data carry no decay signal.
    pub degenerate: bool,
}

/// Exponential decay fit `a exp(-x/tau)`.
#[derive(Copy, Clone, Debug)]
pub struct ExpFit {
    pub a: f64,
    pub tau: f64,
    pub a_err: f64,
    pub tau_err: f64,
    /// Set when the data do not decay; `tau` is then the infinite sentinel.
    pub diverged: bool,
}

fn weights_from(sigma: Option<&[f64]>, n: usize) -> Result<Vec<f64>> {
    match sigma {
        None => Ok(vec![1.0; n]),
        Some(s) => {
            if s.len() != n {
                return Err(SimError::Mismatch("sigma length differs from data".into()));
            }
            if s.iter().any(|&v| v <= 0.0) {
                return Err(SimError::InvalidModel("sigmas must be positive".into()));
            }
            Ok(s.iter().map(|&v| 1.0 / (v * v)).collect())
        }
    }
}

/// Generic Levenberg-Marquardt on a residual/Jacobian closure.
/// `model(params, x) -> (value, gradient over params)`.
fn levenberg_marquardt(
    x: &[f64],
    y: &[f64],
    w: &[f64],
    mut params: Vec<f64>,
    model: &dyn Fn(&[f64], f64) -> (f64, Vec<f64>),
    scale_errors: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let n = x.len();
    let k = params.len();
    let chi2 = |p: &[f64]| -> f64 {
        x.iter()
            .zip(y)
            .zip(w)
            .map(|((&xi, &yi), &wi)| {
                let (m, _) = model(p, xi);
                wi * (yi - m) * (yi - m)
            })
            .sum()
    };
    let mut lambda = 1e-3;
    let mut current = chi2(&params);
    for _ in 0..400 {
        // normal equations
        let mut jtj = DMatrix::<f64>::zeros(k, k);
        let mut jtr = DVector::<f64>::zeros(k);
        for ((&xi, &yi), &wi) in x.iter().zip(y).zip(w) {
            let (m, g) = model(&params, xi);
            let r = yi - m;
            for a in 0..k {
                jtr[a] += wi * g[a] * r;
                for b in 0..k {
                    jtj[(a, b)] += wi * g[a] * g[b];
                }
            }
        }
        let mut damped = jtj.clone();
        for a in 0..k {
            damped[(a, a)] *= 1.0 + lambda;
            damped[(a, a)] += 1e-300;
        }
        let Some(step) = damped.lu().solve(&jtr) else {
            lambda *= 10.0;
            continue;
        };
        let trial: Vec<f64> = params.iter().zip(step.iter()).map(|(p, s)| p + s).collect();
        let trial_chi2 = chi2(&trial);
        if trial_chi2 <= current {
            let rel = (current - trial_chi2) / current.max(1e-300);
            let step_small = step.norm() < 1e-14 * (1.0 + DVector::from_column_slice(&params).norm());
            params = trial;
            current = trial_chi2;
            lambda = (lambda * 0.3).max(1e-12);
            if rel < 1e-15 || step_small {
                break;
            }
        } else {
            lambda *= 10.0;
            if lambda > 1e12 {
                break;
            }
        }
    }
    // covariance from the undamped normal matrix
    let mut jtj = DMatrix::<f64>::zeros(k, k);
    for (&xi, &wi) in x.iter().zip(w) {
        let (_, g) = model(&params, xi);
        for a in 0..k {
            for b in 0..k {
                jtj[(a, b)] += wi * g[a] * g[b];
            }
        }
    }
    let cov = jtj
        .try_inverse()
        .unwrap_or_else(|| DMatrix::from_element(k, k, f64::INFINITY));
    let dof = n.saturating_sub(k).max(1) as f64;
    let scale = if scale_errors { current / dof } else { 1.0 };
    let errs: Vec<f64> = (0..k).map(|a| (cov[(a, a)] * scale).max(0.0).sqrt()).collect();
    Ok((params, errs))
}

/// Fit success-vs-depth data to `a p^l + b`.
pub fn fit_rb(depths: &[f64], success: &[f64], sigma: Option<&[f64]>, b_mode: BMode) -> Result<RbFit> {
    let n = depths.len();
    if n < 3 || success.len() != n {
        return Err(SimError::FitFailure("need at least 3 depth points".into()));
    }
    if success.iter().any(|&s| !(-0.5..=1.5).contains(&s)) {
        return Err(SimError::FitFailure("success probabilities outside [0, 1] range".into()));
    }
    let w = weights_from(sigma, n)?;

    let b_fixed = b_mode.fixed_value();
    // initial guess from a log-linear fit of (y - b)
    let b0 = b_fixed.unwrap_or_else(|| {
        let min = success.iter().cloned().fold(f64::INFINITY, f64::min);
        (min - 0.01).max(0.0)
    });
    let spread = {
        let max = success.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        let min = success.iter().cloned().fold(f64::INFINITY, f64::min);
        max - min
    };
    if spread < 1e-12 {
        // flat data: a ~ 0, no decay information
        let b_out = b_fixed.unwrap_or(success[0]);
        return Ok(RbFit {
            a: success[0] - b_out,
            p: 1.0,
            b: b_out,
            a_err: 0.0,
            p_err: 0.0,
            b_err: 0.0,
            error_per_gate: 0.0,
            error_per_gate_err: 0.0,
            degenerate: true,
        });
    }
    let (mut a0, mut p0) = (f64::NAN, f64::NAN);
    {
        let mut sx = 0.0;
        let mut sy = 0.0;
        let mut sxx = 0.0;
        let mut sxy = 0.0;
        let mut cnt = 0.0;
        for (&l, &s) in depths.iter().zip(success) {
            let v = s - b0;
            if v > 1e-9 {
                sx += l;
                sy += v.ln();
                sxx += l * l;
                sxy += l * v.ln();
                cnt += 1.0;
            }
        }
        if cnt >= 2.0 && (cnt * sxx - sx * sx).abs() > 1e-300 {
            let slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
            let inter = (sy - slope * sx) / cnt;
            p0 = slope.exp().clamp(1e-6, 1.0);
            a0 = inter.exp();
        }
    }
    if !p0.is_finite() {
        p0 = 0.9;
    }
    if !a0.is_finite() {
        a0 = (success[0] - b0).max(0.1);
    }

    let (params, errs) = match b_fixed {
        Some(bv) => {
            let model = move |p: &[f64], l: f64| -> (f64, Vec<f64>) {
                let (a, q) = (p[0], p[1]);
                let ql = q.abs().max(1e-300).powf(l) * if q < 0.0 && l as i64 % 2 == 1 { -1.0 } else { 1.0 };
                let dp = if l == 0.0 { 0.0 } else { a * l * q.abs().max(1e-300).powf(l - 1.0) };
                (a * ql + bv, vec![ql, dp])
            };
            let (p, e) = levenberg_marquardt(depths, success, &w, vec![a0, p0], &model, sigma.is_none())?;
            (vec![p[0], p[1], bv], vec![e[0], e[1], 0.0])
        }
        None => {
            let model = |p: &[f64], l: f64| -> (f64, Vec<f64>) {
                let (a, q, b) = (p[0], p[1], p[2]);
                let ql = q.abs().max(1e-300).powf(l) * if q < 0.0 && l as i64 % 2 == 1 { -1.0 } else { 1.0 };
                let dp = if l == 0.0 { 0.0 } else { a * l * q.abs().max(1e-300).powf(l - 1.0) };
                (a * ql + b, vec![ql, dp, 1.0])
            };
            levenberg_marquardt(depths, success, &w, vec![a0, p0, b0], &model, sigma.is_none())?
        }
    };
    let (a, p, b) = (params[0], params[1], params[2]);
    let degenerate = !(0.0 < p && p <= 1.0 + 1e-12) || a.abs() < 1e-9;
    let error_per_gate = (1.0 - b) * (1.0 - p);
    let epg_err = ((1.0 - b).powi(2) * errs[1].powi(2) + (1.0 - p).powi(2) * errs[2].powi(2)).sqrt();
    Ok(RbFit {
        a,
        p,
        b,
        a_err: errs[0],
        p_err: errs[1],
        b_err: errs[2],
        error_per_gate,
        error_per_gate_err: epg_err,
        degenerate,
    })
}

/// Fit `a exp(-x/tau)`, with the infinite-tau sentinel for flat data.
pub fn fit_exponential(x: &[f64], y: &[f64], sigma: Option<&[f64]>) -> Result<ExpFit> {
    let n = x.len();
    if n < 3 || y.len() != n {
        return Err(SimError::FitFailure("need at least 3 points".into()));
    }
    let w = weights_from(sigma, n)?;
    // log-linear initialization
    let mut sx = 0.0;
    let mut sy = 0.0;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut cnt = 0.0;
    for (&xi, &yi) in x.iter().zip(y) {
        if yi > 0.0 {
            sx += xi;
            sy += yi.ln();
            sxx += xi * xi;
            sxy += xi * yi.ln();
            cnt += 1.0;
        }
    }
    if cnt < 2.0 {
        return Err(SimError::FitFailure("not enough positive samples".into()));
    }
    let denom = cnt * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return Err(SimError::FitFailure("degenerate abscissa".into()));
    }
    let slope = (cnt * sxy - sx * sy) / denom;
    if slope >= -1e-14 {
        return Ok(ExpFit { a: y[0], tau: f64::INFINITY, a_err: 0.0, tau_err: 0.0, diverged: true });
    }
    let a0 = ((sy - slope * sx) / cnt).exp();
    let tau0 = -1.0 / slope;
    let model = |p: &[f64], xi: f64| -> (f64, Vec<f64>) {
        let (a, tau) = (p[0], p[1]);
        let e = (-xi / tau).exp();
        (a * e, vec![e, a * e * xi / (tau * tau)])
    };
    let (params, errs) = levenberg_marquardt(x, y, &w, vec![a0, tau0], &model, sigma.is_none())?;
    Ok(ExpFit { a: params[0], tau: params[1], a_err: errs[0], tau_err: errs[1], diverged: false })
}
