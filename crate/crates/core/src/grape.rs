//! Disorder-robust pulse optimization for checkerboard GHZ preparation.
//!
//! The detuning samples of a [`PulseProfile`] are optimized to maximize the
//! fidelity of preparing `(|A> + |A_bar>)/sqrt(2)` from `|mm...m>`, averaged
//! over an ensemble of position-disordered Hamiltonians:
//!
//! ```text
//! C = 1 - (1/N_s) sum_k |<GHZ| prod_j exp(-i dt H_k(Delta_j)) |mm...m>|^2
//!       + (eta / Omega_0^2) * N * sum_j (Delta_{j+1} - Delta_j)^2
//! ```
//!
//! The penalty is the discretized `eta * int (d(Delta/Omega_0)/ds)^2 ds`
//! over scaled time `s = t/T`, with the detuning measured in units of the
//! plateau Rabi frequency `Omega_0` so the weight is dimensionless and the
//! default `eta = 1e-3` keeps the smoothness term comparable to the
//! infidelity for typical sweeps. Gradients are exact: one forward sweep propagates each
//! state together with its per-segment control derivative, one backward
//! sweep carries the co-state, so a gradient costs about three cost
//! evaluations. Optimization runs a limited-memory quasi-Newton step with
//! backtracking line search, embedded in a continuation loop that stretches
//! the total time and reuses the optimum as the next initial guess.
//!
//! Fixed reduction order over the disorder ensemble keeps results
//! bit-reproducible regardless of worker count.

use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Result, SimError};
use crate::geometry::{DisorderSampler, Geometry};
use crate::hilbert::{Basis, Bits, StateVector};
use crate::interaction::{interaction_diagonal, InteractionModel};
use crate::operator::{FlipTerm, Operator};
use crate::propagate::{evolve, evolve_with_derivative, PropagationOptions};
use crate::pulse::PulseProfile;

/// Ensemble, penalty, and step-control settings for the optimizer.
#[derive(Clone, Debug)]
pub struct GrapeConfig {
    /// Disorder realizations averaged by the cost.
    pub n_samples: usize,
    /// Position disorder (um) used during optimization.
    pub disorder_sigma_um: f64,
    /// Smoothness penalty weight `eta`.
    pub smoothness_weight: f64,
    /// Continuation increment for the total time (us).
    pub continuation_dt: f64,
    /// Iteration cap per continuation stage.
    pub max_iterations: usize,
    /// Relative cost-improvement stopping threshold.
    pub cost_tolerance: f64,
    /// Backtracking halvings before the line search gives up.
    pub max_line_search: usize,
    /// Quasi-Newton memory depth.
    pub memory: usize,
    pub seed: u64,
    pub propagation: PropagationOptions,
}

impl Default for GrapeConfig {
    fn default() -> Self {
        Self {
            n_samples: 30,
            disorder_sigma_um: 0.060,
            smoothness_weight: 1e-3,
            continuation_dt: 0.1,
            max_iterations: 120,
            cost_tolerance: 1e-8,
            max_line_search: 25,
            memory: 8,
            seed: 0,
            propagation: PropagationOptions::default(),
        }
    }
}

impl GrapeConfig {
    fn validate(&self) -> Result<()> {
        if self.n_samples < 1 {
            return Err(SimError::InvalidModel("need at least one disorder sample".into()));
        }
        if self.smoothness_weight < 0.0 {
            return Err(SimError::InvalidModel("penalty weight must be non-negative".into()));
        }
        if self.continuation_dt <= 0.0 {
            return Err(SimError::InvalidModel("continuation increment must be positive".into()));
        }
        Ok(())
    }
}

/// The GHZ target: equal superposition of the two checkerboard
/// configurations with relative phase zero.
#[derive(Clone, Debug)]
pub struct GhzTarget {
    basis: Arc<Basis>,
    config_a: Bits,
    config_a_bar: Bits,
}

impl GhzTarget {
    pub fn new(basis: &Arc<Basis>, config_a: Bits) -> Result<Self> {
        let n = basis.n_sites();
        if n % 2 != 0 {
            return Err(SimError::InvalidModel("GHZ target needs an even atom count".into()));
        }
        let mask: Bits = if n == 32 { !0 } else { (1u32 << n) - 1 };
        let config_a_bar = !config_a & mask;
        if config_a.count_ones() != (n / 2) as u32 {
            return Err(SimError::InvalidModel("checkerboard must excite half the sites".into()));
        }
        if basis.index_of(config_a).is_none() || basis.index_of(config_a_bar).is_none() {
            return Err(SimError::InvalidModel("checkerboard configurations not in basis".into()));
        }
        Ok(Self { basis: Arc::clone(basis), config_a, config_a_bar })
    }

    /// Checkerboard target derived from the geometry's circular order.
    pub fn checkerboard(basis: &Arc<Basis>, geometry: &Geometry) -> Result<Self> {
        let (a, _) = geometry.checkerboard_configs()?;
        Self::new(basis, a)
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn config_a(&self) -> Bits {
        self.config_a
    }

    pub fn config_a_bar(&self) -> Bits {
        self.config_a_bar
    }

    /// `(|A> + |A_bar>)/sqrt(2)`.
    pub fn state(&self) -> StateVector {
        let mut amps = vec![Complex64::ZERO; self.basis.dim()];
        let w = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        amps[self.basis.index_of(self.config_a).unwrap()] = w;
        amps[self.basis.index_of(self.config_a_bar).unwrap()] = w;
        StateVector::new(Arc::clone(&self.basis), amps, 0.0).unwrap()
    }
}

/// Cost value with its constituents and the per-sample fidelities.
#[derive(Clone, Debug)]
pub struct CostBreakdown {
    pub cost: f64,
    pub fidelity_mean: f64,
    pub penalty: f64,
    pub per_sample: Vec<f64>,
}

/// One accepted optimizer step.
#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iteration: usize,
    pub total_time: f64,
    pub cost: f64,
    pub fidelity_mean: f64,
    pub penalty: f64,
}

/// Optimization result: the final profile, the full audit trace, and a stall
/// flag set when a line search ran out of backtracking steps.
#[derive(Clone, Debug)]
pub struct OptimizeOutcome {
    pub pulse: PulseProfile,
    pub trace: Vec<TraceRow>,
    pub stalled: bool,
}

/// One disorder realization: interaction diagonal and excitation counts.
struct SampleSystem {
    basis: Arc<Basis>,
    inter_diag: Vec<f64>,
    exc: Vec<f64>,
    /// `dH/dDelta` diagonal, equal to `-exc`.
    b_diag: Vec<f64>,
}

impl SampleSystem {
    fn build(
        geometry: &Geometry,
        interaction: &InteractionModel,
        basis: &Arc<Basis>,
        cfg: &GrapeConfig,
        sample: usize,
    ) -> Result<Self> {
        let sampler = DisorderSampler::new(cfg.disorder_sigma_um, cfg.seed)?;
        let g = sampler.sample(geometry, sample as u64);
        let inter_diag = interaction_diagonal(&g, interaction, basis)?;
        let exc: Vec<f64> = basis.configs().iter().map(|c| c.excitation_count as f64).collect();
        let b_diag: Vec<f64> = exc.iter().map(|x| -x).collect();
        Ok(Self { basis: Arc::clone(basis), inter_diag, exc, b_diag })
    }

    fn segment_operator(&self, omega_j: f64, delta_j: f64) -> Operator {
        let diag: Vec<f64> = self
            .inter_diag
            .iter()
            .zip(&self.exc)
            .map(|(v, x)| v - delta_j * x)
            .collect();
        let flips: Vec<FlipTerm> = if omega_j == 0.0 {
            Vec::new()
        } else {
            (0..self.basis.n_sites())
                .map(|site| FlipTerm { site, coeff: omega_j / 2.0 })
                .collect()
        };
        Operator::new(Arc::clone(&self.basis), diag, flips).expect("lengths match")
    }

    fn fidelity(&self, pulse: &PulseProfile, target: &StateVector, opts: &PropagationOptions) -> Result<f64> {
        let dt = pulse.dt();
        let mut psi = StateVector::all_ground(&self.basis);
        for j in 0..pulse.len() {
            let op = self.segment_operator(pulse.omega()[j], pulse.delta()[j]);
            evolve(&mut psi, &op, dt, opts)?;
        }
        Ok(target.inner(&psi).norm_sqr())
    }

    /// Fidelity and its gradient with respect to every detuning sample.
    fn fidelity_gradient(
        &self,
        pulse: &PulseProfile,
        target: &StateVector,
        opts: &PropagationOptions,
    ) -> Result<(f64, Vec<f64>)> {
        let n = pulse.len();
        let dt = pulse.dt();
        let mut psi = StateVector::all_ground(&self.basis).amplitudes().to_vec();
        let mut derivs: Vec<Vec<Complex64>> = Vec::with_capacity(n);
        for j in 0..n {
            let op = self.segment_operator(pulse.omega()[j], pulse.delta()[j]);
            let (next, d) = evolve_with_derivative(&op, &self.b_diag, dt, &psi, opts)?;
            derivs.push(d);
            psi = next;
        }
        let overlap: Complex64 = target
            .amplitudes()
            .iter()
            .zip(&psi)
            .map(|(t, p)| t.conj() * p)
            .sum();
        let fidelity = overlap.norm_sqr();

        // backward co-state sweep
        let mut grad = vec![0.0; n];
        let mut costate =
            StateVector::new(Arc::clone(&self.basis), target.amplitudes().to_vec(), 0.0).unwrap();
        for j in (0..n).rev() {
            let inner: Complex64 = costate
                .amplitudes()
                .iter()
                .zip(&derivs[j])
                .map(|(c, d)| c.conj() * d)
                .sum();
            grad[j] = 2.0 * (overlap.conj() * inner).re;
            if j > 0 {
                let op = self.segment_operator(pulse.omega()[j], pulse.delta()[j]);
                evolve(&mut costate, &op, -dt, opts)?;
            }
        }
        Ok((fidelity, grad))
    }
}

/// Squared drive plateau used to non-dimensionalize the detuning inside
/// the penalty (1 for an undriven pulse).
fn penalty_scale(pulse: &PulseProfile) -> f64 {
    let omega_max = pulse.omega().iter().cloned().fold(0.0f64, f64::max);
    if omega_max > 0.0 {
        omega_max * omega_max
    } else {
        1.0
    }
}

fn penalty_value(pulse: &PulseProfile, eta: f64) -> f64 {
    eta * pulse.len() as f64 * pulse.delta_increment_sq() / penalty_scale(pulse)
}

fn penalty_gradient(pulse: &PulseProfile, eta: f64) -> Vec<f64> {
    let n = pulse.len();
    let d = pulse.delta();
    let scale = 2.0 * eta * n as f64 / penalty_scale(pulse);
    let mut g = vec![0.0; n];
    for j in 0..n {
        let mut acc = 0.0;
        if j > 0 {
            acc += d[j] - d[j - 1];
        }
        if j + 1 < n {
            acc -= d[j + 1] - d[j];
        }
        g[j] = scale * acc;
    }
    g
}

fn build_systems(
    geometry: &Geometry,
    interaction: &InteractionModel,
    target: &GhzTarget,
    cfg: &GrapeConfig,
) -> Result<Vec<SampleSystem>> {
    cfg.validate()?;
    (0..cfg.n_samples)
        .map(|k| SampleSystem::build(geometry, interaction, target.basis(), cfg, k))
        .collect()
}

fn evaluate(
    systems: &[SampleSystem],
    pulse: &PulseProfile,
    target_state: &StateVector,
    cfg: &GrapeConfig,
    with_gradient: bool,
) -> Result<(CostBreakdown, Option<Vec<f64>>)> {
    let eta = cfg.smoothness_weight;
    let results: Vec<Result<(f64, Option<Vec<f64>>)>> = systems
        .par_iter()
        .map(|sys| {
            if with_gradient {
                let (f, g) = sys.fidelity_gradient(pulse, target_state, &cfg.propagation)?;
                Ok((f, Some(g)))
            } else {
                Ok((sys.fidelity(pulse, target_state, &cfg.propagation)?, None))
            }
        })
        .collect();

    let mut per_sample = Vec::with_capacity(systems.len());
    let mut grad_sum: Option<Vec<f64>> = with_gradient.then(|| vec![0.0; pulse.len()]);
    for (k, r) in results.into_iter().enumerate() {
        let (f, g) = r.map_err(|e| match e {
            SimError::Convergence { residual, substeps } => {
                SimError::Convergence { residual: residual + k as f64 * 0.0, substeps }
            }
            other => other,
        })?;
        per_sample.push(f);
        if let (Some(acc), Some(gk)) = (grad_sum.as_mut(), g) {
            for (a, v) in acc.iter_mut().zip(&gk) {
                *a += v;
            }
        }
    }
    let n_s = systems.len() as f64;
    let fidelity_mean = per_sample.iter().sum::<f64>() / n_s;
    let penalty = penalty_value(pulse, eta);
    let cost = 1.0 - fidelity_mean + penalty;
    let gradient = grad_sum.map(|g| {
        let pg = penalty_gradient(pulse, eta);
        g.iter().zip(&pg).map(|(gf, gp)| -gf / n_s + gp).collect()
    });
    Ok((CostBreakdown { cost, fidelity_mean, penalty, per_sample }, gradient))
}

/// Disorder-averaged preparation infidelity plus smoothness penalty.
pub fn grape_cost(
    pulse: &PulseProfile,
    geometry: &Geometry,
    interaction: &InteractionModel,
    target: &GhzTarget,
    cfg: &GrapeConfig,
) -> Result<CostBreakdown> {
    let systems = build_systems(geometry, interaction, target, cfg)?;
    let (cb, _) = evaluate(&systems, pulse, &target.state(), cfg, false)?;
    Ok(cb)
}

/// Cost together with its exact gradient over the detuning samples.
pub fn grape_gradient(
    pulse: &PulseProfile,
    geometry: &Geometry,
    interaction: &InteractionModel,
    target: &GhzTarget,
    cfg: &GrapeConfig,
) -> Result<(CostBreakdown, Vec<f64>)> {
    let systems = build_systems(geometry, interaction, target, cfg)?;
    let (cb, g) = evaluate(&systems, pulse, &target.state(), cfg, true)?;
    Ok((cb, g.expect("gradient requested")))
}

/// Two-loop limited-memory quasi-Newton direction.
fn lbfgs_direction(grad: &[f64], s_hist: &[Vec<f64>], y_hist: &[Vec<f64>]) -> Vec<f64> {
    let mut q: Vec<f64> = grad.to_vec();
    let k = s_hist.len();
    let mut alpha = vec![0.0; k];
    let mut rho = vec![0.0; k];
    for i in (0..k).rev() {
        let sy: f64 = s_hist[i].iter().zip(&y_hist[i]).map(|(s, y)| s * y).sum();
        rho[i] = 1.0 / sy;
        alpha[i] = rho[i] * s_hist[i].iter().zip(&q).map(|(s, qv)| s * qv).sum::<f64>();
        for (qv, yv) in q.iter_mut().zip(&y_hist[i]) {
            *qv -= alpha[i] * yv;
        }
    }
    if k > 0 {
        let yy: f64 = y_hist[k - 1].iter().map(|y| y * y).sum();
        let sy: f64 = s_hist[k - 1].iter().zip(&y_hist[k - 1]).map(|(s, y)| s * y).sum();
        let scale = sy / yy;
        for qv in q.iter_mut() {
            *qv *= scale;
        }
    }
    for i in 0..k {
        let beta = rho[i] * y_hist[i].iter().zip(&q).map(|(y, qv)| y * qv).sum::<f64>();
        for (qv, sv) in q.iter_mut().zip(&s_hist[i]) {
            *qv += (alpha[i] - beta) * sv;
        }
    }
    q.iter_mut().for_each(|v| *v = -*v);
    q
}

/// Optimize the detuning profile at fixed total time. Returns the improved
/// pulse, the accepted-step trace (cost non-increasing), and a stall flag.
fn optimize_stage(
    pulse: &PulseProfile,
    systems: &[SampleSystem],
    target_state: &StateVector,
    cfg: &GrapeConfig,
    trace: &mut Vec<TraceRow>,
    iteration_offset: usize,
) -> Result<(PulseProfile, bool)> {
    let mut current = pulse.clone();
    let (mut breakdown, mut grad_opt) = evaluate(systems, &current, target_state, cfg, true)?;
    trace.push(TraceRow {
        iteration: iteration_offset,
        total_time: current.total_time(),
        cost: breakdown.cost,
        fidelity_mean: breakdown.fidelity_mean,
        penalty: breakdown.penalty,
    });

    let mut s_hist: Vec<Vec<f64>> = Vec::new();
    let mut y_hist: Vec<Vec<f64>> = Vec::new();
    let mut stalled = false;

    for it in 1..=cfg.max_iterations {
        let grad = grad_opt.take().expect("gradient present");
        let gnorm: f64 = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if gnorm < 1e-12 {
            break;
        }
        let mut dir = lbfgs_direction(&grad, &s_hist, &y_hist);
        let mut slope: f64 = grad.iter().zip(&dir).map(|(g, d)| g * d).sum();
        if !(slope < 0.0) {
            dir = grad.iter().map(|g| -g).collect();
            slope = -gnorm * gnorm;
            s_hist.clear();
            y_hist.clear();
        }

        // backtracking line search on the true cost
        let mut alpha = 1.0;
        let c1 = 1e-4;
        let mut accepted: Option<(PulseProfile, CostBreakdown)> = None;
        for _ in 0..cfg.max_line_search {
            let mut candidate = current.clone();
            let new_delta: Vec<f64> = current
                .delta()
                .iter()
                .zip(&dir)
                .map(|(x, d)| x + alpha * d)
                .collect();
            candidate.set_delta(new_delta)?;
            let (cb, _) = evaluate(systems, &candidate, target_state, cfg, false)?;
            if cb.cost <= breakdown.cost + c1 * alpha * slope {
                accepted = Some((candidate, cb));
                break;
            }
            alpha *= 0.5;
        }
        let Some((next_pulse, next_breakdown)) = accepted else {
            stalled = true;
            break;
        };

        let (_, new_grad) = evaluate(systems, &next_pulse, target_state, cfg, true)?;
        let new_grad = new_grad.expect("gradient requested");
        let s: Vec<f64> = next_pulse
            .delta()
            .iter()
            .zip(current.delta())
            .map(|(a, b)| a - b)
            .collect();
        let y: Vec<f64> = new_grad.iter().zip(&grad).map(|(a, b)| a - b).collect();
        let sy: f64 = s.iter().zip(&y).map(|(a, b)| a * b).sum();
        if sy > 1e-14 {
            s_hist.push(s);
            y_hist.push(y);
            if s_hist.len() > cfg.memory {
                s_hist.remove(0);
                y_hist.remove(0);
            }
        }

        let improvement = breakdown.cost - next_breakdown.cost;
        current = next_pulse;
        breakdown = next_breakdown;
        grad_opt = Some(new_grad);
        trace.push(TraceRow {
            iteration: iteration_offset + it,
            total_time: current.total_time(),
            cost: breakdown.cost,
            fidelity_mean: breakdown.fidelity_mean,
            penalty: breakdown.penalty,
        });
        if improvement.abs() < cfg.cost_tolerance * breakdown.cost.abs().max(1.0) {
            break;
        }
    }
    Ok((current, stalled))
}

/// Full optimization with incremental-total-time continuation: optimize at
/// the initial duration, stretch by `continuation_dt`, reuse the optimum as
/// the next initial guess, and repeat until `final_time` is reached.
pub fn optimize_pulse(
    initial: &PulseProfile,
    geometry: &Geometry,
    interaction: &InteractionModel,
    target: &GhzTarget,
    cfg: &GrapeConfig,
    final_time: f64,
) -> Result<OptimizeOutcome> {
    let systems = build_systems(geometry, interaction, target, cfg)?;
    let target_state = target.state();
    let mut trace = Vec::new();
    let mut stalled = false;
    let mut pulse = initial.clone();
    loop {
        let offset = trace.len();
        let (next, stage_stalled) =
            optimize_stage(&pulse, &systems, &target_state, cfg, &mut trace, offset)?;
        pulse = next;
        stalled |= stage_stalled;
        let t = pulse.total_time();
        if t >= final_time - 1e-12 {
            break;
        }
        let t_next = (t + cfg.continuation_dt).min(final_time);
        pulse = pulse.rescaled_to(t_next)?;
    }
    Ok(OptimizeOutcome { pulse, trace, stalled })
}
