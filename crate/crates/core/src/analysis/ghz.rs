//! GHZ fidelity, global parity scans, and the parity-offset coherence bound.
//!
//! The GHZ fidelity of a state `rho` splits into populations and coherence,
//!
//! ```text
//! F = (rho_AA + rho_AbarAbar)/2 + Re(rho_AAbar),
//! ```
//!
//! over the two checkerboard configurations. With global control only, the
//! coherence is reached through the parity measured after a phase shift
//! `U(phi) = exp(-i phi sum_i n_i)` and a global pi/2 rotation:
//!
//! ```text
//! Pi(phi) = sum_n (-1)^{N_n + N/2} rho_{n nbar} exp(-i phi (N_n - N_nbar)).
//! ```
//!
//! Averaging over a uniform phi grid kills every oscillating term whose
//! `|N_n - N_nbar|` is not a multiple of the grid size, leaving the offset
//! `2 Re(rho_AAbar) + sum_{m in S_A} rho_{m mbar}` with `S_A` the half-filled
//! configurations other than `A`, `Abar`; Cauchy-Schwarz on the residual sum
//! turns the offset into a coherence lower bound. The sum over `S_A`
//! excludes the pair `{A, Abar}` itself so the bound saturates at 1 for the
//! ideal GHZ state.

use num_complex::Complex64;

use crate::error::{Result, SimError};
use crate::grape::GhzTarget;
use crate::hilbert::{Basis, Bits, StateVector};
use std::sync::Arc;

/// Classical mixture of pure states on a shared basis. Most analyses run on
/// pure simulation output; incoherent backgrounds enter as extra components.
#[derive(Clone, Debug)]
pub struct StateMixture {
    components: Vec<(f64, StateVector)>,
}

impl StateMixture {
    pub fn pure(state: StateVector) -> Self {
        Self { components: vec![(1.0, state)] }
    }

    pub fn new(components: Vec<(f64, StateVector)>) -> Result<Self> {
        if components.is_empty() {
            return Err(SimError::InvalidModel("mixture needs at least one component".into()));
        }
        let dim = components[0].1.basis().dim();
        let mut total = 0.0;
        for (w, s) in &components {
            if *w < 0.0 {
                return Err(SimError::InvalidModel("mixture weights must be non-negative".into()));
            }
            if s.basis().dim() != dim {
                return Err(SimError::Mismatch("mixture components on different bases".into()));
            }
            total += w;
        }
        if (total - 1.0).abs() > 1e-9 {
            return Err(SimError::InvalidModel(format!("mixture weights sum to {total}")));
        }
        Ok(Self { components })
    }

    pub fn basis(&self) -> &Arc<Basis> {
        self.components[0].1.basis()
    }

    pub fn components(&self) -> &[(f64, StateVector)] {
        &self.components
    }

    /// Density-matrix element `<i| rho |j>` by basis index.
    pub fn rho_element(&self, i: usize, j: usize) -> Complex64 {
        self.components
            .iter()
            .map(|(w, s)| {
                let a = s.amplitudes();
                *w * a[i] * a[j].conj()
            })
            .sum()
    }

    /// Population of the configuration at basis index `idx`.
    pub fn population_by_index(&self, idx: usize) -> f64 {
        self.components
            .iter()
            .map(|(w, s)| w * s.amplitudes()[idx].norm_sqr())
            .sum()
    }

    /// Population of a configuration by bit pattern (0 outside the basis).
    pub fn population(&self, bits: Bits) -> f64 {
        match self.basis().index_of(bits) {
            Some(idx) => self.population_by_index(idx),
            None => 0.0,
        }
    }

    /// `rho` element between two configurations (0 when either is outside
    /// the basis).
    pub fn rho_element_bits(&self, bra: Bits, ket: Bits) -> Complex64 {
        match (self.basis().index_of(bra), self.basis().index_of(ket)) {
            (Some(i), Some(j)) => self.rho_element(i, j),
            _ => Complex64::ZERO,
        }
    }
}

impl From<StateVector> for StateMixture {
    fn from(s: StateVector) -> Self {
        Self::pure(s)
    }
}

/// GHZ fidelity and its components.
#[derive(Copy, Clone, Debug)]
pub struct GhzFidelity {
    pub fidelity: f64,
    pub population_a: f64,
    pub population_a_bar: f64,
    pub coherence_re: f64,
}

/// Exact GHZ fidelity `F = (rho_AA + rho_AbarAbar)/2 + Re(rho_AAbar)`.
pub fn ghz_fidelity(state: &StateMixture, target: &GhzTarget) -> Result<GhzFidelity> {
    if state.basis().dim() != target.basis().dim() {
        return Err(SimError::Mismatch("state and target bases differ".into()));
    }
    let population_a = state.population(target.config_a());
    let population_a_bar = state.population(target.config_a_bar());
    let coherence_re = state.rho_element_bits(target.config_a(), target.config_a_bar()).re;
    Ok(GhzFidelity {
        fidelity: 0.5 * (population_a + population_a_bar) + coherence_re,
        population_a,
        population_a_bar,
        coherence_re,
    })
}

/// Parity values on a phase grid.
#[derive(Clone, Debug)]
pub struct ParityScan {
    pub phis: Vec<f64>,
    pub values: Vec<f64>,
}

/// Uniform grid of `n` phases on `[0, 2 pi)`.
pub fn uniform_phi_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * std::f64::consts::TAU / n as f64).collect()
}

/// Global parity after phase shift and pi/2 rotation, from the closed-form
/// flip-pair sum. Requires an even atom count (the sign convention assumes
/// it) and a full basis for completeness of the flip pairing; constrained
/// bases treat out-of-basis partners as zero amplitude.
pub fn parity_scan(state: &StateMixture, phis: &[f64]) -> Result<ParityScan> {
    let basis = state.basis();
    let n = basis.n_sites();
    if n % 2 != 0 {
        return Err(SimError::InvalidModel("parity scan needs an even atom count".into()));
    }
    let half = (n / 2) as i32;
    let mut values = Vec::with_capacity(phis.len());
    for &phi in phis {
        let mut acc = Complex64::ZERO;
        for (idx, cfg) in basis.configs().iter().enumerate() {
            let flipped = cfg.flipped(n);
            let Some(jdx) = basis.index_of(flipped.bits) else {
                continue;
            };
            let n_n = cfg.excitation_count as i32;
            let n_bar = flipped.excitation_count as i32;
            let sign = if (n_n + half) % 2 == 0 { 1.0 } else { -1.0 };
            let rho = state.rho_element(idx, jdx);
            let phase = Complex64::from_polar(1.0, -phi * (n_n - n_bar) as f64);
            acc += sign * rho * phase;
        }
        if acc.im.abs() > 1e-10 {
            return Err(SimError::InvalidModel(format!(
                "parity has imaginary residue {:.3e}",
                acc.im
            )));
        }
        values.push(acc.re);
    }
    Ok(ParityScan { phis: phis.to_vec(), values })
}

/// Mean of the parity scan: the offset isolating the non-oscillating terms.
pub fn parity_offset(scan: &ParityScan) -> f64 {
    scan.values.iter().sum::<f64>() / scan.values.len() as f64
}

/// Coherence lower bound from a measured parity offset and configuration
/// populations: `2 Re(rho_AAbar) >= offset - sum_{m in S_A} sqrt(P_m P_mbar)`.
///
/// `populations` must cover every half-filled configuration other than the
/// checkerboard pair; missing entries are reported.
pub fn coherence_lower_bound(
    offset: f64,
    populations: &dyn Fn(Bits) -> Option<f64>,
    target: &GhzTarget,
) -> Result<f64> {
    let n = target.basis().n_sites();
    let half = n / 2;
    let mask: Bits = if n == 32 { !0 } else { (1u32 << n) - 1 };
    let mut correction = 0.0;
    let mut missing: Vec<String> = Vec::new();
    // iterate over all half-filled configurations (Gosper's hack)
    let mut bits: Bits = (1u32 << half) - 1;
    loop {
        if bits != target.config_a() && bits != target.config_a_bar() {
            let bar = !bits & mask;
            match (populations(bits), populations(bar)) {
                (Some(p), Some(q)) => correction += (p * q).sqrt(),
                _ => {
                    if missing.len() < 8 {
                        missing.push(format!("{bits:0width$b}", width = n));
                    }
                }
            }
        }
        // next half-filled pattern
        let c = bits & bits.wrapping_neg();
        let r = bits + c;
        let next = (((r ^ bits) >> 2) / c) | r;
        if next > mask || next == 0 {
            break;
        }
        bits = next;
    }
    if !missing.is_empty() {
        return Err(SimError::PartialBound(missing));
    }
    Ok(offset - correction)
}

/// Scan, offset, and bound straight from a state.
pub fn coherence_lower_bound_from_state(
    state: &StateMixture,
    target: &GhzTarget,
    n_phi: usize,
) -> Result<(f64, f64)> {
    let scan = parity_scan(state, &uniform_phi_grid(n_phi))?;
    let offset = parity_offset(&scan);
    let lookup = |bits: Bits| Some(state.population(bits));
    let bound = coherence_lower_bound(offset, &lookup, target)?;
    Ok((bound, offset))
}

/// Residual parity-oscillation amplitude at excitation imbalance `delta_n`.
#[derive(Copy, Clone, Debug)]
pub struct OscillationAmplitude {
    /// `sum |rho_{n nbar}|` over configurations at this imbalance.
    pub exact: f64,
    /// Cauchy-Schwarz population bound `sum sqrt(P_n P_nbar)`.
    pub bound: f64,
}

/// Amplitude of the parity oscillation at `|N_n - N_nbar| = delta_n`
/// (`delta_n` even and positive), with its population bound.
pub fn oscillation_amplitude(state: &StateMixture, delta_n: u32) -> Result<OscillationAmplitude> {
    if delta_n == 0 || delta_n % 2 != 0 {
        return Err(SimError::InvalidModel("imbalance must be even and positive".into()));
    }
    let basis = state.basis();
    let n = basis.n_sites() as i32;
    let mut exact = 0.0;
    let mut bound = 0.0;
    for (idx, cfg) in basis.configs().iter().enumerate() {
        let flipped = cfg.flipped(basis.n_sites());
        let Some(jdx) = basis.index_of(flipped.bits) else {
            continue;
        };
        let imbalance = (2 * cfg.excitation_count as i32 - n).unsigned_abs();
        if imbalance != delta_n {
            continue;
        }
        exact += state.rho_element(idx, jdx).norm();
        bound += (state.population_by_index(idx) * state.population_by_index(jdx)).sqrt();
    }
    Ok(OscillationAmplitude { exact, bound })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Geometry;
    use approx::assert_abs_diff_eq;

    fn setup(n_rungs: usize) -> (Arc<Basis>, GhzTarget) {
        let geometry = Geometry::ladder(n_rungs, 1.0, 1.0).unwrap();
        let basis = Basis::full(2 * n_rungs).unwrap();
        let target = GhzTarget::checkerboard(&basis, &geometry).unwrap();
        (basis, target)
    }

    fn ghz_with_phase(target: &GhzTarget, phase: f64) -> StateVector {
        let basis = target.basis();
        let mut amps = vec![Complex64::ZERO; basis.dim()];
        let w = std::f64::consts::FRAC_1_SQRT_2;
        amps[basis.index_of(target.config_a()).unwrap()] = Complex64::new(w, 0.0);
        amps[basis.index_of(target.config_a_bar()).unwrap()] = Complex64::from_polar(w, phase);
        StateVector::new(Arc::clone(basis), amps, 0.0).unwrap()
    }

    fn incoherent_mixture(target: &GhzTarget) -> StateMixture {
        let basis = target.basis();
        StateMixture::new(vec![
            (0.5, StateVector::basis_state(basis, target.config_a()).unwrap()),
            (0.5, StateVector::basis_state(basis, target.config_a_bar()).unwrap()),
        ])
        .unwrap()
    }

    #[test]
    fn fidelity_components_for_reference_states() {
        let (_, target) = setup(2);
        // perfect GHZ: F = 1, populations 1/2, coherence 1/2
        let ghz = StateMixture::pure(target.state());
        let f = ghz_fidelity(&ghz, &target).unwrap();
        assert_abs_diff_eq!(f.fidelity, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.population_a, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.population_a_bar, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coherence_re, 0.5, epsilon = 1e-12);

        // relative phase pi: F = 0 with components (1/2, 1/2, -1/2)
        let anti = StateMixture::pure(ghz_with_phase(&target, std::f64::consts::PI));
        let f = ghz_fidelity(&anti, &target).unwrap();
        assert_abs_diff_eq!(f.fidelity, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coherence_re, -0.5, epsilon = 1e-12);

        // incoherent mixture: F = 1/2
        let f = ghz_fidelity(&incoherent_mixture(&target), &target).unwrap();
        assert_abs_diff_eq!(f.fidelity, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(f.coherence_re, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn perfect_ghz_parity_is_flat_unity() {
        let (_, target) = setup(3);
        let ghz = StateMixture::pure(target.state());
        let scan = parity_scan(&ghz, &uniform_phi_grid(11)).unwrap();
        for v in &scan.values {
            assert_abs_diff_eq!(*v, 1.0, epsilon = 1e-12);
        }
        assert_abs_diff_eq!(parity_offset(&scan), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn incoherent_mixture_has_zero_parity() {
        let (_, target) = setup(2);
        let scan = parity_scan(&incoherent_mixture(&target), &uniform_phi_grid(11)).unwrap();
        for v in &scan.values {
            assert_abs_diff_eq!(*v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn bound_saturates_for_perfect_ghz() {
        let (_, target) = setup(2);
        let ghz = StateMixture::pure(target.state());
        let (bound, offset) = coherence_lower_bound_from_state(&ghz, &target, 11).unwrap();
        assert_abs_diff_eq!(offset, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound, 1.0, epsilon = 1e-12);
        let f = ghz_fidelity(&ghz, &target).unwrap();
        assert_abs_diff_eq!(bound, 2.0 * f.coherence_re, epsilon = 1e-12);
    }

    #[test]
    fn bound_vanishes_for_incoherent_mixture() {
        let (_, target) = setup(2);
        let (bound, offset) =
            coherence_lower_bound_from_state(&incoherent_mixture(&target), &target, 11).unwrap();
        assert_abs_diff_eq!(offset, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(bound, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn missing_populations_are_reported() {
        let (_, target) = setup(2);
        let lookup = |bits: Bits| (bits == target.config_a()).then_some(0.5);
        let err = coherence_lower_bound(1.0, &lookup, &target);
        assert!(matches!(err, Err(SimError::PartialBound(_))));
    }

    #[test]
    fn bound_never_exceeds_exact_coherence_on_random_states() {
        use crate::random::derived_rng;
        use rand::Rng;
        let (basis, target) = setup(2);
        for seed in 0..100u64 {
            let mut rng = derived_rng(99, seed);
            let amps: Vec<Complex64> = (0..basis.dim())
                .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
                .collect();
            let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
            let amps: Vec<Complex64> = amps.into_iter().map(|a| a / norm).collect();
            let psi = StateVector::new(Arc::clone(&basis), amps, 0.0).unwrap();
            let mix = StateMixture::pure(psi);
            let (bound, _) = coherence_lower_bound_from_state(&mix, &target, 11).unwrap();
            let coherence = 2.0
                * mix
                    .rho_element_bits(target.config_a(), target.config_a_bar())
                    .re;
            assert!(
                bound <= coherence + 1e-9,
                "seed {seed}: bound {bound} vs coherence {coherence}"
            );
        }
    }

    #[test]
    fn oscillation_amplitude_reference_values() {
        let (basis, target) = setup(2);
        let ghz = StateMixture::pure(target.state());
        for dn in [2u32, 4] {
            let a = oscillation_amplitude(&ghz, dn).unwrap();
            assert_abs_diff_eq!(a.exact, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(a.bound, 0.0, epsilon = 1e-12);
        }
        // bound dominates exact amplitude (Cauchy-Schwarz) on a random state
        use crate::random::derived_rng;
        use rand::Rng;
        let mut rng = derived_rng(3, 3);
        let amps: Vec<Complex64> = (0..basis.dim())
            .map(|_| Complex64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
            .collect();
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.into_iter().map(|a| a / norm).collect();
        let mix = StateMixture::pure(StateVector::new(Arc::clone(&basis), amps, 0.0).unwrap());
        for dn in [2u32, 4] {
            let a = oscillation_amplitude(&mix, dn).unwrap();
            assert!(a.exact <= a.bound + 1e-12);
        }
        assert!(oscillation_amplitude(&ghz, 3).is_err());
        assert!(oscillation_amplitude(&ghz, 0).is_err());
    }

    #[test]
    fn offset_is_exact_on_aliasing_safe_grids() {
        // state with only delta N in {0, +-2} off-diagonal terms: any grid
        // size >= 3 recovers the same offset; size 2 aliases the +-2 term
        let (basis, target) = setup(2);
        let mut amps = vec![Complex64::ZERO; basis.dim()];
        // superpose A (2 excitations), Abar, and one 1-excitation config
        // paired with its 3-excitation flip
        let w = (1.0f64 / 3.0).sqrt();
        amps[basis.index_of(target.config_a()).unwrap()] = Complex64::new(w, 0.0);
        amps[basis.index_of(target.config_a_bar()).unwrap()] = Complex64::new(w, 0.0);
        amps[basis.index_of(0b0001).unwrap()] = Complex64::new(w / 2.0_f64.sqrt(), 0.0);
        amps[basis.index_of(0b1110).unwrap()] = Complex64::new(w / 2.0_f64.sqrt(), 0.0);
        let norm: f64 = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        let amps: Vec<Complex64> = amps.into_iter().map(|a| a / norm).collect();
        let mix = StateMixture::pure(StateVector::new(Arc::clone(&basis), amps, 0.0).unwrap());
        let reference = parity_offset(&parity_scan(&mix, &uniform_phi_grid(11)).unwrap());
        for grid in [3usize, 4, 5, 7, 8, 11, 13] {
            let offset = parity_offset(&parity_scan(&mix, &uniform_phi_grid(grid)).unwrap());
            assert_abs_diff_eq!(offset, reference, epsilon = 1e-12);
        }
        // grid of 2 aliases the delta N = 2 oscillation into the offset
        let aliased = parity_offset(&parity_scan(&mix, &uniform_phi_grid(2)).unwrap());
        assert!((aliased - reference).abs() > 1e-3);
    }
}
