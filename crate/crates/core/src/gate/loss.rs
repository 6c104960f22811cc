//! Correlated atom loss across repeated entangling gates.
//!
//! When one atom decays out of the qubit subspace mid-gate into a
//! non-interacting state, the blockade on its partner disappears and the
//! partner is left rotating freely on the Rydberg transition; the ionization
//! pulse after the gate then converts its residual Rydberg population into
//! loss. This mechanism makes the both-atoms-lost probability per gate
//! comparable to the single-atom one, far above the square expected for
//! independent losses. The four-level scheme captures the blockade release
//! automatically: a decayed atom carries no `r0` amplitude, so the `|rr>`
//! shift never engages.

use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;

use crate::decay::DecayModel;
use crate::error::Result;
use crate::random::{derive_seed, derived_rng};

use super::grb::{clifford_group, GrbOptions};
use super::levels::{apply_global_single_qubit, embed_comp, level_of, Level};
use super::tog::TogPulse;

/// Per-gate loss probabilities extracted from linear fits over gate count.
#[derive(Clone, Debug, serde::Serialize)]
pub struct LossStats {
    /// Probability that exactly one atom is lost, per gate.
    pub p_single: f64,
    pub p_single_err: f64,
    /// Probability that both atoms are lost, per gate.
    pub p_corr: f64,
    pub p_corr_err: f64,
    /// Raw curves: `(gates, P_exactly_one, P_both)`.
    pub per_count: Vec<(usize, f64, f64)>,
}

/// Trajectory estimate of single and correlated loss versus gate count.
/// Random global Cliffords interleave the entanglers as in the benchmark;
/// an atom counts as lost when it ends in the auxiliary decayed level
/// (detected decay, blow-away, or ionization).
pub fn correlated_loss_stats(
    tog: &TogPulse,
    decay: &DecayModel,
    gate_counts: &[usize],
    shots: usize,
    seed: u64,
) -> Result<LossStats> {
    let opts = GrbOptions { seed, ..Default::default() };
    let engine = super::grb::EntanglerEngine::build(tog, Some(decay), &opts);
    let cliffords = clifford_group();

    let per_count: Vec<(usize, f64, f64)> = gate_counts
        .par_iter()
        .map(|&l| {
            let mut one = 0usize;
            let mut both = 0usize;
            for shot in 0..shots {
                let mut rng = derived_rng(derive_seed(seed, l as u64), shot as u64);
                let mut labels = Vec::new();
                let mut psi = embed_comp(&[
                    Complex64::ONE,
                    Complex64::ZERO,
                    Complex64::ZERO,
                    Complex64::ZERO,
                ]);
                for _ in 0..l {
                    let c = rng.gen_range(0..cliffords.len());
                    psi = apply_global_single_qubit(&cliffords[c], &psi);
                    engine.apply(&mut psi, &mut rng, &mut labels);
                    engine.ionize(&mut psi, &mut rng, &mut labels);
                }
                let lost = count_lost(&psi, &mut rng);
                match lost {
                    1 => one += 1,
                    2 => both += 1,
                    _ => {}
                }
            }
            (l, one as f64 / shots as f64, both as f64 / shots as f64)
        })
        .collect();

    let (p_single, p_single_err) = slope_fit(&per_count, shots, |r| r.1);
    let (p_corr, p_corr_err) = slope_fit(&per_count, shots, |r| r.2);
    Ok(LossStats { p_single, p_single_err, p_corr, p_corr_err, per_count })
}

/// Sample how many atoms sit in the decayed level.
fn count_lost(psi: &[Complex64], rng: &mut impl Rng) -> usize {
    // measure each atom in the {decay, not-decay} basis
    let mut lost = 0usize;
    let mut state = psi.to_vec();
    for atom in 0..2 {
        let p_dec: f64 = state
            .iter()
            .enumerate()
            .filter(|(i, _)| level_of(*i, atom) == Level::Decay as usize)
            .map(|(_, a)| a.norm_sqr())
            .sum();
        let total: f64 = state.iter().map(|a| a.norm_sqr()).sum();
        let p = if total > 0.0 { p_dec / total } else { 0.0 };
        let is_lost = rng.gen::<f64>() < p;
        if is_lost {
            lost += 1;
        }
        // project so the second atom's statistics condition on the first
        for (i, a) in state.iter_mut().enumerate() {
            let in_dec = level_of(i, atom) == Level::Decay as usize;
            if in_dec != is_lost {
                *a = Complex64::ZERO;
            }
        }
    }
    lost
}

/// Weighted least-squares slope of `P(l)` with binomial uncertainties,
/// intercept free.
fn slope_fit(
    rows: &[(usize, f64, f64)],
    shots: usize,
    value: impl Fn(&(usize, f64, f64)) -> f64,
) -> (f64, f64) {
    let mut sw = 0.0;
    let mut swx = 0.0;
    let mut swy = 0.0;
    let mut swxx = 0.0;
    let mut swxy = 0.0;
    for r in rows {
        let x = r.0 as f64;
        let y = value(r);
        let var = (y * (1.0 - y)).max(0.5 / shots as f64) / shots as f64;
        let w = 1.0 / var;
        sw += w;
        swx += w * x;
        swy += w * y;
        swxx += w * x * x;
        swxy += w * x * y;
    }
    let denom = sw * swxx - swx * swx;
    if denom.abs() < 1e-300 {
        return (0.0, f64::INFINITY);
    }
    let slope = (sw * swxy - swx * swy) / denom;
    let err = (sw / denom).sqrt();
    (slope, err)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gate::test_support::cached_tog;

    #[test]
    fn no_decay_no_loss() {
        let tog = cached_tog();
        let decay = DecayModel::with_observed_branching(0.0);
        let stats = correlated_loss_stats(tog, &decay, &[2, 6], 40, 3).unwrap();
        assert_eq!(stats.p_single, 0.0);
        assert_eq!(stats.p_corr, 0.0);
    }

    #[test]
    fn correlated_loss_dominates_the_independent_square() {
        let tog = cached_tog();
        // paper-scale decay: all population leaving the qubit subspace goes
        // to non-interacting states
        let decay = DecayModel::with_observed_branching(0.05);
        let counts = [4usize, 10, 16];
        let stats = correlated_loss_stats(tog, &decay, &counts, 4000, 11).unwrap();
        assert!(stats.p_single > 0.0);
        assert!(
            stats.p_corr > 10.0 * stats.p_single * stats.p_single,
            "p_corr {} vs p_single^2 {}",
            stats.p_corr,
            stats.p_single * stats.p_single
        );
        assert!(
            stats.p_corr > 0.1 * stats.p_single && stats.p_corr < 10.0 * stats.p_single,
            "p_corr {} vs p_single {}",
            stats.p_corr,
            stats.p_single
        );
    }

    #[test]
    fn small_rate_scaling_is_linear() {
        let tog = cached_tog();
        let counts = [4usize, 8];
        let base = DecayModel::with_observed_branching(0.02);
        let double = DecayModel::with_observed_branching(0.04);
        let a = correlated_loss_stats(tog, &base, &counts, 6000, 7).unwrap();
        let b = correlated_loss_stats(tog, &double, &counts, 6000, 7).unwrap();
        let ratio_single = b.p_single / a.p_single;
        let ratio_corr = b.p_corr / a.p_corr;
        assert!((ratio_single - 2.0).abs() < 0.5, "single ratio {ratio_single}");
        assert!((ratio_corr - 2.0).abs() < 0.6, "corr ratio {ratio_corr}");
    }
}
