//! Density-density correlations and staggered magnetism.
//!
//! The displacement-resolved second-order correlation is
//!
//! ```text
//! g2(dx, dy) = (1/N_d) sum_{i,j: r_i = r_j + (dx,dy)} <n_i n_j> - <n_i><n_j>,
//! ```
//!
//! evaluated exactly on a state or estimated from shots, excluding pairs
//! that touch a lost site. Staggered magnetism sums `sigma_z` with
//! alternating signs along the circular site index; `|M| = N` signals
//! complete checkerboard order, and the shot fraction with `|M| = N` is the
//! ordered population.

use crate::error::{Result, SimError};
use crate::geometry::Geometry;

use super::ghz::StateMixture;
use super::shots::{ShotRecord, SiteOutcome};

/// `sigma_z` eigenvalue of one site outcome: the readout identifies the
/// excited (`|r>`, bit 1) state with qubit `|0>`, so `sigma_z = +1` for an
/// excited site and `-1` for a ground site. The 0-to-r identification lives
/// only here.
pub fn sigma_z_value(outcome: SiteOutcome) -> Option<f64> {
    match outcome {
        SiteOutcome::Excited => Some(1.0),
        SiteOutcome::Ground => Some(-1.0),
        SiteOutcome::Lost => None,
    }
}

/// Ordered site pairs `(i, j)` with `r_i = r_j + (dx, dy)` within `tol`.
pub fn matching_pairs(geometry: &Geometry, dx: f64, dy: f64, tol: f64) -> Vec<(usize, usize)> {
    let n = geometry.n_sites();
    let mut pairs = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let [xi, yi] = geometry.position(i);
            let [xj, yj] = geometry.position(j);
            if (xi - (xj + dx)).abs() <= tol && (yi - (yj + dy)).abs() <= tol {
                pairs.push((i, j));
            }
        }
    }
    pairs
}

/// Exact `g2` on a (possibly mixed) state.
pub fn g2_from_state(state: &StateMixture, geometry: &Geometry, dx: f64, dy: f64) -> Result<f64> {
    let pairs = matching_pairs(geometry, dx, dy, 1e-6);
    if pairs.is_empty() {
        return Err(SimError::UndefinedDisplacement(dx, dy));
    }
    let basis = state.basis();
    if basis.n_sites() != geometry.n_sites() {
        return Err(SimError::Mismatch("state and geometry site counts differ".into()));
    }
    // single-site and pair densities from the diagonal populations
    let n_sites = basis.n_sites();
    let mut n_i = vec![0.0; n_sites];
    let mut nn = vec![vec![0.0; n_sites]; n_sites];
    for (idx, cfg) in basis.configs().iter().enumerate() {
        let p = state.population_by_index(idx);
        if p == 0.0 {
            continue;
        }
        for s in 0..n_sites {
            if cfg.is_excited(s) {
                n_i[s] += p;
                for t in 0..n_sites {
                    if t != s && cfg.is_excited(t) {
                        nn[s][t] += p;
                    }
                }
            }
        }
    }
    let mut acc = 0.0;
    for &(i, j) in &pairs {
        acc += nn[i][j] - n_i[i] * n_i[j];
    }
    Ok(acc / pairs.len() as f64)
}

/// `g2` estimated from a shot ensemble. For each pair, only shots where both
/// sites are unlost enter the estimate.
pub fn g2_from_shots(shots: &[ShotRecord], geometry: &Geometry, dx: f64, dy: f64) -> Result<f64> {
    let pairs = matching_pairs(geometry, dx, dy, 1e-6);
    if pairs.is_empty() {
        return Err(SimError::UndefinedDisplacement(dx, dy));
    }
    let mut acc = 0.0;
    let mut used_pairs = 0usize;
    for &(i, j) in &pairs {
        let mut count = 0usize;
        let mut sum_i = 0.0;
        let mut sum_j = 0.0;
        let mut sum_ij = 0.0;
        for s in shots {
            let (a, b) = (s.outcomes[i], s.outcomes[j]);
            if a == SiteOutcome::Lost || b == SiteOutcome::Lost {
                continue;
            }
            let ni = if a == SiteOutcome::Excited { 1.0 } else { 0.0 };
            let nj = if b == SiteOutcome::Excited { 1.0 } else { 0.0 };
            sum_i += ni;
            sum_j += nj;
            sum_ij += ni * nj;
            count += 1;
        }
        if count == 0 {
            continue;
        }
        let c = count as f64;
        acc += sum_ij / c - (sum_i / c) * (sum_j / c);
        used_pairs += 1;
    }
    if used_pairs == 0 {
        return Err(SimError::UndefinedDisplacement(dx, dy));
    }
    Ok(acc / used_pairs as f64)
}

/// Staggered magnetism of one shot along the circular index; `None` when the
/// shot contains a lost site.
pub fn staggered_magnetism_shot(shot: &ShotRecord, geometry: &Geometry) -> Option<f64> {
    if shot.n_sites() != geometry.n_sites() {
        return None;
    }
    let mut m = 0.0;
    for (pos, &site) in geometry.circular_index().iter().enumerate() {
        let sz = sigma_z_value(shot.outcomes[site])?;
        let sign = if pos % 2 == 0 { 1.0 } else { -1.0 };
        m += sign * sz;
    }
    Some(m)
}

/// Exact distribution of the staggered magnetism over configurations:
/// `(value, probability)` pairs sorted by value.
pub fn staggered_values_from_state(
    state: &StateMixture,
    geometry: &Geometry,
) -> Result<Vec<(f64, f64)>> {
    let basis = state.basis();
    if basis.n_sites() != geometry.n_sites() {
        return Err(SimError::Mismatch("state and geometry site counts differ".into()));
    }
    let mut hist = std::collections::BTreeMap::<i64, f64>::new();
    for (idx, cfg) in basis.configs().iter().enumerate() {
        let p = state.population_by_index(idx);
        if p == 0.0 {
            continue;
        }
        let mut m = 0i64;
        for (pos, &site) in geometry.circular_index().iter().enumerate() {
            let sz = if cfg.is_excited(site) { 1i64 } else { -1 };
            m += if pos % 2 == 0 { sz } else { -sz };
        }
        *hist.entry(m).or_insert(0.0) += p;
    }
    Ok(hist.into_iter().map(|(m, p)| (m as f64, p)).collect())
}

/// Fraction of shots with complete checkerboard order (`|M| = N`), lost
/// shots discarded.
pub fn z2_population_from_shots(shots: &[ShotRecord], geometry: &Geometry) -> f64 {
    let n = geometry.n_sites() as f64;
    let mut ordered = 0usize;
    let mut usable = 0usize;
    for s in shots {
        if let Some(m) = staggered_magnetism_shot(s, geometry) {
            usable += 1;
            if (m.abs() - n).abs() < 0.5 {
                ordered += 1;
            }
        }
    }
    if usable == 0 {
        0.0
    } else {
        ordered as f64 / usable as f64
    }
}

/// Exact probability of complete checkerboard order.
pub fn z2_population_from_state(state: &StateMixture, geometry: &Geometry) -> Result<f64> {
    let n = geometry.n_sites() as f64;
    Ok(staggered_values_from_state(state, geometry)?
        .into_iter()
        .filter(|(m, _)| (m.abs() - n).abs() < 0.5)
        .map(|(_, p)| p)
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grape::GhzTarget;
    use crate::hilbert::{Basis, StateVector};
    use approx::assert_abs_diff_eq;

    fn ghz_ladder() -> (Geometry, StateMixture, GhzTarget) {
        let geometry = Geometry::ladder(4, 1.0, 1.0).unwrap();
        let basis = Basis::full(8).unwrap();
        let target = GhzTarget::checkerboard(&basis, &geometry).unwrap();
        (geometry, StateMixture::pure(target.state()), target)
    }

    #[test]
    fn ghz_g2_is_quarter_by_sublattice() {
        let (geometry, mix, _) = ghz_ladder();
        // same sublattice: displacement two columns along a leg
        let same = g2_from_state(&mix, &geometry, 2.0, 0.0).unwrap();
        assert_abs_diff_eq!(same, 0.25, epsilon = 1e-12);
        // opposite sublattice: one column
        let opposite = g2_from_state(&mix, &geometry, 1.0, 0.0).unwrap();
        assert_abs_diff_eq!(opposite, -0.25, epsilon = 1e-12);
        // rung displacement is also opposite-sublattice
        let rung = g2_from_state(&mix, &geometry, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(rung, -0.25, epsilon = 1e-12);
    }

    #[test]
    fn product_state_is_uncorrelated() {
        let geometry = Geometry::ladder(3, 1.0, 1.0).unwrap();
        let basis = Basis::full(6).unwrap();
        let mix = StateMixture::pure(StateVector::all_ground(&basis));
        for (dx, dy) in [(1.0, 0.0), (2.0, 0.0), (0.0, 1.0), (1.0, 1.0)] {
            let v = g2_from_state(&mix, &geometry, dx, dy).unwrap();
            assert_abs_diff_eq!(v, 0.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn missing_displacement_is_error() {
        let (geometry, mix, _) = ghz_ladder();
        assert!(matches!(
            g2_from_state(&mix, &geometry, 17.0, 0.0),
            Err(SimError::UndefinedDisplacement(_, _))
        ));
    }

    #[test]
    fn checkerboard_staggered_magnetism_is_full_scale() {
        let (geometry, _, target) = ghz_ladder();
        let basis = target.basis();
        let a = StateMixture::pure(StateVector::basis_state(basis, target.config_a()).unwrap());
        let vals = staggered_values_from_state(&a, &geometry).unwrap();
        assert_eq!(vals.len(), 1);
        assert_abs_diff_eq!(vals[0].0.abs(), 8.0, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[0].1, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn all_ground_shot_cancels_for_even_n() {
        let geometry = Geometry::ladder(2, 1.0, 1.0).unwrap();
        let shot = ShotRecord { outcomes: vec![SiteOutcome::Ground; 4] };
        assert_abs_diff_eq!(staggered_magnetism_shot(&shot, &geometry).unwrap(), 0.0);
        let lost = ShotRecord {
            outcomes: vec![
                SiteOutcome::Ground,
                SiteOutcome::Lost,
                SiteOutcome::Ground,
                SiteOutcome::Ground,
            ],
        };
        assert!(staggered_magnetism_shot(&lost, &geometry).is_none());
    }

    #[test]
    fn ghz_z2_population_is_unity_split_evenly() {
        let (geometry, mix, _) = ghz_ladder();
        assert_abs_diff_eq!(z2_population_from_state(&mix, &geometry).unwrap(), 1.0, epsilon = 1e-12);
        let vals = staggered_values_from_state(&mix, &geometry).unwrap();
        assert_eq!(vals.len(), 2);
        assert_abs_diff_eq!(vals[0].1, 0.5, epsilon = 1e-12);
        assert_abs_diff_eq!(vals[1].1, 0.5, epsilon = 1e-12);
    }

    #[test]
    fn shot_estimate_tracks_exact_g2() {
        let (geometry, mix, target) = ghz_ladder();
        let shots = super::super::shots::sample_shots(&target.state(), 40_000, 11);
        let est = g2_from_shots(&shots, &geometry, 2.0, 0.0).unwrap();
        let exact = g2_from_state(&mix, &geometry, 2.0, 0.0).unwrap();
        assert!((est - exact).abs() < 0.02, "estimate {est} vs exact {exact}");
    }
}
