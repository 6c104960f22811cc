//! Van der Waals interactions and Hamiltonian assembly.
//!
//! The many-body Hamiltonian of the driven array is
//!
//! ```text
//! H = sum_i (Omega/2 sigma_x_i - Delta n_i) + sum_{i<j} V(i,j) n_i n_j,
//! V(i,j) = scale(theta_ij) * C6 / |r_i - r_j|^6,
//! ```
//!
//! with all frequencies angular (rad/us) and distances in um. `scale` models
//! the measured orientation dependence of the pair interaction relative to
//! the magnetic-field axis; it is pi-periodic and defaults to isotropic.
//!
//! Calibration helpers: the two-photon resonance shift of a pair (half its
//! interaction energy), the lattice-aspect-ratio adjustment that equalizes
//! nearest-neighbor interactions along the two ladder axes, and the
//! mapping-pulse detuning given by the mean interaction energy per excited
//! atom in a checkerboard configuration.

use std::sync::Arc;

use crate::error::{Result, SimError};
use crate::geometry::{Geometry, LatticeKind};
use crate::hilbert::{Basis, Bits};
use crate::operator::{FlipTerm, Operator};

/// Orientation dependence of the pair interaction.
#[derive(Clone, Debug)]
pub enum Anisotropy {
    Isotropic,
    /// Piecewise-linear `(theta, scale)` table, periodically continued with
    /// period pi. Angles in radians relative to the field axis.
    Table(Vec<(f64, f64)>),
}

impl Anisotropy {
    /// Interpolated scale factor at pair angle `theta` (radians to the field
    /// axis).
    pub fn scale(&self, theta: f64) -> f64 {
        match self {
            Anisotropy::Isotropic => 1.0,
            Anisotropy::Table(table) => {
                debug_assert!(!table.is_empty());
                let period = std::f64::consts::PI;
                let t = theta.rem_euclid(period);
                // locate the surrounding knots, wrapping across the period
                let mut prev = table.last().map(|&(a, s)| (a - period, s)).unwrap();
                for &(a, s) in table {
                    if a >= t {
                        let (a0, s0) = prev;
                        let w = if a - a0 > 0.0 { (t - a0) / (a - a0) } else { 0.0 };
                        return s0 + w * (s - s0);
                    }
                    prev = (a, s);
                }
                // t beyond the last knot: interpolate to the first knot + pi
                let (a0, s0) = prev;
                let (a1, s1) = (table[0].0 + period, table[0].1);
                let w = if a1 - a0 > 0.0 { (t - a0) / (a1 - a0) } else { 0.0 };
                s0 + w * (s1 - s0)
            }
        }
    }
}

/// Van der Waals model: coefficient, orientation dependence, field axis.
///
/// `c6` uses the angular-frequency convention (rad/us * um^6); a value quoted
/// as `2 pi x f MHz um^6` enters as `2 pi f`.
#[derive(Clone, Debug)]
pub struct InteractionModel {
    pub c6: f64,
    pub anisotropy: Anisotropy,
    /// Angle of the magnetic-field axis in the lattice frame (radians).
    pub b_axis_angle: f64,
    /// Drop all pair terms; blockade is then enforced only through a
    /// constrained basis (ideal PXP limit).
    pub hard_blockade: bool,
}

impl InteractionModel {
    pub fn isotropic(c6: f64) -> Self {
        Self { c6, anisotropy: Anisotropy::Isotropic, b_axis_angle: 0.0, hard_blockade: false }
    }

    /// Ideal PXP limit: no interaction tail, constraint carried by the basis.
    pub fn hard_blockade() -> Self {
        Self { c6: 0.0, anisotropy: Anisotropy::Isotropic, b_axis_angle: 0.0, hard_blockade: true }
    }

    pub fn scale_at(&self, pair_angle: f64) -> f64 {
        self.anisotropy.scale(pair_angle - self.b_axis_angle)
    }

    /// Pair interaction `V(i,j)` in rad/us.
    pub fn pair_strength(&self, geometry: &Geometry, i: usize, j: usize) -> Result<f64> {
        if self.hard_blockade {
            return Ok(0.0);
        }
        let r = geometry.distance(i, j);
        if r <= 0.0 {
            return Err(SimError::SingularInteraction(i, j));
        }
        let scale = self.scale_at(geometry.pair_angle(i, j));
        Ok(scale * self.c6 / r.powi(6))
    }

    /// Full pair table, `table[i][j] = V(i,j)`.
    pub fn pair_table(&self, geometry: &Geometry) -> Result<Vec<Vec<f64>>> {
        let n = geometry.n_sites();
        let mut table = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in i + 1..n {
                let v = self.pair_strength(geometry, i, j)?;
                table[i][j] = v;
                table[j][i] = v;
            }
        }
        Ok(table)
    }
}

/// Interaction energy of a configuration under a precomputed pair table.
pub fn configuration_energy(table: &[Vec<f64>], bits: Bits) -> f64 {
    let mut e = 0.0;
    let mut rest = bits;
    while rest != 0 {
        let i = rest.trailing_zeros() as usize;
        rest &= rest - 1;
        let mut upper = rest;
        while upper != 0 {
            let j = upper.trailing_zeros() as usize;
            upper &= upper - 1;
            e += table[i][j];
        }
    }
    e
}

/// Assemble the driven-array Hamiltonian on `basis`:
/// diagonal `-Delta N_n + sum of pair interactions`, off-diagonal
/// `(Omega/2) sum_i sigma_x_i`. `omega` and `delta` in rad/us.
pub fn build_hamiltonian(
    geometry: &Geometry,
    interaction: &InteractionModel,
    omega: f64,
    delta: f64,
    basis: &Arc<Basis>,
) -> Result<Operator> {
    if geometry.n_sites() != basis.n_sites() {
        return Err(SimError::Mismatch(format!(
            "geometry has {} sites, basis {}",
            geometry.n_sites(),
            basis.n_sites()
        )));
    }
    let table = interaction.pair_table(geometry)?;
    let diag: Vec<f64> = basis
        .configs()
        .iter()
        .map(|c| -delta * c.excitation_count as f64 + configuration_energy(&table, c.bits))
        .collect();
    let flips: Vec<FlipTerm> = if omega == 0.0 {
        Vec::new()
    } else {
        (0..basis.n_sites()).map(|site| FlipTerm { site, coeff: omega / 2.0 }).collect()
    };
    Operator::new(Arc::clone(basis), diag, flips)
}

/// Interaction diagonal alone (no drive, no detuning), useful when the same
/// disorder realization is reused across many detuning values.
pub fn interaction_diagonal(
    geometry: &Geometry,
    interaction: &InteractionModel,
    basis: &Arc<Basis>,
) -> Result<Vec<f64>> {
    if geometry.n_sites() != basis.n_sites() {
        return Err(SimError::Mismatch("geometry and basis atom counts differ".into()));
    }
    let table = interaction.pair_table(geometry)?;
    Ok(basis
        .configs()
        .iter()
        .map(|c| configuration_energy(&table, c.bits))
        .collect())
}

/// Two-photon resonance shift for driving `|mm> -> |rr>` on a pair: half the
/// pair interaction energy.
pub fn two_photon_shift(
    geometry: &Geometry,
    interaction: &InteractionModel,
    i: usize,
    j: usize,
) -> Result<f64> {
    if i == j {
        return Err(SimError::InvalidModel("two-photon shift needs distinct atoms".into()));
    }
    Ok(interaction.pair_strength(geometry, i, j)? / 2.0)
}

/// Rescale the ladder axis perpendicular to the field so the
/// nearest-neighbor interaction matches the parallel axis. Returns the
/// compensated geometry and the applied axis scale factor.
pub fn compensate_anisotropy(
    geometry: &Geometry,
    interaction: &InteractionModel,
) -> Result<(Geometry, f64)> {
    let LatticeKind::Ladder { rungs, ax, ay } = *geometry.kind() else {
        return Err(SimError::InvalidModel("anisotropy compensation needs a ladder lattice".into()));
    };
    if rungs < 2 {
        return Err(SimError::InvalidModel("compensation needs at least two rungs".into()));
    }
    // representative bonds: along the legs (0,1); along a rung (0, rungs)
    let s_leg = interaction.scale_at(geometry.pair_angle(0, 1));
    let s_rung = interaction.scale_at(geometry.pair_angle(0, rungs));
    if s_leg <= 0.0 || s_rung <= 0.0 {
        return Err(SimError::InvalidModel("anisotropy scale must be positive".into()));
    }
    // want s_rung / (f ay)^6 = s_leg / ax^6  =>  f = (ay'/ay) with
    // ay' = ax (s_rung/s_leg)^{1/6}
    let target_ay = ax * (s_rung / s_leg).powf(1.0 / 6.0);
    let factor = target_ay / ay;
    let compensated = geometry.scaled_axis(1, factor)?;
    // verify
    let v_leg = interaction.pair_strength(&compensated, 0, 1)?;
    let v_rung = interaction.pair_strength(&compensated, 0, rungs)?;
    if interaction.c6 != 0.0 && (v_leg - v_rung).abs() > 1e-6 * v_leg.abs().max(v_rung.abs()) {
        return Err(SimError::InvalidModel(format!(
            "compensation residual {:.3e} above tolerance",
            (v_leg - v_rung).abs()
        )));
    }
    Ok((compensated, factor))
}

/// Detuning of the mapping pulse: site-averaged interaction energy felt by
/// an excited atom in the checkerboard configuration.
pub fn mapping_detuning(geometry: &Geometry, interaction: &InteractionModel) -> Result<f64> {
    let (a, _) = geometry.checkerboard_configs()?;
    let table = interaction.pair_table(geometry)?;
    let n = geometry.n_sites();
    let excited: Vec<usize> = (0..n).filter(|&i| a >> i & 1 == 1).collect();
    if excited.is_empty() {
        return Err(SimError::InvalidModel("checkerboard has no excited sites".into()));
    }
    let mut acc = 0.0;
    for &i in &excited {
        for &j in &excited {
            if i != j {
                acc += table[i][j];
            }
        }
    }
    Ok(acc / excited.len() as f64)
}

/// Default model parameters used by the command-line tool and the tests.
///
/// The C6 coefficient is a documented placeholder: the spacing is 3.7 um and
/// C6 is chosen so a checkerboard diagonal pair (distance sqrt(2) a) sits at
/// 2 pi x 1.0 MHz, putting the nearest-neighbor interaction at 2 pi x 8 MHz,
/// well above the 2 pi x 3 MHz drive. Dimensionless ratios, not absolute
/// atomic constants, are what the dynamics cares about.
pub mod defaults {
    use std::f64::consts::TAU;

    /// Lattice spacing (um).
    pub const SPACING_UM: f64 = 3.7;
    /// Plateau Rabi frequency (rad/us) = 2 pi x 3.0 MHz.
    pub const OMEGA: f64 = TAU * 3.0;
    /// Van der Waals coefficient (rad/us um^6): diagonal pair at 2 pi x 1 MHz.
    pub fn c6() -> f64 {
        TAU * 1.0 * 8.0 * SPACING_UM.powi(6)
    }
    /// Shot-to-shot position disorder used for robust pulse design (um).
    pub const DESIGN_DISORDER_UM: f64 = 0.060;
    /// Position disorder used for evaluation (um).
    pub const EVAL_DISORDER_UM: f64 = 0.074;
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Basis;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::TAU;

    #[test]
    fn two_atom_interaction_on_doubly_excited_diagonal() {
        let g = Geometry::explicit(vec![[0.0, 0.0], [2.0, 0.0]], None).unwrap();
        let inter = InteractionModel::isotropic(64.0);
        let basis = Basis::full(2).unwrap();
        let h = build_hamiltonian(&g, &inter, 0.0, 0.0, &basis).unwrap();
        let v = 64.0 / 2.0f64.powi(6);
        assert_abs_diff_eq!(h.diag()[basis.index_of(0b11).unwrap()], v, epsilon = 1e-12);
        assert_abs_diff_eq!(h.diag()[basis.index_of(0b01).unwrap()], 0.0, epsilon = 1e-12);
        assert!(h.flips().is_empty(), "omega = 0 gives a purely diagonal operator");
    }

    #[test]
    fn ladder_square_diagonal_pair_energy() {
        // 2x2 ladder square of side a: one diagonal pair excited gives
        // C6/(sqrt(2) a)^6 = C6/(8 a^6). Oracle: brute-force pair sum.
        let a = 3.0;
        let g = Geometry::ladder(2, a, a).unwrap();
        let c6 = 100.0;
        let inter = InteractionModel::isotropic(c6);
        let basis = Basis::full(4).unwrap();
        let h = build_hamiltonian(&g, &inter, 0.0, 0.0, &basis).unwrap();
        // sites 0 (top-left) and 3 (bottom-right) are diagonal
        let bits = 0b1001;
        let mut brute = 0.0;
        for i in 0..4 {
            for j in i + 1..4 {
                if bits >> i & 1 == 1 && bits >> j & 1 == 1 {
                    brute += inter.pair_strength(&g, i, j).unwrap();
                }
            }
        }
        let idx = basis.index_of(bits).unwrap();
        assert_abs_diff_eq!(h.diag()[idx], brute, epsilon = 1e-12);
        assert_abs_diff_eq!(h.diag()[idx], c6 / (8.0 * a.powi(6)), epsilon = 1e-12);
    }

    #[test]
    fn coincident_atoms_are_singular() {
        let g = Geometry::explicit(vec![[0.0, 0.0], [0.0, 0.0]], None).unwrap();
        let inter = InteractionModel::isotropic(1.0);
        let basis = Basis::full(2).unwrap();
        assert!(matches!(
            build_hamiltonian(&g, &inter, 1.0, 0.0, &basis),
            Err(SimError::SingularInteraction(0, 1))
        ));
    }

    #[test]
    fn hamiltonian_is_hermitian_dense() {
        let g = Geometry::ladder(3, 3.7, 3.7).unwrap();
        let inter = InteractionModel::isotropic(defaults::c6());
        let basis = Basis::full(6).unwrap();
        let h = build_hamiltonian(&g, &inter, defaults::OMEGA, TAU * 1.3, &basis).unwrap();
        let m = h.to_dense();
        assert!((&m - m.adjoint()).norm() < 1e-12);
    }

    #[test]
    fn interaction_energy_invariant_under_translation_rotation() {
        let g = Geometry::explicit(vec![[0.0, 0.0], [3.0, 0.5], [1.0, 2.0]], None).unwrap();
        let inter = InteractionModel::isotropic(50.0);
        let (c, s) = (0.6f64.cos(), 0.6f64.sin());
        let moved: Vec<[f64; 2]> = g
            .positions()
            .iter()
            .map(|p| [c * p[0] - s * p[1] + 5.0, s * p[0] + c * p[1] - 2.0])
            .collect();
        let g2 = Geometry::explicit(moved, None).unwrap();
        let t1 = inter.pair_table(&g).unwrap();
        let t2 = inter.pair_table(&g2).unwrap();
        for bits in 0..8u32 {
            assert_abs_diff_eq!(
                configuration_energy(&t1, bits),
                configuration_energy(&t2, bits),
                epsilon = 1e-9
            );
        }
    }

    #[test]
    fn two_photon_shift_examples() {
        let g = Geometry::explicit(vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]], None).unwrap();
        let inter = InteractionModel::isotropic(TAU * 4.0);
        // V = 2 pi x 4 -> shift 2 pi x 2
        assert_abs_diff_eq!(two_photon_shift(&g, &inter, 0, 1).unwrap(), TAU * 2.0, epsilon = 1e-12);
        // distance 2a vs a: ratio 1/64
        let near = two_photon_shift(&g, &inter, 0, 1).unwrap();
        let far = two_photon_shift(&g, &inter, 0, 2).unwrap();
        assert_abs_diff_eq!(far / near, 1.0 / 64.0, epsilon = 1e-12);
        assert!(two_photon_shift(&g, &inter, 1, 1).is_err());
    }

    #[test]
    fn anisotropic_shift_ratio() {
        // scale(90 deg) = 1.2, scale(0) = 1.0, equal distances -> ratio 1.2
        let g = Geometry::explicit(vec![[0.0, 0.0], [2.0, 0.0], [0.0, 2.0]], None).unwrap();
        let inter = InteractionModel {
            c6: 10.0,
            anisotropy: Anisotropy::Table(vec![(0.0, 1.0), (std::f64::consts::FRAC_PI_2, 1.2)]),
            b_axis_angle: 0.0,
            hard_blockade: false,
        };
        let along = two_photon_shift(&g, &inter, 0, 1).unwrap();
        let perp = two_photon_shift(&g, &inter, 0, 2).unwrap();
        assert_abs_diff_eq!(perp / along, 1.2, epsilon = 1e-12);
    }

    #[test]
    fn compensation_examples() {
        let g = Geometry::ladder(3, 3.7, 3.7).unwrap();
        // isotropic: factor exactly 1
        let iso = InteractionModel::isotropic(defaults::c6());
        let (_, f) = compensate_anisotropy(&g, &iso).unwrap();
        assert_abs_diff_eq!(f, 1.0, epsilon = 1e-12);

        // perpendicular/parallel scale ratio 1.03^6 -> stretch factor 1.03
        let ratio = 1.03f64.powi(6);
        let aniso = InteractionModel {
            c6: defaults::c6(),
            anisotropy: Anisotropy::Table(vec![(0.0, 1.0), (std::f64::consts::FRAC_PI_2, ratio)]),
            b_axis_angle: 0.0,
            hard_blockade: false,
        };
        let (comp, f) = compensate_anisotropy(&g, &aniso).unwrap();
        assert_abs_diff_eq!(f, 1.03, epsilon = 1e-9);
        let v_leg = aniso.pair_strength(&comp, 0, 1).unwrap();
        let v_rung = aniso.pair_strength(&comp, 0, 3).unwrap();
        assert!((v_leg - v_rung).abs() < 1e-6 * v_leg);

        // swapping which axis is parallel to B inverts the factor
        let swapped = InteractionModel { b_axis_angle: std::f64::consts::FRAC_PI_2, ..aniso.clone() };
        let (_, f_swapped) = compensate_anisotropy(&g, &swapped).unwrap();
        assert_abs_diff_eq!(f_swapped, 1.0 / 1.03, epsilon = 1e-9);

        // degenerate anisotropy rejected
        let bad = InteractionModel {
            c6: 1.0,
            anisotropy: Anisotropy::Table(vec![(0.0, 1.0), (std::f64::consts::FRAC_PI_2, 0.0)]),
            b_axis_angle: 0.0,
            hard_blockade: false,
        };
        assert!(compensate_anisotropy(&g, &bad).is_err());
    }

    #[test]
    fn mapping_detuning_examples() {
        // two excited atoms at distance d: each feels C6/d^6
        let g = Geometry::explicit(vec![[0.0, 0.0], [3.0, 0.0]], Some(vec![0, 1])).unwrap();
        let inter = InteractionModel::isotropic(729.0 * TAU);
        // checkerboard on 2 sites excites one; use an explicit pair instead
        let table = inter.pair_table(&g).unwrap();
        assert_abs_diff_eq!(table[0][1], TAU * 729.0 / 3.0f64.powi(6), epsilon = 1e-12);

        // 4-rung ladder at defaults: order 2 pi x 1 MHz, oracle = brute force
        let g = Geometry::ladder(4, defaults::SPACING_UM, defaults::SPACING_UM).unwrap();
        let inter = InteractionModel::isotropic(defaults::c6());
        let det = mapping_detuning(&g, &inter).unwrap();
        let (a, _) = g.checkerboard_configs().unwrap();
        let table = inter.pair_table(&g).unwrap();
        let excited: Vec<usize> = (0..8).filter(|&i| a >> i & 1 == 1).collect();
        let mut brute = 0.0;
        for &i in &excited {
            for &j in &excited {
                if i != j {
                    brute += table[i][j];
                }
            }
        }
        brute /= excited.len() as f64;
        assert_abs_diff_eq!(det, brute, epsilon = 1e-12);
        // order 2 pi x 1 MHz at the documented defaults
        assert!(det > TAU * 0.5 && det < TAU * 3.0, "detuning {det}");

        // doubling all distances divides by 64
        let g2 = Geometry::ladder(4, 2.0 * defaults::SPACING_UM, 2.0 * defaults::SPACING_UM).unwrap();
        let det2 = mapping_detuning(&g2, &inter).unwrap();
        assert_abs_diff_eq!(det2 * 64.0, det, epsilon = 1e-9);
    }

    #[test]
    fn staggered_configs_degenerate_energy() {
        let g = Geometry::ladder(4, 3.7, 3.7).unwrap();
        let inter = InteractionModel::isotropic(defaults::c6());
        let (a, abar) = g.checkerboard_configs().unwrap();
        let table = inter.pair_table(&g).unwrap();
        assert_abs_diff_eq!(
            configuration_energy(&table, a),
            configuration_energy(&table, abar),
            epsilon = 1e-10
        );
    }

    #[test]
    fn anisotropy_scale_is_pi_periodic() {
        let t = Anisotropy::Table(vec![(0.0, 1.0), (1.0, 1.3), (2.5, 0.9)]);
        for theta in [0.3, 1.7, 2.9] {
            assert_abs_diff_eq!(t.scale(theta), t.scale(theta + std::f64::consts::PI), epsilon = 1e-12);
        }
    }
}
