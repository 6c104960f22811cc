//! Shared fixtures for the kernel benchmarks.

use std::sync::Arc;

use rydsim_core::geometry::Geometry;
use rydsim_core::grape::GhzTarget;
use rydsim_core::hilbert::Basis;
use rydsim_core::interaction::{defaults, InteractionModel};
use rydsim_core::pulse::PulseProfile;

/// A ladder system at the default experiment-scale parameters.
pub struct LadderFixture {
    pub geometry: Geometry,
    pub interaction: InteractionModel,
    pub basis: Arc<Basis>,
    pub target: GhzTarget,
}

pub fn ladder(rungs: usize) -> LadderFixture {
    let geometry = Geometry::ladder(rungs, defaults::SPACING_UM, defaults::SPACING_UM).unwrap();
    let interaction = InteractionModel::isotropic(defaults::c6());
    let basis = Basis::full(2 * rungs).unwrap();
    let target = GhzTarget::checkerboard(&basis, &geometry).unwrap();
    LadderFixture { geometry, interaction, basis, target }
}

pub fn sweep_pulse(total_time: f64, n: usize) -> PulseProfile {
    PulseProfile::linear_ramp(
        total_time,
        n,
        defaults::OMEGA,
        0.2,
        -std::f64::consts::TAU * 8.0,
        std::f64::consts::TAU * 6.0,
    )
    .unwrap()
}
