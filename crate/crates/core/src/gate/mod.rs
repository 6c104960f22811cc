//! Two-atom, four-levels-per-atom simulation of the controlled-phase gate:
//! phase-modulated time-optimal pulse synthesis, Lindblad evolution with the
//! six Rydberg decay channels, coherent-noise modeling, global randomized
//! benchmarking with loss detection, and correlated-loss statistics.

pub mod fidelity;
pub mod grb;
pub mod levels;
pub mod lindblad;
pub mod loss;
pub mod noise;
pub mod tog;

pub use fidelity::{channel_breakdown, simulate_gate_fidelity, ChannelReport, GateFidelityReport};

#[cfg(test)]
pub(crate) mod test_support {
    use super::tog::{synthesize_tog, TogPulse};
    use std::f64::consts::TAU;
    use std::sync::OnceLock;

    /// One synthesized gate shared across the gate test suite.
    pub(crate) fn cached_tog() -> &'static TogPulse {
        static TOG: OnceLock<TogPulse> = OnceLock::new();
        TOG.get_or_init(|| synthesize_tog(TAU * 3.0, TAU * 600.0).expect("synthesis converges"))
    }
}
pub use grb::{run_grb, DetectionFilter, GrbOptions, GrbRow};
pub use levels::{FourLevelBasis, Level};
pub use lindblad::{evolve_master, master_equation_step, DensityMatrix4L, JumpOperators};
pub use loss::{correlated_loss_stats, LossStats};
pub use noise::{NoiseChannel, NoiseModel, NoiseTrace, SpectrumSpec};
pub use tog::{synthesize_tog, TogPulse, TogSynthesisOptions};
