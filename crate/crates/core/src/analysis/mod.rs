//! Observables and statistical analysis of simulated or recorded shots:
//! density-density correlations, staggered magnetism, exact GHZ fidelity,
//! the global-control parity-offset coherence bound, measurement-error
//! correction, and decay/benchmarking fits.

pub mod correlate;
pub mod fit;
pub mod ghz;
pub mod measure;
pub mod shots;

pub use correlate::{
    g2_from_shots, g2_from_state, matching_pairs, sigma_z_value, staggered_magnetism_shot,
    staggered_values_from_state, z2_population_from_shots, z2_population_from_state,
};
pub use fit::{fit_exponential, fit_rb, BMode, ExpFit, RbFit};
pub use ghz::{
    coherence_lower_bound, coherence_lower_bound_from_state, ghz_fidelity, oscillation_amplitude,
    parity_offset, parity_scan, uniform_phi_grid, GhzFidelity, OscillationAmplitude, ParityScan,
    StateMixture,
};
pub use measure::{correct_measurement, CorrectedCounts, MeasurementMatrix};
pub use shots::{parity_of_shot, sample_shots, ShotRecord, SiteOutcome};
