//! Simulation and analysis toolkit for driven Rydberg ladder arrays.
//!
//! The crate covers the numerical machinery behind a two-dimensional-ladder
//! GHZ-state experiment: many-body state-vector dynamics under the Rydberg
//! Hamiltonian, disorder-robust optimal-control pulse design, no-jump decay
//! dynamics with loss-detection post-selection, a two-atom four-level master
//! equation for the controlled-phase gate with a realistic noise budget, the
//! measurement-analysis stack (correlations, parity-offset coherence bounds,
//! measurement-error correction, randomized-benchmarking fits), and a
//! harmonic-oscillator model of motional-state-preserving clock pulses.
//!
//! Conventions: frequencies are angular (rad/us) throughout, lengths in um,
//! times in us, decay rates in 1/us. Interfaces that accept ordinary MHz say
//! so explicitly. All randomness flows through explicit seeds; ensembles
//! derive one seed per element, so results are independent of worker count.

pub mod analysis;
pub mod decay;
pub mod error;
pub mod gate;
pub mod geometry;
pub mod grape;
pub mod hilbert;
pub mod interaction;
pub mod mpp;
pub mod operator;
pub mod propagate;
pub mod pulse;
pub mod random;

pub use analysis::{
    BMode, ExpFit, GhzFidelity, MeasurementMatrix, ParityScan, RbFit, ShotRecord, SiteOutcome,
    StateMixture,
};
pub use decay::{
    Branches, DecayModel, DetectionMode, PostselectedEvolution, TauFit, TrajectoryOutcome,
};
pub use error::{Result, SimError};
pub use gate::{
    DetectionFilter, FourLevelBasis, GrbOptions, GrbRow, LossStats, NoiseChannel, NoiseModel,
    TogPulse,
};
pub use geometry::{DisorderSampler, Geometry, LatticeKind};
pub use grape::{CostBreakdown, GhzTarget, GrapeConfig, OptimizeOutcome, TraceRow};
pub use hilbert::{Basis, BasisConfig, BasisMode, Bits, StateVector};
pub use interaction::{Anisotropy, InteractionModel};
pub use mpp::{MppPulseShape, MppResult, TrapPair};
pub use operator::{FlipTerm, Operator};
pub use propagate::{evolve, evolve_with_derivative, propagate, PropagationOptions};
pub use pulse::{CrossingReport, PulseProfile};
