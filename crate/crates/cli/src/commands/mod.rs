pub mod analyze;
pub mod decay;
pub mod gate_bench;
pub mod ghz_evolve;
pub mod ghz_optimize;
pub mod mpp;
