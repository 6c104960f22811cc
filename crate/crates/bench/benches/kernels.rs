//! Hot-path benchmarks: basis enumeration, segment propagation, pulse-cost
//! and gradient evaluation, and one master-equation step.

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};

use num_complex::Complex64;
use rydsim_bench::{ladder, sweep_pulse};
use rydsim_core::gate::lindblad::{master_equation_step, DensityMatrix4L, JumpOperators};
use rydsim_core::gate::tog::slice_hamiltonians;
use rydsim_core::gate::TogPulse;
use rydsim_core::grape::{grape_cost, grape_gradient, GrapeConfig};
use rydsim_core::hilbert::{Basis, StateVector};
use rydsim_core::interaction::build_hamiltonian;
use rydsim_core::propagate::{evolve, PropagationOptions};
use rydsim_core::DecayModel;

fn bench_basis(c: &mut Criterion) {
    c.bench_function("basis/constrained_ladder_20", |b| {
        let geometry = rydsim_core::geometry::Geometry::ladder(10, 3.7, 3.7).unwrap();
        let edges = geometry.nn_edges();
        b.iter(|| Basis::constrained(20, &edges).unwrap().dim())
    });
}

fn bench_propagation(c: &mut Criterion) {
    let mut group = c.benchmark_group("propagate");
    for rungs in [3usize, 4, 5] {
        let fx = ladder(rungs);
        let h = build_hamiltonian(
            &fx.geometry,
            &fx.interaction,
            rydsim_core::interaction::defaults::OMEGA,
            std::f64::consts::TAU * 1.5,
            &fx.basis,
        )
        .unwrap();
        let opts = PropagationOptions::default();
        group.bench_function(format!("segment_n{}", 2 * rungs), |b| {
            b.iter_batched(
                || StateVector::all_ground(&fx.basis),
                |mut psi| evolve(&mut psi, &h, 0.01, &opts).unwrap(),
                BatchSize::SmallInput,
            )
        });
    }
    group.finish();
}

fn bench_grape(c: &mut Criterion) {
    let fx = ladder(3);
    let pulse = sweep_pulse(0.8, 60);
    let cfg = GrapeConfig {
        n_samples: 2,
        disorder_sigma_um: 0.060,
        max_iterations: 1,
        ..Default::default()
    };
    c.bench_function("grape/cost_n6", |b| {
        b.iter(|| grape_cost(&pulse, &fx.geometry, &fx.interaction, &fx.target, &cfg).unwrap().cost)
    });
    c.bench_function("grape/gradient_n6", |b| {
        b.iter(|| {
            grape_gradient(&pulse, &fx.geometry, &fx.interaction, &fx.target, &cfg).unwrap().0.cost
        })
    });
}

fn bench_master_equation(c: &mut Criterion) {
    let tog = TogPulse {
        omega: std::f64::consts::TAU * 3.0,
        blockade: std::f64::consts::TAU * 600.0,
        amp: 1.0,
        freq: 15.0,
        phase0: 0.3,
        duration: 0.4,
        comp_phase: 0.0,
        n_slices: 100,
    };
    let h = slice_hamiltonians(&tog, 100, None, None).swap_remove(0);
    let decay = DecayModel::with_observed_branching(0.0125);
    let jumps = JumpOperators::from_decay_model(&decay);
    let mut amps = vec![Complex64::ZERO; 16];
    amps[5] = Complex64::ONE;
    let rho = DensityMatrix4L::from_pure(&amps);
    c.bench_function("gate/master_equation_step", |b| {
        b.iter(|| master_equation_step(&rho, &h, &jumps, 2e-4).unwrap().trace())
    });
}

criterion_group!(benches, bench_basis, bench_propagation, bench_grape, bench_master_equation);
criterion_main!(benches);
