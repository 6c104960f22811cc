// scratch pilot for the N=8 robust-vs-clean comparison
use std::time::Instant;

use rydsim_core::analysis::{ghz_fidelity, StateMixture};
use rydsim_core::geometry::{DisorderSampler, Geometry};
use rydsim_core::grape::{grape_cost, optimize_pulse, GhzTarget, GrapeConfig};
use rydsim_core::hilbert::Basis;
use rydsim_core::interaction::{defaults, InteractionModel};
use rydsim_core::pulse::PulseProfile;
use rydsim_core::StateVector;

fn main() {
    let t0 = Instant::now();
    let geometry = Geometry::ladder(4, defaults::SPACING_UM, defaults::SPACING_UM).unwrap();
    let interaction = InteractionModel::isotropic(defaults::c6());
    let basis = Basis::full(8).unwrap();
    let target = GhzTarget::checkerboard(&basis, &geometry).unwrap();
    let omega = defaults::OMEGA;
    let tau = std::f64::consts::TAU;

    let args: Vec<String> = std::env::args().collect();
    let t_final: f64 = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(1.4);
    let n_samples: usize = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(12);
    let max_iter: usize = args.get(3).and_then(|s| s.parse().ok()).unwrap_or(60);
    let grid: usize = args.get(4).and_then(|s| s.parse().ok()).unwrap_or(150);

    let initial = PulseProfile::linear_ramp(0.6, grid, omega, 0.2, -tau * 8.0, tau * 6.0).unwrap();

    let robust_cfg = GrapeConfig {
        n_samples,
        disorder_sigma_um: 0.060,
        continuation_dt: 0.2,
        max_iterations: max_iter,
        seed: 1,
        ..Default::default()
    };
    let robust = optimize_pulse(&initial, &geometry, &interaction, &target, &robust_cfg, t_final).unwrap();
    println!(
        "robust opt: cost {:.4e} fid {:.4} stalled={} [{:.0?}]",
        robust.trace.last().unwrap().cost,
        robust.trace.last().unwrap().fidelity_mean,
        robust.stalled,
        t0.elapsed()
    );

    let t1 = Instant::now();
    let clean_cfg = GrapeConfig {
        n_samples: 1,
        disorder_sigma_um: 0.0,
        continuation_dt: 0.2,
        max_iterations: max_iter,
        seed: 1,
        ..Default::default()
    };
    let clean = optimize_pulse(&initial, &geometry, &interaction, &target, &clean_cfg, t_final).unwrap();
    println!(
        "clean opt: cost {:.4e} fid {:.4} stalled={} [{:.0?}]",
        clean.trace.last().unwrap().cost,
        clean.trace.last().unwrap().fidelity_mean,
        clean.stalled,
        t1.elapsed()
    );

    // evaluation at 74 nm over 200 samples
    let eval = |pulse: &PulseProfile, label: &str| {
        let sampler = DisorderSampler::new(0.074, 99).unwrap();
        let mut mean = 0.0;
        let n = 200;
        for k in 0..n {
            let g = sampler.sample(&geometry, k as u64);
            let mut psi = StateVector::all_ground(&basis);
            let dt = pulse.dt();
            for j in 0..pulse.len() {
                let h = rydsim_core::interaction::build_hamiltonian(
                    &g, &interaction, pulse.omega()[j], pulse.delta()[j], &basis,
                ).unwrap();
                rydsim_core::propagate::evolve(&mut psi, &h, dt, &Default::default()).unwrap();
            }
            let f = ghz_fidelity(&StateMixture::pure(psi), &target).unwrap().fidelity;
            mean += f / n as f64;
        }
        println!("{label}: disorder-averaged fidelity {mean:.4}");
        mean
    };
    let t2 = Instant::now();
    let fr = eval(&robust.pulse, "robust@74nm");
    let fc = eval(&clean.pulse, "clean@74nm");
    println!("margin: {:.2} pp  [eval {:.0?}]", (fr - fc) * 100.0, t2.elapsed());

    // clean-pulse clean fidelity for reference
    let cb = grape_cost(&clean.pulse, &geometry, &interaction, &target, &clean_cfg).unwrap();
    println!("clean pulse at dr=0: fid {:.4}", cb.fidelity_mean);
    let crossings = rydsim_core::pulse::sweep_profile_report(&robust.pulse, 1.3).unwrap();
    println!("robust profile crossings of 1.3: {}", crossings.times.len());
    println!("total {:.0?}", t0.elapsed());
}
