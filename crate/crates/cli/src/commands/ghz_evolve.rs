//! `ghz-evolve`: evolve under a pulse file with disorder (and optionally
//! decay), then emit the correlation, magnetism, parity, coherence-bound,
//! and fidelity data.

use std::path::Path;

use rydsim_core::analysis::{
    coherence_lower_bound, g2_from_shots, g2_from_state, ghz_fidelity, parity_offset, parity_scan,
    sample_shots, staggered_values_from_state, uniform_phi_grid, z2_population_from_shots,
    z2_population_from_state, StateMixture,
};
use rydsim_core::analysis::shots::shots_to_csv;
use rydsim_core::decay::DetectionMode;
use rydsim_core::geometry::{DisorderSampler, LatticeKind};
use rydsim_core::grape::GhzTarget;
use rydsim_core::hilbert::{Basis, StateVector};
use rydsim_core::interaction::build_hamiltonian;
use rydsim_core::propagate::{evolve, PropagationOptions};
use rydsim_core::pulse::PulseProfile;
use rydsim_core::random::derive_seed;
use rydsim_core::Bits;

use crate::config::{ConfigError, RunConfig};
use crate::output;
use crate::Failure;

pub fn run(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let geometry = config.geometry.build()?;
    let interaction = config.interaction.build()?;
    let e = &config.evolve;
    let basis = Basis::full(geometry.n_sites()).map_err(Failure::from)?;
    let target = GhzTarget::checkerboard(&basis, &geometry).map_err(Failure::from)?;
    let opts = PropagationOptions::default();

    // assemble the disorder ensemble of final states
    let mut weights_states: Vec<(f64, StateVector)> = Vec::new();
    let mut acceptance_acc = 0.0;
    let mut survival_acc = 0.0;
    let mut fidelity_ld_acc = 0.0;
    let mut fidelity_raw_acc = 0.0;
    let decay = e.with_decay.then(|| config.decay_model.build()).transpose()?;

    if e.inject_perfect_ghz {
        weights_states.push((1.0, target.state()));
        acceptance_acc = 1.0;
        survival_acc = 1.0;
        fidelity_ld_acc = 1.0;
        fidelity_raw_acc = 1.0;
    } else {
        let pulse_path = e.pulse_file.as_ref().ok_or_else(|| ConfigError {
            key: "evolve.pulse_file".into(),
            message: "required unless inject_perfect_ghz is set".into(),
        })?;
        let pulse_text = std::fs::read_to_string(pulse_path).map_err(|err| ConfigError {
            key: "evolve.pulse_file".into(),
            message: format!("{}: {err}", pulse_path.display()),
        })?;
        let pulse = PulseProfile::from_csv(&pulse_text).map_err(Failure::from)?;
        let sampler = DisorderSampler::new(e.disorder_sigma_nm * 1e-3, config.seed)
            .map_err(Failure::from)?;
        let n_samples = e.n_disorder_samples.max(1);
        let dt = pulse.dt();
        for k in 0..n_samples {
            let geom_k = sampler.sample(&geometry, k as u64);
            let mut psi = StateVector::all_ground(&basis);
            for j in 0..pulse.len() {
                let mut h = build_hamiltonian(
                    &geom_k,
                    &interaction,
                    pulse.omega()[j],
                    pulse.delta()[j],
                    &basis,
                )
                .map_err(Failure::from)?;
                if let Some(d) = &decay {
                    h = h.with_uniform_decay(d.gamma);
                }
                evolve(&mut psi, &h, dt, &opts).map_err(Failure::from)?;
            }
            let survival = psi.norm_sq();
            let normalized = if survival > 0.0 {
                psi.clone().normalized().map_err(Failure::from)?
            } else {
                psi.clone()
            };
            let f_nj = target.state().overlap_sq(&normalized);
            let (acceptance, f_ld) = match &decay {
                Some(d) => {
                    let p_det = d.detection_fidelity(DetectionMode::RQubit);
                    let acc = survival + (1.0 - survival) * (1.0 - p_det);
                    (acc, survival * f_nj / acc.max(1e-300))
                }
                None => (1.0, f_nj),
            };
            acceptance_acc += acceptance / n_samples as f64;
            survival_acc += survival / n_samples as f64;
            fidelity_ld_acc += f_ld / n_samples as f64;
            fidelity_raw_acc += survival * f_nj / n_samples as f64;
            weights_states.push((1.0 / n_samples as f64, normalized));
        }
    }

    let mixture = StateMixture::new(weights_states).map_err(Failure::from)?;
    if e.dump_state {
        output::write_text(out, "state.txt", &mixture.components()[0].1.to_text())?;
    }

    // shots from the post-selected ensemble
    let per_component = (e.n_shots / mixture.components().len().max(1)).max(1);
    let mut shots = Vec::new();
    for (k, (_, state)) in mixture.components().iter().enumerate() {
        shots.extend(sample_shots(state, per_component, derive_seed(config.seed, 0x53u64 + k as u64)));
    }
    output::write_text(out, "shots.csv", &shots_to_csv(&shots).map_err(Failure::from)?)?;

    // correlation table over the lattice displacement grid
    let (ax, ay, rungs) = match *geometry.kind() {
        LatticeKind::Ladder { rungs, ax, ay } => (ax, ay, rungs),
        LatticeKind::Explicit => (1.0, 1.0, geometry.n_sites() / 2),
    };
    let mut g2_csv = String::from("dx_um,dy_um,g2_exact,g2_shots\n");
    for col in 0..rungs {
        for row in 0..=1usize {
            if col == 0 && row == 0 {
                continue;
            }
            let (dx, dy) = (col as f64 * ax, row as f64 * ay);
            let exact = g2_from_state(&mixture, &geometry, dx, dy);
            let sampled = g2_from_shots(&shots, &geometry, dx, dy);
            if let (Ok(exact), Ok(sampled)) = (exact, sampled) {
                g2_csv.push_str(&format!("{dx},{dy},{exact},{sampled}\n"));
            }
        }
    }
    output::write_text(out, "g2.csv", &g2_csv)?;

    // staggered magnetism histogram
    let staggered = staggered_values_from_state(&mixture, &geometry).map_err(Failure::from)?;
    let mut stag_csv = String::from("staggered_magnetism,probability\n");
    for (m, p) in &staggered {
        stag_csv.push_str(&format!("{m},{p}\n"));
    }
    output::write_text(out, "staggered.csv", &stag_csv)?;

    // parity scan and coherence bound
    let phis = uniform_phi_grid(e.phi_points.max(2));
    let scan = parity_scan(&mixture, &phis).map_err(Failure::from)?;
    let mut parity_csv = String::from("phi_rad,parity\n");
    for (phi, v) in scan.phis.iter().zip(&scan.values) {
        parity_csv.push_str(&format!("{phi},{v}\n"));
    }
    output::write_text(out, "parity.csv", &parity_csv)?;
    let offset = parity_offset(&scan);
    let lookup = |bits: Bits| Some(mixture.population(bits));
    let bound = coherence_lower_bound(offset, &lookup, &target).map_err(Failure::from)?;

    let fid = ghz_fidelity(&mixture, &target).map_err(Failure::from)?;
    let report = serde_json::json!({
        "fidelity_mixture": fid.fidelity,
        "population_a": fid.population_a,
        "population_a_bar": fid.population_a_bar,
        "coherence_re": fid.coherence_re,
        "coherence_lower_bound": bound,
        "parity_offset": offset,
        "z2_population_exact": z2_population_from_state(&mixture, &geometry).map_err(Failure::from)?,
        "z2_population_shots": z2_population_from_shots(&shots, &geometry),
        "loss_detected_fidelity_mean": fidelity_ld_acc,
        "raw_fidelity_mean": fidelity_raw_acc,
        "acceptance_mean": acceptance_acc,
        "survival_mean": survival_acc,
        "n_disorder_samples": mixture.components().len(),
    });
    output::write_json(out, "analysis.json", &report)?;
    println!(
        "ghz-evolve: loss-detected fidelity {:.4}, acceptance {:.4}, coherence bound {:.4}",
        fidelity_ld_acc, acceptance_acc, bound
    );
    Ok(())
}
