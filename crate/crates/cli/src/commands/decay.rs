//! `decay`: post-selected decay curves and fitted time constants.

use std::path::Path;

use rydsim_core::decay::{decay_curve_analysis, DetectionMode};

use crate::config::{ConfigError, RunConfig};
use crate::output;
use crate::Failure;

pub fn run(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let model = config.decay_model.build()?;
    let d = &config.decay;
    if d.t_points < 3 {
        return Err(ConfigError {
            key: "decay.t_points".into(),
            message: "need at least 3 time points".into(),
        }
        .into());
    }
    let p_det = d.p_det.unwrap_or_else(|| model.detection_fidelity(DetectionMode::RQubit));
    let t_grid: Vec<f64> = (0..d.t_points)
        .map(|i| i as f64 * d.t_max_us / (d.t_points - 1) as f64)
        .collect();
    let fits = decay_curve_analysis(&d.p0_grid, model.gamma, p_det, &t_grid)
        .map_err(Failure::from)?;

    let mut csv = String::from("P0,tau_us,tau_err\n");
    for f in &fits {
        if f.diverged {
            csv.push_str(&format!("{},inf,0\n", f.p0));
        } else {
            csv.push_str(&format!("{},{},{}\n", f.p0, f.tau_us, f.tau_err));
        }
    }
    output::write_text(out, "tau.csv", &csv)?;
    println!("decay: {} curves fitted (p_det = {p_det})", fits.len());
    Ok(())
}
