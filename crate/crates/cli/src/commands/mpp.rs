//! `mpp`: transfer-infidelity and heating sweep over trap-frequency ratio
//! and light-shift inhomogeneity.

use std::path::Path;

use rydsim_core::mpp::sweep_inhomogeneity;

use crate::config::RunConfig;
use crate::output;
use crate::Failure;

pub fn run(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let (base, ratios, deltas, shape) = config.mpp.build()?;
    let rows = sweep_inhomogeneity(&base, &ratios, &deltas, shape).map_err(Failure::from)?;
    let mut csv = String::from("omega_ratio,delta_m_rad_per_us,infidelity,added_quanta\n");
    for r in &rows {
        csv.push_str(&format!(
            "{},{},{},{}\n",
            r.omega_ratio, r.delta_m, r.infidelity, r.added_quanta
        ));
    }
    output::write_text(out, "mpp_sweep.csv", &csv)?;
    println!("mpp: {} sweep points", rows.len());
    Ok(())
}
