//! `analyze`: re-analysis of a recorded shot file against a geometry.

use std::path::Path;

use rydsim_core::analysis::shots::shots_from_csv;
use rydsim_core::analysis::{
    g2_from_shots, parity_of_shot, staggered_magnetism_shot, z2_population_from_shots,
};
use rydsim_core::geometry::LatticeKind;

use crate::config::{ConfigError, RunConfig};
use crate::output;
use crate::Failure;

pub fn run(config: &RunConfig, out: &Path) -> Result<(), Failure> {
    let geometry = config.geometry.build()?;
    let path = config.analyze.shots_file.as_ref().ok_or_else(|| ConfigError {
        key: "analyze.shots_file".into(),
        message: "required for the analyze command".into(),
    })?;
    let text = std::fs::read_to_string(path).map_err(|e| ConfigError {
        key: "analyze.shots_file".into(),
        message: format!("{}: {e}", path.display()),
    })?;
    let shots = shots_from_csv(&text).map_err(Failure::from)?;
    if shots.first().map(|s| s.n_sites()) != Some(geometry.n_sites()) {
        return Err(ConfigError {
            key: "analyze.shots_file".into(),
            message: format!(
                "shot width {:?} does not match geometry with {} sites",
                shots.first().map(|s| s.n_sites()),
                geometry.n_sites()
            ),
        }
        .into());
    }

    let (ax, ay, rungs) = match *geometry.kind() {
        LatticeKind::Ladder { rungs, ax, ay } => (ax, ay, rungs),
        LatticeKind::Explicit => (1.0, 1.0, geometry.n_sites() / 2),
    };
    let mut g2_csv = String::from("dx_um,dy_um,g2_shots\n");
    for col in 0..rungs {
        for row in 0..=1usize {
            if col == 0 && row == 0 {
                continue;
            }
            let (dx, dy) = (col as f64 * ax, row as f64 * ay);
            if let Ok(v) = g2_from_shots(&shots, &geometry, dx, dy) {
                g2_csv.push_str(&format!("{dx},{dy},{v}\n"));
            }
        }
    }
    output::write_text(out, "g2.csv", &g2_csv)?;

    // staggered-magnetism histogram over usable shots
    let mut hist = std::collections::BTreeMap::<i64, usize>::new();
    let mut usable = 0usize;
    for s in &shots {
        if let Some(m) = staggered_magnetism_shot(s, &geometry) {
            *hist.entry(m.round() as i64).or_insert(0) += 1;
            usable += 1;
        }
    }
    let mut stag_csv = String::from("staggered_magnetism,fraction\n");
    for (m, count) in &hist {
        stag_csv.push_str(&format!("{m},{}\n", *count as f64 / usable.max(1) as f64));
    }
    output::write_text(out, "staggered.csv", &stag_csv)?;

    let parities: Vec<f64> = shots.iter().filter_map(parity_of_shot).collect();
    let parity_mean = if parities.is_empty() {
        f64::NAN
    } else {
        parities.iter().sum::<f64>() / parities.len() as f64
    };
    let report = serde_json::json!({
        "n_shots": shots.len(),
        "n_usable": usable,
        "z2_population": z2_population_from_shots(&shots, &geometry),
        "parity_mean": parity_mean,
    });
    output::write_json(out, "analysis.json", &report)?;
    println!("analyze: {} shots, {} usable", shots.len(), usable);
    Ok(())
}
