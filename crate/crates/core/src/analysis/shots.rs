//! Single-shot measurement records and Born sampling.
//!
//! A shot assigns each site one of `{0, 1, L}`: ground, excited, or lost.
//! Shot files are CSV with one row per shot and columns `site_0..site_{N-1}`.

use crate::error::{Result, SimError};
use crate::hilbert::StateVector;
use crate::random::derived_rng;
use rand::Rng;
use rayon::prelude::*;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum SiteOutcome {
    Ground,
    Excited,
    Lost,
}

impl SiteOutcome {
    pub fn to_char(self) -> char {
        match self {
            SiteOutcome::Ground => '0',
            SiteOutcome::Excited => '1',
            SiteOutcome::Lost => 'L',
        }
    }

    pub fn from_str_cell(s: &str) -> Result<Self> {
        match s.trim() {
            "0" => Ok(SiteOutcome::Ground),
            "1" => Ok(SiteOutcome::Excited),
            "L" | "l" => Ok(SiteOutcome::Lost),
            other => Err(SimError::Parse(format!("bad shot cell {other:?}"))),
        }
    }
}

/// One measurement shot over all sites.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ShotRecord {
    pub outcomes: Vec<SiteOutcome>,
}

impl ShotRecord {
    pub fn n_sites(&self) -> usize {
        self.outcomes.len()
    }

    pub fn has_loss(&self) -> bool {
        self.outcomes.iter().any(|o| *o == SiteOutcome::Lost)
    }

    pub fn excited_count(&self) -> usize {
        self.outcomes.iter().filter(|o| **o == SiteOutcome::Excited).count()
    }
}

/// Global parity `(-1)^{number of excited sites}`; `None` when the shot
/// contains a lost site (discarded by parity analyses).
pub fn parity_of_shot(shot: &ShotRecord) -> Option<f64> {
    if shot.has_loss() {
        None
    } else if shot.excited_count() % 2 == 0 {
        Some(1.0)
    } else {
        Some(-1.0)
    }
}

/// Born-sample `n_shots` configuration measurements from a state.
pub fn sample_shots(state: &StateVector, n_shots: usize, seed: u64) -> Vec<ShotRecord> {
    let basis = state.basis();
    let mut cumulative = Vec::with_capacity(basis.dim());
    let norm = state.norm_sq();
    let mut acc = 0.0;
    for a in state.amplitudes() {
        acc += a.norm_sqr() / norm;
        cumulative.push(acc);
    }
    let n_sites = basis.n_sites();
    (0..n_shots)
        .into_par_iter()
        .map(|shot| {
            let mut rng = derived_rng(seed, shot as u64);
            let u: f64 = rng.gen();
            let idx = cumulative.partition_point(|&c| c < u).min(basis.dim() - 1);
            let cfg = basis.config(idx);
            let outcomes = (0..n_sites)
                .map(|s| if cfg.is_excited(s) { SiteOutcome::Excited } else { SiteOutcome::Ground })
                .collect();
            ShotRecord { outcomes }
        })
        .collect()
}

/// CSV with header `site_0,...,site_{N-1}` and `{0,1,L}` cells.
pub fn shots_to_csv(shots: &[ShotRecord]) -> Result<String> {
    let n = shots
        .first()
        .map(|s| s.n_sites())
        .ok_or_else(|| SimError::InvalidModel("no shots to serialize".into()))?;
    let mut out = String::new();
    let header: Vec<String> = (0..n).map(|i| format!("site_{i}")).collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for s in shots {
        if s.n_sites() != n {
            return Err(SimError::Mismatch("shots have inconsistent site counts".into()));
        }
        let row: Vec<String> = s.outcomes.iter().map(|o| o.to_char().to_string()).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    Ok(out)
}

pub fn shots_from_csv(text: &str) -> Result<Vec<ShotRecord>> {
    let mut lines = text.lines().filter(|l| !l.trim().is_empty());
    let header = lines.next().ok_or_else(|| SimError::Parse("empty shot file".into()))?;
    let n = header.split(',').count();
    if !header.starts_with("site_0") {
        return Err(SimError::Parse("shot file header must start with site_0".into()));
    }
    let mut shots = Vec::new();
    for line in lines {
        let cells: Vec<&str> = line.split(',').collect();
        if cells.len() != n {
            return Err(SimError::Parse(format!(
                "shot row has {} cells, header has {n}",
                cells.len()
            )));
        }
        let outcomes = cells
            .iter()
            .map(|c| SiteOutcome::from_str_cell(c))
            .collect::<Result<Vec<_>>>()?;
        shots.push(ShotRecord { outcomes });
    }
    Ok(shots)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::Basis;
    use num_complex::Complex64;
    use std::sync::Arc;

    #[test]
    fn sampling_matches_populations() {
        let basis = Basis::full(2).unwrap();
        let amps = vec![
            Complex64::new(0.5f64.sqrt(), 0.0),
            Complex64::ZERO,
            Complex64::ZERO,
            Complex64::new(0.5f64.sqrt(), 0.0),
        ];
        let psi = StateVector::new(Arc::clone(&basis), amps, 0.0).unwrap();
        let shots = sample_shots(&psi, 20_000, 5);
        let both = shots.iter().filter(|s| s.excited_count() == 2).count() as f64 / 20_000.0;
        assert!((both - 0.5).abs() < 0.02, "P(11) = {both}");
        // no mixed outcomes for this state
        assert!(shots.iter().all(|s| s.excited_count() == 0 || s.excited_count() == 2));
    }

    #[test]
    fn csv_round_trip_with_loss() {
        let shots = vec![
            ShotRecord { outcomes: vec![SiteOutcome::Ground, SiteOutcome::Excited] },
            ShotRecord { outcomes: vec![SiteOutcome::Lost, SiteOutcome::Ground] },
        ];
        let text = shots_to_csv(&shots).unwrap();
        assert!(text.starts_with("site_0,site_1\n"));
        let back = shots_from_csv(&text).unwrap();
        assert_eq!(back, shots);
    }

    #[test]
    fn parity_discards_loss() {
        let s = ShotRecord { outcomes: vec![SiteOutcome::Excited, SiteOutcome::Excited] };
        assert_eq!(parity_of_shot(&s), Some(1.0));
        let s = ShotRecord { outcomes: vec![SiteOutcome::Excited, SiteOutcome::Ground] };
        assert_eq!(parity_of_shot(&s), Some(-1.0));
        let s = ShotRecord { outcomes: vec![SiteOutcome::Lost, SiteOutcome::Ground] };
        assert_eq!(parity_of_shot(&s), None);
    }

    #[test]
    fn deterministic_per_seed() {
        let basis = Basis::full(1).unwrap();
        let amps = vec![Complex64::new(0.6, 0.0), Complex64::new(0.8, 0.0)];
        let psi = StateVector::new(Arc::clone(&basis), amps, 0.0).unwrap();
        assert_eq!(sample_shots(&psi, 100, 3), sample_shots(&psi, 100, 3));
    }
}
