//! Atom geometries and shot-to-shot position disorder.
//!
//! The workhorse layout is a two-leg ladder: `rungs` columns spaced `ax`
//! along the legs, legs separated by `ay`. Sites `0..L-1` are the top leg
//! left to right and `L..2L-1` the bottom leg left to right. The circular
//! index walks the perimeter (top leg left to right, bottom leg right to
//! left), so adjacent circular indices are always nearest neighbors and the
//! two antiferromagnetic checkerboard configurations alternate along it.

use crate::error::{Result, SimError};
use crate::hilbert::Bits;
use crate::random::derived_rng;
use rand_distr::{Distribution, Normal};

#[derive(Clone, Debug, PartialEq)]
pub enum LatticeKind {
    Ladder { rungs: usize, ax: f64, ay: f64 },
    Explicit,
}

/// Nominal atom positions in um, plus lattice metadata.
#[derive(Clone, Debug)]
pub struct Geometry {
    positions: Vec<[f64; 2]>,
    kind: LatticeKind,
    circular: Vec<usize>,
}

impl Geometry {
    /// Two-leg ladder with `rungs` columns.
    pub fn ladder(rungs: usize, ax: f64, ay: f64) -> Result<Self> {
        if rungs < 1 {
            return Err(SimError::InvalidModel("ladder needs at least one rung".into()));
        }
        if ax <= 0.0 || ay <= 0.0 {
            return Err(SimError::InvalidModel("ladder spacings must be positive".into()));
        }
        let mut positions = Vec::with_capacity(2 * rungs);
        for i in 0..rungs {
            positions.push([i as f64 * ax, ay]);
        }
        for i in 0..rungs {
            positions.push([i as f64 * ax, 0.0]);
        }
        let mut circular: Vec<usize> = (0..rungs).collect();
        circular.extend((rungs..2 * rungs).rev());
        Ok(Self { positions, kind: LatticeKind::Ladder { rungs, ax, ay }, circular })
    }

    /// Explicit positions with an optional circular site order (defaults to
    /// the given order).
    pub fn explicit(positions: Vec<[f64; 2]>, circular: Option<Vec<usize>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(SimError::InvalidModel("geometry needs at least one atom".into()));
        }
        let n = positions.len();
        let circular = circular.unwrap_or_else(|| (0..n).collect());
        let mut seen = vec![false; n];
        if circular.len() != n {
            return Err(SimError::InvalidModel("circular index length differs from atom count".into()));
        }
        for &c in &circular {
            if c >= n || seen[c] {
                return Err(SimError::InvalidModel("circular index must visit each site exactly once".into()));
            }
            seen[c] = true;
        }
        Ok(Self { positions, kind: LatticeKind::Explicit, circular })
    }

    pub fn n_sites(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[[f64; 2]] {
        &self.positions
    }

    pub fn position(&self, i: usize) -> [f64; 2] {
        self.positions[i]
    }

    pub fn kind(&self) -> &LatticeKind {
        &self.kind
    }

    /// Sites in perimeter order; `circular_index()[k]` is the site at
    /// circular position `k`.
    pub fn circular_index(&self) -> &[usize] {
        &self.circular
    }

    pub fn distance(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.positions[i];
        let [xj, yj] = self.positions[j];
        ((xi - xj).powi(2) + (yi - yj).powi(2)).sqrt()
    }

    /// Angle of the pair axis in the lattice frame, in radians.
    pub fn pair_angle(&self, i: usize, j: usize) -> f64 {
        let [xi, yi] = self.positions[i];
        let [xj, yj] = self.positions[j];
        (yj - yi).atan2(xj - xi)
    }

    /// Nearest-neighbor edges. For a ladder these are the leg and rung bonds;
    /// for explicit geometries, all pairs within 5% of the minimum spacing.
    pub fn nn_edges(&self) -> Vec<(usize, usize)> {
        match self.kind {
            LatticeKind::Ladder { rungs, .. } => {
                let mut edges = Vec::new();
                for i in 0..rungs - 1 {
                    edges.push((i, i + 1));
                    edges.push((rungs + i, rungs + i + 1));
                }
                for i in 0..rungs {
                    edges.push((i, rungs + i));
                }
                edges
            }
            LatticeKind::Explicit => {
                let n = self.n_sites();
                let mut dmin = f64::INFINITY;
                for i in 0..n {
                    for j in i + 1..n {
                        dmin = dmin.min(self.distance(i, j));
                    }
                }
                let mut edges = Vec::new();
                for i in 0..n {
                    for j in i + 1..n {
                        if self.distance(i, j) <= 1.05 * dmin {
                            edges.push((i, j));
                        }
                    }
                }
                edges
            }
        }
    }

    /// The two antiferromagnetic checkerboard configurations `(A, A_bar)`:
    /// even circular positions excited, and its flip.
    pub fn checkerboard_configs(&self) -> Result<(Bits, Bits)> {
        let n = self.n_sites();
        if n > 32 {
            return Err(SimError::Capacity(format!("{n} sites exceeds packed limit")));
        }
        if n % 2 != 0 {
            return Err(SimError::InvalidModel(
                "checkerboard assignment needs an even number of sites".into(),
            ));
        }
        let mut a: Bits = 0;
        for (pos, &site) in self.circular.iter().enumerate() {
            if pos % 2 == 0 {
                a |= 1 << site;
            }
        }
        let mask: Bits = if n == 32 { !0 } else { (1u32 << n) - 1 };
        Ok((a, !a & mask))
    }

    /// Rescale one lattice axis about the geometry centroid.
    pub fn scaled_axis(&self, axis: usize, factor: f64) -> Result<Self> {
        if axis > 1 {
            return Err(SimError::InvalidModel("axis must be 0 (x) or 1 (y)".into()));
        }
        if factor <= 0.0 {
            return Err(SimError::InvalidModel("scale factor must be positive".into()));
        }
        let n = self.n_sites() as f64;
        let center: f64 = self.positions.iter().map(|p| p[axis]).sum::<f64>() / n;
        let mut positions = self.positions.clone();
        for p in &mut positions {
            p[axis] = center + (p[axis] - center) * factor;
        }
        let kind = match self.kind {
            LatticeKind::Ladder { rungs, ax, ay } => {
                if axis == 0 {
                    LatticeKind::Ladder { rungs, ax: ax * factor, ay }
                } else {
                    LatticeKind::Ladder { rungs, ax, ay: ay * factor }
                }
            }
            LatticeKind::Explicit => LatticeKind::Explicit,
        };
        Ok(Self { positions, kind, circular: self.circular.clone() })
    }

    /// Text serialization: a `ladder rungs=<k> ax=<um> ay=<um>` header when
    /// applicable, then one `index x_um y_um` line per atom.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        if let LatticeKind::Ladder { rungs, ax, ay } = self.kind {
            out.push_str(&format!("ladder rungs={rungs} ax={ax} ay={ay}\n"));
        }
        for (i, p) in self.positions.iter().enumerate() {
            out.push_str(&format!("{i} {} {}\n", p[0], p[1]));
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty()).peekable();
        let mut kind = LatticeKind::Explicit;
        let mut circular = None;
        if let Some(first) = lines.peek() {
            if first.starts_with("ladder") {
                let header = lines.next().unwrap();
                let mut rungs = None;
                let mut ax = None;
                let mut ay = None;
                for field in header.split_whitespace().skip(1) {
                    let (k, v) = field
                        .split_once('=')
                        .ok_or_else(|| SimError::Parse(format!("bad geometry header field {field:?}")))?;
                    match k {
                        "rungs" => rungs = Some(v.parse::<usize>().map_err(|e| SimError::Parse(e.to_string()))?),
                        "ax" => ax = Some(v.parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?),
                        "ay" => ay = Some(v.parse::<f64>().map_err(|e| SimError::Parse(e.to_string()))?),
                        other => return Err(SimError::Parse(format!("unknown geometry key {other:?}"))),
                    }
                }
                let rungs = rungs.ok_or_else(|| SimError::Parse("ladder header missing rungs".into()))?;
                let ax = ax.ok_or_else(|| SimError::Parse("ladder header missing ax".into()))?;
                let ay = ay.ok_or_else(|| SimError::Parse("ladder header missing ay".into()))?;
                kind = LatticeKind::Ladder { rungs, ax, ay };
                let reference = Self::ladder(rungs, ax, ay)?;
                circular = Some(reference.circular);
            }
        }
        let mut indexed: Vec<(usize, [f64; 2])> = Vec::new();
        for line in lines {
            let mut parts = line.split_whitespace();
            let idx: usize = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing atom index".into()))?
                .parse()
                .map_err(|e: std::num::ParseIntError| SimError::Parse(e.to_string()))?;
            let x: f64 = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing x coordinate".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| SimError::Parse(e.to_string()))?;
            let y: f64 = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing y coordinate".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| SimError::Parse(e.to_string()))?;
            indexed.push((idx, [x, y]));
        }
        indexed.sort_by_key(|(i, _)| *i);
        for (k, (i, _)) in indexed.iter().enumerate() {
            if *i != k {
                return Err(SimError::Parse(format!("atom indices not contiguous at {i}")));
            }
        }
        let positions: Vec<[f64; 2]> = indexed.into_iter().map(|(_, p)| p).collect();
        match kind {
            LatticeKind::Ladder { rungs, .. } => {
                if positions.len() != 2 * rungs {
                    return Err(SimError::Parse(format!(
                        "ladder with {rungs} rungs expects {} atoms, found {}",
                        2 * rungs,
                        positions.len()
                    )));
                }
                Ok(Self { positions, kind, circular: circular.unwrap() })
            }
            LatticeKind::Explicit => Self::explicit(positions, None),
        }
    }
}

/// Isotropic Gaussian position noise applied independently per coordinate.
#[derive(Copy, Clone, Debug)]
pub struct DisorderSampler {
    /// Standard deviation in um.
    pub sigma_um: f64,
    pub seed: u64,
}

impl DisorderSampler {
    pub fn new(sigma_um: f64, seed: u64) -> Result<Self> {
        if sigma_um < 0.0 || !sigma_um.is_finite() {
            return Err(SimError::InvalidModel("disorder sigma must be non-negative".into()));
        }
        Ok(Self { sigma_um, seed })
    }

    /// Sample realization `index`. `sigma = 0` returns the input exactly;
    /// a fixed `(seed, index)` pair always produces the same perturbation.
    pub fn sample(&self, geometry: &Geometry, index: u64) -> Geometry {
        if self.sigma_um == 0.0 {
            return geometry.clone();
        }
        let mut rng = derived_rng(self.seed, index);
        let normal = Normal::new(0.0, self.sigma_um).expect("validated sigma");
        let mut g = geometry.clone();
        for p in &mut g.positions {
            p[0] += normal.sample(&mut rng);
            p[1] += normal.sample(&mut rng);
        }
        g
    }
}
