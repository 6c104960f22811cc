//! Level layout of the two-atom, four-level gate space.
//!
//! Per atom: the nuclear-spin qubit levels `m0`, `m1`, the Rydberg level
//! `r0` driven from `m1`, and an auxiliary `decay` level that collects
//! population leaving the qubit subspace and couples to nothing coherently.
//! The two-atom product space has dimension exactly 16, indexed
//! `4 * level(atom 1) + level(atom 2)`. The computational qubit is
//! `|0> = |m0>`, `|1> = |m1>`.

use num_complex::Complex64;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Level {
    M0 = 0,
    M1 = 1,
    R0 = 2,
    Decay = 3,
}

pub const N_LEVELS: usize = 4;
pub const DIM: usize = 16;

/// Static description of the two-atom four-level space.
#[derive(Copy, Clone, Debug, Default)]
pub struct FourLevelBasis;

impl FourLevelBasis {
    pub const fn dim(&self) -> usize {
        DIM
    }

    /// Product index of `(atom1, atom2)` levels.
    pub fn index(&self, a: Level, b: Level) -> usize {
        idx(a, b)
    }
}

pub fn idx(a: Level, b: Level) -> usize {
    4 * a as usize + b as usize
}

/// Level of the given atom (0 or 1) in a product index.
pub fn level_of(index: usize, atom: usize) -> usize {
    if atom == 0 {
        index / 4
    } else {
        index % 4
    }
}

/// Product index of computational state `|q1 q2>`.
pub fn comp_index(q1: usize, q2: usize) -> usize {
    let l = |q: usize| if q == 0 { Level::M0 } else { Level::M1 };
    idx(l(q1), l(q2))
}

/// The four computational product indices in `|00>, |01>, |10>, |11>` order.
pub fn comp_indices() -> [usize; 4] {
    [comp_index(0, 0), comp_index(0, 1), comp_index(1, 0), comp_index(1, 1)]
}

/// Embed a computational 4-vector into the 16-dimensional space.
pub fn embed_comp(amps: &[Complex64]) -> Vec<Complex64> {
    let mut v = vec![Complex64::ZERO; DIM];
    for (k, &i) in comp_indices().iter().enumerate() {
        v[i] = amps[k];
    }
    v
}

/// Restrict a 16-vector to its computational components.
pub fn restrict_comp(v: &[Complex64]) -> [Complex64; 4] {
    let idxs = comp_indices();
    [v[idxs[0]], v[idxs[1]], v[idxs[2]], v[idxs[3]]]
}

/// Population of atom `atom` in level `lvl`.
pub fn level_population(v: &[Complex64], atom: usize, lvl: Level) -> f64 {
    v.iter()
        .enumerate()
        .filter(|(i, _)| level_of(*i, atom) == lvl as usize)
        .map(|(_, a)| a.norm_sqr())
        .sum()
}

/// Apply a single-qubit unitary `u` (2x2 on `{m0, m1}`) to both atoms,
/// leaving `r0` and `decay` untouched.
pub fn apply_global_single_qubit(u: &[[Complex64; 2]; 2], v: &[Complex64]) -> Vec<Complex64> {
    let mut mid = vec![Complex64::ZERO; DIM];
    // atom 2 (fast index)
    for block in 0..4 {
        let base = 4 * block;
        let a0 = v[base];
        let a1 = v[base + 1];
        mid[base] = u[0][0] * a0 + u[0][1] * a1;
        mid[base + 1] = u[1][0] * a0 + u[1][1] * a1;
        mid[base + 2] = v[base + 2];
        mid[base + 3] = v[base + 3];
    }
    // atom 1 (slow index)
    let mut out = vec![Complex64::ZERO; DIM];
    for col in 0..4 {
        let a0 = mid[col];
        let a1 = mid[4 + col];
        out[col] = u[0][0] * a0 + u[0][1] * a1;
        out[4 + col] = u[1][0] * a0 + u[1][1] * a1;
        out[8 + col] = mid[8 + col];
        out[12 + col] = mid[12 + col];
    }
    out
}
