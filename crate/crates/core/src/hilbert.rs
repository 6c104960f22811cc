//! Occupation-number basis enumeration and state vectors.
//!
//! Each atom is a two-level system `{|m>, |r>}`; a many-body configuration is
//! a bit string with bit `i` set when site `i` is in `|r>`. The basis is
//! either the full product space (`2^N` configurations) or the
//! blockade-constrained subspace in which no two adjacent sites (per a given
//! edge list) are simultaneously excited. Constrained-basis dynamics realizes
//! the ideal PXP limit of a strongly blockaded array.
//!
//! Configurations are stored in ascending order of their packed integer value
//! (site 0 is the least significant bit). All other modules treat the
//! ordering as opaque and go through the index lookup.

use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Result, SimError};

/// Packed occupation string; bit `i` = 1 means site `i` is in `|r>`.
pub type Bits = u32;

/// Default cap on the atom count for full-space enumeration.
///
/// `2^22` complex doubles is about 67 MB per state vector, a reasonable
/// single-machine ceiling. Override through [`Basis::full_with_cap`].
pub const DEFAULT_FULL_SITE_CAP: usize = 22;

/// Hard limit imposed by the packed representation.
const MAX_SITES: usize = 32;

/// One many-body configuration.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash)]
pub struct BasisConfig {
    pub bits: Bits,
    pub excitation_count: u32,
}

impl BasisConfig {
    pub fn new(bits: Bits) -> Self {
        Self { bits, excitation_count: bits.count_ones() }
    }

    /// Configuration with every site flipped. An involution.
    pub fn flipped(&self, n_sites: usize) -> Self {
        let mask = site_mask(n_sites);
        Self::new(!self.bits & mask)
    }

    pub fn is_excited(&self, site: usize) -> bool {
        self.bits >> site & 1 == 1
    }

    /// Occupation string with site 0 leftmost, e.g. `"0101"`.
    pub fn bit_string(&self, n_sites: usize) -> String {
        let mut s = String::with_capacity(n_sites);
        for i in 0..n_sites {
            s.push(if self.is_excited(i) { '1' } else { '0' });
        }
        s
    }

    pub fn parse_bit_string(s: &str) -> Result<Self> {
        if s.len() > MAX_SITES {
            return Err(SimError::Parse(format!("bit string too long: {s}")));
        }
        let mut bits: Bits = 0;
        for (i, c) in s.chars().enumerate() {
            match c {
                '1' => bits |= 1 << i,
                '0' => {}
                _ => return Err(SimError::Parse(format!("bad bit character {c:?} in {s:?}"))),
            }
        }
        Ok(Self::new(bits))
    }
}

fn site_mask(n_sites: usize) -> Bits {
    if n_sites == MAX_SITES { !0 } else { (1u32 << n_sites) - 1 }
}

/// Whether a basis spans the full product space or the blockaded subspace.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum BasisMode {
    Full,
    /// No two sites joined by an edge are both excited.
    Constrained,
}

/// Ordered set of configurations with config -> index lookup.
#[derive(Debug)]
pub struct Basis {
    n_sites: usize,
    mode: BasisMode,
    adjacency: Vec<(usize, usize)>,
    /// Per-site mask of blockading neighbors (constrained mode).
    neighbor_masks: Vec<Bits>,
    configs: Vec<BasisConfig>,
    /// Constrained mode only: `flip_targets[c * n_sites + site]` is the index
    /// reached by flipping `site` in configuration `c`, or -1 when the flip
    /// leaves the constrained subspace.
    flip_targets: Vec<i32>,
}

impl Basis {
    /// Full product basis over `n_sites` atoms with the default memory cap.
    pub fn full(n_sites: usize) -> Result<Arc<Self>> {
        Self::full_with_cap(n_sites, DEFAULT_FULL_SITE_CAP)
    }

    pub fn full_with_cap(n_sites: usize, cap: usize) -> Result<Arc<Self>> {
        if n_sites == 0 {
            return Err(SimError::InvalidModel("basis needs at least one site".into()));
        }
        if n_sites > cap.min(MAX_SITES) {
            return Err(SimError::Capacity(format!(
                "{n_sites} sites exceeds full-space cap of {}",
                cap.min(MAX_SITES)
            )));
        }
        let dim = 1usize << n_sites;
        let configs = (0..dim as Bits).map(BasisConfig::new).collect();
        Ok(Arc::new(Self {
            n_sites,
            mode: BasisMode::Full,
            adjacency: Vec::new(),
            neighbor_masks: vec![0; n_sites],
            configs,
            flip_targets: Vec::new(),
        }))
    }

    /// Blockade-constrained basis: configurations in which no edge of
    /// `adjacency` has both endpoints excited.
    pub fn constrained(n_sites: usize, adjacency: &[(usize, usize)]) -> Result<Arc<Self>> {
        if n_sites == 0 {
            return Err(SimError::InvalidModel("basis needs at least one site".into()));
        }
        if n_sites > MAX_SITES {
            return Err(SimError::Capacity(format!("{n_sites} sites exceeds packed limit {MAX_SITES}")));
        }
        let mut neighbor_masks = vec![0 as Bits; n_sites];
        for &(a, b) in adjacency {
            if a >= n_sites || b >= n_sites || a == b {
                return Err(SimError::InvalidModel(format!(
                    "adjacency edge ({a}, {b}) references invalid sites for N={n_sites}"
                )));
            }
            neighbor_masks[a] |= 1 << b;
            neighbor_masks[b] |= 1 << a;
        }
        // Depth-first enumeration in ascending packed order: at each site
        // choose 0 before 1, pruning excitations blocked by earlier sites.
        let mut configs = Vec::new();
        let mut stack = vec![(0usize, 0 as Bits)];
        while let Some((site, bits)) = stack.pop() {
            if site == n_sites {
                configs.push(BasisConfig::new(bits));
                continue;
            }
            // Push the excited branch first so the ground branch is explored
            // first (LIFO), yielding ascending order directly.
            let blocked = neighbor_masks[site] & bits != 0;
            if !blocked {
                stack.push((site + 1, bits | 1 << site));
            }
            stack.push((site + 1, bits));
        }
        configs.sort_unstable_by_key(|c| c.bits);
        let mut basis = Self {
            n_sites,
            mode: BasisMode::Constrained,
            adjacency: adjacency.to_vec(),
            neighbor_masks,
            configs,
            flip_targets: Vec::new(),
        };
        basis.build_flip_targets();
        Ok(Arc::new(basis))
    }

    /// Enumerate a basis in the given mode. Adjacency is ignored in full mode.
    pub fn enumerate(n_sites: usize, mode: BasisMode, adjacency: &[(usize, usize)]) -> Result<Arc<Self>> {
        match mode {
            BasisMode::Full => Self::full(n_sites),
            BasisMode::Constrained => Self::constrained(n_sites, adjacency),
        }
    }

    fn build_flip_targets(&mut self) {
        let n = self.n_sites;
        let mut targets = vec![-1i32; self.configs.len() * n];
        for (c, cfg) in self.configs.iter().enumerate() {
            for site in 0..n {
                let t = cfg.bits ^ (1 << site);
                // Raising a site is invalid when a blockading neighbor is
                // excited; lowering is always valid.
                if !cfg.is_excited(site) && self.neighbor_masks[site] & cfg.bits != 0 {
                    continue;
                }
                if let Some(idx) = self.search(t) {
                    targets[c * n + site] = idx as i32;
                }
            }
        }
        self.flip_targets = targets;
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn mode(&self) -> &BasisMode {
        &self.mode
    }

    pub fn adjacency(&self) -> &[(usize, usize)] {
        &self.adjacency
    }

    pub fn dim(&self) -> usize {
        self.configs.len()
    }

    pub fn configs(&self) -> &[BasisConfig] {
        &self.configs
    }

    pub fn config(&self, index: usize) -> BasisConfig {
        self.configs[index]
    }

    fn search(&self, bits: Bits) -> Option<usize> {
        self.configs.binary_search_by_key(&bits, |c| c.bits).ok()
    }

    /// Position of a configuration, or `None` if outside the basis.
    pub fn index_of(&self, bits: Bits) -> Option<usize> {
        match self.mode {
            BasisMode::Full => {
                let idx = bits as usize;
                (idx < self.configs.len()).then_some(idx)
            }
            BasisMode::Constrained => self.search(bits),
        }
    }

    /// Index reached by flipping `site` of configuration `index`, or `None`
    /// when the flip leaves the basis (blockade violation).
    pub fn flip_index(&self, index: usize, site: usize) -> Option<usize> {
        match self.mode {
            BasisMode::Full => Some(index ^ (1 << site)),
            BasisMode::Constrained => {
                let t = self.flip_targets[index * self.n_sites + site];
                (t >= 0).then_some(t as usize)
            }
        }
    }

    /// Index of the all-sites-flipped configuration, when it is in the basis.
    pub fn flipped_index(&self, index: usize) -> Option<usize> {
        let flipped = self.configs[index].flipped(self.n_sites);
        self.index_of(flipped.bits)
    }

    fn mode_label(&self) -> &'static str {
        match self.mode {
            BasisMode::Full => "full",
            BasisMode::Constrained => "constrained",
        }
    }
}

/// Complex amplitudes over a [`Basis`], stamped with an evolution time.
#[derive(Clone, Debug)]
pub struct StateVector {
    basis: Arc<Basis>,
    amplitudes: Vec<Complex64>,
    time: f64,
}

impl StateVector {
    pub fn new(basis: Arc<Basis>, amplitudes: Vec<Complex64>, time: f64) -> Result<Self> {
        if amplitudes.len() != basis.dim() {
            return Err(SimError::Mismatch(format!(
                "amplitude length {} vs basis dim {}",
                amplitudes.len(),
                basis.dim()
            )));
        }
        Ok(Self { basis, amplitudes, time })
    }

    /// Computational basis state `|bits>`.
    pub fn basis_state(basis: &Arc<Basis>, bits: Bits) -> Result<Self> {
        let idx = basis
            .index_of(bits)
            .ok_or_else(|| SimError::InvalidModel(format!("configuration {bits:#b} not in basis")))?;
        let mut amplitudes = vec![Complex64::ZERO; basis.dim()];
        amplitudes[idx] = Complex64::ONE;
        Ok(Self { basis: Arc::clone(basis), amplitudes, time: 0.0 })
    }

    /// The all-ground state `|mm...m>`.
    pub fn all_ground(basis: &Arc<Basis>) -> Self {
        Self::basis_state(basis, 0).expect("0 is always in the basis")
    }

    pub fn basis(&self) -> &Arc<Basis> {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn set_time(&mut self, t: f64) {
        self.time = t;
    }

    pub fn advance_time(&mut self, dt: f64) {
        self.time += dt;
    }

    /// Squared norm; after no-jump evolution this is the survival probability.
    pub fn norm_sq(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn normalize(&mut self) -> Result<()> {
        let n = self.norm_sq().sqrt();
        if n < 1e-300 {
            return Err(SimError::DegenerateState("cannot normalize zero state".into()));
        }
        for a in &mut self.amplitudes {
            *a /= n;
        }
        Ok(())
    }

    pub fn normalized(mut self) -> Result<Self> {
        self.normalize()?;
        Ok(self)
    }

    /// Inner product `<self|other>`.
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    /// `|<self|other>|^2` without normalizing either side.
    pub fn overlap_sq(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    /// Population of configuration `bits` (0 when outside the basis).
    pub fn population(&self, bits: Bits) -> f64 {
        self.basis
            .index_of(bits)
            .map(|i| self.amplitudes[i].norm_sqr())
            .unwrap_or(0.0)
    }

    /// Text dump: header `N=<n> mode=<full|constrained> dim=<d>`, then one
    /// line per configuration `bits amplitude_re amplitude_im`.
    pub fn to_text(&self) -> String {
        let b = &self.basis;
        let mut out = String::new();
        let _ = writeln!(out, "N={} mode={} dim={}", b.n_sites(), b.mode_label(), b.dim());
        for (cfg, amp) in b.configs().iter().zip(&self.amplitudes) {
            let _ = writeln!(out, "{} {} {}", cfg.bit_string(b.n_sites()), amp.re, amp.im);
        }
        out
    }

    /// Parse a dump produced by [`StateVector::to_text`]. The basis is
    /// rebuilt from the header; constrained dumps carry the adjacency.
    pub fn from_text(text: &str, adjacency: &[(usize, usize)]) -> Result<Self> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        let header = lines.next().ok_or_else(|| SimError::Parse("empty state dump".into()))?;
        let mut n_sites = None;
        let mut mode = None;
        let mut dim = None;
        for field in header.split_whitespace() {
            let (key, value) = field
                .split_once('=')
                .ok_or_else(|| SimError::Parse(format!("bad header field {field:?}")))?;
            match key {
                "N" => n_sites = Some(value.parse::<usize>().map_err(|e| SimError::Parse(e.to_string()))?),
                "mode" => {
                    mode = Some(match value {
                        "full" => BasisMode::Full,
                        "constrained" => BasisMode::Constrained,
                        other => return Err(SimError::Parse(format!("unknown mode {other:?}"))),
                    })
                }
                "dim" => dim = Some(value.parse::<usize>().map_err(|e| SimError::Parse(e.to_string()))?),
                other => return Err(SimError::Parse(format!("unknown header key {other:?}"))),
            }
        }
        let n_sites = n_sites.ok_or_else(|| SimError::Parse("header missing N".into()))?;
        let mode = mode.ok_or_else(|| SimError::Parse("header missing mode".into()))?;
        let dim = dim.ok_or_else(|| SimError::Parse("header missing dim".into()))?;
        let basis = Basis::enumerate(n_sites, mode, adjacency)?;
        if basis.dim() != dim {
            return Err(SimError::Parse(format!(
                "header dim {dim} disagrees with enumerated dim {}",
                basis.dim()
            )));
        }
        let mut amplitudes = vec![Complex64::ZERO; dim];
        let mut count = 0usize;
        for line in lines {
            let mut parts = line.split_whitespace();
            let bits = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing bits column".into()))
                .and_then(BasisConfig::parse_bit_string)?;
            let re: f64 = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing re column".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| SimError::Parse(e.to_string()))?;
            let im: f64 = parts
                .next()
                .ok_or_else(|| SimError::Parse("missing im column".into()))?
                .parse()
                .map_err(|e: std::num::ParseFloatError| SimError::Parse(e.to_string()))?;
            let idx = basis
                .index_of(bits.bits)
                .ok_or_else(|| SimError::Parse(format!("configuration {} not in basis", bits.bits)))?;
            amplitudes[idx] = Complex64::new(re, im);
            count += 1;
        }
        if count != dim {
            return Err(SimError::Parse(format!("expected {dim} amplitude lines, found {count}")));
        }
        Self::new(basis, amplitudes, 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain_edges(n: usize) -> Vec<(usize, usize)> {
        (0..n - 1).map(|i| (i, i + 1)).collect()
    }

    #[test]
    fn full_basis_n3_has_8_configs() {
        let b = Basis::full(3).unwrap();
        assert_eq!(b.dim(), 8);
        for (i, c) in b.configs().iter().enumerate() {
            assert_eq!(c.bits as usize, i);
            assert_eq!(b.index_of(c.bits), Some(i));
        }
    }

    #[test]
    fn constrained_chain_matches_brute_force_filter() {
        // Independent oracle: filter all 2^N strings for adjacent 11 pairs.
        for n in 2..=10usize {
            let edges = chain_edges(n);
            let b = Basis::constrained(n, &edges).unwrap();
            let expected: Vec<Bits> = (0..1u32 << n)
                .filter(|bits| edges.iter().all(|&(i, j)| bits >> i & 1 == 0 || bits >> j & 1 == 0))
                .collect();
            let got: Vec<Bits> = b.configs().iter().map(|c| c.bits).collect();
            assert_eq!(got, expected, "chain N={n}");
        }
        // Fibonacci count: N=4 chain has F(6) = 8 configurations.
        let b = Basis::constrained(4, &chain_edges(4)).unwrap();
        assert_eq!(b.dim(), 8);
    }

    #[test]
    fn constrained_two_sites_drops_double_excitation() {
        let b = Basis::constrained(2, &[(0, 1)]).unwrap();
        let bits: Vec<Bits> = b.configs().iter().map(|c| c.bits).collect();
        assert_eq!(bits, vec![0b00, 0b01, 0b10]);
        assert_eq!(b.dim(), 3);
        assert_eq!(b.index_of(0b11), None);
    }

    #[test]
    fn capacity_error_beyond_cap() {
        assert!(matches!(Basis::full(23), Err(SimError::Capacity(_))));
        assert!(Basis::full_with_cap(23, 24).is_ok());
    }

    #[test]
    fn invalid_adjacency_rejected() {
        assert!(Basis::constrained(3, &[(0, 3)]).is_err());
        assert!(Basis::constrained(3, &[(1, 1)]).is_err());
    }

    #[test]
    fn state_dump_round_trip() {
        let b = Basis::constrained(4, &chain_edges(4)).unwrap();
        let mut amps = vec![Complex64::ZERO; b.dim()];
        for (i, a) in amps.iter_mut().enumerate() {
            *a = Complex64::new(i as f64 * 0.25, -(i as f64) * 0.125 + 1.0 / 3.0);
        }
        let psi = StateVector::new(Arc::clone(&b), amps, 0.0).unwrap();
        let text = psi.to_text();
        assert!(text.starts_with("N=4 mode=constrained dim=8"));
        let back = StateVector::from_text(&text, &chain_edges(4)).unwrap();
        assert_eq!(back.amplitudes(), psi.amplitudes());
    }

    #[test]
    fn zero_state_normalize_is_degenerate() {
        let b = Basis::full(2).unwrap();
        let mut psi = StateVector::new(b, vec![Complex64::ZERO; 4], 0.0).unwrap();
        assert!(matches!(psi.normalize(), Err(SimError::DegenerateState(_))));
    }

    proptest! {
        // Flipping is an involution and lands on a valid index in a full basis.
        #[test]
        fn flip_involution_full(n in 1usize..10, idx_seed in any::<u32>()) {
            let b = Basis::full(n).unwrap();
            let idx = (idx_seed as usize) % b.dim();
            let flipped = b.flipped_index(idx).expect("full basis closed under flip");
            prop_assert_eq!(b.flipped_index(flipped), Some(idx));
            let cfg = b.config(idx);
            prop_assert_eq!(cfg.flipped(n).flipped(n), cfg);
            prop_assert_eq!(cfg.excitation_count, cfg.bits.count_ones());
        }

        // Lookup is a bijection onto [0, dim).
        #[test]
        fn constrained_lookup_bijection(n in 2usize..9) {
            let edges = chain_edges(n);
            let b = Basis::constrained(n, &edges).unwrap();
            for i in 0..b.dim() {
                prop_assert_eq!(b.index_of(b.config(i).bits), Some(i));
            }
        }
    }
}
