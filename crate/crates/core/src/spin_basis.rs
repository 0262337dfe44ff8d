//! Computational basis of a chain of spin-1/2's: magnetization sectors and
//! translation orbits.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};

/// Widest chain whose basis masks fit a `u64` with room for `2^n`.
pub const WORD_SITES: usize = 63;

/// Largest chain for which whole-space orbit tables are built (`2^n` entries).
pub const MAX_ORBIT_SITES: usize = 30;

/// A computational basis state. Bit `i - 1` is spin `i`; 1 = up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct BasisState(pub u64);

impl BasisState {
    pub fn mask(self) -> u64 {
        self.0
    }

    pub fn up_count(self) -> u32 {
        self.0.count_ones()
    }

    /// Whether spin `site` (1-based) is up.
    pub fn is_up(self, site: usize) -> bool {
        (self.0 >> (site - 1)) & 1 == 1
    }
}

/// All basis states with exactly `j` up spins, ascending by mask.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MagnetizationSector {
    pub n: usize,
    pub j: usize,
    pub states: Vec<BasisState>,
}

impl MagnetizationSector {
    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }
}

/// One orbit of the cyclic translation group acting on basis states.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationOrbit {
    /// Smallest mask among the cyclic shifts.
    pub representative: BasisState,
    /// Orbit size; divides `n`.
    pub period: usize,
    /// Momentum indices `k` with `k * period ≡ 0 (mod n)`.
    pub momenta: Vec<usize>,
}

impl TranslationOrbit {
    pub fn supports(&self, k: usize, n: usize) -> bool {
        (k * self.period).is_multiple_of(n)
    }
}

pub fn binomial(n: usize, k: usize) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc as u64
}

fn full_mask(n: usize) -> u64 {
    if n == 64 {
        u64::MAX
    } else {
        (1u64 << n) - 1
    }
}

/// Next larger integer with the same popcount (Gosper's hack). `x` must be nonzero.
fn next_same_popcount(x: u64) -> Option<u64> {
    let lowest = x & x.wrapping_neg();
    let ripple = x.checked_add(lowest)?;
    let ones = ((x ^ ripple) >> 2) / lowest;
    Some(ripple | ones)
}

/// Masks with popcount `j` below `2^n`, ascending.
pub fn sector_masks(n: usize, j: usize) -> impl Iterator<Item = u64> {
    let limit = full_mask(n);
    let first = if j == 0 { 0 } else { full_mask(j) };
    let mut current = Some(first);
    let mut done = j > n;
    std::iter::from_fn(move || {
        if done {
            return None;
        }
        let value = current?;
        if value > limit {
            done = true;
            return None;
        }
        current = if value == 0 { None } else { next_same_popcount(value) };
        if current.is_none() {
            done = true;
        }
        Some(value)
    })
}

pub fn enumerate_sector(n: usize, j: usize) -> Result<MagnetizationSector> {
    if n > WORD_SITES {
        return Err(domain(format!("n = {n} exceeds word width of {WORD_SITES} sites")));
    }
    if j > n {
        return Err(domain(format!("up-spin count j = {j} exceeds n = {n}")));
    }
    let states = sector_masks(n, j).map(BasisState).collect();
    Ok(MagnetizationSector { n, j, states })
}

/// Rotate the spins by one site: spin `i` moves to `i + 1`, spin `n` to spin 1.
pub fn cyclic_shift(state: BasisState, n: usize) -> BasisState {
    BasisState(rotate(state.0, n, 1))
}

/// Rotate the low `n` bits of `mask` left by `by` positions.
pub fn rotate(mask: u64, n: usize, by: usize) -> u64 {
    let by = by % n;
    if by == 0 {
        return mask;
    }
    let m = full_mask(n);
    ((mask << by) | (mask >> (n - by))) & m
}

/// Minimal mask over all cyclic shifts, the period, and the shift `s` with
/// `mask = rotate(rep, s)`.
pub fn canonical_form(mask: u64, n: usize) -> (u64, usize, usize) {
    let mut rep = mask;
    let mut rep_shift = 0;
    let mut current = mask;
    let mut period = n;
    for s in 1..=n {
        current = rotate(current, n, 1);
        if current == mask {
            period = s;
            break;
        }
        if current < rep {
            rep = current;
            rep_shift = s;
        }
    }
    // rotate(mask, rep_shift) = rep, so mask = rotate(rep, period - rep_shift).
    let shift = (period - rep_shift % period) % period;
    (rep, period, shift)
}

fn check_orbit_n(n: usize) -> Result<()> {
    if n == 0 || n > MAX_ORBIT_SITES {
        return Err(domain(format!("translation orbits need 1 <= n <= {MAX_ORBIT_SITES}, got {n}")));
    }
    Ok(())
}

pub fn translation_orbits(n: usize) -> Result<Vec<TranslationOrbit>> {
    Ok(OrbitTable::new(n)?.orbits)
}

/// Orbit decomposition of the whole `2^n` basis with a per-state lookup.
#[derive(Debug, Clone)]
pub struct OrbitTable {
    pub n: usize,
    pub orbits: Vec<TranslationOrbit>,
    /// For every mask: (orbit index, shift) with `mask = rotate(rep, shift)`.
    lookup: Vec<(u32, u32)>,
}

impl OrbitTable {
    pub fn new(n: usize) -> Result<Self> {
        check_orbit_n(n)?;
        let dim = 1usize << n;
        let mut lookup = vec![(u32::MAX, 0u32); dim];
        let mut orbits = Vec::new();
        for mask in 0..dim as u64 {
            if lookup[mask as usize].0 != u32::MAX {
                continue;
            }
            // Ascending scan: the first unseen member of an orbit is its minimum.
            let (rep, period, _) = canonical_form(mask, n);
            debug_assert_eq!(rep, mask);
            let index = orbits.len() as u32;
            let mut member = rep;
            for s in 0..period {
                lookup[member as usize] = (index, s as u32);
                member = rotate(member, n, 1);
            }
            let momenta = (0..n).filter(|k| (k * period) % n == 0).collect();
            orbits.push(TranslationOrbit { representative: BasisState(rep), period, momenta });
        }
        Ok(Self { n, orbits, lookup })
    }

    /// Orbit index and shift `s` with `mask = rotate(rep, s)`.
    pub fn locate(&self, mask: u64) -> (usize, usize) {
        let (o, s) = self.lookup[mask as usize];
        (o as usize, s as usize)
    }
}
