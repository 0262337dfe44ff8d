//! Haar-random states and the random-basis toy model: an independent Haar rotation
//! inside every magnetization sector of `Σ σᶻ`.
//!
//! Columns of a Haar unitary are Haar-distributed states, so the toy model is sampled
//! state by state instead of materializing each `U_j`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::{bipartite_entropy, entanglement_entropy, PureState};
use crate::error::{domain, Result};
use crate::spin_basis::{binomial, enumerate_sector, sector_masks};
use crate::stats::{pairwise_sum, Estimate};
use crate::C64;

/// A seeded ChaCha20 stream. Tasks draw from derived substreams keyed by
/// `(seed, tags...)`, so parallel results do not depend on scheduling.
#[derive(Debug, Clone)]
pub struct SeededSampler {
    seed: u64,
    rng: ChaCha20Rng,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

impl SeededSampler {
    pub fn new(seed: u64) -> Self {
        Self { seed, rng: ChaCha20Rng::seed_from_u64(seed) }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Words consumed from the underlying stream so far.
    pub fn position(&self) -> u128 {
        self.rng.get_word_pos()
    }

    /// An independent stream determined by this sampler's seed and `tags` only.
    pub fn substream(&self, tags: &[u64]) -> SeededSampler {
        let mut h = splitmix(self.seed);
        for &t in tags {
            h = splitmix(h ^ splitmix(t));
        }
        let mut key = [0u8; 32];
        for (i, chunk) in key.chunks_mut(8).enumerate() {
            h = splitmix(h.wrapping_add(i as u64));
            chunk.copy_from_slice(&h.to_le_bytes());
        }
        SeededSampler { seed: h, rng: ChaCha20Rng::from_seed(key) }
    }

    /// Draw a fresh 64-bit tag from this stream (advances it).
    pub fn next_tag(&mut self) -> u64 {
        self.rng.random()
    }

    pub fn gaussian(&mut self) -> f64 {
        self.rng.sample(StandardNormal)
    }

    pub fn complex_gaussian(&mut self) -> C64 {
        C64::new(self.gaussian(), self.gaussian())
    }
}

/// A unit vector of arbitrary dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct HaarVector {
    pub amplitudes: Vec<C64>,
}

impl HaarVector {
    /// View as a state on `n` spins; the dimension must be `2^n`.
    pub fn with_sites(self, n: usize) -> Result<PureState> {
        PureState::new(n, self.amplitudes)
    }
}

fn normalize(amplitudes: &mut [C64]) {
    let norm = amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    amplitudes.iter_mut().for_each(|a| *a /= norm);
}

/// Normalized vector of `d` i.i.d. complex standard Gaussians.
pub fn haar_state(d: usize, sampler: &mut SeededSampler) -> Result<HaarVector> {
    if d == 0 {
        return Err(domain("Haar state of dimension 0"));
    }
    let mut amplitudes: Vec<C64> = (0..d).map(|_| sampler.complex_gaussian()).collect();
    normalize(&mut amplitudes);
    Ok(HaarVector { amplitudes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Orientation {
    /// Swap `dA` and `dB` when `dA > dB` (entropy is symmetric).
    #[default]
    Swap,
    /// Reject `dA > dB`.
    Strict,
}

/// Monte Carlo mean of `S(ρ_A)` over Haar states on `dA · dB` dimensions.
pub fn page_average(
    d_a: usize,
    d_b: usize,
    trials: usize,
    sampler: &mut SeededSampler,
    orientation: Orientation,
) -> Result<Estimate> {
    if trials == 0 {
        return Err(domain("page_average needs at least one trial"));
    }
    if d_a == 0 || d_b == 0 {
        return Err(domain("subsystem dimensions must be positive"));
    }
    let (d_a, d_b) = match (d_a > d_b, orientation) {
        (true, Orientation::Swap) => (d_b, d_a),
        (true, Orientation::Strict) => {
            return Err(domain(format!("dA = {d_a} exceeds dB = {d_b}")));
        }
        _ => (d_a, d_b),
    };
    let base = sampler.next_tag();
    let samples = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut sub = sampler.substream(&[base, t as u64]);
            let v = haar_state(d_a * d_b, &mut sub)?;
            bipartite_entropy(&v.amplitudes, d_a, d_b)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(Estimate::from_samples(&samples))
}

/// A Haar-random state supported on the magnetization sector `M_j`, embedded in `2^n`.
#[derive(Debug, Clone, PartialEq)]
pub struct SectorRandomState {
    pub n: usize,
    pub j: usize,
    pub state: PureState,
}

pub fn sector_random_state(n: usize, j: usize, sampler: &mut SeededSampler) -> Result<SectorRandomState> {
    if n == 0 || n > crate::hamiltonian::MAX_STATE_SITES {
        return Err(domain(format!("sector states need 1 <= n <= {}", crate::hamiltonian::MAX_STATE_SITES)));
    }
    let sector = enumerate_sector(n, j)?;
    let mut values: Vec<C64> = sector.states.iter().map(|_| sampler.complex_gaussian()).collect();
    normalize(&mut values);
    let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
    for (b, v) in sector.states.iter().zip(values) {
        amplitudes[b.0 as usize] = v;
    }
    Ok(SectorRandomState { n, j, state: PureState::from_raw(n, amplitudes) })
}

/// One block of `ρ_A = ⊕_k |c_k|² σ_{k,A}`: `k` up spins inside `A`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockPopulation {
    pub k: usize,
    pub weight: f64,
    /// `S(σ_{k,A})` of the normalized block.
    pub entropy: f64,
}

/// Valid range of up spins in `A` for a sector state: `max(0, m-n+j) ..= min(m, j)`.
pub fn block_range(n: usize, m: usize, j: usize) -> std::ops::RangeInclusive<usize> {
    (m + j).saturating_sub(n)..=m.min(j)
}

pub fn block_populations(s: &SectorRandomState, m: usize) -> Result<Vec<BlockPopulation>> {
    let n = s.n;
    if m == 0 || m >= n {
        return Err(domain(format!("subsystem size m = {m} must lie in 1..={}", n - 1)));
    }
    block_range(n, m, s.j)
        .map(|k| {
            let rows: Vec<u64> = sector_masks(m, k).collect();
            let cols: Vec<u64> = sector_masks(n - m, s.j - k).collect();
            let mut block = Vec::with_capacity(rows.len() * cols.len());
            for &b in &cols {
                for &a in &rows {
                    block.push(s.state.amplitudes[(a | (b << m)) as usize]);
                }
            }
            let weight: f64 = block.iter().map(|a| a.norm_sqr()).sum();
            let entropy = if weight > 0.0 {
                let scale = weight.sqrt();
                block.iter_mut().for_each(|a| *a /= scale);
                bipartite_entropy(&block, rows.len(), cols.len())?
            } else {
                0.0
            };
            Ok(BlockPopulation { k, weight, entropy })
        })
        .collect()
}

/// `S(ρ_A) = Σ_k w_k S(σ_{k,A}) - w_k ln w_k`.
pub fn entropy_from_blocks(blocks: &[BlockPopulation]) -> f64 {
    blocks
        .iter()
        .map(|b| if b.weight > 0.0 { b.weight * b.entropy - b.weight * b.weight.ln() } else { 0.0 })
        .sum()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SectorEstimate {
    pub j: usize,
    /// `|M_j|`.
    pub dim: u64,
    pub estimate: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelMAverage {
    pub n: usize,
    pub m: usize,
    /// `Σ_j |M_j| Ŝ_j / 2^n`.
    pub mean: f64,
    pub std_error: f64,
    pub sectors: Vec<SectorEstimate>,
}

/// Monte Carlo average entanglement of the toy model, sector by sector.
pub fn model_m_average(
    n: usize,
    m: usize,
    samples_per_sector: usize,
    sampler: &mut SeededSampler,
) -> Result<ModelMAverage> {
    if samples_per_sector == 0 {
        return Err(domain("samples_per_sector must be at least 1"));
    }
    if m == 0 || m >= n {
        return Err(domain(format!("subsystem size m = {m} must lie in 1..={}", n.saturating_sub(1))));
    }
    let base = sampler.next_tag();
    let tasks: Vec<(usize, usize)> =
        (0..=n).flat_map(|j| (0..samples_per_sector).map(move |s| (j, s))).collect();
    let entropies = tasks
        .par_iter()
        .map(|&(j, s)| {
            let mut sub = sampler.substream(&[base, j as u64, s as u64]);
            let state = sector_random_state(n, j, &mut sub)?;
            entanglement_entropy(&state.state, m)
        })
        .collect::<Result<Vec<f64>>>()?;

    let total = (1u64 << n) as f64;
    let sectors: Vec<SectorEstimate> = entropies
        .chunks(samples_per_sector)
        .enumerate()
        .map(|(j, chunk)| SectorEstimate { j, dim: binomial(n, j), estimate: Estimate::from_samples(chunk) })
        .collect();
    let weighted: Vec<f64> = sectors.iter().map(|s| s.dim as f64 * s.estimate.mean / total).collect();
    let variance: Vec<f64> =
        sectors.iter().map(|s| (s.dim as f64 / total * s.estimate.std_error).powi(2)).collect();
    Ok(ModelMAverage {
        n,
        m,
        mean: pairwise_sum(&weighted),
        std_error: pairwise_sum(&variance).sqrt(),
        sectors,
    })
}
