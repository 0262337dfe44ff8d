//! Schmidt spectra and von Neumann entropies of pure states on the chain.
//!
//! Subsystem `A` is always spins `1..=m`, i.e. the `m` low-order bits, so the
//! amplitude vector read column-major as a `2^m × 2^{n-m}` matrix is the Schmidt
//! matrix with rows indexed by `A`.

use faer::{Mat, MatRef};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::{backend, Spectrum};
use crate::error::{domain, Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::spin_basis::rotate;
use crate::stats::pairwise_sum;
use crate::C64;

const NORM_TOL: f64 = 1e-10;
const NEG_CLAMP: f64 = 1e-12;
const RENORM_TOL: f64 = 1e-10;
const UNNORMALIZED_TOL: f64 = 1e-8;

/// Complex amplitudes over the `2^n` computational basis.
#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    pub n: usize,
    pub amplitudes: Vec<C64>,
}

impl PureState {
    /// A normalized state; rejects wrong lengths and norms off by more than 1e-10.
    pub fn new(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let state = Self::from_raw_checked(n, amplitudes)?;
        let norm = state.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::Unnormalized(norm * norm));
        }
        Ok(state)
    }

    fn from_raw_checked(n: usize, amplitudes: Vec<C64>) -> Result<Self> {
        let expected = 1usize.checked_shl(n as u32).unwrap_or(0);
        if amplitudes.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: amplitudes.len() });
        }
        Ok(Self { n, amplitudes })
    }

    /// Unchecked constructor for vectors that are not states (e.g. `H v`).
    pub fn from_raw(n: usize, amplitudes: Vec<C64>) -> Self {
        debug_assert_eq!(amplitudes.len(), 1 << n);
        Self { n, amplitudes }
    }

    pub fn basis(n: usize, mask: u64) -> Result<Self> {
        if mask >= 1u64 << n {
            return Err(domain(format!("basis mask {mask:#b} does not fit {n} sites")));
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
        amplitudes[mask as usize] = C64::new(1.0, 0.0);
        Ok(Self { n, amplitudes })
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn inner(&self, other: &PureState) -> C64 {
        self.amplitudes.iter().zip(&other.amplitudes).map(|(a, b)| a.conj() * b).sum()
    }

    /// The state translated by `by` sites: amplitude of `b` moves to `rotate(b, by)`.
    pub fn translated(&self, by: usize) -> PureState {
        let mut out = vec![C64::new(0.0, 0.0); self.amplitudes.len()];
        for (b, &a) in self.amplitudes.iter().enumerate() {
            out[rotate(b as u64, self.n, by) as usize] = a;
        }
        PureState { n: self.n, amplitudes: out }
    }
}

/// Squared Schmidt coefficients, descending.
#[derive(Debug, Clone, PartialEq)]
pub struct SchmidtSpectrum {
    pub probabilities: Vec<f64>,
}

impl SchmidtSpectrum {
    /// Validates a probability vector: entries in `[-1e-12, 0)` are clamped to 0,
    /// a sum within 1e-10 of one is renormalized.
    pub fn from_probabilities(mut probabilities: Vec<f64>) -> Result<Self> {
        if let Some(p) = probabilities.iter().find(|p| **p < -NEG_CLAMP || !p.is_finite()) {
            return Err(domain(format!("invalid probability {p}")));
        }
        probabilities.iter_mut().for_each(|p| *p = p.max(0.0));
        let sum: f64 = probabilities.iter().sum();
        if (sum - 1.0).abs() > UNNORMALIZED_TOL {
            return Err(Error::Unnormalized(sum));
        }
        if (sum - 1.0).abs() <= RENORM_TOL {
            probabilities.iter_mut().for_each(|p| *p /= sum);
        }
        probabilities.sort_by(|a, b| b.total_cmp(a));
        Ok(Self { probabilities })
    }

    pub fn entropy(&self) -> f64 {
        shannon(&self.probabilities)
    }
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// `-Σ p ln p` in nats, with `0 ln 0 = 0`.
pub fn von_neumann_entropy(spectrum: &SchmidtSpectrum) -> Result<f64> {
    let sum: f64 = spectrum.probabilities.iter().sum();
    if (sum - 1.0).abs() > UNNORMALIZED_TOL {
        return Err(Error::Unnormalized(sum));
    }
    Ok(spectrum.entropy())
}

fn check_cut(n: usize, m: usize) -> Result<()> {
    if m == 0 || m >= n {
        return Err(domain(format!("subsystem size m = {m} must lie in 1..={}", n.saturating_sub(1))));
    }
    Ok(())
}

fn schmidt_matrix(v: &PureState, m: usize) -> MatRef<'_, C64> {
    let rows = 1usize << m;
    let cols = 1usize << (v.n - m);
    MatRef::from_column_major_slice(&v.amplitudes, rows, cols)
}

pub fn schmidt_spectrum(v: &PureState, m: usize) -> Result<SchmidtSpectrum> {
    check_cut(v.n, m)?;
    let values = schmidt_matrix(v, m).singular_values().map_err(|e| Error::Backend(format!("svd: {e:?}")))?;
    SchmidtSpectrum::from_probabilities(values.into_iter().map(|s| s * s).collect())
}

/// Entanglement entropy of spins `1..=m` against the rest.
pub fn entanglement_entropy(v: &PureState, m: usize) -> Result<f64> {
    Ok(schmidt_spectrum(v, m)?.entropy())
}

/// Entropy of a general `rows × cols` bipartite vector (column-major, rows = subsystem A).
pub fn bipartite_entropy(amplitudes: &[C64], rows: usize, cols: usize) -> Result<f64> {
    if rows * cols != amplitudes.len() || rows == 0 {
        return Err(Error::DimensionMismatch { expected: rows * cols, got: amplitudes.len() });
    }
    let values = MatRef::from_column_major_slice(amplitudes, rows, cols)
        .singular_values()
        .map_err(|e| Error::Backend(format!("svd: {e:?}")))?;
    Ok(SchmidtSpectrum::from_probabilities(values.into_iter().map(|s| s * s).collect())?.entropy())
}

/// `ρ_A = tr_B |v⟩⟨v|` for `A` = spins `1..=m`, formed explicitly.
pub fn reduced_density_matrix(v: &PureState, m: usize) -> Result<Mat<C64>> {
    check_cut(v.n, m)?;
    let psi = schmidt_matrix(v, m);
    Ok(psi * psi.adjoint())
}

/// Entropy from the eigenvalues of an explicitly formed density matrix.
pub fn density_matrix_entropy(rho: &Mat<C64>) -> Result<f64> {
    let (values, _) = backend::hermitian_eigen(rho)?;
    Ok(SchmidtSpectrum::from_probabilities(values)?.entropy())
}

/// Reduced density matrix of spins `site` and `site + 1` (1-based, periodic);
/// local index `b_site + 2 b_{site+1}`.
pub fn two_site_rdm(v: &PureState, site: usize) -> Result<Mat<C64>> {
    let n = v.n;
    if site == 0 || site > n || n < 2 {
        return Err(domain(format!("site {site} outside 1..={n}")));
    }
    let a = 1u64 << (site - 1);
    let b = 1u64 << (site % n);
    let local = |x: usize| (if x & 1 == 1 { a } else { 0 }) | (if x & 2 == 2 { b } else { 0 });
    let pattern: [u64; 4] = [local(0), local(1), local(2), local(3)];
    let mut rho = Mat::<C64>::zeros(4, 4);
    for rest in 0..1u64 << n {
        if rest & (a | b) != 0 {
            continue;
        }
        let amps: [C64; 4] = std::array::from_fn(|x| v.amplitudes[(rest | pattern[x]) as usize]);
        for x in 0..4 {
            for y in 0..4 {
                rho[(x, y)] += amps[x] * amps[y].conj();
            }
        }
    }
    Ok(rho)
}

pub fn two_site_entropy(v: &PureState, site: usize) -> Result<f64> {
    density_matrix_entropy(&two_site_rdm(v, site)?)
}

/// `ε_i = ⟨v|H_i|v⟩` for the local term at `site` (1-based).
pub fn local_energy(v: &PureState, h: &ChainHamiltonian, site: usize) -> Result<f64> {
    if v.n != h.n {
        return Err(Error::DimensionMismatch { expected: h.dim(), got: v.amplitudes.len() });
    }
    if site == 0 || site > h.n {
        return Err(domain(format!("site {site} outside 1..={}", h.n)));
    }
    let hv = crate::hamiltonian::apply_strings(&h.site_strings(site), &v.amplitudes);
    let e: C64 = v.amplitudes.iter().zip(&hv).map(|(a, b)| a.conj() * b).sum();
    Ok(e.re)
}

/// Per-eigenstate entropy at a fixed cut.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EntropyRecord {
    pub j: usize,
    pub energy: f64,
    pub m: usize,
    pub entropy: f64,
    /// Momentum index for sector spectra; empty for dense ones.
    pub sector: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct EigenstateEntropy {
    pub mean: f64,
    pub records: Vec<EntropyRecord>,
}

/// `S̄ = (1/d) Σ_j S(ρ_{j,A})` over every eigenstate.
pub fn average_eigenstate_entropy(spectrum: &Spectrum, m: usize) -> Result<EigenstateEntropy> {
    if !spectrum.has_eigenvectors() {
        return Err(Error::MissingEigenvectors);
    }
    check_cut(spectrum.n, m)?;
    let records = (0..spectrum.len())
        .into_par_iter()
        .map(|j| {
            let v = spectrum.eigenvector(j)?;
            Ok(EntropyRecord {
                j,
                energy: spectrum.energies[j],
                m,
                entropy: entanglement_entropy(&v, m)?,
                sector: spectrum.sector(j),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let values: Vec<f64> = records.iter().map(|r| r.entropy).collect();
    let mean = pairwise_sum(&values) / values.len() as f64;
    Ok(EigenstateEntropy { mean, records })
}

/// Entropies of every eigenstate for several cuts at once, lifting each eigenvector once.
pub fn eigenstate_entropies_multi(spectrum: &Spectrum, cuts: &[usize]) -> Result<Vec<EigenstateEntropy>> {
    if !spectrum.has_eigenvectors() {
        return Err(Error::MissingEigenvectors);
    }
    for &m in cuts {
        check_cut(spectrum.n, m)?;
    }
    let per_state = (0..spectrum.len())
        .into_par_iter()
        .map(|j| {
            let v = spectrum.eigenvector(j)?;
            cuts.iter().map(|&m| entanglement_entropy(&v, m)).collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(cuts
        .iter()
        .enumerate()
        .map(|(c, &m)| {
            let records: Vec<EntropyRecord> = per_state
                .iter()
                .enumerate()
                .map(|(j, s)| EntropyRecord {
                    j,
                    energy: spectrum.energies[j],
                    m,
                    entropy: s[c],
                    sector: spectrum.sector(j),
                })
                .collect();
            let values: Vec<f64> = records.iter().map(|r| r.entropy).collect();
            EigenstateEntropy { mean: pairwise_sum(&values) / values.len() as f64, records }
        })
        .collect())
}

/// Mean entropy over every eigenstate and every cyclic placement of a window of `m` spins.
pub fn cut_averaged_entropy(spectrum: &Spectrum, m: usize) -> Result<f64> {
    if !spectrum.has_eigenvectors() {
        return Err(Error::MissingEigenvectors);
    }
    let n = spectrum.n;
    check_cut(n, m)?;
    let per_state = (0..spectrum.len())
        .into_par_iter()
        .map(|j| {
            let v = spectrum.eigenvector(j)?;
            let shifts =
                (0..n).map(|s| entanglement_entropy(&v.translated(s), m)).collect::<Result<Vec<f64>>>()?;
            Ok(pairwise_sum(&shifts) / n as f64)
        })
        .collect::<Result<Vec<f64>>>()?;
    Ok(pairwise_sum(&per_state) / per_state.len() as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::eigensolve::{diagonalize_dense, diagonalize_sectors, EigenOptions};
    use crate::hamiltonian::{build_chaotic_ising, build_disordered};
    use crate::random_states::{haar_state, SeededSampler};
    use std::f64::consts::LN_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn random_state(n: usize, seed: u64) -> PureState {
        let mut s = SeededSampler::new(seed);
        haar_state(1 << n, &mut s).unwrap().with_sites(n).unwrap()
    }

    #[test]
    fn bell_product_ghz() {
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let bell = PureState::new(2, vec![c(r), c(0.0), c(0.0), c(r)]).unwrap();
        let p = schmidt_spectrum(&bell, 1).unwrap().probabilities;
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);

        let product = PureState::basis(5, 0).unwrap();
        let p = schmidt_spectrum(&product, 2).unwrap().probabilities;
        assert_eq!(p[0], 1.0);
        assert!(p[1..].iter().all(|&x| x == 0.0));

        let mut ghz = vec![c(0.0); 16];
        ghz[0] = c(r);
        ghz[15] = c(r);
        let p = schmidt_spectrum(&PureState::new(4, ghz).unwrap(), 2).unwrap().probabilities;
        assert_eq!(p.len(), 4);
        assert!((p[0] - 0.5).abs() < 1e-15 && (p[1] - 0.5).abs() < 1e-15);
        assert!(p[2].abs() < 1e-15 && p[3].abs() < 1e-15);
    }

    #[test]
    fn cut_range() {
        let v = PureState::basis(4, 3).unwrap();
        assert!(schmidt_spectrum(&v, 0).is_err());
        assert!(schmidt_spectrum(&v, 4).is_err());
    }

    #[test]
    fn entropy_values() {
        let s = |p: Vec<f64>| von_neumann_entropy(&SchmidtSpectrum::from_probabilities(p).unwrap()).unwrap();
        assert_eq!(s(vec![1.0]), 0.0);
        assert!((s(vec![0.25; 4]) - 4f64.ln()).abs() < 1e-15);
        assert!((s(vec![0.5, 0.5, 0.0, 0.0]) - LN_2).abs() < 1e-15);
    }

    #[test]
    fn entropy_rejects_unnormalized() {
        assert!(matches!(SchmidtSpectrum::from_probabilities(vec![0.5, 0.4]), Err(Error::Unnormalized(_))));
        let raw = SchmidtSpectrum { probabilities: vec![0.7, 0.7] };
        assert!(von_neumann_entropy(&raw).is_err());
        assert!(SchmidtSpectrum::from_probabilities(vec![1.0 + 1e-9, -1e-3]).is_err());
        let clamped = SchmidtSpectrum::from_probabilities(vec![1.0, -5e-13]).unwrap();
        assert_eq!(clamped.probabilities, vec![1.0, 0.0]);
    }

    #[test]
    fn svd_matches_partial_trace() {
        for seed in 0..10 {
            let v = random_state(10, seed);
            for m in [1, 3, 5, 8] {
                let svd = entanglement_entropy(&v, m).unwrap();
                let rho = reduced_density_matrix(&v, m).unwrap();
                let oracle = density_matrix_entropy(&rho).unwrap();
                assert!((svd - oracle).abs() <= 1e-10, "seed {seed} m {m}: {svd} vs {oracle}");
            }
        }
    }

    #[test]
    fn schmidt_symmetry() {
        // S(ρ_A) = S(ρ_B): the complement of the low m bits is the high n - m bits,
        // which become the low bits after translating by m sites.
        let v = random_state(8, 5);
        for m in 1..8 {
            let a = entanglement_entropy(&v, m).unwrap();
            let b = entanglement_entropy(&v.translated(8 - m), 8 - m).unwrap();
            assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn two_site_examples() {
        let rho = two_site_rdm(&PureState::basis(4, 0).unwrap(), 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == 0 && j == 0 { 1.0 } else { 0.0 };
                assert_eq!(rho[(i, j)], c(expected));
            }
        }

        // Spins 1,2 maximally entangled with spins 3,4: Σ_x |x⟩_{12}|x⟩_{34} / 2.
        let mut amps = vec![c(0.0); 16];
        for x in 0..4 {
            amps[x | (x << 2)] = c(0.5);
        }
        let rho = two_site_rdm(&PureState::new(4, amps).unwrap(), 1).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 0.25 } else { 0.0 };
                assert!((rho[(i, j)] - c(expected)).norm() < 1e-15);
            }
        }

        let v = random_state(7, 9);
        for site in 1..=7 {
            let rho = two_site_rdm(&v, site).unwrap();
            let (values, _) = backend::hermitian_eigen(&rho).unwrap();
            assert!((values.iter().sum::<f64>() - 1.0).abs() <= 1e-10);
            assert!(values.iter().all(|&x| x >= -1e-10));
        }
        assert!(two_site_rdm(&v, 0).is_err());
        assert!(two_site_rdm(&v, 8).is_err());
    }

    #[test]
    fn wrapped_pair_uses_first_spin() {
        // Spin n up, spin 1 down: the pair (n, 1) has local index 1 (first spin of pair up).
        let v = PureState::basis(5, 0b10000).unwrap();
        let rho = two_site_rdm(&v, 5).unwrap();
        assert_eq!(rho[(1, 1)], c(1.0));
    }

    #[test]
    fn local_energy_matches_rdm_trace() {
        let h = build_chaotic_ising(6, 1.05, 0.5).unwrap();
        let v = random_state(6, 21);
        let local = h.terms[0].two_site_matrix();
        for site in 1..=6 {
            let e = local_energy(&v, &h, site).unwrap();
            let rho = two_site_rdm(&v, site).unwrap();
            let prod = &rho * &local;
            let tr: C64 = (0..4).map(|i| prod[(i, i)]).sum();
            assert!(tr.im.abs() <= 1e-12);
            assert!((tr.re - e).abs() <= 1e-12);
            assert!(e.abs() <= h.local_term_norm().unwrap() + 1e-12);
        }
        let e = local_energy(&PureState::basis(6, 0).unwrap(), &h, 1).unwrap();
        // Aligned bond, spin down in the field: 1 - h.
        assert!((e - 0.5).abs() < 1e-15);
    }

    #[test]
    fn diagonal_model_has_zero_entanglement() {
        let h = build_chaotic_ising(2, 0.0, 0.0).unwrap();
        let spectrum = diagonalize_dense(&h, &EigenOptions::default()).unwrap();
        let avg = average_eigenstate_entropy(&spectrum, 1).unwrap();
        assert_eq!(avg.mean, 0.0);
        assert_eq!(avg.records.len(), 4);
    }

    #[test]
    fn missing_eigenvectors() {
        let h = build_chaotic_ising(4, 1.05, 0.5).unwrap();
        let spectrum = diagonalize_dense(&h, &EigenOptions::default()).unwrap().without_eigenvectors();
        assert!(matches!(average_eigenstate_entropy(&spectrum, 2), Err(Error::MissingEigenvectors)));
        assert!(matches!(cut_averaged_entropy(&spectrum, 2), Err(Error::MissingEigenvectors)));
    }

    #[test]
    fn records_respect_entropy_range() {
        let h = build_chaotic_ising(8, 1.05, 0.5).unwrap();
        let spectrum = diagonalize_sectors(&h, &EigenOptions::default()).unwrap();
        for m in 1..8 {
            let avg = average_eigenstate_entropy(&spectrum, m).unwrap();
            let cap = (m.min(8 - m)) as f64 * LN_2 + 1e-9;
            assert!(avg.records.iter().all(|r| r.entropy >= 0.0 && r.entropy <= cap));
            assert!(avg.mean >= 0.0 && avg.mean <= m as f64 * LN_2);
        }
    }

    #[test]
    fn multi_cut_matches_single() {
        let h = build_chaotic_ising(6, 0.905, 0.809).unwrap();
        let spectrum = diagonalize_sectors(&h, &EigenOptions::default()).unwrap();
        let multi = eigenstate_entropies_multi(&spectrum, &[2, 3]).unwrap();
        for (i, m) in [2, 3].into_iter().enumerate() {
            let single = average_eigenstate_entropy(&spectrum, m).unwrap();
            assert_eq!(single.mean, multi[i].mean);
        }
    }

    #[test]
    fn cut_average_of_translation_eigenstates() {
        let h = build_chaotic_ising(8, 1.05, 0.5).unwrap();
        let spectrum = diagonalize_sectors(&h, &EigenOptions::default()).unwrap();
        for m in [3, 4] {
            let plain = average_eigenstate_entropy(&spectrum, m).unwrap().mean;
            let averaged = cut_averaged_entropy(&spectrum, m).unwrap();
            assert!((plain - averaged).abs() <= 1e-9);
        }
    }

    #[test]
    fn wrapped_window_equals_complement() {
        // A window of n - 1 spins has the entropy of the single spin left out.
        let h = build_disordered(6, 1.05, 0.5, 0.2, 4).unwrap();
        let spectrum = diagonalize_dense(&h, &EigenOptions::default()).unwrap();
        let v = spectrum.eigenvector(17).unwrap();
        for s in 0..6 {
            let w = v.translated(s);
            let window = entanglement_entropy(&w, 5).unwrap();
            let single = entanglement_entropy(&w.translated(1), 1).unwrap();
            assert!((window - single).abs() <= 1e-10);
        }
    }
}
