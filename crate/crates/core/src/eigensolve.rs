//! Full spectral decomposition of chain Hamiltonians, densely on the whole space or
//! block by block in momentum sectors.
//!
//! A momentum state built on an orbit representative `r` of period `p` is
//! `|r,k⟩ = p^{-1/2} Σ_{l<p} e^{-iθl} T^l |r⟩` with `θ = 2πk/n`, so that
//! `T|r,k⟩ = e^{iθ}|r,k⟩`. If the Hamiltonian maps `r` to `s = T^l r'` with
//! amplitude `h`, the block element is `⟨r',k|H|r,k⟩ += h e^{iθl} (p_r/p_{r'})^{1/2}`.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use faer::Mat;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::entanglement::PureState;
use crate::error::{Error, Result};
use crate::hamiltonian::ChainHamiltonian;
use crate::spin_basis::{rotate, OrbitTable, TranslationOrbit};
use crate::C64;

pub mod backend {
    //! The only place the dense Hermitian eigensolver is called.

    use faer::{Mat, Side};

    use crate::error::{Error, Result};
    use crate::C64;

    /// Eigenvalues ascending with orthonormal eigenvectors as columns.
    pub fn hermitian_eigen(matrix: &Mat<C64>) -> Result<(Vec<f64>, Mat<C64>)> {
        if matrix.nrows() != matrix.ncols() {
            return Err(Error::DimensionMismatch { expected: matrix.nrows(), got: matrix.ncols() });
        }
        let evd = matrix.self_adjoint_eigen(Side::Lower).map_err(|e| Error::Backend(format!("{e:?}")))?;
        let values = evd.S().column_vector().iter().map(|z| z.re).collect();
        Ok((values, evd.U().to_owned()))
    }

    pub fn hermitian_eigenvalues(matrix: &Mat<C64>) -> Result<Vec<f64>> {
        matrix.self_adjoint_eigenvalues(Side::Lower).map_err(|e| Error::Backend(format!("{e:?}")))
    }
}

/// Relative gap below which neighbouring eigenvalues count as degenerate.
const DEGENERACY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EigenOptions {
    /// Largest `n` accepted by [`diagonalize_dense`].
    pub dense_cap: usize,
    /// Largest `n` accepted by [`diagonalize_sectors`].
    pub sector_cap: usize,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { dense_cap: 12, sector_cap: 16 }
    }
}

/// A cluster of numerically equal eigenvalues inside one sector.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Degeneracy {
    pub sector: Option<usize>,
    pub energy: f64,
    pub multiplicity: usize,
}

/// One translation sector: compatible orbits and the Hermitian block of `H`.
#[derive(Debug, Clone)]
pub struct MomentumBlock {
    pub k: usize,
    /// Orbit indices into the [`OrbitTable`], with their periods.
    pub orbits: Vec<(usize, usize)>,
    pub matrix: Mat<C64>,
}

impl MomentumBlock {
    pub fn dim(&self) -> usize {
        self.orbits.len()
    }

    pub fn hermiticity_defect(&self) -> f64 {
        let m = &self.matrix;
        let mut worst = 0.0f64;
        for j in 0..m.ncols() {
            for i in 0..=j {
                worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
            }
        }
        worst
    }
}

/// Build the momentum-`k` block of a translation-invariant `H`.
pub fn build_momentum_block(h: &ChainHamiltonian, table: &OrbitTable, k: usize) -> MomentumBlock {
    let n = h.n;
    let orbits: Vec<(usize, usize)> = table
        .orbits
        .iter()
        .enumerate()
        .filter(|(_, o)| o.supports(k, n))
        .map(|(i, o)| (i, o.period))
        .collect();
    let position: HashMap<usize, usize> = orbits.iter().enumerate().map(|(b, &(o, _))| (o, b)).collect();
    let theta = 2.0 * PI * k as f64 / n as f64;
    let strings = h.pauli_strings();
    let dim = orbits.len();
    let mut matrix = Mat::<C64>::zeros(dim, dim);
    for (a, &(orbit, period)) in orbits.iter().enumerate() {
        let rep = table.orbits[orbit].representative.0;
        for s in &strings {
            let (target, amp) = s.act(rep);
            let (target_orbit, shift) = table.locate(target);
            let Some(&b) = position.get(&target_orbit) else {
                continue;
            };
            let target_period = table.orbits[target_orbit].period;
            let phase = C64::from_polar(1.0, theta * shift as f64);
            matrix[(b, a)] += amp * phase * (period as f64 / target_period as f64).sqrt();
        }
    }
    MomentumBlock { k, orbits, matrix }
}

#[derive(Debug, Clone)]
struct SolvedBlock {
    k: usize,
    orbits: Vec<(usize, usize)>,
    vectors: Mat<C64>,
}

#[derive(Debug, Clone)]
enum Eigenvectors {
    None,
    /// Columns in spectrum order.
    Dense(Mat<C64>),
    /// Compact per-block coefficients, lifted on demand.
    Sectors {
        table: Arc<OrbitTable>,
        blocks: Vec<SolvedBlock>,
        index: Vec<(usize, usize)>,
    },
}

/// Ascending eigenvalues with orthonormal eigenvectors on the full `2^n` space.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub n: usize,
    pub energies: Vec<f64>,
    sectors: Vec<Option<usize>>,
    vectors: Eigenvectors,
    /// Residual degeneracies inside single sectors, recorded for audit.
    pub degeneracies: Vec<Degeneracy>,
}

impl Spectrum {
    pub fn len(&self) -> usize {
        self.energies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.energies.is_empty()
    }

    pub fn has_eigenvectors(&self) -> bool {
        !matches!(self.vectors, Eigenvectors::None)
    }

    /// Momentum index of eigenstate `j`, if the spectrum was computed per sector.
    pub fn sector(&self, j: usize) -> Option<usize> {
        self.sectors[j]
    }

    pub fn without_eigenvectors(mut self) -> Self {
        self.vectors = Eigenvectors::None;
        self
    }

    /// Eigenvector `j` on the full space.
    pub fn eigenvector(&self, j: usize) -> Result<PureState> {
        match &self.vectors {
            Eigenvectors::None => Err(Error::MissingEigenvectors),
            Eigenvectors::Dense(u) => Ok(PureState::from_raw(self.n, u.col(j).iter().copied().collect())),
            Eigenvectors::Sectors { table, blocks, index } => {
                let (b, col) = index[j];
                let block = &blocks[b];
                Ok(lift(self.n, table, block.k, &block.orbits, |i| block.vectors[(i, col)]))
            }
        }
    }

    /// Total multiplicity of states sitting in degenerate clusters.
    pub fn degenerate_state_count(&self) -> usize {
        self.degeneracies.iter().map(|d| d.multiplicity).sum()
    }
}

/// Superpose orbit momentum states with coefficients `coef(i)` for block orbit `i`.
fn lift(
    n: usize,
    table: &OrbitTable,
    k: usize,
    orbits: &[(usize, usize)],
    coef: impl Fn(usize) -> C64,
) -> PureState {
    let theta = 2.0 * PI * k as f64 / n as f64;
    let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
    for (i, &(orbit, period)) in orbits.iter().enumerate() {
        let c = coef(i) / (period as f64).sqrt();
        let rep = table.orbits[orbit].representative.0;
        for l in 0..period {
            amplitudes[rotate(rep, n, l) as usize] = c * C64::from_polar(1.0, -theta * l as f64);
        }
    }
    PureState::from_raw(n, amplitudes)
}

/// The normalized momentum state `|r,k⟩` of one orbit.
pub fn momentum_state(n: usize, orbit: &TranslationOrbit, k: usize) -> PureState {
    let theta = 2.0 * PI * k as f64 / n as f64;
    let mut amplitudes = vec![C64::new(0.0, 0.0); 1 << n];
    let norm = (orbit.period as f64).sqrt();
    for l in 0..orbit.period {
        amplitudes[rotate(orbit.representative.0, n, l) as usize] =
            C64::from_polar(1.0 / norm, -theta * l as f64);
    }
    PureState::from_raw(n, amplitudes)
}

fn degeneracy_clusters(values: &[f64], sector: Option<usize>, scale: f64) -> Vec<Degeneracy> {
    let tol = DEGENERACY_TOL * scale.max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || values[i] - values[i - 1] > tol {
            if i - start > 1 {
                out.push(Degeneracy { sector, energy: values[start], multiplicity: i - start });
            }
            start = i;
        }
    }
    out
}

fn norm_scale(h: &ChainHamiltonian) -> f64 {
    h.terms.iter().map(|t| t.operator_norm().unwrap_or(1.0)).sum()
}

/// Dense diagonalization on the full space. Purely diagonal Hamiltonians return the
/// computational basis, ordered by energy and then by mask.
pub fn diagonalize_dense(h: &ChainHamiltonian, options: &EigenOptions) -> Result<Spectrum> {
    if h.n > options.dense_cap {
        return Err(Error::CapExceeded { what: "dense diagonalization", n: h.n, cap: options.dense_cap });
    }
    let d = h.dim();
    let matrix = h.dense_matrix();
    let (energies, vectors) = if h.is_diagonal() {
        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| matrix[(a, a)].re.total_cmp(&matrix[(b, b)].re).then(a.cmp(&b)));
        let energies = order.iter().map(|&i| matrix[(i, i)].re).collect();
        let vectors =
            Mat::from_fn(
                d,
                d,
                |row, col| {
                    if row == order[col] {
                        C64::new(1.0, 0.0)
                    } else {
                        C64::new(0.0, 0.0)
                    }
                },
            );
        (energies, vectors)
    } else {
        backend::hermitian_eigen(&matrix)?
    };
    let degeneracies = degeneracy_clusters(&energies, None, norm_scale(h));
    Ok(Spectrum {
        n: h.n,
        energies,
        sectors: vec![None; d],
        vectors: Eigenvectors::Dense(vectors),
        degeneracies,
    })
}

/// All momentum blocks of a translation-invariant `H`, in ascending `k`.
pub fn momentum_blocks(h: &ChainHamiltonian, table: &OrbitTable) -> Result<Vec<MomentumBlock>> {
    if !h.translation_invariant {
        return Err(Error::NotTranslationInvariant);
    }
    Ok((0..h.n).into_par_iter().map(|k| build_momentum_block(h, table, k)).collect())
}

/// Per-sector diagonalization with eigenvectors lifted to the full space on demand.
pub fn diagonalize_sectors(h: &ChainHamiltonian, options: &EigenOptions) -> Result<Spectrum> {
    if !h.translation_invariant {
        return Err(Error::NotTranslationInvariant);
    }
    if h.n > options.sector_cap {
        return Err(Error::CapExceeded { what: "sector diagonalization", n: h.n, cap: options.sector_cap });
    }
    let table = Arc::new(OrbitTable::new(h.n)?);
    let scale = norm_scale(h);
    // Blocks are solved independently; collect preserves ascending k.
    let solved = (0..h.n)
        .into_par_iter()
        .map(|k| {
            let block = build_momentum_block(h, &table, k);
            let (values, vectors) = backend::hermitian_eigen(&block.matrix)?;
            Ok((values, SolvedBlock { k, orbits: block.orbits, vectors }))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut entries: Vec<(f64, usize, usize)> = Vec::with_capacity(h.dim());
    let mut degeneracies = Vec::new();
    for (b, (values, block)) in solved.iter().enumerate() {
        degeneracies.extend(degeneracy_clusters(values, Some(block.k), scale));
        entries.extend(values.iter().enumerate().map(|(col, &e)| (e, b, col)));
    }
    entries.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    let energies = entries.iter().map(|e| e.0).collect();
    let index: Vec<(usize, usize)> = entries.iter().map(|e| (e.1, e.2)).collect();
    let blocks: Vec<SolvedBlock> = solved.into_iter().map(|(_, b)| b).collect();
    let sectors = index.iter().map(|&(b, _)| Some(blocks[b].k)).collect();
    Ok(Spectrum {
        n: h.n,
        energies,
        sectors,
        vectors: Eigenvectors::Sectors { table, blocks, index },
        degeneracies,
    })
}

/// Translation-invariant chains go through momentum sectors, others through the dense path.
pub fn diagonalize(h: &ChainHamiltonian, options: &EigenOptions) -> Result<Spectrum> {
    if h.translation_invariant {
        diagonalize_sectors(h, options)
    } else {
        diagonalize_dense(h, options)
    }
}

pub mod cache {
    //! On-disk spectrum cache: a JSON container keyed by model parameters.

    use std::path::{Path, PathBuf};

    use serde::{Deserialize, Serialize};

    use super::Spectrum;
    use crate::error::Result;

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct CacheKey {
        pub model: String,
        pub n: usize,
        pub g: f64,
        pub h: f64,
        pub seed: Option<u64>,
    }

    impl CacheKey {
        pub fn file_name(&self) -> String {
            let seed = self.seed.map(|s| format!("_s{s}")).unwrap_or_default();
            format!("{}_n{}_g{}_h{}{}.json", self.model, self.n, self.g, self.h, seed)
        }
    }

    #[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
    pub struct CachedSpectrum {
        pub key: CacheKey,
        pub eigenvalues: Vec<f64>,
        pub sectors: Vec<Option<usize>>,
        pub eigenvectors_persisted: bool,
        /// Column-major `(re, im)` pairs, one vector per eigenstate.
        #[serde(default, skip_serializing_if = "Option::is_none")]
        pub eigenvectors: Option<Vec<Vec<(f64, f64)>>>,
    }

    pub fn path_for(dir: &Path, key: &CacheKey) -> PathBuf {
        dir.join(key.file_name())
    }

    pub fn store(dir: &Path, key: &CacheKey, spectrum: &Spectrum, with_vectors: bool) -> Result<PathBuf> {
        let eigenvectors = if with_vectors && spectrum.has_eigenvectors() {
            Some(
                (0..spectrum.len())
                    .map(|j| {
                        spectrum.eigenvector(j).map(|v| v.amplitudes.iter().map(|a| (a.re, a.im)).collect())
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        } else {
            None
        };
        let cached = CachedSpectrum {
            key: key.clone(),
            eigenvalues: spectrum.energies.clone(),
            sectors: (0..spectrum.len()).map(|j| spectrum.sector(j)).collect(),
            eigenvectors_persisted: eigenvectors.is_some(),
            eigenvectors,
        };
        std::fs::create_dir_all(dir)?;
        let path = path_for(dir, key);
        std::fs::write(&path, serde_json::to_vec(&cached)?)?;
        Ok(path)
    }

    pub fn load(dir: &Path, key: &CacheKey) -> Result<Option<CachedSpectrum>> {
        let path = path_for(dir, key);
        if !path.exists() {
            return Ok(None);
        }
        let cached: CachedSpectrum = serde_json::from_slice(&std::fs::read(path)?)?;
        Ok((cached.key == *key).then_some(cached))
    }
}
