//! Periodic nearest-neighbour spin-1/2 Hamiltonians `H = Σ_i H_i` with
//! `H_i = H'_i + H'_{i,i+1}`, built from traceless one- and two-site Pauli terms.

use faer::Mat;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};

use crate::eigensolve::backend;
use crate::entanglement::PureState;
use crate::error::{domain, Error, Result};
use crate::C64;

/// Pauli axes, indexed x = 0, y = 1, z = 2 in coefficient arrays.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];
}

/// Coefficients of one local term `H_i`: a field on spin `i` and the couplings
/// `coupling[a][b] σ^a_i σ^b_{i+1}`. No identity component, so the term is traceless.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LocalTermSpec {
    pub field: [f64; 3],
    pub coupling: [[f64; 3]; 3],
}

impl LocalTermSpec {
    /// `σᶻσᶻ + g σˣ + h σᶻ`.
    pub fn ising(g: f64, h: f64) -> Self {
        let mut coupling = [[0.0; 3]; 3];
        coupling[2][2] = 1.0;
        Self { field: [g, 0.0, h], coupling }
    }

    /// `2^{-2} tr(H_i²)`: the Pauli strings are orthonormal under this inner product.
    pub fn infinite_temperature_moment(&self) -> f64 {
        let fields: f64 = self.field.iter().map(|c| c * c).sum();
        let couplings: f64 = self.coupling.iter().flatten().map(|c| c * c).sum();
        fields + couplings
    }

    /// Pauli strings of this term with spin `i` on bit `site` and spin `i+1` on bit `next`.
    fn strings(&self, site: usize, next: usize) -> Vec<PauliString> {
        let mut out = Vec::new();
        for (a, &pa) in Pauli::ALL.iter().enumerate() {
            if self.field[a] != 0.0 {
                out.push(PauliString::new(self.field[a], &[(site, pa)]));
            }
            for (b, &pb) in Pauli::ALL.iter().enumerate() {
                let c = self.coupling[a][b];
                if c != 0.0 {
                    out.push(PauliString::new(c, &[(site, pa), (next, pb)]));
                }
            }
        }
        out
    }

    /// The 4×4 matrix of the term on two spins; local index `b_i + 2 b_{i+1}`.
    pub fn two_site_matrix(&self) -> Mat<C64> {
        let strings = self.strings(0, 1);
        let mut m = Mat::<C64>::zeros(4, 4);
        for basis in 0..4u64 {
            for s in &strings {
                let (target, amp) = s.act(basis);
                m[(target as usize, basis as usize)] += amp;
            }
        }
        m
    }

    /// Spectral norm of the two-site matrix.
    pub fn operator_norm(&self) -> Result<f64> {
        let (values, _) = backend::hermitian_eigen(&self.two_site_matrix())?;
        Ok(values.iter().fold(0.0f64, |acc, v| acc.max(v.abs())))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = *self;
        out.field.iter_mut().for_each(|c| *c *= factor);
        out.coupling.iter_mut().flatten().for_each(|c| *c *= factor);
        out
    }
}

/// A Pauli string in bit form: `P|b⟩ = coef · i^{#Y} · (-1)^{#(Y,Z sites with bit 0)} |b ⊕ flip⟩`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PauliString {
    pub coef: f64,
    pub flip: u64,
    pub yz: u64,
    pub y_count: u32,
}

impl PauliString {
    pub fn new(coef: f64, ops: &[(usize, Pauli)]) -> Self {
        let mut s = Self { coef, flip: 0, yz: 0, y_count: 0 };
        for &(bit, p) in ops {
            let m = 1u64 << bit;
            match p {
                Pauli::X => s.flip |= m,
                Pauli::Y => {
                    s.flip |= m;
                    s.yz |= m;
                    s.y_count += 1;
                }
                Pauli::Z => s.yz |= m,
            }
        }
        s
    }

    #[inline]
    pub fn act(&self, basis: u64) -> (u64, C64) {
        let negatives = (!basis & self.yz).count_ones();
        let sign = if negatives.is_multiple_of(2) { 1.0 } else { -1.0 };
        let amp = match self.y_count % 4 {
            0 => C64::new(sign * self.coef, 0.0),
            1 => C64::new(0.0, sign * self.coef),
            2 => C64::new(-sign * self.coef, 0.0),
            _ => C64::new(0.0, -sign * self.coef),
        };
        (basis ^ self.flip, amp)
    }
}

/// `H = Σ_{i=1}^n H_i` on a periodic chain; `terms[i-1]` is `H_i`, coupling spins `i` and `i+1 mod n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainHamiltonian {
    pub n: usize,
    pub terms: Vec<LocalTermSpec>,
    pub translation_invariant: bool,
}

/// Widest chain for which dense or state-vector work is attempted.
pub const MAX_STATE_SITES: usize = 26;

impl ChainHamiltonian {
    pub fn new(terms: Vec<LocalTermSpec>) -> Result<Self> {
        let n = terms.len();
        if n < 2 {
            return Err(domain(format!("a periodic chain needs n >= 2 sites, got {n}")));
        }
        if n > MAX_STATE_SITES {
            return Err(domain(format!("n = {n} exceeds the {MAX_STATE_SITES}-site limit")));
        }
        let translation_invariant = terms.iter().all(|t| *t == terms[0]);
        Ok(Self { n, terms, translation_invariant })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    /// Every Pauli string of `H`, site by site.
    pub fn pauli_strings(&self) -> Vec<PauliString> {
        self.terms.iter().enumerate().flat_map(|(i, t)| t.strings(i, (i + 1) % self.n)).collect()
    }

    /// Pauli strings of the single local term `H_site` (1-based).
    pub fn site_strings(&self, site: usize) -> Vec<PauliString> {
        let i = site - 1;
        self.terms[i].strings(i, (i + 1) % self.n)
    }

    /// True when no string flips a spin.
    pub fn is_diagonal(&self) -> bool {
        self.pauli_strings().iter().all(|s| s.flip == 0)
    }

    pub fn dense_matrix(&self) -> Mat<C64> {
        let d = self.dim();
        let strings = self.pauli_strings();
        let mut m = Mat::<C64>::zeros(d, d);
        for basis in 0..d as u64 {
            for s in &strings {
                let (target, amp) = s.act(basis);
                m[(target as usize, basis as usize)] += amp;
            }
        }
        m
    }

    /// Matrix-free `H v`.
    pub fn apply_to_state(&self, v: &PureState) -> Result<PureState> {
        if v.n != self.n {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: v.amplitudes.len() });
        }
        let strings = self.pauli_strings();
        Ok(PureState::from_raw(self.n, apply_strings(&strings, &v.amplitudes)))
    }

    /// `⟨H_1²⟩ = 2^{-2} tr(H_1²)`; only defined for translation-invariant chains.
    pub fn infinite_temperature_moment(&self) -> Result<f64> {
        if !self.translation_invariant {
            return Err(Error::NotTranslationInvariant);
        }
        Ok(self.terms[0].infinite_temperature_moment())
    }

    /// `⟨H_i²⟩` for a single site (1-based); valid with or without translation invariance.
    pub fn site_moment(&self, site: usize) -> f64 {
        self.terms[site - 1].infinite_temperature_moment()
    }

    /// `‖H_1‖`, the spectral norm of the first local term.
    pub fn local_term_norm(&self) -> Result<f64> {
        self.terms[0].operator_norm()
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            n: self.n,
            terms: self.terms.iter().map(|t| t.scaled(factor)).collect(),
            translation_invariant: self.translation_invariant,
        }
    }
}

pub(crate) fn apply_strings(strings: &[PauliString], amps: &[C64]) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); amps.len()];
    for (basis, &a) in amps.iter().enumerate() {
        if a == C64::new(0.0, 0.0) {
            continue;
        }
        for s in strings {
            let (target, amp) = s.act(basis as u64);
            out[target as usize] += amp * a;
        }
    }
    out
}

/// `H_i = σᶻ_i σᶻ_{i+1} + g σˣ_i + h σᶻ_i` with periodic boundary.
pub fn build_chaotic_ising(n: usize, g: f64, h: f64) -> Result<ChainHamiltonian> {
    if n < 2 {
        return Err(domain(format!("chaotic Ising chain needs n >= 2, got {n}")));
    }
    ChainHamiltonian::new(vec![LocalTermSpec::ising(g, h); n])
}

/// The Ising chain with longitudinal fields `h_i` drawn uniformly from
/// `[h_center - w, h_center + w]`; deterministic per seed.
pub fn build_disordered(n: usize, g: f64, h_center: f64, w: f64, seed: u64) -> Result<ChainHamiltonian> {
    if w.is_nan() || w < 0.0 {
        return Err(domain(format!("disorder width must be nonnegative, got {w}")));
    }
    if n < 2 {
        return Err(domain(format!("disordered chain needs n >= 2, got {n}")));
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let terms = (0..n)
        .map(|_| {
            let h = if w == 0.0 { h_center } else { h_center + w * (2.0 * rng.random::<f64>() - 1.0) };
            LocalTermSpec::ising(g, h)
        })
        .collect();
    ChainHamiltonian::new(terms)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random_states::{haar_state, SeededSampler};
    use crate::spin_basis::rotate;

    fn max_abs_diff(a: &Mat<C64>, b: &Mat<C64>) -> f64 {
        let mut worst = 0.0f64;
        for j in 0..a.ncols() {
            for i in 0..a.nrows() {
                worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        worst
    }

    #[test]
    fn two_site_zz_spectrum() {
        let h = build_chaotic_ising(2, 0.0, 0.0).unwrap();
        let m = h.dense_matrix();
        let diag: Vec<f64> = (0..4).map(|i| m[(i, i)].re).collect();
        assert_eq!(diag, vec![2.0, -2.0, -2.0, 2.0]);
        assert_eq!(
            max_abs_diff(&m, &Mat::from_fn(4, 4, |i, j| if i == j { m[(i, i)] } else { C64::new(0.0, 0.0) })),
            0.0
        );
    }

    #[test]
    fn all_up_energy() {
        // Three aligned bonds plus three unit fields.
        let h = build_chaotic_ising(3, 0.0, 1.0).unwrap();
        let m = h.dense_matrix();
        assert_eq!(m[(7, 7)], C64::new(6.0, 0.0));
        assert!(h.is_diagonal());
    }

    #[test]
    fn traceless() {
        for &(g, h) in &[(1.05, 0.5), (0.905, 0.809), (0.0, 1.0)] {
            let m = build_chaotic_ising(6, g, h).unwrap().dense_matrix();
            let tr: C64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
            assert!(tr.norm() <= 1e-12);
        }
        let t = LocalTermSpec {
            field: [0.3, -0.7, 0.2],
            coupling: [[0.1, 0.2, 0.3], [0.4, 0.5, 0.6], [0.7, 0.8, 0.9]],
        };
        let m = ChainHamiltonian::new(vec![t; 5]).unwrap().dense_matrix();
        let tr: C64 = (0..m.nrows()).map(|i| m[(i, i)]).sum();
        assert!(tr.norm() <= 1e-12);
    }

    #[test]
    fn hermitian_with_y_terms() {
        let mut t = LocalTermSpec::ising(0.4, 0.3);
        t.field[1] = 0.6;
        t.coupling[0][1] = 0.25;
        t.coupling[1][2] = -0.5;
        for n in [2, 5, 10] {
            let m = ChainHamiltonian::new(vec![t; n]).unwrap().dense_matrix();
            let adj = m.adjoint().to_owned();
            assert!(max_abs_diff(&m, &adj) <= 1e-12, "n = {n}");
        }
    }

    #[test]
    fn commutes_with_translation() {
        let n = 8;
        let m = build_chaotic_ising(n, 1.05, 0.5).unwrap().dense_matrix();
        // (T H T†)[T a, T b] = H[a, b]
        let d = 1usize << n;
        let mut worst = 0.0f64;
        for b in 0..d {
            for a in 0..d {
                let ta = rotate(a as u64, n, 1) as usize;
                let tb = rotate(b as u64, n, 1) as usize;
                worst = worst.max((m[(ta, tb)] - m[(a, b)]).norm());
            }
        }
        assert!(worst <= 1e-12);
    }

    #[test]
    fn apply_matches_dense() {
        let mut sampler = SeededSampler::new(11);
        let mut t = LocalTermSpec::ising(1.05, 0.5);
        t.coupling[1][1] = 0.3;
        for n in [4, 7, 10] {
            let h = ChainHamiltonian::new(vec![t; n]).unwrap();
            let m = h.dense_matrix();
            let v = haar_state(1 << n, &mut sampler).unwrap();
            let hv = h.apply_to_state(&PureState::from_raw(n, v.amplitudes.clone())).unwrap();
            for i in 0..1 << n {
                let dense: C64 = (0..1 << n).map(|j| m[(i, j)] * v.amplitudes[j]).sum();
                assert!((dense - hv.amplitudes[i]).norm() <= 1e-12);
            }
        }
    }

    #[test]
    fn apply_examples() {
        let h = build_chaotic_ising(4, 0.0, 0.0).unwrap();
        let v = PureState::basis(4, 0).unwrap();
        let hv = h.apply_to_state(&v).unwrap();
        assert_eq!(hv.amplitudes[0], C64::new(4.0, 0.0));
        assert!(hv.amplitudes[1..].iter().all(|a| a.norm() == 0.0));

        let zero = PureState::from_raw(4, vec![C64::new(0.0, 0.0); 16]);
        assert!(h.apply_to_state(&zero).unwrap().amplitudes.iter().all(|a| a.norm() == 0.0));

        let wrong = PureState::from_raw(3, vec![C64::new(0.0, 0.0); 8]);
        assert!(matches!(h.apply_to_state(&wrong), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn expectation_is_real() {
        let mut sampler = SeededSampler::new(3);
        let h = build_chaotic_ising(6, 1.05, 0.5).unwrap();
        let v = haar_state(64, &mut sampler).unwrap().with_sites(6).unwrap();
        let hv = h.apply_to_state(&v).unwrap();
        let e: C64 = v.amplitudes.iter().zip(&hv.amplitudes).map(|(a, b)| a.conj() * b).sum();
        assert!(e.im.abs() <= 1e-12);
    }

    #[test]
    fn moments() {
        let m = |g, h| build_chaotic_ising(4, g, h).unwrap().infinite_temperature_moment().unwrap();
        assert_eq!(m(0.0, 0.0), 1.0);
        assert!((m(1.05, 0.5) - 2.3525).abs() < 1e-15);
        assert_eq!(m(0.0, 1.0), 2.0);
    }

    #[test]
    fn moment_matches_trace_of_square() {
        let t = LocalTermSpec::ising(1.05, 0.5);
        let a = t.two_site_matrix();
        let sq = &a * &a;
        let tr: C64 = (0..4).map(|i| sq[(i, i)]).sum();
        assert!((tr.re / 4.0 - t.infinite_temperature_moment()).abs() < 1e-14);
    }

    #[test]
    fn moment_requires_translation_invariance() {
        let h = build_disordered(6, 1.05, 0.5, 0.2, 1).unwrap();
        assert!(matches!(h.infinite_temperature_moment(), Err(Error::NotTranslationInvariant)));
    }

    #[test]
    fn norms() {
        let norm = |g, h| build_chaotic_ising(3, g, h).unwrap().local_term_norm().unwrap();
        assert!((norm(0.0, 0.0) - 1.0).abs() < 1e-14);
        assert!((norm(0.0, 0.5) - 1.5).abs() < 1e-14);
        // The term is block diagonal in σᶻ of the second spin: (s + h)σᶻ + gσˣ with s = ±1.
        let closed = ((1.0f64 + 0.5).powi(2) + 1.05f64.powi(2)).sqrt();
        assert!((norm(1.05, 0.5) - closed).abs() < 1e-12);
    }

    #[test]
    fn disorder() {
        let clean = build_chaotic_ising(8, 1.05, 0.5).unwrap();
        assert_eq!(build_disordered(8, 1.05, 0.5, 0.0, 9).unwrap(), clean);

        let a = build_disordered(8, 1.05, 0.5, 0.2, 1).unwrap();
        let b = build_disordered(8, 1.05, 0.5, 0.2, 1).unwrap();
        assert_eq!(a, b);
        assert!(!a.translation_invariant);
        for t in &a.terms {
            assert!(t.field[2] >= 0.3 && t.field[2] <= 0.7);
            assert_eq!(t.field[0], 1.05);
        }
        assert_ne!(a, build_disordered(8, 1.05, 0.5, 0.2, 2).unwrap());
        assert!(build_disordered(8, 1.05, 0.5, -0.1, 1).is_err());
        assert!(build_chaotic_ising(1, 1.0, 1.0).is_err());
    }
}
