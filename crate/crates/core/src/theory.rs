//! Closed-form side: Page's formula, the universal eigenstate-entanglement formula,
//! the upper bounds on eigenstate entanglement, and the Gaussian asymptotics of the
//! random-basis toy model together with the quadratures that evaluate them.

use std::f64::consts::{FRAC_2_SQRT_PI, LN_2, PI};
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::stats::kahan_sum;

/// Slack below which a bound counts as violated.
pub const BOUND_SLACK_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub bound: f64,
    pub measured: f64,
    pub slack: f64,
    pub pass: bool,
}

impl BoundReport {
    pub fn new(name: impl Into<String>, bound: f64, measured: f64) -> Self {
        let slack = bound - measured;
        Self { name: name.into(), bound, measured, slack, pass: slack >= -BOUND_SLACK_TOL }
    }
}

/// Mean entanglement entropy of a Haar-random state on `dA ⊗ dB`, `dA ≤ dB`:
/// `Σ_{k=dB+1}^{dA·dB} 1/k − (dA − 1)/(2 dB)`.
pub fn page_entropy(d_a: usize, d_b: usize) -> Result<f64> {
    if d_a == 0 || d_a > d_b {
        return Err(domain(format!("page_entropy needs 1 <= dA <= dB, got ({d_a}, {d_b})")));
    }
    let top = d_a * d_b;
    // Smallest terms first.
    let harmonic = kahan_sum((d_b + 1..=top).rev().map(|k| 1.0 / k as f64));
    Ok(harmonic - (d_a as f64 - 1.0) / (2.0 * d_b as f64))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PageAsymptotic {
    pub value: f64,
    /// False when the leading-order form is meaningless (negative), e.g. `dA = dB = 1`.
    pub in_regime: bool,
}

/// `ln dA − dA/(2 dB)`.
pub fn page_asymptotic(d_a: usize, d_b: usize) -> PageAsymptotic {
    let value = (d_a as f64).ln() - d_a as f64 / (2.0 * d_b as f64);
    PageAsymptotic { value, in_regime: value >= 0.0 }
}

fn reflect(f: f64) -> f64 {
    if f > 0.5 {
        1.0 - f
    } else {
        f
    }
}

/// Subsystem size `f · n`, which must be a positive integer below `n`.
fn subsystem_size(n: usize, f: f64) -> Result<usize> {
    let m = f * n as f64;
    let rounded = m.round();
    if !(f > 0.0 && f < 1.0) || (m - rounded).abs() > 1e-9 || rounded < 1.0 {
        return Err(domain(format!("f = {f} does not give an integral subsystem of n = {n} sites")));
    }
    Ok(rounded as usize)
}

/// Conjectured average eigenstate entropy `m ln 2 + ln(1 − f)/2 − 2δ_{f,1/2}/π`;
/// `f > 1/2` is reflected to `1 − f`.
pub fn universal_entropy(n: usize, f: f64) -> Result<f64> {
    let m = subsystem_size(n, f)?;
    let m = m.min(n - m);
    let f = m as f64 / n as f64;
    let half = 2 * m == n;
    Ok(m as f64 * LN_2 + (1.0 - f).ln() / 2.0 - if half { 2.0 / PI } else { 0.0 })
}

/// `min{f, 1−f} n ln 2 − S̄` predicted by the universal formula:
/// `−ln(1 − f)/2 + (2/π) δ_{f,1/2}` for the reflected `f`. Exact at `f = 1/2`.
pub fn universal_correction(f: f64) -> Result<f64> {
    if !(f > 0.0 && f < 1.0) {
        return Err(domain(format!("f = {f} outside (0, 1)")));
    }
    let f = reflect(f);
    Ok(-(1.0 - f).ln() / 2.0 + if f == 0.5 { 2.0 / PI } else { 0.0 })
}

/// Per-eigenstate bound `m ln 2 − f E²/(4n)`, for energies of `H` normalized to `‖H_i‖ = 1`.
pub fn lemma_bound(m: usize, f: f64, energy: f64, n: usize) -> Result<f64> {
    if m % 2 == 1 {
        return Err(domain(format!("the per-eigenstate bound needs an even subsystem, got m = {m}")));
    }
    if f > 0.5 {
        return Err(domain(format!("the per-eigenstate bound needs f <= 1/2, got {f}")));
    }
    Ok(m as f64 * LN_2 - f * energy * energy / (4.0 * n as f64))
}

/// Bound on the eigenstate average: `m ln 2 − f ⟨H_1²⟩ / (4 ‖H_1‖²)`.
pub fn theorem_bound(m: usize, f: f64, moment: f64, norm: f64) -> Result<f64> {
    if norm == 0.0 {
        return Err(domain("local term norm is zero"));
    }
    if f > 0.5 {
        return Err(domain(format!("the average bound needs f <= 1/2, got {f}")));
    }
    Ok(m as f64 * LN_2 - f * moment / (4.0 * norm * norm))
}

fn shannon(p: &[f64]) -> f64 {
    -p.iter().filter(|&&x| x > 0.0).map(|&x| x * x.ln()).sum::<f64>()
}

/// The three extremal distributions on four outcomes at trace distance `|ε|` from uniform.
pub fn appendix_a_distributions(eps: f64) -> Result<Vec<[f64; 4]>> {
    if eps.is_nan() || eps.abs() > 1.0 {
        return Err(domain(format!("|ε| must not exceed 1, got {eps}")));
    }
    let mut out = vec![[0.25 + eps / 4.0, 0.25 + eps / 4.0, 0.25 - eps / 4.0, 0.25 - eps / 4.0]];
    if eps >= -0.5 {
        let r = 0.25 - eps / 6.0;
        out.push([0.25 + eps / 2.0, r, r, r]);
    }
    if eps <= 0.5 {
        let r = 0.25 + eps / 6.0;
        out.push([0.25 - eps / 2.0, r, r, r]);
    }
    Ok(out)
}

/// Largest Shannon entropy among the valid candidate distributions.
pub fn appendix_a_candidates(eps: f64) -> Result<f64> {
    Ok(appendix_a_distributions(eps)?.iter().map(|p| shannon(p)).fold(f64::NEG_INFINITY, f64::max))
}

/// `2 ln 2 − ε²/2`.
pub fn two_site_bound(eps: f64) -> f64 {
    2.0 * LN_2 - eps * eps / 2.0
}

/// Complementary error function, absolute error ~1e-15.
///
/// `|x| < 2.5`: `1 − erf(x)` from the positive series
/// `erf(x) = 2/√π e^{−x²} Σ_k 2^k x^{2k+1} / (2k+1)!!`.
/// Larger `x`: Lentz evaluation of the continued fraction
/// `erfc(x) = e^{−x²}/√π · 1/(x + (1/2)/(x + 1/(x + (3/2)/(x + …))))`.
pub fn erfc(x: f64) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x < 0.0 {
        return 2.0 - erfc(-x);
    }
    if x < 2.5 {
        return 1.0 - erf_series(x);
    }
    if x > 27.3 {
        return 0.0;
    }
    erfc_continued_fraction(x) * (-x * x).exp() / PI.sqrt()
}

fn erf_series(x: f64) -> f64 {
    let x2 = x * x;
    let mut term = x;
    let mut sum = x;
    for k in 1..200 {
        term *= 2.0 * x2 / (2 * k + 1) as f64;
        sum += term;
        if term < 1e-17 * sum {
            break;
        }
    }
    FRAC_2_SQRT_PI * (-x2).exp() * sum
}

/// `1/(x + a_1/(x + a_2/(x + …)))` with `a_k = k/2`.
fn erfc_continued_fraction(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut f = x;
    let mut c = x;
    let mut d = 0.0;
    for k in 1..5000 {
        let a = k as f64 / 2.0;
        d = x + a * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = x + a / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-16 {
            break;
        }
    }
    1.0 / f
}

/// Gauss–Legendre rule of fixed order: nodes and weights on `[−1, 1]`.
fn gauss_legendre_rule() -> &'static (Vec<f64>, Vec<f64>) {
    const ORDER: usize = 20;
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let mut nodes = Vec::with_capacity(ORDER);
        let mut weights = Vec::with_capacity(ORDER);
        for i in 0..ORDER {
            // Newton on P_N from the Chebyshev-like initial guess.
            let mut x = (PI * (i as f64 + 0.75) / (ORDER as f64 + 0.5)).cos();
            let mut derivative = 0.0;
            for _ in 0..100 {
                let (mut p0, mut p1) = (1.0, x);
                for k in 2..=ORDER {
                    let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                    p0 = p1;
                    p1 = p2;
                }
                derivative = ORDER as f64 * (x * p1 - p0) / (x * x - 1.0);
                let step = p1 / derivative;
                x -= step;
                if step.abs() < 1e-16 {
                    break;
                }
            }
            nodes.push(x);
            weights.push(2.0 / ((1.0 - x * x) * derivative * derivative));
        }
        (nodes, weights)
    })
}

fn gauss_legendre(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let (nodes, weights) = gauss_legendre_rule();
    let half = (b - a) / 2.0;
    let mid = (a + b) / 2.0;
    half * nodes.iter().zip(weights).map(|(x, w)| w * f(mid + half * x)).sum::<f64>()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the local differences between one panel and its two halves.
    pub error_estimate: f64,
}

/// Adaptive composite Gauss–Legendre on `[a, b]`: a panel is accepted when its
/// value agrees with the sum over its halves to within the panel's share of `abs_tol`.
pub fn integrate(f: impl Fn(f64) -> f64, a: f64, b: f64, abs_tol: f64) -> Result<Quadrature> {
    const MAX_DEPTH: u32 = 40;
    #[allow(clippy::too_many_arguments)]
    fn recurse(
        f: &impl Fn(f64) -> f64,
        a: f64,
        b: f64,
        whole: f64,
        tol: f64,
        depth: u32,
        out: &mut Quadrature,
        failed: &mut bool,
    ) {
        let mid = (a + b) / 2.0;
        let left = gauss_legendre(f, a, mid);
        let right = gauss_legendre(f, mid, b);
        let diff = (left + right - whole).abs();
        if diff <= tol || depth >= MAX_DEPTH {
            if diff > tol {
                *failed = true;
            }
            out.value += left + right;
            out.error_estimate += diff;
            return;
        }
        recurse(f, a, mid, left, tol / 2.0, depth + 1, out, failed);
        recurse(f, mid, b, right, tol / 2.0, depth + 1, out, failed);
    }
    let mut out = Quadrature { value: 0.0, error_estimate: 0.0 };
    let mut failed = false;
    let whole = gauss_legendre(&f, a, b);
    recurse(&f, a, b, whole, abs_tol, 0, &mut out, &mut failed);
    if failed || !out.value.is_finite() {
        return Err(Error::Quadrature { estimate: out.error_estimate, requested: abs_tol });
    }
    Ok(out)
}

/// Scaled magnetizations of a sector `j` and an `A`-block `k`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AsymptoticParams {
    pub n: usize,
    pub m: usize,
    pub f: f64,
    pub j: usize,
    pub k: usize,
    /// `j/√n − √n/2`.
    pub big_j: f64,
    /// `k/√n − f√n/2`.
    pub big_k: f64,
}

impl AsymptoticParams {
    pub fn new(n: usize, m: usize, j: usize, k: usize) -> Result<Self> {
        if m == 0 || m >= n {
            return Err(domain(format!("need 0 < m < n, got m = {m}, n = {n}")));
        }
        let f = m as f64 / n as f64;
        let root = (n as f64).sqrt();
        Ok(Self {
            n,
            m,
            f,
            j,
            k,
            big_j: j as f64 / root - root / 2.0,
            big_k: k as f64 / root - f * root / 2.0,
        })
    }
}

/// Asymptotic sector entropy for `f < 1/2`: `f n ln 2 + f(1 − 4J²)/2 + ln(1 − f)/2`.
pub fn sector_entropy_flt_half(n: usize, f: f64, big_j: f64) -> Result<f64> {
    if !(f > 0.0 && f < 0.5) {
        return Err(domain(format!("f = {f} outside (0, 1/2); use sector_entropy_half at f = 1/2")));
    }
    Ok(f * n as f64 * LN_2 + f * (1.0 - 4.0 * big_j * big_j) / 2.0 + (1.0 - f).ln() / 2.0)
}

/// `S_j − (n−1) ln 2 / 2` at `f = 1/2` for `J ≤ 0`.
fn half_shift(big_j: f64) -> f64 {
    let j = -big_j.abs();
    0.25 + j * (2.0 / PI).sqrt() - j * j - (2.0 * j * j).exp() * erfc(-(2.0f64).sqrt() * j) / 2.0
}

/// Asymptotic sector entropy at `f = 1/2`; `J > 0` is mapped to `−J`.
pub fn sector_entropy_half(n: usize, big_j: f64) -> f64 {
    (n as f64 - 1.0) / 2.0 * LN_2 + half_shift(big_j)
}

/// Integration window for Gaussian-weighted integrands; `e^{−2J²} < 1e-55` outside.
pub const GAUSSIAN_WINDOW: f64 = 8.0;
pub const QUAD_TOL: f64 = 1e-9;

/// `∫ e^{−2J²} (1 − 4J²) dJ` over the real line (zero).
pub fn gaussian_moment_integral() -> Result<Quadrature> {
    integrate(|j| (-2.0 * j * j).exp() * (1.0 - 4.0 * j * j), -GAUSSIAN_WINDOW, GAUSSIAN_WINDOW, QUAD_TOL)
}

/// `√(8/π) ∫_{−∞}^0 e^{−2J²} (¼ + J√(2/π) − J² − e^{2J²} erfc(−√2 J)/2) dJ`; equals `−2/π`.
pub fn half_filling_integral() -> Result<Quadrature> {
    let weight = (8.0 / PI).sqrt();
    let q = integrate(
        |j| {
            // e^{−2J²} e^{2J²} erfc(·) folded to avoid overflow in the tail.
            (-2.0 * j * j).exp() * (0.25 + j * (2.0 / PI).sqrt() - j * j) - erfc(-(2.0f64).sqrt() * j) / 2.0
        },
        -GAUSSIAN_WINDOW,
        0.0,
        QUAD_TOL / weight,
    )?;
    Ok(Quadrature { value: weight * q.value, error_estimate: weight * q.error_estimate })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SectorAverage {
    pub f: f64,
    /// Gaussian average of the `J`-dependent part of `S_j`.
    pub j_dependent: Quadrature,
    /// `S̄ − m ln 2` in the thermodynamic limit.
    pub correction: f64,
}

/// Average of the asymptotic `S_j` over sectors weighted by `|M_j|/2^n`, reduced to the
/// `n`-independent constant beyond `m ln 2`.
pub fn average_over_sectors(f: f64) -> Result<SectorAverage> {
    if !(f > 0.0 && f <= 0.5) {
        return Err(domain(format!("f = {f} outside (0, 1/2]")));
    }
    if f == 0.5 {
        let j_dependent = half_filling_integral()?;
        // (n − 1) ln 2 / 2 = m ln 2 − ln 2 / 2 at m = n/2.
        return Ok(SectorAverage { f, j_dependent, correction: -LN_2 / 2.0 + j_dependent.value });
    }
    let density = (2.0 / PI).sqrt();
    let q = integrate(
        |j| density * (-2.0 * j * j).exp() * f * (1.0 - 4.0 * j * j) / 2.0,
        -GAUSSIAN_WINDOW,
        GAUSSIAN_WINDOW,
        QUAD_TOL,
    )?;
    Ok(SectorAverage { f, j_dependent: q, correction: (1.0 - f).ln() / 2.0 + q.value })
}
