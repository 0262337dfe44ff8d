//! The experiment drivers behind the command-line tool.
//!
//! Each driver turns an [`ExperimentConfig`] into a [`RunOutcome`]: a long-format
//! [`ResultTable`], optional detail tables, and counts of bound violations and failed
//! quadratures. [`RunOutcome::write`] persists everything under the output directory.

use std::f64::consts::{LN_2, PI};
use std::path::{Path, PathBuf};

use log::{info, warn};
use serde::Serialize;

use crate::config::{Experiment, ExperimentConfig, IsingParams};
use crate::eigensolve::{diagonalize_dense, diagonalize_sectors, EigenOptions, Spectrum};
use crate::entanglement::{cut_averaged_entropy, eigenstate_entropies_multi, local_energy, two_site_entropy};
use crate::error::{Error, Result};
use crate::hamiltonian::{build_chaotic_ising, build_disordered, ChainHamiltonian};
use crate::random_states::{model_m_average, page_average, Orientation, SeededSampler};
use crate::table::{Metadata, ResultRow, ResultTable};
use crate::theory::{
    self, appendix_a_candidates, average_over_sectors, erfc, gaussian_moment_integral, half_filling_integral,
    lemma_bound, page_asymptotic, page_entropy, theorem_bound, two_site_bound, universal_correction,
    universal_entropy, AsymptoticParams, BoundReport,
};

/// Per-eigenstate entropy together with the bound it was checked against.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundRecord {
    pub n: usize,
    pub g: f64,
    pub h: f64,
    pub j: usize,
    pub energy: f64,
    pub m: usize,
    pub entropy: f64,
    pub sector: Option<usize>,
    pub bound: f64,
    pub slack: f64,
}

/// One magnetization sector of a toy-model run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SectorRecord {
    pub n: usize,
    pub m: usize,
    pub j: usize,
    pub dim: u64,
    pub samples: usize,
    pub mean_entropy: f64,
    pub std_error: f64,
    pub asymptotic: f64,
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub table: ResultTable,
    pub violations: usize,
    pub quadrature_failures: usize,
    pub bound_records: Vec<BoundRecord>,
    pub sector_records: Vec<SectorRecord>,
}

impl RunOutcome {
    fn new(experiment: Experiment, seed: u64) -> Self {
        Self {
            table: ResultTable::new(experiment.name(), Metadata::now(seed)),
            violations: 0,
            quadrature_failures: 0,
            bound_records: Vec::new(),
            sector_records: Vec::new(),
        }
    }

    fn push(&mut self, row: ResultRow) {
        self.table.push(row);
    }

    fn check(&mut self, report: &BoundReport) {
        if !report.pass {
            warn!("{} violated: bound {} < measured {}", report.name, report.bound, report.measured);
            self.violations += 1;
        }
    }

    /// 0 when every check passed, 1 on a bound violation or failed quadrature.
    pub fn exit_code(&self) -> i32 {
        if self.violations > 0 || self.quadrature_failures > 0 {
            1
        } else {
            0
        }
    }

    /// Writes `<experiment>.csv` and any detail tables; returns the paths written.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        std::fs::create_dir_all(dir)?;
        let mut written = Vec::new();
        let main = dir.join(format!("{}.csv", self.table.experiment));
        self.table.write_csv(&main)?;
        written.push(main);
        if !self.bound_records.is_empty() {
            let path = dir.join("entropy_records.csv");
            write_records(&path, &self.bound_records)?;
            written.push(path);
        }
        if !self.sector_records.is_empty() {
            let path = dir.join("modelm_sectors.csv");
            write_records(&path, &self.sector_records)?;
            written.push(path);
        }
        Ok(written)
    }
}

fn write_records<T: Serialize>(path: &Path, records: &[T]) -> Result<()> {
    let mut writer = csv::Writer::from_path(path)?;
    for r in records {
        writer.serialize(r)?;
    }
    writer.flush()?;
    Ok(())
}

/// Runs the configured experiment on a pool of `config.threads` workers.
pub fn run(config: &ExperimentConfig) -> Result<RunOutcome> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.threads)
        .build()
        .map_err(|e| Error::Backend(e.to_string()))?;
    let mut outcome = pool.install(|| match config.experiment {
        Experiment::Figure1 => run_figure1(config),
        Experiment::Bounds => run_bounds(config),
        Experiment::Modelm => run_modelm(config),
        Experiment::Page => run_page(config),
        Experiment::Quadcheck => run_quadcheck(config),
    })?;
    outcome.table.sort();
    outcome.table.validate()?;
    Ok(outcome)
}

fn models(config: &ExperimentConfig) -> Result<&[IsingParams]> {
    if config.models.is_empty() {
        return Err(Error::Config("at least one model is required".into()));
    }
    Ok(&config.models)
}

/// Cuts `m` requested for a chain of `n` sites: explicit `m_values`, then `f_values`,
/// then `fallback`.
fn cuts_for(config: &ExperimentConfig, n: usize, fallback: Vec<usize>) -> Result<Vec<usize>> {
    let mut cuts = if !config.m_values.is_empty() {
        config.m_values.iter().copied().filter(|&m| m > 0 && m < n).collect()
    } else if !config.f_values.is_empty() {
        let mut out = Vec::new();
        for &f in &config.f_values {
            if !(f > 0.0 && f < 1.0) {
                return Err(Error::Config(format!("f = {f} outside (0, 1)")));
            }
            let m = f * n as f64;
            if (m - m.round()).abs() < 1e-9 && m.round() >= 1.0 {
                out.push(m.round() as usize);
            } else {
                info!("skipping f = {f} at n = {n}: not an integral cut");
            }
        }
        out
    } else {
        fallback
    };
    cuts.sort_unstable();
    cuts.dedup();
    Ok(cuts)
}

fn eigen_options(config: &ExperimentConfig) -> EigenOptions {
    EigenOptions { dense_cap: config.caps.dense, sector_cap: config.caps.sector }
}

fn solve_ising(
    config: &ExperimentConfig,
    n: usize,
    model: IsingParams,
) -> Result<(ChainHamiltonian, Spectrum)> {
    let h = build_chaotic_ising(n, model.g, model.h)?;
    info!("diagonalizing n = {n}, g = {}, h = {}", model.g, model.h);
    let spectrum = diagonalize_sectors(&h, &eigen_options(config))?;
    if !spectrum.degeneracies.is_empty() {
        info!("n = {n}: {} degenerate eigenstates", spectrum.degenerate_state_count());
    }
    Ok((h, spectrum))
}

fn skipped(n: usize, model: IsingParams, cap: usize) -> ResultRow {
    ResultRow::new("skipped", cap as f64).with_n(n).with_model(model.g, model.h).with_label("cap")
}

/// Average eigenstate entropy against the subsystem fraction, with the universal
/// finite-size correction for comparison.
pub fn run_figure1(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = RunOutcome::new(Experiment::Figure1, config.seed);
    let mut fractions: Vec<(usize, usize)> = Vec::new();
    for model in models(config)? {
        for n in config.resolved_n_values() {
            if n % 2 == 1 {
                return Err(Error::Config(format!("figure1 needs even chain lengths, got n = {n}")));
            }
            if n > config.caps.sector {
                warn!("n = {n} exceeds the sector cap {}; skipped", config.caps.sector);
                out.push(skipped(n, *model, config.caps.sector));
                continue;
            }
            let cuts = cuts_for(config, n, (1..n).collect())?;
            if cuts.is_empty() {
                continue;
            }
            let (_, spectrum) = solve_ising(config, n, *model)?;
            for avg in eigenstate_entropies_multi(&spectrum, &cuts)? {
                let m = avg.records[0].m;
                let small = m.min(n - m);
                out.push(ResultRow::new("sbar", avg.mean).at(n, m).with_model(model.g, model.h));
                out.push(
                    ResultRow::new("correction", small as f64 * LN_2 - avg.mean)
                        .at(n, m)
                        .with_model(model.g, model.h),
                );
                out.push(
                    ResultRow::new("page", page_entropy(1 << small, 1 << (n - small))?)
                        .at(n, m)
                        .with_model(model.g, model.h),
                );
                fractions.push((n, m));
            }
        }
    }
    let mut fs: Vec<f64> = fractions.iter().map(|&(n, m)| m as f64 / n as f64).collect();
    fs.sort_by(f64::total_cmp);
    fs.dedup();
    for f in fs {
        out.push(ResultRow::new("theory_correction", universal_correction(f)?).with_f(f));
    }
    Ok(out)
}

/// Bounds on eigenstate entanglement checked eigenstate by eigenstate and on average.
pub fn run_bounds(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = RunOutcome::new(Experiment::Bounds, config.seed);
    for model in models(config)? {
        let mut tightness: Vec<(usize, f64)> = Vec::new();
        for n in config.resolved_n_values() {
            if n > config.caps.sector {
                warn!("n = {n} exceeds the sector cap {}; skipped", config.caps.sector);
                out.push(skipped(n, *model, config.caps.sector));
                continue;
            }
            let lemma_cuts: Vec<usize> =
                cuts_for(config, n, vec![2, 4])?.into_iter().filter(|&m| m % 2 == 0 && 2 * m <= n).collect();
            let half = n / 2;
            let mut cuts = lemma_cuts.clone();
            cuts.push(half);
            cuts.push(2.min(n - 1));
            cuts.sort_unstable();
            cuts.dedup();

            let (h, spectrum) = solve_ising(config, n, *model)?;
            let norm = h.local_term_norm()?;
            let moment = h.infinite_temperature_moment()?;
            let averages = eigenstate_entropies_multi(&spectrum, &cuts)?;
            let at = |m: usize| averages.iter().find(|a| a.records[0].m == m).expect("cut computed");

            for &m in &lemma_cuts {
                let f = m as f64 / n as f64;
                let mut min_slack = f64::INFINITY;
                let mut violations = 0usize;
                for r in &at(m).records {
                    let bound = lemma_bound(m, f, r.energy / norm, n)?;
                    let report = BoundReport::new("per-eigenstate bound", bound, r.entropy);
                    if !report.pass {
                        violations += 1;
                    }
                    min_slack = min_slack.min(report.slack);
                    out.bound_records.push(BoundRecord {
                        n,
                        g: model.g,
                        h: model.h,
                        j: r.j,
                        energy: r.energy,
                        m,
                        entropy: r.entropy,
                        sector: r.sector,
                        bound,
                        slack: report.slack,
                    });
                }
                out.violations += violations;
                out.push(ResultRow::new("lemma_min_slack", min_slack).at(n, m).with_model(model.g, model.h));
                out.push(
                    ResultRow::new("lemma_violations", violations as f64)
                        .at(n, m)
                        .with_model(model.g, model.h),
                );
            }

            let f = half as f64 / n as f64;
            let bound = theorem_bound(half, f, moment, norm)?;
            let report = BoundReport::new("average bound", bound, at(half).mean);
            out.check(&report);
            for (q, v) in
                [("theorem_bound", bound), ("theorem_sbar", report.measured), ("theorem_slack", report.slack)]
            {
                out.push(ResultRow::new(q, v).at(n, half).with_model(model.g, model.h));
            }

            if n >= 3 {
                let mut worst = f64::INFINITY;
                let mut two_site_violations = 0usize;
                for j in 0..spectrum.len() {
                    let v = spectrum.eigenvector(j)?;
                    let eps = (local_energy(&v, &h, 1)? / norm).clamp(-1.0, 1.0);
                    let report =
                        BoundReport::new("two-site bound", two_site_bound(eps), two_site_entropy(&v, 1)?);
                    if !report.pass {
                        two_site_violations += 1;
                    }
                    worst = worst.min(report.slack);
                }
                out.violations += two_site_violations;
                out.push(ResultRow::new("two_site_min_slack", worst).at(n, 2).with_model(model.g, model.h));
                out.push(
                    ResultRow::new("two_site_violations", two_site_violations as f64)
                        .at(n, 2)
                        .with_model(model.g, model.h),
                );
            }

            if n >= 4 {
                let scaled = n as f64 * (2.0 * LN_2 - at(2).mean);
                tightness.push((n, scaled));
                out.push(
                    ResultRow::new("tightness_scaled_deficit", scaled).at(n, 2).with_model(model.g, model.h),
                );
            }
        }
        if tightness.len() >= 2 {
            let max = tightness.iter().map(|t| t.1).fold(f64::NEG_INFINITY, f64::max);
            let min = tightness.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
            let ratio = if min > 0.0 { max / min } else { f64::MAX };
            if ratio > config.tightness_band {
                warn!("tightness ratio {ratio} outside the band {}", config.tightness_band);
                out.violations += 1;
            }
            out.push(ResultRow::new("tightness_ratio", ratio).with_m(2).with_model(model.g, model.h));
        }
    }

    out.push(ResultRow::new("appendix_a_max_excess", appendix_a_excess()?));
    if appendix_a_excess()? > 1e-12 {
        out.violations += 1;
    }

    let d = &config.disorder;
    if d.m == 0 || d.m >= d.n {
        return Err(Error::Config(format!("disorder cut m = {} invalid for n = {}", d.m, d.n)));
    }
    let model = models(config)?[0];
    let options = eigen_options(config);
    for &seed in &d.seeds {
        let h = build_disordered(d.n, model.g, model.h, d.w, seed)?;
        let spectrum = diagonalize_dense(&h, &options)?;
        let s = cut_averaged_entropy(&spectrum, d.m)?;
        let small = d.m.min(d.n - d.m);
        let deficit = small as f64 * LN_2 - s;
        if deficit <= d.min_deficit {
            warn!("seed {seed}: deficit {deficit} not above {}", d.min_deficit);
            out.violations += 1;
        }
        out.push(
            ResultRow::new("corollary_deficit", deficit)
                .at(d.n, d.m)
                .with_model(model.g, model.h)
                .with_label(format!("seed={seed:020}")),
        );
    }
    Ok(out)
}

/// Largest excess of a candidate entropy over the two-site bound on the grid
/// `ε ∈ [−1, 1]` in steps of `10⁻³`.
pub fn appendix_a_excess() -> Result<f64> {
    let mut worst = f64::NEG_INFINITY;
    for i in -1000i32..=1000 {
        let eps = i as f64 / 1000.0;
        worst = worst.max(appendix_a_candidates(eps)? - two_site_bound(eps));
    }
    Ok(worst)
}

/// Toy model with Haar-random bases per magnetization sector.
pub fn run_modelm(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = RunOutcome::new(Experiment::Modelm, config.seed);
    if config.samples_per_sector < 30 {
        return Err(Error::Config(format!(
            "samples_per_sector = {} is below the minimum of 30",
            config.samples_per_sector
        )));
    }
    let mut sampler = SeededSampler::new(config.seed);
    for n in config.resolved_n_values() {
        if n > config.caps.model_m {
            return Err(Error::CapExceeded { what: "toy-model chain length", n, cap: config.caps.model_m });
        }
        for m in cuts_for(config, n, vec![n / 2])? {
            info!("toy model n = {n}, m = {m}");
            let avg = model_m_average(n, m, config.samples_per_sector, &mut sampler)?;
            let f = m as f64 / n as f64;
            for s in &avg.sectors {
                let p = AsymptoticParams::new(n, m, s.j, 0)?;
                let asymptotic = if 2 * m == n {
                    theory::sector_entropy_half(n, p.big_j)
                } else {
                    theory::sector_entropy_flt_half(n, f.min(1.0 - f), p.big_j)?
                };
                let label = format!("j={:03}", s.j);
                out.push(
                    ResultRow::new("sector_entropy", s.estimate.mean)
                        .at(n, m)
                        .with_label(label.clone())
                        .with_error(s.estimate.std_error),
                );
                out.push(ResultRow::new("sector_asymptotic", asymptotic).at(n, m).with_label(label));
                out.sector_records.push(SectorRecord {
                    n,
                    m,
                    j: s.j,
                    dim: s.dim,
                    samples: s.estimate.samples,
                    mean_entropy: s.estimate.mean,
                    std_error: s.estimate.std_error,
                    asymptotic,
                });
            }
            out.push(ResultRow::new("sbar", avg.mean).at(n, m).with_error(avg.std_error));
            out.push(ResultRow::new("universal", universal_entropy(n, f)?).at(n, m));
        }
    }
    Ok(out)
}

/// Page's formula against Monte Carlo, plus concentration of the entropy.
pub fn run_page(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = RunOutcome::new(Experiment::Page, config.seed);
    let p = &config.page;
    if p.trials < 100 {
        return Err(Error::Config(format!("page trials = {} is below the minimum of 100", p.trials)));
    }
    let mut sampler = SeededSampler::new(config.seed);
    for &(d_a, d_b) in &p.grid {
        if d_a == 0 || d_b == 0 {
            return Err(Error::Config(format!("page grid entry ({d_a}, {d_b}) has a zero dimension")));
        }
        let (small, large) = (d_a.min(d_b), d_a.max(d_b));
        let exact = page_entropy(small, large)?;
        let mc = page_average(d_a, d_b, p.trials, &mut sampler, Orientation::Swap)?;
        let row = |q: &str, v: f64| ResultRow::new(q, v).with_m(d_a).with_n(d_b);
        out.push(row("page_exact", exact));
        out.push(row("page_mc", mc.mean).with_error(mc.std_error));
        let asym = page_asymptotic(small, large);
        out.push(row("page_asymptotic", asym.value).with_label(if asym.in_regime {
            ""
        } else {
            "out_of_regime"
        }));
        if (mc.mean - exact).abs() > 5.0 * mc.std_error + 1e-12 {
            warn!("Monte Carlo ({d_a}, {d_b}) = {} deviates from {exact}", mc.mean);
            out.violations += 1;
        }
    }
    let mut previous = f64::INFINITY;
    for &d_b in &p.concentration_d_b {
        let est = page_average(p.concentration_d_a, d_b, p.trials, &mut sampler, Orientation::Swap)?;
        out.push(ResultRow::new("concentration_std", est.std_dev).with_m(p.concentration_d_a).with_n(d_b));
        if est.std_dev >= previous {
            warn!("entropy spread did not shrink at dB = {d_b}");
            out.violations += 1;
        }
        previous = est.std_dev;
    }
    Ok(out)
}

/// Quadratures behind the toy-model asymptotics.
pub fn run_quadcheck(config: &ExperimentConfig) -> Result<RunOutcome> {
    let mut out = RunOutcome::new(Experiment::Quadcheck, config.seed);
    let record =
        |out: &mut RunOutcome, q: &str, result: Result<theory::Quadrature>, target: f64, tol: f64| {
            match result {
                Ok(r) => {
                    out.push(ResultRow::new(q, r.value).with_error(r.error_estimate));
                    if (r.value - target).abs() > tol {
                        warn!("{q} = {} misses {target}", r.value);
                        out.violations += 1;
                    }
                    Ok(())
                }
                Err(Error::Quadrature { estimate, requested }) => {
                    warn!("{q}: quadrature error estimate {estimate} above {requested}");
                    out.quadrature_failures += 1;
                    out.push(ResultRow::new("quadrature_failure", estimate).with_label(q.to_string()));
                    Ok(())
                }
                Err(e) => Err(e),
            }
        };
    record(&mut out, "gaussian_moment_integral", gaussian_moment_integral(), 0.0, 1e-9)?;
    record(&mut out, "half_filling_integral", half_filling_integral(), -2.0 / PI, 1e-6)?;
    out.push(ResultRow::new("half_filling_target", -2.0 / PI));

    let fs = if config.f_values.is_empty() { vec![0.125, 0.25, 0.375, 0.5] } else { config.f_values.clone() };
    for f in fs {
        let reflected = f.min(1.0 - f);
        match average_over_sectors(reflected) {
            Ok(avg) => {
                let expected = -universal_correction(reflected)?;
                out.push(ResultRow::new("sector_average_correction", avg.correction).with_f(f));
                out.push(ResultRow::new("universal_correction", expected).with_f(f));
                if (avg.correction - expected).abs() > 1e-6 {
                    out.violations += 1;
                }
            }
            Err(Error::Quadrature { estimate, .. }) => {
                out.quadrature_failures += 1;
                out.push(
                    ResultRow::new("quadrature_failure", estimate).with_f(f).with_label("sector_average"),
                );
            }
            Err(e) => return Err(e),
        }
    }
    for (x, label) in [(0.5, "x=0.5"), (1.0, "x=1"), (3.0, "x=3")] {
        out.push(ResultRow::new("erfc", erfc(x)).with_label(label));
    }
    Ok(out)
}
