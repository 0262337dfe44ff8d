//! Experiment configuration, read from TOML. Unknown keys are rejected.
//!
//! ```toml
//! experiment = "figure1"
//! seed = 7
//! threads = 1
//! output_dir = "results"
//! n_values = [8, 10, 12]
//! f_values = [0.25, 0.5]        # or m_values = [2, 4]; empty = experiment default
//! samples_per_sector = 100
//!
//! [[models]]
//! g = 1.05
//! h = 0.5
//!
//! [disorder]
//! n = 10
//! m = 5
//! w = 0.2
//! seeds = [1, 2, 3, 4, 5]
//! min_deficit = 0.01
//!
//! [page]
//! trials = 2000
//! grid = [[2, 2], [4, 32]]
//! concentration_d_a = 4
//! concentration_d_b = [16, 64, 256]
//!
//! [caps]
//! dense = 12
//! sector = 14
//! model_m = 16
//! ```

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Experiment {
    Figure1,
    Bounds,
    Modelm,
    Page,
    Quadcheck,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::Figure1,
        Experiment::Bounds,
        Experiment::Modelm,
        Experiment::Page,
        Experiment::Quadcheck,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::Figure1 => "figure1",
            Experiment::Bounds => "bounds",
            Experiment::Modelm => "modelm",
            Experiment::Page => "page",
            Experiment::Quadcheck => "quadcheck",
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Transverse and longitudinal fields of the chaotic Ising chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IsingParams {
    pub g: f64,
    pub h: f64,
}

pub const DEFAULT_MODELS: [IsingParams; 2] =
    [IsingParams { g: 1.05, h: 0.5 }, IsingParams { g: 0.905, h: 0.809 }];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DisorderParams {
    pub n: usize,
    pub m: usize,
    /// Half-width of the box distribution of longitudinal fields.
    pub w: f64,
    pub seeds: Vec<u64>,
    /// Required gap between `m ln 2` and the cut-averaged entropy.
    pub min_deficit: f64,
}

impl Default for DisorderParams {
    fn default() -> Self {
        Self { n: 10, m: 5, w: 0.2, seeds: vec![1, 2, 3, 4, 5], min_deficit: 0.01 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PageParams {
    pub trials: usize,
    pub grid: Vec<(usize, usize)>,
    pub concentration_d_a: usize,
    pub concentration_d_b: Vec<usize>,
}

impl Default for PageParams {
    fn default() -> Self {
        Self {
            trials: 2000,
            grid: vec![(2, 2), (2, 8), (4, 4), (4, 32), (8, 8)],
            concentration_d_a: 4,
            concentration_d_b: vec![16, 64, 256],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Caps {
    pub dense: usize,
    pub sector: usize,
    pub model_m: usize,
}

impl Default for Caps {
    fn default() -> Self {
        Self { dense: 12, sector: 14, model_m: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    /// TOML integers are signed, so seeds above `i64::MAX` cannot be written.
    pub seed: u64,
    /// Worker threads; 0 uses the rayon default.
    pub threads: usize,
    pub output_dir: PathBuf,
    /// Empty selects the experiment's default list.
    pub n_values: Vec<usize>,
    pub m_values: Vec<usize>,
    pub f_values: Vec<f64>,
    pub samples_per_sector: usize,
    pub models: Vec<IsingParams>,
    pub disorder: DisorderParams,
    pub page: PageParams,
    pub caps: Caps,
    /// Ratio allowed between the largest and smallest `n (m ln 2 − S̄)` at `m = 2`.
    pub tightness_band: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            experiment: Experiment::Figure1,
            seed: 1,
            threads: 0,
            output_dir: PathBuf::from("results"),
            n_values: Vec::new(),
            m_values: Vec::new(),
            f_values: Vec::new(),
            samples_per_sector: 100,
            models: DEFAULT_MODELS.to_vec(),
            disorder: DisorderParams::default(),
            page: PageParams::default(),
            caps: Caps::default(),
            tightness_band: 3.0,
        }
    }
}

impl ExperimentConfig {
    pub fn for_experiment(experiment: Experiment) -> Self {
        Self { experiment, ..Self::default() }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text =
            std::fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// `n_values`, or the experiment's default list when empty.
    pub fn resolved_n_values(&self) -> Vec<usize> {
        if !self.n_values.is_empty() {
            return self.n_values.clone();
        }
        match self.experiment {
            Experiment::Figure1 | Experiment::Bounds => vec![8, 10, 12],
            Experiment::Modelm => vec![14],
            Experiment::Page | Experiment::Quadcheck => Vec::new(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_documented_example() {
        let text = r#"
            experiment = "figure1"
            seed = 7
            threads = 1
            output_dir = "results"
            n_values = [8, 10, 12]
            f_values = [0.25, 0.5]
            samples_per_sector = 100

            [[models]]
            g = 1.05
            h = 0.5

            [disorder]
            n = 10
            m = 5
            w = 0.2
            seeds = [1, 2, 3, 4, 5]
            min_deficit = 0.01

            [page]
            trials = 2000
            grid = [[2, 2], [4, 32]]
            concentration_d_a = 4
            concentration_d_b = [16, 64, 256]

            [caps]
            dense = 12
            sector = 14
            model_m = 16
        "#;
        let c = ExperimentConfig::from_toml_str(text).unwrap();
        assert_eq!(c.seed, 7);
        assert_eq!(c.models, vec![IsingParams { g: 1.05, h: 0.5 }]);
        assert_eq!(c.page.grid, vec![(2, 2), (4, 32)]);
        assert_eq!(c.tightness_band, 3.0);
    }

    #[test]
    fn rejects_unknown_keys() {
        assert!(ExperimentConfig::from_toml_str("experimnt = \"page\"").is_err());
        assert!(ExperimentConfig::from_toml_str("[caps]\nhuge = 3").is_err());
        assert!(ExperimentConfig::from_toml_str("experiment = \"nope\"").is_err());
    }

    #[test]
    fn defaults() {
        let c = ExperimentConfig::from_toml_str("experiment = \"modelm\"").unwrap();
        assert_eq!(c.resolved_n_values(), vec![14]);
        assert_eq!(c.models.len(), 2);
        assert_eq!("bounds".parse::<Experiment>().unwrap(), Experiment::Bounds);
    }

    fn arb_config() -> impl Strategy<Value = ExperimentConfig> {
        (
            0usize..5,
            0..=i64::MAX as u64,
            0usize..8,
            proptest::collection::vec(2usize..20, 0..4),
            proptest::collection::vec(0.01f64..0.99, 0..3),
            proptest::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..3),
            0.0f64..1.0,
            proptest::collection::vec(0..=i64::MAX as u64, 0..4),
        )
            .prop_map(|(e, seed, threads, ns, fs, models, w, seeds)| ExperimentConfig {
                experiment: Experiment::ALL[e],
                seed,
                threads,
                n_values: ns,
                f_values: fs,
                models: models.into_iter().map(|(g, h)| IsingParams { g, h }).collect(),
                disorder: DisorderParams { w, seeds, ..DisorderParams::default() },
                ..ExperimentConfig::default()
            })
    }

    proptest! {
        #[test]
        fn toml_round_trip(config in arb_config()) {
            let text = config.to_toml_string().unwrap();
            let back = ExperimentConfig::from_toml_str(&text).unwrap();
            prop_assert_eq!(back, config);
        }
    }
}
