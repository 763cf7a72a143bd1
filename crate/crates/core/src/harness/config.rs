use serde::{Deserialize, Serialize};

use crate::deformed_mp::{io::population_from_json, Atom, PopulationSpectrum};
use crate::error::{invalid, Result};
use crate::matrix_lab::{CovarianceModel, EntryDistribution};

/// Population of an experiment, resolved against a row count `M`.
///
/// In JSON: `"null"`, `"two:σa,σb,w"`, `{"sigmas": [..]}` (fixed `M`) or
/// `{"atoms": [{"sigma": s, "weight": w}, ..]}` (any `M`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PopulationConfig {
    Shorthand(String),
    Sigmas { sigmas: Vec<f64> },
    Atoms { atoms: Vec<Atom> },
}

impl Default for PopulationConfig {
    fn default() -> Self {
        PopulationConfig::Shorthand("null".into())
    }
}

impl PopulationConfig {
    pub fn build(&self, m: usize) -> Result<PopulationSpectrum> {
        match self {
            PopulationConfig::Shorthand(s) => parse_population(s, m),
            PopulationConfig::Sigmas { sigmas } => {
                if sigmas.len() != m {
                    return Err(invalid(format!("population lists {} sigmas but M = {m}", sigmas.len())));
                }
                PopulationSpectrum::new(sigmas.clone())
            }
            PopulationConfig::Atoms { atoms } => PopulationSpectrum::from_atoms(atoms, m),
        }
    }
}

/// Parses `null`, `two:σa,σb,w` or inline population JSON.
pub fn parse_population(spec: &str, m: usize) -> Result<PopulationSpectrum> {
    let spec = spec.trim();
    if spec == "null" {
        return PopulationSpectrum::null(m);
    }
    if let Some(rest) = spec.strip_prefix("two:") {
        let parts: Vec<f64> = rest
            .split(',')
            .map(|p| p.trim().parse::<f64>().map_err(|e| invalid(format!("two-atom population {spec:?}: {e}"))))
            .collect::<Result<_>>()?;
        let [a, b, w] = parts[..] else {
            return Err(invalid(format!("two-atom population needs two:σa,σb,w, got {spec:?}")));
        };
        return PopulationSpectrum::two_atom(a, b, w, m);
    }
    if spec.starts_with('{') {
        let pop = population_from_json(spec)?;
        if pop.len() != m {
            return Err(invalid(format!("population has {} entries but M = {m}", pop.len())));
        }
        return Ok(pop);
    }
    Err(invalid(format!("unknown population {spec:?}; expected null, two:σa,σb,w or JSON")))
}

/// Edge statistic recorded per trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Statistic {
    #[default]
    Lambda1,
    Topk(usize),
}

impl Statistic {
    pub fn k(self) -> usize {
        match self {
            Statistic::Lambda1 => 1,
            Statistic::Topk(k) => k,
        }
    }
}

/// Reference law for the rescaled largest eigenvalue.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    #[default]
    TwF1,
    TwoSample(EntryDistribution),
}

/// One Monte Carlo experiment.
///
/// ```json
/// {"population": "null", "M": 200, "N": 200, "dist": "gaussian",
///  "trials": 2000, "master_seed": 1, "statistic": "lambda1",
///  "comparison": "tw_f1"}
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub population: PopulationConfig,
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub dist: EntryDistribution,
    pub trials: usize,
    pub master_seed: u64,
    #[serde(default)]
    pub statistic: Statistic,
    #[serde(default)]
    pub comparison: Comparison,
    /// Regularity threshold for the soft edge.
    #[serde(default = "default_tau")]
    pub tau: f64,
    /// Level `s` of the large-entry event; `None` means `2 λ_r`.
    #[serde(default)]
    pub witness_level: Option<f64>,
    /// `τ` of the large-entry event (`L = ⌊τ M⌋`, `I = sqrt(s/τ)`).
    #[serde(default = "default_witness_tau")]
    pub witness_tau: f64,
    /// KS acceptance threshold.
    #[serde(default = "default_ks_threshold")]
    pub ks_threshold: f64,
}

fn default_tau() -> f64 {
    0.01
}

fn default_witness_tau() -> f64 {
    0.99
}

fn default_ks_threshold() -> f64 {
    0.05
}

/// Largest `k` for the top-k statistic.
pub const MAX_STATISTIC_K: usize = 8;

impl ExperimentConfig {
    pub fn new(m: usize, n: usize, dist: EntryDistribution, trials: usize, master_seed: u64) -> Self {
        ExperimentConfig {
            population: PopulationConfig::default(),
            m,
            n,
            dist,
            trials,
            master_seed,
            statistic: Statistic::default(),
            comparison: Comparison::default(),
            tau: default_tau(),
            witness_level: None,
            witness_tau: default_witness_tau(),
            ks_threshold: default_ks_threshold(),
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            serde_json::from_str(text).map_err(|e| invalid(format!("experiment config: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m == 0 || self.n == 0 {
            return Err(invalid("M and N must be at least 1"));
        }
        if self.trials == 0 {
            return Err(invalid("trials must be at least 1"));
        }
        let k = self.statistic.k();
        if k == 0 || k > MAX_STATISTIC_K {
            return Err(invalid(format!("top-k statistic needs 1 <= k <= {MAX_STATISTIC_K}, got {k}")));
        }
        if k > self.m.min(self.n) {
            return Err(invalid(format!("top-k statistic k = {k} exceeds min(M, N)")));
        }
        self.dist.ready()
    }

    pub fn model(&self) -> Result<CovarianceModel> {
        CovarianceModel::new(self.population.build(self.m)?, self.n)
    }

    /// The same experiment at another size, keeping `N / M`.
    pub fn resized(&self, n: usize) -> Self {
        let m = ((n as f64) * self.m as f64 / self.n as f64).round().max(1.0) as usize;
        ExperimentConfig { m, n, ..self.clone() }
    }
}
