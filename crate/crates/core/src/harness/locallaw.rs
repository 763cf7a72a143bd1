use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use super::map_trials;
use super::rigidity::median;
use crate::deformed_mp::{PopulationSpectrum, SolverConfig, SpectralDomain};
use crate::error::{invalid, Error, Result};
use crate::matrix_lab::{derive_seed, sample_entries_stream, trial_rng, Resolvent};

/// Knobs of the local-law scan. The allowances stand in for the
/// unspecified polylogarithmic factors of the high-probability bounds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LocalLawConfig {
    pub domain: SpectralDomain,
    /// Random index pairs per trial and grid point.
    pub pairs: usize,
    /// Allowance for `N η |m2 - m2c|`.
    pub average_allowance: f64,
    /// Allowance for `|G - Π|_ab / Ψ`.
    pub entry_allowance: f64,
}

impl LocalLawConfig {
    pub fn new(domain: SpectralDomain) -> Self {
        LocalLawConfig { domain, pairs: 200, average_allowance: 50.0, entry_allowance: 10.0 }
    }
}

/// Aggregates over trials at one spectral parameter.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalLawPoint {
    pub e: f64,
    pub eta: f64,
    /// `Ψ = sqrt(Im m2c / (N η)) + 1/(N η)`.
    pub psi: f64,
    /// Median over trials of `N η |m2 - m2c|`.
    pub median_average_error: f64,
    /// Fraction of trials with `N η |m2 - m2c| ≤ average_allowance`.
    pub average_within: f64,
    /// Median over trials of `max_ab |G - Π|_ab / Ψ` on the sampled pairs.
    pub median_entry_ratio: f64,
    /// Fraction of all sampled pairs with `|G - Π|_ab ≤ entry_allowance Ψ`.
    pub entry_within: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalLawReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    /// Smallest admissible `η`, `ln N / N`.
    pub eta_floor: f64,
    pub config: LocalLawConfig,
    pub points: Vec<LocalLawPoint>,
}

/// Diagonal of the deterministic limit `Π`: `-1/(1 + m2c σ_i)` on the `M`
/// population indices, then `m2c` on the `N` sample indices.
pub fn pi_diagonal(pop: &PopulationSpectrum, n: usize, m2c: Complex64) -> Vec<Complex64> {
    pop.sigmas()
        .iter()
        .map(|&s| -1.0 / (1.0 + m2c * s))
        .chain(std::iter::repeat_n(m2c, n))
        .collect()
}

struct TrialPoint {
    average_error: f64,
    entry_ratio_max: f64,
    entries_within: usize,
}

/// Compares `G(z)` of sampled matrices with its deterministic limit over
/// the domain. Every `η` must be at least `ln N / N`.
pub fn locallaw_scan(cfg: &ExperimentConfig, ll: &LocalLawConfig) -> Result<LocalLawReport> {
    cfg.validate()?;
    let (m, n) = (cfg.m, cfg.n);
    let eta_floor = (n as f64).ln() / n as f64;
    if ll.domain.eta_lo < eta_floor {
        return Err(invalid(format!("eta_lo = {} is below the floor ln N / N = {eta_floor}", ll.domain.eta_lo)));
    }
    if ll.pairs == 0 {
        return Err(invalid("local-law scan needs at least one index pair"));
    }
    let model = cfg.model()?;
    let dmp = model.deformed_mp();
    let solver = SolverConfig::default();
    let grid = ll.domain.points();
    let limits = grid
        .iter()
        .map(|&(e, eta)| {
            let z = Complex64::new(e, eta);
            let m2c = dmp.solve_m2c(z, &solver)?.m2c;
            let neta = n as f64 * eta;
            let psi = (m2c.im.max(0.0) / neta).sqrt() + 1.0 / neta;
            Ok((z, m2c, psi, pi_diagonal(&model.pop, n, m2c)))
        })
        .collect::<Result<Vec<_>>>()?;
    let pair_seed = derive_seed(cfg.master_seed, "locallaw-pairs");
    let dim = m + n;

    let outcomes = map_trials(cfg.trials, |t| -> Result<Vec<TrialPoint>> {
        let x = sample_entries_stream(&cfg.dist, m, n, cfg.master_seed, t as u64)?;
        let res = Resolvent::new(&model, &x)?;
        let mut rng = trial_rng(pair_seed, t as u64);
        let pairs: Vec<(usize, usize)> =
            (0..ll.pairs).map(|_| (rng.random_range(0..dim), rng.random_range(0..dim))).collect();
        Ok(limits
            .iter()
            .map(|(z, m2c, psi, pi)| {
                let average_error = n as f64 * z.im * (res.m2(*z) - m2c).norm();
                let ratios: Vec<f64> = pairs
                    .iter()
                    .map(|&(a, b)| {
                        let limit = if a == b { pi[a] } else { Complex64::new(0.0, 0.0) };
                        (res.entry(*z, a, b) - limit).norm() / psi
                    })
                    .collect();
                TrialPoint {
                    average_error,
                    entry_ratio_max: ratios.iter().copied().fold(0.0, f64::max),
                    entries_within: ratios.iter().filter(|&&r| r <= ll.entry_allowance).count(),
                }
            })
            .collect())
    });
    let mut trials = Vec::with_capacity(cfg.trials);
    let mut failed = 0;
    let mut first = None;
    for out in outcomes {
        match out {
            Ok(v) => trials.push(v),
            Err(e) if e.is_numerical() => {
                failed += 1;
                first.get_or_insert_with(|| e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if failed * 1000 > cfg.trials {
        return Err(Error::TrialFailures { failed, total: cfg.trials, first: first.unwrap_or_default() });
    }

    let done = trials.len().max(1) as f64;
    let points = limits
        .iter()
        .enumerate()
        .map(|(k, (z, _, psi, _))| {
            let mut avg: Vec<f64> = trials.iter().map(|t| t[k].average_error).collect();
            let average_within = avg.iter().filter(|&&v| v <= ll.average_allowance).count() as f64 / done;
            let mut ratio: Vec<f64> = trials.iter().map(|t| t[k].entry_ratio_max).collect();
            let within: usize = trials.iter().map(|t| t[k].entries_within).sum();
            LocalLawPoint {
                e: z.re,
                eta: z.im,
                psi: *psi,
                median_average_error: median(&mut avg),
                average_within,
                median_entry_ratio: median(&mut ratio),
                entry_within: within as f64 / (done * ll.pairs as f64),
            }
        })
        .collect();
    Ok(LocalLawReport { n, m, trials: trials.len(), eta_floor, config: *ll, points })
}
