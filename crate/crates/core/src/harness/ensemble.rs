use serde::Serialize;

use super::config::ExperimentConfig;
use super::map_trials;
use crate::deformed_mp::EdgeReport;
use crate::error::{Error, Result};
use crate::matrix_lab::{eigens, largest_entry_event, sample_entries_stream, CovarianceModel, EigenMethod, SampleMatrix};

/// Outcome of one trial.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_index: u64,
    /// Top eigenvalues of `Q2`, descending.
    pub lambda_top: Vec<f64>,
    /// `γ_0 N^{2/3} (λ_i - λ_r)`.
    pub rescaled: Vec<f64>,
    /// Whether a single entry forced `λ1 ≥ s`.
    pub triggered_gamma_event: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct EnsembleRun {
    pub edge: EdgeReport,
    /// Witness level `s` used for `triggered_gamma_event`.
    pub witness_level: f64,
    pub records: Vec<TrialRecord>,
    /// Trials whose eigensolve failed (dropped from `records`).
    pub failed_trials: Vec<u64>,
}

impl EnsembleRun {
    /// Rescaled largest eigenvalues in trial order.
    pub fn rescaled_lambda1(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.rescaled[0]).collect()
    }
}

/// Runs `cfg.trials` independent trials of the top-`k` statistic.
///
/// Fails if the soft edge is irregular, or if more than 0.1% of the trials
/// fail their eigensolve.
pub fn run_edge_ensemble(cfg: &ExperimentConfig) -> Result<EnsembleRun> {
    cfg.validate()?;
    let model = cfg.model()?;
    let edge = model.deformed_mp().edge_report(cfg.tau)?;
    let s = cfg.witness_level.unwrap_or(2.0 * edge.lambda_r);
    let k = cfg.statistic.k();
    let outcomes = map_trials(cfg.trials, |t| run_trial(cfg, &model, &edge, s, k, t as u64));

    let mut records = Vec::with_capacity(cfg.trials);
    let mut failed = Vec::new();
    let mut first = None;
    for (t, out) in outcomes.into_iter().enumerate() {
        match out {
            Ok(r) => records.push(r),
            Err(e) if e.is_numerical() => {
                failed.push(t as u64);
                first.get_or_insert_with(|| e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if failed.len() * 1000 > cfg.trials {
        return Err(Error::TrialFailures { failed: failed.len(), total: cfg.trials, first: first.unwrap_or_default() });
    }
    Ok(EnsembleRun { edge, witness_level: s, records, failed_trials: failed })
}

fn run_trial(
    cfg: &ExperimentConfig,
    model: &CovarianceModel,
    edge: &EdgeReport,
    s: f64,
    k: usize,
    trial: u64,
) -> Result<TrialRecord> {
    let x = sample_entries_stream(&cfg.dist, cfg.m, cfg.n, cfg.master_seed, trial)?;
    trial_record(model, edge, &x, k, s, cfg.witness_tau, trial)
}

/// The record of a given sample: top-`k` eigenvalues, their rescaling and
/// the large-entry event at level `s`.
pub fn trial_record(
    model: &CovarianceModel,
    edge: &EdgeReport,
    x: &SampleMatrix,
    k: usize,
    s: f64,
    witness_tau: f64,
    trial_index: u64,
) -> Result<TrialRecord> {
    let spec = eigens(model, x, EigenMethod::TopK(k))?;
    let triggered = largest_entry_event(x, model, s, witness_tau)?.is_some();
    Ok(TrialRecord {
        trial_index,
        rescaled: spec.eigenvalues.iter().map(|&l| edge.rescale(l, model.n())).collect(),
        lambda_top: spec.eigenvalues,
        triggered_gamma_event: triggered,
    })
}
