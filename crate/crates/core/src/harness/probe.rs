use serde::Serialize;

use super::config::ExperimentConfig;
use super::map_trials;
use crate::error::{invalid, Error, Result};
use crate::matrix_lab::{derive_seed, eigens, largest_entry_event, sample_entries_stream, EigenMethod, SampleMatrix};

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Wilson score interval at 95% for `hits` successes out of `n`.
pub fn wilson_interval(hits: usize, n: usize) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0), (centre + half).min(1.0))
}

/// Estimate of `P(λ1 ≥ s)` at one size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbeRow {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub hits: usize,
    pub estimate: f64,
    pub wilson_lo: f64,
    pub wilson_hi: f64,
    /// Trials where a single entry forced `λ1 ≥ s`.
    pub witness_triggered: usize,
    pub witness_fraction: f64,
    /// Every triggered trial had `λ1 ≥ s`.
    pub witness_sound: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailProbeReport {
    pub s: f64,
    pub lambda_r: f64,
    pub tau: f64,
    pub rows: Vec<ProbeRow>,
    pub witness_sound: bool,
}

/// Monte Carlo estimates of `P(λ1 ≥ s)` along a ladder of `N`, keeping the
/// aspect ratio of `cfg`. `s = None` means `2 λ_r`.
///
/// Each rung uses `cfg.trials` trials with seed
/// `derive_seed(master_seed, "probe-N")`.
pub fn necessary_probe(cfg: &ExperimentConfig, s: Option<f64>, n_ladder: &[usize]) -> Result<TailProbeReport> {
    probe_with(cfg, s, n_ladder, |rung, seed, t| sample_entries_stream(&rung.dist, rung.m, rung.n, seed, t))
}

fn probe_with<F>(cfg: &ExperimentConfig, s: Option<f64>, n_ladder: &[usize], draw: F) -> Result<TailProbeReport>
where
    F: Fn(&ExperimentConfig, u64, u64) -> Result<SampleMatrix> + Sync + Send,
{
    cfg.validate()?;
    if n_ladder.is_empty() {
        return Err(invalid("probe needs at least one N"));
    }
    let lambda_r = cfg.model()?.deformed_mp().edge_report(cfg.tau)?.lambda_r;
    let s = s.unwrap_or(2.0 * lambda_r);
    if !(s > lambda_r) {
        return Err(invalid(format!("probe level s = {s} must exceed lambda_r = {lambda_r}")));
    }
    let tau = cfg.witness_tau;
    let mut rows = Vec::with_capacity(n_ladder.len());
    for &n in n_ladder {
        let rung = cfg.resized(n);
        rung.validate()?;
        let model = rung.model()?;
        let seed = derive_seed(cfg.master_seed, &format!("probe-{n}"));
        let outcomes = map_trials(rung.trials, |t| -> Result<(bool, bool)> {
            let x = draw(&rung, seed, t as u64)?;
            let lambda1 = eigens(&model, &x, EigenMethod::TopK(1))?.eigenvalues[0];
            let witness = largest_entry_event(&x, &model, s, tau)?;
            Ok((lambda1 >= s, witness.is_some()))
        });
        let mut hits = 0;
        let mut triggered = 0;
        let mut sound = true;
        let mut failed = 0;
        let mut first = None;
        for out in outcomes {
            match out {
                Ok((hit, trig)) => {
                    hits += usize::from(hit);
                    triggered += usize::from(trig);
                    sound &= !trig || hit;
                }
                Err(e) if e.is_numerical() => {
                    failed += 1;
                    first.get_or_insert_with(|| e.to_string());
                }
                Err(e) => return Err(e),
            }
        }
        if failed * 1000 > rung.trials {
            return Err(Error::TrialFailures { failed, total: rung.trials, first: first.unwrap_or_default() });
        }
        let done = rung.trials - failed;
        let (lo, hi) = wilson_interval(hits, done);
        rows.push(ProbeRow {
            n: rung.n,
            m: rung.m,
            trials: done,
            hits,
            estimate: hits as f64 / done.max(1) as f64,
            wilson_lo: lo,
            wilson_hi: hi,
            witness_triggered: triggered,
            witness_fraction: triggered as f64 / done.max(1) as f64,
            witness_sound: sound,
        });
    }
    let witness_sound = rows.iter().all(|r| r.witness_sound);
    Ok(TailProbeReport { s, lambda_r, tau, rows, witness_sound })
}
