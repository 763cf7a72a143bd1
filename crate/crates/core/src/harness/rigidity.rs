use serde::Serialize;

use super::config::ExperimentConfig;
use super::map_trials;
use crate::deformed_mp::TailMass;
use crate::error::{invalid, Error, Result};
use crate::matrix_lab::sample::MAX_TOPK;
use crate::matrix_lab::{eigens, sample_entries_stream, EigenMethod};

/// Distances of the top eigenvalues from their classical locations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RigidityReport {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    pub trials: usize,
    pub c1: f64,
    pub lambda_r: f64,
    /// Classical locations `γ_j ≥ λ_r - c1`, `j = 1, 2, ..`.
    pub gammas: Vec<f64>,
    /// Median over trials of `j^{1/3} N^{2/3} |λ_j - γ_j|`, per `j`.
    pub median_per_j: Vec<f64>,
    /// Median over all `(trial, j)` of the normalized gap.
    pub median: f64,
    /// Maximum over all `(trial, j)` of the normalized gap.
    pub max: f64,
    /// Median over trials of `|λ_1 - γ_1|`.
    pub median_top_gap: f64,
}

pub(crate) fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return f64::NAN;
    }
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

/// Rigidity over the edge window `{j : γ_j ≥ λ_r - c1}`. Windows of at
/// most 32 eigenvalues use Lanczos, larger ones the full SVD.
pub fn rigidity_check(cfg: &ExperimentConfig, c1: f64) -> Result<RigidityReport> {
    cfg.validate()?;
    if !(c1 > 0.0) {
        return Err(invalid("rigidity window c1 must be positive"));
    }
    let model = cfg.model()?;
    let dmp = model.deformed_mp();
    let edge = dmp.edge_report(cfg.tau)?;
    let (n, r) = (cfg.n, cfg.m.min(cfg.n));
    let tail = TailMass::new(&dmp, &edge, 1e-6)?;
    let above = tail.mass_above(edge.lambda_r - c1)?;
    let window = ((above * n as f64).floor() as usize + 1).min(r);
    let gammas: Vec<f64> = dmp
        .classical_locations(&edge, n, 1..=window)?
        .into_iter()
        .filter(|&g| g >= edge.lambda_r - c1)
        .collect();
    let window = gammas.len().max(1);
    let method = if window <= MAX_TOPK { EigenMethod::TopK(window) } else { EigenMethod::Full };
    let scale = (n as f64).powf(2.0 / 3.0);

    let outcomes = map_trials(cfg.trials, |t| -> Result<Vec<f64>> {
        let x = sample_entries_stream(&cfg.dist, cfg.m, cfg.n, cfg.master_seed, t as u64)?;
        let ev = eigens(&model, &x, method)?.eigenvalues;
        Ok(gammas.iter().zip(&ev).map(|(g, l)| (l - g).abs()).collect())
    });
    let mut gaps = Vec::with_capacity(cfg.trials);
    let mut failed = 0;
    let mut first = None;
    for out in outcomes {
        match out {
            Ok(g) => gaps.push(g),
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

    let normalized = |j: usize, gap: f64| ((j + 1) as f64).cbrt() * scale * gap;
    let median_per_j = (0..gammas.len())
        .map(|j| median(&mut gaps.iter().map(|g| normalized(j, g[j])).collect::<Vec<_>>()))
        .collect();
    let mut all: Vec<f64> =
        gaps.iter().flat_map(|g| g.iter().enumerate().map(|(j, &v)| normalized(j, v))).collect();
    let max = all.iter().copied().fold(0.0f64, f64::max);
    Ok(RigidityReport {
        n,
        m: cfg.m,
        trials: gaps.len(),
        c1,
        lambda_r: edge.lambda_r,
        median: median(&mut all),
        max,
        median_top_gap: median(&mut gaps.iter().map(|g| g[0]).collect::<Vec<_>>()),
        median_per_j,
        gammas,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix_lab::EntryDistribution;

    #[test]
    fn median_cases() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
        assert!(median(&mut []).is_nan());
    }

    #[test]
    fn window_starts_at_the_edge() {
        let cfg = ExperimentConfig::new(150, 150, EntryDistribution::gaussian(), 10, 4);
        let r = rigidity_check(&cfg, 0.5).unwrap();
        assert_eq!(r.gammas[0], r.lambda_r);
        assert!(r.gammas.iter().all(|&g| g >= r.lambda_r - 0.5));
        assert!(r.gammas.windows(2).all(|w| w[0] >= w[1]));
        assert_eq!(r.median_per_j.len(), r.gammas.len());
        assert!(r.median.is_finite() && r.median <= r.max);
        assert!(r.median < 10.0, "{}", r.median);
    }
}
