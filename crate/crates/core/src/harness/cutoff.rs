use serde::Serialize;

use super::config::ExperimentConfig;
use super::map_trials;
use crate::error::{invalid, Error, Result};
use crate::matrix_lab::{eigens, sample_entries_stream, CovarianceModel, EigenMethod, Mat, SampleMatrix};

/// Realized split `X = X_small + X_large - c/sqrt(N)` at the threshold
/// `T = N^{1/2-ε}`: an entry is large iff `|q_ij| > T`, and both parts carry
/// `(q_ij + c)/sqrt(N)` on their own positions, with `c = β/(1-α)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CutoffSplit {
    pub x_small: Mat,
    pub x_large: Mat,
    /// Row-major mask of large positions.
    pub mask: Vec<bool>,
    /// `c / sqrt(N)`.
    pub shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffReport {
    pub epsilon: f64,
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "M")]
    pub m: usize,
    /// `T = N^{1/2-ε}`.
    pub threshold: f64,
    /// `α_N = P(|q| > T)`.
    pub alpha_n: f64,
    /// `β_N = E[q 1(|q| > T)]`.
    pub beta_n: f64,
    /// `β_N / (1 - α_N)`.
    pub recentring: f64,
    pub large_count: usize,
    /// `M N α_N`.
    pub expected_large: f64,
    /// `sqrt(M N α_N (1 - α_N))`.
    pub large_sd: f64,
    /// `α_N N^{2-4ε}`, small when the tail condition holds.
    pub alpha_rate: f64,
    /// `|β_N| N^{3/2-3ε}`, small when the tail condition holds.
    pub beta_rate: f64,
    pub rates_ok: bool,
    /// `max |X - (X_small + X_large - c/sqrt(N))| / max |X|`.
    pub reconstruction_error: f64,
    pub lambda1_original: Option<f64>,
    pub lambda1_small_part: Option<f64>,
    pub gap: Option<f64>,
    /// `N^{-2/3}`.
    pub gap_bound: f64,
    pub gap_ok: Option<bool>,
}

/// Splits `x` into small and large parts and reports the cutoff moments.
pub fn cutoff_decompose(x: &SampleMatrix, epsilon: f64) -> Result<(CutoffSplit, CutoffReport)> {
    if !(epsilon > 0.0 && epsilon < 0.5) {
        return Err(invalid(format!("cutoff exponent epsilon = {epsilon} must lie in (0, 1/2)")));
    }
    let (m, n) = (x.m(), x.n());
    let nf = n as f64;
    let threshold = nf.powf(0.5 - epsilon);
    let (alpha, beta) = x.dist.alpha_beta(threshold)?;
    if !(alpha < 1.0) {
        return Err(invalid(format!("every entry exceeds the cutoff T = {threshold}")));
    }
    let c = beta / (1.0 - alpha);
    let root = nf.sqrt();
    let shift = c / root;

    let mut x_small = Mat::zeros(m, n);
    let mut x_large = Mat::zeros(m, n);
    let mut mask = vec![false; m * n];
    let mut large_count = 0;
    for i in 0..m {
        for j in 0..n {
            let q = x.q(i, j);
            let v = (q + c) / root;
            if q.abs() > threshold {
                x_large[(i, j)] = v;
                mask[i * n + j] = true;
                large_count += 1;
            } else {
                x_small[(i, j)] = v;
            }
        }
    }
    let xm = x.x();
    let mut worst = 0.0f64;
    for i in 0..m {
        for j in 0..n {
            let back = x_small[(i, j)] + x_large[(i, j)] - shift;
            worst = worst.max((back - xm[(i, j)]).abs());
        }
    }
    let reconstruction_error = if worst == 0.0 { 0.0 } else { worst / xm.max_abs() };

    let cells = (m * n) as f64;
    let alpha_rate = alpha * nf.powf(2.0 - 4.0 * epsilon);
    let beta_rate = beta.abs() * nf.powf(1.5 - 3.0 * epsilon);
    let report = CutoffReport {
        epsilon,
        n,
        m,
        threshold,
        alpha_n: alpha,
        beta_n: beta,
        recentring: c,
        large_count,
        expected_large: cells * alpha,
        large_sd: (cells * alpha * (1.0 - alpha)).sqrt(),
        alpha_rate,
        beta_rate,
        rates_ok: alpha_rate <= 1.0 && beta_rate <= 1.0,
        reconstruction_error,
        lambda1_original: None,
        lambda1_small_part: None,
        gap: None,
        gap_bound: nf.powf(-2.0 / 3.0),
        gap_ok: None,
    };
    Ok((CutoffSplit { x_small, x_large, mask, shift }, report))
}

/// Cutoff report completed with `λ1` of `D X` and of `D X_small`.
pub fn cutoff_verify(x: &SampleMatrix, model: &CovarianceModel, epsilon: f64) -> Result<CutoffReport> {
    let (split, mut report) = cutoff_decompose(x, epsilon)?;
    let full = eigens(model, x, EigenMethod::TopK(1))?.eigenvalues[0];
    let small = SampleMatrix::from_entries(split.x_small, x.dist.clone());
    let part = eigens(model, &small, EigenMethod::TopK(1))?.eigenvalues[0];
    let gap = (full - part).abs();
    report.lambda1_original = Some(full);
    report.lambda1_small_part = Some(part);
    report.gap = Some(gap);
    report.gap_ok = Some(gap <= report.gap_bound);
    Ok(report)
}

/// Pooled cutoff statistics over an ensemble.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutoffEnsembleReport {
    pub trials: usize,
    pub epsilon: f64,
    pub alpha_n: f64,
    pub beta_n: f64,
    pub total_large: usize,
    /// `trials · M N α_N`.
    pub expected_large: f64,
    pub large_sd: f64,
    pub large_within_3sd: bool,
    /// Fraction of trials with `|λ1 - λ1(small)| ≤ N^{-2/3}`.
    pub gap_ok_fraction: f64,
    pub median_gap: f64,
    pub max_reconstruction_error: f64,
    pub reports: Vec<CutoffReport>,
}

pub fn cutoff_ensemble(cfg: &ExperimentConfig, epsilon: f64) -> Result<CutoffEnsembleReport> {
    cfg.validate()?;
    let model = cfg.model()?;
    let outcomes = map_trials(cfg.trials, |t| {
        let x = sample_entries_stream(&cfg.dist, cfg.m, cfg.n, cfg.master_seed, t as u64)?;
        cutoff_verify(&x, &model, epsilon)
    });
    let mut reports = Vec::with_capacity(cfg.trials);
    let mut failed = 0;
    let mut first = None;
    for out in outcomes {
        match out {
            Ok(r) => reports.push(r),
            Err(e) if e.is_numerical() && !matches!(e, Error::QuadratureFailure(_)) => {
                failed += 1;
                first.get_or_insert_with(|| e.to_string());
            }
            Err(e) => return Err(e),
        }
    }
    if failed * 1000 > cfg.trials {
        return Err(Error::TrialFailures { failed, total: cfg.trials, first: first.unwrap_or_default() });
    }
    let done = reports.len();
    let (alpha, beta) = (reports[0].alpha_n, reports[0].beta_n);
    let cells = (done * cfg.m * cfg.n) as f64;
    let expected = cells * alpha;
    let sd = (cells * alpha * (1.0 - alpha)).sqrt();
    let total_large: usize = reports.iter().map(|r| r.large_count).sum();
    let gap_ok = reports.iter().filter(|r| r.gap_ok == Some(true)).count();
    let mut gaps: Vec<f64> = reports.iter().filter_map(|r| r.gap).collect();
    Ok(CutoffEnsembleReport {
        trials: done,
        epsilon,
        alpha_n: alpha,
        beta_n: beta,
        total_large,
        expected_large: expected,
        large_sd: sd,
        large_within_3sd: (total_large as f64 - expected).abs() <= 3.0 * sd,
        gap_ok_fraction: gap_ok as f64 / done as f64,
        median_gap: super::rigidity::median(&mut gaps),
        max_reconstruction_error: reports.iter().map(|r| r.reconstruction_error).fold(0.0, f64::max),
        reports,
    })
}
