use serde::Serialize;

use super::ensemble::TrialRecord;
use crate::error::{invalid, Result};
use crate::tracy_widom::{TwOrder, TwTable};

/// Minimum sample size accepted by the KS helpers on records.
pub const MIN_KS_RECORDS: usize = 100;

/// Number of points kept in the ECDF snapshot.
const SNAPSHOT_POINTS: usize = 41;

/// Kolmogorov-Smirnov distance with an ECDF snapshot.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KsReport {
    pub ks_stat: f64,
    /// Sample size (the smaller one for two samples).
    pub n: usize,
    pub threshold: f64,
    pub pass: bool,
    /// `(x, empirical CDF, reference CDF)` at evenly spaced order statistics.
    pub ecdf: Vec<(f64, f64, f64)>,
}

/// `sup_x |F_n(x) - F(x)|` for a continuous reference `cdf`.
pub fn ks_one_sample(sample: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter().enumerate().fold(0.0f64, |d, (i, &x)| {
        let f = cdf(x);
        d.max(f - i as f64 / n).max((i + 1) as f64 / n - f)
    })
}

fn snapshot(sample: &[f64], reference: impl Fn(f64) -> f64) -> Vec<(f64, f64, f64)> {
    let mut xs = sample.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let points = SNAPSHOT_POINTS.min(n);
    (0..points)
        .map(|p| {
            let i = if points == 1 { n - 1 } else { p * (n - 1) / (points - 1) };
            let x = xs[i];
            let upto = xs.partition_point(|&v| v <= x);
            (x, upto as f64 / n as f64, reference(x))
        })
        .collect()
}

fn rescaled_top(records: &[TrialRecord]) -> Result<Vec<f64>> {
    if records.len() < MIN_KS_RECORDS {
        return Err(invalid(format!("KS needs at least {MIN_KS_RECORDS} records, got {}", records.len())));
    }
    Ok(records.iter().map(|r| r.rescaled[0]).collect())
}

/// KS distance between rescaled `λ1` and the Tracy-Widom law of `order`.
pub fn ks_against_tw(records: &[TrialRecord], order: TwOrder, threshold: f64) -> Result<KsReport> {
    let xs = rescaled_top(records)?;
    let table = TwTable::shared();
    let cdf = |s: f64| table.cdf(s, order);
    let ks_stat = ks_one_sample(&xs, cdf);
    Ok(KsReport { ks_stat, n: xs.len(), threshold, pass: ks_stat < threshold, ecdf: snapshot(&xs, cdf) })
}

/// Two-sample KS distance between the rescaled `λ1` of two ensembles. The
/// snapshot lists the ECDF of `a` against the ECDF of `b`.
pub fn two_sample_ks(a: &[TrialRecord], b: &[TrialRecord], threshold: f64) -> Result<KsReport> {
    let xa = rescaled_top(a)?;
    let xb = rescaled_top(b)?;
    let ks_stat = ks_two_sample(&xa, &xb);
    let mut sb = xb.clone();
    sb.sort_by(f64::total_cmp);
    let ecdf_b = |x: f64| sb.partition_point(|&v| v <= x) as f64 / sb.len() as f64;
    Ok(KsReport {
        ks_stat,
        n: xa.len().min(xb.len()),
        threshold,
        pass: ks_stat < threshold,
        ecdf: snapshot(&xa, ecdf_b),
    })
}

/// `sup_x |F_a(x) - F_b(x)|`, exact with ties.
pub fn ks_two_sample(a: &[f64], b: &[f64]) -> f64 {
    let mut xa = a.to_vec();
    let mut xb = b.to_vec();
    xa.sort_by(f64::total_cmp);
    xb.sort_by(f64::total_cmp);
    let (na, nb) = (xa.len() as f64, xb.len() as f64);
    let (mut i, mut j, mut d) = (0usize, 0usize, 0.0f64);
    while i < xa.len() && j < xb.len() {
        let x = xa[i].min(xb[j]);
        while i < xa.len() && xa[i] <= x {
            i += 1;
        }
        while j < xb.len() && xb[j] <= x {
            j += 1;
        }
        d = d.max((i as f64 / na - j as f64 / nb).abs());
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracy_widom::{tw_quantile, QuadratureGrid};

    fn records(xs: &[f64]) -> Vec<TrialRecord> {
        xs.iter()
            .enumerate()
            .map(|(t, &x)| TrialRecord {
                trial_index: t as u64,
                lambda_top: vec![x],
                rescaled: vec![x],
                triggered_gamma_event: false,
            })
            .collect()
    }

    #[test]
    fn inverse_transform_sample_is_close() {
        let n = 200;
        let grid = QuadratureGrid::default();
        let xs: Vec<f64> = (0..n)
            .map(|i| tw_quantile((i as f64 + 0.5) / n as f64, TwOrder::One, &grid).unwrap())
            .collect();
        let r = ks_against_tw(&records(&xs), TwOrder::One, 0.05).unwrap();
        assert!(r.ks_stat <= 1.0 / n as f64 + 1e-6, "{}", r.ks_stat);
        assert!(r.pass);
        assert_eq!(r.ecdf.len(), 41);
    }

    #[test]
    fn point_masses_are_far() {
        let xs: Vec<f64> = (0..200).map(|i| if i % 2 == 0 { -6.0 } else { 3.0 }).collect();
        let r = ks_against_tw(&records(&xs), TwOrder::One, 0.05).unwrap();
        assert!(r.ks_stat > 0.4 && !r.pass);
        assert!((0.0..=1.0).contains(&r.ks_stat));
    }

    #[test]
    fn two_sample_cases() {
        let a: Vec<f64> = (0..150).map(|i| (i as f64 * 0.37).sin()).collect();
        let ra = records(&a);
        assert_eq!(two_sample_ks(&ra, &ra, 0.06).unwrap().ks_stat, 0.0);
        let shifted: Vec<f64> = a.iter().map(|x| x + 10.0).collect();
        assert_eq!(two_sample_ks(&ra, &records(&shifted), 0.06).unwrap().ks_stat, 1.0);
        assert_eq!(ks_two_sample(&[1.0, 2.0, 2.0, 3.0], &[2.0, 2.0, 2.0, 2.0]), 0.25);
        assert!(two_sample_ks(&ra[..50], &ra, 0.06).is_err());
    }
}
