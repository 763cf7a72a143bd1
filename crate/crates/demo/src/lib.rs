//! WebAssembly bindings behind `www/index.html`.
//!
//! Each export returns a JSON string so the page needs no generated glue
//! beyond `wasm-bindgen` itself. The plain functions are what the bindings
//! call and what the native tests exercise.
// `!(x > y)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rmt_edge::deformed_mp::{DeformedMp, SolverConfig};
use rmt_edge::error::{Error, Result};
use rmt_edge::harness::parse_population;
use rmt_edge::matrix_lab::{eigens, sample_entries, CovarianceModel, EigenMethod, EntryDistribution};
use rmt_edge::tracy_widom::{tw_cdf_on, QuadratureGrid, TwOrder};

/// Largest `M` accepted by the histogram; a full SVD beyond this stalls the page.
pub const MAX_HISTOGRAM_M: usize = 800;

#[derive(Debug, Serialize)]
pub struct DensityCurve {
    pub lambda_r: f64,
    pub gamma0: f64,
    pub regularity_margin: f64,
    pub intervals: Vec<(f64, f64)>,
    pub e: Vec<f64>,
    pub rho: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct TwCurve {
    pub s: Vec<f64>,
    pub cdf: Vec<f64>,
    pub pdf: Vec<f64>,
}

#[derive(Debug, Serialize)]
pub struct Histogram {
    pub lambda_r: f64,
    pub lambda1: f64,
    /// `(λ1 - λ_r) γ0 N^{2/3}`.
    pub rescaled: f64,
    pub edges: Vec<f64>,
    /// Normalized so the bars integrate to one.
    pub heights: Vec<f64>,
}

fn model(pop: &str, m: usize, d: f64) -> Result<CovarianceModel> {
    if !(d > 0.0 && d.is_finite()) {
        return Err(Error::InvalidInput(format!("d must be positive, got {d}")));
    }
    let n = ((d * m as f64).round() as usize).max(1);
    CovarianceModel::new(parse_population(pop, m)?, n)
}

/// Limiting density `ρ_2c` at the midpoints of `points` cells over
/// `[0, 1.1 λ_r]`, with the edge summary and support atlas. Midpoints keep
/// the atom at 0 (present when d > 1) off the grid.
pub fn density(pop: &str, m: usize, d: f64, points: usize) -> Result<DensityCurve> {
    let cm = model(pop, m, d)?;
    let dmp: DeformedMp = cm.deformed_mp();
    let edge = dmp.edge_report_unchecked(0.0)?;
    let points = points.max(1);
    let hi = 1.1 * edge.lambda_r;
    let cfg = SolverConfig::default();
    let mut e = Vec::with_capacity(points);
    let mut rho = Vec::with_capacity(points);
    for k in 0..points {
        let x = hi * (k as f64 + 0.5) / points as f64;
        e.push(x);
        rho.push(dmp.density_at(x, 1e-6, &cfg)?);
    }
    Ok(DensityCurve {
        lambda_r: edge.lambda_r,
        gamma0: edge.gamma0,
        regularity_margin: edge.regularity_margin,
        intervals: edge.atlas.intervals,
        e,
        rho,
    })
}

/// `F_β` and its central-difference density on a uniform grid.
pub fn tw_curve(order: u8, lo: f64, hi: f64, points: usize) -> Result<TwCurve> {
    let order = TwOrder::new(order)?;
    if !(hi > lo) || points < 3 {
        return Err(Error::InvalidInput("need lo < hi and at least 3 points".into()));
    }
    let grid = QuadratureGrid::default();
    let h = (hi - lo) / (points - 1) as f64;
    let s: Vec<f64> = (0..points).map(|k| lo + h * k as f64).collect();
    let cdf: Vec<f64> = s.iter().map(|&x| tw_cdf_on(x, order, &grid)).collect();
    let pdf = (0..points)
        .map(|k| {
            let (a, b) = (k.saturating_sub(1), (k + 1).min(points - 1));
            ((cdf[b] - cdf[a]) / (s[b] - s[a])).max(0.0)
        })
        .collect();
    Ok(TwCurve { s, cdf, pdf })
}

/// Histogram of one sampled spectrum.
pub fn histogram(pop: &str, m: usize, d: f64, dist: &str, seed: u64, bins: usize) -> Result<Histogram> {
    if m > MAX_HISTOGRAM_M {
        return Err(Error::InvalidInput(format!("M is capped at {MAX_HISTOGRAM_M} in the demo")));
    }
    let cm = model(pop, m, d)?;
    let dist: EntryDistribution = dist.parse()?;
    let edge = cm.deformed_mp().edge_report_unchecked(0.0)?;
    let x = sample_entries(&dist, m, cm.n(), seed)?;
    let ev = eigens(&cm, &x, EigenMethod::Full)?.eigenvalues;
    let lambda1 = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let bins = bins.max(1);
    let hi = lambda1.max(edge.lambda_r) * 1.05;
    let width = hi / bins as f64;
    let mut counts = vec![0usize; bins];
    for &l in &ev {
        counts[((l.max(0.0) / width) as usize).min(bins - 1)] += 1;
    }
    Ok(Histogram {
        lambda_r: edge.lambda_r,
        lambda1,
        rescaled: (lambda1 - edge.lambda_r) * edge.gamma0 * (cm.n() as f64).powf(2.0 / 3.0),
        edges: (0..=bins).map(|k| k as f64 * width).collect(),
        heights: counts.iter().map(|&c| c as f64 / (ev.len() as f64 * width)).collect(),
    })
}

fn to_js<T: Serialize>(r: Result<T>) -> std::result::Result<String, JsError> {
    let value = r.map_err(|e| JsError::new(&e.to_string()))?;
    serde_json::to_string(&value).map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen(js_name = densityCurve)]
pub fn density_js(pop: &str, m: usize, d: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(density(pop, m, d, points))
}

#[wasm_bindgen(js_name = twCurve)]
pub fn tw_curve_js(order: u8, lo: f64, hi: f64, points: usize) -> std::result::Result<String, JsError> {
    to_js(tw_curve(order, lo, hi, points))
}

#[wasm_bindgen(js_name = eigenHistogram)]
pub fn histogram_js(pop: &str, m: usize, d: f64, dist: &str, seed: u64, bins: usize) -> std::result::Result<String, JsError> {
    to_js(histogram(pop, m, d, dist, seed, bins))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn null_density_carries_the_continuous_mass() {
        let c = density("null", 200, 4.0, 400).unwrap();
        assert!((c.lambda_r - 2.25).abs() < 1e-9);
        let h = c.e[1] - c.e[0];
        let mass: f64 = c.rho.iter().sum::<f64>() * h;
        // continuous part only; the rest is the atom at 0
        assert!((mass - 0.25).abs() < 2e-3, "{mass}");
    }

    #[test]
    fn two_atom_shows_two_components_at_d4() {
        let c = density("two:4,1,0.5", 200, 4.0, 50).unwrap();
        assert_eq!(c.intervals.len(), 2);
    }

    #[test]
    fn tw_curve_is_a_distribution() {
        let t = tw_curve(2, -6.0, 4.0, 41).unwrap();
        assert!(t.cdf.windows(2).all(|w| w[1] >= w[0] - 1e-12));
        assert!(t.cdf[0] < 1e-3 && t.cdf[40] > 0.999);
        assert!(tw_curve(3, -1.0, 1.0, 5).is_err());
    }

    #[test]
    fn histogram_is_normalized_and_near_the_edge() {
        let h = histogram("null", 200, 1.0, "gaussian", 7, 40).unwrap();
        let area: f64 = h.heights.iter().zip(h.edges.windows(2)).map(|(y, e)| y * (e[1] - e[0])).sum();
        assert!((area - 1.0).abs() < 1e-12);
        assert!((h.lambda1 - 4.0).abs() < 0.3, "{}", h.lambda1);
        assert!(histogram("null", MAX_HISTOGRAM_M + 1, 1.0, "gaussian", 7, 40).is_err());
    }
}
