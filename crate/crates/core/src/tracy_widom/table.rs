use std::sync::OnceLock;

use super::{tw_cdf_on, QuadratureGrid, TwOrder};
use crate::error::{invalid, Result};

/// `F1` and `F2` tabulated on a uniform grid, with cubic interpolation.
///
/// Built once and shared read-only; used where thousands of CDF values are
/// needed (KS statistics).
#[derive(Debug, Clone, PartialEq)]
pub struct TwTable {
    s_lo: f64,
    step: f64,
    f1: Vec<f64>,
    f2: Vec<f64>,
}

impl TwTable {
    pub fn build(s_lo: f64, s_hi: f64, step: f64, grid: &QuadratureGrid) -> Result<Self> {
        if !(s_hi > s_lo && step > 0.0) || (s_hi - s_lo) / step < 4.0 {
            return Err(invalid("table needs s_lo < s_hi and at least four steps"));
        }
        let n = ((s_hi - s_lo) / step).ceil() as usize + 1;
        let s = |k: usize| s_lo + k as f64 * step;
        let f1 = (0..n).map(|k| tw_cdf_on(s(k), TwOrder::One, grid)).collect();
        let f2 = (0..n).map(|k| tw_cdf_on(s(k), TwOrder::Two, grid)).collect();
        Ok(TwTable { s_lo, step, f1, f2 })
    }

    /// The shared table on `[-12, 8]` with spacing 0.05 and 128 nodes.
    pub fn shared() -> &'static TwTable {
        static TABLE: OnceLock<TwTable> = OnceLock::new();
        TABLE.get_or_init(|| {
            TwTable::build(-12.0, 8.0, 0.05, &QuadratureGrid::default()).expect("default table")
        })
    }

    fn values(&self, order: TwOrder) -> &[f64] {
        match order {
            TwOrder::One => &self.f1,
            TwOrder::Two => &self.f2,
        }
    }

    pub fn range(&self) -> (f64, f64) {
        (self.s_lo, self.s_lo + (self.f1.len() - 1) as f64 * self.step)
    }

    /// Grid points with both distribution functions.
    pub fn rows(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        (0..self.f1.len()).map(move |k| (self.s_lo + k as f64 * self.step, self.f1[k], self.f2[k]))
    }

    /// Interpolated `F_β(s)`; 0 left of the table and 1 right of it.
    pub fn cdf(&self, s: f64, order: TwOrder) -> f64 {
        let v = self.values(order);
        let (lo, hi) = self.range();
        if s <= lo {
            return if s == lo { v[0] } else { 0.0 };
        }
        if s >= hi {
            return 1.0;
        }
        let t = (s - lo) / self.step;
        let k = (t.floor() as usize).clamp(1, v.len() - 3);
        // four-point Lagrange on k-1..k+2
        let u = t - k as f64;
        let (p0, p1, p2, p3) = (v[k - 1], v[k], v[k + 1], v[k + 2]);
        let value = -u * (u - 1.0) * (u - 2.0) / 6.0 * p0
            + (u + 1.0) * (u - 1.0) * (u - 2.0) / 2.0 * p1
            - (u + 1.0) * u * (u - 2.0) / 2.0 * p2
            + (u + 1.0) * u * (u - 1.0) / 6.0 * p3;
        value.clamp(0.0, 1.0)
    }

    /// Mean of the distribution, `s_hi - ∫ F ds` over the table (Simpson).
    pub fn mean(&self, order: TwOrder) -> f64 {
        let v = self.values(order);
        let (lo, hi) = self.range();
        let mut integral = 0.0;
        let pairs = (v.len() - 1) / 2;
        for k in 0..pairs {
            integral += self.step / 3.0 * (v[2 * k] + 4.0 * v[2 * k + 1] + v[2 * k + 2]);
        }
        if (v.len() - 1) % 2 == 1 {
            let n = v.len();
            integral += 0.5 * self.step * (v[n - 2] + v[n - 1]);
        }
        hi - integral - lo * v[0]
    }

    /// Quantile by bisection on the interpolant.
    pub fn quantile(&self, p: f64, order: TwOrder) -> Result<f64> {
        if !(p > 0.0 && p < 1.0) {
            return Err(invalid(format!("quantile level p = {p} must lie in (0, 1)")));
        }
        let (mut lo, mut hi) = self.range();
        while hi - lo > 1e-12 {
            let mid = 0.5 * (lo + hi);
            if self.cdf(mid, order) < p {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}
