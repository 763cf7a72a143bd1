use serde::Serialize;

use super::model::DeformedMp;
use super::support::{ScanConfig, SupportAtlas};
use crate::error::{Error, Result};

/// Soft-edge data of the deformed MP law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeReport {
    /// Rightmost edge `λ_r = a_1`.
    pub lambda_r: f64,
    /// `b_1 = m2c(λ_r) ∈ (-1/σ_1, 0)`.
    pub b1: f64,
    /// Scaling factor of the edge fluctuations.
    pub gamma0: f64,
    /// `|1 + b_1 σ_1|`, the quantity that gates regularity.
    pub regularity_margin: f64,
    /// `min_i |1 + b_1 σ_i|`, reported but not gated on.
    pub regularity_margin_min: f64,
    pub tau: f64,
    pub regular: bool,
    pub atlas: SupportAtlas,
}

impl EdgeReport {
    /// `γ_0 N^{2/3} (λ - λ_r)`.
    pub fn rescale(&self, lambda: f64, n: usize) -> f64 {
        self.gamma0 * (n as f64).powf(2.0 / 3.0) * (lambda - self.lambda_r)
    }
}

impl DeformedMp {
    /// Computes the soft edge, `b_1`, `γ_0` from
    /// `1/γ_0³ = d⁻¹ Σ w_k (σ_k / (1 + b_1 σ_k))³ - 1/b_1³`, and the
    /// regularity margins. Fails with `RegularityFailed` when
    /// `|1 + b_1 σ_1| < tau`; use [`DeformedMp::edge_report_unchecked`] to
    /// inspect an irregular edge.
    pub fn edge_report(&self, tau: f64) -> Result<EdgeReport> {
        let report = self.edge_report_unchecked(tau)?;
        if !report.regular {
            return Err(Error::RegularityFailed { margin: report.regularity_margin, tau });
        }
        Ok(report)
    }

    pub fn edge_report_unchecked(&self, tau: f64) -> Result<EdgeReport> {
        let atlas = self.support_edges(&ScanConfig::default())?;
        let lambda_r = atlas.right_edge();
        let lower = -1.0 / self.sigma_max();
        let b1 = atlas
            .critical_points
            .iter()
            .filter(|cp| cp.b > lower && cp.b < 0.0)
            .min_by(|x, y| x.a.total_cmp(&y.a))
            .map(|cp| cp.b)
            .ok_or(Error::RootScanIncomplete { lo: lower, hi: 0.0 })?;

        let mut cube_sum = 0.0;
        let mut margin_min = f64::INFINITY;
        for a in self.atoms() {
            let q = a.sigma / (1.0 + b1 * a.sigma);
            cube_sum += a.weight * q * q * q;
            if a.sigma > 0.0 {
                margin_min = margin_min.min((1.0 + b1 * a.sigma).abs());
            }
        }
        let inv_cube = cube_sum / self.d() - 1.0 / (b1 * b1 * b1);
        let gamma0 = inv_cube.powf(-1.0 / 3.0);
        let margin = (1.0 + b1 * self.sigma_max()).abs();
        let regular = margin >= tau && gamma0.is_finite() && gamma0 > 0.0;
        Ok(EdgeReport {
            lambda_r,
            b1,
            gamma0,
            regularity_margin: margin,
            regularity_margin_min: margin_min,
            tau,
            regular,
            atlas,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformed_mp::population::Atom;
    use approx::assert_relative_eq;

    fn null(d: f64) -> DeformedMp {
        DeformedMp::from_atoms(vec![Atom { sigma: 1.0, weight: 1.0 }], d)
    }

    #[test]
    fn null_case_gamma0() {
        let r = null(1.0).edge_report(0.01).unwrap();
        assert_relative_eq!(r.lambda_r, 4.0, epsilon = 1e-10);
        assert_relative_eq!(r.b1, -0.5, epsilon = 1e-12);
        assert_relative_eq!(r.gamma0, 2f64.powf(-4.0 / 3.0), epsilon = 1e-9);
        assert_relative_eq!(r.regularity_margin, 0.5, epsilon = 1e-12);

        let r = null(4.0).edge_report(0.01).unwrap();
        assert_relative_eq!(r.lambda_r, 2.25, epsilon = 1e-10);
        assert_relative_eq!(r.b1, -2.0 / 3.0, epsilon = 1e-12);
        assert_relative_eq!(r.gamma0, 2.0 / 3f64.powf(4.0 / 3.0), epsilon = 1e-9);
    }

    #[test]
    fn regularity_gate() {
        let r = null(1.0).edge_report(0.6);
        assert!(matches!(r, Err(Error::RegularityFailed { .. })));
        let r = null(1.0).edge_report_unchecked(0.6).unwrap();
        assert!(!r.regular);
    }

    #[test]
    fn rescale_uses_gamma0() {
        let r = null(1.0).edge_report(0.01).unwrap();
        let v = r.rescale(4.1, 1000);
        assert_relative_eq!(v, r.gamma0 * 100.0 * 0.1, max_relative = 1e-12);
    }
}
