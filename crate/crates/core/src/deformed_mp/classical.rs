use super::edge::EdgeReport;
use super::model::{DeformedMp, SolverConfig};
use crate::error::{invalid, Result};
use crate::quadrature::AdaptiveGl;

const PANELS: usize = 64;

/// Tail mass `∫_x^{λ_r} ρ_2c` of the deformed MP density.
///
/// Integrates in `u = sqrt(λ_r - x)`, which removes the square-root
/// behaviour at the soft edge. Panel masses are tabulated once; queries
/// only integrate inside a single panel.
pub struct TailMass<'a> {
    model: &'a DeformedMp,
    lambda_r: f64,
    u_max: f64,
    panel_width: f64,
    cumulative: Vec<f64>,
    eta_floor: f64,
    solver: SolverConfig,
    quad: AdaptiveGl,
}

impl<'a> TailMass<'a> {
    pub fn new(model: &'a DeformedMp, edge: &EdgeReport, eta_floor: f64) -> Result<Self> {
        let lower = edge.atlas.intervals.first().map(|iv| iv.0).unwrap_or(0.0);
        let u_max = (edge.lambda_r - lower).max(0.0).sqrt();
        let mut tm = TailMass {
            model,
            lambda_r: edge.lambda_r,
            u_max,
            panel_width: u_max / PANELS as f64,
            cumulative: vec![0.0; PANELS + 1],
            eta_floor,
            solver: SolverConfig::default(),
            quad: AdaptiveGl::new(1e-11),
        };
        for k in 0..PANELS {
            let a = k as f64 * tm.panel_width;
            let mass = tm.integrate_u(a, a + tm.panel_width)?;
            tm.cumulative[k + 1] = tm.cumulative[k] + mass;
        }
        Ok(tm)
    }

    fn integrate_u(&self, a: f64, b: f64) -> Result<f64> {
        let (model, lr, eta, cfg) = (self.model, self.lambda_r, self.eta_floor, &self.solver);
        self.quad
            .integrate(|u| Ok(2.0 * u * model.density_at(lr - u * u, eta, cfg)?), a, b)
    }

    /// Mass of the whole continuous part.
    pub fn total(&self) -> f64 {
        self.cumulative[PANELS]
    }

    /// `∫_x^{λ_r} ρ_2c`.
    pub fn mass_above(&self, x: f64) -> Result<f64> {
        if x >= self.lambda_r {
            return Ok(0.0);
        }
        let u = (self.lambda_r - x).sqrt().min(self.u_max);
        let k = ((u / self.panel_width) as usize).min(PANELS - 1);
        let a = k as f64 * self.panel_width;
        Ok(self.cumulative[k] + self.integrate_u(a, u)?)
    }

    /// Smallest `x` (largest `u`) whose tail mass reaches `target`.
    fn locate(&self, target: f64) -> Result<f64> {
        if target <= 0.0 {
            return Ok(self.lambda_r);
        }
        if target >= self.total() {
            return Ok(self.lambda_r - self.u_max * self.u_max);
        }
        let k = self.cumulative.partition_point(|&c| c <= target) - 1;
        let (mut lo, mut hi) = (k as f64 * self.panel_width, (k + 1) as f64 * self.panel_width);
        let base = self.cumulative[k];
        while hi - lo > 1e-13 * self.u_max.max(1.0) {
            let mid = 0.5 * (lo + hi);
            if base + self.integrate_u(k as f64 * self.panel_width, mid)? > target {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        let u = 0.5 * (lo + hi);
        Ok(self.lambda_r - u * u)
    }
}

impl DeformedMp {
    /// Classical locations `γ_j = sup{x : ∫_x^∞ ρ_2c > (j-1)/N}` for every
    /// `j` in `js` (1-based). `γ_1 = λ_r`.
    pub fn classical_locations(
        &self,
        edge: &EdgeReport,
        n: usize,
        js: impl IntoIterator<Item = usize>,
    ) -> Result<Vec<f64>> {
        if n == 0 {
            return Err(invalid("classical locations need N >= 1"));
        }
        let tail = TailMass::new(self, edge, 1e-6)?;
        js.into_iter()
            .map(|j| {
                if j == 0 {
                    return Err(invalid("classical locations are 1-based"));
                }
                tail.locate((j - 1) as f64 / n as f64)
            })
            .collect()
    }
}
