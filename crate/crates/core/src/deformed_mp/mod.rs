//! Deformed Marchenko-Pastur law for a diagonal population.

mod classical;
mod edge;
pub mod io;
mod model;
mod population;
mod support;

pub use classical::TailMass;
pub use edge::EdgeReport;
pub use model::{DeformedMp, SolverConfig, StieltjesValue};
pub use population::{AspectRatio, AssumptionCheck, Atom, PopulationSpectrum};
pub use support::{CriticalPoint, ScanConfig, SupportAtlas};

/// Rectangle of spectral parameters `E + iη`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SpectralDomain {
    pub e_lo: f64,
    pub e_hi: f64,
    pub eta_lo: f64,
    pub eta_hi: f64,
    pub n_e: usize,
    pub n_eta: usize,
}

impl SpectralDomain {
    pub fn new(e_lo: f64, e_hi: f64, eta_lo: f64, eta_hi: f64, n_e: usize, n_eta: usize) -> crate::Result<Self> {
        if !(e_lo < e_hi) || !(0.0 < eta_lo && eta_lo <= eta_hi && eta_hi <= 1.0) || n_e == 0 || n_eta == 0 {
            return Err(crate::error::invalid(
                "spectral domain needs E_lo < E_hi, 0 < eta_lo <= eta_hi <= 1 and nonempty grids",
            ));
        }
        Ok(SpectralDomain { e_lo, e_hi, eta_lo, eta_hi, n_e, n_eta })
    }

    /// Grid points, `E` uniform and `η` log-uniform.
    pub fn points(&self) -> Vec<(f64, f64)> {
        let lin = |lo: f64, hi: f64, n: usize, i: usize| {
            if n == 1 { lo } else { lo + (hi - lo) * i as f64 / (n - 1) as f64 }
        };
        let mut out = Vec::with_capacity(self.n_e * self.n_eta);
        for i in 0..self.n_e {
            let e = lin(self.e_lo, self.e_hi, self.n_e, i);
            for k in 0..self.n_eta {
                let eta = lin(self.eta_lo.ln(), self.eta_hi.ln(), self.n_eta, k).exp();
                out.push((e, eta));
            }
        }
        out
    }
}
