use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// One distinct population variance and the fraction of the `M` entries
/// that carry it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub sigma: f64,
    pub weight: f64,
}

/// Diagonal population variances `σ_1 ≥ … ≥ σ_M ≥ 0`, together with the
/// collapsed empirical measure `π_N` (distinct values with weights).
#[derive(Debug, Clone, PartialEq)]
pub struct PopulationSpectrum {
    sigmas: Vec<f64>,
    atoms: Vec<Atom>,
}

/// Outcome of checking the population against a threshold `tau`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AssumptionCheck {
    pub tau: f64,
    pub sigma_max_ok: bool,
    /// Fraction of `σ_i ≤ τ`; must not exceed `1 - τ`.
    pub small_fraction: f64,
    pub small_fraction_ok: bool,
}

impl AssumptionCheck {
    pub fn passed(&self) -> bool {
        self.sigma_max_ok && self.small_fraction_ok
    }
}

impl PopulationSpectrum {
    /// Builds a spectrum from raw variances (any order).
    pub fn new(mut sigmas: Vec<f64>) -> Result<Self> {
        if sigmas.is_empty() {
            return Err(invalid("population spectrum is empty"));
        }
        if let Some(bad) = sigmas.iter().find(|s| !s.is_finite() || **s < 0.0) {
            return Err(invalid(format!("population variance {bad} is not finite and nonnegative")));
        }
        if sigmas.iter().all(|&s| s == 0.0) {
            return Err(invalid("population spectrum is identically zero"));
        }
        sigmas.sort_by(|a, b| b.total_cmp(a));
        let m = sigmas.len() as f64;
        let mut atoms: Vec<Atom> = Vec::new();
        for &s in &sigmas {
            match atoms.last_mut() {
                Some(a) if a.sigma == s => a.weight += 1.0 / m,
                _ => atoms.push(Atom { sigma: s, weight: 1.0 / m }),
            }
        }
        Ok(PopulationSpectrum { sigmas, atoms })
    }

    /// `σ_i ≡ 1` (the null case `T = I`).
    pub fn null(m: usize) -> Result<Self> {
        Self::new(vec![1.0; m])
    }

    /// Expands weighted atoms into `m` entries; counts are rounded so that
    /// they sum to `m` (largest remainders first).
    pub fn from_atoms(atoms: &[Atom], m: usize) -> Result<Self> {
        if m == 0 || atoms.is_empty() {
            return Err(invalid("atom population needs M >= 1 and at least one atom"));
        }
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        if !(total > 0.0) || atoms.iter().any(|a| !(a.weight >= 0.0)) {
            return Err(invalid("atom weights must be nonnegative with positive sum"));
        }
        let raw: Vec<f64> = atoms.iter().map(|a| a.weight / total * m as f64).collect();
        let mut counts: Vec<usize> = raw.iter().map(|r| r.floor() as usize).collect();
        let mut missing = m - counts.iter().sum::<usize>();
        let mut order: Vec<usize> = (0..atoms.len()).collect();
        order.sort_by(|&i, &j| (raw[j] - raw[j].floor()).total_cmp(&(raw[i] - raw[i].floor())));
        for &i in order.iter().cycle() {
            if missing == 0 {
                break;
            }
            counts[i] += 1;
            missing -= 1;
        }
        let sigmas = atoms
            .iter()
            .zip(&counts)
            .flat_map(|(a, &c)| std::iter::repeat_n(a.sigma, c))
            .collect();
        Self::new(sigmas)
    }

    /// Two-atom population: `sigma_a` on a fraction `weight_a`, `sigma_b` on the rest.
    pub fn two_atom(sigma_a: f64, sigma_b: f64, weight_a: f64, m: usize) -> Result<Self> {
        if !(0.0..=1.0).contains(&weight_a) {
            return Err(invalid("two-atom weight must lie in [0, 1]"));
        }
        Self::from_atoms(
            &[
                Atom { sigma: sigma_a, weight: weight_a },
                Atom { sigma: sigma_b, weight: 1.0 - weight_a },
            ],
            m,
        )
    }

    pub fn sigmas(&self) -> &[f64] {
        &self.sigmas
    }

    /// Distinct values in descending order with their weights.
    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn len(&self) -> usize {
        self.sigmas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigmas.is_empty()
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigmas[0]
    }

    /// `sqrt(σ_i)`, the diagonal of `T`.
    pub fn sqrt_diagonal(&self) -> Vec<f64> {
        self.sigmas.iter().map(|s| s.sqrt()).collect()
    }

    pub fn check(&self, tau: f64) -> AssumptionCheck {
        let small = self.sigmas.iter().filter(|&&s| s <= tau).count() as f64 / self.len() as f64;
        AssumptionCheck {
            tau,
            sigma_max_ok: self.sigma_max() <= 1.0 / tau,
            small_fraction: small,
            small_fraction_ok: small <= 1.0 - tau,
        }
    }

    /// Rejects populations that violate the model assumptions at `tau`.
    pub fn validate(&self, tau: f64) -> Result<()> {
        if !(tau > 0.0 && tau < 1.0) {
            return Err(invalid(format!("tau = {tau} must lie in (0, 1)")));
        }
        let c = self.check(tau);
        if !c.sigma_max_ok {
            return Err(invalid(format!("sigma_1 = {} exceeds 1/tau", self.sigma_max())));
        }
        if !c.small_fraction_ok {
            return Err(invalid(format!(
                "{:.3} of the population is <= tau; the spectrum concentrates at zero",
                c.small_fraction
            )));
        }
        Ok(())
    }
}

/// `d = N / M` stored with its integers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AspectRatio {
    pub n: usize,
    pub m: usize,
}

impl AspectRatio {
    pub fn new(n: usize, m: usize) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(invalid("aspect ratio needs N, M >= 1"));
        }
        Ok(AspectRatio { n, m })
    }

    pub fn d(&self) -> f64 {
        self.n as f64 / self.m as f64
    }
}
