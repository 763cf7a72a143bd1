use std::f64::consts::PI;

use num_complex::{Complex64, ComplexFloat};
use num_traits::NumCast;
use serde::Serialize;

use super::population::{AspectRatio, Atom, PopulationSpectrum};
use crate::error::{invalid, Error, Result};

/// Knobs for [`DeformedMp::solve_m2c`].
#[derive(Debug, Clone, Copy)]
pub struct SolverConfig {
    /// Target for the scaled residual `|z - f(m)| / max(1, |z|)`.
    pub tol: f64,
    pub pole_guard: f64,
    pub max_iters: usize,
    /// Residual below which the damped iteration hands over to Newton.
    pub newton_switch: f64,
    /// Geometric ratio of the η continuation ladder.
    pub eta_ratio: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-12,
            pole_guard: 1e-12,
            max_iters: 500,
            newton_switch: 1e-4,
            eta_ratio: 0.5,
        }
    }
}

/// Solution of the self-consistent equation at one spectral parameter.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StieltjesValue {
    #[serde(serialize_with = "ser_complex")]
    pub z: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub m2c: Complex64,
    #[serde(serialize_with = "ser_complex")]
    pub m1c: Complex64,
    /// Scaled residual `|z - f(m2c)| / max(1, |z|)`.
    pub residual: f64,
    pub iterations: usize,
}

fn ser_complex<S: serde::Serializer>(c: &Complex64, s: S) -> std::result::Result<S::Ok, S::Error> {
    use serde::ser::SerializeTuple;
    let mut t = s.serialize_tuple(2)?;
    t.serialize_element(&c.re)?;
    t.serialize_element(&c.im)?;
    t.end()
}

/// The deformed Marchenko-Pastur law of a diagonal population at aspect
/// ratio `d = N/M`.
///
/// `m2c(z)` is the unique solution of `z = f(m)` with `Im m ≥ 0`, where
/// `f(m) = -1/m + d⁻¹ ∫ x / (1 + m x) π(dx)`.
#[derive(Debug, Clone)]
pub struct DeformedMp {
    atoms: Vec<Atom>,
    d: f64,
    sigma_max: f64,
    /// Weight of the strictly positive part of the population.
    positive_mass: f64,
}

impl DeformedMp {
    pub fn new(pop: &PopulationSpectrum, ratio: AspectRatio) -> Self {
        Self::from_atoms(pop.atoms().to_vec(), ratio.d())
    }

    /// Builds the law directly from weighted atoms and a real `d > 0`.
    pub fn from_atoms(mut atoms: Vec<Atom>, d: f64) -> Self {
        assert!(d > 0.0 && d.is_finite(), "aspect ratio must be positive");
        let total: f64 = atoms.iter().map(|a| a.weight).sum();
        for a in &mut atoms {
            a.weight /= total;
        }
        atoms.sort_by(|a, b| b.sigma.total_cmp(&a.sigma));
        let sigma_max = atoms[0].sigma;
        let positive_mass = atoms.iter().filter(|a| a.sigma > 0.0).map(|a| a.weight).sum();
        DeformedMp { atoms, d, sigma_max, positive_mass }
    }

    pub fn d(&self) -> f64 {
        self.d
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn sigma_max(&self) -> f64 {
        self.sigma_max
    }

    pub fn positive_mass(&self) -> f64 {
        self.positive_mass
    }

    /// Crude upper bound on the support, `σ_1 (1 + d^{-1/2})²`.
    pub fn support_bound(&self) -> f64 {
        self.sigma_max * (1.0 + self.d.powf(-0.5)).powi(2)
    }

    fn guard<T: ComplexFloat<Real = f64>>(&self, m: T, eps: f64) -> Result<()> {
        let near = m.abs() < eps
            || self.atoms.iter().filter(|a| a.sigma > 0.0).any(|a| {
                (T::one() + m * cast::<T>(a.sigma)).abs() < eps
            });
        if near {
            return Err(Error::PoleProximity { m: format!("{:?}", (m.re(), m.im())), guard: eps });
        }
        Ok(())
    }

    /// `f(m) = -1/m + d⁻¹ Σ w_k σ_k / (1 + m σ_k)`, real or complex.
    pub fn f_of_m<T: ComplexFloat<Real = f64>>(&self, m: T, pole_guard: f64) -> Result<T> {
        self.guard(m, pole_guard)?;
        Ok(self.f_unchecked(m))
    }

    /// `f'(m) = 1/m² - d⁻¹ Σ w_k σ_k² / (1 + m σ_k)²`.
    pub fn f_prime_of_m<T: ComplexFloat<Real = f64>>(&self, m: T, pole_guard: f64) -> Result<T> {
        self.guard(m, pole_guard)?;
        Ok(self.f_prime_unchecked(m))
    }

    pub(crate) fn f_unchecked<T: ComplexFloat<Real = f64>>(&self, m: T) -> T {
        let one = T::one();
        let mut s = T::zero();
        for a in &self.atoms {
            let sig = cast::<T>(a.sigma);
            s = s + cast::<T>(a.weight) * sig / (one + m * sig);
        }
        -one / m + s / cast::<T>(self.d)
    }

    pub(crate) fn f_prime_unchecked<T: ComplexFloat<Real = f64>>(&self, m: T) -> T {
        let one = T::one();
        let mut s = T::zero();
        for a in &self.atoms {
            let sig = cast::<T>(a.sigma);
            let q = sig / (one + m * sig);
            s = s + cast::<T>(a.weight) * q * q;
        }
        one / (m * m) - s / cast::<T>(self.d)
    }

    pub(crate) fn f_second_real(&self, m: f64) -> f64 {
        let mut s = 0.0;
        for a in &self.atoms {
            let q = a.sigma / (1.0 + m * a.sigma);
            s += a.weight * q * q * q;
        }
        -2.0 / (m * m * m) + 2.0 * s / self.d
    }

    /// `m1c = -(1 - d)/z + d m2c`.
    pub fn m1c_from_m2c(&self, z: Complex64, m2c: Complex64) -> Complex64 {
        -(1.0 - self.d) / z + self.d * m2c
    }

    /// Solves `z = f(m)` on the branch `Im m ≥ 0` for `Im z > 0`.
    ///
    /// The spectral parameter is approached from far above the real axis:
    /// η is lowered geometrically at fixed `Re z` and every level is
    /// warm-started from the previous one. Each level runs a damped fixed
    /// point iteration of `m ↦ 1 / (-z + d⁻¹ ∫ x/(1+mx) dπ)` until the
    /// residual drops below `newton_switch`, then Newton's method.
    pub fn solve_m2c(&self, z: Complex64, cfg: &SolverConfig) -> Result<StieltjesValue> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(invalid(format!("solve_m2c needs Im z > 0, got {z}")));
        }
        let eta_target = z.im;
        let eta_top = eta_target.max(4.0 * (1.0 + z.re.abs() + self.support_bound()));
        let mut eta = eta_top;
        let mut m = -1.0 / Complex64::new(z.re, eta);
        let mut eta_prev = eta_top;
        let mut iterations = 0;
        loop {
            let at = Complex64::new(z.re, eta);
            let tol = if eta == eta_target { cfg.tol } else { cfg.tol.max(1e-9) };
            let (m_new, it) = self.solve_level_with_refinement(at, m, eta_prev, tol, cfg)?;
            iterations += it;
            m = m_new;
            if eta == eta_target {
                break;
            }
            eta_prev = eta;
            eta = (eta * cfg.eta_ratio).max(eta_target);
        }
        let residual = self.scaled_residual(z, m);
        Ok(StieltjesValue { z, m2c: m, m1c: self.m1c_from_m2c(z, m), residual, iterations })
    }

    /// Solves at `z` from a guess valid at imaginary part `eta_prev`; if the
    /// jump fails, intermediate levels are inserted.
    fn solve_level_with_refinement(
        &self,
        z: Complex64,
        guess: Complex64,
        eta_prev: f64,
        tol: f64,
        cfg: &SolverConfig,
    ) -> Result<(Complex64, usize)> {
        if let Ok(r) = self.solve_level(z, guess, tol, cfg) {
            return Ok(r);
        }
        let mut last_err = None;
        for splits in 1..=6 {
            let steps = 1usize << splits;
            let mut m = guess;
            let mut total = 0;
            let mut ok = true;
            for k in 1..=steps {
                let t = k as f64 / steps as f64;
                let eta = eta_prev * (z.im / eta_prev).powf(t);
                let eta = if k == steps { z.im } else { eta };
                let tol_k = if k == steps { tol } else { tol.max(1e-9) };
                match self.solve_level(Complex64::new(z.re, eta), m, tol_k, cfg) {
                    Ok((mk, it)) => {
                        m = mk;
                        total += it;
                    }
                    Err(e) => {
                        last_err = Some(e);
                        ok = false;
                        break;
                    }
                }
            }
            if ok {
                return Ok((m, total));
            }
        }
        Err(last_err.unwrap_or(Error::NoConvergence { what: "m2c continuation", iterations: 0 }))
    }

    fn scaled_residual(&self, z: Complex64, m: Complex64) -> f64 {
        (z - self.f_unchecked(m)).abs() / z.abs().max(1.0)
    }

    fn solve_level(
        &self,
        z: Complex64,
        guess: Complex64,
        tol: f64,
        cfg: &SolverConfig,
    ) -> Result<(Complex64, usize)> {
        let eps = cfg.pole_guard;
        let resid = |m: Complex64| -> f64 {
            if self.guard(m, eps).is_err() {
                f64::INFINITY
            } else {
                self.scaled_residual(z, m)
            }
        };
        let mut m = guess;
        let mut r = resid(m);
        let mut iterations = 0;

        let mut alpha = 0.5;
        while r > cfg.newton_switch && iterations < cfg.max_iters {
            iterations += 1;
            let g = 1.0 / (-z + self.f_unchecked(m) + 1.0 / m);
            let cand = alpha * g + (1.0 - alpha) * m;
            let rc = resid(cand);
            if rc < r && cand.im >= 0.0 {
                m = cand;
                r = rc;
            } else {
                alpha *= 0.5;
                if alpha < 1e-8 {
                    break;
                }
            }
        }

        for _ in 0..cfg.max_iters.min(100) {
            if r <= tol {
                break;
            }
            iterations += 1;
            let fp = self.f_prime_unchecked(m);
            if fp.abs() == 0.0 || !fp.is_finite() {
                break;
            }
            let mut step = (self.f_unchecked(m) - z) / fp;
            let mut accepted = false;
            for _ in 0..30 {
                let cand = m - step;
                let rc = resid(cand);
                if cand.im >= 0.0 && rc.is_finite() && (rc < r || rc <= tol) {
                    m = cand;
                    r = rc;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            if !accepted {
                break;
            }
        }

        if r <= tol && m.im >= 0.0 && m.is_finite() {
            Ok((m, iterations))
        } else {
            Err(Error::NoConvergence { what: "m2c solve", iterations })
        }
    }

    /// `ρ_2c(E)` from `(1/π) Im m2c(E + iη)`, extrapolated to η → 0 with
    /// the two-point Richardson combination of η and 2η.
    pub fn density_at(&self, e: f64, eta_floor: f64, cfg: &SolverConfig) -> Result<f64> {
        if !(eta_floor > 0.0) {
            return Err(invalid("eta_floor must be positive"));
        }
        if e < 0.0 {
            // Q2 is positive semidefinite
            return Ok(0.0);
        }
        let m1 = self.solve_m2c(Complex64::new(e, eta_floor), cfg)?.m2c;
        let m2 = self.solve_m2c(Complex64::new(e, 2.0 * eta_floor), cfg)?.m2c;
        Ok(((2.0 * m1.im - m2.im) / PI).max(0.0))
    }
}

fn cast<T: NumCast>(x: f64) -> T {
    T::from(x).expect("f64 is representable")
}
