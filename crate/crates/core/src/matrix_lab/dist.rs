//! Standardized entry laws `q` with `E q = 0`, `E q² = 1`.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rand_distr::{Open01, StandardNormal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{invalid, Error, Result};

/// `E Y²` of the one-sided heavy-tail law with density
/// `e⁴ (4 ln y + 1) / (y⁵ (ln y)²)` on `y > e`, equal to `e² + 2 e⁴ E₁(2)`.
pub const HEAVY_SECOND_MOMENT: f64 = 12.728_810_939_602_845;

/// `sqrt(E Y²)`, the standardizing scale of the heavy-tail law.
pub const HEAVY_SCALE: f64 = 3.567_745_918_588_212;

/// Declared limit of `s⁴ P(|q| ≥ s)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TailClass {
    /// The limit is zero.
    ConditionHolds,
    /// The limit is positive or infinite.
    ConditionFails,
}

#[derive(Debug, Clone, PartialEq)]
pub enum EntryKind {
    Gaussian,
    Rademacher,
    /// Symmetrized law with survival `e⁴ / (y⁴ ln y)` for `y > e`.
    HeavyTail,
    /// One-sided Pareto with `x_m = 1` and exponent `a > 2`.
    Pareto(f64),
    /// Resampling from raw draws, standardized by their sample moments.
    Tabulated(Vec<f64>),
}

/// An entry law together with the affine map `q = (Y - shift) / scale`.
#[derive(Debug, Clone, PartialEq)]
pub struct EntryDistribution {
    kind: EntryKind,
    shift: f64,
    scale: f64,
    tail_class: TailClass,
}

/// `P(|q| ≥ s)` with the standard error of the estimate (0 when exact).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SurvivalEstimate {
    pub p: f64,
    pub std_error: f64,
}

impl EntryDistribution {
    pub fn gaussian() -> Self {
        EntryDistribution { kind: EntryKind::Gaussian, shift: 0.0, scale: 1.0, tail_class: TailClass::ConditionHolds }
    }

    pub fn rademacher() -> Self {
        EntryDistribution { kind: EntryKind::Rademacher, shift: 0.0, scale: 1.0, tail_class: TailClass::ConditionHolds }
    }

    /// Symmetrized `x⁻⁵ (log x)⁻¹`-type law: `s⁴ P(|q| ≥ s) ~ 1 / ln s → 0`,
    /// although the fourth moment is infinite.
    pub fn heavy_tail() -> Self {
        EntryDistribution {
            kind: EntryKind::HeavyTail,
            shift: 0.0,
            scale: HEAVY_SCALE,
            tail_class: TailClass::ConditionHolds,
        }
    }

    pub fn pareto(a: f64) -> Result<Self> {
        if !(a > 2.0 && a.is_finite()) {
            return Err(invalid(format!("pareto exponent {a} must exceed 2 (finite variance)")));
        }
        let mean = a / (a - 1.0);
        let var = a / ((a - 1.0) * (a - 1.0) * (a - 2.0));
        let tail_class = if a > 4.0 { TailClass::ConditionHolds } else { TailClass::ConditionFails };
        Ok(EntryDistribution { kind: EntryKind::Pareto(a), shift: mean, scale: var.sqrt(), tail_class })
    }

    /// Empirical law of `samples`; sampling and survival need at least two
    /// distinct values.
    pub fn tabulated(samples: Vec<f64>) -> Result<Self> {
        if samples.iter().any(|v| !v.is_finite()) {
            return Err(invalid("tabulated samples must be finite"));
        }
        let n = samples.len() as f64;
        let (shift, scale) = if samples.len() >= 2 {
            let mean = samples.iter().sum::<f64>() / n;
            let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
            (mean, var.sqrt())
        } else {
            (0.0, 1.0)
        };
        Ok(EntryDistribution {
            kind: EntryKind::Tabulated(samples),
            shift,
            scale: if scale > 0.0 { scale } else { 1.0 },
            tail_class: TailClass::ConditionHolds,
        })
    }

    pub fn kind(&self) -> &EntryKind {
        &self.kind
    }

    /// `(shift, scale)` with `q = (Y - shift) / scale`.
    pub fn standardization(&self) -> (f64, f64) {
        (self.shift, self.scale)
    }

    pub fn tail_class(&self) -> TailClass {
        self.tail_class
    }

    fn table(&self) -> Result<&[f64]> {
        match &self.kind {
            EntryKind::Tabulated(v) if v.len() >= 2 => Ok(v),
            EntryKind::Tabulated(_) => Err(Error::Unsupported("tabulated law without samples".into())),
            _ => unreachable!("only called for tabulated laws"),
        }
    }

    /// Checks that sampling is possible.
    pub fn ready(&self) -> Result<()> {
        if let EntryKind::Tabulated(_) = self.kind {
            self.table()?;
        }
        Ok(())
    }

    /// One standardized draw. Call [`EntryDistribution::ready`] first for
    /// tabulated laws; an empty table yields NaN.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.kind {
            EntryKind::Gaussian => rng.sample(StandardNormal),
            EntryKind::Rademacher => {
                if rng.random::<bool>() {
                    1.0
                } else {
                    -1.0
                }
            }
            EntryKind::HeavyTail => {
                let u: f64 = rng.sample(Open01);
                let y = heavy_inverse_survival(u);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                sign * y / self.scale
            }
            EntryKind::Pareto(a) => {
                let u: f64 = rng.sample(Open01);
                (u.powf(-1.0 / a) - self.shift) / self.scale
            }
            EntryKind::Tabulated(v) => {
                if v.is_empty() {
                    return f64::NAN;
                }
                let k = rng.random_range(0..v.len());
                (v[k] - self.shift) / self.scale
            }
        }
    }

    /// `P(|q| ≥ s)`: exact for closed-form laws, empirical with standard
    /// error for tabulated ones.
    pub fn survival(&self, s: f64) -> Result<SurvivalEstimate> {
        if !(s >= 0.0) {
            return Err(invalid(format!("survival needs s >= 0, got {s}")));
        }
        let exact = |p: f64| Ok(SurvivalEstimate { p: p.clamp(0.0, 1.0), std_error: 0.0 });
        match &self.kind {
            EntryKind::Gaussian => exact(erfc(s / std::f64::consts::SQRT_2)),
            EntryKind::Rademacher => exact(if s <= 1.0 { 1.0 } else { 0.0 }),
            EntryKind::HeavyTail => exact(heavy_survival(s * self.scale)),
            EntryKind::Pareto(a) => {
                if s == 0.0 {
                    return exact(1.0);
                }
                let upper = pareto_upper(*a, self.shift + s * self.scale);
                let lo = self.shift - s * self.scale;
                let lower = if lo > 1.0 { 1.0 - lo.powf(-a) } else { 0.0 };
                exact(upper + lower)
            }
            EntryKind::Tabulated(_) => {
                let v = self.table()?;
                let n = v.len() as f64;
                let hits = v.iter().filter(|&&y| ((y - self.shift) / self.scale).abs() >= s).count() as f64;
                let p = hits / n;
                Ok(SurvivalEstimate { p, std_error: (p * (1.0 - p) / n).sqrt() })
            }
        }
    }

    /// `(s, s⁴ P(|q| ≥ s))` on an increasing positive grid.
    pub fn tail_condition_estimate(&self, s_grid: &[f64]) -> Result<Vec<(f64, f64)>> {
        if s_grid.iter().any(|&s| !(s > 0.0)) || s_grid.windows(2).any(|w| w[1] <= w[0]) {
            return Err(invalid("tail grid must be positive and increasing"));
        }
        s_grid.iter().map(|&s| Ok((s, s.powi(4) * self.survival(s)?.p))).collect()
    }

    /// `α = P(|q| > t)` and `β = E[q 1(|q| > t)]`.
    pub fn alpha_beta(&self, t: f64) -> Result<(f64, f64)> {
        if !(t > 0.0) {
            return Err(invalid("cutoff threshold must be positive"));
        }
        match &self.kind {
            EntryKind::Gaussian | EntryKind::Rademacher | EntryKind::HeavyTail => {
                // symmetric laws; survival is continuous except for Rademacher at 1
                let alpha = match self.kind {
                    EntryKind::Rademacher => {
                        if t < 1.0 {
                            1.0
                        } else {
                            0.0
                        }
                    }
                    _ => self.survival(t)?.p,
                };
                Ok((alpha, 0.0))
            }
            EntryKind::Pareto(a) => {
                let a = *a;
                let (mu, sd) = (self.shift, self.scale);
                let hi = (mu + t * sd).max(1.0);
                let lo = mu - t * sd;
                // E[(Y - μ) 1(y1 < Y < y2)] for 1 <= y1 < y2 <= ∞
                let partial = |y1: f64, y2: f64| {
                    let p = |y: f64| if y.is_infinite() { 0.0 } else { y.powf(1.0 - a) };
                    let q = |y: f64| if y.is_infinite() { 0.0 } else { y.powf(-a) };
                    a / (a - 1.0) * (p(y1) - p(y2)) - mu * (q(y1) - q(y2))
                };
                let mut alpha = pareto_upper(a, hi);
                let mut moment = partial(hi, f64::INFINITY);
                if lo > 1.0 {
                    alpha += 1.0 - lo.powf(-a);
                    moment += partial(1.0, lo);
                }
                Ok((alpha, moment / sd))
            }
            EntryKind::Tabulated(_) => Err(Error::QuadratureFailure(
                "cutoff moments need a closed-form law; tabulated laws are not integrable".into(),
            )),
        }
    }
}

fn pareto_upper(a: f64, y: f64) -> f64 {
    if y <= 1.0 {
        1.0
    } else {
        y.powf(-a)
    }
}

/// `S(y) = e⁴ / (y⁴ ln y)` for `y > e`, 1 below.
pub fn heavy_survival(y: f64) -> f64 {
    if y <= std::f64::consts::E {
        1.0
    } else {
        (4.0 - 4.0 * y.ln() - y.ln().ln()).exp()
    }
}

/// Solves `S(y) = u` for `y ≥ e`; Newton on `t = ln y`, `4t + ln t = 4 - ln u`.
pub fn heavy_inverse_survival(u: f64) -> f64 {
    let c = 4.0 - u.ln();
    let mut t = c / 4.0;
    for _ in 0..50 {
        let g = 4.0 * t + t.ln() - c;
        let step = g / (4.0 + 1.0 / t);
        t -= step;
        if step.abs() <= 1e-15 * t {
            break;
        }
    }
    t.exp()
}

impl fmt::Display for EntryDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            EntryKind::Gaussian => write!(f, "gaussian"),
            EntryKind::Rademacher => write!(f, "rademacher"),
            EntryKind::HeavyTail => write!(f, "heavy"),
            EntryKind::Pareto(a) => write!(f, "pareto:{a}"),
            EntryKind::Tabulated(v) => write!(f, "tabulated({} samples)", v.len()),
        }
    }
}

impl FromStr for EntryDistribution {
    type Err = Error;

    /// `gaussian | rademacher | heavy | pareto:a`.
    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "gaussian" => Ok(Self::gaussian()),
            "rademacher" => Ok(Self::rademacher()),
            "heavy" => Ok(Self::heavy_tail()),
            other => match other.strip_prefix("pareto:") {
                Some(a) => {
                    let a: f64 = a.parse().map_err(|_| invalid(format!("bad pareto exponent '{a}'")))?;
                    Self::pareto(a)
                }
                None => Err(invalid(format!(
                    "unknown distribution '{other}' (expected gaussian | rademacher | heavy | pareto:a)"
                ))),
            },
        }
    }
}

impl Serialize for EntryDistribution {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for EntryDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::AdaptiveGl;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn moments(dist: &EntryDistribution, n: usize, seed: u64) -> (f64, f64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..n).map(|_| dist.sample(&mut rng)).collect();
        let mean = v.iter().sum::<f64>() / n as f64;
        let var = v.iter().map(|x| x * x).sum::<f64>() / n as f64;
        (mean, var)
    }

    #[test]
    fn heavy_second_moment_by_quadrature() {
        // y = e^t: E Y² = e⁴ ∫_1^∞ e^{-2t} (4t + 1) / t² dt
        let e4 = std::f64::consts::E.powi(4);
        let quad = AdaptiveGl::new(1e-14);
        let integral = quad
            .integrate(|t| Ok((-2.0 * t).exp() * (4.0 * t + 1.0) / (t * t)), 1.0, 40.0)
            .unwrap();
        assert!((e4 * integral - HEAVY_SECOND_MOMENT).abs() <= 1e-12 * HEAVY_SECOND_MOMENT);
        assert!((HEAVY_SCALE * HEAVY_SCALE - HEAVY_SECOND_MOMENT).abs() <= 1e-13);
    }

    #[test]
    fn standardized_moments() {
        let n = 400_000;
        for (dist, seed) in [
            (EntryDistribution::gaussian(), 1),
            (EntryDistribution::rademacher(), 2),
            (EntryDistribution::pareto(5.0).unwrap(), 3),
            (EntryDistribution::tabulated(vec![1.0, 2.0, 7.0, 3.0]).unwrap(), 4),
        ] {
            let (mean, var) = moments(&dist, n, seed);
            let tol = 4.0 / (n as f64).sqrt();
            assert!(mean.abs() <= tol, "{dist}: mean {mean}");
            // heavier tails make the variance estimate noisier
            assert!((var - 1.0).abs() <= 10.0 * tol, "{dist}: var {var}");
        }
        // infinite fourth moment: only check the mean and the variance loosely
        let (mean, var) = moments(&EntryDistribution::heavy_tail(), n, 5);
        assert!(mean.abs() <= 4.0 / (n as f64).sqrt());
        assert!((var - 1.0).abs() <= 0.1);
    }

    #[test]
    fn heavy_raw_tail_frequency() {
        // P(Y > e²) = 1 / (2 e⁴)
        let n = 1_000_000;
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        let e2 = std::f64::consts::E.powi(2);
        let hits = (0..n)
            .filter(|_| heavy_inverse_survival(rng.sample(Open01)) > e2)
            .count() as f64;
        let p = 0.5 / std::f64::consts::E.powi(4);
        let se = (p * (1.0 - p) / n as f64).sqrt();
        assert!((hits / n as f64 - p).abs() <= 3.0 * se);
        assert!((heavy_survival(e2) - p).abs() <= 1e-15);
        for u in [1e-12, 1e-3, 0.3, 0.999] {
            assert!((heavy_survival(heavy_inverse_survival(u)) - u).abs() <= 1e-12 * u);
        }
    }

    #[test]
    fn survival_examples() {
        assert_eq!(EntryDistribution::gaussian().survival(0.0).unwrap().p, 1.0);
        assert_eq!(EntryDistribution::rademacher().survival(1.5).unwrap().p, 0.0);
        let h = EntryDistribution::heavy_tail();
        let e2 = std::f64::consts::E.powi(2);
        let p = h.survival(e2 / HEAVY_SCALE).unwrap().p;
        assert!((p - 0.5 / std::f64::consts::E.powi(4)).abs() <= 1e-15);
        let empty = EntryDistribution::tabulated(vec![]).unwrap();
        assert!(matches!(empty.survival(1.0), Err(Error::Unsupported(_))));
        assert!(matches!(empty.ready(), Err(Error::Unsupported(_))));
    }

    #[test]
    fn tail_condition_diagnostics() {
        let h = EntryDistribution::heavy_tail();
        let grid: Vec<f64> = (0..30).map(|k| 10f64.powf(1.0 + 3.0 * k as f64 / 29.0)).collect();
        let v = h.tail_condition_estimate(&grid).unwrap();
        assert!(v.windows(2).all(|w| w[1].1 < w[0].1));

        let p4 = EntryDistribution::pareto(4.0).unwrap();
        let v = p4.tail_condition_estimate(&[1e3, 1e4, 1e5]).unwrap();
        let (lo, hi) = (v[0].1.min(v[2].1), v[0].1.max(v[2].1));
        assert!(lo > 0.0 && hi / lo < 1.02);

        let g = EntryDistribution::gaussian().tail_condition_estimate(&[8.0]).unwrap();
        assert!(g[0].1 < 1e-6);

        // analytic s^{4-3.5} growth, and the same trend in samples
        let p35 = EntryDistribution::pareto(3.5).unwrap();
        let grid: Vec<f64> = (0..10).map(|k| 5.0 + 5.0 * k as f64).collect();
        let v = p35.tail_condition_estimate(&grid).unwrap();
        assert!(v.windows(2).all(|w| w[1].1 > w[0].1));
        assert_eq!(p35.tail_class(), TailClass::ConditionFails);
        assert_eq!(EntryDistribution::pareto(4.5).unwrap().tail_class(), TailClass::ConditionHolds);
    }

    #[test]
    fn pareto_alpha_beta_against_quadrature() {
        let d = EntryDistribution::pareto(3.0).unwrap();
        let (mu, sd) = d.standardization();
        for t in [0.5, 2.0, 10.0] {
            let (alpha, beta) = d.alpha_beta(t).unwrap();
            // integrate the density of Y over |Y - μ| > t sd, in u = 1/Y
            let quad = AdaptiveGl::new(1e-13);
            let mut a_num = 0.0;
            let mut b_num = 0.0;
            let cut_hi = mu + t * sd;
            let cut_lo = mu - t * sd;
            // Y > cut_hi ⇔ u < 1/cut_hi; density of u is 3 u²
            a_num += quad.integrate(|u| Ok(3.0 * u * u), 0.0, 1.0 / cut_hi).unwrap();
            b_num += quad.integrate(|u| Ok(3.0 * u * u * (1.0 / u - mu) / sd), 0.0, 1.0 / cut_hi).unwrap();
            if cut_lo > 1.0 {
                a_num += quad.integrate(|u| Ok(3.0 * u * u), 1.0 / cut_lo, 1.0).unwrap();
                b_num += quad.integrate(|u| Ok(3.0 * u * u * (1.0 / u - mu) / sd), 1.0 / cut_lo, 1.0).unwrap();
            }
            assert!((alpha - a_num).abs() <= 1e-12, "t = {t}: {alpha} vs {a_num}");
            assert!((beta - b_num).abs() <= 1e-12, "t = {t}: {beta} vs {b_num}");
        }
        assert!(EntryDistribution::pareto(2.0).is_err());
        assert!(matches!(
            EntryDistribution::tabulated(vec![1.0, 2.0]).unwrap().alpha_beta(1.0),
            Err(Error::QuadratureFailure(_))
        ));
        let (alpha, beta) = EntryDistribution::gaussian().alpha_beta(400f64.powf(0.4)).unwrap();
        assert!(alpha < 1e-15 && beta == 0.0);
    }

    #[test]
    fn parse_round_trip() {
        for s in ["gaussian", "rademacher", "heavy", "pareto:3.5"] {
            let d: EntryDistribution = s.parse().unwrap();
            assert_eq!(d.to_string(), s);
        }
        assert!("cauchy".parse::<EntryDistribution>().is_err());
        assert!("pareto:1.5".parse::<EntryDistribution>().is_err());
        assert!("pareto:x".parse::<EntryDistribution>().is_err());
    }
}
