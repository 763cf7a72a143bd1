use serde::Serialize;

use super::model::DeformedMp;
use crate::error::{Error, Result};

/// A real critical point of `f`: `f'(b) = 0`, `a = f(b)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalPoint {
    pub a: f64,
    pub b: f64,
}

/// Support of `ρ_2c` as a union of disjoint closed intervals.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SupportAtlas {
    /// `(lo, hi)` pairs, ascending.
    pub intervals: Vec<(f64, f64)>,
    /// Every real root of `f'`, ordered by `b`.
    pub critical_points: Vec<CriticalPoint>,
    /// Set when two components closer than the merge gap were fused.
    pub merged: bool,
}

impl SupportAtlas {
    /// Rightmost edge `λ_r`.
    pub fn right_edge(&self) -> f64 {
        self.intervals.last().map(|iv| iv.1).unwrap_or(f64::NAN)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= x && x <= hi)
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ScanConfig {
    /// Grid points per pole-free subinterval are `factor * (distinct σ + 2)`.
    pub points_factor: usize,
    pub merge_gap: f64,
}

impl Default for ScanConfig {
    fn default() -> Self {
        ScanConfig { points_factor: 200, merge_gap: 1e-8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum End {
    NegInf,
    PosInf,
    /// The pole `-1/σ`.
    Pole(f64),
    Zero,
}

impl End {
    fn position(self) -> f64 {
        match self {
            End::NegInf => f64::NEG_INFINITY,
            End::PosInf => f64::INFINITY,
            End::Pole(p) => p,
            End::Zero => 0.0,
        }
    }
}

impl DeformedMp {
    /// Sign of `f'` as `m → ±∞`.
    fn sign_at_infinity(&self, positive: bool) -> f64 {
        let c = 1.0 - self.positive_mass() / self.d();
        if c.abs() > 1e-9 {
            c.signum()
        } else if positive {
            1.0
        } else {
            -1.0
        }
    }

    /// Sign of `f'` next to an end; poles give `-∞`, zero gives `+∞`.
    fn limit_sign(&self, end: End) -> f64 {
        match end {
            End::NegInf => self.sign_at_infinity(false),
            End::PosInf => self.sign_at_infinity(true),
            End::Pole(_) => -1.0,
            End::Zero => 1.0,
        }
    }

    /// Limit of `f` at an end of a pole-free subinterval.
    fn limit_value(&self, end: End, is_left: bool) -> f64 {
        match end {
            End::NegInf | End::PosInf => 0.0,
            // right of a pole f → +∞, left of it f → -∞
            End::Pole(_) => {
                if is_left {
                    f64::INFINITY
                } else {
                    f64::NEG_INFINITY
                }
            }
            // f ~ -1/m: +∞ approaching 0 from the left, -∞ from the right
            End::Zero => {
                if is_left {
                    f64::NEG_INFINITY
                } else {
                    f64::INFINITY
                }
            }
        }
    }

    fn scan_grid(&self, lo: End, hi: End, n: usize) -> Vec<f64> {
        let scale = 1.0 / self.sigma_max();
        let logspace = |k: usize| -> Vec<f64> {
            (0..k).map(|i| 10f64.powf(-10.0 + 20.0 * i as f64 / (k - 1) as f64)).collect()
        };
        let mut g: Vec<f64> = match (lo, hi) {
            (End::NegInf, h) => {
                let p = h.position();
                logspace(n).into_iter().map(|t| p - t * p.abs().max(scale)).collect()
            }
            (l, End::PosInf) => {
                let p = l.position();
                logspace(n).into_iter().map(|t| p + t * scale).collect()
            }
            (l, h) => {
                let (a, b) = (l.position(), h.position());
                let w = b - a;
                let mut v: Vec<f64> = (1..n - 1)
                    .map(|i| {
                        let t = i as f64 / (n - 1) as f64;
                        a + w * 0.5 * (1.0 - (std::f64::consts::PI * t).cos())
                    })
                    .collect();
                for k in 2..=10 {
                    let off = w * 10f64.powi(-k);
                    v.push(a + off);
                    v.push(b - off);
                }
                v
            }
        };
        g.sort_by(f64::total_cmp);
        g.dedup();
        g.retain(|&m| m > lo.position() && m < hi.position());
        g
    }

    fn bisect_root(&self, mut lo: f64, mut hi: f64) -> f64 {
        let mut flo = self.f_prime_unchecked(lo);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = self.f_prime_unchecked(mid);
            if fm == 0.0 {
                return mid;
            }
            if (fm > 0.0) == (flo > 0.0) {
                lo = mid;
                flo = fm;
            } else {
                hi = mid;
            }
        }
        let mut b = 0.5 * (lo + hi);
        // one Newton polish on f' using f''
        let fpp = self.f_second_real(b);
        if fpp != 0.0 {
            let cand = b - self.f_prime_unchecked(b) / fpp;
            if cand > lo && cand < hi {
                b = cand;
            }
        }
        b
    }

    /// Finds all real roots of `f'` by sign scan plus bisection on each
    /// pole-free subinterval, and assembles the support of `ρ_2c` as the
    /// complement of the images `f(I)` of the intervals where `f' > 0`.
    pub fn support_edges(&self, cfg: &ScanConfig) -> Result<SupportAtlas> {
        let mut poles: Vec<f64> = self
            .atoms()
            .iter()
            .filter(|a| a.sigma > 0.0)
            .map(|a| -1.0 / a.sigma)
            .collect();
        poles.sort_by(f64::total_cmp);
        poles.dedup();

        let mut ends = vec![End::NegInf];
        ends.extend(poles.iter().map(|&p| End::Pole(p)));
        ends.push(End::Zero);
        ends.push(End::PosInf);

        let n_grid = cfg.points_factor * (poles.len() + 2);
        let mut critical = Vec::new();
        let mut excluded: Vec<(f64, f64)> = Vec::new();

        for w in ends.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let grid = self.scan_grid(lo, hi, n_grid);
            let signs: Vec<f64> = grid.iter().map(|&m| self.f_prime_unchecked(m).signum()).collect();
            let first = self.limit_sign(lo);
            let last = self.limit_sign(hi);
            let err = || Error::RootScanIncomplete { lo: lo.position(), hi: hi.position() };
            if signs.is_empty() || signs[0] != first || *signs.last().unwrap() != last {
                return Err(err());
            }
            let mut roots = Vec::new();
            for i in 0..grid.len() - 1 {
                if signs[i] != signs[i + 1] {
                    roots.push(self.bisect_root(grid[i], grid[i + 1]));
                }
            }
            if (roots.len() % 2 == 1) != (first != last) {
                return Err(err());
            }

            let mut piece_sign = first;
            let mut left_val = self.limit_value(lo, true);
            for k in 0..=roots.len() {
                let right_val = if k < roots.len() {
                    self.f_unchecked(roots[k])
                } else {
                    self.limit_value(hi, false)
                };
                if piece_sign > 0.0 && right_val > left_val {
                    excluded.push((left_val, right_val));
                }
                left_val = right_val;
                piece_sign = -piece_sign;
            }
            critical.extend(roots.iter().map(|&b| CriticalPoint { a: self.f_unchecked(b), b }));
        }

        excluded.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut union: Vec<(f64, f64)> = Vec::new();
        for (lo, hi) in excluded {
            match union.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => union.push((lo, hi)),
            }
        }
        let scale = self.support_bound();
        let mut intervals: Vec<(f64, f64)> = union
            .windows(2)
            .map(|w| (w[0].1.max(0.0), w[1].0))
            .filter(|&(lo, hi)| hi - lo > 1e-12 * scale)
            .collect();

        let mut merged = false;
        let mut fused: Vec<(f64, f64)> = Vec::new();
        for iv in intervals.drain(..) {
            match fused.last_mut() {
                Some(last) if iv.0 - last.1 < cfg.merge_gap => {
                    last.1 = iv.1;
                    merged = true;
                }
                _ => fused.push(iv),
            }
        }
        if fused.is_empty() {
            return Err(Error::RootScanIncomplete { lo: f64::NEG_INFINITY, hi: f64::INFINITY });
        }
        critical.sort_by(|x, y| x.b.total_cmp(&y.b));
        Ok(SupportAtlas { intervals: fused, critical_points: critical, merged })
    }
}
