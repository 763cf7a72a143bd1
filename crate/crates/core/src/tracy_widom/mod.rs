//! Tracy-Widom distribution functions via Fredholm determinants.
//!
//! `F2(s) = det(I - K_Ai)` on `L²(s, ∞)` and `F1(s) = det(I - A_s)` with
//! `A_s(x, y) = Ai((x + y)/2) / 2` on the same half-line. Both operators are
//! discretized with a Gauss-Legendre rule on `(s, s + span)` (Nyström
//! method); the determinant of `I - √w K √w` is taken by LU with partial
//! pivoting.

mod airy;
mod table;

use serde::{Deserialize, Serialize};

pub use airy::{airy_ai, airy_ai_prime, airy_pair};
pub use table::TwTable;

use crate::error::{invalid, Error, Result};
use crate::quadrature::gauss_legendre;

/// Default number of quadrature nodes.
pub const DEFAULT_NODES: usize = 128;
/// Truncation length of the half-line; kernel entries beyond are negligible.
pub const DEFAULT_SPAN: f64 = 30.0;
/// Maximum change allowed when the node count is doubled.
pub const RESOLUTION_TOL: f64 = 1e-6;

/// Symmetry class of the limit law.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub enum TwOrder {
    /// GOE, `F1`.
    One,
    /// GUE, `F2`.
    Two,
}

impl TwOrder {
    pub fn new(beta: u8) -> Result<Self> {
        match beta {
            1 => Ok(TwOrder::One),
            2 => Ok(TwOrder::Two),
            other => Err(invalid(format!("Tracy-Widom order must be 1 or 2, got {other}"))),
        }
    }

    pub fn beta(self) -> u8 {
        match self {
            TwOrder::One => 1,
            TwOrder::Two => 2,
        }
    }
}

impl TryFrom<u8> for TwOrder {
    type Error = Error;
    fn try_from(beta: u8) -> Result<Self> {
        TwOrder::new(beta)
    }
}

impl From<TwOrder> for u8 {
    fn from(o: TwOrder) -> u8 {
        o.beta()
    }
}

/// Gauss-Legendre rule for `(s, s + span)`, stored on `[-1, 1]` and mapped
/// per evaluation point.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    n_nodes: usize,
    span: f64,
    reference: (Vec<f64>, Vec<f64>),
}

impl QuadratureGrid {
    pub fn new(n_nodes: usize, span: f64) -> Result<Self> {
        if n_nodes < 2 {
            return Err(invalid("quadrature grid needs at least 2 nodes"));
        }
        if !(span > 0.0 && span.is_finite()) {
            return Err(invalid("quadrature span must be positive and finite"));
        }
        Ok(QuadratureGrid { n_nodes, span, reference: gauss_legendre(n_nodes) })
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn span(&self) -> f64 {
        self.span
    }

    /// The same grid with twice as many nodes.
    pub fn doubled(&self) -> QuadratureGrid {
        QuadratureGrid::new(2 * self.n_nodes, self.span).expect("doubling a valid grid")
    }

    /// Nodes (strictly increasing inside `(s, s + span)`) and positive weights.
    pub fn mapped(&self, s: f64) -> (Vec<f64>, Vec<f64>) {
        let half = 0.5 * self.span;
        let mid = s + half;
        let (x, w) = &self.reference;
        (x.iter().map(|t| mid + half * t).collect(), w.iter().map(|wi| half * wi).collect())
    }
}

impl Default for QuadratureGrid {
    fn default() -> Self {
        QuadratureGrid::new(DEFAULT_NODES, DEFAULT_SPAN).expect("default grid")
    }
}

fn airy_kernel(x: f64, y: f64, ax: (f64, f64), ay: (f64, f64)) -> f64 {
    let d = x - y;
    if d.abs() < 1e-10 {
        // limit Ai'(x)² - x Ai(x)², averaged over the pair
        let m = 0.5 * (x + y);
        let (a, ap) = airy_pair(m);
        ap * ap - m * a * a
    } else {
        (ax.0 * ay.1 - ax.1 * ay.0) / d
    }
}

/// `I - √w K √w` for the kernel of `order`, row-major.
fn nystrom_matrix(s: f64, order: TwOrder, grid: &QuadratureGrid) -> Vec<f64> {
    let (x, w) = grid.mapped(s);
    let n = x.len();
    let sw: Vec<f64> = w.iter().map(|v| v.sqrt()).collect();
    let mut a = vec![0.0; n * n];
    match order {
        TwOrder::Two => {
            let ai: Vec<(f64, f64)> = x.iter().map(|&xi| airy_pair(xi)).collect();
            for i in 0..n {
                for j in 0..=i {
                    let k = sw[i] * sw[j] * airy_kernel(x[i], x[j], ai[i], ai[j]);
                    a[i * n + j] = -k;
                    a[j * n + i] = -k;
                }
            }
        }
        TwOrder::One => {
            for i in 0..n {
                for j in 0..=i {
                    let k = sw[i] * sw[j] * 0.5 * airy_ai(0.5 * (x[i] + x[j]));
                    a[i * n + j] = -k;
                    a[j * n + i] = -k;
                }
            }
        }
    }
    for i in 0..n {
        a[i * n + i] += 1.0;
    }
    a
}

/// Determinant of a dense row-major `n × n` matrix by LU with partial pivoting.
pub(crate) fn lu_determinant(mut a: Vec<f64>, n: usize) -> f64 {
    let mut det = 1.0;
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&p, &q| a[p * n + col].abs().total_cmp(&a[q * n + col].abs()))
            .unwrap_or(col);
        let pv = a[pivot * n + col];
        if pv == 0.0 {
            return 0.0;
        }
        if pivot != col {
            for k in 0..n {
                a.swap(col * n + k, pivot * n + k);
            }
            det = -det;
        }
        det *= pv;
        for r in col + 1..n {
            let factor = a[r * n + col] / pv;
            if factor != 0.0 {
                for k in col + 1..n {
                    a[r * n + k] -= factor * a[col * n + k];
                }
            }
        }
    }
    det
}

/// Fredholm determinant on a single grid, clamped to `[0, 1]`, without the
/// resolution check.
pub fn tw_cdf_on(s: f64, order: TwOrder, grid: &QuadratureGrid) -> f64 {
    if s.is_nan() {
        return f64::NAN;
    }
    let n = grid.n_nodes();
    lu_determinant(nystrom_matrix(s, order, grid), n).clamp(0.0, 1.0)
}

/// `F_β(s)`. The value on the doubled grid is returned; `GridTooCoarse` is
/// raised when it differs from the value on `grid` by more than 1e-6.
pub fn tw_cdf(s: f64, order: TwOrder, grid: &QuadratureGrid) -> Result<f64> {
    if !s.is_finite() {
        return Err(invalid(format!("s = {s} is not finite")));
    }
    let coarse = tw_cdf_on(s, order, grid);
    let fine = tw_cdf_on(s, order, &grid.doubled());
    let change = (fine - coarse).abs();
    if change > RESOLUTION_TOL {
        return Err(Error::GridTooCoarse { change });
    }
    Ok(fine)
}

/// Lower and upper end of the quantile bracket.
pub const QUANTILE_BRACKET: (f64, f64) = (-12.0, 10.0);

/// `s` with `F_β(s) = p`, by bisection on `[-12, 10]`.
pub fn tw_quantile(p: f64, order: TwOrder, grid: &QuadratureGrid) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(invalid(format!("quantile level p = {p} must lie in (0, 1)")));
    }
    let (mut lo, mut hi) = QUANTILE_BRACKET;
    let f_lo = tw_cdf_on(lo, order, grid);
    let f_hi = tw_cdf_on(hi, order, grid);
    if p <= f_lo {
        return Ok(lo);
    }
    if p >= f_hi {
        return Ok(hi);
    }
    while hi - lo > 1e-11 {
        let mid = 0.5 * (lo + hi);
        let f = tw_cdf_on(mid, order, grid);
        if (f - p).abs() <= 1e-10 {
            lo = mid;
            hi = mid;
            break;
        }
        if f < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let s = 0.5 * (lo + hi);
    // resolution check at the answer
    tw_cdf(s, order, grid)?;
    Ok(s)
}
