//! Gauss-Legendre rules and an adaptive integrator built on them.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Nodes and weights of the `n`-point Gauss-Legendre rule on `[-1, 1]`,
/// nodes in increasing order.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi's initial guess, then Newton on P_n.
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() <= 1e-16 * x.abs().max(1.0) {
                let (_, d) = legendre_with_derivative(n, x);
                dp = d;
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (nodes, weights)
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// A Gauss-Legendre rule mapped onto `[a, b]`.
#[derive(Debug, Clone)]
pub struct MappedRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl MappedRule {
    pub fn new(n: usize, a: f64, b: f64) -> Self {
        let (x, w) = gauss_legendre(n);
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        MappedRule {
            nodes: x.iter().map(|t| mid + half * t).collect(),
            weights: w.iter().map(|wi| half * wi).collect(),
        }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

/// Adaptive integrator: each panel is estimated with a 10- and a 20-point
/// Gauss-Legendre rule and bisected until the two agree.
pub struct AdaptiveGl {
    coarse: (Vec<f64>, Vec<f64>),
    fine: (Vec<f64>, Vec<f64>),
    pub abs_tol: f64,
    pub max_depth: usize,
}

impl Default for AdaptiveGl {
    fn default() -> Self {
        AdaptiveGl::new(1e-12)
    }
}

impl AdaptiveGl {
    pub fn new(abs_tol: f64) -> Self {
        AdaptiveGl {
            coarse: gauss_legendre(10),
            fine: gauss_legendre(20),
            abs_tol,
            max_depth: 40,
        }
    }

    fn panel<F: FnMut(f64) -> Result<f64>>(
        rule: &(Vec<f64>, Vec<f64>),
        f: &mut F,
        a: f64,
        b: f64,
    ) -> Result<f64> {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut s = 0.0;
        for (x, w) in rule.0.iter().zip(&rule.1) {
            s += w * f(mid + half * x)?;
        }
        Ok(half * s)
    }

    /// Integrates `f` over `[a, b]`; `f` may fail, in which case the error
    /// is propagated.
    pub fn integrate<F: FnMut(f64) -> Result<f64>>(&self, mut f: F, a: f64, b: f64) -> Result<f64> {
        if a == b {
            return Ok(0.0);
        }
        let total_len = (b - a).abs();
        let mut stack = vec![(a, b, 0usize)];
        let mut sum = 0.0;
        while let Some((lo, hi, depth)) = stack.pop() {
            let coarse = Self::panel(&self.coarse, &mut f, lo, hi)?;
            let fine = Self::panel(&self.fine, &mut f, lo, hi)?;
            let budget = self.abs_tol * ((hi - lo).abs() / total_len).max(1e-3);
            if (fine - coarse).abs() <= budget || (hi - lo).abs() < 1e-15 * total_len {
                sum += fine;
            } else if depth >= self.max_depth {
                return Err(Error::QuadratureFailure(format!(
                    "panel [{lo}, {hi}] did not settle (|fine - coarse| = {:e})",
                    (fine - coarse).abs()
                )));
            } else {
                let mid = 0.5 * (lo + hi);
                stack.push((mid, hi, depth + 1));
                stack.push((lo, mid, depth + 1));
            }
        }
        Ok(sum)
    }
}
