//! The resolvent `G(z)` of the linearization, built from the SVD of `D X`.
//!
//! `G = [[-I, D X], [(D X)*, -z I]]⁻¹` has blocks
//! `z 𝒢1`, `𝒢1 D X`, `X* D* 𝒢1`, `𝒢2`. With `D X = Σ_k sqrt(λ_k) ξ_k ζ_k*`
//! (thin SVD, `r = min(M, N)` terms) and the completeness of `{ξ_k}`,
//! `{ζ_k}`:
//!
//! - `G_ij = Σ_k λ_k/(λ_k - z) ξ_k(i) ξ_k(j) - δ_ij`
//! - `G_μν = Σ_k (1/(λ_k - z) + 1/z) ζ_k(μ) ζ_k(ν) - δ_μν / z`
//! - `G_iμ = G_μi = Σ_k sqrt(λ_k)/(λ_k - z) ξ_k(i) ζ_k(μ)`
//!
//! Indices `0..M` address `I1`, `M..M+N` address `I2`.

use num_complex::Complex64;

use super::dense::{svd, Mat};
use super::sample::{CovarianceModel, SampleMatrix};
use crate::error::{invalid, Result};

/// Which parts of `G` to materialize.
#[derive(Debug, Clone, PartialEq)]
pub enum GreenBlocks {
    /// Only `m1`, `m2`.
    Traces,
    /// Selected entries `(a, b)`.
    Entries(Vec<(usize, usize)>),
    /// The whole `(M+N) × (M+N)` matrix.
    Full,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GreenEvaluation {
    pub z: Complex64,
    /// `(1/(M z)) Σ_i G_ii`.
    pub m1: Complex64,
    /// `(1/N) Σ_μ G_μμ`.
    pub m2: Complex64,
    /// Requested entries in request order.
    pub entries: Vec<((usize, usize), Complex64)>,
    /// Row-major full matrix when requested.
    pub full: Option<Vec<Complex64>>,
    pub dim: usize,
}

impl GreenEvaluation {
    /// Entry of the full matrix; panics if `Full` was not requested.
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.full.as_ref().expect("full matrix was not requested")[a * self.dim + b]
    }
}

/// Spectral data of `D X` from which `G(z)` is evaluated at any `z`.
#[derive(Debug, Clone)]
pub struct Resolvent {
    m: usize,
    n: usize,
    lambdas: Vec<f64>,
    /// `M × r`
    xi: Mat,
    /// `N × r`
    zeta: Mat,
}

impl Resolvent {
    pub fn new(model: &CovarianceModel, x: &SampleMatrix) -> Result<Self> {
        let b = model.apply(x)?;
        let s = svd(&b, true)?;
        Ok(Resolvent {
            m: b.rows(),
            n: b.cols(),
            lambdas: s.singular_values.iter().map(|v| v * v).collect(),
            xi: s.u.expect("vectors requested"),
            zeta: s.v.expect("vectors requested"),
        })
    }

    pub fn dim(&self) -> usize {
        self.m + self.n
    }

    /// Eigenvalues of `Q1` (nonzero part), descending.
    pub fn eigenvalues(&self) -> &[f64] {
        &self.lambdas
    }

    pub fn m1(&self, z: Complex64) -> Complex64 {
        let r = self.lambdas.len();
        let sum: Complex64 = self.lambdas.iter().map(|&l| 1.0 / (l - z)).sum();
        (sum - (self.m - r) as f64 / z) / self.m as f64
    }

    pub fn m2(&self, z: Complex64) -> Complex64 {
        let r = self.lambdas.len();
        let sum: Complex64 = self.lambdas.iter().map(|&l| 1.0 / (l - z)).sum();
        (sum - (self.n - r) as f64 / z) / self.n as f64
    }

    /// Per-mode weights for the three block types.
    fn weights(&self, z: Complex64) -> [Vec<Complex64>; 3] {
        let w11 = self.lambdas.iter().map(|&l| l / (l - z)).collect();
        let w22 = self.lambdas.iter().map(|&l| 1.0 / (l - z) + 1.0 / z).collect();
        let w12 = self.lambdas.iter().map(|&l| l.sqrt() / (l - z)).collect();
        [w11, w22, w12]
    }

    fn entry_with(&self, w: &[Vec<Complex64>; 3], z: Complex64, a: usize, b: usize) -> Complex64 {
        let m = self.m;
        let r = self.lambdas.len();
        let sum = |wk: &[Complex64], p: &Mat, i: usize, q: &Mat, j: usize| -> Complex64 {
            (0..r).map(|k| wk[k] * (p[(i, k)] * q[(j, k)])).sum()
        };
        match (a < m, b < m) {
            (true, true) => sum(&w[0], &self.xi, a, &self.xi, b) - if a == b { 1.0 } else { 0.0 },
            (false, false) => {
                let (mu, nu) = (a - m, b - m);
                sum(&w[1], &self.zeta, mu, &self.zeta, nu) - if mu == nu { 1.0 / z } else { Complex64::new(0.0, 0.0) }
            }
            (true, false) => sum(&w[2], &self.xi, a, &self.zeta, b - m),
            (false, true) => sum(&w[2], &self.xi, b, &self.zeta, a - m),
        }
    }

    /// A single entry `G_ab(z)`.
    pub fn entry(&self, z: Complex64, a: usize, b: usize) -> Complex64 {
        self.entry_with(&self.weights(z), z, a, b)
    }

    pub fn evaluate(&self, z: Complex64, blocks: &GreenBlocks) -> Result<GreenEvaluation> {
        if !(z.im > 0.0) {
            return Err(invalid(format!("Green function needs Im z > 0, got {z}")));
        }
        let dim = self.dim();
        let w = self.weights(z);
        let mut out = GreenEvaluation {
            z,
            m1: self.m1(z),
            m2: self.m2(z),
            entries: Vec::new(),
            full: None,
            dim,
        };
        match blocks {
            GreenBlocks::Traces => {}
            GreenBlocks::Entries(list) => {
                for &(a, b) in list {
                    if a >= dim || b >= dim {
                        return Err(invalid(format!("index ({a}, {b}) outside {dim}x{dim}")));
                    }
                    out.entries.push(((a, b), self.entry_with(&w, z, a, b)));
                }
            }
            GreenBlocks::Full => {
                let r = self.lambdas.len();
                // stack [ξ; ζ] so each block is a weighted Gram product
                let basis = |a: usize| -> Vec<f64> {
                    if a < self.m {
                        (0..r).map(|k| self.xi[(a, k)]).collect()
                    } else {
                        (0..r).map(|k| self.zeta[(a - self.m, k)]).collect()
                    }
                };
                let rows: Vec<Vec<f64>> = (0..dim).map(basis).collect();
                let mut g = vec![Complex64::new(0.0, 0.0); dim * dim];
                for a in 0..dim {
                    for b in a..dim {
                        let wk = match (a < self.m, b < self.m) {
                            (true, true) => &w[0],
                            (false, false) => &w[1],
                            _ => &w[2],
                        };
                        let mut v: Complex64 = (0..r).map(|k| wk[k] * (rows[a][k] * rows[b][k])).sum();
                        if a == b {
                            v -= if a < self.m { Complex64::new(1.0, 0.0) } else { 1.0 / z };
                        }
                        g[a * dim + b] = v;
                        g[b * dim + a] = v;
                    }
                }
                out.full = Some(g);
            }
        }
        Ok(out)
    }
}

/// `G(z)` for the model and sample, with the requested blocks.
pub fn green_function_at(
    model: &CovarianceModel,
    x: &SampleMatrix,
    z: Complex64,
    blocks: &GreenBlocks,
) -> Result<GreenEvaluation> {
    Resolvent::new(model, x)?.evaluate(z, blocks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::deformed_mp::PopulationSpectrum;
    use crate::matrix_lab::dist::EntryDistribution;
    use crate::matrix_lab::sample::sample_entries;
    use nalgebra::DMatrix;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn instance(m: usize, n: usize, seed: u64) -> (CovarianceModel, SampleMatrix) {
        let pop = PopulationSpectrum::two_atom(1.5, 0.7, 0.4, m).unwrap();
        let model = CovarianceModel::new(pop, n).unwrap();
        let x = sample_entries(&EntryDistribution::gaussian(), m, n, seed).unwrap();
        (model, x)
    }

    fn direct_inverse(model: &CovarianceModel, x: &SampleMatrix, z: Complex64) -> DMatrix<Complex64> {
        let b = model.apply(x).unwrap();
        let (m, n) = (b.rows(), b.cols());
        let mut a = DMatrix::<Complex64>::zeros(m + n, m + n);
        for i in 0..m {
            a[(i, i)] = Complex64::new(-1.0, 0.0);
        }
        for j in 0..n {
            a[(m + j, m + j)] = -z;
        }
        for i in 0..m {
            for j in 0..n {
                a[(i, m + j)] = Complex64::new(b[(i, j)], 0.0);
                a[(m + j, i)] = Complex64::new(b[(i, j)], 0.0);
            }
        }
        a.try_inverse().expect("invertible for Im z > 0")
    }

    #[test]
    fn spectral_form_matches_direct_inverse() {
        for &(m, n) in &[(20, 30), (30, 20)] {
            let (model, x) = instance(m, n, 3);
            let res = Resolvent::new(&model, &x).unwrap();
            let z = Complex64::new(0.8, 0.05);
            let g = res.evaluate(z, &GreenBlocks::Full).unwrap();
            let inv = direct_inverse(&model, &x, z);
            let scale = inv.iter().fold(0.0f64, |s, v| s.max(v.norm()));
            for a in 0..m + n {
                for b in 0..m + n {
                    assert!((g.get(a, b) - inv[(a, b)]).norm() <= 1e-10 * scale);
                }
            }
            let e = res.evaluate(z, &GreenBlocks::Entries(vec![(1, m + 2), (m + 2, m + 3)])).unwrap();
            assert!((e.entries[0].1 - inv[(1, m + 2)]).norm() <= 1e-10 * scale);
            assert!((e.entries[1].1 - inv[(m + 2, m + 3)]).norm() <= 1e-10 * scale);
            let m1: Complex64 = (0..m).map(|i| inv[(i, i)]).sum::<Complex64>() / (m as f64 * z);
            let m2: Complex64 = (m..m + n).map(|a| inv[(a, a)]).sum::<Complex64>() / n as f64;
            assert!((g.m1 - m1).norm() <= 1e-10 * m1.norm());
            assert!((g.m2 - m2).norm() <= 1e-10 * m2.norm());
        }
    }

    #[test]
    fn top_left_block_is_scaled_resolvent_of_q1() {
        let (model, x) = instance(20, 30, 9);
        let b = model.apply(&x).unwrap();
        let nb = DMatrix::from_column_slice(20, 30, b.as_slice()).map(|v| Complex64::new(v, 0.0));
        let z = Complex64::new(1.3, 0.2);
        let q1 = &nb * nb.transpose() - DMatrix::<Complex64>::identity(20, 20) * z;
        let g1 = q1.try_inverse().unwrap() * z;
        let g = green_function_at(&model, &x, z, &GreenBlocks::Full).unwrap();
        for i in 0..20 {
            for j in 0..20 {
                assert!((g.get(i, j) - g1[(i, j)]).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn ward_identities() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for &(m, n) in &[(20, 30), (50, 50), (80, 40)] {
            let (model, x) = instance(m, n, m as u64);
            let res = Resolvent::new(&model, &x).unwrap();
            for _ in 0..5 {
                let z = Complex64::new(rng.random_range(-0.5..5.0), 10f64.powf(rng.random_range(-2.0..0.5)));
                let eta = z.im;
                let g = res.evaluate(z, &GreenBlocks::Full).unwrap();
                let rel = |a: Complex64, b: Complex64| (a - b).norm() / b.norm();
                for _ in 0..4 {
                    let j = rng.random_range(0..m);
                    let nu = m + rng.random_range(0..n);
                    let s22: f64 = (m..m + n).map(|mu| g.get(nu, mu).norm_sqr()).sum();
                    assert!(rel(s22.into(), (g.get(nu, nu).im / eta).into()) <= 1e-10);
                    let s11: f64 = (0..m).map(|i| g.get(j, i).norm_sqr()).sum();
                    let w11 = z.norm_sqr() / eta * (g.get(j, j) / z).im;
                    assert!(rel(s11.into(), w11.into()) <= 1e-10);
                    let s21: f64 = (0..m).map(|i| g.get(nu, i).norm_sqr()).sum();
                    let w21 = g.get(nu, nu) + z.conj() / eta * g.get(nu, nu).im;
                    assert!(rel(s21.into(), w21) <= 1e-10);
                    let s12: f64 = (m..m + n).map(|mu| g.get(j, mu).norm_sqr()).sum();
                    let gz = g.get(j, j) / z;
                    let w12 = gz + z.conj() / eta * gz.im;
                    assert!(rel(s12.into(), w12) <= 1e-10);
                }
            }
        }
    }

    #[test]
    fn large_eta_bound_and_domain() {
        let (model, x) = instance(20, 30, 2);
        let g = green_function_at(&model, &x, Complex64::new(0.5, 1e6), &GreenBlocks::Full).unwrap();
        let dim = g.dim;
        // G_ii → -1 in the I1 block; the remaining entries are O(1/η)
        for a in 0..dim {
            for b in 0..dim {
                let v = if a == b && a < 20 { g.get(a, b) + 1.0 } else { g.get(a, b) };
                assert!(v.norm() <= 2e-6, "({a}, {b}): {v}");
            }
        }
        assert!(green_function_at(&model, &x, Complex64::new(0.5, 0.0), &GreenBlocks::Traces).is_err());
    }
}
