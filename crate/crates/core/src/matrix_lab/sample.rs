use std::io::{Read, Write};

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::dense::{lanczos_top, svd, Mat};
use super::dist::EntryDistribution;
use super::rng::trial_rng;
use crate::deformed_mp::{AspectRatio, DeformedMp, PopulationSpectrum};
use crate::error::{invalid, Result};

/// Largest `k` accepted by the Lanczos method.
pub const MAX_TOPK: usize = 32;

/// `M × N` matrix `X` with `x_ij = q_ij / sqrt(N)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub seed: u64,
    pub stream: u64,
    pub dist: EntryDistribution,
    x: Mat,
}

impl SampleMatrix {
    /// Wraps explicit entries (planted or loaded matrices).
    pub fn from_entries(x: Mat, dist: EntryDistribution) -> Self {
        SampleMatrix { seed: 0, stream: 0, dist, x }
    }

    pub fn m(&self) -> usize {
        self.x.rows()
    }

    pub fn n(&self) -> usize {
        self.x.cols()
    }

    pub fn x(&self) -> &Mat {
        &self.x
    }

    pub fn x_mut(&mut self) -> &mut Mat {
        &mut self.x
    }

    /// `q_ij = sqrt(N) x_ij`.
    pub fn q(&self, i: usize, j: usize) -> f64 {
        self.x[(i, j)] * (self.n() as f64).sqrt()
    }
}

/// Draws `X` from stream 0 of `seed`.
pub fn sample_entries(dist: &EntryDistribution, m: usize, n: usize, seed: u64) -> Result<SampleMatrix> {
    sample_entries_stream(dist, m, n, seed, 0)
}

/// Draws `X` from stream `stream` of `seed`, filling entries in row-major order.
pub fn sample_entries_stream(
    dist: &EntryDistribution,
    m: usize,
    n: usize,
    seed: u64,
    stream: u64,
) -> Result<SampleMatrix> {
    let mut rng = trial_rng(seed, stream);
    let mut s = sample_entries_with(dist, m, n, &mut rng)?;
    s.seed = seed;
    s.stream = stream;
    Ok(s)
}

pub fn sample_entries_with<R: Rng + ?Sized>(
    dist: &EntryDistribution,
    m: usize,
    n: usize,
    rng: &mut R,
) -> Result<SampleMatrix> {
    if m == 0 || n == 0 {
        return Err(invalid("sample matrix needs M, N >= 1"));
    }
    dist.ready()?;
    let inv = 1.0 / (n as f64).sqrt();
    let mut x = Mat::zeros(m, n);
    for i in 0..m {
        for j in 0..n {
            x[(i, j)] = dist.sample(rng) * inv;
        }
    }
    Ok(SampleMatrix { seed: 0, stream: 0, dist: dist.clone(), x })
}

/// Population `T = diag(sqrt(σ_i))` with the aspect ratio of the samples.
#[derive(Debug, Clone, PartialEq)]
pub struct CovarianceModel {
    pub pop: PopulationSpectrum,
    pub ratio: AspectRatio,
}

impl CovarianceModel {
    pub fn new(pop: PopulationSpectrum, n: usize) -> Result<Self> {
        let ratio = AspectRatio::new(n, pop.len())?;
        Ok(CovarianceModel { pop, ratio })
    }

    /// `σ ≡ 1`.
    pub fn null(m: usize, n: usize) -> Result<Self> {
        Self::new(PopulationSpectrum::null(m)?, n)
    }

    pub fn m(&self) -> usize {
        self.ratio.m
    }

    pub fn n(&self) -> usize {
        self.ratio.n
    }

    pub fn deformed_mp(&self) -> DeformedMp {
        DeformedMp::new(&self.pop, self.ratio)
    }

    fn check(&self, x: &SampleMatrix) -> Result<()> {
        if x.m() != self.m() || x.n() != self.n() {
            return Err(invalid(format!(
                "matrix is {}x{} but the model expects {}x{}",
                x.m(),
                x.n(),
                self.m(),
                self.n()
            )));
        }
        Ok(())
    }

    /// `D X`.
    pub fn apply(&self, x: &SampleMatrix) -> Result<Mat> {
        self.check(x)?;
        let mut b = x.x().clone();
        b.scale_rows(&self.pop.sqrt_diagonal());
        Ok(b)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EigenMethod {
    Full,
    #[serde(rename = "topk")]
    TopK(usize),
}

/// Eigenvalues of `Q1 = D X X* D*`, descending.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenSpectrum {
    pub eigenvalues: Vec<f64>,
    pub method: EigenMethod,
}

/// Full: squared singular values of `D X` (length `min(M, N)`). Top-k:
/// Lanczos on the smaller Gram matrix with residual tolerance 1e-10.
pub fn eigens(model: &CovarianceModel, x: &SampleMatrix, method: EigenMethod) -> Result<EigenSpectrum> {
    let b = model.apply(x)?;
    eigens_of(&b, method)
}

pub(crate) fn eigens_of(b: &Mat, method: EigenMethod) -> Result<EigenSpectrum> {
    let eigenvalues = match method {
        EigenMethod::Full => svd(b, false)?.singular_values.iter().map(|s| s * s).collect(),
        EigenMethod::TopK(k) => {
            if k == 0 || k > MAX_TOPK {
                return Err(invalid(format!("top-k needs 1 <= k <= {MAX_TOPK}, got {k}")));
            }
            let mut v = if b.rows() <= b.cols() {
                lanczos_top(b.rows(), k, 1e-10, |v| b.mul_vec(&b.tr_mul_vec(v)))?
            } else {
                lanczos_top(b.cols(), k, 1e-10, |v| b.tr_mul_vec(&b.mul_vec(v)))?
            };
            // rounding can leave tiny negative values for a singular Gram matrix
            v.iter_mut().for_each(|l| *l = l.max(0.0));
            v
        }
    };
    Ok(EigenSpectrum { eigenvalues, method })
}

/// `H = [[0, D X], [(D X)*, 0]]`.
pub fn linearized_h(model: &CovarianceModel, x: &SampleMatrix) -> Result<Mat> {
    let b = model.apply(x)?;
    let (m, n) = (b.rows(), b.cols());
    let mut h = Mat::zeros(m + n, m + n);
    for j in 0..n {
        for i in 0..m {
            h[(i, m + j)] = b[(i, j)];
            h[(m + j, i)] = b[(i, j)];
        }
    }
    Ok(h)
}

/// A single entry that forces `λ1(Q2) ≥ s`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Witness {
    pub i: usize,
    pub j: usize,
    pub value: f64,
    /// `I = sqrt(s / τ)`.
    pub threshold: f64,
}

/// Looks for `|x_ij| ≥ sqrt(s/τ)` among the first `⌊τ M⌋` rows. On those rows
/// `σ_i ≥ τ`, so `λ1 ≥ ‖D X e_j‖² ≥ σ_i x_ij² ≥ s`.
pub fn largest_entry_event(x: &SampleMatrix, model: &CovarianceModel, s: f64, tau: f64) -> Result<Option<Witness>> {
    model.check(x)?;
    if !(s > 0.0) {
        return Err(invalid("witness level s must be positive"));
    }
    if !(tau > 0.0 && tau < 1.0) {
        return Err(invalid("tau must lie in (0, 1)"));
    }
    let rows = (tau * model.m() as f64).floor() as usize;
    let sig = model.pop.sigmas();
    if sig[..rows].iter().any(|&v| v < tau) {
        return Err(invalid(format!("sigma_i < tau = {tau} within the first {rows} rows")));
    }
    let threshold = (s / tau).sqrt();
    let xm = x.x();
    for i in 0..rows {
        for j in 0..x.n() {
            let v = xm[(i, j)];
            if v.abs() >= threshold {
                return Ok(Some(Witness { i, j, value: v, threshold }));
            }
        }
    }
    Ok(None)
}

const MAGIC: &[u8; 8] = b"QMATF64\0";

/// Writes the 16-byte header (magic, `M`, `N` as little-endian u32) and the
/// entries row-major as little-endian f64.
pub fn write_matrix<W: Write>(mut w: W, x: &Mat) -> Result<()> {
    let m = u32::try_from(x.rows()).map_err(|_| invalid("matrix too large for the header"))?;
    let n = u32::try_from(x.cols()).map_err(|_| invalid("matrix too large for the header"))?;
    w.write_all(MAGIC)?;
    w.write_all(&m.to_le_bytes())?;
    w.write_all(&n.to_le_bytes())?;
    let mut buf = Vec::with_capacity(8 * x.rows() * x.cols());
    for v in x.to_row_major() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read_matrix<R: Read>(mut r: R) -> Result<Mat> {
    let mut head = [0u8; 16];
    r.read_exact(&mut head)?;
    if &head[..8] != MAGIC {
        return Err(invalid("not a matrix file (bad magic)"));
    }
    let m = u32::from_le_bytes(head[8..12].try_into().expect("4 bytes")) as usize;
    let n = u32::from_le_bytes(head[12..16].try_into().expect("4 bytes")) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != 8 * m * n {
        return Err(invalid(format!("matrix file holds {} bytes, expected {}", body.len(), 8 * m * n)));
    }
    let values: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    Ok(Mat::from_row_major(m, n, &values))
}
