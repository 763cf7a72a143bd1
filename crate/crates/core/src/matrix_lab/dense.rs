//! Dense real matrices and the eigensolvers built on them.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

/// Column-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Mat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Mat::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    /// Builds from row-major data.
    pub fn from_row_major(rows: usize, cols: usize, values: &[f64]) -> Self {
        assert_eq!(values.len(), rows * cols, "row-major data has the wrong length");
        let mut m = Mat::zeros(rows, cols);
        for i in 0..rows {
            for j in 0..cols {
                m[(i, j)] = values[i * cols + j];
            }
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> f64) -> Self {
        let mut m = Mat::zeros(rows, cols);
        for j in 0..cols {
            for i in 0..rows {
                m.data[j * rows + i] = f(i, j);
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    /// Column-major storage.
    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn to_row_major(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.data.len());
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.push(self[(i, j)]);
            }
        }
        out
    }

    pub fn transpose(&self) -> Mat {
        Mat::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    /// `A x`.
    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.rows];
        for (j, &xj) in x.iter().enumerate() {
            if xj != 0.0 {
                axpy(xj, self.col(j), &mut y);
            }
        }
        y
    }

    /// `Aᵀ x`.
    pub fn tr_mul_vec(&self, x: &[f64]) -> Vec<f64> {
        (0..self.cols).map(|j| dot(self.col(j), x)).collect()
    }

    pub fn matmul(&self, other: &Mat) -> Mat {
        assert_eq!(self.cols, other.rows);
        let mut out = Mat::zeros(self.rows, other.cols);
        for j in 0..other.cols {
            let y = self.mul_vec(other.col(j));
            out.col_mut(j).copy_from_slice(&y);
        }
        out
    }

    /// Multiplies row `i` by `d[i]`.
    pub fn scale_rows(&mut self, d: &[f64]) {
        assert_eq!(d.len(), self.rows);
        for j in 0..self.cols {
            for (v, &s) in self.col_mut(j).iter_mut().zip(d) {
                *v *= s;
            }
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }
}

impl std::ops::Index<(usize, usize)> for Mat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[j * self.rows + i]
    }
}

impl std::ops::IndexMut<(usize, usize)> for Mat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[j * self.rows + i]
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(x: &[f64]) -> f64 {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * x.iter().map(|v| (v / scale).powi(2)).sum::<f64>().sqrt()
}

/// Householder vector for `x`: on return `x` holds `v` and the result is
/// `(beta, alpha)` with `(I - beta v vᵀ) x_old = alpha e_1`.
fn householder(x: &mut [f64]) -> (f64, f64) {
    let sigma = norm(x);
    if sigma == 0.0 {
        return (0.0, 0.0);
    }
    let alpha = if x[0] >= 0.0 { -sigma } else { sigma };
    let beta = 1.0 / (sigma * (sigma + x[0].abs()));
    x[0] -= alpha;
    (beta, alpha)
}

fn rotate(a: &mut [f64], b: &mut [f64], c: f64, s: f64) {
    for (x, y) in a.iter_mut().zip(b.iter_mut()) {
        let (u, v) = (*x, *y);
        *x = c * u + s * v;
        *y = -s * u + c * v;
    }
}

fn rotate_cols(m: &mut Mat, j: usize, k: usize, c: f64, s: f64) {
    let rows = m.rows;
    let (lo, hi) = (j.min(k), j.max(k));
    let (left, right) = m.data.split_at_mut(hi * rows);
    let a = &mut left[lo * rows..(lo + 1) * rows];
    let b = &mut right[..rows];
    if j < k {
        rotate(a, b, c, s);
    } else {
        rotate(b, a, c, s);
    }
}

/// Thin singular value decomposition `A = U diag(s) Vᵀ`, values descending.
#[derive(Debug, Clone)]
pub struct Svd {
    pub singular_values: Vec<f64>,
    /// `rows × r` left vectors, `r = min(rows, cols)`.
    pub u: Option<Mat>,
    /// `cols × r` right vectors.
    pub v: Option<Mat>,
}

/// Golub-Kahan bidiagonalization followed by implicit-shift QR on the
/// bidiagonal factor.
pub fn svd(a: &Mat, vectors: bool) -> Result<Svd> {
    if a.rows < a.cols {
        let t = svd(&a.transpose(), vectors)?;
        return Ok(Svd { singular_values: t.singular_values, u: t.v, v: t.u });
    }
    let (m, n) = (a.rows, a.cols);
    if n == 0 {
        return Ok(Svd { singular_values: vec![], u: vectors.then(|| Mat::zeros(m, 0)), v: vectors.then(|| Mat::zeros(0, 0)) });
    }
    let mut w = a.clone();
    let mut d = vec![0.0; n];
    let mut e = vec![0.0; n.saturating_sub(1)];
    let mut left_beta = vec![0.0; n];
    let mut right: Vec<(f64, Vec<f64>)> = Vec::with_capacity(n.saturating_sub(1));
    let mut y = vec![0.0; m];
    for k in 0..n {
        // left reflector on column k, rows k..m
        let (beta, alpha) = householder(&mut w.col_mut(k)[k..]);
        d[k] = alpha;
        left_beta[k] = beta;
        if beta != 0.0 {
            let (head, tail) = w.data.split_at_mut((k + 1) * m);
            let v = &head[k * m + k..(k + 1) * m];
            for col in tail.chunks_exact_mut(m) {
                let t = beta * dot(v, &col[k..]);
                axpy(-t, v, &mut col[k..]);
            }
        }
        if k + 1 < n {
            // right reflector on row k, columns k+1..n
            let mut x: Vec<f64> = (k + 1..n).map(|j| w[(k, j)]).collect();
            let (gamma, alpha) = householder(&mut x);
            e[k] = alpha;
            if gamma != 0.0 {
                let yk = &mut y[k + 1..];
                yk.iter_mut().for_each(|v| *v = 0.0);
                for (idx, j) in (k + 1..n).enumerate() {
                    axpy(x[idx], &w.col(j)[k + 1..], yk);
                }
                for (idx, j) in (k + 1..n).enumerate() {
                    let f = -gamma * x[idx];
                    axpy(f, yk, &mut w.col_mut(j)[k + 1..]);
                }
            }
            right.push((gamma, x));
        }
    }

    let (mut u, mut v) = if vectors {
        let mut u = Mat::zeros(m, n);
        for i in 0..n {
            u[(i, i)] = 1.0;
        }
        for k in (0..n).rev() {
            let beta = left_beta[k];
            if beta == 0.0 {
                continue;
            }
            let hv = w.col(k)[k..].to_vec();
            for j in k..n {
                let col = &mut u.col_mut(j)[k..];
                let t = beta * dot(&hv, col);
                axpy(-t, &hv, col);
            }
        }
        let mut vm = Mat::identity(n);
        for k in (0..n.saturating_sub(1)).rev() {
            let (gamma, ref hv) = right[k];
            if gamma == 0.0 {
                continue;
            }
            for j in k + 1..n {
                let col = &mut vm.col_mut(j)[k + 1..];
                let t = gamma * dot(hv, col);
                axpy(-t, hv, col);
            }
        }
        (Some(u), Some(vm))
    } else {
        (None, None)
    };

    bidiagonal_qr(&mut d, &mut e, u.as_mut(), v.as_mut())?;

    // nonnegative, descending
    for (k, dk) in d.iter_mut().enumerate() {
        if *dk < 0.0 {
            *dk = -*dk;
            if let Some(v) = v.as_mut() {
                v.col_mut(k).iter_mut().for_each(|x| *x = -*x);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[j].total_cmp(&d[i]));
    let values = order.iter().map(|&k| d[k]).collect();
    let permute = |mat: Mat| {
        let rows = mat.rows;
        let mut out = Mat::zeros(rows, n);
        for (dst, &src) in order.iter().enumerate() {
            out.col_mut(dst).copy_from_slice(mat.col(src));
        }
        out
    };
    Ok(Svd { singular_values: values, u: u.map(permute), v: v.map(permute) })
}

/// Implicit-shift QR on the upper bidiagonal matrix with diagonal `d` and
/// superdiagonal `e`; rotations are accumulated into `u` and `v`.
fn bidiagonal_qr(d: &mut [f64], e: &mut [f64], mut u: Option<&mut Mat>, mut v: Option<&mut Mat>) -> Result<()> {
    let n = d.len();
    let eps = f64::EPSILON;
    let anorm = d.iter().chain(e.iter()).fold(0.0f64, |m, x| m.max(x.abs()));
    if anorm == 0.0 {
        return Ok(());
    }
    let tiny = eps * anorm;
    let max_sweeps = 75 * n.max(1);
    let mut sweeps = 0;
    let mut end = n - 1;
    while end > 0 {
        // deflate converged trailing entries
        for i in 0..end {
            if e[i].abs() <= eps * (d[i].abs() + d[i + 1].abs()) || e[i].abs() <= f64::MIN_POSITIVE {
                e[i] = 0.0;
            }
        }
        if e[end - 1] == 0.0 {
            end -= 1;
            continue;
        }
        let mut p = end - 1;
        while p > 0 && e[p - 1] != 0.0 {
            p -= 1;
        }
        sweeps += 1;
        if sweeps > max_sweeps {
            return Err(Error::NoConvergence { what: "bidiagonal QR", iterations: sweeps });
        }

        // a zero on the diagonal splits the block after chasing its row
        if let Some(i) = (p..end).find(|&i| d[i].abs() <= tiny) {
            d[i] = 0.0;
            let mut f = e[i];
            e[i] = 0.0;
            for j in i + 1..=end {
                let r = f.hypot(d[j]);
                let (c, s) = (d[j] / r, f / r);
                d[j] = r;
                if j < end {
                    f = -s * e[j];
                    e[j] *= c;
                }
                if let Some(u) = u.as_deref_mut() {
                    rotate_cols(u, j, i, c, s);
                }
            }
            continue;
        }
        if d[end].abs() <= tiny {
            d[end] = 0.0;
            let mut f = e[end - 1];
            e[end - 1] = 0.0;
            for j in (p..end).rev() {
                let r = f.hypot(d[j]);
                let (c, s) = (d[j] / r, f / r);
                d[j] = r;
                if j > p {
                    f = -s * e[j - 1];
                    e[j - 1] *= c;
                }
                if let Some(v) = v.as_deref_mut() {
                    rotate_cols(v, j, end, c, s);
                }
            }
            continue;
        }

        // Wilkinson shift from the trailing 2×2 block of BᵀB
        let dm = d[end - 1];
        let em = e[end - 1];
        let em_prev = if end - 1 > p { e[end - 2] } else { 0.0 };
        let t11 = dm * dm + em_prev * em_prev;
        let t12 = dm * em;
        let t22 = d[end] * d[end] + em * em;
        let delta = 0.5 * (t11 - t22);
        let sign = if delta >= 0.0 { 1.0 } else { -1.0 };
        let denom = delta + sign * delta.hypot(t12);
        let mu = if denom == 0.0 { t22 } else { t22 - t12 * t12 / denom };

        let mut y = d[p] * d[p] - mu;
        let mut z = d[p] * e[p];
        for k in p..end {
            let r = y.hypot(z);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (y / r, z / r) };
            if k > p {
                e[k - 1] = r;
            }
            let (dk, ek) = (d[k], e[k]);
            d[k] = c * dk + s * ek;
            e[k] = -s * dk + c * ek;
            let bulge = s * d[k + 1];
            d[k + 1] *= c;
            if let Some(v) = v.as_deref_mut() {
                rotate_cols(v, k, k + 1, c, s);
            }

            y = d[k];
            z = bulge;
            let r = y.hypot(z);
            let (c, s) = if r == 0.0 { (1.0, 0.0) } else { (y / r, z / r) };
            d[k] = r;
            let (ek, dk1) = (e[k], d[k + 1]);
            e[k] = c * ek + s * dk1;
            d[k + 1] = -s * ek + c * dk1;
            if k + 1 < end {
                z = s * e[k + 1];
                e[k + 1] *= c;
            }
            y = e[k];
            if let Some(u) = u.as_deref_mut() {
                rotate_cols(u, k, k + 1, c, s);
            }
        }
    }
    Ok(())
}

/// Eigen-decomposition of a symmetric tridiagonal matrix by implicit QL.
/// `diag` has length `n`, `off[i]` couples `i` and `i + 1`. Returns
/// eigenvalues (unsorted) and, if requested, eigenvectors as columns.
pub fn tridiagonal_eigen(diag: &[f64], off: &[f64], vectors: bool) -> Result<(Vec<f64>, Option<Mat>)> {
    let n = diag.len();
    let mut d = diag.to_vec();
    let mut e = vec![0.0; n];
    e[..n.saturating_sub(1)].copy_from_slice(&off[..n.saturating_sub(1)]);
    let mut z = vectors.then(|| Mat::identity(n));
    for l in 0..n {
        let mut iter = 0;
        loop {
            let mut m = l;
            while m + 1 < n {
                let dd = d[m].abs() + d[m + 1].abs();
                if e[m].abs() <= f64::EPSILON * dd {
                    break;
                }
                m += 1;
            }
            if m == l {
                break;
            }
            iter += 1;
            if iter > 60 {
                return Err(Error::NoConvergence { what: "tridiagonal QL", iterations: iter });
            }
            let mut g = (d[l + 1] - d[l]) / (2.0 * e[l]);
            let mut r = g.hypot(1.0);
            g = d[m] - d[l] + e[l] / (g + r.copysign(g));
            let (mut s, mut c, mut p) = (1.0, 1.0, 0.0);
            let mut underflow = false;
            for i in (l..m).rev() {
                let f = s * e[i];
                let b = c * e[i];
                r = f.hypot(g);
                e[i + 1] = r;
                if r == 0.0 {
                    d[i + 1] -= p;
                    e[m] = 0.0;
                    underflow = true;
                    break;
                }
                s = f / r;
                c = g / r;
                g = d[i + 1] - p;
                r = (d[i] - g) * s + 2.0 * c * b;
                p = s * r;
                d[i + 1] = g + p;
                g = c * r - b;
                if let Some(z) = z.as_mut() {
                    rotate_cols(z, i, i + 1, c, -s);
                }
            }
            if underflow {
                continue;
            }
            d[l] -= p;
            e[l] = g;
            e[m] = 0.0;
        }
    }
    Ok((d, z))
}

/// Top `k` eigenvalues (descending) of the symmetric operator `apply` on
/// `R^dim`, by Lanczos with full reorthogonalization. Converged when every
/// Ritz residual is below `tol` times the largest Ritz value.
pub fn lanczos_top<F>(dim: usize, k: usize, tol: f64, mut apply: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Vec<f64>,
{
    if k == 0 || dim == 0 {
        return Ok(vec![]);
    }
    let k = k.min(dim);
    // fixed start so results are reproducible
    let mut rng = ChaCha8Rng::seed_from_u64(0x6c61_6e63_7a6f_7300 ^ dim as u64);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();

    let fresh = |basis: &[Vec<f64>], rng: &mut ChaCha8Rng| -> Option<Vec<f64>> {
        for _ in 0..5 {
            let mut q: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            for _ in 0..2 {
                for b in basis {
                    let t = dot(b, &q);
                    axpy(-t, b, &mut q);
                }
            }
            let nq = norm(&q);
            if nq > 1e-8 {
                q.iter_mut().for_each(|x| *x /= nq);
                return Some(q);
            }
        }
        None
    };

    let mut q = fresh(&basis, &mut rng).expect("nonempty space");
    let mut scale = 0.0f64;
    loop {
        let mut w = apply(&q);
        let a = dot(&q, &w);
        basis.push(q);
        alpha.push(a);
        // CGS2 against the whole basis
        for _ in 0..2 {
            for b in &basis {
                let t = dot(b, &w);
                axpy(-t, b, &mut w);
            }
        }
        let b = norm(&w);
        scale = scale.max(a.abs()).max(b);
        let j = basis.len();

        let full = j == dim;
        let check = full || (j >= k && (j < 2 * k + 8 || j.is_multiple_of(4)));
        if check {
            let (theta, s) = tridiagonal_eigen(&alpha, &beta, true)?;
            let s = s.expect("vectors requested");
            let mut order: Vec<usize> = (0..j).collect();
            order.sort_by(|&x, &y| theta[y].total_cmp(&theta[x]));
            let top = theta[order[0]].abs().max(f64::MIN_POSITIVE);
            let converged = order[..k].iter().all(|&i| (b * s[(j - 1, i)]).abs() <= tol * top);
            if full || converged {
                return Ok(order[..k].iter().map(|&i| theta[i]).collect());
            }
        }

        if b <= 1e-12 * scale.max(f64::MIN_POSITIVE) {
            // invariant subspace: restart orthogonally (repeated eigenvalues)
            match fresh(&basis, &mut rng) {
                Some(nq) => {
                    beta.push(0.0);
                    q = nq;
                }
                None => {
                    let (theta, _) = tridiagonal_eigen(&alpha, &beta, false)?;
                    let mut t = theta;
                    t.sort_by(|x, y| y.total_cmp(x));
                    t.truncate(k);
                    return Ok(t);
                }
            }
        } else {
            beta.push(b);
            w.iter_mut().for_each(|x| *x /= b);
            q = w;
        }
    }
}
