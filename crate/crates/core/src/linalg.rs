//! Small dense factorizations: Cholesky solves and a one-sided Jacobi SVD.
//!
//! Everything here operates on the tiny matrices the cross-dimensional
//! algebra produces, so the algorithms favour accuracy over asymptotics.

use crate::error::{Error, Result};
use crate::mat::Mat;

/// Sweep cap for the Jacobi SVD.
pub const MAX_SWEEPS: usize = 10_000;

/// Solves `a · x = b` for symmetric positive definite `a` via Cholesky.
pub fn cholesky_solve(a: &Mat, b: &Mat) -> Result<Mat> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::Shape(format!(
            "cholesky_solve needs square a and matching b, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut l = Mat::zeros(n, n);
    for j in 0..n {
        let mut d = a[(j, j)];
        for k in 0..j {
            d -= l[(j, k)] * l[(j, k)];
        }
        if d <= 0.0 || !d.is_finite() {
            return Err(Error::NotPositiveDefinite { pivot: j });
        }
        let d = d.sqrt();
        l[(j, j)] = d;
        for i in j + 1..n {
            let mut s = a[(i, j)];
            for k in 0..j {
                s -= l[(i, k)] * l[(j, k)];
            }
            l[(i, j)] = s / d;
        }
    }
    let mut x = b.clone();
    for c in 0..b.cols() {
        // forward: L y = b
        for i in 0..n {
            let mut s = x[(i, c)];
            for k in 0..i {
                s -= l[(i, k)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
        // backward: Lᵀ x = y
        for i in (0..n).rev() {
            let mut s = x[(i, c)];
            for k in i + 1..n {
                s -= l[(k, i)] * x[(k, c)];
            }
            x[(i, c)] = s / l[(i, i)];
        }
    }
    Ok(x)
}

/// Thin singular value decomposition `a = u · diag(s) · vᵀ`.
///
/// `s` is sorted descending and has one entry per column of `a`; `v` is a
/// full orthogonal `cols × cols` matrix. Columns of `u` paired with zero
/// singular values are zero.
#[derive(Debug, Clone)]
pub struct Svd {
    pub u: Mat,
    pub s: Vec<f64>,
    pub v: Mat,
}

impl Svd {
    pub fn max_singular(&self) -> f64 {
        self.s.first().copied().unwrap_or(0.0)
    }

    /// Number of singular values above `rtol · σ_max`.
    pub fn rank(&self, rtol: f64) -> usize {
        let cut = rtol * self.max_singular();
        self.s.iter().filter(|&&s| s > cut && s > 0.0).count()
    }

    /// Moore–Penrose pseudo-inverse with relative truncation `rtol`.
    pub fn pinv(&self, rtol: f64) -> Mat {
        let (m, n) = (self.u.rows(), self.v.rows());
        let r = self.rank(rtol);
        Mat::from_fn(n, m, |i, j| {
            (0..r).map(|k| self.v[(i, k)] * self.u[(j, k)] / self.s[k]).sum()
        })
    }

    /// Orthonormal basis (as columns) of the numerical null space, if any.
    pub fn null_space(&self, rtol: f64) -> Option<Mat> {
        let r = self.rank(rtol);
        let n = self.v.rows();
        (r < n).then(|| Mat::from_fn(n, n - r, |i, j| self.v[(i, r + j)]))
    }
}

/// One-sided (Hestenes) Jacobi SVD.
pub fn svd(a: &Mat) -> Result<Svd> {
    let (m, n) = a.shape();
    // column-major working copies
    let mut cols: Vec<Vec<f64>> = (0..n).map(|j| a.col(j)).collect();
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|j| (0..n).map(|i| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let eps = f64::EPSILON;
    let tol = eps * m.max(n) as f64;
    // columns below this squared norm are round-off and stay put
    let floor = (tol * a.frobenius_norm()).powi(2);
    let mut converged = n < 2;
    for _ in 0..MAX_SWEEPS {
        if converged {
            break;
        }
        let mut rotated = false;
        for p in 0..n - 1 {
            for q in p + 1..n {
                let alpha: f64 = cols[p].iter().map(|x| x * x).sum();
                let beta: f64 = cols[q].iter().map(|x| x * x).sum();
                let gamma: f64 = cols[p].iter().zip(&cols[q]).map(|(x, y)| x * y).sum();
                if alpha <= floor || beta <= floor || gamma.abs() <= tol * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (2.0 * gamma);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate(&mut cols, p, q, c, s);
                rotate(&mut v, p, q, c, s);
            }
        }
        converged = !rotated;
    }
    if !converged {
        return Err(Error::NoConvergence { what: "Jacobi SVD", iterations: MAX_SWEEPS });
    }
    let mut sv: Vec<(f64, usize)> = cols
        .iter()
        .enumerate()
        .map(|(j, c)| (c.iter().map(|x| x * x).sum::<f64>().sqrt(), j))
        .collect();
    sv.sort_by(|a, b| b.0.total_cmp(&a.0));
    let s: Vec<f64> = sv.iter().map(|(s, _)| *s).collect();
    let u = Mat::from_fn(m, n, |i, k| {
        let (sigma, j) = sv[k];
        if sigma > 0.0 {
            cols[j][i] / sigma
        } else {
            0.0
        }
    });
    let v = Mat::from_fn(n, n, |i, k| v[sv[k].1][i]);
    Ok(Svd { u, s, v })
}

fn rotate(cols: &mut [Vec<f64>], p: usize, q: usize, c: f64, s: f64) {
    let (left, right) = cols.split_at_mut(q);
    let (cp, cq) = (&mut left[p], &mut right[0]);
    for (x, y) in cp.iter_mut().zip(cq.iter_mut()) {
        let (xp, xq) = (*x, *y);
        *x = c * xp - s * xq;
        *y = s * xp + c * xq;
    }
}

/// Largest singular value, √σ_max(AᵀA).
pub fn spectral_norm(a: &Mat) -> Result<f64> {
    // the SVD of the wide or tall orientation with fewer columns is cheapest
    let svd = if a.cols() <= a.rows() { svd(a)? } else { svd(&a.transpose())? };
    Ok(svd.max_singular())
}

/// Minimum-norm least-squares solution of `a · x = b` (columns of `b` solved jointly).
pub fn lstsq(a: &Mat, b: &Mat, rtol: f64) -> Result<Mat> {
    let pinv = svd(a)?.pinv(rtol);
    pinv.dot(b)
}
