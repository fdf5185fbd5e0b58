//! Kronecker products, averaging blocks and the semi-tensor products.
//!
//! For `A` of size m×n and `B` of size p×q, both semi-tensor products inflate
//! the factors to the common inner dimension `t = lcm(n, p)`:
//!
//! * first STP: `(A ⊗ I_{t/n}) (B ⊗ I_{t/p})`
//! * second STP: `(A ⊗ J_{t/n}) (B ⊗ J_{t/p})`, with `J_k = 𝟏_{k×k} / k`
//!
//! The MV-2 product lets a matrix act on a vector of unrelated dimension:
//! `(A ⊗ J_{t/n}) (x ⊗ 𝟏_{t/r})` with `t = lcm(n, r)`.

use crate::error::{Error, Result};
use crate::mat::{CrossVec, Mat};

pub use crate::linalg::spectral_norm;

pub fn gcd(mut m: usize, mut n: usize) -> usize {
    while n != 0 {
        (m, n) = (n, m % n);
    }
    m
}

/// Least common multiple, rejecting zero arguments and overflow.
pub fn lcm(m: usize, n: usize) -> Result<usize> {
    if m == 0 || n == 0 {
        return Err(Error::Empty("dimension"));
    }
    (m / gcd(m, n)).checked_mul(n).ok_or(Error::Overflow("lcm"))
}

/// Divisors of `n` in ascending order.
pub fn divisors(n: usize) -> Vec<usize> {
    let mut small = Vec::new();
    let mut large = Vec::new();
    let mut d = 1;
    while d * d <= n {
        if n.is_multiple_of(d) {
            small.push(d);
            if d * d != n {
                large.push(n / d);
            }
        }
        d += 1;
    }
    small.extend(large.into_iter().rev());
    small
}

pub fn kron(a: &Mat, b: &Mat) -> Result<Mat> {
    let (m, n) = a.shape();
    let (p, q) = b.shape();
    let rows = m.checked_mul(p).ok_or(Error::Overflow("kron rows"))?;
    let cols = n.checked_mul(q).ok_or(Error::Overflow("kron cols"))?;
    rows.checked_mul(cols).ok_or(Error::Overflow("kron size"))?;
    Ok(Mat::from_fn(rows, cols, |i, j| a[(i / p, j / q)] * b[(i % p, j % q)]))
}

/// `x ⊗ 𝟏_k`: each entry of `x` repeated `k` times consecutively.
pub fn replicate(x: &CrossVec, k: usize) -> Result<CrossVec> {
    if k == 0 {
        return Err(Error::Empty("replication factor"));
    }
    x.dim().checked_mul(k).ok_or(Error::Overflow("replicated dimension"))?;
    let data = x.as_slice().iter().flat_map(|&v| std::iter::repeat_n(v, k)).collect();
    Ok(CrossVec::from_vec_unchecked(data))
}

/// `𝟏_n` as an n×1 matrix.
pub fn ones_vec(n: usize) -> Mat {
    Mat::from_fn(n, 1, |_, _| 1.0)
}

/// `𝟏_{n×n}`.
pub fn ones_mat(n: usize) -> Mat {
    Mat::from_fn(n, n, |_, _| 1.0)
}

/// Averaging block `J_k = 𝟏_{k×k} / k`.
pub fn j_mat(k: usize) -> Mat {
    let v = 1.0 / k as f64;
    Mat::from_fn(k, k, |_, _| v)
}

/// First semi-tensor product (identity inflation).
pub fn stp1(a: &Mat, b: &Mat) -> Result<Mat> {
    let (n, p) = (a.cols(), b.rows());
    if n == p {
        return a.dot(b);
    }
    let t = lcm(n, p)?;
    let left = kron(a, &Mat::identity(t / n))?;
    let right = kron(b, &Mat::identity(t / p))?;
    left.dot(&right)
}

/// Second semi-tensor product (averaging inflation), the product `A ∘ B`.
pub fn stp2(a: &Mat, b: &Mat) -> Result<Mat> {
    let (n, p) = (a.cols(), b.rows());
    if n == p {
        return a.dot(b);
    }
    let t = lcm(n, p)?;
    let left = kron(a, &j_mat(t / n))?;
    let right = kron(b, &j_mat(t / p))?;
    left.dot(&right)
}

/// Output dimension of the MV-2 product of an m×n matrix with a dim-r vector.
pub fn mv2_dim(m: usize, n: usize, r: usize) -> Result<usize> {
    let t = lcm(n, r)?;
    (t / n).checked_mul(m).ok_or(Error::Overflow("MV-2 output dimension"))
}

/// MV-2 product `A ⃗∘ x = (A ⊗ J_{t/n})(x ⊗ 𝟏_{t/r})`.
///
/// Evaluated without materializing the inflated operands: with `s = t/n`,
/// each row block of `A ⊗ J_s` averages `s` consecutive entries of the
/// replicated vector, and all `s` rows of a block coincide, so the result is
/// `(A · w) ⊗ 𝟏_s` where `w_j` is the mean of block `j` of `x ⊗ 𝟏_{t/r}`.
pub fn mv2(a: &Mat, x: &CrossVec) -> Result<CrossVec> {
    let (m, n) = a.shape();
    let r = x.dim();
    let t = lcm(n, r)?;
    let s = t / n;
    let rep = t / r;
    mv2_dim(m, n, r)?;
    let xs = x.as_slice();
    let w: Vec<f64> = (0..n)
        .map(|j| (j * s..(j + 1) * s).map(|k| xs[k / rep]).sum::<f64>() / s as f64)
        .collect();
    let y = a.mul_vec(&w);
    let data = y.into_iter().flat_map(|v| std::iter::repeat_n(v, s)).collect();
    Ok(CrossVec::from_vec_unchecked(data))
}
