//! Least-squares projections between ℝᵐ and ℝⁿ and of linear systems.
//!
//! The projector `Π^m_n` maps a dim-m vector to its nearest point of ℝⁿ
//! under the cross-dimensional distance. With `t = lcm(m, n)`, `α = t/m`,
//! `β = t/n` it reads `Π^m_n = (1/β)(I_n ⊗ 𝟏_βᵀ)(I_m ⊗ 𝟏_α)`: replicate to
//! dimension t, then average consecutive blocks of length β.
//!
//! System matrices are projected by solving `Π A = A_π Π` in the least
//! squares sense. For m ≥ n the normal equations use `Π Πᵀ`; for m < n the
//! solution is restricted to the form `A_π = Ã Πᵀ` and uses `Πᵀ Π`. The
//! output matrix follows the same two branches. The input matrix is simply
//! mapped, `B_π = Π B`, with no least-squares correction.
//!
//! For m < n the output branch `C (ΠᵀΠ)⁻¹ Πᵀ` is the printed operator; it is
//! the minimum-norm solution of `C_π Π = C`, which is the criterion our tests
//! check.

use crate::error::{Error, Result};
use crate::linalg::cholesky_solve;
use crate::mat::{CrossVec, Mat};
use crate::stp::{kron, lcm, ones_vec};

/// The projection matrix `Π^m_n` (n×m) together with its dimensions.
#[derive(Debug, Clone, PartialEq)]
pub struct Projector {
    pub m: usize,
    pub n: usize,
    pub mat: Mat,
}

impl Projector {
    /// Replication factor `α = t/m`.
    pub fn alpha(&self) -> usize {
        lcm(self.m, self.n).expect("validated at construction") / self.m
    }

    /// Averaging factor `β = t/n`.
    pub fn beta(&self) -> usize {
        lcm(self.m, self.n).expect("validated at construction") / self.n
    }

    pub fn apply(&self, xi: &CrossVec) -> Result<CrossVec> {
        if xi.dim() != self.m {
            return Err(Error::Shape(format!(
                "projector from dimension {} applied to a dim-{} vector",
                self.m,
                xi.dim()
            )));
        }
        CrossVec::new(self.mat.mul_vec(xi.as_slice()))
    }
}

/// Builds `Π^m_n`.
pub fn pi_matrix(m: usize, n: usize) -> Result<Projector> {
    let t = lcm(m, n)?;
    let (alpha, beta) = (t / m, t / n);
    let averaging = kron(&Mat::identity(n), &ones_vec(beta).transpose())?;
    let replication = kron(&Mat::identity(m), &ones_vec(alpha))?;
    let mut mat = averaging.dot(&replication)?.scale(1.0 / beta as f64);
    // last nonzero entry of each row takes the complement so rows sum to exactly 1
    for i in 0..n {
        let last = (0..m).rev().find(|&j| mat[(i, j)] != 0.0).expect("every row has support");
        let rest: f64 = (0..last).map(|j| mat[(i, j)]).sum();
        mat[(i, last)] = 1.0 - rest;
    }
    Ok(Projector { m, n, mat })
}

/// Nearest point of ℝⁿ to `xi` in the cross-dimensional distance.
pub fn project_vector(xi: &CrossVec, n: usize) -> Result<CrossVec> {
    if xi.dim() == n {
        return Ok(xi.clone());
    }
    pi_matrix(xi.dim(), n)?.apply(xi)
}

/// `Π Πᵀ` (m ≥ n) or `Πᵀ Π` (m < n), with the matching branch flag.
fn normal_matrix(pi: &Projector) -> (Mat, bool) {
    let p = &pi.mat;
    if pi.m >= pi.n {
        (p * &p.transpose(), true)
    } else {
        (&p.transpose() * p, false)
    }
}

fn guarded_solve(g: &Mat, rhs: &Mat) -> Result<Mat> {
    cholesky_solve(g, rhs).map_err(|e| match e {
        Error::NotPositiveDefinite { pivot } => {
            Error::Shape(format!("singular projection normal matrix (pivot {pivot})"))
        }
        other => other,
    })
}

/// Least-squares projection of a square system matrix of order m onto ℝⁿ.
pub fn project_sysmatrix(a: &Mat, n: usize) -> Result<Mat> {
    if !a.is_square() {
        return Err(Error::Shape(format!("system matrix must be square, got {:?}", a.shape())));
    }
    let m = a.rows();
    if m == n {
        return Ok(a.clone());
    }
    let pi = pi_matrix(m, n)?;
    let p = &pi.mat;
    let (g, wide) = normal_matrix(&pi);
    if wide {
        // Π A Πᵀ (Π Πᵀ)⁻¹, solved through its transpose: (Π Πᵀ)⁻¹ (Π A Πᵀ)ᵀ
        let core = &(p * a) * &p.transpose();
        Ok(guarded_solve(&g, &core.transpose())?.transpose())
    } else {
        // Π A (Πᵀ Π)⁻¹ Πᵀ
        let right = guarded_solve(&g, &p.transpose())?;
        Ok(&(p * a) * &right)
    }
}

/// Projection of an output matrix with m columns onto ℝⁿ.
pub fn project_output(c: &Mat, n: usize) -> Result<Mat> {
    let m = c.cols();
    if m == n {
        return Ok(c.clone());
    }
    let pi = pi_matrix(m, n)?;
    let p = &pi.mat;
    let (g, wide) = normal_matrix(&pi);
    if wide {
        let core = c * &p.transpose();
        Ok(guarded_solve(&g, &core.transpose())?.transpose())
    } else {
        let right = guarded_solve(&g, &p.transpose())?;
        Ok(c * &right)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TimeKind {
    Discrete,
    Continuous,
}

/// A linear control system `(A, B, C)` on a fixed-dimension space.
#[derive(Debug, Clone, PartialEq)]
pub struct LinSys {
    pub a: Mat,
    pub b: Option<Mat>,
    pub c: Option<Mat>,
    pub time_kind: TimeKind,
}

impl LinSys {
    pub fn new(a: Mat, b: Option<Mat>, c: Option<Mat>, time_kind: TimeKind) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::Shape(format!("A must be square, got {:?}", a.shape())));
        }
        let n = a.rows();
        if let Some(b) = &b {
            if b.rows() != n {
                return Err(Error::Shape(format!("B has {} rows, A has order {n}", b.rows())));
            }
        }
        if let Some(c) = &c {
            if c.cols() != n {
                return Err(Error::Shape(format!("C has {} columns, A has order {n}", c.cols())));
            }
        }
        Ok(Self { a, b, c, time_kind })
    }

    pub fn continuous(a: Mat, b: Mat) -> Result<Self> {
        Self::new(a, Some(b), None, TimeKind::Continuous)
    }

    /// State dimension.
    pub fn order(&self) -> usize {
        self.a.rows()
    }

    pub fn inputs(&self) -> usize {
        self.b.as_ref().map_or(0, Mat::cols)
    }
}

/// Least-squares approximation of `sys` on ℝⁿ.
pub fn project_system(sys: &LinSys, n: usize) -> Result<LinSys> {
    let m = sys.order();
    if m == n {
        return Ok(sys.clone());
    }
    let pi = pi_matrix(m, n)?;
    let a = project_sysmatrix(&sys.a, n)?;
    let b = sys.b.as_ref().map(|b| pi.mat.dot(b)).transpose()?;
    let c = sys.c.as_ref().map(|c| project_output(c, n)).transpose()?;
    Ok(LinSys { a, b, c, time_kind: sys.time_kind })
}
