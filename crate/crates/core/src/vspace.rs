//! Arithmetic and geometry on the dimension-free space 𝒱 = ∪ₙ ℝⁿ.
//!
//! Two vectors of dimensions m and n are compared by replicating each to the
//! common dimension `t = lcm(m, n)` (`x ⊗ 𝟏_{t/m}`, `y ⊗ 𝟏_{t/n}`). Results
//! are returned at dimension `t`; reducing them to a canonical member of
//! their equivalence class is left to [`crate::quotient`].

use crate::error::{Error, Result};
use crate::mat::CrossVec;
use crate::stp::{lcm, replicate};

fn lifted(x: &CrossVec, y: &CrossVec) -> Result<(CrossVec, CrossVec)> {
    let t = lcm(x.dim(), y.dim())?;
    Ok((replicate(x, t / x.dim())?, replicate(y, t / y.dim())?))
}

fn combine(x: &CrossVec, y: &CrossVec, f: impl Fn(f64, f64) -> f64) -> Result<CrossVec> {
    let (xl, yl) = lifted(x, y)?;
    let data = xl.as_slice().iter().zip(yl.as_slice()).map(|(&a, &b)| f(a, b)).collect();
    Ok(CrossVec::from_vec_unchecked(data))
}

/// V-addition `x ⊞ y`, returned at dimension `lcm(dim x, dim y)`.
pub fn vadd(x: &CrossVec, y: &CrossVec) -> Result<CrossVec> {
    combine(x, y, |a, b| a + b)
}

/// V-subtraction `x ⊟ y = x ⊞ (−y)`.
pub fn vsub(x: &CrossVec, y: &CrossVec) -> Result<CrossVec> {
    combine(x, y, |a, b| a - b)
}

/// Normalized inner product `⟨x⊗𝟏, y⊗𝟏⟩ / t`.
pub fn vinner(x: &CrossVec, y: &CrossVec) -> Result<f64> {
    let (xl, yl) = lifted(x, y)?;
    let t = xl.dim() as f64;
    Ok(xl.as_slice().iter().zip(yl.as_slice()).map(|(a, b)| a * b).sum::<f64>() / t)
}

/// `‖x‖_𝒱 = ‖x‖ / √dim(x)`; invariant under replication.
pub fn vnorm(x: &CrossVec) -> f64 {
    x.euclid_norm() / (x.dim() as f64).sqrt()
}

/// Cross-dimensional distance `‖x ⊟ y‖_𝒱`; zero exactly on equivalent pairs.
pub fn vdist(x: &CrossVec, y: &CrossVec) -> Result<f64> {
    Ok(vnorm(&vsub(x, y)?))
}

/// Path point `λx ⊞ (1−λ)y` joining `y` (λ = 0) to `x` (λ = 1).
pub fn path(x: &CrossVec, y: &CrossVec, lambda: f64) -> Result<CrossVec> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::OutOfRange { name: "lambda", value: lambda });
    }
    combine(x, y, |a, b| lambda * a + (1.0 - lambda) * b)
}
