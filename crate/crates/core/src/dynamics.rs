//! Discrete and continuous simulation of cross-dimensional linear systems.
//!
//! Discrete dynamics iterate the MV-2 product `x(t+1) = A ⃗∘ x(t)`; the state
//! dimension follows the map `r ↦ lcm(n, r)·m/n` for an m×n matrix. Once the
//! orbit reaches an invariant dimension d the action restricts to a square
//! matrix `A_*` on ℝᵈ. Continuous flows are only integrated on square
//! matrices (a restriction or a lift), with fixed-step RK4.

use std::collections::HashMap;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::mat::{CrossVec, Mat};
use crate::par::{self, Execution};
use crate::stp::{j_mat, kron, lcm, mv2, mv2_dim, ones_vec, spectral_norm};
use crate::vspace::vnorm;

/// Default cap on the number of dimension-map iterations.
pub const DEFAULT_ORBIT_STEPS: usize = 64;

/// Default RK4 step.
pub const DEFAULT_DT: f64 = 1e-3;

/// Phase tag attached to trajectory samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Pre,
    Transient,
    Post,
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Phase::Pre => "pre",
            Phase::Transient => "transient",
            Phase::Post => "post",
        })
    }
}

/// Time-stamped states whose dimension may change from sample to sample.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    times: Vec<f64>,
    states: Vec<CrossVec>,
    labels: Vec<Option<Phase>>,
}

impl Trajectory {
    pub fn new() -> Self {
        Self::default()
    }

    /// Appends a sample; times must be strictly increasing.
    pub fn push(&mut self, t: f64, state: CrossVec, label: Option<Phase>) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if t <= last {
                return Err(Error::Shape(format!(
                    "trajectory times must increase: {t} after {last}"
                )));
            }
        }
        self.times.push(t);
        self.states.push(state);
        self.labels.push(label);
        Ok(())
    }

    /// Appends `other`; a sample of `self` sharing `other`'s first time
    /// stamp is replaced by `other`'s.
    pub fn stitch(&mut self, other: Trajectory) -> Result<()> {
        if let (Some(&last), Some(&first)) = (self.times.last(), other.times.first()) {
            if last == first {
                self.times.pop();
                self.states.pop();
                self.labels.pop();
            }
        }
        for ((t, x), l) in other.times.into_iter().zip(other.states).zip(other.labels) {
            self.push(t, x, l)?;
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn states(&self) -> &[CrossVec] {
        &self.states
    }

    pub fn labels(&self) -> &[Option<Phase>] {
        &self.labels
    }

    pub fn last(&self) -> Option<(f64, &CrossVec)> {
        Some((*self.times.last()?, self.states.last()?))
    }

    pub fn dims(&self) -> Vec<usize> {
        self.states.iter().map(CrossVec::dim).collect()
    }

    pub fn max_dim(&self) -> usize {
        self.states.iter().map(CrossVec::dim).max().unwrap_or(0)
    }
}

/// One step of `x(t+1) = A ⃗∘ x(t)`.
pub fn step_discrete(a: &Mat, x: &CrossVec) -> Result<CrossVec> {
    mv2(a, x)
}

/// Iterated dimensions of the MV-2 action and the cycle they enter.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DimensionOrbit {
    /// Dimensions visited, ending with the first repeated value when a cycle was found.
    pub dims: Vec<usize>,
    /// Index of the first dimension on the cycle.
    pub preperiod: usize,
    /// Cycle length, `None` when no repeat occurred within the step cap.
    pub period: Option<usize>,
}

impl DimensionOrbit {
    /// The invariant dimension, when the orbit ends in a fixed point.
    pub fn fixed_dim(&self) -> Option<usize> {
        (self.period == Some(1)).then(|| self.dims[self.preperiod])
    }
}

pub fn dimension_orbit(a: &Mat, r0: usize, max_steps: usize) -> Result<DimensionOrbit> {
    let (m, n) = a.shape();
    let mut seen = HashMap::new();
    let mut dims = vec![r0];
    seen.insert(r0, 0usize);
    let mut r = r0;
    for step in 1..=max_steps {
        r = mv2_dim(m, n, r)?;
        dims.push(r);
        if let Some(&first) = seen.get(&r) {
            return Ok(DimensionOrbit { dims, preperiod: first, period: Some(step - first) });
        }
        seen.insert(r, step);
    }
    Ok(DimensionOrbit { dims, preperiod: 0, period: None })
}

/// Square matrix `A_*` of the action restricted to an invariant ℝᵈ:
/// `A_* = (A ⊗ J_{t/n})(I_d ⊗ 𝟏_{t/d})`, `t = lcm(n, d)`.
pub fn restricted_matrix(a: &Mat, d: usize) -> Result<Mat> {
    let (m, n) = a.shape();
    let image = mv2_dim(m, n, d)?;
    if image != d {
        return Err(Error::NotInvariant { dim: d, image });
    }
    let t = lcm(n, d)?;
    let inflated = kron(a, &j_mat(t / n))?;
    let replication = kron(&Mat::identity(d), &ones_vec(t / d))?;
    inflated.dot(&replication)
}

/// Iterates the discrete system for `steps` steps from `x0`.
///
/// Whenever the state sits in an invariant dimension the cached restricted
/// matrix is used instead of the MV-2 product; both give the same states.
pub fn simulate_discrete(a: &Mat, x0: &CrossVec, steps: usize) -> Result<Trajectory> {
    let (m, n) = a.shape();
    let mut traj = Trajectory::new();
    let mut x = x0.clone();
    traj.push(0.0, x.clone(), None)?;
    let mut cached: Option<(usize, Mat)> = None;
    for k in 1..=steps {
        let d = x.dim();
        x = match &cached {
            Some((cd, a_star)) if *cd == d => CrossVec::new(a_star.mul_vec(x.as_slice()))?,
            _ if mv2_dim(m, n, d)? == d => {
                let a_star = restricted_matrix(a, d)?;
                let next = CrossVec::new(a_star.mul_vec(x.as_slice()))?;
                cached = Some((d, a_star));
                next
            }
            _ => step_discrete(a, &x)?,
        };
        traj.push(k as f64, x.clone(), None)?;
    }
    Ok(traj)
}

/// Operator norm on 𝒱 of an m×n matrix: `√(n/m) · σ_max(A)`.
pub fn operator_vnorm(a: &Mat) -> Result<f64> {
    let (m, n) = a.shape();
    Ok((n as f64 / m as f64).sqrt() * spectral_norm(a)?)
}

/// Monte Carlo estimate of `sup ‖A ⃗∘ x‖_𝒱 / ‖x‖_𝒱`.
///
/// Sample `i` draws a dimension uniformly from `dims` and entries uniformly
/// from [−1, 1] using its own ChaCha8 stream, so the estimate is the same for
/// sequential and parallel execution.
pub fn sampled_gain(
    a: &Mat,
    dims: std::ops::RangeInclusive<usize>,
    samples: usize,
    seed: u64,
    exec: Execution,
) -> Result<f64> {
    if dims.is_empty() || *dims.start() == 0 {
        return Err(Error::Empty("sample dimension range"));
    }
    // validate every dimension once so the parallel closure cannot fail
    for r in dims.clone() {
        mv2_dim(a.rows(), a.cols(), r)?;
    }
    let (lo, hi) = (*dims.start(), *dims.end());
    Ok(par::max_range(exec, samples, |i| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(i as u64);
        let r = rng.gen_range(lo..=hi);
        let data: Vec<f64> = (0..r).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let x = CrossVec::from_vec_unchecked(data);
        let nx = vnorm(&x);
        if nx == 0.0 {
            return 0.0;
        }
        vnorm(&mv2(a, &x).expect("dimensions validated")) / nx
    }))
}

/// Uniform grid from `t0` to `te` with step at most `dt`.
pub fn time_grid(t0: f64, te: f64, dt: f64) -> Result<Vec<f64>> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::OutOfRange { name: "dt", value: dt });
    }
    if !t0.is_finite() || !te.is_finite() || te < t0 {
        return Err(Error::OutOfRange { name: "te", value: te });
    }
    let span = te - t0;
    let steps = ((span / dt) - 1e-9).ceil().max(0.0) as usize;
    if steps == 0 {
        return Ok(vec![t0]);
    }
    let h = span / steps as f64;
    let mut grid: Vec<f64> = (0..steps).map(|k| t0 + k as f64 * h).collect();
    grid.push(te);
    Ok(grid)
}

/// One classical Runge–Kutta step for `ẋ = f(t, x)`.
pub fn rk4_step<F>(f: &F, t: f64, x: &[f64], h: f64) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
{
    let axpy = |k: &[f64], s: f64| -> Vec<f64> { x.iter().zip(k).map(|(a, b)| a + s * b).collect() };
    let k1 = f(t, x);
    let k2 = f(t + 0.5 * h, &axpy(&k1, 0.5 * h));
    let k3 = f(t + 0.5 * h, &axpy(&k2, 0.5 * h));
    let k4 = f(t + h, &axpy(&k3, h));
    x.iter()
        .enumerate()
        .map(|(i, xi)| xi + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

/// Integrates `ẋ = f(t, x)` over `grid`, calling `observe` at every node.
pub fn integrate<F, O>(f: F, grid: &[f64], x0: Vec<f64>, mut observe: O) -> Vec<f64>
where
    F: Fn(f64, &[f64]) -> Vec<f64>,
    O: FnMut(f64, &[f64]),
{
    let mut x = x0;
    observe(grid[0], &x);
    for w in grid.windows(2) {
        x = rk4_step(&f, w[0], &x, w[1] - w[0]);
        observe(w[1], &x);
    }
    x
}

/// RK4 solution of `ẋ = A x` on `[t0, te]`.
pub fn simulate_continuous(a: &Mat, x0: &CrossVec, t0: f64, te: f64, dt: f64) -> Result<Trajectory> {
    if !a.is_square() {
        return Err(Error::Shape(format!(
            "continuous flow needs a square matrix, got {:?}; restrict or lift first",
            a.shape()
        )));
    }
    if a.rows() != x0.dim() {
        return Err(Error::Shape(format!("A has order {}, x0 has dim {}", a.rows(), x0.dim())));
    }
    let grid = time_grid(t0, te, dt)?;
    let mut traj = Trajectory::new();
    let mut failure = None;
    integrate(|_, x| a.mul_vec(x), &grid, x0.as_slice().to_vec(), |t, x| {
        if failure.is_some() {
            return;
        }
        if let Err(e) = CrossVec::from_slice(x).and_then(|v| traj.push(t, v, None)) {
            failure = Some(e);
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}
