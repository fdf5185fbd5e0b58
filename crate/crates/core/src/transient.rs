//! Dimension-varying transient dynamics and open-loop steering.
//!
//! A pre-model Σ₁ on ℝᵖ and a post-model Σ₂ on ℝ^q are projected into
//! ℝⁿ, n = lcm(p, q), and blended:
//!
//! ```text
//! ż = [μ(t) A₁ + (1 − μ(t)) A₂] z + μ(t) B₁ u + (1 − μ(t)) B₂ v
//! ```
//!
//! starting from `z(t₀) = x(t₀) ⊗ 𝟏_{n/p}`. The transience is realized when
//! `z(t_e)` lies in `ℝ^q ⊗ 𝟏_{n/q}`, i.e. is the lifted image of a dim-q
//! state. Inputs `u` and `v` are designed jointly through `[B₁* B₂*]` as the
//! minimum-energy control of the time-varying blend, using the reachability
//! Gramian integrated with the same RK4 grid as the simulation.

use crate::dynamics::{integrate, time_grid, Phase, Trajectory, DEFAULT_DT};
use crate::error::{Error, Result};
use crate::linalg::svd;
use crate::mat::{CrossVec, Mat};
use crate::par::{self, Execution};
use crate::projection::{pi_matrix, project_system, project_vector, LinSys, TimeKind};
use crate::quotient::{reduce_vector_with, VecClass, DEFAULT_EPS};
use crate::stp::{kron, lcm, ones_vec};
use crate::vspace::vdist;

/// Default endpoint tolerance for declaring a transience realized.
pub const DEFAULT_TOL: f64 = 1e-6;

/// Relative singular-value cut used for rank decisions and pseudo-inverses.
pub const RANK_RTOL: f64 = 1e-9;

/// Blending weight of the pre-model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MuSchedule {
    /// Fixed weight strictly inside (0, 1).
    Constant(f64),
    /// Falls linearly from 1 at `start` to 0 at `end`; clamped outside.
    Linear { start: f64, end: f64 },
}

impl MuSchedule {
    pub fn constant(mu: f64) -> Result<Self> {
        if !(mu > 0.0 && mu < 1.0) {
            return Err(Error::OutOfRange { name: "mu", value: mu });
        }
        Ok(MuSchedule::Constant(mu))
    }

    /// Momentum-conservation weight `m₁ / (m₁ + m₂)` from formal masses.
    pub fn from_masses(m1: f64, m2: f64) -> Result<Self> {
        for (name, v) in [("m1", m1), ("m2", m2)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::OutOfRange { name, value: v });
            }
        }
        Self::constant(m1 / (m1 + m2))
    }

    pub fn linear(start: f64, end: f64) -> Result<Self> {
        if !start.is_finite() || !end.is_finite() || end <= start {
            return Err(Error::OutOfRange { name: "linear schedule end", value: end });
        }
        Ok(MuSchedule::Linear { start, end })
    }

    pub fn value(&self, t: f64) -> f64 {
        match *self {
            MuSchedule::Constant(mu) => mu,
            MuSchedule::Linear { start, end } => ((end - t) / (end - start)).clamp(0.0, 1.0),
        }
    }
}

/// Where the transient state must end up.
#[derive(Debug, Clone, PartialEq)]
pub enum Target {
    /// A specific point of ℝⁿ, which must belong to `ℝ^q ⊗ 𝟏_{n/q}`.
    Explicit(CrossVec),
    /// Any point of `ℝ^q ⊗ 𝟏_{n/q}`; the closest reachable one is chosen.
    Subspace,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransientScenario {
    pub sigma1: LinSys,
    pub sigma2: LinSys,
    pub t0: f64,
    pub te: f64,
    pub mu: MuSchedule,
    /// State of Σ₁ at `t0`.
    pub x_t0: CrossVec,
    pub target: Target,
    pub dt: f64,
    pub tol: f64,
}

impl TransientScenario {
    /// Validated scenario with the default step and tolerance.
    pub fn new(
        sigma1: LinSys,
        sigma2: LinSys,
        t0: f64,
        te: f64,
        mu: MuSchedule,
        x_t0: CrossVec,
        target: Target,
    ) -> Result<Self> {
        let s = Self { sigma1, sigma2, t0, te, mu, x_t0, target, dt: DEFAULT_DT, tol: DEFAULT_TOL };
        s.validate()?;
        Ok(s)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    pub fn with_tol(mut self, tol: f64) -> Result<Self> {
        self.tol = tol;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !self.t0.is_finite() || !self.te.is_finite() || self.te < self.t0 {
            return Err(Error::OutOfRange { name: "te", value: self.te });
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::OutOfRange { name: "dt", value: self.dt });
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::OutOfRange { name: "tol", value: self.tol });
        }
        if self.x_t0.dim() != self.p() {
            return Err(Error::Shape(format!(
                "x_t0 has dim {}, pre-model has order {}",
                self.x_t0.dim(),
                self.p()
            )));
        }
        if let MuSchedule::Constant(mu) = self.mu {
            MuSchedule::constant(mu)?;
        }
        let n = self.n()?;
        if let Target::Explicit(z) = &self.target {
            if z.dim() != n {
                return Err(Error::InvalidTarget(format!("has dim {}, expected n = {n}", z.dim())));
            }
            let rep_dim = reduce_vector_with(z, DEFAULT_EPS).class.dim();
            if !self.q().is_multiple_of(rep_dim) {
                return Err(Error::InvalidTarget(format!(
                    "does not lie in R^{} ⊗ 1_{} (minimal dimension {rep_dim})",
                    self.q(),
                    n / self.q()
                )));
            }
        }
        Ok(())
    }

    pub fn p(&self) -> usize {
        self.sigma1.order()
    }

    pub fn q(&self) -> usize {
        self.sigma2.order()
    }

    /// Common dimension `lcm(p, q)`.
    pub fn n(&self) -> Result<usize> {
        lcm(self.p(), self.q())
    }

    /// `z(t₀) = x(t₀) ⊗ 𝟏_{n/p}`.
    pub fn initial_state(&self) -> Result<CrossVec> {
        let n = self.n()?;
        pi_matrix(self.p(), n)?.apply(&self.x_t0)
    }
}

/// A time-varying linear plant `ż = A(t) z + B(t) w`.
pub trait LtvPlant: Sync {
    fn order(&self) -> usize;
    fn drift(&self, t: f64) -> Mat;
    fn input(&self, t: f64) -> Mat;
}

/// Blended transient system on ℝⁿ.
#[derive(Debug, Clone, PartialEq)]
pub struct Blend {
    pub n: usize,
    /// Projected drift of Σ₁.
    pub a1: Mat,
    /// Projected drift of Σ₂.
    pub a2: Mat,
    pub b1: Option<Mat>,
    pub b2: Option<Mat>,
    pub mu: MuSchedule,
}

impl Blend {
    pub fn a_at(&self, t: f64) -> Mat {
        let mu = self.mu.value(t);
        &self.a1.scale(mu) + &self.a2.scale(1.0 - mu)
    }

    pub fn b1_at(&self, t: f64) -> Option<Mat> {
        self.b1.as_ref().map(|b| b.scale(self.mu.value(t)))
    }

    pub fn b2_at(&self, t: f64) -> Option<Mat> {
        self.b2.as_ref().map(|b| b.scale(1.0 - self.mu.value(t)))
    }

    /// Number of columns of the joint input `[B₁* B₂*]`.
    pub fn inputs(&self) -> usize {
        self.b1.as_ref().map_or(0, Mat::cols) + self.b2.as_ref().map_or(0, Mat::cols)
    }
}

impl LtvPlant for Blend {
    fn order(&self) -> usize {
        self.n
    }

    fn drift(&self, t: f64) -> Mat {
        self.a_at(t)
    }

    /// `[B₁*(t) B₂*(t)]`, or a zero column when neither model has inputs.
    fn input(&self, t: f64) -> Mat {
        match (self.b1_at(t), self.b2_at(t)) {
            (Some(b1), Some(b2)) => b1.hstack(&b2).expect("both blocks have n rows"),
            (Some(b), None) | (None, Some(b)) => b,
            (None, None) => Mat::zeros(self.n, 1),
        }
    }
}

/// A time-invariant system viewed as an LTV plant.
pub struct Lti<'a>(pub &'a LinSys);

impl LtvPlant for Lti<'_> {
    fn order(&self) -> usize {
        self.0.order()
    }

    fn drift(&self, _t: f64) -> Mat {
        self.0.a.clone()
    }

    fn input(&self, _t: f64) -> Mat {
        self.0.b.clone().unwrap_or_else(|| Mat::zeros(self.0.order(), 1))
    }
}

/// Projects both models into ℝⁿ and assembles the blend.
pub fn build_blend(scenario: &TransientScenario) -> Result<Blend> {
    let n = scenario.n()?;
    let s1 = project_system(&scenario.sigma1, n)?;
    let s2 = project_system(&scenario.sigma2, n)?;
    Ok(Blend { n, a1: s1.a, a2: s2.a, b1: s1.b, b2: s2.b, mu: scenario.mu })
}

/// The pre- and post-clutch models and their projections on ℝ².
#[derive(Debug, Clone, PartialEq)]
pub struct ClutchModels {
    /// Disengaged: two decoupled inertias, input `(τ_i, τ_o)`.
    pub sigma1: LinSys,
    /// Engaged: one combined inertia, same input.
    pub sigma2: LinSys,
    pub sigma1_proj: LinSys,
    pub sigma2_proj: LinSys,
}

/// Clutch models from input/output inertias and viscous friction coefficients.
pub fn clutch_models(j_i: f64, j_o: f64, d_i: f64, d_o: f64) -> Result<ClutchModels> {
    for (name, v) in [("j_i", j_i), ("j_o", j_o)] {
        if !(v > 0.0 && v.is_finite()) {
            return Err(Error::OutOfRange { name, value: v });
        }
    }
    for (name, v) in [("d_i", d_i), ("d_o", d_o)] {
        if !(v >= 0.0 && v.is_finite()) {
            return Err(Error::OutOfRange { name, value: v });
        }
    }
    let a1 = Mat::diag(&[-d_i / j_i, -d_o / j_o])?;
    let b1 = Mat::diag(&[1.0 / j_i, -1.0 / j_o])?;
    let j = j_i + j_o;
    let a2 = Mat::from_rows(&[[-(d_i + d_o) / j]])?;
    let b2 = Mat::from_rows(&[[1.0 / j, -1.0 / j]])?;
    let sigma1 = LinSys::new(a1, Some(b1), None, TimeKind::Continuous)?;
    let sigma2 = LinSys::new(a2, Some(b2), None, TimeKind::Continuous)?;
    let sigma1_proj = project_system(&sigma1, 2)?;
    let sigma2_proj = project_system(&sigma2, 2)?;
    Ok(ClutchModels { sigma1, sigma2, sigma1_proj, sigma2_proj })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Controllability {
    pub controllable: bool,
    pub rank: usize,
}

/// Kalman rank test on `[B, AB, …, Aⁿ⁻¹B]`.
pub fn is_controllable(a: &Mat, b: &Mat) -> Result<Controllability> {
    let n = a.rows();
    if !a.is_square() || b.rows() != n {
        return Err(Error::Shape(format!(
            "controllability needs square A and B with {n} rows, got {:?} and {:?}",
            a.shape(),
            b.shape()
        )));
    }
    let mut block = b.clone();
    let mut kalman = b.clone();
    for _ in 1..n {
        block = a.dot(&block)?;
        kalman = kalman.hstack(&block)?;
    }
    let rank = svd(&kalman)?.rank(RANK_RTOL);
    Ok(Controllability { controllable: rank == n, rank })
}

/// Reachability Gramian over a window together with the transition matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian {
    /// `W = ∫ Φ(te,τ) B(τ) B(τ)ᵀ Φ(te,τ)ᵀ dτ`.
    pub w: Mat,
    /// `Φ(te, t0)`.
    pub phi: Mat,
}

/// Integrates `Φ̇ = AΦ` and `Ẇ = AW + WAᵀ + BBᵀ` with RK4 over `grid`.
pub fn reachability_gramian<P: LtvPlant + ?Sized>(plant: &P, grid: &[f64]) -> Gramian {
    let n = plant.order();
    let nn = n * n;
    let mut init = vec![0.0; 2 * nn];
    for i in 0..n {
        init[i * n + i] = 1.0;
    }
    let rhs = |t: f64, s: &[f64]| -> Vec<f64> {
        let a = plant.drift(t);
        let b = plant.input(t);
        let phi = Mat::from_raw(n, n, s[..nn].to_vec());
        let w = Mat::from_raw(n, n, s[nn..].to_vec());
        let aw = &a * &w;
        let lyap = &(&aw + &aw.transpose()) + &(&b * &b.transpose());
        let mut out = (&a * &phi).into_vec();
        out.extend(lyap.into_vec());
        out
    };
    let end = integrate(rhs, grid, init, |_, _| {});
    Gramian {
        phi: Mat::from_raw(n, n, end[..nn].to_vec()),
        w: Mat::from_raw(n, n, end[nn..].to_vec()),
    }
}

/// Gramian of the scenario's blended system over `[t0, te]`.
pub fn gramian(scenario: &TransientScenario) -> Result<Gramian> {
    let blend = build_blend(scenario)?;
    let grid = time_grid(scenario.t0, scenario.te, scenario.dt)?;
    let g = reachability_gramian(&blend, &grid);
    if g.w.as_slice().iter().chain(g.phi.as_slice()).any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence { what: "Gramian integration", iterations: grid.len() });
    }
    Ok(g)
}

/// Minimum-energy open-loop control `w(τ) = B(τ)ᵀ Φ(te,τ)ᵀ η`.
///
/// The costate `λ(τ) = Φ(te,τ)ᵀ η` obeys `λ̇ = −A(τ)ᵀ λ`, so the control is
/// fully described by `λ(t0)`; `controls` samples it on the design grid.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyControl {
    pub grid: Vec<f64>,
    pub z0: CrossVec,
    pub target: CrossVec,
    pub eta: Vec<f64>,
    pub costate0: Vec<f64>,
    /// `Φ z0 + W η`.
    pub predicted_endpoint: CrossVec,
    /// `‖predicted_endpoint − target‖`.
    pub residual: f64,
    pub gramian: Gramian,
    /// `(t, w(t))` at every grid node.
    pub controls: Vec<(f64, Vec<f64>)>,
}

enum Goal<'a> {
    Point(&'a CrossVec),
    /// Any point of `ℝ^q ⊗ 𝟏_{n/q}`.
    Lifted { q: usize },
}

/// Closest point of `range(L)`, `L = I_q ⊗ 𝟏_{n/q}`, to the free endpoint
/// `f` among those reachable from it (`target − f ∈ range W`).
fn subspace_target(w: &Mat, f: &CrossVec, q: usize) -> Result<CrossVec> {
    let n = f.dim();
    let l = kron(&Mat::identity(q), &ones_vec(n / q))?;
    let wsvd = svd(w)?;
    let r = wsvd.rank(RANK_RTOL);
    // projector onto the complement of range(W)
    let p_perp = Mat::from_fn(n, n, |i, j| {
        let range: f64 = (0..r).map(|k| wsvd.u[(i, k)] * wsvd.u[(j, k)]).sum();
        if i == j {
            1.0 - range
        } else {
            -range
        }
    });
    let fcol = f.to_column();
    let m = &p_perp * &l;
    let msvd = svd(&m)?;
    let mut y = &msvd.pinv(RANK_RTOL) * &(&p_perp * &fcol);
    if let Some(null) = msvd.null_space(RANK_RTOL) {
        let ln = &l * &null;
        let resid = &fcol - &(&l * &y);
        let shift = &svd(&ln)?.pinv(RANK_RTOL) * &resid;
        y = &y + &(&null * &shift);
    }
    CrossVec::new((&l * &y).into_vec())
}

fn design<P: LtvPlant + ?Sized>(
    plant: &P,
    grid: Vec<f64>,
    z0: &CrossVec,
    goal: Goal<'_>,
    tol: f64,
) -> Result<EnergyControl> {
    let n = plant.order();
    let gramian = reachability_gramian(plant, &grid);
    if gramian.w.as_slice().iter().chain(gramian.phi.as_slice()).any(|v| !v.is_finite()) {
        return Err(Error::NoConvergence { what: "Gramian integration", iterations: grid.len() });
    }
    let free = CrossVec::new(gramian.phi.mul_vec(z0.as_slice()))?;
    let target = match goal {
        Goal::Point(z) => z.clone(),
        Goal::Lifted { q } => subspace_target(&gramian.w, &free, q)?,
    };
    let d: Vec<f64> = target.as_slice().iter().zip(free.as_slice()).map(|(a, b)| a - b).collect();
    let eta = svd(&gramian.w)?.pinv(RANK_RTOL).mul_vec(&d);
    let reached = gramian.w.mul_vec(&eta);
    let predicted: Vec<f64> = free.as_slice().iter().zip(&reached).map(|(a, b)| a + b).collect();
    let predicted_endpoint = CrossVec::new(predicted)?;
    let residual = predicted_endpoint
        .as_slice()
        .iter()
        .zip(target.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    if residual.is_nan() || residual > tol {
        return Err(Error::NotRealizable { residual, tol });
    }
    let costate0 = gramian.phi.transpose().mul_vec(&eta);
    let mut controls = Vec::with_capacity(grid.len());
    integrate(
        |t, lam| plant.drift(t).transpose().mul_vec(lam).into_iter().map(|v| -v).collect(),
        &grid,
        costate0.clone(),
        |t, lam| controls.push((t, plant.input(t).transpose().mul_vec(lam))),
    );
    debug_assert_eq!(n, target.dim());
    Ok(EnergyControl {
        grid,
        z0: z0.clone(),
        target,
        eta,
        costate0,
        predicted_endpoint,
        residual,
        gramian,
        controls,
    })
}

/// Designs the joint minimum-energy control steering `z(t₀)` to the target.
///
/// Fails with [`Error::NotRealizable`] when the Gramian cannot reach the
/// target within the scenario tolerance.
pub fn min_energy_control(scenario: &TransientScenario) -> Result<EnergyControl> {
    scenario.validate()?;
    let blend = build_blend(scenario)?;
    let grid = time_grid(scenario.t0, scenario.te, scenario.dt)?;
    let z0 = scenario.initial_state()?;
    let goal = match &scenario.target {
        Target::Explicit(z) => Goal::Point(z),
        Target::Subspace => Goal::Lifted { q: scenario.q() },
    };
    design(&blend, grid, &z0, goal, scenario.tol)
}

/// Simulates `ż = A z + B Bᵀ λ`, `λ̇ = −Aᵀ λ` jointly on the design grid.
fn simulate_steered<P: LtvPlant + ?Sized>(
    plant: &P,
    ctl: &EnergyControl,
    label: Phase,
) -> Result<Trajectory> {
    let n = plant.order();
    let mut init = ctl.z0.as_slice().to_vec();
    init.extend_from_slice(&ctl.costate0);
    let rhs = |t: f64, s: &[f64]| -> Vec<f64> {
        let a = plant.drift(t);
        let b = plant.input(t);
        let (z, lam) = s.split_at(n);
        let u = b.transpose().mul_vec(lam);
        let mut dz = a.mul_vec(z);
        for (d, bu) in dz.iter_mut().zip(b.mul_vec(&u)) {
            *d += bu;
        }
        let dl = a.transpose().mul_vec(lam).into_iter().map(|v| -v);
        dz.extend(dl);
        dz
    };
    let mut traj = Trajectory::new();
    let mut failure = None;
    integrate(rhs, &ctl.grid, init, |t, s| {
        if failure.is_none() {
            if let Err(e) = CrossVec::from_slice(&s[..n]).and_then(|z| traj.push(t, z, Some(label))) {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Outcome of simulating the designed transience.
#[derive(Debug, Clone, PartialEq)]
pub struct TransienceReport {
    pub trajectory: Trajectory,
    pub controls: Vec<(f64, Vec<f64>)>,
    pub target: CrossVec,
    pub endpoint: CrossVec,
    /// `‖z(te) − target‖` of the simulated endpoint.
    pub steering_residual: f64,
    /// `‖·‖` residual predicted by the Gramian design.
    pub design_residual: f64,
    /// `d_𝒱(z(te), target)`.
    pub distance: f64,
    /// Minimal representative of `z(te)` under tolerance-`tol` reduction.
    pub reduced: VecClass,
    /// `y(te)`: projection of `z(te)` onto ℝ^q.
    pub post_state: CrossVec,
    pub realized: bool,
}

pub fn realize_transience(scenario: &TransientScenario) -> Result<TransienceReport> {
    let ctl = min_energy_control(scenario)?;
    let blend = build_blend(scenario)?;
    let trajectory = simulate_steered(&blend, &ctl, Phase::Transient)?;
    let (_, endpoint) = trajectory.last().expect("grid is nonempty");
    let endpoint = endpoint.clone();
    let steering_residual = endpoint
        .as_slice()
        .iter()
        .zip(ctl.target.as_slice())
        .map(|(a, b)| (a - b).powi(2))
        .sum::<f64>()
        .sqrt();
    let distance = vdist(&endpoint, &ctl.target)?;
    let reduced = reduce_vector_with(&endpoint, scenario.tol).class;
    let post_state = project_vector(&endpoint, scenario.q())?;
    let realized = scenario.q().is_multiple_of(reduced.dim()) && distance <= scenario.tol;
    Ok(TransienceReport {
        trajectory,
        controls: ctl.controls,
        target: ctl.target,
        endpoint,
        steering_residual,
        design_residual: ctl.residual,
        distance,
        reduced,
        post_state,
        realized,
    })
}

/// Runs independent scenarios, in parallel when requested.
pub fn realize_batch(
    scenarios: &[TransientScenario],
    exec: Execution,
) -> Vec<Result<TransienceReport>> {
    par::map(exec, scenarios, realize_transience)
}

/// Pre-transience phase: Σ₁ tracks a minimum-energy reference from
/// `x_start` at `t_start` to the scenario's `x_t0` under `u = u_ref − K (x − x_ref)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PrePhase {
    pub t_start: f64,
    pub x_start: CrossVec,
    pub gain: Mat,
}

/// Post-transience phase: Σ₂ regulated by `v = −K y` until `t_end`.
#[derive(Debug, Clone, PartialEq)]
pub struct PostPhase {
    pub t_end: f64,
    pub gain: Mat,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhasedRun {
    pub trajectory: Trajectory,
    pub pre_end: CrossVec,
    pub transience: TransienceReport,
    pub post_end: CrossVec,
}

fn check_gain(gain: &Mat, sys: &LinSys, which: &str) -> Result<()> {
    let inputs = sys.inputs();
    if inputs == 0 {
        return Err(Error::Shape(format!("{which} feedback needs a model with inputs")));
    }
    if gain.shape() != (inputs, sys.order()) {
        return Err(Error::Shape(format!(
            "{which} gain is {:?}, expected {inputs}x{}",
            gain.shape(),
            sys.order()
        )));
    }
    Ok(())
}

fn run_pre(pre: &PrePhase, scenario: &TransientScenario) -> Result<Trajectory> {
    let sys = &scenario.sigma1;
    check_gain(&pre.gain, sys, "pre-phase")?;
    if pre.x_start.dim() != sys.order() {
        return Err(Error::Shape(format!(
            "pre-phase start has dim {}, Σ₁ has order {}",
            pre.x_start.dim(),
            sys.order()
        )));
    }
    let grid = time_grid(pre.t_start, scenario.t0, scenario.dt)?;
    let plant = Lti(sys);
    let reference = design(&plant, grid, &pre.x_start, Goal::Point(&scenario.x_t0), scenario.tol)?;
    let p = sys.order();
    let a = &sys.a;
    let b = sys.b.as_ref().expect("checked by check_gain");
    let bt = b.transpose();
    let at = a.transpose();
    // state: [x, x_ref, λ]
    let rhs = |_t: f64, s: &[f64]| -> Vec<f64> {
        let (x, rest) = s.split_at(p);
        let (xr, lam) = rest.split_at(p);
        let u_ref = bt.mul_vec(lam);
        let err: Vec<f64> = x.iter().zip(xr).map(|(a, b)| a - b).collect();
        let fb = pre.gain.mul_vec(&err);
        let u: Vec<f64> = u_ref.iter().zip(&fb).map(|(r, f)| r - f).collect();
        let mut out: Vec<f64> = a.mul_vec(x).iter().zip(b.mul_vec(&u)).map(|(a, b)| a + b).collect();
        out.extend(a.mul_vec(xr).iter().zip(b.mul_vec(&u_ref)).map(|(a, b)| a + b));
        out.extend(at.mul_vec(lam).into_iter().map(|v| -v));
        out
    };
    let mut init = pre.x_start.as_slice().to_vec();
    init.extend_from_slice(pre.x_start.as_slice());
    init.extend_from_slice(&reference.costate0);
    let mut traj = Trajectory::new();
    let mut failure = None;
    integrate(rhs, &reference.grid, init, |t, s| {
        if failure.is_none() {
            if let Err(e) = CrossVec::from_slice(&s[..p]).and_then(|x| traj.push(t, x, Some(Phase::Pre))) {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

fn run_post(post: &PostPhase, scenario: &TransientScenario, y0: &CrossVec) -> Result<Trajectory> {
    let sys = &scenario.sigma2;
    check_gain(&post.gain, sys, "post-phase")?;
    let b = sys.b.as_ref().expect("checked by check_gain");
    let closed = &sys.a - &(b * &post.gain);
    let grid = time_grid(scenario.te, post.t_end, scenario.dt)?;
    let mut traj = Trajectory::new();
    let mut failure = None;
    integrate(|_, y| closed.mul_vec(y), &grid, y0.as_slice().to_vec(), |t, y| {
        if failure.is_none() {
            if let Err(e) = CrossVec::from_slice(y).and_then(|y| traj.push(t, y, Some(Phase::Post))) {
                failure = Some(e);
            }
        }
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(traj),
    }
}

/// Pre-phase on Σ₁, designed transience, then post-phase on Σ₂, stitched
/// into one trajectory whose samples keep their native dimensions.
pub fn run_phased(pre: &PrePhase, scenario: &TransientScenario, post: &PostPhase) -> Result<PhasedRun> {
    scenario.validate()?;
    let mut trajectory = run_pre(pre, scenario)?;
    let (_, pre_end) = trajectory.last().expect("grid is nonempty");
    let pre_end = pre_end.clone();
    let deviation = pre_end.max_abs_diff(&scenario.x_t0);
    if deviation.is_nan() || deviation > scenario.tol {
        return Err(Error::PhaseMismatch { time: scenario.t0, deviation, tol: scenario.tol });
    }

    let transience = realize_transience(scenario)?;
    let deviation = vdist(&transience.endpoint, &transience.post_state)?;
    if !transience.realized || deviation.is_nan() || deviation > scenario.tol {
        return Err(Error::PhaseMismatch {
            time: scenario.te,
            deviation: deviation.max(transience.distance),
            tol: scenario.tol,
        });
    }
    trajectory.stitch(transience.trajectory.clone())?;

    let post_traj = run_post(post, scenario, &transience.post_state)?;
    let post_end = post_traj.last().expect("grid is nonempty").1.clone();
    trajectory.stitch(post_traj)?;
    Ok(PhasedRun { trajectory, pre_end, transience, post_end })
}
