//! Mode dispatch and plain-text run reports.

use std::fmt::Write as _;

use crossdim::dynamics::{dimension_orbit, DEFAULT_ORBIT_STEPS};
use crossdim::quotient::{reduce_matrix_with, reduce_vecmat_with, reduce_vector_with};
use crossdim::transient::{build_blend, LtvPlant, TransienceReport};
use crossdim::{
    is_controllable, operator_vnorm, project_system, project_vector, realize_transience, run_phased,
    sampled_gain, simulate_continuous, simulate_discrete, spectral_norm, CrossVec, Execution, LinSys,
    Mat, MuSchedule, Result, Target, Trajectory, TransientScenario,
};

use crate::scenario::{Job, Simulation};

/// What a run produced. `realized` is false when the numeric goal was not met
/// even though the computation itself finished.
#[derive(Debug)]
pub struct Outcome {
    pub report: String,
    pub trajectory: Option<Trajectory>,
    pub realized: bool,
}

pub fn run(job: &Job) -> Result<Outcome> {
    let mut r = String::new();
    line(&mut r, "mode", job.mode());
    match job {
        Job::Project { n, x, system } => project(&mut r, *n, x.as_ref(), system.as_ref()),
        Job::Simulate(sim) => simulate(&mut r, sim),
        Job::Transient(sc) => transient(&mut r, sc),
        Job::Phased { scenario, pre, post } => {
            describe_scenario(&mut r, scenario)?;
            let out = run_phased(pre, scenario, post)?;
            line(&mut r, "pre window", format!("[{}, {}]", pre.t_start, scenario.t0));
            line(&mut r, "x(t0)", &out.pre_end);
            transience_lines(&mut r, scenario, &out.transience);
            line(&mut r, "post window", format!("[{}, {}]", scenario.te, post.t_end));
            line(&mut r, "y(t_end)", &out.post_end);
            line(&mut r, "samples", out.trajectory.len());
            line(&mut r, "verdict", "realized");
            Ok(Outcome { report: r, trajectory: Some(out.trajectory), realized: true })
        }
        Job::Reduce { x, a, b, eps } => {
            reduce(&mut r, x.as_ref(), a.as_ref(), b.as_ref(), *eps);
            Ok(Outcome { report: r, trajectory: None, realized: true })
        }
        Job::Norm { a, sampling } => {
            norm(&mut r, a)?;
            if let Some(s) = sampling {
                let gain = sampled_gain(a, s.dims.clone(), s.samples, s.seed, Execution::default())?;
                line(
                    &mut r,
                    "sampled gain",
                    format!(
                        "{} ({} samples, dims {}..={}, seed {})",
                        fmt_num(gain),
                        s.samples,
                        s.dims.start(),
                        s.dims.end(),
                        s.seed
                    ),
                );
            }
            Ok(Outcome { report: r, trajectory: None, realized: true })
        }
    }
}

fn line(r: &mut String, key: &str, value: impl std::fmt::Display) {
    writeln!(r, "{key}: {value}").expect("writing to a String");
}

fn block(r: &mut String, key: &str, m: &Mat) {
    writeln!(r, "{key} ({}x{}):", m.rows(), m.cols()).expect("writing to a String");
    write!(r, "{m}").expect("writing to a String");
}

fn fmt_num(x: f64) -> String {
    format!("{x:.12e}")
}

fn project(r: &mut String, n: usize, x: Option<&CrossVec>, sys: Option<&LinSys>) -> Result<Outcome> {
    line(r, "target dim", n);
    if let Some(x) = x {
        line(r, "x", x);
        line(r, "projection", project_vector(x, n)?);
    }
    if let Some(sys) = sys {
        line(r, "system order", sys.order());
        let p = project_system(sys, n)?;
        block(r, "A_pi", &p.a);
        if let Some(b) = &p.b {
            block(r, "B_pi", b);
        }
        if let Some(c) = &p.c {
            block(r, "C_pi", c);
        }
    }
    Ok(Outcome { report: std::mem::take(r), trajectory: None, realized: true })
}

fn simulate(r: &mut String, sim: &Simulation) -> Result<Outcome> {
    let traj = match sim {
        Simulation::Discrete { a, x0, steps } => {
            let orbit = dimension_orbit(a, x0.dim(), DEFAULT_ORBIT_STEPS)?;
            let dims: Vec<String> = orbit.dims.iter().map(usize::to_string).collect();
            line(r, "dimension orbit", dims.join(" -> "));
            match orbit.period {
                Some(p) => line(r, "cycle", format!("preperiod {}, period {p}", orbit.preperiod)),
                None => line(r, "cycle", format!("none within {DEFAULT_ORBIT_STEPS} steps")),
            }
            line(r, "operator norm", fmt_num(operator_vnorm(a)?));
            let traj = simulate_discrete(a, x0, *steps)?;
            line(r, "steps", steps);
            traj
        }
        Simulation::Continuous { a, x0, t0, te, dt } => {
            line(r, "window", format!("[{t0}, {te}] dt={dt}"));
            simulate_continuous(a, x0, *t0, *te, *dt)?
        }
    };
    let (t, x) = traj.last().expect("trajectory has the initial sample");
    line(r, "final time", t);
    line(r, "final state", x);
    Ok(Outcome { report: std::mem::take(r), trajectory: Some(traj), realized: true })
}

fn describe_scenario(r: &mut String, sc: &TransientScenario) -> Result<()> {
    let n = sc.n()?;
    line(r, "dims", format!("p={} q={} n={n}", sc.p(), sc.q()));
    let mu = match sc.mu {
        MuSchedule::Constant(mu) => format!("constant {mu}"),
        MuSchedule::Linear { start, end } => format!("linear from 1 at {start} to 0 at {end}"),
    };
    line(r, "mu", mu);
    line(r, "window", format!("[{}, {}] dt={} tol={}", sc.t0, sc.te, sc.dt, sc.tol));
    line(r, "z(t0)", sc.initial_state()?);
    match &sc.target {
        Target::Explicit(z) => line(r, "target", z),
        Target::Subspace => line(r, "target", format!("subspace R^{} (x) 1_{}", sc.q(), n / sc.q())),
    }
    let blend = build_blend(sc)?;
    let ctrl = is_controllable(&blend.drift(sc.t0), &blend.input(sc.t0))?;
    line(r, "controllability rank at t0", format!("{} of {n}", ctrl.rank));
    Ok(())
}

fn transience_lines(r: &mut String, sc: &TransientScenario, rep: &TransienceReport) {
    if sc.target == Target::Subspace {
        line(r, "designed target", &rep.target);
    }
    line(r, "z(te)", &rep.endpoint);
    line(r, "design residual", fmt_num(rep.design_residual));
    line(r, "steering residual", fmt_num(rep.steering_residual));
    line(r, "vdist to target", fmt_num(rep.distance));
    let peak = rep
        .controls
        .iter()
        .flat_map(|(_, u)| u.iter())
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    line(r, "peak control", fmt_num(peak));
    line(r, "reduced z(te)", format!("{} (dim {})", rep.reduced.rep(), rep.reduced.dim()));
    line(r, "y(te)", &rep.post_state);
}

fn transient(r: &mut String, sc: &TransientScenario) -> Result<Outcome> {
    describe_scenario(r, sc)?;
    let rep = realize_transience(sc)?;
    transience_lines(r, sc, &rep);
    line(r, "verdict", if rep.realized { "realized" } else { "not realized" });
    Ok(Outcome { report: std::mem::take(r), trajectory: Some(rep.trajectory), realized: rep.realized })
}

fn reduce(r: &mut String, x: Option<&CrossVec>, a: Option<&Mat>, b: Option<&Mat>, eps: Option<f64>) {
    let eps = eps.unwrap_or(0.0);
    if eps > 0.0 {
        line(r, "eps", eps);
    }
    if let Some(x) = x {
        let red = reduce_vector_with(x, eps);
        line(r, "vector", format!("{}, factor {}", red.class.rep(), red.factor));
        if eps > 0.0 {
            line(r, "vector deviation", fmt_num(red.deviation));
        }
    }
    if let Some(a) = a {
        let red = reduce_matrix_with(a, eps);
        block(r, &format!("matrix, factor {}", red.factor), red.class.rep());
    }
    if let Some(b) = b {
        let red = reduce_vecmat_with(b, eps);
        block(r, &format!("input matrix, factor {}", red.factor), red.class.rep());
    }
}

fn norm(r: &mut String, a: &Mat) -> Result<()> {
    line(r, "shape", format!("{}x{}", a.rows(), a.cols()));
    line(r, "spectral norm", fmt_num(spectral_norm(a)?));
    line(r, "operator norm", fmt_num(operator_vnorm(a)?));
    Ok(())
}
