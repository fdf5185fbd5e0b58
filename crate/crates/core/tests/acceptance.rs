//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod support;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use crossdim::dynamics::{restricted_matrix, simulate_continuous};
use crossdim::transient::{build_blend, clutch_models, gramian, LtvPlant};
use crossdim::{
    mv2, project_system, project_vector, realize_transience, CrossVec, LinSys, Mat, MuSchedule,
    Target, TransientScenario,
};
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

struct Verdict {
    id: &'static str,
    title: &'static str,
    failures: Vec<String>,
    detail: String,
}

impl Verdict {
    fn new(id: &'static str, title: &'static str) -> Self {
        Self { id, title, failures: Vec::new(), detail: String::new() }
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.failures.push(what.into());
        }
    }

    fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

fn m(rows: &[&[f64]]) -> Mat {
    Mat::from_rows(rows).unwrap()
}

fn v(d: &[f64]) -> CrossVec {
    CrossVec::from_slice(d).unwrap()
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn example_models() -> (LinSys, LinSys) {
    let s1 = LinSys::continuous(m(&[&[0.0, 1.0], &[0.0, 0.0]]), m(&[&[0.0], &[1.0]])).unwrap();
    let s2 = LinSys::continuous(
        m(&[&[0.0, 0.0, 1.0], &[0.0, 0.0, 0.0], &[0.0, 1.0, 0.0]]),
        m(&[&[0.0], &[1.0], &[0.0]]),
    )
    .unwrap();
    (s1, s2)
}

fn example_scenario() -> TransientScenario {
    let (s1, s2) = example_models();
    TransientScenario::new(
        s1,
        s2,
        10.0,
        11.0,
        MuSchedule::Constant(0.5),
        v(&[1.0, -1.0]),
        Target::Explicit(v(&[1.0, 1.0, 2.0, 2.0, 1.0, 1.0])),
    )
    .unwrap()
}

fn clutch_scenario() -> TransientScenario {
    let c = clutch_models(0.2, 0.7753, 0.03, 0.03).unwrap();
    TransientScenario::new(
        c.sigma1,
        c.sigma2,
        0.0,
        1.0,
        MuSchedule::linear(0.0, 0.86).unwrap(),
        v(&[150.0, 0.0]),
        Target::Explicit(v(&[25.0, 25.0])),
    )
    .unwrap()
}

fn discrete_golden() -> Verdict {
    let mut out = Verdict::new("AC1", "discrete cross-dimensional example: action and restricted matrix");
    let a = m(&[&[1.0, 0.0, -1.0, 0.0], &[0.0, -1.0, 0.0, 1.0]]);
    let x0 = v(&[1.0, 0.0, 1.0]);
    let start = Instant::now();
    let x1 = mv2(&a, &x0);
    let star = restricted_matrix(&a, 6);
    let elapsed = start.elapsed();
    let (x1, star) = match (x1, star) {
        (Ok(x1), Ok(star)) => (x1, star),
        (x1, star) => {
            out.check(false, format!("computation failed: {:?} {:?}", x1.err(), star.err()));
            return out;
        }
    };
    let third = 1.0 / 3.0;
    let top = [2.0, 1.0, 0.0, -2.0, -1.0, 0.0].map(|e| e * third);
    let bottom = [0.0, -1.0, -2.0, 0.0, 1.0, 2.0].map(|e| e * third);
    let printed = Mat::from_fn(6, 6, |i, j| if i < 3 { top[j] } else { bottom[j] });
    let dx = x1.max_abs_diff(&CrossVec::ones(6).scale(2.0 / 3.0));
    let da = star.max_abs_diff(&printed);
    out.check(dx <= 1e-12, format!("x(1) deviates by {dx:e}"));
    out.check(da <= 1e-12, format!("A_* deviates by {da:e}"));
    out.check(elapsed < Duration::from_millis(1), format!("took {:.3} ms", ms(elapsed)));
    out.detail = format!("|x(1) err| {dx:.1e}, |A_* err| {da:.1e}, {:.3} ms", ms(elapsed));
    out
}

fn blend_golden() -> Verdict {
    let mut out = Verdict::new("AC2", "projected pair and blend for the 2-to-3 example");
    let (s1, s2) = example_models();
    let sc = example_scenario();
    let (p1, p2, blend) = match (project_system(&s1, 6), project_system(&s2, 6), build_blend(&sc)) {
        (Ok(a), Ok(b), Ok(c)) => (a, b, c),
        _ => {
            out.check(false, "projection failed");
            return out;
        }
    };
    let (t, h, q, s) = (1.0 / 3.0, 0.5, 0.25, 1.0 / 6.0);
    let f = 5.0 / 12.0;
    let a1 = Mat::from_fn(6, 6, |i, j| if i < 3 && j >= 3 { t } else { 0.0 });
    let a2 = m(&[
        &[0.0, 0.0, 0.0, 0.0, h, h],
        &[0.0, 0.0, 0.0, 0.0, h, h],
        &[0.0; 6],
        &[0.0; 6],
        &[0.0, 0.0, h, h, 0.0, 0.0],
        &[0.0, 0.0, h, h, 0.0, 0.0],
    ]);
    let a_star = m(&[
        &[0.0, 0.0, 0.0, s, f, f],
        &[0.0, 0.0, 0.0, s, f, f],
        &[0.0, 0.0, 0.0, s, s, s],
        &[0.0; 6],
        &[0.0, 0.0, q, q, 0.0, 0.0],
        &[0.0, 0.0, q, q, 0.0, 0.0],
    ]);
    let b1 = Mat::column(&[0.0, 0.0, 0.0, 1.0, 1.0, 1.0]).unwrap();
    let b2 = Mat::column(&[0.0, 0.0, 1.0, 1.0, 0.0, 0.0]).unwrap();
    let b1s = Mat::column(&[0.0, 0.0, 0.0, h, h, h]).unwrap();
    let b2s = Mat::column(&[0.0, 0.0, h, h, 0.0, 0.0]).unwrap();
    let t0 = sc.t0;
    let pairs: [(&str, Mat, &Mat); 7] = [
        ("A1_pi", p1.a.clone(), &a1),
        ("B1_pi", p1.b.clone().unwrap(), &b1),
        ("A2_pi", p2.a.clone(), &a2),
        ("B2_pi", p2.b.clone().unwrap(), &b2),
        ("A*", blend.a_at(t0), &a_star),
        ("B1*", blend.b1_at(t0).unwrap(), &b1s),
        ("B2*", blend.b2_at(t0).unwrap(), &b2s),
    ];
    let mut worst: f64 = 0.0;
    for (name, got, want) in pairs {
        let d = got.max_abs_diff(want);
        worst = worst.max(d);
        out.check(d <= 1e-12, format!("{name} deviates by {d:e}"));
    }
    out.detail = format!("7 matrices, max entry error {worst:.1e}");
    out
}

fn example_transience() -> Verdict {
    let mut out = Verdict::new("AC3", "transience of the 2-to-3 example over [10, 11]");
    let sc = example_scenario();
    let start = Instant::now();
    let rep = realize_transience(&sc);
    let elapsed = start.elapsed();
    let rep = match rep {
        Ok(r) => r,
        Err(e) => {
            out.check(false, format!("design failed: {e}"));
            return out;
        }
    };
    let target = v(&[1.0, 1.0, 2.0, 2.0, 1.0, 1.0]);
    let err = rep.endpoint.max_abs_diff(&target);
    let reduced_err = if rep.reduced.dim() == 3 {
        rep.reduced.rep().max_abs_diff(&v(&[1.0, 2.0, 1.0]))
    } else {
        f64::INFINITY
    };
    out.check(err <= 1e-6, format!("endpoint off by {err:e}"));
    out.check(rep.realized, "verdict not realized");
    out.check(reduced_err <= 1e-6, format!("reduced post-state {} (dim {})", rep.reduced.rep(), rep.reduced.dim()));
    out.check(sc.dt == 1e-3, "dt is not 1e-3");
    out.check(elapsed < Duration::from_secs(1), format!("took {:.1} ms", ms(elapsed)));
    out.detail = format!(
        "|z(te) - target| {err:.1e}, y(te) {}, {:.1} ms",
        rep.post_state,
        ms(elapsed)
    );
    out
}

fn clutch() -> Verdict {
    let mut out = Verdict::new("AC4", "clutch engagement: (150, 0) to (25, 25)");
    let rep = match realize_transience(&clutch_scenario()) {
        Ok(r) => r,
        Err(e) => {
            out.check(false, format!("design failed: {e}"));
            return out;
        }
    };
    let z = rep.endpoint.as_slice();
    let dist = ((z[0] - 25.0).powi(2) + (z[1] - 25.0).powi(2)).sqrt();
    let slip = (z[0] - z[1]).abs();
    out.check(dist <= 1e-4, format!("endpoint distance {dist:e}"));
    out.check(slip <= 1e-4, format!("speed mismatch {slip:e}"));
    out.detail = format!("|z(te) - (25,25)| {dist:.1e}, |w_i - w_o| {slip:.1e}");
    out
}

fn property_suite() -> Verdict {
    let mut out = Verdict::new("AC5", "randomized property suite");
    let start = Instant::now();
    for (name, check) in support::PROPERTIES {
        let mut runner = support::runner();
        if let Err(e) = check(&mut runner) {
            out.check(false, format!("{name}: {e}"));
        }
    }
    let elapsed = start.elapsed();
    out.check(support::CASES >= 200, format!("only {} cases", support::CASES));
    out.check(elapsed < Duration::from_secs(30), format!("took {:.1} s", elapsed.as_secs_f64()));
    out.detail = format!(
        "{} properties x {} cases, seed {:#x}, {:.1} s",
        support::PROPERTIES.len(),
        support::CASES,
        support::SEED,
        elapsed.as_secs_f64()
    );
    out
}

fn na(a: &Mat) -> DMatrix<f64> {
    DMatrix::from_row_slice(a.rows(), a.cols(), a.as_slice())
}

/// Composite Simpson rule over `nodes` equally spaced samples (odd count).
fn simpson(samples: &[DMatrix<f64>], h: f64) -> DMatrix<f64> {
    let last = samples.len() - 1;
    let mut acc = &samples[0] + &samples[last];
    for (k, s) in samples.iter().enumerate().take(last).skip(1) {
        acc += s * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * (h / 3.0)
}

/// `∫ Φ(te,τ) B(τ) B(τ)ᵀ Φ(te,τ)ᵀ dτ` with Φ built backwards from `te`
/// as a product of midpoint matrix exponentials at step `h`.
fn gramian_oracle<P: LtvPlant>(plant: &P, t0: f64, te: f64, h_target: f64) -> DMatrix<f64> {
    let steps = {
        let k = ((te - t0) / h_target).round() as usize;
        k + k % 2
    };
    let h = (te - t0) / steps as f64;
    let n = plant.order();
    let mut phi = DMatrix::<f64>::identity(n, n);
    let mut samples = Vec::with_capacity(steps + 1);
    for k in 0..=steps {
        let tau = te - k as f64 * h;
        let b = na(&plant.input(tau));
        let pb = &phi * b;
        samples.push(&pb * pb.transpose());
        if k < steps {
            let mid = na(&plant.drift(tau - 0.5 * h));
            phi = &phi * (mid * h).exp();
        }
    }
    simpson(&samples, h)
}

fn oracles() -> Verdict {
    let mut out = Verdict::new("AC6", "oracle equivalence: projection and Gramian");
    let mut rng = ChaCha8Rng::seed_from_u64(0xac6);
    let mut worst_proj: f64 = 0.0;
    for _ in 0..100 {
        let m = rng.gen_range(1..=12);
        let n = rng.gen_range(1..=12);
        let xi = CrossVec::new((0..m).map(|_| rng.gen_range(-1.0..=1.0)).collect()).unwrap();
        let got = project_vector(&xi, n).unwrap();
        let want = support::dense_projection_oracle(&xi, n);
        let d = got.as_slice().iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        worst_proj = worst_proj.max(d);
    }
    out.check(worst_proj <= 1e-9, format!("projection deviates by {worst_proj:e}"));

    let mut worst_gram: f64 = 0.0;
    for (name, sc) in [("2-to-3 example", example_scenario()), ("clutch", clutch_scenario())] {
        let g = gramian(&sc).unwrap();
        let blend = build_blend(&sc).unwrap();
        let oracle = gramian_oracle(&blend, sc.t0, sc.te, sc.dt / 10.0);
        let rel = (na(&g.w) - &oracle).norm() / oracle.norm();
        worst_gram = worst_gram.max(rel);
        out.check(rel <= 1e-6, format!("{name} Gramian relative error {rel:e}"));
    }
    out.detail = format!("projection max error {worst_proj:.1e} (100 cases), Gramian rel. error {worst_gram:.1e}");
    out
}

fn rk4_order() -> Verdict {
    let mut out = Verdict::new("AC7", "RK4 convergence order on a closed-form exponential");
    let omega = 10.0;
    let a = m(&[&[0.0, omega], &[-omega, 0.0]]);
    let x0 = v(&[1.0, 0.0]);
    let exact = [omega.cos(), -omega.sin()];
    let errors: Vec<f64> = [1e-2, 5e-3, 2.5e-3]
        .iter()
        .map(|&dt| {
            let traj = simulate_continuous(&a, &x0, 0.0, 1.0, dt).unwrap();
            let (_, x) = traj.last().unwrap();
            x.as_slice().iter().zip(exact).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt()
        })
        .collect();
    let orders: Vec<f64> = errors.windows(2).map(|w| (w[0] / w[1]).log2()).collect();
    for (i, p) in orders.iter().enumerate() {
        out.check(*p >= 3.8, format!("order {p:.3} between step {} and {}", i, i + 1));
    }
    out.detail = format!(
        "errors {:.2e}, {:.2e}, {:.2e}; orders {:.3}, {:.3}",
        errors[0], errors[1], errors[2], orders[0], orders[1]
    );
    out
}

fn main() -> ExitCode {
    let criteria: [fn() -> Verdict; 7] =
        [discrete_golden, blend_golden, example_transience, clutch, property_suite, oracles, rk4_order];
    let mut failed = 0;
    for criterion in criteria {
        let verdict = criterion();
        let status = if verdict.passed() { "PASS" } else { "FAIL" };
        println!("{status} {} {}: {}", verdict.id, verdict.title, verdict.detail);
        for f in &verdict.failures {
            println!("     {f}");
        }
        if !verdict.passed() {
            failed += 1;
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
