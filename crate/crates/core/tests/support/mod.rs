//! Randomized properties shared by the property tests and the acceptance runner.
#![allow(dead_code)]

use crossdim::dynamics::{dimension_orbit, restricted_matrix};
use crossdim::quotient::{
    class_action, class_add, class_dist, class_opnorm, lift_matrix, lift_vector, reduce_matrix,
    reduce_vector, vec_equivalent,
};
use crossdim::stp::{j_mat, mv2_dim, replicate};
use crossdim::transient::{gramian, min_energy_control, realize_transience};
use crossdim::{
    kron, lcm, mv2, operator_vnorm, path, pi_matrix, project_sysmatrix, project_vector,
    simulate_discrete, spectral_norm, stp1, stp2, vadd, vdist, vinner, vnorm, vsub, CrossVec, LinSys,
    Mat, MuSchedule, Target, TransientScenario,
};
use nalgebra::DMatrix;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngSeed, TestCaseError, TestRunner};

pub const CASES: u32 = 256;
pub const SEED: u64 = 0x5eed_0fc0_ffee;

pub fn config() -> Config {
    Config {
        cases: CASES,
        rng_seed: RngSeed::Fixed(SEED),
        failure_persistence: None,
        ..Config::default()
    }
}

pub fn runner() -> TestRunner {
    TestRunner::new(config())
}

pub type Check = fn(&mut TestRunner) -> Result<(), String>;

pub fn mat(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Mat> {
    (1..=max_rows, 1..=max_cols).prop_flat_map(|(r, c)| {
        prop::collection::vec(-1.0..=1.0f64, r * c).prop_map(move |d| Mat::new(r, c, d).unwrap())
    })
}

pub fn square(max: usize) -> impl Strategy<Value = Mat> {
    (1..=max).prop_flat_map(|n| {
        prop::collection::vec(-1.0..=1.0f64, n * n).prop_map(move |d| Mat::new(n, n, d).unwrap())
    })
}

pub fn vector(max: usize) -> impl Strategy<Value = CrossVec> {
    prop::collection::vec(-1.0..=1.0f64, 1..=max).prop_map(|d| CrossVec::new(d).unwrap())
}

fn vector_of(dim: usize) -> impl Strategy<Value = CrossVec> {
    prop::collection::vec(-1.0..=1.0f64, dim).prop_map(|d| CrossVec::new(d).unwrap())
}

pub fn na(m: &Mat) -> DMatrix<f64> {
    DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice())
}

fn close(a: f64, b: f64, tol: f64) -> Result<(), TestCaseError> {
    prop_assert!((a - b).abs() <= tol, "{a} vs {b} (tol {tol})");
    Ok(())
}

fn run<S: Strategy>(
    r: &mut TestRunner,
    s: S,
    f: impl Fn(S::Value) -> Result<(), TestCaseError>,
) -> Result<(), String> {
    r.run(&s, f).map_err(|e| e.to_string())
}

/// `A ⊗ J_k` by explicit Kronecker product in nalgebra.
fn na_inflate(a: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    a.kronecker(&DMatrix::from_element(k, k, 1.0 / k as f64))
}

// ---- semi-tensor products ----

pub fn stp2_associativity(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), mat(4, 4), mat(4, 4)), |(a, b, c)| {
        let left = stp2(&stp2(&a, &b).unwrap(), &c).unwrap();
        let right = stp2(&a, &stp2(&b, &c).unwrap()).unwrap();
        prop_assert_eq!(left.shape(), right.shape());
        prop_assert!(left.max_abs_diff(&right) <= 1e-9);
        Ok(())
    })
}

pub fn action_law(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), mat(4, 4), vector(6)), |(a, b, x)| {
        let left = mv2(&stp2(&a, &b).unwrap(), &x).unwrap();
        let right = mv2(&a, &mv2(&b, &x).unwrap()).unwrap();
        prop_assert_eq!(left.dim(), right.dim());
        prop_assert!(left.max_abs_diff(&right) <= 1e-9);
        Ok(())
    })
}

pub fn stp2_matches_kronecker_oracle(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), mat(4, 4), vector(6)), |(a, b, x)| {
        let t = lcm(a.cols(), b.rows()).unwrap();
        let want = na_inflate(&na(&a), t / a.cols()) * na_inflate(&na(&b), t / b.rows());
        let got = stp2(&a, &b).unwrap();
        prop_assert!((na(&got) - want).abs().max() <= 1e-12);

        let t = lcm(a.cols(), x.dim()).unwrap();
        let xs = DMatrix::from_column_slice(x.dim(), 1, x.as_slice())
            .kronecker(&DMatrix::from_element(t / x.dim(), 1, 1.0));
        let want = na_inflate(&na(&a), t / a.cols()) * xs;
        let got = mv2(&a, &x).unwrap();
        prop_assert_eq!(got.dim(), want.nrows());
        for (g, w) in got.as_slice().iter().zip(want.iter()) {
            close(*g, *w, 1e-12)?;
        }
        Ok(())
    })
}

pub fn kron_of_averaging_blocks(r: &mut TestRunner) -> Result<(), String> {
    run(r, (1usize..=8, 1usize..=8), |(p, q)| {
        let got = kron(&j_mat(p), &j_mat(q)).unwrap();
        prop_assert!(got.max_abs_diff(&j_mat(p * q)) <= 1e-15);
        Ok(())
    })
}

pub fn spectral_norm_inflation_invariance(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(5, 5), 1usize..=4), |(a, k)| {
        let inflated = kron(&a, &j_mat(k)).unwrap();
        close(spectral_norm(&inflated).unwrap(), spectral_norm(&a).unwrap(), 1e-9)
    })
}

pub fn spectral_norm_matches_oracle(r: &mut TestRunner) -> Result<(), String> {
    run(r, mat(8, 8), |a| {
        let want = na(&a).singular_values().max();
        close(spectral_norm(&a).unwrap(), want, 1e-10 * want.max(1.0))
    })
}

pub fn conforming_products_are_ordinary(r: &mut TestRunner) -> Result<(), String> {
    let s = (1usize..=4, 1usize..=4, 1usize..=4).prop_flat_map(|(m, n, p)| {
        (
            prop::collection::vec(-1.0..=1.0f64, m * n).prop_map(move |d| Mat::new(m, n, d).unwrap()),
            prop::collection::vec(-1.0..=1.0f64, n * p).prop_map(move |d| Mat::new(n, p, d).unwrap()),
        )
    });
    run(r, s, |(a, b)| {
        let plain = a.dot(&b).unwrap();
        prop_assert_eq!(stp1(&a, &b).unwrap(), plain.clone());
        prop_assert_eq!(stp2(&a, &b).unwrap(), plain);
        Ok(())
    })
}

// ---- dimension-free space ----

pub fn distance_is_class_invariant(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(6), vector(6), 1usize..=4, 1usize..=4), |(x, y, k, l)| {
        let d = vdist(&x, &y).unwrap();
        let dl = vdist(&replicate(&x, k).unwrap(), &replicate(&y, l).unwrap()).unwrap();
        close(d, dl, 1e-12)
    })
}

pub fn cauchy_schwarz(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(8), vector(8)), |(x, y)| {
        prop_assert!(vinner(&x, &y).unwrap().abs() <= vnorm(&x) * vnorm(&y) + 1e-12);
        Ok(())
    })
}

pub fn addition_laws_up_to_equivalence(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(6), vector(6), vector(6)), |(x, y, z)| {
        prop_assert!(vec_equivalent(&vadd(&x, &y).unwrap(), &vadd(&y, &x).unwrap()));
        let l = vadd(&vadd(&x, &y).unwrap(), &z).unwrap();
        let rr = vadd(&x, &vadd(&y, &z).unwrap()).unwrap();
        prop_assert!(vdist(&l, &rr).unwrap() <= 1e-12);
        Ok(())
    })
}

pub fn path_is_lipschitz(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(6), vector(6), 0.0..=1.0f64, 0.0..=1.0f64), |(x, y, a, b)| {
        let d = vdist(&path(&x, &y, a).unwrap(), &path(&x, &y, b).unwrap()).unwrap();
        prop_assert!(d <= (a - b).abs() * vdist(&x, &y).unwrap() + 1e-12);
        Ok(())
    })
}

// ---- projections ----

pub fn projector_structure(r: &mut TestRunner) -> Result<(), String> {
    run(r, (1usize..=12, 1usize..=12), |(m, n)| {
        let p = pi_matrix(m, n).unwrap();
        for i in 0..n {
            prop_assert_eq!(p.mat.row(i).iter().sum::<f64>(), 1.0);
        }
        let back = pi_matrix(n, m).unwrap();
        let ratio = p.beta() as f64 / p.alpha() as f64;
        prop_assert!(back.mat.max_abs_diff(&p.mat.transpose().scale(ratio)) <= 1e-12);
        Ok(())
    })
}

pub fn projection_orthogonality(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(12), 1usize..=12), |(xi, n)| {
        let x = project_vector(&xi, n).unwrap();
        prop_assert!(vinner(&vsub(&xi, &x).unwrap(), &x).unwrap().abs() <= 1e-10);
        Ok(())
    })
}

pub fn projection_is_least_squares_optimal(r: &mut TestRunner) -> Result<(), String> {
    let s = (vector(12), 1usize..=12).prop_flat_map(|(xi, n)| {
        (Just(xi), prop::collection::vec(vector_of(n), 100))
    });
    run(r, s, |(xi, perturbations)| {
        let n = perturbations[0].dim();
        let x = project_vector(&xi, n).unwrap();
        let best = vnorm(&vsub(&xi, &x).unwrap());
        for p in perturbations {
            let other = vadd(&x, &p.scale(0.1)).unwrap();
            prop_assert!(vnorm(&vsub(&xi, &other).unwrap()) >= best - 1e-12);
        }
        Ok(())
    })
}

/// Dense least-squares solve of `min ‖ξ ⊗ 𝟏_{t/m} − (I_n ⊗ 𝟏_{t/n}) x‖`.
pub fn dense_projection_oracle(xi: &CrossVec, n: usize) -> Vec<f64> {
    let m = xi.dim();
    let t = lcm(m, n).unwrap();
    let (a, b) = (t / m, t / n);
    let lhs = DMatrix::from_fn(t, n, |i, j| if i / b == j { 1.0 } else { 0.0 });
    let rhs = DMatrix::from_fn(t, 1, |i, _| xi[i / a]);
    let sol = lhs.svd(true, true).solve(&rhs, 1e-14).unwrap();
    sol.iter().copied().collect()
}

pub fn projection_matches_dense_lstsq(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(12), 1usize..=12), |(xi, n)| {
        let got = project_vector(&xi, n).unwrap();
        for (g, w) in got.as_slice().iter().zip(dense_projection_oracle(&xi, n)) {
            close(*g, w, 1e-9)?;
        }
        Ok(())
    })
}

pub fn inflated_matrix_projection(r: &mut TestRunner) -> Result<(), String> {
    run(r, (square(4), 2usize..=4), |(a, k)| {
        let got = project_sysmatrix(&a, k * a.rows()).unwrap();
        prop_assert!(got.max_abs_diff(&kron(&a, &j_mat(k)).unwrap()) <= 1e-10);
        Ok(())
    })
}

pub fn system_projection_matches_pinv(r: &mut TestRunner) -> Result<(), String> {
    run(r, (square(6), 1usize..=6), |(a, n)| {
        let p = na(&pi_matrix(a.rows(), n).unwrap().mat);
        let want = &p * na(&a) * p.clone().pseudo_inverse(1e-12).unwrap();
        let got = na(&project_sysmatrix(&a, n).unwrap());
        prop_assert!((got - want).abs().max() <= 1e-9);
        Ok(())
    })
}

// ---- quotient ----

pub fn reduce_after_lift_is_identity(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(6), 1usize..=8), |(x, k)| {
        let class = reduce_vector(&x);
        let lifted = lift_vector(&class, k * class.dim()).unwrap();
        prop_assert_eq!(reduce_vector(&lifted), class);
        Ok(())
    })
}

pub fn class_operations_ignore_representative(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(5), vector(5), 1usize..=4, 1usize..=4), |(x, y, k, l)| {
        let y = reduce_vector(&y);
        let xk = reduce_vector(&replicate(&x, k).unwrap());
        let xl = reduce_vector(&replicate(&x, l).unwrap());
        prop_assert_eq!(&xk, &xl);
        prop_assert_eq!(class_add(&xk, &y).unwrap(), class_add(&xl, &y).unwrap());
        prop_assert_eq!(class_dist(&xk, &y).unwrap(), class_dist(&xl, &y).unwrap());
        Ok(())
    })
}

pub fn class_distance_separates(r: &mut TestRunner) -> Result<(), String> {
    run(r, (vector(4), vector(4), 1usize..=3), |(x, y, k)| {
        let (cx, cy) = (reduce_vector(&x), reduce_vector(&y));
        let lifted = reduce_vector(&replicate(&x, k).unwrap());
        prop_assert_eq!(class_dist(&cx, &lifted).unwrap(), 0.0);
        prop_assert_eq!(class_dist(&cx, &cy).unwrap() == 0.0, cx == cy);
        Ok(())
    })
}

pub fn class_action_commutes_with_lifting(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(3, 3), vector(4), 1usize..=3), |(a, x, k)| {
        let (ca, cx) = (reduce_matrix(&a), reduce_vector(&x));
        let image = class_action(&ca, &cx).unwrap();
        let lifted = lift_vector(&image, k * image.dim()).unwrap();
        prop_assert!(reduce_vector(&lifted).approx_eq(&image, 0.0));
        Ok(())
    })
}

pub fn class_opnorm_is_lift_invariant(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), 1usize..=4), |(a, k)| {
        let ca = reduce_matrix(&a);
        let lifted = lift_matrix(&ca, k * ca.rep().cols()).unwrap();
        close(class_opnorm(&ca).unwrap(), operator_vnorm(&lifted).unwrap(), 1e-10)
    })
}

// ---- dynamics ----

pub fn operator_norm_dominates_gains(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), vector(8)), |(a, x)| {
        let bound = operator_vnorm(&a).unwrap();
        let gain = vnorm(&mv2(&a, &x).unwrap());
        prop_assert!(gain <= bound * vnorm(&x) * (1.0 + 1e-12) + 1e-12);
        Ok(())
    })
}

pub fn action_is_lipschitz(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(4, 4), vector(6), vector(6)), |(a, x, y)| {
        let lhs = vnorm(&vsub(&mv2(&a, &x).unwrap(), &mv2(&a, &y).unwrap()).unwrap());
        prop_assert!(lhs <= operator_vnorm(&a).unwrap() * vdist(&x, &y).unwrap() + 1e-9);
        Ok(())
    })
}

fn invariant_case() -> impl Strategy<Value = (Mat, CrossVec)> {
    (mat(4, 4), 1usize..=8)
        .prop_filter_map("orbit without a fixed dimension", |(a, r0)| {
            let d = dimension_orbit(&a, r0, 16).ok()?.fixed_dim()?;
            (d <= 48).then_some((a, d))
        })
        .prop_flat_map(|(a, d)| (Just(a), vector_of(d)))
}

pub fn restricted_matrix_reproduces_action(r: &mut TestRunner) -> Result<(), String> {
    run(r, invariant_case(), |(a, x)| {
        let star = restricted_matrix(&a, x.dim()).unwrap();
        let direct = mv2(&a, &x).unwrap();
        for (s, d) in star.mul_vec(x.as_slice()).iter().zip(direct.as_slice()) {
            close(*s, *d, 1e-12)?;
        }
        Ok(())
    })
}

pub fn trajectory_dims_follow_orbit(r: &mut TestRunner) -> Result<(), String> {
    run(r, (mat(3, 3), vector(6)), |(a, x)| {
        let orbit = dimension_orbit(&a, x.dim(), 8).unwrap();
        prop_assume!(orbit.dims.iter().all(|&d| d <= 4096));
        let traj = simulate_discrete(&a, &x, orbit.dims.len() - 1).unwrap();
        prop_assert_eq!(traj.dims(), orbit.dims.clone());
        for w in orbit.dims.windows(2) {
            prop_assert_eq!(mv2_dim(a.rows(), a.cols(), w[0]).unwrap(), w[1]);
        }
        Ok(())
    })
}

// ---- transient design ----

/// Two small continuous systems with well-conditioned inputs, orders dividing each other.
fn transient_case() -> impl Strategy<Value = TransientScenario> {
    let order = prop::sample::select(vec![1usize, 2, 4]);
    (order.clone(), order).prop_flat_map(|(p, q)| {
        let sys = |k: usize| {
            (
                prop::collection::vec(-1.0..=1.0f64, k * k),
                prop::collection::vec(-0.3..=0.3f64, k * k),
            )
                .prop_map(move |(a, b)| {
                    let a = Mat::new(k, k, a).unwrap();
                    let b = &Mat::identity(k) + &Mat::new(k, k, b).unwrap();
                    LinSys::continuous(a, b).unwrap()
                })
        };
        let n = p.max(q);
        (sys(p), sys(q), vector_of(p), vector_of(q), any::<bool>()).prop_map(
            move |(s1, s2, x0, y, linear)| {
                let target = replicate(&y, n / q).unwrap().scale(2.0);
                let mu = if linear {
                    MuSchedule::linear(0.0, 1.0).unwrap()
                } else {
                    MuSchedule::constant(0.5).unwrap()
                };
                TransientScenario::new(s1, s2, 0.0, 1.0, mu, x0, Target::Explicit(target))
                    .unwrap()
                    .with_dt(1e-2)
                    .unwrap()
            },
        )
    })
}

pub fn gramian_is_symmetric(r: &mut TestRunner) -> Result<(), String> {
    run(r, transient_case(), |sc| {
        let g = gramian(&sc).unwrap();
        let asym = g.w.max_abs_diff(&g.w.transpose());
        prop_assert!(asym <= 1e-12 * g.w.frobenius_norm());
        Ok(())
    })
}

pub fn steering_matches_design(r: &mut TestRunner) -> Result<(), String> {
    run(r, transient_case(), |sc| {
        let ctl = min_energy_control(&sc).unwrap();
        let rep = realize_transience(&sc).unwrap();
        let scale = 1.0 + ctl.target.euclid_norm() + ctl.eta.iter().map(|e| e.abs()).sum::<f64>();
        let tol = 10.0 * sc.dt.powi(4) * scale;
        let gap = rep.endpoint.max_abs_diff(&ctl.predicted_endpoint);
        prop_assert!(gap <= tol, "gap {gap} > {tol}");
        prop_assert!(rep.realized);
        Ok(())
    })
}

pub const PROPERTIES: &[(&str, Check)] = &[
    ("stp2_associativity", stp2_associativity),
    ("action_law", action_law),
    ("stp2_matches_kronecker_oracle", stp2_matches_kronecker_oracle),
    ("kron_of_averaging_blocks", kron_of_averaging_blocks),
    ("spectral_norm_inflation_invariance", spectral_norm_inflation_invariance),
    ("spectral_norm_matches_oracle", spectral_norm_matches_oracle),
    ("conforming_products_are_ordinary", conforming_products_are_ordinary),
    ("distance_is_class_invariant", distance_is_class_invariant),
    ("cauchy_schwarz", cauchy_schwarz),
    ("addition_laws_up_to_equivalence", addition_laws_up_to_equivalence),
    ("path_is_lipschitz", path_is_lipschitz),
    ("projector_structure", projector_structure),
    ("projection_orthogonality", projection_orthogonality),
    ("projection_is_least_squares_optimal", projection_is_least_squares_optimal),
    ("projection_matches_dense_lstsq", projection_matches_dense_lstsq),
    ("inflated_matrix_projection", inflated_matrix_projection),
    ("system_projection_matches_pinv", system_projection_matches_pinv),
    ("reduce_after_lift_is_identity", reduce_after_lift_is_identity),
    ("class_operations_ignore_representative", class_operations_ignore_representative),
    ("class_distance_separates", class_distance_separates),
    ("class_action_commutes_with_lifting", class_action_commutes_with_lifting),
    ("class_opnorm_is_lift_invariant", class_opnorm_is_lift_invariant),
    ("operator_norm_dominates_gains", operator_norm_dominates_gains),
    ("action_is_lipschitz", action_is_lipschitz),
    ("restricted_matrix_reproduces_action", restricted_matrix_reproduces_action),
    ("trajectory_dims_follow_orbit", trajectory_dims_follow_orbit),
    ("gramian_is_symmetric", gramian_is_symmetric),
    ("steering_matches_design", steering_matches_design),
];
