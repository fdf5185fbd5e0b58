//! Equivalence classes of vectors and matrices and their canonical forms.
//!
//! * vectors: `x ↔ y` iff `x ⊗ 𝟏_α = y ⊗ 𝟏_β` for some α, β
//! * matrices: `A ≈ B` iff `A ⊗ J_α = B ⊗ J_β`
//! * input matrices (vector equivalence of matrices): `B = C ⊗ 𝟏_s`
//!
//! Every class has a unique member of smallest dimension. Classes are stored
//! as that minimal representative, so equality of classes is equality of
//! representatives and any other member is produced on demand by lifting.
//!
//! Reduction is exact by default. The `_with` variants accept an absolute
//! tolerance for floating data: a block counts as constant when no entry
//! deviates from the block mean by more than `eps`, and the largest accepted
//! deviation is reported alongside the class. This tolerance rule is a
//! pragmatic choice for simulated data, not part of the algebra.

use crate::dynamics::operator_vnorm;
use crate::error::{Error, Result};
use crate::mat::{CrossVec, Mat};
use crate::projection::{LinSys, TimeKind};
use crate::stp::{divisors, gcd, j_mat, kron, mv2, ones_vec, replicate, stp2};
use crate::vspace::{vadd, vdist, vnorm};

/// Default absolute tolerance for reductions of floating-point data.
pub const DEFAULT_EPS: f64 = 1e-9;

/// Class of a vector, stored as its minimal representative.
#[derive(Debug, Clone, PartialEq)]
pub struct VecClass {
    rep: CrossVec,
}

/// Class of a matrix under `A ⊗ J_α = B ⊗ J_β`, stored as its minimal representative.
#[derive(Debug, Clone, PartialEq)]
pub struct MatClass {
    rep: Mat,
}

/// Class of a matrix under row replication `B = C ⊗ 𝟏_s`.
#[derive(Debug, Clone, PartialEq)]
pub struct VecMatClass {
    rep: Mat,
}

/// Result of a reduction: the class, the replication (or inflation) factor
/// taking the representative back to the input, and the largest in-block
/// deviation that was tolerated.
#[derive(Debug, Clone, PartialEq)]
pub struct Reduction<C> {
    pub class: C,
    pub factor: usize,
    pub deviation: f64,
}

impl VecClass {
    pub fn rep(&self) -> &CrossVec {
        &self.rep
    }

    pub fn dim(&self) -> usize {
        self.rep.dim()
    }

    pub fn zero() -> Self {
        Self { rep: CrossVec::zeros(1) }
    }

    pub fn approx_eq(&self, other: &VecClass, tol: f64) -> bool {
        self.rep.approx_eq(&other.rep, tol)
    }
}

impl MatClass {
    pub fn rep(&self) -> &Mat {
        &self.rep
    }

    pub fn approx_eq(&self, other: &MatClass, tol: f64) -> bool {
        self.rep.approx_eq(&other.rep, tol)
    }
}

impl VecMatClass {
    pub fn rep(&self) -> &Mat {
        &self.rep
    }

    pub fn approx_eq(&self, other: &VecMatClass, tol: f64) -> bool {
        self.rep.approx_eq(&other.rep, tol)
    }
}

/// Max deviation of `vals` from their mean, or `None` when above `eps`.
fn block_spread(vals: impl Iterator<Item = f64> + Clone, eps: f64) -> Option<(f64, f64)> {
    let mut count = 0usize;
    let mut sum = 0.0;
    let mut first = None;
    let mut all_equal = true;
    for v in vals.clone() {
        match first {
            None => first = Some(v),
            Some(f) => all_equal &= v == f,
        }
        sum += v;
        count += 1;
    }
    let first = first?;
    if all_equal {
        return Some((first, 0.0));
    }
    if eps == 0.0 {
        return None;
    }
    let mean = sum / count as f64;
    let dev = vals.fold(0.0f64, |m, v| m.max((v - mean).abs()));
    (dev <= eps).then_some((mean, dev))
}

pub fn reduce_vector(x: &CrossVec) -> VecClass {
    reduce_vector_with(x, 0.0).class
}

pub fn reduce_vector_with(x: &CrossVec, eps: f64) -> Reduction<VecClass> {
    let r = x.dim();
    let xs = x.as_slice();
    for d in divisors(r) {
        let block = r / d;
        let mut rep = Vec::with_capacity(d);
        let mut deviation = 0.0f64;
        let ok = (0..d).all(|i| match block_spread(xs[i * block..(i + 1) * block].iter().copied(), eps) {
            Some((v, dev)) => {
                rep.push(v);
                deviation = deviation.max(dev);
                true
            }
            None => false,
        });
        if ok {
            return Reduction {
                class: VecClass { rep: CrossVec::from_vec_unchecked(rep) },
                factor: block,
                deviation,
            };
        }
    }
    unreachable!("d = dim always succeeds")
}

pub fn vec_equivalent(x: &CrossVec, y: &CrossVec) -> bool {
    vec_equivalent_with(x, y, DEFAULT_EPS)
}

pub fn vec_equivalent_with(x: &CrossVec, y: &CrossVec, eps: f64) -> bool {
    reduce_vector_with(x, eps).class.approx_eq(&reduce_vector_with(y, eps).class, eps)
}

pub fn reduce_matrix(a: &Mat) -> MatClass {
    reduce_matrix_with(a, 0.0).class
}

pub fn reduce_matrix_with(a: &Mat, eps: f64) -> Reduction<MatClass> {
    let (rows, cols) = a.shape();
    for s in divisors(gcd(rows, cols)).into_iter().rev() {
        let (pr, pc) = (rows / s, cols / s);
        let mut rep = Mat::zeros(pr, pc);
        let mut deviation = 0.0f64;
        let mut ok = true;
        'tiles: for bi in 0..pr {
            for bj in 0..pc {
                let tile = (0..s * s).map(|k| a[(bi * s + k / s, bj * s + k % s)]);
                match block_spread(tile, eps) {
                    Some((v, dev)) => {
                        rep[(bi, bj)] = v * s as f64;
                        deviation = deviation.max(dev);
                    }
                    None => {
                        ok = false;
                        break 'tiles;
                    }
                }
            }
        }
        if ok {
            return Reduction { class: MatClass { rep }, factor: s, deviation };
        }
    }
    unreachable!("s = 1 always succeeds")
}

pub fn mat_equivalent(a: &Mat, b: &Mat) -> bool {
    mat_equivalent_with(a, b, DEFAULT_EPS)
}

pub fn mat_equivalent_with(a: &Mat, b: &Mat, eps: f64) -> bool {
    reduce_matrix_with(a, eps).class.approx_eq(&reduce_matrix_with(b, eps).class, eps)
}

pub fn reduce_vecmat(b: &Mat) -> VecMatClass {
    reduce_vecmat_with(b, 0.0).class
}

pub fn reduce_vecmat_with(b: &Mat, eps: f64) -> Reduction<VecMatClass> {
    let (rows, cols) = b.shape();
    for s in divisors(rows).into_iter().rev() {
        let pr = rows / s;
        let mut rep = Mat::zeros(pr, cols);
        let mut deviation = 0.0f64;
        let mut ok = true;
        'blocks: for bi in 0..pr {
            for j in 0..cols {
                match block_spread((0..s).map(|k| b[(bi * s + k, j)]), eps) {
                    Some((v, dev)) => {
                        rep[(bi, j)] = v;
                        deviation = deviation.max(dev);
                    }
                    None => {
                        ok = false;
                        break 'blocks;
                    }
                }
            }
        }
        if ok {
            return Reduction { class: VecMatClass { rep }, factor: s, deviation };
        }
    }
    unreachable!("s = 1 always succeeds")
}

/// `x̄ ⊞ ȳ`, independent of the chosen representatives.
pub fn class_add(x: &VecClass, y: &VecClass) -> Result<VecClass> {
    Ok(reduce_vector(&vadd(&x.rep, &y.rep)?))
}

pub fn class_scale(a: f64, x: &VecClass) -> Result<VecClass> {
    if !a.is_finite() {
        return Err(Error::OutOfRange { name: "scale", value: a });
    }
    Ok(reduce_vector(&x.rep.scale(a)))
}

pub fn class_norm(x: &VecClass) -> f64 {
    vnorm(&x.rep)
}

pub fn class_dist(x: &VecClass, y: &VecClass) -> Result<f64> {
    vdist(&x.rep, &y.rep)
}

/// `Â ∘ B̂` through the second semi-tensor product of representatives.
pub fn class_mul(a: &MatClass, b: &MatClass) -> Result<MatClass> {
    Ok(reduce_matrix_with(&stp2(&a.rep, &b.rep)?, DEFAULT_EPS).class)
}

/// `Â ⃗∘ x̄` through the MV-2 product of representatives.
pub fn class_action(a: &MatClass, x: &VecClass) -> Result<VecClass> {
    Ok(reduce_vector_with(&mv2(&a.rep, &x.rep)?, DEFAULT_EPS).class)
}

/// Operator norm of a class; equal for every member.
pub fn class_opnorm(a: &MatClass) -> Result<f64> {
    operator_vnorm(&a.rep)
}

fn lift_factor(target: usize, base: usize) -> Result<usize> {
    if target == 0 || !target.is_multiple_of(base) {
        return Err(Error::NoLift { target, base });
    }
    Ok(target / base)
}

/// The member of `x` living in ℝⁿ.
pub fn lift_vector(x: &VecClass, n: usize) -> Result<CrossVec> {
    replicate(&x.rep, lift_factor(n, x.dim())?)
}

/// The member of `a` of order n (square classes) or with n columns.
pub fn lift_matrix(a: &MatClass, n: usize) -> Result<Mat> {
    let k = lift_factor(n, a.rep.cols())?;
    kron(&a.rep, &j_mat(k))
}

/// Linear system stored by the classes of its matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassSys {
    pub a: MatClass,
    pub b: Option<VecMatClass>,
    pub c: Option<MatClass>,
    pub time_kind: TimeKind,
}

pub fn reduce_system(sys: &LinSys) -> ClassSys {
    ClassSys {
        a: reduce_matrix_with(&sys.a, DEFAULT_EPS).class,
        b: sys.b.as_ref().map(|b| reduce_vecmat_with(b, DEFAULT_EPS).class),
        c: sys.c.as_ref().map(|c| reduce_matrix_with(c, DEFAULT_EPS).class),
        time_kind: sys.time_kind,
    }
}

/// The lifting system `(Λ ⊗ J_k, B ⊗ 𝟏_k, C ⊗ J_k)` on ℝⁿ.
pub fn lift_system(sys: &ClassSys, n: usize) -> Result<LinSys> {
    if !sys.a.rep.is_square() {
        return Err(Error::Shape("class system drift must be square".into()));
    }
    let a = lift_matrix(&sys.a, n)?;
    let b = match &sys.b {
        Some(b) => {
            let k = lift_factor(n, b.rep.rows())?;
            Some(kron(&b.rep, &ones_vec(k))?)
        }
        None => None,
    };
    let c = match &sys.c {
        Some(c) => Some(lift_matrix(c, n)?),
        None => None,
    };
    LinSys::new(a, b, c, sys.time_kind)
}

/// Whether two systems are liftings of a common class system, i.e. whether
/// `A⊗J_r = A'⊗J_s`, `B⊗𝟏_r = B'⊗𝟏_s` and `C⊗J_r = C'⊗J_s` for some r, s.
pub fn systems_equivalent(s1: &LinSys, s2: &LinSys) -> bool {
    if s1.time_kind != s2.time_kind {
        return false;
    }
    let (c1, c2) = (reduce_system(s1), reduce_system(s2));
    let eps = DEFAULT_EPS;
    c1.a.approx_eq(&c2.a, eps)
        && match (&c1.b, &c2.b) {
            (None, None) => true,
            (Some(x), Some(y)) => x.approx_eq(y, eps),
            _ => false,
        }
        && match (&c1.c, &c2.c) {
            (None, None) => true,
            (Some(x), Some(y)) => x.approx_eq(y, eps),
            _ => false,
        }
}
